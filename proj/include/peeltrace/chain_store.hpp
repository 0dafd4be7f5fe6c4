#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <peeltrace/record.hpp>

namespace peeltrace {

using TxIndex = std::uint32_t;
using AddressId = std::uint32_t;

inline constexpr TxIndex kNoTx = 0xffffffffu;

struct TxInput {
    TxIndex prevTx = kNoTx;
    std::uint32_t prevIndex = 0;
    std::uint32_t sequence = 0xffffffffu;
    AddressId address = 0;
    std::int64_t value = 0;
};

struct TxOutput {
    AddressId address = 0;
    AddressType type = AddressType::p2pkh_compressed;
    std::int64_t value = 0;
    // Transaction that consumes this output, kNoTx while unspent.
    TxIndex spentBy = kNoTx;

    bool isSpent() const { return spentBy != kNoTx; }
};

struct Transaction {
    std::string txid;
    std::uint8_t version = 1;
    std::uint32_t locktime = 0;
    bool segwit = false;
    std::uint32_t height = 0;
    std::uint32_t index = 0;
    bool coinbase = false;
    std::vector<TxInput> inputs;
    std::vector<TxOutput> outputs;

    bool locktimeSet() const { return locktime > 0; }
};

// Fully linked view of a ledger. Built once at ingest; immutable afterwards.
// Every input points back at the output it consumes and every spent output
// knows the transaction that consumed it, so hop queries are O(1).
class ChainStore {
public:
    static ChainStore ingest(std::istream &in);
    static ChainStore ingestFile(const std::string &path);
    static ChainStore ingestRecords(const std::vector<TxRecord> &records);

    std::size_t txCount() const { return txs_.size(); }
    const Transaction &tx(TxIndex idx) const { return txs_[idx]; }
    std::optional<TxIndex> txIndexOf(std::string_view txid) const;

    // Transaction spending output outIdx of tx, if any.
    std::optional<TxIndex> nextHop(TxIndex tx, std::uint32_t outIdx) const;
    // Transaction that created input inIdx of tx, plus the position that
    // input's consumed output had among that transaction's outputs.
    std::pair<TxIndex, std::uint32_t> prevHop(TxIndex tx, std::uint32_t inIdx) const;

    std::size_t addressCount() const { return addressNames_.size(); }
    const std::string &addressName(AddressId id) const { return addressNames_[id]; }
    std::optional<AddressId> addressId(std::string_view name) const;
    AddressType addressTypeOf(AddressId id) const { return addressTypes_[id]; }

    // Transaction in which the address appeared for the first time. Addresses
    // always surface as outputs first, inputs only reference prior outputs.
    TxIndex firstSeen(AddressId id) const { return addressFirstSeen_[id]; }
    bool isFresh(AddressId id, TxIndex atTx) const { return addressFirstSeen_[id] == atTx; }

private:
    ChainStore() = default;

    void addRecord(const TxRecord &record, std::size_t lineNo);
    AddressId internAddress(const std::string &name, AddressType type, TxIndex at,
                            std::size_t lineNo, const std::string &txid);

    std::vector<Transaction> txs_;
    std::unordered_map<std::string, TxIndex> txidIndex_;

    std::vector<std::string> addressNames_;
    std::vector<AddressType> addressTypes_;
    std::vector<TxIndex> addressFirstSeen_;
    std::unordered_map<std::string, AddressId> addressIndex_;

    std::uint64_t lastOrder_ = 0;
    bool haveLastOrder_ = false;
};

} // namespace peeltrace
