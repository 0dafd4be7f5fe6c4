#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <peeltrace/address_type.hpp>

namespace peeltrace {

// One transaction as it appears on the wire: a single JSON object per line.
// Field order on output is fixed so that identical ledgers are byte identical.

struct InputRecord {
    std::string prevTxid;
    std::uint32_t prevIndex = 0;
    std::uint32_t sequence = 0xffffffffu;
};

struct OutputRecord {
    std::string address;
    AddressType type = AddressType::p2pkh_compressed;
    std::int64_t value = 0;
};

struct TxRecord {
    std::string txid;
    std::uint8_t version = 1;
    std::uint32_t locktime = 0;
    bool segwit = false;
    std::uint32_t height = 0;
    std::uint32_t index = 0;
    bool coinbase = false;
    std::vector<InputRecord> inputs;
    std::vector<OutputRecord> outputs;
};

class RecordError : public std::runtime_error {
public:
    RecordError(std::size_t line, std::string txid, const std::string &what);

    std::size_t line() const { return line_; }
    const std::string &txid() const { return txid_; }

private:
    std::size_t line_;
    std::string txid_;
};

// Parses one ledger line. lineNo is 1-based and only used for error reports.
TxRecord parseRecord(std::string_view line, std::size_t lineNo);

// Serializes with fixed key order and no whitespace. Inverse of parseRecord.
std::string serializeRecord(const TxRecord &record);

} // namespace peeltrace
