#include <peeltrace/chain_store.hpp>

#include <fstream>
#include <istream>
#include <sstream>

namespace peeltrace {

ChainStore ChainStore::ingest(std::istream &in)
{
    ChainStore store;
    std::string line;
    std::size_t lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty()) {
            continue;
        }
        store.addRecord(parseRecord(line, lineNo), lineNo);
    }
    return store;
}

ChainStore ChainStore::ingestFile(const std::string &path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open ledger file: " + path);
    }
    return ingest(in);
}

ChainStore ChainStore::ingestRecords(const std::vector<TxRecord> &records)
{
    ChainStore store;
    std::size_t lineNo = 0;
    for (const auto &rec : records) {
        store.addRecord(rec, ++lineNo);
    }
    return store;
}

std::optional<TxIndex> ChainStore::txIndexOf(std::string_view txid) const
{
    auto it = txidIndex_.find(std::string(txid));
    if (it == txidIndex_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<AddressId> ChainStore::addressId(std::string_view name) const
{
    auto it = addressIndex_.find(std::string(name));
    if (it == addressIndex_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<TxIndex> ChainStore::nextHop(TxIndex tx, std::uint32_t outIdx) const
{
    const auto &out = txs_[tx].outputs[outIdx];
    if (!out.isSpent()) {
        return std::nullopt;
    }
    return out.spentBy;
}

std::pair<TxIndex, std::uint32_t> ChainStore::prevHop(TxIndex tx, std::uint32_t inIdx) const
{
    const auto &in = txs_[tx].inputs[inIdx];
    return {in.prevTx, in.prevIndex};
}

AddressId ChainStore::internAddress(const std::string &name, AddressType type, TxIndex at,
                                    std::size_t lineNo, const std::string &txid)
{
    auto it = addressIndex_.find(name);
    if (it != addressIndex_.end()) {
        if (addressTypes_[it->second] != type) {
            throw RecordError(lineNo, txid,
                              "address " + name + " reappears with a different type");
        }
        return it->second;
    }
    auto id = static_cast<AddressId>(addressNames_.size());
    addressNames_.push_back(name);
    addressTypes_.push_back(type);
    addressFirstSeen_.push_back(at);
    addressIndex_.emplace(name, id);
    return id;
}

void ChainStore::addRecord(const TxRecord &record, std::size_t lineNo)
{
    if (txidIndex_.count(record.txid)) {
        throw RecordError(lineNo, record.txid, "duplicate txid");
    }

    std::uint64_t order = (static_cast<std::uint64_t>(record.height) << 32) | record.index;
    if (haveLastOrder_ && order <= lastOrder_) {
        throw RecordError(lineNo, record.txid,
                          "records out of order: (height,index) must be strictly increasing");
    }
    lastOrder_ = order;
    haveLastOrder_ = true;

    auto idx = static_cast<TxIndex>(txs_.size());
    Transaction tx;
    tx.txid = record.txid;
    tx.version = record.version;
    tx.locktime = record.locktime;
    tx.segwit = record.segwit;
    tx.height = record.height;
    tx.index = record.index;
    tx.coinbase = record.coinbase;

    std::int64_t inputSum = 0;
    for (const auto &inRec : record.inputs) {
        auto prevIt = txidIndex_.find(inRec.prevTxid);
        if (prevIt == txidIndex_.end()) {
            throw RecordError(lineNo, record.txid,
                              "dangling reference to unknown txid " + inRec.prevTxid);
        }
        auto &prev = txs_[prevIt->second];
        if (inRec.prevIndex >= prev.outputs.size()) {
            throw RecordError(lineNo, record.txid,
                              "prev_index " + std::to_string(inRec.prevIndex) +
                                  " out of range for txid " + inRec.prevTxid);
        }
        auto &spent = prev.outputs[inRec.prevIndex];
        if (spent.isSpent()) {
            throw RecordError(lineNo, record.txid,
                              "double-spend of " + inRec.prevTxid + ":" +
                                  std::to_string(inRec.prevIndex) + ", already spent by " +
                                  txs_[spent.spentBy].txid);
        }
        spent.spentBy = idx;

        TxInput in;
        in.prevTx = prevIt->second;
        in.prevIndex = inRec.prevIndex;
        in.sequence = inRec.sequence;
        in.address = spent.address;
        in.value = spent.value;
        inputSum += spent.value;
        tx.inputs.push_back(in);
    }

    std::int64_t outputSum = 0;
    for (const auto &outRec : record.outputs) {
        TxOutput out;
        out.address = internAddress(outRec.address, outRec.type, idx, lineNo, record.txid);
        out.type = outRec.type;
        out.value = outRec.value;
        outputSum += outRec.value;
        tx.outputs.push_back(out);
    }

    if (!record.coinbase && outputSum > inputSum) {
        throw RecordError(lineNo, record.txid,
                          "outputs exceed inputs by " + std::to_string(outputSum - inputSum) +
                              " satoshis");
    }

    txs_.push_back(std::move(tx));
    txidIndex_.emplace(record.txid, idx);
}

} // namespace peeltrace
