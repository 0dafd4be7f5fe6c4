#pragma once

// Hand-built ledgers for tests. Fixtures are assembled from raw records so
// they stay independent of the scenario generator under test.

#include <cstdint>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include <peeltrace/chain_store.hpp>
#include <peeltrace/features.hpp>
#include <peeltrace/record.hpp>

namespace peeltrace::test {

inline std::string hexTxid(std::uint64_t n)
{
    static const char digits[] = "0123456789abcdef";
    std::string s(64, '0');
    for (int i = 0; i < 16; ++i) {
        s[63 - i] = digits[(n >> (4 * i)) & 0xf];
    }
    return s;
}

struct Out {
    std::string address;
    std::int64_t value = 0;
    AddressType type = AddressType::p2pkh_compressed;
};

// Accumulates records in emission order; one record per height so ordering
// constraints never interfere with a test's topology.
class Fixture {
public:
    std::string coinbase(std::initializer_list<Out> outs, FeatureTuple tuple = {})
    {
        return add(true, {}, outs, tuple);
    }

    std::string spend(std::initializer_list<std::pair<std::string, std::uint32_t>> ins,
                      std::initializer_list<Out> outs, FeatureTuple tuple = {})
    {
        return add(false, ins, outs, tuple);
    }

    const std::vector<TxRecord> &records() const { return records_; }

    ChainStore store() const { return ChainStore::ingestRecords(records_); }

    std::string jsonl() const
    {
        std::string text;
        for (const auto &rec : records_) {
            text += serializeRecord(rec);
            text += '\n';
        }
        return text;
    }

private:
    std::string add(bool coinbase,
                    std::initializer_list<std::pair<std::string, std::uint32_t>> ins,
                    std::initializer_list<Out> outs, FeatureTuple tuple)
    {
        TxRecord rec;
        rec.txid = hexTxid(records_.size() + 1);
        rec.version = tuple.version;
        rec.locktime = tuple.locktimeSet ? 500000 : 0;
        rec.segwit = tuple.segwit;
        rec.height = static_cast<std::uint32_t>(records_.size() + 1);
        rec.index = 0;
        rec.coinbase = coinbase;
        for (const auto &[prev, idx] : ins) {
            InputRecord in;
            in.prevTxid = prev;
            in.prevIndex = idx;
            in.sequence = tuple.replaceable ? 0xfffffffdu : 0xffffffffu;
            rec.inputs.push_back(in);
        }
        for (const auto &o : outs) {
            OutputRecord out;
            out.address = o.address;
            out.type = o.type;
            out.value = o.value;
            rec.outputs.push_back(out);
        }
        records_.push_back(rec);
        return records_.back().txid;
    }

    std::vector<TxRecord> records_;
};

} // namespace peeltrace::test
