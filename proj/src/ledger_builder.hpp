#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <peeltrace/features.hpp>
#include <peeltrace/record.hpp>
#include <peeltrace/synthgen.hpp>

namespace peeltrace::synth {

// One spendable output produced during generation.
struct UtxoRef {
    std::string txid;
    std::uint32_t index = 0;
    std::string address;
    AddressType type = AddressType::p2pkh_compressed;
    std::int64_t value = 0;
};

struct OutSpec {
    std::string address;
    AddressType type = AddressType::p2pkh_compressed;
    std::int64_t value = 0;
};

struct TxSpec {
    std::string entity;
    std::string chain; // empty when the tx is not a hop of any chain
    bool coinjoin = false;
    FeatureTuple tuple;
    std::vector<UtxoRef> inputs; // empty = coinbase
    std::vector<OutSpec> outputs;
};

// Accumulates records in emission order, assigning monotone (height, index)
// and unique txids/addresses, and labels everything in the ground truth.
class LedgerBuilder {
public:
    LedgerBuilder(std::uint64_t seed, std::uint32_t txsPerBlock = 4)
        : rng_(Rng::mix(seed) ^ 0x5bf0363546bd5f1dull),
          idBase_(Rng::mix(seed ^ 0x8af6347cc193ff25ull)),
          txsPerBlock_(txsPerBlock)
    {
    }

    Rng &rng() { return rng_; }
    GroundTruth &truth() { return truth_; }
    const std::vector<TxRecord> &records() const { return records_; }

    // Registers a brand-new address for the entity.
    std::string newAddress(const std::string &entity, AddressType type);
    // Marks an existing (externally chosen) address as owned by the entity.
    void labelAddress(const std::string &address, const std::string &entity);

    std::vector<UtxoRef> add(const TxSpec &spec);

    std::string ledgerText() const;

private:
    std::string nextTxid();

    Rng rng_;
    std::uint64_t idBase_;
    std::uint64_t txCounter_ = 0;
    std::uint64_t addrCounter_ = 0;
    std::uint32_t txsPerBlock_;
    std::uint32_t height_ = 1;
    std::uint32_t indexInBlock_ = 0;
    std::vector<TxRecord> records_;
    GroundTruth truth_;
};

// Splits an available balance into (payment, change, fee). The payment is a
// whole multiple of 10^4 satoshis when round is requested; the change never
// is, so value-based heuristics see realistic decimal structure.
struct HopValues {
    std::int64_t payment = 0;
    std::int64_t change = 0;
    std::int64_t fee = 0;
};

HopValues splitHop(Rng &rng, std::int64_t balance, bool roundPayment,
                   std::int64_t paymentMin = 100000, std::int64_t paymentMax = 10000000);

} // namespace peeltrace::synth
