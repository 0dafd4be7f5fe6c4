#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>

#include <peeltrace/chain_store.hpp>
#include <peeltrace/cluster_set.hpp>

namespace peeltrace {

// Per-transaction behaviour fingerprint: four binary signals, 16 possible
// combinations.
struct FeatureTuple {
    bool replaceable = false;
    bool locktimeSet = false;
    std::uint8_t version = 1;
    bool segwit = false;

    std::uint8_t code() const
    {
        return static_cast<std::uint8_t>((replaceable ? 1 : 0) | (locktimeSet ? 2 : 0) |
                                         (version == 2 ? 4 : 0) | (segwit ? 8 : 0));
    }
    static FeatureTuple fromCode(std::uint8_t code)
    {
        return {(code & 1) != 0, (code & 2) != 0,
                static_cast<std::uint8_t>((code & 4) ? 2 : 1), (code & 8) != 0};
    }

    bool operator==(const FeatureTuple &) const = default;
};

FeatureTuple txFeatures(const Transaction &tx);

// Small closed domains, so the sets are bitmasks.
class FeatureTupleSet {
public:
    void insert(FeatureTuple t) { mask_ |= static_cast<std::uint16_t>(1u << t.code()); }
    bool contains(FeatureTuple t) const { return (mask_ >> t.code()) & 1u; }
    std::size_t size() const;
    bool empty() const { return mask_ == 0; }

    bool operator==(const FeatureTupleSet &) const = default;

private:
    std::uint16_t mask_ = 0;
};

class AddressTypeSet {
public:
    void insert(AddressType t) { mask_ |= static_cast<std::uint16_t>(1u << static_cast<unsigned>(t)); }
    bool contains(AddressType t) const { return (mask_ >> static_cast<unsigned>(t)) & 1u; }
    std::size_t size() const;
    bool empty() const { return mask_ == 0; }

    bool operator==(const AddressTypeSet &) const = default;

private:
    std::uint16_t mask_ = 0;
};

// Where a cluster parks its change output: always first, always last,
// either end, or no consistent position.
enum class ChangeStrategy : std::uint8_t { first, last, either, none };

std::string_view changeStrategyName(ChangeStrategy s);
std::optional<ChangeStrategy> parseChangeStrategy(std::string_view name);

struct ClusterFeatures {
    ChangeStrategy strategy = ChangeStrategy::none;
    FeatureTupleSet txTuples;
    AddressTypeSet addressTypes;
};

// Feature tuples over the cluster's transactions plus address types over the
// cluster's addresses.
std::pair<FeatureTupleSet, AddressTypeSet>
clusterFeatureSets(const ChainStore &store, const ClusterSet &clusters, ClusterId cluster);

ChangeStrategy inferChangeStrategy(const ChainStore &store, const ClusterSet &clusters,
                                   ClusterId cluster);

ClusterFeatures computeClusterFeatures(const ChainStore &store, const ClusterSet &clusters,
                                       ClusterId cluster);

// Aggregated per-cluster row for downstream model training.
struct ClusterFeatureRow {
    double propSegwitEnabled = 0;
    double propLocktimeEnabled = 0;
    double propV1 = 0;
    double addressTypeMaxProp = 0;
    bool hasChangeStrategy = false;
};

// Requires a non-empty transaction set; output-only clusters have no row.
ClusterFeatureRow clusterFeatureRow(const ChainStore &store, const ClusterSet &clusters,
                                    ClusterId cluster);

// One row per cluster with at least one transaction. The label column stays
// empty for clusters absent from `labels`.
void writeFeatureCsv(std::ostream &out, const ChainStore &store, const ClusterSet &clusters,
                     const std::unordered_map<ClusterId, std::string> &labels);

} // namespace peeltrace
