#include <peeltrace/features.hpp>

#include <array>
#include <bit>
#include <ostream>
#include <stdexcept>

namespace peeltrace {

FeatureTuple txFeatures(const Transaction &tx)
{
    FeatureTuple t;
    for (const auto &in : tx.inputs) {
        if (in.sequence < 0xffffffffu) {
            t.replaceable = true;
            break;
        }
    }
    t.locktimeSet = tx.locktimeSet();
    t.version = tx.version;
    t.segwit = tx.segwit;
    return t;
}

std::size_t FeatureTupleSet::size() const
{
    return static_cast<std::size_t>(std::popcount(mask_));
}

std::size_t AddressTypeSet::size() const
{
    return static_cast<std::size_t>(std::popcount(mask_));
}

std::string_view changeStrategyName(ChangeStrategy s)
{
    switch (s) {
    case ChangeStrategy::first: return "first";
    case ChangeStrategy::last: return "last";
    case ChangeStrategy::either: return "either";
    case ChangeStrategy::none: return "none";
    }
    return "none";
}

std::optional<ChangeStrategy> parseChangeStrategy(std::string_view name)
{
    if (name == "first") return ChangeStrategy::first;
    if (name == "last") return ChangeStrategy::last;
    if (name == "either") return ChangeStrategy::either;
    if (name == "none") return ChangeStrategy::none;
    return std::nullopt;
}

std::pair<FeatureTupleSet, AddressTypeSet>
clusterFeatureSets(const ChainStore &store, const ClusterSet &clusters, ClusterId cluster)
{
    FeatureTupleSet tuples;
    for (auto t : clusters.transactions(cluster)) {
        tuples.insert(txFeatures(store.tx(t)));
    }
    AddressTypeSet types;
    for (auto a : clusters.addresses(cluster)) {
        types.insert(store.addressTypeOf(a));
    }
    return {tuples, types};
}

namespace {

// Position class of a change output within its transaction.
enum class ChangeSlot { first, last, both, interior };

ChangeSlot changeSlot(std::size_t index, std::size_t outputCount)
{
    bool isFirst = index == 0;
    bool isLast = index + 1 == outputCount;
    if (isFirst && isLast) {
        return ChangeSlot::both;
    }
    if (isFirst) {
        return ChangeSlot::first;
    }
    if (isLast) {
        return ChangeSlot::last;
    }
    return ChangeSlot::interior;
}

} // namespace

ChangeStrategy inferChangeStrategy(const ChainStore &store, const ClusterSet &clusters,
                                   ClusterId cluster)
{
    bool sawQualifying = false;
    bool allLast = true;
    bool allFirst = true;

    for (auto t : clusters.transactions(cluster)) {
        const auto &tx = store.tx(t);
        std::size_t inClusterOutputs = 0;
        std::size_t changeIndex = 0;
        for (std::size_t i = 0; i < tx.outputs.size(); ++i) {
            if (clusters.clusterOf(tx.outputs[i].address) == cluster) {
                ++inClusterOutputs;
                changeIndex = i;
            }
        }
        if (inClusterOutputs != 1) {
            continue;
        }
        sawQualifying = true;
        switch (changeSlot(changeIndex, tx.outputs.size())) {
        case ChangeSlot::both:
            break;
        case ChangeSlot::first:
            allLast = false;
            break;
        case ChangeSlot::last:
            allFirst = false;
            break;
        case ChangeSlot::interior:
            return ChangeStrategy::none;
        }
    }

    if (!sawQualifying) {
        return ChangeStrategy::none;
    }
    if (allLast) {
        return ChangeStrategy::last;
    }
    if (allFirst) {
        return ChangeStrategy::first;
    }
    return ChangeStrategy::either;
}

ClusterFeatures computeClusterFeatures(const ChainStore &store, const ClusterSet &clusters,
                                       ClusterId cluster)
{
    ClusterFeatures f;
    auto [tuples, types] = clusterFeatureSets(store, clusters, cluster);
    f.txTuples = tuples;
    f.addressTypes = types;
    f.strategy = inferChangeStrategy(store, clusters, cluster);
    return f;
}

ClusterFeatureRow clusterFeatureRow(const ChainStore &store, const ClusterSet &clusters,
                                    ClusterId cluster)
{
    auto txs = clusters.transactions(cluster);
    if (txs.empty()) {
        throw std::invalid_argument("cluster has no transactions");
    }

    ClusterFeatureRow row;
    std::size_t segwit = 0;
    std::size_t locktime = 0;
    std::size_t v1 = 0;
    std::array<std::size_t, kAddressTypeCount> inputTypeCounts{};
    std::size_t inputCount = 0;

    for (auto t : txs) {
        const auto &tx = store.tx(t);
        segwit += tx.segwit ? 1 : 0;
        locktime += tx.locktimeSet() ? 1 : 0;
        v1 += tx.version == 1 ? 1 : 0;
        for (const auto &in : tx.inputs) {
            ++inputTypeCounts[static_cast<std::size_t>(store.addressTypeOf(in.address))];
            ++inputCount;
        }
    }

    auto n = static_cast<double>(txs.size());
    row.propSegwitEnabled = static_cast<double>(segwit) / n;
    row.propLocktimeEnabled = static_cast<double>(locktime) / n;
    row.propV1 = static_cast<double>(v1) / n;
    std::size_t maxType = 0;
    for (auto c : inputTypeCounts) {
        maxType = std::max(maxType, c);
    }
    row.addressTypeMaxProp =
        inputCount == 0 ? 0.0 : static_cast<double>(maxType) / static_cast<double>(inputCount);
    row.hasChangeStrategy = inferChangeStrategy(store, clusters, cluster) != ChangeStrategy::none;
    return row;
}

void writeFeatureCsv(std::ostream &out, const ChainStore &store, const ClusterSet &clusters,
                     const std::unordered_map<ClusterId, std::string> &labels)
{
    out << "cluster_id,prop_segwit_enabled,prop_locktime_enabled,prop_v1,"
           "address_type_max_prop,change_strategy,label\n";
    for (ClusterId c = 0; c < clusters.clusterCount(); ++c) {
        if (clusters.transactions(c).empty()) {
            continue;
        }
        auto row = clusterFeatureRow(store, clusters, c);
        out << c << ',' << row.propSegwitEnabled << ',' << row.propLocktimeEnabled << ','
            << row.propV1 << ',' << row.addressTypeMaxProp << ','
            << (row.hasChangeStrategy ? "strategy" : "none") << ',';
        auto it = labels.find(c);
        if (it != labels.end()) {
            out << it->second;
        }
        out << '\n';
    }
}

} // namespace peeltrace
