#include <peeltrace/cluster_set.hpp>

#include <algorithm>
#include <ostream>

#include <peeltrace/disjoint_set.hpp>

namespace peeltrace {

ClusterSet ClusterSet::build(const ChainStore &store)
{
    auto n = static_cast<std::uint32_t>(store.addressCount());
    DisjointSet sets(n);
    for (TxIndex t = 0; t < store.txCount(); ++t) {
        const auto &inputs = store.tx(t).inputs;
        for (std::size_t i = 1; i < inputs.size(); ++i) {
            sets.unite(inputs[0].address, inputs[i].address);
        }
    }

    ClusterSet result;
    result.addressCluster_.assign(n, 0);
    result.clusterAddresses_.reserve(sets.setCount());

    // Address ids follow first-appearance order, so scanning them in order
    // numbers clusters by their earliest member.
    std::vector<ClusterId> rootCluster(n, static_cast<ClusterId>(-1));
    for (AddressId a = 0; a < n; ++a) {
        auto root = sets.find(a);
        if (rootCluster[root] == static_cast<ClusterId>(-1)) {
            rootCluster[root] = static_cast<ClusterId>(result.clusterAddresses_.size());
            result.clusterAddresses_.emplace_back();
        }
        auto cid = rootCluster[root];
        result.addressCluster_[a] = cid;
        result.clusterAddresses_[cid].push_back(a);
    }

    result.clusterTxs_.resize(result.clusterAddresses_.size());
    result.txCluster_.assign(store.txCount(), kNoCluster);
    for (TxIndex t = 0; t < store.txCount(); ++t) {
        const auto &tx = store.tx(t);
        if (tx.inputs.empty()) {
            continue;
        }
        // All input addresses share a cluster once build has run.
        auto cid = result.addressCluster_[tx.inputs[0].address];
        result.txCluster_[t] = cid;
        result.clusterTxs_[cid].push_back(t);
    }
    return result;
}

std::optional<ClusterId> ClusterSet::clusterOfTx(TxIndex tx) const
{
    if (txCluster_[tx] == kNoCluster) {
        return std::nullopt;
    }
    return txCluster_[tx];
}

void ClusterSet::writeAddressCsv(std::ostream &out, const ChainStore &store) const
{
    out << "cluster_id,address\n";
    for (ClusterId c = 0; c < clusterAddresses_.size(); ++c) {
        for (auto a : clusterAddresses_[c]) {
            out << c << ',' << store.addressName(a) << '\n';
        }
    }
}

void ClusterSet::writeTxCsv(std::ostream &out, const ChainStore &store) const
{
    out << "cluster_id,txid\n";
    for (ClusterId c = 0; c < clusterTxs_.size(); ++c) {
        for (auto t : clusterTxs_[c]) {
            out << c << ',' << store.tx(t).txid << '\n';
        }
    }
}

} // namespace peeltrace
