#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <peeltrace/chain_store.hpp>

namespace peeltrace {

using ClusterId = std::uint32_t;

// Co-spend partition of all addresses: inputs of one transaction belong to
// one controlling entity, so their addresses land in the same cluster.
// Addresses that only ever receive stay singleton clusters.
//
// Cluster ids are assigned by the first appearance of each cluster's earliest
// address, so they are stable across runs over the same ledger.
class ClusterSet {
public:
    static ClusterSet build(const ChainStore &store);

    std::size_t clusterCount() const { return clusterAddresses_.size(); }

    ClusterId clusterOf(AddressId address) const { return addressCluster_[address]; }
    std::optional<ClusterId> clusterOfTx(TxIndex tx) const;

    std::span<const AddressId> addresses(ClusterId id) const { return clusterAddresses_[id]; }
    std::span<const TxIndex> transactions(ClusterId id) const { return clusterTxs_[id]; }

    void writeAddressCsv(std::ostream &out, const ChainStore &store) const;
    void writeTxCsv(std::ostream &out, const ChainStore &store) const;

private:
    static constexpr ClusterId kNoCluster = 0xffffffffu;

    std::vector<ClusterId> addressCluster_;
    std::vector<ClusterId> txCluster_;
    std::vector<std::vector<AddressId>> clusterAddresses_;
    // Transactions with at least one input address in the cluster, in
    // ledger order.
    std::vector<std::vector<TxIndex>> clusterTxs_;
};

} // namespace peeltrace
