#pragma once

#include <cstdint>
#include <iosfwd>
#include <unordered_map>
#include <vector>

#include <peeltrace/chain_store.hpp>
#include <peeltrace/cluster_set.hpp>
#include <peeltrace/features.hpp>

namespace peeltrace {

// A cluster's transactions split into peel chains: the traversal closure of
// every start transaction, merged transitively wherever two closures share a
// member. Fewer chains relative to the transaction count means the cluster
// looks more like a single entity's sequential spending.
struct PeelChainPartition {
    ClusterId cluster = 0;
    std::size_t txCount = 0;
    // Disjoint, covering; each chain's members in ledger order. Chains are
    // ordered by their earliest member.
    std::vector<std::vector<TxIndex>> chains;
    std::unordered_map<TxIndex, std::uint32_t> chainOf;

    double ratioV() const
    {
        return static_cast<double>(chains.size()) / static_cast<double>(txCount);
    }
};

// Runs validation-mode forward and backward traversal from every transaction
// of the cluster and merges overlapping closures. Requires a non-empty
// transaction set.
PeelChainPartition partitionPeelChains(const ChainStore &store, const ClusterSet &clusters,
                                       ClusterId cluster, const ClusterFeatures &features);

// True iff both transactions ended up in the same merged chain. Throws
// std::invalid_argument for transactions outside the partitioned cluster.
bool sameChain(const PeelChainPartition &partition, TxIndex a, TxIndex b);

void writeValidationJson(std::ostream &out, const ChainStore &store,
                         const PeelChainPartition &partition);

// One `n_txs,ratio_v` row per partition, for plotting.
void writeValidationCsvHeader(std::ostream &out);
void writeValidationCsvRow(std::ostream &out, const PeelChainPartition &partition);

} // namespace peeltrace
