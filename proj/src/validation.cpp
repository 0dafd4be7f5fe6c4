#include <peeltrace/validation.hpp>

#include <algorithm>
#include <ostream>
#include <stdexcept>

#include <peeltrace/disjoint_set.hpp>
#include <peeltrace/peel.hpp>

namespace peeltrace {

PeelChainPartition partitionPeelChains(const ChainStore &store, const ClusterSet &clusters,
                                       ClusterId cluster, const ClusterFeatures &features)
{
    auto txs = clusters.transactions(cluster);
    if (txs.empty()) {
        throw std::invalid_argument("cluster has no transactions to partition");
    }

    std::unordered_map<TxIndex, std::uint32_t> position;
    position.reserve(txs.size());
    for (std::uint32_t i = 0; i < txs.size(); ++i) {
        position.emplace(txs[i], i);
    }

    DisjointSet merged(static_cast<std::uint32_t>(txs.size()));
    for (std::uint32_t i = 0; i < txs.size(); ++i) {
        auto fwd = followForward(store, clusters, cluster, features, txs[i],
                                 HeuristicMode::validation);
        auto bwd = followBackward(store, clusters, cluster, features, txs[i],
                                  HeuristicMode::validation);
        for (auto t : fwd.txs) {
            merged.unite(i, position.at(t));
        }
        for (auto t : bwd.txs) {
            merged.unite(i, position.at(t));
        }
    }

    PeelChainPartition partition;
    partition.cluster = cluster;
    partition.txCount = txs.size();

    // txs is in ledger order, so chains come out ordered by earliest member.
    std::unordered_map<std::uint32_t, std::uint32_t> rootChain;
    for (std::uint32_t i = 0; i < txs.size(); ++i) {
        auto root = merged.find(i);
        auto it = rootChain.find(root);
        if (it == rootChain.end()) {
            it = rootChain.emplace(root, static_cast<std::uint32_t>(partition.chains.size())).first;
            partition.chains.emplace_back();
        }
        partition.chains[it->second].push_back(txs[i]);
        partition.chainOf.emplace(txs[i], it->second);
    }
    return partition;
}

bool sameChain(const PeelChainPartition &partition, TxIndex a, TxIndex b)
{
    auto ia = partition.chainOf.find(a);
    auto ib = partition.chainOf.find(b);
    if (ia == partition.chainOf.end() || ib == partition.chainOf.end()) {
        throw std::invalid_argument("transaction is not part of the partitioned cluster");
    }
    return ia->second == ib->second;
}

void writeValidationJson(std::ostream &out, const ChainStore &store,
                         const PeelChainPartition &partition)
{
    out << "{\"cluster_id\":" << partition.cluster << ",\"n_txs\":" << partition.txCount
        << ",\"n_chains\":" << partition.chains.size() << ",\"ratio_v\":" << partition.ratioV()
        << ",\"chains\":[";
    for (std::size_t c = 0; c < partition.chains.size(); ++c) {
        if (c > 0) {
            out << ",";
        }
        out << "{\"chain_id\":" << c << ",\"txids\":[";
        for (std::size_t i = 0; i < partition.chains[c].size(); ++i) {
            if (i > 0) {
                out << ",";
            }
            out << "\"" << store.tx(partition.chains[c][i]).txid << "\"";
        }
        out << "]}";
    }
    out << "]}";
}

void writeValidationCsvHeader(std::ostream &out)
{
    out << "cluster_id,n_txs,ratio_v\n";
}

void writeValidationCsvRow(std::ostream &out, const PeelChainPartition &partition)
{
    out << partition.cluster << ',' << partition.txCount << ',' << partition.ratioV() << '\n';
}

} // namespace peeltrace
