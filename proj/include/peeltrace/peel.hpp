#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <peeltrace/chain_store.hpp>
#include <peeltrace/cluster_set.hpp>
#include <peeltrace/features.hpp>

namespace peeltrace {

// Validation stays inside the cluster's transaction set; expansion may leave.
enum class HeuristicMode : std::uint8_t { validation, expansion };

// Change-output identification rules. The first two drive peel-chain
// traversal; the last four are the published baselines they are compared
// against. Names below the enum are the wire identifiers used in reports.
enum class ChangeRule : std::uint8_t { peel, peelStrict, androulaki, meiklejohn, goldfeder, ermilov };

std::string_view changeRuleName(ChangeRule rule);
std::optional<ChangeRule> parseChangeRule(std::string_view name);

// Audit record for one traversal decision.
struct HopTrace {
    std::string txid;
    std::uint32_t hopIndex = 0;
    bool backward = false;
    ChangeRule rule = ChangeRule::peel; // ChangeRule::peel doubles as "fprev" when backward
    std::size_t candidateCount = 0;
};

using TraceLog = std::vector<HopTrace>;

void writeTraceJson(std::ostream &out, const TraceLog &trace);

// Outcome of one forward change decision. `next` is set only when exactly
// one next-hop transaction survives all checks; `viaOutputs` lists the
// output positions of the current tx that lead to it (two outputs spent by
// the same transaction count as one candidate).
struct NextHopDecision {
    std::optional<TxIndex> next;
    std::vector<std::uint32_t> viaOutputs;
    std::size_t candidateCount = 0;
};

NextHopDecision nextPeelHop(const ChainStore &store, const ClusterFeatures &features,
                            TxIndex tx);

// As nextPeelHop, but additionally requires the surviving hop's inputs to be
// the entire address set of their own co-spend cluster. Never returns a hop
// nextPeelHop would not.
NextHopDecision nextPeelHopStrict(const ChainStore &store, const ClusterSet &clusters,
                                  const ClusterFeatures &features, TxIndex tx);

// Backward step: transactions that created this tx's inputs, filtered by the
// cluster's feature tuples and bucketed by the position the consumed output
// had in its creating transaction. Result is deduplicated, in ledger order.
std::vector<TxIndex> prevPeelHops(const ChainStore &store, const ClusterFeatures &features,
                                  TxIndex tx);

struct TraversalLimits {
    // Forward hop bound; 0 means unbounded (the visited guard still holds).
    std::uint32_t maxHops = 0;
    // Backward bounds, applied in expansion mode only.
    std::uint32_t maxDepth = 16;
    std::uint32_t maxFrontier = 10000;
};

struct Traversal {
    std::vector<TxIndex> txs; // discovery order, starts with tx_start
    bool truncated = false;

    bool contains(TxIndex t) const;
};

// Repeated forward hops from start. Validation mode stops before admitting
// any transaction outside `cluster`; `rule` must be peel or peelStrict.
Traversal followForward(const ChainStore &store, const ClusterSet &clusters, ClusterId cluster,
                        const ClusterFeatures &features, TxIndex start, HeuristicMode mode,
                        ChangeRule rule = ChangeRule::peel, const TraversalLimits &limits = {},
                        TraceLog *trace = nullptr);

// Breadth-first backward closure from start. Validation mode intersects each
// step with the cluster; expansion mode enforces the depth/frontier limits
// and flags the result truncated when either cuts the search.
Traversal followBackward(const ChainStore &store, const ClusterSet &clusters, ClusterId cluster,
                         const ClusterFeatures &features, TxIndex start, HeuristicMode mode,
                         const TraversalLimits &limits = {}, TraceLog *trace = nullptr);

} // namespace peeltrace
