#include <peeltrace/peel.hpp>

#include <algorithm>
#include <deque>
#include <ostream>
#include <unordered_set>

namespace peeltrace {

std::string_view changeRuleName(ChangeRule rule)
{
    switch (rule) {
    case ChangeRule::peel: return "fnext";
    case ChangeRule::peelStrict: return "fnext2";
    case ChangeRule::androulaki: return "androulaki";
    case ChangeRule::meiklejohn: return "meiklejohn";
    case ChangeRule::goldfeder: return "goldfeder";
    case ChangeRule::ermilov: return "ermilov";
    }
    return "fnext";
}

std::optional<ChangeRule> parseChangeRule(std::string_view name)
{
    for (auto rule : {ChangeRule::peel, ChangeRule::peelStrict, ChangeRule::androulaki,
                      ChangeRule::meiklejohn, ChangeRule::goldfeder, ChangeRule::ermilov}) {
        if (changeRuleName(rule) == name) {
            return rule;
        }
    }
    return std::nullopt;
}

void writeTraceJson(std::ostream &out, const TraceLog &trace)
{
    out << "[";
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const auto &hop = trace[i];
        if (i > 0) {
            out << ",";
        }
        out << "\n  {\"txid\":\"" << hop.txid << "\",\"hop_index\":" << hop.hopIndex
            << ",\"direction\":\"" << (hop.backward ? "backward" : "forward") << "\""
            << ",\"rule\":\"" << (hop.backward ? "fprev" : changeRuleName(hop.rule)) << "\""
            << ",\"candidate_count\":" << hop.candidateCount << "}";
    }
    out << "\n]\n";
}

namespace {

// Candidate output positions for a change strategy.
void candidatePositions(const Transaction &tx, ChangeStrategy s,
                        std::vector<std::uint32_t> &positions)
{
    positions.clear();
    auto last = static_cast<std::uint32_t>(tx.outputs.size() - 1);
    switch (s) {
    case ChangeStrategy::first:
        positions.push_back(0);
        break;
    case ChangeStrategy::last:
        positions.push_back(last);
        break;
    case ChangeStrategy::either:
        positions.push_back(0);
        if (last != 0) {
            positions.push_back(last);
        }
        break;
    case ChangeStrategy::none:
        for (std::uint32_t i = 0; i <= last; ++i) {
            positions.push_back(i);
        }
        break;
    }
}

} // namespace

NextHopDecision nextPeelHop(const ChainStore &store, const ClusterFeatures &features, TxIndex tx)
{
    const auto &t = store.tx(tx);
    std::vector<std::uint32_t> positions;
    candidatePositions(t, features.strategy, positions);

    NextHopDecision decision;
    std::vector<TxIndex> survivors; // distinct next-hop txs
    std::vector<std::pair<std::uint32_t, TxIndex>> passing;
    for (auto pos : positions) {
        const auto &out = t.outputs[pos];
        if (!out.isSpent()) {
            continue;
        }
        if (!features.addressTypes.contains(out.type)) {
            continue;
        }
        if (!features.txTuples.contains(txFeatures(store.tx(out.spentBy)))) {
            continue;
        }
        passing.emplace_back(pos, out.spentBy);
        if (std::find(survivors.begin(), survivors.end(), out.spentBy) == survivors.end()) {
            survivors.push_back(out.spentBy);
        }
    }

    decision.candidateCount = survivors.size();
    if (survivors.size() == 1) {
        decision.next = survivors.front();
        for (auto [pos, next] : passing) {
            if (next == survivors.front()) {
                decision.viaOutputs.push_back(pos);
            }
        }
    }
    return decision;
}

NextHopDecision nextPeelHopStrict(const ChainStore &store, const ClusterSet &clusters,
                                  const ClusterFeatures &features, TxIndex tx)
{
    auto decision = nextPeelHop(store, features, tx);
    if (!decision.next) {
        return decision;
    }

    // The hop's inputs must be the entirety of their own co-spend cluster;
    // hops into a wider cluster (a service wallet, say) are rejected.
    const auto &next = store.tx(*decision.next);
    std::unordered_set<AddressId> inputAddresses;
    for (const auto &in : next.inputs) {
        inputAddresses.insert(in.address);
    }
    auto cid = clusters.clusterOf(next.inputs[0].address);
    if (inputAddresses.size() != clusters.addresses(cid).size()) {
        decision.next.reset();
        decision.viaOutputs.clear();
    }
    return decision;
}

std::vector<TxIndex> prevPeelHops(const ChainStore &store, const ClusterFeatures &features,
                                  TxIndex tx)
{
    const auto &t = store.tx(tx);
    std::vector<TxIndex> first;
    std::vector<TxIndex> last;
    std::vector<TxIndex> all;

    auto addUnique = [](std::vector<TxIndex> &v, TxIndex x) {
        if (std::find(v.begin(), v.end(), x) == v.end()) {
            v.push_back(x);
        }
    };

    for (const auto &in : t.inputs) {
        auto prev = in.prevTx;
        if (!features.txTuples.contains(txFeatures(store.tx(prev)))) {
            continue;
        }
        auto outputCount = store.tx(prev).outputs.size();
        if (in.prevIndex == 0) {
            addUnique(first, prev);
        }
        if (in.prevIndex + 1 == outputCount) {
            addUnique(last, prev);
        }
        addUnique(all, prev);
    }

    std::vector<TxIndex> result;
    switch (features.strategy) {
    case ChangeStrategy::first:
        result = std::move(first);
        break;
    case ChangeStrategy::last:
        result = std::move(last);
        break;
    case ChangeStrategy::either:
        result = std::move(first);
        for (auto x : last) {
            addUnique(result, x);
        }
        break;
    case ChangeStrategy::none:
        result = std::move(all);
        break;
    }
    std::sort(result.begin(), result.end());
    return result;
}

bool Traversal::contains(TxIndex t) const
{
    return std::find(txs.begin(), txs.end(), t) != txs.end();
}

Traversal followForward(const ChainStore &store, const ClusterSet &clusters, ClusterId cluster,
                        const ClusterFeatures &features, TxIndex start, HeuristicMode mode,
                        ChangeRule rule, const TraversalLimits &limits, TraceLog *trace)
{
    Traversal result;
    std::unordered_set<TxIndex> visited;
    TxIndex cur = start;
    std::uint32_t hop = 0;

    while (true) {
        if (mode == HeuristicMode::validation && clusters.clusterOfTx(cur) != cluster) {
            break;
        }
        if (visited.count(cur)) {
            break;
        }
        result.txs.push_back(cur);
        visited.insert(cur);

        if (limits.maxHops != 0 && hop >= limits.maxHops) {
            result.truncated = true;
            break;
        }

        auto decision = rule == ChangeRule::peelStrict
                            ? nextPeelHopStrict(store, clusters, features, cur)
                            : nextPeelHop(store, features, cur);
        if (trace) {
            trace->push_back({store.tx(cur).txid, hop, false, rule, decision.candidateCount});
        }
        if (!decision.next) {
            break;
        }
        cur = *decision.next;
        ++hop;
    }
    return result;
}

Traversal followBackward(const ChainStore &store, const ClusterSet &clusters, ClusterId cluster,
                         const ClusterFeatures &features, TxIndex start, HeuristicMode mode,
                         const TraversalLimits &limits, TraceLog *trace)
{
    Traversal result;
    std::unordered_set<TxIndex> enqueued{start};
    std::deque<std::pair<TxIndex, std::uint32_t>> worklist{{start, 0}};

    while (!worklist.empty()) {
        auto [cur, depth] = worklist.front();
        worklist.pop_front();
        result.txs.push_back(cur);

        if (store.tx(cur).coinbase) {
            continue;
        }
        auto prevs = prevPeelHops(store, features, cur);
        if (trace) {
            trace->push_back({store.tx(cur).txid, depth, true, ChangeRule::peel, prevs.size()});
        }
        if (mode == HeuristicMode::validation) {
            std::erase_if(prevs, [&](TxIndex p) { return clusters.clusterOfTx(p) != cluster; });
        } else if (depth >= limits.maxDepth) {
            if (!std::all_of(prevs.begin(), prevs.end(),
                             [&](TxIndex p) { return enqueued.count(p) > 0; })) {
                result.truncated = true;
            }
            continue;
        }
        for (auto p : prevs) {
            if (enqueued.count(p)) {
                continue;
            }
            if (mode == HeuristicMode::expansion && enqueued.size() >= limits.maxFrontier) {
                result.truncated = true;
                break;
            }
            enqueued.insert(p);
            worklist.emplace_back(p, depth + 1);
        }
    }
    return result;
}

} // namespace peeltrace
