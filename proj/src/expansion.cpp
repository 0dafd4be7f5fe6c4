#include <peeltrace/expansion.hpp>

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <unordered_set>

namespace peeltrace {

TagStore TagStore::loadCsv(std::istream &in)
{
    TagStore tags;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        if (first && line == "address,entity") {
            first = false;
            continue;
        }
        first = false;
        auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw std::runtime_error("malformed tag row (expected 'address,entity'): " + line);
        }
        tags.insert(line.substr(0, comma), line.substr(comma + 1));
    }
    return tags;
}

TagStore TagStore::loadCsvFile(const std::string &path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open tags file: " + path);
    }
    return loadCsv(in);
}

void TagStore::insert(std::string address, std::string entity)
{
    tags_.insert_or_assign(std::move(address), std::move(entity));
}

std::optional<std::string_view> TagStore::entityOf(std::string_view address) const
{
    auto it = tags_.find(std::string(address));
    if (it == tags_.end()) {
        return std::nullopt;
    }
    return std::string_view(it->second);
}

NextHopDecision nextBaselineHop(const ChainStore &store, TxIndex tx, ChangeRule rule)
{
    NextHopDecision decision;
    auto pos = baselineChange(store, tx, rule);
    if (!pos) {
        return decision;
    }
    const auto &out = store.tx(tx).outputs[*pos];
    if (!out.isSpent()) {
        return decision;
    }
    decision.candidateCount = 1;
    decision.next = out.spentBy;
    decision.viaOutputs.push_back(*pos);
    return decision;
}

ExpansionResult expandCluster(const ChainStore &store, const ClusterSet &clusters,
                              ClusterId cluster, const ClusterFeatures &features, ChangeRule rule,
                              const TraversalLimits &limits, TraceLog *trace)
{
    auto txs = clusters.transactions(cluster);
    if (txs.empty()) {
        throw std::invalid_argument("cluster has no transactions to expand");
    }
    bool peelRule = rule == ChangeRule::peel || rule == ChangeRule::peelStrict;

    ExpansionResult result;
    result.cluster = cluster;
    result.clusterTxCount = txs.size();
    result.rule = rule;

    auto decide = [&](TxIndex t) {
        switch (rule) {
        case ChangeRule::peel:
            return nextPeelHop(store, features, t);
        case ChangeRule::peelStrict:
            return nextPeelHopStrict(store, clusters, features, t);
        default:
            return nextBaselineHop(store, t, rule);
        }
    };

    std::unordered_set<TxIndex> reached;
    for (auto start : txs) {
        if (peelRule) {
            auto trav = followForward(store, clusters, cluster, features, start,
                                      HeuristicMode::expansion, rule, limits, trace);
            result.truncated = result.truncated || trav.truncated;
            reached.insert(trav.txs.begin(), trav.txs.end());
            continue;
        }
        std::unordered_set<TxIndex> visited;
        TxIndex cur = start;
        std::uint32_t hop = 0;
        while (true) {
            if (visited.count(cur)) {
                break;
            }
            visited.insert(cur);
            reached.insert(cur);
            if (limits.maxHops != 0 && hop >= limits.maxHops) {
                result.truncated = true;
                break;
            }
            auto decision = nextBaselineHop(store, cur, rule);
            if (trace) {
                trace->push_back({store.tx(cur).txid, hop, false, rule, decision.candidateCount});
            }
            if (!decision.next) {
                break;
            }
            cur = *decision.next;
            ++hop;
        }
    }

    for (auto t : reached) {
        if (clusters.clusterOfTx(t) != cluster) {
            result.discovered.push_back(t);
        }
    }
    std::sort(result.discovered.begin(), result.discovered.end());

    // Counterparties: at every hop the rule actually followed, the outputs
    // other than the identified change went to someone else. Each reached
    // transaction is evaluated once, no matter how many starts led to it.
    std::vector<TxIndex> ordered(reached.begin(), reached.end());
    std::sort(ordered.begin(), ordered.end());
    std::unordered_map<AddressId, std::uint32_t> counts;
    for (auto t : ordered) {
        auto decision = decide(t);
        if (!decision.next) {
            continue;
        }
        const auto &tx = store.tx(t);
        std::unordered_set<AddressId> seen;
        for (std::uint32_t i = 0; i < tx.outputs.size(); ++i) {
            if (std::find(decision.viaOutputs.begin(), decision.viaOutputs.end(), i) !=
                decision.viaOutputs.end()) {
                continue;
            }
            if (seen.insert(tx.outputs[i].address).second) {
                ++counts[tx.outputs[i].address];
            }
        }
    }
    result.counterparties.assign(counts.begin(), counts.end());
    std::sort(result.counterparties.begin(), result.counterparties.end(),
              [](const auto &a, const auto &b) {
                  return a.second != b.second ? a.second > b.second : a.first < b.first;
              });
    return result;
}

EvalReport evaluateExpansion(const ChainStore &store, const ExpansionResult &result,
                             const TagStore &tags, std::string_view ownEntity)
{
    EvalReport report;
    for (auto t : result.discovered) {
        bool foreign = false;
        for (const auto &in : store.tx(t).inputs) {
            auto entity = tags.entityOf(store.addressName(in.address));
            if (entity && *entity != ownEntity) {
                foreign = true;
                break;
            }
        }
        if (foreign) {
            ++report.falsePositives;
        } else {
            ++report.unknownPositives;
        }
    }
    report.fdr = result.discovered.empty()
                     ? 0.0
                     : static_cast<double>(report.falsePositives) /
                           static_cast<double>(result.discovered.size());
    return report;
}

namespace {

// Output positions whose address makes its first ledger appearance here.
std::vector<std::uint32_t> freshPositions(const ChainStore &store, TxIndex tx)
{
    const auto &t = store.tx(tx);
    std::vector<std::uint32_t> fresh;
    for (std::uint32_t i = 0; i < t.outputs.size(); ++i) {
        if (store.isFresh(t.outputs[i].address, tx)) {
            fresh.push_back(i);
        }
    }
    return fresh;
}

bool hasSelfChange(const Transaction &t)
{
    for (const auto &out : t.outputs) {
        for (const auto &in : t.inputs) {
            if (in.address == out.address) {
                return true;
            }
        }
    }
    return false;
}

} // namespace

std::optional<std::uint32_t> baselineChange(const ChainStore &store, TxIndex tx, ChangeRule rule)
{
    if (rule == ChangeRule::peel || rule == ChangeRule::peelStrict) {
        throw std::invalid_argument("baselineChange expects one of the published heuristics");
    }
    const auto &t = store.tx(tx);
    auto fresh = freshPositions(store, tx);
    // Every baseline keys on "the only fresh address": exactly one output
    // position receiving a first-time address.
    if (fresh.size() != 1) {
        return std::nullopt;
    }
    auto candidate = fresh.front();

    switch (rule) {
    case ChangeRule::androulaki:
        if (t.outputs.size() != 2) {
            return std::nullopt;
        }
        return candidate;
    case ChangeRule::meiklejohn:
        if (t.coinbase || hasSelfChange(t)) {
            return std::nullopt;
        }
        return candidate;
    case ChangeRule::goldfeder:
        if (t.coinbase || hasSelfChange(t) || isCoinjoin(store, tx)) {
            return std::nullopt;
        }
        return candidate;
    case ChangeRule::ermilov:
        if (t.outputs.size() != 2 || t.inputs.size() == 2 || hasSelfChange(t)) {
            return std::nullopt;
        }
        // Change amounts look irregular: nonzero digits beyond the fourth
        // decimal place, i.e. not a whole multiple of 10^4 satoshis.
        if (t.outputs[candidate].value % 10000 == 0) {
            return std::nullopt;
        }
        return candidate;
    case ChangeRule::peel:
    case ChangeRule::peelStrict:
        break;
    }
    return std::nullopt;
}

bool isCoinjoin(const ChainStore &store, TxIndex tx, const CoinjoinParams &params)
{
    const auto &t = store.tx(tx);
    if (t.inputs.size() < params.minInputs || t.outputs.size() < params.minOutputs) {
        return false;
    }

    // Most frequent output value; ties fall to the smaller value.
    std::map<std::int64_t, std::uint32_t> valueCounts;
    std::int64_t maxValue = 0;
    std::int64_t minValue = t.outputs.front().value;
    for (const auto &out : t.outputs) {
        ++valueCounts[out.value];
        maxValue = std::max(maxValue, out.value);
        minValue = std::min(minValue, out.value);
    }
    std::int64_t v = 0;
    std::uint32_t k = 0;
    for (const auto &[value, count] : valueCounts) {
        if (count > k) {
            k = count;
            v = value;
        }
    }
    if (k < params.minEqualOutputs) {
        return false;
    }

    std::unordered_set<AddressId> inputAddresses;
    for (const auto &in : t.inputs) {
        inputAddresses.insert(in.address);
    }
    if (inputAddresses.size() < k) {
        return false;
    }

    // The mixed denomination must not dominate the change outputs; a
    // transaction whose outputs are all one value is still a mix.
    if (v == maxValue && minValue != maxValue) {
        return false;
    }
    return true;
}

bool isFalsePositiveCluster(const ChainStore &store, const ClusterSet &clusters,
                            ClusterId cluster, const CoinjoinParams &params)
{
    for (auto t : clusters.transactions(cluster)) {
        if (isCoinjoin(store, t, params)) {
            return true;
        }
    }
    return false;
}

void writeExpansionJson(std::ostream &out, const ChainStore &store, const ExpansionResult &result,
                        const EvalReport &eval, std::size_t topCounterparties)
{
    out << "{\"cluster_id\":" << result.cluster << ",\"n_txs\":" << result.clusterTxCount
        << ",\"n_discovered\":" << result.discovered.size()
        << ",\"expansion_factor\":" << result.expansionFactor() << ",\"fdr\":" << eval.fdr
        << ",\"truncated\":" << (result.truncated ? "true" : "false")
        << ",\"counterparties_top\":[";
    auto n = std::min(topCounterparties, result.counterparties.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            out << ",";
        }
        out << "{\"address\":\"" << store.addressName(result.counterparties[i].first)
            << "\",\"count\":" << result.counterparties[i].second << "}";
    }
    out << "]}";
}

void writeBaselineComparisonCsv(std::ostream &out, const std::vector<BaselineSummary> &rows)
{
    out << "heuristic,mean_E,mean_D\n";
    for (const auto &row : rows) {
        out << changeRuleName(row.rule) << ',' << row.meanExpansion << ',' << row.meanFdr << '\n';
    }
}

} // namespace peeltrace
