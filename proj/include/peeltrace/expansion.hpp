#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <peeltrace/chain_store.hpp>
#include <peeltrace/cluster_set.hpp>
#include <peeltrace/features.hpp>
#include <peeltrace/peel.hpp>

namespace peeltrace {

// Address → entity labels, loaded from a `address,entity` CSV. Serves as the
// ground-truth oracle when scoring expansion results.
class TagStore {
public:
    static TagStore loadCsv(std::istream &in);
    static TagStore loadCsvFile(const std::string &path);

    void insert(std::string address, std::string entity);
    std::optional<std::string_view> entityOf(std::string_view address) const;
    std::size_t size() const { return tags_.size(); }

private:
    std::unordered_map<std::string, std::string> tags_;
};

struct ExpansionResult {
    ClusterId cluster = 0;
    std::size_t clusterTxCount = 0;
    ChangeRule rule = ChangeRule::peel;
    // Transactions reached by forward traversal that were not already in the
    // cluster, in ledger order.
    std::vector<TxIndex> discovered;
    // Address paired with the number of followed hops that paid it.
    std::vector<std::pair<AddressId, std::uint32_t>> counterparties;
    bool truncated = false;

    // 100 * |discovered| / |T_C|.
    double expansionFactor() const
    {
        return 100.0 * static_cast<double>(discovered.size()) /
               static_cast<double>(clusterTxCount);
    }
};

// Forward-only expansion: follow the change rule from every cluster
// transaction, union the reached transactions, subtract the cluster's own.
// Peel rules consult the cluster's feature sets; the published baselines
// walk spender links of their identified change outputs.
ExpansionResult expandCluster(const ChainStore &store, const ClusterSet &clusters,
                              ClusterId cluster, const ClusterFeatures &features,
                              ChangeRule rule = ChangeRule::peel,
                              const TraversalLimits &limits = {}, TraceLog *trace = nullptr);

struct EvalReport {
    std::size_t falsePositives = 0;
    std::size_t unknownPositives = 0;
    double fdr = 0; // falsePositives / |discovered|, 0 when nothing discovered
};

// A discovered transaction spending coins tagged with a foreign entity is a
// false positive; everything else (untagged, or tagged with ownEntity) is an
// unknown positive.
EvalReport evaluateExpansion(const ChainStore &store, const ExpansionResult &result,
                             const TagStore &tags, std::string_view ownEntity);

// Published single-transaction change heuristics. Returns the index of the
// identified change output, or nothing when the rule abstains. `rule` must
// be one of androulaki, meiklejohn, goldfeder, ermilov.
std::optional<std::uint32_t> baselineChange(const ChainStore &store, TxIndex tx,
                                            ChangeRule rule);

// Spender of the change output a baseline heuristic identifies, in the same
// shape the peel rules produce. No candidate, or an unspent candidate,
// yields an empty decision.
NextHopDecision nextBaselineHop(const ChainStore &store, TxIndex tx, ChangeRule rule);

struct CoinjoinParams {
    std::uint32_t minInputs = 2;
    std::uint32_t minOutputs = 3;
    std::uint32_t minEqualOutputs = 2;
};

// Shape test for mixing transactions: several equal-valued outputs backed by
// at least as many distinct input addresses, with the repeated value not the
// largest output.
bool isCoinjoin(const ChainStore &store, TxIndex tx, const CoinjoinParams &params = {});

// A cluster containing any coinjoin-shaped transaction is considered a
// false-positive merge of multiple entities.
bool isFalsePositiveCluster(const ChainStore &store, const ClusterSet &clusters,
                            ClusterId cluster, const CoinjoinParams &params = {});

void writeExpansionJson(std::ostream &out, const ChainStore &store, const ExpansionResult &result,
                        const EvalReport &eval, std::size_t topCounterparties = 10);

// Mean expansion factor and mean false discovery rate per heuristic.
struct BaselineSummary {
    ChangeRule rule = ChangeRule::peel;
    double meanExpansion = 0;
    double meanFdr = 0;
};

void writeBaselineComparisonCsv(std::ostream &out, const std::vector<BaselineSummary> &rows);

} // namespace peeltrace
