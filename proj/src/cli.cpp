#include <peeltrace/cli.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include <peeltrace/chain_store.hpp>
#include <peeltrace/cluster_set.hpp>
#include <peeltrace/expansion.hpp>
#include <peeltrace/features.hpp>
#include <peeltrace/peel.hpp>
#include <peeltrace/synthgen.hpp>
#include <peeltrace/validation.hpp>

namespace peeltrace::cli {

std::uint64_t fnv1a(std::string_view bytes)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t value)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

namespace {

std::string readFile(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Everything a run depends on, canonicalized. The hash lands in report
// filenames, so identical runs map to identical paths and anything else
// cannot collide with them.
class RunStamp {
public:
    explicit RunStamp(std::string command) : command_(std::move(command))
    {
        set("command", command_);
        set("tool_version", std::string(kToolVersion));
    }

    void set(const std::string &key, const std::string &value) { entries_[key] = value; }
    void set(const std::string &key, std::int64_t value) { entries_[key] = std::to_string(value); }

    void addInput(const std::string &name, const std::string &path)
    {
        auto digest = hex64(fnv1a(readFile(path)));
        inputs_[name] = digest;
        set("input_" + name, digest);
    }

    std::string hash() const
    {
        std::string canon;
        for (const auto &[k, v] : entries_) {
            canon += k;
            canon += '=';
            canon += v;
            canon += ';';
        }
        return hex64(fnv1a(canon));
    }

    // `# key=value` comment block for CSV reports.
    std::string csvHeader() const
    {
        std::string out;
        out += "# tool_version=" + std::string(kToolVersion) + "\n";
        out += "# command=" + command_ + "\n";
        out += "# config_hash=" + hash() + "\n";
        for (const auto &[name, digest] : inputs_) {
            out += "# input_" + name + "=" + digest + "\n";
        }
        return out;
    }

    // Wraps a payload (already-serialized JSON value) with the run metadata.
    std::string jsonDocument(const std::string &payload) const
    {
        std::string out = "{\"tool_version\":\"";
        out += kToolVersion;
        out += "\",\"command\":\"" + command_ + "\",\"config_hash\":\"" + hash() + "\"";
        out += ",\"inputs\":{";
        bool first = true;
        for (const auto &[name, digest] : inputs_) {
            if (!first) {
                out += ",";
            }
            first = false;
            out += "\"" + name + "\":\"" + digest + "\"";
        }
        out += "},\"report\":" + payload + "}\n";
        return out;
    }

private:
    std::string command_;
    std::map<std::string, std::string> entries_;
    std::map<std::string, std::string> inputs_;
};

struct CommonOptions {
    std::string outDir;
    unsigned jobs = 1;
};

void addCommonOptions(CLI::App *cmd, CommonOptions &opts)
{
    const char *fromEnv = std::getenv(kOutputDirEnv);
    opts.outDir = fromEnv ? fromEnv : ".";
    cmd->add_option("--out", opts.outDir, "Report directory")->capture_default_str();
    cmd->add_option("--jobs", opts.jobs, "Worker thread cap")->check(CLI::Range(1u, 256u));
}

// Reports are never rewritten: an existing file for this exact run is left
// alone, everything else lands under a fresh name because the hash differs.
std::filesystem::path emitReport(const CommonOptions &opts, const RunStamp &stamp,
                                 const std::string &stem, const std::string &ext,
                                 const std::string &content)
{
    std::filesystem::create_directories(opts.outDir);
    auto path = std::filesystem::path(opts.outDir) / (stem + "-" + stamp.hash() + "." + ext);
    if (std::filesystem::exists(path)) {
        std::cout << "kept " << path.string() << "\n";
        return path;
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        out << content;
        if (!out) {
            throw std::runtime_error("cannot write report: " + path.string());
        }
    }
    std::filesystem::rename(tmp, path);
    std::cout << "wrote " << path.string() << "\n";
    return path;
}

// Runs fn(i) for i in [0, n) across min(jobs, n) threads. Exceptions
// propagate after all workers join.
void parallelFor(std::size_t n, unsigned jobs, const std::function<void(std::size_t)> &fn)
{
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    auto workers = std::min<std::size_t>(jobs, n);
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) {
                    fn(i);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto &t : threads) {
        t.join();
    }
    for (auto &e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

// Clusters addressed by the run: explicit ids, or every cluster with at
// least minTxs transactions.
std::vector<ClusterId> selectClusters(const ClusterSet &clusters,
                                      const std::vector<ClusterId> &explicitIds,
                                      std::size_t minTxs)
{
    std::vector<ClusterId> selected;
    if (!explicitIds.empty()) {
        for (auto id : explicitIds) {
            if (id >= clusters.clusterCount()) {
                throw std::runtime_error("cluster id out of range: " + std::to_string(id));
            }
            selected.push_back(id);
        }
        return selected;
    }
    for (ClusterId id = 0; id < clusters.clusterCount(); ++id) {
        if (clusters.transactions(id).size() >= minTxs) {
            selected.push_back(id);
        }
    }
    return selected;
}

// Majority entity among the cluster's addresses, by the truth labels.
// Ties break toward the lexicographically smaller entity.
std::string majorityEntity(const ChainStore &store, const ClusterSet &clusters, ClusterId id,
                           const synth::GroundTruth &truth)
{
    std::map<std::string, std::size_t> counts;
    for (auto addr : clusters.addresses(id)) {
        auto it = truth.addressEntity.find(store.addressName(addr));
        if (it != truth.addressEntity.end()) {
            ++counts[it->second];
        }
    }
    std::string best;
    std::size_t bestCount = 0;
    for (const auto &[entity, count] : counts) {
        if (count > bestCount) {
            best = entity;
            bestCount = count;
        }
    }
    return best;
}

int cmdIngest(const std::string &ledgerPath, const CommonOptions &opts)
{
    RunStamp stamp("ingest");
    stamp.addInput("ledger", ledgerPath);
    auto store = ChainStore::ingestFile(ledgerPath);

    std::size_t coinbase = 0;
    std::uint32_t maxHeight = 0;
    for (TxIndex i = 0; i < store.txCount(); ++i) {
        coinbase += store.tx(i).coinbase ? 1 : 0;
        maxHeight = std::max(maxHeight, store.tx(i).height);
    }
    std::ostringstream payload;
    payload << "{\"n_txs\":" << store.txCount() << ",\"n_addresses\":" << store.addressCount()
            << ",\"n_coinbase\":" << coinbase << ",\"max_height\":" << maxHeight << "}";
    emitReport(opts, stamp, "ingest", "json", stamp.jsonDocument(payload.str()));
    std::cout << "ingested " << store.txCount() << " txs, " << store.addressCount()
              << " addresses\n";
    return kExitOk;
}

int cmdCluster(const std::string &ledgerPath, const CommonOptions &opts)
{
    RunStamp stamp("cluster");
    stamp.addInput("ledger", ledgerPath);
    auto store = ChainStore::ingestFile(ledgerPath);
    auto clusters = ClusterSet::build(store);

    std::ostringstream addrCsv;
    addrCsv << stamp.csvHeader();
    clusters.writeAddressCsv(addrCsv, store);
    emitReport(opts, stamp, "cluster-addresses", "csv", addrCsv.str());

    std::ostringstream txCsv;
    txCsv << stamp.csvHeader();
    clusters.writeTxCsv(txCsv, store);
    emitReport(opts, stamp, "cluster-txs", "csv", txCsv.str());

    std::cout << "clusters " << clusters.clusterCount() << "\n";
    return kExitOk;
}

int cmdFeatures(const std::string &ledgerPath, const std::string &truthPath,
                const CommonOptions &opts)
{
    RunStamp stamp("features");
    stamp.addInput("ledger", ledgerPath);
    if (!truthPath.empty()) {
        stamp.addInput("truth", truthPath);
    }
    auto store = ChainStore::ingestFile(ledgerPath);
    auto clusters = ClusterSet::build(store);

    std::unordered_map<ClusterId, std::string> labels;
    if (!truthPath.empty()) {
        auto truth = synth::GroundTruth::fromJsonFile(truthPath);
        for (ClusterId id = 0; id < clusters.clusterCount(); ++id) {
            if (clusters.transactions(id).empty()) {
                continue;
            }
            std::set<std::string> entities;
            for (auto addr : clusters.addresses(id)) {
                auto it = truth.addressEntity.find(store.addressName(addr));
                if (it != truth.addressEntity.end()) {
                    entities.insert(it->second);
                }
            }
            if (!entities.empty()) {
                labels[id] = entities.size() > 1 ? "fp" : "tp";
            }
        }
    }

    std::ostringstream csv;
    csv << stamp.csvHeader();
    writeFeatureCsv(csv, store, clusters, labels);
    emitReport(opts, stamp, "features", "csv", csv.str());
    return kExitOk;
}

int cmdValidate(const std::string &ledgerPath, const std::vector<ClusterId> &clusterIds,
                std::size_t minTxs, const std::string &format, const CommonOptions &opts)
{
    RunStamp stamp("validate");
    stamp.addInput("ledger", ledgerPath);
    if (!clusterIds.empty()) {
        std::string ids;
        for (auto id : clusterIds) {
            ids += std::to_string(id) + ",";
        }
        stamp.set("clusters", ids);
    }
    stamp.set("min_txs", static_cast<std::int64_t>(minTxs));
    stamp.set("format", format);

    auto store = ChainStore::ingestFile(ledgerPath);
    auto clusters = ClusterSet::build(store);
    auto selected = selectClusters(clusters, clusterIds, std::max<std::size_t>(minTxs, 1));

    std::vector<PeelChainPartition> partitions(selected.size());
    parallelFor(selected.size(), opts.jobs, [&](std::size_t i) {
        auto features = computeClusterFeatures(store, clusters, selected[i]);
        partitions[i] = partitionPeelChains(store, clusters, selected[i], features);
    });

    if (format == "csv") {
        std::ostringstream csv;
        csv << stamp.csvHeader();
        writeValidationCsvHeader(csv);
        for (const auto &p : partitions) {
            writeValidationCsvRow(csv, p);
        }
        emitReport(opts, stamp, "validation", "csv", csv.str());
    } else {
        std::ostringstream payload;
        payload << "[";
        for (std::size_t i = 0; i < partitions.size(); ++i) {
            if (i > 0) {
                payload << ",";
            }
            writeValidationJson(payload, store, partitions[i]);
        }
        payload << "]";
        emitReport(opts, stamp, "validation", "json", stamp.jsonDocument(payload.str()));
    }
    return kExitOk;
}

struct ExpandFlags {
    std::string rule = "fnext";
    std::string tagsPath;
    std::string ownEntity;
    std::vector<ClusterId> clusterIds;
    std::size_t minTxs = 2;
    std::uint32_t maxHops = 0;
    std::uint32_t maxFrontier = 10000;
    std::size_t top = 10;
    bool strict = false;
    bool trace = false;
    std::string format = "csv";
};

int cmdExpand(const std::string &ledgerPath, const ExpandFlags &flags, const CommonOptions &opts)
{
    auto rule = parseChangeRule(flags.rule);
    if (!rule) {
        throw CLI::ValidationError("--rule", "unknown change rule: " + flags.rule);
    }

    RunStamp stamp("expand");
    stamp.addInput("ledger", ledgerPath);
    if (!flags.tagsPath.empty()) {
        stamp.addInput("tags", flags.tagsPath);
    }
    stamp.set("rule", flags.rule);
    stamp.set("min_txs", static_cast<std::int64_t>(flags.minTxs));
    stamp.set("max_hops", static_cast<std::int64_t>(flags.maxHops));
    stamp.set("max_frontier", static_cast<std::int64_t>(flags.maxFrontier));
    stamp.set("own_entity", flags.ownEntity);
    stamp.set("format", flags.format);
    if (!flags.clusterIds.empty()) {
        std::string ids;
        for (auto id : flags.clusterIds) {
            ids += std::to_string(id) + ",";
        }
        stamp.set("clusters", ids);
    }

    auto store = ChainStore::ingestFile(ledgerPath);
    auto clusters = ClusterSet::build(store);
    auto tags = flags.tagsPath.empty() ? TagStore{} : TagStore::loadCsvFile(flags.tagsPath);
    auto selected = selectClusters(clusters, flags.clusterIds, std::max<std::size_t>(flags.minTxs, 1));

    TraversalLimits limits;
    limits.maxHops = flags.maxHops;
    limits.maxFrontier = flags.maxFrontier;

    std::vector<ExpansionResult> results(selected.size());
    std::vector<EvalReport> evals(selected.size());
    std::vector<TraceLog> traces(selected.size());
    parallelFor(selected.size(), opts.jobs, [&](std::size_t i) {
        auto features = computeClusterFeatures(store, clusters, selected[i]);
        results[i] = expandCluster(store, clusters, selected[i], features, *rule, limits,
                                   flags.trace ? &traces[i] : nullptr);
        evals[i] = evaluateExpansion(store, results[i], tags, flags.ownEntity);
    });

    bool anyTruncated = false;
    for (const auto &r : results) {
        anyTruncated = anyTruncated || r.truncated;
    }

    if (flags.format == "json") {
        std::ostringstream payload;
        payload << "[";
        for (std::size_t i = 0; i < results.size(); ++i) {
            if (i > 0) {
                payload << ",";
            }
            writeExpansionJson(payload, store, results[i], evals[i], flags.top);
        }
        payload << "]";
        emitReport(opts, stamp, "expansion", "json", stamp.jsonDocument(payload.str()));
    } else {
        std::ostringstream csv;
        csv << stamp.csvHeader();
        csv << "cluster_id,rule,n_txs,n_discovered,expansion_factor,fdr,truncated\n";
        for (std::size_t i = 0; i < results.size(); ++i) {
            const auto &r = results[i];
            csv << r.cluster << ',' << changeRuleName(r.rule) << ',' << r.clusterTxCount << ','
                << r.discovered.size() << ',' << r.expansionFactor() << ',' << evals[i].fdr << ','
                << (r.truncated ? "true" : "false") << '\n';
        }
        emitReport(opts, stamp, "expansion", "csv", csv.str());
    }

    if (flags.trace) {
        TraceLog merged;
        for (const auto &t : traces) {
            merged.insert(merged.end(), t.begin(), t.end());
        }
        std::ostringstream traceJson;
        writeTraceJson(traceJson, merged);
        emitReport(opts, stamp, "trace", "json", traceJson.str());
    }

    if (anyTruncated && flags.strict) {
        std::cerr << "error: traversal truncated by limits (strict mode)\n";
        return kExitLimit;
    }
    return kExitOk;
}

struct EvaluateFlags {
    std::string truthPath;
    std::string tagsPath;
    std::size_t minTxs = 2;
    std::uint32_t maxHops = 0;
};

int cmdEvaluate(const std::string &ledgerPath, const EvaluateFlags &flags,
                const CommonOptions &opts)
{
    RunStamp stamp("evaluate");
    stamp.addInput("ledger", ledgerPath);
    stamp.addInput("truth", flags.truthPath);
    if (!flags.tagsPath.empty()) {
        stamp.addInput("tags", flags.tagsPath);
    }
    stamp.set("min_txs", static_cast<std::int64_t>(flags.minTxs));
    stamp.set("max_hops", static_cast<std::int64_t>(flags.maxHops));

    auto store = ChainStore::ingestFile(ledgerPath);
    auto clusters = ClusterSet::build(store);
    auto truth = synth::GroundTruth::fromJsonFile(flags.truthPath);
    TagStore tags;
    if (!flags.tagsPath.empty()) {
        tags = TagStore::loadCsvFile(flags.tagsPath);
    } else {
        std::istringstream rows(truth.tagsCsv());
        tags = TagStore::loadCsv(rows);
    }

    auto selected = selectClusters(clusters, {}, std::max<std::size_t>(flags.minTxs, 1));
    TraversalLimits limits;
    limits.maxHops = flags.maxHops;

    const ChangeRule rules[] = {ChangeRule::peel,       ChangeRule::peelStrict,
                                ChangeRule::androulaki, ChangeRule::meiklejohn,
                                ChangeRule::goldfeder,  ChangeRule::ermilov};

    std::vector<ClusterFeatures> features(selected.size());
    std::vector<std::string> own(selected.size());
    parallelFor(selected.size(), opts.jobs, [&](std::size_t i) {
        features[i] = computeClusterFeatures(store, clusters, selected[i]);
        own[i] = majorityEntity(store, clusters, selected[i], truth);
    });

    std::vector<BaselineSummary> summaries;
    for (auto rule : rules) {
        std::vector<double> expansion(selected.size());
        std::vector<double> fdr(selected.size());
        parallelFor(selected.size(), opts.jobs, [&](std::size_t i) {
            auto result = expandCluster(store, clusters, selected[i], features[i], rule, limits);
            auto eval = evaluateExpansion(store, result, tags, own[i]);
            expansion[i] = result.expansionFactor();
            fdr[i] = eval.fdr;
        });
        BaselineSummary row;
        row.rule = rule;
        for (std::size_t i = 0; i < selected.size(); ++i) {
            row.meanExpansion += expansion[i];
            row.meanFdr += fdr[i];
        }
        if (!selected.empty()) {
            row.meanExpansion /= static_cast<double>(selected.size());
            row.meanFdr /= static_cast<double>(selected.size());
        }
        summaries.push_back(row);
    }

    std::ostringstream csv;
    csv << stamp.csvHeader();
    writeBaselineComparisonCsv(csv, summaries);
    emitReport(opts, stamp, "baseline-comparison", "csv", csv.str());
    return kExitOk;
}

struct GenerateFlags {
    std::string scenario;
    std::string specPath;
    std::vector<std::string> sets;
    std::uint64_t seed = 1;
    bool list = false;
};

int cmdGenerate(const GenerateFlags &flags, const CommonOptions &opts)
{
    if (flags.list) {
        for (const auto &name : synth::scenarioNames()) {
            std::cout << name << "\n";
        }
        return kExitOk;
    }
    synth::ScenarioSpec spec;
    if (!flags.specPath.empty()) {
        spec = synth::ScenarioSpec::fromJson(readFile(flags.specPath));
        if (!flags.scenario.empty() && flags.scenario != spec.name) {
            throw std::runtime_error("--scenario disagrees with the spec file");
        }
    } else if (!flags.scenario.empty()) {
        spec = synth::scenarioSpec(flags.scenario);
    } else {
        throw CLI::ValidationError("generate", "needs --scenario or --spec-file");
    }
    for (const auto &kv : flags.sets) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw CLI::ValidationError("--set", "expected key=value, got: " + kv);
        }
        spec.params[kv.substr(0, eq)] = std::stoll(kv.substr(eq + 1));
    }

    RunStamp stamp("generate");
    stamp.set("scenario", spec.name);
    stamp.set("seed", static_cast<std::int64_t>(flags.seed));
    for (const auto &[k, v] : spec.params) {
        stamp.set("param_" + k, v);
    }

    auto output = synth::generate(spec, flags.seed);
    auto truthJson = output.truth.toJson();
    auto tagsCsv = output.truth.tagsCsv();

    emitReport(opts, stamp, "ledger-" + spec.name, "jsonl", output.ledger);
    emitReport(opts, stamp, "truth-" + spec.name, "json", truthJson);
    emitReport(opts, stamp, "tags-" + spec.name, "csv", tagsCsv);
    emitReport(opts, stamp, "scenario-" + spec.name, "json", spec.toJson());

    std::cout << "ledger_digest " << hex64(fnv1a(output.ledger)) << "\n";
    std::cout << "truth_digest " << hex64(fnv1a(truthJson)) << "\n";
    return kExitOk;
}

} // namespace

int run(int argc, const char *const *argv)
{
    CLI::App app{"Transaction-graph forensics over UTXO ledgers"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    std::string ledgerPath;
    std::string truthPath;
    CommonOptions common[7];

    auto *ingest = app.add_subcommand("ingest", "Parse and link a ledger");
    ingest->add_option("--ledger", ledgerPath, "Ledger JSONL")->required();
    addCommonOptions(ingest, common[0]);

    auto *cluster = app.add_subcommand("cluster", "Co-spend clustering CSV export");
    cluster->add_option("--ledger", ledgerPath, "Ledger JSONL")->required();
    addCommonOptions(cluster, common[1]);

    auto *features = app.add_subcommand("features", "Per-cluster feature CSV export");
    features->add_option("--ledger", ledgerPath, "Ledger JSONL")->required();
    features->add_option("--truth", truthPath, "Ground truth JSON for labels");
    addCommonOptions(features, common[2]);

    std::vector<ClusterId> validateIds;
    std::size_t validateMinTxs = 2;
    std::string validateFormat = "json";
    auto *validate = app.add_subcommand("validate", "Peel-chain partition per cluster");
    validate->add_option("--ledger", ledgerPath, "Ledger JSONL")->required();
    validate->add_option("--cluster", validateIds, "Cluster id (repeatable; default: all)");
    validate->add_option("--min-txs", validateMinTxs, "Minimum cluster transactions")
        ->capture_default_str();
    validate->add_option("--format", validateFormat, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    addCommonOptions(validate, common[3]);

    ExpandFlags expandFlags;
    auto *expand = app.add_subcommand("expand", "Forward expansion per cluster");
    expand->add_option("--ledger", ledgerPath, "Ledger JSONL")->required();
    expand->add_option("--rule", expandFlags.rule,
                       "fnext, fnext2, androulaki, meiklejohn, goldfeder, ermilov")
        ->capture_default_str();
    expand->add_option("--tags", expandFlags.tagsPath, "Address tags CSV");
    expand->add_option("--own-entity", expandFlags.ownEntity,
                       "Entity whose tags do not count as false positives");
    expand->add_option("--cluster", expandFlags.clusterIds,
                       "Cluster id (repeatable; default: all)");
    expand->add_option("--min-txs", expandFlags.minTxs, "Minimum cluster transactions")
        ->capture_default_str();
    expand->add_option("--max-hops", expandFlags.maxHops, "Forward hop cap, 0 = unlimited")
        ->capture_default_str();
    expand->add_option("--max-frontier", expandFlags.maxFrontier, "Backward frontier cap")
        ->capture_default_str();
    expand->add_option("--top", expandFlags.top, "Counterparties per report")
        ->capture_default_str();
    expand->add_flag("--strict", expandFlags.strict, "Exit 3 when any traversal is truncated");
    expand->add_flag("--trace", expandFlags.trace, "Write per-hop trace JSON");
    expand->add_option("--format", expandFlags.format, "csv or json")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    addCommonOptions(expand, common[4]);

    EvaluateFlags evaluateFlags;
    auto *evaluate = app.add_subcommand("evaluate", "Heuristic comparison over all clusters");
    evaluate->add_option("--ledger", ledgerPath, "Ledger JSONL")->required();
    evaluate->add_option("--truth", evaluateFlags.truthPath, "Ground truth JSON")->required();
    evaluate->add_option("--tags", evaluateFlags.tagsPath, "Address tags CSV (default: from truth)");
    evaluate->add_option("--min-txs", evaluateFlags.minTxs, "Minimum cluster transactions")
        ->capture_default_str();
    evaluate->add_option("--max-hops", evaluateFlags.maxHops, "Forward hop cap, 0 = unlimited")
        ->capture_default_str();
    addCommonOptions(evaluate, common[5]);

    GenerateFlags generateFlags;
    auto *generate = app.add_subcommand("generate", "Deterministic synthetic ledger");
    generate->add_option("--scenario", generateFlags.scenario, "Library scenario name");
    generate->add_option("--spec-file", generateFlags.specPath, "Scenario spec JSON");
    generate->add_option("--set", generateFlags.sets, "Parameter override key=value (repeatable)");
    generate->add_option("--seed", generateFlags.seed, "Generator seed")->capture_default_str();
    generate->add_flag("--list", generateFlags.list, "List library scenarios");
    addCommonOptions(generate, common[6]);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (ingest->parsed()) {
            return cmdIngest(ledgerPath, common[0]);
        }
        if (cluster->parsed()) {
            return cmdCluster(ledgerPath, common[1]);
        }
        if (features->parsed()) {
            return cmdFeatures(ledgerPath, truthPath, common[2]);
        }
        if (validate->parsed()) {
            return cmdValidate(ledgerPath, validateIds, validateMinTxs, validateFormat, common[3]);
        }
        if (expand->parsed()) {
            return cmdExpand(ledgerPath, expandFlags, common[4]);
        }
        if (evaluate->parsed()) {
            return cmdEvaluate(ledgerPath, evaluateFlags, common[5]);
        }
        if (generate->parsed()) {
            return cmdGenerate(generateFlags, common[6]);
        }
    } catch (const CLI::ValidationError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    }
    return kExitUsage;
}

} // namespace peeltrace::cli
