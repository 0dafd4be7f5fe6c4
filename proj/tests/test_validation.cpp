#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>
#include <vector>

#include <json.hpp>

#include <peeltrace/validation.hpp>
#include <peeltrace/synthgen.hpp>

#include "test_support.hpp"

using namespace peeltrace;

namespace {

struct Prepared {
    ChainStore store;
    ClusterSet clusters;
    ClusterId cluster = 0;
    ClusterFeatures features;
};

Prepared prepare(const std::string &scenario, std::uint64_t seed, const char *anchorLandmark)
{
    auto spec = synth::scenarioSpec(scenario);
    auto out = synth::generate(spec, seed);
    std::istringstream in(out.ledger);
    Prepared p{ChainStore::ingest(in), ClusterSet{}, 0, {}};
    p.clusters = ClusterSet::build(p.store);
    auto anchorTxid = out.truth.landmarks.at(anchorLandmark);
    auto anchor = *p.store.txIndexOf(anchorTxid);
    p.cluster = *p.clusters.clusterOfTx(anchor);
    p.features = computeClusterFeatures(p.store, p.clusters, p.cluster);
    return p;
}

} // namespace

TEST_CASE("peel chain partition is disjoint and covering")
{
    auto p = prepare("k-disjoint-chains", 5, "user-0-anchor");
    auto partition = partitionPeelChains(p.store, p.clusters, p.cluster, p.features);

    CHECK(partition.cluster == p.cluster);
    CHECK(partition.txCount == p.clusters.transactions(p.cluster).size());

    std::set<TxIndex> seen;
    for (const auto &chain : partition.chains) {
        CHECK(std::is_sorted(chain.begin(), chain.end()));
        for (auto t : chain) {
            CHECK(seen.insert(t).second); // no transaction in two chains
        }
    }
    CHECK(seen.size() == partition.txCount);
    for (auto t : p.clusters.transactions(p.cluster)) {
        CHECK(seen.count(t) == 1);
    }

    // chainOf agrees with the chain lists.
    for (std::uint32_t i = 0; i < partition.chains.size(); ++i) {
        for (auto t : partition.chains[i]) {
            CHECK(partition.chainOf.at(t) == i);
        }
    }

    // Chains are ordered by their earliest member.
    for (std::size_t i = 1; i < partition.chains.size(); ++i) {
        CHECK(partition.chains[i - 1].front() < partition.chains[i].front());
    }
}

TEST_CASE("disjoint chains stay separate and the ratio counts them")
{
    auto spec = synth::scenarioSpec("k-disjoint-chains");
    for (std::int64_t k : {1, 4}) {
        spec.params["k"] = k;
        auto out = synth::generate(spec, 21);
        std::istringstream in(out.ledger);
        auto store = ChainStore::ingest(in);
        auto clusters = ClusterSet::build(store);
        auto anchor = *store.txIndexOf(out.truth.landmarks.at("user-0-anchor"));
        auto cluster = *clusters.clusterOfTx(anchor);
        auto features = computeClusterFeatures(store, clusters, cluster);
        auto partition = partitionPeelChains(store, clusters, cluster, features);

        CAPTURE(k);
        CHECK(partition.chains.size() == static_cast<std::size_t>(k));
        CHECK(partition.ratioV() ==
              doctest::Approx(static_cast<double>(k) / static_cast<double>(partition.txCount)));

        // Each generated chain (minus its consolidation head, which all k
        // share) maps onto exactly one recovered chain.
        for (const auto &[chainId, txids] : out.truth.chains) {
            std::set<std::uint32_t> recovered;
            for (const auto &txid : txids) {
                auto idx = *store.txIndexOf(txid);
                if (partition.chainOf.count(idx)) {
                    recovered.insert(partition.chainOf.at(idx));
                }
            }
            CAPTURE(chainId);
            CHECK(recovered.size() == 1);
        }
    }
}

TEST_CASE("single chain collapses to one partition cell")
{
    auto p = prepare("single-chain", 3, "user-0-anchor");
    auto partition = partitionPeelChains(p.store, p.clusters, p.cluster, p.features);
    CHECK(partition.chains.size() == 1);
    CHECK(partition.ratioV() == doctest::Approx(1.0 / static_cast<double>(partition.txCount)));
}

TEST_CASE("same chain membership is an equivalence relation")
{
    auto p = prepare("k-disjoint-chains", 5, "user-0-anchor");
    auto partition = partitionPeelChains(p.store, p.clusters, p.cluster, p.features);
    auto txs = p.clusters.transactions(p.cluster);
    REQUIRE(txs.size() >= 3);

    synth::Rng rng(99);
    for (int i = 0; i < 500; ++i) {
        auto a = txs[rng.below(txs.size())];
        auto b = txs[rng.below(txs.size())];
        auto c = txs[rng.below(txs.size())];
        CHECK(sameChain(partition, a, a));
        CHECK(sameChain(partition, a, b) == sameChain(partition, b, a));
        if (sameChain(partition, a, b) && sameChain(partition, b, c)) {
            CHECK(sameChain(partition, a, c));
        }
    }

    // Transactions outside the cluster are rejected.
    std::optional<TxIndex> outsider;
    for (TxIndex t = 0; t < p.store.txCount(); ++t) {
        if (!partition.chainOf.count(t)) {
            outsider = t;
            break;
        }
    }
    REQUIRE(outsider.has_value());
    CHECK_THROWS_AS(sameChain(partition, txs[0], *outsider), std::invalid_argument);
    CHECK_THROWS_AS(sameChain(partition, *outsider, txs[0]), std::invalid_argument);
}

TEST_CASE("partition requires a non-empty transaction set")
{
    test::Fixture f;
    f.coinbase({{"only-receives", 100000}});
    auto store = f.store();
    auto clusters = ClusterSet::build(store);
    auto lone = clusters.clusterOf(*store.addressId("only-receives"));
    auto features = computeClusterFeatures(store, clusters, lone);
    CHECK_THROWS_AS(partitionPeelChains(store, clusters, lone, features),
                    std::invalid_argument);
}

TEST_CASE("validation report serializes the partition")
{
    auto p = prepare("single-chain", 3, "user-0-anchor");
    auto partition = partitionPeelChains(p.store, p.clusters, p.cluster, p.features);

    std::ostringstream out;
    writeValidationJson(out, p.store, partition);
    auto doc = nlohmann::json::parse(out.str());
    CHECK(doc["cluster_id"] == p.cluster);
    CHECK(doc["n_txs"] == partition.txCount);
    CHECK(doc["n_chains"] == partition.chains.size());
    CHECK(doc["ratio_v"].get<double>() == doctest::Approx(partition.ratioV()));
    REQUIRE(doc["chains"].is_array());
    REQUIRE(doc["chains"].size() == partition.chains.size());
    CHECK(doc["chains"][0]["chain_id"] == 0);
    CHECK(doc["chains"][0]["txids"].size() == partition.chains[0].size());
    CHECK(doc["chains"][0]["txids"][0] == p.store.tx(partition.chains[0][0]).txid);

    std::ostringstream csv;
    writeValidationCsvHeader(csv);
    writeValidationCsvRow(csv, partition);
    std::istringstream lines(csv.str());
    std::string header, row;
    std::getline(lines, header);
    std::getline(lines, row);
    CHECK(header == "cluster_id,n_txs,ratio_v");
    CHECK(row.rfind(std::to_string(p.cluster) + "," + std::to_string(partition.txCount) + ",", 0) ==
          0);
}
