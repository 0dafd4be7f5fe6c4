#include <doctest.h>

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <peeltrace/cluster_set.hpp>
#include <peeltrace/features.hpp>
#include <peeltrace/synthgen.hpp>

#include "test_support.hpp"

using namespace peeltrace;

namespace {

// Independent strategy inference: full case analysis over the qualifying
// transactions, kept deliberately close to a truth table.
ChangeStrategy strategyOracle(const ChainStore &store, const ClusterSet &clusters, ClusterId c)
{
    bool sawQualifying = false;
    bool anyInterior = false;
    bool allFirst = true;
    bool allLast = true;
    for (auto t : clusters.transactions(c)) {
        const auto &tx = store.tx(t);
        std::vector<std::size_t> positions;
        for (std::size_t i = 0; i < tx.outputs.size(); ++i) {
            if (clusters.clusterOf(tx.outputs[i].address) == c) {
                positions.push_back(i);
            }
        }
        if (positions.size() != 1) {
            continue; // zero or several candidate change outputs: not usable
        }
        sawQualifying = true;
        bool isFirst = positions[0] == 0;
        bool isLast = positions[0] + 1 == tx.outputs.size();
        if (!isFirst && !isLast) {
            anyInterior = true;
        }
        allFirst = allFirst && isFirst;
        allLast = allLast && isLast;
    }
    if (!sawQualifying || anyInterior) {
        return ChangeStrategy::none;
    }
    if (allLast) {
        return ChangeStrategy::last;
    }
    if (allFirst) {
        return ChangeStrategy::first;
    }
    return ChangeStrategy::either;
}

} // namespace

TEST_CASE("feature tuple codes are a bijection")
{
    for (unsigned code = 0; code < 16; ++code) {
        auto t = FeatureTuple::fromCode(static_cast<std::uint8_t>(code));
        CHECK(t.code() == code);
    }
    FeatureTuple t{true, false, 2, true};
    CHECK(t.code() == 13);
    CHECK(FeatureTuple::fromCode(13) == t);
}

TEST_CASE("transaction features read the four signals")
{
    test::Fixture f;
    auto cb = f.coinbase({{"m0", 10000000}});
    auto t1 = f.spend({{cb, 0}}, {{"a", 4000000}, {"b", 5990000}},
                      FeatureTuple{true, true, 2, true});
    auto t2 = f.spend({{t1, 0}}, {{"c", 3990000}}, FeatureTuple{false, false, 1, false});

    auto store = f.store();
    auto f1 = txFeatures(store.tx(*store.txIndexOf(t1)));
    CHECK(f1.replaceable);
    CHECK(f1.locktimeSet);
    CHECK(f1.version == 2);
    CHECK(f1.segwit);
    CHECK(f1.code() == 15);

    auto f2 = txFeatures(store.tx(*store.txIndexOf(t2)));
    CHECK(f2.code() == 0);

    // Coinbase has no inputs, so it can never look replaceable.
    auto fcb = txFeatures(store.tx(*store.txIndexOf(cb)));
    CHECK_FALSE(fcb.replaceable);
}

TEST_CASE("feature sets are closed over the 16 tuple and 10 type codes")
{
    FeatureTupleSet tuples;
    CHECK(tuples.empty());
    tuples.insert(FeatureTuple::fromCode(5));
    tuples.insert(FeatureTuple::fromCode(5));
    tuples.insert(FeatureTuple::fromCode(12));
    CHECK(tuples.size() == 2);
    CHECK(tuples.contains(FeatureTuple::fromCode(5)));
    CHECK_FALSE(tuples.contains(FeatureTuple::fromCode(0)));

    AddressTypeSet types;
    types.insert(AddressType::wpkh_compressed);
    types.insert(AddressType::multisig_2_6);
    CHECK(types.size() == 2);
    CHECK(types.contains(AddressType::multisig_2_6));
    CHECK_FALSE(types.contains(AddressType::p2pkh_compressed));
}

TEST_CASE("change strategy names round-trip")
{
    for (auto s : {ChangeStrategy::first, ChangeStrategy::last, ChangeStrategy::either,
                   ChangeStrategy::none}) {
        CHECK(parseChangeStrategy(changeStrategyName(s)) == s);
    }
    CHECK_FALSE(parseChangeStrategy("middle").has_value());
}

TEST_CASE("change strategy inference handles each position class")
{
    auto infer = [](const test::Fixture &f, const char *anchor) {
        auto store = f.store();
        auto clusters = ClusterSet::build(store);
        auto c = clusters.clusterOf(*store.addressId(anchor));
        auto got = inferChangeStrategy(store, clusters, c);
        CHECK(got == strategyOracle(store, clusters, c));
        return got;
    };

    // Change returns to already-clustered addresses, since a fresh change
    // address only joins the cluster once a later transaction co-spends it.
    SUBCASE("change always last")
    {
        test::Fixture f;
        auto cb = f.coinbase({{"w0", 10000000}, {"w1", 10000000}});
        auto t1 = f.spend({{cb, 0}, {cb, 1}}, {{"p1", 3000000}, {"w0", 16990000}});
        f.spend({{t1, 1}}, {{"p2", 1000000}, {"w1", 15980000}});
        CHECK(infer(f, "w0") == ChangeStrategy::last);
    }

    SUBCASE("change always first")
    {
        test::Fixture f;
        auto cb = f.coinbase({{"w0", 10000000}, {"w1", 10000000}});
        auto t1 = f.spend({{cb, 0}, {cb, 1}}, {{"w0", 16990000}, {"p1", 3000000}});
        f.spend({{t1, 0}}, {{"w1", 12990000}, {"p2", 4000000}});
        CHECK(infer(f, "w0") == ChangeStrategy::first);
    }

    SUBCASE("mixed ends settle on either")
    {
        test::Fixture f;
        auto cb = f.coinbase({{"w0", 10000000}, {"w1", 10000000}});
        auto t1 = f.spend({{cb, 0}, {cb, 1}}, {{"w0", 16990000}, {"p1", 3000000}});
        f.spend({{t1, 0}}, {{"p2", 4000000}, {"w1", 12980000}});
        CHECK(infer(f, "w0") == ChangeStrategy::either);
    }

    SUBCASE("single-output spends fit both ends")
    {
        test::Fixture f;
        auto cb = f.coinbase({{"w0", 10000000}, {"w1", 10000000}});
        f.spend({{cb, 0}, {cb, 1}}, {{"w0", 19990000}});
        CHECK(infer(f, "w0") == ChangeStrategy::last);
    }

    SUBCASE("an interior change poisons the whole cluster")
    {
        test::Fixture f;
        auto cb = f.coinbase({{"w0", 10000000}, {"w1", 10000000}});
        auto t1 = f.spend({{cb, 0}, {cb, 1}}, {{"p1", 3000000}, {"w0", 13990000}, {"p2", 3000000}});
        f.spend({{t1, 1}}, {{"p3", 2000000}, {"w1", 11980000}});
        CHECK(infer(f, "w0") == ChangeStrategy::none);
    }

    SUBCASE("no qualifying transaction yields none")
    {
        // Both outputs of the only spend return to the cluster.
        test::Fixture f;
        auto cb = f.coinbase({{"w0", 10000000}, {"w1", 10000000}});
        f.spend({{cb, 0}, {cb, 1}}, {{"w0", 9000000}, {"w1", 10990000}});
        CHECK(infer(f, "w0") == ChangeStrategy::none);
    }
}

TEST_CASE("change strategy inference matches the brute-force oracle on generated ledgers")
{
    for (const char *name : {"random-mesh", "coinjoin-merge", "balanced-60-60"}) {
        auto spec = synth::scenarioSpec(name);
        if (spec.name == "random-mesh") {
            spec.params["txs"] = 600;
        }
        if (spec.name == "balanced-60-60") {
            spec.params["tp_clusters"] = 8;
            spec.params["fp_clusters"] = 8;
        }
        auto out = synth::generate(spec, 31);
        std::istringstream in(out.ledger);
        auto store = ChainStore::ingest(in);
        auto clusters = ClusterSet::build(store);
        for (ClusterId c = 0; c < clusters.clusterCount(); ++c) {
            CAPTURE(name);
            CAPTURE(c);
            CHECK(inferChangeStrategy(store, clusters, c) == strategyOracle(store, clusters, c));
        }
    }
}

TEST_CASE("cluster feature sets collect exactly the observed codes")
{
    test::Fixture f;
    auto cb = f.coinbase({{"w0", 10000000, AddressType::wpkh_compressed},
                          {"w1", 10000000, AddressType::p2pkh_compressed}});
    auto cb2 = f.coinbase({{"w0", 10000000, AddressType::wpkh_compressed}});
    auto t1 = f.spend({{cb, 0}, {cb, 1}},
                      {{"p1", 3000000}, {"w2", 16990000, AddressType::multisig_2_2}},
                      FeatureTuple{false, true, 2, true});
    // Co-spending the change with a second w0 coin pulls w2 into the cluster.
    f.spend({{t1, 1}, {cb2, 0}}, {{"p2", 1000000}, {"w1", 25980000, AddressType::p2pkh_compressed}},
            FeatureTuple{true, false, 1, false});

    auto store = f.store();
    auto clusters = ClusterSet::build(store);
    auto c = clusters.clusterOf(*store.addressId("w0"));
    auto [tuples, types] = clusterFeatureSets(store, clusters, c);

    CHECK(tuples.size() == 2);
    CHECK(tuples.contains(FeatureTuple{false, true, 2, true}));
    CHECK(tuples.contains(FeatureTuple{true, false, 1, false}));
    CHECK_FALSE(tuples.contains(FeatureTuple{}));

    // Cluster addresses: w0, w1, w2 but not the payment outputs.
    CHECK(types.size() == 3);
    CHECK(types.contains(AddressType::wpkh_compressed));
    CHECK(types.contains(AddressType::p2pkh_compressed));
    CHECK(types.contains(AddressType::multisig_2_2));
    CHECK_FALSE(types.contains(AddressType::p2pkh_uncompressed));

    auto features = computeClusterFeatures(store, clusters, c);
    CHECK(features.txTuples == tuples);
    CHECK(features.addressTypes == types);
    CHECK(features.strategy == inferChangeStrategy(store, clusters, c));
}

TEST_CASE("cluster feature row aggregates input-weighted proportions")
{
    test::Fixture f;
    auto cb = f.coinbase({{"w0", 10000000, AddressType::wpkh_compressed},
                          {"w1", 10000000, AddressType::p2pkh_compressed}});
    auto cb2 = f.coinbase({{"w1", 10000000, AddressType::p2pkh_compressed}});
    auto t1 = f.spend({{cb, 0}, {cb, 1}},
                      {{"p1", 3000000}, {"w3", 16990000, AddressType::wpkh_compressed}},
                      FeatureTuple{false, true, 2, true});
    f.spend({{t1, 1}, {cb2, 0}}, {{"p2", 1000000}, {"w4", 25980000, AddressType::wpkh_compressed}},
            FeatureTuple{false, false, 1, false});

    auto store = f.store();
    auto clusters = ClusterSet::build(store);
    auto c = clusters.clusterOf(*store.addressId("w0"));
    auto row = clusterFeatureRow(store, clusters, c);

    // Two transactions: one segwit+locktime+v2, one plain v1.
    CHECK(row.propSegwitEnabled == doctest::Approx(0.5));
    CHECK(row.propLocktimeEnabled == doctest::Approx(0.5));
    CHECK(row.propV1 == doctest::Approx(0.5));
    // Input occurrences: w0 wpkh, w1 p2pkh, w3 wpkh, w1 p2pkh -> 2/4 each.
    CHECK(row.addressTypeMaxProp == doctest::Approx(0.5));
    CHECK(row.hasChangeStrategy); // always-last change

    // Output-only clusters have no transactions and no row.
    auto lone = clusters.clusterOf(*store.addressId("p1"));
    CHECK_THROWS_AS(clusterFeatureRow(store, clusters, lone), std::invalid_argument);
}

TEST_CASE("feature csv emits the fixed header and label column")
{
    test::Fixture f;
    auto cb = f.coinbase({{"w0", 10000000}, {"w1", 10000000}});
    f.spend({{cb, 0}, {cb, 1}}, {{"p1", 3000000}, {"w0", 16990000}});
    auto store = f.store();
    auto clusters = ClusterSet::build(store);
    auto c = clusters.clusterOf(*store.addressId("w0"));

    std::unordered_map<ClusterId, std::string> labels;
    labels[c] = "tp";

    std::ostringstream out;
    writeFeatureCsv(out, store, clusters, labels);
    std::istringstream lines(out.str());
    std::string header;
    std::getline(lines, header);
    CHECK(header == "cluster_id,prop_segwit_enabled,prop_locktime_enabled,prop_v1,"
                    "address_type_max_prop,change_strategy,label");

    std::string row;
    std::size_t rows = 0;
    bool sawLabeled = false;
    while (std::getline(lines, row)) {
        ++rows;
        if (row.rfind(std::to_string(c) + ",", 0) == 0) {
            CHECK(row.find(",tp") == row.size() - 3);
            CHECK(row.find(",strategy,") != std::string::npos);
            sawLabeled = true;
        }
    }
    CHECK(sawLabeled);
    // One row per cluster that spends; output-only clusters are skipped.
    CHECK(rows == 1);
}

TEST_CASE("strategy inference ignores transactions without a unique candidate")
{
    // Deleting a non-qualifying transaction must not change the inference.
    test::Fixture f;
    auto cb = f.coinbase({{"w0", 10000000}, {"w1", 10000000}, {"w2", 10000000}});
    auto t1 = f.spend({{cb, 0}, {cb, 1}}, {{"p1", 3000000}, {"w0", 16990000}});
    f.spend({{t1, 1}, {cb, 2}}, {{"w1", 12000000}, {"w2", 14980000}}); // two in-cluster outputs

    auto store = f.store();
    auto clusters = ClusterSet::build(store);
    auto c = clusters.clusterOf(*store.addressId("w0"));
    CHECK(inferChangeStrategy(store, clusters, c) == ChangeStrategy::last);

    test::Fixture g; // same ledger without the non-qualifying spend
    auto cb2 = g.coinbase({{"w0", 10000000}, {"w1", 10000000}, {"w2", 10000000}});
    g.spend({{cb2, 0}, {cb2, 1}}, {{"p1", 3000000}, {"w0", 16990000}});
    auto store2 = g.store();
    auto clusters2 = ClusterSet::build(store2);
    auto c2 = clusters2.clusterOf(*store2.addressId("w0"));
    CHECK(inferChangeStrategy(store2, clusters2, c2) == ChangeStrategy::last);
}
