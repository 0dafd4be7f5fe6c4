#include <doctest.h>

#include <algorithm>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

#include <json.hpp>

#include <peeltrace/peel.hpp>
#include <peeltrace/synthgen.hpp>

#include "test_support.hpp"

using namespace peeltrace;

namespace {

// Reference forward step, written as plainly as possible: pick the candidate
// outputs the strategy allows, keep those that are spent, pay a known script
// type, and are consumed by a transaction whose tuple the cluster has used,
// then require a unique surviving spender.
std::optional<TxIndex> fnextOracle(const ChainStore &store, const ClusterFeatures &f, TxIndex t)
{
    const auto &tx = store.tx(t);
    auto n = tx.outputs.size();
    std::vector<std::size_t> candidates;
    switch (f.strategy) {
    case ChangeStrategy::first:
        candidates = {0};
        break;
    case ChangeStrategy::last:
        candidates = {n - 1};
        break;
    case ChangeStrategy::either:
        candidates = {0, n - 1};
        break;
    case ChangeStrategy::none:
        for (std::size_t i = 0; i < n; ++i) {
            candidates.push_back(i);
        }
        break;
    }

    std::set<TxIndex> spenders;
    for (auto i : candidates) {
        const auto &out = tx.outputs[i];
        if (!out.isSpent()) {
            continue;
        }
        if (!f.addressTypes.contains(out.type)) {
            continue;
        }
        if (!f.txTuples.contains(txFeatures(store.tx(out.spentBy)))) {
            continue;
        }
        spenders.insert(out.spentBy);
    }
    if (spenders.size() == 1) {
        return *spenders.begin();
    }
    return std::nullopt;
}

// Reference backward step: bucket each input's creating transaction by the
// position the consumed output held, filter by the cluster's tuples.
std::vector<TxIndex> fprevOracle(const ChainStore &store, const ClusterFeatures &f, TxIndex t)
{
    std::set<TxIndex> first;
    std::set<TxIndex> last;
    std::set<TxIndex> all;
    for (const auto &in : store.tx(t).inputs) {
        const auto &prev = store.tx(in.prevTx);
        if (!f.txTuples.contains(txFeatures(prev))) {
            continue;
        }
        if (in.prevIndex == 0) {
            first.insert(in.prevTx);
        }
        if (in.prevIndex + 1 == prev.outputs.size()) {
            last.insert(in.prevTx);
        }
        all.insert(in.prevTx);
    }
    std::set<TxIndex> picked;
    switch (f.strategy) {
    case ChangeStrategy::first:
        picked = first;
        break;
    case ChangeStrategy::last:
        picked = last;
        break;
    case ChangeStrategy::either:
        picked = first;
        picked.insert(last.begin(), last.end());
        break;
    case ChangeStrategy::none:
        picked = all;
        break;
    }
    return {picked.begin(), picked.end()};
}

ClusterFeatures maskedFeatures(ChangeStrategy s, std::uint16_t tupleMask, std::uint16_t typeMask)
{
    ClusterFeatures f;
    f.strategy = s;
    for (unsigned code = 0; code < 16; ++code) {
        if ((tupleMask >> code) & 1u) {
            f.txTuples.insert(FeatureTuple::fromCode(static_cast<std::uint8_t>(code)));
        }
    }
    for (unsigned type = 0; type < kAddressTypeCount; ++type) {
        if ((typeMask >> type) & 1u) {
            f.addressTypes.insert(static_cast<AddressType>(type));
        }
    }
    return f;
}

constexpr ChangeStrategy kAllStrategies[] = {ChangeStrategy::first, ChangeStrategy::last,
                                             ChangeStrategy::either, ChangeStrategy::none};

} // namespace

TEST_CASE("forward and backward steps agree with their reference forms on random ledgers")
{
    auto spec = synth::scenarioSpec("random-mesh");
    spec.params["txs"] = 900;
    auto out = synth::generate(spec, 77);
    std::istringstream in(out.ledger);
    auto store = ChainStore::ingest(in);
    auto clusters = ClusterSet::build(store);

    synth::Rng rng(4242);
    std::size_t mismatches = 0;
    for (TxIndex t = 0; t < store.txCount(); ++t) {
        for (auto s : kAllStrategies) {
            // One realistic feature set and one adversarial random mask.
            std::vector<ClusterFeatures> configs;
            if (auto c = clusters.clusterOfTx(t)) {
                auto f = computeClusterFeatures(store, clusters, *c);
                f.strategy = s;
                configs.push_back(f);
            }
            auto tupleMask = static_cast<std::uint16_t>(rng.range(1, 0xffff));
            auto typeMask = static_cast<std::uint16_t>(rng.range(1, 0x3ff));
            configs.push_back(maskedFeatures(s, tupleMask, typeMask));

            for (const auto &f : configs) {
                auto decision = nextPeelHop(store, f, t);
                if (decision.next != fnextOracle(store, f, t)) {
                    ++mismatches;
                }
                if (prevPeelHops(store, f, t) != fprevOracle(store, f, t)) {
                    ++mismatches;
                }
            }
        }
    }
    CHECK(mismatches == 0);
}

TEST_CASE("forward step resolves candidates and abstains on ambiguity")
{
    test::Fixture f;
    auto cb = f.coinbase({{"w0", 100000000}, {"w1", 100000000}, {"w2", 100000000}});
    // h1: two outputs spent by two different transactions.
    auto h1 = f.spend({{cb, 0}}, {{"x1", 40000000}, {"x2", 59990000}});
    auto sp1 = f.spend({{h1, 0}}, {{"y1", 39990000}});
    auto sp2 = f.spend({{h1, 1}}, {{"y2", 59980000}});
    // h2: two outputs spent by the same transaction.
    auto h2 = f.spend({{cb, 1}}, {{"x3", 50000000}, {"x4", 49990000}});
    auto sp3 = f.spend({{h2, 0}, {h2, 1}}, {{"y3", 99980000}});
    // h3: one output spent, one fresh.
    auto h3 = f.spend({{cb, 2}}, {{"x5", 30000000}, {"x6", 69990000}});
    auto sp4 = f.spend({{h3, 1}}, {{"y4", 69980000}});

    auto store = f.store();
    auto features = maskedFeatures(ChangeStrategy::none, 0xffff, 0x3ff);

    auto d1 = nextPeelHop(store, features, *store.txIndexOf(h1));
    CHECK(d1.candidateCount == 2);
    CHECK_FALSE(d1.next.has_value());
    (void)sp1;

    // Both outputs feed one spender: a single candidate, reached two ways.
    auto d2 = nextPeelHop(store, features, *store.txIndexOf(h2));
    CHECK(d2.candidateCount == 1);
    CHECK(d2.next == *store.txIndexOf(sp3));
    CHECK(d2.viaOutputs == std::vector<std::uint32_t>{0, 1});

    auto d3 = nextPeelHop(store, features, *store.txIndexOf(h3));
    CHECK(d3.candidateCount == 1);
    CHECK(d3.next == *store.txIndexOf(sp4));
    CHECK(d3.viaOutputs == std::vector<std::uint32_t>{1});

    // Strategy narrows the candidate window: only the first output counts.
    features.strategy = ChangeStrategy::first;
    auto d4 = nextPeelHop(store, features, *store.txIndexOf(h3));
    CHECK(d4.candidateCount == 0);
    CHECK_FALSE(d4.next.has_value());

    features.strategy = ChangeStrategy::last;
    auto d5 = nextPeelHop(store, features, *store.txIndexOf(h1));
    CHECK(d5.next == *store.txIndexOf(sp2));
}

TEST_CASE("forward step filters on script type and spender tuple")
{
    test::Fixture f;
    auto cb = f.coinbase({{"w0", 100000000}});
    auto h1 = f.spend({{cb, 0}}, {{"x1", 99990000, AddressType::multisig_2_6}});
    f.spend({{h1, 0}}, {{"y1", 99980000}}, FeatureTuple{false, true, 2, false});

    auto store = f.store();
    auto t1 = *store.txIndexOf(h1);

    // Script type outside the cluster's set.
    auto noType = maskedFeatures(ChangeStrategy::none, 0xffff, 0x3ff);
    noType.addressTypes = AddressTypeSet{};
    noType.addressTypes.insert(AddressType::p2pkh_compressed);
    CHECK(nextPeelHop(store, noType, t1).candidateCount == 0);

    // Spender tuple outside the cluster's set. The spender's code is 6.
    auto noTuple = maskedFeatures(ChangeStrategy::none, 0xffff & ~(1u << 6), 0x3ff);
    CHECK(nextPeelHop(store, noTuple, t1).candidateCount == 0);

    auto open = maskedFeatures(ChangeStrategy::none, 1u << 6, 1u << 7); // multisig_2_6 is type 7
    CHECK(nextPeelHop(store, open, t1).candidateCount == 1);
}

TEST_CASE("strict forward step rejects hops into wider clusters")
{
    test::Fixture f;
    auto cb = f.coinbase({{"u0", 100000000},
                          {"s1", 100000000},
                          {"s2", 100000000},
                          {"s1", 100000000}});
    auto t1 = f.spend({{cb, 0}}, {{"p1", 30000000}, {"uc", 69990000}});
    f.spend({{cb, 1}, {cb, 2}}, {{"svc", 199990000}}); // binds s1 and s2
    auto sweep = f.spend({{t1, 1}, {cb, 3}}, {{"hot", 169980000}});

    auto store = f.store();
    auto clusters = ClusterSet::build(store);
    auto features = maskedFeatures(ChangeStrategy::last, 0xffff, 0x3ff);

    auto from = *store.txIndexOf(t1);
    auto plain = nextPeelHop(store, features, from);
    REQUIRE(plain.next == *store.txIndexOf(sweep));

    // The sweep spends two addresses but its input cluster holds three
    // (s2 joined through the service's own consolidation), so the strict
    // variant refuses to follow.
    auto strict = nextPeelHopStrict(store, clusters, features, from);
    CHECK_FALSE(strict.next.has_value());
    CHECK(strict.viaOutputs.empty());

    // When the hop's inputs cover their whole cluster the variants agree.
    test::Fixture g;
    auto gcb = g.coinbase({{"u0", 100000000}});
    auto g1 = g.spend({{gcb, 0}}, {{"p1", 30000000}, {"uc", 69990000}});
    auto g2 = g.spend({{g1, 1}}, {{"p2", 20000000}, {"ud", 49980000}});
    auto gstore = g.store();
    auto gclusters = ClusterSet::build(gstore);
    auto gd = nextPeelHopStrict(gstore, gclusters, features, *gstore.txIndexOf(g1));
    CHECK(gd.next == *gstore.txIndexOf(g2));
}

TEST_CASE("backward step buckets by consumed output position")
{
    test::Fixture f;
    auto cbA = f.coinbase({{"a0", 100000000}, {"a1", 100000000}});
    auto cbB = f.coinbase({{"b0", 100000000}});
    auto tA = f.spend({{cbA, 0}}, {{"c0", 40000000}, {"c1", 59990000}},
                      FeatureTuple{false, true, 2, false});
    auto tB = f.spend({{cbB, 0}}, {{"d0", 99990000}}); // single output: both ends
    auto join = f.spend({{tA, 0}, {tB, 0}, {cbA, 1}}, {{"e0", 239980000}});

    auto store = f.store();
    auto j = *store.txIndexOf(join);
    auto iA = *store.txIndexOf(tA);
    auto iB = *store.txIndexOf(tB);
    auto iCbA = *store.txIndexOf(cbA);

    auto features = maskedFeatures(ChangeStrategy::first, 0xffff, 0x3ff);
    CHECK(prevPeelHops(store, features, j) == std::vector<TxIndex>{iA, iB});

    features.strategy = ChangeStrategy::last;
    // tA's output 0 is not last; cbA's output 1 is; tB's single output is.
    CHECK(prevPeelHops(store, features, j) == std::vector<TxIndex>{iCbA, iB});

    features.strategy = ChangeStrategy::either;
    CHECK(prevPeelHops(store, features, j) == std::vector<TxIndex>{iCbA, iA, iB});

    features.strategy = ChangeStrategy::none;
    CHECK(prevPeelHops(store, features, j) == std::vector<TxIndex>{iCbA, iA, iB});

    // Tuple filter applies to the creating transaction; only tA carries the
    // locktime+v2 tuple.
    auto narrowed = maskedFeatures(ChangeStrategy::none, 0, 0x3ff);
    narrowed.txTuples.insert(txFeatures(store.tx(iA)));
    CHECK(prevPeelHops(store, narrowed, j) == std::vector<TxIndex>{iA});
}

TEST_CASE("forward traversal walks chains and respects mode and limits")
{
    test::Fixture f;
    auto cb = f.coinbase({{"w0", 50000000}, {"w1", 50000000}});
    auto h1 = f.spend({{cb, 0}, {cb, 1}}, {{"p1", 30000000}, {"w0", 69990000}});
    auto h2 = f.spend({{h1, 1}}, {{"p2", 20000000}, {"w1", 49980000}});
    auto h3 = f.spend({{h2, 1}}, {{"p3", 10000000}, {"w0", 39970000}});
    auto leak = f.spend({{h3, 0}}, {{"z1", 9990000}}); // foreign spend of the payment

    auto store = f.store();
    auto clusters = ClusterSet::build(store);
    auto cluster = clusters.clusterOf(*store.addressId("w0"));
    auto features = computeClusterFeatures(store, clusters, cluster);
    REQUIRE(features.strategy == ChangeStrategy::last);

    auto i1 = *store.txIndexOf(h1);
    auto i2 = *store.txIndexOf(h2);
    auto i3 = *store.txIndexOf(h3);

    SUBCASE("full walk in expansion mode")
    {
        TraceLog trace;
        auto walk = followForward(store, clusters, cluster, features, i1,
                                  HeuristicMode::expansion, ChangeRule::peel, {}, &trace);
        CHECK(walk.txs == std::vector<TxIndex>{i1, i2, i3});
        CHECK_FALSE(walk.truncated);
        REQUIRE(trace.size() == 3);
        CHECK(trace[0].txid == h1);
        CHECK(trace[0].hopIndex == 0);
        CHECK_FALSE(trace[0].backward);
        CHECK(trace[1].candidateCount == 1);
        CHECK(trace[2].candidateCount == 0); // w3 is unspent: the chain ends
    }

    SUBCASE("validation mode stops before leaving the cluster")
    {
        // With strategy none the payment output is a candidate too; the walk
        // must stop at the foreign spender rather than admit it.
        auto loose = features;
        loose.strategy = ChangeStrategy::none;
        auto walk = followForward(store, clusters, cluster, loose, i3,
                                  HeuristicMode::validation);
        CHECK(walk.txs == std::vector<TxIndex>{i3});
        CHECK_FALSE(walk.contains(*store.txIndexOf(leak)));
    }

    SUBCASE("expansion mode follows the same link")
    {
        auto loose = features;
        loose.strategy = ChangeStrategy::none;
        auto walk = followForward(store, clusters, cluster, loose, i3,
                                  HeuristicMode::expansion);
        CHECK(walk.txs == std::vector<TxIndex>{i3, *store.txIndexOf(leak)});
    }

    SUBCASE("hop limit truncates")
    {
        TraversalLimits limits;
        limits.maxHops = 1;
        auto walk = followForward(store, clusters, cluster, features, i1,
                                  HeuristicMode::expansion, ChangeRule::peel, limits);
        CHECK(walk.txs == std::vector<TxIndex>{i1, i2});
        CHECK(walk.truncated);
    }

    SUBCASE("traversal starting outside the cluster is empty in validation mode")
    {
        auto walk = followForward(store, clusters, cluster, features,
                                  *store.txIndexOf(leak), HeuristicMode::validation);
        CHECK(walk.txs.empty());
    }
}

TEST_CASE("backward traversal explores the funding closure breadth-first")
{
    test::Fixture f;
    auto cb = f.coinbase({{"r0", 100000000}, {"r1", 100000000}});
    auto tA = f.spend({{cb, 0}}, {{"a0", 99990000}});
    auto tB = f.spend({{cb, 1}}, {{"b0", 99990000}});
    auto join = f.spend({{tA, 0}, {tB, 0}}, {{"j0", 199980000}});
    auto tail = f.spend({{join, 0}}, {{"k0", 199970000}});

    auto store = f.store();
    auto clusters = ClusterSet::build(store);
    auto cluster = clusters.clusterOf(*store.addressId("j0")); // not used for expansion
    auto features = maskedFeatures(ChangeStrategy::none, 0xffff, 0x3ff);

    auto iCb = *store.txIndexOf(cb);
    auto iA = *store.txIndexOf(tA);
    auto iB = *store.txIndexOf(tB);
    auto iJoin = *store.txIndexOf(join);
    auto iTail = *store.txIndexOf(tail);

    SUBCASE("diamond closure visits the shared ancestor once")
    {
        auto walk = followBackward(store, clusters, cluster, features, iTail,
                                   HeuristicMode::expansion);
        CHECK(walk.txs == std::vector<TxIndex>{iTail, iJoin, iA, iB, iCb});
        CHECK_FALSE(walk.truncated);
    }

    SUBCASE("depth limit truncates")
    {
        TraversalLimits limits;
        limits.maxDepth = 1;
        auto walk = followBackward(store, clusters, cluster, features, iTail,
                                   HeuristicMode::expansion, limits);
        CHECK(walk.txs == std::vector<TxIndex>{iTail, iJoin});
        CHECK(walk.truncated);
    }

    SUBCASE("frontier limit truncates")
    {
        TraversalLimits limits;
        limits.maxFrontier = 2;
        auto walk = followBackward(store, clusters, cluster, features, iTail,
                                   HeuristicMode::expansion, limits);
        CHECK(walk.truncated);
        CHECK(walk.txs.size() < 5);
    }

    SUBCASE("validation mode keeps only cluster members")
    {
        // join co-spends a0 and b0, so those merge; tail then extends it.
        auto c = clusters.clusterOf(*store.addressId("a0"));
        auto walk = followBackward(store, clusters, c, features, iTail,
                                   HeuristicMode::validation);
        CHECK(walk.txs == std::vector<TxIndex>{iTail, iJoin});
    }

    SUBCASE("coinbase terminates a branch")
    {
        auto walk = followBackward(store, clusters, cluster, features, iA,
                                   HeuristicMode::expansion);
        CHECK(walk.txs == std::vector<TxIndex>{iA, iCb});
    }
}

TEST_CASE("rule names round-trip and trace serializes with direction labels")
{
    for (auto rule : {ChangeRule::peel, ChangeRule::peelStrict, ChangeRule::androulaki,
                      ChangeRule::meiklejohn, ChangeRule::goldfeder, ChangeRule::ermilov}) {
        CHECK(parseChangeRule(changeRuleName(rule)) == rule);
    }
    CHECK_FALSE(parseChangeRule("fnext3").has_value());

    TraceLog trace;
    trace.push_back({test::hexTxid(1), 0, false, ChangeRule::peel, 1});
    trace.push_back({test::hexTxid(2), 1, true, ChangeRule::peel, 3});
    std::ostringstream out;
    writeTraceJson(out, trace);
    auto doc = nlohmann::json::parse(out.str());
    REQUIRE(doc.is_array());
    REQUIRE(doc.size() == 2);
    CHECK(doc[0]["txid"] == test::hexTxid(1));
    CHECK(doc[0]["direction"] == "forward");
    CHECK(doc[0]["rule"] == "fnext");
    CHECK(doc[1]["direction"] == "backward");
    CHECK(doc[1]["rule"] == "fprev");
    CHECK(doc[1]["hop_index"] == 1);
    CHECK(doc[1]["candidate_count"] == 3);
}
