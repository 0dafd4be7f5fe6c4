#include <peeltrace/synthgen.hpp>

#include <algorithm>
#include <functional>
#include <stdexcept>

#include "ledger_builder.hpp"

namespace peeltrace::synth {

namespace {

constexpr std::int64_t kCoin = 100000000; // 1 BTC in satoshis
constexpr std::int64_t kBlockReward = 50 * kCoin;

FeatureTuple makeTuple(bool replaceable, bool locktime, std::uint8_t version, bool segwit)
{
    return {replaceable, locktime, version, segwit};
}

// Coinbase transactions always carry the null tuple; keeping entity tuples
// away from it keeps funding txs out of every cluster's feature set.
const FeatureTuple kCoinbaseTuple = makeTuple(false, false, 1, false);

EntityProfile poolProfile(std::string id, FeatureTuple tuple, AddressType type,
                          ChangeStrategy strategy)
{
    EntityProfile p;
    p.entityId = std::move(id);
    p.featureTuples = {{tuple, 1.0}};
    p.addressTypes = {{type, 1.0}};
    p.strategy = strategy;
    return p;
}

// A reuse-style wallet: a fixed set of addresses funded up front, with hop
// change cycling through them so every hop stays in the co-spend cluster.
struct PoolWallet {
    EntityProfile profile;
    std::vector<std::string> addresses;

    AddressType type() const { return profile.addressTypes.front().first; }
    FeatureTuple tuple() const { return profile.featureTuples.front().first; }
};

PoolWallet makeWallet(LedgerBuilder &b, EntityProfile profile, std::size_t poolSize)
{
    profile.validate();
    PoolWallet w;
    w.profile = std::move(profile);
    for (std::size_t i = 0; i < poolSize; ++i) {
        w.addresses.push_back(b.newAddress(w.profile.entityId, w.profile.addressTypes.front().first));
    }
    return w;
}

// One funding coinbase per wallet; extraPerAddress appends additional small
// UTXOs on the named pool addresses for later merge inputs.
std::vector<UtxoRef> fundWallet(LedgerBuilder &b, const PoolWallet &w,
                                std::int64_t valuePerOutput = kBlockReward,
                                const std::vector<std::size_t> &extraOn = {},
                                std::int64_t extraValue = kCoin)
{
    TxSpec cb;
    cb.entity = w.profile.entityId;
    cb.tuple = kCoinbaseTuple;
    for (const auto &addr : w.addresses) {
        cb.outputs.push_back({addr, w.type(), valuePerOutput});
    }
    for (auto idx : extraOn) {
        cb.outputs.push_back({w.addresses[idx], w.type(), extraValue});
    }
    return b.add(cb);
}

// Spends the wallet's base UTXOs into a single change output: the co-spend
// anchor that drops the entire pool into one cluster.
UtxoRef consolidate(LedgerBuilder &b, const PoolWallet &w, std::vector<UtxoRef> base,
                    const std::string &chain)
{
    TxSpec spec;
    spec.entity = w.profile.entityId;
    spec.chain = chain;
    spec.tuple = w.tuple();
    std::int64_t sum = 0;
    for (auto &u : base) {
        sum += u.value;
    }
    spec.inputs = std::move(base);
    auto fee = b.rng().range(150, 999);
    spec.outputs.push_back({w.addresses[0], w.type(), sum - fee});
    return b.add(spec).front();
}

struct HopOutputs {
    UtxoRef change;
    UtxoRef payment;
};

// One peel hop: spends `from` (plus optional extra inputs), pays a fresh or
// given address, and sends change per the declared position.
HopOutputs peelHop(LedgerBuilder &b, const PoolWallet &w, const std::string &chain,
                   UtxoRef from, std::vector<UtxoRef> extraInputs, const std::string &payAddress,
                   AddressType payType, bool changeLast, const std::string &changeAddress,
                   bool roundPayment)
{
    TxSpec spec;
    spec.entity = w.profile.entityId;
    spec.chain = chain;
    spec.tuple = w.profile.sampleTuple(b.rng());
    std::int64_t balance = from.value;
    spec.inputs.push_back(std::move(from));
    for (auto &u : extraInputs) {
        balance += u.value;
        spec.inputs.push_back(std::move(u));
    }
    auto v = splitHop(b.rng(), balance, roundPayment, w.profile.valueMin, w.profile.valueMax);
    OutSpec pay{payAddress, payType, v.payment};
    OutSpec change{changeAddress, w.type(), v.change};
    if (changeLast) {
        spec.outputs = {pay, change};
    } else {
        spec.outputs = {change, pay};
    }
    auto outs = b.add(spec);
    HopOutputs result;
    result.change = changeLast ? outs[1] : outs[0];
    result.payment = changeLast ? outs[0] : outs[1];
    return result;
}

// ---- single-chain ------------------------------------------------------

void emitSingleChain(LedgerBuilder &b, const std::string &entity, ChangeStrategy strategy,
                     std::size_t length, std::size_t poolSize, double noiseProb,
                     FeatureTuple tuple, AddressType type)
{
    auto profile = poolProfile(entity, tuple, type, strategy);
    profile.noiseProb = noiseProb;
    auto w = makeWallet(b, profile, poolSize);
    auto base = fundWallet(b, w);
    auto chain = entity + "-chain";
    auto cur = consolidate(b, w, std::move(base), chain);
    b.truth().landmarks[entity + "-anchor"] = cur.txid;

    for (std::size_t i = 1; i <= length; ++i) {
        bool changeLast = strategy == ChangeStrategy::last ||
                          (strategy == ChangeStrategy::either && i % 2 == 1);
        auto pay = b.newAddress("counterparty", AddressType::p2pkh_uncompressed);
        auto hop = peelHop(b, w, chain, cur, {}, pay, AddressType::p2pkh_uncompressed,
                           changeLast, w.addresses[i % w.addresses.size()],
                           b.rng().chance(w.profile.roundAmountProb));
        cur = hop.change;
    }
}

GeneratorOutput buildSingleChain(const ScenarioSpec &spec, std::uint64_t seed)
{
    LedgerBuilder b(seed);
    auto length = static_cast<std::size_t>(spec.param("chain_length", 30));
    auto pool = static_cast<std::size_t>(spec.param("pool_size", 15));
    auto strategyParam = spec.param("strategy", 1); // 0 first, 1 last, 2 either
    if (length < 1 || pool < 1) {
        throw std::invalid_argument("single-chain needs chain_length >= 1 and pool_size >= 1");
    }
    auto strategy = strategyParam == 0   ? ChangeStrategy::first
                    : strategyParam == 2 ? ChangeStrategy::either
                                         : ChangeStrategy::last;
    double noise = static_cast<double>(spec.param("noise_pct", 0)) / 100.0;
    emitSingleChain(b, "user-0", strategy, length, pool, noise,
                    makeTuple(false, true, 2, true), AddressType::wpkh_compressed);
    return {b.ledgerText(), b.truth()};
}

// ---- k-disjoint-chains -------------------------------------------------

GeneratorOutput buildDisjointChains(const ScenarioSpec &spec, std::uint64_t seed)
{
    LedgerBuilder b(seed);
    auto k = static_cast<std::size_t>(spec.param("k", 3));
    auto length = static_cast<std::size_t>(spec.param("chain_length", 6));
    if (k < 1 || length < 1) {
        throw std::invalid_argument("k-disjoint-chains needs k >= 1 and chain_length >= 1");
    }
    auto pool = static_cast<std::size_t>(spec.param("pool_size", std::max<std::int64_t>(12, static_cast<std::int64_t>(k))));
    if (pool < k) {
        throw std::invalid_argument("pool_size must be at least k");
    }

    auto w = makeWallet(b, poolProfile("user-0", makeTuple(false, true, 2, true),
                                       AddressType::wpkh_compressed, ChangeStrategy::last),
                        pool);
    auto base = fundWallet(b, w);

    // The consolidation fans out k change outputs, one per chain. Under the
    // last-position strategy only chain k links back to it.
    TxSpec cons;
    cons.entity = w.profile.entityId;
    cons.chain = "user-0-chain-" + std::to_string(k - 1);
    cons.tuple = w.tuple();
    std::int64_t sum = 0;
    for (auto &u : base) {
        sum += u.value;
    }
    cons.inputs = std::move(base);
    auto fee = b.rng().range(150, 999);
    auto share = (sum - fee) / static_cast<std::int64_t>(k);
    for (std::size_t j = 0; j < k; ++j) {
        auto value = j + 1 == k ? sum - fee - share * static_cast<std::int64_t>(k - 1) : share;
        cons.outputs.push_back({w.addresses[j], w.type(), value});
    }
    auto consOuts = b.add(cons);
    b.truth().landmarks["user-0-anchor"] = consOuts.front().txid;

    for (std::size_t j = 0; j < k; ++j) {
        auto chain = "user-0-chain-" + std::to_string(j);
        auto cur = consOuts[j];
        for (std::size_t i = 1; i <= length; ++i) {
            auto pay = b.newAddress("counterparty", AddressType::p2pkh_uncompressed);
            auto hop = peelHop(b, w, chain, cur, {}, pay, AddressType::p2pkh_uncompressed, true,
                               w.addresses[(j + k * i) % w.addresses.size()], false);
            cur = hop.change;
        }
    }
    return {b.ledgerText(), b.truth()};
}

// ---- coinjoin-merge ----------------------------------------------------

struct ServiceDesk {
    std::string entity;
    std::string hotWallet;
    std::string staticDeposit1;
    std::string staticDeposit2;
    FeatureTuple tuple = makeTuple(true, true, 1, false);
};

ServiceDesk makeService(LedgerBuilder &b, const std::string &entity)
{
    ServiceDesk s;
    s.entity = entity;
    s.hotWallet = b.newAddress(entity, AddressType::multisig_3_4);
    s.staticDeposit1 = b.newAddress(entity, AddressType::p2pkh_compressed);
    s.staticDeposit2 = b.newAddress(entity, AddressType::p2pkh_compressed);
    TxSpec cb;
    cb.entity = entity;
    cb.tuple = kCoinbaseTuple;
    cb.outputs = {{s.staticDeposit1, AddressType::p2pkh_compressed, kCoin},
                  {s.staticDeposit2, AddressType::p2pkh_compressed, kCoin},
                  {s.hotWallet, AddressType::multisig_3_4, kCoin}};
    b.add(cb);
    b.truth().taggedEntities.push_back(entity);
    return s;
}

// Fresh one-off deposit address, immediately swept to the hot wallet by a
// dedicated service transaction.
UtxoRef freshDeposit(LedgerBuilder &b, const ServiceDesk &s)
{
    auto addr = b.newAddress(s.entity, AddressType::p2pkh_uncompressed);
    return {"", 0, addr, AddressType::p2pkh_uncompressed, 0};
}

void sweepDeposit(LedgerBuilder &b, const ServiceDesk &s, UtxoRef deposit)
{
    TxSpec sweep;
    sweep.entity = s.entity;
    sweep.tuple = s.tuple;
    auto fee = b.rng().range(150, 999);
    auto value = deposit.value - fee;
    sweep.inputs.push_back(std::move(deposit));
    sweep.outputs.push_back({s.hotWallet, AddressType::multisig_3_4, value});
    b.add(sweep);
}

// Eight-hop head for one wallet of a merged pair. Each hop is a distinct
// probe of the published heuristics; the bridge hop at the end hands the
// chain a fresh change lineage. Returns the bridge change (or the final
// in-pool change when the head is closed without a bridge).
UtxoRef emitGauntletHead(LedgerBuilder &b, const PoolWallet &w, const ServiceDesk &svc,
                         const std::string &chain, UtxoRef cons, UtxoRef spareH4,
                         UtxoRef spareH5, bool withBridge)
{
    auto &rng = b.rng();
    const auto &p = w.addresses;
    auto type = w.type();

    auto payDeposit = [&](bool roundPayment, UtxoRef from, std::vector<UtxoRef> extra,
                          const std::string &changeAddr) {
        auto deposit = freshDeposit(b, svc);
        auto hop = peelHop(b, w, chain, std::move(from), std::move(extra), deposit.address,
                           deposit.type, true, changeAddr, roundPayment);
        sweepDeposit(b, svc, hop.payment);
        return hop.change;
    };

    // h1: round payment to a fresh deposit; h2: the same but non-round.
    auto cur = payDeposit(true, cons, {}, p[1]);
    cur = payDeposit(false, cur, {}, p[2]);

    // h3: self-change, the change returns to the spending address.
    cur = payDeposit(true, cur, {}, p[2]);

    // h4: coinjoin-shaped: two inputs, two equal-valued outputs below the
    // change, with the only fresh address among the outputs.
    {
        TxSpec spec;
        spec.entity = w.profile.entityId;
        spec.chain = chain;
        spec.coinjoin = true;
        spec.tuple = w.tuple();
        auto denom = 30 * kCoin / 100;
        auto balance = cur.value + spareH4.value;
        auto fee = rng.range(150, 999);
        auto change = balance - 2 * denom - fee;
        if (change % 10000 == 0) {
            --change;
            ++fee;
        }
        auto deposit = freshDeposit(b, svc);
        spec.inputs = {std::move(cur), std::move(spareH4)};
        spec.outputs = {{deposit.address, deposit.type, denom},
                        {p[5], type, denom},
                        {p[6], type, change}};
        auto outs = b.add(spec);
        sweepDeposit(b, svc, outs[0]);
        cur = outs[2];
    }

    // h5: two-input hop with a non-round fresh deposit.
    cur = payDeposit(false, cur, {spareH5}, p[8]);

    // h6: second self-change probe.
    cur = payDeposit(true, cur, {}, p[8]);

    // h7: quiet hop, both outputs reused (static deposit + pool change).
    {
        auto v = splitHop(rng, cur.value, false, w.profile.valueMin, w.profile.valueMax);
        TxSpec spec;
        spec.entity = w.profile.entityId;
        spec.chain = chain;
        spec.tuple = w.tuple();
        spec.inputs = {std::move(cur)};
        spec.outputs = {{svc.staticDeposit1, AddressType::p2pkh_compressed, v.payment},
                        {p[9], type, v.change}};
        cur = b.add(spec)[1];
    }
    if (!withBridge) {
        return cur;
    }

    // h8: bridge hop, reused static deposit plus fresh non-round change.
    auto v = splitHop(rng, cur.value, false, w.profile.valueMin, w.profile.valueMax);
    TxSpec spec;
    spec.entity = w.profile.entityId;
    spec.chain = chain;
    spec.tuple = w.tuple();
    spec.inputs = {std::move(cur)};
    auto freshChange = b.newAddress(w.profile.entityId, type);
    spec.outputs = {{svc.staticDeposit2, AddressType::p2pkh_compressed, v.payment},
                    {freshChange, type, v.change}};
    return b.add(spec)[1];
}

// Peeled continuation outside the co-spend cluster: single-input hops whose
// change keeps moving to fresh addresses.
UtxoRef emitFreshTail(LedgerBuilder &b, const PoolWallet &w, const std::string &chain,
                      UtxoRef cur, std::size_t hops)
{
    for (std::size_t i = 0; i < hops; ++i) {
        auto pay = b.newAddress("counterparty", AddressType::p2pkh_uncompressed);
        auto change = b.newAddress(w.profile.entityId, w.type());
        auto hop = peelHop(b, w, chain, std::move(cur), {}, pay,
                           AddressType::p2pkh_uncompressed, true, change, false);
        cur = hop.change;
    }
    return cur;
}

void emitMergedPair(LedgerBuilder &b, const std::string &tag, std::size_t tailHops)
{
    auto svc = makeService(b, tag + "-svc");

    auto wa = makeWallet(b, poolProfile(tag + "-A", makeTuple(false, true, 2, true),
                                        AddressType::wpkh_compressed, ChangeStrategy::last),
                         10);
    auto wb = makeWallet(b, poolProfile(tag + "-B", makeTuple(true, false, 2, true),
                                        AddressType::p2pkh_compressed, ChangeStrategy::last),
                         10);

    // Base funding plus three 1-BTC spares: splice input and the two
    // two-input hops of the head.
    auto baseA = fundWallet(b, wa, kBlockReward, {0, 4, 7});
    auto baseB = fundWallet(b, wb, kBlockReward, {0, 4, 7});
    auto spliceA = baseA[10];
    auto h4A = baseA[11];
    auto h5A = baseA[12];
    auto spliceB = baseB[10];
    auto h4B = baseB[11];
    auto h5B = baseB[12];
    baseA.resize(10);
    baseB.resize(10);

    auto chainA = tag + "-A-chain";
    auto chainB = tag + "-B-chain";
    auto consA = consolidate(b, wa, std::move(baseA), chainA);
    auto consB = consolidate(b, wb, std::move(baseB), chainB);
    b.truth().landmarks[tag + "-anchor"] = consA.txid;

    auto bridgeA = emitGauntletHead(b, wa, svc, chainA, consA, h4A, h5A, true);
    emitGauntletHead(b, wb, svc, chainB, consB, h4B, h5B, false);

    // The splice: both wallets contribute one pool UTXO, the mixed
    // denomination appears twice, and each wallet takes change back into its
    // pool. This single transaction merges the two co-spend clusters.
    {
        TxSpec cj;
        cj.entity = tag + "-A";
        cj.coinjoin = true;
        cj.tuple = makeTuple(true, false, 1, true);
        auto denom = 30 * kCoin / 100;
        auto fee = b.rng().range(150, 999);
        auto changeA = 75 * kCoin / 100 + b.rng().range(1, 9999);
        auto changeB = spliceA.value + spliceB.value - 2 * denom - changeA - fee;
        cj.inputs = {spliceA, spliceB};
        cj.outputs = {{b.newAddress("cj-peer", AddressType::wpkh_uncompressed),
                       AddressType::wpkh_uncompressed, denom},
                      {b.newAddress("cj-peer", AddressType::wpkh_uncompressed),
                       AddressType::wpkh_uncompressed, denom},
                      {wa.addresses[3], wa.type(), changeA},
                      {wb.addresses[3], wb.type(), changeB}};
        b.add(cj);
    }

    emitFreshTail(b, wa, chainA, bridgeA, tailHops);
}

GeneratorOutput buildCoinjoinMerge(const ScenarioSpec &spec, std::uint64_t seed)
{
    LedgerBuilder b(seed);
    auto pairs = static_cast<std::size_t>(spec.param("pairs", 2));
    auto tail = static_cast<std::size_t>(spec.param("tail_hops", 6));
    if (pairs < 1) {
        throw std::invalid_argument("coinjoin-merge needs pairs >= 1");
    }
    for (std::size_t i = 0; i < pairs; ++i) {
        emitMergedPair(b, "pair-" + std::to_string(i), tail);
    }
    return {b.ledgerText(), b.truth()};
}

// ---- adversarial-fresh-outputs ----------------------------------------

void emitAdversarialDuo(LedgerBuilder &b, const std::string &tag, std::size_t rounds,
                        std::size_t poolSize)
{
    auto tuple = makeTuple(false, true, 2, true);
    auto type = AddressType::wpkh_compressed;
    auto wa = makeWallet(b, poolProfile(tag + "-A", tuple, type, ChangeStrategy::either),
                         poolSize);
    auto wb = makeWallet(b, poolProfile(tag + "-B", tuple, type, ChangeStrategy::either),
                         poolSize);

    // Every hop needs one pool UTXO beyond the bootstrap set.
    std::vector<std::size_t> extras;
    for (std::size_t i = 2; i <= rounds; ++i) {
        extras.push_back(i % poolSize);
    }
    auto baseA = fundWallet(b, wa, kBlockReward, extras, kCoin);
    auto baseB = fundWallet(b, wb, kBlockReward, extras, kCoin);
    std::vector<UtxoRef> sparesA(baseA.begin() + static_cast<std::ptrdiff_t>(poolSize), baseA.end());
    std::vector<UtxoRef> sparesB(baseB.begin() + static_cast<std::ptrdiff_t>(poolSize), baseB.end());
    baseA.resize(poolSize);
    baseB.resize(poolSize);

    auto chainA = tag + "-A-chain";
    auto chainB = tag + "-B-chain";

    // Both outputs of every hop are fresh; membership in the co-spend
    // cluster comes from the extra pool input, and the counterparty's
    // payment is consumed by the next own hop so that both outputs are
    // always spent into same-featured transactions.
    auto emitHop = [&](const PoolWallet &self, const PoolWallet &peer, const std::string &chain,
                       std::vector<UtxoRef> inputs, bool changeLast) {
        std::int64_t balance = 0;
        for (const auto &u : inputs) {
            balance += u.value;
        }
        auto v = splitHop(b.rng(), balance, false, self.profile.valueMin, self.profile.valueMax);
        TxSpec spec;
        spec.entity = self.profile.entityId;
        spec.chain = chain;
        spec.tuple = tuple;
        spec.inputs = std::move(inputs);
        OutSpec pay{b.newAddress(peer.profile.entityId, type), type, v.payment};
        OutSpec change{b.newAddress(self.profile.entityId, type), type, v.change};
        if (changeLast) {
            spec.outputs = {pay, change};
        } else {
            spec.outputs = {change, pay};
        }
        auto outs = b.add(spec);
        return HopOutputs{outs[changeLast ? 1 : 0], outs[changeLast ? 0 : 1]};
    };

    HopOutputs a = emitHop(wa, wb, chainA, std::move(baseA), true);
    b.truth().landmarks[tag + "-anchor-A"] = a.change.txid;
    auto firstB = std::move(baseB);
    firstB.push_back(a.payment);
    HopOutputs bb = emitHop(wb, wa, chainB, std::move(firstB), true);
    b.truth().landmarks[tag + "-anchor-B"] = bb.change.txid;

    for (std::size_t i = 2; i <= rounds; ++i) {
        bool changeLast = i % 2 == 1;
        std::vector<UtxoRef> insA = {a.change, sparesA[i - 2], bb.payment};
        a = emitHop(wa, wb, chainA, std::move(insA), changeLast);
        std::vector<UtxoRef> insB = {bb.change, sparesB[i - 2]};
        if (i < rounds) {
            insB.push_back(a.payment);
        }
        bb = emitHop(wb, wa, chainB, std::move(insB), changeLast);
    }
}

GeneratorOutput buildAdversarial(const ScenarioSpec &spec, std::uint64_t seed)
{
    LedgerBuilder b(seed);
    auto rounds = static_cast<std::size_t>(spec.param("rounds", 8));
    auto pool = static_cast<std::size_t>(spec.param("pool_size", 6));
    if (rounds < 3 || pool < 2) {
        throw std::invalid_argument("adversarial-fresh-outputs needs rounds >= 3, pool_size >= 2");
    }
    emitAdversarialDuo(b, "adv-0", rounds, pool);
    return {b.ledgerText(), b.truth()};
}

// ---- service-sink ------------------------------------------------------

GeneratorOutput buildServiceSink(const ScenarioSpec &spec, std::uint64_t seed)
{
    LedgerBuilder b(seed);
    auto headHops = static_cast<std::size_t>(spec.param("head_hops", 6));
    auto tailHops = static_cast<std::size_t>(spec.param("tail_hops", 2));
    if (headHops < 2 || tailHops < 1) {
        throw std::invalid_argument("service-sink needs head_hops >= 2 and tail_hops >= 1");
    }

    auto tuple = makeTuple(false, true, 2, true);
    auto type = AddressType::wpkh_compressed;
    auto w = makeWallet(b, poolProfile("sink-user", tuple, type, ChangeStrategy::last), 6);

    const std::string svcEntity = "sink-svc";
    b.truth().taggedEntities.push_back(svcEntity);
    auto hot = b.newAddress(svcEntity, AddressType::multisig_3_4);

    // Other customers' deposits, funded by independent payers. Address e4
    // receives twice so the service cluster outgrows any single sweep.
    std::vector<std::string> deposits;
    for (int i = 0; i < 6; ++i) {
        deposits.push_back(b.newAddress(svcEntity, AddressType::p2pkh_compressed));
    }
    std::vector<UtxoRef> depositUtxos;
    {
        PoolWallet payers = makeWallet(b, poolProfile("payer", makeTuple(false, false, 1, true),
                                                      AddressType::p2pkh_compressed,
                                                      ChangeStrategy::none),
                                       7);
        auto funds = fundWallet(b, payers, 2 * kCoin);
        std::size_t targets[7] = {0, 1, 2, 3, 3, 4, 5};
        for (std::size_t i = 0; i < 7; ++i) {
            TxSpec pay;
            pay.entity = payers.profile.entityId;
            pay.tuple = payers.tuple();
            auto fee = b.rng().range(150, 999);
            auto value = funds[i].value - fee;
            pay.inputs = {funds[i]};
            pay.outputs = {{deposits[targets[i]], AddressType::p2pkh_compressed, value}};
            depositUtxos.push_back(b.add(pay).front());
        }
    }

    auto base = fundWallet(b, w);
    const std::string chain = "sink-user-chain";
    auto cur = consolidate(b, w, std::move(base), chain);
    b.truth().landmarks["sink-anchor"] = cur.txid;

    for (std::size_t i = 1; i < headHops; ++i) {
        auto pay = b.newAddress("counterparty", AddressType::p2pkh_uncompressed);
        auto hop = peelHop(b, w, chain, std::move(cur), {}, pay, AddressType::p2pkh_uncompressed,
                           true, w.addresses[i % w.addresses.size()], false);
        cur = hop.change;
    }
    // Bridge hop: fresh change leaves the co-spend cluster.
    {
        auto pay = b.newAddress("counterparty", AddressType::p2pkh_uncompressed);
        auto hop = peelHop(b, w, chain, std::move(cur), {}, pay, AddressType::p2pkh_uncompressed,
                           true, b.newAddress(w.profile.entityId, type), false);
        cur = hop.change;
    }
    for (std::size_t i = 1; i < tailHops; ++i) {
        auto pay = b.newAddress("counterparty", AddressType::p2pkh_uncompressed);
        auto hop = peelHop(b, w, chain, std::move(cur), {}, pay, AddressType::p2pkh_uncompressed,
                           true, b.newAddress(w.profile.entityId, type), false);
        cur = hop.change;
    }
    // Final tail hop deposits the remaining balance with the service; the
    // deposit address matches the wallet's own script type.
    UtxoRef sinkDeposit;
    {
        auto pay = b.newAddress("counterparty", AddressType::p2pkh_uncompressed);
        auto hop = peelHop(b, w, chain, std::move(cur), {}, pay, AddressType::p2pkh_uncompressed,
                           true, b.newAddress(svcEntity, type), false);
        sinkDeposit = hop.change;
        b.truth().landmarks["sink-deposit"] = sinkDeposit.txid;
    }

    // The service sweep co-spends the user's deposit with other customers'.
    // Its features match the user's wallet, so the position heuristic will
    // follow it; the cluster-entirety check will not.
    {
        TxSpec sweep;
        sweep.entity = svcEntity;
        sweep.tuple = tuple;
        std::int64_t sum = sinkDeposit.value;
        sweep.inputs = {sinkDeposit};
        for (std::size_t i = 0; i < 4; ++i) { // e1..e3 plus first e4 UTXO
            sum += depositUtxos[i].value;
            sweep.inputs.push_back(depositUtxos[i]);
        }
        auto fee = b.rng().range(150, 999);
        sweep.outputs = {{hot, AddressType::multisig_3_4, sum - fee}};
        auto txid = b.add(sweep).front().txid;
        b.truth().landmarks["sink-sweep"] = txid;
    }
    {
        TxSpec sweep;
        sweep.entity = svcEntity;
        sweep.tuple = tuple;
        std::int64_t sum = 0;
        for (std::size_t i = 4; i < 7; ++i) { // second e4 UTXO, e5, e6
            sum += depositUtxos[i].value;
            sweep.inputs.push_back(depositUtxos[i]);
        }
        auto fee = b.rng().range(150, 999);
        sweep.outputs = {{hot, AddressType::multisig_3_4, sum - fee}};
        b.add(sweep);
    }
    return {b.ledgerText(), b.truth()};
}

// ---- fig3-replica ------------------------------------------------------

GeneratorOutput buildCaseStudy(const ScenarioSpec &spec, std::uint64_t seed)
{
    (void)spec;
    LedgerBuilder b(seed);
    // One era-uniform profile for everyone: same tuple, same address type.
    auto tuple = makeTuple(false, false, 2, false);
    auto type = AddressType::p2pkh_uncompressed;

    const std::string exch = "fig3-exchange";
    const std::string user = "fig3-user";
    const std::string mixer = "fig3-mixer";
    b.truth().taggedEntities.push_back(exch);
    b.truth().taggedEntities.push_back(mixer);

    auto mixerDepositAddr = b.newAddress(mixer, type);
    {
        TxSpec cb;
        cb.entity = mixer;
        cb.tuple = kCoinbaseTuple;
        cb.outputs = {{mixerDepositAddr, type, kCoin}};
        b.add(cb);
    }

    auto w = makeWallet(b, poolProfile(exch, tuple, type, ChangeStrategy::none), 4);
    auto base = fundWallet(b, w);
    const std::string exchChain = exch + "-chain";
    auto cur = consolidate(b, w, std::move(base), exchChain);

    auto hop = [&](UtxoRef from, std::vector<OutSpec> outs, const std::string &entity,
                   const std::string &chain) {
        TxSpec spec2;
        spec2.entity = entity;
        spec2.chain = chain;
        spec2.tuple = tuple;
        spec2.inputs = {std::move(from)};
        spec2.outputs = std::move(outs);
        return b.add(spec2);
    };

    // Exchange internals; the interior change in e2 pins the cluster's
    // change strategy to "none".
    auto v1 = splitHop(b.rng(), cur.value, false);
    auto e1 = hop(cur, {{b.newAddress("counterparty", type), type, v1.payment},
                        {w.addresses[1], type, v1.change}},
                  exch, exchChain);
    auto v2 = splitHop(b.rng(), e1[1].value, false);
    auto e2 = hop(e1[1], {{b.newAddress("counterparty", type), type, v2.payment / 2},
                          {w.addresses[2], type, v2.change},
                          {b.newAddress("counterparty", type), type, v2.payment - v2.payment / 2}},
                  exch, exchChain);

    // tx1: the withdrawal. Most of the balance leaves with the customer;
    // the exchange's own change stays unspent, so the customer's output is
    // the only viable candidate.
    auto feeT1 = b.rng().range(150, 999);
    auto keep = 5000000 + b.rng().range(1, 9999);
    auto tx1 = hop(e2[1], {{b.newAddress(user, type), type, e2[1].value - keep - feeT1},
                           {w.addresses[3], type, keep}},
                   exch, exchChain);
    b.truth().landmarks["exchange_withdrawal"] = tx1[0].txid;

    // tx2: both outputs fresh, same type, each spent by a same-featured
    // transaction. No heuristic can isolate the change here.
    const std::string userChain = user + "-chain";
    auto half = tx1[0].value / 2;
    auto feeT2 = b.rng().range(150, 999);
    auto tx2 = hop(tx1[0], {{b.newAddress(user, type), type, half},
                            {b.newAddress(user, type), type, tx1[0].value - half - feeT2}},
                   user, userChain);
    b.truth().landmarks["ambiguous_hop"] = tx2[0].txid;

    // Bystander consumes the decoy side with the same features.
    hop(tx2[1], {{b.newAddress("fig3-bystander", type), type, tx2[1].value - 500}},
        "fig3-bystander", "");

    // Five quiet intermediate hops on the true side.
    auto userCur = tx2[0];
    for (int i = 0; i < 5; ++i) {
        auto v = splitHop(b.rng(), userCur.value, false, 50000, 200000);
        auto outs = hop(userCur, {{b.newAddress("counterparty", type), type, v.payment},
                                  {b.newAddress(user, type), type, v.change}},
                        user, userChain);
        userCur = outs[1];
    }

    // tx3: the deposit into the mixer's long-lived address.
    auto feeT3 = b.rng().range(150, 999);
    auto depositValue = userCur.value - 120000 - feeT3;
    auto tx3 = hop(userCur, {{mixerDepositAddr, type, depositValue},
                             {b.newAddress(user, type), type, 120000}},
                   user, userChain);
    b.truth().landmarks["mixer_deposit"] = tx3[0].txid;
    return {b.ledgerText(), b.truth()};
}

// ---- balanced-60-60 ----------------------------------------------------

// Stage-interleaved emission: every cluster contributes its stage-s
// transactions before any cluster starts stage s+1, so the single-entity and
// merged populations overlap in ledger time.
GeneratorOutput buildBalanced(const ScenarioSpec &spec, std::uint64_t seed)
{
    LedgerBuilder b(seed);
    auto tpCount = static_cast<std::size_t>(spec.param("tp_clusters", 60));
    auto fpCount = static_cast<std::size_t>(spec.param("fp_clusters", 60));
    auto tpHops = static_cast<std::size_t>(spec.param("tp_chain_length", 14));
    auto fpHops = static_cast<std::size_t>(spec.param("fp_hops", 4));
    auto tpPool = static_cast<std::size_t>(spec.param("tp_pool", 15));
    auto fpPool = static_cast<std::size_t>(spec.param("fp_pool", 6));
    if (tpHops < 1 || fpHops < 1 || tpPool < 1 || fpPool < 1) {
        throw std::invalid_argument("balanced-60-60 sizes must be positive");
    }

    const FeatureTuple tupleChoices[] = {
        makeTuple(false, true, 2, true), makeTuple(true, false, 2, true),
        makeTuple(false, false, 2, true), makeTuple(true, true, 1, true),
        makeTuple(false, true, 1, false)};
    const AddressType typeChoices[] = {
        AddressType::wpkh_compressed, AddressType::p2pkh_compressed,
        AddressType::wpkh_uncompressed, AddressType::wsh_multisig_2_2,
        AddressType::multisig_2_3};

    struct TpState {
        PoolWallet wallet;
        UtxoRef cur;
    };
    struct FpState {
        std::vector<PoolWallet> wallets; // three participants
        std::vector<UtxoRef> cur;
        std::vector<UtxoRef> spares; // P1 x1, P2 x2, P3 x1
    };

    std::vector<TpState> tp;
    std::vector<FpState> fp;
    std::vector<std::vector<UtxoRef>> tpBase(tpCount);
    std::vector<std::vector<std::vector<UtxoRef>>> fpBase(fpCount);

    // Stage 0: funding coinbases, interleaved.
    for (std::size_t i = 0; i < std::max(tpCount, fpCount); ++i) {
        if (i < tpCount) {
            auto id = "tp-" + std::to_string(i);
            auto wallet = makeWallet(b, poolProfile(id, tupleChoices[i % 5], typeChoices[i % 5],
                                                    ChangeStrategy::last),
                                     tpPool);
            tpBase[i] = fundWallet(b, wallet);
            tp.push_back({std::move(wallet), {}});
        }
        if (i < fpCount) {
            FpState state;
            fpBase[i].resize(3);
            for (std::size_t k = 0; k < 3; ++k) {
                auto id = "fp-" + std::to_string(i) + "-p" + std::to_string(k);
                auto strategy = k == 0 ? ChangeStrategy::last
                                       : (k == 1 ? ChangeStrategy::first : ChangeStrategy::none);
                auto wallet = makeWallet(
                    b, poolProfile(id, tupleChoices[(i + k + 1) % 5], typeChoices[(i + k + 2) % 5],
                                   strategy),
                    fpPool);
                std::vector<std::size_t> extras = k == 1 ? std::vector<std::size_t>{0, 0}
                                                         : std::vector<std::size_t>{0};
                fpBase[i][k] = fundWallet(b, wallet, kBlockReward, extras);
                state.wallets.push_back(std::move(wallet));
            }
            fp.push_back(std::move(state));
        }
    }

    // Stage 1: consolidations.
    for (std::size_t i = 0; i < std::max(tpCount, fpCount); ++i) {
        if (i < tpCount) {
            auto chain = "tp-" + std::to_string(i) + "-chain";
            tp[i].cur = consolidate(b, tp[i].wallet, std::move(tpBase[i]), chain);
            b.truth().landmarks["tp-" + std::to_string(i) + "-anchor"] = tp[i].cur.txid;
        }
        if (i < fpCount) {
            auto &state = fp[i];
            for (std::size_t k = 0; k < 3; ++k) {
                auto &base = fpBase[i][k];
                for (std::size_t e = fpPool; e < base.size(); ++e) {
                    state.spares.push_back(base[e]);
                }
                base.resize(fpPool);
                auto chain = "fp-" + std::to_string(i) + "-p" + std::to_string(k) + "-chain";
                state.cur.push_back(consolidate(b, state.wallets[k], std::move(base), chain));
            }
            b.truth().landmarks["fp-" + std::to_string(i) + "-anchor"] = state.cur[0].txid;
        }
    }

    // Hop stages; the splices land between hop stages 2 and 3.
    auto emitFpSplice = [&](FpState &state, std::size_t i, std::size_t which) {
        TxSpec cj;
        cj.entity = "fp-" + std::to_string(i) + "-p" + std::to_string(which);
        cj.coinjoin = true;
        cj.tuple = makeTuple(true, false, 1, false);
        auto left = which == 0 ? state.spares[0] : state.spares[2];
        auto right = which == 0 ? state.spares[1] : state.spares[3];
        auto denom = 30 * kCoin / 100;
        auto fee = b.rng().range(150, 999);
        auto changeL = 72 * kCoin / 100 + b.rng().range(1, 9999);
        auto changeR = left.value + right.value - 2 * denom - changeL - fee;
        auto &wl = state.wallets[which];
        auto &wr = state.wallets[which + 1];
        cj.inputs = {left, right};
        cj.outputs = {{b.newAddress("cj-peer", AddressType::p2pkh_uncompressed),
                       AddressType::p2pkh_uncompressed, denom},
                      {b.newAddress("cj-peer", AddressType::p2pkh_uncompressed),
                       AddressType::p2pkh_uncompressed, denom},
                      {wl.addresses[1], wl.type(), changeL},
                      {wr.addresses[1], wr.type(), changeR}};
        b.add(cj);
    };

    auto maxStage = std::max(tpHops, fpHops);
    for (std::size_t s = 1; s <= maxStage; ++s) {
        for (std::size_t i = 0; i < std::max(tpCount, fpCount); ++i) {
            if (i < tpCount && s <= tpHops) {
                auto &st = tp[i];
                auto chain = "tp-" + std::to_string(i) + "-chain";
                auto pay = b.newAddress("counterparty", AddressType::p2pkh_uncompressed);
                auto hop = peelHop(b, st.wallet, chain, std::move(st.cur), {}, pay,
                                   AddressType::p2pkh_uncompressed, true,
                                   st.wallet.addresses[s % st.wallet.addresses.size()],
                                   b.rng().chance(0.25));
                st.cur = hop.change;
            }
            if (i < fpCount && s <= fpHops) {
                auto &state = fp[i];
                for (std::size_t k = 0; k < 3; ++k) {
                    auto &wallet = state.wallets[k];
                    auto chain =
                        "fp-" + std::to_string(i) + "-p" + std::to_string(k) + "-chain";
                    auto changeAddr = wallet.addresses[s % wallet.addresses.size()];
                    auto strategy = wallet.profile.strategy;
                    TxSpec hop;
                    hop.entity = wallet.profile.entityId;
                    hop.chain = chain;
                    hop.tuple = wallet.tuple();
                    auto balance = state.cur[k].value;
                    hop.inputs = {std::move(state.cur[k])};
                    auto v = splitHop(b.rng(), balance, false);
                    OutSpec pay{b.newAddress("counterparty", AddressType::p2pkh_uncompressed),
                                AddressType::p2pkh_uncompressed, v.payment};
                    OutSpec change{changeAddr, wallet.type(), v.change};
                    std::size_t changeAt = 0;
                    if (strategy == ChangeStrategy::last) {
                        hop.outputs = {pay, change};
                        changeAt = 1;
                    } else if (strategy == ChangeStrategy::first) {
                        hop.outputs = {change, pay};
                    } else {
                        // Interior change: split the payment around it.
                        OutSpec payA{pay.address, pay.type, v.payment / 2};
                        OutSpec payB{b.newAddress("counterparty", AddressType::p2pkh_uncompressed),
                                     AddressType::p2pkh_uncompressed, v.payment - v.payment / 2};
                        hop.outputs = {payA, change, payB};
                        changeAt = 1;
                    }
                    state.cur[k] = b.add(hop)[changeAt];
                }
                if (s == 2) {
                    emitFpSplice(state, i, 0);
                }
                if (s == 3) {
                    emitFpSplice(state, i, 1);
                }
            }
        }
    }
    return {b.ledgerText(), b.truth()};
}

// ---- random-mesh -------------------------------------------------------

GeneratorOutput buildRandomMesh(const ScenarioSpec &spec, std::uint64_t seed)
{
    LedgerBuilder b(seed);
    auto txCount = static_cast<std::size_t>(spec.param("txs", 2000));
    auto coinbases = static_cast<std::size_t>(spec.param("coinbases", 50));
    auto maxIn = static_cast<std::size_t>(spec.param("max_inputs", 3));
    auto maxOut = static_cast<std::size_t>(spec.param("max_outputs", 4));
    if (txCount < 1 || coinbases < 1 || maxIn < 1 || maxOut < 1) {
        throw std::invalid_argument("random-mesh sizes must be positive");
    }
    double reuse = static_cast<double>(spec.param("reuse_pct", 40)) / 100.0;
    auto &rng = b.rng();

    std::vector<UtxoRef> live;
    std::vector<std::pair<std::string, AddressType>> knownAddresses;

    auto someAddress = [&]() -> std::pair<std::string, AddressType> {
        if (!knownAddresses.empty() && rng.chance(reuse)) {
            return knownAddresses[rng.below(knownAddresses.size())];
        }
        auto type = static_cast<AddressType>(rng.below(kAddressTypeCount));
        auto name = b.newAddress("mesh", type);
        knownAddresses.emplace_back(name, type);
        return knownAddresses.back();
    };

    auto emitCoinbase = [&]() {
        TxSpec cb;
        cb.entity = "mesh";
        cb.tuple = kCoinbaseTuple;
        auto outs = 1 + rng.below(3);
        for (std::uint64_t i = 0; i < outs; ++i) {
            auto [name, type] = someAddress();
            cb.outputs.push_back({name, type, kBlockReward / static_cast<std::int64_t>(outs)});
        }
        for (auto &u : b.add(cb)) {
            live.push_back(std::move(u));
        }
    };

    for (std::size_t i = 0; i < coinbases; ++i) {
        emitCoinbase();
    }

    for (std::size_t t = 0; t < txCount; ++t) {
        if (live.size() < 2) {
            emitCoinbase();
        }
        auto take = 1 + rng.below(std::min<std::uint64_t>(maxIn, live.size()));
        TxSpec spec2;
        spec2.entity = "mesh";
        auto code = static_cast<std::uint8_t>(rng.below(16));
        spec2.tuple = FeatureTuple::fromCode(code);
        std::int64_t sum = 0;
        for (std::uint64_t i = 0; i < take; ++i) {
            auto pick = rng.below(live.size());
            sum += live[pick].value;
            spec2.inputs.push_back(std::move(live[pick]));
            live[pick] = std::move(live.back());
            live.pop_back();
        }
        auto fee = rng.range(100, 999);
        auto outs = 1 + rng.below(maxOut);
        while (sum - fee < static_cast<std::int64_t>(outs)) {
            if (outs > 1) {
                --outs;
            } else {
                fee = sum - 1;
            }
        }
        auto remaining = sum - fee;
        for (std::uint64_t i = 0; i < outs; ++i) {
            auto [name, type] = someAddress();
            std::int64_t value;
            auto left = static_cast<std::int64_t>(outs - i);
            if (left == 1) {
                value = remaining;
            } else {
                value = 1 + rng.range(0, std::max<std::int64_t>(0, remaining - left) );
                value = std::min(value, remaining - (left - 1));
            }
            remaining -= value;
            spec2.outputs.push_back({name, type, value});
        }
        for (auto &u : b.add(spec2)) {
            live.push_back(std::move(u));
        }
    }
    return {b.ledgerText(), b.truth()};
}

// ---- composite ---------------------------------------------------------

GeneratorOutput buildComposite(const ScenarioSpec &spec, std::uint64_t seed)
{
    LedgerBuilder b(seed);
    auto rounds = static_cast<std::size_t>(spec.param("rounds", 8));
    auto pairs = static_cast<std::size_t>(spec.param("pairs", 2));
    auto tail = static_cast<std::size_t>(spec.param("tail_hops", 6));
    if (rounds < 3 || pairs < 1) {
        throw std::invalid_argument("composite-adversarial needs rounds >= 3 and pairs >= 1");
    }
    emitAdversarialDuo(b, "adv-0", rounds, 6);
    for (std::size_t i = 0; i < pairs; ++i) {
        emitMergedPair(b, "pair-" + std::to_string(i), tail);
    }
    return {b.ledgerText(), b.truth()};
}

} // namespace

std::vector<std::string> scenarioNames()
{
    return {"single-chain",    "k-disjoint-chains", "coinjoin-merge",
            "adversarial-fresh-outputs", "service-sink", "fig3-replica",
            "balanced-60-60",  "random-mesh",       "composite-adversarial"};
}

ScenarioSpec scenarioSpec(std::string_view name)
{
    ScenarioSpec spec;
    spec.name = std::string(name);
    if (name == "single-chain") {
        spec.params = {{"chain_length", 30}, {"pool_size", 15}, {"strategy", 1}, {"noise_pct", 0}};
    } else if (name == "k-disjoint-chains") {
        spec.params = {{"k", 3}, {"chain_length", 6}, {"pool_size", 12}};
    } else if (name == "coinjoin-merge") {
        spec.params = {{"pairs", 2}, {"tail_hops", 6}};
    } else if (name == "adversarial-fresh-outputs") {
        spec.params = {{"rounds", 8}, {"pool_size", 6}};
    } else if (name == "service-sink") {
        spec.params = {{"head_hops", 6}, {"tail_hops", 2}};
    } else if (name == "fig3-replica") {
        spec.params = {};
    } else if (name == "balanced-60-60") {
        spec.params = {{"tp_clusters", 60}, {"fp_clusters", 60}, {"tp_chain_length", 14},
                       {"fp_hops", 4},      {"tp_pool", 15},     {"fp_pool", 6}};
    } else if (name == "random-mesh") {
        spec.params = {{"txs", 2000}, {"coinbases", 50}, {"max_inputs", 3},
                       {"max_outputs", 4}, {"reuse_pct", 40}};
    } else if (name == "composite-adversarial") {
        spec.params = {{"rounds", 8}, {"pairs", 2}, {"tail_hops", 6}};
    } else {
        throw std::invalid_argument("unknown scenario: " + spec.name);
    }
    return spec;
}

GeneratorOutput generate(const ScenarioSpec &spec, std::uint64_t seed)
{
    if (spec.name == "single-chain") {
        return buildSingleChain(spec, seed);
    }
    if (spec.name == "k-disjoint-chains") {
        return buildDisjointChains(spec, seed);
    }
    if (spec.name == "coinjoin-merge") {
        return buildCoinjoinMerge(spec, seed);
    }
    if (spec.name == "adversarial-fresh-outputs") {
        return buildAdversarial(spec, seed);
    }
    if (spec.name == "service-sink") {
        return buildServiceSink(spec, seed);
    }
    if (spec.name == "fig3-replica") {
        return buildCaseStudy(spec, seed);
    }
    if (spec.name == "balanced-60-60") {
        return buildBalanced(spec, seed);
    }
    if (spec.name == "random-mesh") {
        return buildRandomMesh(spec, seed);
    }
    if (spec.name == "composite-adversarial") {
        return buildComposite(spec, seed);
    }
    throw std::invalid_argument("unknown scenario: " + spec.name);
}

} // namespace peeltrace::synth
