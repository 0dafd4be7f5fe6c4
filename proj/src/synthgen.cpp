#include <peeltrace/synthgen.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ledger_builder.hpp"

namespace peeltrace::synth {

void EntityProfile::validate() const
{
    if (entityId.empty()) {
        throw std::invalid_argument("entity profile needs an id");
    }
    if (featureTuples.empty() || addressTypes.empty()) {
        throw std::invalid_argument("entity profile needs feature tuples and address types");
    }
    for (const auto &[tuple, w] : featureTuples) {
        (void)tuple;
        if (w <= 0) {
            throw std::invalid_argument("feature tuple weights must be positive");
        }
    }
    for (const auto &[type, w] : addressTypes) {
        (void)type;
        if (w <= 0) {
            throw std::invalid_argument("address type weights must be positive");
        }
    }
    if (chainLengthMin > chainLengthMax) {
        throw std::invalid_argument("chain length range is inverted");
    }
    if (valueMin <= 0 || valueMin > valueMax) {
        throw std::invalid_argument("value range is incoherent");
    }
    if (roundAmountProb < 0 || roundAmountProb > 1 || noiseProb < 0 || noiseProb > 1) {
        throw std::invalid_argument("probabilities must lie in [0,1]");
    }
}

namespace {

template <typename T>
T sampleWeighted(Rng &rng, const std::vector<std::pair<T, double>> &items)
{
    double total = 0;
    for (const auto &[item, w] : items) {
        (void)item;
        total += w;
    }
    double pick = rng.unit() * total;
    for (const auto &[item, w] : items) {
        pick -= w;
        if (pick <= 0) {
            return item;
        }
    }
    return items.back().first;
}

} // namespace

FeatureTuple EntityProfile::sampleTuple(Rng &rng) const
{
    if (noiseProb > 0 && rng.chance(noiseProb)) {
        return FeatureTuple::fromCode(static_cast<std::uint8_t>(rng.below(16)));
    }
    return sampleWeighted(rng, featureTuples);
}

AddressType EntityProfile::sampleType(Rng &rng) const
{
    return sampleWeighted(rng, addressTypes);
}

namespace {

void appendEscaped(std::string &out, const std::string &s)
{
    out += '"';
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
        }
        out += c;
    }
    out += '"';
}

void appendStringMap(std::string &out, const char *key,
                     const std::map<std::string, std::string> &m)
{
    out += '"';
    out += key;
    out += "\":{";
    bool first = true;
    for (const auto &[k, v] : m) {
        if (!first) {
            out += ',';
        }
        first = false;
        appendEscaped(out, k);
        out += ':';
        appendEscaped(out, v);
    }
    out += '}';
}

} // namespace

std::string GroundTruth::toJson() const
{
    std::string out;
    out += '{';
    appendStringMap(out, "tx_entity", txEntity);
    out += ',';
    appendStringMap(out, "tx_chain", txChain);
    out += ",\"tx_coinjoin\":{";
    bool first = true;
    for (const auto &[k, v] : txCoinjoin) {
        if (!first) {
            out += ',';
        }
        first = false;
        appendEscaped(out, k);
        out += v ? ":true" : ":false";
    }
    out += "},";
    appendStringMap(out, "address_entity", addressEntity);
    out += ",\"chains\":{";
    first = true;
    for (const auto &[k, v] : chains) {
        if (!first) {
            out += ',';
        }
        first = false;
        appendEscaped(out, k);
        out += ":[";
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i > 0) {
                out += ',';
            }
            appendEscaped(out, v[i]);
        }
        out += ']';
    }
    out += "},";
    appendStringMap(out, "landmarks", landmarks);
    out += ",\"tagged_entities\":[";
    for (std::size_t i = 0; i < taggedEntities.size(); ++i) {
        if (i > 0) {
            out += ',';
        }
        appendEscaped(out, taggedEntities[i]);
    }
    out += "]}";
    out += '\n';
    return out;
}

GroundTruth GroundTruth::fromJson(std::string_view text)
{
    auto obj = nlohmann::json::parse(text);
    GroundTruth truth;
    for (const auto &[k, v] : obj.at("tx_entity").items()) {
        truth.txEntity[k] = v.get<std::string>();
    }
    for (const auto &[k, v] : obj.at("tx_chain").items()) {
        truth.txChain[k] = v.get<std::string>();
    }
    for (const auto &[k, v] : obj.at("tx_coinjoin").items()) {
        truth.txCoinjoin[k] = v.get<bool>();
    }
    for (const auto &[k, v] : obj.at("address_entity").items()) {
        truth.addressEntity[k] = v.get<std::string>();
    }
    for (const auto &[k, v] : obj.at("chains").items()) {
        truth.chains[k] = v.get<std::vector<std::string>>();
    }
    for (const auto &[k, v] : obj.at("landmarks").items()) {
        truth.landmarks[k] = v.get<std::string>();
    }
    truth.taggedEntities = obj.at("tagged_entities").get<std::vector<std::string>>();
    return truth;
}

GroundTruth GroundTruth::fromJsonFile(const std::string &path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open truth file: " + path);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return fromJson(buf.str());
}

std::string GroundTruth::tagsCsv() const
{
    std::string out = "address,entity\n";
    for (const auto &[addr, entity] : addressEntity) {
        if (std::find(taggedEntities.begin(), taggedEntities.end(), entity) !=
            taggedEntities.end()) {
            out += addr;
            out += ',';
            out += entity;
            out += '\n';
        }
    }
    return out;
}

std::int64_t ScenarioSpec::param(const std::string &key, std::int64_t fallback) const
{
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

std::string ScenarioSpec::toJson() const
{
    std::string out = "{\"name\":";
    appendEscaped(out, name);
    out += ",\"params\":{";
    bool first = true;
    for (const auto &[k, v] : params) {
        if (!first) {
            out += ',';
        }
        first = false;
        appendEscaped(out, k);
        out += ':';
        out += std::to_string(v);
    }
    out += "}}";
    return out;
}

ScenarioSpec ScenarioSpec::fromJson(std::string_view text)
{
    auto obj = nlohmann::json::parse(text);
    ScenarioSpec spec;
    spec.name = obj.at("name").get<std::string>();
    if (obj.contains("params")) {
        for (const auto &[k, v] : obj.at("params").items()) {
            if (!v.is_number_integer() && !v.is_number_unsigned()) {
                throw std::invalid_argument("scenario parameter '" + k + "' must be an integer");
            }
            spec.params[k] = v.get<std::int64_t>();
        }
    }
    return spec;
}

std::string LedgerBuilder::nextTxid()
{
    char buf[65];
    for (int part = 0; part < 4; ++part) {
        auto word = Rng::mix(idBase_ + txCounter_ * 4 + static_cast<std::uint64_t>(part));
        std::snprintf(buf + part * 16, 17, "%016llx", static_cast<unsigned long long>(word));
    }
    ++txCounter_;
    return std::string(buf, 64);
}

std::string LedgerBuilder::newAddress(const std::string &entity, AddressType type)
{
    (void)type;
    char buf[20];
    std::snprintf(buf, sizeof(buf), "a%016llx",
                  static_cast<unsigned long long>(Rng::mix(idBase_ ^ (0xa5a5a5a500000000ull + addrCounter_))));
    ++addrCounter_;
    std::string name(buf);
    labelAddress(name, entity);
    return name;
}

void LedgerBuilder::labelAddress(const std::string &address, const std::string &entity)
{
    auto [it, inserted] = truth_.addressEntity.emplace(address, entity);
    if (!inserted && it->second != entity) {
        throw std::logic_error("address " + address + " relabeled from " + it->second + " to " +
                               entity);
    }
}

std::vector<UtxoRef> LedgerBuilder::add(const TxSpec &spec)
{
    if (spec.outputs.empty()) {
        throw std::logic_error("generated transaction needs outputs");
    }
    TxRecord rec;
    rec.txid = nextTxid();
    rec.version = spec.tuple.version;
    rec.locktime = spec.tuple.locktimeSet ? height_ : 0;
    rec.segwit = spec.tuple.segwit;
    rec.coinbase = spec.inputs.empty();
    rec.height = height_;
    rec.index = indexInBlock_;
    if (++indexInBlock_ == txsPerBlock_) {
        indexInBlock_ = 0;
        ++height_;
    }

    std::int64_t inSum = 0;
    for (std::size_t i = 0; i < spec.inputs.size(); ++i) {
        InputRecord in;
        in.prevTxid = spec.inputs[i].txid;
        in.prevIndex = spec.inputs[i].index;
        in.sequence = (spec.tuple.replaceable && i == 0) ? 0xfffffffdu : 0xffffffffu;
        inSum += spec.inputs[i].value;
        rec.inputs.push_back(std::move(in));
    }
    if (rec.coinbase && spec.tuple.replaceable) {
        throw std::logic_error("coinbase transactions cannot carry a replaceable tuple");
    }

    std::int64_t outSum = 0;
    std::vector<UtxoRef> produced;
    for (std::size_t i = 0; i < spec.outputs.size(); ++i) {
        const auto &o = spec.outputs[i];
        if (o.value <= 0) {
            throw std::logic_error("generated output value must be positive");
        }
        rec.outputs.push_back({o.address, o.type, o.value});
        produced.push_back({rec.txid, static_cast<std::uint32_t>(i), o.address, o.type, o.value});
        outSum += o.value;
    }
    if (!rec.coinbase && outSum > inSum) {
        throw std::logic_error("generated transaction overspends its inputs");
    }

    truth_.txEntity[rec.txid] = spec.entity;
    truth_.txChain[rec.txid] = spec.chain;
    truth_.txCoinjoin[rec.txid] = spec.coinjoin;
    if (!spec.chain.empty()) {
        truth_.chains[spec.chain].push_back(rec.txid);
    }
    records_.push_back(std::move(rec));
    return produced;
}

std::string LedgerBuilder::ledgerText() const
{
    std::string out;
    for (const auto &rec : records_) {
        out += serializeRecord(rec);
        out += '\n';
    }
    return out;
}

HopValues splitHop(Rng &rng, std::int64_t balance, bool roundPayment, std::int64_t paymentMin,
                   std::int64_t paymentMax)
{
    HopValues v;
    v.fee = rng.range(150, 999);
    auto maxAffordable = balance - v.fee - 1;
    auto hi = std::min(paymentMax, maxAffordable);
    auto lo = std::min(paymentMin, hi);
    if (hi < 1) {
        throw std::logic_error("balance too small to peel");
    }
    v.payment = rng.range(lo, hi);
    if (roundPayment) {
        v.payment = std::max<std::int64_t>(10000, v.payment - v.payment % 10000);
    } else if (v.payment % 10000 == 0) {
        v.payment += rng.range(1, 9999);
        v.payment = std::min(v.payment, hi);
        if (v.payment % 10000 == 0) {
            --v.payment;
        }
    }
    v.change = balance - v.payment - v.fee;
    // Keep the change off round boundaries by shaving a little more fee.
    if (v.change % 10000 == 0) {
        auto shift = rng.range(1, 999);
        v.fee += shift;
        v.change -= shift;
    }
    if (v.change <= 0 || v.payment <= 0) {
        throw std::logic_error("hop split produced a non-positive value");
    }
    return v;
}

} // namespace peeltrace::synth
