#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <peeltrace/features.hpp>
#include <peeltrace/record.hpp>

namespace peeltrace::synth {

// Deterministic 64-bit generator (splitmix). The standard distributions are
// implementation-defined, so everything derives from this to keep generated
// ledgers byte-identical across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next()
    {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix(state_);
    }

    // Stateless bijective finalizer; distinct inputs give distinct outputs.
    static std::uint64_t mix(std::uint64_t z)
    {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t below(std::uint64_t n) { return next() % n; }
    std::int64_t range(std::int64_t lo, std::int64_t hi) // inclusive
    {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    bool chance(double p) { return unit() < p; }

private:
    std::uint64_t state_;
};

// How one entity shapes its transactions.
struct EntityProfile {
    std::string entityId;
    std::vector<std::pair<FeatureTuple, double>> featureTuples; // weighted
    std::vector<std::pair<AddressType, double>> addressTypes;   // weighted
    ChangeStrategy strategy = ChangeStrategy::last;
    std::uint32_t chainLengthMin = 1;
    std::uint32_t chainLengthMax = 1;
    double roundAmountProb = 0.25;
    std::int64_t valueMin = 100000;   // satoshis
    std::int64_t valueMax = 10000000; // satoshis
    // Probability of a transaction deviating from the declared tuples.
    double noiseProb = 0;

    void validate() const; // throws std::invalid_argument
    FeatureTuple sampleTuple(Rng &rng) const;
    AddressType sampleType(Rng &rng) const;
};

// Labels for everything a scenario emits.
struct GroundTruth {
    std::map<std::string, std::string> txEntity;
    std::map<std::string, std::string> txChain;
    std::map<std::string, bool> txCoinjoin;
    std::map<std::string, std::string> addressEntity;
    // chain id → member txids in hop order.
    std::map<std::string, std::vector<std::string>> chains;
    // Scenario-specific points of interest (anchors, case-study txids).
    std::map<std::string, std::string> landmarks;
    // Entities whose addresses belong in the exported tag oracle.
    std::vector<std::string> taggedEntities;

    std::string toJson() const;
    static GroundTruth fromJson(std::string_view text);
    static GroundTruth fromJsonFile(const std::string &path);

    // `address,entity` rows for every address of a tagged entity.
    std::string tagsCsv() const;
};

struct ScenarioSpec {
    std::string name;
    std::map<std::string, std::int64_t> params;

    std::int64_t param(const std::string &key, std::int64_t fallback) const;

    std::string toJson() const;
    static ScenarioSpec fromJson(std::string_view text);
};

struct GeneratorOutput {
    std::string ledger; // JSONL
    GroundTruth truth;
};

std::vector<std::string> scenarioNames();

// Default parameters for a library scenario; throws on unknown names.
ScenarioSpec scenarioSpec(std::string_view name);

// Deterministic: identical (spec, seed) give byte-identical output.
GeneratorOutput generate(const ScenarioSpec &spec, std::uint64_t seed);

} // namespace peeltrace::synth
