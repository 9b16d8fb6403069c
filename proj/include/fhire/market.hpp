#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fhire/core_data.hpp"
#include "fhire/prestige.hpp"
#include "fhire/rng.hpp"

namespace fhire {

enum class Feature : std::size_t {
    RankDiff = 0,
    Productivity,
    HiringRank,
    Postdoc,
    SameRegion,
    Female,
};

inline constexpr std::size_t kFeatureCount = 6;
inline constexpr std::array<Feature, kFeatureCount> kAllFeatures = {
    Feature::RankDiff, Feature::Productivity, Feature::HiringRank,
    Feature::Postdoc,  Feature::SameRegion,   Feature::Female};

const char* to_string(Feature feature);
Feature parse_feature(std::string_view name);
constexpr std::size_t slot(Feature f) { return static_cast<std::size_t>(f); }

// Slots follow the Feature enumeration.
using FeatureVector = std::array<double, kFeatureCount>;

struct Weights {
    std::array<double, kFeatureCount> w{};
    std::array<bool, kFeatureCount> active{};
    // Intercept; zero unless a bias term is switched on in the configuration.
    double bias = 0.0;

    static Weights from_mask(std::span<const Feature> features);
    std::vector<Feature> active_features() const;
    double dot(const FeatureVector& x) const;
    // Throws std::invalid_argument if an inactive slot is nonzero.
    void validate() const;
};

enum class MatchVariant { Uniform, Step, Logistic };

const char* to_string(MatchVariant variant);
MatchVariant parse_variant(std::string_view name);

struct MatchModel {
    MatchVariant variant = MatchVariant::Uniform;
    Weights weights;  // used by Logistic only

    static MatchModel uniform() { return {MatchVariant::Uniform, {}}; }
    static MatchModel step() { return {MatchVariant::Step, {}}; }
    static MatchModel logistic(Weights w) { return {MatchVariant::Logistic, w}; }
};

struct Candidate {
    std::string faculty_id;
    std::size_t origin = 0;    // doctoral institution index
    std::size_t observed = 0;  // observed hiring institution index
    int year = 0;
    Gender gender = Gender::Unknown;
    bool postdoc = false;
    double productivity_z = 0.0;
};

FeatureVector build_features(const Candidate& candidate, std::size_t opening,
                             const PrestigeRanking& ranking, std::span<const Region> regions);

// Match score for a feature vector. Step reads the sign of the rank-difference slot.
double score(const MatchModel& model, const FeatureVector& x);

struct YearSlice {
    int year = 0;
    std::vector<std::size_t> candidates;  // indices into Market::candidates()
    std::vector<std::size_t> openings;    // institution indices, with multiplicity
};

// Everything the matching process reads: candidates with their attributes, the
// per-year stub sets, the ranking and regions. Immutable after construction.
class Market {
public:
    Market(std::vector<Institution> institutions, PrestigeRanking ranking,
           std::vector<Candidate> candidates);

    // Candidates from hiring-network edges; attributes looked up in `records` by id.
    static Market from_network(const HiringNetwork& network, PrestigeRanking ranking,
                               const std::vector<FacultyRecord>& records);

    const std::vector<Institution>& institutions() const { return institutions_; }
    const std::vector<Region>& regions() const { return regions_; }
    const PrestigeRanking& ranking() const { return ranking_; }
    const std::vector<Candidate>& candidates() const { return candidates_; }
    const std::vector<YearSlice>& years() const { return years_; }

    FeatureVector features(std::size_t candidate, std::size_t opening) const;
    double observed_rank(std::size_t candidate) const;

    // Same institutions, ranking and stub sets; candidate observed placements replaced.
    Market with_observed(std::span<const std::size_t> placements) const;

private:
    std::vector<Institution> institutions_;
    std::vector<Region> regions_;
    PrestigeRanking ranking_;
    std::vector<Candidate> candidates_;
    std::vector<YearSlice> years_;
};

inline constexpr std::size_t kUnplaced = std::numeric_limits<std::size_t>::max();

struct SimulationRun {
    std::uint64_t seed = 0;
    MatchVariant variant = MatchVariant::Uniform;
    std::vector<std::size_t> placements;  // institution per candidate; kUnplaced if its year was skipped
};

// Draws one of `unfilled` with probability proportional to 1 / rank (raw mean rank).
// Returns the position within `unfilled`.
std::size_t select_opening(std::span<const std::size_t> unfilled, const PrestigeRanking& ranking, Rng& rng);

// Draws a candidate for `opening` with probability proportional to its score; falls back
// to uniform when every score is zero. Returns the position within `pool`.
std::size_t select_candidate(const MatchModel& model, std::span<const std::size_t> pool,
                             std::size_t opening, const Market& market, Rng& rng);

// Fills every opening of one year. `placements` is indexed by candidate.
void simulate_year(const Market& market, std::size_t year_index, const MatchModel& model,
                   Rng& rng, std::vector<std::size_t>& placements);

// Every year (or only `year_indices`), each with its own stream derived from (seed, year).
SimulationRun simulate_history(const Market& market, const MatchModel& model, std::uint64_t seed,
                               std::span<const std::size_t> year_indices = {});

// Hiring network of a run: edges (origin, simulated placement) for placed candidates.
HiringNetwork simulated_network(const Market& market, const SimulationRun& run);

}  // namespace fhire
