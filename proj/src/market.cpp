#include "fhire/market.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "fhire/error.hpp"

namespace fhire {

const char* to_string(Feature feature) {
    switch (feature) {
        case Feature::RankDiff: return "rank_diff";
        case Feature::Productivity: return "productivity";
        case Feature::HiringRank: return "hiring_rank";
        case Feature::Postdoc: return "postdoc";
        case Feature::SameRegion: return "same_region";
        case Feature::Female: return "gender";
    }
    return "?";
}

Feature parse_feature(std::string_view name) {
    for (auto f : kAllFeatures) {
        if (name == to_string(f)) return f;
    }
    if (name == "female" || name == "gender_female") return Feature::Female;
    if (name == "productivity_z") return Feature::Productivity;
    throw std::invalid_argument("unknown feature '" + std::string(name) + "'");
}

Weights Weights::from_mask(std::span<const Feature> features) {
    Weights w;
    for (auto f : features) w.active[slot(f)] = true;
    return w;
}

std::vector<Feature> Weights::active_features() const {
    std::vector<Feature> out;
    for (auto f : kAllFeatures) {
        if (active[slot(f)]) out.push_back(f);
    }
    return out;
}

double Weights::dot(const FeatureVector& x) const {
    double s = bias;
    for (std::size_t k = 0; k < kFeatureCount; ++k) s += w[k] * x[k];
    return s;
}

void Weights::validate() const {
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
        if (!active[k] && w[k] != 0.0) {
            throw std::invalid_argument(std::string("inactive feature ") + to_string(kAllFeatures[k]) +
                                        " has a nonzero weight");
        }
        if (!std::isfinite(w[k])) throw std::invalid_argument("non-finite weight");
    }
}

const char* to_string(MatchVariant variant) {
    switch (variant) {
        case MatchVariant::Uniform: return "uniform";
        case MatchVariant::Step: return "step";
        case MatchVariant::Logistic: return "logistic";
    }
    return "?";
}

MatchVariant parse_variant(std::string_view name) {
    if (name == "uniform") return MatchVariant::Uniform;
    if (name == "step") return MatchVariant::Step;
    if (name == "logistic") return MatchVariant::Logistic;
    throw std::invalid_argument("unknown model '" + std::string(name) + "'");
}

FeatureVector build_features(const Candidate& candidate, std::size_t opening, const PrestigeRanking& ranking,
                             std::span<const Region> regions) {
    if (candidate.origin >= ranking.size() || opening >= ranking.size() || candidate.origin >= regions.size() ||
        opening >= regions.size()) {
        throw DataError(DataErrorKind::UnknownInstitution, "institution outside the ranking");
    }
    FeatureVector x{};
    x[slot(Feature::RankDiff)] = rank_difference(ranking, candidate.origin, opening);
    x[slot(Feature::Productivity)] = candidate.productivity_z;
    x[slot(Feature::HiringRank)] = ranking.normalized(opening);
    x[slot(Feature::Postdoc)] = candidate.postdoc ? 1.0 : 0.0;
    x[slot(Feature::SameRegion)] = regions[candidate.origin] == regions[opening] ? 1.0 : 0.0;
    x[slot(Feature::Female)] = candidate.gender == Gender::Female ? 1.0 : 0.0;
    return x;
}

double score(const MatchModel& model, const FeatureVector& x) {
    switch (model.variant) {
        case MatchVariant::Uniform: return 1.0;
        case MatchVariant::Step: return x[slot(Feature::RankDiff)] > 0.0 ? 1.0 : 0.0;
        case MatchVariant::Logistic: return 1.0 / (1.0 + std::exp(-model.weights.dot(x)));
    }
    return 0.0;
}

namespace {

std::vector<YearSlice> slice_years(const std::vector<Candidate>& candidates) {
    std::map<int, YearSlice> by_year;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        auto& s = by_year[candidates[i].year];
        s.year = candidates[i].year;
        s.candidates.push_back(i);
        s.openings.push_back(candidates[i].observed);
    }
    std::vector<YearSlice> out;
    out.reserve(by_year.size());
    for (auto& [y, s] : by_year) out.push_back(std::move(s));
    return out;
}

}  // namespace

Market::Market(std::vector<Institution> institutions, PrestigeRanking ranking, std::vector<Candidate> candidates)
    : institutions_(std::move(institutions)), ranking_(std::move(ranking)), candidates_(std::move(candidates)) {
    if (ranking_.size() != institutions_.size()) {
        throw std::invalid_argument("ranking size differs from institution count");
    }
    regions_.reserve(institutions_.size());
    for (const auto& inst : institutions_) regions_.push_back(inst.region);
    for (const auto& c : candidates_) {
        if (c.origin >= institutions_.size() || c.observed >= institutions_.size()) {
            throw DataError(DataErrorKind::UnknownInstitution, "candidate " + c.faculty_id);
        }
    }
    for (double r : ranking_.rank) {
        if (!(r > 0.0)) throw std::invalid_argument("ranks must be positive");
    }
    years_ = slice_years(candidates_);
}

Market Market::from_network(const HiringNetwork& network, PrestigeRanking ranking,
                            const std::vector<FacultyRecord>& records) {
    std::unordered_map<std::string, const FacultyRecord*> by_id;
    for (const auto& r : records) by_id.emplace(r.id, &r);
    std::vector<Candidate> candidates;
    candidates.reserve(network.edges().size());
    for (const auto& e : network.edges()) {
        auto it = by_id.find(e.faculty_id);
        if (it == by_id.end()) throw DataError(DataErrorKind::CandidateMismatch, "no record for " + e.faculty_id);
        const auto& rec = *it->second;
        candidates.push_back({rec.id, e.source, e.target, e.year, rec.gender, rec.postdoc,
                              rec.productivity_z.value_or(0.0)});
    }
    return Market(network.nodes(), std::move(ranking), std::move(candidates));
}

FeatureVector Market::features(std::size_t candidate, std::size_t opening) const {
    return build_features(candidates_[candidate], opening, ranking_, regions_);
}

double Market::observed_rank(std::size_t candidate) const {
    return ranking_.normalized(candidates_[candidate].observed);
}

Market Market::with_observed(std::span<const std::size_t> placements) const {
    if (placements.size() != candidates_.size()) {
        throw DataError(DataErrorKind::CandidateMismatch, "placement count differs from candidate count");
    }
    auto candidates = candidates_;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (placements[i] == kUnplaced) throw DataError(DataErrorKind::CandidateMismatch, "unplaced candidate");
        candidates[i].observed = placements[i];
    }
    return Market(institutions_, ranking_, std::move(candidates));
}

std::size_t select_opening(std::span<const std::size_t> unfilled, const PrestigeRanking& ranking, Rng& rng) {
    if (unfilled.empty()) throw std::invalid_argument("no unfilled openings");
    double total = 0.0;
    for (auto v : unfilled) total += 1.0 / ranking.rank[v];
    const double u = rng.uniform01() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < unfilled.size(); ++i) {
        acc += 1.0 / ranking.rank[unfilled[i]];
        if (u < acc) return i;
    }
    return unfilled.size() - 1;
}

std::size_t select_candidate(const MatchModel& model, std::span<const std::size_t> pool, std::size_t opening,
                             const Market& market, Rng& rng) {
    if (pool.empty()) throw std::invalid_argument("empty candidate pool");
    if (model.variant == MatchVariant::Uniform) return rng.below(pool.size());

    thread_local std::vector<double> cumulative;
    cumulative.resize(pool.size());
    double total = 0.0;
    if (model.variant == MatchVariant::Step) {
        const double opening_rank = market.ranking().rank[opening];
        for (std::size_t i = 0; i < pool.size(); ++i) {
            const auto origin = market.candidates()[pool[i]].origin;
            total += market.ranking().rank[origin] < opening_rank ? 1.0 : 0.0;
            cumulative[i] = total;
        }
    } else {
        // Same arithmetic as score(model, build_features(...)), without building the vectors.
        const auto& w = model.weights.w;
        const auto& ranking = market.ranking();
        const auto& regions = market.regions();
        const double n = static_cast<double>(ranking.size());
        const double opening_rank = ranking.rank[opening];
        const double hiring_rank = ranking.normalized(opening);
        for (std::size_t i = 0; i < pool.size(); ++i) {
            const auto& cand = market.candidates()[pool[i]];
            double s = model.weights.bias;
            s += w[0] * ((opening_rank - ranking.rank[cand.origin]) / n);
            s += w[1] * cand.productivity_z;
            s += w[2] * hiring_rank;
            s += w[3] * (cand.postdoc ? 1.0 : 0.0);
            s += w[4] * (regions[cand.origin] == regions[opening] ? 1.0 : 0.0);
            s += w[5] * (cand.gender == Gender::Female ? 1.0 : 0.0);
            total += 1.0 / (1.0 + std::exp(-s));
            cumulative[i] = total;
        }
    }
    if (!(total > 0.0)) return rng.below(pool.size());

    const double u = rng.uniform01() * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), pool.size() - 1);
}

void simulate_year(const Market& market, std::size_t year_index, const MatchModel& model, Rng& rng,
                   std::vector<std::size_t>& placements) {
    const auto& slice = market.years().at(year_index);
    if (slice.candidates.size() != slice.openings.size()) {
        throw std::logic_error("year slice has unequal candidate and opening counts");
    }
    if (placements.size() != market.candidates().size()) placements.resize(market.candidates().size(), kUnplaced);

    thread_local std::vector<std::size_t> unfilled;
    thread_local std::vector<std::size_t> pool;
    unfilled.assign(slice.openings.begin(), slice.openings.end());
    pool.assign(slice.candidates.begin(), slice.candidates.end());
    while (!unfilled.empty()) {
        const auto o = select_opening(unfilled, market.ranking(), rng);
        const auto opening = unfilled[o];
        unfilled[o] = unfilled.back();
        unfilled.pop_back();

        const auto c = select_candidate(model, pool, opening, market, rng);
        placements[pool[c]] = opening;
        // pool stays in slice order
        pool.erase(pool.begin() + static_cast<long>(c));
    }
}

SimulationRun simulate_history(const Market& market, const MatchModel& model, std::uint64_t seed,
                               std::span<const std::size_t> year_indices) {
    SimulationRun run;
    run.seed = seed;
    run.variant = model.variant;
    run.placements.assign(market.candidates().size(), kUnplaced);
    auto one = [&](std::size_t y) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(market.years()[y].year)));
        simulate_year(market, y, model, rng, run.placements);
    };
    if (year_indices.empty()) {
        for (std::size_t y = 0; y < market.years().size(); ++y) one(y);
    } else {
        for (auto y : year_indices) one(y);
    }
    return run;
}

HiringNetwork simulated_network(const Market& market, const SimulationRun& run) {
    HiringNetwork shell(market.institutions(), {});
    std::vector<HireEdge> edges;
    edges.reserve(run.placements.size());
    for (std::size_t i = 0; i < run.placements.size(); ++i) {
        if (run.placements[i] == kUnplaced) continue;
        const auto& c = market.candidates()[i];
        edges.push_back({c.origin, run.placements[i], c.year, c.faculty_id});
    }
    return shell.with_edges(std::move(edges));
}

}  // namespace fhire
