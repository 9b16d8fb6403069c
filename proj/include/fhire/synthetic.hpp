#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fhire/core_data.hpp"
#include "fhire/market.hpp"
#include "fhire/productivity.hpp"

#include <json.hpp>

namespace fhire {

struct SyntheticSpec {
    std::size_t institutions = 20;
    int first_year = kFirstCohortYear;
    int last_year = kLastCohortYear;
    double hires_per_year = 10.0;     // Poisson mean, at least one hire per year
    bool poisson_hires = true;        // false: exactly round(hires_per_year) each year
    std::size_t max_hires_per_institution = 6;  // per year
    // Doctoral production and opening weights fall off as rank^-exponent.
    double production_exponent = 1.2;
    double opening_exponent = 0.3;
    double female_start = 0.05;  // linear ramp over the years
    double female_end = 0.20;
    double postdoc_rate = 0.2;
    int topics = 10;
    double topic_concentration = 0.3;  // symmetric Dirichlet for candidate topic mixtures
    std::vector<double> topic_rates;   // Poisson mean papers per subfield; defaults spread 2..12
    double postdoc_paper_boost = 1.0;  // multiplies the rate for postdocs
    std::size_t title_words = 6;
    Weights w_true;

    // 205 institutions, 1970-2011, about 2659 hires; rank difference dominates the planted weights.
    static SyntheticSpec full_scale();
    // Throws DataError(InfeasibleSpec) on out-of-range or contradictory fields.
    void validate() const;
};

struct SyntheticTruth {
    Weights w_true;
    std::vector<double> planted_rank;  // 1 = best, indexed like institutions
    std::vector<double> productivity_z;
    std::vector<int> pub_count;
    double violation_fraction = 0.0;  // edges pointing up the planted ranking
};

struct SyntheticBundle {
    std::vector<Institution> institutions;
    std::vector<FacultyRecord> faculty;  // productivity_z and pub_count filled from truth
    std::vector<Publication> publications;
    SyntheticTruth truth;

    // The market under the planted ranking, with true productivity scores.
    Market truth_market() const;
    PrestigeRanking planted_ranking() const;

    void write(const std::filesystem::path& dir) const;  // institutions, faculty, publications, truth.json
    nlohmann::json truth_json() const;
};

// Placements follow the logistic matching process with w_true under the planted ranking.
SyntheticBundle generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace fhire
