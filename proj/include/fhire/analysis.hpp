#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fhire/market.hpp"
#include "fhire/stat_tests.hpp"

namespace fhire {

// ---------------------------------------------------------------------------
// Institution level

struct InstitutionHireDistribution {
    std::size_t institution = 0;
    // trajectories[run][y]: cumulative female hires through market year y.
    std::vector<std::vector<int>> trajectories;
    std::vector<int> actual_trajectory;
    std::vector<int> final_counts;
    int actual_final = 0;
    // Midpoint convention: share strictly below plus half the share equal.
    double percentile_of_actual = 50.0;
    // Ties broken by a seeded uniform draw instead of the midpoint; uniform on [0, 100]
    // whenever the actual history is itself a model draw.
    double randomized_percentile = 50.0;

    double expected_mean() const;
    double expected_median() const;
};

std::vector<InstitutionHireDistribution> female_hire_distributions(
    const Market& market, std::span<const SimulationRun> runs, std::uint64_t tie_seed = 0);

// Midpoint percentile of `value` within `sample`, in [0, 100].
double midpoint_percentile(std::span<const int> sample, int value);

struct RankBandRow {
    std::size_t institution = 0;
    double rank = 0.0;
    int actual = 0;
    double expected_mean = 0.0;
    double expected_median = 0.0;
    double actual_minus_expected = 0.0;
    double band_low = 0.0;   // 25th percentile of simulated - expected
    double band_high = 0.0;  // 75th percentile of simulated - expected

    bool inside_band() const {
        return actual_minus_expected >= band_low && actual_minus_expected <= band_high;
    }
};

// The top_n institutions by rank, best first.
std::vector<RankBandRow> rank_band_summary(const std::vector<InstitutionHireDistribution>& distributions,
                                           const PrestigeRanking& ranking, std::size_t top_n);

// Linear-interpolation quantile of a sorted sample, q in [0, 1].
double quantile_sorted(std::span<const double> sorted, double q);

// ---------------------------------------------------------------------------
// Candidate level

struct CandidateOutcome {
    std::size_t candidate = 0;
    std::vector<double> simulated_ranks;  // normalized, one per run
    double observed_rank = 0.0;
    // observed - mean(simulated); negative means placed better than the model expected.
    double delta = 0.0;
};

std::vector<CandidateOutcome> candidate_placement_errors(const Market& market,
                                                         std::span<const SimulationRun> runs);

struct YearErrorPoint {
    int year = 0;
    Gender gender = Gender::Male;
    std::size_t n = 0;
    double mean_delta = 0.0;
    double half_width = 0.0;  // 1.96 * sd / sqrt(n)
};

// Female and male series; candidates of unknown gender are left out.
std::vector<YearErrorPoint> placement_error_by_year(const std::vector<CandidateOutcome>& outcomes,
                                                    const Market& market);

// OLS slope test of the yearly mean deltas of one gender, weighted equally per year.
std::optional<TestResult> error_trend_test(const std::vector<YearErrorPoint>& points, Gender gender);

struct NamedTest {
    std::string name;
    std::optional<TestResult> result;  // empty when a group is empty
};

// Over- and under-performance comparisons between genders and by postdoc status.
// Candidates with an exactly zero delta are excluded.
std::vector<NamedTest> candidate_comparisons(const std::vector<CandidateOutcome>& outcomes,
                                             const Market& market);

// ---------------------------------------------------------------------------
// Parity forecast

struct ParityForecast {
    bool defined = false;
    double slope = 0.0;
    double intercept = 0.0;  // fraction at year 0 of the calendar
    double crossing_year = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;  // +inf when the lower confidence band never reaches 0.5
    std::string note;
};

// Female share of hires per year, ascending; unknown gender excluded.
std::vector<std::pair<int, double>> yearly_female_fraction(const Market& market);

// OLS of share on year, crossing of 0.5, and the crossings of the 95% mean-response band.
// Requires at least ten points.
ParityForecast parity_forecast(std::span<const std::pair<int, double>> series);

// ---------------------------------------------------------------------------
// Descriptive comparisons

// counts[g][d]: g = 0 men, 1 women; d = 0 down, 1 up.
struct GenderDirectionTable {
    std::string name;
    std::array<std::array<long, 2>, 2> counts{};
    std::optional<TestResult> test;
};

struct DescriptiveReport {
    std::size_t faculty = 0;
    double female_share = 0.0;
    std::vector<GenderDirectionTable> tables;
    // median_z[g][c]: c = 0 down, 1 up, 2 all.
    std::array<std::array<std::optional<double>, 3>, 2> median_z{};
    std::vector<NamedTest> tests;
    std::array<double, 2> self_hire_rate{};  // men, women
    std::array<double, 2> postdoc_rate{};

    const NamedTest* find(const std::string& name) const;
    const GenderDirectionTable* find_table(const std::string& name) const;
};

// Up means the hiring institution ranks strictly better than the doctoral one; self-hires
// are excluded from direction tables. Tests with an empty group are skipped.
DescriptiveReport descriptive_report(const Market& market);

}  // namespace fhire
