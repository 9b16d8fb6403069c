#include "fhire/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "fhire/error.hpp"
#include "fhire/rng.hpp"

namespace fhire {

namespace {

// Women hired after this year form the "recent" cohort of the descriptive splits.
constexpr int kRecentCohortAfter = 2002;

double mean_of(std::span<const double> v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return quantile_sorted(v, 0.5);
}

std::optional<TestResult> try_mann_whitney(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) return std::nullopt;
    return mann_whitney_u(a, b);
}

std::optional<TestResult> try_chi_squared(const std::array<std::array<long, 2>, 2>& counts) {
    const std::array<std::array<double, 2>, 2> t = {
        {{static_cast<double>(counts[0][0]), static_cast<double>(counts[0][1])},
         {static_cast<double>(counts[1][0]), static_cast<double>(counts[1][1])}}};
    try {
        return chi_squared_2x2(t);
    } catch (const DataError&) {
        return std::nullopt;
    }
}

int gender_row(Gender g) { return g == Gender::Female ? 1 : 0; }

}  // namespace

double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw DataError(DataErrorKind::EmptyInput, "quantile of an empty sample");
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double midpoint_percentile(std::span<const int> sample, int value) {
    if (sample.empty()) return 50.0;
    std::size_t below = 0;
    std::size_t equal = 0;
    for (int s : sample) {
        below += s < value;
        equal += s == value;
    }
    return 100.0 * (static_cast<double>(below) + 0.5 * static_cast<double>(equal)) / static_cast<double>(sample.size());
}

double InstitutionHireDistribution::expected_mean() const {
    if (final_counts.empty()) return 0.0;
    return std::accumulate(final_counts.begin(), final_counts.end(), 0.0) / static_cast<double>(final_counts.size());
}

double InstitutionHireDistribution::expected_median() const {
    if (final_counts.empty()) return 0.0;
    return median_of(std::vector<double>(final_counts.begin(), final_counts.end()));
}

std::vector<InstitutionHireDistribution> female_hire_distributions(const Market& market,
                                                                   std::span<const SimulationRun> runs,
                                                                   std::uint64_t tie_seed) {
    const std::size_t n_inst = market.institutions().size();
    const std::size_t n_years = market.years().size();
    const auto& candidates = market.candidates();

    std::vector<std::size_t> year_of(candidates.size(), 0);
    for (std::size_t y = 0; y < n_years; ++y) {
        for (auto c : market.years()[y].candidates) year_of[c] = y;
    }

    auto cumulative = [&](const std::vector<std::size_t>& placements) {
        std::vector<std::vector<int>> counts(n_inst, std::vector<int>(n_years, 0));
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            if (candidates[c].gender != Gender::Female || placements[c] == kUnplaced) continue;
            ++counts[placements[c]][year_of[c]];
        }
        for (auto& row : counts) std::partial_sum(row.begin(), row.end(), row.begin());
        return counts;
    };

    std::vector<std::size_t> observed(candidates.size());
    for (std::size_t c = 0; c < candidates.size(); ++c) observed[c] = candidates[c].observed;
    const auto actual = cumulative(observed);

    std::vector<InstitutionHireDistribution> out(n_inst);
    for (std::size_t i = 0; i < n_inst; ++i) {
        out[i].institution = i;
        out[i].actual_trajectory = actual[i];
        out[i].actual_final = n_years ? actual[i].back() : 0;
        out[i].trajectories.reserve(runs.size());
        out[i].final_counts.reserve(runs.size());
    }
    for (const auto& run : runs) {
        if (run.placements.size() != candidates.size()) {
            throw DataError(DataErrorKind::CandidateMismatch, "run does not cover the market's candidates");
        }
        auto counts = cumulative(run.placements);
        for (std::size_t i = 0; i < n_inst; ++i) {
            out[i].final_counts.push_back(n_years ? counts[i].back() : 0);
            out[i].trajectories.push_back(std::move(counts[i]));
        }
    }
    for (std::size_t i = 0; i < n_inst; ++i) {
        auto& d = out[i];
        d.percentile_of_actual = midpoint_percentile(d.final_counts, d.actual_final);
        if (d.final_counts.empty()) continue;
        std::size_t below = 0;
        std::size_t equal = 0;
        for (int s : d.final_counts) {
            below += s < d.actual_final;
            equal += s == d.actual_final;
        }
        Rng rng(derive_seed(tie_seed, i));
        d.randomized_percentile = 100.0 * (static_cast<double>(below) + rng.uniform01() * static_cast<double>(equal)) /
                                  static_cast<double>(d.final_counts.size());
    }
    return out;
}

std::vector<RankBandRow> rank_band_summary(const std::vector<InstitutionHireDistribution>& distributions,
                                           const PrestigeRanking& ranking, std::size_t top_n) {
    std::vector<const InstitutionHireDistribution*> order;
    for (const auto& d : distributions) order.push_back(&d);
    std::stable_sort(order.begin(), order.end(), [&](const auto* a, const auto* b) {
        return ranking.rank.at(a->institution) < ranking.rank.at(b->institution);
    });
    if (order.size() > top_n) order.resize(top_n);

    std::vector<RankBandRow> rows;
    for (const auto* d : order) {
        RankBandRow row;
        row.institution = d->institution;
        row.rank = ranking.rank[d->institution];
        row.actual = d->actual_final;
        row.expected_mean = d->expected_mean();
        row.expected_median = d->expected_median();
        row.actual_minus_expected = row.actual - row.expected_mean;
        if (!d->final_counts.empty()) {
            std::vector<double> diffs;
            for (int s : d->final_counts) diffs.push_back(s - row.expected_mean);
            std::sort(diffs.begin(), diffs.end());
            row.band_low = quantile_sorted(diffs, 0.25);
            row.band_high = quantile_sorted(diffs, 0.75);
        }
        rows.push_back(row);
    }
    return rows;
}

std::vector<CandidateOutcome> candidate_placement_errors(const Market& market, std::span<const SimulationRun> runs) {
    const auto& ranking = market.ranking();
    std::vector<CandidateOutcome> out(market.candidates().size());
    for (std::size_t c = 0; c < out.size(); ++c) {
        auto& o = out[c];
        o.candidate = c;
        o.observed_rank = market.observed_rank(c);
        o.simulated_ranks.reserve(runs.size());
        for (const auto& run : runs) {
            if (run.placements.size() != out.size() || run.placements[c] == kUnplaced) {
                throw DataError(DataErrorKind::CandidateMismatch, "run does not place candidate " +
                                                                      market.candidates()[c].faculty_id);
            }
            o.simulated_ranks.push_back(ranking.normalized(run.placements[c]));
        }
        o.delta = runs.empty() ? 0.0 : o.observed_rank - mean_of(o.simulated_ranks);
    }
    return out;
}

std::vector<YearErrorPoint> placement_error_by_year(const std::vector<CandidateOutcome>& outcomes, const Market& market) {
    std::map<std::pair<int, int>, std::vector<double>> groups;  // (year, female?) -> deltas
    for (const auto& o : outcomes) {
        const auto& c = market.candidates().at(o.candidate);
        if (c.gender == Gender::Unknown) continue;
        groups[{c.year, gender_row(c.gender)}].push_back(o.delta);
    }
    std::vector<YearErrorPoint> out;
    for (const auto& [key, deltas] : groups) {
        YearErrorPoint p;
        p.year = key.first;
        p.gender = key.second ? Gender::Female : Gender::Male;
        p.n = deltas.size();
        p.mean_delta = mean_of(deltas);
        double ss = 0.0;
        for (double d : deltas) ss += (d - p.mean_delta) * (d - p.mean_delta);
        const double sd = p.n > 1 ? std::sqrt(ss / static_cast<double>(p.n - 1)) : 0.0;
        p.half_width = 1.96 * sd / std::sqrt(static_cast<double>(p.n));
        out.push_back(p);
    }
    return out;
}

std::optional<TestResult> error_trend_test(const std::vector<YearErrorPoint>& points, Gender gender) {
    std::vector<double> x;
    std::vector<double> y;
    for (const auto& p : points) {
        if (p.gender != gender) continue;
        x.push_back(p.year);
        y.push_back(p.mean_delta);
    }
    if (x.size() < 3) return std::nullopt;
    return slope_test(ols(x, y));
}

std::vector<NamedTest> candidate_comparisons(const std::vector<CandidateOutcome>& outcomes, const Market& market) {
    std::array<std::array<long, 2>, 2> exceed_by_gender{};   // [men, women][exceed, short]
    std::array<std::array<long, 2>, 2> exceed_by_postdoc{};  // [no postdoc, postdoc][exceed, short]
    std::array<std::vector<double>, 2> exceed_amount;
    std::array<std::vector<double>, 2> short_amount;
    std::array<std::vector<double>, 2> postdoc_exceed_amount;
    for (const auto& o : outcomes) {
        if (o.delta == 0.0) continue;
        const auto& c = market.candidates().at(o.candidate);
        const bool exceeded = o.delta < 0.0;
        ++exceed_by_postdoc[c.postdoc ? 1 : 0][exceeded ? 0 : 1];
        if (c.gender == Gender::Unknown) continue;
        const int g = gender_row(c.gender);
        ++exceed_by_gender[g][exceeded ? 0 : 1];
        (exceeded ? exceed_amount : short_amount)[g].push_back(std::abs(o.delta));
        if (exceeded && c.postdoc) postdoc_exceed_amount[g].push_back(std::abs(o.delta));
    }
    return {
        {"exceed_rate_by_gender", try_chi_squared(exceed_by_gender)},
        {"exceed_amount_women_vs_men", try_mann_whitney(exceed_amount[1], exceed_amount[0])},
        {"shortfall_amount_women_vs_men", try_mann_whitney(short_amount[1], short_amount[0])},
        {"exceed_rate_by_postdoc", try_chi_squared(exceed_by_postdoc)},
        {"postdoc_exceed_amount_women_vs_men", try_mann_whitney(postdoc_exceed_amount[1], postdoc_exceed_amount[0])},
    };
}

std::vector<std::pair<int, double>> yearly_female_fraction(const Market& market) {
    std::vector<std::pair<int, double>> out;
    for (const auto& slice : market.years()) {
        std::size_t female = 0;
        std::size_t known = 0;
        for (auto c : slice.candidates) {
            const auto g = market.candidates()[c].gender;
            if (g == Gender::Unknown) continue;
            ++known;
            female += g == Gender::Female;
        }
        if (known) out.emplace_back(slice.year, static_cast<double>(female) / static_cast<double>(known));
    }
    return out;
}

ParityForecast parity_forecast(std::span<const std::pair<int, double>> series) {
    if (series.size() < 10) throw DataError(DataErrorKind::EmptyInput, "parity forecast needs at least ten years");
    std::vector<double> x;
    std::vector<double> y;
    for (const auto& [year, share] : series) {
        x.push_back(year);
        y.push_back(share);
    }
    const auto fit = ols(x, y);
    ParityForecast f;
    f.slope = fit.slope;
    f.intercept = fit.intercept;

    const double first = *std::min_element(x.begin(), x.end());
    if (fit.predict(first) >= 0.5 - 1e-12) {
        f.defined = true;
        f.crossing_year = f.ci_low = f.ci_high = first;
        f.note = "fitted share is already at parity in the first year";
        return f;
    }
    if (fit.slope <= 0.0) {
        f.note = "nonpositive slope: the fitted share never reaches parity";
        return f;
    }
    f.defined = true;
    f.crossing_year = (0.5 - fit.intercept) / fit.slope;

    // Crossings of the 95% mean-response band with 0.5, in d = year - mean year:
    // (g + b d)^2 = T (1/n + d^2 / Sxx), g = fitted share at the mean year minus 0.5.
    const double t = t_quantile(0.975, static_cast<double>(fit.n) - 2.0);
    const double T = t * t * fit.residual_sd * fit.residual_sd;
    if (T == 0.0) {
        f.ci_low = f.ci_high = f.crossing_year;
        return f;
    }
    const double g = fit.predict(fit.x_mean) - 0.5;
    const double A = fit.slope * fit.slope - T / fit.sxx;
    const double B = 2.0 * g * fit.slope;
    const double C = g * g - T / static_cast<double>(fit.n);
    const double disc = B * B - 4.0 * A * C;
    if (A > 0.0) {
        const double r = std::sqrt(std::max(0.0, disc));
        f.ci_low = fit.x_mean + (-B - r) / (2.0 * A);
        f.ci_high = fit.x_mean + (-B + r) / (2.0 * A);
    } else {
        f.note = "slope not significant at the 95% level: the lower band never reaches parity";
        f.ci_high = INFINITY;
        f.ci_low = -INFINITY;
        if (A < 0.0 && disc >= 0.0) {
            const double r = std::sqrt(disc);
            f.ci_low = fit.x_mean + std::min((-B - r) / (2.0 * A), (-B + r) / (2.0 * A));
        }
    }
    f.ci_low = std::min(f.ci_low, f.crossing_year);
    f.ci_high = std::max(f.ci_high, f.crossing_year);
    return f;
}

const NamedTest* DescriptiveReport::find(const std::string& name) const {
    for (const auto& t : tests) {
        if (t.name == name) return &t;
    }
    return nullptr;
}

const GenderDirectionTable* DescriptiveReport::find_table(const std::string& name) const {
    for (const auto& t : tables) {
        if (t.name == name) return &t;
    }
    return nullptr;
}

DescriptiveReport descriptive_report(const Market& market) {
    const auto& rank = market.ranking().rank;
    const auto& regions = market.regions();

    DescriptiveReport report;
    std::array<std::array<long, 2>, 2> all_dir{}, changed_dir{}, same_dir{}, postdoc_dir{};
    std::array<std::array<long, 2>, 2> self_by_gender{}, region_by_gender{}, up_region_by_gender{};
    std::array<std::array<long, 2>, 2> postdoc_by_gender{}, postdoc_by_era{}, recent_postdoc_by_gender{};
    std::array<std::vector<double>, 2> doctoral_rank, hiring_rank, diff_incl, diff_excl;
    std::array<std::array<std::vector<double>, 3>, 2> z_by_dir;
    std::array<std::vector<double>, 2> z_postdoc_split;  // [no postdoc, postdoc], all genders
    std::array<std::array<std::vector<double>, 2>, 2> z_postdoc_by_gender;  // [g][postdoc]
    std::array<std::vector<double>, 2> recent_z;
    std::array<std::array<std::vector<double>, 2>, 2> recent_z_postdoc;  // [g][postdoc]

    std::size_t known = 0;
    std::size_t female = 0;
    for (const auto& c : market.candidates()) {
        const bool self = c.origin == c.observed;
        const bool up = !self && rank[c.observed] < rank[c.origin];
        const int dir = up ? 1 : 0;
        const bool same_region = regions[c.origin] == regions[c.observed];
        const bool recent = c.year > kRecentCohortAfter;
        ++postdoc_by_era[recent ? 1 : 0][c.postdoc ? 0 : 1];
        z_postdoc_split[c.postdoc ? 1 : 0].push_back(c.productivity_z);
        if (c.gender == Gender::Unknown) continue;

        ++known;
        const int g = gender_row(c.gender);
        female += g;
        const double diff = (rank[c.observed] - rank[c.origin]) / static_cast<double>(rank.size());
        doctoral_rank[g].push_back(rank[c.origin]);
        hiring_rank[g].push_back(rank[c.observed]);
        diff_incl[g].push_back(diff);
        ++self_by_gender[g][self ? 0 : 1];
        ++region_by_gender[g][same_region ? 0 : 1];
        ++postdoc_by_gender[g][c.postdoc ? 0 : 1];
        z_by_dir[g][2].push_back(c.productivity_z);
        z_postdoc_by_gender[g][c.postdoc ? 1 : 0].push_back(c.productivity_z);
        if (recent) {
            ++recent_postdoc_by_gender[g][c.postdoc ? 0 : 1];
            recent_z[g].push_back(c.productivity_z);
            recent_z_postdoc[g][c.postdoc ? 1 : 0].push_back(c.productivity_z);
        }
        if (self) continue;

        diff_excl[g].push_back(diff);
        ++all_dir[g][dir];
        ++(same_region ? same_dir : changed_dir)[g][dir];
        if (c.postdoc) ++postdoc_dir[g][dir];
        if (up) ++up_region_by_gender[g][same_region ? 1 : 0];
        z_by_dir[g][dir].push_back(c.productivity_z);
    }

    report.faculty = known;
    report.female_share = known ? static_cast<double>(female) / static_cast<double>(known) : 0.0;
    report.tables = {
        {"direction_by_gender", all_dir, try_chi_squared(all_dir)},
        {"direction_by_gender_changed_region", changed_dir, try_chi_squared(changed_dir)},
        {"direction_by_gender_same_region", same_dir, try_chi_squared(same_dir)},
        {"direction_by_gender_postdoc", postdoc_dir, try_chi_squared(postdoc_dir)},
    };
    for (int g = 0; g < 2; ++g) {
        for (int d = 0; d < 3; ++d) {
            if (!z_by_dir[g][d].empty()) report.median_z[g][d] = median_of(z_by_dir[g][d]);
        }
        const double total = static_cast<double>(self_by_gender[g][0] + self_by_gender[g][1]);
        report.self_hire_rate[g] = total > 0 ? 100.0 * static_cast<double>(self_by_gender[g][0]) / total : 0.0;
        report.postdoc_rate[g] = total > 0 ? 100.0 * static_cast<double>(postdoc_by_gender[g][0]) / total : 0.0;
    }

    auto& t = report.tests;
    t.push_back({"doctoral_rank_women_vs_men", try_mann_whitney(doctoral_rank[1], doctoral_rank[0])});
    t.push_back({"hiring_rank_women_vs_men", try_mann_whitney(hiring_rank[1], hiring_rank[0])});
    t.push_back({"rank_change_women_vs_men", try_mann_whitney(diff_incl[1], diff_incl[0])});
    t.push_back({"rank_change_women_vs_men_excl_self", try_mann_whitney(diff_excl[1], diff_excl[0])});
    t.push_back({"self_hire_rate_by_gender", try_chi_squared(self_by_gender)});
    t.push_back({"same_region_rate_by_gender", try_chi_squared(region_by_gender)});
    t.push_back({"region_change_given_up_by_gender", try_chi_squared(up_region_by_gender)});
    t.push_back({"productivity_women_vs_men_down", try_mann_whitney(z_by_dir[1][0], z_by_dir[0][0])});
    t.push_back({"productivity_women_vs_men_up", try_mann_whitney(z_by_dir[1][1], z_by_dir[0][1])});
    t.push_back({"productivity_women_vs_men", try_mann_whitney(z_by_dir[1][2], z_by_dir[0][2])});
    t.push_back({"productivity_postdoc_vs_none", try_mann_whitney(z_postdoc_split[1], z_postdoc_split[0])});
    t.push_back({"productivity_postdoc_vs_none_men",
                 try_mann_whitney(z_postdoc_by_gender[0][1], z_postdoc_by_gender[0][0])});
    t.push_back({"productivity_postdoc_vs_none_women",
                 try_mann_whitney(z_postdoc_by_gender[1][1], z_postdoc_by_gender[1][0])});
    t.push_back({"postdoc_rate_by_gender", try_chi_squared(postdoc_by_gender)});
    t.push_back({"postdoc_rate_by_era", try_chi_squared(postdoc_by_era)});
    t.push_back({"recent_postdoc_rate_by_gender", try_chi_squared(recent_postdoc_by_gender)});
    t.push_back({"recent_productivity_women_vs_men", try_mann_whitney(recent_z[1], recent_z[0])});
    t.push_back({"recent_productivity_postdoc_women_vs_men",
                 try_mann_whitney(recent_z_postdoc[1][1], recent_z_postdoc[0][1])});
    t.push_back({"recent_productivity_postdoc_women_vs_no_postdoc_men",
                 try_mann_whitney(recent_z_postdoc[1][1], recent_z_postdoc[0][0])});
    return report;
}

}  // namespace fhire
