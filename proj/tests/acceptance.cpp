// Acceptance suite: one PASS/FAIL/SKIP line per criterion. Exits nonzero on any FAIL.
//
// Criterion 8 needs a real hiring dataset. Point FHIRE_REAL_DATA at a directory holding
// institutions.csv, faculty.csv and publications.csv to run it.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "fhire/analysis.hpp"
#include "fhire/config.hpp"
#include "fhire/csv.hpp"
#include "fhire/fitting.hpp"
#include "fhire/market.hpp"
#include "fhire/network_stats.hpp"
#include "fhire/pipeline.hpp"
#include "fhire/prestige.hpp"
#include "fhire/stat_tests.hpp"
#include "fhire/synthetic.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace fhire;

namespace {

struct Outcome {
    enum Kind { Pass, Fail, Skip } kind = Pass;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(double x, int digits = 4) {
    std::ostringstream s;
    s.precision(digits);
    s << x;
    return s.str();
}

// ---------------------------------------------------------------------------

Outcome mvr_oracle() {
    const auto start = Clock::now();
    Rng rng(101);
    std::size_t count_mismatch = 0;
    double worst_rank_gap = 0.0;
    for (int g = 0; g < 50; ++g) {
        const std::size_t n = 2 + rng.below(6);
        const std::size_t m = 1 + rng.below(30);
        const auto net = oracle::random_multigraph(rng, n, m);
        const auto exact = brute_force_mvr(net);
        const auto samples =
            sample_mvr(net, {.restarts = 10, .sweeps = 4 * n * n, .samples = 2000, .seed = static_cast<std::uint64_t>(g)});
        const auto approx = mean_rank(samples, ViolationCounter(net).non_self_edges());
        if (approx.min_violations != exact.min_violations) ++count_mismatch;
        for (std::size_t u = 0; u < n; ++u) worst_rank_gap = std::max(worst_rank_gap, std::abs(approx.rank[u] - exact.rank[u]));
    }
    const double t = seconds_since(start);
    const bool ok = count_mismatch == 0 && worst_rank_gap <= 0.05 && t < 60.0;
    return {ok ? Outcome::Pass : Outcome::Fail, "50 graphs, count mismatches " + std::to_string(count_mismatch) +
                                                    ", worst mean-rank gap " + fmt(worst_rank_gap) + ", " + fmt(t, 3) + " s"};
}

// ---------------------------------------------------------------------------

using test::CandidateSpec;

std::vector<Market> exactness_fixtures() {
    std::vector<Market> out;
    // Every origin multiset against every opening multiset on two institutions.
    const std::vector<std::pair<std::size_t, std::size_t>> pairs = {{0, 0}, {0, 1}, {1, 1}};
    for (const auto& [o1, o2] : pairs) {
        for (const auto& [v1, v2] : pairs) {
            out.push_back(test::make_market({1, 2}, {Region::West, Region::South},
                                            {{o1, v1, 0.8, true, Gender::Female}, {o2, v2, -0.4, false, Gender::Male}}));
        }
    }
    const std::vector<Region> three = {Region::West, Region::South, Region::West};
    out.push_back(test::make_market({1, 2, 3}, three,
                                    {{0, 0, 1.0, true, Gender::Male}, {1, 1, -0.5}, {2, 2, 0.3, false, Gender::Female}}));
    out.push_back(test::make_market({1, 2.5, 4}, three,
                                    {{2, 0, 0.2}, {1, 1, 1.5, true, Gender::Female}, {0, 2, -1.0}}));
    out.push_back(test::make_market({1, 2, 3}, three,
                                    {{0, 1, 0.0}, {0, 1, 0.9, false, Gender::Female}, {2, 2, -0.7, true}}));
    out.push_back(test::make_market({1.5, 1.5, 6}, three,
                                    {{1, 2, -0.2, true}, {2, 0, 0.4, false, Gender::Female}, {0, 2, 1.1}}));
    return out;
}

Weights exactness_weights() {
    Weights w;
    w.active.fill(true);
    w.w = {3.0, 1.0, -0.8, 0.6, 0.5, -0.4};
    return w;
}

std::map<std::vector<std::size_t>, long> simulate_counts(const Market& m, const MatchModel& model, long runs,
                                                         std::uint64_t seed) {
    std::map<std::vector<std::size_t>, long> counts;
    Rng rng(seed);
    std::vector<std::size_t> placements;
    for (long i = 0; i < runs; ++i) {
        placements.clear();
        simulate_year(m, 0, model, rng, placements);
        ++counts[placements];
    }
    return counts;
}

Outcome matching_exactness() {
    const auto start = Clock::now();
    const long runs = 100000;
    const auto fixtures = exactness_fixtures();
    const std::vector<MatchModel> models = {MatchModel::uniform(), MatchModel::step(),
                                            MatchModel::logistic(exactness_weights())};
    std::size_t outcomes = 0, outside = 0, impossible = 0;
    double worst_z = 0.0;
    std::uint64_t seed = 500;
    for (const auto& m : fixtures) {
        for (const auto& model : models) {
            const auto exact = oracle::exact_year_distribution(m, 0, model);
            const auto counts = simulate_counts(m, model, runs, ++seed);
            for (const auto& [k, c] : counts) impossible += !exact.contains(k);
            for (const auto& [k, p] : exact) {
                ++outcomes;
                const auto it = counts.find(k);
                const double c = it == counts.end() ? 0.0 : static_cast<double>(it->second);
                const double sd = std::sqrt(runs * p * (1 - p));
                const double gap = std::abs(c - runs * p);
                if (sd > 0) worst_z = std::max(worst_z, gap / sd);
                outside += gap > 3 * sd + 1e-9;
            }
        }
    }
    const double t = seconds_since(start);
    const bool ok = outside == 0 && impossible == 0 && t < 120.0;
    return {ok ? Outcome::Pass : Outcome::Fail,
            std::to_string(fixtures.size()) + " fixtures x 3 variants, " + std::to_string(outcomes) +
                " outcomes, outside 3 sigma " + std::to_string(outside) + ", impossible outcomes seen " +
                std::to_string(impossible) + ", worst |z| " + fmt(worst_z, 3) + ", " + fmt(t, 3) + " s"};
}

// ---------------------------------------------------------------------------

Outcome special_cases() {
    // Logistic with zero weights against uniform: two-sample chi-squared homogeneity test.
    const auto m = exactness_fixtures()[10];
    const long runs = 100000;
    const auto a = simulate_counts(m, MatchModel::logistic(Weights::from_mask(std::vector<Feature>(kAllFeatures.begin(), kAllFeatures.end()))),
                                   runs, 71);
    const auto b = simulate_counts(m, MatchModel::uniform(), runs, 72);
    std::map<std::vector<std::size_t>, std::pair<double, double>> table;
    for (const auto& [k, c] : a) table[k].first = static_cast<double>(c);
    for (const auto& [k, c] : b) table[k].second = static_cast<double>(c);
    double stat = 0.0;
    for (const auto& [k, ab] : table) {
        const double total = ab.first + ab.second;
        const double expected = total / 2.0;  // equal sample sizes
        stat += (ab.first - expected) * (ab.first - expected) / expected;
        stat += (ab.second - expected) * (ab.second - expected) / expected;
    }
    const double dof = static_cast<double>(table.size() - 1);
    const double p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), stat));

    // Step: replay the sequential process pick by pick and check every choice. The replay
    // draws from the same stream as simulate_year, so it is checked to reproduce it exactly.
    Rng gen(73);
    std::vector<CandidateSpec> specs;
    const int years = 10000;
    for (int y = 0; y < years; ++y) {
        const std::size_t k = 2 + gen.below(5);
        for (std::size_t i = 0; i < k; ++i) specs.push_back({gen.below(8), gen.below(8), 0.0, false, Gender::Male, y});
    }
    const auto market = test::make_market({1, 2, 3, 3, 5, 6, 7, 8}, test::all_south(8), specs);
    const auto step = MatchModel::step();
    const auto& rank = market.ranking().rank;
    std::size_t violations = 0, replay_mismatch = 0;
    for (std::size_t y = 0; y < market.years().size(); ++y) {
        const auto& slice = market.years()[y];
        Rng r1(derive_seed(9, y)), r2(derive_seed(9, y));
        std::vector<std::size_t> direct;
        simulate_year(market, y, step, r1, direct);

        std::vector<std::size_t> unfilled = slice.openings;
        std::vector<std::size_t> pool = slice.candidates;
        std::vector<std::size_t> replay(market.candidates().size(), kUnplaced);
        while (!unfilled.empty()) {
            const auto o = select_opening(unfilled, market.ranking(), r2);
            const auto v = unfilled[o];
            unfilled[o] = unfilled.back();
            unfilled.pop_back();
            const auto c = select_candidate(step, pool, v, market, r2);
            const bool any_better = std::any_of(pool.begin(), pool.end(), [&](std::size_t q) {
                return rank[market.candidates()[q].origin] < rank[v];
            });
            const bool chosen_better = rank[market.candidates()[pool[c]].origin] < rank[v];
            violations += any_better && !chosen_better;
            replay[pool[c]] = v;
            pool.erase(pool.begin() + static_cast<long>(c));
        }
        replay_mismatch += replay != direct;
    }
    const bool ok = p > 0.01 && violations == 0 && replay_mismatch == 0;
    return {ok ? Outcome::Pass : Outcome::Fail,
            "w=0 vs uniform chi2 p " + fmt(p) + " (" + std::to_string(table.size()) + " outcomes); step violations " +
                std::to_string(violations) + " in " + std::to_string(years) + " years; replay mismatches " +
                std::to_string(replay_mismatch)};
}

// ---------------------------------------------------------------------------

Outcome parameter_recovery() {
    const auto start = Clock::now();
    auto spec = SyntheticSpec::full_scale();
    spec.institutions = 200;
    spec.first_year = 1972;
    spec.last_year = 2011;
    spec.hires_per_year = 65;
    const auto& w_true = spec.w_true;

    int successes = 0;
    std::string per_seed;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto bundle = generate_synthetic(spec, seed);
        const auto market = bundle.truth_market();
        GreedyParams gp;
        gp.lambda = 1e-4;
        gp.fit_replicates = 12;
        gp.eval_replicates = 25;
        gp.search.restarts = 1;
        gp.seed = seed;
        const auto trace = greedy_select(market, gp);
        const auto& first = trace.stages.front();
        const auto& fitted = trace.stages.back().weights;
        bool signs = true;
        for (auto f : kAllFeatures) {
            const double truth = w_true.w[slot(f)];
            if (std::abs(truth) >= 0.5 && !(fitted.w[slot(f)] * truth > 0)) signs = false;
        }
        const bool ok = first.feature == Feature::RankDiff && first.p_value < 0.05 && signs;
        successes += ok;
        per_seed += (ok ? "+" : "-");
        std::cerr << "  recovery seed " << seed << ": " << bundle.faculty.size() << " hires, first "
                  << to_string(first.feature) << " p " << first.p_value << ", weights";
        for (auto f : kAllFeatures) std::cerr << ' ' << to_string(f) << '=' << fmt(fitted.w[slot(f)], 3);
        std::cerr << (ok ? "" : "  [miss]") << '\n';
    }
    const double t = seconds_since(start);
    const bool ok = successes >= 9 && t < 600.0;
    return {ok ? Outcome::Pass : Outcome::Fail,
            std::to_string(successes) + "/10 seeds recovered [" + per_seed + "], " + fmt(t, 4) + " s"};
}

// ---------------------------------------------------------------------------

Outcome statistic_oracles() {
    Rng rng(202);
    double worst_mw = 0.0, worst_chi = 0.0;
    for (int i = 0; i < 100; ++i) {
        const std::size_t na = 1 + rng.below(6), nb = 1 + rng.below(6);
        std::vector<double> a, b;
        for (std::size_t k = 0; k < na; ++k) a.push_back(static_cast<double>(rng.below(6)));
        for (std::size_t k = 0; k < nb; ++k) b.push_back(static_cast<double>(rng.below(6)));
        std::vector<double> pooled = a;
        pooled.insert(pooled.end(), b.begin(), b.end());
        const auto mom = oracle::enumerate_u_moments(pooled, na);
        double u = 0.0;
        for (double x : a) {
            for (double y : b) u += x > y ? 1.0 : x == y ? 0.5 : 0.0;
        }
        const double p = mom.variance < 1e-12
                             ? 1.0
                             : std::erfc(std::max(0.0, std::abs(u - mom.mean) - 0.5) / std::sqrt(mom.variance) / std::sqrt(2.0));
        const auto r = mann_whitney_u(a, b);
        worst_mw = std::max({worst_mw, std::abs(r.statistic - u), std::abs(r.p_value - p)});

        std::array<std::array<double, 2>, 2> t{};
        for (auto& row : t) {
            for (auto& x : row) x = static_cast<double>(1 + rng.below(40));
        }
        const double n = t[0][0] + t[0][1] + t[1][0] + t[1][1];
        const double d = t[0][0] * t[1][1] - t[0][1] * t[1][0];
        const double hand = n * d * d / ((t[0][0] + t[0][1]) * (t[1][0] + t[1][1]) * (t[0][0] + t[1][0]) * (t[0][1] + t[1][1]));
        const auto c = chi_squared_2x2(t);
        const double hand_p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(1.0), hand));
        worst_chi = std::max({worst_chi, std::abs(c.statistic - hand), std::abs(c.p_value - hand_p)});
    }

    auto net = [](std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& arcs) {
        std::vector<Institution> nodes;
        for (std::size_t i = 0; i < n; ++i) nodes.push_back({"n" + std::to_string(i), "", Region::South});
        std::vector<HireEdge> edges;
        for (const auto& [u, v] : arcs) edges.push_back({u, v, 2000, "f"});
        return HiringNetwork(nodes, edges);
    };
    const auto triangle = net(3, {{0, 1}, {1, 2}, {2, 0}});
    const auto path = net(3, {{0, 1}, {1, 2}});
    const auto star = net(4, {{0, 1}, {0, 2}, {0, 3}});
    const bool hand_ok = mean_geodesic(triangle) == 1.0 && mean_clustering(triangle) == 1.0 &&
                         mean_geodesic(path) == 8.0 / 6.0 && mean_clustering(path) == 0.0 &&
                         mean_geodesic(star) == 1.5 && mean_clustering(star) == 0.0;
    const bool ok = worst_mw <= 1e-6 && worst_chi <= 1e-6 && hand_ok;
    return {ok ? Outcome::Pass : Outcome::Fail, "worst MW gap " + fmt(worst_mw, 3) + ", worst chi2 gap " +
                                                    fmt(worst_chi, 3) + ", network hand values " +
                                                    (hand_ok ? "exact" : "MISMATCH")};
}

// ---------------------------------------------------------------------------

Outcome calibration() {
    auto spec = SyntheticSpec::full_scale();
    spec.institutions = 200;
    const auto bundle = generate_synthetic(spec, 606);
    const auto truth = bundle.truth_market();
    const auto model = MatchModel::logistic(bundle.truth.w_true);
    // The "observed" history is itself a draw from the model.
    const auto observed = simulate_history(truth, model, 1);
    const auto market = truth.with_observed(observed.placements);
    std::vector<SimulationRun> runs(200);
    for (std::size_t r = 0; r < runs.size(); ++r) runs[r] = simulate_history(market, model, derive_seed(2, r));
    const auto dists = female_hire_distributions(market, runs, 3);
    std::vector<double> randomized, midpoint;
    for (const auto& d : dists) {
        randomized.push_back(d.randomized_percentile);
        midpoint.push_back(d.percentile_of_actual);
    }
    const auto ks = ks_uniform(randomized, 0.0, 100.0);
    const auto ks_mid = ks_uniform(midpoint, 0.0, 100.0);
    return {ks.p_value > 0.01 ? Outcome::Pass : Outcome::Fail,
            "200 institutions x 200 runs, KS p " + fmt(ks.p_value) + " (tie-randomized percentiles; midpoint percentiles give p " +
                fmt(ks_mid.p_value) + ")"};
}

// ---------------------------------------------------------------------------

Outcome parity() {
    const auto start = Clock::now();
    std::vector<std::pair<int, double>> s;
    for (int y = 1970; y <= 2011; ++y) s.emplace_back(y, 0.05 + 0.0043 * (y - 1970));
    const auto f = parity_forecast(s);
    const double t = seconds_since(start);
    const bool ok = f.defined && std::abs(f.crossing_year - 2074.7) <= 0.1 && t < 1.0;
    return {ok ? Outcome::Pass : Outcome::Fail,
            "crossing year " + fmt(f.crossing_year, 6) + ", slope " + fmt(100 * f.slope, 3) + "% per year"};
}

// ---------------------------------------------------------------------------

Outcome real_data() {
    const char* dir = std::getenv("FHIRE_REAL_DATA");
    if (!dir || !std::filesystem::exists(std::filesystem::path(dir) / "faculty.csv")) {
        return {Outcome::Skip, "no dataset (set FHIRE_REAL_DATA to a directory with the three input tables)"};
    }
    Config cfg;
    cfg.merge({{"data_dir", dir}});
    cfg.out = std::filesystem::temp_directory_path() / "fhire-acceptance-real";
    Pipeline p(cfg);
    std::vector<std::string> misses;

    const auto report = p.check();
    const std::array<double, kStatisticCount> expected = {2.23, 0.25, 18.95, 14.25, 6.62, 40.54};
    const auto observed = report.observed.values();
    for (std::size_t k = 0; k < kStatisticCount; ++k) {
        const bool soft = k == 3;  // reciprocating institutions: definition not pinned down
        if (std::abs(observed[k] - expected[k]) > 0.005 && !soft) misses.push_back(std::string(kStatisticNames[k]));
    }

    const auto d = descriptive_report(p.market());
    const auto* dir_table = d.find_table("direction_by_gender");
    auto pct = [&](int g, int up) {
        const auto& row = dir_table->counts[g];
        return 100.0 * static_cast<double>(row[up]) / static_cast<double>(row[0] + row[1]);
    };
    if (std::abs(pct(0, 0) - 79.3) > 0.05 || std::abs(pct(1, 0) - 81.0) > 0.05) misses.push_back("direction table");
    const double z_expected[2][3] = {{-0.322, -0.207, -0.327}, {-0.331, -0.215, -0.329}};
    for (int g = 0; g < 2; ++g) {
        for (int c = 0; c < 3; ++c) {
            if (!d.median_z[g][c] || std::abs(*d.median_z[g][c] - z_expected[g][c]) > 0.01) misses.push_back("median z");
        }
    }

    const auto& ranking = p.rank();
    if (std::abs(ranking.violation_fraction - 0.12) > 0.01) misses.push_back("violation fraction");

    p.fit();
    const auto greedy = csv::read(p.dir() / "greedy.csv");
    std::vector<std::string> order;
    for (std::size_t i = 1; i < greedy.rows.size(); ++i) order.push_back(greedy.rows[i][1]);
    const std::vector<std::string> expected_order = {"rank_diff", "productivity", "hiring_rank", "postdoc", "same_region",
                                                     "female"};
    if (order != expected_order) misses.push_back("greedy order");

    std::string detail = misses.empty() ? "all reproduced" : "mismatches:";
    for (const auto& m : misses) detail += " " + m;
    return {misses.empty() ? Outcome::Pass : Outcome::Fail, detail};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"1 MVR oracle equivalence", mvr_oracle},
        {"2 matching-process exactness", matching_exactness},
        {"3 special-case equivalences", special_cases},
        {"4 parameter recovery", parameter_recovery},
        {"5 statistic oracles", statistic_oracles},
        {"6 calibration", calibration},
        {"7 parity forecast", parity},
        {"8 real-data reproduction", real_data},
    };
    int failures = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {Outcome::Fail, std::string("exception: ") + e.what()};
        }
        const char* tag = o.kind == Outcome::Pass ? "PASS" : o.kind == Outcome::Fail ? "FAIL" : "SKIP";
        failures += o.kind == Outcome::Fail;
        std::cout << tag << " criterion " << name << ": " << o.detail << std::endl;
    }
    return failures ? 1 : 0;
}
