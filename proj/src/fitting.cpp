#include "fhire/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fhire/error.hpp"
#include "fhire/parallel.hpp"
#include "fhire/rng.hpp"
#include "fhire/stat_tests.hpp"

namespace fhire {

double placement_error(std::span<const double> observed, std::span<const double> simulated) {
    if (observed.size() != simulated.size()) {
        throw DataError(DataErrorKind::CandidateMismatch, "observed and simulated ranks differ in length");
    }
    if (observed.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double d = observed[i] - simulated[i];
        sum += d * d;
    }
    return sum / static_cast<double>(observed.size());
}

double placement_error(const Market& market, const SimulationRun& run, std::span<const std::size_t> candidates) {
    if (run.placements.size() != market.candidates().size()) {
        throw DataError(DataErrorKind::CandidateMismatch, "run and market cover different candidates");
    }
    const auto& ranking = market.ranking();
    double sum = 0.0;
    auto add = [&](std::size_t c) {
        const auto placed = run.placements[c];
        if (placed == kUnplaced) {
            throw DataError(DataErrorKind::CandidateMismatch, "candidate " + market.candidates()[c].faculty_id +
                                                                  " was not placed");
        }
        const double d = market.observed_rank(c) - ranking.normalized(placed);
        sum += d * d;
    };
    std::size_t m = 0;
    if (candidates.empty()) {
        m = market.candidates().size();
        for (std::size_t c = 0; c < m; ++c) add(c);
    } else {
        m = candidates.size();
        for (auto c : candidates) add(c);
    }
    return m ? sum / static_cast<double>(m) : 0.0;
}

Objective::Objective(const Market& market, ObjectiveConfig config) : market_(&market), config_(std::move(config)) {
    if (config_.replicates < 1) throw std::invalid_argument("objective needs at least one replicate");
    if (config_.lambda < 0) throw std::invalid_argument("lambda must be nonnegative");
    for (auto y : config_.years) {
        if (y >= market.years().size()) throw std::out_of_range("year index outside the market");
        const auto& c = market.years()[y].candidates;
        scored_candidates_.insert(scored_candidates_.end(), c.begin(), c.end());
    }
}

Weights Objective::expand(std::span<const double> x) const {
    if (x.size() != dimension()) throw std::invalid_argument("search vector has the wrong dimension");
    Weights w = Weights::from_mask(config_.features);
    for (std::size_t i = 0; i < config_.features.size(); ++i) w.w[slot(config_.features[i])] = x[i];
    if (config_.bias) w.bias = x.back();
    return w;
}

double Objective::penalty(const Weights& w) const {
    double l1 = 0.0;
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
        if (w.active[k]) l1 += std::abs(w.w[k]);
    }
    return config_.lambda * l1;
}

std::vector<double> Objective::replicate_errors(const MatchModel& model, std::uint64_t seed,
                                                std::size_t replicates) const {
    std::vector<double> errors(replicates);
    parallel_for(replicates, [&](std::size_t r) {
        const auto run = simulate_history(*market_, model, derive_seed(seed, r), config_.years);
        errors[r] = placement_error(*market_, run, scored_candidates_);
    });
    return errors;
}

double Objective::operator()(std::span<const double> x) const {
    const auto w = expand(x);
    const auto errors = replicate_errors(MatchModel::logistic(w), config_.seed, config_.replicates);
    double sum = 0.0;
    for (double e : errors) sum += e;
    return sum / static_cast<double>(errors.size()) + penalty(w);
}

double objective_value(const Market& market, const Weights& w, const ObjectiveConfig& config) {
    auto cfg = config;
    cfg.features = w.active_features();
    cfg.bias = cfg.bias || w.bias != 0.0;
    const Objective objective(market, cfg);
    std::vector<double> x;
    for (auto f : cfg.features) x.push_back(w.w[slot(f)]);
    if (cfg.bias) x.push_back(w.bias);
    return objective(x);
}

namespace {

struct Vertex {
    std::vector<double> x;
    double f = 0.0;
};

}  // namespace

FitResult nelder_mead(const ScalarFunction& f, std::vector<double> x0, const NelderMeadParams& params) {
    constexpr double kReflect = 1.0;
    constexpr double kExpand = 2.0;
    constexpr double kContract = 0.5;
    constexpr double kShrink = 0.5;

    const std::size_t dim = x0.size();
    FitResult result;
    result.x = x0;
    result.value = f(x0);
    result.evaluations = 1;
    result.trace.emplace_back(0, result.value);
    if (!std::isfinite(result.value)) throw NumericalError("objective is not finite at the starting point");
    if (dim == 0) return result;

    const std::size_t max_iter = params.max_iter ? params.max_iter : 500 * dim;
    const std::size_t passes = std::max<std::size_t>(1, params.restarts);
    Rng rng(params.seed);
    std::size_t iteration = 0;

    auto eval = [&](const std::vector<double>& x) {
        ++result.evaluations;
        const double v = f(x);
        return std::isfinite(v) ? v : INFINITY;
    };
    auto note_best = [&](const Vertex& v) {
        if (v.f < result.value) {
            result.value = v.f;
            result.x = v.x;
        }
    };

    for (std::size_t pass = 0; pass < passes; ++pass) {
        const double start_value = result.value;
        std::vector<Vertex> simplex;
        simplex.push_back({result.x, result.value});
        for (std::size_t i = 0; i < dim; ++i) {
            Vertex v{result.x, 0.0};
            const double scale = pass == 0 ? 1.0 : 0.5 + rng.uniform01();
            v.x[i] += params.initial_step * scale;
            v.f = eval(v.x);
            simplex.push_back(std::move(v));
        }

        std::vector<double> centroid(dim);
        auto blend = [&](const std::vector<double>& toward, double t) {
            // centroid + t * (toward - centroid)
            std::vector<double> x(dim);
            for (std::size_t k = 0; k < dim; ++k) x[k] = centroid[k] + t * (toward[k] - centroid[k]);
            return x;
        };

        for (std::size_t it = 0; it < max_iter; ++it) {
            std::stable_sort(simplex.begin(), simplex.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
            note_best(simplex.front());
            result.trace.emplace_back(++iteration, result.value);
            if (simplex.back().f - simplex.front().f < params.tol) break;

            std::fill(centroid.begin(), centroid.end(), 0.0);
            for (std::size_t i = 0; i < dim; ++i) {
                for (std::size_t k = 0; k < dim; ++k) centroid[k] += simplex[i].x[k];
            }
            for (auto& c : centroid) c /= static_cast<double>(dim);

            auto& worst = simplex.back();
            const double second_worst = simplex[dim - 1].f;
            Vertex reflected{blend(worst.x, -kReflect), 0.0};
            reflected.f = eval(reflected.x);

            if (reflected.f < simplex.front().f) {
                Vertex expanded{blend(worst.x, -kReflect * kExpand), 0.0};
                expanded.f = eval(expanded.x);
                worst = expanded.f < reflected.f ? std::move(expanded) : std::move(reflected);
                continue;
            }
            if (reflected.f < second_worst) {
                worst = std::move(reflected);
                continue;
            }
            Vertex contracted;
            if (reflected.f < worst.f) {
                contracted.x = blend(reflected.x, kContract);
                contracted.f = eval(contracted.x);
                if (contracted.f <= reflected.f) {
                    worst = std::move(contracted);
                    continue;
                }
            } else {
                contracted.x = blend(worst.x, kContract);
                contracted.f = eval(contracted.x);
                if (contracted.f < worst.f) {
                    worst = std::move(contracted);
                    continue;
                }
            }
            for (std::size_t i = 1; i <= dim; ++i) {
                for (std::size_t k = 0; k < dim; ++k) {
                    simplex[i].x[k] = simplex[0].x[k] + kShrink * (simplex[i].x[k] - simplex[0].x[k]);
                }
                simplex[i].f = eval(simplex[i].x);
            }
        }
        for (const auto& v : simplex) note_best(v);
        result.trace.emplace_back(iteration, result.value);
        if (pass > 0 && start_value - result.value < params.tol) break;
    }
    return result;
}

WeightFit fit_weights(const Market& market, const ObjectiveConfig& config, const NelderMeadParams& params,
                      const Weights& start) {
    const Objective objective(market, config);
    std::vector<double> x0;
    for (auto f : config.features) x0.push_back(start.w[slot(f)]);
    if (config.bias) x0.push_back(start.bias);
    WeightFit fit;
    fit.search = nelder_mead([&](std::span<const double> x) { return objective(x); }, x0, params);
    fit.weights = objective.expand(fit.search.x);
    fit.err = fit.search.value;
    return fit;
}

namespace {

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

FeatureSelectionTrace greedy_select(const Market& market, const GreedyParams& params) {
    ObjectiveConfig base;
    base.lambda = params.lambda;
    base.replicates = params.fit_replicates;
    base.seed = substream_seed(params.seed, "fit");
    const std::uint64_t eval_seed = substream_seed(params.seed, "eval");

    std::vector<Feature> remaining;
    bool with_gender = false;
    for (auto f : params.features) {
        if (f == Feature::Female) {
            with_gender = true;
        } else if (std::find(remaining.begin(), remaining.end(), f) == remaining.end()) {
            remaining.push_back(f);
        }
    }

    FeatureSelectionTrace trace;
    {
        const Objective probe(market, base);
        trace.step_error = mean_of(probe.replicate_errors(MatchModel::step(), base.seed, base.replicates));
        trace.step_eval_errors = probe.replicate_errors(MatchModel::step(), eval_seed, params.eval_replicates);
        trace.empty_eval_errors =
            probe.replicate_errors(MatchModel::logistic(Weights{}), eval_seed, params.eval_replicates);
    }
    const double step_eval_mean = mean_of(trace.step_eval_errors);

    std::vector<Feature> active;
    Weights current;
    double prev_err = objective_value(market, Weights{}, base);
    std::vector<double> prev_eval = trace.empty_eval_errors;

    auto accept = [&](Feature f, const WeightFit& fit, const ObjectiveConfig& cfg) {
        const Objective objective(market, cfg);
        GreedyStage stage;
        stage.feature = f;
        stage.err_before = prev_err;
        stage.err_after = fit.err;
        stage.weights = fit.weights;
        stage.eval_errors =
            objective.replicate_errors(MatchModel::logistic(fit.weights), eval_seed, params.eval_replicates);
        stage.p_value = mann_whitney_u(prev_eval, stage.eval_errors).p_value;
        stage.pct_reduction_vs_step =
            step_eval_mean > 0 ? 100.0 * (step_eval_mean - mean_of(stage.eval_errors)) / step_eval_mean : 0.0;
        trace.stages.push_back(stage);
        active.push_back(f);
        current = fit.weights;
        prev_err = fit.err;
        prev_eval = stage.eval_errors;
    };

    while (!remaining.empty()) {
        std::size_t best = 0;
        WeightFit best_fit;
        ObjectiveConfig best_cfg;
        for (std::size_t i = 0; i < remaining.size(); ++i) {
            auto cfg = base;
            cfg.features = active;
            cfg.features.push_back(remaining[i]);
            auto fit = fit_weights(market, cfg, params.search, current);
            if (i == 0 || fit.err < best_fit.err) {
                best = i;
                best_fit = std::move(fit);
                best_cfg = cfg;
            }
        }
        const Feature chosen = remaining[best];
        remaining.erase(remaining.begin() + static_cast<long>(best));
        accept(chosen, best_fit, best_cfg);
    }
    if (with_gender) {
        auto cfg = base;
        cfg.features = active;
        cfg.features.push_back(Feature::Female);
        accept(Feature::Female, fit_weights(market, cfg, params.search, current), cfg);
    }
    return trace;
}

CvReport cross_validate(const Market& market, const CvParams& params) {
    const std::size_t years = market.years().size();
    if (params.holdout_years == 0 || years < params.holdout_years + 1) {
        throw DataError(DataErrorKind::EmptyInput, "cross-validation needs at least " +
                                                       std::to_string(params.holdout_years + 1) + " distinct years");
    }
    if (params.folds == 0) throw std::invalid_argument("cross-validation needs at least one fold");

    CvReport report;
    report.features = params.objective.features;
    report.folds.resize(params.folds);
    for (std::size_t fold = 0; fold < params.folds; ++fold) {
        Rng rng(derive_seed(params.seed, fold));
        std::vector<std::size_t> idx(years);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        for (std::size_t i = 0; i < params.holdout_years; ++i) std::swap(idx[i], idx[i + rng.below(years - i)]);
        std::vector<std::size_t> held(idx.begin(), idx.begin() + static_cast<long>(params.holdout_years));
        std::vector<std::size_t> train(idx.begin() + static_cast<long>(params.holdout_years), idx.end());
        std::sort(held.begin(), held.end());
        std::sort(train.begin(), train.end());

        auto cfg = params.objective;
        cfg.years = train;
        const auto fit = fit_weights(market, cfg, params.search);

        auto test_cfg = params.objective;
        test_cfg.years = held;
        const Objective test(market, test_cfg);
        const auto errors = test.replicate_errors(MatchModel::logistic(fit.weights), test_cfg.seed, test_cfg.replicates);

        auto& out = report.folds[fold];
        out.held_out = held;
        out.weights = fit.weights;
        out.train_err = fit.err;
        out.test_err = mean_of(errors);
    }

    for (auto f : report.features) {
        std::vector<double> values;
        for (const auto& fold : report.folds) values.push_back(fold.weights.w[slot(f)]);
        const double m = mean_of(values);
        double ss = 0.0;
        for (double v : values) ss += (v - m) * (v - m);
        report.weight_mean.push_back(m);
        report.weight_std.push_back(values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0);
    }
    return report;
}

double papers_equivalent_to_gender(const Weights& w, const SubfieldStats& stats) {
    const double wp = w.w[slot(Feature::Productivity)];
    if (wp == 0.0) throw NumericalError("productivity weight is zero; gender cannot be expressed in papers");
    return std::abs(w.w[slot(Feature::Female)] / wp) * stats.mean_sigma();
}

}  // namespace fhire
