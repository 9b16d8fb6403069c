#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "fhire/market.hpp"
#include "fhire/productivity.hpp"

namespace fhire {

// Mean squared difference of normalized ranks.
double placement_error(std::span<const double> observed, std::span<const double> simulated);

// Over `candidates` (all candidates when empty). Throws DataError(CandidateMismatch)
// if the run leaves any of them unplaced.
double placement_error(const Market& market, const SimulationRun& run,
                       std::span<const std::size_t> candidates = {});

struct ObjectiveConfig {
    std::vector<Feature> features;  // active mask, in slot order of the search vector
    double lambda = 0.05;
    std::size_t replicates = 25;
    std::uint64_t seed = 0;
    std::vector<std::size_t> years;  // year indices to simulate and score; empty = all
    bool bias = false;               // appends an intercept to the search vector
};

// Regularized mean placement error of the logistic model. Replicate r always uses the
// stream derived from (seed, r), so the value is a deterministic function of w.
class Objective {
public:
    Objective(const Market& market, ObjectiveConfig config);

    std::size_t dimension() const { return config_.features.size() + (config_.bias ? 1 : 0); }
    const ObjectiveConfig& config() const { return config_; }

    Weights expand(std::span<const double> x) const;
    double operator()(std::span<const double> x) const;

    // Unpenalized placement error of each replicate stream seeded from `seed`.
    std::vector<double> replicate_errors(const MatchModel& model, std::uint64_t seed,
                                         std::size_t replicates) const;
    double penalty(const Weights& w) const;

private:
    const Market* market_;
    ObjectiveConfig config_;
    std::vector<std::size_t> scored_candidates_;
};

double objective_value(const Market& market, const Weights& w, const ObjectiveConfig& config);

struct NelderMeadParams {
    double tol = 1e-6;
    std::size_t max_iter = 0;  // 0 means 500 * dimension
    std::size_t restarts = 5;
    double initial_step = 1.0;
    std::uint64_t seed = 0;
};

struct FitResult {
    std::vector<double> x;
    double value = 0.0;
    std::vector<std::pair<std::size_t, double>> trace;  // (iteration, best value so far)
    std::size_t evaluations = 0;
};

using ScalarFunction = std::function<double(std::span<const double>)>;

// Reflection 1, expansion 2, contraction 0.5, shrink 0.5. A pass stops when the spread of
// simplex values drops below tol or max_iter is reached; each restart rebuilds the simplex
// around the best point so far with a seeded perturbation of the step sizes.
FitResult nelder_mead(const ScalarFunction& f, std::vector<double> x0, const NelderMeadParams& params);

struct WeightFit {
    Weights weights;
    double err = 0.0;
    FitResult search;
};

WeightFit fit_weights(const Market& market, const ObjectiveConfig& config,
                      const NelderMeadParams& params, const Weights& start = {});

struct GreedyParams {
    std::vector<Feature> features = {kAllFeatures.begin(), kAllFeatures.end()};
    double lambda = 0.05;
    std::size_t fit_replicates = 25;
    // Replicates for the per-model error samples behind the significance test. They use a
    // stream separate from the fitting stream.
    std::size_t eval_replicates = 25;
    std::uint64_t seed = 0;
    NelderMeadParams search;
};

struct GreedyStage {
    Feature feature = Feature::RankDiff;
    double err_before = 0.0;  // fitted objective of the previous model (empty model first)
    double err_after = 0.0;
    double pct_reduction_vs_step = 0.0;  // based on mean evaluation error
    double p_value = 1.0;
    Weights weights;
    std::vector<double> eval_errors;
};

struct FeatureSelectionTrace {
    double step_error = 0.0;
    std::vector<double> step_eval_errors;
    // The logistic model with no features, which the first stage is tested against.
    std::vector<double> empty_eval_errors;
    std::vector<GreedyStage> stages;
};

// Adds one feature at a time, keeping whichever lowers the fitted error most; gender
// always enters last. Each stage is compared with the previous model (the featureless
// logistic model for the first stage) by a two-sided Mann-Whitney test on replicate errors.
// Percent reductions are relative to the step model.
FeatureSelectionTrace greedy_select(const Market& market, const GreedyParams& params);

struct CvParams {
    std::size_t folds = 5;
    std::size_t holdout_years = 5;
    std::uint64_t seed = 0;
    ObjectiveConfig objective;  // years is ignored
    NelderMeadParams search;
};

struct CvFold {
    std::vector<std::size_t> held_out;  // year indices
    Weights weights;
    double train_err = 0.0;
    double test_err = 0.0;  // unpenalized mean placement error on held-out years
};

struct CvReport {
    std::vector<CvFold> folds;
    std::vector<Feature> features;
    std::vector<double> weight_mean;
    std::vector<double> weight_std;
};

// Throws DataError(EmptyInput) with fewer than holdout_years + 1 distinct years.
CvReport cross_validate(const Market& market, const CvParams& params);

// Extra papers that offset the gender weight through the productivity weight.
// Throws NumericalError if the productivity weight is zero.
double papers_equivalent_to_gender(const Weights& w, const SubfieldStats& stats);

}  // namespace fhire
