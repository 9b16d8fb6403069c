#include "fhire/prestige.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "fhire/error.hpp"
#include "fhire/parallel.hpp"
#include "fhire/rng.hpp"

namespace fhire {

std::vector<std::size_t> Ordering::positions() const {
    std::vector<std::size_t> pos(order.size());
    for (std::size_t p = 0; p < order.size(); ++p) pos.at(order[p]) = p;
    return pos;
}

bool Ordering::is_permutation(std::size_t n) const {
    if (order.size() != n) return false;
    std::vector<bool> seen(n, false);
    for (auto v : order) {
        if (v >= n || seen[v]) return false;
        seen[v] = true;
    }
    return true;
}

ViolationCounter::ViolationCounter(const HiringNetwork& network)
    : n_(network.size()), counts_(network.size() * network.size(), 0) {
    for (const auto& e : network.edges()) {
        if (e.self_loop()) continue;
        ++counts_[e.source * n_ + e.target];
        ++non_self_edges_;
    }
}

std::size_t ViolationCounter::violations(const Ordering& ordering) const {
    // An edge u -> v violates when v is placed above u.
    std::size_t total = 0;
    const auto& order = ordering.order;
    for (std::size_t hi = 0; hi < n_; ++hi) {
        for (std::size_t lo = hi + 1; lo < n_; ++lo) total += static_cast<std::size_t>(count(order[lo], order[hi]));
    }
    return total;
}

long ViolationCounter::swap_delta(const std::vector<std::size_t>& order, std::size_t i, std::size_t j) const {
    const std::size_t a = order[i];
    const std::size_t b = order[j];
    long delta = static_cast<long>(count(a, b)) - count(b, a);
    for (std::size_t k = i + 1; k < j; ++k) {
        const std::size_t m = order[k];
        delta += count(a, m) - count(m, a);
        delta += count(m, b) - count(b, m);
    }
    return delta;
}

std::size_t count_violations(const HiringNetwork& network, const Ordering& ordering) {
    if (!ordering.is_permutation(network.size())) {
        throw std::invalid_argument("ordering is not a permutation of the network's nodes");
    }
    const auto pos = ordering.positions();
    std::size_t total = 0;
    for (const auto& e : network.edges()) {
        if (!e.self_loop() && pos[e.target] < pos[e.source]) ++total;
    }
    return total;
}

namespace {

struct RestartResult {
    std::vector<MvrSample> samples;
    std::size_t best = std::numeric_limits<std::size_t>::max();
};

RestartResult run_restart(const ViolationCounter& counter, std::size_t sweeps, std::size_t wanted,
                          std::uint64_t seed) {
    const std::size_t n = counter.size();
    Rng rng(seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    RestartResult result;
    auto current = counter.violations(Ordering{order});
    result.best = current;
    if (n < 2) {
        result.samples.assign(wanted, MvrSample{Ordering{order}, current});
        return result;
    }

    // Uphill moves are accepted with probability uphill^delta. Conditioned on the minimum
    // level the chain's stationary law is uniform over the minimal orderings, and the small
    // uphill rate lets it cross between orderings that no chain of swaps at that level joins.
    // A state has on the order of N^2 uphill neighbours, so the rate falls like 1/N^2 on large
    // networks to keep the chain near the minimum. Half of all steps are idle (aperiodicity).
    auto best_order = order;
    const double nd = std::max(2.0, static_cast<double>(n));
    const double uphill = std::min(1.0 / nd, 8.0 / (nd * nd));
    const std::size_t budget = 40 * wanted * sweeps;
    std::size_t since_sample = 0;
    for (std::size_t step = 0; step < budget && result.samples.size() < wanted; ++step) {
        if (rng.uniform01() < 0.5) {
            std::size_t i, j;
            if (rng.uniform01() < 0.5) {
                i = rng.below(n - 1);
                j = i + 1;
            } else {
                i = rng.below(n);
                j = rng.below(n - 1);
                if (j >= i) ++j;
                if (i > j) std::swap(i, j);
            }
            const long delta = counter.swap_delta(order, i, j);
            if (delta <= 0 || rng.uniform01() < std::pow(uphill, static_cast<double>(delta))) {
                std::swap(order[i], order[j]);
                current = static_cast<std::size_t>(static_cast<long>(current) + delta);
                if (current < result.best) {
                    result.best = current;
                    best_order = order;
                    result.samples.clear();
                    since_sample = 0;
                }
            }
        }
        if (++since_sample >= sweeps) {
            since_sample = 0;
            if (current == result.best) result.samples.push_back({Ordering{order}, current});
        }
    }
    if (result.samples.empty()) result.samples.push_back({Ordering{best_order}, result.best});
    return result;
}

}  // namespace

std::vector<MvrSample> sample_mvr(const HiringNetwork& network, const MvrParams& params) {
    if (network.size() == 0) throw DataError(DataErrorKind::EmptyInput, "network has no nodes");
    const ViolationCounter counter(network);
    const std::size_t n = network.size();
    const std::size_t sweeps = params.sweeps ? params.sweeps : std::max<std::size_t>(1, n * n);
    const std::size_t restarts = std::max<std::size_t>(1, params.restarts);
    const std::size_t wanted = std::max<std::size_t>(1, params.samples);

    std::vector<RestartResult> results(restarts);
    parallel_for(restarts, [&](std::size_t r) {
        results[r] = run_restart(counter, sweeps, wanted, derive_seed(params.seed, r));
    });

    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (const auto& r : results) best = std::min(best, r.best);
    std::vector<MvrSample> out;
    for (auto& r : results) {
        if (r.best != best) continue;
        for (auto& s : r.samples) out.push_back(std::move(s));
    }
    return out;
}

PrestigeRanking brute_force_mvr(const HiringNetwork& network) {
    const std::size_t n = network.size();
    if (n == 0) throw DataError(DataErrorKind::EmptyInput, "network has no nodes");
    if (n > kBruteForceMaxNodes) {
        throw std::invalid_argument("brute_force_mvr supports at most " + std::to_string(kBruteForceMaxNodes) +
                                    " nodes");
    }
    const ViolationCounter counter(network);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    std::size_t best = std::numeric_limits<std::size_t>::max();
    std::vector<double> position_sum(n, 0.0);
    std::size_t count = 0;
    do {
        const auto v = counter.violations(Ordering{order});
        if (v > best) continue;
        if (v < best) {
            best = v;
            std::fill(position_sum.begin(), position_sum.end(), 0.0);
            count = 0;
        }
        for (std::size_t p = 0; p < n; ++p) position_sum[order[p]] += static_cast<double>(p + 1);
        ++count;
    } while (std::next_permutation(order.begin(), order.end()));

    PrestigeRanking ranking;
    ranking.rank.resize(n);
    for (std::size_t u = 0; u < n; ++u) ranking.rank[u] = position_sum[u] / static_cast<double>(count);
    ranking.min_violations = best;
    ranking.violation_fraction =
        counter.non_self_edges() ? static_cast<double>(best) / static_cast<double>(counter.non_self_edges()) : 0.0;
    ranking.samples = count;
    return ranking;
}

PrestigeRanking mean_rank(const std::vector<MvrSample>& samples, std::size_t non_self_edges) {
    if (samples.empty()) throw DataError(DataErrorKind::EmptyInput, "no MVR samples");
    const std::size_t n = samples.front().ordering.order.size();
    const std::size_t violations = samples.front().violations;
    std::vector<double> position_sum(n, 0.0);
    for (const auto& s : samples) {
        if (s.violations != violations) throw std::invalid_argument("samples differ in violation count");
        if (!s.ordering.is_permutation(n)) throw std::invalid_argument("sample is not a permutation");
        for (std::size_t p = 0; p < n; ++p) position_sum[s.ordering.order[p]] += static_cast<double>(p + 1);
    }
    PrestigeRanking ranking;
    ranking.rank.resize(n);
    for (std::size_t u = 0; u < n; ++u) ranking.rank[u] = position_sum[u] / static_cast<double>(samples.size());
    ranking.min_violations = violations;
    ranking.violation_fraction =
        non_self_edges ? static_cast<double>(violations) / static_cast<double>(non_self_edges) : 0.0;
    ranking.samples = samples.size();
    return ranking;
}

double rank_difference(const PrestigeRanking& ranking, std::size_t doctoral, std::size_t hiring) {
    if (doctoral >= ranking.size() || hiring >= ranking.size()) {
        throw DataError(DataErrorKind::UnknownInstitution, "institution index outside the ranking");
    }
    return (ranking.rank[hiring] - ranking.rank[doctoral]) / static_cast<double>(ranking.size());
}

}  // namespace fhire
