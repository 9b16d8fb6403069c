#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fhire/core_data.hpp"

namespace fhire {

// order[p] is the node at position p (0 = most prestigious).
struct Ordering {
    std::vector<std::size_t> order;

    std::vector<std::size_t> positions() const;
    bool is_permutation(std::size_t n) const;
};

struct PrestigeRanking {
    std::vector<double> rank;  // mean position, 1 = best, indexed by node
    std::size_t min_violations = 0;
    double violation_fraction = 0.0;
    std::size_t samples = 0;

    std::size_t size() const { return rank.size(); }
    // rank / N, in [1/N, 1].
    double normalized(std::size_t node) const { return rank.at(node) / static_cast<double>(rank.size()); }
};

// Dense edge-count matrix without self-loops.
class ViolationCounter {
public:
    explicit ViolationCounter(const HiringNetwork& network);

    std::size_t size() const { return n_; }
    std::size_t non_self_edges() const { return non_self_edges_; }
    int count(std::size_t from, std::size_t to) const { return counts_[from * n_ + to]; }

    std::size_t violations(const Ordering& ordering) const;
    // Change in violations if the nodes at positions i < j are exchanged.
    long swap_delta(const std::vector<std::size_t>& order, std::size_t i, std::size_t j) const;

private:
    std::size_t n_;
    std::size_t non_self_edges_ = 0;
    std::vector<int> counts_;
};

// Non-self-loop edges (u, v), with multiplicity, where v sits above u.
// Throws std::invalid_argument if the ordering is not a permutation of the nodes.
std::size_t count_violations(const HiringNetwork& network, const Ordering& ordering);

struct MvrParams {
    std::size_t restarts = 10;
    std::size_t sweeps = 0;  // proposals between recorded samples; 0 means N^2
    std::size_t samples = 100;  // per restart
    std::uint64_t seed = 0;
};

struct MvrSample {
    Ordering ordering;
    std::size_t violations = 0;
};

// Zero-temperature Metropolis over permutations. Returns only orderings at the
// smallest violation count reached by any restart.
std::vector<MvrSample> sample_mvr(const HiringNetwork& network, const MvrParams& params);

inline constexpr std::size_t kBruteForceMaxNodes = 8;

// Exact mean rank over every minimum-violation ordering. N <= 8.
PrestigeRanking brute_force_mvr(const HiringNetwork& network);

// Average position over the samples. All samples must share one violation count.
PrestigeRanking mean_rank(const std::vector<MvrSample>& samples, std::size_t non_self_edges);

// (rank(v) - rank(u)) / N. Positive when the hire moved down the hierarchy.
double rank_difference(const PrestigeRanking& ranking, std::size_t doctoral, std::size_t hiring);

}  // namespace fhire
