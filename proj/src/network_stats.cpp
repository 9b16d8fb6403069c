#include "fhire/network_stats.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

#include "fhire/parallel.hpp"

namespace fhire {

const std::array<const char*, kStatisticCount> kStatisticNames = {
    "mean_geodesic_path_length", "mean_local_clustering_coefficient", "pct_reciprocated_hires",
    "pct_reciprocating_institutions", "pct_self_hires", "pct_placements_within_same_region"};

namespace {

// Sorted neighbour lists of the undirected simple graph, self-loops dropped.
std::vector<std::vector<std::size_t>> simple_projection(const HiringNetwork& network) {
    std::vector<std::vector<std::size_t>> adj(network.size());
    for (const auto& e : network.edges()) {
        if (e.self_loop()) continue;
        adj[e.source].push_back(e.target);
        adj[e.target].push_back(e.source);
    }
    for (auto& nbrs : adj) {
        std::sort(nbrs.begin(), nbrs.end());
        nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    }
    return adj;
}

// Unordered pairs {u, v}, u != v, with edges in both directions.
std::set<std::pair<std::size_t, std::size_t>> reciprocated_pairs(const HiringNetwork& network) {
    std::set<std::pair<std::size_t, std::size_t>> arcs;
    for (const auto& e : network.edges()) {
        if (!e.self_loop()) arcs.emplace(e.source, e.target);
    }
    std::set<std::pair<std::size_t, std::size_t>> pairs;
    for (const auto& [u, v] : arcs) {
        if (u < v && arcs.contains({v, u})) pairs.emplace(u, v);
    }
    return pairs;
}

}  // namespace

double mean_geodesic(const HiringNetwork& network) {
    const auto adj = simple_projection(network);
    const std::size_t n = adj.size();
    double total = 0.0;
    double pairs = 0.0;
    std::vector<int> dist(n);
    std::queue<std::size_t> frontier;
    for (std::size_t s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        dist[s] = 0;
        frontier.push(s);
        while (!frontier.empty()) {
            const auto u = frontier.front();
            frontier.pop();
            for (auto v : adj[u]) {
                if (dist[v] >= 0) continue;
                dist[v] = dist[u] + 1;
                total += dist[v];
                pairs += 1.0;
                frontier.push(v);
            }
        }
    }
    return pairs > 0 ? total / pairs : 0.0;
}

double mean_clustering(const HiringNetwork& network) {
    const auto adj = simple_projection(network);
    const std::size_t n = adj.size();
    if (n == 0) return 0.0;
    double sum = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
        const auto& nb = adj[u];
        const std::size_t k = nb.size();
        if (k < 2) continue;
        std::size_t links = 0;
        for (std::size_t i = 0; i < k; ++i) {
            const auto& ni = adj[nb[i]];
            for (std::size_t j = i + 1; j < k; ++j) {
                if (std::binary_search(ni.begin(), ni.end(), nb[j])) ++links;
            }
        }
        sum += 2.0 * static_cast<double>(links) / static_cast<double>(k * (k - 1));
    }
    return sum / static_cast<double>(n);
}

double pct_reciprocated_hires(const HiringNetwork& network) {
    const auto pairs = reciprocated_pairs(network);
    std::size_t non_self = 0;
    std::size_t reciprocated = 0;
    for (const auto& e : network.edges()) {
        if (e.self_loop()) continue;
        ++non_self;
        const auto key = std::minmax(e.source, e.target);
        if (pairs.contains({key.first, key.second})) ++reciprocated;
    }
    return non_self ? 100.0 * static_cast<double>(reciprocated) / static_cast<double>(non_self) : 0.0;
}

double pct_reciprocating_institutions(const HiringNetwork& network) {
    if (network.size() == 0) return 0.0;
    std::vector<bool> member(network.size(), false);
    for (const auto& [u, v] : reciprocated_pairs(network)) member[u] = member[v] = true;
    const auto count = std::count(member.begin(), member.end(), true);
    return 100.0 * static_cast<double>(count) / static_cast<double>(network.size());
}

double pct_self_hires(const HiringNetwork& network) {
    if (network.edges().empty()) return 0.0;
    const auto count = std::count_if(network.edges().begin(), network.edges().end(),
                                     [](const HireEdge& e) { return e.self_loop(); });
    return 100.0 * static_cast<double>(count) / static_cast<double>(network.edges().size());
}

double pct_same_region(const HiringNetwork& network) {
    if (network.edges().empty()) return 0.0;
    const auto& nodes = network.nodes();
    const auto count = std::count_if(network.edges().begin(), network.edges().end(), [&](const HireEdge& e) {
        return nodes[e.source].region == nodes[e.target].region;
    });
    return 100.0 * static_cast<double>(count) / static_cast<double>(network.edges().size());
}

std::array<double, kStatisticCount> NetworkStats::values() const {
    return {mean_geodesic, mean_clustering, pct_reciprocated_hires, pct_reciprocating_institutions, pct_self_hires,
            pct_same_region};
}

NetworkStats network_stats(const HiringNetwork& network) {
    NetworkStats s;
    s.mean_geodesic = fhire::mean_geodesic(network);
    s.mean_clustering = fhire::mean_clustering(network);
    s.pct_reciprocated_hires = fhire::pct_reciprocated_hires(network);
    s.pct_reciprocating_institutions = fhire::pct_reciprocating_institutions(network);
    s.pct_self_hires = fhire::pct_self_hires(network);
    s.pct_same_region = fhire::pct_same_region(network);
    return s;
}

CheckReport check_report(const HiringNetwork& observed, const Market& market, const std::vector<MatchModel>& models,
                         std::size_t n_runs, std::uint64_t seed) {
    if (n_runs < 2) throw std::invalid_argument("model checking needs at least two runs");
    CheckReport report;
    report.observed = network_stats(observed);
    report.runs = n_runs;
    for (std::size_t m = 0; m < models.size(); ++m) {
        std::vector<std::array<double, kStatisticCount>> values(n_runs);
        const auto model_seed = derive_seed(seed, m);
        parallel_for(n_runs, [&](std::size_t r) {
            const auto run = simulate_history(market, models[m], derive_seed(model_seed, r));
            values[r] = network_stats(simulated_network(market, run)).values();
        });
        SimulatedSummary summary;
        summary.variant = models[m].variant;
        for (std::size_t k = 0; k < kStatisticCount; ++k) {
            double mean = 0.0;
            for (const auto& v : values) mean += v[k];
            mean /= static_cast<double>(n_runs);
            double ss = 0.0;
            for (const auto& v : values) ss += (v[k] - mean) * (v[k] - mean);
            const double sd = std::sqrt(ss / static_cast<double>(n_runs - 1));
            summary.mean[k] = mean;
            summary.std_error[k] = sd / std::sqrt(static_cast<double>(n_runs));
        }
        report.models.push_back(summary);
    }
    return report;
}

}  // namespace fhire
