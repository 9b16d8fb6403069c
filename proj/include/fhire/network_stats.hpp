#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fhire/core_data.hpp"
#include "fhire/market.hpp"

namespace fhire {

// Geodesic and clustering use the undirected simple projection without self-loops.
double mean_geodesic(const HiringNetwork& network);
double mean_clustering(const HiringNetwork& network);

double pct_reciprocated_hires(const HiringNetwork& network);
// Institutions in at least one mutually hiring pair, over all institutions.
double pct_reciprocating_institutions(const HiringNetwork& network);
double pct_self_hires(const HiringNetwork& network);
double pct_same_region(const HiringNetwork& network);

inline constexpr std::size_t kStatisticCount = 6;

struct NetworkStats {
    double mean_geodesic = 0.0;
    double mean_clustering = 0.0;
    double pct_reciprocated_hires = 0.0;
    double pct_reciprocating_institutions = 0.0;
    double pct_self_hires = 0.0;
    double pct_same_region = 0.0;

    std::array<double, kStatisticCount> values() const;
};

extern const std::array<const char*, kStatisticCount> kStatisticNames;

NetworkStats network_stats(const HiringNetwork& network);

struct SimulatedSummary {
    MatchVariant variant = MatchVariant::Uniform;
    std::array<double, kStatisticCount> mean{};
    std::array<double, kStatisticCount> std_error{};
};

struct CheckReport {
    NetworkStats observed;
    std::vector<SimulatedSummary> models;
    std::size_t runs = 0;
};

// Observed statistics plus mean and standard error over n_runs simulated histories per model.
CheckReport check_report(const HiringNetwork& observed, const Market& market,
                         const std::vector<MatchModel>& models, std::size_t n_runs, std::uint64_t seed);

}  // namespace fhire
