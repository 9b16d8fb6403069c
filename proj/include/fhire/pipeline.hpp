#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fhire/analysis.hpp"
#include "fhire/config.hpp"
#include "fhire/core_data.hpp"
#include "fhire/fitting.hpp"
#include "fhire/market.hpp"
#include "fhire/network_stats.hpp"
#include "fhire/prestige.hpp"
#include "fhire/productivity.hpp"

namespace fhire {

// A stage failure; exit_code follows the CLI convention (2 data, 3 numerical).
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, int exit_code, const std::string& what)
        : std::runtime_error("[" + stage + "] " + what), stage_(std::move(stage)), exit_code_(exit_code) {}
    const std::string& stage() const noexcept { return stage_; }
    int exit_code() const noexcept { return exit_code_; }

private:
    std::string stage_;
    int exit_code_;
};

struct IngestData {
    std::vector<Institution> institutions;
    std::vector<FacultyRecord> faculty;  // cohort only, publication counts assigned
    std::vector<Publication> publications;
    HiringNetwork network;
    std::size_t dropped_year = 0;
    std::size_t dropped_institution = 0;
};

// Region overrides from an institution_id,region file.
void apply_region_map(std::vector<Institution>& institutions, const std::filesystem::path& path);

// Runs stages on demand. Each stage writes its artifacts into config.run_dir(); a later
// stage reuses an earlier stage's artifacts from that directory when they exist, and
// computes them otherwise.
class Pipeline {
public:
    explicit Pipeline(Config config);

    const Config& config() const { return config_; }
    const std::filesystem::path& dir() const { return dir_; }

    const IngestData& ingest();
    const PrestigeRanking& rank();
    const std::vector<FacultyRecord>& topics();  // faculty with topic mixes and z-scores
    const Weights& fit();
    const Market& market();

    // Writes placements_<run>.csv for `runs` histories of `model` (fitted logistic by default).
    std::vector<SimulationRun> simulate(std::optional<MatchModel> model = {}, std::optional<std::size_t> runs = {});
    CheckReport check();
    void analyze_institutions();
    void analyze_candidates();
    void analyze_parity();
    void analyze_descriptives();
    ParityForecast forecast();

    // Every stage in order.
    void run_all();

private:
    template <class F>
    auto stage(const char* name, F&& body) -> decltype(body());

    std::vector<SimulationRun> logistic_runs();

    Config config_;
    std::filesystem::path dir_;
    std::optional<IngestData> ingest_;
    std::optional<PrestigeRanking> ranking_;
    std::optional<std::vector<FacultyRecord>> scored_;
    std::optional<Weights> weights_;
    std::optional<Market> market_;
    std::optional<std::vector<SimulationRun>> runs_;
};

// Reads weights from a fit.json file.
Weights load_weights(const std::filesystem::path& path);

}  // namespace fhire
