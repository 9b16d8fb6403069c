#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fhire/fitting.hpp"
#include "fhire/market.hpp"
#include "fhire/prestige.hpp"
#include "fhire/productivity.hpp"

namespace fhire {

struct Config {
    std::filesystem::path institutions = "institutions.csv";
    std::filesystem::path faculty = "faculty.csv";
    std::filesystem::path publications = "publications.csv";
    std::optional<std::filesystem::path> region_map;  // institution_id,region overrides
    std::filesystem::path out = "out";

    std::uint64_t seed = 1;

    // ranking
    std::size_t mvr_restarts = 10;
    std::size_t mvr_sweeps = 0;
    std::size_t mvr_samples = 100;

    // topics
    int topics = 10;
    double alpha = 5.0;
    double beta = 0.01;
    int lda_iterations = 1000;

    // fit
    std::vector<Feature> features = {kAllFeatures.begin(), kAllFeatures.end()};
    double lambda = 0.05;
    std::size_t replicates = 25;
    std::size_t eval_replicates = 25;
    std::size_t nm_restarts = 5;
    double nm_tol = 1e-6;
    std::size_t nm_max_iter = 0;
    bool bias = false;
    bool greedy = true;

    // simulate / check / analyze
    std::size_t runs = 100;
    std::size_t top_institutions = 20;

    // Reads keys present in `j`; others keep their current value. Relative paths are
    // resolved against `base`. Unknown keys are an error.
    void merge(const nlohmann::json& j, const std::filesystem::path& base = {});
    nlohmann::json to_json() const;
    // FNV-1a over the canonical JSON without the output directory, as 16 hex digits.
    std::string hash() const;
    // out / "run-<hash>"
    std::filesystem::path run_dir() const;

    MvrParams mvr_params() const;
    LdaParams lda_params() const;
    NelderMeadParams search_params() const;
};

// Reads a JSON config file on top of the defaults.
Config load_config(const std::filesystem::path& path);

}  // namespace fhire
