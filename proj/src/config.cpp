#include "fhire/config.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "fhire/error.hpp"
#include "fhire/rng.hpp"

namespace fhire {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
    std::filesystem::path p(value);
    if (p.is_relative() && !base.empty()) p = base / p;
    return p;
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

void Config::merge(const nlohmann::json& j, const std::filesystem::path& base) {
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "data_dir") {
            const auto dir = resolve(base, value.get<std::string>());
            institutions = dir / "institutions.csv";
            faculty = dir / "faculty.csv";
            publications = dir / "publications.csv";
        } else if (key == "institutions") {
            institutions = resolve(base, value.get<std::string>());
        } else if (key == "faculty") {
            faculty = resolve(base, value.get<std::string>());
        } else if (key == "publications") {
            publications = resolve(base, value.get<std::string>());
        } else if (key == "region_map") {
            if (value.is_null()) region_map.reset();
            else region_map = resolve(base, value.get<std::string>());
        } else if (key == "out") {
            out = resolve(base, value.get<std::string>());
        } else if (key == "seed") {
            seed = value.get<std::uint64_t>();
        } else if (key == "mvr_restarts") {
            mvr_restarts = value.get<std::size_t>();
        } else if (key == "mvr_sweeps") {
            mvr_sweeps = value.get<std::size_t>();
        } else if (key == "mvr_samples") {
            mvr_samples = value.get<std::size_t>();
        } else if (key == "topics") {
            topics = value.get<int>();
        } else if (key == "alpha") {
            alpha = value.get<double>();
        } else if (key == "beta") {
            beta = value.get<double>();
        } else if (key == "lda_iterations") {
            lda_iterations = value.get<int>();
        } else if (key == "features") {
            features.clear();
            for (const auto& f : value) features.push_back(parse_feature(f.get<std::string>()));
        } else if (key == "lambda") {
            lambda = value.get<double>();
        } else if (key == "replicates") {
            replicates = value.get<std::size_t>();
        } else if (key == "eval_replicates") {
            eval_replicates = value.get<std::size_t>();
        } else if (key == "nm_restarts") {
            nm_restarts = value.get<std::size_t>();
        } else if (key == "nm_tol") {
            nm_tol = value.get<double>();
        } else if (key == "nm_max_iter") {
            nm_max_iter = value.get<std::size_t>();
        } else if (key == "bias") {
            bias = value.get<bool>();
        } else if (key == "greedy") {
            greedy = value.get<bool>();
        } else if (key == "runs") {
            runs = value.get<std::size_t>();
        } else if (key == "top_institutions") {
            top_institutions = value.get<std::size_t>();
        } else {
            throw std::invalid_argument("unknown config key: " + key);
        }
    }
}

nlohmann::json Config::to_json() const {
    nlohmann::json j;
    j["institutions"] = institutions.string();
    j["faculty"] = faculty.string();
    j["publications"] = publications.string();
    j["region_map"] = region_map ? nlohmann::json(region_map->string()) : nlohmann::json(nullptr);
    j["out"] = out.string();
    j["seed"] = seed;
    j["mvr_restarts"] = mvr_restarts;
    j["mvr_sweeps"] = mvr_sweeps;
    j["mvr_samples"] = mvr_samples;
    j["topics"] = topics;
    j["alpha"] = alpha;
    j["beta"] = beta;
    j["lda_iterations"] = lda_iterations;
    auto& fs = j["features"] = nlohmann::json::array();
    for (auto f : features) fs.push_back(to_string(f));
    j["lambda"] = lambda;
    j["replicates"] = replicates;
    j["eval_replicates"] = eval_replicates;
    j["nm_restarts"] = nm_restarts;
    j["nm_tol"] = nm_tol;
    j["nm_max_iter"] = nm_max_iter;
    j["bias"] = bias;
    j["greedy"] = greedy;
    j["runs"] = runs;
    j["top_institutions"] = top_institutions;
    return j;
}

std::string Config::hash() const {
    auto j = to_json();
    j.erase("out");
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
    return buf;
}

std::filesystem::path Config::run_dir() const { return out / ("run-" + hash()); }

MvrParams Config::mvr_params() const {
    return {mvr_restarts, mvr_sweeps, mvr_samples, substream_seed(seed, "ranking")};
}

LdaParams Config::lda_params() const {
    return {topics, alpha, beta, lda_iterations, substream_seed(seed, "lda")};
}

NelderMeadParams Config::search_params() const {
    NelderMeadParams p;
    p.tol = nm_tol;
    p.max_iter = nm_max_iter;
    p.restarts = nm_restarts;
    p.seed = substream_seed(seed, "fit-search");
    return p;
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError(DataErrorKind::MissingFile, "cannot open config " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(DataErrorKind::BadField, "config " + path.string() + ": " + e.what());
    }
    Config config;
    config.merge(j, path.parent_path());
    return config;
}

}  // namespace fhire
