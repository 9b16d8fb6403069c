#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fhire/config.hpp"
#include "fhire/error.hpp"
#include "fhire/pipeline.hpp"
#include "fhire/synthetic.hpp"

namespace fs = std::filesystem;
using namespace fhire;

namespace {

struct Flags {
    std::string config;
    std::string data;
    std::uint64_t seed = 0;
    std::string out;
    // fit
    std::vector<std::string> features;
    double lambda = 0.0;
    std::size_t replicates = 0;
    bool greedy = false;
    bool no_greedy = false;
    // simulate / check
    std::string model = "logistic";
    std::string weights;
    std::size_t runs = 0;
    // analyze
    std::string target = "all";
    // synth
    std::size_t synth_institutions = 0;
    int first_year = 0;
    int last_year = 0;
    double hires_per_year = 0.0;
    bool full_scale = false;
};

Config build_config(const Flags& f, const CLI::App& app, const CLI::App* fit_cmd, const CLI::App* sim_cmd,
                    const CLI::App* check_cmd) {
    Config c = f.config.empty() ? Config{} : load_config(f.config);
    if (app.count("--data")) c.merge({{"data_dir", f.data}});
    if (app.count("--seed")) c.seed = f.seed;
    if (app.count("--out")) c.out = f.out;
    if (fit_cmd->count("--features")) {
        c.features.clear();
        for (const auto& name : f.features) c.features.push_back(parse_feature(name));
    }
    if (fit_cmd->count("--lambda")) c.lambda = f.lambda;
    if (fit_cmd->count("--replicates")) c.replicates = f.replicates;
    if (f.greedy) c.greedy = true;
    if (f.no_greedy) c.greedy = false;
    if (sim_cmd->count("--runs")) c.runs = f.runs;
    if (check_cmd->count("--runs")) c.runs = f.runs;
    return c;
}

int run_synth(const Flags& f, const CLI::App& app, const CLI::App& cmd) {
    SyntheticSpec spec = f.full_scale ? SyntheticSpec::full_scale() : SyntheticSpec{};
    if (cmd.count("--institutions")) spec.institutions = f.synth_institutions;
    if (cmd.count("--first-year")) spec.first_year = f.first_year;
    if (cmd.count("--last-year")) spec.last_year = f.last_year;
    if (cmd.count("--hires-per-year")) spec.hires_per_year = f.hires_per_year;
    if (!f.full_scale) spec.w_true = SyntheticSpec::full_scale().w_true;
    const std::uint64_t seed = app.count("--seed") ? f.seed : 1;
    const fs::path dir = f.out.empty() ? fs::path("synthetic") : fs::path(f.out);
    const auto bundle = generate_synthetic(spec, seed);
    bundle.write(dir);
    std::cout << "wrote " << bundle.faculty.size() << " faculty across " << bundle.institutions.size()
              << " institutions to " << dir.string() << " (violation fraction "
              << bundle.truth.violation_fraction << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Faculty hiring market analysis"};
    app.require_subcommand(1);
    Flags f;
    app.add_option("--config", f.config, "JSON configuration file")->check(CLI::ExistingFile);
    app.add_option("--data", f.data, "directory holding institutions.csv, faculty.csv, publications.csv");
    app.add_option("--seed", f.seed, "master seed");
    app.add_option("--out", f.out, "output root (synth: bundle directory)");

    auto* ingest = app.add_subcommand("ingest", "load and filter the input tables");
    auto* rank = app.add_subcommand("rank", "minimum violation prestige ranking");
    auto* topics = app.add_subcommand("topics", "topic model and productivity scores");
    auto* fit = app.add_subcommand("fit", "fit matching weights");
    fit->add_option("--features", f.features, "feature mask")->delimiter(',');
    fit->add_option("--lambda", f.lambda, "L1 penalty");
    fit->add_option("--replicates", f.replicates, "simulations per objective evaluation");
    fit->add_flag("--greedy", f.greedy, "greedy forward feature selection");
    fit->add_flag("--no-greedy", f.no_greedy, "fit the full mask at once");
    auto* simulate = app.add_subcommand("simulate", "simulate hiring histories");
    simulate->add_option("--model", f.model, "uniform, step or logistic")
        ->check(CLI::IsMember({"uniform", "step", "logistic"}));
    simulate->add_option("--weights", f.weights, "fit.json with logistic weights")->check(CLI::ExistingFile);
    simulate->add_option("--runs", f.runs, "number of histories");
    auto* check = app.add_subcommand("check", "model-checking table");
    check->add_option("--runs", f.runs, "histories per model");
    auto* analyze = app.add_subcommand("analyze", "institution, candidate, parity and descriptive analyses");
    analyze->add_option("target", f.target, "institutions, candidates, parity, descriptives or all")
        ->check(CLI::IsMember({"institutions", "candidates", "parity", "descriptives", "all"}));
    auto* forecast = app.add_subcommand("forecast", "female-share parity forecast");
    auto* synth = app.add_subcommand("synth", "write a synthetic input bundle");
    synth->add_option("--institutions", f.synth_institutions, "number of institutions");
    synth->add_option("--first-year", f.first_year, "first hiring year");
    synth->add_option("--last-year", f.last_year, "last hiring year");
    synth->add_option("--hires-per-year", f.hires_per_year, "mean hires per year");
    synth->add_flag("--full-scale", f.full_scale, "205 institutions, 1970-2011, about 2659 hires");
    auto* pipeline = app.add_subcommand("pipeline", "run every stage");

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (synth->parsed()) return run_synth(f, app, *synth);

        Pipeline p(build_config(f, app, fit, simulate, check));
        if (ingest->parsed()) {
            const auto& d = p.ingest();
            std::cout << d.faculty.size() << " faculty kept, " << d.dropped_year + d.dropped_institution
                      << " dropped\n";
        } else if (rank->parsed()) {
            const auto& r = p.rank();
            std::cout << "min violations " << r.min_violations << " (" << r.violation_fraction << ")\n";
        } else if (topics->parsed()) {
            p.topics();
        } else if (fit->parsed()) {
            p.fit();
        } else if (simulate->parsed()) {
            std::optional<MatchModel> model;
            const auto variant = parse_variant(f.model);
            if (variant == MatchVariant::Uniform) model = MatchModel::uniform();
            else if (variant == MatchVariant::Step) model = MatchModel::step();
            else if (!f.weights.empty()) model = MatchModel::logistic(load_weights(f.weights));
            p.simulate(model);
        } else if (check->parsed()) {
            p.check();
        } else if (analyze->parsed()) {
            const bool all = f.target == "all";
            if (all || f.target == "institutions") p.analyze_institutions();
            if (all || f.target == "candidates") p.analyze_candidates();
            if (all || f.target == "parity") p.analyze_parity();
            if (all || f.target == "descriptives") p.analyze_descriptives();
        } else if (forecast->parsed()) {
            const auto fc = p.forecast();
            if (fc.defined) std::cout << "parity in " << fc.crossing_year << '\n';
            else std::cout << "parity undefined: " << fc.note << '\n';
        } else if (pipeline->parsed()) {
            p.run_all();
        }
        std::cout << p.dir().string() << '\n';
        return 0;
    } catch (const StageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
