#include "fhire/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <unordered_map>

#include "fhire/csv.hpp"
#include "fhire/error.hpp"
#include "fhire/parallel.hpp"
#include "fhire/rng.hpp"

namespace fhire {

namespace fs = std::filesystem;
using nlohmann::json;
using csv::format_double;

namespace {

void write_json(const fs::path& path, const json& j) { std::ofstream(path) << j.dump(2) << '\n'; }

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError(DataErrorKind::MissingFile, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw DataError(DataErrorKind::BadField, path.string() + ": " + e.what());
    }
}

json test_json(const std::optional<TestResult>& t) {
    if (!t) return nullptr;
    return {{"test", to_string(t->test)}, {"statistic", t->statistic}, {"p_value", t->p_value}};
}

json weights_json(const Weights& w) {
    json j;
    for (auto f : w.active_features()) j[to_string(f)] = w.w[slot(f)];
    return j;
}

std::string opt_double(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

const char* gender_label(int g) { return g == 1 ? "women" : "men"; }

}  // namespace

void apply_region_map(std::vector<Institution>& institutions, const fs::path& path) {
    const auto table = csv::read(path, {"institution_id", "region"});
    std::unordered_map<std::string, Region> map;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        try {
            map[table.rows[r][0]] = parse_region(table.rows[r][1]);
        } catch (const DataError& e) {
            throw DataError(e.kind(), path.string() + ":" + std::to_string(table.line_numbers[r]) + ": region '" +
                                          table.rows[r][1] + "'");
        }
    }
    for (auto& inst : institutions) {
        if (auto it = map.find(inst.id); it != map.end()) inst.region = it->second;
    }
}

Weights load_weights(const fs::path& path) {
    const auto j = read_json(path);
    if (!j.contains("weights") || !j["weights"].is_object()) {
        throw DataError(DataErrorKind::BadField, path.string() + ": no weights object");
    }
    Weights w;
    for (const auto& [name, value] : j["weights"].items()) {
        const auto f = parse_feature(name);
        w.active[slot(f)] = true;
        w.w[slot(f)] = value.get<double>();
    }
    if (j.contains("bias")) w.bias = j["bias"].get<double>();
    return w;
}

Pipeline::Pipeline(Config config) : config_(std::move(config)), dir_(config_.run_dir()) {
    fs::create_directories(dir_);
    write_json(dir_ / "config.json", config_.to_json());
}

template <class F>
auto Pipeline::stage(const char* name, F&& body) -> decltype(body()) {
    try {
        return body();
    } catch (const StageError&) {
        throw;
    } catch (const DataError& e) {
        throw StageError(name, 2, e.what());
    } catch (const NumericalError& e) {
        throw StageError(name, 3, e.what());
    } catch (const std::invalid_argument& e) {
        throw StageError(name, 2, e.what());
    }
}

const IngestData& Pipeline::ingest() {
    if (ingest_) return *ingest_;
    return stage("ingest", [&]() -> const IngestData& {
        IngestData d;
        d.institutions = load_institutions(config_.institutions);
        if (config_.region_map) apply_region_map(d.institutions, *config_.region_map);
        auto faculty = load_faculty(config_.faculty, d.institutions);
        d.publications = load_publications(config_.publications);
        auto filtered = filter_cohort(faculty, d.institutions);
        d.dropped_year = filtered.dropped_year;
        d.dropped_institution = filtered.dropped_institution;
        d.faculty = std::move(filtered.kept);
        assign_publication_counts(d.faculty, d.publications);
        d.network = build_network(d.institutions, d.faculty);

        csv::Writer w(dir_ / "cohort.csv");
        w.row({"faculty_id", "phd_institution", "hire_institution", "hire_year", "gender", "postdoc", "pub_count"});
        for (const auto& f : d.faculty) {
            w.row({f.id, f.doctoral_institution, f.hiring_institution, std::to_string(f.hire_year),
                   to_string(f.gender), f.postdoc ? "1" : "0", std::to_string(f.pub_count)});
        }
        write_json(dir_ / "ingest.json", {{"institutions", d.institutions.size()},
                                          {"faculty", d.faculty.size()},
                                          {"publications", d.publications.size()},
                                          {"dropped_year", d.dropped_year},
                                          {"dropped_institution", d.dropped_institution}});
        ingest_ = std::move(d);
        return *ingest_;
    });
}

const PrestigeRanking& Pipeline::rank() {
    if (ranking_) return *ranking_;
    const auto& data = ingest();
    return stage("rank", [&]() -> const PrestigeRanking& {
        const auto ranks_path = dir_ / "ranks.csv";
        const auto summary_path = dir_ / "rank_summary.json";
        if (fs::exists(ranks_path) && fs::exists(summary_path)) {
            const auto table = csv::read(ranks_path, {"institution_id", "mean_rank", "normalized_rank"});
            const auto summary = read_json(summary_path);
            PrestigeRanking r;
            r.rank.assign(data.network.size(), 0.0);
            for (const auto& row : table.rows) r.rank[data.network.require_index(row[0])] = std::stod(row[1]);
            r.min_violations = summary.at("min_violations").get<std::size_t>();
            r.violation_fraction = summary.at("violation_fraction").get<double>();
            r.samples = summary.at("samples").get<std::size_t>();
            ranking_ = std::move(r);
            return *ranking_;
        }
        const auto samples = sample_mvr(data.network, config_.mvr_params());
        const ViolationCounter counter(data.network);
        auto r = mean_rank(samples, counter.non_self_edges());
        for (auto& x : r.rank) x = std::stod(format_double(x));
        csv::Writer w(ranks_path);
        w.row({"institution_id", "mean_rank", "normalized_rank"});
        for (std::size_t i = 0; i < r.size(); ++i) {
            w.row({data.network.nodes()[i].id, format_double(r.rank[i]), format_double(r.normalized(i))});
        }
        write_json(summary_path, {{"min_violations", r.min_violations},
                                  {"violation_fraction", r.violation_fraction},
                                  {"samples", r.samples}});
        ranking_ = std::move(r);
        return *ranking_;
    });
}

const std::vector<FacultyRecord>& Pipeline::topics() {
    if (scored_) return *scored_;
    const auto& data = ingest();
    return stage("topics", [&]() -> const std::vector<FacultyRecord>& {
        auto faculty = data.faculty;
        const auto prod_path = dir_ / "productivity.csv";
        const int k = config_.topics;
        if (fs::exists(prod_path)) {
            const auto table = csv::read(prod_path);
            std::unordered_map<std::string, const std::vector<std::string>*> rows;
            for (const auto& row : table.rows) rows.emplace(row.at(0), &row);
            for (auto& f : faculty) {
                auto it = rows.find(f.id);
                if (it == rows.end()) throw DataError(DataErrorKind::CandidateMismatch, "productivity.csv lacks " + f.id);
                const auto& row = *it->second;
                if (row.size() != static_cast<std::size_t>(3 + k)) {
                    throw DataError(DataErrorKind::BadField, "productivity.csv has the wrong topic count");
                }
                f.productivity_z = std::stod(row[2]);
                f.topic_mix.clear();
                for (int t = 0; t < k; ++t) f.topic_mix.push_back(std::stod(row[3 + static_cast<std::size_t>(t)]));
            }
            scored_ = std::move(faculty);
            return *scored_;
        }

        std::unordered_map<std::string, std::vector<std::string>> titles;
        for (const auto& p : data.publications) titles[p.faculty_id].push_back(p.title);
        Corpus corpus;
        for (const auto& f : faculty) {
            auto it = titles.find(f.id);
            corpus.add_document(f.id, it == titles.end() ? std::vector<std::string>{} : tokenize_titles(it->second));
        }
        const auto model = fit_lda(corpus, config_.lda_params());
        std::vector<double> counts;
        for (const auto& f : faculty) counts.push_back(f.pub_count);
        const auto stats = subfield_count_stats(model.theta, counts);

        csv::Writer tw(dir_ / "topics.csv");
        tw.row({"topic", "word_rank", "word", "probability"});
        for (int t = 0; t < k; ++t) {
            const auto top = model.top_words(t, 20);
            for (std::size_t i = 0; i < top.size(); ++i) {
                tw.row({std::to_string(t + 1), std::to_string(i + 1),
                        corpus.vocabulary[static_cast<std::size_t>(top[i].first)], format_double(top[i].second)});
            }
        }

        csv::Writer pw(prod_path);
        std::vector<std::string> header = {"faculty_id", "pub_count", "z"};
        for (int t = 0; t < k; ++t) header.push_back("theta_" + std::to_string(t + 1));
        pw.row(header);
        for (std::size_t i = 0; i < faculty.size(); ++i) {
            auto& f = faculty[i];
            f.topic_mix = model.theta[i];
            // Round-tripped through the file precision so reloaded runs see the same values.
            f.productivity_z = std::stod(format_double(composite_z(f.topic_mix, counts[i], stats)));
            for (auto& x : f.topic_mix) x = std::stod(format_double(x));
            std::vector<std::string> row = {f.id, std::to_string(f.pub_count), format_double(*f.productivity_z)};
            for (double x : f.topic_mix) row.push_back(format_double(x));
            pw.row(row);
        }
        json sj;
        sj["stopwords"] = std::string(stopword_list_version());
        sj["mu"] = stats.mu;
        sj["sigma"] = stats.sigma;
        sj["weight"] = stats.weight;
        sj["mean_sigma"] = stats.mean_sigma();
        write_json(dir_ / "subfield_stats.json", sj);
        scored_ = std::move(faculty);
        return *scored_;
    });
}

const Market& Pipeline::market() {
    if (market_) return *market_;
    const auto& data = ingest();
    const auto& ranking = rank();
    const auto& faculty = topics();
    market_ = stage("fit", [&] { return Market::from_network(data.network, ranking, faculty); });
    return *market_;
}

const Weights& Pipeline::fit() {
    if (weights_) return *weights_;
    const auto fit_path = dir_ / "fit.json";
    if (fs::exists(fit_path)) {
        weights_ = stage("fit", [&] { return load_weights(fit_path); });
        return *weights_;
    }
    const auto& m = market();
    return stage("fit", [&]() -> const Weights& {
        json j;
        j["features"] = json::array();
        for (auto f : config_.features) j["features"].push_back(to_string(f));
        j["lambda"] = config_.lambda;
        j["replicates"] = config_.replicates;
        const auto fit_seed = substream_seed(config_.seed, "fit");
        Weights w;
        if (config_.greedy) {
            GreedyParams gp;
            gp.features = config_.features;
            gp.lambda = config_.lambda;
            gp.fit_replicates = config_.replicates;
            gp.eval_replicates = config_.eval_replicates;
            gp.seed = fit_seed;
            gp.search = config_.search_params();
            const auto trace = greedy_select(m, gp);
            if (trace.stages.empty()) throw DataError(DataErrorKind::EmptyInput, "no features to select");
            w = trace.stages.back().weights;
            j["err"] = trace.stages.back().err_after;
            auto& tj = j["trace"] = json::array();
            csv::Writer g(dir_ / "greedy.csv");
            g.row({"stage", "feature", "err", "pct_reduction_vs_step", "p_value"});
            g.row({"0", "step", format_double(trace.step_error), format_double(0.0), "NA"});
            tj.push_back({{"stage", 0}, {"feature", "step"}, {"err", trace.step_error}});
            for (std::size_t s = 0; s < trace.stages.size(); ++s) {
                const auto& st = trace.stages[s];
                g.row({std::to_string(s + 1), to_string(st.feature), format_double(st.err_after),
                       format_double(st.pct_reduction_vs_step), format_double(st.p_value)});
                tj.push_back({{"stage", s + 1},
                              {"feature", to_string(st.feature)},
                              {"err", st.err_after},
                              {"pct_reduction_vs_step", st.pct_reduction_vs_step},
                              {"p_value", st.p_value},
                              {"weights", weights_json(st.weights)}});
            }
        } else {
            ObjectiveConfig oc;
            oc.features = config_.features;
            oc.lambda = config_.lambda;
            oc.replicates = config_.replicates;
            oc.seed = fit_seed;
            oc.bias = config_.bias;
            const auto result = fit_weights(m, oc, config_.search_params());
            w = result.weights;
            j["err"] = result.err;
            auto& tj = j["trace"] = json::array();
            for (const auto& [iter, value] : result.search.trace) tj.push_back({{"iteration", iter}, {"value", value}});
        }
        // Stored at file precision so a reloaded fit reproduces the same simulations.
        for (auto& x : w.w) x = std::stod(format_double(x, 12));
        w.bias = std::stod(format_double(w.bias, 12));
        j["weights"] = weights_json(w);
        j["bias"] = w.bias;
        write_json(dir_ / "fit.json", j);
        weights_ = w;
        return *weights_;
    });
}

std::vector<SimulationRun> Pipeline::simulate(std::optional<MatchModel> model, std::optional<std::size_t> runs) {
    const auto& m = market();
    const MatchModel chosen = model ? *model : MatchModel::logistic(fit());
    const std::size_t n = runs ? *runs : config_.runs;
    return stage("simulate", [&] {
        const auto seed = substream_seed(config_.seed, std::string("simulate-") + to_string(chosen.variant));
        std::vector<SimulationRun> out(n);
        parallel_for(n, [&](std::size_t r) { out[r] = simulate_history(m, chosen, derive_seed(seed, r)); });
        for (std::size_t r = 0; r < n; ++r) {
            csv::Writer w(dir_ / ("placements_" + std::to_string(r) + ".csv"));
            w.row({"faculty_id", "simulated_institution", "year"});
            for (std::size_t c = 0; c < m.candidates().size(); ++c) {
                const auto& cand = m.candidates()[c];
                const auto p = out[r].placements[c];
                w.row({cand.faculty_id, p == kUnplaced ? "NA" : m.institutions()[p].id, std::to_string(cand.year)});
            }
        }
        write_json(dir_ / "simulate.json", {{"model", to_string(chosen.variant)},
                                            {"runs", n},
                                            {"weights", weights_json(chosen.weights)}});
        return out;
    });
}

std::vector<SimulationRun> Pipeline::logistic_runs() {
    if (!runs_) runs_ = simulate();
    return *runs_;
}

CheckReport Pipeline::check() {
    const auto& data = ingest();
    const auto& m = market();
    const auto& w = fit();
    return stage("check", [&] {
        const std::vector<MatchModel> models = {MatchModel::uniform(), MatchModel::step(), MatchModel::logistic(w)};
        const auto report =
            check_report(data.network, m, models, std::max<std::size_t>(2, config_.runs), substream_seed(config_.seed, "simulate"));
        csv::Writer out(dir_ / "model_check.csv");
        std::vector<std::string> header = {"statistic", "observed"};
        for (const auto& s : report.models) {
            header.push_back(to_string(s.variant));
            header.push_back(std::string(to_string(s.variant)) + "_se");
        }
        out.row(header);
        const auto observed = report.observed.values();
        for (std::size_t k = 0; k < kStatisticCount; ++k) {
            std::vector<std::string> row = {kStatisticNames[k], format_double(observed[k])};
            for (const auto& s : report.models) {
                row.push_back(format_double(s.mean[k]));
                row.push_back(format_double(s.std_error[k]));
            }
            out.row(row);
        }
        write_json(dir_ / "model_check.json",
                   {{"runs", report.runs},
                    {"definitions",
                     {{"mean_geodesic_path_length", "undirected simple projection, self-loops dropped, over connected ordered pairs"},
                      {"mean_local_clustering_coefficient", "undirected simple projection; degree < 2 counts as 0"},
                      {"pct_reciprocated_hires", "non-self hires on a pair of institutions hiring from each other"},
                      {"pct_reciprocating_institutions", "institutions in at least one mutually hiring pair, over all institutions"},
                      {"pct_self_hires", "self-loop hires over all hires"},
                      {"pct_placements_within_same_region", "hires within one region over all hires"}}}});
        return report;
    });
}

void Pipeline::analyze_institutions() {
    const auto& m = market();
    const auto runs = logistic_runs();
    stage("analyze", [&] {
        const auto dists = female_hire_distributions(m, runs, substream_seed(config_.seed, "analyze-ties"));
        const auto& years = m.years();
        csv::Writer w(dir_ / "analysis_institutions.csv");
        w.row({"entity", "year", "value", "series"});
        std::vector<double> pit;
        json per = json::array();
        for (const auto& d : dists) {
            const auto& id = m.institutions()[d.institution].id;
            for (std::size_t y = 0; y < years.size(); ++y) {
                double mean = 0.0;
                for (const auto& t : d.trajectories) mean += t[y];
                mean /= std::max<std::size_t>(1, d.trajectories.size());
                const auto year = std::to_string(years[y].year);
                w.row({id, year, std::to_string(d.actual_trajectory[y]), "actual_cumulative"});
                w.row({id, year, format_double(mean), "expected_cumulative"});
            }
            pit.push_back(d.randomized_percentile);
            per.push_back({{"institution_id", id},
                           {"actual", d.actual_final},
                           {"expected_mean", d.expected_mean()},
                           {"expected_median", d.expected_median()},
                           {"percentile_of_actual", d.percentile_of_actual},
                           {"randomized_percentile", d.randomized_percentile}});
        }
        const auto band = rank_band_summary(dists, m.ranking(), config_.top_institutions);
        csv::Writer bw(dir_ / "analysis_rank_band.csv");
        bw.row({"entity", "rank", "actual", "expected_mean", "expected_median", "actual_minus_expected", "band_low",
                "band_high", "inside_band"});
        std::size_t inside = 0;
        for (const auto& r : band) {
            inside += r.inside_band();
            bw.row({m.institutions()[r.institution].id, format_double(r.rank), std::to_string(r.actual),
                    format_double(r.expected_mean), format_double(r.expected_median),
                    format_double(r.actual_minus_expected), format_double(r.band_low), format_double(r.band_high),
                    r.inside_band() ? "1" : "0"});
        }
        json j;
        j["runs"] = runs.size();
        j["institutions"] = per;
        j["top_inside_band"] = inside;
        j["top_count"] = band.size();
        j["expected"] = "mean of simulated final counts";
        if (!pit.empty()) j["uniformity"] = test_json(ks_uniform(pit, 0.0, 100.0));
        write_json(dir_ / "analysis_institutions.json", j);
    });
}

void Pipeline::analyze_candidates() {
    const auto& m = market();
    const auto runs = logistic_runs();
    stage("analyze", [&] {
        const auto outcomes = candidate_placement_errors(m, runs);
        csv::Writer w(dir_ / "analysis_candidates.csv");
        w.row({"entity", "year", "value", "series"});
        for (const auto& o : outcomes) {
            const auto& c = m.candidates()[o.candidate];
            w.row({c.faculty_id, std::to_string(c.year), format_double(o.delta), to_string(c.gender)});
        }
        const auto points = placement_error_by_year(outcomes, m);
        csv::Writer yw(dir_ / "analysis_candidates_by_year.csv");
        yw.row({"entity", "year", "value", "series"});
        for (const auto& p : points) {
            const std::string g = to_string(p.gender);
            const auto year = std::to_string(p.year);
            yw.row({g, year, format_double(p.mean_delta), "mean_delta"});
            yw.row({g, year, format_double(p.half_width), "half_width"});
            yw.row({g, year, std::to_string(p.n), "n"});
        }
        json j;
        j["runs"] = runs.size();
        j["trend_female"] = test_json(error_trend_test(points, Gender::Female));
        j["trend_male"] = test_json(error_trend_test(points, Gender::Male));
        auto& tests = j["comparisons"] = json::object();
        for (const auto& t : candidate_comparisons(outcomes, m)) tests[t.name] = test_json(t.result);
        write_json(dir_ / "analysis_candidates.json", j);
    });
}

void Pipeline::analyze_parity() {
    const auto& m = market();
    stage("analyze", [&] {
        const auto series = yearly_female_fraction(m);
        const auto f = parity_forecast(series);
        csv::Writer w(dir_ / "analysis_parity.csv");
        w.row({"entity", "year", "value", "series"});
        for (const auto& [year, share] : series) {
            w.row({"all", std::to_string(year), format_double(share), "female_fraction"});
            w.row({"all", std::to_string(year), format_double(f.intercept + f.slope * year), "fitted"});
        }
        write_json(dir_ / "analysis_parity.json", {{"defined", f.defined},
                                                   {"slope", f.slope},
                                                   {"intercept", f.intercept},
                                                   {"crossing_year", f.defined ? json(f.crossing_year) : json(nullptr)},
                                                   {"ci_low", f.defined ? json(f.ci_low) : json(nullptr)},
                                                   {"ci_high", std::isfinite(f.ci_high) ? json(f.ci_high) : json(nullptr)},
                                                   {"note", f.note}});
    });
}

void Pipeline::analyze_descriptives() {
    const auto& m = market();
    stage("analyze", [&] {
        const auto r = descriptive_report(m);
        csv::Writer w(dir_ / "analysis_descriptives.csv");
        w.row({"entity", "year", "value", "series"});
        json tables = json::object();
        for (const auto& t : r.tables) {
            for (int g = 0; g < 2; ++g) {
                for (int d = 0; d < 2; ++d) {
                    w.row({t.name, "NA", std::to_string(t.counts[g][d]),
                           std::string(gender_label(g)) + (d ? "_up" : "_down")});
                }
            }
            tables[t.name] = {{"men", {{"down", t.counts[0][0]}, {"up", t.counts[0][1]}}},
                              {"women", {{"down", t.counts[1][0]}, {"up", t.counts[1][1]}}},
                              {"test", test_json(t.test)}};
        }
        const char* groups[] = {"down", "up", "all"};
        json medians;
        for (int g = 0; g < 2; ++g) {
            for (int c = 0; c < 3; ++c) {
                w.row({"median_productivity_z", "NA", opt_double(r.median_z[g][c]),
                       std::string(gender_label(g)) + "_" + groups[c]});
                medians[gender_label(g)][groups[c]] = r.median_z[g][c] ? json(*r.median_z[g][c]) : json(nullptr);
            }
        }
        json tests = json::object();
        for (const auto& t : r.tests) tests[t.name] = test_json(t.result);
        write_json(dir_ / "analysis_descriptives.json",
                   {{"faculty", r.faculty},
                    {"female_share", r.female_share},
                    {"tables", tables},
                    {"median_productivity_z", medians},
                    {"tests", tests},
                    {"self_hire_rate", {{"men", r.self_hire_rate[0]}, {"women", r.self_hire_rate[1]}}},
                    {"postdoc_rate", {{"men", r.postdoc_rate[0]}, {"women", r.postdoc_rate[1]}}},
                    {"chi_squared", "Pearson, no continuity correction"}});
    });
}

ParityForecast Pipeline::forecast() {
    const auto& m = market();
    return stage("forecast", [&] {
        const auto f = parity_forecast(yearly_female_fraction(m));
        write_json(dir_ / "forecast.json", {{"defined", f.defined},
                                            {"crossing_year", f.defined ? json(f.crossing_year) : json(nullptr)},
                                            {"ci_low", f.defined ? json(f.ci_low) : json(nullptr)},
                                            {"ci_high", std::isfinite(f.ci_high) ? json(f.ci_high) : json(nullptr)},
                                            {"slope_per_year", f.slope},
                                            {"note", f.note}});
        return f;
    });
}

void Pipeline::run_all() {
    ingest();
    rank();
    topics();
    fit();
    logistic_runs();
    check();
    analyze_institutions();
    analyze_candidates();
    analyze_parity();
    analyze_descriptives();
    forecast();
}

}  // namespace fhire
