#include "fhire/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "fhire/csv.hpp"
#include "fhire/error.hpp"
#include "fhire/rng.hpp"

namespace fhire {

namespace {

// Ten made-up subfield vocabularies; titles are sampled from these.
const std::vector<std::vector<std::string>> kSubfieldWords = {
    {"network", "routing", "wireless", "protocol", "packet", "congestion", "latency", "internet", "sensor", "traffic"},
    {"learning", "neural", "classification", "kernel", "bayesian", "inference", "regression", "clustering", "features", "training"},
    {"database", "query", "transaction", "index", "relational", "storage", "olap", "schema", "join", "xml"},
    {"graphics", "rendering", "mesh", "shading", "texture", "animation", "illumination", "geometry", "surface", "visualization"},
    {"compiler", "program", "type", "semantics", "verification", "static", "analysis", "language", "optimization", "loop"},
    {"security", "cryptographic", "privacy", "attack", "authentication", "encryption", "malware", "secure", "signature", "key"},
    {"algorithm", "approximation", "complexity", "bounds", "graph", "polynomial", "randomized", "combinatorial", "lower", "hardness"},
    {"processor", "cache", "memory", "architecture", "parallel", "multicore", "pipeline", "power", "hardware", "simulation"},
    {"user", "interface", "interaction", "mobile", "usability", "design", "social", "collaborative", "display", "touch"},
    {"robot", "motion", "planning", "vision", "tracking", "localization", "camera", "image", "recognition", "control"},
};

const std::vector<std::string> kFillers = {"of", "for", "the", "a", "and", "on", "with", "in"};

const std::string& subfield_word(int topic, std::size_t j) {
    static std::vector<std::vector<std::string>> generated;
    if (topic < static_cast<int>(kSubfieldWords.size())) {
        const auto& words = kSubfieldWords[static_cast<std::size_t>(topic)];
        return words[j % words.size()];
    }
    while (static_cast<int>(generated.size()) <= topic) {
        std::vector<std::string> words;
        for (int w = 0; w < 10; ++w) {
            words.push_back("topic" + std::to_string(generated.size()) + "term" + std::to_string(w));
        }
        generated.push_back(std::move(words));
    }
    return generated[static_cast<std::size_t>(topic)][j % 10];
}

std::vector<double> dirichlet(Rng& rng, int k, double concentration) {
    std::vector<double> out(static_cast<std::size_t>(k));
    double total = 0.0;
    for (auto& v : out) {
        v = rng.gamma(concentration);
        total += v;
    }
    if (total <= 0.0) {
        std::fill(out.begin(), out.end(), 1.0 / k);
        return out;
    }
    for (auto& v : out) v /= total;
    return out;
}

std::size_t draw_weighted(Rng& rng, const std::vector<double>& cumulative) {
    const double u = rng.uniform01() * cumulative.back();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return std::min(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

std::string padded(const char* prefix, std::size_t value, int width) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, value);
    return buf;
}

}  // namespace

SyntheticSpec SyntheticSpec::full_scale() {
    SyntheticSpec s;
    s.institutions = 205;
    s.first_year = 1970;
    s.last_year = 2011;
    s.hires_per_year = 2659.0 / 42.0;
    s.female_start = 0.05;
    s.female_end = 0.20;
    s.postdoc_rate = 0.2;
    s.w_true.active.fill(true);
    s.w_true.w[slot(Feature::RankDiff)] = 10.0;
    s.w_true.w[slot(Feature::Productivity)] = 1.0;
    s.w_true.w[slot(Feature::HiringRank)] = 0.0;
    s.w_true.w[slot(Feature::Postdoc)] = 3.0;
    s.w_true.w[slot(Feature::SameRegion)] = 0.3;
    s.w_true.w[slot(Feature::Female)] = 0.0;
    return s;
}

void SyntheticSpec::validate() const {
    auto fail = [](const std::string& why) { throw DataError(DataErrorKind::InfeasibleSpec, why); };
    if (institutions == 0) fail("at least one institution is required");
    if (last_year < first_year) fail("last_year precedes first_year");
    if (!(hires_per_year > 0.0)) fail("hires_per_year must be positive");
    if (max_hires_per_institution == 0) fail("max_hires_per_institution must be positive");
    if (hires_per_year > static_cast<double>(institutions * max_hires_per_institution)) {
        fail("more hires per year than openings the institutions can offer");
    }
    for (double p : {female_start, female_end, postdoc_rate}) {
        if (!(p >= 0.0 && p <= 1.0)) fail("probabilities must lie in [0, 1]");
    }
    if (topics < 1) fail("at least one topic is required");
    if (!topic_rates.empty() && topic_rates.size() != static_cast<std::size_t>(topics)) {
        fail("topic_rates must have one entry per topic");
    }
    if (!(topic_concentration > 0.0)) fail("topic_concentration must be positive");
    w_true.validate();
}

PrestigeRanking SyntheticBundle::planted_ranking() const {
    PrestigeRanking r;
    r.rank = truth.planted_rank;
    r.samples = 1;
    std::size_t non_self = 0;
    std::size_t violations = 0;
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < institutions.size(); ++i) index.emplace(institutions[i].id, i);
    for (const auto& f : faculty) {
        const auto u = index.at(f.doctoral_institution);
        const auto v = index.at(f.hiring_institution);
        if (u == v) continue;
        ++non_self;
        violations += r.rank[v] < r.rank[u];
    }
    r.min_violations = violations;
    r.violation_fraction = non_self ? static_cast<double>(violations) / static_cast<double>(non_self) : 0.0;
    return r;
}

Market SyntheticBundle::truth_market() const {
    return Market::from_network(build_network(institutions, faculty), planted_ranking(), faculty);
}

nlohmann::json SyntheticBundle::truth_json() const {
    nlohmann::json j;
    for (auto f : kAllFeatures) j["w_true"][to_string(f)] = truth.w_true.w[slot(f)];
    for (std::size_t i = 0; i < institutions.size(); ++i) j["planted_rank"][institutions[i].id] = truth.planted_rank[i];
    j["violation_fraction"] = truth.violation_fraction;
    auto& cands = j["candidates"] = nlohmann::json::array();
    for (std::size_t i = 0; i < faculty.size(); ++i) {
        cands.push_back({{"faculty_id", faculty[i].id},
                         {"productivity_z", truth.productivity_z[i]},
                         {"pub_count", truth.pub_count[i]}});
    }
    return j;
}

void SyntheticBundle::write(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    {
        csv::Writer w(dir / "institutions.csv");
        w.row({"institution_id", "name", "region"});
        for (const auto& i : institutions) w.row({i.id, i.name, to_string(i.region)});
    }
    {
        csv::Writer w(dir / "faculty.csv");
        w.row({"faculty_id", "phd_institution", "hire_institution", "hire_year", "gender", "postdoc"});
        for (const auto& f : faculty) {
            w.row({f.id, f.doctoral_institution, f.hiring_institution, std::to_string(f.hire_year),
                   to_string(f.gender), f.postdoc ? "1" : "0"});
        }
    }
    {
        csv::Writer w(dir / "publications.csv");
        w.row({"faculty_id", "title", "year"});
        for (const auto& p : publications) w.row({p.faculty_id, p.title, std::to_string(p.year)});
    }
    std::ofstream(dir / "truth.json") << truth_json().dump(2) << '\n';
}

SyntheticBundle generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng rng(substream_seed(seed, "synth"));
    const std::size_t n = spec.institutions;

    SyntheticBundle bundle;
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    bundle.truth.planted_rank.resize(n);
    for (std::size_t p = 0; p < n; ++p) bundle.truth.planted_rank[perm[p]] = static_cast<double>(p + 1);
    for (std::size_t i = 0; i < n; ++i) {
        bundle.institutions.push_back(
            {padded("U", i, 3), "University " + std::to_string(i), static_cast<Region>(rng.below(5))});
    }

    std::vector<double> production(n), openings(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = bundle.truth.planted_rank[i];
        production[i] = std::pow(r, -spec.production_exponent);
        openings[i] = std::pow(r, -spec.opening_exponent);
    }
    std::partial_sum(production.begin(), production.end(), production.begin());
    std::partial_sum(openings.begin(), openings.end(), openings.begin());

    std::vector<double> rates = spec.topic_rates;
    if (rates.empty()) {
        for (int k = 0; k < spec.topics; ++k) {
            rates.push_back(spec.topics == 1 ? 6.0 : 2.0 + 10.0 * k / (spec.topics - 1));
        }
    }

    std::vector<Candidate> candidates;
    std::vector<std::vector<double>> theta;
    std::vector<double> counts;
    const int span_years = spec.last_year - spec.first_year;
    for (int year = spec.first_year; year <= spec.last_year; ++year) {
        const double share = span_years == 0 ? spec.female_start
                                              : spec.female_start + (spec.female_end - spec.female_start) *
                                                                        (year - spec.first_year) / span_years;
        const std::size_t capacity = n * spec.max_hires_per_institution;
        const long drawn = spec.poisson_hires ? rng.poisson(spec.hires_per_year)
                                              : std::lround(spec.hires_per_year);
        const std::size_t hires = std::min<std::size_t>(capacity, static_cast<std::size_t>(std::max(1L, drawn)));
        std::vector<std::size_t> load(n, 0);
        for (std::size_t h = 0; h < hires; ++h) {
            std::size_t v;
            do {
                v = draw_weighted(rng, openings);
            } while (load[v] >= spec.max_hires_per_institution);
            ++load[v];

            Candidate c;
            c.faculty_id = padded("F", candidates.size(), 5);
            c.origin = draw_weighted(rng, production);
            c.observed = v;  // placeholder opening; the matching process decides the real placement
            c.year = year;
            c.gender = rng.bernoulli(share) ? Gender::Female : Gender::Male;
            c.postdoc = rng.bernoulli(spec.postdoc_rate);
            auto mix = dirichlet(rng, spec.topics, spec.topic_concentration);
            double rate = 0.0;
            for (int k = 0; k < spec.topics; ++k) rate += mix[static_cast<std::size_t>(k)] * rates[static_cast<std::size_t>(k)];
            if (c.postdoc) rate *= spec.postdoc_paper_boost;
            counts.push_back(rng.poisson(rate));
            theta.push_back(std::move(mix));
            candidates.push_back(std::move(c));
        }
    }

    const auto stats = subfield_count_stats(theta, counts);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        candidates[i].productivity_z = composite_z(theta[i], counts[i], stats);
    }

    PrestigeRanking planted;
    planted.rank = bundle.truth.planted_rank;
    const Market draft(bundle.institutions, planted, candidates);
    const auto run = simulate_history(draft, MatchModel::logistic(spec.w_true), substream_seed(seed, "synth-match"));

    bundle.truth.w_true = spec.w_true;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto& c = candidates[i];
        FacultyRecord rec;
        rec.id = c.faculty_id;
        rec.doctoral_institution = bundle.institutions[c.origin].id;
        rec.hiring_institution = bundle.institutions[run.placements[i]].id;
        rec.hire_year = c.year;
        rec.gender = c.gender;
        rec.postdoc = c.postdoc;
        rec.pub_count = static_cast<int>(counts[i]);
        rec.topic_mix = theta[i];
        rec.productivity_z = c.productivity_z;
        bundle.truth.productivity_z.push_back(c.productivity_z);
        bundle.truth.pub_count.push_back(rec.pub_count);

        // Counted papers up to hire_year + 1, plus later ones the cutoff must ignore.
        const int later = rng.poisson(1.0);
        for (int p = 0; p < rec.pub_count + later; ++p) {
            const bool counted = p < rec.pub_count;
            const int year = counted ? rec.hire_year + 1 - static_cast<int>(rng.below(6))
                                     : rec.hire_year + 2 + static_cast<int>(rng.below(5));
            std::string title;
            for (std::size_t w = 0; w < spec.title_words; ++w) {
                if (!title.empty()) title += ' ';
                if (w % 3 == 1 && rng.bernoulli(0.5)) {
                    title += kFillers[rng.below(kFillers.size())];
                    title += ' ';
                }
                std::vector<double> cum(theta[i]);
                std::partial_sum(cum.begin(), cum.end(), cum.begin());
                const int topic = static_cast<int>(draw_weighted(rng, cum));
                std::string word = subfield_word(topic, rng.below(10));
                if (w == 0) word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
                title += word;
            }
            bundle.publications.push_back({rec.id, title, year});
        }
        bundle.faculty.push_back(std::move(rec));
    }
    bundle.truth.violation_fraction = bundle.planted_ranking().violation_fraction;
    return bundle;
}

}  // namespace fhire
