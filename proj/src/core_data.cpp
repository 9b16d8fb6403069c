#include "fhire/core_data.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <unordered_set>

#include "fhire/csv.hpp"
#include "fhire/error.hpp"

namespace fhire {

namespace {

const std::vector<std::string> kInstitutionHeader = {"institution_id", "name", "region"};
const std::vector<std::string> kFacultyHeader = {"faculty_id",  "phd_institution", "hire_institution",
                                                 "hire_year",   "gender",          "postdoc"};
const std::vector<std::string> kPublicationHeader = {"faculty_id", "title", "year"};

std::string where(const std::filesystem::path& path, std::size_t line) {
    return path.string() + ":" + std::to_string(line);
}

std::optional<int> parse_int(const std::string& text) {
    int value = 0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || text.empty()) return std::nullopt;
    return value;
}

}  // namespace

Region parse_region(const std::string& token) {
    static const std::map<std::string, Region> table = {
        {"Northeast", Region::Northeast}, {"Midwest", Region::Midwest}, {"South", Region::South},
        {"West", Region::West},           {"Canada", Region::Canada},
    };
    auto it = table.find(token);
    if (it == table.end()) throw DataError(DataErrorKind::InvalidRegion, "'" + token + "'");
    return it->second;
}

const char* to_string(Region region) {
    switch (region) {
        case Region::Northeast: return "Northeast";
        case Region::Midwest: return "Midwest";
        case Region::South: return "South";
        case Region::West: return "West";
        case Region::Canada: return "Canada";
    }
    return "?";
}

Gender parse_gender(const std::string& token) {
    if (token == "F") return Gender::Female;
    if (token == "M") return Gender::Male;
    if (token == "U") return Gender::Unknown;
    throw DataError(DataErrorKind::BadGender, "'" + token + "'");
}

const char* to_string(Gender gender) {
    switch (gender) {
        case Gender::Female: return "F";
        case Gender::Male: return "M";
        case Gender::Unknown: return "U";
    }
    return "?";
}

std::vector<Institution> load_institutions(const std::filesystem::path& path) {
    const auto table = csv::read(path, kInstitutionHeader);
    std::vector<Institution> out;
    std::unordered_set<std::string> seen;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (!seen.insert(row[0]).second) {
            throw DataError(DataErrorKind::DuplicateId, where(path, table.line_numbers[r]) + ": " + row[0]);
        }
        try {
            out.push_back({row[0], row[1], parse_region(row[2])});
        } catch (const DataError& e) {
            throw DataError(e.kind(), where(path, table.line_numbers[r]) + ": region '" + row[2] + "'");
        }
    }
    return out;
}

std::vector<FacultyRecord> load_faculty(const std::filesystem::path& path,
                                        const std::vector<Institution>& institutions) {
    const auto table = csv::read(path, kFacultyHeader);
    std::unordered_set<std::string> known;
    for (const auto& inst : institutions) known.insert(inst.id);

    std::vector<FacultyRecord> out;
    std::unordered_set<std::string> seen;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto loc = where(path, table.line_numbers[r]);
        if (!seen.insert(row[0]).second) throw DataError(DataErrorKind::DuplicateId, loc + ": " + row[0]);
        for (int col : {1, 2}) {
            if (!known.contains(row[col])) throw DataError(DataErrorKind::UnknownInstitution, loc + ": " + row[col]);
        }
        const auto year = parse_int(row[3]);
        if (!year) throw DataError(DataErrorKind::BadYear, loc + ": '" + row[3] + "'");

        FacultyRecord rec;
        rec.id = row[0];
        rec.doctoral_institution = row[1];
        rec.hiring_institution = row[2];
        rec.hire_year = *year;
        try {
            rec.gender = parse_gender(row[4]);
        } catch (const DataError& e) {
            throw DataError(e.kind(), loc + ": gender '" + row[4] + "'");
        }
        if (row[5] == "1" || row[5] == "true") {
            rec.postdoc = true;
        } else if (row[5] == "0" || row[5] == "false") {
            rec.postdoc = false;
        } else {
            throw DataError(DataErrorKind::BadField, loc + ": postdoc '" + row[5] + "'");
        }
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<Publication> load_publications(const std::filesystem::path& path) {
    const auto table = csv::read(path, kPublicationHeader);
    std::vector<Publication> out;
    out.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto year = parse_int(row[2]);
        if (!year) throw DataError(DataErrorKind::BadYear, where(path, table.line_numbers[r]) + ": '" + row[2] + "'");
        out.push_back({row[0], row[1], *year});
    }
    return out;
}

void assign_publication_counts(std::vector<FacultyRecord>& records,
                               const std::vector<Publication>& publications) {
    std::unordered_map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < records.size(); ++i) {
        records[i].pub_count = 0;
        by_id.emplace(records[i].id, i);
    }
    for (const auto& pub : publications) {
        auto it = by_id.find(pub.faculty_id);
        if (it == by_id.end()) continue;
        auto& rec = records[it->second];
        if (pub.year <= rec.hire_year + 1) ++rec.pub_count;
    }
}

CohortFilterResult filter_cohort(const std::vector<FacultyRecord>& records,
                                 const std::vector<Institution>& institutions) {
    std::unordered_set<std::string> in_sample;
    for (const auto& inst : institutions) in_sample.insert(inst.id);

    CohortFilterResult result;
    for (const auto& rec : records) {
        if (!in_sample.contains(rec.doctoral_institution) || !in_sample.contains(rec.hiring_institution)) {
            ++result.dropped_institution;
        } else if (rec.hire_year < kFirstCohortYear || rec.hire_year > kLastCohortYear) {
            ++result.dropped_year;
        } else {
            result.kept.push_back(rec);
        }
    }
    return result;
}

HiringNetwork::HiringNetwork(std::vector<Institution> nodes, std::vector<HireEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!index_.emplace(nodes_[i].id, i).second) throw DataError(DataErrorKind::DuplicateId, nodes_[i].id);
    }
    for (const auto& e : edges_) {
        if (e.source >= nodes_.size() || e.target >= nodes_.size()) {
            throw std::out_of_range("edge endpoint outside the node set");
        }
    }
}

std::optional<std::size_t> HiringNetwork::index_of(const std::string& institution_id) const {
    auto it = index_.find(institution_id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t HiringNetwork::require_index(const std::string& institution_id) const {
    auto idx = index_of(institution_id);
    if (!idx) throw DataError(DataErrorKind::UnknownInstitution, institution_id);
    return *idx;
}

std::size_t HiringNetwork::multiplicity(std::size_t source, std::size_t target) const {
    return static_cast<std::size_t>(std::count_if(edges_.begin(), edges_.end(), [&](const HireEdge& e) {
        return e.source == source && e.target == target;
    }));
}

HiringNetwork HiringNetwork::with_edges(std::vector<HireEdge> edges) const {
    HiringNetwork out = *this;
    out.edges_ = std::move(edges);
    for (const auto& e : out.edges_) {
        if (e.source >= nodes_.size() || e.target >= nodes_.size()) {
            throw std::out_of_range("edge endpoint outside the node set");
        }
    }
    return out;
}

HiringNetwork build_network(const std::vector<Institution>& institutions,
                            const std::vector<FacultyRecord>& records) {
    HiringNetwork shell(institutions, {});
    std::vector<HireEdge> edges;
    edges.reserve(records.size());
    for (const auto& rec : records) {
        edges.push_back({shell.require_index(rec.doctoral_institution), shell.require_index(rec.hiring_institution),
                         rec.hire_year, rec.id});
    }
    return shell.with_edges(std::move(edges));
}

std::vector<MarketYear> year_slices(const HiringNetwork& network) {
    std::map<int, MarketYear> by_year;
    for (const auto& e : network.edges()) {
        auto& slice = by_year[e.year];
        slice.year = e.year;
        slice.candidates.push_back(e.faculty_id);
        slice.candidate_origins.push_back(e.source);
        slice.openings.push_back(e.target);
    }
    std::vector<MarketYear> out;
    out.reserve(by_year.size());
    for (auto& [year, slice] : by_year) out.push_back(std::move(slice));
    return out;
}

}  // namespace fhire
