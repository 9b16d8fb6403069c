#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace fhire {

// Four U.S. Census regions plus Canada.
enum class Region { Northeast, Midwest, South, West, Canada };

enum class Gender { Female, Male, Unknown };

inline constexpr int kFirstCohortYear = 1970;
inline constexpr int kLastCohortYear = 2011;

Region parse_region(const std::string& token);
const char* to_string(Region region);
Gender parse_gender(const std::string& token);
const char* to_string(Gender gender);

struct Institution {
    std::string id;
    std::string name;
    Region region = Region::Northeast;
};

struct FacultyRecord {
    std::string id;
    std::string doctoral_institution;
    std::string hiring_institution;
    int hire_year = 0;
    Gender gender = Gender::Unknown;
    bool postdoc = false;
    int pub_count = 0;
    // Filled by the productivity stage; empty until then.
    std::vector<double> topic_mix;
    std::optional<double> productivity_z;
};

struct Publication {
    std::string faculty_id;
    std::string title;
    int year = 0;
};

std::vector<Institution> load_institutions(const std::filesystem::path& path);
std::vector<FacultyRecord> load_faculty(const std::filesystem::path& path,
                                        const std::vector<Institution>& institutions);
std::vector<Publication> load_publications(const std::filesystem::path& path);

// Sets pub_count to the number of publications dated no later than hire_year + 1.
// Faculty without publication rows keep a count of zero.
void assign_publication_counts(std::vector<FacultyRecord>& records,
                               const std::vector<Publication>& publications);

struct CohortFilterResult {
    std::vector<FacultyRecord> kept;
    std::size_t dropped_year = 0;
    std::size_t dropped_institution = 0;

    std::size_t dropped() const { return dropped_year + dropped_institution; }
};

// Keeps records whose doctoral and hiring institutions are both in `institutions`
// and whose hire year lies in [1970, 2011].
CohortFilterResult filter_cohort(const std::vector<FacultyRecord>& records,
                                 const std::vector<Institution>& institutions);

struct HireEdge {
    std::size_t source = 0;  // doctoral institution index
    std::size_t target = 0;  // hiring institution index
    int year = 0;
    std::string faculty_id;

    bool self_loop() const { return source == target; }
};

// Directed multigraph of institutions; one edge per hire. Nodes are addressed by
// dense index into `nodes`.
class HiringNetwork {
public:
    HiringNetwork() = default;
    HiringNetwork(std::vector<Institution> nodes, std::vector<HireEdge> edges);

    const std::vector<Institution>& nodes() const { return nodes_; }
    const std::vector<HireEdge>& edges() const { return edges_; }
    std::size_t size() const { return nodes_.size(); }

    std::optional<std::size_t> index_of(const std::string& institution_id) const;
    std::size_t require_index(const std::string& institution_id) const;

    // Number of parallel edges source -> target.
    std::size_t multiplicity(std::size_t source, std::size_t target) const;

    // Same nodes, different edges; used to build networks from simulated placements.
    HiringNetwork with_edges(std::vector<HireEdge> edges) const;

private:
    std::vector<Institution> nodes_;
    std::vector<HireEdge> edges_;
    std::unordered_map<std::string, std::size_t> index_;
};

HiringNetwork build_network(const std::vector<Institution>& institutions,
                            const std::vector<FacultyRecord>& records);

struct MarketYear {
    int year = 0;
    std::vector<std::string> candidates;  // faculty ids
    std::vector<std::size_t> openings;    // institution indices, with multiplicity
    std::vector<std::size_t> candidate_origins;  // doctoral institution of each candidate
};

// One slice per distinct year in ascending order; candidates and openings are the
// two stub sets of that year's edges, listed in edge order.
std::vector<MarketYear> year_slices(const HiringNetwork& network);

}  // namespace fhire
