#include <doctest.h>

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <tuple>

#include "fhire/core_data.hpp"
#include "fhire/error.hpp"
#include "helpers.hpp"

using namespace fhire;

namespace {

const char* kInstitutions =
    "institution_id,name,region\n"
    "A,Alpha University,Northeast\n"
    "B,Beta College,West\n"
    "C,Gamma Institute,Canada\n";

DataErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const DataError& e) {
        return e.kind();
    }
    FAIL("expected a DataError");
    return DataErrorKind::EmptyInput;
}

FacultyRecord rec(std::string id, std::string u, std::string v, int year, Gender g = Gender::Male) {
    FacultyRecord r;
    r.id = std::move(id);
    r.doctoral_institution = std::move(u);
    r.hiring_institution = std::move(v);
    r.hire_year = year;
    r.gender = g;
    return r;
}

}  // namespace

TEST_CASE("institutions: header only gives an empty list") {
    test::TempDir dir;
    CHECK(load_institutions(dir.file("i.csv", "institution_id,name,region\n")).empty());
}

TEST_CASE("institutions: three rows with regions parsed") {
    test::TempDir dir;
    const auto inst = load_institutions(dir.file("i.csv", kInstitutions));
    REQUIRE(inst.size() == 3);
    CHECK(inst[0].id == "A");
    CHECK(inst[0].name == "Alpha University");
    CHECK(inst[0].region == Region::Northeast);
    CHECK(inst[1].region == Region::West);
    CHECK(inst[2].region == Region::Canada);
}

TEST_CASE("institutions: errors") {
    test::TempDir dir;
    CHECK(kind_of([&] { load_institutions(dir.file("i.csv", "institution_id,name,region\nX,Far,Europe\n")); }) ==
          DataErrorKind::InvalidRegion);
    CHECK(kind_of([&] { load_institutions(dir.path() / "absent.csv"); }) == DataErrorKind::MissingFile);
    CHECK(kind_of([&] {
              load_institutions(dir.file("d.csv", "institution_id,name,region\nA,a,South\nA,b,West\n"));
          }) == DataErrorKind::DuplicateId);
    CHECK(kind_of([&] { load_institutions(dir.file("h.csv", "id,name,region\n")); }) == DataErrorKind::BadHeader);
}

TEST_CASE("faculty: header only and a five-row round trip") {
    test::TempDir dir;
    const auto inst = load_institutions(dir.file("i.csv", kInstitutions));
    const std::string header = "faculty_id,phd_institution,hire_institution,hire_year,gender,postdoc\n";
    CHECK(load_faculty(dir.file("f0.csv", header), inst).empty());

    const auto faculty = load_faculty(dir.file("f.csv", header +
                                                            "f1,A,B,1990,F,1\n"
                                                            "f2,B,A,1975,M,0\n"
                                                            "f3,C,C,2011,U,0\n"
                                                            "f4,A,A,1970,M,1\n"
                                                            "f5,B,C,2000,F,0\n"),
                                      inst);
    REQUIRE(faculty.size() == 5);
    CHECK(faculty[0].id == "f1");
    CHECK(faculty[0].doctoral_institution == "A");
    CHECK(faculty[0].hiring_institution == "B");
    CHECK(faculty[0].hire_year == 1990);
    CHECK(faculty[0].gender == Gender::Female);
    CHECK(faculty[0].postdoc);
    CHECK(faculty[2].gender == Gender::Unknown);
    CHECK(faculty[3].gender == Gender::Male);
    CHECK(faculty[4].hiring_institution == "C");
    for (const auto& f : faculty) {
        CHECK(f.pub_count == 0);
        CHECK(f.topic_mix.empty());
        CHECK_FALSE(f.productivity_z.has_value());
    }
}

TEST_CASE("faculty: errors") {
    test::TempDir dir;
    const auto inst = load_institutions(dir.file("i.csv", kInstitutions));
    const std::string header = "faculty_id,phd_institution,hire_institution,hire_year,gender,postdoc\n";
    CHECK(kind_of([&] { load_faculty(dir.file("a.csv", header + "f1,A,Z,1990,F,0\n"), inst); }) ==
          DataErrorKind::UnknownInstitution);
    CHECK(kind_of([&] { load_faculty(dir.file("b.csv", header + "f1,A,B,19x0,F,0\n"), inst); }) ==
          DataErrorKind::BadYear);
    CHECK(kind_of([&] { load_faculty(dir.file("c.csv", header + "f1,A,B,1990,female,0\n"), inst); }) ==
          DataErrorKind::BadGender);
    CHECK(kind_of([&] { load_faculty(dir.file("d.csv", header + "f1,A,B,1990,F,0\nf1,B,A,1991,M,0\n"), inst); }) ==
          DataErrorKind::DuplicateId);
    CHECK(kind_of([&] { load_faculty(dir.file("e.csv", header + "f1,A,B,1990\n"), inst); }) ==
          DataErrorKind::BadField);
}

TEST_CASE("publications: counts through one year after hiring") {
    test::TempDir dir;
    const auto pubs = load_publications(dir.file("p.csv",
                                                 "faculty_id,title,year\n"
                                                 "f1,Early paper,1988\n"
                                                 "f1,Same year,1990\n"
                                                 "f1,Next year,1991\n"
                                                 "f1,Too late,1992\n"
                                                 "f2,Other,1980\n"));
    std::vector<FacultyRecord> records = {rec("f1", "A", "B", 1990), rec("f3", "A", "B", 1990)};
    assign_publication_counts(records, pubs);
    CHECK(records[0].pub_count == 3);
    CHECK(records[1].pub_count == 0);  // no rows at all
}

TEST_CASE("cohort filter: year window and institutions") {
    std::vector<Institution> inst = {{"A", "a", Region::South}, {"B", "b", Region::West}};
    std::vector<FacultyRecord> records = {rec("1", "A", "B", 1965), rec("2", "A", "B", 2011), rec("3", "A", "B", 1970),
                                          rec("4", "A", "B", 2012), rec("5", "X", "B", 1990)};
    const auto r = filter_cohort(records, inst);
    REQUIRE(r.kept.size() == 2);
    CHECK(r.kept[0].id == "2");
    CHECK(r.kept[1].id == "3");
    CHECK(r.dropped_year == 2);
    CHECK(r.dropped_institution == 1);
    CHECK(r.dropped() == 3);

    const auto again = filter_cohort(r.kept, inst);
    CHECK(again.kept.size() == r.kept.size());
    CHECK(again.dropped() == 0);
}

TEST_CASE("network: empty, parallel edges, hand-counted multiplicities") {
    std::vector<Institution> inst = {{"A", "a", Region::South}, {"B", "b", Region::West}, {"C", "c", Region::Canada}};
    const auto empty = build_network(inst, {});
    CHECK(empty.size() == 3);
    CHECK(empty.edges().empty());

    const auto two = build_network(inst, {rec("1", "A", "B", 1990), rec("2", "A", "B", 1990)});
    CHECK(two.multiplicity(0, 1) == 2);
    CHECK(two.multiplicity(1, 0) == 0);

    std::vector<FacultyRecord> ten = {rec("1", "A", "B", 1990), rec("2", "A", "B", 1991), rec("3", "B", "A", 1990),
                                      rec("4", "C", "C", 1992), rec("5", "A", "C", 1993), rec("6", "A", "C", 1993),
                                      rec("7", "A", "C", 1994), rec("8", "B", "C", 1990), rec("9", "C", "A", 1995),
                                      rec("10", "A", "A", 1996)};
    const auto net = build_network(inst, ten);
    CHECK(net.edges().size() == 10);
    CHECK(net.multiplicity(0, 1) == 2);
    CHECK(net.multiplicity(1, 0) == 1);
    CHECK(net.multiplicity(0, 2) == 3);
    CHECK(net.multiplicity(2, 2) == 1);
    CHECK(net.multiplicity(0, 0) == 1);
    CHECK(net.multiplicity(1, 2) == 1);
    CHECK(net.multiplicity(2, 0) == 1);
    CHECK(net.multiplicity(2, 1) == 0);

    // Round trip: the edge list is the record list.
    std::multiset<std::string> ids;
    for (const auto& e : net.edges()) ids.insert(e.faculty_id);
    std::multiset<std::string> expected;
    for (const auto& r : ten) expected.insert(r.id);
    CHECK(ids == expected);
}

TEST_CASE("year slices partition the edges") {
    std::vector<Institution> inst = {{"A", "a", Region::South}, {"B", "b", Region::West}};
    const auto single = year_slices(build_network(inst, {rec("1", "A", "B", 1990)}));
    REQUIRE(single.size() == 1);
    CHECK(single[0].year == 1990);
    CHECK(single[0].candidates.size() == 1);
    CHECK(single[0].openings.size() == 1);

    std::vector<FacultyRecord> records = {rec("1", "A", "B", 2001), rec("2", "A", "A", 2000), rec("3", "B", "A", 2000),
                                          rec("4", "B", "B", 2000), rec("5", "A", "B", 2001)};
    const auto net = build_network(inst, records);
    const auto slices = year_slices(net);
    REQUIRE(slices.size() == 2);
    CHECK(slices[0].year == 2000);
    CHECK(slices[0].candidates.size() == 3);
    CHECK(slices[1].candidates.size() == 2);

    std::multiset<std::tuple<std::size_t, std::size_t, int>> rebuilt;
    std::size_t total = 0;
    for (const auto& s : slices) {
        CHECK(s.candidates.size() == s.openings.size());
        CHECK(s.candidate_origins.size() == s.openings.size());
        for (std::size_t i = 0; i < s.openings.size(); ++i) {
            rebuilt.emplace(s.candidate_origins[i], s.openings[i], s.year);
        }
        total += s.candidates.size();
    }
    std::multiset<std::tuple<std::size_t, std::size_t, int>> edges;
    for (const auto& e : net.edges()) edges.emplace(e.source, e.target, e.year);
    CHECK(rebuilt == edges);
    CHECK(total == records.size());
}

TEST_CASE("region and gender tokens") {
    CHECK(parse_region("Midwest") == Region::Midwest);
    CHECK(std::string(to_string(Region::South)) == "South");
    CHECK(parse_gender("F") == Gender::Female);
    CHECK(parse_gender("U") == Gender::Unknown);
    CHECK_THROWS_AS(parse_gender("X"), DataError);
}
