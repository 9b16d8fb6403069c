#pragma once

#include <string>
#include <vector>

#include "fhire/market.hpp"

namespace test {

struct CandidateSpec {
    std::size_t origin;
    std::size_t observed;
    double z = 0.0;
    bool postdoc = false;
    fhire::Gender gender = fhire::Gender::Male;
    int year = 2000;
};

inline fhire::Market make_market(std::vector<double> ranks, std::vector<fhire::Region> regions,
                                 const std::vector<CandidateSpec>& specs) {
    std::vector<fhire::Institution> inst;
    for (std::size_t i = 0; i < ranks.size(); ++i) inst.push_back({"i" + std::to_string(i), "", regions[i]});
    fhire::PrestigeRanking r;
    r.rank = std::move(ranks);
    std::vector<fhire::Candidate> cands;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto& s = specs[i];
        cands.push_back({"c" + std::to_string(i), s.origin, s.observed, s.year, s.gender, s.postdoc, s.z});
    }
    return fhire::Market(inst, r, cands);
}

inline std::vector<fhire::Region> all_south(std::size_t n) { return std::vector<fhire::Region>(n, fhire::Region::South); }

}  // namespace test
