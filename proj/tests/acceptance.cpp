// Acceptance suite: runs the full verification catalog and prints one
// pass/fail line per criterion (plus the failing sub-checks, if any).

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <map>

#include "delaunay/verify.hpp"

TEST_CASE("acceptance catalog") {
    const auto results = delaunay::run_verification();
    REQUIRE_FALSE(results.empty());

    std::map<std::string, std::pair<int, int>> by_criterion;  // id -> (pass, total)
    for (const auto& r : results) {
        auto& slot = by_criterion[r.id];
        slot.first += r.pass ? 1 : 0;
        slot.second += 1;
    }
    // criteria are "C1".."C13"; print in numeric order
    for (int c = 1; c <= 13; ++c) {
        const std::string id = "C" + std::to_string(c);
        auto it = by_criterion.find(id);
        if (it == by_criterion.end()) continue;
        const auto [pass, total] = it->second;
        std::printf("[%s] criterion %2d: %d/%d checks\n",
                    pass == total ? "PASS" : "FAIL", c, pass, total);
    }
    for (const auto& r : results) {
        if (!r.pass)
            std::printf("     FAILED %s %s: measured %.6e > bound %.6e\n", r.id.c_str(),
                        r.name.c_str(), r.measured, r.bound);
        CHECK(r.pass);
    }
}
