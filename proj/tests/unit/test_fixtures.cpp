#include "coneflow/fixtures.hpp"
#include "coneflow/io.hpp"

#include <doctest.h>

#include <cmath>

using namespace coneflow;

TEST_CASE("fixture text format round-trips") {
    const std::vector<FixtureEntry> e = {{"a.b", 1.0 / 3.0, 1e-9, false, "closed form"},
                                         {"c", -2.5e-300, 0.1, true, "frozen; with a semicolon"}};
    const std::vector<FixtureEntry> back = parse_fixtures(format_fixtures(e));
    REQUIRE(back.size() == 2);
    CHECK(back[0].key == "a.b");
    CHECK(back[0].value == 1.0 / 3.0);
    CHECK(back[1].relative);
    CHECK(back[1].provenance == "frozen; with a semicolon");
    CHECK_THROWS(parse_fixtures("x = 1\n"));
    CHECK_THROWS(parse_fixtures("x = 1  # tol=foo:1; p\n"));
}

TEST_CASE("committed fixtures: present, matched by the library, no drift") {
    const std::vector<FixtureEntry> stored = parse_fixtures(read_file(CONEFLOW_FIXTURES));
    bool hasChi = false;
    for (const FixtureEntry& e : stored)
        if (e.key == "chi.eps0_rho0.5_u1") {
            hasChi = true;
            CHECK(e.value == 4.0);
        }
    CHECK(hasChi);
    for (const FixtureCheck& c : check_fixtures(stored)) {
        INFO(c.entry.key << " stored=" << c.entry.value << " actual=" << c.actual);
        CHECK(c.pass);
    }
    const std::vector<FixtureEntry> fresh = generate_fixtures();
    REQUIRE(fresh.size() == stored.size());
    for (std::size_t i = 0; i < fresh.size(); ++i) {
        INFO(fresh[i].key);
        CHECK(fresh[i].key == stored[i].key);
        const double allowed = stored[i].relative ? stored[i].tol * std::abs(stored[i].value) : stored[i].tol;
        CHECK(std::abs(fresh[i].value - stored[i].value) <= allowed);
    }
}
