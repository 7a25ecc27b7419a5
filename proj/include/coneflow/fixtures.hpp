#pragma once

#include <string>
#include <vector>

namespace coneflow {

struct FixtureEntry {
    std::string key;
    double value = 0.0;
    // tolerance applied to |library - value|, relative to |value| when relative
    double tol = 0.0;
    bool relative = false;
    std::string provenance;
};

struct FixtureCheck {
    FixtureEntry entry;
    double actual = 0.0;
    double deviation = 0.0;
    bool pass = false;
};

// Values from the reference computations, in a fixed order.
std::vector<FixtureEntry> generate_fixtures();
// Library values for the same keys compared against stored entries.
std::vector<FixtureCheck> check_fixtures(const std::vector<FixtureEntry>& stored);

// "key = value  # tol=abs:1e-8; provenance" lines with a short header
std::string format_fixtures(const std::vector<FixtureEntry>& entries);
std::vector<FixtureEntry> parse_fixtures(const std::string& text);

} // namespace coneflow
