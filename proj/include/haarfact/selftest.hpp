#pragma once

#include <string>
#include <vector>

namespace haarfact {

struct SelftestEntry {
    std::string name;
    bool passed = false;
    std::string detail;
};

// Quick property suites over every module; deterministic in the seed.
std::vector<SelftestEntry> run_selftests(bool quick, std::uint64_t seed = 1);

}  // namespace haarfact
