#pragma once

#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace haarfact {

struct ResourceLimitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Finest dyadic level the library will touch.  Grids have 2^(level+1) cells,
// so the default keeps every dense object comfortably in memory.  Overridable
// through the HFL_MAX_LEVEL environment variable.
inline int max_level() {
    static int value = [] {
        if (const char* env = std::getenv("HFL_MAX_LEVEL")) {
            int v = std::atoi(env);
            if (v < 1 || v > 30) throw DomainError("HFL_MAX_LEVEL out of range [1,30]");
            return v;
        }
        return 20;
    }();
    return value;
}

}  // namespace haarfact
