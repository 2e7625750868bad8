#pragma once

#include <string>

#include "evosample/error.hpp"

namespace evosample {

// The three ensemble fitness functions, all minimized:
//   fempo - mean per-member RMSE on each member's out-of-bag rows
//   fempt - mean per-member RMSE on each member's private held-out rows
//   fegt  - ensemble RMSE on a global holdout carved from the training data
struct FitnessKind {
    enum class Kind { fempo, fempt, fegt };

    Kind kind = Kind::fempo;
    double global_holdout_fraction = 0.2;  // fegt only

    void validate() const {
        if (kind == Kind::fegt &&
            !(global_holdout_fraction > 0.0 && global_holdout_fraction < 1.0))
            throw ConfigError("global_holdout_fraction must lie in (0,1)");
    }
};

inline const char* to_string(FitnessKind::Kind k) {
    switch (k) {
        case FitnessKind::Kind::fempo: return "fempo";
        case FitnessKind::Kind::fempt: return "fempt";
        case FitnessKind::Kind::fegt: return "fegt";
    }
    return "?";
}

inline FitnessKind::Kind fitness_kind_from_string(const std::string& s) {
    if (s == "fempo") return FitnessKind::Kind::fempo;
    if (s == "fempt") return FitnessKind::Kind::fempt;
    if (s == "fegt") return FitnessKind::Kind::fegt;
    throw ConfigError("unknown fitness '" + s + "' (expected fempo|fempt|fegt)");
}

}  // namespace evosample
