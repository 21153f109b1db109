#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace epifit {

// Ordering is fixed (juvenile < adult < old) and relied on for serialization.
enum class AgeGroup : int { juvenile = 0, adult = 1, old = 2 };

inline constexpr int kNumAgeGroups = 3;

inline constexpr std::array<AgeGroup, 3> kAgeGroups = {
    AgeGroup::juvenile, AgeGroup::adult, AgeGroup::old};

inline const char* to_string(AgeGroup g) {
    switch (g) {
        case AgeGroup::juvenile: return "juvenile";
        case AgeGroup::adult: return "adult";
        case AgeGroup::old: return "old";
    }
    return "?";
}

inline AgeGroup age_group_from_string(const std::string& s) {
    if (s == "juvenile") return AgeGroup::juvenile;
    if (s == "adult") return AgeGroup::adult;
    if (s == "old") return AgeGroup::old;
    throw std::invalid_argument("unknown age group: '" + s + "'");
}

} // namespace epifit
