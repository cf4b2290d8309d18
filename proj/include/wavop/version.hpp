#pragma once

#include <array>
#include <string_view>
#include <utility>

namespace wavop {

// Bumped whenever a module's numerical output can change for the same input.
inline constexpr std::array<std::pair<std::string_view, std::string_view>, 8> kModuleVersions{{
    {"radial-core", "1.0.0"},
    {"free-resolvent", "1.1.0"},
    {"spectral-threshold", "1.0.0"},
    {"threshold-inversion", "1.0.0"},
    {"wave-operator", "1.1.0"},
    {"dispersive", "1.0.0"},
    {"harmonic-1d", "1.0.0"},
    {"cli", "1.0.0"},
}};

} // namespace wavop
