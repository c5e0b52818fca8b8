#pragma once

namespace truncbound::tol {

// Absolute tolerances shared by every module.
inline constexpr double row = 1e-9;      // row-sum checks
inline constexpr double entry = 1e-12;   // entrywise domination
inline constexpr double solve = 1e-10;   // ||N(I - G) - I||_max
inline constexpr double prob = 1e-9;     // probability normalization
inline constexpr double stat = 1e-9;     // ||pi P - pi||_1
inline constexpr double pivot = 1e-12;   // smallest admissible LU pivot
inline constexpr double clamp = 1e-12;   // round-off negatives clamped to zero

inline constexpr unsigned long max_terms = 1'000'000;

}  // namespace truncbound::tol
