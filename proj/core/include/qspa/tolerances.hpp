#pragma once

namespace qspa::tol {

// Single source of truth for the numeric gates used across the library.

inline constexpr double kUnitary = 1e-10;     // unitarity / Hermiticity / normalization admission
inline constexpr double kExact = 1e-12;       // exact-algebra assertions
inline constexpr double kPsdFloor = -1e-9;    // eigenvalue floor for physical states
inline constexpr double kLabelMatch = 1e-8;   // nearest-BB84 label matching
inline constexpr double kZeroBranch = 1e-12;  // forced-outcome probability floor

}  // namespace qspa::tol
