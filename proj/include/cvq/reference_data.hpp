#pragma once

// Published numbers for the q-plate entanglement-distribution experiment.

#include <numbers>

#include "cvq/gaussian_state.hpp"

namespace cvq::reference {

/// Loss-corrected two-mode covariance of the type-II OPO beams, central values.
inline StandardFormParams experimental_two_mode() { return {0.72, 0.72, 0.51, -0.51}; }

/// Quoted uncertainties on a (= b) and on |c1| (= |c2|).
inline constexpr double kDiagonalUncertainty = 0.05;
inline constexpr double kCorrelationUncertainty = 0.01;

/// Zero-based (row, col) of the published four-mode matrix entry that reads
/// 0.60 where the closed form gives 0.
inline constexpr int kTypoRow = 3;
inline constexpr int kTypoCol = 2;

/// Per-entry tolerance when comparing against the two-decimal published matrix.
inline constexpr double kPublishedTolerance = 0.015;

/// The four-mode output covariance as printed (two decimals, register a1, a2, b1, b2),
/// including the 0.60 at (kTypoRow, kTypoCol).
inline Matrix published_four_mode() {
  Matrix m(8, 8);
  // clang-format off
  m << 0.60,  0,     0,     -0.10, 0.25,  0,     0,     -0.25,
       0,     0.60,  0.10,  0,     0,     -0.25, -0.25, 0,
       0,     0.10,  0.60,  0,     0,     -0.25, -0.25, 0,
       -0.10, 0,     0.60,  0.60,  -0.25, 0,     0,     0.25,
       0.25,  0,     0,     -0.25, 0.60,  0,     0,     -0.10,
       0,     -0.25, -0.25, 0,     0,     0.60,  0.10,  0,
       0,     -0.25, -0.25, 0,     0,     0.10,  0.60,  0,
       -0.25, 0,     0,     0.25,  -0.10, 0,     0,     0.60;
  // clang-format on
  return m;
}

/// Published matrix with the typo cell set to the closed-form value 0.
inline Matrix published_four_mode_corrected() {
  Matrix m = published_four_mode();
  m(kTypoRow, kTypoCol) = 0.0;
  return m;
}

inline ModeRegister four_mode_output_register() {
  return ModeRegister({{Polarization::L, 0, "a1"},
                       {Polarization::R, 1, "a2"},
                       {Polarization::R, 0, "b1"},
                       {Polarization::L, -1, "b2"}});
}

/// Vacuum modes that enter the q-plate alongside the two OPO beams.
inline std::vector<ModeLabel> vacuum_partners() {
  return {{Polarization::R, 1, "a~"}, {Polarization::L, -1, "b~"}};
}

inline constexpr double kHalfWaveRetardation = std::numbers::pi / 2.0;

}  // namespace cvq::reference
