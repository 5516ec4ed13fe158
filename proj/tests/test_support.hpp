#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "cvq/cvq.hpp"

namespace cvq::testing {

inline ModeRegister plain_register(std::size_t n) {
  std::vector<ModeLabel> labels;
  for (std::size_t k = 0; k < n; ++k) labels.push_back({Polarization::H, static_cast<int>(k), "m" + std::to_string(k)});
  return ModeRegister(std::move(labels));
}

/// Random unitary (QR of a complex Gaussian matrix) as a phase-space matrix.
inline Matrix random_orthosymplectic(std::size_t n, std::mt19937& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto m = static_cast<Eigen::Index>(n);
  ComplexMatrix z(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) z(i, j) = {normal(rng), normal(rng)};
  }
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  return passive_matrix(qr.householderQ());
}

/// Physical n-mode covariance O1 D O2 diag(nu) O2^T D O1^T with random single-mode
/// squeezing D and thermal symplectic eigenvalues nu (all 1/2 when pure).
inline Matrix random_covariance(std::size_t n, std::mt19937& rng, bool pure = false, double max_r = 1.0) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const auto dim = static_cast<Eigen::Index>(2 * n);
  Vector thermal(dim);
  Matrix squeeze = Matrix::Identity(dim, dim);
  for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(n); ++k) {
    const double nu = pure ? kShotNoise : kShotNoise + uni(rng);
    thermal(2 * k) = nu;
    thermal(2 * k + 1) = nu;
    const double r = max_r * uni(rng);
    squeeze(2 * k, 2 * k) = std::exp(r);
    squeeze(2 * k + 1, 2 * k + 1) = std::exp(-r);
  }
  const Matrix s = random_orthosymplectic(n, rng) * squeeze * random_orthosymplectic(n, rng);
  Matrix cov = s * thermal.asDiagonal() * s.transpose();
  return 0.5 * (cov + cov.transpose());
}

inline GaussianState random_state(std::size_t n, std::mt19937& rng, bool pure = false) {
  return GaussianState(plain_register(n), random_covariance(n, rng, pure));
}

/// Physical standard-form parameters by rejection sampling.
inline StandardFormParams random_standard_form(std::mt19937& rng) {
  std::uniform_real_distribution<double> diag(kShotNoise, 3.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (;;) {
    StandardFormParams p{diag(rng), diag(rng), 0.0, 0.0};
    const double bound = std::sqrt(p.a * p.b);
    p.c1 = bound * unit(rng);
    p.c2 = bound * unit(rng);
    if (validate(GaussianState(default_two_mode_register(), standard_form_matrix(p))).physical) return p;
  }
}

inline std::vector<std::size_t> random_permutation(std::size_t n, std::mt19937& rng) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

/// Standard-form input through waveplate, vacuum embedding and the q-plate.
inline GaussianState four_mode_output(const StandardFormParams& p, double delta = std::numbers::pi / 2) {
  const auto embedded =
      reorder(embed_with_vacua(quarter_waveplate_relabel(make_standard_form(p)), reference::vacuum_partners()),
              {0, 2, 1, 3});
  return apply(qplate_transform({0.5, delta}, embedded.modes()), embedded);
}

// ---------------------------------------------------------------------------
// Closed-form two-mode oracles (independent of the generic eigen-solver).
// ---------------------------------------------------------------------------

struct TwoModeInvariants {
  double det_a, det_b, det_c, det_total;
};

inline TwoModeInvariants two_mode_invariants(const Matrix& cov) {
  return {cov.block<2, 2>(0, 0).determinant(), cov.block<2, 2>(2, 2).determinant(),
          cov.block<2, 2>(0, 2).determinant(), cov.determinant()};
}

/// Smaller symplectic eigenvalue of a two-mode covariance.
inline double two_mode_nu_minus(const Matrix& cov) {
  const auto inv = two_mode_invariants(cov);
  const double delta = inv.det_a + inv.det_b + 2.0 * inv.det_c;
  return std::sqrt((delta - std::sqrt(std::max(0.0, delta * delta - 4.0 * inv.det_total))) / 2.0);
}

/// Smaller symplectic eigenvalue of the partial transpose of a two-mode covariance.
inline double two_mode_pt_nu_minus(const Matrix& cov) {
  const auto inv = two_mode_invariants(cov);
  const double delta = inv.det_a + inv.det_b - 2.0 * inv.det_c;
  return std::sqrt((delta - std::sqrt(std::max(0.0, delta * delta - 4.0 * inv.det_total))) / 2.0);
}

}  // namespace cvq::testing
