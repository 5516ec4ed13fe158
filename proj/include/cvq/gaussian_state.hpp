#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <compare>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cvq/errors.hpp"

namespace cvq {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;

/// Vacuum variance of a single quadrature, X = (k + k^dagger)/sqrt(2).
inline constexpr double kShotNoise = 0.5;

namespace tol {
inline constexpr double kSymmetry = 1e-10;
inline constexpr double kPhysicality = 1e-9;
inline constexpr double kMatrixEquality = 1e-12;
}  // namespace tol

// ---------------------------------------------------------------------------
// Mode labels
// ---------------------------------------------------------------------------

enum class Polarization { H, V, L, R };

inline std::string_view to_string(Polarization p) {
  switch (p) {
    case Polarization::H: return "H";
    case Polarization::V: return "V";
    case Polarization::L: return "L";
    case Polarization::R: return "R";
  }
  return "?";
}

inline std::optional<Polarization> parse_polarization(std::string_view s) {
  if (s == "H") return Polarization::H;
  if (s == "V") return Polarization::V;
  if (s == "L") return Polarization::L;
  if (s == "R") return Polarization::R;
  return std::nullopt;
}

inline bool is_circular(Polarization p) { return p == Polarization::L || p == Polarization::R; }

/// Identity of one optical mode: polarization, OAM quanta and a short tag.
struct ModeLabel {
  Polarization polarization = Polarization::H;
  int oam = 0;
  std::string tag;

  friend bool operator==(const ModeLabel&, const ModeLabel&) = default;
  friend auto operator<=>(const ModeLabel&, const ModeLabel&) = default;
};

inline std::string describe(const ModeLabel& m) {
  return m.tag + "[" + std::string(to_string(m.polarization)) + "," + std::to_string(m.oam) + "]";
}

/// Ordered list of distinct modes. Mode k owns phase-space rows 2k (X) and 2k+1 (Y).
class ModeRegister {
 public:
  ModeRegister() = default;

  explicit ModeRegister(std::vector<ModeLabel> modes) : modes_(std::move(modes)) {
    for (std::size_t i = 0; i < modes_.size(); ++i) {
      for (std::size_t j = i + 1; j < modes_.size(); ++j) {
        if (modes_[i] == modes_[j]) {
          throw Error(ErrorCode::DuplicateLabel, "mode " + describe(modes_[i]) + " appears twice");
        }
      }
    }
  }

  std::size_t size() const noexcept { return modes_.size(); }
  bool empty() const noexcept { return modes_.empty(); }
  const ModeLabel& operator[](std::size_t i) const { return modes_[i]; }
  const ModeLabel& at(std::size_t i) const {
    if (i >= modes_.size()) {
      throw Error(ErrorCode::IndexOutOfRange,
                  "mode index " + std::to_string(i) + " with " + std::to_string(modes_.size()) + " modes");
    }
    return modes_[i];
  }
  const std::vector<ModeLabel>& modes() const noexcept { return modes_; }
  auto begin() const noexcept { return modes_.begin(); }
  auto end() const noexcept { return modes_.end(); }

  /// Index of the first mode carrying `tag`.
  std::optional<std::size_t> find_tag(std::string_view tag) const {
    for (std::size_t i = 0; i < modes_.size(); ++i) {
      if (modes_[i].tag == tag) return i;
    }
    return std::nullopt;
  }

  bool contains(const ModeLabel& m) const { return std::find(modes_.begin(), modes_.end(), m) != modes_.end(); }

  friend bool operator==(const ModeRegister&, const ModeRegister&) = default;

 private:
  std::vector<ModeLabel> modes_;
};

// ---------------------------------------------------------------------------
// Symplectic form
// ---------------------------------------------------------------------------

/// Direct sum of n blocks [[0, 1], [-1, 0]].
inline Matrix symplectic_form(std::size_t n) {
  Matrix omega = Matrix::Zero(2 * n, 2 * n);
  for (std::size_t k = 0; k < n; ++k) {
    omega(2 * k, 2 * k + 1) = 1.0;
    omega(2 * k + 1, 2 * k) = -1.0;
  }
  return omega;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "cannot compare matrices of different shapes");
  }
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

inline double max_asymmetry(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

/// Smallest eigenvalue of cov + (i/2) Omega, evaluated on the symmetric part of cov.
inline double min_heisenberg_eigenvalue(const Matrix& cov) {
  const auto n = static_cast<std::size_t>(cov.rows() / 2);
  const Matrix sym = 0.5 * (cov + cov.transpose());
  ComplexMatrix h = sym.cast<std::complex<double>>();
  h += std::complex<double>(0.0, kShotNoise) * symplectic_form(n).cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NumericalFailure, "Hermitian eigen-solve of the uncertainty matrix failed");
  }
  return solver.eigenvalues().minCoeff();
}

// ---------------------------------------------------------------------------
// Gaussian state
// ---------------------------------------------------------------------------

/// Mean vector and covariance matrix of an n-mode Gaussian state in interleaved
/// (X1, Y1, ..., Xn, Yn) ordering. Construction checks shapes only; physicality
/// is reported by validate().
class GaussianState {
 public:
  GaussianState(ModeRegister reg, Vector mean, Matrix cov)
      : register_(std::move(reg)), mean_(std::move(mean)), cov_(std::move(cov)) {
    if (register_.empty()) {
      throw Error(ErrorCode::DimensionMismatch, "a Gaussian state needs at least one mode");
    }
    const auto dim = static_cast<Eigen::Index>(2 * register_.size());
    if (cov_.rows() != dim || cov_.cols() != dim) {
      throw Error(ErrorCode::DimensionMismatch,
                  "covariance is " + std::to_string(cov_.rows()) + "x" + std::to_string(cov_.cols()) +
                      " but the register has " + std::to_string(register_.size()) + " modes");
    }
    if (mean_.size() != dim) {
      throw Error(ErrorCode::DimensionMismatch,
                  "mean has length " + std::to_string(mean_.size()) + ", expected " + std::to_string(dim));
    }
  }

  GaussianState(ModeRegister reg, Matrix cov)
      : GaussianState(reg, Vector::Zero(static_cast<Eigen::Index>(2 * reg.size())), std::move(cov)) {}

  static GaussianState vacuum(ModeRegister reg) {
    const auto dim = static_cast<Eigen::Index>(2 * reg.size());
    return GaussianState(std::move(reg), kShotNoise * Matrix::Identity(dim, dim));
  }

  const ModeRegister& modes() const noexcept { return register_; }
  const Vector& mean() const noexcept { return mean_; }
  const Matrix& cov() const noexcept { return cov_; }
  std::size_t num_modes() const noexcept { return register_.size(); }

  /// 2x2 covariance block between modes i and j.
  Matrix block(std::size_t i, std::size_t j) const {
    return cov_.block<2, 2>(static_cast<Eigen::Index>(2 * i), static_cast<Eigen::Index>(2 * j));
  }

  friend bool operator==(const GaussianState& a, const GaussianState& b) {
    return a.register_ == b.register_ && a.mean_ == b.mean_ && a.cov_ == b.cov_;
  }

 private:
  ModeRegister register_;
  Vector mean_;
  Matrix cov_;
};

struct ValidityReport {
  bool symmetric = false;
  bool physical = false;
  double min_heisenberg_eigenvalue = 0.0;
  double max_asymmetry = 0.0;
};

inline ValidityReport validate(const GaussianState& state) {
  ValidityReport r;
  r.max_asymmetry = max_asymmetry(state.cov());
  r.symmetric = r.max_asymmetry <= tol::kSymmetry;
  if (!state.cov().allFinite() || !state.mean().allFinite()) {
    r.physical = false;
    r.min_heisenberg_eigenvalue = std::nan("");
    return r;
  }
  r.min_heisenberg_eigenvalue = min_heisenberg_eigenvalue(state.cov());
  r.physical = r.min_heisenberg_eigenvalue >= -tol::kPhysicality;
  return r;
}

/// Throws PhysicalityViolation unless the state is symmetric and satisfies the
/// uncertainty relation.
inline void require_valid(const GaussianState& state, std::string_view context = "state") {
  const auto r = validate(state);
  if (!r.symmetric) {
    throw Error(ErrorCode::PhysicalityViolation,
                std::string(context) + ": covariance not symmetric (max asymmetry " +
                    std::to_string(r.max_asymmetry) + ")");
  }
  if (!r.physical) {
    throw Error(ErrorCode::PhysicalityViolation,
                std::string(context) + ": min eigenvalue of cov + i*Omega/2 is " +
                    std::to_string(r.min_heisenberg_eigenvalue));
  }
}

// ---------------------------------------------------------------------------
// Two-mode standard form
// ---------------------------------------------------------------------------

struct StandardFormParams {
  double a = kShotNoise;
  double b = kShotNoise;
  double c1 = 0.0;
  double c2 = 0.0;
};

inline ModeRegister default_two_mode_register() {
  return ModeRegister({{Polarization::H, 0, "a"}, {Polarization::V, 0, "b"}});
}

inline Matrix standard_form_matrix(const StandardFormParams& p) {
  Matrix m(4, 4);
  // clang-format off
  m << p.a,  0.0,  p.c1, 0.0,
       0.0,  p.a,  0.0,  p.c2,
       p.c1, 0.0,  p.b,  0.0,
       0.0,  p.c2, 0.0,  p.b;
  // clang-format on
  return m;
}

inline GaussianState make_standard_form(const StandardFormParams& p,
                                        ModeRegister reg = default_two_mode_register()) {
  if (reg.size() != 2) {
    throw Error(ErrorCode::DimensionMismatch, "standard form needs a two-mode register");
  }
  if (!(p.a >= kShotNoise - tol::kPhysicality) || !(p.b >= kShotNoise - tol::kPhysicality)) {
    throw Error(ErrorCode::PhysicalityViolation, "standard form requires a >= 1/2 and b >= 1/2");
  }
  GaussianState state(std::move(reg), standard_form_matrix(p));
  require_valid(state, "standard form");
  return state;
}

// ---------------------------------------------------------------------------
// Marginals and reordering
// ---------------------------------------------------------------------------

inline void check_indices(std::span<const std::size_t> indices, std::size_t n) {
  std::vector<bool> seen(n, false);
  for (auto i : indices) {
    if (i >= n) {
      throw Error(ErrorCode::IndexOutOfRange,
                  "mode index " + std::to_string(i) + " with " + std::to_string(n) + " modes");
    }
    if (seen[i]) throw Error(ErrorCode::DuplicateIndex, "mode index " + std::to_string(i) + " repeated");
    seen[i] = true;
  }
}

namespace detail {

/// Gathers the rows/columns of the listed modes in the listed order.
inline GaussianState select_modes(const GaussianState& state, std::span<const std::size_t> indices) {
  const auto m = static_cast<Eigen::Index>(indices.size());
  std::vector<ModeLabel> labels;
  labels.reserve(indices.size());
  Vector mean(2 * m);
  Matrix cov(2 * m, 2 * m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto src_r = static_cast<Eigen::Index>(indices[static_cast<std::size_t>(r)]);
    labels.push_back(state.modes()[static_cast<std::size_t>(src_r)]);
    mean.segment<2>(2 * r) = state.mean().segment<2>(2 * src_r);
    for (Eigen::Index c = 0; c < m; ++c) {
      const auto src_c = static_cast<Eigen::Index>(indices[static_cast<std::size_t>(c)]);
      cov.block<2, 2>(2 * r, 2 * c) = state.cov().block<2, 2>(2 * src_r, 2 * src_c);
    }
  }
  return GaussianState(ModeRegister(std::move(labels)), std::move(mean), std::move(cov));
}

}  // namespace detail

/// Marginal state on `subset`, kept in the original register order.
inline GaussianState reduce(const GaussianState& state, std::span<const std::size_t> subset) {
  if (subset.empty()) throw Error(ErrorCode::InvalidArgument, "reduce needs a nonempty subset");
  check_indices(subset, state.num_modes());
  std::vector<std::size_t> sorted(subset.begin(), subset.end());
  std::sort(sorted.begin(), sorted.end());
  return detail::select_modes(state, sorted);
}

inline GaussianState reduce(const GaussianState& state, std::initializer_list<std::size_t> subset) {
  return reduce(state, std::span<const std::size_t>(subset.begin(), subset.size()));
}

/// New mode i is old mode permutation[i].
inline GaussianState reorder(const GaussianState& state, std::span<const std::size_t> permutation) {
  if (permutation.size() != state.num_modes()) {
    throw Error(ErrorCode::NotAPermutation, "permutation has " + std::to_string(permutation.size()) +
                                                " entries for " + std::to_string(state.num_modes()) + " modes");
  }
  try {
    check_indices(permutation, state.num_modes());
  } catch (const Error& e) {
    throw Error(ErrorCode::NotAPermutation, e.what());
  }
  return detail::select_modes(state, permutation);
}

inline GaussianState reorder(const GaussianState& state, std::initializer_list<std::size_t> permutation) {
  return reorder(state, std::span<const std::size_t>(permutation.begin(), permutation.size()));
}

inline std::vector<std::size_t> inverse_permutation(std::span<const std::size_t> permutation) {
  std::vector<std::size_t> inv(permutation.size());
  for (std::size_t i = 0; i < permutation.size(); ++i) inv.at(permutation[i]) = i;
  return inv;
}

// ---------------------------------------------------------------------------
// Scalar diagnostics
// ---------------------------------------------------------------------------

inline double mean_photon_number(const GaussianState& state, std::size_t mode) {
  if (mode >= state.num_modes()) {
    throw Error(ErrorCode::IndexOutOfRange, "mode index " + std::to_string(mode));
  }
  const auto x = static_cast<Eigen::Index>(2 * mode);
  const auto& s = state.cov();
  const auto& m = state.mean();
  return (s(x, x) + s(x + 1, x + 1) + m(x) * m(x) + m(x + 1) * m(x + 1) - 2.0 * kShotNoise) / 2.0;
}

inline double total_photon_number(const GaussianState& state) {
  double total = 0.0;
  for (std::size_t k = 0; k < state.num_modes(); ++k) total += mean_photon_number(state, k);
  return total;
}

/// 1 / (2^n sqrt(det cov)); equals 1 exactly for pure states.
inline double purity(const GaussianState& state) {
  const double det = state.cov().determinant();
  if (!(det > 0.0)) {
    throw Error(ErrorCode::NonPositiveDeterminant, "covariance determinant is " + std::to_string(det));
  }
  return 1.0 / (std::pow(2.0, static_cast<double>(state.num_modes())) * std::sqrt(det));
}

}  // namespace cvq
