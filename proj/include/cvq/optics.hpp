#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "cvq/gaussian_state.hpp"

namespace cvq {

/// Linear phase-space map S acting as cov -> S cov S^T, mean -> S mean, taking
/// states on `input` to states on `output`.
class SymplecticTransform {
 public:
  SymplecticTransform(Matrix s, ModeRegister input, ModeRegister output)
      : s_(std::move(s)), input_(std::move(input)), output_(std::move(output)) {
    const auto dim = static_cast<Eigen::Index>(2 * input_.size());
    if (input_.size() != output_.size()) {
      throw Error(ErrorCode::DimensionMismatch, "input and output registers differ in length");
    }
    if (s_.rows() != dim || s_.cols() != dim) {
      throw Error(ErrorCode::DimensionMismatch, "transform matrix does not match the register size");
    }
  }

  const Matrix& matrix() const noexcept { return s_; }
  const ModeRegister& input() const noexcept { return input_; }
  const ModeRegister& output() const noexcept { return output_; }

  /// max |S Omega S^T - Omega|
  double symplectic_deviation() const {
    const Matrix omega = symplectic_form(input_.size());
    return max_abs_diff(s_ * omega * s_.transpose(), omega);
  }
  /// max |S S^T - I|
  double orthogonality_deviation() const {
    return max_abs_diff(s_ * s_.transpose(), Matrix::Identity(s_.rows(), s_.cols()));
  }
  bool is_symplectic() const { return symplectic_deviation() <= tol::kMatrixEquality; }
  bool is_passive() const { return is_symplectic() && orthogonality_deviation() <= tol::kMatrixEquality; }

  /// `this` followed by `next`.
  SymplecticTransform then(const SymplecticTransform& next) const {
    if (next.input_ != output_) {
      throw Error(ErrorCode::RegisterMismatch, "cannot chain transforms with mismatched registers");
    }
    return SymplecticTransform(next.s_ * s_, input_, next.output_);
  }

 private:
  Matrix s_;
  ModeRegister input_;
  ModeRegister output_;
};

/// Real phase-space matrix of the passive map out_j = sum_k u(j,k) in_k on
/// annihilation operators. Each complex entry becomes the 2x2 block
/// [[Re, -Im], [Im, Re]].
inline Matrix passive_matrix(const ComplexMatrix& u) {
  Matrix s(2 * u.rows(), 2 * u.cols());
  for (Eigen::Index j = 0; j < u.rows(); ++j) {
    for (Eigen::Index k = 0; k < u.cols(); ++k) {
      const auto z = u(j, k);
      s.block<2, 2>(2 * j, 2 * k) << z.real(), -z.imag(), z.imag(), z.real();
    }
  }
  return s;
}

inline SymplecticTransform passive_transform(const ComplexMatrix& u, ModeRegister input, ModeRegister output) {
  if (u.rows() != u.cols()) throw Error(ErrorCode::DimensionMismatch, "mode-space matrix must be square");
  return SymplecticTransform(passive_matrix(u), std::move(input), std::move(output));
}

inline SymplecticTransform identity_transform(const ModeRegister& reg) {
  const auto dim = static_cast<Eigen::Index>(2 * reg.size());
  return SymplecticTransform(Matrix::Identity(dim, dim), reg, reg);
}

/// Phase shift k -> exp(i theta) k on one mode.
inline SymplecticTransform phase_rotation(const ModeRegister& reg, std::size_t mode, double theta) {
  reg.at(mode);
  const auto n = static_cast<Eigen::Index>(reg.size());
  ComplexMatrix u = ComplexMatrix::Identity(n, n);
  u(static_cast<Eigen::Index>(mode), static_cast<Eigen::Index>(mode)) = std::polar(1.0, theta);
  return passive_transform(u, reg, reg);
}

/// Real beam splitter of transmissivity cos^2(theta) between modes i and j.
inline SymplecticTransform beam_splitter(const ModeRegister& reg, std::size_t i, std::size_t j, double theta) {
  reg.at(i);
  reg.at(j);
  if (i == j) throw Error(ErrorCode::DuplicateIndex, "beam splitter needs two distinct modes");
  const auto n = static_cast<Eigen::Index>(reg.size());
  const auto ii = static_cast<Eigen::Index>(i);
  const auto jj = static_cast<Eigen::Index>(j);
  ComplexMatrix u = ComplexMatrix::Identity(n, n);
  u(ii, ii) = std::cos(theta);
  u(ii, jj) = std::sin(theta);
  u(jj, ii) = -std::sin(theta);
  u(jj, jj) = std::cos(theta);
  return passive_transform(u, reg, reg);
}

inline GaussianState apply(const SymplecticTransform& t, const GaussianState& state) {
  if (state.modes() != t.input()) {
    throw Error(ErrorCode::RegisterMismatch, "state register does not match the transform input register");
  }
  if (!t.is_symplectic()) {
    throw Error(ErrorCode::NonSymplectic,
                "transform deviates from symplecticity by " + std::to_string(t.symplectic_deviation()));
  }
  const Matrix& s = t.matrix();
  Matrix cov = s * state.cov() * s.transpose();
  // S cov S^T is symmetric in exact arithmetic; drop the rounding asymmetry.
  cov = 0.5 * (cov + cov.transpose()).eval();
  return GaussianState(t.output(), s * state.mean(), std::move(cov));
}

// ---------------------------------------------------------------------------
// Pipeline elements
// ---------------------------------------------------------------------------

/// Moves the linear basis to the circular one: H -> L, V -> R. The covariance
/// matrix and mean are carried over unchanged.
inline GaussianState quarter_waveplate_relabel(const GaussianState& state) {
  std::vector<ModeLabel> labels;
  labels.reserve(state.num_modes());
  for (const auto& m : state.modes()) {
    ModeLabel out = m;
    switch (m.polarization) {
      case Polarization::H: out.polarization = Polarization::L; break;
      case Polarization::V: out.polarization = Polarization::R; break;
      default:
        throw Error(ErrorCode::BadPolarization, "mode " + describe(m) + " is already circularly polarized");
    }
    labels.push_back(std::move(out));
  }
  return GaussianState(ModeRegister(std::move(labels)), state.mean(), state.cov());
}

/// Appends vacuum modes (variance 1/2 per quadrature) after the existing ones.
inline GaussianState embed_with_vacua(const GaussianState& state, const std::vector<ModeLabel>& vacuum_labels) {
  if (vacuum_labels.empty()) return state;
  std::vector<ModeLabel> labels = state.modes().modes();
  for (const auto& v : vacuum_labels) {
    if (std::find(labels.begin(), labels.end(), v) != labels.end()) {
      throw Error(ErrorCode::DuplicateLabel, "mode " + describe(v) + " already present");
    }
    labels.push_back(v);
  }
  const auto old_dim = state.cov().rows();
  const auto dim = static_cast<Eigen::Index>(2 * labels.size());
  Matrix cov = kShotNoise * Matrix::Identity(dim, dim);
  cov.topLeftCorner(old_dim, old_dim) = state.cov();
  Vector mean = Vector::Zero(dim);
  mean.head(old_dim) = state.mean();
  return GaussianState(ModeRegister(std::move(labels)), std::move(mean), std::move(cov));
}

/// Uniform loss channel: cov -> eta cov + (1 - eta)/2 I, mean -> sqrt(eta) mean.
inline GaussianState uniform_loss(const GaussianState& state, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw Error(ErrorCode::InvalidArgument, "efficiency must lie in (0, 1]");
  const auto dim = state.cov().rows();
  return GaussianState(state.modes(), std::sqrt(eta) * state.mean(),
                       eta * state.cov() + (1.0 - eta) * kShotNoise * Matrix::Identity(dim, dim));
}

// ---------------------------------------------------------------------------
// q-plate
// ---------------------------------------------------------------------------

struct QPlateSpec {
  double q = 0.5;      // topological charge, half-integer
  double delta = 0.0;  // retardation in radians, [0, 2 pi)

  /// OAM quanta added to a left-circular input (2q).
  int oam_shift() const { return static_cast<int>(std::lround(2.0 * q)); }

  void check() const {
    const double twice = 2.0 * q;
    if (!std::isfinite(twice) || twice == 0.0 || std::abs(twice - std::round(twice)) > 1e-12) {
      throw Error(ErrorCode::InvalidArgument, "q-plate charge must be a nonzero half-integer");
    }
    if (!(delta >= 0.0 && delta < 2.0 * std::numbers::pi)) {
      throw Error(ErrorCode::InvalidArgument, "q-plate retardation must lie in [0, 2 pi)");
    }
  }
};

/// Mode the q-plate couples `m` to: [L, l] <-> [R, l + 2q].
inline std::pair<Polarization, int> qplate_partner(const ModeLabel& m, const QPlateSpec& spec) {
  switch (m.polarization) {
    case Polarization::L: return {Polarization::R, m.oam + spec.oam_shift()};
    case Polarization::R: return {Polarization::L, m.oam - spec.oam_shift()};
    default: throw Error(ErrorCode::NotCircular, "mode " + describe(m) + " is not circularly polarized");
  }
}

/// Pairs of register indices (first < second) coupled by the q-plate.
inline std::vector<std::pair<std::size_t, std::size_t>> qplate_pairs(const QPlateSpec& spec,
                                                                     const ModeRegister& reg) {
  const std::size_t n = reg.size();
  std::vector<std::size_t> partner(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [pol, oam] = qplate_partner(reg[i], spec);
    std::vector<std::size_t> hits;
    for (std::size_t j = 0; j < n; ++j) {
      if (reg[j].polarization == pol && reg[j].oam == oam) hits.push_back(j);
    }
    const std::string wanted = "[" + std::string(to_string(pol)) + "," + std::to_string(oam) + "]";
    if (hits.empty()) {
      throw Error(ErrorCode::UnpairedMode, "mode " + describe(reg[i]) + " has no partner " + wanted);
    }
    if (hits.size() > 1) {
      throw Error(ErrorCode::AmbiguousPairing, "mode " + describe(reg[i]) + " has several partners " + wanted);
    }
    partner[i] = hits.front();
  }
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    if (partner[partner[i]] != i) {
      throw Error(ErrorCode::AmbiguousPairing, "q-plate coupling of " + describe(reg[i]) + " is not mutual");
    }
    if (i < partner[i]) pairs.emplace_back(i, partner[i]);
  }
  return pairs;
}

/// Reversible q-plate acting on every coupled pair (k, k~) of the register:
///   k_1 = cos(delta/2) k - i sin(delta/2) k~
///   k_2 = cos(delta/2) k~ - i sin(delta/2) k
/// where k is the pair member appearing first in the register. At delta = pi/2
/// this gives X_1 = (X + Y~)/sqrt(2), Y_1 = (Y - X~)/sqrt(2). Output modes keep
/// their polarization and OAM and are tagged <first tag>1, <first tag>2.
inline SymplecticTransform qplate_transform(const QPlateSpec& spec, const ModeRegister& reg) {
  spec.check();
  const auto pairs = qplate_pairs(spec, reg);
  const auto n = static_cast<Eigen::Index>(reg.size());
  const double c = std::cos(spec.delta / 2.0);
  const double s = std::sin(spec.delta / 2.0);
  const std::complex<double> cross(0.0, -s);

  ComplexMatrix u = ComplexMatrix::Zero(n, n);
  std::vector<ModeLabel> out = reg.modes();
  for (const auto& [first, second] : pairs) {
    const auto i = static_cast<Eigen::Index>(first);
    const auto j = static_cast<Eigen::Index>(second);
    u(i, i) = c;
    u(j, j) = c;
    u(i, j) = cross;
    u(j, i) = cross;
    const std::string base = reg[first].tag;
    out[first].tag = base + "1";
    out[second].tag = base + "2";
  }
  return passive_transform(u, reg, ModeRegister(std::move(out)));
}

/// Four-mode output covariance written directly in terms of the two-mode
/// standard-form input, register order (a1, a2, b1, b2).
inline Matrix sigma4_closed_form(const StandardFormParams& p, double sn = kShotNoise) {
  if (!(sn > 0.0)) throw Error(ErrorCode::InvalidArgument, "shot noise must be positive");
  const double a = p.a, b = p.b, c1 = p.c1, c2 = p.c2;
  Matrix m(8, 8);
  // clang-format off
  m << a + sn, 0,      0,      sn - a, c1,     0,      0,      -c1,
       0,      a + sn, a - sn, 0,      0,      c2,     c2,     0,
       0,      a - sn, a + sn, 0,      0,      c2,     c2,     0,
       sn - a, 0,      0,      a + sn, -c1,    0,      0,      c1,
       c1,     0,      0,      -c1,    b + sn, 0,      0,      sn - b,
       0,      c2,     c2,     0,      0,      b + sn, b - sn, 0,
       0,      c2,     c2,     0,      0,      b - sn, b + sn, 0,
       -c1,    0,      0,      c1,     sn - b, 0,      0,      b + sn;
  // clang-format on
  return 0.5 * m;
}

/// Two-mode squeezed vacuum with squeezing r seen through efficiency eta.
inline GaussianState opo_source(double r, double eta = 1.0) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw Error(ErrorCode::InvalidArgument, "squeezing must be >= 0");
  if (!(eta > 0.0 && eta <= 1.0)) throw Error(ErrorCode::InvalidArgument, "efficiency must lie in (0, 1]");
  StandardFormParams p;
  p.a = kShotNoise * (eta * std::cosh(2.0 * r) + 1.0 - eta);
  p.b = p.a;
  p.c1 = kShotNoise * eta * std::sinh(2.0 * r);
  p.c2 = -p.c1;
  return make_standard_form(p);
}

}  // namespace cvq
