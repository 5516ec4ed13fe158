#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cvq/gaussian_state.hpp"

namespace cvq {

/// Two disjoint nonempty sets of mode indices.
struct Bipartition {
  std::vector<std::size_t> side_a;
  std::vector<std::size_t> side_b;

  friend bool operator==(const Bipartition&, const Bipartition&) = default;
};

enum class Status { Entangled, Separable, Inconclusive };
enum class Method { PPT, Iterative };

inline std::string_view to_string(Status s) {
  switch (s) {
    case Status::Entangled: return "Entangled";
    case Status::Separable: return "Separable";
    case Status::Inconclusive: return "Inconclusive";
  }
  return "?";
}

inline std::string_view to_string(Method m) { return m == Method::PPT ? "PPT" : "Iterative"; }

struct EntanglementVerdict {
  Status status = Status::Inconclusive;
  std::optional<double> witness;  // min symplectic eigenvalue of the partial transpose
  double log_negativity = 0.0;
  Method method = Method::PPT;
  std::optional<int> iterations;

  friend bool operator==(const EntanglementVerdict&, const EntanglementVerdict&) = default;
};

struct AnalysisOptions {
  /// Entangled only when the witness is below 1/2 by more than this.
  double witness_band = tol::kPhysicality;
  int max_iter = 1000;
  /// Stopping tolerance on the correlation-block norm of the iteration.
  double tol = 1e-10;
};

/// Verdicts on every marginal mode pair plus verdicts on bipartitions of the
/// full register. The two are kept apart: a pair entry describes the reduced
/// two-mode state only.
struct EntanglementReport {
  ModeRegister modes;
  std::vector<std::vector<std::optional<EntanglementVerdict>>> pairwise;
  std::vector<std::pair<Bipartition, EntanglementVerdict>> bipartitions;

  friend bool operator==(const EntanglementReport&, const EntanglementReport&) = default;
};

// ---------------------------------------------------------------------------

inline void check_bipartition(const Bipartition& bp, std::size_t n, bool require_cover) {
  if (bp.side_a.empty() || bp.side_b.empty()) {
    throw Error(ErrorCode::InvalidArgument, "both sides of a bipartition must be nonempty");
  }
  std::vector<std::size_t> all = bp.side_a;
  all.insert(all.end(), bp.side_b.begin(), bp.side_b.end());
  check_indices(all, n);
  if (require_cover && all.size() != n) {
    throw Error(ErrorCode::InvalidArgument, "bipartition must cover all " + std::to_string(n) + " modes");
  }
}

/// Flips the sign of the Y rows and columns of every mode in `side_b`.
inline Matrix partial_transpose(const Matrix& cov, std::span<const std::size_t> side_b) {
  if (side_b.empty()) throw Error(ErrorCode::InvalidArgument, "partial transpose needs a nonempty side");
  const auto n = static_cast<std::size_t>(cov.rows() / 2);
  check_indices(side_b, n);
  Matrix out = cov;
  for (auto k : side_b) {
    const auto y = static_cast<Eigen::Index>(2 * k + 1);
    out.row(y) *= -1.0;
    out.col(y) *= -1.0;
  }
  return out;
}

inline Matrix partial_transpose(const GaussianState& state, std::span<const std::size_t> side_b) {
  return partial_transpose(state.cov(), side_b);
}

/// The n values nu_k with eig(i Omega cov) = {+-nu_k}, ascending.
inline std::vector<double> symplectic_eigenvalues(const Matrix& cov) {
  if (cov.rows() != cov.cols() || cov.rows() % 2 != 0 || cov.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "symplectic spectrum needs a square matrix of even size");
  }
  if (!cov.allFinite()) throw Error(ErrorCode::NumericalFailure, "matrix has non-finite entries");
  if (max_asymmetry(cov) > tol::kSymmetry) throw Error(ErrorCode::NumericalFailure, "matrix is not symmetric");
  if (Eigen::LLT<Matrix>(cov).info() != Eigen::Success) {
    throw Error(ErrorCode::NumericalFailure, "matrix is not positive definite");
  }
  const auto n = static_cast<std::size_t>(cov.rows() / 2);
  Eigen::EigenSolver<Matrix> solver(symplectic_form(n) * cov, false);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::NumericalFailure, "eigen-solve did not converge");

  std::vector<double> magnitudes;
  magnitudes.reserve(2 * n);
  for (const auto& ev : solver.eigenvalues()) {
    if (std::abs(ev.real()) > 1e-9) {
      throw Error(ErrorCode::NumericalFailure,
                  "eigenvalue of Omega*cov has real part " + std::to_string(ev.real()));
    }
    magnitudes.push_back(std::abs(ev.imag()));
  }
  std::sort(magnitudes.begin(), magnitudes.end());
  std::vector<double> nu(n);
  for (std::size_t k = 0; k < n; ++k) nu[k] = 0.5 * (magnitudes[2 * k] + magnitudes[2 * k + 1]);
  return nu;
}

inline double log_negativity(std::span<const double> pt_spectrum) {
  double sum = 0.0;
  for (double nu : pt_spectrum) sum += std::max(0.0, -std::log(2.0 * nu));
  return sum;
}

inline EntanglementVerdict ppt_verdict(const GaussianState& state, const Bipartition& bp,
                                       const AnalysisOptions& opts = {}) {
  check_bipartition(bp, state.num_modes(), true);
  const auto spectrum = symplectic_eigenvalues(partial_transpose(state, bp.side_b));
  EntanglementVerdict v;
  v.method = Method::PPT;
  v.witness = spectrum.front();
  v.log_negativity = log_negativity(spectrum);
  if (spectrum.front() < kShotNoise - opts.witness_band) {
    v.status = Status::Entangled;
  } else if (std::min(bp.side_a.size(), bp.side_b.size()) == 1) {
    v.status = Status::Separable;
  } else {
    v.status = Status::Inconclusive;
  }
  return v;
}

namespace detail {

inline Matrix mode_block(const Matrix& m, std::span<const std::size_t> rows, std::span<const std::size_t> cols) {
  Matrix out(2 * rows.size(), 2 * cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      out.block<2, 2>(static_cast<Eigen::Index>(2 * r), static_cast<Eigen::Index>(2 * c)) =
          m.block<2, 2>(static_cast<Eigen::Index>(2 * rows[r]), static_cast<Eigen::Index>(2 * cols[c]));
    }
  }
  return out;
}

/// Moore-Penrose inverse of a Hermitian positive semidefinite matrix.
inline ComplexMatrix hermitian_pinv(const ComplexMatrix& h) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::NumericalFailure, "Hermitian eigen-solve failed");
  const auto& lambda = solver.eigenvalues();
  const double cutoff = 1e-12 * std::max(1.0, lambda.cwiseAbs().maxCoeff());
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(lambda.size());
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    if (lambda(k) > cutoff) inv(k) = 1.0 / lambda(k);
  }
  const auto& vecs = solver.eigenvectors();
  return vecs * inv.cast<std::complex<double>>().asDiagonal() * vecs.adjoint();
}

inline double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

}  // namespace detail

/// Separability test for an arbitrary bipartition by iterating the nonlinear map
/// on the block decomposition [[A, C], [C^T, B]]:
///   X  = C (B + i Omega/2)^+ C^T
///   A' = B' = A - Re X,   C' = -Im X.
/// The state is entangled as soon as an iterate violates the uncertainty
/// relation, and separable as soon as A - ||C|| I and B - ||C|| I are both valid
/// covariances (the iterate then dominates their direct sum).
inline EntanglementVerdict iterative_separability(const GaussianState& state, const Bipartition& bp,
                                                  const AnalysisOptions& opts = {}) {
  check_bipartition(bp, state.num_modes(), true);
  if (opts.max_iter < 1) throw Error(ErrorCode::InvalidArgument, "max_iter must be at least 1");
  if (!(opts.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");

  EntanglementVerdict v;
  v.method = Method::Iterative;
  // Log-negativity is reported alongside whatever certificate the iteration finds.
  v.log_negativity = log_negativity(symplectic_eigenvalues(partial_transpose(state, bp.side_b)));

  Matrix a = detail::mode_block(state.cov(), bp.side_a, bp.side_a);
  Matrix b = detail::mode_block(state.cov(), bp.side_b, bp.side_b);
  Matrix c = detail::mode_block(state.cov(), bp.side_a, bp.side_b);

  double previous_norm = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= opts.max_iter; ++it) {
    v.iterations = it;
    Matrix gamma(a.rows() + b.rows(), a.cols() + b.cols());
    gamma << a, c, c.transpose(), b;
    if (!gamma.allFinite()) throw Error(ErrorCode::NumericalFailure, "iteration produced non-finite entries");
    if (min_heisenberg_eigenvalue(gamma) < -opts.witness_band) {
      v.status = Status::Entangled;
      return v;
    }
    const double c_norm = detail::operator_norm(c);
    const Matrix shifted_a = a - c_norm * Matrix::Identity(a.rows(), a.cols());
    const Matrix shifted_b = b - c_norm * Matrix::Identity(b.rows(), b.cols());
    if (min_heisenberg_eigenvalue(shifted_a) >= -opts.witness_band &&
        min_heisenberg_eigenvalue(shifted_b) >= -opts.witness_band) {
      v.status = Status::Separable;
      return v;
    }
    if (c_norm <= opts.tol ||
        std::abs(previous_norm - c_norm) <= 1e-15 * std::max(1.0, c_norm)) {
      throw Error(ErrorCode::ConvergenceStall, "no certificate after " + std::to_string(it) +
                                                   " iterations (correlation norm " +
                                                   std::to_string(c_norm) + ")");
    }
    previous_norm = c_norm;

    const auto nb = static_cast<std::size_t>(b.rows() / 2);
    ComplexMatrix h = b.cast<std::complex<double>>();
    h += std::complex<double>(0.0, kShotNoise) * symplectic_form(nb).cast<std::complex<double>>();
    const ComplexMatrix cc = c.cast<std::complex<double>>();
    const ComplexMatrix x = cc * detail::hermitian_pinv(h) * cc.transpose();

    Matrix next_a = a - x.real();
    next_a = 0.5 * (next_a + next_a.transpose()).eval();
    c = -x.imag();
    a = next_a;
    b = next_a;
  }
  v.status = Status::Inconclusive;
  return v;
}

/// PPT on every two-mode marginal; PPT is necessary and sufficient there.
inline EntanglementReport pairwise_entanglement_map(const GaussianState& state, const AnalysisOptions& opts = {}) {
  const std::size_t n = state.num_modes();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "pairwise map needs at least two modes");
  EntanglementReport report;
  report.modes = state.modes();
  report.pairwise.assign(n, std::vector<std::optional<EntanglementVerdict>>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto pair = reduce(state, {i, j});
      const auto v = ppt_verdict(pair, Bipartition{{0}, {1}}, opts);
      report.pairwise[i][j] = v;
      report.pairwise[j][i] = v;
    }
  }
  return report;
}

/// All 1 x (n-1) and 2 x (n-2) splits of the register, each listed once.
inline std::vector<Bipartition> enumerate_bipartitions(std::size_t n) {
  std::vector<Bipartition> out;
  auto rest = [n](std::initializer_list<std::size_t> taken) {
    std::vector<std::size_t> r;
    for (std::size_t k = 0; k < n; ++k) {
      if (std::find(taken.begin(), taken.end(), k) == taken.end()) r.push_back(k);
    }
    return r;
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (n == 2 && i == 1) break;
    out.push_back({{i}, rest({i})});
  }
  if (n >= 4) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (n == 4 && i != 0) continue;
        out.push_back({{i, j}, rest({i, j})});
      }
    }
  }
  return out;
}

/// PPT on each split, escalating to the iterative test when PPT cannot decide.
inline std::vector<std::pair<Bipartition, EntanglementVerdict>> bipartition_scan(const GaussianState& state,
                                                                                const AnalysisOptions& opts = {}) {
  const std::size_t n = state.num_modes();
  if (n < 2 || n > 8) throw Error(ErrorCode::InvalidArgument, "bipartition scan supports 2 to 8 modes");
  std::vector<std::pair<Bipartition, EntanglementVerdict>> out;
  for (auto& bp : enumerate_bipartitions(n)) {
    auto v = ppt_verdict(state, bp, opts);
    if (v.status == Status::Inconclusive) {
      const auto witness = v.witness;
      try {
        v = iterative_separability(state, bp, opts);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ConvergenceStall) throw;
      }
      v.witness = witness;
    }
    out.emplace_back(std::move(bp), v);
  }
  return out;
}

inline EntanglementReport analyze(const GaussianState& state, bool pairs, bool scan,
                                  const AnalysisOptions& opts = {}) {
  EntanglementReport report;
  if (pairs && state.num_modes() >= 2) report = pairwise_entanglement_map(state, opts);
  report.modes = state.modes();
  if (scan && state.num_modes() >= 2) report.bipartitions = bipartition_scan(state, opts);
  return report;
}

}  // namespace cvq
