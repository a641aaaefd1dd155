#pragma once

#include "revloc/core.hpp"

#include <algorithm>
#include <numeric>
#include <optional>

namespace revloc {

// ---------------------------------------------------------------------------
// IRLS

/// Settings for the smoothed l_p IRLS solver. The smoothing parameter and
/// its floor are relative to the peak magnitude of the minimum-norm start,
/// which makes the solver equivariant under global scaling of the data.
template <typename Scalar>
struct IrlsConfig {
  Scalar p = 1;
  int max_iters = 50;
  Scalar epsilon_initial = 1;
  Scalar epsilon_decay = Scalar(0.5);
  Scalar epsilon_min = Scalar(1e-8);
  Scalar convergence_tol = Scalar(1e-6);
  /// Epsilon shrinks by epsilon_decay after every iteration whose relative
  /// change falls below this threshold.
  Scalar epsilon_decay_threshold = Scalar(0.2);
  /// Tikhonov load on A Q A^H, relative to trace(A Q A^H) / M.
  Scalar ridge = Scalar(1e-10);
  /// Cost multiplier on planewave columns (the l1 trade-off between the
  /// point-source and planewave blocks). 1 treats both blocks alike.
  Scalar planewave_weight = Scalar(0.5);
  /// Charge each atom its column norm, i.e. run l_p on unit-norm atoms.
  bool column_norm_costs = true;

  void validate() const {
    if (!(p > 0 && p <= 2)) throw ConfigError("IrlsConfig: p must lie in (0, 2]");
    if (max_iters < 1) throw ConfigError("IrlsConfig: max_iters must be >= 1");
    if (!(epsilon_initial > 0) || !(epsilon_min > 0) || epsilon_min > epsilon_initial) {
      throw ConfigError("IrlsConfig: need 0 < epsilon_min <= epsilon_initial");
    }
    if (!(epsilon_decay > 0 && epsilon_decay < 1)) {
      throw ConfigError("IrlsConfig: epsilon_decay must lie in (0, 1)");
    }
    if (!(convergence_tol > 0)) throw ConfigError("IrlsConfig: convergence_tol must be > 0");
    if (!(epsilon_decay_threshold >= 0)) {
      throw ConfigError("IrlsConfig: epsilon_decay_threshold must be >= 0");
    }
    if (!(ridge >= 0)) throw ConfigError("IrlsConfig: ridge must be >= 0");
    if (!(planewave_weight > 0)) throw ConfigError("IrlsConfig: planewave_weight must be > 0");
  }
};

/// One reweighting step. Both objectives use the same epsilon, so
/// objective_after <= objective_before up to the ridge perturbation.
template <typename Scalar>
struct IrlsStep {
  Scalar epsilon;
  Scalar objective_before;
  Scalar objective_after;
  Scalar relative_change;
};

template <typename Scalar>
struct IrlsResult {
  WeightVector<Scalar> weights;
  int iterations = 0;
  bool converged = false;
  bool degenerate_input = false;
  std::vector<IrlsStep<Scalar>> steps;
};

/// Smoothed l_p objective sum_i c_i (|g_i|^2 + eps^2)^{p/2}.
template <typename Scalar>
Scalar smoothed_lp_objective(const ComplexVector<Scalar>& gamma,
                             const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& column_cost, Scalar p,
                             Scalar eps) {
  const auto mag2 = gamma.cwiseAbs2().array();
  return (column_cost.array() * (mag2 + eps * eps).pow(p / Scalar(2))).sum();
}

namespace detail {

// gamma = Q A^H (A Q A^H + ridge I)^{-1} s for diagonal Q = diag(q).
template <typename Scalar>
ComplexVector<Scalar> weighted_min_norm(const ComplexMatrix<Scalar>& A,
                                        const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& q,
                                        const ComplexField<Scalar>& s, Scalar ridge_rel) {
  const Eigen::Index m = A.rows();
  const ComplexMatrix<Scalar> B = A * q.cwiseSqrt().asDiagonal();
  ComplexMatrix<Scalar> gram = ComplexMatrix<Scalar>::Zero(m, m);
  gram.template selfadjointView<Eigen::Lower>().rankUpdate(B);
  const Scalar load = ridge_rel * gram.diagonal().real().sum() / Scalar(m);
  gram.diagonal().array() += load;

  Eigen::LLT<ComplexMatrix<Scalar>, Eigen::Lower> llt(gram);
  ComplexVector<Scalar> x;
  if (llt.info() == Eigen::Success) {
    x = llt.solve(s);
  } else {
    Eigen::LDLT<ComplexMatrix<Scalar>, Eigen::Lower> ldlt(gram);
    if (ldlt.info() != Eigen::Success) {
      throw NumericalError("irls_solve: weighted Gram matrix is singular");
    }
    x = ldlt.solve(s);
  }
  if (!x.allFinite()) throw NumericalError("irls_solve: non-finite solution");
  return q.template cast<Complex<Scalar>>().cwiseProduct(A.adjoint() * x);
}

}  // namespace detail

/// Iteratively reweighted least squares for min sum w_i |g_i|^2 s.t. A g = s,
/// with w_i = c_i (|g_i|^2 + eps^2)^{(p-2)/2} recomputed from the previous
/// iterate. Starts from the (cost-weighted) minimum-norm solution.
template <typename Scalar>
IrlsResult<Scalar> irls_solve(const Dictionary<Scalar>& A, const ComplexField<Scalar>& s,
                              const IrlsConfig<Scalar>& cfg) {
  cfg.validate();
  check_rows(A, s, "irls_solve");
  using RealVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index C = A.cols();

  RealVector cost = cfg.column_norm_costs ? RealVector(A.matrix.colwise().norm().transpose())
                                          : RealVector::Ones(C);
  for (Eigen::Index c = 0; c < C; ++c) {
    if (A.is_planewave_column(c)) cost(c) *= cfg.planewave_weight;
  }

  IrlsResult<Scalar> out;
  out.weights.kind = WeightKind::Combined;
  if (s.squaredNorm() == Scalar(0)) {
    out.weights.values = ComplexVector<Scalar>::Zero(C);
    out.degenerate_input = true;
    out.converged = true;
    return out;
  }

  ComplexVector<Scalar> gamma = detail::weighted_min_norm(A.matrix, RealVector(cost.cwiseInverse()), s, cfg.ridge);
  const Scalar scale = gamma.cwiseAbs().maxCoeff();
  const Scalar eps_floor = cfg.epsilon_min * scale;
  Scalar eps = cfg.epsilon_initial * scale;
  const Scalar exponent = (Scalar(2) - cfg.p) / Scalar(2);

  for (int v = 1; v <= cfg.max_iters; ++v) {
    const RealVector q =
        (gamma.cwiseAbs2().array() + eps * eps).pow(exponent).matrix().cwiseQuotient(cost);
    ComplexVector<Scalar> next = detail::weighted_min_norm(A.matrix, q, s, cfg.ridge);

    const Scalar change = (next - gamma).norm() / std::max(gamma.norm(), std::numeric_limits<Scalar>::min());
    out.steps.push_back({eps, smoothed_lp_objective(gamma, cost, cfg.p, eps),
                         smoothed_lp_objective(next, cost, cfg.p, eps), change});
    gamma = std::move(next);
    out.iterations = v;

    if (change < cfg.convergence_tol) {
      out.converged = true;
      break;
    }
    if (change < cfg.epsilon_decay_threshold) eps = std::max(eps * cfg.epsilon_decay, eps_floor);
  }
  out.weights.values = std::move(gamma);
  return out;
}

// ---------------------------------------------------------------------------
// Dereverberation

/// Direct-field estimate s - W beta.
template <typename Scalar>
ComplexField<Scalar> dereverberate(const ComplexField<Scalar>& s, const Dictionary<Scalar>& W,
                                   const WeightVector<Scalar>& beta) {
  check_rows(W, s, "dereverberate");
  check_pairing(W, beta, "dereverberate");
  return s - W.matrix * beta.values;
}

// ---------------------------------------------------------------------------
// OMP

template <typename Scalar>
struct OmpConfig {
  int n_sources = 4;
  /// Rank candidates by |<r, g_j>| / ||g_j|| instead of |<r, g_j>|.
  bool normalize_columns = true;

  void validate(Eigen::Index rows, Eigen::Index cols) const {
    if (n_sources < 1) throw ConfigError("OmpConfig: n_sources must be >= 1");
    if (n_sources > std::min(rows, cols)) {
      throw ConfigError("OmpConfig: n_sources exceeds min(M, J)");
    }
  }
};

namespace detail {

// Least-squares coefficients of s on the columns of L; falls back to a
// lightly regularized normal-equation solve if L is rank deficient.
template <typename Scalar>
ComplexVector<Scalar> least_squares(const ComplexMatrix<Scalar>& L, const ComplexField<Scalar>& s) {
  Eigen::ColPivHouseholderQR<ComplexMatrix<Scalar>> qr(L);
  if (qr.rank() == L.cols()) return qr.solve(s);
  ComplexMatrix<Scalar> gram = L.adjoint() * L;
  const Scalar load = Scalar(1e-10) * gram.diagonal().real().sum() / Scalar(L.cols());
  gram.diagonal().array() += std::max(load, std::numeric_limits<Scalar>::min());
  Eigen::LDLT<ComplexMatrix<Scalar>> ldlt(gram);
  if (ldlt.info() != Eigen::Success) throw NumericalError("omp: selected atoms are degenerate");
  return ldlt.solve(L.adjoint() * s);
}

}  // namespace detail

/// Greedy point-source localization. Each pass picks the unselected column
/// most correlated with the residual (lowest index wins exact ties), then
/// refits all selected columns to the original measurement by least
/// squares and recomputes the residual from that fit.
template <typename Scalar>
LocalizationResult<Scalar> omp_localize(const ComplexField<Scalar>& s0, const Dictionary<Scalar>& G0,
                                        const OmpConfig<Scalar>& cfg) {
  check_rows(G0, s0, "omp_localize");
  cfg.validate(G0.rows(), G0.cols());
  const Eigen::Index J = G0.cols();
  const auto N = static_cast<std::size_t>(cfg.n_sources);

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> inv_norms = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Ones(J);
  if (cfg.normalize_columns) {
    inv_norms = G0.matrix.colwise().norm().transpose().cwiseInverse();
  }

  LocalizationResult<Scalar> out;
  out.method_tag = "omp";
  out.grid_weights = ComplexVector<Scalar>::Zero(J);
  out.diagnostics.degenerate_input = s0.squaredNorm() == Scalar(0);
  out.diagnostics.residual_norms.push_back(s0.norm());

  std::vector<bool> taken(static_cast<std::size_t>(J), false);
  ComplexMatrix<Scalar> selected(G0.rows(), 0);
  ComplexField<Scalar> residual = s0;
  ComplexVector<Scalar> coeffs;

  for (std::size_t n = 0; n < N; ++n) {
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> score =
        (G0.matrix.adjoint() * residual).cwiseAbs().cwiseProduct(inv_norms);
    Eigen::Index best = -1;
    for (Eigen::Index j = 0; j < J; ++j) {
      if (taken[static_cast<std::size_t>(j)]) continue;
      if (best < 0 || score(j) > score(best)) best = j;
    }
    taken[static_cast<std::size_t>(best)] = true;
    out.support.push_back(best);
    out.estimated_positions.push_back(G0.position(best));

    selected.conservativeResize(Eigen::NoChange, selected.cols() + 1);
    selected.col(selected.cols() - 1) = G0.matrix.col(best);
    coeffs = detail::least_squares<Scalar>(selected, s0);
    residual = s0 - selected * coeffs;
    out.diagnostics.residual_norms.push_back(residual.norm());
  }

  for (std::size_t n = 0; n < N; ++n) out.grid_weights(out.support[n]) = coeffs(static_cast<Eigen::Index>(n));
  out.diagnostics.omp_iterations = static_cast<int>(N);
  return out;
}

// ---------------------------------------------------------------------------
// Pipelines

namespace detail {

template <typename Scalar>
Scalar planewave_energy_fraction(const ComplexField<Scalar>& direct, const ComplexField<Scalar>& reverb) {
  const Scalar d = direct.squaredNorm(), r = reverb.squaredNorm();
  return d + r > 0 ? r / (d + r) : Scalar(0);
}

}  // namespace detail

/// Two-step method: IRLS on [G0, W], subtract the planewave part, then OMP
/// on the dereverberated field.
template <typename Scalar>
LocalizationResult<Scalar> proposed_pipeline(const ComplexField<Scalar>& s, const Dictionary<Scalar>& G0,
                                             const Dictionary<Scalar>& W,
                                             const IrlsConfig<Scalar>& irls_cfg,
                                             const OmpConfig<Scalar>& omp_cfg) {
  check_rows(G0, s, "proposed_pipeline");
  const Dictionary<Scalar> A = concatenate(G0, W);
  const IrlsResult<Scalar> irls = irls_solve(A, s, irls_cfg);

  const Eigen::Index J = G0.cols();
  WeightVector<Scalar> alpha{irls.weights.values.head(J), WeightKind::PointSource};
  WeightVector<Scalar> beta{irls.weights.values.tail(W.cols()), WeightKind::Planewave};
  const ComplexField<Scalar> s0 = dereverberate(s, W, beta);

  LocalizationResult<Scalar> out = omp_localize(s0, G0, omp_cfg);
  out.method_tag = "proposed";
  out.diagnostics.irls_iterations = irls.iterations;
  out.diagnostics.irls_converged = irls.converged;
  out.diagnostics.degenerate_input = out.diagnostics.degenerate_input || irls.degenerate_input;
  out.diagnostics.beta_energy_fraction =
      detail::planewave_energy_fraction<Scalar>(G0.matrix * alpha.values, W.matrix * beta.values);
  return out;
}

/// OMP straight on the reverberant measurement.
template <typename Scalar>
LocalizationResult<Scalar> baseline_nd_omp(const ComplexField<Scalar>& s, const Dictionary<Scalar>& G0,
                                           const OmpConfig<Scalar>& omp_cfg) {
  LocalizationResult<Scalar> out = omp_localize(s, G0, omp_cfg);
  out.method_tag = "nd-omp";
  return out;
}

/// IRLS on [G0, W]; the N largest |alpha| entries give the positions.
template <typename Scalar>
LocalizationResult<Scalar> baseline_d_irls(const ComplexField<Scalar>& s, const Dictionary<Scalar>& G0,
                                           const Dictionary<Scalar>& W,
                                           const IrlsConfig<Scalar>& irls_cfg, int n_sources) {
  check_rows(G0, s, "baseline_d_irls");
  const Eigen::Index J = G0.cols();
  if (n_sources < 1 || n_sources > J) throw ConfigError("baseline_d_irls: invalid source count");
  const Dictionary<Scalar> A = concatenate(G0, W);
  const IrlsResult<Scalar> irls = irls_solve(A, s, irls_cfg);
  const ComplexVector<Scalar> alpha = irls.weights.values.head(J);
  const ComplexVector<Scalar> beta = irls.weights.values.tail(W.cols());

  std::vector<Eigen::Index> order(static_cast<std::size_t>(J));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return std::abs(alpha(a)) > std::abs(alpha(b)); });

  LocalizationResult<Scalar> out;
  out.method_tag = "d-irls";
  out.grid_weights = alpha;
  Scalar top_mass = 0;
  for (int n = 0; n < n_sources; ++n) {
    const Eigen::Index j = order[static_cast<std::size_t>(n)];
    out.support.push_back(j);
    out.estimated_positions.push_back(G0.position(j));
    top_mass += std::abs(alpha(j));
  }
  const Scalar total_mass = alpha.cwiseAbs().sum();
  out.diagnostics.sparsity_ratio = top_mass > 0 ? total_mass / top_mass : Scalar(1);
  out.diagnostics.irls_iterations = irls.iterations;
  out.diagnostics.irls_converged = irls.converged;
  out.diagnostics.degenerate_input = irls.degenerate_input;
  out.diagnostics.beta_energy_fraction =
      detail::planewave_energy_fraction<Scalar>(G0.matrix * alpha, W.matrix * beta);
  return out;
}

}  // namespace revloc
