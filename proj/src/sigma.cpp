#include "sigma.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <functional>

#include "common.hpp"

namespace blochlab {

namespace {

bool is_diagonal(const Eigen::MatrixXcd& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (i != j && m(i, j) != cplx(0, 0)) return false;
  return true;
}

double dense_sigma(const Eigen::MatrixXcd& m, bool smallest) {
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
  const auto& sv = svd.singularValues();
  return smallest ? sv(sv.size() - 1) : sv(0);
}

struct LanczosOut {
  double theta = 0.0;  // largest Ritz value of the operator
  int iterations = 0;
  double resid_bound = 0.0;
  bool converged = false;
};

// Largest eigenvalue of a Hermitian PSD operator given by `apply`, with full
// reorthogonalization. Deterministic start vector.
LanczosOut lanczos_largest(const std::function<void(const Eigen::VectorXcd&, Eigen::VectorXcd&)>& apply,
                           Eigen::Index n, int maxit, double tol) {
  LanczosOut out;
  maxit = static_cast<int>(std::min<Eigen::Index>(maxit, n));
  Eigen::MatrixXcd basis(n, maxit + 1);
  Eigen::VectorXd alpha(maxit), beta(maxit);

  Rng rng(0xB10C5EEDull);
  Eigen::VectorXcd q(n);
  for (Eigen::Index i = 0; i < n; ++i) q(i) = rng.gaussian_complex();
  q.normalize();
  basis.col(0) = q;

  Eigen::VectorXcd w(n);
  double prev_theta = -1.0;
  int stagnant = 0;
  for (int t = 0; t < maxit; ++t) {
    apply(basis.col(t), w);
    alpha(t) = w.dot(basis.col(t)).real();
    w -= alpha(t) * basis.col(t);
    if (t > 0) w -= beta(t - 1) * basis.col(t - 1);
    // two rounds of classical Gram-Schmidt against the whole basis
    for (int round = 0; round < 2; ++round) {
      auto q_block = basis.leftCols(t + 1);
      w -= q_block * (q_block.adjoint() * w);
    }
    beta(t) = w.norm();

    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(t + 1, t + 1);
    for (int i = 0; i <= t; ++i) {
      tri(i, i) = alpha(i);
      if (i > 0) tri(i, i - 1) = tri(i - 1, i) = beta(i - 1);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
    const double theta = es.eigenvalues()(t);
    const double last_comp = std::abs(es.eigenvectors()(t, t));
    out.theta = theta;
    out.iterations = t + 1;
    out.resid_bound = beta(t) * last_comp;

    if (beta(t) <= 1e-14 * std::max(1.0, std::abs(theta))) {
      out.converged = true;  // exact invariant subspace
      break;
    }
    if (prev_theta >= 0 && std::abs(theta - prev_theta) <= tol * std::max(std::abs(theta), 1e-300)) {
      if (++stagnant >= 3) {
        out.converged = true;
        break;
      }
    } else {
      stagnant = 0;
    }
    prev_theta = theta;
    if (t + 1 < maxit + 1) basis.col(t + 1) = w / beta(t);
  }
  return out;
}

}  // namespace

SigmaResult sigma_min(const Eigen::MatrixXcd& m, const SigmaOptions& options) {
  if (m.rows() != m.cols()) fail(errc::invalid_argument, "sigma_min expects a square matrix");
  const Eigen::Index n = m.rows();
  SigmaResult res;
  if (options.method == SigmaOptions::Method::automatic && is_diagonal(m)) {
    res.value = m.diagonal().cwiseAbs().minCoeff();
    res.method = "diagonal";
    return res;
  }
  const bool dense = options.method == SigmaOptions::Method::dense ||
                     (options.method == SigmaOptions::Method::automatic && n <= options.dense_limit);
  if (dense) {
    res.value = dense_sigma(m, true);
    res.method = "dense-svd";
    return res;
  }
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
  Eigen::VectorXcd tmp(n);
  // (M^* M)^{-1} x = M^{-1} (M^{-*} x); largest eigenvalue is 1/sigma_min^2
  auto apply = [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
    tmp = lu.adjoint().solve(x);
    y = lu.solve(tmp);
  };
  LanczosOut lo = lanczos_largest(apply, n, options.max_iterations, options.tol);
  if (!(lo.theta > 0)) fail(errc::internal, "sigma_min: inverse iteration produced a nonpositive Ritz value");
  res.value = 1.0 / std::sqrt(lo.theta);
  res.method = lo.converged ? "lanczos-inverse" : "lanczos-inverse (max iterations)";
  res.iterations = lo.iterations;
  res.error_bound = lo.resid_bound;
  return res;
}

SigmaResult sigma_max(const Eigen::MatrixXcd& m, const SigmaOptions& options) {
  if (m.rows() != m.cols()) fail(errc::invalid_argument, "sigma_max expects a square matrix");
  const Eigen::Index n = m.rows();
  SigmaResult res;
  if (options.method == SigmaOptions::Method::automatic && is_diagonal(m)) {
    res.value = m.diagonal().cwiseAbs().maxCoeff();
    res.method = "diagonal";
    return res;
  }
  const bool dense = options.method == SigmaOptions::Method::dense ||
                     (options.method == SigmaOptions::Method::automatic && n <= options.dense_limit);
  if (dense) {
    res.value = dense_sigma(m, false);
    res.method = "dense-svd";
    return res;
  }
  Eigen::VectorXcd tmp(n);
  auto apply = [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
    tmp.noalias() = m * x;
    y.noalias() = m.adjoint() * tmp;
  };
  LanczosOut lo = lanczos_largest(apply, n, options.max_iterations, options.tol);
  res.value = lo.theta > 0 ? std::sqrt(lo.theta) : 0.0;
  res.method = lo.converged ? "lanczos" : "lanczos (max iterations)";
  res.iterations = lo.iterations;
  res.error_bound = lo.resid_bound;
  return res;
}

}  // namespace blochlab
