#include "quasimomentum.hpp"

#include <cmath>

namespace blochlab {

Quasimomentum::Quasimomentum(Eigen::VectorXd direction, double beta, double rho)
    : direction_(std::move(direction)), beta_(beta), rho_(rho) {
  if (direction_.size() < 1) fail(errc::invalid_argument, "quasimomentum direction is empty");
  if (std::abs(direction_.norm() - 1.0) > 1e-12)
    fail(errc::invalid_argument, "quasimomentum direction must be a unit vector (|e| = 1 within 1e-12)");
  if (rho_ < 0) fail(errc::invalid_argument, "quasimomentum height rho must be >= 0");
}

Quasimomentum Quasimomentum::axis(int dim, double beta, double rho, int axis) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
  e(axis) = 1.0;
  return Quasimomentum(std::move(e), beta, rho);
}

Eigen::VectorXcd Quasimomentum::k() const {
  const cplx scale = kTwoPi * cplx(beta_, rho_);
  Eigen::VectorXcd out(direction_.size());
  for (Eigen::Index j = 0; j < direction_.size(); ++j) out(j) = scale * direction_(j);
  return out;
}

cplx symbol_h0(const Eigen::VectorXcd& k, std::span<const int> m) {
  cplx s(0, 0);
  for (std::size_t j = 0; j < m.size(); ++j) {
    cplx t = kTwoPi * static_cast<double>(m[j]) + k(static_cast<Eigen::Index>(j));
    s += t * t;
  }
  return s;
}

cplx symbol_h0(const Quasimomentum& q, std::span<const int> m) {
  const cplx direct = symbol_h0(q.k(), m);
  double shifted_sq = 0, e_dot = 0;
  for (int j = 0; j < q.dim(); ++j) {
    double t = static_cast<double>(m[static_cast<std::size_t>(j)]) + q.beta() * q.direction()(j);
    shifted_sq += t * t;
    e_dot += q.direction()(j) * t;
  }
  const cplx expanded =
      4.0 * kPi * kPi * cplx(shifted_sq - q.rho() * q.rho(), 2.0 * q.rho() * e_dot);
  const double scale = std::max({std::abs(direct), std::abs(expanded), 1e-30});
  if (std::abs(direct - expanded) > 1e-10 * scale)
    fail(errc::internal, "symbol forms disagree beyond 1e-10 relative");
  return direct;
}

Eigen::VectorXcd symbol_h0_gradient(const Quasimomentum& q, const Eigen::VectorXd& m) {
  // d/dm_j 4 pi^2 [(m+beta e)^2 - rho^2 + 2 i rho e.(m+beta e)]
  //      = 4 pi^2 [2 (m+beta e)_j + 2 i rho e_j]
  Eigen::VectorXcd g(q.dim());
  for (int j = 0; j < q.dim(); ++j) {
    double shifted = m(j) + q.beta() * q.direction()(j);
    g(j) = 4.0 * kPi * kPi * cplx(2.0 * shifted, 2.0 * q.rho() * q.direction()(j));
  }
  return g;
}

double lambda_multiplier(double rho, double mode_norm_sq) { return std::sqrt(rho * rho + mode_norm_sq); }

}  // namespace blochlab
