#pragma once

#include <Eigen/Core>
#include <span>

#include "common.hpp"

namespace blochlab {

// Complex quasimomentum family k = 2 pi (beta + i rho) e with |e| = 1.
class Quasimomentum {
 public:
  Quasimomentum(Eigen::VectorXd direction, double beta, double rho);

  static Quasimomentum axis(int dim, double beta, double rho, int axis = 0);

  const Eigen::VectorXd& direction() const { return direction_; }
  double beta() const { return beta_; }
  double rho() const { return rho_; }
  bool is_real() const { return rho_ == 0.0; }
  int dim() const { return static_cast<int>(direction_.size()); }

  // k = 2 pi (beta + i rho) e, recomputed deterministically from the fields
  Eigen::VectorXcd k() const;

 private:
  Eigen::VectorXd direction_;
  double beta_;
  double rho_;
};

// Principal symbol H0(k, m) = (2 pi m + k)^2 (analytic square, not Hermitian).
cplx symbol_h0(const Eigen::VectorXcd& k, std::span<const int> m);

// Same symbol through the expanded closed form
// 4 pi^2 [ (m + beta e)^2 - rho^2 + 2 i rho e.(m + beta e) ];
// both routes are evaluated and must agree to 1e-10 relative.
cplx symbol_h0(const Quasimomentum& q, std::span<const int> m);

// gradient of m -> H0(k(q), m) at a (continuous) point m
Eigen::VectorXcd symbol_h0_gradient(const Quasimomentum& q, const Eigen::VectorXd& m);

double lambda_multiplier(double rho, double mode_norm_sq);

}  // namespace blochlab
