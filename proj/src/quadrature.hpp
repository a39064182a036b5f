#pragma once

#include <Eigen/Core>

#include "field.hpp"

namespace blochlab {

// Uniform tensor grid x = j/G on the torus, used for pointwise products and
// nonlinear maps of trigonometric polynomials. With G >= 4N+1 the in-band
// coefficients of triple products of band-N polynomials are recovered exactly
// (no aliasing for mode differences below G).
class QuadratureGrid {
 public:
  QuadratureGrid(int dim, int points_per_axis);

  // smallest grid that resolves products appearing in (D+k+A)^2+V on band N
  static QuadratureGrid for_products(const Lattice& lattice);

  int dim() const { return dim_; }
  int points_per_axis() const { return pts_; }
  long long point_count() const { return count_; }

  // values of one component at all grid points (axis 0 most significant)
  Eigen::VectorXcd evaluate(const PeriodicField& f, int comp) const;

  // exact band-limited re-expansion of grid values onto out's lattice modes
  void expand(const Eigen::VectorXcd& values, PeriodicField& out, int comp) const;

 private:
  int dim_;
  int pts_;
  long long count_;
};

// f = exp(h) for scalar h: pointwise exponentiation on the product grid of
// h's lattice, re-expanded onto the same lattice (truncation measured by the
// caller where it matters).
PeriodicField exp_field(const PeriodicField& h);

}  // namespace blochlab
