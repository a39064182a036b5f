#pragma once

#include <Eigen/Core>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "field.hpp"
#include "quasimomentum.hpp"

namespace blochlab {

// H(k) = (D + k + A)^2 + V in the truncated Fourier basis, D = -i d/dx, with
// entries
//   H[m,n] = delta_{mn} (2 pi m + k)^2
//          + (2 pi (m+n) + 2k) . A(m-n) + (A*A)(m-n) + V(m-n),
// optionally right-preconditioned by the diagonal Lambda_rho^{-1}.
// The A*A convolution square is kept on the doubled box so no in-band
// information is lost; its weight outside the original box is recorded.
struct AssembledOperator {
  explicit AssembledOperator(Lattice lat) : lattice(std::move(lat)) {}

  Lattice lattice;
  Eigen::VectorXcd k;
  bool preconditioned = false;
  double rho = 0.0;  // Lambda parameter when preconditioned
  std::optional<Quasimomentum> family;
  std::shared_ptr<const PeriodicField> magnetic;  // A, vector (may be null)
  std::shared_ptr<const PeriodicField> electric;  // V, scalar (may be null)
  std::string magnetic_id = "0";
  std::string electric_id = "0";
  double a_square_box_loss = 0.0;  // |A*A| weight beyond the original box
  int bandwidth = 0;               // sup-norm support radius of the couplings
  Eigen::MatrixXcd matrix;
};

AssembledOperator assemble(const PeriodicField* A, const PeriodicField* V, const Eigen::VectorXcd& k,
                           const Lattice& lattice);

// family form; precondition requires rho > 0
AssembledOperator assemble(const PeriodicField* A, const PeriodicField* V, const Quasimomentum& k,
                           const Lattice& lattice, bool precondition);

// Independent verification path: apply (D+k+A)^2 + V to u by pointwise
// evaluation on a (4N+1)^d grid and re-expansion. In-band coefficients are
// exact for band-limited A, V, u, so this cross-checks the matrix entries.
PeriodicField apply_via_quadrature(const PeriodicField* A, const PeriodicField* V, const Eigen::VectorXcd& k,
                                   const PeriodicField& u);

// A -> A + grad(chi); chi must be real-flagged. Spectra of H(k) are invariant.
PeriodicField gauge_shift(const PeriodicField& A, const PeriodicField& chi);

// Sampled lower estimate of C_eps in ||V u|| <= C_eps ||u|| + eps ||u||_{H^1},
// over random unit-H^1 trigonometric polynomials. Nested in `trials`, so the
// estimate grows monotonically with the sample family.
struct RelativeBoundReport {
  std::vector<double> eps;
  std::vector<double> c_eps;
  int trials;
  std::string family;
};
RelativeBoundReport estimate_relative_bound(const PeriodicField& V, const std::vector<double>& eps_grid,
                                            int trials, std::uint64_t seed);

// Coordinate dump `i j re im` with a header naming (d, N, k, flags).
void dump_operator(const AssembledOperator& op, std::ostream& os);

}  // namespace blochlab
