#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "field.hpp"

namespace blochlab {

// Complex structure on the 2-torus: z = x1 + i x2, dbar = (d/dx1 + i d/dx2)/2,
// acting on mode m as multiplication by pi i (m1 + i m2).
cplx dbar_symbol(std::span<const int> m);

// coefficientwise multiplication by the dbar symbol (any rank, d=2)
PeriodicField dbar_apply(const PeriodicField& f);

// mean-zero right inverse: dbar(dbar_inverse(u)) = u - mean(u)
PeriodicField dbar_inverse(const PeriodicField& u);

enum class GaugeVerdict { gauged, obstructed, converged, diverged };
std::string to_string(GaugeVerdict v);

struct GaugeTraceEntry {
  int iteration;
  double increment;      // ||F_{t+1} - F_t||_{L2}
  double removed_mean;   // Frobenius norm of the mean stripped from G*F
};

struct GaugeResult {
  GaugeVerdict verdict;
  std::optional<PeriodicField> solution;      // f (scalar) or F (matrix)
  std::optional<PeriodicField> log_solution;  // h with f = exp(h), scalar path
  Eigen::MatrixXcd obstruction;               // mean coefficient (1x1 or qxq), reported exactly
  double residual = 0.0;                      // ||dbar f - g f||_{L2}
  double margin = 0.0;                        // min |f| (or min |det F|) on the product grid
  std::vector<GaugeTraceEntry> trace;
};

// Solve dbar f = g f for scalar g by the exponential substitution f = e^h,
// h(m) = g(m)/(pi i (m1 + i m2)). The torus obstruction is the mean: when
// g(0) != 0 the result is an obstructed outcome carrying exactly g(0).
// A residual above tol raises a tolerance error advising a larger cutoff.
GaugeResult gauge_scalar(const PeriodicField& g, double tol);

// Sobolev-style tail split: gauge the band 0 < |m| <= split_modes exactly and
// return the ungauged remainder (mean + tail) with its L2 and H1 norms.
struct SplitGaugeResult {
  GaugeResult gauge;
  PeriodicField remainder;
  double remainder_l2;
  double remainder_h1;
};
SplitGaugeResult split_and_gauge(const PeriodicField& g, int split_modes, double tol);

// Rational-plane selection: over pairs of independent integer vectors with
// entries bounded by L (first nonzero entry positive, canonical form), pick
// the plane maximizing the tail index
//   tau = min { |q| : q in supp(A) \ {0}, q.l = 0 and q.n = 0 },
// i.e. the lowest original frequency whose plane projection hits the
// obstructed plane-frequency 0. tau = +inf when no support frequency does.
// Ties: smaller |l|^2+|n|^2, then lexicographic on (l, n).
struct PlaneChoice {
  std::vector<int> l, n;
  double tail_index;  // +inf encoded as infinity()
  bool tail_infinite;
  int search_bound;
};
PlaneChoice select_plane(const PeriodicField& A, int search_bound);
double plane_tail_index(const PeriodicField& A, std::span<const int> l, std::span<const int> n);

// Experimental non-commutative variant: Picard iteration
//   F <- I + dbar^{-1} P_{m!=0}(G F)
// for matrix G with mean(G) = 0 (precondition). The stripped mean of G*F is
// logged per iteration as the running obstruction. Divergence and a stuck
// obstruction are verdicts, not failures.
struct MatrixGaugeOptions {
  int max_iterations = 200;
  double tol = 1e-9;
  double damping = 1.0;
};
GaugeResult gauge_matrix(const PeriodicField& G, const MatrixGaugeOptions& options = {});

// Directional first-order solve shared with the dual-cover model reduction:
// find h with (W . p) h(p) = g(p) for every mode p with |W . p| above
// rel_tol * |W|; modes below that line are obstructed and left out.
struct FirstOrderSolve {
  PeriodicField h;
  std::vector<long long> obstructed_modes;
  double obstructed_norm;
};
FirstOrderSolve first_order_solve(const Eigen::Vector2cd& w, const PeriodicField& g, double rel_tol);

}  // namespace blochlab
