#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "assembly.hpp"
#include "sigma.hpp"

namespace blochlab {

// sigma_min scan over the complex quasimomentum family k = 2 pi (beta + i rho) e.
struct EstimateScan {
  Eigen::VectorXd direction;
  double beta;
  std::vector<double> rho;
  std::vector<double> sigma_h;        // sigma_min of H(k)
  std::vector<double> sigma_precond;  // sigma_min of H(k) Lambda_rho^{-1}
  std::vector<std::string> method_h, method_precond;
  double growth_coefficient;  // least-squares C in sigma_h ~ C rho, smallest 20% of rho dropped
  // Constant for the two-term lower bound ||H u|| >= c (rho ||u|| + ||u||_{H1}):
  // min over the scan of sigma_precond / 2, valid on the truncated space for
  // rho >= 1 since rho ||u|| + ||u||_{H1} <= 2 ||Lambda_rho u||.
  double estimate_constant;
  double floor_value;
  bool floor_satisfied;  // sigma_precond stayed above floor_value over the scan
};

struct ScanOptions {
  double floor = 10.0;
  SigmaOptions sigma;
};

EstimateScan thomas_scan(const PeriodicField* A, const PeriodicField* V, const Eigen::VectorXd& direction,
                         double beta, const std::vector<double>& rho_list, const Lattice& lattice,
                         const ScanOptions& options = {});

// Zero set of the principal symbol at height rho,
//   Z_rho = { m : (m + beta e)^2 = rho^2, e.(m + beta e) = 0 },
// enumerated over the lattice, plus the thickened near set
//   { m : |e.(m + beta e)| <= t, |(m + beta e)^2 - rho^2| <= t rho }.
struct ZeroSetSlab {
  double rho, beta, thickness;
  Eigen::VectorXd direction;
  std::vector<long long> exact_modes;
  std::vector<long long> near_modes;  // always contains exact_modes
};
ZeroSetSlab zero_set(double rho, double beta, const Eigen::VectorXd& direction, const Lattice& lattice,
                     double thickness);

// Axis-aligned tiling of the lattice box by tiles of side floor(rho^delta)
// (at least 1). psi_j is the tile indicator; phi_j fattens the tile by one
// tile-width in total (floor(w/2) left, ceil(w/2) right, clipped), which keeps
// the phi covering multiplicity at most 2 per axis. A tile is `near` when its
// Euclidean distance to the near set is at most rho^delta.
struct DualCover {
  Lattice lattice;
  double rho, delta;
  int tile_width;
  struct Patch {
    std::vector<int> lo, hi;          // core tile bounds per axis, inclusive
    std::vector<int> fat_lo, fat_hi;  // fattened bounds
    std::vector<int> center;
    std::vector<long long> core_modes, fat_modes;
    bool near_zero_set;
  };
  std::vector<Patch> patches;
};
DualCover build_cover(double rho, double delta, const Lattice& lattice, const ZeroSetSlab& slab);

enum class LocalInverseMode { far, near_direct, near_model };
std::string to_string(LocalInverseMode mode);

// Local approximate inverse R_j of the compressed block B_j of the operator
// on the fattened patch:
//   far         diagonal inverse of the preconditioned principal symbol plus
//               a Neumann correction of configured order; residual measured
//   near_direct pseudoinverse of the compressed block
//   near_model  gauge-reduced first-order model inverse (d=2): linearize the
//               preconditioned symbol at the patch center, freeze the
//               magnetic coupling into a multiplication potential, gauge it
//               away along the linearized direction, invert the remaining
//               diagonal; deviation against near_direct is reported
struct LocalInverse {
  int patch;
  LocalInverseMode mode;
  Eigen::MatrixXcd inverse;  // on the fattened patch modes
  double norm;               // ||R_j||
  double residual;           // ||R_j B_j - I|| on the patch
  // near-model diagnostics
  double model_vs_direct = 0.0;            // ||R_model - R_direct|| / ||R_direct||
  double linearization_sensitivity = 0.0;  // residual change when linearizing one mode off-center
  double obstructed_weight = 0.0;          // potential weight on the symbol's kernel line
  cplx absorbed_mean = 0.0;                // mean coupling folded into the constant part
};

struct LocalInverseOptions {
  int neumann_order = 2;
  double pinv_rel_tol = 1e-12;          // rank cut for near_direct
  double model_obstruction_tol = 1e-8;  // relative kernel-line threshold
};

LocalInverse local_inverse(const AssembledOperator& op, const DualCover& cover, int patch,
                           LocalInverseMode mode, const LocalInverseOptions& options = {});

// Global parametrix R = sum_j phi_j R_j psi_j and its residual
// T = R M - I on the truncated space; norms are exact largest singular values.
struct ParametrixReport {
  double rho;
  double t_norm;  // ||R M - I||
  double r_norm;  // ||R||
  std::vector<double> local_norms;
  std::vector<double> local_residuals;
  std::vector<std::string> local_modes;
};
ParametrixReport assemble_parametrix(const AssembledOperator& op, const DualCover& cover,
                                     const std::vector<LocalInverse>& locals);

}  // namespace blochlab
