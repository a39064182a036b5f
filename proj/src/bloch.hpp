#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "assembly.hpp"

namespace blochlab {

struct BandTable {
  std::vector<Eigen::VectorXd> kpoints;  // real quasimomenta in [-pi, pi]^d
  Eigen::MatrixXd bands;                 // row per k-point, column per band, ascending
  Lattice lattice;
  std::string magnetic_id = "0";
  std::string electric_id = "0";
};

// Lowest band_count eigenvalues of the Hermitian H(k) per grid point.
// Rejects matrices whose Hermitian residual exceeds 1e-8 (complex data passed
// with a real flag).
BandTable compute_bands(const PeriodicField* A, const PeriodicField* V, const Lattice& lattice,
                        const std::vector<Eigen::VectorXd>& kgrid, int band_count);

struct FlatBandReport {
  std::vector<double> oscillation;  // max_k - min_k per band
  std::vector<int> flagged;         // bands with oscillation < tol
  double tol;
};
FlatBandReport detect_flat_bands(const BandTable& table, double tol);

// Uniform tensor grid on [-pi, pi]^d, endpoints included.
std::vector<Eigen::VectorXd> brillouin_grid(int dim, int points_per_axis);

}  // namespace blochlab
