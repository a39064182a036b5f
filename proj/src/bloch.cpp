#include "bloch.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace blochlab {

BandTable compute_bands(const PeriodicField* A, const PeriodicField* V, const Lattice& lattice,
                        const std::vector<Eigen::VectorXd>& kgrid, int band_count) {
  if (band_count < 1) fail(errc::invalid_argument, "compute_bands: band count must be >= 1");
  if (band_count > lattice.size())
    fail(errc::invalid_argument, "compute_bands: band count exceeds matrix dimension");
  if (kgrid.empty()) fail(errc::invalid_argument, "compute_bands: empty k grid");

  BandTable table{kgrid, Eigen::MatrixXd(static_cast<Eigen::Index>(kgrid.size()), band_count), lattice};
  for (std::size_t g = 0; g < kgrid.size(); ++g) {
    const Eigen::VectorXd& kr = kgrid[g];
    if (kr.size() != lattice.dim()) fail(errc::shape, "compute_bands: k point dimension mismatch");
    Eigen::VectorXcd k = kr.cast<cplx>();
    AssembledOperator op = assemble(A, V, k, lattice);
    const double scale = std::max(1.0, op.matrix.cwiseAbs().maxCoeff());
    const double herm_residual = (op.matrix - op.matrix.adjoint()).cwiseAbs().maxCoeff();
    if (herm_residual > 1e-8 * scale)
      fail(errc::integrity,
           "compute_bands: operator is not Hermitian at a real quasimomentum "
           "(complex-valued data passed with a real flag?)");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(((op.matrix + op.matrix.adjoint()) * 0.5).eval(),
                                                       Eigen::EigenvaluesOnly);
    table.bands.row(static_cast<Eigen::Index>(g)) = es.eigenvalues().head(band_count).transpose();
  }
  return table;
}

FlatBandReport detect_flat_bands(const BandTable& table, double tol) {
  if (table.kpoints.empty()) fail(errc::invalid_argument, "detect_flat_bands: empty band table");
  if (!(tol > 0)) fail(errc::invalid_argument, "detect_flat_bands: tolerance must be positive");
  FlatBandReport report;
  report.tol = tol;
  for (Eigen::Index b = 0; b < table.bands.cols(); ++b) {
    double osc = table.bands.col(b).maxCoeff() - table.bands.col(b).minCoeff();
    report.oscillation.push_back(osc);
    if (osc < tol) report.flagged.push_back(static_cast<int>(b));
  }
  return report;
}

std::vector<Eigen::VectorXd> brillouin_grid(int dim, int points_per_axis) {
  if (dim < 1 || points_per_axis < 2) fail(errc::invalid_argument, "brillouin_grid: bad grid parameters");
  long long total = 1;
  for (int i = 0; i < dim; ++i) total *= points_per_axis;
  std::vector<Eigen::VectorXd> grid;
  grid.reserve(static_cast<std::size_t>(total));
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  for (long long g = 0; g < total; ++g) {
    long long rem = g;
    Eigen::VectorXd k(dim);
    for (int i = dim - 1; i >= 0; --i) {
      idx[static_cast<std::size_t>(i)] = static_cast<int>(rem % points_per_axis);
      rem /= points_per_axis;
    }
    for (int i = 0; i < dim; ++i)
      k(i) = -kPi + kTwoPi * static_cast<double>(idx[static_cast<std::size_t>(i)]) / (points_per_axis - 1);
    grid.push_back(std::move(k));
  }
  return grid;
}

}  // namespace blochlab
