#include "assembly.hpp"

#include <algorithm>
#include <cmath>

#include "quadrature.hpp"

namespace blochlab {

namespace {

void check_inputs(const PeriodicField* A, const PeriodicField* V, const Lattice& lattice) {
  if (A != nullptr) {
    if (A->rank() != FieldRank::vector) fail(errc::shape, "assemble: A must be a vector field");
    if (!(A->lattice() == lattice)) fail(errc::shape, "assemble: A lives on a different lattice");
  }
  if (V != nullptr) {
    if (V->rank() != FieldRank::scalar) fail(errc::shape, "assemble: V must be a scalar field");
    if (!(V->lattice() == lattice)) fail(errc::shape, "assemble: V lives on a different lattice");
  }
}

int ext_support_radius(const std::vector<cplx>& ext, const ModeBox& box) {
  std::vector<int> m(static_cast<std::size_t>(box.dim));
  int radius = 0;
  for (long long i = 0; i < box.size(); ++i) {
    if (ext[static_cast<std::size_t>(i)] == cplx(0, 0)) continue;
    box.mode_of(i, m);
    int sup = 0;
    for (int j = 0; j < box.dim; ++j) sup = std::max(sup, std::abs(m[j]));
    radius = std::max(radius, sup);
  }
  return radius;
}

}  // namespace

AssembledOperator assemble(const PeriodicField* A, const PeriodicField* V, const Eigen::VectorXcd& k,
                           const Lattice& lattice) {
  check_inputs(A, V, lattice);
  if (k.size() != lattice.dim()) fail(errc::shape, "assemble: quasimomentum dimension mismatch");

  const int d = lattice.dim();
  const long long n = lattice.size();
  const ModeBox ext_box{d, 2 * lattice.cutoff()};

  AssembledOperator op(lattice);
  op.k = k;

  std::vector<cplx> a_square;
  if (A != nullptr && !A->is_zero()) {
    a_square = convolve_square_extended(*A);
    op.magnetic = std::make_shared<PeriodicField>(*A);
    double outside_sq = 0;
    std::vector<int> m(static_cast<std::size_t>(d));
    for (long long i = 0; i < ext_box.size(); ++i) {
      const cplx v = a_square[static_cast<std::size_t>(i)];
      if (v == cplx(0, 0)) continue;
      ext_box.mode_of(i, m);
      if (!lattice.contains(m)) outside_sq += std::norm(v);
    }
    op.a_square_box_loss = std::sqrt(outside_sq);
    op.bandwidth = std::max({op.bandwidth, A->support_radius(), ext_support_radius(a_square, ext_box)});
  }
  if (V != nullptr && !V->is_zero()) {
    op.electric = std::make_shared<PeriodicField>(*V);
    op.bandwidth = std::max(op.bandwidth, V->support_radius());
  }

  op.matrix = Eigen::MatrixXcd::Zero(n, n);
  std::vector<int> mrow(static_cast<std::size_t>(d)), mcol(static_cast<std::size_t>(d)),
      diff(static_cast<std::size_t>(d));
  const bool have_a = static_cast<bool>(op.magnetic);
  const bool have_v = static_cast<bool>(op.electric);
  for (long long col = 0; col < n; ++col) {
    lattice.mode_of(col, mcol);
    for (long long row = 0; row < n; ++row) {
      lattice.mode_of(row, mrow);
      cplx value = row == col ? symbol_h0(k, mrow) : cplx(0, 0);
      if (have_a || have_v) {
        for (int j = 0; j < d; ++j) diff[j] = mrow[j] - mcol[j];
        if (have_a) {
          long long di = lattice.index_of(diff);
          if (di >= 0) {
            for (int j = 0; j < d; ++j) {
              cplx factor = kTwoPi * static_cast<double>(mrow[j] + mcol[j]) + 2.0 * k(j);
              value += factor * op.magnetic->coeff(j, di);
            }
          }
          value += a_square[static_cast<std::size_t>(ext_box.index_of(diff))];
        }
        if (have_v) {
          long long di = lattice.index_of(diff);
          if (di >= 0) value += op.electric->coeff(0, di);
        }
      }
      if (value != cplx(0, 0)) op.matrix(row, col) = value;
    }
  }
  return op;
}

AssembledOperator assemble(const PeriodicField* A, const PeriodicField* V, const Quasimomentum& q,
                           const Lattice& lattice, bool precondition) {
  if (q.dim() != lattice.dim()) fail(errc::shape, "assemble: quasimomentum dimension mismatch");
  if (precondition && !(q.rho() > 0))
    fail(errc::domain, "assemble: Lambda preconditioning requires rho > 0");
  AssembledOperator op = assemble(A, V, q.k(), lattice);
  op.family = q;
  op.rho = q.rho();
  if (precondition) {
    for (long long col = 0; col < lattice.size(); ++col)
      op.matrix.col(col) /= lambda_multiplier(q.rho(), lattice.mode_norm_sq(col));
    op.preconditioned = true;
  }
  return op;
}

PeriodicField apply_via_quadrature(const PeriodicField* A, const PeriodicField* V, const Eigen::VectorXcd& k,
                                   const PeriodicField& u) {
  const Lattice& lat = u.lattice();
  check_inputs(A, V, lat);
  if (u.rank() != FieldRank::scalar) fail(errc::shape, "apply_via_quadrature expects scalar u");
  const int d = lat.dim();
  const Lattice wide(d, 2 * lat.cutoff());
  const QuadratureGrid grid = QuadratureGrid::for_products(lat);
  std::vector<int> m(static_cast<std::size_t>(d));

  // v = (D + k) u (exact in Fourier) + A u (pointwise), as grid samples
  std::vector<Eigen::VectorXcd> v_grid(static_cast<std::size_t>(d));
  {
    PeriodicField dku = PeriodicField::vector_valued(lat);
    for (long long i = 0; i < lat.size(); ++i) {
      const cplx c = u.coeff(0, i);
      if (c == cplx(0, 0)) continue;
      lat.mode_of(i, m);
      for (int j = 0; j < d; ++j) dku.set_coeff(j, i, (kTwoPi * static_cast<double>(m[j]) + k(j)) * c);
    }
    Eigen::VectorXcd u_grid;
    if (A != nullptr) u_grid = grid.evaluate(u, 0);
    for (int j = 0; j < d; ++j) {
      v_grid[static_cast<std::size_t>(j)] = grid.evaluate(dku, j);
      if (A != nullptr)
        v_grid[static_cast<std::size_t>(j)] += grid.evaluate(*A, j).cwiseProduct(u_grid);
    }
  }

  // (D + k) . v needs v's coefficients on the doubled band (exact there)
  PeriodicField v_wide = PeriodicField::vector_valued(wide);
  for (int j = 0; j < d; ++j) grid.expand(v_grid[static_cast<std::size_t>(j)], v_wide, j);
  PeriodicField result_wide = PeriodicField::scalar(wide);
  std::vector<int> mw(static_cast<std::size_t>(d));
  for (long long i = 0; i < wide.size(); ++i) {
    wide.mode_of(i, mw);
    cplx s(0, 0);
    for (int j = 0; j < d; ++j)
      s += (kTwoPi * static_cast<double>(mw[j]) + k(j)) * v_wide.coeff(j, i);
    result_wide.set_coeff(0, i, s);
  }

  // A . v and V u stay pointwise; only the in-band part of the result is kept
  Eigen::VectorXcd rest = Eigen::VectorXcd::Zero(grid.point_count());
  if (A != nullptr)
    for (int j = 0; j < d; ++j) rest += grid.evaluate(*A, j).cwiseProduct(v_grid[static_cast<std::size_t>(j)]);
  if (V != nullptr) rest += grid.evaluate(*V, 0).cwiseProduct(grid.evaluate(u, 0));

  PeriodicField out = PeriodicField::scalar(lat);
  grid.expand(rest, out, 0);
  for (long long i = 0; i < lat.size(); ++i) {
    lat.mode_of(i, m);
    out.set_coeff(0, i, out.coeff(0, i) + result_wide.coeff_at(0, m));
  }
  return out;
}

PeriodicField gauge_shift(const PeriodicField& A, const PeriodicField& chi) {
  if (A.rank() != FieldRank::vector) fail(errc::shape, "gauge_shift: A must be a vector field");
  if (chi.rank() != FieldRank::scalar) fail(errc::shape, "gauge_shift: chi must be scalar");
  if (!chi.real_flagged()) fail(errc::domain, "gauge_shift: chi must be real-flagged");
  if (!(A.lattice() == chi.lattice())) fail(errc::shape, "gauge_shift: lattice mismatch");
  return A + gradient(chi);
}

RelativeBoundReport estimate_relative_bound(const PeriodicField& V, const std::vector<double>& eps_grid,
                                            int trials, std::uint64_t seed) {
  if (V.rank() != FieldRank::scalar) fail(errc::shape, "estimate_relative_bound: V must be scalar");
  if (trials < 1) fail(errc::invalid_argument, "estimate_relative_bound: trials >= 1 required");
  for (double e : eps_grid)
    if (!(e >= 0)) fail(errc::invalid_argument, "estimate_relative_bound: eps must be >= 0");

  const Lattice& lat = V.lattice();
  const QuadratureGrid grid = QuadratureGrid::for_products(lat);
  const Eigen::VectorXcd v_grid = grid.evaluate(V, 0);
  const Lattice wide(lat.dim(), 2 * lat.cutoff());

  Rng rng(seed);
  RelativeBoundReport report;
  report.eps = eps_grid;
  report.c_eps.assign(eps_grid.size(), 0.0);
  report.trials = trials;
  report.family = "random unit-H1 trigonometric polynomials, Gaussian coefficients with (1+|m|^2)^{-1} decay";

  for (int t = 0; t < trials; ++t) {
    PeriodicField u = PeriodicField::scalar(lat);
    for (long long i = 0; i < lat.size(); ++i)
      u.set_coeff(0, i, rng.gaussian_complex() / (1.0 + lat.mode_norm_sq(i)));
    const double h1 = sobolev_norm(u, 1.0).value;
    const double l2 = l2_norm(u);
    // ||V u|| on the doubled band is the exact L2 product norm
    PeriodicField vu = PeriodicField::scalar(wide);
    grid.expand(v_grid.cwiseProduct(grid.evaluate(u, 0)), vu, 0);
    const double vu_norm = l2_norm(vu);
    for (std::size_t e = 0; e < eps_grid.size(); ++e) {
      double needed = (vu_norm - eps_grid[e] * h1) / l2;
      report.c_eps[e] = std::max(report.c_eps[e], std::max(0.0, needed));
    }
  }
  return report;
}

void dump_operator(const AssembledOperator& op, std::ostream& os) {
  os << "# operator d=" << op.lattice.dim() << " N=" << op.lattice.cutoff();
  os << " k=[";
  for (Eigen::Index j = 0; j < op.k.size(); ++j) {
    os << format_double(op.k(j).real()) << (op.k(j).imag() < 0 ? "-" : "+")
       << format_double(std::abs(op.k(j).imag())) << "i";
    if (j + 1 < op.k.size()) os << ",";
  }
  os << "] preconditioned=" << (op.preconditioned ? 1 : 0) << " A=" << op.magnetic_id
     << " V=" << op.electric_id << "\n";
  for (long long i = 0; i < op.matrix.rows(); ++i)
    for (long long j = 0; j < op.matrix.cols(); ++j) {
      const cplx v = op.matrix(i, j);
      if (v == cplx(0, 0)) continue;
      os << i << " " << j << " " << format_double(v.real()) << " " << format_double(v.imag()) << "\n";
    }
}

}  // namespace blochlab
