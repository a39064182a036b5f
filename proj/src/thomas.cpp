#include "thomas.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "dbar.hpp"
#include "quadrature.hpp"

namespace blochlab {

EstimateScan thomas_scan(const PeriodicField* A, const PeriodicField* V, const Eigen::VectorXd& direction,
                         double beta, const std::vector<double>& rho_list, const Lattice& lattice,
                         const ScanOptions& options) {
  if (rho_list.empty()) fail(errc::invalid_argument, "thomas_scan: empty rho list");
  for (std::size_t i = 0; i < rho_list.size(); ++i) {
    if (!(rho_list[i] > 0)) fail(errc::invalid_argument, "thomas_scan: rho values must be positive");
    if (i > 0 && !(rho_list[i] > rho_list[i - 1]))
      fail(errc::invalid_argument, "thomas_scan: rho values must be strictly ascending");
  }

  EstimateScan scan;
  scan.direction = direction;
  scan.beta = beta;
  scan.rho = rho_list;
  scan.floor_value = options.floor;
  scan.floor_satisfied = true;

  for (double rho : rho_list) {
    const Quasimomentum q(direction, beta, rho);
    AssembledOperator h = assemble(A, V, q, lattice, false);
    SigmaResult sh = sigma_min(h.matrix, options.sigma);
    for (long long col = 0; col < lattice.size(); ++col)
      h.matrix.col(col) /= lambda_multiplier(rho, lattice.mode_norm_sq(col));
    SigmaResult sp = sigma_min(h.matrix, options.sigma);
    scan.sigma_h.push_back(sh.value);
    scan.sigma_precond.push_back(sp.value);
    scan.method_h.push_back(sh.method);
    scan.method_precond.push_back(sp.method);
    if (!(sp.value >= options.floor)) scan.floor_satisfied = false;
  }

  // least squares through the origin, discarding the smallest 20% of rho
  const std::size_t skip = rho_list.size() / 5;
  double num = 0, den = 0;
  for (std::size_t i = skip; i < rho_list.size(); ++i) {
    num += rho_list[i] * scan.sigma_h[i];
    den += rho_list[i] * rho_list[i];
  }
  scan.growth_coefficient = den > 0 ? num / den : 0.0;
  scan.estimate_constant = *std::min_element(scan.sigma_precond.begin(), scan.sigma_precond.end()) / 2.0;
  return scan;
}

ZeroSetSlab zero_set(double rho, double beta, const Eigen::VectorXd& direction, const Lattice& lattice,
                     double thickness) {
  if (thickness < 0) fail(errc::invalid_argument, "zero_set: thickness must be >= 0");
  if (direction.size() != lattice.dim()) fail(errc::shape, "zero_set: direction dimension mismatch");
  ZeroSetSlab slab{rho, beta, thickness, direction, {}, {}};
  const int d = lattice.dim();
  std::vector<int> m(static_cast<std::size_t>(d));
  constexpr double kExactTol = 1e-9;
  for (long long i = 0; i < lattice.size(); ++i) {
    lattice.mode_of(i, m);
    double shifted_sq = 0, e_dot = 0;
    for (int j = 0; j < d; ++j) {
      double t = m[static_cast<std::size_t>(j)] + beta * direction(j);
      shifted_sq += t * t;
      e_dot += direction(j) * t;
    }
    const double radial = shifted_sq - rho * rho;
    const bool exact = std::abs(e_dot) <= kExactTol && std::abs(radial) <= kExactTol;
    if (exact) slab.exact_modes.push_back(i);
    if (exact || (std::abs(e_dot) <= thickness && std::abs(radial) <= thickness * rho))
      slab.near_modes.push_back(i);
  }
  return slab;
}

DualCover build_cover(double rho, double delta, const Lattice& lattice, const ZeroSetSlab& slab) {
  if (!(delta > 0 && delta < 1)) fail(errc::domain, "build_cover: delta must lie in (0,1)");
  if (!(rho > 0)) fail(errc::invalid_argument, "build_cover: rho must be positive");

  DualCover cover{lattice, rho, delta, 0, {}};
  const double diameter = std::pow(rho, delta);
  cover.tile_width = std::max(1, static_cast<int>(std::floor(diameter)));
  const int w = cover.tile_width;
  const int n = lattice.cutoff();
  const int d = lattice.dim();
  const int tiles_per_axis = (2 * n + 1 + w - 1) / w;

  // near-set coordinates for distance queries
  std::vector<std::vector<int>> near_pts;
  near_pts.reserve(slab.near_modes.size());
  for (long long idx : slab.near_modes) near_pts.push_back(lattice.mode(idx));

  long long patch_count = 1;
  for (int i = 0; i < d; ++i) patch_count *= tiles_per_axis;
  std::vector<int> tile_idx(static_cast<std::size_t>(d));
  std::vector<int> m(static_cast<std::size_t>(d));
  for (long long p = 0; p < patch_count; ++p) {
    long long rem = p;
    for (int i = d - 1; i >= 0; --i) {
      tile_idx[static_cast<std::size_t>(i)] = static_cast<int>(rem % tiles_per_axis);
      rem /= tiles_per_axis;
    }
    DualCover::Patch patch;
    patch.lo.resize(static_cast<std::size_t>(d));
    patch.hi.resize(static_cast<std::size_t>(d));
    patch.fat_lo.resize(static_cast<std::size_t>(d));
    patch.fat_hi.resize(static_cast<std::size_t>(d));
    patch.center.resize(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
      const int lo = -n + tile_idx[static_cast<std::size_t>(i)] * w;
      const int hi = std::min(n, lo + w - 1);
      patch.lo[static_cast<std::size_t>(i)] = lo;
      patch.hi[static_cast<std::size_t>(i)] = hi;
      patch.fat_lo[static_cast<std::size_t>(i)] = std::max(-n, lo - w / 2);
      patch.fat_hi[static_cast<std::size_t>(i)] = std::min(n, hi + (w + 1) / 2);
      patch.center[static_cast<std::size_t>(i)] = (lo + hi) / 2;
    }

    // enumerate core and fattened modes in lattice order
    auto collect = [&](const std::vector<int>& lo, const std::vector<int>& hi, std::vector<long long>& out) {
      long long count = 1;
      for (int i = 0; i < d; ++i) count *= hi[static_cast<std::size_t>(i)] - lo[static_cast<std::size_t>(i)] + 1;
      for (long long c = 0; c < count; ++c) {
        long long r = c;
        for (int i = d - 1; i >= 0; --i) {
          const int len = hi[static_cast<std::size_t>(i)] - lo[static_cast<std::size_t>(i)] + 1;
          m[static_cast<std::size_t>(i)] = lo[static_cast<std::size_t>(i)] + static_cast<int>(r % len);
          r /= len;
        }
        out.push_back(lattice.index_of(m));
      }
      std::sort(out.begin(), out.end());
    };
    collect(patch.lo, patch.hi, patch.core_modes);
    collect(patch.fat_lo, patch.fat_hi, patch.fat_modes);

    // Euclidean distance from the core tile (as a box) to the near set
    double dist_sq = std::numeric_limits<double>::infinity();
    for (const auto& pt : near_pts) {
      double s = 0;
      for (int i = 0; i < d; ++i) {
        const int lo = patch.lo[static_cast<std::size_t>(i)], hi = patch.hi[static_cast<std::size_t>(i)];
        const int x = pt[static_cast<std::size_t>(i)];
        const int gap = x < lo ? lo - x : (x > hi ? x - hi : 0);
        s += static_cast<double>(gap) * gap;
      }
      dist_sq = std::min(dist_sq, s);
    }
    patch.near_zero_set = dist_sq <= diameter * diameter;
    cover.patches.push_back(std::move(patch));
  }
  return cover;
}

std::string to_string(LocalInverseMode mode) {
  switch (mode) {
    case LocalInverseMode::far: return "far";
    case LocalInverseMode::near_direct: return "near-direct";
    case LocalInverseMode::near_model: return "near-model";
  }
  return "?";
}

namespace {

Eigen::MatrixXcd compress(const Eigen::MatrixXcd& m, const std::vector<long long>& modes) {
  const Eigen::Index n = static_cast<Eigen::Index>(modes.size());
  Eigen::MatrixXcd block(n, n);
  for (Eigen::Index c = 0; c < n; ++c)
    for (Eigen::Index r = 0; r < n; ++r)
      block(r, c) = m(modes[static_cast<std::size_t>(r)], modes[static_cast<std::size_t>(c)]);
  return block;
}

// preconditioned principal symbol H0(k, m) / lambda_rho(m) on given modes
Eigen::VectorXcd principal_diagonal(const AssembledOperator& op, const std::vector<long long>& modes) {
  Eigen::VectorXcd diag(static_cast<Eigen::Index>(modes.size()));
  std::vector<int> m(static_cast<std::size_t>(op.lattice.dim()));
  for (std::size_t i = 0; i < modes.size(); ++i) {
    op.lattice.mode_of(modes[i], m);
    cplx s = symbol_h0(op.k, m);
    if (op.preconditioned) s /= lambda_multiplier(op.rho, op.lattice.mode_norm_sq(modes[i]));
    diag(static_cast<Eigen::Index>(i)) = s;
  }
  return diag;
}

double spectral_norm(const Eigen::MatrixXcd& m) {
  return sigma_max(m, {.method = m.rows() <= 512 ? SigmaOptions::Method::dense : SigmaOptions::Method::automatic})
      .value;
}

// model reduction at a linearization point: returns the model inverse on the
// fattened patch and fills diagnostics
Eigen::MatrixXcd model_inverse_at(const AssembledOperator& op, const DualCover::Patch& patch,
                                  const Eigen::VectorXd& center, const LocalInverseOptions& options,
                                  LocalInverse& info) {
  const Lattice& lat = op.lattice;
  const Quasimomentum& q = *op.family;
  const double lambda_c = op.preconditioned ? lambda_multiplier(q.rho(), center.squaredNorm()) : 1.0;

  // linearized (preconditioned) symbol ell(m) = s0 + W.(m - c):
  // grad(H0/lambda) = grad(H0)/lambda - H0 m / lambda^3
  Eigen::VectorXcd k = q.k();
  cplx h0_c(0, 0);
  for (int j = 0; j < lat.dim(); ++j) {
    cplx t = kTwoPi * center(j) + k(j);
    h0_c += t * t;
  }
  const cplx s0 = h0_c / lambda_c;
  Eigen::VectorXcd w_grad = symbol_h0_gradient(q, center) / lambda_c;
  if (op.preconditioned)
    w_grad -= (h0_c / (lambda_c * lambda_c * lambda_c)) * center.cast<cplx>();

  // magnetic + electric coupling frozen at the patch center:
  // g(p) = [ (2 pi 2c + 2k).A(p) + (A*A)(p) + V(p) ] / lambda_c
  PeriodicField g = PeriodicField::scalar(lat);
  std::vector<int> m(static_cast<std::size_t>(lat.dim()));
  const ModeBox ext_box{lat.dim(), 2 * lat.cutoff()};
  std::vector<cplx> a_square;
  if (op.magnetic) a_square = convolve_square_extended(*op.magnetic);
  for (long long i = 0; i < lat.size(); ++i) {
    lat.mode_of(i, m);
    cplx value(0, 0);
    if (op.magnetic) {
      for (int j = 0; j < lat.dim(); ++j)
        value += (2.0 * kTwoPi * center(j) + 2.0 * k(j)) * op.magnetic->coeff(j, i);
      value += a_square[static_cast<std::size_t>(ext_box.index_of(m))];
    }
    if (op.electric) value += op.electric->coeff(0, i);
    g.set_coeff(0, i, value / lambda_c);
  }

  // absorb the mean into the constant part; gauge the rest along W
  std::vector<int> zero(static_cast<std::size_t>(lat.dim()), 0);
  const cplx g_mean = g.coeff_at(0, zero);
  g.set_coeff_at(0, zero, cplx(0, 0));
  info.absorbed_mean = g_mean;
  const cplx s_const = s0 + g_mean;

  Eigen::Vector2cd w2(w_grad(0), w_grad(1));
  FirstOrderSolve solve = first_order_solve(w2, g, options.model_obstruction_tol);
  info.obstructed_weight = solve.obstructed_norm;

  PeriodicField f_minus = exp_field(cplx(-1, 0) * solve.h);  // e^{-h}
  PeriodicField f_plus = exp_field(solve.h);                 // e^{+h}

  // R = Mult(e^{-h}) diag(1/ell) Mult(e^{h}) compressed to the fattened patch
  const auto& modes = patch.fat_modes;
  const Eigen::Index n = static_cast<Eigen::Index>(modes.size());
  Eigen::MatrixXcd mult_minus(n, n), mult_plus(n, n);
  std::vector<int> mr(static_cast<std::size_t>(lat.dim())), mcl(static_cast<std::size_t>(lat.dim())),
      diff(static_cast<std::size_t>(lat.dim()));
  for (Eigen::Index cidx = 0; cidx < n; ++cidx) {
    lat.mode_of(modes[static_cast<std::size_t>(cidx)], mcl);
    for (Eigen::Index ridx = 0; ridx < n; ++ridx) {
      lat.mode_of(modes[static_cast<std::size_t>(ridx)], mr);
      for (int j = 0; j < lat.dim(); ++j) diff[static_cast<std::size_t>(j)] = mr[j] - mcl[j];
      mult_minus(ridx, cidx) = f_minus.coeff_at(0, diff);
      mult_plus(ridx, cidx) = f_plus.coeff_at(0, diff);
    }
  }
  Eigen::VectorXcd ell(n);
  const double ell_scale = std::max(std::abs(s_const), w_grad.norm());
  for (Eigen::Index i = 0; i < n; ++i) {
    lat.mode_of(modes[static_cast<std::size_t>(i)], mr);
    cplx v = s_const;
    for (int j = 0; j < lat.dim(); ++j)
      v += w_grad(j) * (static_cast<double>(mr[j]) - center(j));
    // kernel-line resonance: fall back to a pseudoinverse-style cut
    ell(i) = std::abs(v) > options.model_obstruction_tol * ell_scale ? 1.0 / v : cplx(0, 0);
  }
  return mult_minus * ell.asDiagonal() * mult_plus;
}

}  // namespace

LocalInverse local_inverse(const AssembledOperator& op, const DualCover& cover, int patch_index,
                           LocalInverseMode mode, const LocalInverseOptions& options) {
  if (patch_index < 0 || patch_index >= static_cast<int>(cover.patches.size()))
    fail(errc::invalid_argument, "local_inverse: patch index out of range");
  const DualCover::Patch& patch = cover.patches[static_cast<std::size_t>(patch_index)];
  if (mode == LocalInverseMode::far && patch.near_zero_set)
    fail(errc::classification,
         "local_inverse: patch " + std::to_string(patch_index) + " is near the zero set; far inverse refused");
  if (mode != LocalInverseMode::far && !patch.near_zero_set)
    fail(errc::classification, "local_inverse: patch " + std::to_string(patch_index) +
                                   " is far from the zero set; requested near mode " + to_string(mode));
  if (mode == LocalInverseMode::near_model && op.lattice.dim() != 2)
    fail(errc::domain, "local_inverse: the near-model reduction is implemented for d=2 only");
  if (mode == LocalInverseMode::near_model && !op.family)
    fail(errc::invalid_argument, "local_inverse: near-model needs an operator assembled from (e, beta, rho)");

  LocalInverse out;
  out.patch = patch_index;
  out.mode = mode;
  const Eigen::MatrixXcd block = compress(op.matrix, patch.fat_modes);
  const Eigen::Index n = block.rows();

  switch (mode) {
    case LocalInverseMode::far: {
      const Eigen::VectorXcd diag = principal_diagonal(op, patch.fat_modes);
      for (Eigen::Index i = 0; i < n; ++i) {
        if (diag(i) == cplx(0, 0))
          fail(errc::rank_deficient,
               "local_inverse: principal symbol vanishes on far patch " + std::to_string(patch_index));
      }
      Eigen::MatrixXcd d_inv = diag.cwiseInverse().asDiagonal();
      Eigen::MatrixXcd correction = block - Eigen::MatrixXcd(diag.asDiagonal());
      Eigen::MatrixXcd r = d_inv;
      for (int order = 0; order < options.neumann_order; ++order) r = d_inv - d_inv * (correction * r);
      out.inverse = std::move(r);
      break;
    }
    case LocalInverseMode::near_direct: {
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(block, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const auto& sv = svd.singularValues();
      if (sv(n - 1) <= options.pinv_rel_tol * sv(0))
        fail(errc::rank_deficient, "local_inverse: compressed block on patch " + std::to_string(patch_index) +
                                       " is singular (sigma_min/sigma_max = " +
                                       format_double(sv(n - 1) / sv(0)) + ")");
      out.inverse = svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().adjoint();
      break;
    }
    case LocalInverseMode::near_model: {
      Eigen::VectorXd center(op.lattice.dim());
      for (int j = 0; j < op.lattice.dim(); ++j) center(j) = patch.center[static_cast<std::size_t>(j)];
      out.inverse = model_inverse_at(op, patch, center, options, out);
      // deviation against the direct pseudoinverse and sensitivity to the
      // linearization point (one mode off-center along axis 0)
      LocalInverse direct = local_inverse(op, cover, patch_index, LocalInverseMode::near_direct, options);
      const double direct_norm = spectral_norm(direct.inverse);
      out.model_vs_direct = direct_norm > 0 ? spectral_norm(out.inverse - direct.inverse) / direct_norm : 0.0;
      LocalInverse probe;
      probe.patch = patch_index;
      probe.mode = mode;
      Eigen::VectorXd shifted = center;
      shifted(0) += 1.0;
      Eigen::MatrixXcd r_shifted = model_inverse_at(op, patch, shifted, options, probe);
      const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(n, n);
      out.linearization_sensitivity =
          std::abs(spectral_norm(r_shifted * block - eye) - spectral_norm(out.inverse * block - eye));
      break;
    }
  }

  out.norm = spectral_norm(out.inverse);
  out.residual = spectral_norm(out.inverse * block - Eigen::MatrixXcd::Identity(n, n));
  return out;
}

ParametrixReport assemble_parametrix(const AssembledOperator& op, const DualCover& cover,
                                     const std::vector<LocalInverse>& locals) {
  if (locals.size() != cover.patches.size())
    fail(errc::invalid_argument, "assemble_parametrix: one local inverse per patch required");
  const long long n = op.lattice.size();
  Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(n, n);
  for (const LocalInverse& li : locals) {
    const DualCover::Patch& patch = cover.patches[static_cast<std::size_t>(li.patch)];
    const auto& fat = patch.fat_modes;
    // psi_j restricts to the core tile; phi_j (the fattened indicator) is
    // already the row support of the local inverse
    for (long long col : patch.core_modes) {
      const auto pos = std::lower_bound(fat.begin(), fat.end(), col) - fat.begin();
      for (std::size_t row = 0; row < fat.size(); ++row)
        r(fat[row], col) += li.inverse(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(pos));
    }
  }

  ParametrixReport report;
  report.rho = op.rho;
  Eigen::MatrixXcd residual = r * op.matrix;
  residual.diagonal().array() -= 1.0;
  report.t_norm = spectral_norm(residual);
  report.r_norm = spectral_norm(r);
  for (const LocalInverse& li : locals) {
    report.local_norms.push_back(li.norm);
    report.local_residuals.push_back(li.residual);
    report.local_modes.push_back(to_string(li.mode));
  }
  return report;
}

}  // namespace blochlab
