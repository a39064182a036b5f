#include "dbar.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>

#include "quadrature.hpp"

namespace blochlab {

namespace {

void require_torus2(const PeriodicField& f, const char* who) {
  if (f.lattice().dim() != 2) fail(errc::domain, std::string(who) + " is defined on the 2-torus only");
}

// L2 norm of dbar(f) - g*f measured on the doubled band, where the product is
// exact for band-limited g, f.
double gauge_residual(const PeriodicField& g, const PeriodicField& f) {
  const Lattice& lat = g.lattice();
  const Lattice wide(2, 2 * lat.cutoff());
  const QuadratureGrid grid = QuadratureGrid::for_products(lat);
  const int q = g.rank() == FieldRank::matrix ? g.matrix_size() : 1;

  // grid samples of every component of g and f
  std::vector<Eigen::VectorXcd> gv(static_cast<std::size_t>(q * q)), fv(static_cast<std::size_t>(q * q));
  for (int c = 0; c < g.components(); ++c) gv[static_cast<std::size_t>(c)] = grid.evaluate(g, c);
  for (int c = 0; c < f.components(); ++c) fv[static_cast<std::size_t>(c)] = grid.evaluate(f, c);

  const PeriodicField df = dbar_apply(f);
  double total = 0;
  std::vector<int> m(2);
  for (int r = 0; r < q; ++r)
    for (int c = 0; c < q; ++c) {
      Eigen::VectorXcd prod = Eigen::VectorXcd::Zero(grid.point_count());
      for (int k = 0; k < q; ++k)
        prod += gv[static_cast<std::size_t>(r * q + k)].cwiseProduct(fv[static_cast<std::size_t>(k * q + c)]);
      PeriodicField gf_wide = PeriodicField::scalar(wide);
      grid.expand(prod, gf_wide, 0);
      for (long long i = 0; i < wide.size(); ++i) {
        wide.mode_of(i, m);
        const cplx d = df.coeff_at(r * q + c, m) - gf_wide.coeff(0, i);
        total += std::norm(d);
      }
    }
  return std::sqrt(total);
}

// smallest |f| (scalar) or |det F| (matrix) over the product grid
double grid_margin(const PeriodicField& f) {
  const QuadratureGrid grid = QuadratureGrid::for_products(f.lattice());
  const int q = f.rank() == FieldRank::matrix ? f.matrix_size() : 1;
  std::vector<Eigen::VectorXcd> values(static_cast<std::size_t>(q * q));
  for (int c = 0; c < f.components(); ++c) values[static_cast<std::size_t>(c)] = grid.evaluate(f, c);
  double margin = std::numeric_limits<double>::infinity();
  Eigen::MatrixXcd point(q, q);
  for (long long p = 0; p < grid.point_count(); ++p) {
    if (q == 1) {
      margin = std::min(margin, std::abs(values[0](p)));
    } else {
      for (int r = 0; r < q; ++r)
        for (int c = 0; c < q; ++c) point(r, c) = values[static_cast<std::size_t>(r * q + c)](p);
      margin = std::min(margin, std::abs(point.determinant()));
    }
  }
  return margin;
}

PeriodicField identity_matrix_field(const Lattice& lat, int q) {
  PeriodicField f = PeriodicField::matrix_valued(lat, q);
  std::vector<int> zero(2, 0);
  for (int r = 0; r < q; ++r) f.set_coeff_at(r * q + r, zero, cplx(1, 0));
  return f;
}

}  // namespace

cplx dbar_symbol(std::span<const int> m) {
  return cplx(0, kPi) * cplx(static_cast<double>(m[0]), static_cast<double>(m[1]));
}

PeriodicField dbar_apply(const PeriodicField& f) {
  require_torus2(f, "dbar_apply");
  const Lattice& lat = f.lattice();
  PeriodicField out = f;
  out.set_real_flagged(false);
  std::vector<int> m(2);
  for (long long i = 0; i < lat.size(); ++i) {
    lat.mode_of(i, m);
    const cplx s = dbar_symbol(m);
    for (int c = 0; c < f.components(); ++c) out.set_coeff(c, i, s * f.coeff(c, i));
  }
  return out;
}

PeriodicField dbar_inverse(const PeriodicField& u) {
  require_torus2(u, "dbar_inverse");
  const Lattice& lat = u.lattice();
  PeriodicField out = u;
  out.set_real_flagged(false);
  std::vector<int> m(2);
  for (long long i = 0; i < lat.size(); ++i) {
    lat.mode_of(i, m);
    if (m[0] == 0 && m[1] == 0) {
      for (int c = 0; c < u.components(); ++c) out.set_coeff(c, i, cplx(0, 0));
      continue;
    }
    const cplx s = dbar_symbol(m);
    for (int c = 0; c < u.components(); ++c) out.set_coeff(c, i, u.coeff(c, i) / s);
  }
  return out;
}

std::string to_string(GaugeVerdict v) {
  switch (v) {
    case GaugeVerdict::gauged: return "gauged";
    case GaugeVerdict::obstructed: return "obstructed";
    case GaugeVerdict::converged: return "converged";
    case GaugeVerdict::diverged: return "diverged";
  }
  return "?";
}

GaugeResult gauge_scalar(const PeriodicField& g, double tol) {
  require_torus2(g, "gauge_scalar");
  if (g.rank() != FieldRank::scalar) fail(errc::shape, "gauge_scalar expects a scalar field");
  const Lattice& lat = g.lattice();
  std::vector<int> zero(2, 0);

  GaugeResult result;
  result.obstruction = Eigen::MatrixXcd::Constant(1, 1, g.coeff_at(0, zero));
  if (g.coeff_at(0, zero) != cplx(0, 0)) {
    result.verdict = GaugeVerdict::obstructed;
    return result;
  }

  PeriodicField h = dbar_inverse(g);
  PeriodicField f = exp_field(h);
  result.verdict = GaugeVerdict::gauged;
  result.residual = gauge_residual(g, f);
  result.margin = grid_margin(f);
  result.log_solution = std::move(h);
  result.solution = std::move(f);
  if (result.residual > tol)
    fail(errc::tolerance, "gauge_scalar: truncation residual " + format_double(result.residual) +
                              " exceeds tolerance " + format_double(tol) +
                              "; increase the lattice cutoff N (current N=" + std::to_string(lat.cutoff()) + ")");
  return result;
}

SplitGaugeResult split_and_gauge(const PeriodicField& g, int split_modes, double tol) {
  require_torus2(g, "split_and_gauge");
  if (g.rank() != FieldRank::scalar) fail(errc::shape, "split_and_gauge expects a scalar field");
  if (split_modes < 0) fail(errc::invalid_argument, "split_and_gauge: split_modes must be >= 0");
  const Lattice& lat = g.lattice();
  PeriodicField low = PeriodicField::scalar(lat);
  PeriodicField rest = PeriodicField::scalar(lat);
  std::vector<int> m(2);
  for (long long i = 0; i < lat.size(); ++i) {
    lat.mode_of(i, m);
    const cplx v = g.coeff(0, i);
    const double norm = std::sqrt(lat.mode_norm_sq(i));
    const bool in_band = norm > 0 && norm <= static_cast<double>(split_modes);
    (in_band ? low : rest).set_coeff(0, i, v);
  }
  SplitGaugeResult out{gauge_scalar(low, tol), std::move(rest), 0, 0};
  out.remainder_l2 = sobolev_norm(out.remainder, 0.0).value;
  out.remainder_h1 = sobolev_norm(out.remainder, 1.0).value;
  return out;
}

double plane_tail_index(const PeriodicField& A, std::span<const int> l, std::span<const int> n) {
  const Lattice& lat = A.lattice();
  const int d = lat.dim();
  std::vector<int> q(static_cast<std::size_t>(d));
  double tau = std::numeric_limits<double>::infinity();
  for (long long i = 0; i < lat.size(); ++i) {
    bool nonzero = false;
    for (int c = 0; c < A.components(); ++c)
      if (A.coeff(c, i) != cplx(0, 0)) { nonzero = true; break; }
    if (!nonzero) continue;
    lat.mode_of(i, q);
    long long dot_l = 0, dot_n = 0, norm_sq = 0;
    for (int j = 0; j < d; ++j) {
      dot_l += static_cast<long long>(q[static_cast<std::size_t>(j)]) * l[static_cast<std::size_t>(j)];
      dot_n += static_cast<long long>(q[static_cast<std::size_t>(j)]) * n[static_cast<std::size_t>(j)];
      norm_sq += static_cast<long long>(q[static_cast<std::size_t>(j)]) * q[static_cast<std::size_t>(j)];
    }
    if (norm_sq == 0) continue;  // the mean is handled separately, never gauged
    // projection onto span(l, n) vanishes iff q is orthogonal to both
    if (dot_l == 0 && dot_n == 0) tau = std::min(tau, std::sqrt(static_cast<double>(norm_sq)));
  }
  return tau;
}

namespace {

bool independent(std::span<const int> l, std::span<const int> n) {
  const std::size_t d = l.size();
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) {
      long long det = static_cast<long long>(l[i]) * n[j] - static_cast<long long>(l[j]) * n[i];
      if (det != 0) return true;
    }
  return false;
}

bool canonical(std::span<const int> v) {
  for (int x : v) {
    if (x > 0) return true;
    if (x < 0) return false;
  }
  return false;  // zero vector
}

long long norm_sq(std::span<const int> v) {
  long long s = 0;
  for (int x : v) s += static_cast<long long>(x) * x;
  return s;
}

}  // namespace

PlaneChoice select_plane(const PeriodicField& A, int search_bound) {
  const Lattice& lat = A.lattice();
  const int d = lat.dim();
  if (d < 2) fail(errc::domain, "select_plane needs d >= 2");
  if (search_bound < 1) fail(errc::invalid_argument, "select_plane: search bound must be >= 1");

  const ModeBox box{d, search_bound};
  std::vector<std::vector<int>> candidates;
  std::vector<int> v(static_cast<std::size_t>(d));
  for (long long i = 0; i < box.size(); ++i) {
    box.mode_of(i, v);
    if (canonical(v)) candidates.push_back(v);
  }

  PlaneChoice best;
  best.search_bound = search_bound;
  bool have = false;
  double best_tau = -1;
  long long best_norm = 0;
  for (const auto& l : candidates)
    for (const auto& n : candidates) {
      if (!independent(l, n)) continue;
      const double tau = plane_tail_index(A, l, n);
      const long long ns = norm_sq(l) + norm_sq(n);
      bool better = false;
      if (!have) {
        better = true;
      } else if (tau != best_tau) {
        better = tau > best_tau;
      } else if (ns != best_norm) {
        better = ns < best_norm;
      } else {
        // lexicographic on the concatenated pair
        std::vector<int> cat_new(l), cat_old(best.l);
        cat_new.insert(cat_new.end(), n.begin(), n.end());
        cat_old.insert(cat_old.end(), best.n.begin(), best.n.end());
        better = cat_new < cat_old;
      }
      if (better) {
        have = true;
        best_tau = tau;
        best_norm = ns;
        best.l = l;
        best.n = n;
      }
    }
  best.tail_infinite = std::isinf(best_tau);
  best.tail_index = best_tau;
  return best;
}

GaugeResult gauge_matrix(const PeriodicField& G, const MatrixGaugeOptions& options) {
  require_torus2(G, "gauge_matrix");
  if (G.rank() != FieldRank::matrix) fail(errc::shape, "gauge_matrix expects a matrix field");
  const Lattice& lat = G.lattice();
  const int q = G.matrix_size();
  std::vector<int> zero(2, 0);

  Eigen::MatrixXcd mean(q, q);
  for (int r = 0; r < q; ++r)
    for (int c = 0; c < q; ++c) mean(r, c) = G.coeff_at(r * q + c, zero);
  if (mean.cwiseAbs().maxCoeff() != 0.0)
    fail(errc::domain, "gauge_matrix: mean(G) must vanish for the Picard iteration to be well-posed");

  GaugeResult result;
  result.obstruction = Eigen::MatrixXcd::Zero(q, q);

  PeriodicField f = identity_matrix_field(lat, q);
  const double scale = std::max(1.0, G.max_abs());
  bool diverged = false;
  double last_removed_mean = 0;
  for (int it = 0; it < options.max_iterations; ++it) {
    ConvolveResult prod = convolve(G, f);
    // strip the mean so dbar^{-1} is applicable; log it as the obstruction
    Eigen::MatrixXcd removed(q, q);
    for (int r = 0; r < q; ++r)
      for (int c = 0; c < q; ++c) {
        removed(r, c) = prod.field.coeff_at(r * q + c, zero);
        prod.field.set_coeff_at(r * q + c, zero, cplx(0, 0));
      }
    PeriodicField next = identity_matrix_field(lat, q) + dbar_inverse(prod.field);
    if (options.damping != 1.0)
      next = cplx(1.0 - options.damping, 0) * f + cplx(options.damping, 0) * next;
    const double increment = l2_norm(next - f);
    last_removed_mean = removed.norm();
    result.trace.push_back({it, increment, last_removed_mean});
    result.obstruction = removed;
    f = std::move(next);
    if (!std::isfinite(increment) || l2_norm(f) > 1e8 * scale) {
      diverged = true;
      break;
    }
    if (increment <= 1e-14 * std::max(1.0, l2_norm(f))) break;
  }

  result.residual = gauge_residual(G, f);
  result.margin = grid_margin(f);
  result.solution = std::move(f);
  if (diverged || !std::isfinite(result.residual)) {
    result.verdict = GaugeVerdict::diverged;
  } else if (result.residual <= options.tol) {
    result.verdict = GaugeVerdict::converged;
  } else if (last_removed_mean > options.tol) {
    result.verdict = GaugeVerdict::obstructed;
  } else {
    result.verdict = GaugeVerdict::diverged;  // stalled without converging
  }
  return result;
}

FirstOrderSolve first_order_solve(const Eigen::Vector2cd& w, const PeriodicField& g, double rel_tol) {
  require_torus2(g, "first_order_solve");
  if (g.rank() != FieldRank::scalar) fail(errc::shape, "first_order_solve expects a scalar field");
  const Lattice& lat = g.lattice();
  const double w_scale = w.norm();
  FirstOrderSolve out{PeriodicField::scalar(lat), {}, 0.0};
  std::vector<int> m(2);
  double obstructed_sq = 0;
  for (long long i = 0; i < lat.size(); ++i) {
    const cplx v = g.coeff(0, i);
    if (v == cplx(0, 0)) continue;
    lat.mode_of(i, m);
    const cplx sym = w(0) * static_cast<double>(m[0]) + w(1) * static_cast<double>(m[1]);
    if (std::abs(sym) <= rel_tol * w_scale) {
      out.obstructed_modes.push_back(i);
      obstructed_sq += std::norm(v);
      continue;
    }
    out.h.set_coeff(0, i, v / sym);
  }
  out.obstructed_norm = std::sqrt(obstructed_sq);
  return out;
}

}  // namespace blochlab
