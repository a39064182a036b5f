#include "quadrature.hpp"

#include <cmath>

namespace blochlab {

QuadratureGrid::QuadratureGrid(int dim, int points_per_axis) : dim_(dim), pts_(points_per_axis) {
  if (dim < 1 || points_per_axis < 1) fail(errc::invalid_argument, "bad quadrature grid");
  count_ = 1;
  for (int i = 0; i < dim; ++i) count_ *= pts_;
}

QuadratureGrid QuadratureGrid::for_products(const Lattice& lattice) {
  return QuadratureGrid(lattice.dim(), 4 * lattice.cutoff() + 1);
}

namespace {

// contract axis `axis` of an array shaped (len0, ..., len_{d-1}) with the
// pts x len twiddle matrix W: out[..., g, ...] = sum_m W(g, m) in[..., m, ...]
std::vector<cplx> contract_axis(const std::vector<cplx>& in, std::vector<long long>& shape, int axis,
                                const Eigen::MatrixXcd& w) {
  const long long len = shape[static_cast<std::size_t>(axis)];
  const long long out_len = w.rows();
  long long outer = 1, inner = 1;
  for (int i = 0; i < axis; ++i) outer *= shape[static_cast<std::size_t>(i)];
  for (std::size_t i = static_cast<std::size_t>(axis) + 1; i < shape.size(); ++i) inner *= shape[i];
  std::vector<cplx> out(static_cast<std::size_t>(outer * out_len * inner), cplx(0, 0));
  for (long long o = 0; o < outer; ++o) {
    const cplx* src = in.data() + o * len * inner;
    cplx* dst = out.data() + o * out_len * inner;
    for (long long g = 0; g < out_len; ++g) {
      for (long long m = 0; m < len; ++m) {
        const cplx wgm = w(g, m);
        if (wgm == cplx(0, 0)) continue;
        const cplx* s = src + m * inner;
        cplx* t = dst + g * inner;
        for (long long q = 0; q < inner; ++q) t[q] += wgm * s[q];
      }
    }
  }
  shape[static_cast<std::size_t>(axis)] = out_len;
  return out;
}

Eigen::MatrixXcd forward_twiddles(int pts, int cutoff) {
  // W(g, m_index) = exp(2 pi i m g / pts), m = m_index - cutoff
  Eigen::MatrixXcd w(pts, 2 * cutoff + 1);
  for (int g = 0; g < pts; ++g)
    for (int mi = 0; mi < 2 * cutoff + 1; ++mi) {
      double phase = kTwoPi * static_cast<double>(mi - cutoff) * static_cast<double>(g) / pts;
      w(g, mi) = cplx(std::cos(phase), std::sin(phase));
    }
  return w;
}

}  // namespace

Eigen::VectorXcd QuadratureGrid::evaluate(const PeriodicField& f, int comp) const {
  const Lattice& lat = f.lattice();
  if (lat.dim() != dim_) fail(errc::shape, "quadrature grid dimension mismatch");
  const int n = lat.cutoff();
  auto data = f.component(comp);
  std::vector<cplx> work(data.begin(), data.end());
  std::vector<long long> shape(static_cast<std::size_t>(dim_), 2LL * n + 1);
  const Eigen::MatrixXcd w = forward_twiddles(pts_, n);
  for (int axis = 0; axis < dim_; ++axis) work = contract_axis(work, shape, axis, w);
  return Eigen::Map<const Eigen::VectorXcd>(work.data(), static_cast<long long>(work.size()));
}

void QuadratureGrid::expand(const Eigen::VectorXcd& values, PeriodicField& out, int comp) const {
  const Lattice& lat = out.lattice();
  if (lat.dim() != dim_) fail(errc::shape, "quadrature grid dimension mismatch");
  const int n = lat.cutoff();
  if (2 * n + 1 > pts_) fail(errc::domain, "quadrature grid too coarse for target lattice");
  // inverse transform: (1/pts) sum_g exp(-2 pi i m g / pts), per axis
  Eigen::MatrixXcd w(2 * n + 1, pts_);
  for (int mi = 0; mi < 2 * n + 1; ++mi)
    for (int g = 0; g < pts_; ++g) {
      double phase = -kTwoPi * static_cast<double>(mi - n) * static_cast<double>(g) / pts_;
      w(mi, g) = cplx(std::cos(phase), std::sin(phase)) / static_cast<double>(pts_);
    }
  std::vector<cplx> work(values.data(), values.data() + values.size());
  std::vector<long long> shape(static_cast<std::size_t>(dim_), pts_);
  for (int axis = 0; axis < dim_; ++axis) work = contract_axis(work, shape, axis, w);
  for (long long i = 0; i < lat.size(); ++i) out.set_coeff(comp, i, work[static_cast<std::size_t>(i)]);
}

PeriodicField exp_field(const PeriodicField& h) {
  if (h.rank() != FieldRank::scalar) fail(errc::shape, "exp_field expects a scalar field");
  QuadratureGrid grid = QuadratureGrid::for_products(h.lattice());
  Eigen::VectorXcd values = grid.evaluate(h, 0);
  for (long long i = 0; i < values.size(); ++i) values(i) = std::exp(values(i));
  PeriodicField f = PeriodicField::scalar(h.lattice());
  grid.expand(values, f, 0);
  return f;
}

}  // namespace blochlab
