#include "field.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace blochlab {

std::string to_string(FieldRank rank) {
  switch (rank) {
    case FieldRank::scalar: return "scalar";
    case FieldRank::vector: return "vector";
    case FieldRank::matrix: return "matrix";
  }
  return "?";
}

PeriodicField::PeriodicField(const Lattice& lattice, FieldRank rank, int q)
    : lattice_(lattice), rank_(rank), q_(q) {
  switch (rank) {
    case FieldRank::scalar: components_ = 1; break;
    case FieldRank::vector: components_ = lattice.dim(); break;
    case FieldRank::matrix: components_ = q * q; break;
  }
  data_.assign(static_cast<std::size_t>(components_) * static_cast<std::size_t>(lattice.size()), cplx(0, 0));
}

PeriodicField PeriodicField::scalar(const Lattice& lattice) { return PeriodicField(lattice, FieldRank::scalar, 0); }
PeriodicField PeriodicField::vector_valued(const Lattice& lattice) {
  return PeriodicField(lattice, FieldRank::vector, 0);
}
PeriodicField PeriodicField::matrix_valued(const Lattice& lattice, int q) {
  if (q < 1) fail(errc::invalid_argument, "matrix field needs q >= 1");
  return PeriodicField(lattice, FieldRank::matrix, q);
}

cplx PeriodicField::coeff_at(int comp, std::span<const int> m) const {
  long long idx = lattice_.index_of(m);
  return idx < 0 ? cplx(0, 0) : coeff(comp, idx);
}

void PeriodicField::set_coeff_at(int comp, std::span<const int> m, cplx value) {
  long long idx = lattice_.index_of(m);
  if (idx < 0) fail(errc::domain, "mode outside lattice box");
  set_coeff(comp, idx, value);
}

std::span<const cplx> PeriodicField::component(int comp) const {
  return {data_.data() + offset(comp, 0), static_cast<std::size_t>(lattice_.size())};
}

bool PeriodicField::conjugate_symmetric(double rel_tol) const {
  const double scale = std::max(max_abs(), 1e-300);
  const int d = lattice_.dim();
  std::vector<int> m(d), neg(d);
  for (long long i = 0; i < lattice_.size(); ++i) {
    lattice_.mode_of(i, m);
    for (int j = 0; j < d; ++j) neg[j] = -m[j];
    long long ni = lattice_.index_of(neg);
    for (int c = 0; c < components_; ++c) {
      if (std::abs(coeff(c, ni) - std::conj(coeff(c, i))) > rel_tol * scale) return false;
    }
  }
  return true;
}

void PeriodicField::set_real_flagged(bool value) {
  if (value && !conjugate_symmetric())
    fail(errc::integrity, "field flagged real-valued but coefficients are not conjugate-symmetric");
  real_flagged_ = value;
}

void PeriodicField::set_mean_zero_flagged(bool value) {
  if (value) {
    std::vector<int> zero(static_cast<std::size_t>(lattice_.dim()), 0);
    for (int c = 0; c < components_; ++c) {
      if (coeff_at(c, zero) != cplx(0, 0))
        fail(errc::integrity, "field flagged mean-zero but coeff(0) != 0");
    }
  }
  mean_zero_ = value;
}

double PeriodicField::max_abs() const {
  double m = 0;
  for (const cplx& v : data_) m = std::max(m, std::abs(v));
  return m;
}

int PeriodicField::support_radius() const {
  const int d = lattice_.dim();
  std::vector<int> m(d);
  int radius = 0;
  for (long long i = 0; i < lattice_.size(); ++i) {
    bool nonzero = false;
    for (int c = 0; c < components_; ++c)
      if (coeff(c, i) != cplx(0, 0)) { nonzero = true; break; }
    if (!nonzero) continue;
    lattice_.mode_of(i, m);
    int sup = 0;
    for (int j = 0; j < d; ++j) sup = std::max(sup, std::abs(m[j]));
    radius = std::max(radius, sup);
  }
  return radius;
}

bool PeriodicField::is_zero() const {
  for (const cplx& v : data_)
    if (v != cplx(0, 0)) return false;
  return true;
}

namespace {

struct NonzeroEntry {
  long long index;
  cplx value;
};

std::vector<NonzeroEntry> nonzeros(const PeriodicField& f, int comp) {
  std::vector<NonzeroEntry> out;
  auto span = f.component(comp);
  for (long long i = 0; i < static_cast<long long>(span.size()); ++i)
    if (span[i] != cplx(0, 0)) out.push_back({i, span[i]});
  return out;
}

// accumulate conv(a[ca], b[cb]) into a dense buffer over ModeBox{d, 2N}
void accumulate_conv(std::vector<cplx>& ext, const ModeBox& ext_box, const PeriodicField& a, int ca,
                     const PeriodicField& b, int cb) {
  const Lattice& lat = a.lattice();
  const int d = lat.dim();
  auto na = nonzeros(a, ca);
  auto nb = nonzeros(b, cb);
  if (na.empty() || nb.empty()) return;
  std::vector<int> ma(d), mb(d), sum(d);
  for (const auto& ea : na) {
    lat.mode_of(ea.index, ma);
    for (const auto& eb : nb) {
      lat.mode_of(eb.index, mb);
      for (int j = 0; j < d; ++j) sum[j] = ma[j] + mb[j];
      ext[static_cast<std::size_t>(ext_box.index_of(sum))] += ea.value * eb.value;
    }
  }
}

// split an extended buffer into the lattice box (into out comp) and report
// the l2 weight of what falls outside
double harvest(const std::vector<cplx>& ext, const ModeBox& ext_box, PeriodicField& out, int comp) {
  const Lattice& lat = out.lattice();
  const int d = lat.dim();
  std::vector<int> m(d);
  double loss_sq = 0;
  for (long long i = 0; i < ext_box.size(); ++i) {
    const cplx v = ext[static_cast<std::size_t>(i)];
    if (v == cplx(0, 0)) continue;
    ext_box.mode_of(i, m);
    long long idx = lat.index_of(m);
    if (idx >= 0)
      out.set_coeff(comp, idx, v);
    else
      loss_sq += std::norm(v);
  }
  return loss_sq;
}

}  // namespace

ConvolveResult convolve(const PeriodicField& u, const PeriodicField& v) {
  if (!(u.lattice() == v.lattice())) fail(errc::shape, "convolve: fields live on different lattices");
  const Lattice& lat = u.lattice();
  const ModeBox ext_box{lat.dim(), 2 * lat.cutoff()};
  const long long ext_size = ext_box.size();

  FieldRank out_rank;
  const PeriodicField* s = nullptr;  // scalar side when mixed
  const PeriodicField* x = nullptr;
  if (u.rank() == FieldRank::scalar && v.rank() == FieldRank::scalar) {
    out_rank = FieldRank::scalar;
  } else if (u.rank() == FieldRank::scalar || v.rank() == FieldRank::scalar) {
    s = u.rank() == FieldRank::scalar ? &u : &v;
    x = u.rank() == FieldRank::scalar ? &v : &u;
    out_rank = x->rank();
  } else if (u.rank() == FieldRank::vector && v.rank() == FieldRank::vector) {
    out_rank = FieldRank::scalar;  // dot product
  } else if (u.rank() == FieldRank::matrix && v.rank() == FieldRank::matrix) {
    if (u.matrix_size() != v.matrix_size())
      fail(errc::shape, "convolve: matrix sizes differ");
    out_rank = FieldRank::matrix;
  } else {
    fail(errc::shape, "convolve: incompatible ranks " + to_string(u.rank()) + " * " + to_string(v.rank()));
  }

  PeriodicField out = out_rank == FieldRank::scalar ? PeriodicField::scalar(lat)
                      : out_rank == FieldRank::vector
                          ? PeriodicField::vector_valued(lat)
                          : PeriodicField::matrix_valued(lat, (u.rank() == FieldRank::matrix ? u : v).matrix_size());

  double loss_sq = 0;
  std::vector<cplx> ext(static_cast<std::size_t>(ext_size));
  auto run = [&](int out_comp, auto&& fill) {
    std::fill(ext.begin(), ext.end(), cplx(0, 0));
    fill();
    loss_sq += harvest(ext, ext_box, out, out_comp);
  };

  if (u.rank() == FieldRank::scalar && v.rank() == FieldRank::scalar) {
    run(0, [&] { accumulate_conv(ext, ext_box, u, 0, v, 0); });
  } else if (s != nullptr) {
    for (int c = 0; c < x->components(); ++c)
      run(c, [&] { accumulate_conv(ext, ext_box, *s, 0, *x, c); });
  } else if (u.rank() == FieldRank::vector) {
    run(0, [&] {
      for (int j = 0; j < lat.dim(); ++j) accumulate_conv(ext, ext_box, u, j, v, j);
    });
  } else {
    const int q = u.matrix_size();
    for (int r = 0; r < q; ++r)
      for (int c = 0; c < q; ++c)
        run(r * q + c, [&] {
          for (int k = 0; k < q; ++k) accumulate_conv(ext, ext_box, u, r * q + k, v, k * q + c);
        });
  }

  if (u.real_flagged() && v.real_flagged()) out.set_real_flagged(true);
  return {std::move(out), std::sqrt(loss_sq)};
}

std::vector<cplx> convolve_square_extended(const PeriodicField& a) {
  if (a.rank() != FieldRank::vector) fail(errc::shape, "convolve_square_extended expects a vector field");
  const Lattice& lat = a.lattice();
  const ModeBox ext_box{lat.dim(), 2 * lat.cutoff()};
  std::vector<cplx> ext(static_cast<std::size_t>(ext_box.size()));
  for (int j = 0; j < lat.dim(); ++j) accumulate_conv(ext, ext_box, a, j, a, j);
  return ext;
}

SobolevReport sobolev_norm(const PeriodicField& u, double s) {
  const Lattice& lat = u.lattice();
  double total = 0;
  for (long long i = 0; i < lat.size(); ++i) {
    double w = std::pow(1.0 + lat.mode_norm_sq(i), s);
    double mag = 0;
    for (int c = 0; c < u.components(); ++c) mag += std::norm(u.coeff(c, i));
    total += w * mag;
  }
  return {s, std::sqrt(total)};
}

double l2_norm(const PeriodicField& u) { return sobolev_norm(u, 0.0).value; }

PeriodicField apply_lambda(const PeriodicField& u, double rho, bool inverse) {
  if (!(rho > 0)) fail(errc::domain, "apply_lambda requires rho > 0 (factor at m=0 would vanish)");
  PeriodicField out = u;
  const Lattice& lat = u.lattice();
  for (long long i = 0; i < lat.size(); ++i) {
    double f = std::sqrt(rho * rho + lat.mode_norm_sq(i));
    for (int c = 0; c < u.components(); ++c)
      out.set_coeff(c, i, inverse ? u.coeff(c, i) / f : u.coeff(c, i) * f);
  }
  return out;
}

PeriodicField gradient(const PeriodicField& chi) {
  if (chi.rank() != FieldRank::scalar) fail(errc::shape, "gradient expects a scalar field");
  const Lattice& lat = chi.lattice();
  PeriodicField out = PeriodicField::vector_valued(lat);
  std::vector<int> m(static_cast<std::size_t>(lat.dim()));
  for (long long i = 0; i < lat.size(); ++i) {
    cplx c = chi.coeff(0, i);
    if (c == cplx(0, 0)) continue;
    lat.mode_of(i, m);
    for (int j = 0; j < lat.dim(); ++j) out.set_coeff(j, i, cplx(0, kTwoPi) * static_cast<double>(m[j]) * c);
  }
  if (chi.real_flagged()) out.set_real_flagged(true);
  return out;
}

namespace {
PeriodicField combine(const PeriodicField& a, const PeriodicField& b, double sign) {
  if (!(a.lattice() == b.lattice()) || a.rank() != b.rank() || a.components() != b.components())
    fail(errc::shape, "field addition: incompatible shapes");
  PeriodicField out = a;
  for (int c = 0; c < a.components(); ++c)
    for (long long i = 0; i < a.lattice().size(); ++i)
      out.set_coeff(c, i, a.coeff(c, i) + sign * b.coeff(c, i));
  if (!(a.real_flagged() && b.real_flagged())) out.set_real_flagged(false);
  out.set_mean_zero_flagged(false);
  return out;
}
}  // namespace

PeriodicField operator+(const PeriodicField& a, const PeriodicField& b) { return combine(a, b, 1.0); }
PeriodicField operator-(const PeriodicField& a, const PeriodicField& b) { return combine(a, b, -1.0); }

PeriodicField operator*(cplx scale, const PeriodicField& a) {
  PeriodicField out = a;
  for (int c = 0; c < a.components(); ++c)
    for (long long i = 0; i < a.lattice().size(); ++i) out.set_coeff(c, i, scale * a.coeff(c, i));
  if (scale.imag() != 0.0) out.set_real_flagged(false);
  return out;
}

std::string format_field_literal(const PeriodicField& f) {
  std::ostringstream os;
  os << "field rank=" << to_string(f.rank());
  if (f.rank() == FieldRank::matrix) os << " q=" << f.matrix_size();
  os << " real=" << (f.real_flagged() ? 1 : 0) << " meanzero=" << (f.mean_zero_flagged() ? 1 : 0);
  if (f.smoothness()) os << " s=" << format_double(*f.smoothness());
  os << "\n";
  const Lattice& lat = f.lattice();
  std::vector<int> m(static_cast<std::size_t>(lat.dim()));
  for (long long i = 0; i < lat.size(); ++i) {
    bool nonzero = false;
    for (int c = 0; c < f.components(); ++c)
      if (f.coeff(c, i) != cplx(0, 0)) { nonzero = true; break; }
    if (!nonzero) continue;
    lat.mode_of(i, m);
    for (int j = 0; j < lat.dim(); ++j) os << m[j] << " ";
    for (int c = 0; c < f.components(); ++c) {
      cplx v = f.coeff(c, i);
      os << format_double(v.real()) << " " << format_double(v.imag());
      if (c + 1 < f.components()) os << " ";
    }
    os << "\n";
  }
  return os.str();
}

PeriodicField parse_field_literal(const Lattice& lattice, std::string_view text) {
  std::istringstream is{std::string(text)};
  std::string header;
  while (std::getline(is, header)) {
    if (!header.empty() && header[0] != '#') break;
  }
  std::istringstream hs(header);
  std::string magic;
  hs >> magic;
  if (magic != "field") fail(errc::io, "field literal: expected header starting with 'field'");
  FieldRank rank = FieldRank::scalar;
  int q = 0;
  bool real_flag = false, mean_zero = false;
  std::optional<double> smoothness;
  std::string kv;
  while (hs >> kv) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) fail(errc::io, "field literal: malformed header token '" + kv + "'");
    std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
    if (key == "rank") {
      if (value == "scalar") rank = FieldRank::scalar;
      else if (value == "vector") rank = FieldRank::vector;
      else if (value == "matrix") rank = FieldRank::matrix;
      else fail(errc::io, "field literal: unknown rank '" + value + "'");
    } else if (key == "q") {
      q = std::stoi(value);
    } else if (key == "real") {
      real_flag = value == "1";
    } else if (key == "meanzero") {
      mean_zero = value == "1";
    } else if (key == "s") {
      smoothness = std::stod(value);
    } else {
      fail(errc::io, "field literal: unknown header key '" + key + "'");
    }
  }
  PeriodicField f = rank == FieldRank::scalar   ? PeriodicField::scalar(lattice)
                    : rank == FieldRank::vector ? PeriodicField::vector_valued(lattice)
                                                : PeriodicField::matrix_valued(lattice, q);
  const int d = lattice.dim();
  std::vector<int> m(static_cast<std::size_t>(d));
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    for (int j = 0; j < d; ++j) {
      if (!(ls >> m[j])) fail(errc::io, "field literal: short entry line '" + line + "'");
    }
    if (!lattice.contains(m)) fail(errc::io, "field literal: mode outside lattice in line '" + line + "'");
    for (int c = 0; c < f.components(); ++c) {
      double re, im;
      if (!(ls >> re >> im)) fail(errc::io, "field literal: missing coefficient in line '" + line + "'");
      f.set_coeff_at(c, m, cplx(re, im));
    }
    double trailing;
    if (ls >> trailing) fail(errc::io, "field literal: trailing data in line '" + line + "'");
  }
  f.set_smoothness(smoothness);
  f.set_real_flagged(real_flag);
  f.set_mean_zero_flagged(mean_zero);
  return f;
}

}  // namespace blochlab
