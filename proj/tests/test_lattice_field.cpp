#include <doctest.h>

#include <cmath>

#include "field.hpp"
#include "quadrature.hpp"

using namespace blochlab;

namespace {

PeriodicField random_scalar(const Lattice& lat, std::uint64_t seed, double decay = 1.0) {
  Rng rng(seed);
  PeriodicField f = PeriodicField::scalar(lat);
  for (long long i = 0; i < lat.size(); ++i)
    f.set_coeff(0, i, rng.gaussian_complex() / std::pow(1.0 + lat.mode_norm_sq(i), decay));
  return f;
}

}  // namespace

TEST_CASE("lattice mode counts") {
  CHECK(Lattice(2, 1).size() == 9);
  CHECK(Lattice(1, 3).size() == 7);
  CHECK(Lattice(3, 2).size() == 125);
}

TEST_CASE("lattice ordering is a bijection") {
  Lattice lat(3, 2);
  std::vector<int> m(3);
  for (long long i = 0; i < lat.size(); ++i) {
    lat.mode_of(i, m);
    CHECK(lat.index_of(m) == i);
  }
  // out-of-box lookup
  std::vector<int> outside{3, 0, 0};
  CHECK(lat.index_of(outside) == -1);
}

TEST_CASE("lattice budget error names the offending size") {
  long long saved = mode_budget();
  set_mode_budget(100);
  CHECK_THROWS_WITH_AS(Lattice(3, 3), doctest::Contains("d=3"), Error);
  try {
    Lattice(3, 3);
  } catch (const Error& e) {
    CHECK(e.code() == errc::budget);
    CHECK(std::string(e.what()).find("N=3") != std::string::npos);
  }
  set_mode_budget(saved);
}

TEST_CASE("convolve: delta shift") {
  Lattice lat(2, 2);
  PeriodicField u = PeriodicField::scalar(lat);
  PeriodicField v = PeriodicField::scalar(lat);
  u.set_coeff_at(0, std::vector<int>{1, 0}, 1.0);
  v.set_coeff_at(0, std::vector<int>{0, 1}, 1.0);
  auto res = convolve(u, v);
  CHECK(res.truncation_loss == 0.0);
  CHECK(res.field.coeff_at(0, std::vector<int>{1, 1}) == cplx(1, 0));
  double total = sobolev_norm(res.field, 0).value;
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("convolve: squared cosine pair") {
  // (e^{i t} + e^{-i t})^2 = e^{2it} + 2 + e^{-2it}
  Lattice lat(1, 2);
  PeriodicField u = PeriodicField::scalar(lat);
  u.set_coeff_at(0, std::vector<int>{1}, 1.0);
  u.set_coeff_at(0, std::vector<int>{-1}, 1.0);
  auto res = convolve(u, u);
  CHECK(res.field.coeff_at(0, std::vector<int>{-2}) == cplx(1, 0));
  CHECK(res.field.coeff_at(0, std::vector<int>{0}) == cplx(2, 0));
  CHECK(res.field.coeff_at(0, std::vector<int>{2}) == cplx(1, 0));
  CHECK(res.truncation_loss == 0.0);
}

TEST_CASE("convolve: constant is the identity") {
  Lattice lat(2, 3);
  PeriodicField one = PeriodicField::scalar(lat);
  one.set_coeff_at(0, std::vector<int>{0, 0}, 1.0);
  PeriodicField u = random_scalar(lat, 7);
  auto res = convolve(one, u);
  for (long long i = 0; i < lat.size(); ++i) CHECK(res.field.coeff(0, i) == u.coeff(0, i));
}

TEST_CASE("convolve: bilinear and commutative for scalars") {
  Lattice lat(1, 4);
  PeriodicField u = random_scalar(lat, 1), v = random_scalar(lat, 2), w = random_scalar(lat, 3);
  auto uv = convolve(u, v).field;
  auto vu = convolve(v, u).field;
  for (long long i = 0; i < lat.size(); ++i)
    CHECK(std::abs(uv.coeff(0, i) - vu.coeff(0, i)) < 1e-14);
  // (u + w) * v = u*v + w*v
  auto lhs = convolve(u + w, v).field;
  auto rhs = convolve(u, v).field + convolve(w, v).field;
  for (long long i = 0; i < lat.size(); ++i)
    CHECK(std::abs(lhs.coeff(0, i) - rhs.coeff(0, i)) < 1e-13);
}

TEST_CASE("convolve: truncation loss is measured") {
  Lattice lat(1, 1);
  PeriodicField u = PeriodicField::scalar(lat);
  u.set_coeff_at(0, std::vector<int>{1}, 1.0);
  auto res = convolve(u, u);  // lands at mode 2, outside the box
  CHECK(res.field.is_zero());
  CHECK(res.truncation_loss == doctest::Approx(1.0));
}

TEST_CASE("convolve: real flag is preserved") {
  Lattice lat(2, 2);
  Rng rng(11);
  PeriodicField u = PeriodicField::scalar(lat);
  std::vector<int> m(2), neg(2);
  for (long long i = 0; i < lat.size(); ++i) {
    lat.mode_of(i, m);
    neg = {-m[0], -m[1]};
    cplx z = rng.gaussian_complex();
    u.set_coeff(0, i, z);
    u.set_coeff_at(0, neg, std::conj(z));
  }
  u.set_coeff_at(0, std::vector<int>{0, 0}, 0.5);
  u.set_real_flagged(true);
  auto res = convolve(u, u);
  CHECK(res.field.real_flagged());
  CHECK(res.field.conjugate_symmetric(1e-12));
}

TEST_CASE("convolve: rank mismatch is a shape error") {
  Lattice lat(2, 1);
  PeriodicField u = PeriodicField::vector_valued(lat);
  PeriodicField m = PeriodicField::matrix_valued(lat, 2);
  CHECK_THROWS_AS((void)convolve(u, m), Error);
  try {
    (void)convolve(u, m);
  } catch (const Error& e) {
    CHECK(e.code() == errc::shape);
  }
}

TEST_CASE("sobolev norm examples") {
  Lattice lat(2, 2);
  PeriodicField u = PeriodicField::scalar(lat);
  u.set_coeff_at(0, std::vector<int>{1, 0}, 1.0);
  CHECK(sobolev_norm(u, 1).value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(sobolev_norm(u, 0).value == doctest::Approx(1.0).epsilon(1e-14));
  PeriodicField z = PeriodicField::scalar(lat);
  CHECK(sobolev_norm(z, 0.7).value == 0.0);
}

TEST_CASE("sobolev norm: Parseval at s=0") {
  Lattice lat(2, 3);
  PeriodicField u = random_scalar(lat, 21);
  double sum = 0;
  for (long long i = 0; i < lat.size(); ++i) sum += std::norm(u.coeff(0, i));
  double norm = sobolev_norm(u, 0).value;
  CHECK(norm * norm == doctest::Approx(sum).epsilon(1e-15));
}

TEST_CASE("apply_lambda examples and inverse") {
  Lattice lat(2, 4);
  PeriodicField u = PeriodicField::scalar(lat);
  u.set_coeff_at(0, std::vector<int>{4, 0}, 1.0);
  PeriodicField fwd = apply_lambda(u, 3.0);
  CHECK(fwd.coeff_at(0, std::vector<int>{4, 0}) == cplx(5, 0));  // sqrt(9+16)
  // diagonality: nothing leaks to other modes
  CHECK(sobolev_norm(fwd, 0).value == doctest::Approx(5.0).epsilon(1e-15));

  PeriodicField c = PeriodicField::scalar(lat);
  c.set_coeff_at(0, std::vector<int>{0, 0}, 1.0);
  CHECK(apply_lambda(c, 1.0).coeff_at(0, std::vector<int>{0, 0}) == cplx(1, 0));

  PeriodicField r = random_scalar(lat, 5);
  PeriodicField back = apply_lambda(apply_lambda(r, 2.5), 2.5, true);
  for (long long i = 0; i < lat.size(); ++i)
    CHECK(std::abs(back.coeff(0, i) - r.coeff(0, i)) < 1e-12);

  CHECK_THROWS_AS((void)apply_lambda(u, 0.0), Error);
  CHECK_THROWS_AS((void)apply_lambda(u, -1.0), Error);
}

TEST_CASE("field literal round trip") {
  Lattice lat(2, 3);
  PeriodicField f = random_scalar(lat, 77);
  // conjugate-symmetrize so the real flag participates
  std::vector<int> m(2), neg(2);
  for (long long i = 0; i < lat.size(); ++i) {
    lat.mode_of(i, m);
    neg = {-m[0], -m[1]};
    long long ni = lat.index_of(neg);
    if (ni < i) continue;
    f.set_coeff(0, ni, std::conj(f.coeff(0, i)));
  }
  std::vector<int> zero{0, 0};
  f.set_coeff_at(0, zero, cplx(f.coeff_at(0, zero).real(), 0));
  f.set_real_flagged(true);
  f.set_smoothness(2.5);

  PeriodicField g = parse_field_literal(lat, format_field_literal(f));
  CHECK(g.real_flagged());
  CHECK(g.smoothness() == f.smoothness());
  for (long long i = 0; i < lat.size(); ++i) CHECK(g.coeff(0, i) == f.coeff(0, i));
}

TEST_CASE("field literal rejects bad input") {
  Lattice lat(1, 2);
  CHECK_THROWS_AS((void)parse_field_literal(lat, "nonsense"), Error);
  CHECK_THROWS_AS((void)parse_field_literal(lat, "field rank=scalar real=0 meanzero=0\n9 1 0\n"), Error);
  CHECK_THROWS_AS((void)parse_field_literal(lat, "field rank=scalar real=0 meanzero=0\n1 1\n"), Error);
  CHECK_THROWS_AS((void)parse_field_literal(lat, "field rank=scalar wombat=1\n"), Error);
}

TEST_CASE("gradient differentiation rule") {
  Lattice lat(1, 2);
  PeriodicField chi = PeriodicField::scalar(lat);
  chi.set_coeff_at(0, std::vector<int>{1}, 0.5);
  chi.set_coeff_at(0, std::vector<int>{-1}, 0.5);
  chi.set_real_flagged(true);
  PeriodicField g = gradient(chi);
  CHECK(std::abs(g.coeff_at(0, std::vector<int>{1}) - cplx(0, kPi)) < 1e-15);
  CHECK(std::abs(g.coeff_at(0, std::vector<int>{-1}) - cplx(0, -kPi)) < 1e-15);
}

TEST_CASE("quadrature grid: evaluation/expansion round trip") {
  Lattice lat(2, 3);
  PeriodicField u = random_scalar(lat, 9);
  QuadratureGrid grid = QuadratureGrid::for_products(lat);
  Eigen::VectorXcd values = grid.evaluate(u, 0);
  PeriodicField back = PeriodicField::scalar(lat);
  grid.expand(values, back, 0);
  for (long long i = 0; i < lat.size(); ++i)
    CHECK(std::abs(back.coeff(0, i) - u.coeff(0, i)) < 1e-13);
}

TEST_CASE("quadrature grid: products are exact in band") {
  Lattice lat(1, 3);
  PeriodicField u = random_scalar(lat, 31), v = random_scalar(lat, 32);
  QuadratureGrid grid = QuadratureGrid::for_products(lat);
  Eigen::VectorXcd prod = grid.evaluate(u, 0).cwiseProduct(grid.evaluate(v, 0));
  Lattice wide(1, 6);
  PeriodicField uv = PeriodicField::scalar(wide);
  grid.expand(prod, uv, 0);
  auto conv = convolve(u, v);
  std::vector<int> m(1);
  for (long long i = 0; i < lat.size(); ++i) {
    lat.mode_of(i, m);
    CHECK(std::abs(uv.coeff_at(0, m) - conv.field.coeff(0, i)) < 1e-13);
  }
}
