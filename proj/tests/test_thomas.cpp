#include <doctest.h>

#include <cmath>
#include <limits>

#include "presets.hpp"
#include "thomas.hpp"

using namespace blochlab;

namespace {

// independent oracle: minimum of |H0(k,m)| over the lattice via the expanded
// closed form 4 pi^2 [(m + beta e)^2 - rho^2 + 2 i rho e.(m + beta e)]
double diagonal_min_oracle(const Lattice& lat, const Eigen::VectorXd& e, double beta, double rho,
                           bool precondition) {
  std::vector<int> m(static_cast<std::size_t>(lat.dim()));
  double best = std::numeric_limits<double>::infinity();
  for (long long i = 0; i < lat.size(); ++i) {
    lat.mode_of(i, m);
    double shifted_sq = 0, e_dot = 0, norm_sq = 0;
    for (int j = 0; j < lat.dim(); ++j) {
      double t = m[static_cast<std::size_t>(j)] + beta * e(j);
      shifted_sq += t * t;
      e_dot += e(j) * t;
      norm_sq += static_cast<double>(m[static_cast<std::size_t>(j)]) * m[static_cast<std::size_t>(j)];
    }
    double value = 4 * kPi * kPi * std::abs(cplx(shifted_sq - rho * rho, 2 * rho * e_dot));
    if (precondition) value /= std::sqrt(rho * rho + norm_sq);
    best = std::min(best, value);
  }
  return best;
}

PeriodicField single_mode_a(const Lattice& lat, double amp) {
  return preset_field("single-mode-A", nlohmann::json{{"amp", amp}}, lat, FieldRank::vector, 0);
}

PeriodicField random_unit_field(const Lattice& lat, std::uint64_t seed) {
  Rng rng(seed);
  PeriodicField u = PeriodicField::scalar(lat);
  for (long long i = 0; i < lat.size(); ++i)
    u.set_coeff(0, i, rng.gaussian_complex() / (1.0 + lat.mode_norm_sq(i)));
  double scale = l2_norm(u);
  return (1.0 / scale) * u;
}

}  // namespace

TEST_CASE("zero set examples") {
  Lattice lat(2, 8);
  Eigen::Vector2d e(1, 0);

  // beta = 1/2: m_1 + 1/2 never vanishes on integers
  ZeroSetSlab half = zero_set(5.0, 0.5, e, lat, 0.0);
  CHECK(half.exact_modes.empty());

  ZeroSetSlab ring = zero_set(5.0, 0.0, e, lat, 0.0);
  REQUIRE(ring.exact_modes.size() == 2);
  std::vector<int> m0 = lat.mode(ring.exact_modes[0]);
  std::vector<int> m1 = lat.mode(ring.exact_modes[1]);
  CHECK(m0[0] == 0);
  CHECK(m1[0] == 0);
  CHECK(std::abs(m0[1]) == 5);
  CHECK(std::abs(m1[1]) == 5);

  ZeroSetSlab slab = zero_set(5.0, 0.5, e, lat, 1.0);
  auto contains = [&](int a, int b) {
    std::vector<int> probe{a, b};
    long long idx = lat.index_of(probe);
    for (long long mode : slab.near_modes)
      if (mode == idx) return true;
    return false;
  };
  CHECK(contains(0, 5));
  CHECK(contains(0, -5));
  CHECK(contains(-1, 5));
  CHECK(contains(-1, -5));
}

TEST_CASE("zero set: exact modes always belong to the near set") {
  Lattice lat(2, 6);
  Eigen::Vector2d e(1, 0);
  for (double t : {0.0, 1e-6, 0.5}) {
    ZeroSetSlab slab = zero_set(4.0, 0.0, e, lat, t);
    for (long long idx : slab.exact_modes) {
      bool found = false;
      for (long long n : slab.near_modes) found = found || n == idx;
      CHECK(found);
    }
  }
}

TEST_CASE("cover tiles partition the lattice") {
  Lattice lat(2, 6);
  Eigen::Vector2d e(1, 0);
  ZeroSetSlab slab = zero_set(4.0, 0.5, e, lat, 1.0);
  DualCover cover = build_cover(4.0, 0.5, lat, slab);
  CHECK(cover.tile_width == 2);  // floor(4^{1/2})

  // sum_j psi_j = 1 at every mode
  std::vector<int> owner(static_cast<std::size_t>(lat.size()), 0);
  for (const auto& patch : cover.patches)
    for (long long idx : patch.core_modes) owner[static_cast<std::size_t>(idx)] += 1;
  for (int count : owner) CHECK(count == 1);

  // phi dominates psi and the fattened multiplicity stays below 2^d
  std::vector<int> fat_count(static_cast<std::size_t>(lat.size()), 0);
  for (const auto& patch : cover.patches) {
    for (long long idx : patch.core_modes) {
      bool in_fat = false;
      for (long long f : patch.fat_modes) in_fat = in_fat || f == idx;
      CHECK(in_fat);
    }
    for (long long idx : patch.fat_modes) fat_count[static_cast<std::size_t>(idx)] += 1;
    // sup-metric diameter of the core tile stays below rho^delta
    for (std::size_t a = 0; a < patch.lo.size(); ++a)
      CHECK(patch.hi[a] - patch.lo[a] + 1 <= cover.tile_width);
  }
  for (int count : fat_count) CHECK(count <= 4);

  CHECK_THROWS_AS((void)build_cover(4.0, 1.5, lat, slab), Error);
  CHECK_THROWS_AS((void)build_cover(4.0, 0.0, lat, slab), Error);
}

TEST_CASE("free Thomas scan matches the diagonal oracle") {
  Lattice lat(2, 12);
  Eigen::Vector2d e(1, 0);
  std::vector<double> rho{5, 10, 20, 40};
  EstimateScan scan = thomas_scan(nullptr, nullptr, e, 0.5, rho, lat);

  for (std::size_t i = 0; i < rho.size(); ++i) {
    const double oracle_h = diagonal_min_oracle(lat, e, 0.5, rho[i], false);
    const double oracle_p = diagonal_min_oracle(lat, e, 0.5, rho[i], true);
    CHECK(scan.sigma_h[i] == doctest::Approx(oracle_h).epsilon(1e-9));
    CHECK(scan.sigma_precond[i] == doctest::Approx(oracle_p).epsilon(1e-9));
    // Thomas bound: |imag H0| >= 4 pi^2 * 2 rho * 1/2
    CHECK(scan.sigma_h[i] >= 4 * kPi * kPi * rho[i] * (1.0 - 1e-12));
  }
  // spec anchor value at rho = 10
  CHECK(scan.sigma_h[1] == doctest::Approx(394.9).epsilon(1e-3));
  CHECK(scan.growth_coefficient > 0);
  CHECK(scan.floor_satisfied);  // preconditioned minimum stays above 10

  // within the resolved regime (zero ring inside the box) the growth is linear
  // with slope 4 pi^2 (1 + O(1/rho))
  EstimateScan resolved = thomas_scan(nullptr, nullptr, e, 0.5, {4, 6, 8, 10}, lat);
  CHECK(resolved.growth_coefficient == doctest::Approx(4 * kPi * kPi).epsilon(0.01));
}

TEST_CASE("dense, iterative, and enumeration agree on the free operator") {
  Lattice lat(2, 6);
  Quasimomentum q = Quasimomentum::axis(2, 0.5, 7.0);
  AssembledOperator op = assemble(nullptr, nullptr, q, lat, false);
  const double oracle = diagonal_min_oracle(lat, q.direction(), 0.5, 7.0, false);
  SigmaOptions dense;
  dense.method = SigmaOptions::Method::dense;
  SigmaOptions iterative;
  iterative.method = SigmaOptions::Method::iterative;
  // the automatic path enumerates the (exactly diagonal) matrix itself
  CHECK(sigma_min(op.matrix).value == op.matrix.diagonal().cwiseAbs().minCoeff());
  CHECK(sigma_min(op.matrix).value == doctest::Approx(oracle).epsilon(1e-13));
  CHECK(sigma_min(op.matrix, dense).value == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(sigma_min(op.matrix, iterative).value == doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("scan input validation") {
  Lattice lat(2, 4);
  Eigen::Vector2d e(1, 0);
  CHECK_THROWS_AS((void)thomas_scan(nullptr, nullptr, e, 0.5, {}, lat), Error);
  CHECK_THROWS_AS((void)thomas_scan(nullptr, nullptr, e, 0.5, {4.0, 2.0}, lat), Error);
  CHECK_THROWS_AS((void)thomas_scan(nullptr, nullptr, e, 0.5, {-1.0, 2.0}, lat), Error);
}

TEST_CASE("local inverse: free far patch is exact") {
  Lattice lat(2, 8);
  Quasimomentum q = Quasimomentum::axis(2, 0.5, 30.0);  // zero set far outside the box
  AssembledOperator op = assemble(nullptr, nullptr, q, lat, true);
  ZeroSetSlab slab = zero_set(30.0, 0.5, q.direction(), lat, 1.0);
  DualCover cover = build_cover(30.0, 0.5, lat, slab);
  for (const auto& patch : cover.patches) CHECK_FALSE(patch.near_zero_set);
  LocalInverse li = local_inverse(op, cover, 0, LocalInverseMode::far);
  CHECK(li.residual < 1e-14);
  CHECK(li.norm > 0);
}

TEST_CASE("local inverse: near-direct pseudoinverse on a near patch") {
  Lattice lat(2, 8);
  Quasimomentum q = Quasimomentum::axis(2, 0.0, 4.5);  // near ring inside the box, no exact zeros
  AssembledOperator op = assemble(nullptr, nullptr, q, lat, true);
  ZeroSetSlab slab = zero_set(4.5, 0.0, q.direction(), lat, 1.0);
  CHECK(slab.exact_modes.empty());
  CHECK(!slab.near_modes.empty());
  DualCover cover = build_cover(4.5, 0.5, lat, slab);
  int near_patch = -1;
  for (std::size_t p = 0; p < cover.patches.size(); ++p)
    if (cover.patches[p].near_zero_set) { near_patch = static_cast<int>(p); break; }
  REQUIRE(near_patch >= 0);
  LocalInverse li = local_inverse(op, cover, near_patch, LocalInverseMode::near_direct);
  CHECK(li.residual < 1e-10);

  // classification errors both ways
  CHECK_THROWS_AS((void)local_inverse(op, cover, near_patch, LocalInverseMode::far), Error);
  int far_patch = -1;
  for (std::size_t p = 0; p < cover.patches.size(); ++p)
    if (!cover.patches[p].near_zero_set) { far_patch = static_cast<int>(p); break; }
  REQUIRE(far_patch >= 0);
  CHECK_THROWS_AS((void)local_inverse(op, cover, far_patch, LocalInverseMode::near_direct), Error);
}

TEST_CASE("local inverse: singular block raises a rank error") {
  Lattice lat(2, 8);
  Quasimomentum q = Quasimomentum::axis(2, 0.0, 5.0);  // exact zeros at (0, +-5)
  AssembledOperator op = assemble(nullptr, nullptr, q, lat, true);
  ZeroSetSlab slab = zero_set(5.0, 0.0, q.direction(), lat, 1.0);
  REQUIRE(!slab.exact_modes.empty());
  DualCover cover = build_cover(5.0, 0.5, lat, slab);
  std::vector<int> probe{0, 5};
  const long long singular_mode = lat.index_of(probe);
  int patch_idx = -1;
  for (std::size_t p = 0; p < cover.patches.size(); ++p)
    for (long long idx : cover.patches[p].core_modes)
      if (idx == singular_mode) patch_idx = static_cast<int>(p);
  REQUIRE(patch_idx >= 0);
  REQUIRE(cover.patches[static_cast<std::size_t>(patch_idx)].near_zero_set);
  try {
    (void)local_inverse(op, cover, patch_idx, LocalInverseMode::near_direct);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == errc::rank_deficient);
    CHECK(std::string(e.what()).find(std::to_string(patch_idx)) != std::string::npos);
  }
}

TEST_CASE("far residuals shrink with rho for a small magnetic potential") {
  Lattice lat(2, 12);
  PeriodicField a = single_mode_a(lat, 0.3);
  auto max_far_residual = [&](double rho) {
    Quasimomentum q = Quasimomentum::axis(2, 0.5, rho);
    AssembledOperator op = assemble(&a, nullptr, q, lat, true);
    ZeroSetSlab slab = zero_set(rho, 0.5, q.direction(), lat, 1.0);
    DualCover cover = build_cover(rho, 0.5, lat, slab);
    double worst = 0;
    for (std::size_t p = 0; p < cover.patches.size(); ++p) {
      if (cover.patches[p].near_zero_set) continue;
      worst = std::max(worst, local_inverse(op, cover, static_cast<int>(p), LocalInverseMode::far).residual);
    }
    return worst;
  };
  const double at_10 = max_far_residual(10.0);
  const double at_20 = max_far_residual(20.0);
  CHECK(at_20 < at_10);
}

TEST_CASE("parametrix: free operator") {
  Lattice lat(2, 6);
  Eigen::Vector2d e(1, 0);

  // single patch: tile width exceeds the box
  {
    Quasimomentum q(e, 0.5, 40.0);
    AssembledOperator op = assemble(nullptr, nullptr, q, lat, true);
    ZeroSetSlab slab = zero_set(40.0, 0.5, e, lat, 1.0);
    DualCover cover = build_cover(40.0, 0.99, lat, slab);
    REQUIRE(cover.patches.size() == 1);
    std::vector<LocalInverse> locals{local_inverse(op, cover, 0, LocalInverseMode::far)};
    ParametrixReport report = assemble_parametrix(op, cover, locals);
    CHECK(report.t_norm <= 1e-10);
  }

  // multi-patch: cross-patch coupling vanishes for diagonal operators
  {
    Quasimomentum q(e, 0.5, 20.0);
    AssembledOperator op = assemble(nullptr, nullptr, q, lat, true);
    ZeroSetSlab slab = zero_set(20.0, 0.5, e, lat, 1.0);
    DualCover cover = build_cover(20.0, 0.5, lat, slab);
    REQUIRE(cover.patches.size() > 1);
    std::vector<LocalInverse> locals;
    for (std::size_t p = 0; p < cover.patches.size(); ++p)
      locals.push_back(local_inverse(op, cover, static_cast<int>(p), LocalInverseMode::far));
    ParametrixReport report = assemble_parametrix(op, cover, locals);
    CHECK(report.t_norm <= 1e-8);
    // ||R|| <= max_j ||R_j|| * covering multiplicity
    double max_local = 0;
    for (const auto& li : locals) max_local = std::max(max_local, li.norm);
    CHECK(report.r_norm <= max_local * 4 + 1e-12);
  }
}

TEST_CASE("parametrix residual decays over rho for a smooth potential") {
  Lattice lat(2, 8);
  PeriodicField a = preset_field("gauss-decay", nlohmann::json{{"w", 2.0}, {"amp", 0.3}}, lat,
                                 FieldRank::vector, 11);
  Eigen::Vector2d e(1, 0);
  std::vector<double> t_norms;
  for (double rho : {10.0, 20.0, 40.0}) {
    Quasimomentum q(e, 0.5, rho);
    AssembledOperator op = assemble(&a, nullptr, q, lat, true);
    ZeroSetSlab slab = zero_set(rho, 0.5, e, lat, 1.0);
    DualCover cover = build_cover(rho, 0.5, lat, slab);
    std::vector<LocalInverse> locals;
    for (std::size_t p = 0; p < cover.patches.size(); ++p)
      locals.push_back(local_inverse(
          op, cover, static_cast<int>(p),
          cover.patches[p].near_zero_set ? LocalInverseMode::near_direct : LocalInverseMode::far));
    t_norms.push_back(assemble_parametrix(op, cover, locals).t_norm);
  }
  CHECK(t_norms[1] < t_norms[0]);
  CHECK(t_norms[2] < t_norms[1]);
}

TEST_CASE("near-model inverse reports its diagnostics") {
  Lattice lat(2, 10);
  PeriodicField a = single_mode_a(lat, 0.2);
  Quasimomentum q = Quasimomentum::axis(2, 0.5, 9.0);
  AssembledOperator op = assemble(&a, nullptr, q, lat, true);
  ZeroSetSlab slab = zero_set(9.0, 0.5, q.direction(), lat, 1.0);
  DualCover cover = build_cover(9.0, 0.5, lat, slab);
  int near_patch = -1;
  for (std::size_t p = 0; p < cover.patches.size(); ++p)
    if (cover.patches[p].near_zero_set) { near_patch = static_cast<int>(p); break; }
  REQUIRE(near_patch >= 0);
  LocalInverse model = local_inverse(op, cover, near_patch, LocalInverseMode::near_model);
  LocalInverse direct = local_inverse(op, cover, near_patch, LocalInverseMode::near_direct);
  CHECK(model.residual < 1.0);              // linearization error, measured not assumed
  CHECK(model.residual >= direct.residual);  // the model is an approximation
  CHECK(model.model_vs_direct > 0);
  CHECK(std::isfinite(model.linearization_sensitivity));
  CHECK(model.norm > 0);
}

TEST_CASE("fitted estimate constant bounds the two-term inequality per sample") {
  Lattice lat(2, 8);
  PeriodicField a = single_mode_a(lat, 0.3);
  Eigen::Vector2d e(1, 0);
  std::vector<double> rho{5, 10, 20};
  for (const PeriodicField* ap : {static_cast<const PeriodicField*>(nullptr),
                                  static_cast<const PeriodicField*>(&a)}) {
    EstimateScan scan = thomas_scan(ap, nullptr, e, 0.5, rho, lat);
    CHECK(scan.estimate_constant > 0);
    for (std::size_t i = 0; i < rho.size(); ++i) {
      Quasimomentum q(e, 0.5, rho[i]);
      AssembledOperator op = assemble(ap, nullptr, q, lat, false);
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        PeriodicField u = random_unit_field(lat, seed * 17 + i);
        Eigen::VectorXcd uh(lat.size());
        for (long long m = 0; m < lat.size(); ++m) uh(m) = u.coeff(0, m);
        const double lhs = (op.matrix * uh).norm();
        const double rhs =
            scan.estimate_constant * (rho[i] * l2_norm(u) + sobolev_norm(u, 1.0).value);
        CHECK(lhs >= rhs * (1.0 - 1e-10));
      }
    }
  }
}

TEST_CASE("the engine generalizes to three dimensions") {
  Lattice lat(3, 2);
  Eigen::Vector3d e(1, 0, 0);
  EstimateScan scan = thomas_scan(nullptr, nullptr, e, 0.5, {3.0, 6.0}, lat);
  for (double s : scan.sigma_h) CHECK(s > 0);
  CHECK(scan.sigma_h[0] >= 4 * kPi * kPi * 3.0 * (1 - 1e-12));

  ZeroSetSlab slab = zero_set(3.0, 0.5, e, lat, 1.0);
  DualCover cover = build_cover(3.0, 0.5, lat, slab);
  std::vector<int> fat_count(static_cast<std::size_t>(lat.size()), 0);
  for (const auto& patch : cover.patches)
    for (long long idx : patch.fat_modes) fat_count[static_cast<std::size_t>(idx)] += 1;
  for (int count : fat_count) CHECK(count <= 8);  // 2^3

  Quasimomentum q(e, 0.5, 3.0);
  AssembledOperator op = assemble(nullptr, nullptr, q, lat, true);
  std::vector<LocalInverse> locals;
  for (std::size_t p = 0; p < cover.patches.size(); ++p)
    locals.push_back(local_inverse(
        op, cover, static_cast<int>(p),
        cover.patches[p].near_zero_set ? LocalInverseMode::near_direct : LocalInverseMode::far));
  ParametrixReport report = assemble_parametrix(op, cover, locals);
  CHECK(report.t_norm <= 1e-8);  // diagonal operator: exact local inverses
}

TEST_CASE("parametrix reports are bit-identical for fixed inputs") {
  Lattice lat(2, 6);
  PeriodicField a = single_mode_a(lat, 0.25);
  Quasimomentum q = Quasimomentum::axis(2, 0.5, 8.0);
  auto run_once = [&] {
    AssembledOperator op = assemble(&a, nullptr, q, lat, true);
    ZeroSetSlab slab = zero_set(8.0, 0.5, q.direction(), lat, 1.0);
    DualCover cover = build_cover(8.0, 0.5, lat, slab);
    std::vector<LocalInverse> locals;
    for (std::size_t p = 0; p < cover.patches.size(); ++p)
      locals.push_back(local_inverse(
          op, cover, static_cast<int>(p),
          cover.patches[p].near_zero_set ? LocalInverseMode::near_direct : LocalInverseMode::far));
    return assemble_parametrix(op, cover, locals);
  };
  ParametrixReport first = run_once();
  ParametrixReport second = run_once();
  CHECK(first.t_norm == second.t_norm);
  CHECK(first.r_norm == second.r_norm);
  for (std::size_t i = 0; i < first.local_norms.size(); ++i) {
    CHECK(first.local_norms[i] == second.local_norms[i]);
    CHECK(first.local_residuals[i] == second.local_residuals[i]);
  }
}
