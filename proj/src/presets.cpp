#include "presets.hpp"

#include <Eigen/Core>
#include <cmath>
#include <set>

namespace blochlab {

using nlohmann::json;

namespace {

void check_params(const json& params, const std::set<std::string>& known, const std::string& preset) {
  if (params.is_null()) return;
  if (!params.is_object()) fail(errc::config, "preset '" + preset + "': params must be an object");
  for (auto it = params.begin(); it != params.end(); ++it)
    if (!known.count(it.key()))
      fail(errc::config, "preset '" + preset + "': unknown parameter '" + it.key() + "'");
}

double number(const json& params, const char* key, double fallback) {
  if (params.is_object() && params.contains(key)) {
    if (!params[key].is_number()) fail(errc::config, std::string("preset parameter '") + key + "' must be a number");
    return params[key].get<double>();
  }
  return fallback;
}

// modes in the canonical positive half-box (first nonzero component positive)
bool positive_half(std::span<const int> m) {
  for (int x : m) {
    if (x > 0) return true;
    if (x < 0) return false;
  }
  return false;
}

PeriodicField cosine(const Lattice& lat, FieldRank rank, double amp, int axis) {
  if (axis < 0 || axis >= lat.dim()) fail(errc::config, "preset 'cos': axis out of range");
  PeriodicField f = rank == FieldRank::scalar ? PeriodicField::scalar(lat) : PeriodicField::vector_valued(lat);
  std::vector<int> m(static_cast<std::size_t>(lat.dim()), 0);
  const int comp = 0;
  m[static_cast<std::size_t>(axis)] = 1;
  f.set_coeff_at(comp, m, cplx(amp / 2, 0));
  m[static_cast<std::size_t>(axis)] = -1;
  f.set_coeff_at(comp, m, cplx(amp / 2, 0));
  f.set_real_flagged(true);
  f.set_mean_zero_flagged(true);
  return f;
}

PeriodicField gauss_decay(const Lattice& lat, FieldRank rank, double w, double amp, std::uint64_t seed) {
  if (!(w > 0)) fail(errc::config, "preset 'gauss-decay': w must be positive");
  PeriodicField f = rank == FieldRank::scalar ? PeriodicField::scalar(lat) : PeriodicField::vector_valued(lat);
  Rng rng(seed);
  const int d = lat.dim();
  std::vector<int> m(static_cast<std::size_t>(d)), neg(static_cast<std::size_t>(d));
  for (long long i = 0; i < lat.size(); ++i) {
    lat.mode_of(i, m);
    if (!positive_half(m)) continue;
    for (int j = 0; j < d; ++j) neg[static_cast<std::size_t>(j)] = -m[static_cast<std::size_t>(j)];
    const long long ni = lat.index_of(neg);
    const double decay = amp * std::exp(-lat.mode_norm_sq(i) / w);
    for (int c = 0; c < f.components(); ++c) {
      const cplx z = decay * rng.gaussian_complex();
      f.set_coeff(c, i, z);
      f.set_coeff(c, ni, std::conj(z));
    }
  }
  f.set_real_flagged(true);
  f.set_mean_zero_flagged(true);
  return f;
}

PeriodicField single_mode_a(const Lattice& lat, const json& params, double amp) {
  const int d = lat.dim();
  std::vector<int> freq(static_cast<std::size_t>(d), 0);
  freq[0] = 1;
  if (params.is_object() && params.contains("freq")) {
    const auto& fr = params["freq"];
    if (!fr.is_array() || static_cast<int>(fr.size()) != d)
      fail(errc::config, "preset 'single-mode-A': freq must be an integer d-vector");
    for (int j = 0; j < d; ++j) freq[static_cast<std::size_t>(j)] = fr[static_cast<std::size_t>(j)].get<int>();
  }
  bool all_zero = true;
  for (int x : freq) all_zero = all_zero && x == 0;
  if (all_zero) fail(errc::config, "preset 'single-mode-A': freq must be nonzero");
  if (!lat.contains(freq)) fail(errc::config, "preset 'single-mode-A': freq outside the lattice");

  Eigen::VectorXd pol = Eigen::VectorXd::Zero(d);
  if (params.is_object() && params.contains("polarization")) {
    const auto& pl = params["polarization"];
    if (!pl.is_array() || static_cast<int>(pl.size()) != d)
      fail(errc::config, "preset 'single-mode-A': polarization must be a d-vector");
    for (int j = 0; j < d; ++j) pol(j) = pl[static_cast<std::size_t>(j)].get<double>();
    if (pol.norm() == 0) fail(errc::config, "preset 'single-mode-A': polarization must be nonzero");
    pol.normalize();
  } else if (d >= 2) {
    // default transverse polarization (-q2, q1, 0, ...)
    pol(0) = -static_cast<double>(freq[1]);
    pol(1) = static_cast<double>(freq[0]);
    if (pol.norm() == 0) pol(1) = 1.0;
    pol.normalize();
  } else {
    pol(0) = 1.0;
  }

  PeriodicField f = PeriodicField::vector_valued(lat);
  std::vector<int> neg(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) neg[static_cast<std::size_t>(j)] = -freq[static_cast<std::size_t>(j)];
  for (int j = 0; j < d; ++j) {
    f.set_coeff_at(j, freq, cplx(amp / 2 * pol(j), 0));
    f.set_coeff_at(j, neg, cplx(amp / 2 * pol(j), 0));
  }
  f.set_real_flagged(true);
  f.set_mean_zero_flagged(true);
  return f;
}

}  // namespace

PeriodicField preset_field(const std::string& name, const json& params, const Lattice& lattice, FieldRank rank,
                           std::uint64_t seed) {
  if (rank == FieldRank::matrix) fail(errc::config, "presets produce scalar or vector fields");
  if (name == "zero") {
    check_params(params, {}, name);
    PeriodicField f = rank == FieldRank::scalar ? PeriodicField::scalar(lattice)
                                                : PeriodicField::vector_valued(lattice);
    f.set_real_flagged(true);
    f.set_mean_zero_flagged(true);
    return f;
  }
  if (name == "cos") {
    check_params(params, {"amp", "axis"}, name);
    return cosine(lattice, rank, number(params, "amp", 1.0), static_cast<int>(number(params, "axis", 0)));
  }
  if (name == "mathieu") {
    check_params(params, {"c"}, name);
    if (rank != FieldRank::scalar) fail(errc::config, "preset 'mathieu' is a scalar potential");
    return cosine(lattice, FieldRank::scalar, 2.0 * number(params, "c", 1.0), 0);
  }
  if (name == "gauss-decay") {
    check_params(params, {"w", "amp"}, name);
    return gauss_decay(lattice, rank, number(params, "w", 2.0), number(params, "amp", 1.0), seed);
  }
  if (name == "single-mode-A") {
    check_params(params, {"amp", "freq", "polarization"}, name);
    if (rank != FieldRank::vector) fail(errc::config, "preset 'single-mode-A' is a vector potential");
    return single_mode_a(lattice, params, number(params, "amp", 0.3));
  }
  fail(errc::config, "unknown preset '" + name + "'");
}

}  // namespace blochlab
