#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "presets.hpp"

namespace blochlab {

using nlohmann::json;

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::bands: return "bands";
    case ExperimentKind::thomas: return "thomas";
    case ExperimentKind::cover: return "cover";
    case ExperimentKind::gauge: return "gauge";
    case ExperimentKind::matrix_gauge: return "matrix-gauge";
  }
  return "?";
}

namespace {

// Object view that tracks which keys are consumed; leftover keys are config
// errors naming the full path.
class Strict {
 public:
  Strict(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(errc::config, "config: '" + path_ + "' must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  template <typename T>
  T require(const std::string& key) {
    if (!has(key)) fail(errc::config, "config: missing required key '" + join(key) + "'");
    return convert<T>(raw(key), key);
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return convert<T>(raw(key), key);
  }

  Strict child(const std::string& key) { return Strict(raw(key), join(key)); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(errc::config, "config: unknown key '" + join(it.key()) + "'");
  }

  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  template <typename T>
  T convert(const json& v, const std::string& key) {
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      fail(errc::config, "config: key '" + join(key) + "' has the wrong type");
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

FieldSource parse_field_source(Strict& parent, const std::string& key) {
  FieldSource source;
  if (!parent.has(key)) return source;
  Strict obj = parent.child(key);
  int kinds = 0;
  if (obj.has("preset")) {
    source.kind = FieldSource::Kind::preset;
    source.preset = obj.require<std::string>("preset");
    if (obj.has("params")) source.params = obj.raw("params");
    ++kinds;
  }
  if (obj.has("literal")) {
    source.kind = FieldSource::Kind::literal;
    source.literal = obj.require<std::string>("literal");
    ++kinds;
  }
  if (obj.has("file")) {
    source.kind = FieldSource::Kind::file;
    source.path = obj.require<std::string>("file");
    ++kinds;
  }
  if (kinds > 1) fail(errc::config, "config: '" + obj.join("") + "' must use one of preset|literal|file");
  if (obj.has("smoothness")) source.smoothness = obj.require<double>("smoothness");
  obj.finish();
  return source;
}

json field_source_echo(const FieldSource& s) {
  json j = json::object();
  switch (s.kind) {
    case FieldSource::Kind::zero: j["preset"] = "zero"; break;
    case FieldSource::Kind::preset:
      j["preset"] = s.preset;
      if (!s.params.is_null()) j["params"] = s.params;
      break;
    case FieldSource::Kind::literal: j["literal"] = s.literal; break;
    case FieldSource::Kind::file: j["file"] = s.path; break;
  }
  if (s.smoothness) j["smoothness"] = *s.smoothness;
  return j;
}

}  // namespace

ParsedConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(errc::config, std::string("config: invalid JSON: ") + e.what());
  }

  ParsedConfig out;
  ExperimentConfig& c = out.config;
  Strict root(doc, "");

  const std::string kind = root.require<std::string>("experiment");
  if (kind == "bands") c.kind = ExperimentKind::bands;
  else if (kind == "thomas") c.kind = ExperimentKind::thomas;
  else if (kind == "cover") c.kind = ExperimentKind::cover;
  else if (kind == "gauge") c.kind = ExperimentKind::gauge;
  else if (kind == "matrix-gauge") c.kind = ExperimentKind::matrix_gauge;
  else fail(errc::config, "config: unknown experiment kind '" + kind + "'");

  {
    Strict lat = root.child("lattice");
    c.dim = lat.require<int>("d");
    c.cutoff = lat.require<int>("N");
    lat.finish();
    if (c.dim < 1) fail(errc::config, "config: lattice.d must be >= 1");
    if (c.cutoff < 1) fail(errc::config, "config: lattice.N must be >= 1");
  }

  c.potential = parse_field_source(root, "potential");
  c.vector_potential = parse_field_source(root, "vector_potential");
  c.gauge_input = parse_field_source(root, "gauge_input");

  c.direction = Eigen::VectorXd::Zero(c.dim);
  c.direction(0) = 1.0;
  if (root.has("quasimomentum")) {
    Strict q = root.child("quasimomentum");
    if (q.has("e")) {
      auto e = q.require<std::vector<double>>("e");
      if (static_cast<int>(e.size()) != c.dim)
        fail(errc::config, "config: quasimomentum.e must have d components");
      for (int j = 0; j < c.dim; ++j) c.direction(j) = e[static_cast<std::size_t>(j)];
      if (std::abs(c.direction.norm() - 1.0) > 1e-12)
        fail(errc::config, "config: quasimomentum.e must be a unit vector");
    }
    c.beta = q.get<double>("beta", c.beta);
    if (q.has("rho")) {
      c.rho = q.require<std::vector<double>>("rho");
      for (double r : c.rho)
        if (!(r > 0)) fail(errc::config, "config: quasimomentum.rho entries must be positive");
    }
    q.finish();
  }

  if (root.has("k_grid")) {
    Strict g = root.child("k_grid");
    c.grid_points = g.require<int>("points_per_axis");
    if (c.grid_points < 2) fail(errc::config, "config: k_grid.points_per_axis must be >= 2");
    g.finish();
  }
  c.band_count = root.get<int>("bands", c.band_count);
  c.flat_tol = root.get<double>("flat_band_tolerance", c.flat_tol);

  if (root.has("cover")) {
    Strict cov = root.child("cover");
    c.delta = cov.get<double>("delta", c.delta);
    c.thickness = cov.get<double>("thickness", c.thickness);
    c.neumann_order = cov.get<int>("neumann_order", c.neumann_order);
    c.near_mode = cov.get<std::string>("near_mode", c.near_mode);
    cov.finish();
    if (!(c.delta > 0 && c.delta < 1)) fail(errc::config, "config: cover.delta must lie in (0,1)");
    if (c.thickness < 0) fail(errc::config, "config: cover.thickness must be >= 0");
    if (c.near_mode != "direct" && c.near_mode != "model")
      fail(errc::config, "config: cover.near_mode must be 'direct' or 'model'");
  }
  c.sigma_floor = root.get<double>("sigma_floor", c.sigma_floor);
  c.dump_operator = root.get<bool>("dump_operator", c.dump_operator);

  if (root.has("gauge")) {
    Strict g = root.child("gauge");
    c.gauge_tol = g.get<double>("tol", c.gauge_tol);
    c.split_modes = g.get<int>("split_modes", c.split_modes);
    c.plane_bound = g.get<int>("plane_bound", c.plane_bound);
    c.matrix_dim = g.get<int>("matrix_dim", c.matrix_dim);
    c.max_iterations = g.get<int>("max_iterations", c.max_iterations);
    c.damping = g.get<double>("damping", c.damping);
    g.finish();
    if (c.split_modes < 0) fail(errc::config, "config: gauge.split_modes must be >= 0");
    if (c.matrix_dim < 1) fail(errc::config, "config: gauge.matrix_dim must be >= 1");
  }

  c.seed = root.get<std::uint64_t>("seed", c.seed);
  if (root.has("output")) {
    Strict o = root.child("output");
    c.out_dir = o.get<std::string>("dir", c.out_dir);
    o.finish();
  }
  root.finish();

  // Theorem-style smoothness check: the scan hypotheses need s > 3d/2 - 1
  const double threshold = 1.5 * c.dim - 1.0;
  if (c.vector_potential.smoothness && *c.vector_potential.smoothness <= threshold) {
    std::ostringstream w;
    w << "vector potential declared smoothness s=" << *c.vector_potential.smoothness
      << " does not exceed 3d/2-1 = " << threshold << "; the lower-bound estimate may degrade";
    out.warnings.push_back(w.str());
  }
  return out;
}

json config_echo(const ExperimentConfig& c) {
  json j;
  j["experiment"] = to_string(c.kind);
  j["lattice"] = {{"d", c.dim}, {"N", c.cutoff}};
  j["potential"] = field_source_echo(c.potential);
  j["vector_potential"] = field_source_echo(c.vector_potential);
  j["gauge_input"] = field_source_echo(c.gauge_input);
  json q;
  q["e"] = std::vector<double>(c.direction.data(), c.direction.data() + c.direction.size());
  q["beta"] = c.beta;
  q["rho"] = c.rho;
  j["quasimomentum"] = q;
  j["k_grid"] = {{"points_per_axis", c.grid_points}};
  j["bands"] = c.band_count;
  j["flat_band_tolerance"] = c.flat_tol;
  j["cover"] = {{"delta", c.delta},
                {"thickness", c.thickness},
                {"neumann_order", c.neumann_order},
                {"near_mode", c.near_mode}};
  j["sigma_floor"] = c.sigma_floor;
  j["dump_operator"] = c.dump_operator;
  j["gauge"] = {{"tol", c.gauge_tol},        {"split_modes", c.split_modes},
                {"plane_bound", c.plane_bound}, {"matrix_dim", c.matrix_dim},
                {"max_iterations", c.max_iterations}, {"damping", c.damping}};
  j["seed"] = c.seed;
  j["output"] = {{"dir", c.out_dir}};
  return j;
}

PeriodicField realize_field(const FieldSource& source, const Lattice& lattice, FieldRank rank,
                            std::uint64_t seed) {
  PeriodicField f = [&] {
    switch (source.kind) {
      case FieldSource::Kind::zero:
        return preset_field("zero", json(), lattice, rank, seed);
      case FieldSource::Kind::preset:
        return preset_field(source.preset, source.params, lattice, rank, seed);
      case FieldSource::Kind::literal:
        return parse_field_literal(lattice, source.literal);
      case FieldSource::Kind::file: {
        std::ifstream in(source.path);
        if (!in) fail(errc::io, "cannot open field file '" + source.path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse_field_literal(lattice, ss.str());
      }
    }
    fail(errc::internal, "unreachable");
  }();
  if (f.rank() != rank)
    fail(errc::config, "field source produced rank " + to_string(f.rank()) + ", expected " + to_string(rank));
  if (source.smoothness) f.set_smoothness(source.smoothness);
  return f;
}

}  // namespace blochlab
