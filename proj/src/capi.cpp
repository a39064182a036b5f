#include "blochlab.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "config.hpp"
#include "experiments.hpp"
#include "presets.hpp"

namespace {

using namespace blochlab;

thread_local std::string g_last_error;

bl_status code_of(errc c) {
  switch (c) {
    case errc::invalid_argument: return BL_ERR_INVALID_ARGUMENT;
    case errc::shape: return BL_ERR_SHAPE;
    case errc::domain: return BL_ERR_DOMAIN;
    case errc::budget: return BL_ERR_BUDGET;
    case errc::config: return BL_ERR_CONFIG;
    case errc::tolerance: return BL_ERR_TOLERANCE;
    case errc::classification: return BL_ERR_CLASSIFICATION;
    case errc::rank_deficient: return BL_ERR_RANK_DEFICIENT;
    case errc::integrity: return BL_ERR_INTEGRITY;
    case errc::io: return BL_ERR_IO;
    case errc::internal: return BL_ERR_INTERNAL;
  }
  return BL_ERR_INTERNAL;
}

template <typename Fn>
bl_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const Error& e) {
    g_last_error = e.what();
    return code_of(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return BL_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return BL_ERR_INTERNAL;
  }
}

bl_status invalid(const char* message) {
  g_last_error = message;
  return BL_ERR_INVALID_ARGUMENT;
}

}  // namespace

struct bl_lattice {
  blochlab::Lattice impl;
};

struct bl_field {
  blochlab::PeriodicField impl;
};

struct bl_run {
  std::string config_text;
  blochlab::RunOverrides overrides;
  blochlab::RunManifest manifest;
  std::string warnings_joined;
  bool executed = false;
};

extern "C" {

const char* bl_version(void) { return blochlab::kVersion; }

const char* bl_status_name(bl_status status) {
  switch (status) {
    case BL_OK: return "ok";
    case BL_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case BL_ERR_SHAPE: return "shape";
    case BL_ERR_DOMAIN: return "domain";
    case BL_ERR_BUDGET: return "budget";
    case BL_ERR_CONFIG: return "config";
    case BL_ERR_TOLERANCE: return "tolerance";
    case BL_ERR_CLASSIFICATION: return "classification";
    case BL_ERR_RANK_DEFICIENT: return "rank-deficient";
    case BL_ERR_INTEGRITY: return "integrity";
    case BL_ERR_IO: return "io";
    case BL_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* bl_last_error_message(void) { return g_last_error.c_str(); }

bl_status bl_lattice_create(int d, int N, bl_lattice** out) {
  if (out == nullptr) return invalid("bl_lattice_create: out is NULL");
  *out = nullptr;
  return guarded([&] {
    *out = new bl_lattice{blochlab::Lattice(d, N)};
    return BL_OK;
  });
}

void bl_lattice_destroy(bl_lattice* lattice) { delete lattice; }

int bl_lattice_dim(const bl_lattice* lattice) { return lattice ? lattice->impl.dim() : 0; }
int bl_lattice_cutoff(const bl_lattice* lattice) { return lattice ? lattice->impl.cutoff() : 0; }
int64_t bl_lattice_mode_count(const bl_lattice* lattice) { return lattice ? lattice->impl.size() : 0; }

bl_status bl_field_parse(const bl_lattice* lattice, const char* literal, bl_field** out) {
  if (lattice == nullptr || literal == nullptr || out == nullptr)
    return invalid("bl_field_parse: NULL argument");
  *out = nullptr;
  return guarded([&] {
    *out = new bl_field{blochlab::parse_field_literal(lattice->impl, literal)};
    return BL_OK;
  });
}

bl_status bl_field_preset(const bl_lattice* lattice, const char* name, const char* params_json, int rank,
                          uint64_t seed, bl_field** out) {
  if (lattice == nullptr || name == nullptr || out == nullptr) return invalid("bl_field_preset: NULL argument");
  if (rank != 0 && rank != 1) return invalid("bl_field_preset: rank must be 0 (scalar) or 1 (vector)");
  *out = nullptr;
  return guarded([&] {
    nlohmann::json params;
    if (params_json != nullptr && std::strlen(params_json) > 0) {
      params = nlohmann::json::parse(params_json, nullptr, false);
      if (params.is_discarded()) blochlab::fail(errc::config, "bl_field_preset: params_json is not valid JSON");
    }
    *out = new bl_field{blochlab::preset_field(
        name, params, lattice->impl, rank == 0 ? blochlab::FieldRank::scalar : blochlab::FieldRank::vector,
        seed)};
    return BL_OK;
  });
}

void bl_field_destroy(bl_field* field) { delete field; }

bl_status bl_field_sobolev_norm(const bl_field* field, double s, double* out) {
  if (field == nullptr || out == nullptr) return invalid("bl_field_sobolev_norm: NULL argument");
  return guarded([&] {
    *out = blochlab::sobolev_norm(field->impl, s).value;
    return BL_OK;
  });
}

bl_status bl_field_format(const bl_field* field, char** out) {
  if (field == nullptr || out == nullptr) return invalid("bl_field_format: NULL argument");
  *out = nullptr;
  return guarded([&] {
    const std::string text = blochlab::format_field_literal(field->impl);
    *out = new char[text.size() + 1];
    std::memcpy(*out, text.c_str(), text.size() + 1);
    return BL_OK;
  });
}

void bl_string_free(char* text) { delete[] text; }

bl_status bl_run_create(const char* config_json, bl_run** out) {
  if (config_json == nullptr || out == nullptr) return invalid("bl_run_create: NULL argument");
  *out = nullptr;
  return guarded([&] {
    auto run = std::make_unique<bl_run>();
    run->config_text = config_json;
    blochlab::parse_config(run->config_text);  // validate eagerly
    *out = run.release();
    return BL_OK;
  });
}

bl_status bl_run_create_from_file(const char* path, bl_run** out) {
  if (path == nullptr || out == nullptr) return invalid("bl_run_create_from_file: NULL argument");
  *out = nullptr;
  return guarded([&] {
    std::ifstream in(path, std::ios::binary);
    if (!in) blochlab::fail(errc::io, std::string("cannot open '") + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    auto run = std::make_unique<bl_run>();
    run->config_text = ss.str();
    blochlab::parse_config(run->config_text);
    *out = run.release();
    return BL_OK;
  });
}

bl_status bl_run_create_from_manifest(const char* path, bl_run** out) {
  if (path == nullptr || out == nullptr) return invalid("bl_run_create_from_manifest: NULL argument");
  *out = nullptr;
  return guarded([&] {
    std::ifstream in(path, std::ios::binary);
    if (!in) blochlab::fail(errc::io, std::string("cannot open '") + path + "'");
    nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.contains("config"))
      blochlab::fail(errc::config, "manifest: missing or invalid 'config' echo");
    auto run = std::make_unique<bl_run>();
    run->config_text = doc["config"].dump();
    blochlab::parse_config(run->config_text);
    *out = run.release();
    return BL_OK;
  });
}

void bl_run_destroy(bl_run* run) { delete run; }

bl_status bl_run_set_seed(bl_run* run, uint64_t seed) {
  if (run == nullptr) return invalid("bl_run_set_seed: run is NULL");
  run->overrides.seed = seed;
  return BL_OK;
}

bl_status bl_run_set_output_dir(bl_run* run, const char* dir) {
  if (run == nullptr || dir == nullptr) return invalid("bl_run_set_output_dir: NULL argument");
  run->overrides.out_dir = dir;
  return BL_OK;
}

bl_status bl_run_set_expected_kind(bl_run* run, const char* kind) {
  if (run == nullptr || kind == nullptr) return invalid("bl_run_set_expected_kind: NULL argument");
  run->overrides.expected_kind = kind;
  return BL_OK;
}

bl_status bl_run_execute(bl_run* run) {
  if (run == nullptr) return invalid("bl_run_execute: run is NULL");
  return guarded([&] {
    run->manifest = blochlab::run_config_text(run->config_text, run->overrides);
    run->warnings_joined.clear();
    for (std::size_t i = 0; i < run->manifest.warnings.size(); ++i) {
      if (i > 0) run->warnings_joined += '\n';
      run->warnings_joined += run->manifest.warnings[i];
    }
    run->executed = true;
    return BL_OK;
  });
}

const char* bl_run_manifest_path(const bl_run* run) {
  return run != nullptr && run->executed ? run->manifest.manifest_path.c_str() : "";
}

const char* bl_run_warnings(const bl_run* run) {
  return run != nullptr && run->executed ? run->warnings_joined.c_str() : "";
}

}  // extern "C"
