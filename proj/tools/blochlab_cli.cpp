// blochlab command-line runner: parses arguments, hands the configuration to
// the shared library through the C API, and maps statuses to exit codes
// (0 success including obstructed/diverged verdicts, 2 config error,
// 3 tolerance failure, 4 resource budget, 1 anything else).

#include <blochlab.h>

#include <CLI11.hpp>
#include <cstdio>
#include <memory>
#include <string>

namespace {

int exit_code(bl_status status) {
  switch (status) {
    case BL_OK: return 0;
    case BL_ERR_CONFIG:
    case BL_ERR_INVALID_ARGUMENT:
    case BL_ERR_IO: return 2;
    case BL_ERR_TOLERANCE: return 3;
    case BL_ERR_BUDGET: return 4;
    default: return 1;
  }
}

struct SubArgs {
  std::string config;
  std::string manifest;
  std::string out_dir;
  std::int64_t seed = -1;
  bool seed_set = false;
};

int run_kind(const char* kind, const SubArgs& args) {
  bl_run* run = nullptr;
  bl_status status = BL_OK;
  if (!args.manifest.empty()) {
    status = bl_run_create_from_manifest(args.manifest.c_str(), &run);
  } else {
    status = bl_run_create_from_file(args.config.c_str(), &run);
  }
  if (status != BL_OK) {
    std::fprintf(stderr, "blochlab: %s (%s)\n", bl_last_error_message(), bl_status_name(status));
    return exit_code(status);
  }
  std::unique_ptr<bl_run, decltype(&bl_run_destroy)> guard(run, &bl_run_destroy);

  bl_run_set_expected_kind(run, kind);
  if (args.seed_set) bl_run_set_seed(run, static_cast<uint64_t>(args.seed));
  if (!args.out_dir.empty()) bl_run_set_output_dir(run, args.out_dir.c_str());

  status = bl_run_execute(run);
  if (status != BL_OK) {
    std::fprintf(stderr, "blochlab: %s (%s)\n", bl_last_error_message(), bl_status_name(status));
    return exit_code(status);
  }
  const char* warnings = bl_run_warnings(run);
  if (warnings[0] != '\0') std::fprintf(stderr, "warning: %s\n", warnings);
  std::printf("%s\n", bl_run_manifest_path(run));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"blochlab: periodic magnetic Schrödinger operator numerics"};
  app.set_version_flag("--version", bl_version());
  app.require_subcommand(1);

  const char* kinds[] = {"bands", "thomas", "cover", "gauge", "matrix-gauge"};
  const char* blurbs[] = {
      "Bloch band table over the Brillouin zone + flat-band report",
      "sigma_min scan over the complex quasimomentum family",
      "dual-space cover, local inverses and parametrix residuals",
      "scalar d-bar gauge transform (with optional tail split / plane search)",
      "experimental matrix d-bar gauge iteration",
  };

  SubArgs args[5];
  for (int i = 0; i < 5; ++i) {
    CLI::App* sub = app.add_subcommand(kinds[i], blurbs[i]);
    auto* config_opt =
        sub->add_option("--config", args[i].config, "experiment configuration (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--manifest", args[i].manifest, "re-run the config echoed in an emitted manifest")
        ->check(CLI::ExistingFile)
        ->excludes(config_opt);
    sub->add_option("--out", args[i].out_dir, "output directory (overrides the config)");
    sub->add_option("--seed", args[i].seed, "seed override")->each([&, i](const std::string&) {
      args[i].seed_set = true;
    });
  }

  CLI11_PARSE(app, argc, argv);

  for (int i = 0; i < 5; ++i) {
    if (app.get_subcommand(static_cast<std::size_t>(i))->parsed()) {
      if (args[i].config.empty() && args[i].manifest.empty()) {
        std::fprintf(stderr, "blochlab %s: one of --config or --manifest is required\n", kinds[i]);
        return 2;
      }
      return run_kind(kinds[i], args[i]);
    }
  }
  return 2;
}
