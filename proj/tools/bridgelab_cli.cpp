// bridgelab command line: runs experiment configs through the C library.
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "bridgelab/bridgelab.h"

int main(int argc, char** argv) {
  CLI::App app{"Entropic interpolation laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(bl_version()));

  std::string config;
  bool keep_going = false;
  int threads = 0;
  std::string out_dir;
  CLI::App* run = app.add_subcommand("run", "Run a JSON experiment config (or builtin:NAME)");
  run->add_option("config", config, "Path to the config file")->required();
  run->add_flag("--keep-going", keep_going, "Continue past failing cases (exit code stays 2)");
  run->add_option("--threads", threads, "Worker threads, 0 = one per core")
      ->check(CLI::NonNegativeNumber);
  run->add_option("--out-dir", out_dir, "Output directory, overriding the config");

  CLI::App* list = app.add_subcommand("list-builtins", "Print the names of the builtin configs");

  std::string name;
  CLI::App* show = app.add_subcommand("show-builtin", "Print a builtin config as JSON");
  show->add_option("name", name, "Builtin config name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Usage errors share the config-error exit code.
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  if (*run) {
    return bl_run_config(config.c_str(), keep_going ? 1 : 0, threads,
                         out_dir.empty() ? nullptr : out_dir.c_str());
  }
  if (*list) {
    for (size_t i = 0; i < bl_builtin_count(); ++i) std::printf("%s\n", bl_builtin_name(i));
    return 0;
  }
  if (*show) {
    const char* text = bl_builtin_json(name.c_str());
    if (!text) {
      std::fprintf(stderr, "ConfigError: %s\n", bl_last_error());
      return 1;
    }
    std::printf("%s\n", text);
    return 0;
  }
  return 1;
}
