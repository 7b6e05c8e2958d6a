#include <chrono>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

namespace fs = std::filesystem;
using pulsestab::json;

int main(int argc, char** argv) {
  CLI::App app{"Spectral stability of viscous solitary waves"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  for (const std::string& name : pulsestab::cli::command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("-c,--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--out", out_dir, "output directory")->required();
  }
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  json manifest{{"command", command}, {"config_path", config_path}, {"version", PULSESTAB_VERSION}};
  const auto t0 = std::chrono::steady_clock::now();
  int code = 0;
  try {
    const json config = pulsestab::read_json(config_path);
    manifest["config"] = config;
    const auto res = pulsestab::cli::run_command(command, config, out_dir);
    manifest["summary"] = res.summary;
    manifest["outputs"] = res.outputs;
    std::cout << res.summary.dump(2) << '\n';
  } catch (const std::exception& e) {
    code = pulsestab::cli::exit_code_for(e);
    manifest["error"] = e.what();
    std::cerr << "error: " << e.what() << '\n';
  }
  manifest["exit_code"] = code;
  manifest["elapsed_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  try {
    fs::create_directories(out_dir);
    pulsestab::write_json(fs::path(out_dir) / "manifest.json", manifest);
  } catch (const std::exception& e) {
    std::cerr << "error: cannot write manifest: " << e.what() << '\n';
    if (code == 0) code = 2;
  }
  return code;
}
