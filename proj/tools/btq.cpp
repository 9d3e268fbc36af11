#include <iostream>

#include <CLI11.hpp>

#include "btq/experiment.hpp"
#include "btq/symbol.hpp"

namespace {
constexpr const char* kVersion = "0.1.0";
}

int main(int argc, char** argv) {
  CLI::App app{"Berezin-Toeplitz quantization laboratory on CP^1"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config_path, "key = value configuration file")->required();

  std::string suite_name;
  std::string out_dir = "btq-out";
  auto* suite = app.add_subcommand("suite", "Run a named suite (smoke, paper-full)");
  suite->add_option("name", suite_name, "Suite name")->required();
  suite->add_option("--out", out_dir, "Output directory");

  auto* list = app.add_subcommand("list-symbols", "Print the symbol catalog");
  auto* version = app.add_subcommand("version", "Print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : btq::kExitConfig;
  }

  if (*run) return btq::run_file(config_path, std::cerr);
  if (*suite) return btq::run_suite(suite_name, out_dir, std::cerr);
  if (*list) {
    for (const auto& name : btq::catalog_names()) {
      const btq::Symbol s = btq::builtin_symbol(name);
      std::cout << name << '\t' << btq::to_string(s.regularity) << '\n';
    }
    return 0;
  }
  if (*version) {
    std::cout << "btq " << kVersion << '\n';
    return 0;
  }
  return btq::kExitConfig;
}
