// lapleg run <scenario.json> [--out-dir DIR] [--tolerance-scale S] [--seed N]
//
// Exit status: 0 all checks pass, 1 a check failed, 2 configuration error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "lapleg/dolbeault.hpp"
#include "lapleg/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Laplace/Legendre scenario runner"};
  app.require_subcommand(1);
  auto* run = app.add_subcommand("run", "run one scenario file");
  std::string path, out_dir = ".";
  double scale = 1.0;
  std::uint64_t seed = 0;
  run->add_option("scenario", path, "scenario JSON file")->required();
  run->add_option("--out-dir", out_dir, "directory for report.txt, samples.csv, plot.svg");
  run->add_option("--tolerance-scale", scale, "multiplies every tolerance")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "seed for randomized property checks");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (!lapleg::orientation_self_test()) {
    std::cerr << "lapleg: area orientation self-test failed\n";
    return 2;
  }

  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "lapleg: cannot read " << path << "\n";
    return 2;
  }
  std::stringstream buf;
  buf << in.rdbuf();

  lapleg::Scenario s;
  try {
    s = lapleg::parse_scenario(buf.str());
  } catch (const lapleg::ScenarioError& e) {
    std::cerr << "lapleg: " << path << ": " << e.what() << "\n";
    return 2;
  }

  lapleg::RunOptions opt;
  opt.out_dir = out_dir;
  opt.tolerance_scale = scale;
  opt.seed = seed;
  opt.source = path;
  try {
    auto out = lapleg::run_scenario(s, opt);
    for (const auto& c : out.checks) std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << "\n";
    return out.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "lapleg: " << e.what() << "\n";
    return 2;
  }
}
