// Command-line front end; talks to the engine only through the C API.
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "CLI11.hpp"
#include "nonholo.h"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

int report_error(nh_status st) {
  std::fprintf(stderr, "nonholo: %s\n", nh_last_error());
  (void)st;
  return kExitUsage;
}

// NONHOLO_TOL_SCALE, default 1; false when set but not a positive number.
bool tolerance_scale(double& out) {
  out = 1.0;
  const char* env = std::getenv("NONHOLO_TOL_SCALE");
  if (!env || !*env) return true;
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(env, &end);
  if (errno != 0 || *end != '\0' || !(v > 0.0) || !std::isfinite(v)) {
    std::fprintf(stderr, "nonholo: NONHOLO_TOL_SCALE must be a positive number, got \"%s\"\n", env);
    return false;
  }
  out = v;
  return true;
}

struct RunArgs {
  std::string scenario;
  std::string suite = "all";
  std::uint64_t seed = 0;
  int points = 100;
  std::string format = "json";
  std::string out = "-";
};

void add_common(CLI::App* cmd, RunArgs& a, int default_points) {
  a.points = default_points;
  cmd->add_option("--scenario", a.scenario, "catalog name or scenario file")->required();
  cmd->add_option("--seed", a.seed, "sampler seed")->capture_default_str();
  cmd->add_option("--points", a.points, "sample points per check (1..200)")
      ->check(CLI::Range(1, 200))
      ->capture_default_str();
  cmd->add_option("--format", a.format, "report format")->check(CLI::IsMember({"json", "text"}))->capture_default_str();
  cmd->add_option("--out", a.out, "output path, - for stdout")->capture_default_str();
}

int execute(const RunArgs& a, bool cross) {
  double scale = 1.0;
  if (!tolerance_scale(scale)) return kExitUsage;
  nh_scenario* s = nullptr;
  if (nh_status st = nh_scenario_load(a.scenario.c_str(), &s); st != NH_OK) return report_error(st);
  nh_report* r = nullptr;
  nh_status st = cross ? nh_crosscheck(s, a.seed, a.points, scale, &r)
                       : nh_suite_run(s, a.suite.c_str(), a.seed, a.points, scale, &r);
  nh_scenario_free(s);
  if (st != NH_OK) return report_error(st);
  st = nh_report_write(r, a.format.c_str(), a.out.c_str());
  const int passed = nh_report_all_passed(r);
  nh_report_free(r);
  if (st != NH_OK) return report_error(st);
  return passed ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonholonomic geometry engine: computes the frame, connection, conformal, spinor and twistor "
               "objects of a scenario and checks their identities numerically."};
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "run a check suite on a scenario");
  add_common(run, run_args, 100);
  run->add_option("--suite", run_args.suite, "check suite")
      ->check(CLI::IsMember({"frames", "connections", "conformal", "spin", "twistor", "all"}))
      ->capture_default_str();

  app.add_subcommand("list", "list the built-in scenario catalog");

  RunArgs cross_args;
  CLI::App* cross = app.add_subcommand("crosscheck", "compare expression jets with finite differences");
  add_common(cross, cross_args, 20);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  if (app.got_subcommand("list")) {
    char* names = nullptr;
    if (nh_status st = nh_catalog_names(&names); st != NH_OK) return report_error(st);
    std::printf("%s\n", names);
    nh_string_free(names);
    return kExitPass;
  }
  if (app.got_subcommand("crosscheck")) return execute(cross_args, true);
  return execute(run_args, false);
}
