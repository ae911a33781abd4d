// Copyright 2026 The benderskit Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "benderskit/adaptive_benders.hpp"
#include "benderskit/instance_io.hpp"
#include "benderskit/power_system.hpp"
#include "benderskit/trace.hpp"
#include "json.hpp"

namespace bk = benderskit;
namespace pw = benderskit::power;
namespace fs = std::filesystem;

namespace {

// Exit codes: 0 success, 2 bad usage/config, 3 parse failure, 4 solver or
// engine failure, 5 verification failure.
constexpr int kExitUsage = 2;
constexpr int kExitParse = 3;
constexpr int kExitSolver = 4;
constexpr int kExitVerify = 5;

struct CommonOptions {
  std::string instance;
  std::string out_dir = "out";
  std::string algorithm = "stabilised";
  std::vector<double> eps = {0.1};
  double gamma = 0.2;
  bool dynamic_gamma = false;
  double omega = 0.5;
  double p_low = 0.1;
  double p_high = 0.9;
  unsigned seed = 1;
  int threads = 1;
  int iteration_limit = 5000;
};

void add_engine_flags(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--eps", opt.eps,
                  "convergence tolerance(s), percent of the upper bound");
  cmd->add_option("--gamma", opt.gamma, "stabilisation factor (fixed or initial)");
  cmd->add_flag("--dynamic-gamma", opt.dynamic_gamma,
                "adjust gamma from the achieved/predicted improvement ratio");
  cmd->add_option("--omega", opt.omega, "dynamic update strength in (0,1)");
  cmd->add_option("--p-low", opt.p_low, "ratio threshold that tightens the level");
  cmd->add_option("--p-high", opt.p_high, "ratio threshold that relaxes the level");
  cmd->add_option("--seed", opt.seed, "seed for synthetic instance generation");
  cmd->add_option("--threads", opt.threads, "worker threads for subproblem sweeps");
  cmd->add_option("--iteration-limit", opt.iteration_limit, "outer iteration cap");
  cmd->add_option("--out", opt.out_dir, "output directory");
}

bk::RunResult run_engine(const std::string& algorithm,
                         const bk::StructuredProblem& problem, double eps,
                         const CommonOptions& opt, const bk::LpBackend& backend) {
  if (algorithm == "standard") {
    bk::StandardOptions so;
    so.eps_percent = eps;
    so.iteration_limit = opt.iteration_limit;
    so.threads = opt.threads;
    return bk::run_standard(problem, so, backend);
  }
  bk::EngineConfig cfg;
  cfg.eps_percent = eps;
  cfg.iteration_limit = opt.iteration_limit;
  cfg.threads = opt.threads;
  if (algorithm == "stabilised") {
    cfg.stabilisation = bk::StabilisationConfig{};
    cfg.stabilisation->gamma0 = opt.gamma;
    cfg.stabilisation->dynamic = opt.dynamic_gamma;
    cfg.stabilisation->omega = opt.omega;
    cfg.stabilisation->p_low = opt.p_low;
    cfg.stabilisation->p_high = opt.p_high;
  } else if (algorithm != "adaptive") {
    throw bk::EngineError("unknown algorithm: " + algorithm +
                          " (expected standard|adaptive|stabilised)");
  }
  return bk::run_adaptive(problem, cfg, backend);
}

std::string run_dir_name(const std::string& algorithm, double eps) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_eps%g", algorithm.c_str(), eps);
  return buf;
}

int write_run_artifacts(const bk::RunResult& result, double eps,
                        const std::string& dir) {
  fs::create_directories(dir);
  bk::write_trace_csv(result, (fs::path(dir) / "trace.csv").string());
  bk::write_summary_json(result, eps, (fs::path(dir) / "summary.json").string());
  return 0;
}

int cmd_solve(const CommonOptions& opt) {
  pw::InstanceData data = pw::load_instance(opt.instance);
  pw::BuiltModel built = pw::build(data);
  auto backend = bk::make_backend();
  for (const auto& warning : built.warnings) {
    std::cerr << "warning: " << warning << "\n";
  }
  int rc = 0;
  for (double eps : opt.eps) {
    bk::RunResult result =
        run_engine(opt.algorithm, built.problem, eps, opt, *backend);
    const std::string dir =
        (fs::path(opt.out_dir) / run_dir_name(opt.algorithm, eps)).string();
    write_run_artifacts(result, eps, dir);
    std::printf("%-10s eps=%.4g%%  %s  iters=%d evals=%ld  L=%.8e U=%.8e  "
                "gap=%.3e  time=%.2fs\n",
                result.engine.c_str(), eps, to_string(result.status),
                result.iterations, result.exact_evaluations,
                result.lower_bound, result.upper_bound, result.final_gap(),
                result.time_total_s);
    if (!result.converged()) {
      rc = kExitSolver;
      if (!result.failure_detail.empty()) {
        std::cerr << "failure: " << result.failure_detail << "\n";
      }
    }
  }
  return rc;
}

int cmd_compare(const CommonOptions& opt, const std::vector<std::string>& engines) {
  if (engines.size() < 2) {
    std::cerr << "compare needs at least two engines\n";
    return kExitUsage;
  }
  pw::InstanceData data = pw::load_instance(opt.instance);
  pw::BuiltModel built = pw::build(data);
  auto backend = bk::make_backend();
  fs::create_directories(opt.out_dir);
  std::ofstream table((fs::path(opt.out_dir) / "compare.csv").string());
  table << "engine,eps_percent,status,iters,evals,time_s,speedup_vs_standard\n";
  for (double eps : opt.eps) {
    double standard_time = -1.0;
    for (const auto& engine : engines) {
      bk::RunResult result;
      std::string status;
      try {
        result = run_engine(engine, built.problem, eps, opt, *backend);
        status = to_string(result.status);
      } catch (const std::exception& e) {
        status = std::string("error: ") + e.what();
      }
      const std::string dir =
          (fs::path(opt.out_dir) / run_dir_name(engine, eps)).string();
      write_run_artifacts(result, eps, dir);
      if (engine == "standard" && result.converged()) {
        standard_time = result.time_total_s;
      }
      const double speedup = (standard_time > 0 && result.converged())
                                 ? standard_time / result.time_total_s
                                 : std::numeric_limits<double>::quiet_NaN();
      table << engine << ',' << eps << ',' << status << ','
            << result.iterations << ',' << result.exact_evaluations << ','
            << result.time_total_s << ',' << speedup << '\n';
      std::printf("%-10s eps=%.4g%%  %s  iters=%d evals=%ld time=%.2fs\n",
                  engine.c_str(), eps, status.c_str(), result.iterations,
                  result.exact_evaluations, result.time_total_s);
    }
  }
  return 0;
}

int cmd_vss(const CommonOptions& opt) {
  pw::InstanceData data = pw::load_instance(opt.instance);
  auto backend = bk::make_backend();
  pw::VssOptions vopt;
  vopt.threads = opt.threads;
  pw::VssReport report = pw::compute_vss(data, *backend, vopt);
  nlohmann::json doc;
  doc["stochastic_optimum"] = report.stochastic_optimum;
  doc["eev_cost"] = report.eev_cost;
  doc["vss"] = report.vss;
  doc["vss_percent_of_optimum"] = report.percent_of_optimum;
  doc["deterministic_tree"] = report.deterministic;
  fs::create_directories(opt.out_dir);
  std::ofstream os((fs::path(opt.out_dir) / "vss.json").string());
  os << doc.dump(2) << "\n";
  std::printf("stochastic optimum  %.8e\n", report.stochastic_optimum);
  std::printf("EV-policy cost      %.8e\n", report.eev_cost);
  std::printf("VSS                 %.8e (%.3f%% of optimum)\n", report.vss,
              report.percent_of_optimum);
  return 0;
}

int cmd_generate(const std::string& which, const CommonOptions& opt,
                 const pw::SyntheticSpec& spec) {
  pw::InstanceData data;
  if (which == "case_a") {
    data = pw::make_toy_case(pw::ToyCase::A);
  } else if (which == "case_b") {
    data = pw::make_toy_case(pw::ToyCase::B);
  } else if (which == "case_c") {
    data = pw::make_toy_case(pw::ToyCase::C);
  } else if (which == "synthetic_tree") {
    pw::SyntheticSpec s = spec;
    s.seed = opt.seed;
    data = pw::make_synthetic(s);
  } else {
    std::cerr << "unknown case: " << which << "\n";
    return kExitUsage;
  }
  const std::string path = pw::save_instance(data, opt.out_dir);
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

int cmd_verify(const std::vector<std::string>& dirs) {
  bool all_ok = true;
  for (const auto& dir : dirs) {
    bk::VerifyReport rep = bk::verify_run_directory(dir);
    if (rep.ok) {
      std::printf("[OK]   %s\n", dir.c_str());
    } else {
      all_ok = false;
      std::printf("[FAIL] %s\n", dir.c_str());
      for (const auto& issue : rep.issues) {
        std::printf("       %s\n", issue.c_str());
      }
    }
  }
  return all_ok ? 0 : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benders decomposition toolkit: standard, adaptive-oracle and "
               "level-set stabilised engines over multi-horizon power-system "
               "investment instances"};
  app.require_subcommand(1);

  CommonOptions opt;
  std::vector<std::string> engines = {"standard", "adaptive", "stabilised"};
  std::string gen_case;
  std::vector<std::string> verify_dirs;
  pw::SyntheticSpec spec;

  CLI::App* solve = app.add_subcommand("solve", "run one engine on an instance");
  solve->add_option("--instance", opt.instance, "instance JSON path")->required();
  solve->add_option("--algorithm", opt.algorithm,
                    "standard | adaptive | stabilised");
  add_engine_flags(solve, opt);

  CLI::App* compare =
      app.add_subcommand("compare", "run several engines and tabulate");
  compare->add_option("--instance", opt.instance, "instance JSON path")->required();
  compare->add_option("--engines", engines, "engines to run");
  add_engine_flags(compare, opt);

  CLI::App* vss = app.add_subcommand("vss", "value of the stochastic solution");
  vss->add_option("--instance", opt.instance, "instance JSON path")->required();
  vss->add_option("--threads", opt.threads, "worker threads");
  vss->add_option("--out", opt.out_dir, "output directory");

  CLI::App* generate = app.add_subcommand("generate", "write an instance file");
  generate->add_option("case", gen_case,
                       "case_a | case_b | case_c | synthetic_tree")->required();
  generate->add_option("--stages", spec.stages, "tree stages");
  generate->add_option("--outcomes", spec.outcomes_per_uncertainty,
                       "outcomes per uncertainty per stage");
  generate->add_option("--uncertainties", spec.uncertainties,
                       "number of long-term uncertainties (0-3)");
  generate->add_option("--periods", spec.periods, "operational periods");
  generate->add_option("--regions", spec.regions, "regions (1-3)");
  generate->add_flag("--storage", spec.with_storage, "include storage units");
  generate->add_flag("--renewables", spec.with_renewable, "include renewables");
  generate->add_option("--seed", opt.seed, "generation seed");
  generate->add_option("--out", opt.out_dir, "output directory");

  CLI::App* verify =
      app.add_subcommand("verify", "audit run directories (trace + summary)");
  verify->add_option("dirs", verify_dirs, "run directories")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(opt);
    if (compare->parsed()) return cmd_compare(opt, engines);
    if (vss->parsed()) return cmd_vss(opt);
    if (generate->parsed()) return cmd_generate(gen_case, opt, spec);
    if (verify->parsed()) return cmd_verify(verify_dirs);
  } catch (const pw::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitUsage;
}
