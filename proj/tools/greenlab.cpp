#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "greenlab/cohomology.hpp"
#include "greenlab/experiments.hpp"
#include "greenlab/map_io.hpp"
#include "greenlab/parallel.hpp"

using namespace greenlab;
using nlohmann::json;

namespace {

// exit codes: 0 ok/consistent, 2 usage/parse, 3 resource cap,
// 4 non-convergence, 5 inconsistent verdict, 6 inconclusive verdict
constexpr int kOk = 0, kUsage = 2, kResource = 3, kNoConverge = 4,
              kInconsistent = 5, kInconclusive = 6;

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file: " + path);
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw UsageError("config file " + path + ": " + e.what());
  }
}

int verdict_exit(Verdict v) {
  switch (v) {
    case Verdict::consistent: return kOk;
    case Verdict::inconsistent: return kInconsistent;
    case Verdict::inconclusive: return kInconclusive;
  }
  return kInconclusive;
}

int cmd_degrees(const std::string& map_file, int n_max, const std::string& out_dir) {
  RationalMap f = load_map(map_file);
  PullbackData pd = pullback_matrix(f);
  RegularityReport reg = is_1_regular(f, n_max);
  std::vector<double> roots = dynamical_degree_estimate(f, n_max);
  int d_top = topological_degree(f, 40, 0x90d5);

  std::ostringstream csv;
  csv << "n";
  for (const auto& name : pd.basis) csv << ",deg_" << name;
  csv << ",nth_root\n";
  for (int n = 1; n <= n_max; ++n) {
    csv << n;
    const DegMatrix& a = reg.degrees[n - 1];
    for (std::size_t i = 0; i < a.size(); ++i) csv << "," << a[i][i];
    csv << "," << roots[n - 1] << "\n";
  }
  std::cout << csv.str();
  std::cout << "lambda1 " << std::setprecision(15) << pd.lambda1 << "\n";
  std::cout << "1-regular " << (reg.regular ? "true" : "false");
  if (!reg.regular) std::cout << " (first failure at n = " << reg.first_failure << ")";
  std::cout << "\n";
  std::cout << "d_top " << d_top << "\n";
  std::cout << "lambda1 vs d_top: " << (pd.lambda1 > d_top ? "lambda1 > d_top" : "lambda1 <= d_top")
            << "\n";
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream(out_dir + "/degrees-" + map_hash(f) + ".csv") << csv.str();
  }
  return kOk;
}

int cmd_green(const std::string& map_file, const std::string& config_file,
              std::uint64_t seed, const std::string& out_dir) {
  RationalMap f = load_map(map_file);
  json c = load_config(config_file);
  GreenConfig cfg;
  cfg.per_axis = c.value("per_axis", 128);
  cfg.max_iters = c.value("max_iters", 60);
  cfg.tol = c.value("tol", 1e-9);

  std::string dir = out_dir.empty() ? "." : out_dir;
  std::filesystem::create_directories(dir);
  std::string base = dir + "/green-" + map_hash(f) + "-" + std::to_string(seed);

  json trace;
  try {
    GreenResult res = green_potential(f, cfg);
    trace["lambda1"] = res.lambda1;
    trace["alpha"] = res.alpha;
    trace["iters"] = res.iters;
    trace["converged"] = res.converged;
    trace["sup_increments"] = res.sup_increments;
    trace["l1_increments"] = res.l1_increments;
    trace["invariance_residual"] = res.invariance_residual;
    std::ofstream(base + ".json") << trace.dump(2) << "\n";
    std::ofstream pot(base + ".csv");
    pot << "chart,index,value,mask\n";
    const Grid& g = res.potential.grid();
    for (std::size_t ch = 0; ch < g.charts.size(); ++ch)
      for (std::size_t i = 0; i < g.charts[ch].size(); ++i) {
        if (!g.charts[ch].owned[i]) continue;
        char buf[48];
        std::snprintf(buf, sizeof buf, "%.17g", res.potential.values[ch][i]);
        pot << ch << "," << i << "," << buf << ","
            << static_cast<int>(res.potential.mask[ch][i]) << "\n";
      }
    std::cout << "lambda1 " << res.lambda1 << ", iterations " << res.iters
              << ", invariance residual " << res.invariance_residual << "\n";
    return res.converged ? kOk : kNoConverge;
  } catch (const ConvergenceError& e) {
    trace["converged"] = false;
    trace["error"] = e.what();
    std::ofstream(base + ".json") << trace.dump(2) << "\n";
    std::cerr << "greenlab: " << e.what() << "\n";
    return kNoConverge;
  }
}

int cmd_experiment(const std::string& id, const std::string& map_file,
                   const std::string& config_file, std::uint64_t seed,
                   const std::string& out_dir) {
  const auto& ids = experiment_ids();
  if (std::find(ids.begin(), ids.end(), id) == ids.end())
    throw UsageError("unknown experiment id: " + id);
  RationalMap f = load_map(map_file);
  json config = load_config(config_file);
  ExperimentReport rep = run_experiment(id, f, config, seed);
  write_report(rep, out_dir.empty() ? "." : out_dir, map_hash(f));
  std::cout << id << ": verdict " << to_string(rep.verdict) << "\n";
  for (const auto& note : rep.notes) std::cout << "  " << note << "\n";
  return verdict_exit(rep.verdict);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"greenlab: Green currents, dynamical degrees and pluripotential experiments"};
  app.require_subcommand(1);

  std::string map_file, config_file, out_dir, exp_id;
  std::uint64_t seed = 0;
  int threads = 0, n_max = 5;
  if (const char* env = std::getenv("GREENLAB_THREADS")) threads = std::atoi(env);

  auto add_common = [&](CLI::App* sub, bool with_seed) {
    sub->add_option("--map", map_file, "map file (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "worker threads (0 = hardware)");
    if (with_seed) {
      sub->add_option("--config", config_file, "config file (JSON)");
      sub->add_option("--seed", seed, "64-bit seed");
    }
  };

  CLI::App* degrees = app.add_subcommand("degrees", "degree sequence and 1-regularity");
  add_common(degrees, false);
  degrees->add_option("-N,--n-max", n_max, "iterates to check")->check(CLI::PositiveNumber);

  CLI::App* green = app.add_subcommand("green", "Green potential of the Perron class");
  add_common(green, true);

  CLI::App* experiment = app.add_subcommand("experiment", "run a named experiment");
  experiment->add_option("id", exp_id, "experiment id")->required();
  add_common(experiment, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    set_thread_count(threads);
    if (degrees->parsed()) return cmd_degrees(map_file, n_max, out_dir);
    if (green->parsed()) return cmd_green(map_file, config_file, seed, out_dir);
    return cmd_experiment(exp_id, map_file, config_file, seed, out_dir);
  } catch (const UsageError& e) {
    std::cerr << "greenlab: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    std::cerr << "greenlab: " << e.what() << "\n";
    return kUsage;
  } catch (const ResourceError& e) {
    std::cerr << "greenlab: " << e.what() << "\n";
    return kResource;
  } catch (const ConvergenceError& e) {
    std::cerr << "greenlab: " << e.what() << "\n";
    return kNoConverge;
  } catch (const std::exception& e) {
    std::cerr << "greenlab: " << e.what() << "\n";
    return kUsage;
  }
}
