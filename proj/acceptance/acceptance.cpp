// Acceptance runner: one PASS/FAIL line per criterion.
//
//   pift_acceptance [--out DIR] [--configs DIR] [--only 1,4,9]
//
// Criteria 6-9 and 11 run the bundled configs through the experiment
// runner, writing into --out. Exit status is 0 only when every selected
// criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "../tests/oracles.hpp"
#include "pift/config.hpp"
#include "pift/experiment.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Outcome()> check;
};

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  return json::parse(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  return {std::istreambuf_iterator<char>(in), {}};
}

class Runner {
 public:
  Runner(fs::path out, fs::path configs) : out_(std::move(out)), configs_(std::move(configs)) {}

  json sweep(const std::string& config) {
    const fs::path dir = out_ / stem(config);
    const json summary = pift::run_sweep(pift::load_config_file((configs_ / config).string()),
                                         dir.string());
    for (const auto& variant : summary["variants"]) {
      for (const auto& job : variant["jobs"]) first_job_.try_emplace(config, job["dir"]);
    }
    return summary;
  }

  json single(const std::string& config, std::uint64_t seed) {
    const fs::path dir = out_ / (stem(config) + "-seed-" + std::to_string(seed));
    pift::RunOptions opts;
    opts.seed = seed;
    const json resolved =
        pift::resolve_config(pift::load_config_file((configs_ / config).string()), opts);
    const auto report = pift::run_experiment(resolved, dir.string());
    if (report.exit_code != 0) throw std::runtime_error(config + ": " + report.message);
    first_job_.try_emplace(config, dir.string());
    return report.diagnostics;
  }

  /// Directory of an earlier run of `config`, running the config as written
  /// when none exists yet.
  fs::path reference_run(const std::string& config) {
    if (auto it = first_job_.find(config); it != first_job_.end()) return it->second;
    const fs::path dir = out_ / (stem(config) + "-reference");
    const json resolved = pift::resolve_config(pift::load_config_file((configs_ / config).string()));
    pift::run_experiment(resolved, dir.string());
    first_job_[config] = dir.string();
    return dir;
  }

  std::vector<std::string> bundled() const {
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(configs_)) {
      if (entry.path().extension() == ".toml") names.push_back(entry.path().filename().string());
    }
    std::sort(names.begin(), names.end());
    return names;
  }

  const fs::path& out() const { return out_; }

 private:
  static std::string stem(const std::string& config) { return fs::path(config).stem().string(); }

  fs::path out_;
  fs::path configs_;
  std::map<std::string, fs::path> first_job_;
};

Outcome gp_equivalence() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) worst = std::max(worst, oracle::gp_equivalence_error(seed));
  return {worst <= 1e-10, "max |mean|,|cov| deviation " + fmt("%.2e", worst) + " (limit 1e-10)"};
}

Outcome klein_gordon() {
  double green = 0.0, mass = 0.0, mean = 0.0, scaling = 0.0;
  for (double alpha : {0.5, 2.0, 8.0}) {
    const auto r = oracle::kg_residuals(alpha);
    green = std::max(green, r.green_off_spike);
    mass = std::max(mass, r.green_spike_mass);
    mean = std::max(mean, r.mean_residual);
    scaling = std::max(scaling, oracle::kg_beta_scaling_error(alpha));
  }
  const bool pass = green < 1e-3 && mass < 1e-3 && mean < 1e-3 && scaling < 1e-12;
  return {pass, "Green off-spike " + fmt("%.2e", green) + ", spike mass " + fmt("%.2e", mass) +
                    ", prior mean " + fmt("%.2e", mean) + " (limit 1e-3); beta scaling " +
                    fmt("%.2e", scaling) + " (limit 1e-12)"};
}

Outcome gradients() {
  const auto r = oracle::gradient_suite(100, 2024);
  std::ostringstream os;
  os << r.configurations << " configs: basis " << fmt("%.1e", r.basis) << ", energy theta "
     << fmt("%.1e", r.energy_theta) << ", lambda " << fmt("%.1e", r.energy_lambda) << ", nll "
     << fmt("%.1e", r.likelihood) << ", hamiltonian " << fmt("%.1e", r.hamiltonian)
     << " (limit 1e-5)";
  return {r.worst() < 1e-5, os.str()};
}

Outcome lambda_estimator() {
  bool pass = true;
  std::ostringstream os;
  std::uint64_t seed = 11;
  for (double lambda : {-1.0, 0.0, 0.7}) {
    const auto r = oracle::marginal_gradient_check(lambda, 10000, seed++);
    const double exact = std::abs(r.exact_inner_gradient - r.oracle_gradient);
    const double z = std::abs(r.mc_mean - r.oracle_gradient) / r.mc_stderr;
    pass = pass && exact <= 1e-6 && z <= 3.0;
    os << "lambda " << lambda << ": exact " << fmt("%.1e", exact) << ", MC " << fmt("%.2f", z)
       << " se; ";
  }
  os << "(limits 1e-6, 3 se)";
  return {pass, os.str()};
}

Outcome variations() {
  const auto r = oracle::cubic_variations(20, 5);
  return {r.worst_first_ratio < 1e-3 && r.min_second > 0.0,
          "first/||eta|| " + fmt("%.2e", r.worst_first_ratio) + " (limit 1e-3), min second " +
              fmt("%.3g", r.min_second) + " over " + std::to_string(r.trials) + " trials"};
}

Outcome example1(Runner& runner) {
  const json s = runner.sweep("example1.toml");
  const auto& jobs = s["variants"][0]["jobs"];
  std::vector<std::pair<double, double>> by_beta;
  for (const auto& j : jobs) by_beta.emplace_back(j["value"].get<double>(), j["statistic"].get<double>());
  std::sort(by_beta.begin(), by_beta.end());
  bool decreasing = by_beta.size() == 3;
  std::ostringstream os;
  os << "max std";
  for (std::size_t i = 0; i < by_beta.size(); ++i) {
    os << " " << fmt("%.3g", by_beta[i].second) << " (beta " << by_beta[i].first << ")";
    if (i > 0 && !(by_beta[i].second < by_beta[i - 1].second)) decreasing = false;
  }
  double sup = std::numeric_limits<double>::infinity();
  for (const auto& j : jobs) {
    if (j["value"].get<double>() == 1e5) sup = read_json(fs::path(j["dir"]) / "diagnostics.json")["field"]["sup_error"];
  }
  os << "; sup error at 1e5 " << fmt("%.4f", sup) << " (limit 0.05)";
  return {decreasing && sup < 0.05, os.str()};
}

Outcome example2(Runner& runner) {
  const json s = runner.sweep("example2.toml");
  bool pass = !s["failed"].get<bool>();
  std::ostringstream os;
  for (const auto& v : s["variants"]) {
    std::map<int, std::map<double, double>> per_seed;
    for (const auto& j : v["jobs"]) per_seed[j["seed"]][j["value"]] = j["statistic"];
    double min_rho = 1.0;
    for (const auto& r : v["spearman_per_seed"]) min_rho = std::min(min_rho, r["spearman"].get<double>());
    bool ordered = per_seed.size() == 3;
    for (const auto& [seed, m] : per_seed) ordered = ordered && m.at(1.0) > m.at(0.0);
    pass = pass && min_rho > 0.7 && ordered;
    os << "variant " << v["name"].get<std::string>() << ": min rho " << fmt("%.2f", min_rho)
       << ", gamma=1 above gamma=0 on " << (ordered ? "all" : "not all") << " seeds; ";
  }
  os << "(limit rho > 0.7, 3 seeds)";
  return {pass, os.str()};
}

Outcome example3a(Runner& runner) {
  const json s = runner.sweep("example3a.toml");
  bool pass = !s["failed"].get<bool>();
  std::ostringstream os;
  os << "median D";
  int seeds = 0;
  for (const auto& j : s["variants"][0]["jobs"]) {
    const double d = j["statistic"];
    pass = pass && std::abs(d - 0.1) < 0.05;
    os << " " << fmt("%.4f", d);
    ++seeds;
  }
  pass = pass && seeds == 3;
  os << " over " << seeds << " seeds (limit |D - 0.1| < 0.05)";
  return {pass, os.str()};
}

Outcome example4(Runner& runner) {
  std::ostringstream os;
  const json single = runner.single("example4-single.toml", 1);
  const auto& modes = single["scan"]["prior_modes"];
  bool near_truth = false;
  for (const auto& m : modes) near_truth = near_truth || std::abs(m["theta"].get<double>() - 2.0) <= 0.1;
  const bool a = modes.size() == 2 && near_truth;
  os << "(a) " << modes.size() << " prior maxima, " << (near_truth ? "one" : "none") << " near 2 "
     << (a ? "PASS" : "FAIL");

  bool b = !modes.empty();
  double worst = 0.0;
  for (const auto& m : modes) {
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& mean : single["gmm"]["means"]) {
      nearest = std::min(nearest, std::abs(mean[0].get<double>() - m["theta"].get<double>()));
    }
    worst = std::max(worst, nearest);
  }
  b = b && worst <= 0.1;
  os << "; (b) farthest scan mode from a GMM mean " << fmt("%.3f", worst) << " (limit 0.1) "
     << (b ? "PASS" : "FAIL");

  bool c = true;
  os << "; (c) mode sup errors";
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const json nine = runner.single("example4-nine.toml", seed);
    std::vector<double> errs;
    for (const auto& m : nine["gmm"]["modes"]) errs.push_back(m["field"]["sup_error"]);
    std::sort(errs.begin(), errs.end());
    c = c && errs.size() == 2 && errs[0] < 0.5 && errs[1] > 0.5;
    os << " seed " << seed << " [" << fmt("%.2f", errs.front()) << ", " << fmt("%.2f", errs.back()) << "]";
  }
  os << " (need one < 0.5 < other) " << (c ? "PASS" : "FAIL");
  return {a && b && c, os.str()};
}

Outcome correspondence() {
  const auto r = oracle::pinn_correspondence(50, 9);
  const double worst = std::max({r.pinn, r.bpinn, r.bpinn_differences});
  return {worst <= 1e-10, "PINN " + fmt("%.1e", r.pinn) + ", B-PINN " + fmt("%.1e", r.bpinn) +
                              ", B-PINN differences " + fmt("%.1e", r.bpinn_differences) +
                              " over " + std::to_string(r.trials) + " fields (limit 1e-10)"};
}

Outcome determinism(Runner& runner) {
  bool pass = true;
  std::ostringstream os;
  for (const auto& config : runner.bundled()) {
    const fs::path first = runner.reference_run(config);
    const fs::path again = runner.out() / "repro" / fs::path(config).stem();
    const json resolved = read_json(first / "resolved-config.json");
    pift::run_experiment(resolved, again.string());
    const std::string artifact = fs::exists(first / "chain.csv") ? "chain.csv" : "posterior-grid.csv";
    const bool same = slurp(first / artifact) == slurp(again / artifact);
    pass = pass && same;
    os << fs::path(config).stem().string() << " " << (same ? "identical" : "DIFFERS") << "; ";
  }
  os << "(re-run from resolved-config.json)";
  return {pass, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string out = "acceptance-runs";
  std::string configs = PIFT_CONFIG_DIR;
  std::vector<int> only;
  app.add_option("--out", out, "directory for experiment outputs");
  app.add_option("--configs", configs, "directory holding the bundled configs")->check(CLI::ExistingDirectory);
  app.add_option("--only", only, "criterion numbers to run")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  Runner runner(out, configs);
  const std::vector<Criterion> criteria = {
      {1, "GP equivalence", 1, gp_equivalence},
      {2, "Klein-Gordon analytic", 5, klein_gordon},
      {3, "gradient suite", 10, gradients},
      {4, "lambda-gradient estimator", 60, lambda_estimator},
      {5, "cubic energy variations", 10, variations},
      {6, "Example 1 posterior collapse", 300, [&] { return example1(runner); }},
      {7, "Example 2 beta-gamma trend", 1800, [&] { return example2(runner); }},
      {8, "Example 3a D identification", 1800, [&] { return example3a(runner); }},
      {9, "Example 4 bimodality", 1800, [&] { return example4(runner); }},
      {10, "PINN/B-PINN correspondence", 1, correspondence},
      {11, "determinism", 0, [&] { return determinism(runner); }},
  };
  const std::set<int> selected(only.begin(), only.end());
  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.budget_seconds <= 0 || secs < c.budget_seconds;
    if (!in_time) o.detail += "; over the " + fmt("%.0f", c.budget_seconds) + " s budget";
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::cout << "AC" << c.id << " " << (pass ? "PASS" : "FAIL") << " " << c.name << ": " << o.detail
              << " [" << fmt("%.2f", secs) << " s]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
