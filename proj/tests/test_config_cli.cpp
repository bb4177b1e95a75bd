#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "pift/config.hpp"
#include "pift/experiment.hpp"
#include "pift/ground_truth.hpp"
#include "pift/sampler.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pift;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Fresh scratch directory per test case.
fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("pift-test-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write(const fs::path& dir, const std::string& file, const std::string& text) {
  std::ofstream(dir / file) << text;
  return dir / file;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + PIFT_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kSmallForward = R"(
[experiment]
kind = "forward-sgld"
name = "small"
seed = 5

[basis]
type = "boundary_wrapped1d"
num_pairs = 2
phi0 = 1.0
phi1 = 0.1

[energy]
model = "dirichlet_heat"
D = 0.25
source = "exp_neg_x"

[prior]
beta = 100.0

[truth]
kind = "heat_exact"

[sampler]
steps = 4000
full_steps = 8000
)";

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("TOML subset: tables, scalars, arrays, comments") {
    const json j = parse_toml(R"(
# comment
title = "a # not a comment"
[outer]
int = 1_000
neg = -3
float = 2.5e-3
yes = true
"quoted key" = 'literal'
list = [1, 2,
        3]   # trailing
nested = [[1, 2], ["x"]]
[outer.inner]
x = 0.5
)");
    CHECK(j["title"] == "a # not a comment");
    CHECK(j["outer"]["int"] == 1000);
    CHECK(j["outer"]["neg"] == -3);
    CHECK(j["outer"]["float"].get<double>() == 2.5e-3);
    CHECK(j["outer"]["yes"] == true);
    CHECK(j["outer"]["quoted key"] == "literal");
    CHECK(j["outer"]["list"] == json::array({1, 2, 3}));
    CHECK(j["outer"]["nested"][1][0] == "x");
    CHECK(j["outer"]["inner"]["x"].get<double>() == 0.5);
  }

  TEST_CASE("TOML errors name the line") {
    auto message = [](const std::string& text) {
      try {
        parse_toml(text, "cfg.toml");
      } catch (const ConfigError& e) {
        return std::string(e.what());
      }
      return std::string();
    };
    CHECK(message("a = 1\nb = \n").find("cfg.toml:2") != std::string::npos);
    CHECK(message("a = 1\na = 2\n").find("duplicate key") != std::string::npos);
    CHECK(message("[t]\n[t]\n").find("defined twice") != std::string::npos);
    CHECK(message("x = [1, 2\n").find("cfg.toml") != std::string::npos);
    CHECK(message("s = \"open\n").find("unterminated string") != std::string::npos);
    CHECK(message("[[arr]]\n").find("arrays of tables") != std::string::npos);
  }

  TEST_CASE("dotted key paths") {
    json j = json::object();
    set_path(j, "energy.kle.terms", 4);
    CHECK(get_path(j, "energy.kle.terms") == 4);
    CHECK(get_path(j, "energy.missing").is_null());
    CHECK_THROWS_AS(set_path(j, "energy..x", 1), ConfigError);
  }

  TEST_CASE("resolution fills defaults and is idempotent") {
    const json raw = parse_toml(kSmallForward);
    const json once = resolve_config(raw);
    CHECK(once["sampler"]["alpha1"].get<double>() == 0.51);
    CHECK(once["sampler"]["noise_variance"] == "two_eps");
    CHECK(once["sampler"]["alpha0"].get<double>() == doctest::Approx(0.1 / 100.0));
    CHECK(once["sampler"]["burn_in"] == 400);
    CHECK(once["basis"]["a"].get<double>() == 0.0);
    CHECK(resolve_config(once) == once);

    RunOptions full;
    full.full = true;
    full.seed = 99;
    const json big = resolve_config(raw, full);
    CHECK(big["sampler"]["steps"] == 8000);
    CHECK(big["experiment"]["seed"] == 99);
    CHECK(resolve_config(big) == big);
  }

  TEST_CASE("invalid configs are rejected with the key path") {
    auto message = [](json raw) {
      try {
        resolve_config(raw);
      } catch (const ConfigError& e) {
        return std::string(e.what());
      }
      return std::string();
    };
    const json good = parse_toml(kSmallForward);
    json typo = good;
    typo["sampler"]["stpes"] = 10;
    CHECK(message(typo).find("sampler.stpes") != std::string::npos);
    json bad_kind = good;
    bad_kind["experiment"]["kind"] = "backward";
    CHECK(message(bad_kind).find("experiment.kind") != std::string::npos);
    json negative = good;
    negative["energy"]["D"] = -1.0;
    CHECK(message(negative).find("energy.D") != std::string::npos);
    json stray = good;
    stray["hmc"] = json::object();
    CHECK(message(stray).find("hmc") != std::string::npos);
    json infer = good;
    infer["energy"]["infer"] = json::array({"D"});
    CHECK(!message(infer).empty());
    json exponent = good;
    exponent["sampler"]["alpha1"] = 0.5;
    CHECK(message(exponent).find("alpha1") != std::string::npos);
    json pointer = good;
    pointer["sweep"] = {{"parameter", "prior.beta"}, {"values", {1, 2}}, {"statistic", "field"}};
    CHECK(message(pointer).find("sweep.statistic") != std::string::npos);
  }

  TEST_CASE("bundled configs resolve") {
    int count = 0;
    for (const auto& entry : fs::directory_iterator(PIFT_CONFIG_DIR)) {
      if (entry.path().extension() != ".toml") continue;
      INFO(entry.path().string());
      const json resolved = resolve_config(load_config_file(entry.path().string()));
      CHECK(resolve_config(resolved) == resolved);
      ++count;
    }
    CHECK(count >= 6);
  }

  TEST_CASE("synthetic data: equidistant interior points") {
    SyntheticDesign design;
    design.num_points = 4;
    design.sigma = 0.0;
    auto truth = [](const Point& p) { return heat_exact(0.25, 1.0, 0.1, p.x); };
    const Dataset d = generate_synthetic(design, truth, Domain::interval(0, 1), 1);
    REQUIRE(d.size() == 4);
    for (int j = 0; j < 4; ++j) {
      CHECK(d.locations[j].x == doctest::Approx((j + 1) / 5.0));
      CHECK(d.values[j] == truth(d.locations[j]));
    }
  }

  TEST_CASE("synthetic data: boundary sampling and seeding") {
    SyntheticDesign design;
    design.layout = "boundary_uniform";
    design.sigma = 0.01;
    auto truth = [](const Point& p) { return p.x + p.y; };
    const Domain box = Domain::box(-1, 1, -1, 1);
    const Dataset a = generate_synthetic(design, truth, box, 7), b = generate_synthetic(design, truth, box, 7);
    REQUIRE(a.size() == 45);
    CHECK(a.values == b.values);
    for (int j = 0; j < 15; ++j) CHECK(a.locations[j].y == -1.0);
    for (int j = 15; j < 30; ++j) CHECK(a.locations[j].x == 1.0);
    for (int j = 30; j < 45; ++j) CHECK(a.locations[j].y == 1.0);
    double worst = 0.0;
    for (int j = 0; j < 45; ++j) worst = std::max(worst, std::abs(a.values[j] - truth(a.locations[j])));
    CHECK(worst < 0.05);
    CHECK(generate_synthetic(design, truth, box, 8).values != a.values);
  }

  TEST_CASE("nonlinear ground truth solves the boundary-value problem") {
    const double D = 0.1, kappa = 1.0;
    auto f = [](double x) { return std::cos(4 * x); };
    const GridFunction coarse = solve_semilinear_bvp(D, kappa, 0.0, f, 0.0, 1.0, 0.0, 0.0, {1025});
    const GridFunction fine = solve_semilinear_bvp(D, kappa, 0.0, f, 0.0, 1.0, 0.0, 0.0);
    double diff = 0.0;
    for (int i = 0; i <= 100; ++i) diff = std::max(diff, std::abs(coarse(i / 100.0) - fine(i / 100.0)));
    CHECK(diff < 1e-5);
    CHECK(fine(0.0) == 0.0);
    CHECK(heat_exact(0.25, 1.0, 0.1, 0.0) == doctest::Approx(1.0));
    CHECK(heat_exact(0.25, 1.0, 0.1, 1.0) == doctest::Approx(0.1));
    CHECK(heat_exact(0.25, 1.0, 0.1, 0.5) ==
          doctest::Approx(-4 * std::exp(-0.5) + (4 / std::exp(1.0) - 4.9) * 0.5 + 5));
  }
}

TEST_SUITE("cli") {
  TEST_CASE("forward run writes artifacts and re-runs bit-identically") {
    const fs::path dir = scratch("forward");
    const fs::path cfg = write(dir, "small.toml", kSmallForward);
    REQUIRE(run_cli("forward --config \"" + cfg.string() + "\" --out \"" + (dir / "a").string() + "\"",
                    dir / "log") == 0);
    for (const char* f : {"resolved-config.json", "chain.csv", "summary.csv", "diagnostics.json"}) {
      CHECK(fs::exists(dir / "a" / f));
    }
    const Chain chain = Chain::read_csv((dir / "a" / "chain.csv").string());
    CHECK(chain.rows() == 3600);
    CHECK(chain.names.front() == "theta_0");
    REQUIRE(run_cli("forward --config \"" + (dir / "a" / "resolved-config.json").string() + "\" --out \"" +
                        (dir / "b").string() + "\"",
                    dir / "log") == 0);
    CHECK(slurp(dir / "a" / "chain.csv") == slurp(dir / "b" / "chain.csv"));
    CHECK(slurp(dir / "a" / "resolved-config.json") == slurp(dir / "b" / "resolved-config.json"));
  }

  TEST_CASE("seed override and full counts") {
    const fs::path dir = scratch("seed");
    const fs::path cfg = write(dir, "small.toml", kSmallForward);
    REQUIRE(run_cli("forward --config \"" + cfg.string() + "\" --out \"" + (dir / "o").string() +
                        "\" --seed 77 --full",
                    dir / "log") == 0);
    std::ifstream in(dir / "o" / "resolved-config.json");
    const json r = json::parse(in);
    CHECK(r["experiment"]["seed"] == 77);
    CHECK(r["sampler"]["steps"] == 8000);
  }

  TEST_CASE("analytic run") {
    const fs::path dir = scratch("analytic");
    const fs::path cfg = fs::path(PIFT_CONFIG_DIR) / "kg-analytic.toml";
    REQUIRE(run_cli("analytic --config \"" + cfg.string() + "\" --out \"" + dir.string() + "\"", dir / "log") == 0);
    const std::string grid = slurp(dir / "posterior-grid.csv");
    CHECK(grid.rfind("x,mean,std,q025,q975\n", 0) == 0);
    CHECK(std::count(grid.begin(), grid.end(), '\n') == 102);
  }

  TEST_CASE("exit codes for bad input") {
    const fs::path dir = scratch("errors");
    const fs::path cfg = write(dir, "small.toml", kSmallForward);
    CHECK(run_cli("inverse --config \"" + cfg.string() + "\" --out \"" + (dir / "x").string() + "\"",
                  dir / "log") == 1);
    CHECK(slurp(dir / "log").find("experiment.kind") != std::string::npos);

    std::string typo = kSmallForward;
    typo += "bogus = 1\n";
    const fs::path bad = write(dir, "bad.toml", typo);
    CHECK(run_cli("forward --config \"" + bad.string() + "\"", dir / "log") == 1);
    CHECK(slurp(dir / "log").find("sampler.bogus") != std::string::npos);

    const fs::path broken = write(dir, "broken.toml", "[experiment\nkind = 1\n");
    CHECK(run_cli("forward --config \"" + broken.string() + "\"", dir / "log") == 1);
    CHECK(slurp(dir / "log").find("broken.toml:1") != std::string::npos);

    CHECK(run_cli("forward --config \"" + (dir / "missing.toml").string() + "\"", dir / "log") != 0);
    CHECK(run_cli("", dir / "log") != 0);
  }

  TEST_CASE("a diverging sampler exits 3 with a partial chain") {
    const fs::path dir = scratch("abort");
    std::string text = kSmallForward;
    text.replace(text.find("[energy]\nmodel = \"dirichlet_heat\"\nD = 0.25\nsource = \"exp_neg_x\""),
                 std::string("[energy]\nmodel = \"dirichlet_heat\"\nD = 0.25\nsource = \"exp_neg_x\"").size(),
                 "[energy]\nmodel = \"cubic_nonlinear\"\nD = 0.1\nkappa = 1.0\nsource = \"cos_4x\"");
    text.replace(text.find("[truth]\nkind = \"heat_exact\""), std::string("[truth]\nkind = \"heat_exact\"").size(),
                 "[truth]\nkind = \"none\"");
    text += "alpha0 = 50.0\nburn_in = 0\nthin = 1\n";
    const fs::path cfg = write(dir, "div.toml", text);
    CHECK(run_cli("forward --config \"" + cfg.string() + "\" --out \"" + (dir / "o").string() + "\"",
                  dir / "log") == 3);
    CHECK(fs::exists(dir / "o" / "chain.csv"));
    std::ifstream in(dir / "o" / "diagnostics.json");
    const json d = json::parse(in);
    CHECK(d.contains("aborted"));
  }

  TEST_CASE("sweep fans out over values and seeds") {
    const fs::path dir = scratch("sweep");
    std::string text = kSmallForward;
    text += "\n[sweep]\nparameter = \"prior.beta\"\nvalues = [10.0, 100.0, 1000.0]\nseeds = [1, 2]\n"
            "statistic = \"/field/max_std\"\n";
    const fs::path cfg = write(dir, "sweep.toml", text);
    REQUIRE(run_cli("sweep --config \"" + cfg.string() + "\" --out \"" + (dir / "o").string() + "\"",
                    dir / "log") == 0);
    std::ifstream in(dir / "o" / "sweep.json");
    const json s = json::parse(in);
    REQUIRE(s["variants"].size() == 1);
    CHECK(s["variants"][0]["jobs"].size() == 6);
    CHECK(s["variants"][0]["spearman_of_medians"].get<double>() == doctest::Approx(-1.0));
    CHECK(fs::exists(dir / "o" / "run" / "value-100" / "seed-2" / "chain.csv"));
    const std::string csv = slurp(dir / "o" / "sweep-summary.csv");
    CHECK(csv.rfind("variant,parameter,value,seed,exit_code,statistic\n", 0) == 0);
  }
}
