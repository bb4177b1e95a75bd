#include "pift/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "pift/analytic.hpp"
#include "pift/basis.hpp"
#include "pift/config.hpp"
#include "pift/diagnostics.hpp"
#include "pift/energy.hpp"
#include "pift/ground_truth.hpp"
#include "pift/inference.hpp"
#include "pift/kernels.hpp"
#include "pift/sampler.hpp"

namespace pift {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Resolution helpers

const json& empty_table() {
  static const json empty = json::object();
  return empty;
}

/// Reads one table of the raw config, writes every consumed key (with its
/// default filled in) to the resolved tree, and rejects keys nobody read.
class Section {
 public:
  Section(const json& raw_parent, const std::string& key, json& out_parent, std::string path)
      : raw_(lookup(raw_parent, key, path)), view_(raw_, path), path_(std::move(path)) {
    auto& slot = out_parent[key];
    if (!slot.is_object()) slot = json::object();
    out_ = &slot;
  }

  bool present(const std::string& key) const { return view_.has(key); }
  const std::string& path() const { return path_; }
  std::string where(const std::string& key) const { return view_.where(key); }
  json& out() { return *out_; }
  const json& raw() const { return raw_; }

  double number(const std::string& key, double fallback) {
    used_.insert(key);
    const double v = view_.number(key, fallback);
    (*out_)[key] = v;
    return v;
  }
  double number(const std::string& key) {
    used_.insert(key);
    const double v = view_.number(key);
    (*out_)[key] = v;
    return v;
  }
  double positive(const std::string& key, double fallback) {
    const double v = number(key, fallback);
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(where(key) + ": must be positive");
    return v;
  }
  /// A step-size decay exponent; Robbins-Monro needs it in (0.5, 1].
  double decay_exponent(const std::string& key) {
    const double v = number(key, 0.51);
    if (!(v > 0.5 && v <= 1.0)) throw ConfigError(where(key) + ": must lie in (0.5, 1]");
    return v;
  }
  long integer(const std::string& key, long fallback) {
    used_.insert(key);
    const long v = view_.integer(key, fallback);
    (*out_)[key] = v;
    return v;
  }
  long at_least(const std::string& key, long fallback, long lo) {
    const long v = integer(key, fallback);
    if (v < lo) throw ConfigError(where(key) + ": must be at least " + std::to_string(lo));
    return v;
  }
  bool boolean(const std::string& key, bool fallback) {
    used_.insert(key);
    const bool v = view_.boolean(key, fallback);
    (*out_)[key] = v;
    return v;
  }
  std::string string(const std::string& key, const std::string& fallback) {
    used_.insert(key);
    const std::string v = view_.string(key, fallback);
    (*out_)[key] = v;
    return v;
  }
  std::string choice(const std::string& key, const std::optional<std::string>& fallback,
                     const std::vector<std::string>& allowed) {
    used_.insert(key);
    const std::string v = fallback ? view_.string(key, *fallback) : view_.string(key);
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      throw ConfigError(where(key) + ": '" + v + "' is not one of {" + list + "}");
    }
    (*out_)[key] = v;
    return v;
  }
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) {
    used_.insert(key);
    auto v = present(key) ? view_.numbers(key) : fallback;
    (*out_)[key] = v;
    return v;
  }
  std::vector<std::string> strings(const std::string& key,
                                   const std::vector<std::string>& fallback) {
    used_.insert(key);
    auto v = present(key) ? view_.strings(key) : fallback;
    (*out_)[key] = v;
    return v;
  }
  /// Marks a key as handled by the caller.
  const json* take(const std::string& key) {
    used_.insert(key);
    return present(key) ? &raw_[key] : nullptr;
  }
  /// A step count with an optional full_<key> used under --full.
  long counted(const std::string& key, long fallback, long lo, bool full) {
    long v = at_least(key, fallback, lo);
    if (present("full_" + key)) {
      const long f = at_least("full_" + key, 0, lo);
      if (full) {
        v = f;
        (*out_)[key] = v;
      }
    }
    return v;
  }

  void finish() const {
    if (!raw_.is_object()) return;
    for (const auto& [key, value] : raw_.items()) {
      if (!used_.count(key)) throw ConfigError(where(key) + ": unknown key");
    }
  }

 private:
  static const json& lookup(const json& parent, const std::string& key, const std::string& path) {
    if (!parent.is_object() || !parent.contains(key)) return empty_table();
    const auto& node = parent[key];
    if (!node.is_object()) throw ConfigError(path + ": expected a table");
    return node;
  }

  const json& raw_;
  ConfigView view_;
  std::string path_;
  json* out_ = nullptr;
  std::set<std::string> used_;
};

/// Resolves burn_in and thin against a step count and echoes the result.
Retention resolve_retention(Section& s, long steps, bool full) {
  Retention r;
  r.steps = steps;
  r.burn_in = s.counted("burn_in", -1, -1, full);
  r.thin = s.counted("thin", 0, 0, full);
  try {
    r = r.resolved();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(s.path() + ": " + e.what());
  }
  s.out()["burn_in"] = r.burn_in;
  s.out()["thin"] = r.thin;
  return r;
}

// ---------------------------------------------------------------------------
// Named closed-form functions

using Fn1 = std::function<double(double)>;
using FnP = std::function<double(const Point&)>;

const std::vector<std::string> kFunctionNames = {"zero", "one", "exp_neg_x", "cos_4x",
                                                 "sin_pi_x"};

Fn1 named_function(const std::string& name) {
  if (name == "zero") return [](double) { return 0.0; };
  if (name == "one") return [](double) { return 1.0; };
  if (name == "exp_neg_x") return [](double x) { return std::exp(-x); };
  if (name == "cos_4x") return [](double x) { return std::cos(4.0 * x); };
  if (name == "sin_pi_x") return [](double x) { return std::sin(std::numbers::pi * x); };
  throw ConfigError("unknown function '" + name + "'");
}

FnP lift(Fn1 f) {
  return [f = std::move(f)](const Point& p) { return f(p.x); };
}

// ---------------------------------------------------------------------------
// Builders over resolved sections

BasisPtr build_basis(const json& b) {
  const std::string type = b["type"];
  if (type == "fourier1d") {
    return std::make_shared<Fourier1D>(b["num_pairs"].get<int>(), b["a"].get<double>(),
                                       b["b"].get<double>());
  }
  if (type == "boundary_wrapped1d") {
    auto inner = std::make_shared<Fourier1D>(b["num_pairs"].get<int>(), b["a"].get<double>(),
                                             b["b"].get<double>());
    return std::make_shared<BoundaryWrapped1D>(inner, b["phi0"].get<double>(),
                                               b["phi1"].get<double>());
  }
  if (type == "fourier2d_nine") return Fourier2D::nine_term();
  return std::make_shared<WellInformed2D>();
}

SourceTerm build_source(const json& e, const Domain& domain) {
  const std::string name = e["source"];
  if (name == "zero") return SourceTerm();
  if (name == "blend_cos_4x_exp_neg_x") {
    return SourceTerm::blend(e["source_gamma"].get<double>(), lift(named_function("cos_4x")),
                             lift(named_function("exp_neg_x")), name);
  }
  if (name == "allen_cahn_truth") {
    AllenCahnTruth truth{e["eps"].get<double>(), e["source_amplitude"].get<double>()};
    return SourceTerm::closed_form([truth](const Point& p) { return truth.source(p.x, p.y); },
                                   name);
  }
  if (name == "kle") {
    const auto& k = e["kle"];
    auto kernel = squared_exponential(k["lengthscale"].get<double>(), k["variance"].get<double>());
    return SourceTerm::kle(nystrom_kle(kernel, domain.lo(0), domain.hi(0),
                                       k["nodes"].get<int>(), k["terms"].get<int>()));
  }
  return SourceTerm::closed_form(lift(named_function(name)), name);
}

EnergyPtr build_energy(const json& e, const Domain& domain) {
  std::set<std::string> inferred;
  for (const auto& n : e["infer"]) inferred.insert(n.get<std::string>());
  auto param = [&](const std::string& key) {
    return PositiveParam{e[key].get<double>(), inferred.count(key) > 0};
  };
  const std::string model = e["model"];
  SourceTerm source = build_source(e, domain);
  if (model == "dirichlet_heat") return std::make_shared<DirichletHeat>(param("D"), source);
  if (model == "cubic_nonlinear") {
    return std::make_shared<CubicNonlinear>(param("D"), param("kappa"), source,
                                            e["gamma"].get<double>());
  }
  if (model == "allen_cahn") return std::make_shared<AllenCahn>(param("eps"), source);
  const std::string pde = e["pde"];
  if (pde == "heat") {
    return std::make_shared<SquaredResidual>(SquaredResidual::Pde::kHeat, param("D"), source);
  }
  if (pde == "cubic") {
    return std::make_shared<SquaredResidual>(SquaredResidual::Pde::kCubic, param("D"), source,
                                             param("kappa"));
  }
  return std::make_shared<SquaredResidual>(SquaredResidual::Pde::kAllenCahn, param("eps"),
                                           source);
}

/// Empty when truth.kind is "none".
FnP build_truth(const json& t) {
  const std::string kind = t["kind"];
  if (kind == "heat_exact") {
    const double d = t["D"], p0 = t["phi0"], p1 = t["phi1"];
    return [d, p0, p1](const Point& p) { return heat_exact(d, p0, p1, p.x); };
  }
  if (kind == "cubic_bvp") {
    BvpOptions opt;
    opt.nodes = t["nodes"].get<int>();
    opt.tol = t["tol"].get<double>();
    auto grid = std::make_shared<GridFunction>(solve_semilinear_bvp(
        t["D"].get<double>(), t["kappa"].get<double>(), t["linear"].get<double>(),
        named_function(t["source"].get<std::string>()), t["a"].get<double>(),
        t["b"].get<double>(), t["phi0"].get<double>(), t["phi1"].get<double>(), opt));
    return [grid](const Point& p) { return (*grid)(p.x); };
  }
  if (kind == "allen_cahn") {
    AllenCahnTruth truth;
    truth.amplitude = t["amplitude"].get<double>();
    return [truth](const Point& p) { return truth.value(p.x, p.y); };
  }
  if (kind == "function") return lift(named_function(t["name"].get<std::string>()));
  return {};
}

Dataset build_data(const json& d, const Domain& domain, const FnP& truth) {
  const std::string kind = d["kind"];
  Dataset data;
  if (kind == "synthetic") {
    SyntheticDesign design;
    design.layout = d["layout"].get<std::string>();
    design.sigma = d["sigma"];
    if (design.layout == "equidistant_interior") {
      design.num_points = d["num_points"];
    } else {
      design.boundaries = d["boundaries"].get<std::vector<std::string>>();
      design.per_boundary = d["per_boundary"];
    }
    data = generate_synthetic(design, truth, domain, d["seed"].get<std::uint64_t>());
  } else if (kind == "csv") {
    data = Dataset::read_csv(d["path"].get<std::string>(), d["sigma"].get<double>());
  }
  if (kind != "none") data.validate(domain);
  return data;
}

// ---------------------------------------------------------------------------
// Section resolvers

void resolve_basis(const json& raw, json& out) {
  Section s(raw, "basis", out, "basis");
  const auto type = s.choice("type", std::nullopt,
                             {"fourier1d", "boundary_wrapped1d", "fourier2d_nine", "well_informed2d"});
  if (type == "fourier1d" || type == "boundary_wrapped1d") {
    s.at_least("num_pairs", 20, 0);
    const double a = s.number("a", 0.0), b = s.number("b", 1.0);
    if (!(b > a)) throw ConfigError(s.where("b") + ": must exceed basis.a");
    if (type == "boundary_wrapped1d") {
      s.number("phi0", 0.0);
      s.number("phi1", 0.0);
    }
  }
  s.finish();
}

std::vector<std::string> positive_names(const std::string& model, const std::string& pde) {
  if (model == "dirichlet_heat") return {"D"};
  if (model == "cubic_nonlinear") return {"D", "kappa"};
  if (model == "allen_cahn") return {"eps"};
  if (pde == "heat") return {"D"};
  if (pde == "cubic") return {"D", "kappa"};
  return {"eps"};
}

void resolve_energy(const json& raw, json& out, int dim) {
  Section s(raw, "energy", out, "energy");
  const auto model = s.choice("model", std::nullopt,
                              {"dirichlet_heat", "cubic_nonlinear", "allen_cahn", "squared_residual"});
  std::string pde;
  if (model == "squared_residual") pde = s.choice("pde", std::nullopt, {"heat", "cubic", "allen_cahn"});
  const auto names = positive_names(model, pde);
  for (const auto& name : names) {
    const double fallback = name == "D" ? (model == "dirichlet_heat" || pde == "heat" ? 1.0 : 0.1)
                            : name == "eps" ? 0.01
                                            : 1.0;
    s.positive(name, fallback);
  }
  if (model == "cubic_nonlinear") s.number("gamma", 1.0);

  std::vector<std::string> sources = kFunctionNames;
  sources.insert(sources.end(), {"blend_cos_4x_exp_neg_x", "allen_cahn_truth", "kle"});
  const auto source = s.choice("source", std::string("zero"), sources);
  const bool one_d_source = source != "zero" && source != "one" && source != "allen_cahn_truth";
  if (one_d_source && dim != 1) {
    throw ConfigError(s.where("source") + ": '" + source + "' needs a 1D basis");
  }
  if (source == "allen_cahn_truth") {
    if (dim != 2) throw ConfigError(s.where("source") + ": allen_cahn_truth needs a 2D basis");
    if (std::find(names.begin(), names.end(), "eps") == names.end()) s.positive("eps", 0.01);
    s.number("source_amplitude", 2.0);
  }
  if (source == "blend_cos_4x_exp_neg_x") s.number("source_gamma", 1.0);
  if (source == "kle") {
    s.take("kle");
    Section k(s.raw(), "kle", s.out(), "energy.kle");
    k.positive("lengthscale", 0.2);
    k.positive("variance", 1.0);
    k.at_least("nodes", 128, 2);
    k.at_least("terms", 10, 1);
    k.finish();
  }
  const auto infer = s.strings("infer", {});
  for (const auto& n : infer) {
    if (std::find(names.begin(), names.end(), n) == names.end()) {
      throw ConfigError(s.where("infer") + ": '" + n + "' is not a parameter of " + model);
    }
  }
  s.finish();
}

void resolve_prior(const json& raw, json& out, const std::string& kind, Eigen::Index model_params) {
  Section s(raw, "prior", out, "prior");
  s.positive("beta", 1.0);
  const bool infer_beta = s.boolean("infer_beta", false);
  if (kind != kInverseSgld) {
    if (infer_beta) throw ConfigError(s.where("infer_beta") + ": only inverse-sgld infers beta");
    if (model_params > 0) {
      throw ConfigError("energy.infer: only inverse-sgld infers physics parameters");
    }
    s.finish();
    return;
  }
  const Eigen::Index count = model_params + (infer_beta ? 1 : 0);
  if (count == 0) {
    throw ConfigError("energy.infer: inverse-sgld needs at least one inferred parameter");
  }
  json entries = json::array();
  const json* given = s.take("parameter_priors");
  if (given) {
    if (!given->is_array()) throw ConfigError(s.where("parameter_priors") + ": expected an array");
    if (static_cast<Eigen::Index>(given->size()) != count) {
      throw ConfigError(s.where("parameter_priors") + ": expected " + std::to_string(count) +
                        " entries, one per inferred parameter");
    }
  }
  for (Eigen::Index i = 0; i < count; ++i) {
    const std::string path = s.where("parameter_priors") + "[" + std::to_string(i) + "]";
    json holder = {{"e", given ? (*given)[static_cast<std::size_t>(i)] : json::object()}};
    json resolved = json::object();
    Section e(holder, "e", resolved, path);
    const auto k = e.choice("kind", std::string("jeffreys"), {"jeffreys", "flat", "gaussian"});
    if (k == "gaussian") {
      e.number("mean", 0.0);
      e.positive("std", 1.0);
    }
    e.finish();
    entries.push_back(resolved["e"]);
  }
  s.out()["parameter_priors"] = entries;
  s.finish();
}

void resolve_truth(const json& raw, json& out, int dim) {
  Section s(raw, "truth", out, "truth");
  const auto kind = s.choice("kind", std::string("none"),
                             {"none", "heat_exact", "cubic_bvp", "allen_cahn", "function"});
  const json& basis = out.contains("basis") ? out["basis"] : empty_table();
  const json& energy = out.contains("energy") ? out["energy"] : empty_table();
  auto from = [](const json& t, const char* key, double fallback) {
    return t.contains(key) ? t[key].get<double>() : fallback;
  };
  if ((kind == "heat_exact" || kind == "cubic_bvp" || kind == "function") && dim != 1) {
    throw ConfigError(s.where("kind") + ": '" + kind + "' is a 1D truth");
  }
  if (kind == "allen_cahn" && dim != 2) {
    throw ConfigError(s.where("kind") + ": allen_cahn is a 2D truth");
  }
  if (kind == "heat_exact") {
    s.positive("D", from(energy, "D", 1.0));
    s.number("phi0", from(basis, "phi0", 0.0));
    s.number("phi1", from(basis, "phi1", 0.0));
  } else if (kind == "cubic_bvp") {
    s.positive("D", from(energy, "D", 0.1));
    s.positive("kappa", from(energy, "kappa", 1.0));
    s.number("linear", 0.0);
    s.choice("source", std::string("cos_4x"), kFunctionNames);
    s.number("a", from(basis, "a", 0.0));
    s.number("b", from(basis, "b", 1.0));
    s.number("phi0", from(basis, "phi0", 0.0));
    s.number("phi1", from(basis, "phi1", 0.0));
    s.at_least("nodes", 4097, 3);
    s.positive("tol", 1e-10);
  } else if (kind == "allen_cahn") {
    s.number("amplitude", 2.0);
  } else if (kind == "function") {
    s.choice("name", std::nullopt, kFunctionNames);
  }
  s.finish();
}

void resolve_data(const json& raw, json& out, int dim, const std::string& kind) {
  Section s(raw, "data", out, "data");
  const auto data_kind = s.choice("kind", std::string("none"), {"none", "synthetic", "csv"});
  if (data_kind == "synthetic") {
    if (out["truth"]["kind"] == "none") {
      throw ConfigError(s.where("kind") + ": synthetic data needs a [truth] table");
    }
    s.positive("sigma", 0.01);
    s.at_least("seed", 0, 0);
    const auto layout = s.choice("layout", std::string(dim == 1 ? "equidistant_interior" : "boundary_uniform"),
                                 {"equidistant_interior", "boundary_uniform"});
    if (layout == "equidistant_interior") {
      if (dim != 1) throw ConfigError(s.where("layout") + ": equidistant_interior is 1D");
      s.at_least("num_points", 40, 1);
    } else {
      if (dim != 2) throw ConfigError(s.where("layout") + ": boundary_uniform is 2D");
      const auto sides = s.strings("boundaries", {"bottom", "right", "top"});
      for (const auto& side : sides) {
        if (side != "bottom" && side != "right" && side != "top" && side != "left") {
          throw ConfigError(s.where("boundaries") + ": unknown side '" + side + "'");
        }
      }
      s.at_least("per_boundary", 15, 1);
    }
  } else if (data_kind == "csv") {
    s.string("path", "");
    if (s.out()["path"] == "") throw ConfigError(s.where("path") + ": required for csv data");
    s.positive("sigma", 0.01);
  } else if (kind == kInverseSgld) {
    throw ConfigError(s.where("kind") + ": inverse-sgld needs data");
  }
  s.finish();
}

void resolve_output(const json& raw, json& out) {
  Section s(raw, "output", out, "output");
  s.at_least("grid_points", 101, 2);
  s.finish();
}

void resolve_sgld(const json& raw, json& out, bool full) {
  Section s(raw, "sampler", out, "sampler");
  const double beta = out["prior"]["beta"];
  const bool has_data = out["data"]["kind"] != "none";
  const double scale = s.positive("alpha_scale", 0.1);
  const double hat = s.positive("alpha_hat", 1.0);
  double alpha0;
  if (s.present("alpha0")) {
    alpha0 = s.positive("alpha0", 0.0);
  } else {
    alpha0 = has_data ? posterior_alpha0(hat, beta, out["data"]["sigma"].get<double>())
                      : prior_alpha0(scale, beta);
    s.out()["alpha0"] = alpha0;
  }
  s.decay_exponent("alpha1");
  s.at_least("n", 1, 1);
  s.at_least("b", 1, 1);
  s.choice("noise_variance", std::string("two_eps"), {"two_eps", "eps", "sqrt_eps"});
  const long steps = s.counted("steps", 200000, 1, full);
  resolve_retention(s, steps, full);
  s.finish();
}

void resolve_inverse(const json& raw, json& out, bool full) {
  Section s(raw, "inverse", out, "inverse");
  s.positive("alpha0", 1e-3);
  s.decay_exponent("alpha1");
  s.positive("prior_scale", 0.1);
  s.positive("alpha_hat", 1.0);
  s.decay_exponent("field_alpha1");
  for (const char* key : {"T", "T_tilde", "k", "k_tilde", "n", "n_tilde", "b"}) {
    s.at_least(key, std::string(key) == "T" ? 10 : 1, 1);
  }
  s.counted("warmup", 100000, 0, full);
  s.boolean("restart_inner_schedule", true);
  s.boolean("record_fields", true);
  s.choice("noise_variance", std::string("two_eps"), {"two_eps", "eps", "sqrt_eps"});
  const long steps = s.counted("maxiter", 100000, 1, full);
  resolve_retention(s, steps, full);
  s.finish();
}

void resolve_hmc(const json& raw, json& out, bool full, int dim, Eigen::Index params) {
  Section s(raw, "hmc", out, "hmc");
  s.positive("step_size", 0.01);
  s.at_least("leapfrog_steps", 10, 1);
  s.at_least("quadrature_nodes", dim == 1 ? 512 : 128, 2);
  s.choice("start", std::string("zero"), {"zero", "mode"});
  s.choice("mass", std::string("identity"), {"identity", "hessian"});
  s.positive("mass_floor", 1.0);
  s.positive("divergence_threshold", 1000.0);
  if (s.boolean("gmm", false)) {
    s.at_least("gmm_max_iters", 500, 1);
    s.positive("gmm_tol", 1e-10);
  }
  if (s.boolean("scan", false)) {
    if (params != 1) throw ConfigError(s.where("scan") + ": needs a single-parameter basis");
    const double lo = s.number("scan_lo", -4.0), hi = s.number("scan_hi", 4.0);
    if (!(hi > lo)) throw ConfigError(s.where("scan_hi") + ": must exceed hmc.scan_lo");
    s.at_least("scan_points", 801, 3);
  }
  const long steps = s.counted("steps", 2000, 1, full);
  resolve_retention(s, steps, full);
  s.finish();
}

void resolve_analytic(const json& raw, json& out) {
  Section s(raw, "analytic", out, "analytic");
  const double alpha = s.positive("alpha", 1.0);
  s.positive("beta", 1.0);
  s.choice("source", std::string("zero"), kFunctionNames);
  const double a = s.number("a", 0.0), b = s.number("b", 1.0);
  if (!(b > a)) throw ConfigError(s.where("b") + ": must exceed analytic.a");
  s.at_least("quadrature_nodes", 4096, 2);
  s.positive("radius", 10.0 / alpha);
  s.finish();
}

void resolve_sweep(const json& raw, json& out) {
  Section s(raw, "sweep", out, "sweep");
  s.string("parameter", "");
  s.numbers("values", {});
  std::vector<double> seeds = s.numbers("seeds", {out["experiment"]["seed"].get<double>()});
  for (double v : seeds) {
    if (v < 0 || v != std::floor(v)) throw ConfigError(s.where("seeds") + ": non-negative integers");
  }
  const auto statistic = s.string("statistic", "");
  if (!statistic.empty() && statistic[0] != '/') {
    throw ConfigError(s.where("statistic") + ": expected a JSON pointer such as /field/max_std");
  }
  s.at_least("threads", 1, 1);
  json variants = json::array();
  const json* given = s.take("variants");
  if (given && !given->is_array()) throw ConfigError(s.where("variants") + ": expected an array");
  if (given) {
    for (std::size_t i = 0; i < given->size(); ++i) {
      json holder = {{"v", (*given)[i]}};
      json resolved = json::object();
      Section v(holder, "v", resolved, s.where("variants") + "[" + std::to_string(i) + "]");
      v.string("name", "variant" + std::to_string(i));
      v.string("parameter", out["sweep"]["parameter"].get<std::string>());
      const json* set = v.take("set");
      if (set && !set->is_object()) throw ConfigError(v.where("set") + ": expected a table");
      resolved["v"]["set"] = set ? *set : json::object();
      v.finish();
      variants.push_back(resolved["v"]);
    }
  }
  s.out()["variants"] = variants;
  s.finish();
}

// ---------------------------------------------------------------------------
// Output helpers

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::vector<Point> output_grid(const Domain& domain, int n) {
  return domain.dim() == 1 ? grid_1d(domain.lo(0), domain.hi(0), n) : grid_2d(domain, n, n);
}

double sup_error(const FieldSummary& s, const FnP& truth) {
  double err = 0.0;
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    err = std::max(err, std::abs(s.mean[static_cast<Eigen::Index>(i)] - truth(s.grid[i])));
  }
  return err;
}

json field_json(const FieldSummary& s, const FnP& truth) {
  json j = {{"max_std", s.stddev.maxCoeff()}, {"mean_sup_norm", s.mean.cwiseAbs().maxCoeff()}};
  if (truth) j["sup_error"] = sup_error(s, truth);
  return j;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

NoiseConvention noise_of(const json& section) {
  return parse_noise_convention(section["noise_variance"].get<std::string>());
}

Retention retention_of(const json& section, const char* steps_key) {
  Retention r;
  r.steps = section[steps_key];
  r.burn_in = section["burn_in"];
  r.thin = section["thin"];
  return r;
}

RunReport aborted(const SamplerAbort& e, const fs::path& dir, json diagnostics) {
  e.partial().write_csv((dir / "chain.csv").string());
  diagnostics["aborted"] = {{"message", e.what()}, {"step", e.step()},
                            {"rows_written", e.partial().rows()}};
  write_json(dir / "diagnostics.json", diagnostics);
  return {3, std::string("sampler aborted: ") + e.what(), diagnostics};
}

// ---------------------------------------------------------------------------
// Runners

struct Problem {
  BasisPtr basis;
  EnergyPtr model;
  FnP truth;
  Dataset data;
};

Problem build_problem(const json& cfg) {
  Problem p;
  p.basis = build_basis(cfg["basis"]);
  p.model = build_energy(cfg["energy"], p.basis->domain());
  p.truth = build_truth(cfg["truth"]);
  p.data = build_data(cfg["data"], p.basis->domain(), p.truth);
  return p;
}

void write_data(const Problem& p, const fs::path& dir) {
  if (!p.data.empty()) p.data.write_csv((dir / "data.csv").string(), p.basis->dim());
}

RunReport run_forward_sgld(const json& cfg, const fs::path& dir, json diag) {
  const Problem p = build_problem(cfg);
  write_data(p, dir);
  const json& sc = cfg["sampler"];
  FieldTarget target{p.model, p.basis, cfg["prior"]["beta"].get<double>(), p.model->default_params()};
  SgldConfig config;
  config.alpha0 = sc["alpha0"];
  config.alpha1 = sc["alpha1"];
  config.n = sc["n"];
  config.b = sc["b"];
  config.retention = retention_of(sc, "steps");
  config.seed = cfg["experiment"]["seed"];
  config.noise = noise_of(sc);
  Rng rng(config.seed);
  Chain chain;
  try {
    chain = p.data.empty() ? sgld_prior(target, config, rng)
                           : sgld_posterior(target, p.data, config, rng);
  } catch (const SamplerAbort& e) {
    return aborted(e, dir, diag);
  }
  chain.write_csv((dir / "chain.csv").string());
  const auto summary = summarize_field(chain.samples, *p.basis,
                                       output_grid(p.basis->domain(), cfg["output"]["grid_points"]));
  summary.write_csv((dir / "summary.csv").string(), p.basis->dim());
  diag["sampler"] = chain.info;
  diag["rows"] = chain.rows();
  diag["field"] = field_json(summary, p.truth);
  return {0, "", diag};
}

ParameterPrior parameter_prior_of(const json& entries) {
  std::vector<ParameterPrior::Entry> out;
  for (const auto& e : entries) {
    ParameterPrior::Entry entry;
    const std::string kind = e["kind"];
    if (kind == "flat") entry.kind = ParameterPrior::Kind::kFlat;
    if (kind == "gaussian") {
      entry.kind = ParameterPrior::Kind::kGaussian;
      entry.mean = e["mean"];
      entry.stddev = e["std"];
    }
    out.push_back(entry);
  }
  return ParameterPrior(std::move(out));
}

json parameter_stats(const Chain& chain) {
  json out = json::object();
  for (Eigen::Index j = 0; j < chain.dim(); ++j) {
    const Eigen::VectorXd col = chain.samples.col(j);
    const std::string& name = chain.names[static_cast<std::size_t>(j)];
    json s = {{"median", median(col)}, {"mean", col.mean()},
              {"q025", quantile(col, 0.025)}, {"q975", quantile(col, 0.975)}};
    if (name.rfind("log_", 0) == 0) {
      const Eigen::VectorXd natural = col.array().exp();
      s["natural_median"] = median(natural);
      s["natural_q025"] = quantile(natural, 0.025);
      s["natural_q975"] = quantile(natural, 0.975);
    }
    out[name] = s;
  }
  return out;
}

RunReport run_inverse_sgld(const json& cfg, const fs::path& dir, json diag) {
  const Problem p = build_problem(cfg);
  write_data(p, dir);
  const json& ic = cfg["inverse"];
  PhysicsPrior prior(p.model, cfg["prior"]["beta"].get<double>(),
                     cfg["prior"]["infer_beta"].get<bool>());
  InverseConfig config;
  config.alpha0 = ic["alpha0"];
  config.alpha1 = ic["alpha1"];
  config.prior_scale = ic["prior_scale"];
  config.posterior_alpha_hat = ic["alpha_hat"];
  config.field_alpha1 = ic["field_alpha1"];
  config.T = ic["T"];
  config.T_tilde = ic["T_tilde"];
  config.k = ic["k"];
  config.k_tilde = ic["k_tilde"];
  config.n = ic["n"];
  config.n_tilde = ic["n_tilde"];
  config.b = ic["b"];
  config.warmup = ic["warmup"];
  config.restart_inner_schedule = ic["restart_inner_schedule"];
  config.record_fields = ic["record_fields"];
  config.retention = retention_of(ic, "maxiter");
  config.seed = cfg["experiment"]["seed"];
  config.noise = noise_of(ic);
  Rng rng(config.seed);
  InverseResult result;
  try {
    result = sgld_inverse(prior, p.basis, p.data, prior.default_params(),
                          parameter_prior_of(cfg["prior"]["parameter_priors"]), config, rng);
  } catch (const SamplerAbort& e) {
    return aborted(e, dir, diag);
  }
  result.parameters.write_csv((dir / "chain.csv").string());
  diag["sampler"] = result.parameters.info;
  diag["rows"] = result.parameters.rows();
  diag["parameters"] = parameter_stats(result.parameters);
  const auto grid = output_grid(p.basis->domain(), cfg["output"]["grid_points"]);
  const int dim = p.basis->dim();
  if (config.record_fields && result.posterior_fields.rows() > 0) {
    result.prior_fields.write_csv((dir / "fields-prior.csv").string());
    result.posterior_fields.write_csv((dir / "fields-posterior.csv").string());
    const auto post = summarize_field(result.posterior_fields.samples, *p.basis, grid);
    const auto pri = summarize_field(result.prior_fields.samples, *p.basis, grid);
    post.write_csv((dir / "summary.csv").string(), dim);
    pri.write_csv((dir / "prior-predictive.csv").string(), dim);
    diag["field"] = field_json(post, p.truth);
    diag["prior_field"] = field_json(pri, p.truth);
  } else {
    // Parameter summary in the same column layout as the field summaries.
    std::ofstream out(dir / "summary.csv", std::ios::binary);
    out.precision(17);
    out << "parameter,median,mean,q025,q975\n";
    for (const auto& [name, s] : diag["parameters"].items()) {
      out << name << ',' << s["median"].get<double>() << ',' << s["mean"].get<double>() << ','
          << s["q025"].get<double>() << ',' << s["q975"].get<double>() << '\n';
    }
  }
  return {0, "", diag};
}

/// Strict interior local minima of a sampled curve.
json local_minima(const std::vector<double>& xs, const std::vector<double>& ys) {
  json out = json::array();
  for (std::size_t i = 1; i + 1 < ys.size(); ++i) {
    if (ys[i] < ys[i - 1] && ys[i] < ys[i + 1]) out.push_back({{"theta", xs[i]}, {"value", ys[i]}});
  }
  return out;
}

RunReport run_forward_hmc(const json& cfg, const fs::path& dir, json diag) {
  const Problem p = build_problem(cfg);
  write_data(p, dir);
  const json& hc = cfg["hmc"];
  const Domain& domain = p.basis->domain();
  const int nodes = hc["quadrature_nodes"];
  const double beta = cfg["prior"]["beta"];
  InfoHamiltonian hamiltonian(PhysicsPrior(p.model, beta), p.basis, p.data,
                              trapezoid(domain, nodes));
  const Eigen::VectorXd lambda = p.model->default_params();
  NegLogDensity target = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
    return hamiltonian.value_and_grad(theta, lambda, grad);
  };
  const Eigen::Index d = p.basis->size();
  const std::uint64_t seed = cfg["experiment"]["seed"];

  if (hc["scan"].get<bool>()) {
    const double lo = hc["scan_lo"], hi = hc["scan_hi"];
    const int n = hc["scan_points"];
    std::vector<double> thetas, prior_h, post_h;
    std::ofstream out(dir / "energy-scan.csv", std::ios::binary);
    out.precision(17);
    out << "theta,beta_energy,hamiltonian\n";
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd theta(1);
      theta << lo + (hi - lo) * i / (n - 1);
      const double bu = beta * hamiltonian.energy().energy(theta, lambda);
      const double h = hamiltonian.value(theta, lambda);
      thetas.push_back(theta[0]);
      prior_h.push_back(bu);
      post_h.push_back(h);
      out << theta[0] << ',' << bu << ',' << h << '\n';
    }
    diag["scan"] = {{"prior_modes", local_minima(thetas, prior_h)},
                    {"posterior_modes", local_minima(thetas, post_h)}};
  }

  Eigen::VectorXd start = Eigen::VectorXd::Zero(d);
  if (hc["start"] == "mode") start = find_mode(target, start);
  HmcConfig config;
  config.step_size = hc["step_size"];
  config.leapfrog_steps = hc["leapfrog_steps"];
  config.retention = retention_of(hc, "steps");
  config.seed = seed;
  config.divergence_threshold = hc["divergence_threshold"];
  if (hc["mass"] == "hessian") {
    config.mass = spd_projection(fd_hessian(target, start), hc["mass_floor"].get<double>());
  }
  diag["start"] = to_vector(start);
  Rng rng(seed);
  Chain chain;
  try {
    chain = hmc_sample(target, start, config, rng, indexed_names("theta", d));
  } catch (const SamplerAbort& e) {
    return aborted(e, dir, diag);
  }
  chain.write_csv((dir / "chain.csv").string());
  const auto grid = output_grid(domain, cfg["output"]["grid_points"]);
  const auto summary = summarize_field(chain.samples, *p.basis, grid);
  summary.write_csv((dir / "summary.csv").string(), p.basis->dim());
  diag["sampler"] = chain.info;
  diag["rows"] = chain.rows();
  diag["field"] = field_json(summary, p.truth);

  if (hc["gmm"].get<bool>()) {
    try {
      const GmmFit fit = fit_gmm2(chain.samples, hc["gmm_max_iters"], hc["gmm_tol"], seed);
      const ModeSplit split = split_modes(chain.samples, fit);
      json g = fit.to_json();
      g["modes"] = json::array();
      int k = 0;
      for (const Eigen::MatrixXd* rows : {&split.first, &split.second}) {
        json m = {{"component", k}, {"rows", rows->rows()}};
        if (rows->rows() > 0) {
          const auto s = summarize_field(*rows, *p.basis, grid);
          s.write_csv((dir / ("mode-" + std::to_string(k) + "-summary.csv")).string(),
                      p.basis->dim());
          m["mean_theta"] = to_vector(rows->colwise().mean().transpose());
          m["field"] = field_json(s, p.truth);
        }
        g["modes"].push_back(m);
        ++k;
      }
      diag["gmm"] = g;
    } catch (const std::runtime_error& e) {
      diag["gmm"] = {{"error", e.what()}};
    }
  }
  return {0, "", diag};
}

RunReport run_analytic(const json& cfg, const fs::path& dir, json diag) {
  const json& ac = cfg["analytic"];
  const double alpha = ac["alpha"], beta = ac["beta"], a = ac["a"], b = ac["b"];
  const Domain domain = Domain::interval(a, b);
  const FnP truth = build_truth(cfg["truth"]);
  Dataset data = build_data(cfg["data"], domain, truth);
  if (data.empty()) data.sigma = 1.0;
  if (!data.empty()) data.write_csv((dir / "data.csv").string(), 1);
  const auto quad = kg_truncated_quadrature(alpha, a, b, ac["quadrature_nodes"], ac["radius"]);
  const MeanFunction prior_mean =
      kg_prior_mean(alpha, named_function(ac["source"].get<std::string>()), quad);
  const auto post = free_posterior(klein_gordon_kernel(alpha), prior_mean, data, beta);
  const auto grid = grid_1d(a, b, cfg["output"]["grid_points"]);
  constexpr double z = 1.959963984540054;
  std::ofstream g(dir / "posterior-grid.csv", std::ios::binary);
  std::ofstream s(dir / "summary.csv", std::ios::binary);
  g.precision(17);
  s.precision(17);
  g << "x,mean,std,q025,q975\n";
  s << "x,prior_mean,prior_std,mean,std\n";
  const double prior_std = std::sqrt(kg_green_1d(alpha, 0.0, 0.0) / beta);
  double max_std = 0.0, err = 0.0;
  for (const Point& x : grid) {
    const double m = post.mean(x.x), sd = post.stddev(x.x);
    g << x.x << ',' << m << ',' << sd << ',' << m - z * sd << ',' << m + z * sd << '\n';
    s << x.x << ',' << prior_mean(x.x) << ',' << prior_std << ',' << m << ',' << sd << '\n';
    max_std = std::max(max_std, sd);
    if (truth) err = std::max(err, std::abs(m - truth(x)));
  }
  diag["field"] = {{"max_std", max_std}, {"prior_std", prior_std}};
  if (truth) diag["field"]["sup_error"] = err;
  diag["jitter"] = post.jitter();
  diag["data_points"] = data.size();
  return {0, "", diag};
}

}  // namespace

// ---------------------------------------------------------------------------
// Public API

Dataset generate_synthetic(const SyntheticDesign& design, const std::function<double(const Point&)>& truth,
                           const Domain& domain, std::uint64_t seed) {
  if (!truth) throw std::invalid_argument("generate_synthetic: no ground truth");
  if (design.sigma < 0.0) throw std::invalid_argument("generate_synthetic: sigma must be >= 0");
  Rng rng(seed);
  Dataset data;
  data.sigma = design.sigma;
  if (design.layout == "equidistant_interior") {
    if (domain.dim() != 1) throw std::invalid_argument("generate_synthetic: equidistant_interior is 1D");
    const int s = design.num_points;
    for (int j = 1; j <= s; ++j) {
      data.locations.push_back({domain.lo(0) + j * domain.length(0) / (s + 1), 0.0});
    }
  } else if (design.layout == "boundary_uniform") {
    if (domain.dim() != 2) throw std::invalid_argument("generate_synthetic: boundary_uniform is 2D");
    for (const auto& side : design.boundaries) {
      for (int k = 0; k < design.per_boundary; ++k) {
        const double ux = domain.lo(0) + domain.length(0) * uniform01(rng);
        const double uy = domain.lo(1) + domain.length(1) * uniform01(rng);
        if (side == "bottom") data.locations.push_back({ux, domain.lo(1)});
        else if (side == "top") data.locations.push_back({ux, domain.hi(1)});
        else if (side == "left") data.locations.push_back({domain.lo(0), uy});
        else if (side == "right") data.locations.push_back({domain.hi(0), uy});
        else throw std::invalid_argument("generate_synthetic: unknown side '" + side + "'");
      }
    }
  } else {
    throw std::invalid_argument("generate_synthetic: unknown layout '" + design.layout + "'");
  }
  data.values.resize(static_cast<Eigen::Index>(data.locations.size()));
  for (std::size_t j = 0; j < data.locations.size(); ++j) {
    data.values[static_cast<Eigen::Index>(j)] =
        truth(data.locations[j]) + design.sigma * standard_normal(rng);
  }
  return data;
}

json resolve_config(const json& raw, const RunOptions& options) {
  if (!raw.is_object()) throw ConfigError("config: expected a table at the top level");
  json out = json::object();
  std::string kind;
  {
    Section s(raw, "experiment", out, "experiment");
    kind = s.choice("kind", std::nullopt, {kAnalyticKg, kForwardSgld, kInverseSgld, kForwardHmc});
    s.string("name", "experiment");
    const long seed = s.at_least("seed", 0, 0);
    if (options.seed) s.out()["seed"] = *options.seed;
    else s.out()["seed"] = seed;
    s.out()["full"] = s.boolean("full", false) || options.full;
    s.finish();
  }
  const bool full = out["experiment"]["full"];

  std::set<std::string> sections = {"experiment", "truth", "data", "output", "sweep"};
  if (kind == kAnalyticKg) {
    sections.insert("analytic");
  } else {
    sections.insert({"basis", "energy", "prior"});
    sections.insert(kind == kForwardSgld ? "sampler" : kind == kInverseSgld ? "inverse" : "hmc");
  }
  for (const auto& [key, value] : raw.items()) {
    if (!sections.count(key)) throw ConfigError(key + ": section not used by kind " + kind);
  }

  try {
    int dim = 1;
    Eigen::Index model_params = 0, basis_size = 0;
    if (kind == kAnalyticKg) {
      resolve_analytic(raw, out);
    } else {
      resolve_basis(raw, out);
      const BasisPtr basis = build_basis(out["basis"]);
      dim = basis->dim();
      basis_size = basis->size();
      resolve_energy(raw, out, dim);
      model_params = build_energy(out["energy"], basis->domain())->num_params();
      resolve_prior(raw, out, kind, model_params);
    }
    resolve_truth(raw, out, dim);
    resolve_data(raw, out, dim, kind);
    if (kind == kForwardSgld) resolve_sgld(raw, out, full);
    if (kind == kInverseSgld) resolve_inverse(raw, out, full);
    if (kind == kForwardHmc) resolve_hmc(raw, out, full, dim, basis_size);
    resolve_output(raw, out);
    if (raw.contains("sweep")) resolve_sweep(raw, out);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return out;
}

RunReport run_experiment(const json& resolved, const std::string& out_dir) {
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  write_json(dir / "resolved-config.json", resolved);
  const std::string kind = resolved["experiment"]["kind"];
  json diag = {{"kind", kind}, {"name", resolved["experiment"]["name"]},
               {"seed", resolved["experiment"]["seed"]}};
  const auto t0 = std::chrono::steady_clock::now();
  RunReport report;
  if (kind == kAnalyticKg) report = run_analytic(resolved, dir, diag);
  else if (kind == kForwardSgld) report = run_forward_sgld(resolved, dir, diag);
  else if (kind == kInverseSgld) report = run_inverse_sgld(resolved, dir, diag);
  else report = run_forward_hmc(resolved, dir, diag);
  if (report.exit_code == 0) {
    report.diagnostics["runtime_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_json(dir / "diagnostics.json", report.diagnostics);
  }
  return report;
}

namespace {

struct SweepJob {
  std::size_t variant = 0;
  std::optional<double> value;
  std::uint64_t seed = 0;
  std::string dir;
  RunReport report;
  std::string error;
};

std::string format_value(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

}  // namespace

json run_sweep(const json& raw, const std::string& out_dir, const RunOptions& options) {
  if (!raw.is_object() || !raw.contains("sweep")) {
    throw ConfigError("sweep: the config has no [sweep] table");
  }
  // Validates the whole config, including the sweep table.
  const json probe = resolve_config(raw, options);
  const json& sw = probe["sweep"];
  json base = raw;
  base.erase("sweep");

  json variants = sw["variants"];
  if (variants.empty()) {
    variants.push_back({{"name", "run"}, {"parameter", sw["parameter"]}, {"set", json::object()}});
  }
  std::vector<std::uint64_t> seeds;
  if (options.seed) seeds.push_back(*options.seed);
  else for (double s : sw["seeds"]) seeds.push_back(static_cast<std::uint64_t>(s));
  const auto values = sw["values"].get<std::vector<double>>();

  std::vector<SweepJob> jobs;
  std::vector<json> configs;
  for (std::size_t v = 0; v < variants.size(); ++v) {
    const std::string parameter = variants[v]["parameter"];
    if (!values.empty() && parameter.empty()) {
      throw ConfigError("sweep.variants[" + std::to_string(v) + "].parameter: required with sweep.values");
    }
    std::vector<std::optional<double>> points;
    if (values.empty()) points.push_back(std::nullopt);
    for (double x : values) points.push_back(x);
    for (std::size_t i = 0; i < points.size(); ++i) {
      for (std::uint64_t seed : seeds) {
        json cfg = base;
        for (const auto& [path, value] : variants[v]["set"].items()) set_path(cfg, path, value);
        if (points[i]) set_path(cfg, parameter, *points[i]);
        set_path(cfg, "experiment.seed", seed);
        SweepJob job;
        job.variant = v;
        job.value = points[i];
        job.seed = seed;
        fs::path dir = fs::path(out_dir) / variants[v]["name"].get<std::string>();
        if (points[i]) dir /= "value-" + format_value(*points[i]);
        dir /= "seed-" + std::to_string(seed);
        job.dir = dir.string();
        RunOptions opt;
        opt.full = options.full;
        configs.push_back(resolve_config(cfg, opt));
        jobs.push_back(std::move(job));
      }
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        jobs[i].report = run_experiment(configs[i], jobs[i].dir);
      } catch (const std::exception& e) {
        jobs[i].error = e.what();
      }
    }
  };
  const int threads = std::min<int>(sw["threads"].get<int>(), static_cast<int>(jobs.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  const std::string statistic = sw["statistic"];
  auto stat_of = [&](const SweepJob& job) -> json {
    if (statistic.empty() || job.report.exit_code != 0 || !job.error.empty()) return nullptr;
    const json::json_pointer ptr(statistic);
    if (!job.report.diagnostics.contains(ptr)) return nullptr;
    return job.report.diagnostics[ptr];
  };

  const fs::path root(out_dir);
  fs::create_directories(root);
  std::ofstream csv(root / "sweep-summary.csv", std::ios::binary);
  csv.precision(17);
  csv << "variant,parameter,value,seed,exit_code,statistic\n";
  json summary = {{"statistic", statistic}, {"variants", json::array()}};
  bool failed = false;
  for (std::size_t v = 0; v < variants.size(); ++v) {
    json vj = {{"name", variants[v]["name"]}, {"parameter", variants[v]["parameter"]},
               {"values", values}, {"seeds", seeds}, {"jobs", json::array()}};
    // stat[value index][seed index]
    std::vector<std::vector<double>> stats(std::max<std::size_t>(values.size(), 1));
    bool complete = true;
    std::size_t vi = 0, si = 0;
    for (const auto& job : jobs) {
      if (job.variant != v) continue;
      const json st = stat_of(job);
      const int code = !job.error.empty() ? 2 : job.report.exit_code;
      failed = failed || code != 0;
      json jj = {{"seed", job.seed}, {"dir", job.dir}, {"exit_code", code}, {"statistic", st}};
      if (job.value) jj["value"] = *job.value;
      if (!job.error.empty()) jj["error"] = job.error;
      if (!job.report.message.empty()) jj["message"] = job.report.message;
      vj["jobs"].push_back(jj);
      csv << variants[v]["name"].get<std::string>() << ',' << variants[v]["parameter"].get<std::string>()
          << ',' << (job.value ? format_value(*job.value) : "") << ',' << job.seed << ',' << code << ','
          << (st.is_number() ? format_value(st.get<double>()) : "") << '\n';
      if (st.is_number()) stats[vi].push_back(st.get<double>());
      else complete = false;
      if (++si == seeds.size()) {
        si = 0;
        ++vi;
      }
    }
    if (complete && !statistic.empty()) {
      json medians = json::array();
      for (const auto& s : stats) {
        medians.push_back(median(Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()))));
      }
      vj["median_over_seeds"] = medians;
      if (values.size() >= 3) {
        std::vector<std::pair<double, double>> pairs;
        for (std::size_t i = 0; i < values.size(); ++i) pairs.emplace_back(values[i], medians[i].get<double>());
        vj["spearman_of_medians"] = monotone_trend(pairs);
        json per_seed = json::array();
        for (std::size_t k = 0; k < seeds.size(); ++k) {
          std::vector<std::pair<double, double>> ps;
          for (std::size_t i = 0; i < values.size(); ++i) ps.emplace_back(values[i], stats[i][k]);
          per_seed.push_back({{"seed", seeds[k]}, {"spearman", monotone_trend(ps)}});
        }
        vj["spearman_per_seed"] = per_seed;
      }
    }
    summary["variants"].push_back(vj);
  }
  summary["failed"] = failed;
  write_json(root / "sweep.json", summary);
  return summary;
}

}  // namespace pift
