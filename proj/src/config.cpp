#include "mmmcmc/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mmmcmc/molecules.hpp"

namespace mmmcmc {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& source, const std::string& what) {
  throw ConfigError(source + ": " + what);
}

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& context, const std::string& source) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key))
      fail(source, "unknown key '" + key + "' in " + context);
  }
}

double require_number(const json& obj, const std::string& key,
                      const std::string& context, const std::string& source) {
  if (!obj.contains(key))
    fail(source, "missing field '" + key + "' in " + context);
  if (!obj[key].is_number())
    fail(source, "field '" + key + "' in " + context + " must be a number");
  return obj[key].get<double>();
}

// A time step that is either a number or the string "auto".
std::optional<double> optional_dt(const json& obj, const std::string& key,
                                  const std::string& context,
                                  const std::string& source) {
  if (!obj.contains(key)) return std::nullopt;
  const json& v = obj[key];
  if (v.is_string()) {
    if (v.get<std::string>() == "auto") return std::nullopt;
    fail(source, "field '" + key + "' in " + context +
                     " must be a number or \"auto\"");
  }
  if (!v.is_number())
    fail(source, "field '" + key + "' in " + context +
                     " must be a number or \"auto\"");
  return v.get<double>();
}

SamplerType parse_sampler_type(const std::string& s, const std::string& ctx,
                               const std::string& source) {
  if (s == "mala") return SamplerType::mala;
  if (s == "mm-direct") return SamplerType::mm_direct;
  if (s == "mm-indirect") return SamplerType::mm_indirect;
  if (s == "macro-only") return SamplerType::macro_only;
  fail(source, "unknown sampler type '" + s + "' in " + ctx +
                   " (expected mala | mm-direct | mm-indirect | macro-only)");
}

KernelKind parse_kernel_kind(const std::string& s, const std::string& ctx,
                             const std::string& source) {
  if (s == "langevin") return KernelKind::langevin;
  if (s == "brownian") return KernelKind::brownian;
  fail(source, "unknown kernel type '" + s + "' in " + ctx +
                   " (expected langevin | brownian)");
}

SamplerSpec parse_sampler(const json& j, std::size_t index,
                          const std::string& source) {
  const std::string ctx = "samplers[" + std::to_string(index) + "]";
  if (!j.is_object()) fail(source, ctx + " must be an object");
  check_keys(j,
             {"name", "type", "dt", "kernel", "free_energy", "reconstruction",
              "lambda", "k_steps", "inner_dt", "mh_correction"},
             ctx, source);

  SamplerSpec s;
  if (!j.contains("type"))
    fail(source, "missing field 'type' in " + ctx);
  s.type = parse_sampler_type(j["type"].get<std::string>(), ctx, source);
  s.name = j.value("name", j["type"].get<std::string>());

  s.dt = optional_dt(j, "dt", ctx, source);
  if (j.contains("kernel")) {
    const json& k = j["kernel"];
    check_keys(k, {"type", "dt"}, ctx + ".kernel", source);
    if (!k.contains("type"))
      fail(source, "missing field 'type' in " + ctx + ".kernel");
    s.kernel.kind =
        parse_kernel_kind(k["type"].get<std::string>(), ctx, source);
    s.kernel.dt = require_number(k, "dt", ctx + ".kernel", source);
  }
  s.free_energy = j.value("free_energy", std::string("A_exact"));
  s.reconstruction = j.value("reconstruction", std::string("nu_exact"));
  if (j.contains("lambda")) {
    if (j["lambda"].is_string()) {
      if (j["lambda"].get<std::string>() != "auto")
        fail(source, "field 'lambda' in " + ctx +
                         " must be a number or \"auto\"");
      s.lambda_auto = true;
    } else {
      s.lambda = require_number(j, "lambda", ctx, source);
    }
  }
  s.k_steps = j.value("k_steps", 5);
  s.inner_dt = optional_dt(j, "inner_dt", ctx, source);
  s.mh_correction = j.value("mh_correction", true);

  const bool needs_kernel = s.type != SamplerType::mala;
  if (needs_kernel && !j.contains("kernel"))
    fail(source, "missing field 'kernel' in " + ctx);
  if (s.type == SamplerType::mm_indirect && !j.contains("lambda"))
    fail(source, "missing field 'lambda' in " + ctx +
                     " (required for mm-indirect samplers)");
  return s;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& source_name) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    for (std::size_t i = 0; i < upto; ++i)
      if (text[i] == '\n') ++line;
    fail(source_name + ":" + std::to_string(line), e.what());
  }
  if (!j.is_object()) fail(source_name, "top level must be an object");
  check_keys(j,
             {"name", "model", "samplers", "steps", "replications", "seed",
              "burn_in", "store_stride", "store_states", "functionals", "kde",
              "scan"},
             "top level", source_name);

  ExperimentConfig cfg;
  cfg.name = j.value("name", std::string("experiment"));

  if (!j.contains("model"))
    fail(source_name, "missing field 'model' in top level");
  const json& jm = j["model"];
  check_keys(jm, {"id", "epsilon", "beta", "debug_broken_gradient"}, "model",
             source_name);
  if (!jm.contains("id")) fail(source_name, "missing field 'id' in model");
  cfg.model.id = jm["id"].get<std::string>();
  if (cfg.model.id == "threeatom") {
    cfg.model.epsilon = require_number(jm, "epsilon", "model", source_name);
    cfg.model.beta = jm.value("beta", 1.0);
  } else if (cfg.model.id == "butane") {
    if (jm.contains("epsilon"))
      fail(source_name, "field 'epsilon' is not applicable to the butane model");
    cfg.model.epsilon = 0.0;
    cfg.model.beta = jm.value("beta", kButaneDefaultBeta);
  } else {
    fail(source_name, "unknown model id '" + cfg.model.id + "'");
  }
  cfg.model.debug_broken_gradient = jm.value("debug_broken_gradient", false);

  if (!j.contains("samplers") || !j["samplers"].is_array() ||
      j["samplers"].empty())
    fail(source_name, "'samplers' must be a non-empty array");
  for (std::size_t i = 0; i < j["samplers"].size(); ++i)
    cfg.samplers.push_back(parse_sampler(j["samplers"][i], i, source_name));

  if (!j.contains("steps"))
    fail(source_name, "missing field 'steps' in top level");
  cfg.steps = j["steps"].get<std::size_t>();
  cfg.replications = j.value("replications", std::size_t{1});
  cfg.seed = j.value("seed", std::uint64_t{0});
  cfg.burn_in = j.value("burn_in", std::size_t{0});
  cfg.store_stride = j.value("store_stride", std::size_t{1});
  cfg.store_states = j.value("store_states", false);
  if (j.contains("functionals")) {
    cfg.functionals.clear();
    for (const auto& f : j["functionals"])
      cfg.functionals.push_back(f.get<std::string>());
  }
  if (j.contains("kde")) {
    const json& k = j["kde"];
    check_keys(k, {"bandwidth", "grid_points"}, "kde", source_name);
    cfg.kde_spec.bandwidth = k.value("bandwidth", 0.03);
    cfg.kde_spec.grid_points = k.value("grid_points", std::size_t{400});
  }
  if (j.contains("scan")) {
    const json& sc = j["scan"];
    check_keys(sc, {"axis", "values"}, "scan", source_name);
    ScanSpec spec;
    if (!sc.contains("axis"))
      fail(source_name, "missing field 'axis' in scan");
    spec.axis = sc["axis"].get<std::string>();
    if (!sc.contains("values") || !sc["values"].is_array() ||
        sc["values"].empty())
      fail(source_name, "'scan.values' must be a non-empty array");
    for (const auto& v : sc["values"]) spec.values.push_back(v.get<double>());
    cfg.scan_spec = std::move(spec);
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str(), path.filename().string());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["name"] = cfg.name;
  j["model"]["id"] = cfg.model.id;
  j["model"]["beta"] = cfg.model.beta;
  if (cfg.model.id == "threeatom") j["model"]["epsilon"] = cfg.model.epsilon;
  if (cfg.model.debug_broken_gradient)
    j["model"]["debug_broken_gradient"] = true;
  j["steps"] = cfg.steps;
  j["replications"] = cfg.replications;
  j["seed"] = cfg.seed;
  j["burn_in"] = cfg.burn_in;
  j["store_stride"] = cfg.store_stride;
  j["store_states"] = cfg.store_states;
  j["functionals"] = cfg.functionals;
  j["kde"]["bandwidth"] = cfg.kde_spec.bandwidth;
  j["kde"]["grid_points"] = cfg.kde_spec.grid_points;
  if (cfg.scan_spec) {
    j["scan"]["axis"] = cfg.scan_spec->axis;
    j["scan"]["values"] = cfg.scan_spec->values;
  }
  j["samplers"] = json::array();
  for (const SamplerSpec& s : cfg.samplers) {
    json js;
    js["name"] = s.name;
    switch (s.type) {
      case SamplerType::mala: js["type"] = "mala"; break;
      case SamplerType::mm_direct: js["type"] = "mm-direct"; break;
      case SamplerType::mm_indirect: js["type"] = "mm-indirect"; break;
      case SamplerType::macro_only: js["type"] = "macro-only"; break;
    }
    if (s.dt) js["dt"] = *s.dt;
    if (s.type != SamplerType::mala) {
      js["kernel"]["type"] =
          s.kernel.kind == KernelKind::langevin ? "langevin" : "brownian";
      js["kernel"]["dt"] = s.kernel.dt;
      js["free_energy"] = s.free_energy;
    }
    if (s.type == SamplerType::mm_direct)
      js["reconstruction"] = s.reconstruction;
    if (s.type == SamplerType::mm_indirect) {
      if (s.lambda_auto)
        js["lambda"] = "auto";
      else
        js["lambda"] = s.lambda;
      js["k_steps"] = s.k_steps;
      if (s.inner_dt) js["inner_dt"] = *s.inner_dt;
      js["mh_correction"] = s.mh_correction;
    }
    j["samplers"].push_back(std::move(js));
  }
  return j.dump();
}

ValidationReport validate_config(const ExperimentConfig& cfg) {
  ValidationReport r;
  auto err = [&](const std::string& m) { r.errors.push_back(m); };

  if (cfg.model.id != "threeatom" && cfg.model.id != "butane") {
    err("unknown model id '" + cfg.model.id + "'");
    return r;
  }
  if (cfg.model.beta <= 0.0) err("model.beta must be > 0");
  if (cfg.model.id == "threeatom" && cfg.model.epsilon <= 0.0)
    err("model.epsilon must be > 0");
  if (!r.errors.empty()) return r;

  const Model model = make_model(cfg.model);

  if (cfg.steps < 1) err("steps must be >= 1");
  if (cfg.replications < 1) err("replications must be >= 1");
  if (cfg.store_stride < 1) err("store_stride must be >= 1");
  if (cfg.burn_in >= cfg.steps) err("burn_in must be smaller than steps");
  if (cfg.samplers.empty()) err("at least one sampler is required");
  if (cfg.functionals.empty()) err("functionals must be non-empty");
  for (const std::string& f : cfg.functionals)
    if (f != "mean_rc" && f != "var_rc")
      err("unknown functional '" + f + "' (expected mean_rc | var_rc)");
  if (cfg.kde_spec.bandwidth <= 0.0) err("kde.bandwidth must be > 0");
  if (cfg.kde_spec.grid_points < 2) err("kde.grid_points must be >= 2");

  std::set<std::string> names;
  for (const SamplerSpec& s : cfg.samplers) {
    const std::string ctx = "sampler '" + s.name + "'";
    if (!names.insert(s.name).second) err("duplicate sampler name '" + s.name + "'");
    if (s.dt && *s.dt <= 0.0) err(ctx + ": dt must be > 0");

    const bool needs_kernel = s.type != SamplerType::mala;
    if (needs_kernel) {
      if (s.kernel.dt <= 0.0) err(ctx + ": kernel.dt must be > 0");
      if (!model.free_energies.count(s.free_energy))
        err(ctx + ": model has no free energy named '" + s.free_energy + "'");
    }
    if (s.type == SamplerType::mm_direct &&
        !model.reconstructions.count(s.reconstruction))
      err(ctx + ": model has no reconstruction named '" + s.reconstruction +
          "'");
    if (s.type == SamplerType::mm_indirect) {
      if (s.lambda_auto && cfg.model.id != "threeatom")
        err(ctx + ": lambda \"auto\" applies to the threeatom model only");
      if (!s.lambda_auto && s.lambda <= 0.0) err(ctx + ": lambda must be > 0");
      if (s.k_steps < 1) err(ctx + ": k_steps must be >= 1");
      if (s.inner_dt && *s.inner_dt <= 0.0) err(ctx + ": inner_dt must be > 0");
    }
  }

  if (cfg.scan_spec) {
    const ScanSpec& sc = *cfg.scan_spec;
    if (sc.axis != "epsilon" && sc.axis != "lambda")
      err("scan.axis must be epsilon | lambda");
    if (sc.axis == "epsilon" && cfg.model.id != "threeatom")
      err("scan axis 'epsilon' applies to the threeatom model only");
    if (sc.axis == "lambda") {
      bool any = false;
      for (const SamplerSpec& s : cfg.samplers)
        any |= s.type == SamplerType::mm_indirect;
      if (!any) err("scan axis 'lambda' requires an mm-indirect sampler");
    }
    for (double v : sc.values)
      if (v <= 0.0) err("scan.values must be positive");
  }
  return r;
}

ValidationReport validate_numerics(const ExperimentConfig& cfg,
                                   int spot_checks) {
  ValidationReport r = validate_config(cfg);
  if (!r.ok()) return r;

  const Model model = make_model(cfg.model);
  RngEngine rng = make_engine(derive_seed(cfg.seed, 0x76616c6964, 0, 0));

  // Random states away from singularities and seams.
  std::vector<Vec> states;
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int i = 0; i < spot_checks; ++i) {
    if (model.id == "threeatom") {
      const double sd = std::sqrt(model.epsilon / model.beta);
      const double xa = 1.0 + sd * normal(rng);
      const double rc = std::max(0.3, 1.0 + sd * normal(rng));
      const double th = 0.4 + (std::numbers::pi - 0.8) * uni(rng);
      states.push_back({xa, rc * std::cos(th), rc * std::sin(th)});
    } else {
      const ButaneParams p;
      const double sd_r = std::sqrt(1.0 / (model.beta * p.k_b));
      const double sd_a = std::sqrt(1.0 / (model.beta * p.k_a));
      Vec x(6);
      for (int c = 0; c < 3; ++c)
        x[c] = std::max(0.5 * p.r0, p.r0 + sd_r * normal(rng));
      for (int c = 3; c < 5; ++c) x[c] = p.theta0 + sd_a * normal(rng);
      x[5] = -3.0 + 6.0 * uni(rng);
      states.push_back(std::move(x));
    }
  }

  const double v_err =
      max_gradient_error(model.potential, model.potential_gradient, states);
  if (v_err > 1e-5)
    r.errors.push_back("gradient check failed: potential gradient deviates "
                       "from finite differences by " +
                       std::to_string(v_err));
  const double rc_err = max_gradient_error(
      [&](const Vec& x) { return model.rc(x); }, model.rc_gradient, states);
  if (rc_err > 1e-5)
    r.errors.push_back("gradient check failed: reaction-coordinate gradient "
                       "deviates from finite differences by " +
                       std::to_string(rc_err));

  for (const SamplerSpec& s : cfg.samplers) {
    if (s.type != SamplerType::mm_indirect) continue;
    const std::string ctx = "sampler '" + s.name + "'";
    const double lambda = resolve_lambda(model, s);
    const double max_spacing = n_lambda_max_spacing(lambda, cfg.model.beta);
    const double nodes = model.rc_domain.length() / max_spacing;
    if (nodes > 2e6)
      r.errors.push_back(ctx + ": n_lambda grid check failed: " +
                         std::to_string(static_cast<long long>(nodes)) +
                         " nodes needed; lambda too stiff for tabulation");
    const double inner = s.inner_dt.value_or(
        model.id == "butane" ? 0.4 / lambda
                             : std::min(model.epsilon, 1.0 / lambda));
    if (inner > 10.0 / lambda)
      r.warnings.push_back(ctx + ": inner_dt " + std::to_string(inner) +
                           " exceeds the 10/lambda stability heuristic");
  }
  return r;
}

}  // namespace mmmcmc
