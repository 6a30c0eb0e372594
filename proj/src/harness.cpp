#include "mmmcmc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include "mmmcmc/config.hpp"
#include "mmmcmc/molecules.hpp"

namespace mmmcmc {

namespace {

std::string fmt_double(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double default_mala_dt(const Model& model) {
  if (model.id == "butane") return 1.0 / ButaneParams{}.k_b;
  return model.epsilon;
}

double default_inner_dt(const Model& model, double lambda) {
  if (model.id == "butane") return 0.4 / lambda;
  return std::min(model.epsilon, 1.0 / lambda);
}

ProposalKernel make_kernel(const Model& model, const SamplerSpec& spec) {
  ProposalKernel k;
  k.kind = spec.kernel.kind;
  k.step = spec.kernel.dt;
  k.domain = model.rc_domain;
  if (k.kind == KernelKind::langevin)
    k.drift = &model.free_energy(spec.free_energy);
  if (k.step <= 0.0)
    throw ConfigError("sampler '" + spec.name + "': kernel dt must be > 0");
  return k;
}

std::map<std::string, double> estimates_of(const ChainRecord& rec) {
  const auto& s = rec.rc_samples;
  double mean = 0.0;
  for (double v : s) mean += v;
  mean /= static_cast<double>(s.size());
  double var = 0.0;
  for (double v : s) var += (v - mean) * (v - mean);
  var /= static_cast<double>(s.size());
  return {{"mean_rc", mean}, {"var_rc", var}};
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return kNaN;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

void run_tasks(std::size_t count, unsigned threads,
               const std::function<void(std::size_t)>& task) {
  unsigned pool_size = threads ? threads : std::thread::hardware_concurrency();
  pool_size = std::max(1u, std::min<unsigned>(pool_size, count));

  if (pool_size == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(pool_size);
  for (unsigned t = 0; t < pool_size; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= count) return;
          task(i);
        }
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

double mse(std::span<const double> estimates, double reference) {
  if (estimates.empty())
    throw std::invalid_argument("mse: need at least one estimate");
  double s = 0.0;
  for (double e : estimates) s += (e - reference) * (e - reference);
  return s / static_cast<double>(estimates.size());
}

double efficiency_gain(double mse_base, double mse_new, double t_base,
                       double t_new) {
  if (mse_base < 0.0 || mse_new < 0.0 || t_base <= 0.0 || t_new <= 0.0)
    throw std::invalid_argument("efficiency_gain: inputs must be positive");
  if (mse_new == 0.0) return std::numeric_limits<double>::infinity();
  return (mse_base / mse_new) * (t_base / t_new);
}

std::vector<double> kde(std::span<const double> samples, double bandwidth,
                        std::span<const double> grid, const RcDomain& domain) {
  if (bandwidth <= 0.0) throw ConfigError("kde: bandwidth must be > 0");
  if (samples.empty()) throw ConfigError("kde: need at least one sample");

  const double len = domain.length();
  const double norm =
      1.0 / (static_cast<double>(samples.size()) * bandwidth *
             std::sqrt(2.0 * std::numbers::pi));
  const double cutoff = 8.0 * bandwidth;

  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double acc = 0.0;
    for (double s : samples) {
      double d = grid[g] - s;
      if (domain.periodic) d = domain.signed_diff(grid[g], s);
      if (std::abs(d) > cutoff && (!domain.periodic || len - std::abs(d) > cutoff))
        continue;
      const double u = d / bandwidth;
      acc += std::exp(-0.5 * u * u);
      if (domain.periodic) {
        // plus/minus one period images of the sample
        for (double shift : {-len, len}) {
          const double ui = (d + shift) / bandwidth;
          if (std::abs(ui) <= 8.0) acc += std::exp(-0.5 * ui * ui);
        }
      }
    }
    out[g] = norm * acc;
  }
  return out;
}

std::vector<double> rc_histogram(std::span<const double> samples,
                                 std::size_t bins, const RcDomain& domain) {
  if (bins == 0) throw ConfigError("rc_histogram: bins must be > 0");
  std::vector<double> out(bins, 0.0);
  const double w = domain.length() / static_cast<double>(bins);
  for (double s : samples) {
    const double z = domain.wrap(s);
    auto idx = static_cast<std::ptrdiff_t>((z - domain.lo) / w);
    idx = std::clamp<std::ptrdiff_t>(idx, 0,
                                     static_cast<std::ptrdiff_t>(bins) - 1);
    out[static_cast<std::size_t>(idx)] += 1.0;
  }
  for (double& v : out) v /= static_cast<double>(samples.size());
  return out;
}

std::vector<double> rc_histogram_reference(const FreeEnergy& fe, double beta,
                                           std::size_t bins) {
  const double w = fe.domain.length() / static_cast<double>(bins);
  std::vector<double> out(bins);
  double total = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    out[b] = integrate(
        [&](double z) { return std::exp(-beta * fe.value(z)); },
        fe.domain.lo + static_cast<double>(b) * w,
        fe.domain.lo + static_cast<double>(b + 1) * w, 1e-10);
    total += out[b];
  }
  for (double& v : out) v /= total;
  return out;
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("l1_distance: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

Model make_model(const ModelConfig& cfg) {
  Model m;
  if (cfg.id == "threeatom") {
    m = three_atom_model(cfg.epsilon, cfg.beta);
  } else if (cfg.id == "butane") {
    m = butane_model(cfg.beta);
  } else {
    throw ConfigError("unknown model id '" + cfg.id + "'");
  }
  if (cfg.debug_broken_gradient) {
    auto inner = m.potential_gradient;
    m.potential_gradient = [inner](const Vec& x) {
      Vec g = inner(x);
      g[0] = g[0] * 1.01 + 1e-3;
      return g;
    };
  }
  return m;
}

std::uint64_t replication_seed(const ExperimentConfig& cfg,
                               std::size_t sampler_index,
                               std::size_t replication,
                               std::size_t scan_index) {
  return derive_seed(cfg.seed, sampler_index, replication, scan_index);
}

NLambdaTable build_n_lambda(const Model& model, double lambda) {
  return NLambdaTable::build(model.id, model.free_energy("A_exact"), lambda,
                             model.beta);
}

double resolve_lambda(const Model& model, const SamplerSpec& spec) {
  if (!spec.lambda_auto) return spec.lambda;
  if (model.epsilon <= 0.0)
    throw ConfigError("sampler '" + spec.name +
                      "': lambda \"auto\" needs a model with a time-scale "
                      "parameter (threeatom)");
  return 1.0 / model.epsilon;
}

ChainRecord run_sampler_chain(const Model& model, const ExperimentConfig& cfg,
                              const SamplerSpec& spec,
                              const NLambdaTable* table, std::uint64_t seed,
                              const ChainOptions& opts) {
  RngEngine rng = make_engine(seed);
  const double beta = cfg.model.beta;

  switch (spec.type) {
    case SamplerType::mala: {
      const double dt = spec.dt.value_or(default_mala_dt(model));
      return run_mala_chain(model, model.initial_state, cfg.steps, dt, beta,
                            rng, opts);
    }
    case SamplerType::mm_direct: {
      DirectConfig dc;
      dc.kernel = make_kernel(model, spec);
      dc.mu0_bar = &model.free_energy(spec.free_energy);
      dc.recon = &model.reconstruction(spec.reconstruction);
      dc.beta = beta;
      return run_direct_chain(model, dc, model.initial_state, cfg.steps, rng,
                              opts);
    }
    case SamplerType::mm_indirect: {
      const double lambda = resolve_lambda(model, spec);
      std::unique_ptr<NLambdaTable> owned;
      if (table == nullptr) {
        owned = std::make_unique<NLambdaTable>(build_n_lambda(model, lambda));
        table = owned.get();
      }
      IndirectConfig ic;
      ic.kernel = make_kernel(model, spec);
      ic.mu0_bar = &model.free_energy(spec.free_energy);
      ic.lambda = lambda;
      ic.k_steps = spec.k_steps;
      ic.inner_dt = spec.inner_dt.value_or(default_inner_dt(model, lambda));
      ic.n_lambda = table;
      ic.beta = beta;
      ic.mh_correction = spec.mh_correction;
      const ExtendedState s0{model.initial_state,
                             model.rc(model.initial_state)};
      return run_indirect_chain(model, ic, s0, cfg.steps, rng, opts);
    }
    case SamplerType::macro_only: {
      const ProposalKernel kernel = make_kernel(model, spec);
      const FreeEnergy& fe = model.free_energy(spec.free_energy);
      return run_macro_chain(kernel, fe, model.rc(model.initial_state),
                             cfg.steps, beta, rng, opts);
    }
  }
  throw std::logic_error("unreachable sampler type");
}

GainReport run_experiment(const ExperimentConfig& cfg, unsigned threads,
                          std::size_t scan_index) {
  const ValidationReport vr = validate_config(cfg);
  if (!vr.ok()) {
    std::string msg = "invalid experiment config:";
    for (const auto& e : vr.errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }

  const Model model = make_model(cfg.model);

  // N_lambda tables, one per distinct bias stiffness, built outside the
  // timed sampling loops.
  std::map<double, std::unique_ptr<NLambdaTable>> tables;
  for (const SamplerSpec& spec : cfg.samplers) {
    if (spec.type != SamplerType::mm_indirect) continue;
    const double lambda = resolve_lambda(model, spec);
    if (!tables.count(lambda))
      tables.emplace(lambda,
                     std::make_unique<NLambdaTable>(build_n_lambda(model, lambda)));
  }

  GainReport report;
  report.name = cfg.name;
  report.config_hash = config_hash(cfg);

  const FreeEnergy& a_exact = model.free_energy("A_exact");
  const double ref_mean =
      reference_moment([](double z) { return z; }, a_exact, cfg.model.beta);
  const double ref_var = reference_moment(
      [ref_mean](double z) { return (z - ref_mean) * (z - ref_mean); },
      a_exact, cfg.model.beta);
  report.reference["mean_rc"] = ref_mean;
  report.reference["var_rc"] = ref_var;

  const ChainOptions opts{cfg.burn_in, cfg.store_stride, cfg.store_states};
  const std::size_t n_samplers = cfg.samplers.size();
  const std::size_t reps = cfg.replications;
  std::vector<std::vector<ReplicationResult>> results(n_samplers);
  for (auto& r : results) r.resize(reps);

  run_tasks(n_samplers * reps, threads, [&](std::size_t k) {
    const std::size_t si = k / reps;
    const std::size_t rep = k % reps;
    const SamplerSpec& spec = cfg.samplers[si];
    const NLambdaTable* table = nullptr;
    if (spec.type == SamplerType::mm_indirect)
      table = tables.at(resolve_lambda(model, spec)).get();
    const ChainRecord rec =
        run_sampler_chain(model, cfg, spec, table,
                          replication_seed(cfg, si, rep, scan_index), opts);
    ReplicationResult rr;
    rr.estimates = estimates_of(rec);
    rr.macro_acc = rec.macro_rate();
    rr.micro_acc = rec.micro_rate();
    rr.seconds = rec.seconds;
    results[si][rep] = std::move(rr);
  });

  for (std::size_t si = 0; si < n_samplers; ++si) {
    MethodReport mr;
    mr.name = cfg.samplers[si].name;
    mr.replications = std::move(results[si]);

    std::vector<double> macro, micro, secs;
    for (const auto& rr : mr.replications) {
      if (!std::isnan(rr.macro_acc)) macro.push_back(rr.macro_acc);
      if (!std::isnan(rr.micro_acc)) micro.push_back(rr.micro_acc);
      secs.push_back(std::max(rr.seconds, 1e-9));
    }
    mr.macro_acc = mean_of(macro);
    mr.micro_acc = mean_of(micro);
    mr.mean_runtime_s = mean_of(secs);

    for (const std::string& f : cfg.functionals) {
      std::vector<double> est;
      est.reserve(reps);
      for (const auto& rr : mr.replications)
        est.push_back(rr.estimates.at(f));
      mr.mse[f] = mse(est, report.reference.at(f));
    }
    report.methods.push_back(std::move(mr));
  }

  // Gain ratios of every method against the baseline (samplers[0]).
  const MethodReport& base = report.methods.front();
  for (std::size_t si = 1; si < report.methods.size(); ++si) {
    MethodReport& mr = report.methods[si];
    mr.runtime_gain = base.mean_runtime_s / mr.mean_runtime_s;
    for (const std::string& f : cfg.functionals) {
      const double mb = base.mse.at(f);
      const double mm = mr.mse.at(f);
      mr.variance_gain[f] =
          mm == 0.0 ? std::numeric_limits<double>::infinity() : mb / mm;
      mr.total_gain[f] = mr.variance_gain[f] * mr.runtime_gain;
    }
  }
  return report;
}

std::vector<GainReport> scan(const ExperimentConfig& cfg,
                             const std::string& axis,
                             const std::vector<double>& values,
                             unsigned threads) {
  if (values.empty()) throw ConfigError("scan: values must be non-empty");
  std::vector<GainReport> reports;
  reports.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    ExperimentConfig c = cfg;
    if (axis == "epsilon") {
      if (c.model.id != "threeatom")
        throw ConfigError("scan axis 'epsilon' applies to the threeatom model only");
      c.model.epsilon = values[i];
    } else if (axis == "lambda") {
      bool any = false;
      for (SamplerSpec& s : c.samplers) {
        if (s.type == SamplerType::mm_indirect) {
          s.lambda = values[i];
          s.lambda_auto = false;
          s.inner_dt.reset();  // re-derive the stability rule per lambda
          any = true;
        }
      }
      if (!any)
        throw ConfigError("scan axis 'lambda' requires an mm-indirect sampler");
    } else {
      throw ConfigError("unknown scan axis '" + axis + "'");
    }
    c.name = cfg.name + "[" + axis + "=" + fmt_double(values[i]) + "]";
    reports.push_back(run_experiment(c, threads, i));
  }
  return reports;
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string canon = config_to_json(cfg);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

void write_replications_csv(const GainReport& report, std::ostream& os) {
  os << "config_hash,sampler,replication,mean_rc,var_rc,macro_acceptance,"
        "micro_acceptance,runtime_seconds\n";
  for (const MethodReport& mr : report.methods) {
    for (std::size_t r = 0; r < mr.replications.size(); ++r) {
      const ReplicationResult& rr = mr.replications[r];
      os << report.config_hash << ',' << mr.name << ',' << r << ','
         << fmt_double(rr.estimates.at("mean_rc")) << ','
         << fmt_double(rr.estimates.at("var_rc")) << ','
         << fmt_double(rr.macro_acc) << ',' << fmt_double(rr.micro_acc) << ','
         << fmt_double(rr.seconds) << '\n';
    }
  }
}

void write_summary(const GainReport& report, std::ostream& os) {
  os << "name=" << report.name << '\n';
  os << "config_hash=" << report.config_hash << '\n';
  for (const auto& [f, v] : report.reference)
    os << "reference." << f << '=' << fmt_double(v) << '\n';
  for (const MethodReport& mr : report.methods) {
    os << mr.name << ".macro_acceptance=" << fmt_double(mr.macro_acc) << '\n';
    os << mr.name << ".micro_acceptance=" << fmt_double(mr.micro_acc) << '\n';
    os << mr.name << ".mean_runtime_seconds=" << fmt_double(mr.mean_runtime_s)
       << '\n';
    for (const auto& [f, v] : mr.mse)
      os << mr.name << ".mse." << f << '=' << fmt_double(v) << '\n';
    if (!std::isnan(mr.runtime_gain)) {
      os << mr.name << ".runtime_gain=" << fmt_double(mr.runtime_gain) << '\n';
      for (const auto& [f, v] : mr.variance_gain)
        os << mr.name << ".variance_gain." << f << '=' << fmt_double(v) << '\n';
      for (const auto& [f, v] : mr.total_gain)
        os << mr.name << ".total_gain." << f << '=' << fmt_double(v) << '\n';
    }
  }
}

void write_gains_csv(const std::string& axis, std::span<const double> values,
                     std::span<const GainReport> reports, std::ostream& os) {
  os << "axis,value,sampler,macro_acceptance,micro_acceptance,"
        "mean_runtime_seconds,runtime_gain,variance_gain_mean_rc,"
        "variance_gain_var_rc,total_gain_mean_rc,total_gain_var_rc\n";
  auto field = [](const std::map<std::string, double>& m,
                  const std::string& key) {
    auto it = m.find(key);
    return it == m.end() ? std::string() : fmt_double(it->second);
  };
  for (std::size_t i = 0; i < reports.size(); ++i) {
    for (const MethodReport& mr : reports[i].methods) {
      os << axis << ',' << fmt_double(values[i]) << ',' << mr.name << ','
         << fmt_double(mr.macro_acc) << ',' << fmt_double(mr.micro_acc) << ','
         << fmt_double(mr.mean_runtime_s) << ',' << fmt_double(mr.runtime_gain)
         << ',' << field(mr.variance_gain, "mean_rc") << ','
         << field(mr.variance_gain, "var_rc") << ','
         << field(mr.total_gain, "mean_rc") << ','
         << field(mr.total_gain, "var_rc") << '\n';
    }
  }
}

void write_kde_csv(std::span<const double> grid,
                   std::span<const double> density, std::ostream& os) {
  os << "z,density\n";
  for (std::size_t i = 0; i < grid.size(); ++i)
    os << fmt_double(grid[i]) << ',' << fmt_double(density[i]) << '\n';
}

}  // namespace mmmcmc
