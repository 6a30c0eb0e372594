#include "mmmcmc/core.hpp"

#include <cmath>

namespace mmmcmc {

double RcDomain::wrap(double z) const {
  if (!periodic) return z;
  const double len = length();
  double t = std::fmod(z - lo, len);
  if (t < 0.0) t += len;
  double w = lo + t;
  if (w == lo) w = hi;  // (lo, hi] convention
  return w;
}

double RcDomain::signed_diff(double a, double b) const {
  double d = a - b;
  if (!periodic) return d;
  const double len = length();
  d -= len * std::round(d / len);
  return d;
}

const FreeEnergy& Model::free_energy(const std::string& name) const {
  auto it = free_energies.find(name);
  if (it == free_energies.end())
    throw ConfigError("model '" + id + "' has no free energy named '" + name +
                      "'");
  return it->second;
}

const Reconstruction& Model::reconstruction(const std::string& name) const {
  auto it = reconstructions.find(name);
  if (it == reconstructions.end())
    throw ConfigError("model '" + id + "' has no reconstruction named '" +
                      name + "'");
  return it->second;
}

double gibbs_log_density(const Model& model, const Vec& x, double beta) {
  const double v = model.potential(x);
  if (!std::isfinite(v)) return kNegInf;
  return -beta * v;
}

double free_energy_log_density(const FreeEnergy& fe, double z, double beta) {
  if (!fe.domain.contains(z)) return kNegInf;
  const double a = fe.value(z);
  if (!std::isfinite(a)) return kNegInf;
  return -beta * a;
}

double central_difference(const std::function<double(const Vec&)>& f, Vec x,
                          std::size_t i, double h) {
  x[i] += h;
  const double fp = f(x);
  x[i] -= 2.0 * h;
  const double fm = f(x);
  return (fp - fm) / (2.0 * h);
}

double max_gradient_error(const std::function<double(const Vec&)>& f,
                          const std::function<Vec(const Vec&)>& grad,
                          const std::vector<Vec>& states, double h) {
  double worst = 0.0;
  for (const Vec& x : states) {
    const Vec g = grad(x);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double fd = central_difference(f, x, i, h);
      const double scale = std::max(std::abs(g[i]), 1.0);
      worst = std::max(worst, std::abs(fd - g[i]) / scale);
    }
  }
  return worst;
}

}  // namespace mmmcmc
