#include "mmmcmc/reference.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

namespace mmmcmc {

namespace {

// 16-point Gauss-Legendre nodes/weights on [-1, 1] (positive half; the rule
// is symmetric).
constexpr int kGlPoints = 8;
constexpr double kGlNode[kGlPoints] = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
    0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
    0.9445750230732326, 0.9894009349916499};
constexpr double kGlWeight[kGlPoints] = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
    0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
    0.0622535239386479, 0.0271524594117541};

struct QuadSums {
  double integral = 0.0;
  double abs_mass = 0.0;  // integral of |f|, used as the convergence scale
};

QuadSums composite_gl16(const std::function<double(double)>& f, double a,
                        double b, int panels) {
  const double h = (b - a) / panels;
  QuadSums out;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    const double mid = lo + 0.5 * h;
    const double half = 0.5 * h;
    double sum = 0.0, abs_sum = 0.0;
    for (int i = 0; i < kGlPoints; ++i) {
      const double dx = half * kGlNode[i];
      const double fl = f(mid - dx);
      const double fr = f(mid + dx);
      sum += kGlWeight[i] * (fl + fr);
      abs_sum += kGlWeight[i] * (std::abs(fl) + std::abs(fr));
    }
    out.integral += half * sum;
    out.abs_mass += half * abs_sum;
  }
  return out;
}

constexpr std::uint32_t kCacheMagic = 0x4e4c414d;  // "MALN"
constexpr std::uint32_t kCacheVersion = 1;

template <class T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
bool read_pod(std::istream& is, T& v) {
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return static_cast<bool>(is);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol, int max_refine) {
  if (!(b > a)) throw ConfigError("integrate: empty interval");
  int panels = 4;
  double prev = composite_gl16(f, a, b, panels).integral;
  for (int r = 0; r < max_refine; ++r) {
    panels *= 2;
    const QuadSums cur = composite_gl16(f, a, b, panels);
    // |f|-mass as the scale keeps cancelling integrands (true value near 0)
    // from chasing an unreachable pure-relative target
    const double scale =
        std::max({std::abs(cur.integral), cur.abs_mass, 1e-300});
    if (std::abs(cur.integral - prev) <= rel_tol * scale) return cur.integral;
    prev = cur.integral;
  }
  throw NumericalError("integrate: no convergence after max refinements");
}

double normalize_free_energy(const FreeEnergy& fe, double beta, double lo,
                             double hi, double rel_tol) {
  return integrate([&](double z) { return std::exp(-beta * fe.value(z)); }, lo,
                   hi, rel_tol);
}

double normalize_free_energy(const FreeEnergy& fe, double beta,
                             double rel_tol) {
  return normalize_free_energy(fe, beta, fe.domain.lo, fe.domain.hi, rel_tol);
}

double reference_moment(const std::function<double(double)>& f,
                        const FreeEnergy& fe, double beta, double rel_tol) {
  const double z_a = normalize_free_energy(fe, beta, rel_tol);
  const double num = integrate(
      [&](double z) { return f(z) * std::exp(-beta * fe.value(z)); },
      fe.domain.lo, fe.domain.hi, rel_tol);
  return num / z_a;
}

double n_lambda_max_spacing(double lambda, double beta) {
  return 0.25 / std::sqrt(lambda * beta);
}

NLambdaTable NLambdaTable::build(const std::string& model_id,
                                 const FreeEnergy& mu0, double lambda,
                                 double beta, std::uint32_t nodes,
                                 double rel_tol) {
  if (lambda <= 0.0) throw ConfigError("n_lambda_table: lambda must be > 0");
  const RcDomain dom = mu0.domain;
  const double len = dom.length();
  const double max_spacing = n_lambda_max_spacing(lambda, beta);

  std::uint32_t n;
  if (dom.periodic) {
    n = nodes ? nodes
              : static_cast<std::uint32_t>(std::ceil(len / max_spacing));
    n = std::max<std::uint32_t>(n, 8);
    if (len / n > max_spacing)
      throw ConfigError(
          "n_lambda_table: grid too coarse relative to the kernel width");
  } else {
    n = nodes ? nodes
              : static_cast<std::uint32_t>(std::ceil(len / max_spacing)) + 1;
    n = std::max<std::uint32_t>(n, 8);
    if (len / (n - 1) > max_spacing)
      throw ConfigError(
          "n_lambda_table: grid too coarse relative to the kernel width");
  }

  NLambdaTable t;
  t.domain_ = dom;
  t.spacing_ = dom.periodic ? len / n : len / (n - 1);
  t.key_ = NLambdaKey{model_id, lambda, beta, dom.lo, dom.hi, n, dom.periodic};
  t.values_.resize(n);

  const double z_a = normalize_free_energy(mu0, beta, rel_tol);
  const double lb = lambda * beta;
  const double width = 1.0 / std::sqrt(lb);
  const double kernel_norm = std::sqrt(lb / (2.0 * std::numbers::pi));
  const double window = 10.0 * width;

  for (std::uint32_t i = 0; i < n; ++i) {
    const double z = dom.lo + i * t.spacing_;
    double v;
    if (window < 0.5 * len) {
      // Narrow kernel: integrate its support; wrapping the free-energy
      // argument covers the plus/minus one period images.
      double a = z - window;
      double b = z + window;
      if (!dom.periodic) {
        a = std::max(a, dom.lo);
        b = std::min(b, dom.hi);
      }
      v = integrate(
          [&](double u) {
            const double d = u - z;
            const double ue = dom.periodic ? dom.wrap(u) : u;
            return kernel_norm * std::exp(-0.5 * lb * d * d) *
                   std::exp(-beta * mu0.value(ue));
          },
          a, b, rel_tol);
    } else {
      v = integrate(
          [&](double u) {
            double kernel = 0.0;
            if (dom.periodic) {
              for (int k = -1; k <= 1; ++k) {
                const double d = u - z + k * len;
                kernel += std::exp(-0.5 * lb * d * d);
              }
            } else {
              const double d = u - z;
              kernel = std::exp(-0.5 * lb * d * d);
            }
            return kernel_norm * kernel * std::exp(-beta * mu0.value(u));
          },
          dom.lo, dom.hi, rel_tol);
    }
    t.values_[i] = v / z_a;
  }
  return t;
}

double NLambdaTable::value(double z) const {
  const std::size_t n = values_.size();
  double t;
  if (domain_.periodic) {
    t = (domain_.wrap(z) - domain_.lo) / spacing_;
  } else {
    const double zc = std::clamp(z, domain_.lo, domain_.hi);
    t = (zc - domain_.lo) / spacing_;
  }

  // Cubic Lagrange on the 4-node stencil around t.
  auto cubic = [](double u, double v0, double v1, double v2, double v3) {
    const double l0 = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0;
    const double l1 = u * (u - 2.0) * (u - 3.0) / 2.0;
    const double l2 = -u * (u - 1.0) * (u - 3.0) / 2.0;
    const double l3 = u * (u - 1.0) * (u - 2.0) / 6.0;
    return l0 * v0 + l1 * v1 + l2 * v2 + l3 * v3;
  };

  if (domain_.periodic) {
    const auto i = static_cast<std::ptrdiff_t>(std::floor(t));
    const double u = t - (i - 1);
    auto at = [&](std::ptrdiff_t j) {
      return values_[static_cast<std::size_t>(((j % static_cast<std::ptrdiff_t>(n)) +
                                               static_cast<std::ptrdiff_t>(n)) %
                                              static_cast<std::ptrdiff_t>(n))];
    };
    return cubic(u, at(i - 1), at(i), at(i + 1), at(i + 2));
  }

  auto i = static_cast<std::ptrdiff_t>(std::floor(t));
  i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(n) - 2);
  const auto base =
      std::clamp<std::ptrdiff_t>(i - 1, 0, static_cast<std::ptrdiff_t>(n) - 4);
  const double u = t - base;
  return cubic(u, values_[base], values_[base + 1], values_[base + 2],
               values_[base + 3]);
}

double NLambdaTable::log_value(double z) const {
  double v = value(z);
  if (v <= 0.0) {
    // Cubic undershoot in a steep tail; fall back to the nearest node.
    const double t = (domain_.wrap(z) - domain_.lo) / spacing_;
    const auto i = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(t)), 0, values_.size() - 1);
    v = values_[i];
    if (v <= 0.0)
      throw NumericalError("n_lambda_table: non-positive tabulated value");
  }
  return std::log(v);
}

void NLambdaTable::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot open cache file for writing: " +
                             path.string());
  write_pod(os, kCacheMagic);
  write_pod(os, kCacheVersion);
  const auto id_len = static_cast<std::uint32_t>(key_.model_id.size());
  write_pod(os, id_len);
  os.write(key_.model_id.data(), id_len);
  write_pod(os, key_.lambda);
  write_pod(os, key_.beta);
  write_pod(os, key_.lo);
  write_pod(os, key_.hi);
  write_pod(os, key_.nodes);
  const std::uint8_t periodic = key_.periodic ? 1 : 0;
  write_pod(os, periodic);
  write_pod(os, spacing_);
  os.write(reinterpret_cast<const char*>(values_.data()),
           static_cast<std::streamsize>(values_.size() * sizeof(double)));
  if (!os) throw ConfigError("short write to cache file: " + path.string());
}

std::optional<NLambdaTable> NLambdaTable::load(
    const std::filesystem::path& path, const NLambdaKey& expected) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return std::nullopt;
  std::uint32_t magic = 0, version = 0, id_len = 0;
  if (!read_pod(is, magic) || magic != kCacheMagic) return std::nullopt;
  if (!read_pod(is, version) || version != kCacheVersion) return std::nullopt;
  if (!read_pod(is, id_len) || id_len > 4096) return std::nullopt;

  NLambdaTable t;
  t.key_.model_id.resize(id_len);
  is.read(t.key_.model_id.data(), id_len);
  std::uint8_t periodic = 0;
  if (!read_pod(is, t.key_.lambda) || !read_pod(is, t.key_.beta) ||
      !read_pod(is, t.key_.lo) || !read_pod(is, t.key_.hi) ||
      !read_pod(is, t.key_.nodes) || !read_pod(is, periodic) ||
      !read_pod(is, t.spacing_))
    return std::nullopt;
  t.key_.periodic = periodic != 0;
  if (!(t.key_ == expected)) return std::nullopt;

  t.domain_ = RcDomain{t.key_.lo, t.key_.hi, t.key_.periodic};
  t.values_.resize(t.key_.nodes);
  is.read(reinterpret_cast<char*>(t.values_.data()),
          static_cast<std::streamsize>(t.values_.size() * sizeof(double)));
  if (!is) return std::nullopt;
  return t;
}

std::vector<double> brute_force_stationary(
    const std::vector<double>& transition_row_major, std::size_t n) {
  if (transition_row_major.size() != n * n)
    throw ConfigError("brute_force_stationary: matrix size mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += transition_row_major[i * n + j];
    if (std::abs(row - 1.0) > 1e-9)
      throw NumericalError(
          "brute_force_stationary: non-stochastic row (assembly error)");
  }

  std::vector<double> pi(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n);
  for (int iter = 0; iter < 200000; ++iter) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = pi[i];
      if (w == 0.0) continue;
      const double* row = &transition_row_major[i * n];
      for (std::size_t j = 0; j < n; ++j) next[j] += w * row[j];
    }
    double mass = 0.0;
    for (double v : next) mass += v;
    for (double& v : next) v /= mass;
    double residual = 0.0;
    for (std::size_t j = 0; j < n; ++j) residual += std::abs(next[j] - pi[j]);
    pi.swap(next);
    if (residual < 1e-12) return pi;
  }
  throw NumericalError("brute_force_stationary: power iteration stalled");
}

}  // namespace mmmcmc
