#include "wharm/divergences.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "wharm/simd.hpp"

namespace wharm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

std::string format_alpha(double alpha) {
  std::ostringstream os;
  os.precision(15);
  os << alpha;
  return os.str();
}

}  // namespace

std::vector<FDivergenceSpec> builtin_specs() {
  std::vector<FDivergenceSpec> specs;
  specs.push_back({"chi2", [](double t) { return (t - 1.0) * (t - 1.0); },
                   [](double t) { return 2.0 * (t - 1.0); }, 1.0});
  specs.push_back({"tv", [](double t) { return std::abs(t - 1.0) / 2.0; },
                   [](double t) { return sign(t - 1.0) / 2.0; }, 0.5});
  specs.push_back({"kl", [](double t) { return t == 0.0 ? 0.0 : t * std::log(t); },
                   [](double t) { return std::log(t) + 1.0; }, 0.0});
  specs.push_back({"reverse_kl", [](double t) { return -std::log(t); },
                   [](double t) { return -1.0 / t; }, kInf});
  specs.push_back({"hellinger2",
                   [](double t) {
                     const double r = std::sqrt(t) - 1.0;
                     return r * r / 2.0;
                   },
                   [](double t) { return (1.0 - 1.0 / std::sqrt(t)) / 2.0; }, 0.5});
  return specs;
}

FDivergenceSpec renyi_generator(double alpha) {
  if (!(alpha >= 1.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("renyi generator requires a finite alpha >= 1");
  }
  return {"renyi_" + format_alpha(alpha),
          [alpha](double t) { return std::pow(std::abs(t - 1.0), alpha); },
          [alpha](double t) {
            const double d = t - 1.0;
            if (d == 0.0) return 0.0;  // midpoint when alpha == 1
            return alpha * std::pow(std::abs(d), alpha - 1.0) * sign(d);
          },
          1.0};
}

std::vector<std::string> builtin_spec_names() {
  std::vector<std::string> names;
  for (const auto& s : builtin_specs()) names.push_back(s.name);
  return names;
}

FDivergenceSpec spec_by_name(std::string_view name) {
  for (auto& s : builtin_specs()) {
    if (s.name == name) return s;
  }
  constexpr std::string_view prefix = "renyi_";
  if (name.starts_with(prefix)) {
    const std::string_view tail = name.substr(prefix.size());
    double alpha = 0.0;
    const auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), alpha);
    if (ec == std::errc() && ptr == tail.data() + tail.size() && !tail.empty()) {
      return renyi_generator(alpha);
    }
  }
  std::string msg = "unknown divergence '" + std::string(name) + "'; valid names:";
  for (const auto& n : builtin_spec_names()) msg += " " + n;
  msg += " renyi_<alpha> (alpha >= 1)";
  throw std::invalid_argument(msg);
}

WeightVector WeightVector::normalized(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("WeightVector: empty");
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("WeightVector: entries must be finite and non-negative");
    }
  }
  const double total = simd::sum(values);
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("WeightVector: weights are not normalized");
  }
  return WeightVector(std::move(values));
}

double logsumexp(std::span<const double> log_w) {
  const double m = simd::max(log_w);
  if (m == -kInf) return -kInf;
  double acc = 0.0;
  for (double v : log_w) acc += std::exp(v - m);
  return m + std::log(acc);
}

WeightVector normalize_log_weights(std::span<const double> log_w) {
  if (log_w.empty()) throw std::invalid_argument("normalize_log_weights: empty input");
  for (double v : log_w) {
    if (std::isnan(v) || v == kInf) {
      throw std::invalid_argument("normalize_log_weights: NaN or +inf log-weight");
    }
  }
  const double m = simd::max(log_w);
  if (m == -kInf) throw std::invalid_argument("normalize_log_weights: all log-weights are -inf");
  std::vector<double> w(log_w.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(log_w[i] - m);
  const double total = simd::sum(w);
  for (double& v : w) v /= total;
  return WeightVector::normalized(std::move(w));
}

double empirical_f_divergence(const FDivergenceSpec& spec, const WeightVector& w) {
  const auto m = static_cast<double>(w.size());
  double acc = 0.0;
  for (double v : w.values()) acc += spec(m * v);
  return acc / m;
}

double ess(const WeightVector& w) {
  const double s = simd::sum_squares(w.values());
  if (!(s > 0.0)) throw std::invalid_argument("ess: all weights are zero");
  return 1.0 / s;
}

double theoretical_ess(double chi2_value, std::size_t m) {
  if (!(chi2_value >= 0.0)) throw std::invalid_argument("theoretical_ess: negative chi2");
  return static_cast<double>(m) / (chi2_value + 1.0);
}

}  // namespace wharm
