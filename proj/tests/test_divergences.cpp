#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "wharm/divergences.hpp"

using namespace wharm;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

WeightVector random_weights(std::size_t m, std::mt19937_64& gen) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> v(m);
  double s = 0;
  for (auto& x : v) s += (x = e(gen));
  for (auto& x : v) x /= s;
  return WeightVector::normalized(v);
}

}  // namespace

TEST_CASE("builtin generators: names, order and f(1) = 0") {
  CHECK(builtin_spec_names() == std::vector<std::string>{"chi2", "tv", "kl", "reverse_kl", "hellinger2"});
  for (const auto& s : builtin_specs()) {
    CAPTURE(s.name);
    CHECK(s(1.0) == doctest::Approx(0.0));
    // Convexity on a grid.
    for (double t = 0.05; t < 5.0; t += 0.05) {
      CHECK(s(t) <= 0.5 * (s(t - 0.04) + s(t + 0.04)) + 1e-12);
    }
  }
  CHECK(spec_by_name("reverse_kl")(0.0) == kInf);
  CHECK(spec_by_name("kl")(0.0) == 0.0);
  CHECK(spec_by_name("tv")(0.0) == 0.5);
}

TEST_CASE("generators are convex at random chords") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> point(0.0, 100.0), lam(0.0, 1.0);
  auto specs = builtin_specs();
  specs.push_back(renyi_generator(1.5));
  specs.push_back(renyi_generator(3.0));
  for (const auto& s : specs) {
    CAPTURE(s.name);
    for (int i = 0; i < 2000; ++i) {
      const double a = point(gen), b = point(gen), l = lam(gen);
      if (a == 0.0 || b == 0.0) continue;
      CHECK(s(l * a + (1 - l) * b) <= l * s(a) + (1 - l) * s(b) + 1e-12 * std::max(1.0, std::abs(s(a)) + std::abs(s(b))));
    }
  }
}

TEST_CASE("uniform weights have zero divergence and full ESS") {
  const auto w = WeightVector::normalized(std::vector<double>(8, 0.125));
  for (const auto& s : builtin_specs()) CHECK(empirical_f_divergence(s, w) == doctest::Approx(0.0));
  CHECK(ess(w) == doctest::Approx(8.0));
}

TEST_CASE("worked example W = (0.4, 0.3, 0.2, 0.1)") {
  const auto w = WeightVector::normalized({0.4, 0.3, 0.2, 0.1});
  // M sum W^2 - 1 = 4 * 0.3 - 1
  CHECK(empirical_f_divergence(spec_by_name("chi2"), w) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(ess(w) == doctest::Approx(10.0 / 3.0).epsilon(1e-14));
  CHECK(theoretical_ess(0.2, 4) == doctest::Approx(10.0 / 3.0).epsilon(1e-14));
  // (1/4) sum |4W - 1| / 2 = (0.6 + 0.2 + 0.2 + 0.6) / 8
  CHECK(empirical_f_divergence(spec_by_name("tv"), w) == doctest::Approx(0.2).epsilon(1e-14));
  double kl = 0, rkl = 0, h2 = 0;
  for (double x : {0.4, 0.3, 0.2, 0.1}) {
    kl += x * std::log(4 * x);
    rkl += -std::log(4 * x) / 4;
    h2 += (std::sqrt(4 * x) - 1) * (std::sqrt(4 * x) - 1) / 8;
  }
  CHECK(empirical_f_divergence(spec_by_name("kl"), w) == doctest::Approx(kl).epsilon(1e-14));
  CHECK(empirical_f_divergence(spec_by_name("reverse_kl"), w) == doctest::Approx(rkl).epsilon(1e-14));
  CHECK(empirical_f_divergence(spec_by_name("hellinger2"), w) == doctest::Approx(h2).epsilon(1e-14));
}

TEST_CASE("fully degenerate weights") {
  const auto w = WeightVector::normalized({1.0, 0.0, 0.0, 0.0});
  CHECK(empirical_f_divergence(spec_by_name("chi2"), w) == doctest::Approx(3.0));
  CHECK(empirical_f_divergence(spec_by_name("tv"), w) == doctest::Approx(0.75));
  CHECK(empirical_f_divergence(spec_by_name("kl"), w) == doctest::Approx(std::log(4.0)));
  CHECK(empirical_f_divergence(spec_by_name("reverse_kl"), w) == kInf);
  CHECK(ess(w) == doctest::Approx(1.0));
}

TEST_CASE("ESS equals M / (chi2 + 1) on random weights") {
  std::mt19937_64 gen(3);
  const auto chi2 = spec_by_name("chi2");
  for (std::size_t m : {2u, 5u, 16u, 257u}) {
    for (int rep = 0; rep < 50; ++rep) {
      const auto w = random_weights(m, gen);
      CHECK(ess(w) == doctest::Approx(theoretical_ess(empirical_f_divergence(chi2, w), m)).epsilon(1e-12));
      CHECK(ess(w) >= 1.0 - 1e-12);
      CHECK(ess(w) <= m + 1e-9);
    }
  }
}

TEST_CASE("power generator") {
  const auto r2 = spec_by_name("renyi_2");
  CHECK(r2.name == "renyi_2");
  std::mt19937_64 gen(5);
  const auto w = random_weights(10, gen);
  CHECK(empirical_f_divergence(r2, w) ==
        doctest::Approx(empirical_f_divergence(spec_by_name("chi2"), w)).epsilon(1e-13));
  CHECK(renyi_generator(1.0)(3.0) == doctest::Approx(2.0));
  CHECK_THROWS_AS(renyi_generator(0.5), std::invalid_argument);
  CHECK_THROWS_AS(spec_by_name("renyi_x"), std::invalid_argument);
}

TEST_CASE("unknown name lists the valid ones") {
  try {
    (void)spec_by_name("foo");
    FAIL("expected an exception");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("foo") != std::string::npos);
    for (const auto& n : builtin_spec_names()) CHECK(msg.find(n) != std::string::npos);
  }
}

TEST_CASE("weight vector validation") {
  CHECK_THROWS_AS(WeightVector::normalized({0.5, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(WeightVector::normalized({1.5, -0.5}), std::invalid_argument);
  CHECK_THROWS_AS(WeightVector::normalized({std::nan(""), 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(WeightVector::normalized({}), std::invalid_argument);
  CHECK_NOTHROW(WeightVector::normalized({0.5, 0.5 + 1e-12}));
  CHECK_THROWS_AS(theoretical_ess(-0.1, 4), std::invalid_argument);
}

TEST_CASE("log-weight normalization is shift invariant and guards bad input") {
  const std::vector<double> lw{-1000.0, -1001.0, -1002.5};
  std::vector<double> shifted;
  for (double v : lw) shifted.push_back(v + 1900.0);
  const auto a = normalize_log_weights(lw);
  const auto b = normalize_log_weights(shifted);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-14));
  const double z = 1 + std::exp(-1.0) + std::exp(-2.5);
  CHECK(a[0] == doctest::Approx(1 / z).epsilon(1e-14));
  CHECK(logsumexp(lw) == doctest::Approx(-1000.0 + std::log(z)).epsilon(1e-15));

  const auto with_zero = normalize_log_weights(std::vector<double>{0.0, -kInf});
  CHECK(with_zero[1] == 0.0);
  CHECK_THROWS(normalize_log_weights(std::vector<double>{-kInf, -kInf}));
  CHECK_THROWS(normalize_log_weights(std::vector<double>{0.0, std::nan("")}));
  CHECK_THROWS(normalize_log_weights(std::vector<double>{0.0, kInf}));
}

TEST_CASE("normalized log-weights sum to one within 1e-12") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-700.0, 700.0);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> lw(1 + rep % 64);
    for (auto& v : lw) v = u(gen);
    const auto w = normalize_log_weights(lw);
    double total = 0;
    for (std::size_t i = 0; i < w.size(); ++i) total += w[i];
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
}
