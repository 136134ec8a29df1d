#include <catch_amalgamated.hpp>

#include <sstream>

#include "renorm/rate_fit.hpp"

using namespace renorm;
using Catch::Approx;

TEST_CASE("exact power law is recovered") {
  std::vector<double> e, v;
  for (int k = 3; k <= 9; ++k) {
    e.push_back(std::ldexp(1.0, -k));
    v.push_back(2.5 * std::pow(e.back(), 0.37));
  }
  const auto f = fit_rate(e, v);
  CHECK_FALSE(f.degenerate);
  CHECK(f.slope == Approx(0.37).epsilon(1e-12));
  CHECK(f.intercept == Approx(std::log(2.5)).epsilon(1e-12));
  CHECK(f.r_squared == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("values below the floor make the fit degenerate") {
  const std::vector<double> e{0.1, 0.05, 0.025};
  const std::vector<double> v{1e-15, 0.0, 2.0};
  const auto f = fit_rate(e, v);
  CHECK(f.degenerate);
  CHECK(f.slope == 0.0);
}

TEST_CASE("flat series has slope 0 and R^2 1") {
  const std::vector<double> e{0.1, 0.05, 0.025, 0.0125};
  const std::vector<double> v{3, 3, 3, 3};
  const auto f = fit_rate(e, v);
  CHECK(f.slope == Approx(0.0).margin(1e-14));
  CHECK(f.r_squared == 1.0);
}

TEST_CASE("negative values are fitted by magnitude") {
  const std::vector<double> e{0.5, 0.25, 0.125};
  const std::vector<double> v{-0.5, -0.25, -0.125};
  CHECK(fit_rate(e, v).slope == Approx(1.0));
}

TEST_CASE("length mismatch is rejected") {
  const std::vector<double> e{0.5, 0.25};
  const std::vector<double> v{1.0};
  CHECK_THROWS_AS(fit_rate(e, v), ArgumentError);
}

TEST_CASE("CSV has the documented columns and footer") {
  const std::vector<double> e{0.5, 0.25};
  const std::vector<double> v{1.0, 0.5};
  std::ostringstream os;
  write_csv(os, fit_rate(e, v));
  const auto s = os.str();
  CHECK(s.rfind("epsilon,value,log_eps,log_value\n0.5,1,", 0) == 0);
  CHECK(s.find("slope,intercept,r_squared\n1,") != std::string::npos);
}
