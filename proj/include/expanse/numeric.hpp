#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <string_view>

namespace expanse {

// Exponents live on the extended real line; plain doubles with +-inf cover
// it since no operation here produces NaN.
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Difference on the extended line. Equal values (including equal
// infinities) subtract to zero.
double ext_sub(double a, double b);

// Renders "+inf"/"-inf"/"nan" literals, otherwise the shortest decimal that
// round-trips. Used for every CSV/JSON number we emit.
std::string format_real(double v);
double parse_real(std::string_view s);

struct KahanSum {
  double sum = 0.0;
  double c = 0.0;
  void add(double x) {
    double y = x - c;
    double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
  int points = 0;
};

// Ordinary least squares of y against x. Needs >= 2 points.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace expanse
