#include "expanse/numeric.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace expanse {

double ext_sub(double a, double b) {
  if (a == b) return 0.0;
  if (std::isinf(a)) return a;
  if (std::isinf(b)) return -b;
  return a - b;
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (v == kPosInf) return "+inf";
  if (v == kNegInf) return "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_real(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s == "+inf" || s == "inf") return kPosInf;
  if (s == "-inf") return kNegInf;
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("cannot parse real: '" + std::string(s) + "'");
  return v;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  LineFit fit;
  fit.points = static_cast<int>(x.size());
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_line needs >= 2 points");
  const auto n = static_cast<double>(x.size());
  KahanSum sx, sy;
  for (double v : x) sx.add(v);
  for (double v : y) sy.add(v);
  const double mx = sx.value() / n;
  const double my = sy.value() / n;
  KahanSum sxx, sxy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx.add((x[i] - mx) * (x[i] - mx));
    sxy.add((x[i] - mx) * (y[i] - my));
  }
  if (sxx.value() <= 0.0) throw std::invalid_argument("fit_line: degenerate x range");
  fit.slope = sxy.value() / sxx.value();
  fit.intercept = my - fit.slope * mx;
  KahanSum serr;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    serr.add(r * r);
  }
  fit.residual_rms = std::sqrt(serr.value() / n);
  return fit;
}

}  // namespace expanse
