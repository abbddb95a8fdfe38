#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "expanse/capacity.hpp"
#include "expanse/entropy.hpp"
#include "expanse/exponents.hpp"
#include "expanse/maps.hpp"
#include "expanse/measures.hpp"

namespace expanse {

using ordered_json = nlohmann::ordered_json;

// JSON value for an extended real: plain number when finite, the
// "+inf"/"-inf"/"nan" literal as a string otherwise.
ordered_json json_real(double v);

enum class Verdict { Pass, Fail, NotApplicable };
std::string verdict_name(Verdict v);

struct TheoremReport {
  std::string theorem;  // A, B, C, law-convex, law-monotone, law-isometry, contraction-chain
  Verdict verdict = Verdict::Fail;
  // amount by which the claimed relation holds; negative = violation;
  // verdict is pass iff margin >= -tolerance
  double margin = 0.0;
  double tolerance = 0.0;
  ordered_json inputs = ordered_json::object();
  ordered_json computed = ordered_json::object();
  std::vector<std::string> caveats;

  ordered_json to_json() const;  // stable field order
};

// mass of {y : d(T^i x, T^i y) <= eps for 0 <= i < n} for n = 1..n_max
// (orbit-shadowing set; closed condition, truncated in n)
struct PhiMassCurve {
  std::int32_t center_index = -1;
  double epsilon = 0.0;
  std::vector<double> masses;  // masses[t] is the mass at n = t + 1
};

PhiMassCurve phi_mass_curve(const MapModel& map, const AtomicMeasure& mu,
                            std::int32_t center_index, double epsilon, std::int32_t n_max);
PhiMassCurve phi_mass_curve(const MapModel& map, const AtomicMeasure& mu, const Point& x,
                            double epsilon, std::int32_t n_max);

struct TheoremAOptions {
  double gap_tolerance = 0.02;     // attainment slack for the witness family
  double witness_offset = 0.01;    // witness level = map estimate + offset
  std::int32_t witness_truncation = 20;
  ProfileOptions profile;
};

// E(T) against the minimum of E_mu over the family (which must contain a
// full-support measure); a witness measure at the offset level is built and
// appended internally.
TheoremReport check_theorem_A(const MapModel& map, const CloudPtr& cloud,
                              std::span<const AtomicMeasure> family,
                              std::span<const double> eps_grid, const TheoremAOptions& opts = {});

// Exact profile identity lambda_{t mu + (1-t) nu} = min(lambda_mu, lambda_nu).
TheoremReport check_convex_law(const MapModel& map, const CloudPtr& cloud, const AtomicMeasure& mu,
                               const AtomicMeasure& nu, double t,
                               std::span<const double> eps_grid, const ProfileOptions& opts = {});

// supp(mu) inside supp(nu) forces lambda_mu >= lambda_nu entrywise.
TheoremReport check_monotone_law(const MapModel& map, const CloudPtr& cloud,
                                 const AtomicMeasure& mu, const AtomicMeasure& nu,
                                 std::span<const double> eps_grid, const ProfileOptions& opts = {});

// Distance-preserving maps admit no positive entry: lambda_hat <= 0.
TheoremReport check_isometry_law(const MapModel& map, const CloudPtr& cloud,
                                 const AtomicMeasure& mu, std::span<const double> eps_grid,
                                 const ProfileOptions& opts = {});

struct TheoremBOptions {
  std::vector<double> eps_grid;  // certificate search grid; empty = default
  std::int32_t n_max = 18;
  std::int32_t x_sample_count = 32;
  double rate_slack = 0.1;  // decay rate must reach log k - slack
  // accept the measure as invariant by construction; the measured defect
  // (or the snap failure) is still recorded as a caveat
  bool assume_invariant = false;
  double invariance_tolerance = 1e-9;
  ProfileOptions profile;
};

struct TheoremBResult {
  TheoremReport report;
  std::vector<PhiMassCurve> curves;
};

// Positive-exponent certificate (k, eps) -> the shadowing mass at eps/2
// must fall below the nonatomicity floor (2 x max atom weight) with
// geometric rate at least log k - slack. Not-applicable when no certificate
// exists.
TheoremBResult check_theorem_B(const MapModel& map, const CloudPtr& cloud,
                               const AtomicMeasure& mu, std::uint64_t seed,
                               const TheoremBOptions& opts = {});

struct TheoremCOptions {
  std::vector<double> eps_grid;  // exponent; empty = default
  std::vector<double> beta_grid;
  std::vector<double> delta_grid;
  std::vector<double> gamma_grid;
  std::int32_t n_from = 2, n_to = 6;
  double katok_delta = 0.02;
  double tolerance = 0.1;  // nats, absorbs the stacked estimator bias
  bool assume_invariant = false;
  double invariance_tolerance = 1e-9;
  ProfileOptions profile;
};

struct TheoremCResult {
  TheoremReport report;
  EpsilonProfile exponent_profile;
  CapacityReport capacity;
  EntropyReport entropy;
};

// h_mu >= dim * E_mu on estimates: margin = h - dim * max(E,0) + tolerance.
// Nonpositive E makes the inequality vacuous (caveated pass).
TheoremCResult check_theorem_C(const MapModel& map, const CloudPtr& cloud,
                               const AtomicMeasure& mu, const TheoremCOptions& opts = {});

// Pairs inside the Bowen ball whose whole orbit window satisfies the
// certificate's k-inequality must already sit inside the contracted ball of
// radius k^{-(n-1)} gamma.
TheoremReport check_contraction_chain(const MapModel& map, const PointCloud& cloud,
                                      const ExponentCertificate& cert, std::int32_t n,
                                      double gamma);
TheoremReport check_contraction_chain_range(const MapModel& map, const PointCloud& cloud,
                                            const ExponentCertificate& cert, std::int32_t n_from,
                                            std::int32_t n_to, double gamma);

}  // namespace expanse
