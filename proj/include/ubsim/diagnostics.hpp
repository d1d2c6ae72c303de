#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ubsim/averaging.hpp"
#include "ubsim/model.hpp"

namespace ubsim {

// Parameters of the square-integrability conditions: Holder exponents of the
// coefficients (alpha1) and payoff (alpha2), the averaging-ratio exponent
// beta, the step-density envelope exponents kappa1/kappa2, and the moment
// order p.
struct IntegrabilityInputs {
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  double beta = 0.0;
  double kappa1 = 0.35;
  double kappa2 = 0.35;
  double p = 2.0;
  bool const_vol = false;
};

struct IntegrabilityReport {
  bool p1_ok = false;
  bool p2_ok = false;
  double margin1 = 0.0;
  double margin2 = 0.0;
  // A margin within 1e-12 of zero: the strict inequality sits on its boundary.
  bool boundary1 = false;
  bool boundary2 = false;
};

// Evaluates the two strict inequalities of the applicable regime:
//   general:   kappa2 + p(alpha1/2 - kappa1 - beta) > 0,  p(alpha2-beta-1)+1 > 0
//   const vol: 2 kappa2 + p(1+alpha1-2 kappa1-beta) > 0,  p(alpha2-beta-1)+2 > 0
IntegrabilityReport check_integrability(const IntegrabilityInputs& inp);

// Mittag-Leffler-type moment bound
//   sum_n (C Ct)^n T^(eta+n(kappa-theta)-1) Gamma(eta) Gamma(kappa-theta)^n
//         / Gamma(eta+n(kappa-theta)),
// summed in log-Gamma form until the running term falls below
// truncation_tol * partial sum (terms first grow, then decay; truncation only
// triggers on the decaying side). Requires theta < kappa and eta > 0.
// tail_estimate, when non-null, receives a geometric bound on the dropped tail.
double series_moment_bound(double C, double C_tilde, double eta, double theta,
                           double kappa, double T, double truncation_tol,
                           double* tail_estimate = nullptr);

struct RegularityReport {
  std::vector<std::string> warnings;
  double drift_max_abs = 0.0;
  double vol_max_abs = 0.0;
  // Smallest eigenvalue of sigma sigma^T seen across sampled states.
  double ellipticity_min = 0.0;
};

// Empirically probes coefficient boundedness and ellipticity on states
// sampled from short simulations of the model, growing the probed box to
// catch coefficients that grow with the state (e.g. a linear drift). Advisory
// only; never throws for a misbehaving model.
RegularityReport regularity_report(const SdeModel& model,
                                   const AveragingWeight& weight,
                                   int sample_budget,
                                   std::uint64_t seed = 0x9a7bu);

}  // namespace ubsim
