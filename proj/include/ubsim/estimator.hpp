#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "ubsim/model.hpp"
#include "ubsim/path_engine.hpp"
#include "ubsim/step_distribution.hpp"

namespace ubsim {

// Per-path estimator values. psi is the production estimator: the exact
// average of the raw value psi_hat and its last-increment antithetic twin
// psi_tilde. weight_product is the full product of per-step weight factors
// (exactly 1 on paths with n_t = 0, the empty product).
struct EstimatorSample {
  double psi_hat = 0.0;
  double psi_tilde = 0.0;
  double psi = 0.0;
  int n_t = 0;
  double weight_product = 1.0;
};

// Running product that switches to a log-magnitude + sign representation once
// the direct value leaves [1e-100, 1e100]; the log part accumulates with
// Kahan compensation. Weight factors are heavy-tailed, so a long product can
// overrun double range even though its law has finite moments.
class ScaledProduct {
 public:
  void multiply(double f) {
    mant_ *= f;
    if (mant_ == 0.0) return;
    const double a = std::fabs(mant_);
    if (a > 1e100 || a < 1e-100) {
      add_log(std::log(a));
      mant_ = std::copysign(1.0, mant_);
    }
  }

  double value() const {
    if (mant_ == 0.0 || log_extra_ == 0.0) return mant_;
    return std::copysign(std::exp(log_extra_ + std::log(std::fabs(mant_))), mant_);
  }

 private:
  void add_log(double l) {
    const double y = l - comp_;
    const double t = log_extra_ + y;
    comp_ = (t - log_extra_) - y;
    log_extra_ = t;
  }

  double mant_ = 1.0;
  double log_extra_ = 0.0;
  double comp_ = 0.0;
};

// Scratch buffers reused across paths (one instance per worker).
struct EstimatorWorkspace {
  std::vector<double> a_k, a_prev, a_inv, lu, col;
  std::vector<double> x, i, x2, i2, mu, sig, dw, j, gauss;
  void ensure(int dim) {
    const std::size_t d = std::size_t(dim), dd = d * d;
    a_k.resize(dd); a_prev.resize(dd); a_inv.resize(dd);
    lu.resize(dd); col.resize(d);
    x.resize(d); i.resize(d); x2.resize(d); i2.resize(d);
    mu.resize(d); sig.resize(dd); dw.resize(d); j.resize(d);
    gauss.resize(2 * d);
  }
};

// First-order weight: the drift change across a grid point paired with the
// Malliavin vector of the following interval.
double weight_w1(std::span<const double> mu_k, std::span<const double> mu_prev,
                 std::span<const double> m_next);

// Second-order weight:
//   1/2 Tr[(a_k - a_prev)(M M^T - (1/dt_next)(m2_tilde/m2) a_k^{-1})],
// a = sigma sigma^T. ratio and dt_next belong to the following interval.
double weight_w2(std::span<const double> a_k, std::span<const double> a_prev,
                 std::span<const double> a_k_inv, std::span<const double> m_next,
                 double ratio, double dt_next, int dim);

// Raw unbiased value: discounted payoff bracket over the survival of the
// truncated final step, times the product over full steps of
// (W1_k + W2_k)/rho(dt_k). Empty product on n_t = 0 paths.
double psi_hat(const PathRecord& path, const SdeModel& model,
               const StepDistribution& dist, EstimatorWorkspace& ws);

// Antithetic twin: same prefactor with the sign-flipped terminal state, the
// product stops one factor early, and the trailing factor is
// (W2_{n_t} - W1_{n_t})/rho(dt_{n_t}) -- W1 is odd and W2 even in the final
// increment. On n_t = 0 there is no trailing factor.
double psi_tilde(const PathRecord& path, const SdeModel& model,
                 const StepDistribution& dist, EstimatorWorkspace& ws);

// Both values plus their exact average in one pass.
EstimatorSample psi(const PathRecord& path, const SdeModel& model,
                    const StepDistribution& dist, EstimatorWorkspace& ws);

// Constant-volatility specialization: every W2 vanishes, so the product uses
// W1 alone and no antithetic pairing is needed. Rejects models whose
// volatility is not constant.
double psi_hat_constvol(const PathRecord& path, const SdeModel& model,
                        const StepDistribution& dist, EstimatorWorkspace& ws);

// Averaged-integral discretization of the biased Euler baseline.
// right_rectangle (i' = i + x' dA) is the scheme behind the reference
// fixed-grid comparison rows; exact_joint applies the same exact (dW, J)
// update as the random-grid scheme and leaves the baseline nearly bias-free,
// which defeats its purpose as a comparison but is kept for study.
enum class EulerIUpdate { right_rectangle, exact_joint };

// Biased baseline: standard Euler on the uniform grid with n_steps steps.
// Returns the discounted payoff; optionally exposes the terminal state
// through x_terminal/i_terminal (size dim each) when non-empty.
double euler_baseline(const SdeModel& model, const AveragingWeight& weight,
                      int n_steps, PathRng& rng, EstimatorWorkspace& ws,
                      EulerIUpdate i_update = EulerIUpdate::right_rectangle,
                      std::span<double> x_terminal = {},
                      std::span<double> i_terminal = {});

}  // namespace ubsim
