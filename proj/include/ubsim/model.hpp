#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ubsim/common.hpp"

namespace ubsim {

// Holder regularity metadata consumed by the integrability diagnostics;
// never read on the simulation hot path.
struct Regularity {
  double L = 1.0;
  double alpha1 = 1.0;
  double alpha2 = 1.0;
};

// One pricing problem: SDE coefficients mu(t,x,xbar), sigma(t,x,xbar), payoff
// g(x,xbar), discount rate, initial state, horizon, and diagnostics metadata.
// Coefficient evaluation is pure and safe to call concurrently.
struct SdeModel {
  int dim = 1;
  std::function<void(double t, std::span<const double> x,
                     std::span<const double> xbar, std::span<double> out)>
      drift;
  // Fills the d x d volatility matrix, row-major.
  std::function<void(double t, std::span<const double> x,
                     std::span<const double> xbar, std::span<double> out)>
      vol;
  std::function<double(std::span<const double> x, std::span<const double> xbar)>
      payoff;
  double discount_rate = 0.0;
  double maturity = 1.0;
  std::vector<double> x0;
  Regularity regularity;
  double ellipticity_floor = 0.0;
  // Set by the factories; validate with verify_constant_vol for custom models.
  bool constant_vol = false;
  std::string name = "custom";

  double discount_factor() const;
};

struct BachelierParams {
  double r = 0.05;
  double x0 = 100.0;
  double sigma_rel = 0.05;  // tabulated convention: absolute vol = sigma_rel * x0
  double strike = 100.0;
  double maturity = 1.0;
};

// dX = r X dt + sigma_abs dW with sigma_abs = sigma_rel * x0, Asian call
// payoff (xbar - K)+ discounted at r.
SdeModel bachelier_model(const BachelierParams& p);

// Discounted closed form for E[e^{-rT}(I_T - K)+] under the Bachelier model,
// I_T = integral of X dt: I_T is Gaussian with mean (e^{rT}-1)X0/r and
// variance sigma^2/r^2 * ((e^{2rT}-1)/(2r) - 2(e^{rT}-1)/r + T).
// r = 0 is rejected; use the exact zero-rate Gaussian formula instead.
double bachelier_reference_price(const BachelierParams& p);

enum class LocalVolVariant { sin4, sin2 };

// Path-dependent local volatility: dX = r X dt + vol_scale * sigma0 *
// (1 + sin(x - xbar)/c) dW, c = 4 or 2; Asian call payoff discounted at r.
// vol_scale defaults to x0, the scale convention that reproduces the
// constant-vol limit of the model zoo.
SdeModel local_vol_model(LocalVolVariant variant, double r, double x0,
                         double sigma0, double strike, double maturity,
                         double vol_scale);

// Constant-coefficient model (exactly simulable in one step); payoff is the
// Asian call on the first averaged component.
SdeModel constant_model(std::vector<double> drift_const,
                        std::vector<double> vol_const_rowmajor, int dim,
                        double x0, double strike, double maturity,
                        double discount_rate);

// Samples (t, x, xbar) around the initial state and checks that the
// volatility never moves; used to vet custom models before the
// constant-volatility estimator path is allowed.
bool verify_constant_vol(const SdeModel& model, int samples = 256,
                         std::uint64_t seed = 0x5eedu);

}  // namespace ubsim
