#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "ubsim/averaging.hpp"
#include "ubsim/common.hpp"
#include "ubsim/model.hpp"
#include "ubsim/rng.hpp"
#include "ubsim/step_distribution.hpp"

namespace ubsim {

// Joint increment of one random interval [s,t]: the Brownian increment dW and
// J_i = integral over (s,t] of (A_u - A_s) dW^i_u. Per component,
// (dW_i, J_i) is bivariate normal with covariance
//   [[dt, dt*m1], [dt*m1, dt*m2_tilde]],
// independent across components; this exactness is what removes any
// sub-discretization of the averaging integral.
struct IncrementDraw {
  std::vector<double> dw;
  std::vector<double> j;
  double dt = 0.0;
};

// One simulated trajectory on its random grid, with everything the estimator
// needs: frozen coefficients, joint draws, per-interval averaging moments,
// Malliavin vectors, and the sign-flipped final interval.
//
// Layout: grid has n_t + 2 points (T_0 = 0, ..., T_{n_t} < T, T). There are
// n_t + 1 intervals; interval k spans [times[k], times[k+1]]. Per-point data
// (x, i) is grid-point major; per-interval data (mu, sigma, dw, j, m,
// moments) is interval major. All flattened with stride dim (dim*dim for
// sigma).
struct PathRecord {
  int dim = 0;
  int n_t = 0;
  std::vector<double> times;
  std::vector<double> x, i;
  std::vector<double> mu, sigma;
  std::vector<double> dw, j;
  std::vector<double> m;
  std::vector<double> mom_da, mom_m1, mom_m2, mom_m2t;
  std::vector<double> x_tilde, i_tilde;

  std::span<const double> x_at(int k) const {
    return {x.data() + std::size_t(k) * dim, std::size_t(dim)};
  }
  std::span<const double> i_at(int k) const {
    return {i.data() + std::size_t(k) * dim, std::size_t(dim)};
  }
  std::span<const double> mu_at(int k) const {
    return {mu.data() + std::size_t(k) * dim, std::size_t(dim)};
  }
  std::span<const double> sigma_at(int k) const {
    return {sigma.data() + std::size_t(k) * dim * dim, std::size_t(dim) * dim};
  }
  std::span<const double> dw_at(int k) const {
    return {dw.data() + std::size_t(k) * dim, std::size_t(dim)};
  }
  std::span<const double> j_at(int k) const {
    return {j.data() + std::size_t(k) * dim, std::size_t(dim)};
  }
  std::span<const double> m_at(int k) const {
    return {m.data() + std::size_t(k) * dim, std::size_t(dim)};
  }
  double step_len(int k) const { return times[std::size_t(k) + 1] - times[std::size_t(k)]; }

  void reset(int d) {
    dim = d;
    n_t = 0;
    times.clear();
    x.clear(); i.clear();
    mu.clear(); sigma.clear();
    dw.clear(); j.clear();
    m.clear();
    mom_da.clear(); mom_m1.clear(); mom_m2.clear(); mom_m2t.clear();
    x_tilde.assign(std::size_t(d), 0.0);
    i_tilde.assign(std::size_t(d), 0.0);
  }
};

// Renewal grid T_k = (T_{k-1} + tau_k) ^ T. Appends T_0 = 0 through the final
// point, which is set to `horizon` bit-exactly; consumes exactly n_t + 1
// draws from `next_uniform` (the overshooting draw is truncated). Returns
// n_t = max{k >= 0 : T_k < horizon}, the index of the last point strictly
// before the horizon.
template <class UniformFn>
int build_grid(const StepDistribution& dist, double horizon,
               UniformFn&& next_uniform, std::vector<double>& times) {
  times.clear();
  times.push_back(0.0);
  double t = 0.0;
  int n_t = 0;
  for (;;) {
    const double tau = dist.sample_step(next_uniform());
    double next = t + tau;
    // tau > 0 almost surely, but a tiny draw can underflow the addition;
    // keep the grid strictly increasing by stepping one ulp instead.
    if (next <= t) next = std::nextafter(t, horizon);
    if (next >= horizon) {
      times.push_back(horizon);
      return n_t;
    }
    times.push_back(next);
    t = next;
    ++n_t;
  }
}

// Lower-triangular factor of the per-component covariance applied to two
// standard normals; fills dw and j (size dim each) from gauss2d (size 2*dim,
// ordered as pairs per component). Throws NumericalError when the covariance
// is not positive semidefinite beyond tolerance (corrupted weight).
void sample_increment(const AveragingMoments& mom, std::span<const double> gauss2d,
                      std::span<double> dw, std::span<double> j);

// Operation-level convenience wrapper.
IncrementDraw sample_increment(const AveragingWeight& weight, double s, double t,
                               std::span<const double> gauss2d);

// One frozen-coefficient Euler step with the exact averaged-integral update:
//   x' = x + mu dt + sigma dW
//   i' = i + x dA + mu (dA dt - dt m1) + sigma (dA dW - J)
void euler_step(std::span<const double> x, std::span<const double> i,
                std::span<const double> mu, std::span<const double> sigma,
                const AveragingMoments& mom, std::span<const double> dw,
                std::span<const double> j, std::span<double> x_out,
                std::span<double> i_out, int dim);

// Algebraically equal form written against the updated state:
//   i' = i + x' dA - mu dt m1 - sigma J
// Kept for the pathwise-equality check of the two updates.
void euler_step_alt(std::span<const double> x, std::span<const double> i,
                    std::span<const double> mu, std::span<const double> sigma,
                    const AveragingMoments& mom, std::span<const double> dw,
                    std::span<const double> j, std::span<double> x_out,
                    std::span<double> i_out, int dim);

// Malliavin vector of one interval:
//   M = 1/(dt m2) * (sigma^T)^{-1} (m2_tilde dW - m1 J).
// Gaussian with mean zero and covariance (m2_tilde/(dt m2)) (sigma sigma^T)^{-1}.
// scratch must hold at least 2*dim*dim doubles. Throws NumericalError on a
// singular sigma or degenerate m2.
void malliavin_vector(std::span<const double> sigma, const AveragingMoments& mom,
                      std::span<const double> dw, std::span<const double> j,
                      std::span<double> m_out, std::span<double> scratch, int dim,
                      double m2_floor_rel = 1e-14);

// Simulates one full trajectory: random grid, frozen coefficients, exact
// joint increments, per-interval Malliavin vectors, and the antithetic tail
// obtained by negating (dW, J) of the final interval only. `out` is reused
// across calls (capacity preserved).
void simulate_path(const SdeModel& model, const AveragingWeight& weight,
                   const StepDistribution& dist, PathRng& rng, PathRecord& out);

}  // namespace ubsim
