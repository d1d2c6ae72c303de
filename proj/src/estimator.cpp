#include "ubsim/estimator.hpp"

#include <stdexcept>

#include "ubsim/linalg.hpp"

namespace ubsim {

double weight_w1(std::span<const double> mu_k, std::span<const double> mu_prev,
                 std::span<const double> m_next) {
  double s = 0.0;
  for (std::size_t c = 0; c < mu_k.size(); ++c)
    s += (mu_k[c] - mu_prev[c]) * m_next[c];
  return s;
}

double weight_w2(std::span<const double> a_k, std::span<const double> a_prev,
                 std::span<const double> a_k_inv, std::span<const double> m_next,
                 double ratio, double dt_next, int dim) {
  const double comp = ratio / dt_next;
  double s = 0.0;
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) {
      const double diff = a_k[std::size_t(r) * dim + c] - a_prev[std::size_t(r) * dim + c];
      const double q = m_next[std::size_t(c)] * m_next[std::size_t(r)] -
                       comp * a_k_inv[std::size_t(c) * dim + r];
      s += diff * q;
    }
  return 0.5 * s;
}

namespace {

struct PsiParts {
  double psi_hat = 0.0;
  double psi_tilde = 0.0;
  double weight_product = 1.0;
};

// Shared evaluation of the raw value and its antithetic twin. With
// const_vol_only set, every W2 term is dropped (constant-volatility
// specialization) and only psi_hat is meaningful.
PsiParts evaluate(const PathRecord& path, const SdeModel& model,
                  const StepDistribution& dist, EstimatorWorkspace& ws,
                  bool const_vol_only) {
  const int d = path.dim;
  const int n_t = path.n_t;
  ws.ensure(d);

  const double disc = model.discount_factor();
  const double surv = dist.survival(path.step_len(n_t));
  const double g_term = model.payoff(path.x_at(n_t + 1), path.i_at(n_t + 1));

  PsiParts out;
  if (n_t == 0) {
    // Empty product; the antithetic twin shares the convention.
    out.psi_hat = disc * g_term / surv;
    out.psi_tilde = disc * model.payoff(path.x_tilde, path.i_tilde) / surv;
    out.weight_product = 1.0;
    return out;
  }

  const double g_last = model.payoff(path.x_at(n_t), path.i_at(n_t));
  const double pre_hat = (g_term - g_last) / surv;
  const double pre_tilde =
      (model.payoff(path.x_tilde, path.i_tilde) - g_last) / surv;

  ScaledProduct prod;       // factors k = 1..n_t
  ScaledProduct prod_head;  // factors k = 1..n_t-1
  double w1_last = 0.0, w2_last = 0.0, rho_last = 1.0;

  for (int k = 1; k <= n_t; ++k) {
    const double w1 = weight_w1(path.mu_at(k), path.mu_at(k - 1), path.m_at(k));
    double w2 = 0.0;
    if (!const_vol_only) {
      linalg::aat(path.sigma_at(k), ws.a_k, d);
      linalg::aat(path.sigma_at(k - 1), ws.a_prev, d);
      linalg::inverse(ws.a_k, ws.a_inv, ws.col, ws.lu, d);
      const double ratio = path.mom_m2t[std::size_t(k)] / path.mom_m2[std::size_t(k)];
      w2 = weight_w2(ws.a_k, ws.a_prev, ws.a_inv, path.m_at(k), ratio,
                     path.step_len(k), d);
    }
    const double rho = dist.density(path.step_len(k - 1));
    const double factor = (w1 + w2) / rho;
    if (k < n_t) prod_head.multiply(factor);
    prod.multiply(factor);
    if (k == n_t) {
      w1_last = w1;
      w2_last = w2;
      rho_last = rho;
    }
  }

  out.weight_product = prod.value();
  out.psi_hat = disc * pre_hat * out.weight_product;
  out.psi_tilde =
      disc * pre_tilde * prod_head.value() * ((w2_last - w1_last) / rho_last);
  return out;
}

}  // namespace

double psi_hat(const PathRecord& path, const SdeModel& model,
               const StepDistribution& dist, EstimatorWorkspace& ws) {
  return evaluate(path, model, dist, ws, false).psi_hat;
}

double psi_tilde(const PathRecord& path, const SdeModel& model,
                 const StepDistribution& dist, EstimatorWorkspace& ws) {
  return evaluate(path, model, dist, ws, false).psi_tilde;
}

EstimatorSample psi(const PathRecord& path, const SdeModel& model,
                    const StepDistribution& dist, EstimatorWorkspace& ws) {
  const PsiParts parts = evaluate(path, model, dist, ws, false);
  EstimatorSample s;
  s.psi_hat = parts.psi_hat;
  s.psi_tilde = parts.psi_tilde;
  s.psi = 0.5 * (parts.psi_hat + parts.psi_tilde);
  s.n_t = path.n_t;
  s.weight_product = parts.weight_product;
  return s;
}

double psi_hat_constvol(const PathRecord& path, const SdeModel& model,
                        const StepDistribution& dist, EstimatorWorkspace& ws) {
  if (!model.constant_vol)
    throw std::invalid_argument(
        "psi_hat_constvol requires a constant-volatility model (use "
        "verify_constant_vol to vet custom models)");
  return evaluate(path, model, dist, ws, true).psi_hat;
}

double euler_baseline(const SdeModel& model, const AveragingWeight& weight,
                      int n_steps, PathRng& rng, EstimatorWorkspace& ws,
                      EulerIUpdate i_update, std::span<double> x_terminal,
                      std::span<double> i_terminal) {
  if (n_steps < 1) throw std::invalid_argument("euler_baseline needs n_steps >= 1");
  const int d = model.dim;
  const std::size_t ds = std::size_t(d);
  ws.ensure(d);

  for (std::size_t c = 0; c < ds; ++c) {
    ws.x[c] = model.x0[c];
    ws.i[c] = 0.0;
  }
  const double T = model.maturity;
  for (int k = 0; k < n_steps; ++k) {
    const double s = T * k / n_steps;
    const double t = k + 1 == n_steps ? T : T * (k + 1) / n_steps;
    const AveragingMoments mom = weight.moments(s, t);
    model.drift(s, ws.x, ws.i, ws.mu);
    model.vol(s, ws.x, ws.i, ws.sig);
    for (std::size_t g = 0; g < 2 * ds; ++g) ws.gauss[g] = rng.gauss();
    sample_increment(mom, ws.gauss, ws.dw, ws.j);
    if (i_update == EulerIUpdate::exact_joint) {
      euler_step(ws.x, ws.i, ws.mu, ws.sig, mom, ws.dw, ws.j, ws.x2, ws.i2, d);
    } else {
      for (int r = 0; r < d; ++r) {
        double sig_dw = 0.0;
        for (int c = 0; c < d; ++c)
          sig_dw += ws.sig[std::size_t(r) * d + c] * ws.dw[std::size_t(c)];
        ws.x2[std::size_t(r)] = ws.x[std::size_t(r)] + ws.mu[std::size_t(r)] * mom.dt + sig_dw;
        ws.i2[std::size_t(r)] = ws.i[std::size_t(r)] + ws.x2[std::size_t(r)] * mom.delta_a;
      }
    }
    std::swap(ws.x, ws.x2);
    std::swap(ws.i, ws.i2);
  }
  if (!x_terminal.empty())
    for (std::size_t c = 0; c < ds; ++c) x_terminal[c] = ws.x[c];
  if (!i_terminal.empty())
    for (std::size_t c = 0; c < ds; ++c) i_terminal[c] = ws.i[c];
  return model.discount_factor() * model.payoff(ws.x, ws.i);
}

}  // namespace ubsim
