#include "ubsim/path_engine.hpp"

#include <cmath>

#include "ubsim/linalg.hpp"

namespace ubsim {

void sample_increment(const AveragingMoments& mom, std::span<const double> gauss2d,
                      std::span<double> dw, std::span<double> j) {
  const std::size_t d = dw.size();
  const double var_j = mom.dt * (mom.m2_tilde - mom.m1 * mom.m1);
  if (var_j < -1e-12 * mom.dt * mom.m2_tilde)
    throw NumericalError("increment covariance not positive semidefinite");
  const double l11 = std::sqrt(mom.dt);
  const double l21 = l11 * mom.m1;
  const double l22 = std::sqrt(var_j > 0.0 ? var_j : 0.0);
  for (std::size_t c = 0; c < d; ++c) {
    const double z1 = gauss2d[2 * c];
    const double z2 = gauss2d[2 * c + 1];
    dw[c] = l11 * z1;
    j[c] = l21 * z1 + l22 * z2;
  }
}

IncrementDraw sample_increment(const AveragingWeight& weight, double s, double t,
                               std::span<const double> gauss2d) {
  IncrementDraw draw;
  const AveragingMoments mom = weight.moments(s, t);
  draw.dt = mom.dt;
  draw.dw.resize(gauss2d.size() / 2);
  draw.j.resize(gauss2d.size() / 2);
  sample_increment(mom, gauss2d, draw.dw, draw.j);
  return draw;
}

void euler_step(std::span<const double> x, std::span<const double> i,
                std::span<const double> mu, std::span<const double> sigma,
                const AveragingMoments& mom, std::span<const double> dw,
                std::span<const double> j, std::span<double> x_out,
                std::span<double> i_out, int dim) {
  const double da = mom.delta_a;
  const double drift_int = da * mom.dt - mom.dt * mom.m1;  // int (A_t - A_u) du
  for (int r = 0; r < dim; ++r) {
    double sig_dw = 0.0;
    double sig_jt = 0.0;  // sigma * (dA dW - J), the int (A_t - A_u) dW term
    for (int c = 0; c < dim; ++c) {
      const double s_rc = sigma[std::size_t(r) * dim + c];
      sig_dw += s_rc * dw[std::size_t(c)];
      sig_jt += s_rc * (da * dw[std::size_t(c)] - j[std::size_t(c)]);
    }
    x_out[std::size_t(r)] = x[std::size_t(r)] + mu[std::size_t(r)] * mom.dt + sig_dw;
    i_out[std::size_t(r)] = i[std::size_t(r)] + x[std::size_t(r)] * da +
                            mu[std::size_t(r)] * drift_int + sig_jt;
  }
}

void euler_step_alt(std::span<const double> x, std::span<const double> i,
                    std::span<const double> mu, std::span<const double> sigma,
                    const AveragingMoments& mom, std::span<const double> dw,
                    std::span<const double> j, std::span<double> x_out,
                    std::span<double> i_out, int dim) {
  const double da = mom.delta_a;
  for (int r = 0; r < dim; ++r) {
    double sig_dw = 0.0;
    double sig_j = 0.0;
    for (int c = 0; c < dim; ++c) {
      const double s_rc = sigma[std::size_t(r) * dim + c];
      sig_dw += s_rc * dw[std::size_t(c)];
      sig_j += s_rc * j[std::size_t(c)];
    }
    x_out[std::size_t(r)] = x[std::size_t(r)] + mu[std::size_t(r)] * mom.dt + sig_dw;
    i_out[std::size_t(r)] = i[std::size_t(r)] + x_out[std::size_t(r)] * da -
                            mu[std::size_t(r)] * mom.dt * mom.m1 - sig_j;
  }
}

void malliavin_vector(std::span<const double> sigma, const AveragingMoments& mom,
                      std::span<const double> dw, std::span<const double> j,
                      std::span<double> m_out, std::span<double> scratch, int dim,
                      double m2_floor_rel) {
  if (mom.m2 < m2_floor_rel * mom.dt * mom.dt)
    throw NumericalError("malliavin_vector: m2 degenerate (weight locally constant)");
  const double inv = 1.0 / (mom.dt * mom.m2);
  for (int r = 0; r < dim; ++r)
    m_out[std::size_t(r)] =
        inv * (mom.m2_tilde * dw[std::size_t(r)] - mom.m1 * j[std::size_t(r)]);
  auto at = scratch.subspan(0, std::size_t(dim) * dim);
  auto lu = scratch.subspan(std::size_t(dim) * dim, std::size_t(dim) * dim);
  linalg::solve_transposed_inplace(sigma, m_out, at, lu, dim);
}

void simulate_path(const SdeModel& model, const AveragingWeight& weight,
                   const StepDistribution& dist, PathRng& rng, PathRecord& out) {
  const int d = model.dim;
  const std::size_t ds = std::size_t(d);
  out.reset(d);

  out.n_t = build_grid(dist, model.maturity,
                       [&rng] { return rng.uniform_open01(); }, out.times);
  const int intervals = out.n_t + 1;

  out.x.resize(ds * std::size_t(intervals + 1));
  out.i.assign(ds * std::size_t(intervals + 1), 0.0);
  out.mu.resize(ds * std::size_t(intervals));
  out.sigma.resize(ds * ds * std::size_t(intervals));
  out.dw.resize(ds * std::size_t(intervals));
  out.j.resize(ds * std::size_t(intervals));
  out.m.resize(ds * std::size_t(intervals));
  out.mom_da.resize(std::size_t(intervals));
  out.mom_m1.resize(std::size_t(intervals));
  out.mom_m2.resize(std::size_t(intervals));
  out.mom_m2t.resize(std::size_t(intervals));

  for (int c = 0; c < d; ++c) out.x[std::size_t(c)] = model.x0[std::size_t(c)];

  // 2d standard normals per interval; scratch for the transposed solve.
  thread_local std::vector<double> gauss, scratch;
  gauss.resize(2 * ds);
  scratch.resize(2 * ds * ds);

  for (int k = 0; k < intervals; ++k) {
    const double s = out.times[std::size_t(k)];
    const double t = out.times[std::size_t(k) + 1];
    const AveragingMoments mom = weight.moments(s, t);
    out.mom_da[std::size_t(k)] = mom.delta_a;
    out.mom_m1[std::size_t(k)] = mom.m1;
    out.mom_m2[std::size_t(k)] = mom.m2;
    out.mom_m2t[std::size_t(k)] = mom.m2_tilde;

    auto x_k = std::span<const double>(out.x.data() + ds * std::size_t(k), ds);
    auto i_k = std::span<const double>(out.i.data() + ds * std::size_t(k), ds);
    auto mu_k = std::span<double>(out.mu.data() + ds * std::size_t(k), ds);
    auto sig_k = std::span<double>(out.sigma.data() + ds * ds * std::size_t(k), ds * ds);
    model.drift(s, x_k, i_k, mu_k);
    model.vol(s, x_k, i_k, sig_k);

    for (std::size_t g = 0; g < 2 * ds; ++g) gauss[g] = rng.gauss();
    auto dw_k = std::span<double>(out.dw.data() + ds * std::size_t(k), ds);
    auto j_k = std::span<double>(out.j.data() + ds * std::size_t(k), ds);
    sample_increment(mom, gauss, dw_k, j_k);

    auto x_next = std::span<double>(out.x.data() + ds * std::size_t(k + 1), ds);
    auto i_next = std::span<double>(out.i.data() + ds * std::size_t(k + 1), ds);
    euler_step(x_k, i_k, mu_k, sig_k, mom, dw_k, j_k, x_next, i_next, d);

    auto m_k = std::span<double>(out.m.data() + ds * std::size_t(k), ds);
    malliavin_vector(sig_k, mom, dw_k, j_k, m_k, scratch, d, weight.m2_floor_rel);
  }

  // Antithetic tail: final interval recomputed with (dW, J) negated. The sign
  // flip is applied to stored draws, so no extra randomness is consumed.
  {
    const int k = intervals - 1;
    AveragingMoments mom;
    mom.delta_a = out.mom_da[std::size_t(k)];
    mom.m1 = out.mom_m1[std::size_t(k)];
    mom.m2 = out.mom_m2[std::size_t(k)];
    mom.m2_tilde = out.mom_m2t[std::size_t(k)];
    mom.dt = out.step_len(k);
    thread_local std::vector<double> neg;
    neg.resize(2 * ds);
    for (std::size_t c = 0; c < ds; ++c) {
      neg[c] = -out.dw[ds * std::size_t(k) + c];
      neg[ds + c] = -out.j[ds * std::size_t(k) + c];
    }
    euler_step(out.x_at(k), out.i_at(k), out.mu_at(k), out.sigma_at(k), mom,
               std::span<const double>(neg.data(), ds),
               std::span<const double>(neg.data() + ds, ds),
               out.x_tilde, out.i_tilde, d);
  }
}

}  // namespace ubsim
