#include "ace/ocad/option_critic.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>

#include "ace/errors.hpp"
#include "ace/rng.hpp"

namespace ace::ocad {

namespace {

constexpr long kMaxSweeps = 1000000;
constexpr double kResidualTol = 1e-12;
constexpr double kAgreementTol = 1e-10;

int pair_index(const TabularOptionMdp& m, int s, int w) { return s * m.options + w; }

Vector start_rewards(const TabularOptionMdp& m) {
  Vector r(m.states * m.options);
  for (int s = 0; s < m.states; ++s) {
    for (int w = 0; w < m.options; ++w) r(pair_index(m, s, w)) = m.reward(s, m.mu(w, s));
  }
  return r;
}

Matrix identity_minus(const Matrix& p) {
  return Matrix::Identity(p.rows(), p.cols()) - p;
}

}  // namespace

Matrix augmented_kernel(const TabularOptionMdp& m) {
  const int n = m.states * m.options;
  Matrix k = Matrix::Zero(n, n);
  for (int s = 0; s < m.states; ++s) {
    for (int w = 0; w < m.options; ++w) {
      const Vector p = m.transition(s, m.mu(w, s));
      const int from = pair_index(m, s, w);
      for (int s2 = 0; s2 < m.states; ++s2) {
        const double b = m.beta(w, s2);
        const double g = m.gamma * p(s2);
        for (int w2 = 0; w2 < m.options; ++w2) {
          const double c = (w2 == w ? 1.0 - b : 0.0) + b * m.pi_omega(s2, w2);
          k(from, pair_index(m, s2, w2)) += g * c;
        }
      }
    }
  }
  return k;
}

OptionValues solve_values(const TabularOptionMdp& m) {
  m.validate();
  const Matrix p = augmented_kernel(m);
  const Vector r = start_rewards(m);

  Vector q = Vector::Zero(r.size());
  long sweeps = 0;
  double residual = 0.0;
  double best = std::numeric_limits<double>::infinity();
  int stalled = 0;
  for (;;) {
    const Vector next = r + p * q;
    residual = (next - q).cwiseAbs().maxCoeff();
    q = next;
    ++sweeps;
    if (!q.allFinite()) throw SolverError("solve_values: iteration diverged");
    // Past the required tolerance, keep sweeping while it still helps so the
    // distance to the fixed point (about residual / (1 - gamma)) shrinks too.
    if (residual < kResidualTol * (1.0 - m.gamma)) break;
    stalled = residual < best ? 0 : stalled + 1;
    best = std::min(best, residual);
    if (best < kResidualTol && stalled >= 10) break;
    if (sweeps >= kMaxSweeps) {
      throw SolverError("solve_values: no convergence after " + std::to_string(sweeps) + " sweeps");
    }
  }
  const Vector direct = identity_minus(p).partialPivLu().solve(r);
  const double gap = (direct - q).cwiseAbs().maxCoeff();
  if (!(gap < kAgreementTol)) {
    throw SolverError("solve_values: iteration and linear solve differ by " + std::to_string(gap));
  }

  OptionValues out;
  out.iterations = sweeps;
  out.iteration_gap = gap;
  out.q_omega.resize(m.states, m.options);
  for (int s = 0; s < m.states; ++s) {
    for (int w = 0; w < m.options; ++w) out.q_omega(s, w) = direct(pair_index(m, s, w));
  }
  out.v = (out.q_omega.array() * m.pi_omega.array()).rowwise().sum();
  out.u.resize(m.options, m.states);
  for (int w = 0; w < m.options; ++w) {
    for (int s = 0; s < m.states; ++s) {
      const double b = m.beta(w, s);
      out.u(w, s) = (1.0 - b) * out.q_omega(s, w) + b * out.v(s);
    }
  }
  out.q_u_da.resize(m.states, m.options);
  double worst = 0.0;
  for (int s = 0; s < m.states; ++s) {
    for (int w = 0; w < m.options; ++w) {
      const double a = m.mu(w, s);
      const Vector uw = out.u.row(w).transpose();
      out.q_u_da(s, w) = m.reward_da(s, a) + m.gamma * m.transition_da(s, a).dot(uw);
      worst = std::max(worst, std::abs(out.q_omega(s, w) - q_u(m, out, s, w, a)));
    }
  }
  out.residual = worst;
  return out;
}

double q_u(const TabularOptionMdp& m, const OptionValues& values, int s, int w, double a) {
  const Vector uw = values.u.row(w).transpose();
  return m.reward(s, a) + m.gamma * m.transition(s, a).dot(uw);
}

Matrix occupancy(const TabularOptionMdp& m) {
  if (!(m.gamma < 1.0)) throw ContractError("occupancy: gamma must be < 1");
  m.validate();
  const Matrix p = augmented_kernel(m);
  Vector e = Vector::Zero(p.rows());
  e(pair_index(m, m.start_state, m.start_option)) = 1.0;
  const Vector rho = identity_minus(p.transpose()).partialPivLu().solve(e);
  Matrix out(m.states, m.options);
  for (int s = 0; s < m.states; ++s) {
    for (int w = 0; w < m.options; ++w) out(s, w) = rho(pair_index(m, s, w));
  }
  return out;
}

Matrix occupancy_series(const TabularOptionMdp& m, long terms) {
  m.validate();
  const Matrix pt = augmented_kernel(m).transpose();
  Vector term = Vector::Zero(pt.rows());
  term(pair_index(m, m.start_state, m.start_option)) = 1.0;
  Vector sum = Vector::Zero(pt.rows());
  for (long k = 0; k < terms; ++k) {
    sum += term;
    term = pt * term;
  }
  Matrix out(m.states, m.options);
  for (int s = 0; s < m.states; ++s) {
    for (int w = 0; w < m.options; ++w) out(s, w) = sum(pair_index(m, s, w));
  }
  return out;
}

Matrix dipg_gradient(const TabularOptionMdp& m) { return dipg_gradient(m, solve_values(m)); }

Matrix dipg_gradient(const TabularOptionMdp& m, const OptionValues& values) {
  const Matrix rho = occupancy(m);
  Matrix g(m.options, m.states);
  for (int w = 0; w < m.options; ++w) {
    for (int s = 0; s < m.states; ++s) g(w, s) = rho(s, w) * values.q_u_da(s, w);
  }
  return g;
}

Matrix arrival_occupancy(const TabularOptionMdp& m) {
  if (!(m.gamma < 1.0)) throw ContractError("arrival_occupancy: gamma must be < 1");
  m.validate();
  const int n = m.states * m.options;
  auto idx = [&](int w, int s) { return w * m.states + s; };
  Matrix k = Matrix::Zero(n, n);
  for (int w = 0; w < m.options; ++w) {
    for (int s1 = 0; s1 < m.states; ++s1) {
      const double b = m.beta(w, s1);
      for (int w2 = 0; w2 < m.options; ++w2) {
        const double c = (w2 == w ? 1.0 - b : 0.0) + b * m.pi_omega(s1, w2);
        if (c == 0.0) continue;
        const Vector p = m.transition(s1, m.mu(w2, s1));
        for (int s2 = 0; s2 < m.states; ++s2) k(idx(w, s1), idx(w2, s2)) += c * m.gamma * p(s2);
      }
    }
  }
  Vector v0 = Vector::Zero(n);
  const Vector p0 = m.transition(m.start_state, m.mu(m.start_option, m.start_state));
  for (int s1 = 0; s1 < m.states; ++s1) v0(idx(m.start_option, s1)) = m.gamma * p0(s1);
  const Vector rho = identity_minus(k.transpose()).partialPivLu().solve(v0);
  Matrix out(m.options, m.states);
  for (int w = 0; w < m.options; ++w) {
    for (int s = 0; s < m.states; ++s) out(w, s) = rho(idx(w, s));
  }
  return out;
}

Matrix termination_gradient(const TabularOptionMdp& m) {
  return termination_gradient(m, solve_values(m));
}

Matrix termination_gradient(const TabularOptionMdp& m, const OptionValues& values) {
  const Matrix rho = arrival_occupancy(m);
  Matrix g(m.options, m.states);
  for (int w = 0; w < m.options; ++w) {
    for (int s = 0; s < m.states; ++s) {
      g(w, s) = rho(w, s) * m.beta_dnu(w, s) * (values.v(s) - values.q_omega(s, w));
    }
  }
  return g;
}

double objective(const TabularOptionMdp& m) {
  return solve_values(m).q_omega(m.start_state, m.start_option);
}

double option_target(double r, double gamma, double beta, double q_same,
                     std::span<const double> q_next) {
  if (q_next.empty()) throw ContractError("option_target: no options");
  const double best = *std::max_element(q_next.begin(), q_next.end());
  return r + gamma * (1.0 - beta) * q_same + gamma * beta * best;
}

double ocad_critic_target(const TabularOptionMdp& m, const OptionValues& values, int /*s*/,
                          int w, double /*a*/, double r, int s_next) {
  const Vector row = values.q_omega.row(s_next).transpose();
  return option_target(r, m.gamma, m.beta(w, s_next), values.q_omega(s_next, w),
                       std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
}

double ThreeQReport::deviation() const {
  return std::max({omega_spread, q_omega_vs_q_u, q_u_vs_flat});
}

ThreeQReport three_q_check(const TabularOptionMdp& m) {
  const OptionValues values = solve_values(m);
  // Flat evaluation of the mixture policy a ~ mu_w(s), w ~ pi(.|s).
  Matrix p_pi = Matrix::Zero(m.states, m.states);
  Vector r_pi = Vector::Zero(m.states);
  for (int s = 0; s < m.states; ++s) {
    for (int w = 0; w < m.options; ++w) {
      const double a = m.mu(w, s);
      p_pi.row(s) += m.pi_omega(s, w) * m.transition(s, a).transpose();
      r_pi(s) += m.pi_omega(s, w) * m.reward(s, a);
    }
  }
  const Vector v_flat = identity_minus(m.gamma * p_pi).partialPivLu().solve(r_pi);
  auto q_flat = [&](int s, double a) { return m.reward(s, a) + m.gamma * m.transition(s, a).dot(v_flat); };

  std::vector<double> grid{-1.0, -0.5, 0.0, 0.5, 1.0};
  for (int w = 0; w < m.options; ++w) {
    for (int s = 0; s < m.states; ++s) grid.push_back(m.mu(w, s));
  }

  ThreeQReport rep;
  for (int s = 0; s < m.states; ++s) {
    for (const double a : grid) {
      for (int w = 0; w < m.options; ++w) {
        for (int w2 = w + 1; w2 < m.options; ++w2) {
          rep.omega_spread = std::max(rep.omega_spread,
                                      std::abs(q_u(m, values, s, w, a) - q_u(m, values, s, w2, a)));
        }
      }
    }
    for (int w = 0; w < m.options; ++w) {
      const double a = m.mu(w, s);
      const double qu = q_u(m, values, s, w, a);
      rep.q_omega_vs_q_u = std::max(rep.q_omega_vs_q_u, std::abs(values.q_omega(s, w) - qu));
      rep.q_u_vs_flat = std::max(rep.q_u_vs_flat, std::abs(qu - q_flat(s, a)));
    }
  }
  return rep;
}

void FlatMdp::validate() const {
  if (states < 1 || actions < 1) throw ConfigError("flat mdp: empty");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("flat mdp: gamma must lie in [0, 1)");
  if (reward.rows() != states || reward.cols() != actions) throw ConfigError("flat mdp: reward must be S x A");
  if (static_cast<int>(transition.size()) != actions) throw ConfigError("flat mdp: one kernel per action");
  for (const Matrix& p : transition) {
    if (p.rows() != states || p.cols() != states) throw ConfigError("flat mdp: kernel must be S x S");
    for (int s = 0; s < states; ++s) {
      if (std::abs(p.row(s).sum() - 1.0) > 1e-12 || p.row(s).minCoeff() < 0.0) {
        throw ConfigError("flat mdp: kernel rows must be distributions");
      }
    }
  }
}

FlatMdp discretize(const TabularOptionMdp& m, std::span<const double> actions) {
  if (actions.empty()) throw ConfigError("discretize: empty action grid");
  FlatMdp f;
  f.states = m.states;
  f.actions = static_cast<int>(actions.size());
  f.gamma = m.gamma;
  f.reward.resize(f.states, f.actions);
  f.transition.assign(actions.size(), Matrix(f.states, f.states));
  for (int j = 0; j < f.actions; ++j) {
    for (int s = 0; s < f.states; ++s) {
      f.reward(s, j) = m.reward(s, actions[static_cast<std::size_t>(j)]);
      f.transition[static_cast<std::size_t>(j)].row(s) =
          m.transition(s, actions[static_cast<std::size_t>(j)]).transpose();
    }
  }
  return f;
}

namespace {
Vector greedy_values(const Matrix& q) { return q.rowwise().maxCoeff(); }
}  // namespace

Matrix value_iteration(const FlatMdp& f, double tol) {
  f.validate();
  Matrix q = Matrix::Zero(f.states, f.actions);
  for (long sweep = 0; sweep < kMaxSweeps; ++sweep) {
    const Vector v = greedy_values(q);
    Matrix next(f.states, f.actions);
    for (int a = 0; a < f.actions; ++a) {
      next.col(a) = f.reward.col(a) + f.gamma * f.transition[static_cast<std::size_t>(a)] * v;
    }
    const double change = (next - q).cwiseAbs().maxCoeff();
    q = next;
    if (change < tol) return q;
  }
  throw SolverError("value_iteration: no convergence");
}

Matrix q_learning_reference(const FlatMdp& f, const QLearningSettings& cfg) {
  f.validate();
  if (cfg.episodes < 1 || cfg.horizon < 1) throw ConfigError("q-learning: need episodes and horizon");
  Rng rng(derive_seed(cfg.seed, "qlearn"));
  Matrix q = Matrix::Zero(f.states, f.actions);
  Eigen::MatrixXi visits = Eigen::MatrixXi::Zero(f.states, f.actions);
  const double bound = 1e6 * (f.reward.cwiseAbs().maxCoeff() / (1.0 - f.gamma) + 1.0);
  for (long ep = 0; ep < cfg.episodes; ++ep) {
    int s = static_cast<int>(rng.index(static_cast<std::size_t>(f.states)));
    for (int t = 0; t < cfg.horizon; ++t) {
      const int a = static_cast<int>(rng.index(static_cast<std::size_t>(f.actions)));
      const Matrix& p = f.transition[static_cast<std::size_t>(a)];
      double u = rng.uniform();
      int next = f.states - 1;
      for (int k = 0; k < f.states; ++k) {
        u -= p(s, k);
        if (u < 0.0) {
          next = k;
          break;
        }
      }
      const int n = ++visits(s, a);
      const double alpha = cfg.step_scale / std::pow(static_cast<double>(n), cfg.step_exponent);
      const double target = f.reward(s, a) + f.gamma * q.row(next).maxCoeff();
      q(s, a) += alpha * (target - q(s, a));
      if (!std::isfinite(q(s, a)) || std::abs(q(s, a)) > bound) {
        throw SolverError("q-learning diverged; reduce the step size");
      }
      s = next;
    }
  }
  return q;
}

}  // namespace ace::ocad
