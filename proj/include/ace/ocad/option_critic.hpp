#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ace/ocad/option_mdp.hpp"

namespace ace::ocad {

struct OptionValues {
  Matrix q_omega;    ///< S x Omega, Q_Omega(s, w) = Q_U(s, w, mu_w(s))
  Matrix q_u_da;     ///< S x Omega, d/da Q_U(s, w, a) at a = mu_w(s)
  Matrix u;          ///< Omega x S, value upon arrival at (w, s')
  Vector v;          ///< S, V_Omega(s)
  long iterations = 0;           ///< fixed-point sweeps used
  double iteration_gap = 0.0;    ///< sup |fixed point - linear solve|
  double residual = 0.0;         ///< sup residual of the value equations
};

/// Solves the coupled value equations by fixed-point iteration (sup-norm
/// residual below 1e-12) and by a direct linear solve; returns the linear
/// solution. Throws SolverError if the iteration does not converge within
/// 1e6 sweeps or the two answers differ by more than 1e-10.
OptionValues solve_values(const TabularOptionMdp& mdp);

/// Q_U(s, w, a) = r(s, a) + gamma sum_s' p(s'|s, a) U(w, s') for any a.
double q_u(const TabularOptionMdp& mdp, const OptionValues& values, int s, int w, double a);

/// One-step kernel over (s, w) pairs, index s * Omega + w:
///   P((s', w') | (s, w)) = gamma p(s'|s, mu_w(s)) [(1 - beta_w(s')) 1{w' = w} + beta_w(s') pi(w'|s')]
Matrix augmented_kernel(const TabularOptionMdp& mdp);

/// Discounted, unnormalised occupancy sum_k P^k from the start pair, as an
/// S x Omega table. Throws ContractError when gamma >= 1.
Matrix occupancy(const TabularOptionMdp& mdp);
/// The same sum truncated after `terms` powers.
Matrix occupancy_series(const TabularOptionMdp& mdp, long terms);

/// Gradient of Q_Omega(s0, w0) with respect to theta, Omega x S.
Matrix dipg_gradient(const TabularOptionMdp& mdp);
Matrix dipg_gradient(const TabularOptionMdp& mdp, const OptionValues& values);

/// Occupancy of arrival pairs (w, s') used by the termination gradient,
/// Omega x S: start at s1 ~ p(.|s0, mu_w0(s0)) with option w0, discounted
/// by gamma, then follow
///   K((w', s'') | (w, s')) = c(w'|w, s') gamma p(s''|s', mu_w'(s')),
///   c(w'|w, s') = (1 - beta_w(s')) 1{w' = w} + beta_w(s') pi(w'|s').
Matrix arrival_occupancy(const TabularOptionMdp& mdp);

/// Gradient of Q_Omega(s0, w0) with respect to nu, Omega x S.
Matrix termination_gradient(const TabularOptionMdp& mdp);
Matrix termination_gradient(const TabularOptionMdp& mdp, const OptionValues& values);

/// Q_Omega(s0, w0): the objective both gradients differentiate.
double objective(const TabularOptionMdp& mdp);

/// g = r + gamma (1 - beta) Q_Omega(s', w) + gamma beta max_w' Q_Omega(s', w').
double option_target(double r, double gamma, double beta, double q_same,
                     std::span<const double> q_next);
/// option_target with beta = beta_w(s') and Q_Omega from `values`.
/// `s` and `a` are accepted for symmetry with the update rule; the target
/// does not depend on them.
double ocad_critic_target(const TabularOptionMdp& mdp, const OptionValues& values, int s, int w,
                          double a, double r, int s_next);

struct ThreeQReport {
  double omega_spread = 0.0;     ///< max over w, w' of |Q_U(s,w,a) - Q_U(s,w',a)|
  double q_omega_vs_q_u = 0.0;   ///< max |Q_Omega(s,w) - Q_U(s,w,mu_w(s))|
  double q_u_vs_flat = 0.0;      ///< max |Q_U(s,w,mu_w(s)) - Q(s,mu_w(s))|
  double deviation() const;
};

/// Compares Q_Omega, Q_U and the flat action value of the mixture policy on
/// every state, option and a grid of shared actions. All three agree when
/// every option terminates at each step.
ThreeQReport three_q_check(const TabularOptionMdp& mdp);

/// Finite MDP with a discrete action set.
struct FlatMdp {
  int states = 1;
  int actions = 1;
  double gamma = 0.9;
  Matrix reward;                   ///< S x A
  std::vector<Matrix> transition;  ///< per action, S x S rows p(.|s, a)

  void validate() const;
};

/// Restricts the option MDP's dynamics to a grid of actions.
FlatMdp discretize(const TabularOptionMdp& mdp, std::span<const double> actions);

/// Optimal Q by value iteration to a sup-norm change below `tol`.
Matrix value_iteration(const FlatMdp& mdp, double tol = 1e-13);

struct QLearningSettings {
  long episodes = 2000;
  int horizon = 50;
  /// Step size at the n-th visit of (s, a) is scale / n^exponent.
  double step_scale = 1.0;
  double step_exponent = 1.0;
  std::uint64_t seed = 0;
};

/// Tabular Q-learning with uniformly random behaviour and uniformly random
/// episode starts. Throws SolverError when the table diverges.
Matrix q_learning_reference(const FlatMdp& mdp, const QLearningSettings& settings);

}  // namespace ace::ocad
