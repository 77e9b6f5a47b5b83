#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>

#include "ace/numcore/types.hpp"

namespace ace::ocad {

/// Finite option MDP with a scalar continuous action and deterministic
/// intra-option policies.
///
///   r(s, a)      = c0[s] + c1[s] a + c2[s] a^2
///   p(s'|s, a)   = softmax_{s'}(w[s, s'] a + b[s, s'])
///   mu_w(s)      = theta(w, s)
///   beta_w(s)    = logistic(nu(w, s))
///   pi(w | s)    = pi_omega(s, w)
struct TabularOptionMdp {
  int states = 1;
  int options = 1;
  double gamma = 0.9;
  Matrix reward_coef;    ///< S x 3: c0, c1, c2
  Matrix logit_slope;    ///< S x S
  Matrix logit_offset;   ///< S x S
  Matrix pi_omega;       ///< S x Omega, rows sum to 1
  Matrix theta;          ///< Omega x S
  Matrix nu;             ///< Omega x S
  int start_state = 0;
  int start_option = 0;
  /// When finite, every beta_w(s) equals this value instead of logistic(nu).
  double fixed_beta = std::numeric_limits<double>::quiet_NaN();

  double reward(int s, double a) const;
  double reward_da(int s, double a) const;
  /// Row p(.|s, a) as a column vector.
  Vector transition(int s, double a) const;
  /// d/da p(.|s, a).
  Vector transition_da(int s, double a) const;
  double mu(int w, int s) const { return theta(w, s); }
  double beta(int w, int s) const;
  /// d beta_w(s) / d nu(w, s); zero when beta is fixed.
  double beta_dnu(int w, int s) const;

  /// Throws ConfigError when sizes disagree, gamma is outside [0, 1),
  /// pi rows do not sum to one, or a fixed beta lies outside [0, 1].
  void validate() const;
};

/// Random instance: rewards, logits, pi, theta and nu drawn from `seed`.
/// gamma is drawn from [0.6, 0.95] unless given.
TabularOptionMdp random_option_mdp(std::uint64_t seed, int states, int options,
                                   double gamma = std::numeric_limits<double>::quiet_NaN());

/// Plain-text form; round-trips exactly.
void write_mdp(std::ostream& out, const TabularOptionMdp& mdp);
/// Throws ConfigError on malformed input.
TabularOptionMdp read_mdp(std::istream& in);
TabularOptionMdp load_mdp(const std::string& path);

}  // namespace ace::ocad
