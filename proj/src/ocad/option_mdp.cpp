#include "ace/ocad/option_mdp.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "ace/errors.hpp"
#include "ace/rng.hpp"

namespace ace::ocad {

double TabularOptionMdp::reward(int s, double a) const {
  return reward_coef(s, 0) + reward_coef(s, 1) * a + reward_coef(s, 2) * a * a;
}

double TabularOptionMdp::reward_da(int s, double a) const {
  return reward_coef(s, 1) + 2.0 * reward_coef(s, 2) * a;
}

Vector TabularOptionMdp::transition(int s, double a) const {
  Vector logits = logit_slope.row(s).transpose() * a + logit_offset.row(s).transpose();
  logits.array() -= logits.maxCoeff();
  Vector p = logits.array().exp();
  return p / p.sum();
}

Vector TabularOptionMdp::transition_da(int s, double a) const {
  const Vector p = transition(s, a);
  const Vector w = logit_slope.row(s).transpose();
  const double mean = p.dot(w);
  return p.array() * (w.array() - mean);
}

double TabularOptionMdp::beta(int w, int s) const {
  if (std::isfinite(fixed_beta)) return fixed_beta;
  return 1.0 / (1.0 + std::exp(-nu(w, s)));
}

double TabularOptionMdp::beta_dnu(int w, int s) const {
  if (std::isfinite(fixed_beta)) return 0.0;
  const double b = beta(w, s);
  return b * (1.0 - b);
}

void TabularOptionMdp::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("option mdp: ") + what);
  };
  need(states >= 1 && options >= 1, "need at least one state and one option");
  need(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
  need(reward_coef.rows() == states && reward_coef.cols() == 3, "reward_coef must be S x 3");
  need(logit_slope.rows() == states && logit_slope.cols() == states, "logit_slope must be S x S");
  need(logit_offset.rows() == states && logit_offset.cols() == states, "logit_offset must be S x S");
  need(pi_omega.rows() == states && pi_omega.cols() == options, "pi_omega must be S x Omega");
  need(theta.rows() == options && theta.cols() == states, "theta must be Omega x S");
  need(nu.rows() == options && nu.cols() == states, "nu must be Omega x S");
  need(start_state >= 0 && start_state < states, "start state out of range");
  need(start_option >= 0 && start_option < options, "start option out of range");
  for (int s = 0; s < states; ++s) {
    need(std::abs(pi_omega.row(s).sum() - 1.0) < 1e-12 && pi_omega.row(s).minCoeff() >= 0.0,
         "pi_omega rows must be distributions");
  }
  need(!std::isfinite(fixed_beta) || (fixed_beta >= 0.0 && fixed_beta <= 1.0),
       "fixed beta must lie in [0, 1]");
  need(reward_coef.allFinite() && logit_slope.allFinite() && logit_offset.allFinite() &&
           theta.allFinite() && nu.allFinite(),
       "non-finite coefficient");
}

TabularOptionMdp random_option_mdp(std::uint64_t seed, int states, int options, double gamma) {
  if (states < 1 || options < 1) throw ConfigError("random_option_mdp: empty instance");
  Rng rng(derive_seed(seed, "ocad"));
  TabularOptionMdp m;
  m.states = states;
  m.options = options;
  m.gamma = std::isfinite(gamma) ? gamma : rng.uniform(0.6, 0.95);
  auto fill = [&](Matrix& x, int r, int c, auto draw) {
    x.resize(r, c);
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < c; ++j) x(i, j) = draw();
    }
  };
  fill(m.reward_coef, states, 3, [&] { return rng.uniform(-1.0, 1.0); });
  fill(m.logit_slope, states, states, [&] { return rng.normal(); });
  fill(m.logit_offset, states, states, [&] { return rng.normal(); });
  fill(m.pi_omega, states, options, [&] { return std::exp(rng.normal()); });
  for (int s = 0; s < states; ++s) m.pi_omega.row(s) /= m.pi_omega.row(s).sum();
  fill(m.theta, options, states, [&] { return rng.uniform(-1.0, 1.0); });
  fill(m.nu, options, states, [&] { return rng.normal(); });
  m.start_state = static_cast<int>(rng.index(static_cast<std::size_t>(states)));
  m.start_option = static_cast<int>(rng.index(static_cast<std::size_t>(options)));
  m.validate();
  return m;
}

namespace {

void write_matrix(std::ostream& out, const char* name, const Matrix& x) {
  out << name << ' ' << x.rows() << ' ' << x.cols() << '\n';
  char buf[40];
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", x(i, j));
      out << (j ? " " : "") << buf;
    }
    out << '\n';
  }
}

void expect(std::istream& in, const std::string& word) {
  std::string got;
  if (!(in >> got) || got != word) {
    throw ConfigError("option mdp: expected '" + word + "', got '" + got + "'");
  }
}

Matrix read_matrix(std::istream& in, const char* name) {
  expect(in, name);
  Eigen::Index r = 0;
  Eigen::Index c = 0;
  if (!(in >> r >> c) || r < 0 || c < 0) throw ConfigError(std::string("option mdp: bad shape of ") + name);
  Matrix x(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) {
      std::string tok;
      if (!(in >> tok)) throw ConfigError(std::string("option mdp: truncated ") + name);
      try {
        x(i, j) = std::stod(tok);
      } catch (const std::exception&) {
        throw ConfigError("option mdp: bad number '" + tok + "'");
      }
    }
  }
  return x;
}

}  // namespace

void write_mdp(std::ostream& out, const TabularOptionMdp& m) {
  char buf[40];
  out << "ocad-mdp v1\n";
  out << "states " << m.states << "\noptions " << m.options << '\n';
  std::snprintf(buf, sizeof buf, "%.17g", m.gamma);
  out << "gamma " << buf << '\n';
  out << "start " << m.start_state << ' ' << m.start_option << '\n';
  if (std::isfinite(m.fixed_beta)) {
    std::snprintf(buf, sizeof buf, "%.17g", m.fixed_beta);
    out << "fixed_beta " << buf << '\n';
  } else {
    out << "fixed_beta none\n";
  }
  write_matrix(out, "reward_coef", m.reward_coef);
  write_matrix(out, "logit_slope", m.logit_slope);
  write_matrix(out, "logit_offset", m.logit_offset);
  write_matrix(out, "pi_omega", m.pi_omega);
  write_matrix(out, "theta", m.theta);
  write_matrix(out, "nu", m.nu);
}

TabularOptionMdp read_mdp(std::istream& in) {
  TabularOptionMdp m;
  expect(in, "ocad-mdp");
  expect(in, "v1");
  expect(in, "states");
  in >> m.states;
  expect(in, "options");
  in >> m.options;
  expect(in, "gamma");
  std::string tok;
  in >> tok;
  try {
    m.gamma = std::stod(tok);
  } catch (const std::exception&) {
    throw ConfigError("option mdp: bad gamma '" + tok + "'");
  }
  expect(in, "start");
  in >> m.start_state >> m.start_option;
  expect(in, "fixed_beta");
  in >> tok;
  if (tok != "none") {
    try {
      m.fixed_beta = std::stod(tok);
    } catch (const std::exception&) {
      throw ConfigError("option mdp: bad fixed_beta '" + tok + "'");
    }
  }
  if (!in) throw ConfigError("option mdp: truncated header");
  m.reward_coef = read_matrix(in, "reward_coef");
  m.logit_slope = read_matrix(in, "logit_slope");
  m.logit_offset = read_matrix(in, "logit_offset");
  m.pi_omega = read_matrix(in, "pi_omega");
  m.theta = read_matrix(in, "theta");
  m.nu = read_matrix(in, "nu");
  m.validate();
  return m;
}

TabularOptionMdp load_mdp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return read_mdp(in);
}

}  // namespace ace::ocad
