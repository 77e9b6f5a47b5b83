#include <doctest.h>

#include <cmath>

#include "ace/envs/env.hpp"
#include "ace/errors.hpp"

using namespace ace;
using namespace ace::envs;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

// Scalar discounted Riccati fixed point for s' = A s + B a, cost s^2 + R a^2.
std::pair<double, double> riccati(double a, double b, double r, double gamma) {
  double p = 1.0;
  for (int i = 0; i < 100000; ++i) {
    const double next = 1.0 + gamma * a * a * p -
                        (gamma * a * b * p) * (gamma * a * b * p) / (r + gamma * b * b * p);
    if (next == p) break;
    p = next;
  }
  return {p, gamma * a * b * p / (r + gamma * b * b * p)};
}

}  // namespace

TEST_CASE("unknown environment names are rejected") {
  CHECK_THROWS_AS(make_spec("cartpole"), ConfigError);
  for (const auto& n : env_names()) CHECK(make_spec(n).name == n);
}

TEST_CASE("reset and step are deterministic given the seed") {
  for (const auto& name : env_names()) {
    Env a(make_spec(name));
    Env b(make_spec(name));
    CHECK(a.reset(42) == b.reset(42));
    Vector act = Vector::Constant(a.spec().act_dim, 0.3);
    while (!a.done()) {
      const auto ra = a.step(act);
      const auto rb = b.step(act);
      CHECK(ra.observation == rb.observation);
      CHECK(ra.reward == rb.reward);
      CHECK(ra.terminal == rb.terminal);
      CHECK(ra.timeout == rb.timeout);
    }
    CHECK(b.done());
    Env c(make_spec(name));
    CHECK(c.reset(43) != a.reset(42));
  }
}

TEST_CASE("multi-max landscape: grid search finds the global bump") {
  const int n = 401;
  double best = -1.0;
  double bx = 0.0;
  double by = 0.0;
  double best_near_local = -1.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double x = -1.0 + 2.0 * i / (n - 1);
      const double y = -1.0 + 2.0 * j / (n - 1);
      const double r = multimax_reward(x, y);
      if (r > best) {
        best = r;
        bx = x;
        by = y;
      }
      if (std::hypot(x - kLocalCenter[0], y - kLocalCenter[1]) <= 0.2) {
        best_near_local = std::max(best_near_local, r);
      }
    }
  }
  CHECK(std::hypot(bx - kGlobalCenter[0], by - kGlobalCenter[1]) <= 0.005);
  CHECK(best == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(best - best_near_local >= 0.39);
}

TEST_CASE("bandit episodes are one step and terminal") {
  Env env(make_spec("multimax-bandit"));
  env.reset(1);
  const auto r = env.step(vec({0.7, 0.7}));
  CHECK(r.terminal);
  CHECK_FALSE(r.timeout);
  CHECK(r.reward == doctest::Approx(1.0 + 0.6 * std::exp(-2 * 1.3 * 1.3 / 0.02)));
  CHECK_THROWS_AS(env.step(vec({0.0, 0.0})), ContractError);
}

TEST_CASE("pendulum upright at rest is an equilibrium") {
  Env env(make_spec("pendulum"));
  env.reset(0);
  env.set_state(vec({0.0, 0.0}));
  for (int i = 0; i < 10; ++i) {
    const auto r = env.step(vec({0.0}));
    CHECK(r.reward == 0.0);
    CHECK(r.observation == vec({1.0, 0.0, 0.0}));
  }
}

TEST_CASE("pendulum times out at 200 steps without a physical terminal") {
  Env env(make_spec("pendulum"));
  env.reset(3);
  StepResult r;
  int steps = 0;
  while (!env.done()) {
    r = env.step(vec({1.0}));
    ++steps;
    CHECK(std::abs(r.observation[2]) <= 8.0);
  }
  CHECK(steps == 200);
  CHECK(r.timeout);
  CHECK_FALSE(r.terminal);
}

TEST_CASE("lqr1d step") {
  Env env(make_spec("lqr1d"));
  env.reset(0);
  env.set_state(vec({1.0}));
  const auto r = env.step(vec({0.0}));
  CHECK(r.observation[0] == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(r.reward == -1.0);
  env.set_state(vec({0.0}));
  const auto r2 = env.step(vec({1.0}));
  CHECK(r2.observation[0] == 0.5);
  CHECK(r2.reward == doctest::Approx(-0.1).epsilon(1e-15));
}

TEST_CASE("lqr1d Riccati constants") {
  const auto [p, k] = riccati(0.9, 0.5, 0.1, 0.99);
  CHECK(p == doctest::Approx(1.2445955119378729).epsilon(1e-12));
  CHECK(k == doctest::Approx(1.3588639552104056).epsilon(1e-12));
  // The gain satisfies the first-order condition of the Bellman equation.
  const double grad = 2.0 * 0.1 * (-k) + 0.99 * 2.0 * p * (0.9 - 0.5 * k) * 0.5;
  CHECK(std::abs(grad) < 1e-12);
}

TEST_CASE("actions are clamped to the box") {
  Env a(make_spec("lqr1d"));
  Env b(make_spec("lqr1d"));
  a.reset(5);
  b.reset(5);
  const auto ra = a.step(vec({7.0}));
  const auto rb = b.step(vec({1.0}));
  CHECK(ra.observation == rb.observation);
  CHECK(ra.reward == rb.reward);

  Env m(make_spec("point-maze"));
  m.reset(0);
  m.set_state(vec({0.95, -0.95}));
  const auto rm = m.step(vec({5.0, -5.0}));
  CHECK(rm.observation == vec({1.0, -1.0}));
}

TEST_CASE("point maze reward follows the position") {
  Env m(make_spec("point-maze"));
  m.reset(0);
  m.set_state(vec({0.6, 0.7}));
  const auto r = m.step(vec({1.0, 0.0}));
  CHECK(r.observation[0] == doctest::Approx(0.7));
  CHECK(r.reward == doctest::Approx(multimax_reward(r.observation[0], r.observation[1])));
  CHECK_FALSE(r.terminal);
}

TEST_CASE("contract violations") {
  Env env(make_spec("lqr1d"));
  CHECK_THROWS_AS(env.step(vec({0.0})), ContractError);
  env.reset(0);
  CHECK_THROWS_AS(env.step(vec({0.0, 0.0})), DimensionError);
  CHECK_THROWS_AS(env.step(vec({std::nan("")})), NumericError);
  int steps = 0;
  while (!env.done()) {
    env.step(vec({0.0}));
    ++steps;
  }
  CHECK(steps == 50);
  CHECK_THROWS_AS(env.step(vec({0.0})), ContractError);
}
