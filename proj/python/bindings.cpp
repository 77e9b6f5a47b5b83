// Python bindings: environments, config parsing, training, evaluation and
// the verification checks.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "ace/errors.hpp"
#include "ace/harness/checks.hpp"
#include "ace/harness/experiments.hpp"

namespace py = pybind11;
using namespace ace;

namespace {

std::vector<double> to_list(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector from_list(const std::vector<double>& xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) v[static_cast<Eigen::Index>(i)] = xs[i];
  return v;
}

py::dict eval_dict(const agents::EvalRecord& r) {
  py::dict d;
  d["step"] = r.step;
  d["seed"] = r.seed;
  d["variant"] = r.variant;
  d["mean_return"] = r.mean_return;
  d["stderr_return"] = r.stderr_return;
  d["returns"] = r.returns;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "actor-ensemble reinforcement learning core";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<ContractError>(m, "ContractError", PyExc_RuntimeError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);

  m.def("env_names", &envs::env_names);
  m.def("multimax_reward", &envs::multimax_reward, py::arg("x0"), py::arg("x1"));

  py::class_<envs::Env>(m, "Env")
      .def(py::init([](const std::string& name) { return envs::Env(envs::make_spec(name)); }),
           py::arg("name"))
      .def_property_readonly("name", [](const envs::Env& e) { return e.spec().name; })
      .def_property_readonly("obs_dim", [](const envs::Env& e) { return e.spec().obs_dim; })
      .def_property_readonly("act_dim", [](const envs::Env& e) { return e.spec().act_dim; })
      .def_property_readonly("max_steps", [](const envs::Env& e) { return e.spec().max_steps; })
      .def("reset", [](envs::Env& e, std::uint64_t seed) { return to_list(e.reset(seed)); },
           py::arg("seed"))
      .def("step",
           [](envs::Env& e, const std::vector<double>& action) {
             const envs::StepResult r = e.step(from_list(action));
             return py::make_tuple(to_list(r.observation), r.reward, r.terminal, r.timeout);
           },
           py::arg("action"), "returns (observation, reward, terminal, timeout)")
      .def_property_readonly("state", [](const envs::Env& e) { return to_list(e.state()); })
      .def_property_readonly("done", &envs::Env::done);

  py::class_<harness::RunConfig>(m, "RunConfig")
      .def_readwrite("name", &harness::RunConfig::name)
      .def_readwrite("env", &harness::RunConfig::env)
      .def_readwrite("total_steps", &harness::RunConfig::total_steps)
      .def_readwrite("eval_interval", &harness::RunConfig::eval_interval)
      .def_readwrite("eval_episodes", &harness::RunConfig::eval_episodes)
      .def_readwrite("seeds", &harness::RunConfig::seeds)
      .def_property_readonly("actors", [](const harness::RunConfig& c) { return c.agent.actors; })
      .def_property_readonly("depth", [](const harness::RunConfig& c) { return c.agent.depth; })
      .def_property_readonly("variant",
                             [](const harness::RunConfig& c) {
                               return std::string(agents::variant_name(c.agent.variant));
                             })
      .def("serialize", [](const harness::RunConfig& c) { return harness::serialize(c); });

  m.def("parse_config", &harness::parse_run_config, py::arg("text"));
  m.def("load_config",
        [](const std::string& path) { return harness::load_run_config(path); }, py::arg("path"));
  m.def("config_keys", &harness::config_keys);

  m.def(
      "train_seed",
      [](const harness::RunConfig& cfg, std::uint64_t seed, const std::string& out_dir) {
        harness::SeedRun run;
        {
          py::gil_scoped_release release;
          run = harness::train_seed(cfg, seed, out_dir);
        }
        py::dict d;
        d["seed"] = run.seed;
        d["best_mean"] = run.best_mean;
        d["best_step"] = run.best_step;
        py::list evals;
        for (const auto& r : run.evals) evals.append(eval_dict(r));
        d["evals"] = evals;
        return d;
      },
      py::arg("config"), py::arg("seed"), py::arg("out_dir") = std::string(),
      "train one seed; writes artifacts only when out_dir is non-empty");

  m.def(
      "evaluate_checkpoint",
      [](const std::string& path, const std::string& env, int episodes, std::uint64_t seed) {
        const auto spec = envs::make_spec(env);
        const auto policy = harness::load_policy(path, spec);
        return eval_dict(harness::run_eval(policy, spec, episodes, seed));
      },
      py::arg("path"), py::arg("env"), py::arg("episodes") = 20, py::arg("seed") = 0);

  m.def(
      "diversity",
      [](const std::string& path, const std::string& env, int episodes, std::uint64_t seed) {
        const auto spec = envs::make_spec(env);
        const auto policy = harness::load_policy(path, spec);
        std::vector<std::tuple<int, double, double>> out;
        for (const auto& r : harness::run_diversity(policy, spec, episodes, seed)) {
          out.emplace_back(r.actor, r.mean, r.stderr_return);
        }
        return out;
      },
      py::arg("path"), py::arg("env"), py::arg("episodes") = 20, py::arg("seed") = 0);

  m.def(
      "verify",
      [](int instances, std::uint64_t seed) {
        harness::VerifyOptions opt;
        opt.instances = instances;
        opt.seed = seed;
        const auto rep = harness::run_verify(opt);
        std::vector<std::tuple<std::string, double, double, bool>> out;
        for (const auto& c : rep.checks) out.emplace_back(c.name, c.max_error, c.tolerance, c.pass);
        return out;
      },
      py::arg("instances") = 12, py::arg("seed") = 0,
      "list of (name, max_error, tolerance, pass)");

  m.def(
      "theorem_errors",
      [](std::uint64_t seed, int index) {
        const auto e = harness::theorem_errors(harness::verify_instance(seed, index));
        return py::make_tuple(e.dipg, e.termination);
      },
      py::arg("seed"), py::arg("index"), "(intra-option, termination) relative errors");
}
