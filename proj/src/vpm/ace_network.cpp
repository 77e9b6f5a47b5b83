#include "ace/vpm/ace_network.hpp"

#include <cmath>

#include "ace/errors.hpp"
#include "ace/numcore/kernels.hpp"
#include "ace/rng.hpp"

namespace ace::vpm {

namespace kern = num::kernels;
using num::NodeId;
using num::ParamRef;
using num::Tape;

namespace {

std::string head_name(int i) { return "actor.head" + std::to_string(i); }

Matrix uniform_block(std::uint64_t seed, const std::string& name, Eigen::Index rows,
                     Eigen::Index cols, double half_width) {
  Rng rng(derive_seed(seed, name));
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.uniform(-half_width, half_width);
  }
  return m;
}

// Hidden layers use U(+-1/sqrt(fan_in)) for both weight and bias.
void add_hidden(num::ParamStore& store, std::uint64_t seed, const std::string& prefix, int in,
                int out) {
  const double w = 1.0 / std::sqrt(static_cast<double>(in));
  store.add(prefix + ".w", uniform_block(seed, prefix + ".w", out, in, w));
  store.add(prefix + ".b", uniform_block(seed, prefix + ".b", out, 1, w));
}

void add_output(num::ParamStore& store, std::uint64_t seed, const std::string& prefix, int in,
                int out, double w_range, double b_range) {
  store.add(prefix + ".w", uniform_block(seed, prefix + ".w", out, in, w_range));
  store.add(prefix + ".b", uniform_block(seed, prefix + ".b", out, 1, b_range));
}

void validate(const NetworkShape& s) {
  if (s.obs_dim <= 0 || s.act_dim <= 0 || s.latent <= 0 || s.hidden <= 0 || s.actors < 1) {
    throw ConfigError("network shape: all sizes must be positive and N >= 1");
  }
}

}  // namespace

AceNetwork::AceNetwork(NetworkShape shape, std::uint64_t seed, InitOptions init)
    : shape_(shape) {
  validate(shape_);
  const int n = shape_.latent, h = shape_.hidden, m = shape_.act_dim, o = shape_.obs_dim;
  add_hidden(params_, seed, "enc", o, n);
  if (shape_.separate_actor_encoder) add_hidden(params_, seed, "actor.enc", o, n);
  add_hidden(params_, seed, "actor.shared", n, h);
  for (int i = 0; i < shape_.actors; ++i) {
    add_output(params_, seed, head_name(i), h, m, init.output_range, init.actor_bias_range);
  }
  add_hidden(params_, seed, "q.hidden", n + m, h);
  add_output(params_, seed, "q.out", h, 1, init.output_range, init.output_range);
  if (shape_.has_model) {
    add_hidden(params_, seed, "rew.hidden", n + m, h);
    add_output(params_, seed, "rew.out", h, 1, init.output_range, init.output_range);
    add_hidden(params_, seed, "trans.g1", n + m, n);
    add_hidden(params_, seed, "trans.g2", n, n);
  }
  bind_layers();
}

AceNetwork::AceNetwork(NetworkShape shape, num::ParamStore params)
    : shape_(shape), params_(std::move(params)) {
  validate(shape_);
  bind_layers();
  const int n = shape_.latent, h = shape_.hidden, m = shape_.act_dim, o = shape_.obs_dim;
  auto expect = [this](const Layer& l, int out, int in) {
    const auto& w = params_.block(l.weight);
    const auto& b = params_.block(l.bias);
    if (w.value.rows() != out || w.value.cols() != in || b.value.rows() != out ||
        b.value.cols() != 1) {
      throw DimensionError("network: block '" + w.name + "' has the wrong shape");
    }
  };
  expect(enc_, n, o);
  if (shape_.separate_actor_encoder) expect(actor_enc_, n, o);
  expect(shared_, h, n);
  for (const auto& hd : heads_) expect(hd, m, h);
  expect(q_hidden_, h, n + m);
  expect(q_out_, 1, h);
  if (shape_.has_model) {
    expect(rew_hidden_, h, n + m);
    expect(rew_out_, 1, h);
    expect(g1_, n, n + m);
    expect(g2_, n, n);
  }
}

void AceNetwork::bind_layers() {
  auto bind = [this](const std::string& prefix) {
    try {
      return Layer{params_.index(prefix + ".w"), params_.index(prefix + ".b")};
    } catch (const ConfigError&) {
      throw DimensionError("network: missing block '" + prefix + "'");
    }
  };
  enc_ = bind("enc");
  if (shape_.separate_actor_encoder) actor_enc_ = bind("actor.enc");
  shared_ = bind("actor.shared");
  heads_.clear();
  for (int i = 0; i < shape_.actors; ++i) heads_.push_back(bind(head_name(i)));
  q_hidden_ = bind("q.hidden");
  q_out_ = bind("q.out");
  if (shape_.has_model) {
    rew_hidden_ = bind("rew.hidden");
    rew_out_ = bind("rew.out");
    g1_ = bind("trans.g1");
    g2_ = bind("trans.g2");
  }
}

std::vector<int> AceNetwork::critic_blocks() const {
  std::vector<int> ids;
  for (const Layer* l : {&enc_, &q_hidden_, &q_out_}) {
    ids.push_back(l->weight);
    ids.push_back(l->bias);
  }
  if (shape_.has_model) {
    for (const Layer* l : {&rew_hidden_, &rew_out_, &g1_, &g2_}) {
      ids.push_back(l->weight);
      ids.push_back(l->bias);
    }
  }
  return ids;
}

std::vector<int> AceNetwork::actor_blocks() const {
  std::vector<int> ids;
  const Layer& e = shape_.separate_actor_encoder ? actor_enc_ : enc_;
  ids.push_back(e.weight);
  ids.push_back(e.bias);
  ids.push_back(shared_.weight);
  ids.push_back(shared_.bias);
  for (const auto& hd : heads_) {
    ids.push_back(hd.weight);
    ids.push_back(hd.bias);
  }
  return ids;
}

std::vector<int> AceNetwork::head_blocks(int actor) const {
  check_actor(actor);
  const Layer& hd = heads_[static_cast<std::size_t>(actor)];
  return {hd.weight, hd.bias};
}

void AceNetwork::check_actor(int actor) const {
  if (actor < 0 || actor >= shape_.actors) {
    throw ContractError("actor index " + std::to_string(actor) + " outside [0, " +
                        std::to_string(shape_.actors) + ")");
  }
}

// ---- taped ----

NodeId AceNetwork::layer(Tape& tape, const Layer& l, NodeId x, bool track) {
  return tape.affine(x, ParamRef{&params_, l.weight, track}, ParamRef{&params_, l.bias, track});
}

NodeId AceNetwork::encode(Tape& tape, NodeId obs, bool track) {
  return tape.tanh(layer(tape, enc_, obs, track));
}

NodeId AceNetwork::policy_latent(Tape& tape, NodeId obs, bool track) {
  if (!shape_.separate_actor_encoder) return encode(tape, obs, track);
  return tape.tanh(layer(tape, actor_enc_, obs, track));
}

NodeId AceNetwork::trunk(Tape& tape, NodeId z, bool track) {
  return tape.tanh(layer(tape, shared_, z, track));
}

NodeId AceNetwork::act(Tape& tape, int actor, NodeId z, bool track) {
  check_actor(actor);
  return tape.tanh(layer(tape, heads_[static_cast<std::size_t>(actor)], trunk(tape, z, track), track));
}

std::vector<NodeId> AceNetwork::act_all(Tape& tape, NodeId z, bool track) {
  const NodeId t = trunk(tape, z, track);
  std::vector<NodeId> out;
  out.reserve(heads_.size());
  for (const auto& hd : heads_) out.push_back(tape.tanh(layer(tape, hd, t, track)));
  return out;
}

NodeId AceNetwork::reward(Tape& tape, NodeId z, NodeId a, bool track) {
  if (!shape_.has_model) throw ContractError("reward head requested on a model-free network");
  const NodeId hid = tape.tanh(layer(tape, rew_hidden_, tape.concat(z, a), track));
  return layer(tape, rew_out_, hid, track);
}

NodeId AceNetwork::transition(Tape& tape, NodeId z, NodeId a, bool track) {
  if (!shape_.has_model) throw ContractError("transition head requested on a model-free network");
  const NodeId inner = tape.add(z, tape.tanh(layer(tape, g1_, tape.concat(z, a), track)));
  return tape.add(z, tape.tanh(layer(tape, g2_, inner, track)));
}

NodeId AceNetwork::value(Tape& tape, NodeId z, NodeId a, bool track) {
  const NodeId hid = tape.tanh(layer(tape, q_hidden_, tape.concat(z, a), track));
  return layer(tape, q_out_, hid, track);
}

// ---- plain ----

Matrix AceNetwork::layer(const Layer& l, const Matrix& x) const {
  return kern::affine(x, params_.block(l.weight).value, params_.block(l.bias).value);
}

Matrix AceNetwork::encode(const Matrix& obs) const {
  Matrix z = layer(enc_, obs);
  kern::tanh_inplace(z);
  return z;
}

Matrix AceNetwork::policy_latent(const Matrix& obs) const {
  if (!shape_.separate_actor_encoder) return encode(obs);
  Matrix z = layer(actor_enc_, obs);
  kern::tanh_inplace(z);
  return z;
}

Matrix AceNetwork::trunk(const Matrix& z) const {
  Matrix t = layer(shared_, z);
  kern::tanh_inplace(t);
  return t;
}

Matrix AceNetwork::act(int actor, const Matrix& z) const {
  check_actor(actor);
  Matrix a = layer(heads_[static_cast<std::size_t>(actor)], trunk(z));
  kern::tanh_inplace(a);
  return a;
}

std::vector<Matrix> AceNetwork::act_all(const Matrix& z) const {
  const Matrix t = trunk(z);
  std::vector<Matrix> out;
  out.reserve(heads_.size());
  for (const auto& hd : heads_) {
    Matrix a = layer(hd, t);
    kern::tanh_inplace(a);
    out.push_back(std::move(a));
  }
  return out;
}

Matrix AceNetwork::reward(const Matrix& z, const Matrix& a) const {
  if (!shape_.has_model) throw ContractError("reward head requested on a model-free network");
  Matrix hid = layer(rew_hidden_, kern::concat(z, a));
  kern::tanh_inplace(hid);
  return layer(rew_out_, hid);
}

Matrix AceNetwork::transition(const Matrix& z, const Matrix& a) const {
  if (!shape_.has_model) throw ContractError("transition head requested on a model-free network");
  Matrix g = layer(g1_, kern::concat(z, a));
  kern::tanh_inplace(g);
  const Matrix inner = z + g;
  Matrix g2 = layer(g2_, inner);
  kern::tanh_inplace(g2);
  return z + g2;
}

Matrix AceNetwork::value(const Matrix& z, const Matrix& a) const {
  Matrix hid = layer(q_hidden_, kern::concat(z, a));
  kern::tanh_inplace(hid);
  return layer(q_out_, hid);
}

}  // namespace ace::vpm
