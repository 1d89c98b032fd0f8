#include <algorithm>
#include <cmath>

#include "bpl/neural.hpp"
#include "json_io.hpp"

namespace bpl {

std::size_t MLPParams::input_dim() const {
  return layers.empty() ? 0 : static_cast<std::size_t>(layers.front().weights.cols());
}

std::size_t MLPParams::num_parameters() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return n;
}

bool MLPParams::same_shape(const MLPParams& other) const {
  if (layers.size() != other.layers.size()) return false;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& a = layers[i];
    const auto& b = other.layers[i];
    if (a.weights.rows() != b.weights.rows() || a.weights.cols() != b.weights.cols() ||
        a.bias.size() != b.bias.size()) {
      return false;
    }
  }
  return true;
}

bool MLPParams::all_finite() const {
  for (const auto& l : layers) {
    if (!l.weights.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

bool operator==(const MLPParams& a, const MLPParams& b) {
  if (!a.same_shape(b)) return false;
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    if (a.layers[i].weights != b.layers[i].weights || a.layers[i].bias != b.layers[i].bias) return false;
  }
  return true;
}

MLPParams init_mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden, std::mt19937_64& rng) {
  if (input_dim == 0) throw DimensionError("init_mlp: input_dim must be positive");
  MLPParams p;
  std::size_t fan_in = input_dim;
  std::vector<std::size_t> widths = hidden;
  widths.push_back(1);
  for (std::size_t out : widths) {
    const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    DenseLayer layer;
    layer.weights.resize(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(fan_in));
    layer.bias.resize(static_cast<Eigen::Index>(out));
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = u(rng);
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = u(rng);
    p.layers.push_back(std::move(layer));
    fan_in = out;
  }
  return p;
}

MLPParams zeros_like(const MLPParams& params) {
  MLPParams z;
  for (const auto& l : params.layers) {
    z.layers.push_back({Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()),
                        Eigen::VectorXd::Zero(l.bias.size())});
  }
  return z;
}

namespace {

void check_input(const MLPParams& params, Eigen::Index rows) {
  if (params.layers.empty()) throw DimensionError("network has no layers");
  if (static_cast<std::size_t>(rows) != params.input_dim()) {
    throw DimensionError("input length " + std::to_string(rows) + " does not match network input " +
                         std::to_string(params.input_dim()));
  }
}

// Pre-activations per layer; activations[0] is the input.
struct Trace {
  std::vector<Eigen::MatrixXd> activations;
  std::vector<Eigen::MatrixXd> pre;
};

Trace run(const MLPParams& params, const Eigen::MatrixXd& inputs) {
  Trace t;
  t.activations.push_back(inputs);
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    const auto& l = params.layers[i];
    Eigen::MatrixXd z = l.weights * t.activations.back();
    z.colwise() += l.bias;
    const bool last = i + 1 == params.layers.size();
    t.activations.push_back(last ? z : z.cwiseMax(0.0));
    t.pre.push_back(std::move(z));
  }
  return t;
}

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> input) {
  return {input.data(), static_cast<Eigen::Index>(input.size())};
}

}  // namespace

double forward(const MLPParams& params, std::span<const double> input) {
  check_input(params, static_cast<Eigen::Index>(input.size()));
  Eigen::VectorXd a = as_vector(input);
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    const auto& l = params.layers[i];
    Eigen::VectorXd z = l.weights * a + l.bias;
    a = i + 1 == params.layers.size() ? z : z.cwiseMax(0.0);
  }
  return a(0);
}

Eigen::VectorXd forward_batch(const MLPParams& params, const Eigen::MatrixXd& inputs) {
  check_input(params, inputs.rows());
  Eigen::MatrixXd a = inputs;
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    const auto& l = params.layers[i];
    Eigen::MatrixXd z = l.weights * a;
    z.colwise() += l.bias;
    a = i + 1 == params.layers.size() ? z : z.cwiseMax(0.0);
  }
  return a.row(0).transpose();
}

Eigen::MatrixXd forward_product(const MLPParams& params, const Eigen::MatrixXd& states,
                                const Eigen::MatrixXd& actions) {
  check_input(params, states.rows() + actions.rows());
  if (params.layers.size() < 2) throw DimensionError("forward_product needs a hidden layer");
  const auto& first = params.layers.front();
  const Eigen::MatrixXd px = first.weights.leftCols(states.rows()) * states;
  Eigen::MatrixXd pa = first.weights.rightCols(actions.rows()) * actions;
  pa.colwise() += first.bias;

  const Eigen::Index ns = states.cols();
  const Eigen::Index na = actions.cols();
  Eigen::MatrixXd out(ns, na);
  if (ns == 0 || na == 0) return out;
  // Blocks of states keep the pair activations small enough to stay off mmap.
  constexpr Eigen::Index kPairsPerBlock = 512;
  const Eigen::Index block = std::max<Eigen::Index>(1, kPairsPerBlock / na);
  Eigen::MatrixXd a, z;
  for (Eigen::Index s0 = 0; s0 < ns; s0 += block) {
    const Eigen::Index count = std::min(block, ns - s0);
    // Column s * na + c holds the pair (state s0 + s, action c).
    a.resize(pa.rows(), count * na);
    for (Eigen::Index s = 0; s < count; ++s) {
      a.middleCols(s * na, na) = (pa.colwise() + px.col(s0 + s)).cwiseMax(0.0);
    }
    for (std::size_t i = 1; i < params.layers.size(); ++i) {
      const auto& l = params.layers[i];
      z.noalias() = l.weights * a;
      z.colwise() += l.bias;
      if (i + 1 == params.layers.size()) {
        a.swap(z);
      } else {
        a = z.cwiseMax(0.0);
      }
    }
    for (Eigen::Index s = 0; s < count; ++s) out.row(s0 + s) = a.row(0).segment(s * na, na);
  }
  return out;
}

MLPGrads backward_batch(const MLPParams& params, const Eigen::MatrixXd& inputs, const Eigen::VectorXd& upstream) {
  check_input(params, inputs.rows());
  if (upstream.size() != inputs.cols()) throw DimensionError("upstream length does not match batch size");
  const Trace t = run(params, inputs);
  MLPGrads g = zeros_like(params);
  Eigen::MatrixXd delta = upstream.transpose();
  for (std::size_t i = params.layers.size(); i-- > 0;) {
    g.layers[i].weights = delta * t.activations[i].transpose();
    g.layers[i].bias = delta.rowwise().sum();
    if (i == 0) break;
    delta = params.layers[i].weights.transpose() * delta;
    delta = delta.cwiseProduct((t.pre[i - 1].array() > 0.0).cast<double>().matrix());
  }
  return g;
}

MLPGrads backward(const MLPParams& params, std::span<const double> input, double upstream) {
  check_input(params, static_cast<Eigen::Index>(input.size()));
  Eigen::MatrixXd x = as_vector(input);
  Eigen::VectorXd u(1);
  u(0) = upstream;
  return backward_batch(params, x, u);
}

AdamState init_adam(const MLPParams& params) { return {zeros_like(params), zeros_like(params), 0}; }

void adam_step(MLPParams& params, const MLPGrads& grads, AdamState& state, const AdamConfig& config) {
  if (!params.same_shape(grads) || !params.same_shape(state.m) || !params.same_shape(state.v)) {
    throw DimensionError("adam_step: shape mismatch");
  }
  ++state.t;
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.t));
  auto update = [&](auto& p, const auto& g_in, auto& m, auto& v) {
    const auto g = (g_in.array() + config.weight_decay * p.array()).eval();
    m.array() = config.beta1 * m.array() + (1.0 - config.beta1) * g;
    v.array() = config.beta2 * v.array() + (1.0 - config.beta2) * g.square();
    p.array() -= config.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + config.eps);
  };
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    update(params.layers[i].weights, grads.layers[i].weights, state.m.layers[i].weights, state.v.layers[i].weights);
    update(params.layers[i].bias, grads.layers[i].bias, state.m.layers[i].bias, state.v.layers[i].bias);
  }
}

void polyak_inplace(MLPParams& target, const MLPParams& online, double tau) {
  if (!target.same_shape(online)) throw DimensionError("polyak: shape mismatch");
  for (std::size_t i = 0; i < target.layers.size(); ++i) {
    target.layers[i].weights = (1.0 - tau) * target.layers[i].weights + tau * online.layers[i].weights;
    target.layers[i].bias = (1.0 - tau) * target.layers[i].bias + tau * online.layers[i].bias;
  }
}

MLPParams polyak(const MLPParams& target, const MLPParams& online, double tau) {
  MLPParams out = target;
  polyak_inplace(out, online, tau);
  return out;
}

namespace detail {

nlohmann::json mlp_json(const MLPParams& params) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : params.layers) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(l.weights.size()));
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) w.push_back(l.weights(r, c));
    }
    std::vector<double> b(l.bias.data(), l.bias.data() + l.bias.size());
    layers.push_back({{"rows", l.weights.rows()}, {"cols", l.weights.cols()}, {"weights", w}, {"bias", b}});
  }
  return {{"format", "bpl-mlp-1"}, {"activation", "relu"}, {"layers", layers}};
}

MLPParams mlp_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "bpl-mlp-1") throw Error("unsupported checkpoint format");
    MLPParams p;
    for (const auto& jl : j.at("layers")) {
      const auto rows = jl.at("rows").get<Eigen::Index>();
      const auto cols = jl.at("cols").get<Eigen::Index>();
      const auto w = jl.at("weights").get<std::vector<double>>();
      const auto b = jl.at("bias").get<std::vector<double>>();
      if (rows <= 0 || cols <= 0 || static_cast<Eigen::Index>(w.size()) != rows * cols ||
          static_cast<Eigen::Index>(b.size()) != rows) {
        throw Error("checkpoint layer shape mismatch");
      }
      if (!p.layers.empty() && p.layers.back().weights.rows() != cols) throw Error("checkpoint layer chain mismatch");
      DenseLayer l;
      l.weights.resize(rows, cols);
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) l.weights(r, c) = w[static_cast<std::size_t>(r * cols + c)];
      }
      l.bias = Eigen::Map<const Eigen::VectorXd>(b.data(), rows);
      p.layers.push_back(std::move(l));
    }
    if (p.layers.empty() || p.layers.back().weights.rows() != 1) throw Error("checkpoint must end in a scalar head");
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed checkpoint: ") + e.what());
  }
}

}  // namespace detail

std::string mlp_to_checkpoint(const MLPParams& params) { return detail::mlp_json(params).dump(); }

MLPParams mlp_from_checkpoint(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed checkpoint: ") + e.what());
  }
  return detail::mlp_from_json(j);
}

}  // namespace bpl
