#pragma once

// Fully-connected Q-network: ReLU hidden layers, linear scalar head,
// hand-written backpropagation, Adam and polyak averaging.

#include <Eigen/Dense>
#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bpl/world.hpp"

namespace bpl {

class DimensionError : public Error {
 public:
  using Error::Error;
};

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
};

struct MLPParams {
  std::vector<DenseLayer> layers;

  std::size_t input_dim() const;
  std::size_t num_parameters() const;
  bool same_shape(const MLPParams& other) const;
  bool all_finite() const;

  friend bool operator==(const MLPParams& a, const MLPParams& b);
};

// Gradients share the parameter layout.
using MLPGrads = MLPParams;

inline const std::vector<std::size_t> kDefaultHidden{32, 32};

// Weights and biases drawn from U(-sqrt(1/fan_in), sqrt(1/fan_in)).
MLPParams init_mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden, std::mt19937_64& rng);
MLPParams zeros_like(const MLPParams& params);

double forward(const MLPParams& params, std::span<const double> input);
// Columns of `inputs` are samples; returns one value per column.
Eigen::VectorXd forward_batch(const MLPParams& params, const Eigen::MatrixXd& inputs);

// Q for every (state column, action column) pair, where the network input is
// state ++ action. Returns states.cols() x actions.cols().
Eigen::MatrixXd forward_product(const MLPParams& params, const Eigen::MatrixXd& states,
                                const Eigen::MatrixXd& actions);

MLPGrads backward(const MLPParams& params, std::span<const double> input, double upstream);
// Sum over columns of upstream[j] * d out(inputs.col(j)) / d params.
MLPGrads backward_batch(const MLPParams& params, const Eigen::MatrixXd& inputs, const Eigen::VectorXd& upstream);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

struct AdamState {
  MLPParams m;
  MLPParams v;
  long long t = 0;
};

AdamState init_adam(const MLPParams& params);

// In-place Adam update with bias correction; increments state.t.
void adam_step(MLPParams& params, const MLPGrads& grads, AdamState& state, const AdamConfig& config = {});

// (1 - tau) * target + tau * online.
MLPParams polyak(const MLPParams& target, const MLPParams& online, double tau);
void polyak_inplace(MLPParams& target, const MLPParams& online, double tau);

// Checkpoint text: {"format":"bpl-mlp-1","layers":[{"rows","cols","weights"
// (row-major),"bias"}...]}. Throws Error on malformed input.
std::string mlp_to_checkpoint(const MLPParams& params);
MLPParams mlp_from_checkpoint(std::string_view text);

}  // namespace bpl
