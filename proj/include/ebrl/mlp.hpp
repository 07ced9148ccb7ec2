#pragma once

// Dense MLP with explicit parameter/gradient storage and hand-rolled
// forward/backward passes. Hidden layers are rectified; the output layer is
// identity (critic) or tanh (actor). Columns of a batch matrix are samples.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "ebrl/errors.hpp"

namespace ebrl {

class Mlp {
 public:
  enum class Output { kIdentity, kTanh };

  // layer_sizes = {input, hidden..., output}; Xavier-uniform weights, zero
  // biases, drawn deterministically from the seed.
  Mlp(std::vector<int> layer_sizes, Output output, std::uint64_t seed);

  int input_dim() const { return layer_sizes_.front(); }
  int output_dim() const { return layer_sizes_.back(); }
  const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  Output output_kind() const { return output_; }

  struct Cache {
    std::vector<Eigen::MatrixXd> activations;  // activations[0] = input
    std::vector<Eigen::MatrixXd> pre;          // pre-activations per layer
  };

  struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
  };

  Eigen::MatrixXd forward(const Eigen::MatrixXd& input) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& input, Cache& cache) const;

  // Backpropagates dL/d(output); returns dL/d(input). Parameter gradients
  // are accumulated into *grads when non-null (grads may start empty).
  Eigen::MatrixXd backward(const Cache& cache,
                           const Eigen::MatrixXd& grad_output,
                           Gradients* grads) const;

  // Plain gradient step: theta -= lr * grad.
  void apply_gradients(const Gradients& grads, double lr);

  const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
  const std::vector<Eigen::VectorXd>& biases() const { return biases_; }

  // Flat parameter view (layer-major, weights column-major then bias) used by
  // finite-difference checks and serialization.
  std::size_t parameter_count() const;
  double parameter(std::size_t i) const;
  void set_parameter(std::size_t i, double value);

  bool parameters_finite() const;

  void save(std::ostream& out) const;
  static Mlp load(std::istream& in);

  friend void polyak_update(Mlp& target, const Mlp& live, double tau);

 private:
  Mlp() = default;

  std::vector<int> layer_sizes_;
  Output output_ = Output::kIdentity;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

// theta_target <- (1 - tau) * theta_target + tau * theta_live, elementwise.
// ShapeError when architectures differ.
void polyak_update(Mlp& target, const Mlp& live, double tau);

}  // namespace ebrl
