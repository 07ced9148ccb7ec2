#include "ebrl/mlp.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <random>

namespace ebrl {

namespace {

constexpr char kMagic[8] = {'E', 'B', 'R', 'L', 'M', 'L', 'P', '1'};

void write_raw(std::ostream& out, const void* data, std::size_t bytes) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
}

void read_raw(std::istream& in, void* data, std::size_t bytes) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(bytes));
  if (!in) throw IoError("truncated mlp stream");
}

}  // namespace

Mlp::Mlp(std::vector<int> layer_sizes, Output output, std::uint64_t seed)
    : layer_sizes_(std::move(layer_sizes)), output_(output) {
  if (layer_sizes_.size() < 2)
    throw ShapeError("mlp needs at least input and output layers");
  for (int s : layer_sizes_)
    if (s <= 0) throw ShapeError("mlp layer sizes must be positive");

  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < layer_sizes_.size(); ++l) {
    const int fan_in = layer_sizes_[l];
    const int fan_out = layer_sizes_[l + 1];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Eigen::MatrixXd w(fan_out, fan_in);
    for (int c = 0; c < fan_in; ++c)
      for (int r = 0; r < fan_out; ++r) w(r, c) = dist(rng);
    weights_.push_back(std::move(w));
    biases_.emplace_back(Eigen::VectorXd::Zero(fan_out));
  }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input) const {
  Cache cache;
  return forward(input, cache);
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input,
                             Cache& cache) const {
  if (input.rows() != input_dim())
    throw ShapeError("mlp input dimension mismatch");

  cache.activations.clear();
  cache.pre.clear();
  cache.activations.push_back(input);

  Eigen::MatrixXd h = input;
  const std::size_t last = weights_.size() - 1;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::MatrixXd z = (weights_[l] * h).colwise() + biases_[l];
    cache.pre.push_back(z);
    if (l < last) {
      h = z.cwiseMax(0.0);
    } else if (output_ == Output::kTanh) {
      h = z.array().tanh().matrix();
    } else {
      h = z;
    }
    cache.activations.push_back(h);
  }
  return h;
}

Eigen::MatrixXd Mlp::backward(const Cache& cache,
                              const Eigen::MatrixXd& grad_output,
                              Gradients* grads) const {
  const std::size_t layers = weights_.size();
  if (cache.pre.size() != layers)
    throw ShapeError("mlp cache does not match network");
  if (grad_output.rows() != output_dim() ||
      grad_output.cols() != cache.pre.back().cols())
    throw ShapeError("mlp output gradient shape mismatch");

  if (grads) {
    grads->weights.assign(layers, Eigen::MatrixXd());
    grads->biases.assign(layers, Eigen::VectorXd());
  }

  Eigen::MatrixXd dz;
  if (output_ == Output::kTanh) {
    const Eigen::MatrixXd& y = cache.activations.back();
    dz = grad_output.cwiseProduct(
        (1.0 - y.array().square()).matrix());
  } else {
    dz = grad_output;
  }

  for (std::size_t l = layers; l-- > 0;) {
    if (grads) {
      grads->weights[l] = dz * cache.activations[l].transpose();
      grads->biases[l] = dz.rowwise().sum();
    }
    Eigen::MatrixXd dh = weights_[l].transpose() * dz;
    if (l == 0) return dh;
    // rectifier derivative on the previous layer's pre-activation
    dz = dh.cwiseProduct(
        (cache.pre[l - 1].array() > 0.0).cast<double>().matrix());
  }
  return {};
}

void Mlp::apply_gradients(const Gradients& grads, double lr) {
  if (grads.weights.size() != weights_.size())
    throw ShapeError("gradient layer count mismatch");
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    weights_[l] -= lr * grads.weights[l];
    biases_[l] -= lr * grads.biases[l];
  }
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l)
    n += static_cast<std::size_t>(weights_[l].size()) +
         static_cast<std::size_t>(biases_[l].size());
  return n;
}

double Mlp::parameter(std::size_t i) const {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const std::size_t wn = static_cast<std::size_t>(weights_[l].size());
    if (i < wn) return weights_[l](static_cast<Eigen::Index>(i));
    i -= wn;
    const std::size_t bn = static_cast<std::size_t>(biases_[l].size());
    if (i < bn) return biases_[l](static_cast<Eigen::Index>(i));
    i -= bn;
  }
  throw std::out_of_range("mlp parameter index");
}

void Mlp::set_parameter(std::size_t i, double value) {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const std::size_t wn = static_cast<std::size_t>(weights_[l].size());
    if (i < wn) {
      weights_[l](static_cast<Eigen::Index>(i)) = value;
      return;
    }
    i -= wn;
    const std::size_t bn = static_cast<std::size_t>(biases_[l].size());
    if (i < bn) {
      biases_[l](static_cast<Eigen::Index>(i)) = value;
      return;
    }
    i -= bn;
  }
  throw std::out_of_range("mlp parameter index");
}

bool Mlp::parameters_finite() const {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    if (!weights_[l].allFinite() || !biases_[l].allFinite()) return false;
  }
  return true;
}

void Mlp::save(std::ostream& out) const {
  write_raw(out, kMagic, sizeof(kMagic));
  const std::uint32_t kind = output_ == Output::kTanh ? 1 : 0;
  const std::uint32_t n_layers = static_cast<std::uint32_t>(layer_sizes_.size());
  write_raw(out, &kind, sizeof(kind));
  write_raw(out, &n_layers, sizeof(n_layers));
  for (int s : layer_sizes_) {
    const std::int32_t v = s;
    write_raw(out, &v, sizeof(v));
  }
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    write_raw(out, weights_[l].data(),
              sizeof(double) * static_cast<std::size_t>(weights_[l].size()));
    write_raw(out, biases_[l].data(),
              sizeof(double) * static_cast<std::size_t>(biases_[l].size()));
  }
}

Mlp Mlp::load(std::istream& in) {
  char magic[8];
  read_raw(in, magic, sizeof(magic));
  for (std::size_t i = 0; i < sizeof(magic); ++i)
    if (magic[i] != kMagic[i]) throw IoError("bad mlp magic");

  std::uint32_t kind = 0, n_layers = 0;
  read_raw(in, &kind, sizeof(kind));
  read_raw(in, &n_layers, sizeof(n_layers));
  if (n_layers < 2 || n_layers > 64) throw IoError("bad mlp layer count");

  Mlp net;
  net.output_ = kind == 1 ? Output::kTanh : Output::kIdentity;
  net.layer_sizes_.resize(n_layers);
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    std::int32_t v = 0;
    read_raw(in, &v, sizeof(v));
    if (v <= 0) throw IoError("bad mlp layer size");
    net.layer_sizes_[i] = v;
  }
  for (std::uint32_t l = 0; l + 1 < n_layers; ++l) {
    Eigen::MatrixXd w(net.layer_sizes_[l + 1], net.layer_sizes_[l]);
    Eigen::VectorXd b(net.layer_sizes_[l + 1]);
    read_raw(in, w.data(), sizeof(double) * static_cast<std::size_t>(w.size()));
    read_raw(in, b.data(), sizeof(double) * static_cast<std::size_t>(b.size()));
    net.weights_.push_back(std::move(w));
    net.biases_.push_back(std::move(b));
  }
  return net;
}

void polyak_update(Mlp& target, const Mlp& live, double tau) {
  if (target.layer_sizes_ != live.layer_sizes_)
    throw ShapeError("polyak update across different architectures");
  if (!(tau >= 0.0) || tau > 1.0)
    throw InvalidStateError("tau must lie in [0, 1]");
  for (std::size_t l = 0; l < target.weights_.size(); ++l) {
    target.weights_[l] =
        (1.0 - tau) * target.weights_[l] + tau * live.weights_[l];
    target.biases_[l] = (1.0 - tau) * target.biases_[l] + tau * live.biases_[l];
  }
}

}  // namespace ebrl
