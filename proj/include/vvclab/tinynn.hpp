#pragma once

// Dense ReLU networks over flat parameter vectors, reverse-mode gradients,
// Adam, and the tanh-squashed Gaussian policy head. Everything is templated
// on the scalar type; float and double are instantiated.

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace vvclab::tinynn {

using Rng = std::mt19937_64;

template <typename S>
using MatrixT = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using VectorT = Eigen::Matrix<S, Eigen::Dynamic, 1>;

/// Intermediate activations of one batched forward pass. Columns are samples.
template <typename S>
struct BasicForwardCache {
  std::vector<MatrixT<S>> activations;  // input, then post-ReLU hidden layers
  bool valid = false;
};

template <typename S>
struct BasicGradients {
  VectorT<S> params;  // empty unless requested
  MatrixT<S> input;   // empty unless requested
};

struct GradRequest {
  bool params = true;
  bool input = false;
};

/// Multilayer perceptron with ReLU hidden layers and a linear output layer.
/// Layer l stores its weight (column-major, out x in) followed by its bias.
template <typename S>
class BasicMlp {
 public:
  using Matrix = MatrixT<S>;
  using Vector = VectorT<S>;
  using ForwardCache = BasicForwardCache<S>;
  using Gradients = BasicGradients<S>;

  BasicMlp() = default;
  explicit BasicMlp(std::vector<int> layer_sizes);

  static std::size_t parameter_count(std::span<const int> layer_sizes);

  /// Uniform(+-1/sqrt(fan_in)) for every layer; the final layer is further
  /// multiplied by `final_layer_scale`.
  void init_uniform(Rng& rng, double final_layer_scale = 1.0);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  std::size_t num_layers() const { return sizes_.empty() ? 0 : sizes_.size() - 1; }

  Vector& params() { return params_; }
  const Vector& params() const { return params_; }

  Matrix forward(const Eigen::Ref<const Matrix>& x) const;
  Matrix forward(const Eigen::Ref<const Matrix>& x, ForwardCache& cache) const;
  Vector forward_one(const Eigen::Ref<const Vector>& x) const;

  /// Gradient of <output, output_grad> with respect to the parameters and/or
  /// the input, using the activations recorded in `cache`.
  Gradients backward(const ForwardCache& cache, const Eigen::Ref<const Matrix>& output_grad,
                     GradRequest request = {}) const;

 private:
  void check_input(Eigen::Index rows) const;

  std::vector<int> sizes_;
  std::vector<std::size_t> offsets_;
  Vector params_;
};

template <typename S>
struct BasicAdamState {
  VectorT<S> m;
  VectorT<S> v;
  long t = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename S>
BasicAdamState<S> make_adam(Eigen::Index size, double lr);

/// Bias-corrected Adam descent step in place. A non-finite gradient raises
/// NonFiniteError and leaves both params and state untouched.
template <typename S>
void adam_step(BasicAdamState<S>& state, VectorT<S>& params, const VectorT<S>& grads);

inline constexpr double kLogSigmaMin = -20.0;
inline constexpr double kLogSigmaMax = 2.0;

/// One batch of reparameterized draws a = tanh(mu + sigma * xi).
/// `head` rows [0, d) hold mu and rows [d, 2d) hold log sigma.
template <typename S>
struct BasicTanhGaussianSample {
  MatrixT<S> action;    // d x B, strictly inside (-1, 1)
  VectorT<S> log_prob;  // B, includes the tanh change of variables
  MatrixT<S> xi;        // d x B standard normal noise
  MatrixT<S> sigma;     // d x B after clamping
  MatrixT<S> clamped;   // 1 where log sigma hit a clamp bound
};

template <typename S>
BasicTanhGaussianSample<S> tanh_gaussian_sample(const Eigen::Ref<const MatrixT<S>>& head, Rng& rng);

/// Same as tanh_gaussian_sample with caller-supplied noise.
template <typename S>
BasicTanhGaussianSample<S> tanh_gaussian_from_noise(const Eigen::Ref<const MatrixT<S>>& head,
                                                    const Eigen::Ref<const MatrixT<S>>& xi);

/// Gradient with respect to `head` of sum_b <d_action_b, a_b> + d_log_prob_b * log_prob_b,
/// holding the noise fixed.
template <typename S>
MatrixT<S> tanh_gaussian_backward(const BasicTanhGaussianSample<S>& sample,
                                  const Eigen::Ref<const MatrixT<S>>& d_action,
                                  const Eigen::Ref<const VectorT<S>>& d_log_prob);

/// Log-density of the squashed Gaussian at `action` (per column).
template <typename S>
VectorT<S> tanh_gaussian_log_density(const Eigen::Ref<const MatrixT<S>>& mu,
                                     const Eigen::Ref<const MatrixT<S>>& log_sigma,
                                     const Eigen::Ref<const MatrixT<S>>& action);

/// log(1 - tanh(u)^2), stable for large |u|.
double log1m_tanh_sq(double u);

template <typename S>
nlohmann::json vector_to_json(const VectorT<S>& v);
template <typename S>
VectorT<S> vector_from_json(const nlohmann::json& doc);
template <typename S>
nlohmann::json to_json(const BasicMlp<S>& net);
template <typename S>
BasicMlp<S> mlp_from_json(const nlohmann::json& doc);
template <typename S>
nlohmann::json to_json(const BasicAdamState<S>& state);
template <typename S>
BasicAdamState<S> adam_from_json(const nlohmann::json& doc);

// Training precision.
using Real = float;
using Matrix = MatrixT<Real>;
using Vector = VectorT<Real>;
using Mlp = BasicMlp<Real>;
using AdamState = BasicAdamState<Real>;
using ForwardCache = BasicForwardCache<Real>;
using Gradients = BasicGradients<Real>;
using TanhGaussianSample = BasicTanhGaussianSample<Real>;

}  // namespace vvclab::tinynn
