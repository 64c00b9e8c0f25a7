#include <cmath>
#include <string>

#include "vvclab/error.hpp"
#include "vvclab/tinynn.hpp"

namespace vvclab::tinynn {

template <typename S>
BasicMlp<S>::BasicMlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw ContractViolation("Mlp needs at least input and output sizes");
  for (int s : sizes_) {
    if (s <= 0) throw ContractViolation("Mlp layer sizes must be positive");
  }
  offsets_.resize(num_layers());
  std::size_t off = 0;
  for (std::size_t l = 0; l < num_layers(); ++l) {
    offsets_[l] = off;
    off += static_cast<std::size_t>(sizes_[l]) * sizes_[l + 1] + sizes_[l + 1];
  }
  params_ = Vector::Zero(static_cast<Eigen::Index>(off));
}

template <typename S>
std::size_t BasicMlp<S>::parameter_count(std::span<const int> layer_sizes) {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    n += static_cast<std::size_t>(layer_sizes[l]) * layer_sizes[l + 1] + layer_sizes[l + 1];
  }
  return n;
}

template <typename S>
void BasicMlp<S>::init_uniform(Rng& rng, double final_layer_scale) {
  for (std::size_t l = 0; l < num_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(sizes_[l]));
    const double scale = l + 1 == num_layers() ? final_layer_scale : 1.0;
    std::uniform_real_distribution<double> dist(-bound, bound);
    const std::size_t count = static_cast<std::size_t>(sizes_[l]) * sizes_[l + 1] + sizes_[l + 1];
    for (std::size_t i = 0; i < count; ++i) {
      params_[static_cast<Eigen::Index>(offsets_[l] + i)] = static_cast<S>(scale * dist(rng));
    }
  }
}

template <typename S>
void BasicMlp<S>::check_input(Eigen::Index rows) const {
  if (sizes_.empty()) throw ContractViolation("Mlp is empty");
  if (rows != sizes_.front()) {
    throw ContractViolation("Mlp input has " + std::to_string(rows) + " rows, expected " +
                            std::to_string(sizes_.front()));
  }
}

template <typename S>
auto BasicMlp<S>::forward(const Eigen::Ref<const Matrix>& x) const -> Matrix {
  check_input(x.rows());
  Matrix a = x;
  for (std::size_t l = 0; l < num_layers(); ++l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    const S* p = params_.data() + offsets_[l];
    Eigen::Map<const Matrix> w(p, out, in);
    Eigen::Map<const Vector> b(p + static_cast<std::size_t>(out) * in, out);
    Matrix z(out, a.cols());
    z.noalias() = w * a;
    z.colwise() += b;
    if (l + 1 < num_layers()) z = z.cwiseMax(S(0));
    a = std::move(z);
  }
  return a;
}

template <typename S>
auto BasicMlp<S>::forward(const Eigen::Ref<const Matrix>& x, ForwardCache& cache) const -> Matrix {
  check_input(x.rows());
  cache.activations.resize(num_layers());
  cache.activations[0] = x;
  Matrix result;
  for (std::size_t l = 0; l < num_layers(); ++l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    const S* p = params_.data() + offsets_[l];
    Eigen::Map<const Matrix> w(p, out, in);
    Eigen::Map<const Vector> b(p + static_cast<std::size_t>(out) * in, out);
    Matrix z(out, x.cols());
    z.noalias() = w * cache.activations[l];
    z.colwise() += b;
    if (l + 1 < num_layers()) {
      cache.activations[l + 1] = z.cwiseMax(S(0));
    } else {
      result = std::move(z);
    }
  }
  cache.valid = true;
  return result;
}

template <typename S>
auto BasicMlp<S>::forward_one(const Eigen::Ref<const Vector>& x) const -> Vector {
  return forward(Matrix(x)).col(0);
}

template <typename S>
auto BasicMlp<S>::backward(const ForwardCache& cache, const Eigen::Ref<const Matrix>& output_grad,
                           GradRequest request) const -> Gradients {
  if (!cache.valid || cache.activations.size() != num_layers()) {
    throw ContractViolation("Mlp::backward called without a matching forward pass");
  }
  const Eigen::Index batch = cache.activations[0].cols();
  if (output_grad.rows() != sizes_.back() || output_grad.cols() != batch) {
    throw ContractViolation("Mlp::backward: output gradient shape mismatch");
  }
  Gradients g;
  // every layer block is assigned below
  if (request.params) g.params.resize(params_.size());

  Matrix dz = output_grad;
  for (std::size_t l = num_layers(); l-- > 0;) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    const S* p = params_.data() + offsets_[l];
    Eigen::Map<const Matrix> w(p, out, in);
    const Matrix& a_in = cache.activations[l];
    if (request.params) {
      Eigen::Map<Matrix> dw(g.params.data() + offsets_[l], out, in);
      Eigen::Map<Vector> db(g.params.data() + offsets_[l] + static_cast<std::size_t>(out) * in,
                            out);
      dw.noalias() = dz * a_in.transpose();
      db = dz.rowwise().sum();
    }
    if (l == 0) {
      if (request.input) g.input.noalias() = w.transpose() * dz;
      break;
    }
    Matrix da(in, batch);
    da.noalias() = w.transpose() * dz;
    dz = (a_in.array() > S(0)).select(da, S(0));
  }
  return g;
}

template <typename S>
BasicAdamState<S> make_adam(Eigen::Index size, double lr) {
  BasicAdamState<S> s;
  s.m = VectorT<S>::Zero(size);
  s.v = VectorT<S>::Zero(size);
  s.lr = lr;
  return s;
}

template <typename S>
void adam_step(BasicAdamState<S>& state, VectorT<S>& params, const VectorT<S>& grads) {
  if (params.size() != grads.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw ContractViolation("adam_step: parameter, gradient and moment sizes differ");
  }
  if (!grads.allFinite()) throw NonFiniteError("adam_step: non-finite gradient");
  state.t += 1;
  const S b1 = static_cast<S>(state.beta1);
  const S b2 = static_cast<S>(state.beta2);
  state.m = b1 * state.m + (S(1) - b1) * grads;
  state.v = b2 * state.v + (S(1) - b2) * grads.cwiseProduct(grads);
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  const S step = static_cast<S>(state.lr / c1);
  const S inv_root_c2 = static_cast<S>(1.0 / std::sqrt(c2));
  const S eps = static_cast<S>(state.eps);
  params.array() -= step * state.m.array() / (state.v.array().sqrt() * inv_root_c2 + eps);
}

template <typename S>
nlohmann::json vector_to_json(const VectorT<S>& v) {
  std::vector<double> values(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) values[static_cast<std::size_t>(i)] = v[i];
  return values;
}

template <typename S>
VectorT<S> vector_from_json(const nlohmann::json& doc) {
  const auto values = doc.get<std::vector<double>>();
  VectorT<S> v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = static_cast<S>(values[i]);
  }
  return v;
}

template <typename S>
nlohmann::json to_json(const BasicMlp<S>& net) {
  return {{"layer_sizes", net.layer_sizes()}, {"params", vector_to_json<S>(net.params())}};
}

template <typename S>
BasicMlp<S> mlp_from_json(const nlohmann::json& doc) {
  BasicMlp<S> net(doc.at("layer_sizes").get<std::vector<int>>());
  VectorT<S> p = vector_from_json<S>(doc.at("params"));
  if (p.size() != net.params().size()) {
    throw ParseError("checkpoint: 'params' length does not match 'layer_sizes'");
  }
  net.params() = std::move(p);
  return net;
}

template <typename S>
nlohmann::json to_json(const BasicAdamState<S>& s) {
  return {{"m", vector_to_json<S>(s.m)}, {"v", vector_to_json<S>(s.v)},
          {"t", s.t},                    {"lr", s.lr},
          {"beta1", s.beta1},            {"beta2", s.beta2},
          {"eps", s.eps}};
}

template <typename S>
BasicAdamState<S> adam_from_json(const nlohmann::json& doc) {
  BasicAdamState<S> s;
  s.m = vector_from_json<S>(doc.at("m"));
  s.v = vector_from_json<S>(doc.at("v"));
  s.t = doc.at("t").get<long>();
  s.lr = doc.at("lr").get<double>();
  s.beta1 = doc.at("beta1").get<double>();
  s.beta2 = doc.at("beta2").get<double>();
  s.eps = doc.at("eps").get<double>();
  return s;
}

#define VVCLAB_INSTANTIATE(S)                                                                  \
  template class BasicMlp<S>;                                                                  \
  template BasicAdamState<S> make_adam<S>(Eigen::Index, double);                               \
  template void adam_step<S>(BasicAdamState<S>&, VectorT<S>&, const VectorT<S>&);              \
  template nlohmann::json vector_to_json<S>(const VectorT<S>&);                                \
  template VectorT<S> vector_from_json<S>(const nlohmann::json&);                              \
  template nlohmann::json to_json<S>(const BasicMlp<S>&);                                      \
  template BasicMlp<S> mlp_from_json<S>(const nlohmann::json&);                                \
  template nlohmann::json to_json<S>(const BasicAdamState<S>&);                                \
  template BasicAdamState<S> adam_from_json<S>(const nlohmann::json&);

VVCLAB_INSTANTIATE(float)
VVCLAB_INSTANTIATE(double)

#undef VVCLAB_INSTANTIATE

}  // namespace vvclab::tinynn
