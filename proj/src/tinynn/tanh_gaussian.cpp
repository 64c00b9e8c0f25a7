#include <algorithm>
#include <cmath>
#include <numbers>

#include "vvclab/error.hpp"
#include "vvclab/tinynn.hpp"

namespace vvclab::tinynn {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

template <typename S>
S action_limit() {
  return std::nextafter(S(1), S(0));
}

}  // namespace

double log1m_tanh_sq(double u) {
  const double a = std::abs(u);
  return 2.0 * (std::numbers::ln2 - a - std::log1p(std::exp(-2.0 * a)));
}

template <typename S>
BasicTanhGaussianSample<S> tanh_gaussian_from_noise(const Eigen::Ref<const MatrixT<S>>& head,
                                                    const Eigen::Ref<const MatrixT<S>>& xi) {
  if (head.rows() % 2 != 0) throw ContractViolation("tanh-Gaussian head needs 2*d rows");
  const Eigen::Index d = head.rows() / 2;
  const Eigen::Index batch = head.cols();
  if (xi.rows() != d || xi.cols() != batch) {
    throw ContractViolation("tanh-Gaussian noise shape mismatch");
  }
  const S limit = action_limit<S>();
  BasicTanhGaussianSample<S> s;
  s.xi = xi;
  s.action.resize(d, batch);
  s.sigma.resize(d, batch);
  s.clamped.resize(d, batch);
  s.log_prob = VectorT<S>::Zero(batch);
  for (Eigen::Index b = 0; b < batch; ++b) {
    double lp = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      const double raw = head(d + j, b);
      const double ls = std::clamp(raw, kLogSigmaMin, kLogSigmaMax);
      s.clamped(j, b) = (raw < kLogSigmaMin || raw > kLogSigmaMax) ? S(1) : S(0);
      const double sigma = std::exp(ls);
      const double noise = xi(j, b);
      const double u = head(j, b) + sigma * noise;
      s.sigma(j, b) = static_cast<S>(sigma);
      s.action(j, b) = std::clamp(static_cast<S>(std::tanh(u)), -limit, limit);
      lp += -0.5 * noise * noise - ls - kHalfLog2Pi - log1m_tanh_sq(u);
    }
    s.log_prob[b] = static_cast<S>(lp);
  }
  return s;
}

template <typename S>
BasicTanhGaussianSample<S> tanh_gaussian_sample(const Eigen::Ref<const MatrixT<S>>& head, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixT<S> xi(head.rows() / 2, head.cols());
  for (Eigen::Index b = 0; b < xi.cols(); ++b) {
    for (Eigen::Index j = 0; j < xi.rows(); ++j) xi(j, b) = static_cast<S>(normal(rng));
  }
  return tanh_gaussian_from_noise<S>(head, xi);
}

template <typename S>
MatrixT<S> tanh_gaussian_backward(const BasicTanhGaussianSample<S>& s,
                                  const Eigen::Ref<const MatrixT<S>>& d_action,
                                  const Eigen::Ref<const VectorT<S>>& d_log_prob) {
  const Eigen::Index d = s.action.rows();
  const Eigen::Index batch = s.action.cols();
  if (d_action.rows() != d || d_action.cols() != batch || d_log_prob.size() != batch) {
    throw ContractViolation("tanh-Gaussian backward: gradient shape mismatch");
  }
  // log_prob depends on u only through -log(1 - tanh(u)^2), whose derivative
  // is 2 tanh(u); u = mu + sigma * xi.
  MatrixT<S> grad(2 * d, batch);
  for (Eigen::Index b = 0; b < batch; ++b) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const S a = s.action(j, b);
      const S du = d_action(j, b) * (S(1) - a * a) + d_log_prob[b] * S(2) * a;
      grad(j, b) = du;
      grad(d + j, b) = s.clamped(j, b) != S(0)
                           ? S(0)
                           : du * s.sigma(j, b) * s.xi(j, b) - d_log_prob[b];
    }
  }
  return grad;
}

template <typename S>
VectorT<S> tanh_gaussian_log_density(const Eigen::Ref<const MatrixT<S>>& mu,
                                     const Eigen::Ref<const MatrixT<S>>& log_sigma,
                                     const Eigen::Ref<const MatrixT<S>>& action) {
  VectorT<S> out = VectorT<S>::Zero(action.cols());
  for (Eigen::Index b = 0; b < action.cols(); ++b) {
    double lp = 0.0;
    for (Eigen::Index j = 0; j < action.rows(); ++j) {
      const double ls = std::clamp(static_cast<double>(log_sigma(j, b)), kLogSigmaMin, kLogSigmaMax);
      const double u = std::atanh(static_cast<double>(action(j, b)));
      const double z = (u - mu(j, b)) / std::exp(ls);
      lp += -0.5 * z * z - ls - kHalfLog2Pi - log1m_tanh_sq(u);
    }
    out[b] = static_cast<S>(lp);
  }
  return out;
}

#define VVCLAB_INSTANTIATE(S)                                                                   \
  template BasicTanhGaussianSample<S> tanh_gaussian_from_noise<S>(                              \
      const Eigen::Ref<const MatrixT<S>>&, const Eigen::Ref<const MatrixT<S>>&);                \
  template BasicTanhGaussianSample<S> tanh_gaussian_sample<S>(const Eigen::Ref<const MatrixT<S>>&, \
                                                              Rng&);                            \
  template MatrixT<S> tanh_gaussian_backward<S>(const BasicTanhGaussianSample<S>&,              \
                                                const Eigen::Ref<const MatrixT<S>>&,            \
                                                const Eigen::Ref<const VectorT<S>>&);           \
  template VectorT<S> tanh_gaussian_log_density<S>(const Eigen::Ref<const MatrixT<S>>&,         \
                                                   const Eigen::Ref<const MatrixT<S>>&,         \
                                                   const Eigen::Ref<const MatrixT<S>>&);

VVCLAB_INSTANTIATE(float)
VVCLAB_INSTANTIATE(double)

#undef VVCLAB_INSTANTIATE

}  // namespace vvclab::tinynn
