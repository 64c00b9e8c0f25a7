#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "vvclab/tinynn.hpp"

namespace vvclab::drl {

using tinynn::Matrix;
using tinynn::Real;
using tinynn::Rng;
using tinynn::Vector;

struct Transition {
  std::vector<double> s;  // normalized observation
  std::vector<double> a;  // joint action in [-1, 1]^d
  double r_p = 0.0;
  double r_v = 0.0;
  std::optional<std::vector<double>> s_next;
  std::vector<std::vector<double>> per_agent_obs;
};

/// Batch for the one-step updates. Columns are samples. There is no
/// next-state field.
struct OneStepBatch {
  Matrix s;
  Matrix a;
  Vector r_p;
  Vector r_v;
  std::vector<Matrix> agent_obs;  // empty unless the buffer stores agent slices

  Eigen::Index size() const { return s.cols(); }
};

struct TdBatch {
  OneStepBatch now;
  Matrix s_next;

  Eigen::Index size() const { return now.size(); }
};

/// Fixed-capacity ring of transitions with uniform sampling (with replacement).
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::size_t obs_dim, std::size_t act_dim, bool store_next,
               std::vector<std::size_t> agent_obs_dims = {});

  /// Throws ContractViolation on wrong dimensions, a positive reward, an action
  /// outside [-1, 1], or a next state that is missing (or unexpected).
  void add(const Transition& t);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  bool stores_next() const { return store_next_; }
  std::size_t obs_dim() const { return obs_dim_; }
  std::size_t act_dim() const { return act_dim_; }
  const std::vector<std::size_t>& agent_obs_dims() const { return agent_dims_; }

  /// Logical index: 0 is the oldest retained transition.
  Transition at(std::size_t i) const;

  std::vector<std::size_t> sample_indices(std::size_t n, Rng& rng) const;
  OneStepBatch gather(std::span<const std::size_t> logical) const;
  TdBatch gather_td(std::span<const std::size_t> logical) const;
  OneStepBatch sample(std::size_t n, Rng& rng) const;
  TdBatch sample_td(std::size_t n, Rng& rng) const;

 private:
  std::size_t physical(std::size_t logical) const;

  std::size_t capacity_;
  std::size_t obs_dim_;
  std::size_t act_dim_;
  bool store_next_;
  std::vector<std::size_t> agent_dims_;
  std::size_t size_ = 0;
  std::size_t head_ = 0;  // next write slot
  Matrix s_;
  Matrix a_;
  Vector r_p_;
  Vector r_v_;
  Matrix s_next_;
  std::vector<Matrix> agent_obs_;
};

}  // namespace vvclab::drl
