#include "vvclab/drl/replay_buffer.hpp"

#include <cmath>
#include <string>

#include "vvclab/error.hpp"

namespace vvclab::drl {

namespace {

void check_finite(std::span<const double> values, const char* what) {
  for (double x : values) {
    if (!std::isfinite(x)) throw ContractViolation(std::string("transition ") + what + " is not finite");
  }
}

void put(Matrix& m, std::size_t col, std::span<const double> values) {
  for (std::size_t r = 0; r < values.size(); ++r) {
    m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col)) = static_cast<Real>(values[r]);
  }
}

std::vector<double> column(const Matrix& m, std::size_t col) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) out[static_cast<std::size_t>(r)] = m(r, static_cast<Eigen::Index>(col));
  return out;
}

}  // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t obs_dim, std::size_t act_dim,
                           bool store_next, std::vector<std::size_t> agent_obs_dims)
    : capacity_(capacity),
      obs_dim_(obs_dim),
      act_dim_(act_dim),
      store_next_(store_next),
      agent_dims_(std::move(agent_obs_dims)) {
  if (capacity_ == 0) throw ContractViolation("replay buffer capacity must be positive");
  const auto cap = static_cast<Eigen::Index>(capacity_);
  s_.resize(static_cast<Eigen::Index>(obs_dim_), cap);
  a_.resize(static_cast<Eigen::Index>(act_dim_), cap);
  r_p_.resize(cap);
  r_v_.resize(cap);
  if (store_next_) s_next_.resize(static_cast<Eigen::Index>(obs_dim_), cap);
  for (std::size_t d : agent_dims_) agent_obs_.emplace_back(static_cast<Eigen::Index>(d), cap);
}

void ReplayBuffer::add(const Transition& t) {
  if (t.s.size() != obs_dim_) throw ContractViolation("transition state has the wrong dimension");
  if (t.a.size() != act_dim_) throw ContractViolation("transition action has the wrong dimension");
  check_finite(t.s, "state");
  check_finite(t.a, "action");
  for (double x : t.a) {
    if (x < -1.0 || x > 1.0) throw ContractViolation("transition action leaves [-1, 1]");
  }
  if (!std::isfinite(t.r_p) || !std::isfinite(t.r_v) || t.r_p > 0.0 || t.r_v > 0.0) {
    throw ContractViolation("transition rewards must be finite and non-positive");
  }
  if (store_next_ != t.s_next.has_value()) {
    throw ContractViolation(store_next_ ? "transition lacks the next state"
                                        : "transition carries a next state this buffer does not keep");
  }
  if (store_next_) {
    if (t.s_next->size() != obs_dim_) throw ContractViolation("next state has the wrong dimension");
    check_finite(*t.s_next, "next state");
  }
  if (t.per_agent_obs.size() != agent_dims_.size()) {
    throw ContractViolation("transition carries " + std::to_string(t.per_agent_obs.size()) +
                            " agent observations, expected " + std::to_string(agent_dims_.size()));
  }
  for (std::size_t i = 0; i < agent_dims_.size(); ++i) {
    if (t.per_agent_obs[i].size() != agent_dims_[i]) {
      throw ContractViolation("agent " + std::to_string(i) + " observation has the wrong dimension");
    }
    check_finite(t.per_agent_obs[i], "agent observation");
  }

  const std::size_t slot = head_;
  put(s_, slot, t.s);
  put(a_, slot, t.a);
  r_p_(static_cast<Eigen::Index>(slot)) = static_cast<Real>(t.r_p);
  r_v_(static_cast<Eigen::Index>(slot)) = static_cast<Real>(t.r_v);
  if (store_next_) put(s_next_, slot, *t.s_next);
  for (std::size_t i = 0; i < agent_dims_.size(); ++i) put(agent_obs_[i], slot, t.per_agent_obs[i]);

  head_ = (head_ + 1) % capacity_;
  if (size_ < capacity_) ++size_;
}

std::size_t ReplayBuffer::physical(std::size_t logical) const {
  if (logical >= size_) throw ContractViolation("replay index out of range");
  const std::size_t oldest = size_ < capacity_ ? 0 : head_;
  return (oldest + logical) % capacity_;
}

Transition ReplayBuffer::at(std::size_t i) const {
  const std::size_t p = physical(i);
  Transition t;
  t.s = column(s_, p);
  t.a = column(a_, p);
  t.r_p = r_p_(static_cast<Eigen::Index>(p));
  t.r_v = r_v_(static_cast<Eigen::Index>(p));
  if (store_next_) t.s_next = column(s_next_, p);
  for (const auto& m : agent_obs_) t.per_agent_obs.push_back(column(m, p));
  return t;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t n, Rng& rng) const {
  if (size_ == 0) throw ContractViolation("cannot sample from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = pick(rng);
  return idx;
}

OneStepBatch ReplayBuffer::gather(std::span<const std::size_t> logical) const {
  const auto n = static_cast<Eigen::Index>(logical.size());
  OneStepBatch b;
  b.s.resize(s_.rows(), n);
  b.a.resize(a_.rows(), n);
  b.r_p.resize(n);
  b.r_v.resize(n);
  for (const auto& m : agent_obs_) b.agent_obs.emplace_back(m.rows(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto p = static_cast<Eigen::Index>(physical(logical[static_cast<std::size_t>(j)]));
    b.s.col(j) = s_.col(p);
    b.a.col(j) = a_.col(p);
    b.r_p(j) = r_p_(p);
    b.r_v(j) = r_v_(p);
    for (std::size_t i = 0; i < agent_obs_.size(); ++i) b.agent_obs[i].col(j) = agent_obs_[i].col(p);
  }
  return b;
}

TdBatch ReplayBuffer::gather_td(std::span<const std::size_t> logical) const {
  if (!store_next_) throw ContractViolation("this replay buffer does not keep next states");
  TdBatch b;
  b.now = gather(logical);
  b.s_next.resize(s_next_.rows(), static_cast<Eigen::Index>(logical.size()));
  for (std::size_t j = 0; j < logical.size(); ++j) {
    b.s_next.col(static_cast<Eigen::Index>(j)) = s_next_.col(static_cast<Eigen::Index>(physical(logical[j])));
  }
  return b;
}

OneStepBatch ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  const auto idx = sample_indices(n, rng);
  return gather(idx);
}

TdBatch ReplayBuffer::sample_td(std::size_t n, Rng& rng) const {
  if (!store_next_) throw ContractViolation("this replay buffer does not keep next states");
  const auto idx = sample_indices(n, rng);
  return gather_td(idx);
}

}  // namespace vvclab::drl
