#pragma once

#include <cstddef>
#include <vector>

#include "ctes/errors.hpp"
#include "ctes/rng.hpp"

namespace ctes {

// One stored interaction. States are normalized feature vectors without the
// action component; the next state's feasibility mask is kept in interval
// form, from which the executable grid actions are reconstructed exactly.
struct Transition {
  std::vector<double> state;
  int action_index = 0;
  double executed_plr = 0.0;
  double cost = 0.0;  // stage cost including the loss-of-load penalty
  std::vector<double> next_state;
  double next_lower = 0.0;
  double next_upper = 1.0;
  bool next_infeasible = false;
  bool terminal = false;
};

// Fixed-capacity ring buffer holding the most recent transitions.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ParameterError("replay capacity must be positive");
    buffer_.reserve(capacity);
    stamp_.assign(capacity, 0);
  }

  void push(Transition t) {
    if (buffer_.size() < capacity_) {
      buffer_.push_back(std::move(t));
    } else {
      buffer_[head_] = std::move(t);
      head_ = (head_ + 1) % capacity_;
    }
  }

  std::size_t size() const { return buffer_.size(); }
  std::size_t capacity() const { return capacity_; }

  // i = 0 is the oldest retained transition.
  const Transition& oldest_first(std::size_t i) const {
    return buffer_[(head_ + i) % buffer_.size()];
  }

  const Transition& operator[](std::size_t raw) const { return buffer_[raw]; }

  // Uniform sample of `count` distinct raw indices.
  void sample_indices(std::size_t count, Rng& rng,
                      std::vector<std::size_t>& out) {
    if (count > buffer_.size()) {
      throw ParameterError("batch larger than the replay buffer");
    }
    out.clear();
    ++epoch_;
    // Floyd's algorithm: O(count) draws, distinctness via epoch stamps.
    for (std::size_t j = buffer_.size() - count; j < buffer_.size(); ++j) {
      const std::size_t t = static_cast<std::size_t>(rng.below(j + 1));
      if (stamp_[t] == epoch_) {
        stamp_[j] = epoch_;
        out.push_back(j);
      } else {
        stamp_[t] = epoch_;
        out.push_back(t);
      }
    }
  }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // oldest element once the buffer is full
  std::vector<Transition> buffer_;
  std::vector<std::uint64_t> stamp_;
  std::uint64_t epoch_ = 0;
};

}  // namespace ctes
