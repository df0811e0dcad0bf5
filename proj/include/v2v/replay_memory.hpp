#pragma once

#include <cstddef>
#include <vector>

#include "v2v/rng.hpp"

namespace v2v {

// Replay item {state, action, reward, post-state, terminal}.
struct Transition {
  std::vector<double> state;
  int action = 0;
  double reward = 0.0;
  std::vector<double> next_state;
  bool terminal = false;

  bool operator==(const Transition&) const = default;
};

// Fixed-capacity FIFO ring buffer; the oldest transition is evicted first.
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return size_ == 0; }
  // i = 0 is the oldest stored transition.
  const Transition& at(std::size_t i) const;
  // Uniform sampling with replacement.
  std::vector<std::size_t> sample_indices(std::size_t batch_size, Rng& rng) const;
  void clear();

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // index of the oldest element once full
  std::size_t size_ = 0;
  std::vector<Transition> buffer_;
};

}  // namespace v2v
