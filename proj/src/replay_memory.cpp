#include "v2v/replay_memory.hpp"

#include <algorithm>

#include "v2v/errors.hpp"

namespace v2v {

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("replay memory capacity must be >= 1");
  buffer_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayMemory::push(Transition t) {
  if (buffer_.size() < capacity_) {
    buffer_.push_back(std::move(t));
    ++size_;
    return;
  }
  buffer_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayMemory::at(std::size_t i) const {
  if (i >= size_) throw ContractViolation("replay index out of range");
  return buffer_[(head_ + i) % buffer_.size()];
}

std::vector<std::size_t> ReplayMemory::sample_indices(std::size_t batch_size, Rng& rng) const {
  if (size_ == 0) throw ContractViolation("cannot sample from an empty replay memory");
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  std::vector<std::size_t> out(batch_size);
  for (auto& i : out) i = pick(rng);
  return out;
}

void ReplayMemory::clear() {
  buffer_.clear();
  head_ = 0;
  size_ = 0;
}

}  // namespace v2v
