#pragma once

#include <cstdint>
#include <vector>

#include "blockbench/common.hpp"
#include "blockbench/physics/world.hpp"

namespace blockbench::agents {

/// (s, a, r, s') with `done` set only when the episode ended by success or
/// failure; horizon truncation keeps bootstrapping.
struct Transition {
    std::vector<double> obs;
    physics::Action action;
    double reward = 0.0;
    std::vector<double> next_obs;
    bool done = false;
};

/// Fixed-capacity FIFO ring with uniform sampling with replacement.
template <class T>
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
        if (capacity_ == 0) throw DomainError("ReplayBuffer: capacity must be positive");
    }

    void push(T item) {
        if (items_.size() < capacity_) {
            items_.push_back(std::move(item));
        } else {
            items_[next_] = std::move(item);
        }
        next_ = (next_ + 1) % capacity_;
        ++pushed_;
    }

    /// `n` uniform draws with replacement. Throws DomainError when empty.
    std::vector<const T*> sample(std::size_t n, Rng& rng) const {
        if (items_.empty()) throw DomainError("ReplayBuffer: sample from empty buffer");
        std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
        std::vector<const T*> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) out.push_back(&items_[pick(rng)]);
        return out;
    }

    /// Items oldest first.
    [[nodiscard]] std::vector<const T*> contents() const {
        std::vector<const T*> out;
        const std::size_t start = items_.size() < capacity_ ? 0 : next_;
        for (std::size_t i = 0; i < items_.size(); ++i) out.push_back(&items_[(start + i) % items_.size()]);
        return out;
    }

    [[nodiscard]] std::size_t size() const { return items_.size(); }
    [[nodiscard]] std::size_t capacity() const { return capacity_; }
    [[nodiscard]] std::uint64_t pushed() const { return pushed_; }
    [[nodiscard]] bool empty() const { return items_.empty(); }

private:
    std::size_t capacity_;
    std::vector<T> items_;
    std::size_t next_ = 0;
    std::uint64_t pushed_ = 0;
};

} // namespace blockbench::agents
