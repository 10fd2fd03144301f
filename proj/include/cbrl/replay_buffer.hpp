#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace cbrl::agent {

struct Transition {
    std::vector<double> state;
    std::size_t action = 0;
    double reward = 0.0;
    std::vector<double> next_state;
    bool terminal = false;

    bool operator==(const Transition&) const = default;
};

/// Fixed-capacity ring of transitions; once full, each push overwrites the
/// oldest entry.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
        if (capacity == 0) throw invalid_parameter("replay buffer capacity must be >= 1");
        storage_.reserve(std::min<std::size_t>(capacity, 4096));
    }

    void push(Transition t) {
        if (storage_.size() < capacity_) {
            storage_.push_back(std::move(t));
        } else {
            storage_[cursor_] = std::move(t);
        }
        cursor_ = (cursor_ + 1) % capacity_;
    }

    std::size_t size() const { return storage_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool full() const { return storage_.size() == capacity_; }

    /// Raw slot access (slot order, not insertion order).
    const Transition& operator[](std::size_t slot) const { return storage_[slot]; }

    /// i-th oldest stored transition.
    const Transition& oldest(std::size_t i) const {
        return full() ? storage_[(cursor_ + i) % capacity_] : storage_[i];
    }

    /// `count` distinct slots drawn uniformly (Floyd's algorithm).
    std::vector<std::size_t> sample_indices(std::size_t count, Rng& rng) const {
        const std::size_t n = storage_.size();
        if (count > n) {
            throw insufficient_buffer("replay buffer holds " + std::to_string(n) + " transitions, " +
                                      std::to_string(count) + " requested");
        }
        std::vector<std::size_t> picked;
        picked.reserve(count);
        for (std::size_t j = n - count; j < n; ++j) {
            const std::size_t t = uniform_index(rng, j + 1);
            if (std::find(picked.begin(), picked.end(), t) == picked.end()) {
                picked.push_back(t);
            } else {
                picked.push_back(j);
            }
        }
        return picked;
    }

private:
    std::size_t capacity_;
    std::size_t cursor_ = 0;
    std::vector<Transition> storage_;
};

}  // namespace cbrl::agent
