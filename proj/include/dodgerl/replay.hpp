#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dodgerl/rng.hpp"

namespace dodgerl {

// One experience tuple (s, a, r, s', terminal); the unit of replay storage
// and of the worker upload protocol.
struct Transition {
    std::vector<float> state;
    uint8_t action = 0;
    float reward = 0.0f;
    std::vector<float> next_state;
    bool terminal = false;

    friend bool operator==(const Transition&, const Transition&) = default;
};

struct ReplayError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Fixed-capacity ring buffer with uniform with-replacement sampling.
// Eviction is strictly FIFO once full. The state dimension locks in on the
// first push.
class ReplayMemory {
public:
    explicit ReplayMemory(size_t capacity) : capacity_(capacity) {
        if (capacity == 0) throw ReplayError("replay capacity must be positive");
    }

    void push(Transition t) {
        if (t.state.size() != t.next_state.size())
            throw ReplayError("state and next_state dimensions differ");
        if (dim_ == 0) {
            dim_ = t.state.size();
        } else if (t.state.size() != dim_) {
            throw ReplayError("transition dimension does not match replay memory");
        }
        if (ring_.size() < capacity_) {
            ring_.push_back(std::move(t));
        } else {
            ring_[write_] = std::move(t);
        }
        write_ = (write_ + 1) % capacity_;
    }

    size_t size() const { return ring_.size(); }
    size_t capacity() const { return capacity_; }
    size_t dim() const { return dim_; }
    bool ready(size_t min_fill) const { return ring_.size() >= min_fill; }

    // i-th oldest transition.
    const Transition& at(size_t i) const {
        if (i >= ring_.size()) throw ReplayError("replay index out of range");
        if (ring_.size() < capacity_) return ring_[i];
        return ring_[(write_ + i) % capacity_];
    }

    std::vector<Transition> sample(size_t batch, Rng& rng) const {
        if (ring_.empty()) throw ReplayError("cannot sample from an empty replay memory");
        std::vector<Transition> out;
        out.reserve(batch);
        for (size_t i = 0; i < batch; ++i)
            out.push_back(ring_[rng.below(static_cast<uint32_t>(ring_.size()))]);
        return out;
    }

private:
    size_t capacity_;
    size_t write_ = 0;
    size_t dim_ = 0;
    std::vector<Transition> ring_;
};

} // namespace dodgerl
