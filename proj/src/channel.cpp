#include "safesim/channel.hpp"

#include <algorithm>

namespace safesim {

namespace {

// Channel stream is split from the scenario seed by channel id so fault
// patterns stay stable when channels are added or removed.
std::uint64_t split_seed(std::uint64_t seed, std::uint8_t channel_id) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (channel_id + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace

Channel::Channel(std::uint8_t channel_id, ChannelFaultModel faults, std::uint64_t seed,
                 std::size_t capacity)
    : id_(channel_id), faults_(faults), capacity_(capacity), rng_(split_seed(seed, channel_id)) {}

double Channel::uniform01() {
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

SendResult Channel::send(const RawBytes& raw, std::uint64_t now_ns) {
    stats_.sent += 1;

    // lose
    if (faults_.loss_prob > 0.0 && uniform01() < faults_.loss_prob) {
        stats_.lost_injected += 1;
        return SendResult::Lost;
    }

    // corrupt
    RawBytes bytes = raw;
    if (faults_.bit_error_rate > 0.0) {
        bool flipped = false;
        for (std::size_t i = 0; i < bytes.size(); ++i) {
            for (int bit = 0; bit < 8; ++bit) {
                if (uniform01() < faults_.bit_error_rate) {
                    bytes[i] ^= static_cast<std::uint8_t>(1u << bit);
                    flipped = true;
                }
            }
        }
        if (flipped) stats_.corrupted += 1;
    }

    // duplicate
    int copies = 1;
    if (faults_.dup_prob > 0.0 && uniform01() < faults_.dup_prob) {
        copies = 2;
        stats_.duplicated += 1;
    }

    bool first_copy = true;
    for (int c = 0; c < copies; ++c) {
        // delay
        std::uint64_t deliver_at = now_ns + faults_.delay_fixed_ns;
        if (faults_.delay_jitter_ns > 0) {
            const double offset = (uniform01() * 2.0 - 1.0) * static_cast<double>(faults_.delay_jitter_ns);
            const auto shifted = static_cast<std::int64_t>(deliver_at) + static_cast<std::int64_t>(offset);
            deliver_at = static_cast<std::uint64_t>(std::max<std::int64_t>(shifted, static_cast<std::int64_t>(now_ns)));
        }

        if (queue_.size() >= capacity_) {
            stats_.lost_overflow += 1;
            return SendResult::ChannelFull;
        }

        InFlight entry{deliver_at, next_order_++, bytes};
        const std::uint64_t my_order = entry.order;
        queue_.push_back(std::move(entry));
        stats_.enqueued += 1;

        // reorder: a previously marked frame swaps with this, its successor
        if (first_copy && pending_swap_) {
            auto prev = std::find_if(queue_.begin(), queue_.end(), [&](const InFlight& e) {
                return e.order == *pending_swap_;
            });
            auto cur = std::find_if(queue_.begin(), queue_.end(), [&](const InFlight& e) {
                return e.order == my_order;
            });
            if (prev != queue_.end() && cur != queue_.end()) {
                std::swap(prev->deliver_at_ns, cur->deliver_at_ns);
                std::swap(prev->order, cur->order);
            }
            pending_swap_.reset();
        } else if (first_copy && faults_.reorder_prob > 0.0 && uniform01() < faults_.reorder_prob) {
            pending_swap_ = my_order;
        }
        first_copy = false;
    }

    doorbell_ = true;
    return SendResult::Enqueued;
}

std::vector<RawBytes> Channel::poll(std::uint64_t now_ns) {
    std::vector<InFlight*> due;
    for (auto& entry : queue_) {
        if (entry.deliver_at_ns <= now_ns) due.push_back(&entry);
    }
    std::sort(due.begin(), due.end(), [](const InFlight* a, const InFlight* b) {
        if (a->deliver_at_ns != b->deliver_at_ns) return a->deliver_at_ns < b->deliver_at_ns;
        return a->order < b->order;
    });

    std::vector<RawBytes> out;
    out.reserve(due.size());
    for (InFlight* entry : due) {
        out.push_back(std::move(entry->bytes));
        entry->deliver_at_ns = ~0ull; // mark consumed
    }
    std::erase_if(queue_, [](const InFlight& e) { return e.deliver_at_ns == ~0ull; });
    stats_.delivered += out.size();
    if (queue_.empty()) doorbell_ = false;
    return out;
}

} // namespace safesim
