#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace safesim {

using RawBytes = std::vector<std::uint8_t>;

// Fault model for one simulated ivshmem channel. All draws come from the
// channel's own seeded generator, so runs are reproducible and adding a
// channel never perturbs another channel's fault pattern.
struct ChannelFaultModel {
    double bit_error_rate = 0.0; // per bit
    double loss_prob = 0.0;      // per frame
    double dup_prob = 0.0;       // per frame
    std::uint64_t delay_fixed_ns = 0;
    std::uint64_t delay_jitter_ns = 0; // uniform half-width around the fixed delay
    double reorder_prob = 0.0;   // per frame: swap with its successor
};

enum class SendResult {
    Enqueued,
    Lost,        // injected loss
    ChannelFull, // queue at capacity; dropped, counted as overflow loss
};

struct ChannelStats {
    std::uint64_t sent = 0;        // send() calls
    std::uint64_t enqueued = 0;    // copies placed in flight (includes duplicates)
    std::uint64_t delivered = 0;
    std::uint64_t lost_injected = 0;
    std::uint64_t lost_overflow = 0;
    std::uint64_t duplicated = 0;
    std::uint64_t corrupted = 0;   // frames with at least one flipped bit
};

// Bounded in-flight queue with doorbell notification. Delivery order is
// (deliver_at_ns, enqueue order); fault application order is fixed:
// lose -> corrupt -> duplicate -> delay -> reorder.
class Channel {
public:
    Channel(std::uint8_t channel_id, ChannelFaultModel faults, std::uint64_t seed,
            std::size_t capacity = 64);

    SendResult send(const RawBytes& raw, std::uint64_t now_ns);
    std::vector<RawBytes> poll(std::uint64_t now_ns);

    bool doorbell() const { return doorbell_; }
    std::uint8_t id() const { return id_; }
    const ChannelStats& stats() const { return stats_; }
    std::size_t in_flight() const { return queue_.size(); }
    void set_fault_model(const ChannelFaultModel& faults) { faults_ = faults; }
    const ChannelFaultModel& fault_model() const { return faults_; }

private:
    struct InFlight {
        std::uint64_t deliver_at_ns;
        std::uint64_t order; // tie-break; swapped by the reorder fault
        RawBytes bytes;
    };

    double uniform01();

    std::uint8_t id_;
    ChannelFaultModel faults_;
    std::size_t capacity_;
    std::mt19937_64 rng_;
    std::vector<InFlight> queue_;
    std::uint64_t next_order_ = 0;
    // Index (by order id) of a frame waiting to swap with its successor.
    std::optional<std::uint64_t> pending_swap_;
    bool doorbell_ = false;
    ChannelStats stats_;
};

} // namespace safesim
