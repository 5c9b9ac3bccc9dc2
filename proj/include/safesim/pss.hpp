#pragma once

#include "safesim/scl_frame.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace safesim {

// ---------------------------------------------------------------------------
// Parameter model
// ---------------------------------------------------------------------------

enum class ParamType : std::uint8_t {
    Float64 = 0,
    Int64 = 1,
    Bool = 2,
};

enum class Criticality : std::uint8_t {
    Low = 0,
    Medium = 1,
    Critical = 2,
};

using ParamValue = std::variant<double, std::int64_t, bool>;

ParamType type_of(const ParamValue& v);
std::string_view to_string(ParamType t);
std::string_view to_string(Criticality c);

struct ParamDescriptor {
    std::string name; // <= 64 chars, dot-separated namespace
    ParamType value_type = ParamType::Float64;
    ParamValue min{0.0};
    ParamValue max{0.0};
    ParamValue default_value{0.0};
    Criticality criticality = Criticality::Low;
};

enum class DeclareError {
    DuplicateName,
    InvalidBounds,
    NameTooLong,
    HashCollision,
};

enum class ValidateError {
    UnknownParam,
    OutOfBounds,
    TypeMismatch,
};

std::string_view to_string(ValidateError e);

// FNV-1a 64, used as the fixed-size wire identity of a parameter name.
std::uint64_t fnv1a64(std::string_view s);

// Declared parameters, keyed by name and by name hash. Collisions are
// rejected at declare time so the wire hash is unambiguous.
class ParamRegistry {
public:
    std::optional<DeclareError> declare(const ParamDescriptor& desc);

    const ParamDescriptor* find(std::string_view name) const;
    const ParamDescriptor* find_by_hash(std::uint64_t hash) const;
    const std::vector<ParamDescriptor>& descriptors() const { return descriptors_; }
    std::size_t index_of(std::string_view name) const; // npos when unknown

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    std::vector<ParamDescriptor> descriptors_;
    std::map<std::string, std::size_t, std::less<>> by_name_;
    std::map<std::uint64_t, std::size_t> by_hash_;
};

// Validates a value against a descriptor: type first, then bounds.
std::optional<ValidateError> validate(const ParamDescriptor& desc, const ParamValue& value);

// ---------------------------------------------------------------------------
// Wire payloads (carried inside SCL frames on the PSS channel)
// ---------------------------------------------------------------------------
//
// ParamUpdate payload (little-endian):
//   u32 txn_id | u8 entry_count | entry_count x {
//     u64 name_hash | u8 type_tag | u64 value_bits | u64 min_bits | u64 max_bits }
// Float64 values travel as IEEE-754 bit patterns; Int64 as two's complement;
// Bool as 0/1 in the low byte.
//
// ParamAck payload:
//   u32 txn_id | u8 status (0 = ack, otherwise NackReason + 1) | u64 generation

struct ParamUpdateEntry {
    std::uint64_t name_hash = 0;
    ParamType type_tag = ParamType::Float64;
    ParamValue value{0.0};
    ParamValue min_echo{0.0};
    ParamValue max_echo{0.0};
};

struct ParamUpdatePayload {
    std::uint32_t txn_id = 0;
    std::vector<ParamUpdateEntry> entries;
};

enum class NackReason : std::uint8_t {
    OutOfBounds = 0,
    UnknownParam = 1,
    TypeMismatch = 2,
    StoreBusy = 3,
};

std::string_view to_string(NackReason r);

struct ParamAckPayload {
    std::uint32_t txn_id = 0;
    bool acked = false;
    NackReason nack_reason = NackReason::OutOfBounds; // valid when !acked
    std::uint64_t generation = 0;                     // valid when acked
};

std::vector<std::uint8_t> encode_param_update(const ParamUpdatePayload& p);
std::optional<ParamUpdatePayload> decode_param_update(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_param_ack(const ParamAckPayload& p);
std::optional<ParamAckPayload> decode_param_ack(std::span<const std::uint8_t> bytes);

// ---------------------------------------------------------------------------
// RT-side store: double-buffered value tables behind a generation counter
// ---------------------------------------------------------------------------

struct ApplyResult {
    bool acked = false;
    NackReason nack_reason = NackReason::OutOfBounds;
    std::uint64_t generation = 0;
};

class RtParamStore {
public:
    explicit RtParamStore(const ParamRegistry& registry);

    // Re-validates every entry (defense in depth), then applies the whole
    // transaction atomically under the generation protocol.
    ApplyResult apply(const ParamUpdatePayload& update);

    // Seqlock-style consistent snapshot of the live table.
    std::vector<ParamValue> read_params() const;
    std::optional<ParamValue> read_param(std::string_view name) const;

    std::uint64_t generation() const { return generation_; }
    const std::vector<ParamValue>& last_known_good() const { return last_known_good_; }

    // Micro-step interface used by the interleaving tests: an apply broken
    // into begin / write-entry / commit so reads can be interposed anywhere.
    class ApplySession {
    public:
        ApplySession(RtParamStore& store, const ParamUpdatePayload& update);
        bool valid() const { return valid_; }
        NackReason error() const { return error_; }
        void begin();            // generation -> odd, back table refreshed
        void write_entry(std::size_t i);
        std::size_t entry_count() const { return indices_.size(); }
        ApplyResult commit();    // swap, generation -> even, update last-known-good

    private:
        RtParamStore& store_;
        const ParamUpdatePayload& update_;
        std::vector<std::size_t> indices_;
        bool valid_ = true;
        NackReason error_ = NackReason::OutOfBounds;
    };

    // Snapshot attempt without retry: nullopt while a writer is mid-flight.
    std::optional<std::vector<ParamValue>> try_read() const;

    // Appends defaults for parameters declared after construction.
    void sync_with_registry();

private:
    friend class ApplySession;

    const ParamRegistry& registry_;
    std::vector<ParamValue> front_;
    std::vector<ParamValue> back_;
    std::vector<ParamValue> last_known_good_;
    std::uint64_t generation_ = 0; // even <=> quiescent
};

// ---------------------------------------------------------------------------
// Non-RT-side sync manager: transactions, retries, last-resort reporting
// ---------------------------------------------------------------------------

enum class TxnState {
    Pending,
    Sent,
    Acked,
    Nacked,
    Exhausted,
};

std::string_view to_string(TxnState s);

struct ParamTransaction {
    std::uint32_t txn_id = 0;
    ParamUpdatePayload payload;
    std::vector<std::string> param_names;
    TxnState state = TxnState::Pending;
    std::uint32_t retries_used = 0;
    std::uint64_t acked_generation = 0;
    NackReason last_nack = NackReason::OutOfBounds;
    std::uint64_t next_resend_ns = 0; // 0 = no resend scheduled
};

struct SyncManagerConfig {
    std::uint32_t retry_limit = 3;
    std::uint64_t retry_interval_ns = 10'000'000; // 10 ms
};

class SyncManager {
public:
    SyncManager(const ParamRegistry& registry, SyncManagerConfig cfg = {});

    using RequestResult = std::variant<std::uint32_t, ValidateError>; // txn_id on success

    RequestResult request_update(std::string_view name, const ParamValue& value,
                                 std::uint64_t now_ns);
    RequestResult request_update(const std::vector<std::pair<std::string, ParamValue>>& updates,
                                 std::uint64_t now_ns);

    void handle_ack(const ParamAckPayload& ack, std::uint64_t now_ns);

    // Due retransmissions; the harness drains this on its service tick. A
    // Sent transaction past its ack deadline consumes a retry and is either
    // returned for resend or moved to Exhausted.
    std::vector<const ParamTransaction*> due_resends(std::uint64_t now_ns);
    // now_ns == 0 disables the ack deadline for the resent attempt.
    void mark_resent(std::uint32_t txn_id, std::uint64_t now_ns = 0);

    const ParamTransaction* transaction(std::uint32_t txn_id) const;
    std::uint64_t stale_acks() const { return stale_acks_; }

    // Encoded frames awaiting transmission, drained by the owning cell.
    std::vector<ParamUpdatePayload> take_outbox();

private:
    const ParamRegistry& registry_;
    SyncManagerConfig cfg_;
    std::map<std::uint32_t, ParamTransaction> txns_;
    std::vector<ParamUpdatePayload> outbox_;
    std::uint32_t next_txn_id_ = 1;
    std::uint64_t stale_acks_ = 0;
};

} // namespace safesim
