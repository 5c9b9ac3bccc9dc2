#include "safesim/pss.hpp"

#include <bit>
#include <cstring>
#include <utility>

namespace safesim {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

std::uint64_t value_bits(const ParamValue& v) {
    if (const auto* d = std::get_if<double>(&v)) return std::bit_cast<std::uint64_t>(*d);
    if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<std::uint64_t>(*i);
    return std::get<bool>(v) ? 1u : 0u;
}

std::optional<ParamValue> value_from_bits(ParamType type, std::uint64_t bits) {
    switch (type) {
        case ParamType::Float64: return ParamValue{std::bit_cast<double>(bits)};
        case ParamType::Int64: return ParamValue{static_cast<std::int64_t>(bits)};
        case ParamType::Bool:
            if (bits > 1) return std::nullopt;
            return ParamValue{bits == 1};
    }
    return std::nullopt;
}

constexpr std::size_t kEntrySize = 8 + 1 + 8 + 8 + 8;

} // namespace

ParamType type_of(const ParamValue& v) {
    return static_cast<ParamType>(v.index());
}

std::string_view to_string(ParamType t) {
    switch (t) {
        case ParamType::Float64: return "float64";
        case ParamType::Int64: return "int64";
        case ParamType::Bool: return "bool";
    }
    return "?";
}

std::string_view to_string(Criticality c) {
    switch (c) {
        case Criticality::Low: return "low";
        case Criticality::Medium: return "medium";
        case Criticality::Critical: return "critical";
    }
    return "?";
}

std::string_view to_string(ValidateError e) {
    switch (e) {
        case ValidateError::UnknownParam: return "UnknownParam";
        case ValidateError::OutOfBounds: return "OutOfBounds";
        case ValidateError::TypeMismatch: return "TypeMismatch";
    }
    return "?";
}

std::string_view to_string(NackReason r) {
    switch (r) {
        case NackReason::OutOfBounds: return "OutOfBounds";
        case NackReason::UnknownParam: return "UnknownParam";
        case NackReason::TypeMismatch: return "TypeMismatch";
        case NackReason::StoreBusy: return "StoreBusy";
    }
    return "?";
}

std::string_view to_string(TxnState s) {
    switch (s) {
        case TxnState::Pending: return "Pending";
        case TxnState::Sent: return "Sent";
        case TxnState::Acked: return "Acked";
        case TxnState::Nacked: return "Nacked";
        case TxnState::Exhausted: return "Exhausted";
    }
    return "?";
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

std::optional<ValidateError> validate(const ParamDescriptor& desc, const ParamValue& value) {
    if (type_of(value) != desc.value_type) return ValidateError::TypeMismatch;
    switch (desc.value_type) {
        case ParamType::Float64: {
            const double v = std::get<double>(value);
            if (!(v >= std::get<double>(desc.min) && v <= std::get<double>(desc.max))) {
                return ValidateError::OutOfBounds; // NaN also lands here
            }
            break;
        }
        case ParamType::Int64: {
            const auto v = std::get<std::int64_t>(value);
            if (v < std::get<std::int64_t>(desc.min) || v > std::get<std::int64_t>(desc.max)) {
                return ValidateError::OutOfBounds;
            }
            break;
        }
        case ParamType::Bool:
            break; // bounds ignored
    }
    return std::nullopt;
}

std::optional<DeclareError> ParamRegistry::declare(const ParamDescriptor& desc) {
    if (desc.name.size() > 64) return DeclareError::NameTooLong;
    if (by_name_.contains(desc.name)) return DeclareError::DuplicateName;

    if (type_of(desc.min) != desc.value_type || type_of(desc.max) != desc.value_type ||
        type_of(desc.default_value) != desc.value_type) {
        return DeclareError::InvalidBounds;
    }
    if (desc.value_type != ParamType::Bool) {
        if (validate(desc, desc.default_value)) return DeclareError::InvalidBounds;
        const bool min_le_max = desc.value_type == ParamType::Float64
            ? std::get<double>(desc.min) <= std::get<double>(desc.max)
            : std::get<std::int64_t>(desc.min) <= std::get<std::int64_t>(desc.max);
        if (!min_le_max) return DeclareError::InvalidBounds;
    }

    const std::uint64_t hash = fnv1a64(desc.name);
    if (by_hash_.contains(hash)) return DeclareError::HashCollision;

    const std::size_t idx = descriptors_.size();
    descriptors_.push_back(desc);
    by_name_.emplace(desc.name, idx);
    by_hash_.emplace(hash, idx);
    return std::nullopt;
}

const ParamDescriptor* ParamRegistry::find(std::string_view name) const {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? nullptr : &descriptors_[it->second];
}

const ParamDescriptor* ParamRegistry::find_by_hash(std::uint64_t hash) const {
    auto it = by_hash_.find(hash);
    return it == by_hash_.end() ? nullptr : &descriptors_[it->second];
}

std::size_t ParamRegistry::index_of(std::string_view name) const {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? npos : it->second;
}

// ---------------------------------------------------------------------------
// Payload codecs
// ---------------------------------------------------------------------------

std::vector<std::uint8_t> encode_param_update(const ParamUpdatePayload& p) {
    std::vector<std::uint8_t> out;
    out.reserve(5 + p.entries.size() * kEntrySize);
    put_u32(out, p.txn_id);
    out.push_back(static_cast<std::uint8_t>(p.entries.size()));
    for (const auto& e : p.entries) {
        put_u64(out, e.name_hash);
        out.push_back(static_cast<std::uint8_t>(e.type_tag));
        put_u64(out, value_bits(e.value));
        put_u64(out, value_bits(e.min_echo));
        put_u64(out, value_bits(e.max_echo));
    }
    return out;
}

std::optional<ParamUpdatePayload> decode_param_update(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 5) return std::nullopt;
    ParamUpdatePayload p;
    p.txn_id = get_u32(bytes.data());
    const std::size_t count = bytes[4];
    if (bytes.size() != 5 + count * kEntrySize) return std::nullopt;
    const std::uint8_t* cur = bytes.data() + 5;
    for (std::size_t i = 0; i < count; ++i) {
        ParamUpdateEntry e;
        e.name_hash = get_u64(cur);
        const std::uint8_t tag = cur[8];
        if (tag > 2) return std::nullopt;
        e.type_tag = static_cast<ParamType>(tag);
        auto value = value_from_bits(e.type_tag, get_u64(cur + 9));
        auto min_v = value_from_bits(e.type_tag, get_u64(cur + 17));
        auto max_v = value_from_bits(e.type_tag, get_u64(cur + 25));
        if (!value || !min_v || !max_v) return std::nullopt;
        e.value = *value;
        e.min_echo = *min_v;
        e.max_echo = *max_v;
        p.entries.push_back(e);
        cur += kEntrySize;
    }
    return p;
}

std::vector<std::uint8_t> encode_param_ack(const ParamAckPayload& p) {
    std::vector<std::uint8_t> out;
    put_u32(out, p.txn_id);
    out.push_back(p.acked ? 0 : static_cast<std::uint8_t>(p.nack_reason) + 1);
    put_u64(out, p.generation);
    return out;
}

std::optional<ParamAckPayload> decode_param_ack(std::span<const std::uint8_t> bytes) {
    if (bytes.size() != 13) return std::nullopt;
    ParamAckPayload p;
    p.txn_id = get_u32(bytes.data());
    const std::uint8_t status = bytes[4];
    if (status > 4) return std::nullopt;
    p.acked = status == 0;
    if (!p.acked) p.nack_reason = static_cast<NackReason>(status - 1);
    p.generation = get_u64(bytes.data() + 5);
    return p;
}

// ---------------------------------------------------------------------------
// RT store
// ---------------------------------------------------------------------------

RtParamStore::RtParamStore(const ParamRegistry& registry) : registry_(registry) {
    for (const auto& d : registry.descriptors()) {
        front_.push_back(d.default_value);
    }
    back_ = front_;
    last_known_good_ = front_;
}

void RtParamStore::sync_with_registry() {
    while (front_.size() < registry_.descriptors().size()) {
        const auto& d = registry_.descriptors()[front_.size()];
        front_.push_back(d.default_value);
        back_.push_back(d.default_value);
        last_known_good_.push_back(d.default_value);
    }
}

RtParamStore::ApplySession::ApplySession(RtParamStore& store, const ParamUpdatePayload& update)
    : store_(store), update_(update) {
    store_.sync_with_registry();
    if (store_.generation_ % 2 != 0) {
        valid_ = false;
        error_ = NackReason::StoreBusy;
        return;
    }
    for (const auto& e : update.entries) {
        const ParamDescriptor* desc = store_.registry_.find_by_hash(e.name_hash);
        if (!desc) {
            valid_ = false;
            error_ = NackReason::UnknownParam;
            return;
        }
        if (e.type_tag != desc->value_type) {
            valid_ = false;
            error_ = NackReason::TypeMismatch;
            return;
        }
        if (auto err = validate(*desc, e.value)) {
            valid_ = false;
            error_ = *err == ValidateError::TypeMismatch ? NackReason::TypeMismatch
                                                         : NackReason::OutOfBounds;
            return;
        }
        indices_.push_back(store_.registry_.index_of(desc->name));
    }
}

void RtParamStore::ApplySession::begin() {
    store_.back_ = store_.front_;
    store_.generation_ += 1; // odd: writer in flight
}

void RtParamStore::ApplySession::write_entry(std::size_t i) {
    store_.back_[indices_[i]] = update_.entries[i].value;
}

ApplyResult RtParamStore::ApplySession::commit() {
    std::swap(store_.front_, store_.back_);
    store_.generation_ += 1; // even: quiescent
    store_.last_known_good_ = store_.front_;
    return ApplyResult{true, NackReason::OutOfBounds, store_.generation_};
}

ApplyResult RtParamStore::apply(const ParamUpdatePayload& update) {
    ApplySession session(*this, update);
    if (!session.valid()) {
        return ApplyResult{false, session.error(), generation_};
    }
    session.begin();
    for (std::size_t i = 0; i < session.entry_count(); ++i) session.write_entry(i);
    return session.commit();
}

std::optional<std::vector<ParamValue>> RtParamStore::try_read() const {
    const std::uint64_t gen_before = generation_;
    if (gen_before % 2 != 0) return std::nullopt;
    std::vector<ParamValue> snapshot = front_;
    if (generation_ != gen_before) return std::nullopt;
    return snapshot;
}

std::vector<ParamValue> RtParamStore::read_params() const {
    // Single-owner simulation: a writer never holds the generation odd
    // across a read, so this resolves on the first attempt. The retry loop
    // is the contract a threaded port must keep.
    for (int attempt = 0; attempt < 1000; ++attempt) {
        if (auto snapshot = try_read()) return *snapshot;
    }
    return last_known_good_;
}

std::optional<ParamValue> RtParamStore::read_param(std::string_view name) const {
    const std::size_t idx = registry_.index_of(name);
    if (idx == ParamRegistry::npos || idx >= front_.size()) return std::nullopt;
    return read_params()[idx];
}

// ---------------------------------------------------------------------------
// Sync manager
// ---------------------------------------------------------------------------

SyncManager::SyncManager(const ParamRegistry& registry, SyncManagerConfig cfg)
    : registry_(registry), cfg_(cfg) {}

SyncManager::RequestResult SyncManager::request_update(std::string_view name,
                                                       const ParamValue& value,
                                                       std::uint64_t now_ns) {
    return request_update({{std::string(name), value}}, now_ns);
}

SyncManager::RequestResult SyncManager::request_update(
    const std::vector<std::pair<std::string, ParamValue>>& updates, std::uint64_t now_ns) {
    ParamUpdatePayload payload;
    std::vector<std::string> names;
    for (const auto& [name, value] : updates) {
        const ParamDescriptor* desc = registry_.find(name);
        if (!desc) return ValidateError::UnknownParam;
        if (auto err = validate(*desc, value)) return *err; // never reaches the channel
        ParamUpdateEntry entry;
        entry.name_hash = fnv1a64(name);
        entry.type_tag = desc->value_type;
        entry.value = value;
        entry.min_echo = desc->min;
        entry.max_echo = desc->max;
        payload.entries.push_back(entry);
        names.push_back(name);
    }

    payload.txn_id = next_txn_id_++;
    const std::uint32_t txn_id = payload.txn_id;
    ParamTransaction txn;
    txn.txn_id = txn_id;
    txn.payload = payload;
    txn.param_names = std::move(names);
    txn.state = TxnState::Sent;
    txn.next_resend_ns = now_ns + cfg_.retry_interval_ns; // ack deadline
    txns_.emplace(txn_id, std::move(txn));
    outbox_.push_back(std::move(payload));
    return txn_id;
}

void SyncManager::handle_ack(const ParamAckPayload& ack, std::uint64_t now_ns) {
    auto it = txns_.find(ack.txn_id);
    if (it == txns_.end() || (it->second.state != TxnState::Sent)) {
        stale_acks_ += 1;
        return;
    }
    ParamTransaction& txn = it->second;
    if (ack.acked) {
        txn.state = TxnState::Acked;
        txn.acked_generation = ack.generation;
        return;
    }
    txn.last_nack = ack.nack_reason;
    txn.retries_used += 1;
    if (txn.retries_used >= cfg_.retry_limit) {
        txn.state = TxnState::Exhausted;
        txn.next_resend_ns = 0;
    } else {
        txn.state = TxnState::Nacked;
        txn.next_resend_ns = now_ns + cfg_.retry_interval_ns;
    }
}

std::vector<const ParamTransaction*> SyncManager::due_resends(std::uint64_t now_ns) {
    std::vector<const ParamTransaction*> due;
    for (auto& [id, txn] : txns_) {
        if (txn.next_resend_ns == 0 || txn.next_resend_ns > now_ns) continue;
        if (txn.state == TxnState::Nacked) {
            due.push_back(&txn);
        } else if (txn.state == TxnState::Sent) {
            // A missed ack deadline consumes a retry just like a nack.
            txn.retries_used += 1;
            if (txn.retries_used >= cfg_.retry_limit) {
                txn.state = TxnState::Exhausted;
                txn.next_resend_ns = 0;
            } else {
                due.push_back(&txn);
            }
        }
    }
    return due;
}

void SyncManager::mark_resent(std::uint32_t txn_id, std::uint64_t now_ns) {
    auto it = txns_.find(txn_id);
    if (it == txns_.end()) return;
    it->second.state = TxnState::Sent;
    it->second.next_resend_ns = now_ns == 0 ? 0 : now_ns + cfg_.retry_interval_ns;
}

const ParamTransaction* SyncManager::transaction(std::uint32_t txn_id) const {
    auto it = txns_.find(txn_id);
    return it == txns_.end() ? nullptr : &it->second;
}

std::vector<ParamUpdatePayload> SyncManager::take_outbox() {
    return std::exchange(outbox_, {});
}

} // namespace safesim
