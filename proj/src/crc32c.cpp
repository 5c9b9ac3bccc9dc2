#include "safesim/crc32c.hpp"

#include <array>

namespace safesim {

namespace {

constexpr std::uint32_t kPolyReflected = 0x82F63B78u; // 0x1EDC6F41 bit-reversed

constexpr std::array<std::uint32_t, 256> make_table() {
    std::array<std::uint32_t, 256> table{};
    for (std::uint32_t i = 0; i < 256; ++i) {
        std::uint32_t crc = i;
        for (int bit = 0; bit < 8; ++bit) {
            crc = (crc & 1u) ? (crc >> 1) ^ kPolyReflected : crc >> 1;
        }
        table[i] = crc;
    }
    return table;
}

constexpr auto kTable = make_table();

} // namespace

std::uint32_t crc32c_init() { return 0xFFFFFFFFu; }

std::uint32_t crc32c_update(std::uint32_t state, std::span<const std::uint8_t> data) {
    for (std::uint8_t byte : data) {
        state = kTable[(state ^ byte) & 0xFFu] ^ (state >> 8);
    }
    return state;
}

std::uint32_t crc32c_finish(std::uint32_t state) { return state ^ 0xFFFFFFFFu; }

std::uint32_t crc32c(std::span<const std::uint8_t> data) {
    return crc32c_finish(crc32c_update(crc32c_init(), data));
}

} // namespace safesim
