#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace safesim {

// CRC-32C (Castagnoli, poly 0x1EDC6F41), reflected in/out,
// init 0xFFFFFFFF, final xor 0xFFFFFFFF. Check value: crc32c("123456789") == 0xE3069283.
std::uint32_t crc32c(std::span<const std::uint8_t> data);

// Incremental form for scatter/gather layouts. Start from crc32c_init(),
// feed chunks through crc32c_update(), close with crc32c_finish().
std::uint32_t crc32c_init();
std::uint32_t crc32c_update(std::uint32_t state, std::span<const std::uint8_t> data);
std::uint32_t crc32c_finish(std::uint32_t state);

} // namespace safesim
