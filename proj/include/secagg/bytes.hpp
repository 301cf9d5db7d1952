#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace secagg {

using Bytes = std::vector<uint8_t>;
using Digest = std::array<uint8_t, 32>;

void append_u64_be(Bytes& out, uint64_t v);
void append_u32_be(Bytes& out, uint32_t v);

/// Reads 8 bytes big-endian starting at data; caller guarantees bounds.
uint64_t read_u64_be(const uint8_t* data);
uint32_t read_u32_be(const uint8_t* data);

/// Lowercase hex. from_hex is strict: even length, [0-9a-f] only.
std::string to_hex(const uint8_t* data, size_t n);
std::string to_hex(const Bytes& data);
Bytes from_hex(const std::string& hex);

}  // namespace secagg
