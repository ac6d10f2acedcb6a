#pragma once

// The ".f2ce" embedding container and its ".f2ce.json" mirror.
//
// Binary layout, all little-endian:
//   "F2CE" | version u32 (=1) | N u32 | D u32 | fps f32 | src_height u32 |
//   src_width u32 | has_query u8 | label_len u16 | label bytes (UTF-8) |
//   [D x f32 query if has_query] | N x D x f32 frames, row-major

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "keyclip/types.hpp"

namespace keyclip {

inline constexpr std::uint32_t kContainerVersion = 1;

struct Container {
  EmbeddingSequence sequence;
  std::optional<QueryEmbedding> query;

  bool operator==(const Container&) const = default;
};

std::vector<std::uint8_t> encode_container(const Container& c);
Container decode_container(std::span<const std::uint8_t> bytes);

std::string encode_container_json(const Container& c);
Container decode_container_json(std::string_view text);

/// True when the path names the JSON mirror (".json" extension).
bool is_json_container_path(const std::filesystem::path& path);

/// Format is picked from the extension. Neither function validates norms;
/// call validate_sequence on the result.
Container read_container(const std::filesystem::path& path);
void write_container(const Container& c, const std::filesystem::path& path);

}  // namespace keyclip
