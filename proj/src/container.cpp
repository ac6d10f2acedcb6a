#include "keyclip/container.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include <json.hpp>

namespace keyclip {

namespace {

constexpr std::array<char, 4> kMagic = {'F', '2', 'C', 'E'};

class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { put_le(v); }
  void u32(std::uint32_t v) { put_le(v); }
  void f32(float v) { put_le(std::bit_cast<std::uint32_t>(v)); }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  template <typename T>
  void put_le(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() { return get_le<std::uint8_t>(); }
  std::uint16_t u16() { return get_le<std::uint16_t>(); }
  std::uint32_t u32() { return get_le<std::uint32_t>(); }
  float f32() { return std::bit_cast<float>(get_le<std::uint32_t>()); }

  std::span<const std::uint8_t> bytes(std::size_t n) {
    need(n);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) {
      throw Error(ErrorCode::kTruncatedFile, "container ends at byte " + std::to_string(in_.size()) +
                                                 ", needed " + std::to_string(pos_ + n));
    }
  }
  template <typename T>
  T get_le() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v = static_cast<T>(v | static_cast<T>(static_cast<T>(in_[pos_ + i]) << (8 * i)));
    }
    pos_ += sizeof(T);
    return v;
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::kMalformed, std::string(what) + " does not fit in u32");
  }
  return static_cast<std::uint32_t>(v);
}

}  // namespace

std::vector<std::uint8_t> encode_container(const Container& c) {
  const auto& seq = c.sequence;
  if (seq.dim == 0 || seq.data.size() % seq.dim != 0) {
    throw Error(ErrorCode::kDimMismatch, "frame payload does not match D");
  }
  if (c.query && c.query->dim() != seq.dim) {
    throw Error(ErrorCode::kDimMismatch, "query dimension does not match frames");
  }
  if (seq.label.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw Error(ErrorCode::kMalformed, "label longer than 65535 bytes");
  }

  ByteWriter w;
  w.bytes(kMagic.data(), kMagic.size());
  w.u32(kContainerVersion);
  w.u32(checked_u32(seq.frame_count(), "frame count"));
  w.u32(seq.dim);
  w.f32(seq.fps);
  w.u32(seq.src_height);
  w.u32(seq.src_width);
  w.u8(c.query ? 1 : 0);
  w.u16(static_cast<std::uint16_t>(seq.label.size()));
  w.bytes(seq.label.data(), seq.label.size());
  if (c.query) {
    for (float v : c.query->vector) w.f32(v);
  }
  for (float v : seq.data) w.f32(v);
  return w.take();
}

Container decode_container(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  auto magic = r.bytes(kMagic.size());
  if (std::memcmp(magic.data(), kMagic.data(), kMagic.size()) != 0) {
    throw Error(ErrorCode::kBadMagic, "not an F2CE container");
  }
  const std::uint32_t version = r.u32();
  if (version != kContainerVersion) {
    throw Error(ErrorCode::kUnsupportedVersion, "container version " + std::to_string(version));
  }

  Container c;
  auto& seq = c.sequence;
  const std::uint32_t n = r.u32();
  seq.dim = r.u32();
  seq.fps = r.f32();
  seq.src_height = r.u32();
  seq.src_width = r.u32();
  const std::uint8_t has_query = r.u8();
  if (has_query > 1) {
    throw Error(ErrorCode::kMalformed, "has_query flag must be 0 or 1");
  }
  const std::uint16_t label_len = r.u16();
  auto label = r.bytes(label_len);
  seq.label.assign(label.begin(), label.end());

  const std::uint64_t frame_values = static_cast<std::uint64_t>(n) * seq.dim;
  const std::uint64_t payload = (frame_values + (has_query ? seq.dim : 0)) * sizeof(float);
  if (payload > r.remaining()) {
    throw Error(ErrorCode::kTruncatedFile, "payload needs " + std::to_string(payload) + " bytes, " +
                                               std::to_string(r.remaining()) + " remain");
  }
  if (payload < r.remaining()) {
    throw Error(ErrorCode::kMalformed, std::to_string(r.remaining() - payload) + " trailing bytes");
  }
  if (has_query) {
    QueryEmbedding q;
    q.vector.resize(seq.dim);
    for (auto& v : q.vector) v = r.f32();
    c.query = std::move(q);
  }
  seq.data.resize(frame_values);
  for (auto& v : seq.data) v = r.f32();
  return c;
}

std::string encode_container_json(const Container& c) {
  const auto& seq = c.sequence;
  if (seq.dim == 0 || seq.data.size() % seq.dim != 0) {
    throw Error(ErrorCode::kDimMismatch, "frame payload does not match D");
  }
  nlohmann::ordered_json j;
  j["magic"] = "F2CE";
  j["version"] = kContainerVersion;
  j["label"] = seq.label;
  j["fps"] = seq.fps;
  j["src_height"] = seq.src_height;
  j["src_width"] = seq.src_width;
  j["dim"] = seq.dim;
  j["query"] = c.query ? nlohmann::ordered_json(c.query->vector) : nlohmann::ordered_json(nullptr);
  auto frames = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < seq.frame_count(); ++i) {
    auto f = seq.frame(i);
    frames.push_back(std::vector<float>(f.begin(), f.end()));
  }
  j["frames"] = std::move(frames);
  return j.dump() + "\n";
}

Container decode_container_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kMalformed, e.what());
  }
  try {
    if (j.value("magic", std::string("F2CE")) != "F2CE") {
      throw Error(ErrorCode::kBadMagic, "not an F2CE container");
    }
    const auto version = j.at("version").get<std::uint32_t>();
    if (version != kContainerVersion) {
      throw Error(ErrorCode::kUnsupportedVersion, "container version " + std::to_string(version));
    }
    Container c;
    auto& seq = c.sequence;
    seq.label = j.value("label", std::string());
    seq.fps = j.at("fps").get<float>();
    seq.src_height = j.at("src_height").get<std::uint32_t>();
    seq.src_width = j.at("src_width").get<std::uint32_t>();
    const auto& frames = j.at("frames");
    seq.dim = j.contains("dim") ? j.at("dim").get<std::uint32_t>()
                                : (frames.empty() ? 0U : static_cast<std::uint32_t>(frames.at(0).size()));
    for (const auto& f : frames) {
      if (f.size() != seq.dim) {
        throw Error(ErrorCode::kDimMismatch, "frame row has " + std::to_string(f.size()) + " values");
      }
      for (const auto& v : f) seq.data.push_back(v.get<float>());
    }
    if (j.contains("query") && !j.at("query").is_null()) {
      QueryEmbedding q;
      q.vector = j.at("query").get<std::vector<float>>();
      c.query = std::move(q);
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformed, e.what());
  }
}

bool is_json_container_path(const std::filesystem::path& path) {
  return path.extension() == ".json";
}

Container read_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (is_json_container_path(path)) {
    return decode_container_json(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  }
  return decode_container(bytes);
}

void write_container(const Container& c, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  }
  if (is_json_container_path(path)) {
    out << encode_container_json(c);
  } else {
    auto bytes = encode_container(c);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  if (!out) {
    throw Error(ErrorCode::kIoError, "write failed for " + path.string());
  }
}

}  // namespace keyclip
