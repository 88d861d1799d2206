#include "hdc/model_io.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "hdc/dataset.hpp"
#include "hdc/error.hpp"

namespace hdc {

namespace {

constexpr char kMagic[4] = {'H', 'D', 'C', 'M'};
constexpr std::uint8_t kVersion = 1;
constexpr std::uint8_t kFlagPositionModel = 1;
constexpr std::size_t kHeaderSize = 4 + 4 + 4 + 2 + 2 + 2 + 2 + 8;

void put_u8(std::string& out, std::uint8_t v) { out.push_back(static_cast<char>(v)); }

void put_u16(std::string& out, std::uint16_t v) {
  for (int i = 0; i < 2; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_i32(std::string& out, std::int32_t v) { put_u32(out, static_cast<std::uint32_t>(v)); }
void put_i64(std::string& out, std::int64_t v) { put_u64(out, static_cast<std::uint64_t>(v)); }
void put_f32(std::string& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }
void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

struct Cursor {
  const unsigned char* data;
  std::size_t size;
  std::size_t off = 0;

  void need(std::size_t n) const {
    if (off + n > size) throw DataError(DataError::Kind::Truncated, "model file ends early");
  }
  std::uint8_t u8() {
    need(1);
    return data[off++];
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = 0;
    for (int i = 0; i < 2; ++i) v |= static_cast<std::uint16_t>(data[off++]) << (8 * i);
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data[off++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data[off++]) << (8 * i);
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
};

std::uint8_t arch_tag(Architecture arch) { return static_cast<std::uint8_t>(arch); }

Architecture arch_from_tag(std::uint8_t tag) {
  if (tag > 3) throw DataError(DataError::Kind::MalformedFile, "unknown architecture tag");
  return static_cast<Architecture>(tag);
}

std::size_t expected_body_size(std::uint32_t dim, std::uint16_t n_gestures,
                               std::uint16_t n_positions, std::uint16_t n_ams,
                               bool has_position_model) {
  const std::size_t words = (static_cast<std::size_t>(dim) + 63) / 64;
  std::size_t size = 0;
  size += 4ull * n_gestures + 4ull * n_positions;                       // id lists
  size += static_cast<std::size_t>(n_ams) * n_gestures * (8 + 4ull * dim);  // accumulators
  size += static_cast<std::size_t>(n_ams) * n_gestures * 8 * words;     // prototypes
  if (has_position_model) size += 16ull * n_positions;                  // w3 + bias
  size += 3 * (4 + 8);                                                  // CIM params
  return size;
}

}  // namespace

std::string serialize_model(const Model& model) {
  require(model.dim >= 1, "serialize: model dim must be positive");
  require(!model.ams.empty(), "serialize: model has no associative memory");
  require(model.gesture_ids.size() <= 0xFFFF && model.position_ids.size() <= 0xFFFF &&
              model.ams.size() <= 0xFFFF && model.item_memory.size() <= 0xFFFF,
          "serialize: model too large for the file format");
  for (const AssociativeMemory& am : model.ams) {
    require(am.finalized(), "serialize: model must be finalized");
    require(am.n_classes() == static_cast<int>(model.gesture_ids.size()),
            "serialize: associative memory class count mismatch");
  }

  std::string out;
  out.append(kMagic, sizeof(kMagic));
  put_u8(out, kVersion);
  put_u8(out, arch_tag(model.architecture));
  put_u8(out, model.position_model.has_value() ? kFlagPositionModel : 0);
  put_u8(out, 0);
  put_u32(out, static_cast<std::uint32_t>(model.dim));
  put_u16(out, static_cast<std::uint16_t>(model.gesture_ids.size()));
  put_u16(out, static_cast<std::uint16_t>(model.position_ids.size()));
  put_u16(out, static_cast<std::uint16_t>(model.item_memory.size()));
  put_u16(out, static_cast<std::uint16_t>(model.ams.size()));
  put_u64(out, model.master_seed);

  for (int id : model.gesture_ids) put_i32(out, id);
  for (int id : model.position_ids) put_i32(out, id);

  for (const AssociativeMemory& am : model.ams) {
    for (int c = 0; c < am.n_classes(); ++c) {
      const Accumulator& acc = am.accumulator(c);
      put_i64(out, acc.n_added());
      for (std::int32_t v : acc.counts()) put_i32(out, v);
    }
  }
  for (const AssociativeMemory& am : model.ams) {
    for (int c = 0; c < am.n_classes(); ++c) {
      for (std::uint64_t w : am.prototype(c).words()) put_u64(out, w);
    }
  }

  if (model.position_model.has_value()) {
    const LinearPositionModel& pm = *model.position_model;
    require(pm.position_ids == model.position_ids,
            "serialize: position classifier label set mismatch");
    for (int p = 0; p < pm.n_positions(); ++p) {
      for (int k = 0; k < 3; ++k) put_f32(out, pm.weights[static_cast<std::size_t>(p)]
                                                         [static_cast<std::size_t>(k)]);
      put_f32(out, pm.biases[static_cast<std::size_t>(p)]);
    }
  }

  for (const CimParams& params : model.cim_params) {
    put_u32(out, static_cast<std::uint32_t>(params.levels));
    put_f64(out, params.d_max);
  }

  put_u64(out, fnv1a64(out.data(), out.size()));
  return out;
}

Model deserialize_model(std::string_view bytes) {
  Cursor cur{reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size()};

  if (bytes.size() < 4) throw DataError(DataError::Kind::Truncated, "model file ends early");
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw DataError(DataError::Kind::BadMagic, "not a model file (bad magic)");
  }
  cur.off = 4;
  const std::uint8_t version = cur.u8();
  if (version != kVersion) {
    throw DataError(DataError::Kind::BadVersion,
                    "unsupported model format version " + std::to_string(version));
  }
  if (bytes.size() < kHeaderSize) {
    throw DataError(DataError::Kind::Truncated, "model file ends early");
  }
  const std::uint8_t tag = cur.u8();
  const std::uint8_t flags = cur.u8();
  cur.u8();  // reserved
  const std::uint32_t dim = cur.u32();
  const std::uint16_t n_gestures = cur.u16();
  const std::uint16_t n_positions = cur.u16();
  const std::uint16_t n_channels = cur.u16();
  const std::uint16_t n_ams = cur.u16();
  const std::uint64_t master_seed = cur.u64();

  const Architecture arch = arch_from_tag(tag);
  if (dim == 0 || n_gestures == 0 || n_ams == 0) {
    throw DataError(DataError::Kind::MalformedFile, "model file has empty dimensions");
  }
  const bool has_position_model = (flags & kFlagPositionModel) != 0;
  const bool wants_position_model =
      arch == Architecture::DualStage ||
      (arch == Architecture::ContextOrthogonalization && n_positions >= 2);
  if (has_position_model != wants_position_model) {
    throw DataError(DataError::Kind::MalformedFile,
                    "position classifier flag inconsistent with architecture");
  }
  const std::uint16_t expected_ams =
      arch == Architecture::DualStage ? n_positions : std::uint16_t{1};
  if (n_ams != expected_ams) {
    throw DataError(DataError::Kind::MalformedFile,
                    "associative memory count inconsistent with architecture");
  }

  const std::size_t expected =
      kHeaderSize + expected_body_size(dim, n_gestures, n_positions, n_ams,
                                       has_position_model) + 8;
  if (bytes.size() < expected) {
    throw DataError(DataError::Kind::Truncated, "model file ends early");
  }
  if (bytes.size() > expected) {
    throw DataError(DataError::Kind::MalformedFile, "model file has trailing bytes");
  }

  std::uint64_t stored_checksum = 0;
  const auto* tail = reinterpret_cast<const unsigned char*>(bytes.data()) + bytes.size() - 8;
  for (int i = 0; i < 8; ++i) stored_checksum |= static_cast<std::uint64_t>(tail[i]) << (8 * i);
  if (fnv1a64(bytes.data(), bytes.size() - 8) != stored_checksum) {
    throw DataError(DataError::Kind::ChecksumMismatch, "model file checksum mismatch");
  }

  Model m;
  m.architecture = arch;
  m.dim = static_cast<int>(dim);
  m.master_seed = master_seed;
  m.gesture_ids.resize(n_gestures);
  for (auto& id : m.gesture_ids) id = cur.i32();
  m.position_ids.resize(n_positions);
  for (auto& id : m.position_ids) id = cur.i32();
  if (!std::is_sorted(m.gesture_ids.begin(), m.gesture_ids.end()) ||
      !std::is_sorted(m.position_ids.begin(), m.position_ids.end())) {
    throw DataError(DataError::Kind::MalformedFile, "model id lists are not sorted");
  }

  const RandomSource root(master_seed);
  if (n_channels > 0) {
    m.item_memory = build_model_item_memory(master_seed, n_channels, m.dim);
  }

  m.ams.reserve(n_ams);
  const RandomSource am_root = root.child(seed_key::kAm);
  for (std::uint16_t a = 0; a < n_ams; ++a) {
    AssociativeMemory am(m.gesture_ids, m.dim, am_root.child(a).seed());
    for (std::uint16_t c = 0; c < n_gestures; ++c) {
      Accumulator& acc = am.accumulator(c);
      acc.set_n_added(cur.i64());
      for (std::int32_t& v : acc.counts()) v = cur.i32();
    }
    am.finalize();
    m.ams.push_back(std::move(am));
  }
  const std::size_t words = (static_cast<std::size_t>(dim) + 63) / 64;
  for (std::uint16_t a = 0; a < n_ams; ++a) {
    for (std::uint16_t c = 0; c < n_gestures; ++c) {
      const auto stored = m.ams[a].prototype(c).words();
      for (std::size_t w = 0; w < words; ++w) {
        if (cur.u64() != stored[w]) {
          throw DataError(DataError::Kind::MalformedFile,
                          "stored prototype disagrees with its accumulator");
        }
      }
    }
  }

  if (has_position_model) {
    LinearPositionModel pm;
    pm.position_ids = m.position_ids;
    pm.weights.resize(n_positions);
    pm.biases.resize(n_positions);
    for (std::uint16_t p = 0; p < n_positions; ++p) {
      for (int k = 0; k < 3; ++k) pm.weights[p][static_cast<std::size_t>(k)] = cur.f32();
      pm.biases[p] = cur.f32();
    }
    m.position_model = std::move(pm);
  }

  for (CimParams& params : m.cim_params) {
    params.levels = static_cast<int>(cur.u32());
    params.d_max = cur.f64();
  }

  if (arch == Architecture::ContextOrthogonalization) {
    m.context_memory = ContextMemory::build(m.position_ids, m.dim,
                                            root.child(seed_key::kContextMemory).seed());
  }
  if (arch == Architecture::AccelCimContext) {
    for (const CimParams& params : m.cim_params) {
      if (params.levels < 2 || params.d_max < 0.0 || params.d_max > 1.0) {
        throw DataError(DataError::Kind::MalformedFile, "model file has invalid CIM parameters");
      }
    }
    std::array<ContinuousItemMemory, 3> cims;
    for (int axis = 0; axis < 3; ++axis) {
      cims[static_cast<std::size_t>(axis)] = ContinuousItemMemory::build(
          m.cim_params[static_cast<std::size_t>(axis)], m.dim,
          root.child(seed_key::kCim).child(static_cast<std::uint64_t>(axis)).seed());
    }
    m.cims = std::move(cims);
  }
  return m;
}

void save_model(const Model& model, const std::string& path) {
  const std::string bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(DataError::Kind::Io, "cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError(DataError::Kind::Io, "failed writing " + path);
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(DataError::Kind::Io, "cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw DataError(DataError::Kind::Io, "failed reading " + path);
  return deserialize_model(bytes);
}

}  // namespace hdc
