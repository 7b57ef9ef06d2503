#include "gevk/embedding.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <unordered_set>

namespace gevk {

namespace {

static_assert(std::numeric_limits<float>::is_iec559, "binary32 floats required");

void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFFu));
}

void put_u64(std::vector<std::byte>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFFu));
}

/// Bounds-checked little-endian cursor over the encoded file.
class Reader {
 public:
  explicit Reader(std::span<const std::byte> bytes) : bytes_(bytes) {}

  std::size_t remaining() const { return bytes_.size() - pos_; }

  bool has(std::size_t n) const { return remaining() >= n; }

  std::uint64_t uint(std::size_t width) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < width; ++i) {
      v |= static_cast<std::uint64_t>(std::to_integer<std::uint8_t>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += width;
    return v;
  }

  std::span<const std::byte> take(std::size_t n) {
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::span<const std::byte> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::size_t n_rows, std::size_t dims, std::vector<float> values,
                                 std::vector<std::string> row_ids)
    : n_rows_(n_rows), dims_(dims), values_(std::move(values)), row_ids_(std::move(row_ids)) {
  if (n_rows_ == 0 || dims_ == 0) {
    throw InputError("embedding matrix needs at least one row and one column");
  }
  if (n_rows_ > std::numeric_limits<std::size_t>::max() / dims_ || values_.size() != n_rows_ * dims_) {
    throw InputError("embedding values length does not equal n_rows * dims");
  }
  if (row_ids_.size() != n_rows_) {
    throw InputError("embedding matrix needs exactly one row id per row");
  }
  for (float v : values_) {
    if (!std::isfinite(v)) throw InputError("embedding matrix contains non-finite values");
  }
  std::unordered_set<std::string> seen;
  for (const auto& id : row_ids_) {
    if (!seen.insert(id).second) throw InputError("duplicate row id '" + id + "'");
  }
}

std::vector<double> EmbeddingMatrix::row_as_double(std::size_t i) const {
  auto r = row(i);
  return {r.begin(), r.end()};
}

std::size_t EmbeddingMatrix::find(const std::string& row_id) const {
  for (std::size_t i = 0; i < n_rows_; ++i) {
    if (row_ids_[i] == row_id) return i;
  }
  return n_rows_;
}

std::string to_string(FormatErrc code) {
  switch (code) {
    case FormatErrc::io_failure: return "I/O failure";
    case FormatErrc::bad_magic: return "bad magic";
    case FormatErrc::version_mismatch: return "version mismatch";
    case FormatErrc::unsupported_dtype: return "unsupported dtype";
    case FormatErrc::truncated_payload: return "truncated payload";
    case FormatErrc::size_mismatch: return "dims/rows inconsistent with file size";
    case FormatErrc::invalid_contents: return "invalid contents";
  }
  return "unknown";
}

FormatError::FormatError(FormatErrc code, const std::string& detail)
    : InputError(to_string(code) + (detail.empty() ? "" : ": " + detail)), code_(code) {}

std::vector<std::byte> encode_embeddings(const EmbeddingMatrix& matrix) {
  namespace fmt = embedding_format;
  std::vector<std::byte> out;
  out.reserve(fmt::kHeaderSize + matrix.values().size() * 4 + matrix.n_rows() * 8);
  for (char c : fmt::kMagic) out.push_back(static_cast<std::byte>(c));
  put_u32(out, fmt::kVersion);
  put_u64(out, matrix.n_rows());
  put_u64(out, matrix.dims());
  out.push_back(static_cast<std::byte>(fmt::kDtypeFloat32));
  for (const auto& id : matrix.row_ids()) {
    if (id.size() > std::numeric_limits<std::uint32_t>::max()) {
      throw InputError("row id too long for the embedding format");
    }
    put_u32(out, static_cast<std::uint32_t>(id.size()));
    for (char c : id) out.push_back(static_cast<std::byte>(c));
  }
  for (float v : matrix.values()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

EmbeddingMatrix decode_embeddings(std::span<const std::byte> bytes) {
  namespace fmt = embedding_format;
  Reader in(bytes);
  if (!in.has(4) || std::memcmp(in.take(4).data(), fmt::kMagic, 4) != 0) {
    throw FormatError(FormatErrc::bad_magic, "expected \"GEVK\"");
  }
  if (!in.has(fmt::kHeaderSize - 4)) throw FormatError(FormatErrc::size_mismatch, "header is incomplete");
  const auto version = static_cast<std::uint32_t>(in.uint(4));
  if (version != fmt::kVersion) {
    throw FormatError(FormatErrc::version_mismatch,
                      "file has version " + std::to_string(version) + ", reader supports " +
                          std::to_string(fmt::kVersion));
  }
  const std::uint64_t n_rows = in.uint(8);
  const std::uint64_t dims = in.uint(8);
  const auto dtype = static_cast<std::uint8_t>(in.uint(1));
  if (dtype != fmt::kDtypeFloat32) {
    throw FormatError(FormatErrc::unsupported_dtype, "dtype code " + std::to_string(dtype));
  }
  if (n_rows == 0 || dims == 0) {
    throw FormatError(FormatErrc::invalid_contents, "n_rows and dims must be at least 1");
  }
  // Every row needs its 4-byte id prefix, and the payload size must be representable.
  const std::uint64_t limit = in.remaining();
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  if (n_rows > limit / 4 || dims > kMax / 4 || n_rows > kMax / (4 * dims)) {
    throw FormatError(FormatErrc::size_mismatch,
                      std::to_string(n_rows) + " x " + std::to_string(dims) + " cannot fit in " +
                          std::to_string(bytes.size()) + " bytes");
  }

  std::vector<std::string> ids;
  ids.reserve(n_rows);
  for (std::uint64_t i = 0; i < n_rows; ++i) {
    if (!in.has(4)) throw FormatError(FormatErrc::size_mismatch, "row-id table runs past end of file");
    const auto len = in.uint(4);
    if (!in.has(len)) throw FormatError(FormatErrc::size_mismatch, "row-id table runs past end of file");
    auto raw = in.take(len);
    ids.emplace_back(reinterpret_cast<const char*>(raw.data()), raw.size());
  }

  const std::uint64_t payload = n_rows * dims * 4;
  if (in.remaining() < payload) {
    throw FormatError(FormatErrc::truncated_payload, "expected " + std::to_string(payload) +
                                                         " payload bytes, found " +
                                                         std::to_string(in.remaining()));
  }
  if (in.remaining() > payload) {
    throw FormatError(FormatErrc::size_mismatch,
                      std::to_string(in.remaining() - payload) + " trailing bytes after payload");
  }

  std::vector<float> values(n_rows * dims);
  for (auto& v : values) v = std::bit_cast<float>(static_cast<std::uint32_t>(in.uint(4)));

  try {
    return EmbeddingMatrix(n_rows, dims, std::move(values), std::move(ids));
  } catch (const FormatError&) {
    throw;
  } catch (const InputError& e) {
    throw FormatError(FormatErrc::invalid_contents, e.what());
  }
}

void write_embeddings(const EmbeddingMatrix& matrix, const std::filesystem::path& destination) {
  const auto bytes = encode_embeddings(matrix);
  std::ofstream out(destination, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(FormatErrc::io_failure, "cannot open " + destination.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError(FormatErrc::io_failure, "write failed for " + destination.string());
}

EmbeddingMatrix read_embeddings(const std::filesystem::path& source) {
  std::ifstream in(source, std::ios::binary);
  if (!in) throw FormatError(FormatErrc::io_failure, "cannot open " + source.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw FormatError(FormatErrc::io_failure, "read failed for " + source.string());
  return decode_embeddings(std::as_bytes(std::span(raw)));
}

}  // namespace gevk
