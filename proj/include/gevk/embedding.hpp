#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gevk/common.hpp"

namespace gevk {

/// Dense row-major matrix of binary32 feature vectors, one row per image or prompt.
///
/// Invariants (checked on construction): at least one row and one column,
/// `values.size() == n_rows * dims`, every value finite, row ids unique.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix(std::size_t n_rows, std::size_t dims, std::vector<float> values,
                  std::vector<std::string> row_ids);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t dims() const { return dims_; }
  std::span<const float> values() const { return values_; }
  const std::vector<std::string>& row_ids() const { return row_ids_; }

  std::span<const float> row(std::size_t i) const { return {values_.data() + i * dims_, dims_}; }
  std::vector<double> row_as_double(std::size_t i) const;

  /// Index of the row with the given id, or n_rows() when absent.
  std::size_t find(const std::string& row_id) const;

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  std::size_t n_rows_;
  std::size_t dims_;
  std::vector<float> values_;
  std::vector<std::string> row_ids_;
};

namespace embedding_format {

inline constexpr char kMagic[4] = {'G', 'E', 'V', 'K'};
inline constexpr std::uint32_t kVersion = 1;
inline constexpr std::uint8_t kDtypeFloat32 = 0x01;
/// magic + version + n_rows + dims + dtype
inline constexpr std::size_t kHeaderSize = 4 + 4 + 8 + 8 + 1;

}  // namespace embedding_format

enum class FormatErrc {
  io_failure,
  bad_magic,
  version_mismatch,
  unsupported_dtype,
  truncated_payload,
  size_mismatch,
  invalid_contents,
};

std::string to_string(FormatErrc code);

class FormatError : public InputError {
 public:
  FormatError(FormatErrc code, const std::string& detail);
  FormatErrc code() const { return code_; }

 private:
  FormatErrc code_;
};

/// Serialize to the GEVK layout:
///   "GEVK" | u32 version | u64 n_rows | u64 dims | u8 dtype |
///   n_rows x (u32 byte length, UTF-8 id) | n_rows*dims binary32 values.
/// All integers and floats little-endian.
std::vector<std::byte> encode_embeddings(const EmbeddingMatrix& matrix);
EmbeddingMatrix decode_embeddings(std::span<const std::byte> bytes);

void write_embeddings(const EmbeddingMatrix& matrix, const std::filesystem::path& destination);
EmbeddingMatrix read_embeddings(const std::filesystem::path& source);

}  // namespace gevk
