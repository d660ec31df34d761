#pragma once

// Dense embedding matrices and their `.emb` on-disk format:
//   bytes 0-3  magic "T2IE"
//   byte  4    version (1)
//   bytes 5-8  rows, u32 little-endian
//   bytes 9-12 dim,  u32 little-endian
//   then rows*dim f32 little-endian, row-major.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace t2ibench {

enum class BlockKind { kClipImage, kClipText, kInception };

std::string_view to_string(BlockKind kind);

inline constexpr std::size_t kBlockHeaderBytes = 13;
inline constexpr std::uint8_t kBlockVersion = 1;

// Row-major matrix of finite f32 feature values, rows >= 1 and dim >= 1.
class EmbeddingBlock {
 public:
  EmbeddingBlock(std::uint32_t rows, std::uint32_t dim, std::vector<float> data,
                 BlockKind kind = BlockKind::kClipImage);

  std::uint32_t rows() const { return rows_; }
  std::uint32_t dim() const { return dim_; }
  BlockKind kind() const { return kind_; }
  std::span<const float> data() const { return data_; }
  std::span<const float> row(std::size_t r) const {
    return std::span<const float>(data_).subspan(r * dim_, dim_);
  }
  float at(std::size_t r, std::size_t c) const { return data_[r * dim_ + c]; }

  friend bool operator==(const EmbeddingBlock&, const EmbeddingBlock&) = default;

 private:
  std::uint32_t rows_;
  std::uint32_t dim_;
  std::vector<float> data_;
  BlockKind kind_;
};

EmbeddingBlock decode_block(std::string_view bytes, BlockKind kind = BlockKind::kClipImage,
                            const std::string& source = "<memory>");
std::string encode_block(const EmbeddingBlock& block);

EmbeddingBlock read_embedding_block(const std::filesystem::path& path,
                                    BlockKind kind = BlockKind::kClipImage);
void write_embedding_block(const std::filesystem::path& path, const EmbeddingBlock& block);

// Shared little-endian helpers for the binary formats.
namespace le {
void put_u32(std::string& out, std::uint32_t v);
void put_f32(std::string& out, float v);
std::uint32_t get_u32(std::string_view bytes, std::size_t offset);
float get_f32(std::string_view bytes, std::size_t offset);
}  // namespace le

std::string read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::string_view bytes);

}  // namespace t2ibench
