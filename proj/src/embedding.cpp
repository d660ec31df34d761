#include "t2ibench/embedding.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

#include "t2ibench/error.hpp"

namespace t2ibench {

std::string_view to_string(BlockKind kind) {
  switch (kind) {
    case BlockKind::kClipImage: return "clip_image";
    case BlockKind::kClipText: return "clip_text";
    case BlockKind::kInception: return "inception";
  }
  return "unknown";
}

EmbeddingBlock::EmbeddingBlock(std::uint32_t rows, std::uint32_t dim, std::vector<float> data,
                               BlockKind kind)
    : rows_(rows), dim_(dim), data_(std::move(data)), kind_(kind) {
  if (rows_ == 0 || dim_ == 0) {
    throw Error(ErrorKind::kFormat, "embedding block must have rows >= 1 and dim >= 1");
  }
  if (data_.size() != static_cast<std::size_t>(rows_) * dim_) {
    throw Error(ErrorKind::kFormat, "size mismatch: embedding block data length " +
                                        std::to_string(data_.size()) + " != rows*dim " +
                                        std::to_string(static_cast<std::size_t>(rows_) * dim_));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw Error(ErrorKind::kFormat, "non-finite value at row " + std::to_string(i / dim_) +
                                          ", column " + std::to_string(i % dim_));
    }
  }
}

namespace le {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

void put_f32(std::string& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

std::uint32_t get_u32(std::string_view bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  }
  return v;
}

float get_f32(std::string_view bytes, std::size_t offset) {
  return std::bit_cast<float>(get_u32(bytes, offset));
}

}  // namespace le

EmbeddingBlock decode_block(std::string_view bytes, BlockKind kind, const std::string& source) {
  if (bytes.size() < kBlockHeaderBytes) {
    throw Error(ErrorKind::kFormat, source + ": size mismatch: truncated header");
  }
  if (bytes.substr(0, 4) != "T2IE") throw Error(ErrorKind::kFormat, source + ": bad magic");
  const auto version = static_cast<std::uint8_t>(bytes[4]);
  if (version != kBlockVersion) {
    throw Error(ErrorKind::kFormat,
                source + ": unsupported version " + std::to_string(version));
  }
  const std::uint32_t rows = le::get_u32(bytes, 5);
  const std::uint32_t dim = le::get_u32(bytes, 9);
  const std::uint64_t expected = kBlockHeaderBytes + 4ull * rows * dim;
  if (bytes.size() != expected) {
    throw Error(ErrorKind::kFormat, source + ": size mismatch: header declares " +
                                        std::to_string(rows) + "x" + std::to_string(dim) +
                                        " (" + std::to_string(expected) + " bytes), file has " +
                                        std::to_string(bytes.size()) + " bytes");
  }
  std::vector<float> data(static_cast<std::size_t>(rows) * dim);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = le::get_f32(bytes, kBlockHeaderBytes + 4 * i);
  }
  try {
    return EmbeddingBlock(rows, dim, std::move(data), kind);
  } catch (const Error& e) {
    throw Error(e.kind(), source + ": " + e.what());
  }
}

std::string encode_block(const EmbeddingBlock& block) {
  std::string out;
  out.reserve(kBlockHeaderBytes + 4 * block.data().size());
  out.append("T2IE");
  out.push_back(static_cast<char>(kBlockVersion));
  le::put_u32(out, block.rows());
  le::put_u32(out, block.dim());
  for (float v : block.data()) le::put_f32(out, v);
  return out;
}

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_bytes(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path.string());
}

EmbeddingBlock read_embedding_block(const std::filesystem::path& path, BlockKind kind) {
  return decode_block(read_file_bytes(path), kind, path.string());
}

void write_embedding_block(const std::filesystem::path& path, const EmbeddingBlock& block) {
  write_file_bytes(path, encode_block(block));
}

}  // namespace t2ibench
