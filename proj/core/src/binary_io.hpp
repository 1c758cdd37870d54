#pragma once

// Little-endian record streams with a one-line JSON header.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "cursor/error.hpp"

namespace cursor::detail {

class BinaryWriter {
 public:
  explicit BinaryWriter(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw IoError("cannot write " + path.string());
  }

  void header(const std::string& json_line) { out_ << json_line << '\n'; }

  void u32(std::uint32_t v) { put(v, 4); }

  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }

  void close() {
    out_.flush();
    if (!out_) throw IoError("write failed: " + path_.string());
  }

 private:
  void put(std::uint64_t v, int bytes) {
    char buf[8];
    for (int b = 0; b < bytes; ++b) buf[b] = static_cast<char>((v >> (8 * b)) & 0xffU);
    out_.write(buf, bytes);
  }

  std::filesystem::path path_;
  std::ofstream out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open " + path.string());
  }

  std::string header() {
    std::string line;
    if (!std::getline(in_, line)) throw ParseError("missing header line");
    return line;
  }

  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }

  double f64() { return std::bit_cast<double>(get(8)); }

  void expect_end() {
    if (in_.peek() != std::char_traits<char>::eof()) throw ParseError("trailing bytes after last record");
  }

 private:
  std::uint64_t get(int bytes) {
    unsigned char buf[8];
    if (!in_.read(reinterpret_cast<char*>(buf), bytes)) throw ParseError("truncated record stream");
    std::uint64_t v = 0;
    for (int b = 0; b < bytes; ++b) v |= static_cast<std::uint64_t>(buf[b]) << (8 * b);
    return v;
  }

  std::ifstream in_;
};

}  // namespace cursor::detail
