#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace condkit {

/// Minimal POSIX ustar writer: regular files only, deterministic headers
/// (mtime 0, mode 0644, no owner names).
class TarWriter {
 public:
  explicit TarWriter(const std::filesystem::path& path);
  ~TarWriter();
  TarWriter(const TarWriter&) = delete;
  TarWriter& operator=(const TarWriter&) = delete;

  /// Returns the byte offset of the entry's header.
  std::uint64_t add(const std::string& name, std::span<const std::uint8_t> data);
  /// Writes the two terminating zero blocks and closes the file.
  void finish();

  std::uint64_t offset() const { return offset_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::uint64_t offset_ = 0;
  bool finished_ = false;
};

struct TarEntry {
  std::string name;
  std::uint64_t headerOffset = 0;
  std::uint64_t size = 0;
  std::vector<std::uint8_t> data;
};

/// Sequential ustar reader. Structural damage (bad header checksum, short
/// read) throws; the caller decides what to do with payload contents.
class TarReader {
 public:
  explicit TarReader(const std::filesystem::path& path);

  /// Next regular-file entry, or nullopt at the end-of-archive marker.
  /// With `readData` false the payload is skipped, not loaded.
  std::optional<TarEntry> next(bool readData = true);

  std::uint64_t offset() const { return offset_; }
  std::uint64_t bytesRead() const { return bytesRead_; }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::uint64_t offset_ = 0;
  std::uint64_t bytesRead_ = 0;
  bool done_ = false;
};

}  // namespace condkit
