#include "condkit/tar.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstring>

#include "condkit/error.hpp"

namespace condkit {

namespace {

constexpr std::size_t kBlock = 512;
using Block = std::array<char, kBlock>;

void writeOctal(char* field, std::size_t width, std::uint64_t value) {
  // width includes the trailing NUL
  std::snprintf(field, width, "%0*llo", static_cast<int>(width - 1),
                static_cast<unsigned long long>(value));
}

std::uint64_t parseOctal(const char* field, std::size_t width) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < width && field[i] != '\0' && field[i] != ' '; ++i) {
    if (field[i] < '0' || field[i] > '7') {
      throw Error(ErrorCode::FormatError, "malformed octal field in tar header");
    }
    v = (v << 3) | static_cast<std::uint64_t>(field[i] - '0');
  }
  return v;
}

unsigned headerChecksum(const Block& h) {
  unsigned sum = 0;
  for (std::size_t i = 0; i < kBlock; ++i) {
    const bool inChecksumField = i >= 148 && i < 156;
    sum += inChecksumField ? static_cast<unsigned>(' ') : static_cast<unsigned char>(h[i]);
  }
  return sum;
}

std::uint64_t padding(std::uint64_t size) { return (kBlock - size % kBlock) % kBlock; }

}  // namespace

TarWriter::TarWriter(const std::filesystem::path& path)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
}

TarWriter::~TarWriter() {
  if (!finished_) {
    try {
      finish();
    } catch (...) {
    }
  }
}

std::uint64_t TarWriter::add(const std::string& name, std::span<const std::uint8_t> data) {
  if (name.empty() || name.size() >= 100) {
    throw Error(ErrorCode::InvalidArgument, "tar entry name must be 1..99 bytes: " + name);
  }
  Block h{};
  std::memcpy(h.data(), name.data(), name.size());
  writeOctal(h.data() + 100, 8, 0644);
  writeOctal(h.data() + 108, 8, 0);
  writeOctal(h.data() + 116, 8, 0);
  writeOctal(h.data() + 124, 12, data.size());
  writeOctal(h.data() + 136, 12, 0);
  h[156] = '0';
  std::memcpy(h.data() + 257, "ustar", 6);
  std::memcpy(h.data() + 263, "00", 2);
  std::snprintf(h.data() + 148, 8, "%06o", headerChecksum(h));
  h[155] = ' ';

  const std::uint64_t headerOffset = offset_;
  out_.write(h.data(), kBlock);
  out_.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  static const Block zeros{};
  out_.write(zeros.data(), static_cast<std::streamsize>(padding(data.size())));
  if (!out_) throw Error(ErrorCode::IoFailure, "write failed on " + path_.string());
  offset_ += kBlock + data.size() + padding(data.size());
  return headerOffset;
}

void TarWriter::finish() {
  if (finished_) return;
  finished_ = true;
  static const Block zeros{};
  out_.write(zeros.data(), kBlock);
  out_.write(zeros.data(), kBlock);
  offset_ += 2 * kBlock;
  out_.close();
  if (!out_) throw Error(ErrorCode::IoFailure, "cannot finalize " + path_.string());
}

TarReader::TarReader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
}

std::optional<TarEntry> TarReader::next(bool readData) {
  while (!done_) {
    Block h{};
    in_.read(h.data(), kBlock);
    if (in_.gcount() == 0 && in_.eof()) {
      throw Error(ErrorCode::IoFailure, path_.string() + ": archive ends without terminator");
    }
    if (static_cast<std::size_t>(in_.gcount()) != kBlock) {
      throw Error(ErrorCode::IoFailure, path_.string() + ": truncated tar header at offset " +
                                            std::to_string(offset_));
    }
    bytesRead_ += kBlock;
    if (std::all_of(h.begin(), h.end(), [](char c) { return c == 0; })) {
      done_ = true;
      return std::nullopt;
    }
    const unsigned stored = static_cast<unsigned>(parseOctal(h.data() + 148, 8));
    if (stored != headerChecksum(h)) {
      throw Error(ErrorCode::FormatError, path_.string() + ": tar header checksum mismatch at offset " +
                                              std::to_string(offset_));
    }
    TarEntry e;
    e.headerOffset = offset_;
    e.name.assign(h.data(), strnlen(h.data(), 100));
    e.size = parseOctal(h.data() + 124, 12);
    const char type = h[156];
    const std::uint64_t skip = e.size + padding(e.size);
    offset_ += kBlock + skip;
    if (type != '0' && type != '\0') {
      in_.seekg(static_cast<std::streamoff>(skip), std::ios::cur);
      continue;
    }
    if (readData) {
      e.data.resize(e.size);
      in_.read(reinterpret_cast<char*>(e.data.data()), static_cast<std::streamsize>(e.size));
      if (static_cast<std::uint64_t>(in_.gcount()) != e.size) {
        throw Error(ErrorCode::IoFailure, path_.string() + ": truncated payload for " + e.name);
      }
      in_.seekg(static_cast<std::streamoff>(padding(e.size)), std::ios::cur);
      bytesRead_ += skip;
    } else {
      in_.seekg(static_cast<std::streamoff>(skip), std::ios::cur);
    }
    if (!in_) throw Error(ErrorCode::IoFailure, path_.string() + ": read error");
    return e;
  }
  return std::nullopt;
}

}  // namespace condkit
