#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace m3pipe {

// FNV-1a 64-bit. Used to derive deterministic seeds from strings.
constexpr std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// splitmix64 PRNG. Fixed as the project-wide seeded stream so that mixture
// selections are reproducible across implementations. Test vectors:
//   seed 0  -> e220a8397b1dcdaf, 6e789e6aa1b965f4, 06c45d188009454f
//   seed 42 -> bdd732262feb6e95, 28efe333b266f103, 47526757130f9f52
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform draw in [0, 1) from the top 53 bits.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// Hex-encoded SHA-256 of a byte string (64 hex digits, lowercase).
std::string sha256_hex(std::string_view data);

// Incremental SHA-256 for streaming shard checksums.
class Sha256Stream {
 public:
  Sha256Stream();
  ~Sha256Stream();
  Sha256Stream(const Sha256Stream&) = delete;
  Sha256Stream& operator=(const Sha256Stream&) = delete;

  void update(std::string_view data);
  // Finishes the digest; the stream must not be updated afterwards.
  std::string hex_digest();

 private:
  void* ctx_;
};

// SHA-256 of a file's raw bytes. Throws ValidationError if unreadable.
std::string sha256_file_hex(const std::string& path);

}  // namespace m3pipe
