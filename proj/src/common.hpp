#ifndef SPECMINE_COMMON_HPP
#define SPECMINE_COMMON_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace specmine {

enum class Err {
  Config,
  Io,
  Parse,
  BackendUnavailable,
  ParseFailure,
  SpanConflict,
  TooLong,
  SequenceTooLong,
  EmptySplit,
  ShapeMismatch,
  AllIgnored,
  EmptyBatch,
  Divergence,
  State,
  Internal,
};

class Error : public std::runtime_error {
 public:
  Error(Err code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}
  Err code() const { return code_; }

 private:
  Err code_;
};

const char* err_name(Err code);

// FNV-1a, used for config and label-map fingerprints in run manifests.
inline std::uint64_t fnv1a(std::string_view data,
                           std::uint64_t seed = 0xcbf29ce484222325ull) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string to_hex(std::uint64_t value);

// Deterministic integer draw in [0, n). Uses rejection sampling on the raw
// 64-bit stream so results do not depend on the standard library's
// distribution implementation.
template <typename Rng>
std::uint64_t draw_below(Rng& rng, std::uint64_t n) {
  if (n == 0) throw Error(Err::Internal, "draw_below: n must be positive");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

template <typename Rng>
double draw_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

}  // namespace specmine

#endif  // SPECMINE_COMMON_HPP
