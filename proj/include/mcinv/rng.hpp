#pragma once

// Reproducible pseudo-random bytes and unbiased sampling of signs and
// treatment assignments.
//
// The default generator is SHA-256 in counter mode: output block i is
// SHA256(seed || big-endian-64(i)). Blocks are consumed in order and no byte
// is handed out twice. Replicate j of a Monte Carlo sample draws from the
// child stream derive(j), so frozen draws do not depend on how replicates are
// spread over threads.

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mcinv/errors.hpp"

namespace mcinv {

using Bytes = std::vector<std::uint8_t>;
using uint128 = unsigned __int128;

inline constexpr uint128 kTwoPow64 = uint128{1} << 64;

namespace detail {

struct EvpCtxDeleter {
  void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};

inline void append_be64(Bytes& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>(v >> shift));
  }
}

}  // namespace detail

using Sha256Digest = std::array<std::uint8_t, 32>;

inline Sha256Digest sha256(std::span<const std::uint8_t> message) {
  thread_local std::unique_ptr<EVP_MD_CTX, detail::EvpCtxDeleter> ctx{EVP_MD_CTX_new()};
  Sha256Digest out{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), message.data(), message.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), out.data(), &len) != 1 || len != out.size()) {
    throw Error("SHA-256 computation failed");
  }
  return out;
}

// seed || BE64(index), hashed. Used for independent, reproducible sub-seeds.
inline Bytes derive_seed(std::span<const std::uint8_t> seed, std::uint64_t index) {
  Bytes msg(seed.begin(), seed.end());
  detail::append_be64(msg, index);
  const auto digest = sha256(msg);
  return Bytes(digest.begin(), digest.end());
}

// "hex:0a1b..." decodes to raw bytes; anything else is taken as UTF-8.
inline Bytes parse_seed(std::string_view text) {
  constexpr std::string_view prefix = "hex:";
  if (!text.starts_with(prefix)) return Bytes(text.begin(), text.end());
  text.remove_prefix(prefix.size());
  if (text.size() % 2 != 0) throw InputError("hex seed must have an even number of digits");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw InputError(std::string("invalid hex digit in seed: '") + c + "'");
  };
  Bytes out;
  out.reserve(text.size() / 2);
  for (std::size_t i = 0; i < text.size(); i += 2) {
    out.push_back(static_cast<std::uint8_t>(nibble(text[i]) * 16 + nibble(text[i + 1])));
  }
  return out;
}

template <class G>
concept ByteSource = requires(G& g, std::span<std::uint8_t> out) {
  { g.next_bytes(out) };
};

// Generators that can split off an independent child stream per replicate.
template <class G>
concept StreamGenerator = ByteSource<G> && requires(const G& g, std::uint64_t i) {
  { g.derive(i) } -> std::same_as<G>;
};

class SeededGenerator {
 public:
  explicit SeededGenerator(Bytes seed) : seed_(std::move(seed)) {
    message_.reserve(seed_.size() + 8);
  }
  explicit SeededGenerator(std::string_view seed) : SeededGenerator(Bytes(seed.begin(), seed.end())) {}

  void next_bytes(std::span<std::uint8_t> out) {
    std::size_t written = 0;
    while (written < out.size()) {
      if (pos_ == buffer_.size()) refill();
      const std::size_t take = std::min(out.size() - written, buffer_.size() - pos_);
      std::copy_n(buffer_.begin() + static_cast<std::ptrdiff_t>(pos_), take,
                  out.begin() + static_cast<std::ptrdiff_t>(written));
      pos_ += take;
      written += take;
    }
  }

  Bytes next_bytes(std::size_t k) {
    Bytes out(k);
    next_bytes(std::span<std::uint8_t>(out));
    return out;
  }

  SeededGenerator derive(std::uint64_t stream) const {
    Bytes child = seed_;
    detail::append_be64(child, stream);
    return SeededGenerator(std::move(child));
  }

  const Bytes& seed() const { return seed_; }
  // Number of hash blocks produced so far.
  std::uint64_t counter() const { return counter_; }
  std::size_t buffered() const { return buffer_.size() - pos_; }

 private:
  void refill() {
    if (counter_ == UINT64_MAX) throw Error("SeededGenerator counter exhausted");
    message_.assign(seed_.begin(), seed_.end());
    detail::append_be64(message_, counter_++);
    buffer_ = sha256(message_);
    pos_ = 0;
  }

  Bytes seed_;
  Bytes message_;
  std::uint64_t counter_ = 0;
  Sha256Digest buffer_{};
  std::size_t pos_ = buffer_.size();
};

// Mersenne Twister alternative for large problems where hashing dominates.
class FastGenerator {
 public:
  explicit FastGenerator(Bytes seed) : seed_(std::move(seed)) {
    const auto digest = sha256(seed_);
    std::array<std::uint32_t, 8> words{};
    for (std::size_t i = 0; i < words.size(); ++i) {
      words[i] = (std::uint32_t{digest[4 * i]} << 24) | (std::uint32_t{digest[4 * i + 1]} << 16) |
                 (std::uint32_t{digest[4 * i + 2]} << 8) | std::uint32_t{digest[4 * i + 3]};
    }
    std::seed_seq seq(words.begin(), words.end());
    engine_.seed(seq);
  }
  explicit FastGenerator(std::string_view seed) : FastGenerator(Bytes(seed.begin(), seed.end())) {}

  void next_bytes(std::span<std::uint8_t> out) {
    for (auto& byte : out) {
      if (left_ == 0) {
        word_ = engine_();
        left_ = 8;
      }
      --left_;
      byte = static_cast<std::uint8_t>(word_ >> (8 * left_));
    }
  }

  FastGenerator derive(std::uint64_t stream) const {
    Bytes child = seed_;
    detail::append_be64(child, stream);
    return FastGenerator(std::move(child));
  }

  const Bytes& seed() const { return seed_; }

 private:
  Bytes seed_;
  std::mt19937_64 engine_;
  std::uint64_t word_ = 0;
  int left_ = 0;
};

enum class GeneratorKind { sha256, mt19937 };

// Uniform integer in [0, bound) by rejection on the smallest whole number of
// big-endian bytes covering bound. Requires 1 <= bound <= 2^64.
template <ByteSource G>
std::uint64_t uniform_below(G& gen, uint128 bound) {
  if (bound == 0 || bound > kTwoPow64) throw DomainError("uniform_below: bound must be in [1, 2^64]");
  int nbytes = 1;
  while (nbytes < 8 && (uint128{1} << (8 * nbytes)) < bound) ++nbytes;
  const uint128 range = uint128{1} << (8 * nbytes);
  const uint128 limit = (range / bound) * bound;
  std::array<std::uint8_t, 8> buf{};
  const std::span<std::uint8_t> draw(buf.data(), static_cast<std::size_t>(nbytes));
  for (;;) {
    gen.next_bytes(draw);
    uint128 v = 0;
    for (auto b : draw) v = (v << 8) | b;
    if (v < limit) return static_cast<std::uint64_t>(v % bound);
  }
}

struct SignVector {
  std::vector<std::int8_t> signs;

  std::size_t size() const { return signs.size(); }
  int sum() const { return std::accumulate(signs.begin(), signs.end(), 0); }
  friend bool operator==(const SignVector&, const SignVector&) = default;
};

struct AssignmentVector {
  std::vector<std::uint8_t> labels;
  std::size_t m = 0;

  std::size_t size() const { return labels.size(); }
  friend bool operator==(const AssignmentVector&, const AssignmentVector&) = default;
};

// One bit per sign, most significant bit first; 1 -> +1, 0 -> -1.
template <ByteSource G>
void random_signs_into(G& gen, std::span<std::int8_t> out, Bytes& scratch) {
  scratch.resize((out.size() + 7) / 8);
  gen.next_bytes(std::span<std::uint8_t>(scratch));
  for (std::size_t j = 0; j < out.size(); ++j) {
    const bool bit = (scratch[j / 8] >> (7 - j % 8)) & 1u;
    out[j] = bit ? 1 : -1;
  }
}

template <ByteSource G>
SignVector random_signs(G& gen, std::size_t n) {
  if (n == 0) throw DomainError("random_signs: n must be >= 1");
  SignVector v;
  v.signs.resize(n);
  Bytes scratch;
  random_signs_into(gen, std::span<std::int8_t>(v.signs), scratch);
  return v;
}

// Partial Fisher-Yates over unit indices; the first m positions after m swaps
// form a uniform random m-subset. `index` is scratch space reused across calls.
template <ByteSource G>
void random_assignment_into(G& gen, std::size_t n, std::size_t m, std::vector<std::uint32_t>& index,
                            std::span<std::uint8_t> labels) {
  index.resize(n);
  std::iota(index.begin(), index.end(), std::uint32_t{0});
  std::fill(labels.begin(), labels.end(), std::uint8_t{0});
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + uniform_below(gen, n - i);
    std::swap(index[i], index[j]);
    labels[index[i]] = 1;
  }
}

template <ByteSource G>
AssignmentVector random_assignment(G& gen, std::size_t n, std::size_t m) {
  if (m == 0 || m >= n) {
    throw DomainError("random_assignment: need 0 < m < n (got n=" + std::to_string(n) +
                      ", m=" + std::to_string(m) + ")");
  }
  AssignmentVector a;
  a.labels.resize(n);
  a.m = m;
  std::vector<std::uint32_t> index;
  random_assignment_into(gen, n, m, index, std::span<std::uint8_t>(a.labels));
  return a;
}

// Uniform double in [0, 1) with 53 random bits.
template <ByteSource G>
double uniform_unit(G& gen) {
  return static_cast<double>(uniform_below(gen, uint128{1} << 53)) * 0x1.0p-53;
}

}  // namespace mcinv
