#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nopab/rng.hpp"

namespace nopab {

/// Fixed-length bit string packed into 64-bit words.
///
/// Bit 0 is the leftmost bit of the textual form; within a word, bit i lives
/// at position (i % 64) counting from the least significant bit. Unused tail
/// bits are kept zero so that equality and hashing can work word-wise.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t nbits) : nbits_(nbits), words_(word_count(nbits), 0) {}

  static BitVector from_string(std::string_view s) {
    BitVector v(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '1') {
        v.set(i, true);
      } else if (s[i] != '0') {
        throw std::invalid_argument("BitVector::from_string: invalid character");
      }
    }
    return v;
  }

  std::size_t size() const { return nbits_; }
  bool empty() const { return nbits_ == 0; }

  bool get(std::size_t i) const {
    check_index(i);
    return (words_[i >> 6] >> (i & 63)) & 1u;
  }

  void set(std::size_t i, bool value) {
    check_index(i);
    const std::uint64_t mask = std::uint64_t{1} << (i & 63);
    if (value) {
      words_[i >> 6] |= mask;
    } else {
      words_[i >> 6] &= ~mask;
    }
  }

  void flip(std::size_t i) { set(i, !get(i)); }

  void push_back(bool value) {
    ++nbits_;
    if (words_.size() < word_count(nbits_)) words_.push_back(0);
    set(nbits_ - 1, value);
  }

  BitVector& operator^=(const BitVector& other) {
    if (nbits_ != other.nbits_) {
      throw std::invalid_argument("BitVector xor: length mismatch");
    }
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= other.words_[i];
    return *this;
  }

  friend BitVector operator^(BitVector a, const BitVector& b) { return a ^= b; }

  bool operator==(const BitVector&) const = default;

  /// Number of set bits.
  std::size_t weight() const {
    std::size_t w = 0;
    for (std::uint64_t word : words_) w += static_cast<std::size_t>(std::popcount(word));
    return w;
  }

  /// XOR of all bits.
  bool parity() const { return weight() & 1u; }

  bool any() const {
    for (std::uint64_t word : words_)
      if (word != 0) return true;
    return false;
  }

  /// Lexicographic order on the bit string (bit 0 compared first).
  friend bool lex_less(const BitVector& a, const BitVector& b) {
    const std::size_t n = std::min(a.words_.size(), b.words_.size());
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint64_t diff = a.words_[i] ^ b.words_[i];
      if (diff != 0) {
        const int bit = std::countr_zero(diff);
        return ((a.words_[i] >> bit) & 1u) == 0;
      }
    }
    return a.nbits_ < b.nbits_;
  }

  /// New vector formed by the bits at the given positions, in order.
  BitVector gather(const std::vector<std::uint32_t>& positions) const {
    BitVector out(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i) out.set(i, get(positions[i]));
    return out;
  }

  /// New vector with the given (sorted, distinct) positions removed.
  BitVector drop(const std::vector<std::uint32_t>& sorted_positions) const {
    BitVector out(nbits_ - sorted_positions.size());
    std::size_t next = 0, j = 0;
    for (std::size_t i = 0; i < nbits_; ++i) {
      if (next < sorted_positions.size() && sorted_positions[next] == i) {
        ++next;
        continue;
      }
      out.set(j++, get(i));
    }
    return out;
  }

  BitVector concat(const BitVector& other) const {
    BitVector out(nbits_ + other.nbits_);
    for (std::size_t i = 0; i < nbits_; ++i) out.set(i, get(i));
    for (std::size_t i = 0; i < other.nbits_; ++i) out.set(nbits_ + i, other.get(i));
    return out;
  }

  std::string to_string() const {
    std::string s(nbits_, '0');
    for (std::size_t i = 0; i < nbits_; ++i)
      if (get(i)) s[i] = '1';
    return s;
  }

  const std::vector<std::uint64_t>& words() const { return words_; }

 private:
  static std::size_t word_count(std::size_t nbits) { return (nbits + 63) / 64; }

  void check_index(std::size_t i) const {
    if (i >= nbits_) throw std::out_of_range("BitVector index out of range");
  }

  std::size_t nbits_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Hamming distance; lengths must match.
inline std::size_t hamming_distance(const BitVector& a, const BitVector& b) {
  return (a ^ b).weight();
}

template <class Urbg>
inline BitVector random_bits(std::size_t nbits, Urbg& rng) {
  BitVector v(nbits);
  for (std::size_t i = 0; i < nbits; ++i) v.set(i, random_bit(rng));
  return v;
}

/// FNV-1a over the packed words; used for key digests in reports.
inline std::uint64_t fnv1a64(const BitVector& v) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](std::uint8_t byte) {
    h ^= byte;
    h *= 0x100000001b3ull;
  };
  std::uint64_t len = v.size();
  for (int i = 0; i < 8; ++i) mix(static_cast<std::uint8_t>(len >> (8 * i)));
  for (std::uint64_t word : v.words())
    for (int i = 0; i < 8; ++i) mix(static_cast<std::uint8_t>(word >> (8 * i)));
  return h;
}

}  // namespace nopab
