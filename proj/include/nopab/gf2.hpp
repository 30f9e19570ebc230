#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nopab/bitvec.hpp"
#include "nopab/rng.hpp"

namespace nopab::gf2 {

/// Dense GF(2) matrix, rows stored as packed bit vectors.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows, BitVector(cols)), cols_(cols) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.rows_[i].set(i, true);
    return m;
  }

  static Matrix from_rows(const std::vector<std::string>& rows) {
    Matrix m;
    for (const auto& r : rows) m.append_row(BitVector::from_string(r));
    return m;
  }

  std::size_t rows() const { return rows_.size(); }
  std::size_t cols() const { return cols_; }

  const BitVector& row(std::size_t i) const { return rows_.at(i); }

  bool get(std::size_t r, std::size_t c) const { return rows_.at(r).get(c); }
  void set(std::size_t r, std::size_t c, bool v) { rows_.at(r).set(c, v); }

  void append_row(BitVector r) {
    if (cols_ == 0 && rows_.empty()) {
      cols_ = r.size();
    } else if (r.size() != cols_) {
      throw std::invalid_argument("Matrix::append_row: width mismatch");
    }
    rows_.push_back(std::move(r));
  }

  bool operator==(const Matrix&) const = default;

 private:
  std::vector<BitVector> rows_;
  std::size_t cols_ = 0;
};

/// Standard GF(2) matrix-vector product.
inline BitVector mat_vec_mul(const Matrix& m, const BitVector& v) {
  if (m.cols() != v.size()) {
    throw std::invalid_argument("mat_vec_mul: dimension mismatch");
  }
  BitVector out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    std::size_t acc = 0;
    const auto& rw = m.row(i).words();
    const auto& vw = v.words();
    for (std::size_t w = 0; w < rw.size(); ++w) {
      acc += static_cast<std::size_t>(std::popcount(rw[w] & vw[w]));
    }
    out.set(i, acc & 1u);
  }
  return out;
}

inline std::size_t rank(Matrix m) {
  std::size_t r = 0;
  for (std::size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
    std::size_t pivot = r;
    while (pivot < m.rows() && !m.get(pivot, c)) ++pivot;
    if (pivot == m.rows()) continue;
    for (std::size_t c2 = 0; c2 < m.cols(); ++c2) {
      bool a = m.get(r, c2), b = m.get(pivot, c2);
      m.set(r, c2, b);
      m.set(pivot, c2, a);
    }
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (i != r && m.get(i, c)) {
        for (std::size_t c2 = c; c2 < m.cols(); ++c2) {
          m.set(i, c2, m.get(i, c2) ^ m.get(r, c2));
        }
      }
    }
    ++r;
  }
  return r;
}

/// Basis of { x : M x = 0 }, returned as rows of a matrix (possibly empty).
inline Matrix nullspace(const Matrix& m) {
  const std::size_t n = m.cols();
  Matrix work = m;
  std::vector<std::size_t> pivot_col;
  std::size_t r = 0;
  for (std::size_t c = 0; c < n && r < work.rows(); ++c) {
    std::size_t pivot = r;
    while (pivot < work.rows() && !work.get(pivot, c)) ++pivot;
    if (pivot == work.rows()) continue;
    for (std::size_t c2 = 0; c2 < n; ++c2) {
      bool a = work.get(r, c2), b = work.get(pivot, c2);
      work.set(r, c2, b);
      work.set(pivot, c2, a);
    }
    for (std::size_t i = 0; i < work.rows(); ++i) {
      if (i != r && work.get(i, c)) {
        for (std::size_t c2 = 0; c2 < n; ++c2) {
          work.set(i, c2, work.get(i, c2) ^ work.get(r, c2));
        }
      }
    }
    pivot_col.push_back(c);
    ++r;
  }
  std::vector<bool> is_pivot(n, false);
  for (std::size_t c : pivot_col) is_pivot[c] = true;

  Matrix basis(0, n);
  for (std::size_t free = 0; free < n; ++free) {
    if (is_pivot[free]) continue;
    BitVector x(n);
    x.set(free, true);
    for (std::size_t i = 0; i < pivot_col.size(); ++i) {
      if (work.get(i, free)) x.set(pivot_col[i], true);
    }
    basis.append_row(std::move(x));
  }
  return basis;
}

/// Classical [n, k] linear code with table-based syndrome decoding.
///
/// The syndrome table is filled by enumerating error patterns in order of
/// increasing weight; t is the largest weight for which every pattern still
/// has its own syndrome. Decoding is exact nearest-codeword for weight <= t
/// and reports anything outside the table as undecodable.
class LinearCode {
 public:
  LinearCode(Matrix generator, Matrix parity_check)
      : n_(generator.cols()),
        k_(generator.rows()),
        generator_(std::move(generator)),
        parity_check_(std::move(parity_check)) {
    if (parity_check_.rows() != n_ - k_ || (n_ > k_ && parity_check_.cols() != n_)) {
      throw std::invalid_argument("LinearCode: parity check has wrong shape");
    }
    if (rank(generator_) != k_) {
      throw std::invalid_argument("LinearCode: generator is not full rank");
    }
    for (std::size_t i = 0; i < k_ && n_ > k_; ++i) {
      if (mat_vec_mul(parity_check_, generator_.row(i)).any()) {
        throw std::invalid_argument("LinearCode: parity check does not annihilate generator");
      }
    }
    if (rank(parity_check_) != n_ - k_) {
      throw std::invalid_argument("LinearCode: parity check is not full rank");
    }
    build_syndrome_table();
  }

  /// Derives the parity check as a nullspace basis of the generator.
  static LinearCode from_generator(Matrix generator) {
    Matrix h = nullspace(generator);
    return LinearCode(std::move(generator), std::move(h));
  }

  std::size_t block_length() const { return n_; }
  std::size_t dimension() const { return k_; }
  std::size_t correctable_errors() const { return t_; }
  const Matrix& generator() const { return generator_; }
  const Matrix& parity_check() const { return parity_check_; }

  BitVector syndrome(const BitVector& word) const {
    return mat_vec_mul(parity_check_, word);
  }

  bool contains(const BitVector& word) const { return !syndrome(word).any(); }

  BitVector encode(const BitVector& message) const {
    if (message.size() != k_) {
      throw std::invalid_argument("LinearCode::encode: message length != k");
    }
    BitVector word(n_);
    for (std::size_t i = 0; i < k_; ++i) {
      if (message.get(i)) word ^= generator_.row(i);
    }
    return word;
  }

  template <class Urbg>
  BitVector random_codeword(Urbg& rng) const {
    return encode(random_bits(k_, rng));
  }

  /// All 2^k codewords; desk scale only (k capped).
  std::vector<BitVector> all_codewords() const {
    if (k_ > 20) throw std::invalid_argument("all_codewords: dimension too large");
    std::vector<BitVector> words;
    words.reserve(std::size_t{1} << k_);
    for (std::size_t m = 0; m < (std::size_t{1} << k_); ++m) {
      BitVector msg(k_);
      for (std::size_t i = 0; i < k_; ++i) msg.set(i, (m >> i) & 1u);
      words.push_back(encode(msg));
    }
    return words;
  }

 private:
  void build_syndrome_table();

  std::size_t n_;
  std::size_t k_;
  std::size_t t_ = 0;
  Matrix generator_;
  Matrix parity_check_;
  std::map<std::vector<std::uint64_t>, BitVector> table_;

  friend std::optional<BitVector> syndrome_decode(const LinearCode&, const BitVector&);
};

namespace detail {

// Advances a sorted index combination over [0, n); false when exhausted.
inline bool next_combination(std::vector<std::size_t>& idx, std::size_t n) {
  const std::size_t w = idx.size();
  std::size_t i = w;
  while (i-- > 0) {
    if (idx[i] + (w - i) < n) {
      ++idx[i];
      for (std::size_t j = i + 1; j < w; ++j) idx[j] = idx[j - 1] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace detail

inline void LinearCode::build_syndrome_table() {
  constexpr std::size_t kTableCap = std::size_t{1} << 20;
  table_[BitVector(n_ - k_).words()] = BitVector(n_);
  const std::size_t syndrome_space =
      (n_ - k_) >= 63 ? SIZE_MAX : (std::size_t{1} << (n_ - k_));
  for (std::size_t w = 1; w <= n_; ++w) {
    std::vector<std::size_t> idx(w);
    for (std::size_t i = 0; i < w; ++i) idx[i] = i;
    std::map<std::vector<std::uint64_t>, BitVector> added;
    bool stop = false;
    do {
      BitVector err(n_);
      for (std::size_t i : idx) err.set(i, true);
      auto key = syndrome(err).words();
      if (table_.count(key) > 0 || added.count(key) > 0 ||
          table_.size() + added.size() >= kTableCap) {
        stop = true;  // syndrome collision, or table grown past desk scale
        break;
      }
      added.emplace(std::move(key), std::move(err));
    } while (detail::next_combination(idx, n_));
    if (stop) break;
    for (auto& [key, err] : added) table_.emplace(key, std::move(err));
    t_ = w;
    if (table_.size() >= syndrome_space) break;  // perfect at this radius
  }
}

/// Nearest codeword within distance t, or nullopt when the syndrome falls
/// outside the decodable set (never silently mis-corrected beyond t).
inline std::optional<BitVector> syndrome_decode(const LinearCode& code,
                                                const BitVector& word) {
  if (word.size() != code.block_length()) {
    throw std::invalid_argument("syndrome_decode: word length != n");
  }
  auto it = code.table_.find(code.syndrome(word).words());
  if (it == code.table_.end()) return std::nullopt;
  return word ^ it->second;
}

/// Nested pair C2 subset of C1 used for coset key extraction.
struct CssPair {
  LinearCode c1;
  LinearCode c2;

  std::size_t block_length() const { return c1.block_length(); }
  std::size_t key_length() const { return c1.dimension() - c2.dimension(); }
};

/// True iff every generator row of c2 lies in c1 (zero syndrome under c1's
/// parity check). Block lengths must match.
inline bool verify_nested(const CssPair& pair) {
  if (pair.c1.block_length() != pair.c2.block_length()) return false;
  for (std::size_t i = 0; i < pair.c2.dimension(); ++i) {
    if (pair.c1.syndrome(pair.c2.generator().row(i)).any()) return false;
  }
  return true;
}

/// Full pair validation: nesting plus at least one key bit.
inline void validate_css(const CssPair& pair) {
  if (!verify_nested(pair)) {
    throw std::invalid_argument("CssPair: C2 is not contained in C1");
  }
  if (pair.c1.dimension() <= pair.c2.dimension()) {
    throw std::invalid_argument("CssPair: key length dim(C1)-dim(C2) must be >= 1");
  }
}

namespace detail {

// Lexicographically smallest member of u + C2.
inline BitVector coset_representative(const CssPair& pair, const BitVector& u) {
  BitVector best = u;
  const std::size_t k2 = pair.c2.dimension();
  for (std::size_t m = 1; m < (std::size_t{1} << k2); ++m) {
    BitVector msg(k2);
    for (std::size_t i = 0; i < k2; ++i) msg.set(i, (m >> i) & 1u);
    BitVector cand = u ^ pair.c2.encode(msg);
    if (lex_less(cand, best)) best = cand;
  }
  return best;
}

// Ordered transversal: representatives of all cosets of C2 in C1, sorted
// lexicographically. Index in this list is the coset label.
inline std::vector<BitVector> coset_transversal(const CssPair& pair) {
  std::map<std::vector<std::uint64_t>, BitVector> reps;
  for (const BitVector& u : pair.c1.all_codewords()) {
    BitVector rep = coset_representative(pair, u);
    reps.emplace(rep.words(), rep);
  }
  std::vector<BitVector> ordered;
  ordered.reserve(reps.size());
  for (auto& [key, rep] : reps) ordered.push_back(rep);
  std::sort(ordered.begin(), ordered.end(),
            [](const BitVector& a, const BitVector& b) { return lex_less(a, b); });
  return ordered;
}

}  // namespace detail

/// Deterministic label of the coset u + C2, as a (dimC1 - dimC2)-bit vector:
/// the index of the coset's lexicographically smallest representative within
/// the sorted transversal, written MSB first.
inline BitVector coset_label(const CssPair& pair, const BitVector& u) {
  if (!pair.c1.contains(u)) {
    throw std::invalid_argument("coset_label: u is not a codeword of C1");
  }
  const BitVector rep = detail::coset_representative(pair, u);
  const std::vector<BitVector> transversal = detail::coset_transversal(pair);
  std::size_t index = 0;
  for (; index < transversal.size(); ++index) {
    if (transversal[index] == rep) break;
  }
  if (index == transversal.size()) {
    throw std::logic_error("coset_label: representative missing from transversal");
  }
  const std::size_t bits = pair.key_length();
  BitVector label(bits);
  for (std::size_t j = 0; j < bits; ++j) {
    label.set(j, (index >> (bits - 1 - j)) & 1u);
  }
  return label;
}

struct ReconcileResult {
  BitVector announcement;            ///< u xor v, public
  BitVector alice_key;               ///< coset label of u
  std::optional<BitVector> bob_key;  ///< nullopt on undecodable syndrome
};

/// One-way key reconciliation with the codeword u fixed by the caller
/// (exhaustive tests sweep it); Alice holds v, Bob holds v xor eps. Alice
/// announces u xor v; Bob decodes (u xor v) xor (v xor eps) = u xor eps to
/// a codeword w and both take coset labels. Keys agree whenever
/// weight(eps) <= t of C1.
inline ReconcileResult one_way_reconcile_with(const CssPair& pair, const BitVector& u,
                                              const BitVector& alice_bits,
                                              const BitVector& bob_bits) {
  const std::size_t n = pair.block_length();
  if (alice_bits.size() != n || bob_bits.size() != n) {
    throw std::invalid_argument("one_way_reconcile: inputs must have length n");
  }
  ReconcileResult result{u ^ alice_bits, coset_label(pair, u), std::nullopt};
  const BitVector shifted = result.announcement ^ bob_bits;  // u xor eps
  if (auto w = syndrome_decode(pair.c1, shifted)) {
    result.bob_key = coset_label(pair, *w);
  }
  return result;
}

/// Same with Alice drawing u uniformly from C1.
template <class Urbg>
inline ReconcileResult one_way_reconcile(const CssPair& pair, const BitVector& alice_bits,
                                         const BitVector& bob_bits, Urbg& rng) {
  return one_way_reconcile_with(pair, pair.c1.random_codeword(rng), alice_bits, bob_bits);
}

/// Built-in default pair: C1 = Hamming [7,4] (t = 1), C2 = its dual simplex
/// [7,3]. Smallest standard nested pair; one key bit per block.
inline CssPair steane_pair() {
  Matrix g1 = Matrix::from_rows({
      "1110000",
      "1001100",
      "0101010",
      "1101001",
  });
  Matrix h1 = Matrix::from_rows({
      "0001111",
      "0110011",
      "1010101",
  });
  // The dual's parity check is C1's generator.
  LinearCode c1(g1, h1);
  LinearCode c2(h1, g1);
  return CssPair{std::move(c1), std::move(c2)};
}

/// Plain-text code format: first line "n k", then k generator rows of n
/// characters in {0,1}; optionally a line "H" followed by n-k parity rows.
/// Without the H block the parity check is derived from the generator.
inline LinearCode load_code(std::istream& in) {
  std::size_t n = 0, k = 0;
  if (!(in >> n >> k)) throw std::invalid_argument("code file: missing 'n k' header");
  if (n == 0 || k == 0 || k > n) throw std::invalid_argument("code file: bad dimensions");
  if (n > 128) {
    throw std::invalid_argument("code file: block length beyond table-decodable scale");
  }
  Matrix generator;
  std::string line;
  for (std::size_t i = 0; i < k; ++i) {
    if (!(in >> line) || line.size() != n) {
      throw std::invalid_argument("code file: bad generator row");
    }
    generator.append_row(BitVector::from_string(line));
  }
  if (in >> line) {
    if (line != "H") throw std::invalid_argument("code file: expected 'H' separator");
    Matrix parity;
    for (std::size_t i = 0; i < n - k; ++i) {
      if (!(in >> line) || line.size() != n) {
        throw std::invalid_argument("code file: bad parity row");
      }
      parity.append_row(BitVector::from_string(line));
    }
    return LinearCode(std::move(generator), std::move(parity));
  }
  return LinearCode::from_generator(std::move(generator));
}

inline void save_code(std::ostream& out, const LinearCode& code) {
  out << code.block_length() << ' ' << code.dimension() << '\n';
  for (std::size_t i = 0; i < code.dimension(); ++i) {
    out << code.generator().row(i).to_string() << '\n';
  }
  out << "H\n";
  for (std::size_t i = 0; i < code.block_length() - code.dimension(); ++i) {
    out << code.parity_check().row(i).to_string() << '\n';
  }
}

}  // namespace nopab::gf2
