#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>
#include <sstream>

#include "nopab/gf2.hpp"

using namespace nopab;
using namespace nopab::gf2;

namespace {

// Independent brute-force oracle: nearest codeword by scanning all of C1.
// Returns all codewords at minimal Hamming distance.
std::vector<BitVector> nearest_codewords(const LinearCode& code, const BitVector& word) {
  std::size_t best = SIZE_MAX;
  std::vector<BitVector> hits;
  for (const BitVector& c : code.all_codewords()) {
    const std::size_t d = hamming_distance(c, word);
    if (d < best) {
      best = d;
      hits.clear();
    }
    if (d == best) hits.push_back(c);
  }
  return hits;
}

LinearCode full_space(std::size_t n) {
  return LinearCode::from_generator(Matrix::identity(n));
}

std::vector<BitVector> weight_patterns(std::size_t n, std::size_t w) {
  std::vector<BitVector> out;
  std::vector<std::size_t> idx(w);
  for (std::size_t i = 0; i < w; ++i) idx[i] = i;
  while (true) {
    BitVector e(n);
    for (std::size_t i : idx) e.set(i, true);
    out.push_back(e);
    std::size_t i = w;
    bool advanced = false;
    while (i-- > 0) {
      if (idx[i] + (w - i) < n) {
        ++idx[i];
        for (std::size_t j = i + 1; j < w; ++j) idx[j] = idx[j - 1] + 1;
        advanced = true;
        break;
      }
    }
    if (!advanced) break;
  }
  return out;
}

}  // namespace

TEST_CASE("BitVector basics") {
  BitVector v = BitVector::from_string("10110");
  CHECK(v.size() == 5);
  CHECK(v.weight() == 3);
  CHECK(v.get(0));
  CHECK_FALSE(v.get(1));
  CHECK(v.to_string() == "10110");

  BitVector w = BitVector::from_string("01110");
  CHECK((v ^ w).to_string() == "11000");
  CHECK_THROWS_AS(v ^ BitVector(4), std::invalid_argument);

  CHECK(lex_less(BitVector::from_string("0111"), BitVector::from_string("1000")));
  CHECK_FALSE(lex_less(v, v));

  CHECK(v.gather({0, 2, 4}).to_string() == "110");
  CHECK(v.drop({1, 3}).to_string() == "110");
  CHECK(v.concat(w).to_string() == "1011001110");
}

TEST_CASE("mat_vec_mul") {
  SECTION("identity") {
    const Matrix id = Matrix::identity(3);
    const BitVector v = BitVector::from_string("101");
    CHECK(mat_vec_mul(id, v) == v);
  }
  SECTION("zero matrix") {
    const Matrix zero(3, 5);
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
      CHECK(mat_vec_mul(zero, random_bits(5, rng)) == BitVector(3));
    }
  }
  SECTION("Hamming parity check maps e_i to column i") {
    const CssPair pair = steane_pair();
    const Matrix& h = pair.c1.parity_check();
    for (std::size_t i = 0; i < 7; ++i) {
      BitVector e(7);
      e.set(i, true);
      BitVector column(3);
      for (std::size_t r = 0; r < 3; ++r) column.set(r, h.get(r, i));
      CHECK(mat_vec_mul(h, e) == column);
    }
  }
  SECTION("dimension mismatch") {
    CHECK_THROWS_AS(mat_vec_mul(Matrix::identity(3), BitVector(4)), std::invalid_argument);
  }
}

TEST_CASE("LinearCode membership matches exhaustive enumeration") {
  const CssPair pair = steane_pair();
  for (const LinearCode* code : {&pair.c1, &pair.c2}) {
    std::set<std::string> words;
    for (const BitVector& c : code->all_codewords()) words.insert(c.to_string());
    CHECK(words.size() == (std::size_t{1} << code->dimension()));
    for (std::size_t x = 0; x < 128; ++x) {
      BitVector w(7);
      for (std::size_t i = 0; i < 7; ++i) w.set(i, (x >> i) & 1u);
      CHECK(code->contains(w) == (words.count(w.to_string()) > 0));
    }
  }
}

TEST_CASE("syndrome decoding on the Hamming code") {
  const CssPair pair = steane_pair();
  const LinearCode& code = pair.c1;
  CHECK(code.correctable_errors() == 1);

  SECTION("codewords decode to themselves") {
    for (const BitVector& c : code.all_codewords()) {
      auto decoded = syndrome_decode(code, c);
      REQUIRE(decoded.has_value());
      CHECK(*decoded == c);
    }
  }
  SECTION("all weight-1 errors corrected, all codewords") {
    for (const BitVector& c : code.all_codewords()) {
      for (std::size_t i = 0; i < 7; ++i) {
        BitVector corrupted = c;
        corrupted.flip(i);
        auto decoded = syndrome_decode(code, corrupted);
        REQUIRE(decoded.has_value());
        CHECK(*decoded == c);
        // cross-check against the brute-force oracle
        auto nearest = nearest_codewords(code, corrupted);
        REQUIRE(nearest.size() == 1);
        CHECK(nearest.front() == c);
      }
    }
  }
  SECTION("weight-2 errors are never silently accepted as correct") {
    for (const BitVector& c : code.all_codewords()) {
      for (const BitVector& e : weight_patterns(7, 2)) {
        auto decoded = syndrome_decode(code, c ^ e);
        if (decoded.has_value()) {
          CHECK(*decoded != c);  // Hamming is perfect: decodes, but wrongly
          CHECK(code.contains(*decoded));
          CHECK(hamming_distance(*decoded, c ^ e) <= 1);
        }
      }
    }
  }
  SECTION("simplex code flags some weight-2 syndromes as undecodable") {
    std::size_t undecodable = 0;
    for (const BitVector& e : weight_patterns(7, 2)) {
      if (!syndrome_decode(pair.c2, e).has_value()) ++undecodable;
    }
    CHECK(undecodable > 0);
  }
}

TEST_CASE("verify_nested") {
  const CssPair steane = steane_pair();
  CHECK(verify_nested(steane));
  CHECK_NOTHROW(validate_css(steane));
  CHECK(steane.key_length() == 1);

  SECTION("C1 == C2 nests but fails the key-length invariant") {
    CssPair improper{steane.c1, steane.c1};
    CHECK(verify_nested(improper));
    CHECK_THROWS_AS(validate_css(improper), std::invalid_argument);
  }
  SECTION("full space is not inside the Hamming code") {
    CssPair bad{steane.c1, full_space(7)};
    CHECK_FALSE(verify_nested(bad));
  }
}

TEST_CASE("coset labels") {
  const CssPair pair = steane_pair();

  SECTION("zero codeword and all of C2 share the zero label") {
    CHECK(coset_label(pair, BitVector(7)) == BitVector(1));
    for (const BitVector& c : pair.c2.all_codewords()) {
      CHECK(coset_label(pair, c) == BitVector(1));
    }
  }
  SECTION("the 16 codewords split into 2 cosets of 8") {
    std::map<std::string, std::size_t> counts;
    for (const BitVector& u : pair.c1.all_codewords()) {
      counts[coset_label(pair, u).to_string()]++;
    }
    REQUIRE(counts.size() == 2);
    for (const auto& [label, count] : counts) CHECK(count == 8);
  }
  SECTION("constant on cosets, distinct across cosets") {
    for (const BitVector& u : pair.c1.all_codewords()) {
      const BitVector label = coset_label(pair, u);
      for (const BitVector& c : pair.c2.all_codewords()) {
        CHECK(coset_label(pair, u ^ c) == label);
      }
      BitVector other_rep = u;
      // any codeword not in u's coset must get the other label
      for (const BitVector& w : pair.c1.all_codewords()) {
        if (!pair.c2.contains(u ^ w)) CHECK(coset_label(pair, w) != label);
      }
    }
  }
  SECTION("u outside C1 is rejected") {
    BitVector e(7);
    e.set(0, true);
    CHECK_THROWS_AS(coset_label(pair, e), std::invalid_argument);
  }
}

TEST_CASE("one-way reconciliation") {
  const CssPair pair = steane_pair();
  Rng rng(11);

  SECTION("no error: keys equal") {
    for (int trial = 0; trial < 20; ++trial) {
      const BitVector v = random_bits(7, rng);
      auto res = one_way_reconcile(pair, v, v, rng);
      REQUIRE(res.bob_key.has_value());
      CHECK(*res.bob_key == res.alice_key);
    }
  }
  SECTION("every weight-1 error, every codeword u") {
    const BitVector v = random_bits(7, rng);
    for (const BitVector& u : pair.c1.all_codewords()) {
      for (std::size_t i = 0; i < 7; ++i) {
        BitVector corrupted = v;
        corrupted.flip(i);
        auto res = one_way_reconcile_with(pair, u, v, corrupted);
        CHECK(res.announcement == (u ^ v));
        REQUIRE(res.bob_key.has_value());
        CHECK(*res.bob_key == res.alice_key);
      }
    }
  }
  SECTION("weight-3 errors can break the keys, and the oracle sees it") {
    std::size_t mismatches = 0;
    const BitVector v(7);
    for (const BitVector& u : pair.c1.all_codewords()) {
      for (const BitVector& e : weight_patterns(7, 3)) {
        auto res = one_way_reconcile_with(pair, u, v, v ^ e);
        if (!res.bob_key.has_value() || *res.bob_key != res.alice_key) ++mismatches;
      }
    }
    CHECK(mismatches > 0);
  }
  SECTION("final key invariant under re-randomizing u within a coset") {
    const BitVector v = random_bits(7, rng);
    for (const BitVector& u : pair.c1.all_codewords()) {
      const auto base = one_way_reconcile_with(pair, u, v, v);
      for (const BitVector& c : pair.c2.all_codewords()) {
        const auto shifted = one_way_reconcile_with(pair, u ^ c, v, v);
        CHECK(shifted.alice_key == base.alice_key);
        REQUIRE(shifted.bob_key.has_value());
        CHECK(*shifted.bob_key == *base.bob_key);
      }
    }
  }
}

TEST_CASE("exhaustive reconcile correctness for all weights up to t") {
  const CssPair pair = steane_pair();
  Rng rng(13);
  const BitVector v = random_bits(7, rng);
  for (std::size_t w = 0; w <= pair.c1.correctable_errors(); ++w) {
    for (const BitVector& e : weight_patterns(7, w)) {
      for (const BitVector& u : pair.c1.all_codewords()) {
        auto res = one_way_reconcile_with(pair, u, v, v ^ e);
        REQUIRE(res.bob_key.has_value());
        CHECK(*res.bob_key == res.alice_key);
      }
    }
  }
}

TEST_CASE("code file round trip") {
  const CssPair pair = steane_pair();
  std::stringstream buf;
  save_code(buf, pair.c1);
  const LinearCode loaded = load_code(buf);
  CHECK(loaded.generator() == pair.c1.generator());
  CHECK(loaded.parity_check() == pair.c1.parity_check());
  CHECK(loaded.correctable_errors() == 1);

  SECTION("parity check derived when absent") {
    std::stringstream gen_only;
    gen_only << "7 4\n";
    for (std::size_t i = 0; i < 4; ++i) {
      gen_only << pair.c1.generator().row(i).to_string() << '\n';
    }
    const LinearCode derived = load_code(gen_only);
    CHECK(derived.block_length() == 7);
    CHECK(derived.dimension() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK_FALSE(mat_vec_mul(derived.parity_check(), derived.generator().row(i)).any());
    }
    // same code: identical codeword sets
    std::set<std::string> a, b;
    for (const BitVector& c : derived.all_codewords()) a.insert(c.to_string());
    for (const BitVector& c : pair.c1.all_codewords()) b.insert(c.to_string());
    CHECK(a == b);
  }
  SECTION("malformed input rejected") {
    std::stringstream bad("7 4\n1110000\n");
    CHECK_THROWS_AS(load_code(bad), std::invalid_argument);
  }
}
