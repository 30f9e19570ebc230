#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>

#include "nopab/channel.hpp"

using namespace nopab;

TEST_CASE("expand_basis") {
  SECTION("seed repeated r times") {
    const auto seq = expand_basis(BitVector::from_string("01"), 3, 6);
    CHECK(seq.expanded.to_string() == "010101");
    CHECK(seq.basis_at(0) == Basis::Z);
    CHECK(seq.basis_at(1) == Basis::X);
  }
  SECTION("r = 1 leaves the seed unchanged") {
    Rng rng(5);
    const BitVector seed = random_bits(128, rng);
    CHECK(expand_basis(seed, 1, 128).expanded == seed);
  }
  SECTION("single-bit seed") {
    CHECK(expand_basis(BitVector::from_string("1"), 4, 4).expanded.to_string() == "1111");
  }
  SECTION("divisibility enforced") {
    CHECK_THROWS_AS(expand_basis(BitVector::from_string("01"), 3, 7), std::invalid_argument);
    CHECK_THROWS_AS(expand_basis(BitVector::from_string("01"), 0, 0), std::invalid_argument);
  }
}

TEST_CASE("apply_pauli action table") {
  const QubitRecord z0{false, Basis::Z};
  const QubitRecord x0{false, Basis::X};
  const QubitRecord z1{true, Basis::Z};

  CHECK(apply_pauli(z0, Pauli::I).bit == false);
  // Z acts as a phase flip: Z-basis records untouched, X-basis records flip
  CHECK(apply_pauli(z0, Pauli::Z).bit == false);
  CHECK(apply_pauli(x0, Pauli::Z).bit == true);
  // Y flips both kinds of record
  CHECK(apply_pauli(z1, Pauli::Y).bit == false);
  CHECK(apply_pauli(x0, Pauli::Y).bit == true);
  // X flips Z-basis records only
  CHECK(apply_pauli(z0, Pauli::X).bit == true);
  CHECK(apply_pauli(x0, Pauli::X).bit == false);
}

TEST_CASE("apply_pauli is an involution on the bit record") {
  for (Pauli e : {Pauli::I, Pauli::X, Pauli::Y, Pauli::Z}) {
    for (Basis basis : {Basis::Z, Basis::X}) {
      for (bool bit : {false, true}) {
        const QubitRecord q{bit, basis};
        const QubitRecord twice = apply_pauli(apply_pauli(q, e), e);
        CHECK(twice.bit == bit);
        CHECK(twice.basis == basis);
      }
    }
  }
}

TEST_CASE("sample_pauli") {
  Rng rng(99);
  SECTION("degenerate channels") {
    for (int i = 0; i < 50; ++i) {
      CHECK(sample_pauli(PauliChannel{1, 0, 0, 0}, rng) == Pauli::I);
      CHECK(sample_pauli(PauliChannel{0, 1, 0, 0}, rng) == Pauli::X);
      CHECK(sample_pauli(PauliChannel{0, 0, 1, 0}, rng) == Pauli::Y);
      CHECK(sample_pauli(PauliChannel{0, 0, 0, 1}, rng) == Pauli::Z);
    }
  }
  SECTION("law of large numbers at p_x = p_y = p_z = 0.1") {
    const PauliChannel ch{0.7, 0.1, 0.1, 0.1};
    ch.validate();
    const std::size_t samples = 1'000'000;
    std::array<std::size_t, 4> counts{};
    for (std::size_t i = 0; i < samples; ++i) {
      counts[static_cast<std::size_t>(sample_pauli(ch, rng))]++;
    }
    const std::array<double, 4> expected{0.7, 0.1, 0.1, 0.1};
    for (std::size_t k = 0; k < 4; ++k) {
      const double mean = expected[k] * samples;
      const double sigma = std::sqrt(expected[k] * (1 - expected[k]) * samples);
      CHECK(std::abs(static_cast<double>(counts[k]) - mean) <= 3 * sigma);
    }
  }
}

TEST_CASE("effective_qber") {
  SECTION("identity channel") {
    CHECK(effective_qber(PauliChannel::identity(), Basis::Z) == 0.0);
    CHECK(effective_qber(PauliChannel::identity(), Basis::X) == 0.0);
  }
  SECTION("depolarizing at bit rate 2d/3") {
    const double delta = 0.12;
    const PauliChannel ch{1 - delta, delta / 3, delta / 3, delta / 3};
    CHECK(effective_qber(ch, Basis::Z) == Catch::Approx(2 * delta / 3));
    CHECK(effective_qber(ch, Basis::X) == Catch::Approx(2 * delta / 3));
  }
  SECTION("asymmetric channel") {
    const PauliChannel ch{0.81, 0.09, 0.01, 0.09};
    CHECK(effective_qber(ch, Basis::Z) == Catch::Approx(0.10));
    CHECK(effective_qber(ch, Basis::X) == Catch::Approx(0.10));
  }
  SECTION("basis sum identity") {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
      double a = uniform_double(rng), b = uniform_double(rng), c = uniform_double(rng),
             d = uniform_double(rng);
      const double s = a + b + c + d;
      const PauliChannel ch{a / s, b / s, c / s, d / s};
      CHECK(effective_qber(ch, Basis::Z) + effective_qber(ch, Basis::X) ==
            Catch::Approx(ch.p_x + ch.p_z + 2 * ch.p_y));
    }
  }
}

TEST_CASE("intercept-resend attack") {
  SECTION("analytic rate from exhaustive enumeration") {
    // Enumerate Alice basis x Alice bit x Eve basis; when bases differ both
    // Eve's and Bob's outcomes are uniform coin flips.
    double error = 0.0, total = 0.0;
    for (int alice_basis = 0; alice_basis < 2; ++alice_basis) {
      for (int alice_bit = 0; alice_bit < 2; ++alice_bit) {
        for (int eve_basis = 0; eve_basis < 2; ++eve_basis) {
          if (eve_basis == alice_basis) {
            total += 1.0;  // Bob sees exactly Alice's bit
          } else {
            for (int eve_out = 0; eve_out < 2; ++eve_out) {
              for (int bob_out = 0; bob_out < 2; ++bob_out) {
                total += 0.25;
                if (bob_out != alice_bit) error += 0.25;
              }
            }
          }
        }
      }
    }
    CHECK(error / total == Catch::Approx(0.25));
    CHECK(intercept_resend_qber() == Catch::Approx(error / total));
  }
  SECTION("empirical rate within 3 sigma") {
    Rng rng(42);
    const std::size_t n = 1'000'000;
    const double rate = simulate_intercept_resend(n, rng);
    const double sigma = std::sqrt(0.25 * 0.75 / static_cast<double>(n));
    CHECK(std::abs(rate - 0.25) <= 3 * sigma);  // 3 sigma ~ 0.0013
  }
  SECTION("cheat mode: Eve in the true basis leaves no trace") {
    Rng rng(43);
    CHECK(simulate_intercept_resend(100'000, rng, /*knows_basis=*/true) == 0.0);
  }
}

TEST_CASE("Monte Carlo QBER converges to effective_qber per basis") {
  Rng rng(77);
  const PauliChannel ch{0.86, 0.09, 0.01, 0.04};
  ch.validate();
  const Adversary noise = Adversary::pauli(ch);
  const std::size_t n = 400'000;
  std::size_t errors_z = 0, count_z = 0, errors_x = 0, count_x = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const QubitRecord q{random_bit(rng), random_bit(rng) ? Basis::X : Basis::Z};
    const bool received = transmit(q, noise, rng);
    if (q.basis == Basis::Z) {
      ++count_z;
      errors_z += received != q.bit;
    } else {
      ++count_x;
      errors_x += received != q.bit;
    }
  }
  const double qz = effective_qber(ch, Basis::Z);  // 0.10
  const double qx = effective_qber(ch, Basis::X);  // 0.05
  const double empirical_z = static_cast<double>(errors_z) / count_z;
  const double empirical_x = static_cast<double>(errors_x) / count_x;
  CHECK(std::abs(empirical_z - qz) <= 3 * std::sqrt(qz * (1 - qz) / count_z));
  CHECK(std::abs(empirical_x - qx) <= 3 * std::sqrt(qx * (1 - qx) / count_x));
}

TEST_CASE("no adversary, identity channel: Bob equals Alice") {
  Rng rng(1);
  const Adversary none = Adversary::none();
  for (std::size_t i = 0; i < 10'000; ++i) {
    const QubitRecord q{random_bit(rng), random_bit(rng) ? Basis::X : Basis::Z};
    CHECK(transmit(q, none, rng) == q.bit);
  }
}

TEST_CASE("channel validation") {
  CHECK_THROWS_AS(PauliChannel({0.5, 0.5, 0.5, -0.5}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(PauliChannel({0.5, 0.1, 0.1, 0.1}).validate(), std::invalid_argument);
  CHECK_NOTHROW(PauliChannel::depolarizing_bit_rate(0.05).validate());
  CHECK(PauliChannel::depolarizing_bit_rate(0.05).p_x == Catch::Approx(0.025));
  CHECK(effective_qber(PauliChannel::depolarizing_bit_rate(0.05), Basis::Z) ==
        Catch::Approx(0.05));
  CHECK_THROWS_AS(PauliChannel::depolarizing_bit_rate(0.9), std::invalid_argument);
}
