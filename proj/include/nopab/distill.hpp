#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nopab/bitvec.hpp"
#include "nopab/rng.hpp"
#include "nopab/schedule.hpp"

namespace nopab {

/// Alice's and Bob's key material between post-processing steps.
struct PairedBits {
  BitVector alice;
  BitVector bob;

  std::size_t size() const { return alice.size(); }

  void validate() const {
    if (alice.size() != bob.size()) {
      throw std::invalid_argument("PairedBits: length mismatch");
    }
  }
};

namespace detail {

inline void check_permutation(const std::vector<std::uint32_t>& perm, std::size_t len) {
  if (perm.size() != len) {
    throw std::invalid_argument("announced permutation has wrong length");
  }
  std::vector<bool> seen(len, false);
  for (std::uint32_t i : perm) {
    if (i >= len || seen[i]) {
      throw std::invalid_argument("announced permutation is not a permutation");
    }
    seen[i] = true;
  }
}

}  // namespace detail

struct BStepOutcome {
  PairedBits kept;
  BitVector alice_parities;  ///< announced, one bit per pair
  BitVector bob_parities;
  std::size_t pass_count = 0;
};

/// B step over an announced pairing: both parties announce each pair's XOR,
/// a pair survives iff the parities agree, and the first bit of a surviving
/// pair is kept. An odd leftover bit is discarded.
inline BStepOutcome b_step(const PairedBits& bits, const std::vector<std::uint32_t>& pairing) {
  bits.validate();
  if (bits.size() < 2) throw std::invalid_argument("b_step: fewer than 2 bits");
  detail::check_permutation(pairing, bits.size());
  const std::size_t pairs = bits.size() / 2;
  BStepOutcome out;
  out.alice_parities = BitVector(pairs);
  out.bob_parities = BitVector(pairs);
  std::vector<std::uint32_t> kept_positions;
  for (std::size_t i = 0; i < pairs; ++i) {
    const std::uint32_t first = pairing[2 * i];
    const std::uint32_t second = pairing[2 * i + 1];
    const bool pa = bits.alice.get(first) ^ bits.alice.get(second);
    const bool pb = bits.bob.get(first) ^ bits.bob.get(second);
    out.alice_parities.set(i, pa);
    out.bob_parities.set(i, pb);
    if (pa == pb) kept_positions.push_back(first);
  }
  out.pass_count = kept_positions.size();
  out.kept = PairedBits{bits.alice.gather(kept_positions), bits.bob.gather(kept_positions)};
  return out;
}

/// P step over an announced grouping into triples: each party replaces each
/// triple by its parity. Up to two leftover bits are discarded.
inline PairedBits p_step(const PairedBits& bits, const std::vector<std::uint32_t>& grouping) {
  bits.validate();
  if (bits.size() < 3) throw std::invalid_argument("p_step: fewer than 3 bits");
  detail::check_permutation(grouping, bits.size());
  const std::size_t triples = bits.size() / 3;
  PairedBits out{BitVector(triples), BitVector(triples)};
  for (std::size_t i = 0; i < triples; ++i) {
    bool a = false, b = false;
    for (std::size_t j = 0; j < 3; ++j) {
      const std::uint32_t pos = grouping[3 * i + j];
      a ^= bits.alice.get(pos);
      b ^= bits.bob.get(pos);
    }
    out.alice.set(i, a);
    out.bob.set(i, b);
  }
  return out;
}

struct RefinedEstimate {
  double estimate = 0.0;
  PairedBits remaining;
  std::vector<std::uint32_t> positions;  ///< announced sacrifice positions
  BitVector alice_values;                ///< announced by Alice
  BitVector bob_values;                  ///< announced by Bob
};

/// Refined data analysis: m uniformly chosen bits are compared publicly and
/// removed from the key material.
template <class Urbg>
inline RefinedEstimate refined_estimate(const PairedBits& bits, std::size_t m, Urbg& rng) {
  bits.validate();
  if (m == 0 || m > bits.size()) {
    throw std::invalid_argument("refined_estimate: need 1 <= m <= remaining bits");
  }
  RefinedEstimate out;
  out.positions = sample_positions(bits.size(), m, rng);
  out.alice_values = bits.alice.gather(out.positions);
  out.bob_values = bits.bob.gather(out.positions);
  out.estimate = static_cast<double>(hamming_distance(out.alice_values, out.bob_values)) /
                 static_cast<double>(m);
  out.remaining = PairedBits{bits.alice.drop(out.positions), bits.bob.drop(out.positions)};
  return out;
}

/// One row per executed action; serializes to the round CSV.
struct RoundRecord {
  enum class Kind { B, P, Estimate };
  std::size_t round = 0;  ///< completed B/P rounds so far
  Kind kind = Kind::B;
  std::size_t in_len = 0;
  std::size_t out_len = 0;
  std::optional<std::size_t> pass_count;  ///< B rows only
  std::optional<double> estimate;         ///< estimate rows only
};

inline const char* round_kind_name(RoundRecord::Kind k) {
  switch (k) {
    case RoundRecord::Kind::B: return "B";
    case RoundRecord::Kind::P: return "P";
    case RoundRecord::Kind::Estimate: return "estimate";
  }
  return "?";
}

inline void write_round_csv(std::ostream& out, const std::vector<RoundRecord>& rounds,
                            const std::string& config_comment = {}) {
  if (!config_comment.empty()) out << "# " << config_comment << '\n';
  out << "round,step_kind,in_len,out_len,pass_count,estimate\n";
  for (const RoundRecord& r : rounds) {
    out << r.round << ',' << round_kind_name(r.kind) << ',' << r.in_len << ',' << r.out_len
        << ',';
    if (r.pass_count) out << *r.pass_count;
    out << ',';
    if (r.estimate) out << *r.estimate;
    out << '\n';
  }
}

/// Announcement hooks so a session can mirror every public datum of the
/// schedule run into its transcript. All hooks are optional.
struct ScheduleEvents {
  std::function<void(const std::vector<std::uint32_t>&)> pairing;
  std::function<void(const BitVector&, const BitVector&)> pair_parities;
  std::function<void(const std::vector<std::uint32_t>&)> grouping;
  std::function<void(const std::vector<std::uint32_t>&, const BitVector&, const BitVector&)>
      sacrifice;
  std::function<void(std::size_t mismatches, std::size_t sample)> estimate;
};

struct ScheduleRunResult {
  bool success = false;
  std::string failure_reason;
  PairedBits final;
  double last_estimate = 0.0;
  std::size_t rounds_executed = 0;  ///< completed B/P rounds (cycles)
  std::vector<RoundRecord> rounds;
};

namespace detail {

inline std::size_t auto_sacrifice(const Schedule& schedule, std::size_t len) {
  if (schedule.sacrifice_m != 0) return std::min(schedule.sacrifice_m, len);
  return std::min<std::size_t>(1024, std::max<std::size_t>(1, len / 4));
}

}  // namespace detail

/// Executes the schedule on the shared key material.
///
/// Termination: success once the current estimate is below handoff_threshold
/// and at least min_rounds rounds have run; failure when the material is
/// exhausted first. Alternating and Adaptive policies consume the initial
/// estimate (the session's check-bit QBER) before distilling, so an input
/// that is already good enough passes through untouched; without one they
/// open with a refined estimate. A FixedSequence is an agreement to run
/// those steps, so its cycle executes at least once.
template <class Urbg>
inline ScheduleRunResult run_schedule(const PairedBits& input, const Schedule& schedule,
                                      Urbg& rng,
                                      std::optional<double> initial_estimate = std::nullopt,
                                      const ScheduleEvents* events = nullptr) {
  input.validate();
  schedule.validate();
  ScheduleRunResult res;
  res.final = input;

  auto fail = [&](const std::string& why) {
    res.success = false;
    res.failure_reason = why;
    return res;
  };

  std::optional<double> est = initial_estimate;
  std::size_t last_pairs = 0, last_passes = 0;

  auto do_estimate = [&](std::size_t round_label) -> bool {  // false: exhausted
    const std::size_t len = res.final.size();
    if (len == 0) return false;
    const std::size_t m = detail::auto_sacrifice(schedule, len);
    RefinedEstimate re = refined_estimate(res.final, m, rng);
    if (events && events->sacrifice) {
      events->sacrifice(re.positions, re.alice_values, re.bob_values);
    }
    if (events && events->estimate) {
      events->estimate(hamming_distance(re.alice_values, re.bob_values), m);
    }
    res.rounds.push_back({round_label, RoundRecord::Kind::Estimate, len, re.remaining.size(),
                          std::nullopt, re.estimate});
    res.final = std::move(re.remaining);
    est = re.estimate;
    return true;
  };

  auto run_step = [&](StepKind kind, std::size_t round_label) -> bool {  // false: exhausted
    const std::size_t len = res.final.size();
    if (kind == StepKind::B) {
      if (len < 2) return false;
      const auto pairing = random_permutation(len, rng);
      if (events && events->pairing) events->pairing(pairing);
      BStepOutcome out = b_step(res.final, pairing);
      if (events && events->pair_parities) {
        events->pair_parities(out.alice_parities, out.bob_parities);
      }
      res.rounds.push_back(
          {round_label, RoundRecord::Kind::B, len, out.kept.size(), out.pass_count, std::nullopt});
      last_pairs = len / 2;
      last_passes = out.pass_count;
      res.final = std::move(out.kept);
    } else {
      if (len < 3) return false;
      const auto grouping = random_permutation(len, rng);
      if (events && events->grouping) events->grouping(grouping);
      PairedBits out = p_step(res.final, grouping);
      res.rounds.push_back(
          {round_label, RoundRecord::Kind::P, len, out.size(), std::nullopt, std::nullopt});
      res.final = std::move(out);
    }
    return true;
  };

  const bool fixed = schedule.policy == Schedule::Policy::FixedSequence;
  if (est.has_value()) {
    // Record the externally supplied estimate so the round log is complete.
    res.rounds.push_back({0, RoundRecord::Kind::Estimate, res.final.size(), res.final.size(),
                          std::nullopt, *est});
  } else if (!fixed) {
    if (!do_estimate(0)) return fail("no material for initial estimate");
  }

  while (true) {
    if (!fixed && est.has_value() && *est < schedule.handoff_threshold &&
        res.rounds_executed >= schedule.min_rounds) {
      break;
    }
    if (fixed && est.has_value() && res.rounds_executed > 0 &&
        *est < schedule.handoff_threshold && res.rounds_executed >= schedule.min_rounds) {
      break;
    }
    std::vector<StepKind> steps;
    switch (schedule.policy) {
      case Schedule::Policy::Alternating:
        steps = {StepKind::B, StepKind::P};
        break;
      case Schedule::Policy::FixedSequence:
        steps = schedule.sequence;
        break;
      case Schedule::Policy::Adaptive:
        steps = schedule.adaptive(
            {res.rounds_executed, res.final.size(), last_pairs, last_passes, est});
        if (steps.empty()) {
          if (est.has_value() && *est < schedule.handoff_threshold &&
              res.rounds_executed >= schedule.min_rounds) {
            res.success = true;
            res.last_estimate = *est;
            return res;
          }
          return fail("adaptive policy stopped before handoff");
        }
        break;
    }
    const std::size_t round = res.rounds_executed + 1;
    for (StepKind kind : steps) {
      if (!run_step(kind, round)) return fail("distillation exhausted bits");
    }
    if (!do_estimate(round)) return fail("distillation exhausted bits");
    ++res.rounds_executed;
  }

  res.success = true;
  res.last_estimate = est.value_or(0.0);
  return res;
}

}  // namespace nopab
