#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nopab/bitvec.hpp"
#include "nopab/channel.hpp"
#include "nopab/distill.hpp"
#include "nopab/gf2.hpp"
#include "nopab/rng.hpp"
#include "nopab/schedule.hpp"
#include "nopab/transcript.hpp"

namespace nopab {

struct SessionParams {
  std::size_t n = 64;        ///< check/key block size; 2n qubits transmitted
  std::size_t r = 1;         ///< basis-seed repetitions; r must divide 2n
  Adversary adversary;       ///< channel noise and/or attack
  double abort_threshold = 0.20;
  Schedule schedule;
  gf2::CssPair css = gf2::steane_pair();
  std::uint64_t rng_seed = 0;
  /// Whole-run reconciliation failure budget used to derive the code-matched
  /// round floor from the observed check QBER.
  double block_failure_budget = 1e-3;

  void validate() const {
    if (n < 1) throw std::invalid_argument("SessionParams: n must be >= 1");
    if (r == 0 || (2 * n) % r != 0) {
      throw std::invalid_argument("SessionParams: r must divide 2n");
    }
    if (abort_threshold < 0.0 || abort_threshold > 0.5) {
      throw std::invalid_argument("SessionParams: abort_threshold must lie in [0, 0.5]");
    }
    schedule.validate();
    gf2::validate_css(css);
    if (adversary.kind == Adversary::Kind::Pauli) adversary.channel.validate();
  }
};

enum class SessionStatus { Completed, Aborted };

struct SessionOutcome {
  SessionStatus status = SessionStatus::Aborted;
  std::string abort_reason;
  BitVector alice_key;
  BitVector bob_key;
  Transcript transcript;
  std::size_t consumed_secret_bits = 0;  ///< pre-shared basis seed, 2n/r
  double observed_qber = 0.0;            ///< check-bit disagreement fraction
  std::size_t rounds_executed = 0;       ///< completed B/P distillation rounds
  std::size_t distill_input_bits = 0;    ///< key material entering step 7
  std::size_t distill_output_bits = 0;   ///< key material entering step 10
  std::size_t reconciled_blocks = 0;
  std::vector<RoundRecord> rounds;
};

/// Uniformly random n-subset of [0, total), announced as check positions.
template <class Urbg>
inline std::vector<std::uint32_t> select_check_bits(Urbg& rng, std::size_t total) {
  if (total == 0 || total % 2 != 0) {
    throw std::invalid_argument("select_check_bits: total must be even and positive");
  }
  return sample_positions(total, total / 2, rng);
}

/// Fraction of disagreeing positions.
inline double estimate_check_qber(const BitVector& alice_vals, const BitVector& bob_vals) {
  if (alice_vals.size() != bob_vals.size()) {
    throw std::invalid_argument("estimate_check_qber: length mismatch");
  }
  if (alice_vals.empty()) {
    throw std::invalid_argument("estimate_check_qber: empty check set");
  }
  return static_cast<double>(hamming_distance(alice_vals, bob_vals)) /
         static_cast<double>(alice_vals.size());
}

namespace detail {

/// P(block decodes wrongly) for a t-error-correcting length-n block at
/// i.i.d. residual bit error rate p.
inline double block_failure_prob(std::size_t n, std::size_t t, double p) {
  double ok = 0.0;
  double term = std::pow(1.0 - p, static_cast<double>(n));  // weight 0
  ok += term;
  double coeff = 1.0;
  for (std::size_t w = 1; w <= t; ++w) {
    coeff *= static_cast<double>(n - w + 1) / static_cast<double>(w);
    ok += coeff * std::pow(p, static_cast<double>(w)) *
          std::pow(1.0 - p, static_cast<double>(n - w));
  }
  return 1.0 - ok;
}

/// Rounds of B+P needed until the predicted residual bit error is low
/// enough that all reconciliation blocks decode within the failure budget.
/// Uses only the observed check QBER (a bit-error observation) and the
/// exact bit-marginal recurrences, assuming one B and one P per round;
/// phase data plays no part. The result floors the executed rounds; the
/// estimate-driven loop still governs beyond it.
inline std::size_t code_matched_rounds(double check_qber, std::size_t key_bits,
                                       const gf2::CssPair& css, const Schedule& schedule,
                                       double failure_budget) {
  const std::size_t nc = css.block_length();
  const std::size_t t = css.c1.correctable_errors();
  double p = check_qber;
  double len = static_cast<double>(key_bits);
  for (std::size_t rounds = 0; rounds <= 16; ++rounds) {
    const double blocks = std::floor(len / static_cast<double>(nc));
    if (blocks >= 1.0 && blocks * block_failure_prob(nc, t, p) <= failure_budget &&
        p < schedule.handoff_threshold) {
      return rounds;
    }
    if (len < 8.0) return rounds;  // material exhausted; let the run play out
    const double pass = p * p + (1.0 - p) * (1.0 - p);
    p = p * p / pass;                          // B step
    len = std::floor(len / 2.0) * pass;
    p = 3.0 * p * (1.0 - p) * (1.0 - p) + p * p * p;  // P step
    len = std::floor(len / 3.0);
    len -= static_cast<double>(auto_sacrifice(schedule, static_cast<std::size_t>(len)));
  }
  return 16;
}

}  // namespace detail

/// Executes the full two-party protocol over the simulated channel:
/// basis sharing (counted as consumed secret bits), encoding, transmission,
/// measurement and receipt, check-bit comparison with abort decision,
/// schedule-driven distillation, and block-wise one-way reconciliation with
/// coset key extraction.
inline SessionOutcome run_session(const SessionParams& params) {
  params.validate();
  Rng rng(params.rng_seed);
  SessionOutcome out;
  const std::size_t total = 2 * params.n;

  // Step 1: pre-shared secret basis seed, repeated r times. The seed itself
  // is an input cost, not an in-band message.
  out.consumed_secret_bits = total / params.r;
  const BasisSequence basis = expand_basis(random_bits(total / params.r, rng), params.r, total);

  // Step 2: Alice's fresh random bit string, encoded per the basis sequence.
  const BitVector alice_raw = random_bits(total, rng);

  // Steps 3-4: transmission and Bob's immediate measurement in the same
  // bases, then a public receipt acknowledgment.
  BitVector bob_raw(total);
  for (std::size_t i = 0; i < total; ++i) {
    bob_raw.set(i, transmit({alice_raw.get(i), basis.basis_at(i)}, params.adversary, rng));
  }
  out.transcript.push_back(msg_ack(Party::Bob));

  // Step 5: Alice picks n check positions and announces them.
  const std::vector<std::uint32_t> check = select_check_bits(rng, total);
  out.transcript.push_back(msg_indices(Party::Alice, MessageKind::CheckPositions, check));

  // Step 6: both reveal the check values; the revealed bits are dead.
  const BitVector alice_check = alice_raw.gather(check);
  const BitVector bob_check = bob_raw.gather(check);
  out.transcript.push_back(msg_bits(Party::Alice, MessageKind::CheckValues, alice_check));
  out.transcript.push_back(msg_bits(Party::Bob, MessageKind::CheckValues, bob_check));
  out.observed_qber = estimate_check_qber(alice_check, bob_check);
  out.transcript.push_back(
      msg_estimate(Party::Alice, hamming_distance(alice_check, bob_check), check.size()));
  if (out.observed_qber > params.abort_threshold) {
    out.abort_reason = "check QBER above abort threshold";
    out.transcript.push_back(msg_abort(Party::Alice, out.abort_reason));
    return out;
  }

  // Remaining positions carry the key material.
  std::vector<std::uint32_t> keep;
  keep.reserve(params.n);
  {
    std::size_t next = 0;
    for (std::uint32_t i = 0; i < total; ++i) {
      if (next < check.size() && check[next] == i) {
        ++next;
      } else {
        keep.push_back(i);
      }
    }
  }
  PairedBits material{alice_raw.gather(keep), bob_raw.gather(keep)};
  out.distill_input_bits = material.size();

  // Steps 7-9: schedule-driven distillation. Alice draws the announced
  // permutations from the session RNG; every public datum lands in the
  // transcript. The session floors the round count so the residual error
  // matches what the reconciliation code can correct.
  Schedule schedule = params.schedule;
  schedule.min_rounds =
      std::max(schedule.min_rounds,
               detail::code_matched_rounds(out.observed_qber, material.size(), params.css,
                                           schedule, params.block_failure_budget));
  ScheduleEvents events;
  events.pairing = [&](const std::vector<std::uint32_t>& perm) {
    out.transcript.push_back(msg_indices(Party::Alice, MessageKind::PairingPermutation, perm));
  };
  events.pair_parities = [&](const BitVector& a, const BitVector& b) {
    out.transcript.push_back(msg_bits(Party::Alice, MessageKind::PairParities, a));
    out.transcript.push_back(msg_bits(Party::Bob, MessageKind::PairParities, b));
  };
  events.grouping = [&](const std::vector<std::uint32_t>& perm) {
    out.transcript.push_back(msg_indices(Party::Alice, MessageKind::TripleGrouping, perm));
  };
  events.sacrifice = [&](const std::vector<std::uint32_t>& pos, const BitVector& a,
                         const BitVector& b) {
    out.transcript.push_back(msg_indices(Party::Alice, MessageKind::SacrificePositions, pos));
    out.transcript.push_back(msg_bits(Party::Alice, MessageKind::SacrificeValues, a));
    out.transcript.push_back(msg_bits(Party::Bob, MessageKind::SacrificeValues, b));
  };
  events.estimate = [&](std::size_t mismatches, std::size_t sample) {
    out.transcript.push_back(msg_estimate(Party::Alice, mismatches, sample));
  };
  ScheduleRunResult run = run_schedule(material, schedule, rng, out.observed_qber, &events);
  out.rounds = run.rounds;
  out.rounds_executed = run.rounds_executed;
  out.distill_output_bits = run.final.size();
  if (!run.success) {
    out.abort_reason = run.failure_reason;
    out.transcript.push_back(msg_abort(Party::Alice, out.abort_reason));
    return out;
  }

  // Step 10: random permutation of the surviving pairs, then block-wise
  // one-way reconciliation; the final key is the concatenated coset labels.
  const std::size_t nc = params.css.block_length();
  const std::size_t blocks = run.final.size() / nc;
  if (blocks == 0) {
    out.abort_reason = "insufficient bits for reconciliation";
    out.transcript.push_back(msg_abort(Party::Alice, out.abort_reason));
    return out;
  }
  // The permutation is drawn from the session RNG the parties share; it
  // carries no key material, so it is not a transcript message.
  const auto final_perm = random_permutation(run.final.size(), rng);
  const PairedBits shuffled{run.final.alice.gather(final_perm), run.final.bob.gather(final_perm)};

  BitVector announcement;
  BitVector alice_key, bob_key;
  for (std::size_t b = 0; b < blocks; ++b) {
    std::vector<std::uint32_t> span(nc);
    for (std::size_t i = 0; i < nc; ++i) span[i] = static_cast<std::uint32_t>(b * nc + i);
    gf2::ReconcileResult rec = gf2::one_way_reconcile(
        params.css, shuffled.alice.gather(span), shuffled.bob.gather(span), rng);
    if (!rec.bob_key.has_value()) {
      out.abort_reason = "reconciliation failure: undecodable syndrome";
      out.transcript.push_back(msg_abort(Party::Bob, out.abort_reason));
      return out;
    }
    announcement = announcement.concat(rec.announcement);
    alice_key = alice_key.concat(rec.alice_key);
    bob_key = bob_key.concat(*rec.bob_key);
  }
  out.transcript.push_back(msg_bits(Party::Alice, MessageKind::CodeAnnouncement, announcement));
  out.reconciled_blocks = blocks;
  out.alice_key = std::move(alice_key);
  out.bob_key = std::move(bob_key);
  out.status = SessionStatus::Completed;
  return out;
}

/// Everything Eve learns from the public channel.
struct EveView {
  std::size_t messages = 0;
  std::map<MessageKind, std::size_t> kind_counts;
  std::size_t revealed_data_bits = 0;  ///< value announcements only
  std::size_t payload_bytes = 0;
  bool aborted = false;
};

inline EveView transcript_eve_view(const SessionOutcome& outcome) {
  EveView view;
  for (const Message& m : outcome.transcript) {
    ++view.messages;
    ++view.kind_counts[m.kind];
    view.revealed_data_bits += revealed_data_bits(m);
    view.payload_bytes += m.payload.size();
    if (m.kind == MessageKind::Abort) view.aborted = true;
  }
  return view;
}

}  // namespace nopab
