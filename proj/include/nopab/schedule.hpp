#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nopab {

enum class StepKind : std::uint8_t { B, P };

inline char step_char(StepKind s) { return s == StepKind::B ? 'B' : 'P'; }

inline std::string sequence_string(const std::vector<StepKind>& seq) {
  std::string s;
  s.reserve(seq.size());
  for (StepKind k : seq) s.push_back(step_char(k));
  return s;
}

inline std::vector<StepKind> parse_sequence(const std::string& s) {
  std::vector<StepKind> seq;
  seq.reserve(s.size());
  for (char c : s) {
    if (c == 'B' || c == 'b') {
      seq.push_back(StepKind::B);
    } else if (c == 'P' || c == 'p') {
      seq.push_back(StepKind::P);
    } else {
      throw std::invalid_argument("schedule sequence may contain only B and P");
    }
  }
  if (seq.empty()) throw std::invalid_argument("schedule sequence is empty");
  return seq;
}

/// Everything an adaptive policy is allowed to see. By construction this is
/// bit-error data only (pass counts and sacrificed-bit estimates); phase
/// information has no representation here, so policies are structurally
/// blind to it.
struct BitErrorObservations {
  std::size_t rounds_done = 0;
  std::size_t bits_remaining = 0;
  std::size_t last_round_pairs = 0;
  std::size_t last_round_passes = 0;
  std::optional<double> last_estimate;
};

/// Steps to run in the next round; an empty vector requests no further
/// distillation (hand off to one-way reconciliation as soon as permitted).
using AdaptivePolicy = std::function<std::vector<StepKind>(const BitErrorObservations&)>;

/// Distillation schedule: which steps run, how much material each estimate
/// sacrifices, and when control passes to one-way reconciliation.
struct Schedule {
  enum class Policy { Alternating, FixedSequence, Adaptive };

  Policy policy = Policy::Alternating;
  std::vector<StepKind> sequence;  // FixedSequence cycle
  AdaptivePolicy adaptive;

  /// Bits sacrificed per refined estimate; 0 selects min(1024, max(1, len/4)).
  std::size_t sacrifice_m = 0;
  /// Estimated bit-error rate below which one-way reconciliation takes over.
  double handoff_threshold = 0.10;
  /// Floor on executed rounds (sessions derive it from the observed check
  /// QBER so the residual error matches the reconciliation code).
  std::size_t min_rounds = 0;

  void validate() const {
    if (!(handoff_threshold > 0.0 && handoff_threshold < 0.11)) {
      throw std::invalid_argument("Schedule: handoff_threshold must lie in (0, 0.11)");
    }
    if (policy == Policy::FixedSequence && sequence.empty()) {
      throw std::invalid_argument("Schedule: fixed sequence is empty");
    }
    if (policy == Policy::Adaptive && !adaptive) {
      throw std::invalid_argument("Schedule: adaptive policy not set");
    }
  }

  static Schedule alternating() { return {}; }

  static Schedule fixed(std::vector<StepKind> seq) {
    Schedule s;
    s.policy = Policy::FixedSequence;
    s.sequence = std::move(seq);
    return s;
  }

  /// Built-in adaptive example: open B-heavy while the estimate is high.
  static Schedule adaptive_default() {
    Schedule s;
    s.policy = Policy::Adaptive;
    s.adaptive = [](const BitErrorObservations& obs) -> std::vector<StepKind> {
      const double est = obs.last_estimate.value_or(0.0);
      if (est >= 0.12) return {StepKind::B, StepKind::B, StepKind::P};
      return {StepKind::B, StepKind::P};
    };
    return s;
  }
};

/// Accepts "alternating", "adaptive", or "fixed:BPBP...".
inline Schedule parse_schedule(const std::string& text) {
  if (text == "alternating") return Schedule::alternating();
  if (text == "adaptive") return Schedule::adaptive_default();
  if (text.rfind("fixed:", 0) == 0) return Schedule::fixed(parse_sequence(text.substr(6)));
  throw std::invalid_argument("unknown schedule: " + text);
}

}  // namespace nopab
