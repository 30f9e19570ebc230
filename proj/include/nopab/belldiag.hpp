#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nopab/schedule.hpp"

namespace nopab {

/// Probability distribution over the Pauli error acting on one pair.
/// Bit errors are X or Y, phase errors are Z or Y.
struct BellDiagonal {
  double q_i = 1.0;
  double q_x = 0.0;
  double q_y = 0.0;
  double q_z = 0.0;

  double bit_error() const { return q_x + q_y; }
  double phase_error() const { return q_z + q_y; }

  void validate() const {
    if (q_i < 0 || q_x < 0 || q_y < 0 || q_z < 0) {
      throw std::invalid_argument("BellDiagonal: negative probability");
    }
    if (std::abs(q_i + q_x + q_y + q_z - 1.0) > 1e-12) {
      throw std::invalid_argument("BellDiagonal: probabilities must sum to 1");
    }
  }

  BellDiagonal normalized() const {
    const double s = q_i + q_x + q_y + q_z;
    return {q_i / s, q_x / s, q_y / s, q_z / s};
  }
};

struct BStepResult {
  BellDiagonal state;
  double pass_prob = 0.0;
};

/// One B step on two pairs drawn i.i.d. from q: the pair survives when both
/// bit errors agree, keeps the shared bit error and XORs the two phases.
inline BStepResult b_step_map(const BellDiagonal& q) {
  const double pass = (q.q_i + q.q_z) * (q.q_i + q.q_z) + (q.q_x + q.q_y) * (q.q_x + q.q_y);
  if (pass <= 0.0) {
    throw std::domain_error("b_step_map: pass probability is zero");
  }
  BellDiagonal out{(q.q_i * q.q_i + q.q_z * q.q_z) / pass,
                   (q.q_x * q.q_x + q.q_y * q.q_y) / pass,
                   (2.0 * q.q_x * q.q_y) / pass,
                   (2.0 * q.q_i * q.q_z) / pass};
  return {out, pass};
}

/// One P step on three pairs drawn i.i.d. from q: the effective bit error is
/// the XOR of the three bit errors, the effective phase error the majority
/// of the three phase errors. Closed form over the 8 phase patterns, with
/// the XOR handled by the product formula for independent Bernoullis.
inline BellDiagonal p_step_map(const BellDiagonal& q) {
  const double pf0 = q.q_i + q.q_x;  // P(no phase error)
  const double pf1 = q.q_z + q.q_y;
  const double r0 = pf0 > 0 ? q.q_x / pf0 : 0.0;  // P(bit err | no phase err)
  const double r1 = pf1 > 0 ? q.q_y / pf1 : 0.0;
  double out[2][2] = {{0, 0}, {0, 0}};  // [bit][phase]
  for (int pattern = 0; pattern < 8; ++pattern) {
    double prob = 1.0;
    double prod = 1.0;  // prod of (1 - 2 r) over the three units
    int phase_count = 0;
    for (int i = 0; i < 3; ++i) {
      const bool f = (pattern >> i) & 1;
      prob *= f ? pf1 : pf0;
      prod *= 1.0 - 2.0 * (f ? r1 : r0);
      phase_count += f ? 1 : 0;
    }
    if (prob == 0.0) continue;
    const int f_out = phase_count >= 2 ? 1 : 0;
    const double p_odd = 0.5 * (1.0 - prod);
    out[1][f_out] += prob * p_odd;
    out[0][f_out] += prob * (1.0 - p_odd);
  }
  return {out[0][0], out[1][0], out[1][1], out[0][1]};
}

inline double binary_entropy(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

/// Positive-key-rate condition for finishing with one-way CSS
/// reconciliation: H2(bit) + H2(phase) < 1. The often-quoted 11% is the
/// symmetric point of this frontier.
inline double capacity_entropy(const BellDiagonal& q) {
  return binary_entropy(q.bit_error()) + binary_entropy(q.phase_error());
}

enum class Verdict { Converges, Diverges, Undecided };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Converges: return "converges";
    case Verdict::Diverges: return "diverges";
    case Verdict::Undecided: return "undecided";
  }
  return "?";
}

struct TrajectoryPoint {
  StepKind step;
  BellDiagonal state;
  double pass_prob = 1.0;  // 1 for P steps (no discard)
};

struct IterationResult {
  Verdict verdict = Verdict::Undecided;
  std::size_t steps = 0;
  double final_bit = 0.0;
  double final_phase = 0.0;
  std::vector<TrajectoryPoint> trajectory;
};

struct IterateOptions {
  std::size_t max_steps = 600;
  /// Convergence: H2(bit)+H2(phase) <= 1 - margin at any point (the one-way
  /// protocol then finishes the job). The default sits just above rounding
  /// noise: every capacity dip resolvable in double precision counts, while
  /// the degenerate bit->0/phase->1/2 races that would need more than double
  /// range to decide are treated as divergent.
  double capacity_margin = 1e-12;
  /// Divergence: no improvement of the best entropy sum over this many steps.
  std::size_t stall_window = 50;
  bool record_trajectory = false;
};

/// Applies the cyclic step sequence to q0 until the state reaches the
/// one-way capacity region (Converges), makes no progress towards it
/// (Diverges), or max_steps runs out (Undecided). The state is checked
/// before the first step: an input already inside the region needs no
/// distillation at all.
inline IterationResult iterate_schedule(const BellDiagonal& q0,
                                        const std::vector<StepKind>& cycle,
                                        const IterateOptions& opts = {}) {
  if (cycle.empty()) throw std::invalid_argument("iterate_schedule: empty cycle");
  IterationResult res;
  BellDiagonal q = q0.normalized();
  res.final_bit = q.bit_error();
  res.final_phase = q.phase_error();
  double entropy = capacity_entropy(q);
  if (entropy <= 1.0 - opts.capacity_margin) {
    res.verdict = Verdict::Converges;
    return res;
  }
  double best = entropy;
  const std::size_t window = std::max(opts.stall_window, 4 * cycle.size());
  std::size_t since_improvement = 0;
  for (std::size_t step = 0; step < opts.max_steps; ++step) {
    const StepKind kind = cycle[step % cycle.size()];
    double pass = 1.0;
    if (kind == StepKind::B) {
      BStepResult r = b_step_map(q);
      q = r.state.normalized();
      pass = r.pass_prob;
    } else {
      q = p_step_map(q).normalized();
    }
    res.steps = step + 1;
    res.final_bit = q.bit_error();
    res.final_phase = q.phase_error();
    if (opts.record_trajectory) res.trajectory.push_back({kind, q, pass});
    entropy = capacity_entropy(q);
    if (entropy <= 1.0 - opts.capacity_margin) {
      res.verdict = Verdict::Converges;
      return res;
    }
    if (entropy < best - 1e-12) {
      best = entropy;
      since_improvement = 0;
    } else if (++since_improvement >= window) {
      res.verdict = Verdict::Diverges;
      return res;
    }
  }
  res.verdict = Verdict::Undecided;
  return res;
}

/// Families of initial error distributions swept by the threshold search.
struct InitialCondition {
  enum class Family { IndependentBitPhase, Depolarizing, WorstCaseGivenMarginals };
  Family family = Family::WorstCaseGivenMarginals;

  static InitialCondition parse(const std::string& name) {
    if (name == "independent") return {Family::IndependentBitPhase};
    if (name == "depolarizing") return {Family::Depolarizing};
    if (name == "worst-case") return {Family::WorstCaseGivenMarginals};
    throw std::invalid_argument("unknown initial-condition family: " + name);
  }

  const char* name() const {
    switch (family) {
      case Family::IndependentBitPhase: return "independent";
      case Family::Depolarizing: return "depolarizing";
      case Family::WorstCaseGivenMarginals: return "worst-case";
    }
    return "?";
  }
};

/// Independent bit and phase errors, each at rate p.
inline BellDiagonal independent_bit_phase(double p) {
  return {(1 - p) * (1 - p), p * (1 - p), p * p, p * (1 - p)};
}

/// Depolarizing noise with bit-flip rate p (q_x = q_y = q_z = p/2).
inline BellDiagonal depolarizing_state(double p) {
  return {1.0 - 1.5 * p, p / 2, p / 2, p / 2};
}

/// Member of the worst-case family: marginals fixed at (p_bit, p_phase),
/// correlation q_y free in [0, min(p_bit, p_phase)].
inline BellDiagonal worst_case_state(double p_bit, double p_phase, double q_y) {
  BellDiagonal q{1.0 - p_bit - p_phase + q_y, p_bit - q_y, q_y, p_phase - q_y};
  if (q.q_i < -1e-12 || q.q_x < -1e-12 || q.q_y < 0.0 || q.q_z < -1e-12) {
    throw std::invalid_argument("worst_case_state: invalid marginals/correlation");
  }
  return q;
}

namespace detail {

inline std::vector<double> qy_grid(double limit, double step) {
  std::vector<double> grid;
  for (double qy = 0.0; qy <= limit + 1e-15; qy += step) grid.push_back(std::min(qy, limit));
  if (grid.empty() || grid.back() < limit - 1e-15) grid.push_back(limit);
  return grid;
}

}  // namespace detail

struct ThresholdOptions {
  double tol = 1e-4;
  double qy_grid = 1e-3;
  double scan_lo = 0.01;
  double scan_hi = 0.30;
  double scan_step = 0.005;
  IterateOptions iterate;
};

struct ScanPoint {
  double p = 0.0;
  bool converges = false;
  double worst_qy = 0.0;       ///< failing q_y, or the slowest converging one
  std::size_t steps = 0;       ///< steps used at worst_qy
  double final_bit = 0.0;
  double final_phase = 0.0;
};

struct ThresholdResult {
  /// sup{p : the schedule converges}; absent when the scan is non-monotone
  /// (the scan is the report in that case).
  std::optional<double> threshold;
  bool monotone = true;
  std::vector<ScanPoint> scan;
};

namespace detail {

/// Convergence of the schedule at error rate p for the given family; for the
/// worst-case family every q_y on the grid must converge.
inline ScanPoint evaluate_family(const std::vector<StepKind>& cycle,
                                 const InitialCondition& family, double p,
                                 const ThresholdOptions& opts) {
  ScanPoint point;
  point.p = p;
  if (family.family == InitialCondition::Family::WorstCaseGivenMarginals) {
    point.converges = true;
    std::size_t max_steps_seen = 0;
    for (double qy : qy_grid(p, opts.qy_grid)) {
      IterationResult r = iterate_schedule(worst_case_state(p, p, qy), cycle, opts.iterate);
      if (r.verdict != Verdict::Converges) {
        point.converges = false;
        point.worst_qy = qy;
        point.steps = r.steps;
        point.final_bit = r.final_bit;
        point.final_phase = r.final_phase;
        return point;
      }
      if (r.steps >= max_steps_seen) {
        max_steps_seen = r.steps;
        point.worst_qy = qy;
        point.steps = r.steps;
        point.final_bit = r.final_bit;
        point.final_phase = r.final_phase;
      }
    }
    return point;
  }
  BellDiagonal q0 = family.family == InitialCondition::Family::IndependentBitPhase
                        ? independent_bit_phase(p)
                        : depolarizing_state(p);
  IterationResult r = iterate_schedule(q0, cycle, opts.iterate);
  point.converges = r.verdict == Verdict::Converges;
  point.steps = r.steps;
  point.final_bit = r.final_bit;
  point.final_phase = r.final_phase;
  return point;
}

}  // namespace detail

/// Bisection for the largest tolerable error rate of a cyclic schedule. A
/// coarse scan first verifies that convergence is monotone in p (single
/// transition); if it is not, the scan itself is the result.
inline ThresholdResult find_threshold(const std::vector<StepKind>& cycle,
                                      const InitialCondition& family,
                                      const ThresholdOptions& opts = {}) {
  ThresholdResult result;
  std::size_t first_false = SIZE_MAX;
  std::size_t idx = 0;
  for (double p = opts.scan_lo; p <= opts.scan_hi + 1e-12; p += opts.scan_step, ++idx) {
    ScanPoint point = detail::evaluate_family(cycle, family, p, opts);
    if (!point.converges && first_false == SIZE_MAX) first_false = idx;
    if (point.converges && first_false != SIZE_MAX) result.monotone = false;
    result.scan.push_back(point);
  }
  if (!result.monotone) return result;
  if (first_false == SIZE_MAX) {
    result.threshold = opts.scan_hi;  // everything scanned converges
    return result;
  }
  if (first_false == 0) {
    result.threshold = 0.0;
    return result;
  }
  double lo = result.scan[first_false - 1].p;
  double hi = result.scan[first_false].p;
  while (hi - lo > opts.tol) {
    const double mid = 0.5 * (lo + hi);
    if (detail::evaluate_family(cycle, family, mid, opts).converges) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  result.threshold = 0.5 * (lo + hi);
  return result;
}

struct RankedSequence {
  std::vector<StepKind> sequence;
  double threshold = 0.0;
};

struct SearchResult {
  std::vector<StepKind> best;
  double threshold = 0.0;              ///< fine threshold of the winner
  double alternating_threshold = 0.0;  ///< baseline at the same settings
  std::size_t sequences_considered = 0;
  std::size_t tier1_survivors = 0;
  std::size_t tier2_survivors = 0;
  std::vector<RankedSequence> top;  ///< refined finalists, best first
};

namespace detail {

inline bool is_repetition_of_shorter_cycle(const std::vector<StepKind>& seq) {
  for (std::size_t d = 1; d < seq.size(); ++d) {
    if (seq.size() % d != 0) continue;
    bool repeats = true;
    for (std::size_t i = d; i < seq.size() && repeats; ++i) {
      repeats = seq[i] == seq[i % d];
    }
    if (repeats) return true;
  }
  return false;
}

inline bool converges_at(const std::vector<StepKind>& cycle, const InitialCondition& family,
                         double p, const ThresholdOptions& opts) {
  return evaluate_family(cycle, family, p, opts).converges;
}

/// Plain bisection on a known-good bracket, without the monotonicity scan.
inline double bisect_threshold(const std::vector<StepKind>& cycle,
                               const InitialCondition& family, double lo, double hi,
                               const ThresholdOptions& opts) {
  if (converges_at(cycle, family, hi, opts)) return hi;
  while (hi - lo > opts.tol) {
    const double mid = 0.5 * (lo + hi);
    if (converges_at(cycle, family, mid, opts)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Exhaustive search over cyclic B/P sequences up to max_len, tiered: a
/// cheap low-p screen, a screen near the alternating threshold, a coarse
/// bisection for ranking, and a fine threshold for the finalists. The
/// alternating cycle is always refined alongside as the baseline.
inline SearchResult schedule_search(std::size_t max_len, const InitialCondition& family,
                                    const ThresholdOptions& fine_opts = {}) {
  if (max_len == 0 || max_len > 20) {
    throw std::invalid_argument("schedule_search: max_len must be in [1, 20]");
  }
  SearchResult result;

  ThresholdOptions coarse = fine_opts;
  coarse.tol = 1e-3;
  coarse.qy_grid = 5e-3;

  const std::vector<StepKind> alternating{StepKind::B, StepKind::P};

  std::vector<std::vector<StepKind>> survivors;
  for (std::size_t len = 1; len <= max_len; ++len) {
    for (std::size_t bits = 0; bits < (std::size_t{1} << len); ++bits) {
      std::vector<StepKind> seq(len);
      for (std::size_t i = 0; i < len; ++i) {
        seq[i] = ((bits >> i) & 1u) ? StepKind::P : StepKind::B;
      }
      if (detail::is_repetition_of_shorter_cycle(seq)) continue;
      ++result.sequences_considered;
      if (detail::converges_at(seq, family, 0.15, coarse)) survivors.push_back(std::move(seq));
    }
  }
  result.tier1_survivors = survivors.size();

  std::vector<std::vector<StepKind>> strong;
  for (auto& seq : survivors) {
    if (detail::converges_at(seq, family, 0.175, coarse)) strong.push_back(std::move(seq));
  }
  result.tier2_survivors = strong.size();

  std::vector<RankedSequence> ranked;
  ranked.reserve(strong.size());
  for (auto& seq : strong) {
    const double t = detail::bisect_threshold(seq, family, 0.175, 0.35, coarse);
    ranked.push_back({std::move(seq), t});
  }
  auto better = [](const RankedSequence& a, const RankedSequence& b) {
    if (a.threshold != b.threshold) return a.threshold > b.threshold;
    if (a.sequence.size() != b.sequence.size()) return a.sequence.size() < b.sequence.size();
    return sequence_string(a.sequence) < sequence_string(b.sequence);
  };
  std::sort(ranked.begin(), ranked.end(), better);
  if (ranked.size() > 25) ranked.resize(25);

  bool have_alternating = false;
  for (const auto& r : ranked) have_alternating |= r.sequence == alternating;
  if (!have_alternating && max_len >= 2) ranked.push_back({alternating, 0.0});

  for (auto& r : ranked) {
    ThresholdResult fine = find_threshold(r.sequence, family, fine_opts);
    r.threshold = fine.threshold.value_or(0.0);
    if (r.sequence == alternating) result.alternating_threshold = r.threshold;
  }
  std::sort(ranked.begin(), ranked.end(), better);

  result.top = std::move(ranked);
  if (!result.top.empty()) {
    result.best = result.top.front().sequence;
    result.threshold = result.top.front().threshold;
  }
  return result;
}

struct EveInfoBound {
  double c = 0.0;
  double leading_term = 0.0;  ///< 2^-c; the 2^{O(-2s)} term has no explicit constant
};

/// c = s - log2(2m + s + 1/ln 2); Eve's mutual information with the final
/// key is below 2^-c plus an unquantified 2^{O(-2s)} term.
inline EveInfoBound eve_info_bound(double s, double m) {
  if (s < 1 || m < 1) throw std::invalid_argument("eve_info_bound: s and m must be >= 1");
  const double arg = 2.0 * m + s + 1.0 / std::log(2.0);
  if (arg >= std::exp2(s)) {
    throw std::domain_error("eve_info_bound: 2m + s + 1/ln2 >= 2^s, bound is vacuous");
  }
  const double c = s - std::log2(arg);
  return {c, std::exp2(-c)};
}

}  // namespace nopab
