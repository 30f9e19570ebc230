#pragma once

#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>

#include "nopab/session.hpp"

namespace nopab {

enum class Baseline { StandardBb84, NoPab };

/// Qubit and secret-bit bookkeeping for a completed session, against either
/// the no-PAB scheme itself or a standard-BB84 sifting baseline (which keeps
/// only half of the transmitted positions on average).
struct KeyRateReport {
  std::size_t transmitted_qubits = 0;  ///< 2n
  std::size_t check_cost = 0;          ///< n positions revealed entirely
  std::size_t distill_input_bits = 0;
  std::size_t distill_output_bits = 0;
  double distill_survival = 0.0;
  std::size_t final_key_bits = 0;
  std::size_t consumed_secret_bits = 0;  ///< pre-shared basis seed, 2n/r
  long long net_new_secret_bits = 0;     ///< final key minus consumed seed
  double sifted_usable_fraction = 0.0;   ///< usable positions / transmitted
  double baseline_fraction = 0.0;        ///< same quantity for the baseline
  double usable_position_ratio = 0.0;    ///< this scheme vs the baseline
};

inline KeyRateReport key_rate_accounting(const SessionParams& params,
                                         const SessionOutcome& outcome,
                                         Baseline baseline = Baseline::StandardBb84) {
  if (outcome.status != SessionStatus::Completed) {
    throw std::invalid_argument("key_rate_accounting: session did not complete");
  }
  KeyRateReport rep;
  rep.transmitted_qubits = 2 * params.n;
  rep.check_cost = params.n;
  rep.distill_input_bits = outcome.distill_input_bits;
  rep.distill_output_bits = outcome.distill_output_bits;
  rep.distill_survival = outcome.distill_input_bits == 0
                             ? 0.0
                             : static_cast<double>(outcome.distill_output_bits) /
                                   static_cast<double>(outcome.distill_input_bits);
  rep.final_key_bits = outcome.alice_key.size();
  rep.consumed_secret_bits = outcome.consumed_secret_bits;
  rep.net_new_secret_bits = static_cast<long long>(rep.final_key_bits) -
                            static_cast<long long>(rep.consumed_secret_bits);
  // Without PAB every transmitted position is used, as a check bit or as key
  // material; nothing is lost to sifting.
  rep.sifted_usable_fraction = 1.0;
  rep.baseline_fraction = baseline == Baseline::StandardBb84 ? 0.5 : 1.0;
  rep.usable_position_ratio = rep.sifted_usable_fraction / rep.baseline_fraction;
  return rep;
}

inline void write_keyrate_report(std::ostream& out, const KeyRateReport& rep) {
  out << "transmitted_qubits " << rep.transmitted_qubits << '\n'
      << "check_cost " << rep.check_cost << '\n'
      << "distill_input_bits " << rep.distill_input_bits << '\n'
      << "distill_output_bits " << rep.distill_output_bits << '\n'
      << "distill_survival " << rep.distill_survival << '\n'
      << "final_key_bits " << rep.final_key_bits << '\n'
      << "consumed_secret_bits " << rep.consumed_secret_bits << '\n'
      << "net_new_secret_bits " << rep.net_new_secret_bits << '\n'
      << "sifted_usable_fraction " << rep.sifted_usable_fraction << '\n'
      << "baseline_fraction " << rep.baseline_fraction << '\n'
      << "usable_position_ratio " << rep.usable_position_ratio << '\n';
}

}  // namespace nopab
