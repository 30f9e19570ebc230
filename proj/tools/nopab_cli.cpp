// Command-line front end: run protocol sessions, compute tolerable-error
// thresholds, search step schedules, account key rates, and demo the coset
// reconciliation. Exit codes: 0 success, 2 protocol abort, 3 invalid
// configuration, 4 internal invariant violation.

#include <cstdio>
#include <fstream>
#include <algorithm>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nopab/belldiag.hpp"
#include "nopab/channel.hpp"
#include "nopab/distill.hpp"
#include "nopab/gf2.hpp"
#include "nopab/keyrate.hpp"
#include "nopab/session.hpp"
#include "nopab/transcript.hpp"

namespace {

using namespace nopab;

constexpr int kExitOk = 0;
constexpr int kExitAbort = 2;
constexpr int kExitConfig = 3;
constexpr int kExitInternal = 4;

struct ChannelFlags {
  double p_depol = 0.0;
  double p_x = 0.0, p_y = 0.0, p_z = 0.0;
  std::string adversary = "auto";
};

void add_channel_flags(CLI::App* cmd, ChannelFlags& f) {
  cmd->add_option("--p-depol", f.p_depol,
                  "depolarizing channel with this bit-flip rate (q_x=q_y=q_z=p/2)");
  cmd->add_option("--p-x", f.p_x, "Pauli X probability");
  cmd->add_option("--p-y", f.p_y, "Pauli Y probability");
  cmd->add_option("--p-z", f.p_z, "Pauli Z probability");
  cmd->add_option("--adversary", f.adversary, "none|pauli|intercept-resend (default: auto)")
      ->check(CLI::IsMember({"auto", "none", "pauli", "intercept-resend"}));
}

Adversary resolve_adversary(const ChannelFlags& f) {
  const bool pauli_params = f.p_depol > 0 || f.p_x > 0 || f.p_y > 0 || f.p_z > 0;
  std::string kind = f.adversary;
  if (kind == "auto") kind = pauli_params ? "pauli" : "none";
  if (kind == "none") return Adversary::none();
  if (kind == "intercept-resend") return Adversary::intercept_resend();
  PauliChannel ch;
  if (f.p_x > 0 || f.p_y > 0 || f.p_z > 0) {
    ch = PauliChannel{1.0 - f.p_x - f.p_y - f.p_z, f.p_x, f.p_y, f.p_z};
  } else {
    ch = PauliChannel::depolarizing_bit_rate(f.p_depol);
  }
  return Adversary::pauli(ch);
}

std::string channel_echo(const ChannelFlags& f) {
  std::ostringstream oss;
  oss << "adversary=" << f.adversary << " p-depol=" << f.p_depol << " p-x=" << f.p_x
      << " p-y=" << f.p_y << " p-z=" << f.p_z;
  return oss.str();
}

gf2::CssPair resolve_css(const std::string& c1_path, const std::string& c2_path) {
  if (c1_path.empty() != c2_path.empty()) {
    throw std::invalid_argument("--code-c1 and --code-c2 must be given together");
  }
  if (c1_path.empty()) return gf2::steane_pair();
  std::ifstream f1(c1_path), f2(c2_path);
  if (!f1) throw std::invalid_argument("cannot open " + c1_path);
  if (!f2) throw std::invalid_argument("cannot open " + c2_path);
  gf2::CssPair pair{gf2::load_code(f1), gf2::load_code(f2)};
  gf2::validate_css(pair);
  return pair;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open output file " + path);
  return out;
}

std::vector<StepKind> schedule_cycle(const std::string& text) {
  if (text == "alternating") return {StepKind::B, StepKind::P};
  if (text.rfind("fixed:", 0) == 0) return parse_sequence(text.substr(6));
  throw std::invalid_argument("this command needs --schedule alternating or fixed:SEQ");
}

// Expands `--config FILE` into the flat key=value pairs the file holds,
// injected right after the subcommand so explicit flags still override
// them (every option uses the take-last policy).
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string path;
  std::vector<std::string> out;
  std::size_t subcommand_pos = std::string::npos;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--config") {
      if (i + 1 >= args.size()) throw std::invalid_argument("--config needs a file path");
      path = args[++i];
      continue;
    }
    if (a.rfind("--config=", 0) == 0) {
      path = a.substr(9);
      continue;
    }
    if (subcommand_pos == std::string::npos && !a.empty() && a[0] != '-') {
      subcommand_pos = out.size();
    }
    out.push_back(a);
  }
  if (path.empty()) return out;
  if (subcommand_pos == std::string::npos) {
    throw std::invalid_argument("--config requires a subcommand");
  }
  std::ifstream file(path);
  if (!file) throw std::invalid_argument("cannot open config file " + path);
  std::vector<std::string> injected;
  std::string line;
  while (std::getline(file, line)) {
    const auto begin = line.find_first_not_of(" \t");
    if (begin == std::string::npos) continue;
    const auto end = line.find_last_not_of(" \t\r");
    line = line.substr(begin, end - begin + 1);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.find('=') == std::string::npos) {
      throw std::invalid_argument("config file: expected key=value, got: " + line);
    }
    injected.push_back("--" + line);
  }
  out.insert(out.begin() + static_cast<std::ptrdiff_t>(subcommand_pos) + 1,
             injected.begin(), injected.end());
  return out;
}

// ---- simulate --------------------------------------------------------------

struct SimulateArgs {
  std::size_t n = 1024;
  std::size_t r = 1;
  ChannelFlags channel;
  double abort_threshold = 0.20;
  std::string schedule = "alternating";
  std::size_t sacrifice_m = 0;
  double handoff = 0.10;
  std::uint64_t seed = 0;
  std::string transcript_out;
  std::string rounds_csv;
  std::string code_c1, code_c2;
  bool reveal_keys = false;
};

std::string simulate_echo(const SimulateArgs& a) {
  std::ostringstream oss;
  oss << "cmd=simulate n=" << a.n << " r=" << a.r << " " << channel_echo(a.channel)
      << " abort-threshold=" << a.abort_threshold << " schedule=" << a.schedule
      << " sacrifice-m=" << a.sacrifice_m << " handoff=" << a.handoff << " seed=" << a.seed;
  return oss.str();
}

int run_simulate(const SimulateArgs& args) {
  SessionParams params;
  params.n = args.n;
  params.r = args.r;
  params.adversary = resolve_adversary(args.channel);
  params.abort_threshold = args.abort_threshold;
  params.schedule = parse_schedule(args.schedule);
  params.schedule.sacrifice_m = args.sacrifice_m;
  params.schedule.handoff_threshold = args.handoff;
  params.css = resolve_css(args.code_c1, args.code_c2);
  params.rng_seed = args.seed;

  const SessionOutcome outcome = run_session(params);

  if (!args.transcript_out.empty()) {
    auto out = open_output(args.transcript_out);
    write_transcript(out, outcome.transcript);
  }
  if (!args.rounds_csv.empty()) {
    auto out = open_output(args.rounds_csv);
    write_round_csv(out, outcome.rounds, simulate_echo(args));
  }

  std::printf("# %s\n", simulate_echo(args).c_str());
  std::printf("observed_qber %.6f\n", outcome.observed_qber);
  std::printf("rounds_executed %zu\n", outcome.rounds_executed);
  std::printf("consumed_secret_bits %zu\n", outcome.consumed_secret_bits);
  if (outcome.status != SessionStatus::Completed) {
    std::printf("abort: qber %.4f (%s)\n", outcome.observed_qber,
                outcome.abort_reason.c_str());
    return kExitAbort;
  }
  std::printf("status completed\n");
  std::printf("final_key_bits %zu\n", outcome.alice_key.size());
  if (args.reveal_keys) {
    std::printf("alice_key %s\n", outcome.alice_key.to_string().c_str());
    std::printf("bob_key %s\n", outcome.bob_key.to_string().c_str());
  } else {
    std::printf("alice_key_fnv1a %016llx\n",
                static_cast<unsigned long long>(fnv1a64(outcome.alice_key)));
    std::printf("bob_key_fnv1a %016llx\n",
                static_cast<unsigned long long>(fnv1a64(outcome.bob_key)));
  }
  std::printf("keys_match %s\n", outcome.alice_key == outcome.bob_key ? "yes" : "NO");
  return kExitOk;
}

// ---- threshold -------------------------------------------------------------

struct ThresholdArgs {
  std::string schedule = "alternating";
  std::string family = "worst-case";
  double tol = 1e-4;
  double qy_grid = 1e-3;
  std::size_t max_rounds = 600;
  std::string out;
};

std::string threshold_echo(const ThresholdArgs& a) {
  std::ostringstream oss;
  oss << "cmd=threshold schedule=" << a.schedule << " family=" << a.family
      << " tol=" << a.tol << " qy-grid=" << a.qy_grid << " max-rounds=" << a.max_rounds;
  return oss.str();
}

void write_scan_csv(std::ostream& out, const std::string& echo,
                    const std::vector<ScanPoint>& scan) {
  out << "# " << echo << '\n';
  out << "p,verdict,rounds,final_bit_marginal,final_phase_marginal\n";
  for (const ScanPoint& pt : scan) {
    out << pt.p << ',' << (pt.converges ? "converges" : "diverges") << ',' << pt.steps << ','
        << pt.final_bit << ',' << pt.final_phase << '\n';
  }
}

int run_threshold(const ThresholdArgs& args) {
  ThresholdOptions opts;
  opts.tol = args.tol;
  opts.qy_grid = args.qy_grid;
  opts.iterate.max_steps = args.max_rounds;
  const auto cycle = schedule_cycle(args.schedule);
  const auto family = InitialCondition::parse(args.family);
  const ThresholdResult res = find_threshold(cycle, family, opts);

  std::printf("# %s\n", threshold_echo(args).c_str());
  if (!res.monotone) {
    std::printf("non-monotone convergence region; scan trace follows\n");
    write_scan_csv(std::cout, threshold_echo(args), res.scan);
    if (!args.out.empty()) {
      auto out = open_output(args.out);
      write_scan_csv(out, threshold_echo(args), res.scan);
    }
    return kExitInternal;
  }
  std::printf("threshold %.5f\n", *res.threshold);
  if (!args.out.empty()) {
    auto out = open_output(args.out);
    write_scan_csv(out, threshold_echo(args), res.scan);
  }
  return kExitOk;
}

// ---- schedule-search ---------------------------------------------------------

struct SearchArgs {
  std::size_t max_len = 12;
  std::string family = "worst-case";
  double tol = 1e-4;
  double qy_grid = 1e-3;
  std::string out;
};

std::string search_echo(const SearchArgs& a) {
  std::ostringstream oss;
  oss << "cmd=schedule-search max-len=" << a.max_len << " family=" << a.family
      << " tol=" << a.tol << " qy-grid=" << a.qy_grid;
  return oss.str();
}

int run_search(const SearchArgs& args) {
  ThresholdOptions opts;
  opts.tol = args.tol;
  opts.qy_grid = args.qy_grid;
  const SearchResult res =
      schedule_search(args.max_len, InitialCondition::parse(args.family), opts);
  std::printf("# %s\n", search_echo(args).c_str());
  std::printf("sequences_considered %zu\n", res.sequences_considered);
  std::printf("tier1_survivors %zu\n", res.tier1_survivors);
  std::printf("tier2_survivors %zu\n", res.tier2_survivors);
  std::printf("alternating_threshold %.5f\n", res.alternating_threshold);
  std::printf("best_sequence %s\n", sequence_string(res.best).c_str());
  std::printf("best_threshold %.5f\n", res.threshold);
  for (std::size_t i = 0; i < res.top.size() && i < 10; ++i) {
    std::printf("top%zu %s %.5f\n", i + 1, sequence_string(res.top[i].sequence).c_str(),
                res.top[i].threshold);
  }
  if (!args.out.empty()) {
    auto out = open_output(args.out);
    out << "# " << search_echo(args) << '\n';
    out << "rank,sequence,threshold\n";
    for (std::size_t i = 0; i < res.top.size(); ++i) {
      out << i + 1 << ',' << sequence_string(res.top[i].sequence) << ','
          << res.top[i].threshold << '\n';
    }
  }
  return kExitOk;
}

// ---- keyrate -----------------------------------------------------------------

struct KeyrateArgs {
  std::size_t n = 1024;
  std::size_t r = 1;
  ChannelFlags channel;
  std::string schedule = "alternating";
  std::uint64_t seed = 0;
  std::string baseline = "standard-bb84";
  std::string code_c1, code_c2;
};

std::string keyrate_echo(const KeyrateArgs& a) {
  std::ostringstream oss;
  oss << "cmd=keyrate n=" << a.n << " r=" << a.r << " " << channel_echo(a.channel)
      << " schedule=" << a.schedule << " baseline=" << a.baseline << " seed=" << a.seed;
  return oss.str();
}

int run_keyrate(const KeyrateArgs& args) {
  SessionParams params;
  params.n = args.n;
  params.r = args.r;
  params.adversary = resolve_adversary(args.channel);
  params.schedule = parse_schedule(args.schedule);
  params.css = resolve_css(args.code_c1, args.code_c2);
  params.rng_seed = args.seed;
  const SessionOutcome outcome = run_session(params);
  std::printf("# %s\n", keyrate_echo(args).c_str());
  if (outcome.status != SessionStatus::Completed) {
    std::printf("abort: qber %.4f (%s)\n", outcome.observed_qber,
                outcome.abort_reason.c_str());
    return kExitAbort;
  }
  const Baseline baseline =
      args.baseline == "no-pab" ? Baseline::NoPab : Baseline::StandardBb84;
  write_keyrate_report(std::cout, key_rate_accounting(params, outcome, baseline));
  return kExitOk;
}

// ---- reconcile-demo ------------------------------------------------------------

struct ReconcileArgs {
  std::size_t error_weight = 1;
  std::uint64_t seed = 0;
  std::string code_c1, code_c2;
};

int run_reconcile_demo(const ReconcileArgs& args) {
  const gf2::CssPair pair = resolve_css(args.code_c1, args.code_c2);
  const std::size_t n = pair.block_length();
  if (args.error_weight > n) throw std::invalid_argument("--error-weight exceeds n");
  Rng rng(args.seed);
  const BitVector v = random_bits(n, rng);
  std::printf("# cmd=reconcile-demo error-weight=%zu seed=%llu n=%zu t=%zu\n",
              args.error_weight, static_cast<unsigned long long>(args.seed), n,
              pair.c1.correctable_errors());
  std::size_t matched = 0, total = 0;
  std::vector<std::size_t> idx(args.error_weight);
  for (std::size_t i = 0; i < args.error_weight; ++i) idx[i] = i;
  while (true) {
    BitVector error(n);
    std::string positions;
    for (std::size_t i : idx) {
      error.set(i, true);
      positions += (positions.empty() ? "" : ",") + std::to_string(i);
    }
    if (args.error_weight == 0) positions = "-";
    const auto res = gf2::one_way_reconcile(pair, v, v ^ error, rng);
    ++total;
    const bool ok = res.bob_key.has_value() && *res.bob_key == res.alice_key;
    matched += ok;
    std::printf("error at [%s]: %s\n", positions.c_str(),
                !res.bob_key.has_value() ? "undecodable"
                : ok                     ? "keys match"
                                         : "KEYS DIFFER");
    // advance to the next error-position combination
    bool more = false;
    std::size_t i = args.error_weight;
    while (i-- > 0) {
      if (idx[i] + (args.error_weight - i) < n) {
        ++idx[i];
        for (std::size_t j = i + 1; j < args.error_weight; ++j) idx[j] = idx[j - 1] + 1;
        more = true;
        break;
      }
    }
    if (!more) break;
  }
  std::printf("%zu/%zu patterns reconciled with equal keys\n", matched, total);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BB84 without public announcement of bases: protocol simulator and "
               "two-way post-processing analysis toolkit"};
  app.require_subcommand(1);
  // every subcommand also understands `--config FILE` with flat key=value
  // lines; explicit flags override the file
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand("simulate", "run a full two-party session");
  simulate->add_option("--n", sim.n, "check/key block size (2n qubits transmitted)");
  simulate->add_option("--r", sim.r, "basis-seed repetitions (r divides 2n)");
  add_channel_flags(simulate, sim.channel);
  simulate->add_option("--abort-threshold", sim.abort_threshold, "max tolerated check QBER");
  simulate->add_option("--schedule", sim.schedule, "alternating|fixed:SEQ|adaptive");
  simulate->add_option("--sacrifice-m", sim.sacrifice_m,
                       "bits sacrificed per refined estimate (0 = auto)");
  simulate->add_option("--handoff", sim.handoff, "bit-error handoff threshold");
  simulate->add_option("--seed", sim.seed, "RNG seed");
  simulate->add_option("--transcript-out", sim.transcript_out, "write the public transcript");
  simulate->add_option("--rounds-csv", sim.rounds_csv, "write per-round records as CSV");
  simulate->add_option("--code-c1", sim.code_c1, "C1 code file (with --code-c2)");
  simulate->add_option("--code-c2", sim.code_c2, "C2 code file (with --code-c1)");
  simulate->add_flag("--reveal-keys", sim.reveal_keys, "print raw keys instead of digests");

  ThresholdArgs thr;
  CLI::App* threshold = app.add_subcommand("threshold", "tolerable-error-rate bisection");
  threshold->add_option("--schedule", thr.schedule, "alternating|fixed:SEQ");
  threshold->add_option("--family", thr.family, "worst-case|independent|depolarizing");
  threshold->add_option("--tol", thr.tol, "bisection tolerance");
  threshold->add_option("--qy-grid", thr.qy_grid, "correlation grid step (worst-case)");
  threshold->add_option("--max-rounds", thr.max_rounds, "iteration step limit");
  threshold->add_option("--out", thr.out, "write the p-scan as CSV");

  SearchArgs search;
  CLI::App* sched_search =
      app.add_subcommand("schedule-search", "best fixed B/P cycle up to a length");
  sched_search->add_option("--max-len", search.max_len, "maximum cycle length (<= 20)");
  sched_search->add_option("--family", search.family, "worst-case|independent|depolarizing");
  sched_search->add_option("--tol", search.tol, "fine bisection tolerance");
  sched_search->add_option("--qy-grid", search.qy_grid, "fine correlation grid step");
  sched_search->add_option("--out", search.out, "write the ranked finalists as CSV");

  KeyrateArgs keyrate;
  CLI::App* keyrate_cmd = app.add_subcommand("keyrate", "qubit/secret-bit accounting");
  keyrate_cmd->add_option("--n", keyrate.n, "check/key block size");
  keyrate_cmd->add_option("--r", keyrate.r, "basis-seed repetitions");
  add_channel_flags(keyrate_cmd, keyrate.channel);
  keyrate_cmd->add_option("--schedule", keyrate.schedule, "alternating|fixed:SEQ|adaptive");
  keyrate_cmd->add_option("--seed", keyrate.seed, "RNG seed");
  keyrate_cmd->add_option("--baseline", keyrate.baseline, "standard-bb84|no-pab")
      ->check(CLI::IsMember({"standard-bb84", "no-pab"}));
  keyrate_cmd->add_option("--code-c1", keyrate.code_c1, "C1 code file");
  keyrate_cmd->add_option("--code-c2", keyrate.code_c2, "C2 code file");

  ReconcileArgs rec;
  CLI::App* reconcile =
      app.add_subcommand("reconcile-demo", "coset reconciliation over all error patterns");
  reconcile->add_option("--error-weight", rec.error_weight, "Hamming weight of the error");
  reconcile->add_option("--seed", rec.seed, "RNG seed");
  reconcile->add_option("--code-c1", rec.code_c1, "C1 code file");
  reconcile->add_option("--code-c2", rec.code_c2, "C2 code file");

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());  // CLI11 takes a reversed vector
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid configuration: %s\n", e.what());
    return kExitConfig;
  }

  try {
    if (simulate->parsed()) return run_simulate(sim);
    if (threshold->parsed()) return run_threshold(thr);
    if (sched_search->parsed()) return run_search(search);
    if (keyrate_cmd->parsed()) return run_keyrate(keyrate);
    if (reconcile->parsed()) return run_reconcile_demo(rec);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid configuration: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  }
  return kExitConfig;
}
