#pragma once

#include <cstdint>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nopab/bitvec.hpp"

namespace nopab {

enum class Party : std::uint8_t { Alice, Bob };

inline char party_char(Party p) { return p == Party::Alice ? 'A' : 'B'; }

enum class MessageKind : std::uint8_t {
  ReceiptAck,
  CheckPositions,
  CheckValues,
  PairingPermutation,
  PairParities,
  TripleGrouping,
  SacrificePositions,
  SacrificeValues,
  ErrorEstimate,
  CodeAnnouncement,
  Abort,
};

inline const char* message_kind_name(MessageKind k) {
  switch (k) {
    case MessageKind::ReceiptAck: return "RECEIPT_ACK";
    case MessageKind::CheckPositions: return "CHECK_POSITIONS";
    case MessageKind::CheckValues: return "CHECK_VALUES";
    case MessageKind::PairingPermutation: return "PAIRING_PERMUTATION";
    case MessageKind::PairParities: return "PAIR_PARITIES";
    case MessageKind::TripleGrouping: return "TRIPLE_GROUPING";
    case MessageKind::SacrificePositions: return "SACRIFICE_POSITIONS";
    case MessageKind::SacrificeValues: return "SACRIFICE_VALUES";
    case MessageKind::ErrorEstimate: return "ERROR_ESTIMATE";
    case MessageKind::CodeAnnouncement: return "CODE_ANNOUNCEMENT";
    case MessageKind::Abort: return "ABORT";
  }
  return "?";
}

/// One authenticated public classical message. Payloads are canonical byte
/// strings so that transcripts of identically seeded sessions are
/// byte-identical:
///   bit vector  : u32 big-endian bit count, then packed bits (bit i at
///                 byte i/8, mask 0x80 >> i%8)
///   index list  : u32 big-endian count, then one u32 big-endian per index
///   estimate    : u32 big-endian mismatch count, u32 big-endian sample size
///   abort       : UTF-8 reason text
struct Message {
  Party sender = Party::Alice;
  MessageKind kind = MessageKind::ReceiptAck;
  std::vector<std::uint8_t> payload;
};

namespace wire {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t offset) {
  if (offset + 4 > in.size()) throw std::invalid_argument("payload truncated");
  return (std::uint32_t{in[offset]} << 24) | (std::uint32_t{in[offset + 1]} << 16) |
         (std::uint32_t{in[offset + 2]} << 8) | std::uint32_t{in[offset + 3]};
}

inline std::vector<std::uint8_t> encode_bits(const BitVector& v) {
  std::vector<std::uint8_t> out;
  put_u32(out, static_cast<std::uint32_t>(v.size()));
  out.resize(4 + (v.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v.get(i)) out[4 + i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
  }
  return out;
}

inline BitVector decode_bits(const std::vector<std::uint8_t>& payload) {
  const std::uint32_t nbits = get_u32(payload, 0);
  if (payload.size() != 4 + (std::size_t{nbits} + 7) / 8) {
    throw std::invalid_argument("bit payload has wrong size");
  }
  BitVector v(nbits);
  for (std::uint32_t i = 0; i < nbits; ++i) {
    v.set(i, (payload[4 + i / 8] >> (7 - i % 8)) & 1u);
  }
  return v;
}

inline std::vector<std::uint8_t> encode_indices(const std::vector<std::uint32_t>& idx) {
  std::vector<std::uint8_t> out;
  put_u32(out, static_cast<std::uint32_t>(idx.size()));
  for (std::uint32_t i : idx) put_u32(out, i);
  return out;
}

inline std::vector<std::uint32_t> decode_indices(const std::vector<std::uint8_t>& payload) {
  const std::uint32_t count = get_u32(payload, 0);
  if (payload.size() != 4 + std::size_t{count} * 4) {
    throw std::invalid_argument("index payload has wrong size");
  }
  std::vector<std::uint32_t> idx(count);
  for (std::uint32_t i = 0; i < count; ++i) idx[i] = get_u32(payload, 4 + std::size_t{i} * 4);
  return idx;
}

inline std::vector<std::uint8_t> encode_estimate(std::uint32_t mismatches, std::uint32_t sample) {
  std::vector<std::uint8_t> out;
  put_u32(out, mismatches);
  put_u32(out, sample);
  return out;
}

}  // namespace wire

inline Message msg_bits(Party sender, MessageKind kind, const BitVector& bits) {
  return {sender, kind, wire::encode_bits(bits)};
}

inline Message msg_indices(Party sender, MessageKind kind, const std::vector<std::uint32_t>& idx) {
  return {sender, kind, wire::encode_indices(idx)};
}

inline Message msg_estimate(Party sender, std::size_t mismatches, std::size_t sample) {
  return {sender, MessageKind::ErrorEstimate,
          wire::encode_estimate(static_cast<std::uint32_t>(mismatches),
                                static_cast<std::uint32_t>(sample))};
}

inline Message msg_abort(Party sender, const std::string& reason) {
  return {sender, MessageKind::Abort, std::vector<std::uint8_t>(reason.begin(), reason.end())};
}

inline Message msg_ack(Party sender) { return {sender, MessageKind::ReceiptAck, {}}; }

using Transcript = std::vector<Message>;

/// Number of key-material bits a message reveals: meaningful for value
/// announcements (check values, parities, sacrificed values, the code
/// announcement); zero for structural messages (positions, permutations,
/// acks, estimates, aborts).
inline std::size_t revealed_data_bits(const Message& m) {
  switch (m.kind) {
    case MessageKind::CheckValues:
    case MessageKind::PairParities:
    case MessageKind::SacrificeValues:
    case MessageKind::CodeAnnouncement:
      return wire::decode_bits(m.payload).size();
    default:
      return 0;
  }
}

/// Line format: `<seq> <A|B> <KIND> <hex payload>`; `-` for empty payloads.
/// Stable so that tests can diff transcripts of seeded runs.
inline void write_transcript(std::ostream& out, const Transcript& transcript) {
  static const char* hexdig = "0123456789abcdef";
  std::size_t seq = 1;
  for (const Message& m : transcript) {
    out << seq++ << ' ' << party_char(m.sender) << ' ' << message_kind_name(m.kind) << ' ';
    if (m.payload.empty()) {
      out << '-';
    } else {
      for (std::uint8_t byte : m.payload) {
        out << hexdig[byte >> 4] << hexdig[byte & 0xf];
      }
    }
    out << '\n';
  }
}

inline std::string transcript_string(const Transcript& transcript) {
  std::ostringstream oss;
  write_transcript(oss, transcript);
  return oss.str();
}

}  // namespace nopab
