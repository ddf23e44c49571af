#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "hearsay/types.hpp"

namespace hearsay {

/// The wire payload broadcast on an initiator's channel. The bad/committed
/// verdict is a local ledger fact and is never part of the payload.
struct Transaction {
  AgentId initiator;
  AgentId recipient;
  Money value{0};
  Seq seq{0};
  std::set<TxId> deps;  // incoming payments being credited
  std::set<TxId> fees;  // fee credits being converted

  TxId id() const { return TxId{initiator, seq}; }

  bool operator==(const Transaction&) const = default;
};

using Digest = std::array<std::uint8_t, 32>;

/// Canonical byte encoding: initiator, recipient, value, seq, then the sorted
/// deps and sorted fees, each set prefixed by its element count. All integers
/// are little-endian and fixed-width (u32 ids and counts, i64 value, u64 seq).
std::vector<std::uint8_t> canonical_encoding(const Transaction& tx);

/// SHA-256 of the canonical encoding.
Digest digest(const Transaction& tx);

std::string to_hex(const Digest& d);
Digest digest_from_hex(const std::string& hex);

}  // namespace hearsay
