#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>

namespace hearsay {

/// Identifier of a simulated agent. Agents are numbered 1..n.
struct AgentId {
  std::uint32_t value{0};

  constexpr auto operator<=>(const AgentId&) const = default;

  /// Zero-based position in per-agent vectors.
  constexpr std::size_t index() const { return value - 1; }

  static constexpr AgentId from_index(std::size_t i) {
    return AgentId{static_cast<std::uint32_t>(i + 1)};
  }
};

inline std::ostream& operator<<(std::ostream& os, AgentId a) { return os << a.value; }

// Signed so that a violated no-debt invariant is observable instead of wrapping.
using Money = std::int64_t;
using Seq = std::uint64_t;
using Tick = std::uint64_t;

/// A transaction is identified by its initiator and the initiator's sequence number.
struct TxId {
  AgentId initiator;
  Seq seq{0};

  constexpr auto operator<=>(const TxId&) const = default;
};

inline std::ostream& operator<<(std::ostream& os, const TxId& id) {
  return os << "(" << id.initiator.value << "," << id.seq << ")";
}

}  // namespace hearsay

template <>
struct std::hash<hearsay::AgentId> {
  std::size_t operator()(hearsay::AgentId a) const noexcept { return std::hash<std::uint32_t>{}(a.value); }
};

template <>
struct std::hash<hearsay::TxId> {
  std::size_t operator()(const hearsay::TxId& id) const noexcept {
    return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(id.initiator.value) << 40) ^ id.seq);
  }
};
