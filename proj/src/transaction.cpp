#include "hearsay/transaction.hpp"

#include <openssl/sha.h>

#include <stdexcept>

namespace hearsay {

namespace {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  auto u = static_cast<std::make_unsigned_t<T>>(v);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
  }
}

void put_ids(std::vector<std::uint8_t>& out, const std::set<TxId>& ids) {
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ids.size()));
  for (const auto& id : ids) {
    put_le<std::uint32_t>(out, id.initiator.value);
    put_le<std::uint64_t>(out, id.seq);
  }
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::vector<std::uint8_t> canonical_encoding(const Transaction& tx) {
  std::vector<std::uint8_t> out;
  out.reserve(24 + 12 * (tx.deps.size() + tx.fees.size()) + 8);
  put_le<std::uint32_t>(out, tx.initiator.value);
  put_le<std::uint32_t>(out, tx.recipient.value);
  put_le<std::int64_t>(out, tx.value);
  put_le<std::uint64_t>(out, tx.seq);
  put_ids(out, tx.deps);
  put_ids(out, tx.fees);
  return out;
}

Digest digest(const Transaction& tx) {
  const auto bytes = canonical_encoding(tx);
  Digest d{};
  SHA256(bytes.data(), bytes.size(), d.data());
  return d;
}

std::string to_hex(const Digest& d) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string s;
  s.reserve(d.size() * 2);
  for (auto b : d) {
    s.push_back(kHex[b >> 4]);
    s.push_back(kHex[b & 0xf]);
  }
  return s;
}

Digest digest_from_hex(const std::string& hex) {
  Digest d{};
  if (hex.size() != d.size() * 2) throw std::invalid_argument("digest: expected 64 hex characters");
  for (std::size_t i = 0; i < d.size(); ++i) {
    int hi = hex_value(hex[2 * i]);
    int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw std::invalid_argument("digest: invalid hex character");
    d[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return d;
}

}  // namespace hearsay
