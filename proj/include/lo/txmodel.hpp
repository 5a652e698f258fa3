#pragma once

#include <lo/bytes.hpp>
#include <lo/gf.hpp>

#include <compare>
#include <cstdint>

namespace lo {

struct TxId {
    Hash256 digest{};
    auto operator<=>(const TxId&) const = default;
};

/// b-bit nonzero sketch element derived from (TxId, deployment salt).
using ShortId = gf::u128;

using PublicKey = std::array<uint8_t, 32>;
using Signature = std::array<uint8_t, 64>;

/// Signature backend. The MAC stand-in keeps large simulations fast and
/// sits behind the same interface; Ed25519 is the real scheme.
enum class SigMode : uint8_t {
    Mac,
    Ed25519,
};

struct KeyPair {
    PublicKey pub{};
    std::array<uint8_t, 64> secret{}; // Ed25519 expanded key; MAC uses the first 32 bytes
    SigMode mode = SigMode::Mac;
};

KeyPair derive_keypair(SigMode mode, const Hash256& seed);
Signature sign_bytes(const KeyPair& keys, std::span<const uint8_t> msg);
bool verify_bytes(SigMode mode, const PublicKey& pub, std::span<const uint8_t> msg,
                  const Signature& sig);

struct Transaction {
    TxId id{};
    PublicKey creator{};
    int64_t fee = 0;
    Bytes payload;
    Signature signature{};

    /// Canonical wire encoding: length-prefixed fields in declaration
    /// order (creator, fee, payload, signature), little-endian integers.
    Bytes encode() const;
    static Transaction decode(std::span<const uint8_t> data);

    /// The byte string the creator signs: everything except id and
    /// signature.
    Bytes signing_bytes() const;
};

/// Stable digest of the canonical encoding.
TxId tx_id(const Transaction& tx);

/// Build and sign a transaction; fills in signature and id.
Transaction make_transaction(const KeyPair& keys, int64_t fee, Bytes payload);

/// Deterministic b-bit sketch element; zero outputs are remapped to 1.
ShortId short_id(const TxId& id, const Hash256& salt, int bits = 80);

enum class TxCheck : uint8_t {
    Valid,
    BadSignature,
    NegativeFee,
    BelowMinFee,
    Oversize,
};

constexpr size_t kDefaultPayloadCap = 1024;

TxCheck prevalidate(const Transaction& tx, SigMode mode, int64_t min_fee = 0,
                    size_t payload_cap = kDefaultPayloadCap);

} // namespace lo
