#include <lo/txmodel.hpp>

#include <lo/hash.hpp>

#include <sodium.h>

#include <mutex>
#include <stdexcept>

namespace lo {

namespace {

void ensure_sodium()
{
    static std::once_flag flag;
    std::call_once(flag, [] {
        if (sodium_init() < 0) throw std::runtime_error("sodium_init failed");
    });
}

Signature mac_sign(const PublicKey& pub, std::span<const uint8_t> msg, const Hash256& secret)
{
    Bytes buf;
    buf.reserve(64 + msg.size());
    put_bytes(buf, secret);
    put_bytes(buf, pub);
    put_bytes(buf, msg);
    Hash256 a = tagged_hash("lo/macsig/a", buf);
    Hash256 b = tagged_hash("lo/macsig/b", buf);
    Signature sig;
    std::copy(a.begin(), a.end(), sig.begin());
    std::copy(b.begin(), b.end(), sig.begin() + 32);
    return sig;
}

/// Simulation stand-in key: derivable by anyone from the public key, so
/// signatures are verifiable without key distribution. Not a real MAC.
Hash256 mac_secret_for(const PublicKey& pub)
{
    return tagged_hash("lo/macsecret", pub);
}

} // namespace

KeyPair derive_keypair(SigMode mode, const Hash256& seed)
{
    KeyPair kp;
    kp.mode = mode;
    if (mode == SigMode::Ed25519) {
        ensure_sodium();
        unsigned char pk[crypto_sign_PUBLICKEYBYTES];
        unsigned char sk[crypto_sign_SECRETKEYBYTES];
        crypto_sign_seed_keypair(pk, sk, seed.data());
        std::copy(pk, pk + 32, kp.pub.begin());
        std::copy(sk, sk + 64, kp.secret.begin());
    } else {
        Hash256 pub = tagged_hash("lo/macpk", seed);
        std::copy(pub.begin(), pub.end(), kp.pub.begin());
        Hash256 secret = mac_secret_for(kp.pub);
        std::copy(secret.begin(), secret.end(), kp.secret.begin());
    }
    return kp;
}

Signature sign_bytes(const KeyPair& keys, std::span<const uint8_t> msg)
{
    if (keys.mode == SigMode::Ed25519) {
        ensure_sodium();
        Signature sig;
        crypto_sign_detached(sig.data(), nullptr, msg.data(), msg.size(), keys.secret.data());
        return sig;
    }
    Hash256 secret;
    std::copy(keys.secret.begin(), keys.secret.begin() + 32, secret.begin());
    return mac_sign(keys.pub, msg, secret);
}

bool verify_bytes(SigMode mode, const PublicKey& pub, std::span<const uint8_t> msg,
                  const Signature& sig)
{
    if (mode == SigMode::Ed25519) {
        ensure_sodium();
        return crypto_sign_verify_detached(sig.data(), msg.data(), msg.size(), pub.data()) == 0;
    }
    return mac_sign(pub, msg, mac_secret_for(pub)) == sig;
}

Bytes Transaction::signing_bytes() const
{
    Bytes out;
    put_field(out, creator);
    Bytes fee_bytes;
    put_u64le(fee_bytes, uint64_t(fee));
    put_field(out, fee_bytes);
    put_field(out, payload);
    return out;
}

Bytes Transaction::encode() const
{
    Bytes out = signing_bytes();
    put_field(out, signature);
    return out;
}

Transaction Transaction::decode(std::span<const uint8_t> data)
{
    Transaction tx;
    size_t pos = 0;
    auto field = [&](size_t expect_len) -> std::span<const uint8_t> {
        if (pos + 4 > data.size()) throw std::invalid_argument("transaction truncated");
        uint32_t len = get_u32le(data.data() + pos);
        pos += 4;
        if (pos + len > data.size()) throw std::invalid_argument("transaction truncated");
        if (expect_len && len != expect_len) throw std::invalid_argument("transaction field size");
        auto s = data.subspan(pos, len);
        pos += len;
        return s;
    };
    auto creator = field(32);
    std::copy(creator.begin(), creator.end(), tx.creator.begin());
    auto fee = field(8);
    tx.fee = int64_t(get_u64le(fee.data()));
    auto payload = field(0);
    tx.payload.assign(payload.begin(), payload.end());
    auto sig = field(64);
    std::copy(sig.begin(), sig.end(), tx.signature.begin());
    if (pos != data.size()) throw std::invalid_argument("transaction trailing bytes");
    tx.id = tx_id(tx);
    return tx;
}

TxId tx_id(const Transaction& tx)
{
    return TxId{sha256(tx.encode())};
}

Transaction make_transaction(const KeyPair& keys, int64_t fee, Bytes payload)
{
    Transaction tx;
    tx.creator = keys.pub;
    tx.fee = fee;
    tx.payload = std::move(payload);
    tx.signature = sign_bytes(keys, tx.signing_bytes());
    tx.id = tx_id(tx);
    return tx;
}

ShortId short_id(const TxId& id, const Hash256& salt, int bits)
{
    Bytes buf;
    buf.reserve(64);
    put_bytes(buf, salt);
    put_bytes(buf, id.digest);
    Hash256 h = tagged_hash("lo/shortid", buf);
    gf::u128 v = 0;
    int bytes = bits / 8;
    for (int i = 0; i < bytes; ++i) v = (v << 8) | h[size_t(i)];
    return v == 0 ? 1 : v;
}

TxCheck prevalidate(const Transaction& tx, SigMode mode, int64_t min_fee, size_t payload_cap)
{
    if (!verify_bytes(mode, tx.creator, tx.signing_bytes(), tx.signature))
        return TxCheck::BadSignature;
    if (tx.fee < 0) return TxCheck::NegativeFee;
    if (tx.fee < min_fee) return TxCheck::BelowMinFee;
    if (tx.payload.size() > payload_cap) return TxCheck::Oversize;
    return TxCheck::Valid;
}

} // namespace lo
