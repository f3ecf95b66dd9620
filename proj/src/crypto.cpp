#include "potc/crypto.hpp"

#include <sodium.h>

#include <mutex>
#include <stdexcept>

namespace potc {

namespace {

void ensure_sodium() {
    static std::once_flag once;
    std::call_once(once, [] {
        if (sodium_init() < 0) throw std::runtime_error("sodium_init failed");
    });
}

}  // namespace

std::string hex(const std::uint8_t* data, std::size_t len) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(len * 2);
    for (std::size_t i = 0; i < len; ++i) {
        s.push_back(digits[data[i] >> 4]);
        s.push_back(digits[data[i] & 0xF]);
    }
    return s;
}

Bytes from_hex(std::string_view s) {
    auto nib = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw std::invalid_argument("bad hex digit");
    };
    if (s.size() % 2) throw std::invalid_argument("odd hex length");
    Bytes b(s.size() / 2);
    for (std::size_t i = 0; i < b.size(); ++i)
        b[i] = static_cast<std::uint8_t>((nib(s[2 * i]) << 4) | nib(s[2 * i + 1]));
    return b;
}

Hash32 sha256(const std::uint8_t* data, std::size_t len) {
    ensure_sodium();
    Hash32 h{};
    crypto_hash_sha256(h.data(), data, len);
    return h;
}

KeyPair KeyPair::from_seed(const Hash32& seed) {
    ensure_sodium();
    KeyPair kp;
    crypto_sign_seed_keypair(kp.pub.data(), kp.sec.data(), seed.data());
    return kp;
}

SigBytes sign(const SecretKey& sk, const std::uint8_t* msg, std::size_t len) {
    ensure_sodium();
    SigBytes sig{};
    crypto_sign_detached(sig.data(), nullptr, msg, len, sk.data());
    return sig;
}

bool verify(const PublicKey& pk, const std::uint8_t* msg, std::size_t len, const SigBytes& sig) {
    ensure_sodium();
    return crypto_sign_verify_detached(sig.data(), msg, len, pk.data()) == 0;
}

Bytes sym_encrypt(const SymKey& key, const Bytes& plain) {
    ensure_sodium();
    std::array<std::uint8_t, crypto_secretbox_NONCEBYTES> nonce{};
    Bytes out(plain.size() + crypto_secretbox_MACBYTES);
    crypto_secretbox_easy(out.data(), plain.data(), plain.size(), nonce.data(), key.data());
    return out;
}

std::optional<Bytes> sym_decrypt(const SymKey& key, const Bytes& cipher) {
    ensure_sodium();
    if (cipher.size() < crypto_secretbox_MACBYTES) return std::nullopt;
    std::array<std::uint8_t, crypto_secretbox_NONCEBYTES> nonce{};
    Bytes out(cipher.size() - crypto_secretbox_MACBYTES);
    if (crypto_secretbox_open_easy(out.data(), cipher.data(), cipher.size(), nonce.data(),
                                   key.data()) != 0)
        return std::nullopt;
    return out;
}

BoxKeyPair BoxKeyPair::from_seed(const Hash32& seed) {
    ensure_sodium();
    BoxKeyPair kp;
    crypto_box_seed_keypair(kp.pub.data(), kp.sec.data(), seed.data());
    return kp;
}

Bytes box_seal(const std::array<std::uint8_t, 32>& pk, const Bytes& plain) {
    ensure_sodium();
    Bytes out(plain.size() + crypto_box_SEALBYTES);
    crypto_box_seal(out.data(), plain.data(), plain.size(), pk.data());
    return out;
}

std::optional<Bytes> box_open(const BoxKeyPair& kp, const Bytes& cipher) {
    ensure_sodium();
    if (cipher.size() < crypto_box_SEALBYTES) return std::nullopt;
    Bytes out(cipher.size() - crypto_box_SEALBYTES);
    if (crypto_box_seal_open(out.data(), cipher.data(), cipher.size(), kp.pub.data(),
                             kp.sec.data()) != 0)
        return std::nullopt;
    return out;
}

}  // namespace potc
