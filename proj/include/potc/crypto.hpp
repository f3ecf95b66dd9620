#pragma once

#include "potc/bytes.hpp"

#include <optional>

namespace potc {

using PublicKey = std::array<std::uint8_t, 32>;   // Ed25519 verification key
using SecretKey = std::array<std::uint8_t, 64>;   // Ed25519 signing key
using SigBytes = std::array<std::uint8_t, 64>;

Hash32 sha256(const std::uint8_t* data, std::size_t len);
inline Hash32 sha256(const Bytes& b) { return sha256(b.data(), b.size()); }

struct KeyPair {
    PublicKey pub{};
    SecretKey sec{};

    static KeyPair from_seed(const Hash32& seed);
};

SigBytes sign(const SecretKey& sk, const std::uint8_t* msg, std::size_t len);
inline SigBytes sign(const SecretKey& sk, const Bytes& msg) { return sign(sk, msg.data(), msg.size()); }
bool verify(const PublicKey& pk, const std::uint8_t* msg, std::size_t len, const SigBytes& sig);
inline bool verify(const PublicKey& pk, const Bytes& msg, const SigBytes& sig) {
    return verify(pk, msg.data(), msg.size(), sig);
}

// Symmetric layer cipher for shuffle layers and encrypted commitments
// (XSalsa20-Poly1305, zero nonce: every key is single-use by construction).
using SymKey = std::array<std::uint8_t, 32>;

Bytes sym_encrypt(const SymKey& key, const Bytes& plain);
std::optional<Bytes> sym_decrypt(const SymKey& key, const Bytes& cipher);

// Per-card asymmetric encryption (X25519 sealed boxes). Party A's key pairs.
struct BoxKeyPair {
    std::array<std::uint8_t, 32> pub{};
    std::array<std::uint8_t, 32> sec{};

    static BoxKeyPair from_seed(const Hash32& seed);
};

Bytes box_seal(const std::array<std::uint8_t, 32>& pk, const Bytes& plain);
std::optional<Bytes> box_open(const BoxKeyPair& kp, const Bytes& cipher);

}  // namespace potc
