#pragma once

#include "dossim/rng.hpp"

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace dossim::security
{
    using BigInt = mpz_class;

    class MessageTooLarge : public std::invalid_argument
    {
    public:
        MessageTooLarge() : std::invalid_argument("RSA message must be in [0, modulus)") {}
    };

    class CiphertextTooLarge : public std::invalid_argument
    {
    public:
        CiphertextTooLarge() : std::invalid_argument("RSA ciphertext must be in [0, modulus)") {}
    };

    struct RsaKeyPair
    {
        BigInt modulus;
        BigInt en; // public exponent
        BigInt de; // private exponent
        BigInt prim1;
        BigInt prim2;

        /// (prim1 - 1)(prim2 - 1)
        BigInt totient() const;
        std::size_t modulus_bits() const;
    };

    /// base^exp mod modulus by left-to-right square-and-multiply.
    BigInt mod_pow(const BigInt &base, const BigInt &exp, const BigInt &modulus);

    BigInt gcd(BigInt a, BigInt b);

    /// Inverse of a modulo m by the extended Euclidean algorithm; nullopt when gcd(a, m) != 1.
    std::optional<BigInt> mod_inverse(const BigInt &a, const BigInt &m);

    /// Miller-Rabin. Fixed witnesses up to 37 decide every n below 3.3e24;
    /// larger n additionally get `extra_rounds` random witnesses.
    bool is_probable_prime(const BigInt &n, Rng &rng, int extra_rounds = 24);

    /// Uniform integer in [0, bound); bound must be positive.
    BigInt random_below(const BigInt &bound, Rng &rng);

    /// Uniform integer with exactly `bits` bits (top bit set).
    BigInt random_bits(std::size_t bits, Rng &rng);

    /// Random prime of exactly `bits` bits with the top two bits set, so that the
    /// product of two such primes has exactly 2*bits bits.
    BigInt random_prime(std::size_t bits, Rng &rng);

    /// Builds a key pair from given primes and public exponent.
    /// Throws std::invalid_argument if en is not a unit modulo the totient.
    RsaKeyPair rsa_keypair_from_primes(const BigInt &prim1, const BigInt &prim2, const BigInt &en);

    RsaKeyPair rsa_keygen(std::size_t prime_bits, Rng &rng);

    BigInt rsa_encrypt(const BigInt &message, const BigInt &modulus, const BigInt &en);
    BigInt rsa_decrypt(const BigInt &ciphertext, const BigInt &modulus, const BigInt &de);

    /// Proof of possession sent in place of the key itself: f^2 mod v.
    BigInt commitment(const BigInt &f, const BigInt &v);

    /// Big-endian byte conversion; zero encodes as a single 0x00 byte.
    std::vector<std::uint8_t> to_bytes(const BigInt &value);
    BigInt from_bytes(std::span<const std::uint8_t> bytes);

    /// Fixed-width big-endian encoding (left-padded); throws if `value` does not fit.
    std::vector<std::uint8_t> to_bytes(const BigInt &value, std::size_t width);
}
