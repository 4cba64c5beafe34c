#include "dossim/rsa.hpp"

#include <algorithm>
#include <array>

namespace dossim::security
{
    BigInt RsaKeyPair::totient() const
    {
        return BigInt((prim1 - 1) * (prim2 - 1));
    }

    std::size_t RsaKeyPair::modulus_bits() const
    {
        return mpz_sizeinbase(modulus.get_mpz_t(), 2);
    }

    BigInt mod_pow(const BigInt &base, const BigInt &exp, const BigInt &modulus)
    {
        if (modulus <= 0)
            throw std::invalid_argument("modulus must be positive");
        if (exp < 0)
            throw std::invalid_argument("exponent must be non-negative");
        if (modulus == 1)
            return 0;

        BigInt b = base % modulus;
        if (b < 0)
            b += modulus;
        BigInt result = 1;
        const auto nbits = mpz_sizeinbase(exp.get_mpz_t(), 2);
        for (auto i = nbits; i-- > 0;)
        {
            result = result * result % modulus;
            if (mpz_tstbit(exp.get_mpz_t(), i))
                result = result * b % modulus;
        }
        return result;
    }

    BigInt gcd(BigInt a, BigInt b)
    {
        a = abs(a);
        b = abs(b);
        while (b != 0)
        {
            BigInt r = a % b;
            a = std::move(b);
            b = std::move(r);
        }
        return a;
    }

    std::optional<BigInt> mod_inverse(const BigInt &a, const BigInt &m)
    {
        if (m <= 1)
            return std::nullopt;
        BigInt old_r = a % m, r = m;
        if (old_r < 0)
            old_r += m;
        BigInt old_s = 1, s = 0;
        while (r != 0)
        {
            const BigInt q = old_r / r;
            BigInt tmp = old_r - q * r;
            old_r = std::move(r);
            r = std::move(tmp);
            tmp = old_s - q * s;
            old_s = std::move(s);
            s = std::move(tmp);
        }
        if (old_r != 1)
            return std::nullopt;
        BigInt inv = old_s % m;
        if (inv < 0)
            inv += m;
        return inv;
    }

    namespace
    {
        constexpr std::array<unsigned, 12> kWitnesses{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

        constexpr std::array<unsigned, 53> kSmallPrimes{
            2,   3,   5,   7,   11,  13,  17,  19,  23,  29,  31,  37,  41,  43,  47,  53,  59,  61,
            67,  71,  73,  79,  83,  89,  97,  101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151,
            157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223, 227, 229, 233, 239, 241};

        // One Miller-Rabin round with n - 1 = d * 2^s.
        bool witness_passes(const BigInt &a, const BigInt &n, const BigInt &d, unsigned long s)
        {
            const BigInt n_minus_1 = n - 1;
            BigInt x = mod_pow(a, d, n);
            if (x == 1 || x == n_minus_1)
                return true;
            for (unsigned long r = 1; r < s; ++r)
            {
                x = x * x % n;
                if (x == n_minus_1)
                    return true;
            }
            return false;
        }
    }

    BigInt random_below(const BigInt &bound, Rng &rng)
    {
        const auto bits = mpz_sizeinbase(bound.get_mpz_t(), 2);
        for (;;)
        {
            BigInt candidate = 0;
            for (std::size_t done = 0; done < bits; done += 64)
            {
                const auto take = std::min<std::size_t>(64, bits - done);
                std::uint64_t word = rng.next_u64();
                if (take < 64)
                    word &= (std::uint64_t{1} << take) - 1;
                candidate <<= static_cast<mp_bitcnt_t>(take);
                BigInt w;
                mpz_import(w.get_mpz_t(), 1, 1, sizeof(word), 0, 0, &word);
                candidate += w;
            }
            if (candidate < bound)
                return candidate;
        }
    }

    bool is_probable_prime(const BigInt &n, Rng &rng, int extra_rounds)
    {
        if (n < 2)
            return false;
        for (auto p : kSmallPrimes)
        {
            if (n == p)
                return true;
            if (n % p == 0)
                return false;
        }

        BigInt d = n - 1;
        unsigned long s = 0;
        while (mpz_even_p(d.get_mpz_t()))
        {
            d >>= 1;
            ++s;
        }
        for (auto a : kWitnesses)
            if (!witness_passes(BigInt(a), n, d, s))
                return false;

        if (mpz_sizeinbase(n.get_mpz_t(), 2) <= 81)
            return true;
        for (int i = 0; i < extra_rounds; ++i)
        {
            const BigInt a = random_below(BigInt(n - 3), rng) + 2;
            if (!witness_passes(a, n, d, s))
                return false;
        }
        return true;
    }

    BigInt random_bits(std::size_t bits, Rng &rng)
    {
        if (bits == 0)
            return 0;
        BigInt top = 1;
        top <<= static_cast<mp_bitcnt_t>(bits - 1);
        return random_below(top, rng) + top;
    }

    BigInt random_prime(std::size_t bits, Rng &rng)
    {
        if (bits < 2)
            throw std::invalid_argument("prime size must be at least 2 bits");
        for (;;)
        {
            BigInt candidate = random_bits(bits, rng);
            if (bits >= 2)
                mpz_setbit(candidate.get_mpz_t(), static_cast<mp_bitcnt_t>(bits - 2));
            mpz_setbit(candidate.get_mpz_t(), 0);
            if (is_probable_prime(candidate, rng))
                return candidate;
        }
    }

    RsaKeyPair rsa_keypair_from_primes(const BigInt &prim1, const BigInt &prim2, const BigInt &en)
    {
        RsaKeyPair key;
        key.prim1 = prim1;
        key.prim2 = prim2;
        key.modulus = prim1 * prim2;
        key.en = en;
        const BigInt phi = key.totient();
        if (en <= 1 || en >= phi)
            throw std::invalid_argument("public exponent must lie in (1, totient)");
        auto de = mod_inverse(en, phi);
        if (!de)
            throw std::invalid_argument("public exponent is not coprime with the totient");
        key.de = *de;
        return key;
    }

    RsaKeyPair rsa_keygen(std::size_t prime_bits, Rng &rng)
    {
        if (prime_bits < 8)
            throw std::invalid_argument("RSA primes need at least 8 bits");
        for (;;)
        {
            const BigInt p = random_prime(prime_bits, rng);
            const BigInt q = random_prime(prime_bits, rng);
            if (p == q)
                continue;
            const BigInt phi = (p - 1) * (q - 1);

            BigInt en = 0;
            for (unsigned candidate : {65537u, 257u, 17u, 5u, 3u})
            {
                if (candidate < phi && gcd(BigInt(candidate), phi) == 1)
                {
                    en = candidate;
                    break;
                }
            }
            if (en == 0)
            {
                for (BigInt c = 7; c < phi; c += 2)
                {
                    if (gcd(c, phi) == 1)
                    {
                        en = c;
                        break;
                    }
                }
            }
            if (en == 0)
                continue;
            auto key = rsa_keypair_from_primes(p, q, en);
            if (key.de > 1)
                return key;
        }
    }

    BigInt rsa_encrypt(const BigInt &message, const BigInt &modulus, const BigInt &en)
    {
        if (message < 0 || message >= modulus)
            throw MessageTooLarge();
        return mod_pow(message, en, modulus);
    }

    BigInt rsa_decrypt(const BigInt &ciphertext, const BigInt &modulus, const BigInt &de)
    {
        if (ciphertext < 0 || ciphertext >= modulus)
            throw CiphertextTooLarge();
        return mod_pow(ciphertext, de, modulus);
    }

    BigInt commitment(const BigInt &f, const BigInt &v)
    {
        if (v <= 1)
            throw std::invalid_argument("commitment modulus must exceed 1");
        BigInt r = f * f % v;
        if (r < 0)
            r += v;
        return r;
    }

    std::vector<std::uint8_t> to_bytes(const BigInt &value)
    {
        if (value < 0)
            throw std::invalid_argument("negative values have no byte encoding");
        if (value == 0)
            return {0};
        std::vector<std::uint8_t> out((mpz_sizeinbase(value.get_mpz_t(), 2) + 7) / 8);
        std::size_t written = 0;
        mpz_export(out.data(), &written, 1, 1, 1, 0, value.get_mpz_t());
        out.resize(written);
        return out;
    }

    std::vector<std::uint8_t> to_bytes(const BigInt &value, std::size_t width)
    {
        auto raw = to_bytes(value);
        if (value == 0)
            raw.clear();
        if (raw.size() > width)
            throw std::invalid_argument("value does not fit the requested width");
        std::vector<std::uint8_t> out(width - raw.size(), 0);
        out.insert(out.end(), raw.begin(), raw.end());
        return out;
    }

    BigInt from_bytes(std::span<const std::uint8_t> bytes)
    {
        BigInt v = 0;
        if (!bytes.empty())
            mpz_import(v.get_mpz_t(), bytes.size(), 1, 1, 1, 0, bytes.data());
        return v;
    }
}
