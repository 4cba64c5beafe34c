#include "dossim/cipher.hpp"

#include "dossim/rng.hpp"

namespace dossim
{
    std::uint64_t digest64(std::span<const std::uint8_t> data, std::uint64_t salt) noexcept
    {
        std::uint64_t h = 0xcbf29ce484222325ull ^ splitmix64(salt);
        for (auto b : data)
        {
            h ^= b;
            h *= 0x100000001b3ull;
        }
        return splitmix64(h ^ data.size());
    }

    namespace
    {
        std::uint8_t rotl(std::uint8_t v, unsigned r) noexcept
        {
            r &= 7u;
            return static_cast<std::uint8_t>((v << r) | (v >> ((8u - r) & 7u)));
        }

        std::uint8_t rotr(std::uint8_t v, unsigned r) noexcept
        {
            r &= 7u;
            return static_cast<std::uint8_t>((v >> r) | (v << ((8u - r) & 7u)));
        }

        // Keystream byte for (round, direction, position).
        class Schedule
        {
        public:
            explicit Schedule(std::span<const std::uint8_t> key) : base_(digest64(key, 0x5eed)) {}

            std::uint8_t at(int round, int dir, std::size_t i) const noexcept
            {
                const auto mixed = splitmix64(base_ ^ (static_cast<std::uint64_t>(round) << 48) ^
                                              (static_cast<std::uint64_t>(dir) << 40) ^ (i >> 3));
                return static_cast<std::uint8_t>(mixed >> ((i & 7u) * 8u));
            }

            std::uint8_t iv(int round, int dir) const noexcept
            {
                return static_cast<std::uint8_t>(splitmix64(base_ + static_cast<std::uint64_t>(round * 2 + dir)));
            }

            std::uint64_t tag_salt() const noexcept { return base_; }

        private:
            std::uint64_t base_;
        };

        void forward(Bytes &x, const Schedule &ks, int round)
        {
            std::uint8_t prev = ks.iv(round, 0);
            for (std::size_t i = 0; i < x.size(); ++i)
            {
                x[i] = rotl(static_cast<std::uint8_t>((x[i] ^ ks.at(round, 0, i)) + prev), prev);
                prev = x[i];
            }
        }

        void forward_inverse(Bytes &x, const Schedule &ks, int round)
        {
            std::uint8_t prev = ks.iv(round, 0);
            for (std::size_t i = 0; i < x.size(); ++i)
            {
                const std::uint8_t out = x[i];
                x[i] = static_cast<std::uint8_t>(static_cast<std::uint8_t>(rotr(out, prev) - prev) ^ ks.at(round, 0, i));
                prev = out;
            }
        }

        void backward(Bytes &x, const Schedule &ks, int round)
        {
            std::uint8_t prev = ks.iv(round, 1);
            for (std::size_t i = x.size(); i-- > 0;)
            {
                x[i] = rotl(static_cast<std::uint8_t>((x[i] ^ ks.at(round, 1, i)) + prev), prev);
                prev = x[i];
            }
        }

        void backward_inverse(Bytes &x, const Schedule &ks, int round)
        {
            std::uint8_t prev = ks.iv(round, 1);
            for (std::size_t i = x.size(); i-- > 0;)
            {
                const std::uint8_t out = x[i];
                x[i] = static_cast<std::uint8_t>(static_cast<std::uint8_t>(rotr(out, prev) - prev) ^ ks.at(round, 1, i));
                prev = out;
            }
        }
    }

    Bytes WideBlockCipher::encrypt(std::span<const std::uint8_t> plaintext, std::span<const std::uint8_t> key) const
    {
        const Schedule ks(key);
        Bytes x(plaintext.begin(), plaintext.end());
        const auto tag = digest64(plaintext, ks.tag_salt());
        for (std::size_t i = 0; i < kTagBytes; ++i)
            x.push_back(static_cast<std::uint8_t>(tag >> (8 * i)));
        for (int r = 0; r < rounds_; ++r)
        {
            forward(x, ks, r);
            backward(x, ks, r);
        }
        return x;
    }

    std::optional<Bytes> WideBlockCipher::decrypt(std::span<const std::uint8_t> ciphertext,
                                                  std::span<const std::uint8_t> key) const
    {
        if (ciphertext.size() < kTagBytes)
            return std::nullopt;
        const Schedule ks(key);
        Bytes x(ciphertext.begin(), ciphertext.end());
        for (int r = rounds_; r-- > 0;)
        {
            backward_inverse(x, ks, r);
            forward_inverse(x, ks, r);
        }
        std::uint64_t tag = 0;
        for (std::size_t i = 0; i < kTagBytes; ++i)
            tag |= std::uint64_t{x[x.size() - kTagBytes + i]} << (8 * i);
        x.resize(x.size() - kTagBytes);
        if (tag != digest64(x, ks.tag_salt()))
            return std::nullopt;
        return x;
    }
}
