#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace dossim
{
    using Bytes = std::vector<std::uint8_t>;

    /// 64-bit digest (FNV-1a with a final avalanche). Not collision resistant.
    std::uint64_t digest64(std::span<const std::uint8_t> data, std::uint64_t salt = 0) noexcept;

    /// Symmetric cipher used by the interlock exchange and the data envelope.
    class BlockCipher
    {
    public:
        virtual ~BlockCipher() = default;

        /// Ciphertext is longer than the plaintext when the cipher adds an integrity tag.
        virtual Bytes encrypt(std::span<const std::uint8_t> plaintext, std::span<const std::uint8_t> key) const = 0;

        /// nullopt when the ciphertext fails its integrity check.
        virtual std::optional<Bytes> decrypt(std::span<const std::uint8_t> ciphertext,
                                             std::span<const std::uint8_t> key) const = 0;
    };

    /// Toy wide-block cipher: the whole message is one block. An 8-byte tag is
    /// appended, then several keyed forward and backward chaining passes make
    /// every output byte depend on every input byte. Simulation-grade only.
    class WideBlockCipher final : public BlockCipher
    {
    public:
        explicit WideBlockCipher(int rounds = 4) : rounds_(rounds) {}

        Bytes encrypt(std::span<const std::uint8_t> plaintext, std::span<const std::uint8_t> key) const override;
        std::optional<Bytes> decrypt(std::span<const std::uint8_t> ciphertext,
                                     std::span<const std::uint8_t> key) const override;

        static constexpr std::size_t kTagBytes = 8;

    private:
        int rounds_;
    };
}
