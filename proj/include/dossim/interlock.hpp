#pragma once

#include "dossim/cipher.hpp"
#include "dossim/types.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string_view>

namespace dossim::security
{
    enum class InterlockOutcome : std::uint8_t
    {
        Verified,
        Failed,
    };

    enum class InterlockError : std::uint8_t
    {
        None,
        Timeout,            // the Ack (or the second half) never arrived in time
        IntegrityFailure,   // halves do not reassemble into a valid ciphertext
        CommitmentMismatch, // decrypted cleanly but does not match what was committed to
    };

    std::string_view to_string(InterlockError e) noexcept;

    struct InterlockParty
    {
        NodeId id = 0;
        Bytes shared_key; // symmetric key both ends hold
    };

    /// Carries one packet between the parties. Returns the packet as the far end
    /// sees it (timestamp = arrival time), or nullopt if it never arrives.
    class InterlockChannel
    {
    public:
        virtual ~InterlockChannel() = default;
        virtual std::optional<Packet> carry(const Packet &pkt) = 0;
    };

    /// Lossless zero-latency channel with an optional hook to drop or alter packets.
    class DirectChannel final : public InterlockChannel
    {
    public:
        using Hook = std::function<std::optional<Packet>(Packet)>;

        explicit DirectChannel(Hook hook = {}) : hook_(std::move(hook)) {}
        std::optional<Packet> carry(const Packet &pkt) override;

    private:
        Hook hook_;
    };

    struct InterlockHalves
    {
        Bytes first;
        Bytes second;
    };

    /// Splits a ciphertext into two halves, each prefixed by the total length (4 bytes, big-endian).
    InterlockHalves split_halves(std::span<const std::uint8_t> ciphertext);

    /// Inverse of split_halves; nullopt when the headers disagree or the lengths do not add up.
    std::optional<Bytes> join_halves(std::span<const std::uint8_t> first, std::span<const std::uint8_t> second);

    struct InterlockResult
    {
        InterlockOutcome outcome = InterlockOutcome::Failed;
        InterlockError error = InterlockError::None;
        Bytes recovered;             // key material as reassembled by the receiver
        std::size_t packets_sent = 0; // KeyHalf1, Ack, KeyHalf2 attempted

        bool verified() const noexcept { return outcome == InterlockOutcome::Verified; }
    };

    /// Sender encrypts `key_material` under the shared key, sends the first half,
    /// waits for the receiver's Ack (at most `timeout` seconds after `now`), then
    /// sends the second half. The receiver decrypts only once both halves are in
    /// hand and accepts iff `matches_commitment` approves the recovered material.
    InterlockResult interlock_exchange(const InterlockParty &sender, const InterlockParty &receiver,
                                       std::span<const std::uint8_t> key_material, const BlockCipher &cipher,
                                       InterlockChannel &channel,
                                       const std::function<bool(std::span<const std::uint8_t>)> &matches_commitment,
                                       double now = 0.0, double timeout = 0.5);
}
