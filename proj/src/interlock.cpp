#include "dossim/interlock.hpp"

#include <algorithm>

namespace dossim::security
{
    std::string_view to_string(InterlockError e) noexcept
    {
        switch (e)
        {
        case InterlockError::None:
            return "none";
        case InterlockError::Timeout:
            return "timeout";
        case InterlockError::IntegrityFailure:
            return "integrity_failure";
        case InterlockError::CommitmentMismatch:
            return "commitment_mismatch";
        }
        return "?";
    }

    std::optional<Packet> DirectChannel::carry(const Packet &pkt)
    {
        if (hook_)
            return hook_(pkt);
        return pkt;
    }

    namespace
    {
        void put_length(Bytes &out, std::uint32_t n)
        {
            for (int shift = 24; shift >= 0; shift -= 8)
                out.push_back(static_cast<std::uint8_t>(n >> shift));
        }

        std::optional<std::uint32_t> get_length(std::span<const std::uint8_t> in)
        {
            if (in.size() < 4)
                return std::nullopt;
            std::uint32_t n = 0;
            for (std::size_t i = 0; i < 4; ++i)
                n = (n << 8) | in[i];
            return n;
        }

        Packet make_packet(PacketKind kind, NodeId src, NodeId dst, Bytes payload, double t)
        {
            Packet p;
            p.kind = kind;
            p.src = src;
            p.dst = dst;
            p.transmitter = src;
            p.size = static_cast<std::uint32_t>(std::max<std::size_t>(1, payload.size()));
            p.payload = std::move(payload);
            p.timestamp = t;
            return p;
        }
    }

    InterlockHalves split_halves(std::span<const std::uint8_t> ciphertext)
    {
        const auto total = static_cast<std::uint32_t>(ciphertext.size());
        const auto cut = ciphertext.size() / 2;
        InterlockHalves h;
        put_length(h.first, total);
        h.first.insert(h.first.end(), ciphertext.begin(), ciphertext.begin() + static_cast<std::ptrdiff_t>(cut));
        put_length(h.second, total);
        h.second.insert(h.second.end(), ciphertext.begin() + static_cast<std::ptrdiff_t>(cut), ciphertext.end());
        return h;
    }

    std::optional<Bytes> join_halves(std::span<const std::uint8_t> first, std::span<const std::uint8_t> second)
    {
        const auto n1 = get_length(first);
        const auto n2 = get_length(second);
        if (!n1 || !n2 || *n1 != *n2)
            return std::nullopt;
        if (first.size() - 4 + second.size() - 4 != *n1)
            return std::nullopt;
        Bytes out(first.begin() + 4, first.end());
        out.insert(out.end(), second.begin() + 4, second.end());
        return out;
    }

    InterlockResult interlock_exchange(const InterlockParty &sender, const InterlockParty &receiver,
                                       std::span<const std::uint8_t> key_material, const BlockCipher &cipher,
                                       InterlockChannel &channel,
                                       const std::function<bool(std::span<const std::uint8_t>)> &matches_commitment,
                                       double now, double timeout)
    {
        InterlockResult result;
        const auto halves = split_halves(cipher.encrypt(key_material, sender.shared_key));
        const double deadline = now + timeout;

        ++result.packets_sent;
        const auto half1 = channel.carry(make_packet(PacketKind::KeyHalf1, sender.id, receiver.id, halves.first, now));
        if (!half1 || half1->timestamp > deadline)
        {
            result.error = InterlockError::Timeout;
            return result;
        }

        ++result.packets_sent;
        const auto ack = channel.carry(make_packet(PacketKind::Ack, receiver.id, sender.id, Bytes{1}, half1->timestamp));
        if (!ack || ack->timestamp > deadline)
        {
            result.error = InterlockError::Timeout;
            return result;
        }

        ++result.packets_sent;
        const auto half2 = channel.carry(make_packet(PacketKind::KeyHalf2, sender.id, receiver.id, halves.second, ack->timestamp));
        if (!half2)
        {
            result.error = InterlockError::Timeout;
            return result;
        }

        const auto joined = join_halves(half1->payload, half2->payload);
        if (!joined)
        {
            result.error = InterlockError::IntegrityFailure;
            return result;
        }
        auto plain = cipher.decrypt(*joined, receiver.shared_key);
        if (!plain)
        {
            result.error = InterlockError::IntegrityFailure;
            return result;
        }
        result.recovered = std::move(*plain);
        if (matches_commitment && !matches_commitment(result.recovered))
        {
            result.error = InterlockError::CommitmentMismatch;
            return result;
        }
        result.outcome = InterlockOutcome::Verified;
        return result;
    }
}
