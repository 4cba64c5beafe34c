#include "dossim/sink_auth.hpp"

namespace dossim::security
{
    SinkKeys make_sink_keys(std::size_t prime_bits, std::size_t node_count, Rng &rng)
    {
        return make_sink_keys(rsa_keygen(prime_bits, rng), node_count, rng);
    }

    SinkKeys make_sink_keys(RsaKeyPair rsa, std::size_t node_count, Rng &rng)
    {
        SinkKeys keys;
        keys.rsa = std::move(rsa);
        const BigInt span = keys.v() - 3; // F in [2, V-2]
        for (std::size_t i = 0; i < node_count; ++i)
            keys.registered_f.emplace(static_cast<NodeId>(i), random_below(span, rng) + 2);
        return keys;
    }

    Bytes pairwise_key(const BigInt &f)
    {
        return to_bytes(f);
    }

    namespace
    {
        std::size_t modulus_width(const BigInt &m)
        {
            return (mpz_sizeinbase(m.get_mpz_t(), 2) + 7) / 8;
        }
    }

    Bytes seal_key_material(const BigInt &f, const BigInt &session_key, const RsaKeyPair &sink_public)
    {
        const auto width = modulus_width(sink_public.modulus);
        Bytes out = to_bytes(rsa_encrypt(f, sink_public.modulus, sink_public.en), width);
        const Bytes second = to_bytes(rsa_encrypt(session_key, sink_public.modulus, sink_public.en), width);
        out.insert(out.end(), second.begin(), second.end());
        return out;
    }

    std::optional<OpenedKeyMaterial> open_key_material(std::span<const std::uint8_t> material, const SinkKeys &keys)
    {
        const auto width = modulus_width(keys.v());
        if (material.size() != 2 * width)
            return std::nullopt;
        const BigInt c1 = from_bytes(material.first(width));
        const BigInt c2 = from_bytes(material.subspan(width));
        if (c1 >= keys.v() || c2 >= keys.v())
            return std::nullopt;
        return OpenedKeyMaterial{rsa_decrypt(c1, keys.v(), keys.rsa.de), rsa_decrypt(c2, keys.v(), keys.rsa.de)};
    }

    ChReport build_report(NodeId ch_id, const BigInt &f, const BigInt &v, Bytes payload,
                          std::span<const std::uint8_t> session_key, const BlockCipher &cipher)
    {
        ChReport r;
        r.ch_id = ch_id;
        r.commitment = commitment(f, v);
        r.envelope = cipher.encrypt(payload, session_key);
        r.payload = std::move(payload);
        return r;
    }

    SinkVerdict sink_verify(const ChReport &report, const SinkKeys &keys, std::span<const std::uint8_t> session_key,
                            const BlockCipher &cipher)
    {
        const auto it = keys.registered_f.find(report.ch_id);
        if (it == keys.registered_f.end())
            return SinkVerdict::Rejected;
        if (report.commitment != commitment(it->second, keys.v()))
            return SinkVerdict::Rejected;
        const auto opened = cipher.decrypt(report.envelope, session_key);
        if (!opened || *opened != report.payload)
            return SinkVerdict::Rejected;
        return SinkVerdict::Accepted;
    }
}
