#pragma once

#include "dossim/cipher.hpp"
#include "dossim/rng.hpp"
#include "dossim/rsa.hpp"
#include "dossim/types.hpp"

#include <map>
#include <optional>
#include <span>

namespace dossim::security
{
    /// The sink is the key authority: it owns the RSA pair and the secret F
    /// registered for every node. The commitment modulus V is the RSA modulus.
    struct SinkKeys
    {
        RsaKeyPair rsa;
        std::map<NodeId, BigInt> registered_f;

        const BigInt &v() const noexcept { return rsa.modulus; }
    };

    /// Generates the sink key pair and registers a secret F in [2, V-2] for nodes 0..node_count-1.
    SinkKeys make_sink_keys(std::size_t prime_bits, std::size_t node_count, Rng &rng);

    /// Registers secrets for an existing key pair.
    SinkKeys make_sink_keys(RsaKeyPair rsa, std::size_t node_count, Rng &rng);

    /// Symmetric key a node shares with the sink, derived from its registered secret.
    Bytes pairwise_key(const BigInt &f);

    /// What a CH transfers over the interlock exchange: its secret and a fresh session
    /// key, each RSA-encrypted to the sink and written at the modulus width.
    Bytes seal_key_material(const BigInt &f, const BigInt &session_key, const RsaKeyPair &sink_public);

    struct OpenedKeyMaterial
    {
        BigInt f;
        BigInt session_key;
    };

    std::optional<OpenedKeyMaterial> open_key_material(std::span<const std::uint8_t> material, const SinkKeys &keys);

    struct ChReport
    {
        NodeId ch_id = 0;
        BigInt commitment; // H = F^2 mod V
        Bytes payload;     // aggregate summary as sent in the clear
        Bytes envelope;    // payload under the session key
    };

    enum class SinkVerdict : std::uint8_t
    {
        Accepted,
        Rejected,
    };

    ChReport build_report(NodeId ch_id, const BigInt &f, const BigInt &v, Bytes payload,
                          std::span<const std::uint8_t> session_key, const BlockCipher &cipher);

    /// Accepted iff H matches the F registered for the CH and the envelope opens
    /// under the session key to exactly the payload.
    SinkVerdict sink_verify(const ChReport &report, const SinkKeys &keys, std::span<const std::uint8_t> session_key,
                            const BlockCipher &cipher);
}
