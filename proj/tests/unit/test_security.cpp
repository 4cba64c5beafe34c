#include "dossim/cipher.hpp"
#include "dossim/interlock.hpp"
#include "dossim/rsa.hpp"
#include "dossim/sink_auth.hpp"
#include "dossim/sync_auth.hpp"

#include <doctest.h>

using namespace dossim;
using namespace dossim::security;

namespace
{
    BigInt gmp_powm(const BigInt &b, const BigInt &e, const BigInt &m)
    {
        BigInt r;
        mpz_powm(r.get_mpz_t(), b.get_mpz_t(), e.get_mpz_t(), m.get_mpz_t());
        return r;
    }

    Bytes random_bytes(Rng &rng, std::size_t n)
    {
        Bytes b(n);
        for (auto &x : b)
            x = static_cast<std::uint8_t>(rng.below(256));
        return b;
    }

    Packet sync_from(NodeId src, std::optional<std::uint64_t> token = std::nullopt)
    {
        Packet p;
        p.kind = PacketKind::Sync;
        p.src = p.transmitter = src;
        p.token = token;
        return p;
    }
}

TEST_CASE("textbook key pair")
{
    const auto k = rsa_keypair_from_primes(61, 53, 17);
    CHECK(k.modulus == 3233);
    CHECK(k.totient() == 3120);
    CHECK(k.de == 2753);
    const auto small = rsa_keypair_from_primes(3, 5, 3);
    CHECK(small.modulus == 15);
    CHECK(small.de == 3);
    CHECK_THROWS_AS(rsa_keypair_from_primes(61, 53, 13), std::invalid_argument); // 13 divides 3120
}

TEST_CASE("encrypt and decrypt fixed values")
{
    CHECK(rsa_encrypt(65, 3233, 17) == 2790);
    CHECK(rsa_decrypt(2790, 3233, 2753) == 65);
    CHECK(rsa_encrypt(0, 3233, 17) == 0);
    CHECK(rsa_encrypt(1, 3233, 17) == 1);
    CHECK(rsa_decrypt(1, 3233, 2753) == 1);
    CHECK_THROWS_AS(rsa_encrypt(3233, 3233, 17), MessageTooLarge);
    CHECK_THROWS_AS(rsa_decrypt(3233, 3233, 2753), CiphertextTooLarge);
}

TEST_CASE("square-and-multiply agrees with GMP")
{
    Rng rng(11, Stream::Test);
    for (int i = 0; i < 200; ++i)
    {
        const BigInt m = random_bits(1 + rng.below(300), rng) + 1;
        const BigInt b = random_below(m, rng);
        const BigInt e = random_bits(1 + rng.below(200), rng);
        CHECK(mod_pow(b, e, m) == gmp_powm(b, e, m));
    }
    CHECK(mod_pow(5, 0, 7) == 1);
    CHECK(mod_pow(5, 3, 1) == 0);
}

TEST_CASE("modular inverse agrees with GMP")
{
    Rng rng(12, Stream::Test);
    for (int i = 0; i < 200; ++i)
    {
        const BigInt m = random_bits(64, rng);
        const BigInt a = random_below(m, rng);
        BigInt expected;
        const bool exists = mpz_invert(expected.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t()) != 0;
        const auto got = mod_inverse(a, m);
        CHECK(got.has_value() == exists);
        if (got && exists)
            CHECK(*got == expected);
    }
    CHECK_FALSE(mod_inverse(6, 9).has_value());
    CHECK(gcd(84, 36) == 12);
}

TEST_CASE("primality agrees with GMP on small and mid-size integers")
{
    Rng rng(13, Stream::Test);
    for (int n = 0; n < 5000; ++n)
        CHECK(is_probable_prime(n, rng) == (mpz_probab_prime_p(BigInt(n).get_mpz_t(), 30) != 0));
    for (int i = 0; i < 300; ++i)
    {
        const BigInt n = random_bits(96, rng);
        CHECK(is_probable_prime(n, rng) == (mpz_probab_prime_p(n.get_mpz_t(), 40) != 0));
    }
    // Carmichael numbers fool Fermat, not Miller-Rabin.
    for (int c : {561, 1105, 1729, 2465, 2821, 6601, 8911})
        CHECK_FALSE(is_probable_prime(c, rng));
}

TEST_CASE("generated keys are consistent")
{
    Rng rng(14, Stream::Test);
    for (std::size_t bits : {8u, 16u, 32u, 64u})
    {
        const auto k = rsa_keygen(bits, rng);
        CHECK(k.modulus_bits() == 2 * bits);
        CHECK(k.prim1 != k.prim2);
        CHECK((k.en * k.de) % k.totient() == 1);
        for (int i = 0; i < 20; ++i)
        {
            const BigInt m = random_below(k.modulus, rng);
            CHECK(rsa_decrypt(rsa_encrypt(m, k.modulus, k.en), k.modulus, k.de) == m);
        }
    }
    CHECK_THROWS_AS(rsa_keygen(4, rng), std::invalid_argument);
}

TEST_CASE("commitment")
{
    CHECK(commitment(7, 33) == 16);
    CHECK(commitment(0, 33) == 0);
    CHECK(commitment(1, 33) == 1);
    CHECK(commitment(32, 33) == 1);
    CHECK_THROWS(commitment(3, 1));
}

TEST_CASE("byte encodings")
{
    CHECK(to_bytes(BigInt(0)) == Bytes{0});
    CHECK(to_bytes(BigInt(0x0102)) == Bytes{1, 2});
    CHECK(to_bytes(BigInt(0x0102), 4) == Bytes{0, 0, 1, 2});
    CHECK_THROWS(to_bytes(BigInt(0x010203), 2));
    CHECK(from_bytes(Bytes{0, 0, 1, 2}) == 0x0102);
}

TEST_CASE("toy cipher roundtrip and tamper detection")
{
    WideBlockCipher cipher;
    Rng rng(15, Stream::Test);
    for (int i = 0; i < 50; ++i)
    {
        const auto key = random_bytes(rng, 1 + rng.below(16));
        const auto msg = random_bytes(rng, rng.below(64));
        auto ct = cipher.encrypt(msg, key);
        CHECK(ct.size() == msg.size() + WideBlockCipher::kTagBytes);
        const auto pt = cipher.decrypt(ct, key);
        REQUIRE(pt.has_value());
        CHECK(*pt == msg);

        auto flipped = ct;
        flipped[rng.below(flipped.size())] ^= static_cast<std::uint8_t>(1u << rng.below(8));
        CHECK_FALSE(cipher.decrypt(flipped, key).has_value());

        auto other = key;
        other[0] ^= 0x80;
        CHECK_FALSE(cipher.decrypt(ct, other).has_value());
    }
    CHECK_FALSE(cipher.decrypt(Bytes{1, 2, 3}, Bytes{1}).has_value());
}

TEST_CASE("interlock halves")
{
    const Bytes ct{1, 2, 3, 4, 5};
    const auto h = split_halves(ct);
    CHECK(h.first == Bytes{0, 0, 0, 5, 1, 2});
    CHECK(h.second == Bytes{0, 0, 0, 5, 3, 4, 5});
    CHECK(join_halves(h.first, h.second) == ct);
    CHECK_FALSE(join_halves(h.first, h.first).has_value());
}

TEST_CASE("interlock exchange outcomes")
{
    WideBlockCipher cipher;
    Rng rng(16, Stream::Test);
    const InterlockParty a{1, Bytes{9, 9, 9}};
    const InterlockParty b{2, Bytes{9, 9, 9}};
    const Bytes material{10, 20, 30, 40, 50, 60};
    const auto accept_all = [](std::span<const std::uint8_t>) { return true; };

    DirectChannel honest;
    const auto ok = interlock_exchange(a, b, material, cipher, honest, accept_all);
    CHECK(ok.verified());
    CHECK(ok.recovered == material);
    CHECK(ok.packets_sent == 3);

    DirectChannel withhold([](Packet p) -> std::optional<Packet>
                           {
                               if (p.kind == PacketKind::KeyHalf2)
                                   return std::nullopt;
                               return p;
                           });
    const auto lost = interlock_exchange(a, b, material, cipher, withhold, accept_all);
    CHECK_FALSE(lost.verified());
    CHECK(lost.error == InterlockError::Timeout);
    CHECK(lost.recovered.empty());

    DirectChannel late([](Packet p) -> std::optional<Packet>
                       {
                           p.timestamp += 1.0;
                           return p;
                       });
    CHECK(interlock_exchange(a, b, material, cipher, late, accept_all, 0.0, 0.5).error == InterlockError::Timeout);

    DirectChannel tamper([&](Packet p) -> std::optional<Packet>
                         {
                             if (p.kind == PacketKind::KeyHalf2)
                                 p.payload.back() ^= 1;
                             return p;
                         });
    CHECK(interlock_exchange(a, b, material, cipher, tamper, accept_all).error == InterlockError::IntegrityFailure);

    const auto reject = [](std::span<const std::uint8_t>) { return false; };
    CHECK(interlock_exchange(a, b, material, cipher, honest, reject).error == InterlockError::CommitmentMismatch);

    const InterlockParty wrong{2, Bytes{1}};
    CHECK(interlock_exchange(a, wrong, material, cipher, honest, accept_all).error == InterlockError::IntegrityFailure);
}

TEST_CASE("ordinary sync traffic is accepted")
{
    NetworkConfig c;
    const std::vector<NodeId> members{4, 5, 6};
    ChAuthState st(1, members);
    for (int k = 0; k < 20; ++k)
        CHECK(check_sync_packet(st, sync_from(5), k * c.duty_period() + 0.125, c) == SyncVerdict::Accept);
    CHECK(st.mode == ChMode::Normal);
    CHECK(check_sync_packet(st, sync_from(99), 30.0, c) == SyncVerdict::Reject);
    Packet data;
    CHECK_THROWS_AS(check_sync_packet(st, data, 0.0, c), std::invalid_argument);
}

TEST_CASE("sync flood trips the count threshold on the first crossing")
{
    NetworkConfig c;
    c.sync_interval_threshold = 0.0;
    const std::vector<NodeId> members{4, 5};
    ChAuthState st(1, members);
    const auto n = 10 * c.sync_count_threshold;
    const double gap = c.duty_period() / static_cast<double>(n + 1);
    std::int64_t crossing = -1;
    for (std::int64_t k = 0; k < n; ++k)
    {
        const auto v = check_sync_packet(st, sync_from(4), static_cast<double>(k) * gap, c);
        if (v == SyncVerdict::EnterAuthMode && crossing < 0)
            crossing = k;
        if (crossing < 0)
            CHECK(v == SyncVerdict::Accept);
    }
    CHECK(crossing == c.sync_count_threshold);
    CHECK(st.mode == ChMode::AuthMode);
}

TEST_CASE("close inter-arrival trips the interval threshold")
{
    NetworkConfig c;
    const std::vector<NodeId> members{4};
    ChAuthState st(1, members);
    CHECK(check_sync_packet(st, sync_from(4), 1.0, c) == SyncVerdict::Accept);
    CHECK(check_sync_packet(st, sync_from(4), 1.0 + c.sync_interval_threshold / 2, c) == SyncVerdict::EnterAuthMode);
}

TEST_CASE("tokens")
{
    const std::vector<NodeId> members{4, 5, 6};
    ChAuthState st(1, members);
    CHECK_THROWS_AS(authenticate_member(st, sync_from(4)), std::logic_error);
    st.mode = ChMode::AuthMode;
    Rng rng(17, Stream::Test);
    const auto round1 = issue_tokens(st, rng);
    REQUIRE(round1.size() == 3);

    // Valid echo, spent after use.
    CHECK(authenticate_member(st, sync_from(4, round1[0].second)) == TokenVerdict::Valid);
    CHECK(authenticate_member(st, sync_from(4, round1[0].second)) == TokenVerdict::Flagged);
    CHECK(st.is_flagged(4));

    // Stale token from the previous issue.
    const auto round2 = issue_tokens(st, rng);
    CHECK(round2.size() == 2);
    CHECK(authenticate_member(st, sync_from(5, round1[1].second)) == TokenVerdict::Flagged);

    // No token at all.
    CHECK(authenticate_member(st, sync_from(6)) == TokenVerdict::Flagged);
    CHECK(issue_tokens(st, rng).empty());
}

TEST_CASE("sink verification")
{
    Rng rng(18, Stream::Test);
    WideBlockCipher cipher;
    const auto keys = make_sink_keys(32, 10, rng);
    REQUIRE(keys.registered_f.size() == 10);
    for (const auto &[id, f] : keys.registered_f)
    {
        CHECK(f >= 2);
        CHECK(f <= keys.v() - 2);
    }
    const auto &f = keys.registered_f.at(3);
    const BigInt session = random_below(keys.v(), rng);
    const auto material = seal_key_material(f, session, keys.rsa);
    CHECK(material.size() == 2 * ((keys.rsa.modulus_bits() + 7) / 8));
    const auto opened = open_key_material(material, keys);
    REQUIRE(opened.has_value());
    CHECK(opened->f == f);
    CHECK(opened->session_key == session);

    const auto sk = to_bytes(session);
    const Bytes payload{'h', 'e', 'l', 'l', 'o'};
    const auto report = build_report(3, f, keys.v(), payload, sk, cipher);
    CHECK(sink_verify(report, keys, sk, cipher) == SinkVerdict::Accepted);

    int rejected = 0;
    for (int i = 0; i < 100; ++i)
    {
        BigInt guess = random_below(keys.v(), rng);
        if (guess == f || guess == keys.v() - f)
            continue;
        auto forged = build_report(3, guess, keys.v(), payload, sk, cipher);
        rejected += sink_verify(forged, keys, sk, cipher) == SinkVerdict::Rejected;
    }
    CHECK(rejected == 100);

    auto flipped = report;
    flipped.payload[0] ^= 1;
    CHECK(sink_verify(flipped, keys, sk, cipher) == SinkVerdict::Rejected);

    auto unknown = report;
    unknown.ch_id = 77;
    CHECK(sink_verify(unknown, keys, sk, cipher) == SinkVerdict::Rejected);
}
