#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace dossim
{
    /// Independent random streams. Each purpose draws from its own generator so that,
    /// for example, enabling the defense does not shift the deployment or election draws.
    enum class Stream : std::uint64_t
    {
        Deployment = 1,
        AttackerSelection = 2,
        Election = 3,
        Firefly = 4,
        Attack = 5,
        Tokens = 6,
        Keys = 7,
        Session = 8,
        Test = 99,
    };

    inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
    {
        x += 0x9E3779B97F4A7C15ull;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
        return x ^ (x >> 31);
    }

    /// Seeded generator with distribution code written out explicitly; the standard
    /// distributions are implementation-defined and would break cross-platform replay.
    class Rng
    {
    public:
        explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

        Rng(std::uint64_t seed, Stream stream, std::initializer_list<std::uint64_t> path = {})
            : engine_(derive(seed, stream, path))
        {
        }

        std::uint64_t next_u64() { return engine_(); }

        /// Uniform in [0, 1) with 53 random bits.
        double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

        double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

        /// Uniform integer in [0, n); n must be > 0.
        std::uint64_t below(std::uint64_t n)
        {
            const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
            std::uint64_t r = 0;
            do
                r = engine_();
            while (r >= limit);
            return r % n;
        }

        static std::uint64_t derive(std::uint64_t seed, Stream stream, std::initializer_list<std::uint64_t> path)
        {
            std::uint64_t h = splitmix64(seed ^ 0x6a09e667f3bcc909ull);
            h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
            for (auto p : path)
                h = splitmix64(h ^ p);
            return h;
        }

    private:
        std::mt19937_64 engine_;
    };
}
