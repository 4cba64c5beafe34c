#pragma once

#include "dossim/config.hpp"
#include "dossim/types.hpp"

#include <cstdint>
#include <vector>

namespace dossim
{
    /// Sensor nodes (ids 0..n-1) plus the mobile sink (id n).
    struct Network
    {
        std::vector<SensorNode> nodes;
        SensorNode sink;

        std::size_t attacker_count() const noexcept;
        friend bool operator==(const Network &, const Network &) = default;
    };

    /// floor(node_count * attack_ratio), robust to the ratio not being exactly representable.
    std::int64_t attacker_quota(std::int64_t node_count, double attack_ratio) noexcept;

    Network deploy_network(const NetworkConfig &config, std::uint64_t seed);
}
