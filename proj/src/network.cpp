#include "dossim/network.hpp"

#include "dossim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dossim
{
    std::string_view to_string(RadioState s) noexcept
    {
        switch (s)
        {
        case RadioState::Sleep:
            return "sleep";
        case RadioState::Idle:
            return "idle";
        case RadioState::Rx:
            return "rx";
        case RadioState::Tx:
            return "tx";
        }
        return "?";
    }

    std::string_view to_string(Role r) noexcept
    {
        switch (r)
        {
        case Role::Normal:
            return "normal";
        case Role::ClusterHead:
            return "cluster_head";
        case Role::Sink:
            return "sink";
        }
        return "?";
    }

    std::string_view to_string(PacketKind k) noexcept
    {
        switch (k)
        {
        case PacketKind::Data:
            return "data";
        case PacketKind::Sync:
            return "sync";
        case PacketKind::SyncAuth:
            return "sync_auth";
        case PacketKind::AuthToken:
            return "auth_token";
        case PacketKind::TdmaSchedule:
            return "tdma_schedule";
        case PacketKind::KeyHalf1:
            return "key_half1";
        case PacketKind::KeyHalf2:
            return "key_half2";
        case PacketKind::Commitment:
            return "commitment";
        case PacketKind::Ack:
            return "ack";
        }
        return "?";
    }

    std::size_t Network::attacker_count() const noexcept
    {
        return static_cast<std::size_t>(
            std::count_if(nodes.begin(), nodes.end(), [](const SensorNode &n) { return n.is_attacker; }));
    }

    std::int64_t attacker_quota(std::int64_t node_count, double attack_ratio) noexcept
    {
        // 300 * 0.35 evaluates to 104.99999999999999 in binary floating point.
        const double exact = static_cast<double>(node_count) * attack_ratio;
        auto quota = static_cast<std::int64_t>(std::floor(exact + 1e-9 * std::max(1.0, exact)));
        return std::clamp<std::int64_t>(quota, 0, node_count);
    }

    Network deploy_network(const NetworkConfig &config, std::uint64_t seed)
    {
        config.validate();

        Network net;
        const auto n = static_cast<std::size_t>(config.node_count);
        net.nodes.reserve(n);

        Rng place(seed, Stream::Deployment);
        for (std::size_t i = 0; i < n; ++i)
        {
            SensorNode node;
            node.id = static_cast<NodeId>(i);
            node.position = {place.uniform(0.0, config.field_width), place.uniform(0.0, config.field_height)};
            node.tx_range = place.uniform(config.tx_range_min, config.tx_range_max);
            node.residual_energy = config.initial_energy;
            node.radio_state = RadioState::Idle;
            net.nodes.push_back(node);
        }

        // Partial Fisher-Yates: the first `quota` entries become attackers.
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng pick(seed, Stream::AttackerSelection);
        const auto quota = static_cast<std::size_t>(attacker_quota(config.node_count, config.attack_ratio));
        for (std::size_t i = 0; i < quota; ++i)
        {
            const auto j = i + static_cast<std::size_t>(pick.below(n - i));
            std::swap(order[i], order[j]);
            net.nodes[order[i]].is_attacker = true;
        }

        net.sink.id = static_cast<NodeId>(n);
        net.sink.role = Role::Sink;
        net.sink.position = {config.field_width / 2.0, config.field_height / 2.0};
        net.sink.residual_energy = 0.0;
        net.sink.tx_range = config.tx_range_max;
        net.sink.radio_state = RadioState::Idle;
        return net;
    }
}
