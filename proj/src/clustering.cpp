#include "dossim/clustering.hpp"

#include <algorithm>
#include <cmath>

namespace dossim::clustering
{
    std::int64_t rotation_period(double z) noexcept
    {
        const double inv = 1.0 / z;
        return static_cast<std::int64_t>(std::ceil(inv - 1e-9 * inv));
    }

    double leach_threshold(double z, std::int64_t round, bool eligible) noexcept
    {
        if (!eligible)
            return 0.0;
        const auto phase = static_cast<double>(round % rotation_period(z));
        const double denom = 1.0 - z * phase;
        if (denom <= 0.0)
            return 1.0;
        return std::clamp(z / denom, 0.0, 1.0);
    }

    Election elect_cluster_heads(std::span<const SensorNode> nodes, std::int64_t round, double z, Rotation &rotation, Rng &rng)
    {
        const auto period = rotation_period(z);
        Election out;
        for (const auto &node : nodes)
        {
            const double u = rng.uniform01();
            if (!node.alive)
                continue;
            if (u < leach_threshold(z, round, rotation.eligible(node.id, round)))
                out.heads.push_back(node.id);
        }

        if (out.heads.empty())
        {
            const SensorNode *best = nullptr;
            for (const auto &node : nodes)
            {
                if (!node.alive || rotation.excluded(node.id))
                    continue;
                if (best == nullptr || node.residual_energy > best->residual_energy)
                    best = &node;
            }
            if (best == nullptr)
                throw NoAliveNodes();
            out.heads.push_back(best->id);
            out.forced = true;
        }

        for (auto id : out.heads)
            rotation.mark_elected(id, round, period);
        return out;
    }

    Vec2 firefly_step(Vec2 pos_i, Vec2 pos_j, double beta, double gamma, double alpha, Rng &rng)
    {
        const double attraction = beta * std::exp(-gamma * distance_sq(pos_i, pos_j));
        const double noise_x = alpha * (rng.uniform01() - 0.5);
        const double noise_y = alpha * (rng.uniform01() - 0.5);
        return {pos_i.x + attraction * (pos_j.x - pos_i.x) + noise_x,
                pos_i.y + attraction * (pos_j.y - pos_i.y) + noise_y};
    }

    double intensity(double i0, double gamma, double s) noexcept
    {
        return i0 / (1.0 + gamma * s * s);
    }

    bool in_range(const SensorNode &a, const SensorNode &b) noexcept
    {
        return distance(a.position, b.position) <= std::min(a.tx_range, b.tx_range);
    }

    FireflyState evaluate_candidates(const SensorNode &node, std::span<const SensorNode *const> heads,
                                     const NetworkConfig &config, Rng &rng)
    {
        FireflyState state;
        for (const SensorNode *ch : heads)
        {
            if (!in_range(node, *ch))
                continue;
            // The CH location is pulled toward the node; the residual gap drives the intensity.
            const Vec2 moved = firefly_step(ch->position, node.position, config.firefly_beta, config.firefly_gamma,
                                            config.firefly_alpha, rng);
            const double s = distance(node.position, moved);
            state.ch_ids.push_back(ch->id);
            state.candidate_positions.push_back(moved);
            state.distances.push_back(s);
            state.intensities.push_back(intensity(config.firefly_i0, config.firefly_gamma, s));
        }
        return state;
    }

    Formation form_clusters(std::span<const SensorNode> nodes, std::span<const NodeId> ch_ids, const NetworkConfig &config,
                            Rng &rng, const std::function<bool(const SensorNode &)> &joins)
    {
        std::vector<NodeId> sorted_ids(ch_ids.begin(), ch_ids.end());
        std::sort(sorted_ids.begin(), sorted_ids.end());

        std::vector<const SensorNode *> heads;
        heads.reserve(sorted_ids.size());
        for (auto id : sorted_ids)
            heads.push_back(&nodes[static_cast<std::size_t>(id)]);

        Formation out;
        out.clusters.reserve(heads.size());
        for (const auto *ch : heads)
            out.clusters.push_back(Cluster{ch->id, {}, {}});

        for (const auto &node : nodes)
        {
            if (!node.alive || std::binary_search(sorted_ids.begin(), sorted_ids.end(), node.id))
                continue;
            if (joins && !joins(node))
                continue;

            const auto state = evaluate_candidates(node, heads, config, rng);
            if (state.ch_ids.empty())
            {
                out.unclustered.push_back(node.id);
                continue;
            }

            // Intensity is strictly decreasing in s; comparing s as well keeps the nearer
            // CH when both intensities round to the same double.
            std::size_t best = 0;
            for (std::size_t c = 1; c < state.ch_ids.size(); ++c)
            {
                if (state.intensities[c] > state.intensities[best] ||
                    (state.intensities[c] == state.intensities[best] && state.distances[c] < state.distances[best]))
                    best = c;
            }

            const auto pos = std::lower_bound(sorted_ids.begin(), sorted_ids.end(), state.ch_ids[best]) - sorted_ids.begin();
            out.clusters[static_cast<std::size_t>(pos)].member_ids.push_back(node.id);
        }

        for (auto &cluster : out.clusters)
            cluster.tdma_order = cluster.member_ids; // ascending id: nodes were visited in id order
        return out;
    }
}
