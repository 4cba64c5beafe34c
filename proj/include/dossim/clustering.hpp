#pragma once

#include "dossim/config.hpp"
#include "dossim/rng.hpp"
#include "dossim/types.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace dossim::clustering
{
    struct Cluster
    {
        NodeId ch_id = 0;
        std::vector<NodeId> member_ids;
        std::vector<NodeId> tdma_order;

        friend bool operator==(const Cluster &, const Cluster &) = default;
    };

    /// Candidate CH positions after one firefly move toward a node, and the intensity
    /// the node computes for each of them.
    struct FireflyState
    {
        std::vector<NodeId> ch_ids;
        std::vector<Vec2> candidate_positions;
        std::vector<double> distances;
        std::vector<double> intensities;
    };

    struct Formation
    {
        std::vector<Cluster> clusters;
        std::vector<NodeId> unclustered;
    };

    class NoAliveNodes : public std::runtime_error
    {
    public:
        NoAliveNodes() : std::runtime_error("no alive node can serve as cluster head") {}
    };

    /// ceil(1/z), guarded against 1/z landing a hair above an integer.
    std::int64_t rotation_period(double z) noexcept;

    /// LEACH election threshold; 0 for nodes outside the eligible set G.
    double leach_threshold(double z, std::int64_t round, bool eligible) noexcept;

    /// Tracks set G: a node elected in round q is ineligible until round q + ceil(1/z).
    class Rotation
    {
    public:
        explicit Rotation(std::size_t node_count = 0) : eligible_from_(node_count, 0), excluded_(node_count, false) {}

        bool eligible(NodeId id, std::int64_t round) const noexcept
        {
            const auto i = static_cast<std::size_t>(id);
            return !excluded_[i] && round >= eligible_from_[i];
        }

        void mark_elected(NodeId id, std::int64_t round, std::int64_t period) noexcept
        {
            eligible_from_[static_cast<std::size_t>(id)] = round + period;
        }

        /// Permanently removes a node from G (flagged attackers).
        void exclude(NodeId id) noexcept { excluded_[static_cast<std::size_t>(id)] = true; }
        bool excluded(NodeId id) const noexcept { return excluded_[static_cast<std::size_t>(id)]; }

    private:
        std::vector<std::int64_t> eligible_from_;
        std::vector<bool> excluded_;
    };

    struct Election
    {
        std::vector<NodeId> heads; // ascending id
        bool forced = false;
    };

    /// Every node draws u in [0,1) (alive or not, so the draws line up across runs);
    /// alive eligible nodes with u < T(n) become CHs. If nobody is elected, the alive
    /// non-excluded node with the most residual energy is forced.
    Election elect_cluster_heads(std::span<const SensorNode> nodes, std::int64_t round, double z, Rotation &rotation, Rng &rng);

    /// pos_i + beta*exp(-gamma*r^2)*(pos_j - pos_i) + alpha*(rand - 1/2), componentwise.
    Vec2 firefly_step(Vec2 pos_i, Vec2 pos_j, double beta, double gamma, double alpha, Rng &rng);

    /// I0 / (1 + gamma*s^2)
    double intensity(double i0, double gamma, double s) noexcept;

    /// One-hop reachability between a node and a CH.
    bool in_range(const SensorNode &a, const SensorNode &b) noexcept;

    FireflyState evaluate_candidates(const SensorNode &node, std::span<const SensorNode *const> heads,
                                     const NetworkConfig &config, Rng &rng);

    /// Each joining node picks the reachable CH with maximum intensity (ties: lowest id).
    /// `joins` selects which non-CH nodes take part; by default every alive non-CH node.
    Formation form_clusters(std::span<const SensorNode> nodes, std::span<const NodeId> ch_ids, const NetworkConfig &config,
                            Rng &rng, const std::function<bool(const SensorNode &)> &joins = {});
}
