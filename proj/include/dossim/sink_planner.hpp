#pragma once

#include "dossim/config.hpp"
#include "dossim/types.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dossim::sink
{
    class ZeroRate : public std::invalid_argument
    {
    public:
        ZeroRate() : std::invalid_argument("cluster head transfer rate must be > 0") {}
    };

    class Infeasible : public std::runtime_error
    {
    public:
        explicit Infeasible(const std::string &why) : std::runtime_error("sink plan infeasible: " + why) {}
    };

    /// Aggregated payload per cluster member per round: xi * T_dc * d_s bits.
    double phi(double xi, double t_dc, double d_s) noexcept;

    /// Upper bound on collection time: phi * sum(C_i / r_i).
    double max_collection_time(std::span<const std::int64_t> members, std::span<const double> rates, double phi);

    /// Slots needed to drain CH i: ceil(phi*C_i / (T*r_i)).
    std::int64_t active_neurons(double phi, std::int64_t c_i, double slot_time, double r_i);

    /// Full planning grid size: neuron_on * k * m.
    std::int64_t total_neurons(std::int64_t neuron_on, std::int64_t k, std::int64_t m) noexcept;

    /// What the planner needs to know about one cluster head.
    struct ChLoad
    {
        NodeId ch_id = 0;
        Vec2 position;
        double tx_range = 0.0;
        std::int64_t members = 0;
        double rate = 0.0;       // bits/s
        double carry_bits = 0.0; // data still buffered from an earlier round
    };

    struct ServedCh
    {
        NodeId ch_id = 0;
        std::int64_t slots = 0;

        friend bool operator==(const ServedCh &, const ServedCh &) = default;
    };

    struct Stop
    {
        Vec2 point;
        std::size_t candidate = 0; // index into candidate_stop_points()
        std::int64_t dwell_slots = 0;
        std::vector<ServedCh> served_chs; // service order within the stop

        friend bool operator==(const Stop &, const Stop &) = default;
    };

    struct SinkPlan
    {
        std::vector<Stop> stops; // tour order
        double total_time = 0.0; // sum(dwell_slots) * T
        double t_dr_max = 0.0;
        double travel_time = 0.0; // outside the collection-time accounting

        std::int64_t total_slots() const noexcept;
        friend bool operator==(const SinkPlan &, const SinkPlan &) = default;
    };

    /// ceil(sqrt(K)) columns, enough rows for K points, cell centres in row-major order.
    std::vector<Vec2> candidate_stop_points(const NetworkConfig &config);

    /// Slots CH `load` needs, including carried-over data.
    std::int64_t required_slots(const ChLoad &load, double phi, double slot_time);

    /// Nearest in-range stop per CH (falling back to the next-nearest with spare
    /// capacity, then to an exhaustive search), at most S slots per stop, visited in
    /// nearest-neighbour order from `sink_start`.
    SinkPlan plan_sink_tour(std::span<const ChLoad> loads, const NetworkConfig &config, Vec2 sink_start);
}
