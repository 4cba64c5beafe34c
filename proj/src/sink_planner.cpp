#include "dossim/sink_planner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dossim::sink
{
    double phi(double xi, double t_dc, double d_s) noexcept
    {
        return xi * t_dc * d_s;
    }

    double max_collection_time(std::span<const std::int64_t> members, std::span<const double> rates, double phi)
    {
        if (members.size() != rates.size())
            throw std::invalid_argument("members and rates differ in length");
        double sum = 0.0;
        for (std::size_t i = 0; i < members.size(); ++i)
        {
            if (!(rates[i] > 0.0))
                throw ZeroRate();
            sum += static_cast<double>(members[i]) / rates[i];
        }
        return phi * sum;
    }

    namespace
    {
        std::int64_t ceil_slots(double bits, double slot_time, double rate)
        {
            if (!(rate > 0.0))
                throw ZeroRate();
            if (!(slot_time > 0.0))
                throw std::invalid_argument("slot time must be > 0");
            if (bits <= 0.0)
                return 0;
            const double q = bits / (slot_time * rate);
            // Strip representation noise so exact quotients do not round up a full slot.
            return static_cast<std::int64_t>(std::ceil(q * (1.0 - 1e-12)));
        }
    }

    std::int64_t active_neurons(double phi, std::int64_t c_i, double slot_time, double r_i)
    {
        return ceil_slots(phi * static_cast<double>(c_i), slot_time, r_i);
    }

    std::int64_t total_neurons(std::int64_t neuron_on, std::int64_t k, std::int64_t m) noexcept
    {
        return neuron_on * k * m;
    }

    std::int64_t SinkPlan::total_slots() const noexcept
    {
        std::int64_t total = 0;
        for (const auto &s : stops)
            total += s.dwell_slots;
        return total;
    }

    std::vector<Vec2> candidate_stop_points(const NetworkConfig &config)
    {
        const auto k = static_cast<std::size_t>(config.stop_points_k);
        const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(k)) - 1e-9));
        const auto rows = (k + cols - 1) / cols;
        std::vector<Vec2> points;
        points.reserve(k);
        for (std::size_t r = 0; r < rows && points.size() < k; ++r)
            for (std::size_t c = 0; c < cols && points.size() < k; ++c)
                points.push_back({(static_cast<double>(c) + 0.5) * config.field_width / static_cast<double>(cols),
                                  (static_cast<double>(r) + 0.5) * config.field_height / static_cast<double>(rows)});
        return points;
    }

    std::int64_t required_slots(const ChLoad &load, double phi, double slot_time)
    {
        return ceil_slots(phi * static_cast<double>(load.members) + load.carry_bits, slot_time, load.rate);
    }

    namespace
    {
        struct Demand
        {
            NodeId ch_id;
            std::int64_t slots;
            std::vector<std::size_t> options; // in-range candidates, nearest first
        };

        bool search(const std::vector<Demand> &demands, std::size_t at, std::vector<std::int64_t> &free,
                    std::vector<std::size_t> &choice, std::size_t &budget)
        {
            if (at == demands.size())
                return true;
            for (auto cand : demands[at].options)
            {
                if (budget == 0)
                    return false;
                --budget;
                if (free[cand] < demands[at].slots)
                    continue;
                free[cand] -= demands[at].slots;
                choice[at] = cand;
                if (search(demands, at + 1, free, choice, budget))
                    return true;
                free[cand] += demands[at].slots;
            }
            return false;
        }
    }

    SinkPlan plan_sink_tour(std::span<const ChLoad> loads, const NetworkConfig &config, Vec2 sink_start)
    {
        const double T = config.slot_time_T;
        const double phi_bits = phi(config.aggregation_xi, config.t_dc, config.data_rate_ds);
        const auto capacity = config.dwell_units_s;
        const auto points = candidate_stop_points(config);
        if (points.empty())
            throw Infeasible("no candidate stop points");

        SinkPlan plan;
        std::vector<std::int64_t> members;
        std::vector<double> rates;
        for (const auto &l : loads)
        {
            members.push_back(l.members);
            rates.push_back(l.rate);
        }
        plan.t_dr_max = max_collection_time(members, rates, phi_bits);

        std::vector<ChLoad> sorted(loads.begin(), loads.end());
        std::sort(sorted.begin(), sorted.end(), [](const ChLoad &a, const ChLoad &b) { return a.ch_id < b.ch_id; });

        std::vector<Demand> demands;
        double carried_time = 0.0;
        for (const auto &l : sorted)
        {
            const auto slots = required_slots(l, phi_bits, T);
            carried_time += l.carry_bits / l.rate;
            if (slots == 0)
                continue;
            if (slots > capacity)
                throw Infeasible("CH " + std::to_string(l.ch_id) + " needs " + std::to_string(slots) +
                                 " slots, more than the per-stop capacity");
            Demand d{l.ch_id, slots, {}};
            for (std::size_t c = 0; c < points.size(); ++c)
                if (distance(points[c], l.position) <= l.tx_range)
                    d.options.push_back(c);
            if (d.options.empty())
                throw Infeasible("no stop point within range of CH " + std::to_string(l.ch_id));
            std::stable_sort(d.options.begin(), d.options.end(), [&](std::size_t a, std::size_t b)
                             { return distance(points[a], l.position) < distance(points[b], l.position); });
            demands.push_back(std::move(d));
        }

        // Greedy: nearest point with spare capacity.
        std::vector<std::int64_t> free(points.size(), capacity);
        std::vector<std::size_t> choice(demands.size(), 0);
        bool greedy_ok = true;
        for (std::size_t i = 0; i < demands.size() && greedy_ok; ++i)
        {
            greedy_ok = false;
            for (auto cand : demands[i].options)
            {
                if (free[cand] >= demands[i].slots)
                {
                    free[cand] -= demands[i].slots;
                    choice[i] = cand;
                    greedy_ok = true;
                    break;
                }
            }
        }
        if (!greedy_ok)
        {
            std::fill(free.begin(), free.end(), capacity);
            std::size_t budget = 2'000'000;
            if (!search(demands, 0, free, choice, budget))
                throw Infeasible(budget == 0 ? "assignment search budget exhausted" : "per-stop capacity exceeded");
        }

        std::vector<Stop> by_candidate(points.size());
        for (std::size_t c = 0; c < points.size(); ++c)
        {
            by_candidate[c].point = points[c];
            by_candidate[c].candidate = c;
        }
        for (std::size_t i = 0; i < demands.size(); ++i)
        {
            auto &stop = by_candidate[choice[i]];
            stop.served_chs.push_back({demands[i].ch_id, demands[i].slots});
            stop.dwell_slots += demands[i].slots;
        }

        std::vector<std::size_t> pending;
        for (std::size_t c = 0; c < points.size(); ++c)
            if (by_candidate[c].dwell_slots > 0)
                pending.push_back(c);

        Vec2 here = sink_start;
        double travelled = 0.0;
        while (!pending.empty())
        {
            auto best = pending.begin();
            for (auto it = pending.begin(); it != pending.end(); ++it)
                if (distance(here, points[*it]) < distance(here, points[*best]))
                    best = it;
            travelled += distance(here, points[*best]);
            here = points[*best];
            plan.stops.push_back(std::move(by_candidate[*best]));
            pending.erase(best);
        }

        plan.total_time = static_cast<double>(plan.total_slots()) * T;
        plan.travel_time = config.sink_speed > 0.0 ? travelled / config.sink_speed : 0.0;

        // Whole slots overshoot the continuous bound by less than one slot per CH.
        const double quantized_bound =
            plan.t_dr_max + carried_time + static_cast<double>(demands.size()) * T;
        if (plan.total_time > quantized_bound * (1.0 + 1e-12))
            throw Infeasible("collection time exceeds T_dr^max");
        return plan;
    }
}
