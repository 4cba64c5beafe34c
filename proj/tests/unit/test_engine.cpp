#include "dossim/engine.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

using namespace dossim;
using namespace dossim::engine;

namespace
{
    Network line_network(const std::vector<Vec2> &positions, double energy = 45.0, double range = 200.0)
    {
        Network net;
        for (std::size_t i = 0; i < positions.size(); ++i)
        {
            SensorNode n;
            n.id = static_cast<NodeId>(i);
            n.position = positions[i];
            n.residual_energy = energy;
            n.tx_range = range;
            net.nodes.push_back(n);
        }
        net.sink.id = static_cast<NodeId>(positions.size());
        net.sink.role = Role::Sink;
        net.sink.position = {45, 45};
        net.sink.tx_range = range;
        return net;
    }

    NetworkConfig small_config(double sim_time = 20.0)
    {
        NetworkConfig c;
        c.sim_time = sim_time;
        c.stop_points_k = 4;
        return c;
    }

    Simulation scripted(const NetworkConfig &c, Network net, NodeId head, EventLog *log)
    {
        SimulationOptions o;
        o.network = std::move(net);
        o.head_selector = [head](std::int64_t, const Network &) { return std::vector<NodeId>{head}; };
        o.log = log;
        return Simulation(c, 1, std::move(o));
    }

    std::vector<const LogRecord *> of_kind(const MemoryLog &log, std::string_view kind)
    {
        std::vector<const LogRecord *> out;
        for (const auto &r : log.records())
            if (r.kind == kind)
                out.push_back(&r);
        return out;
    }
}

TEST_CASE("event queue ordering")
{
    EventQueue q;
    auto make = [](double t, EventKind k, NodeId n)
    {
        Event e;
        e.time = t;
        e.kind = k;
        e.node = n;
        return e;
    };
    q.push(make(1.0, EventKind::PacketDelivery, 5));
    q.push(make(1.0, EventKind::NodeDeath, 0));
    q.push(make(1.0, EventKind::PacketDelivery, 2));
    q.push(make(0.5, EventKind::NodeDeath, 9));
    q.push(make(1.0, EventKind::RoundPhaseChange, 7));
    q.push(make(1.0, EventKind::PacketDelivery, 2));

    std::vector<std::tuple<double, EventKind, NodeId, std::uint64_t>> order;
    while (!q.empty())
    {
        const auto e = q.pop();
        order.emplace_back(e.time, e.kind, e.node, e.seq);
    }
    REQUIRE(order.size() == 6);
    CHECK(std::get<2>(order[0]) == 9);
    CHECK(std::get<1>(order[1]) == EventKind::RoundPhaseChange);
    CHECK(std::get<2>(order[2]) == 2);
    CHECK(std::get<2>(order[3]) == 2);
    CHECK(std::get<3>(order[2]) < std::get<3>(order[3]));
    CHECK(std::get<2>(order[4]) == 5);
    CHECK(std::get<1>(order[5]) == EventKind::NodeDeath);
}

TEST_CASE("delivery outcomes and who pays")
{
    NetworkConfig c;
    auto net = line_network({{0, 0}, {10, 0}, {300, 0}}, 45.0, 150.0);
    std::vector<energy::EnergyLedger> l{{0, 45.0}, {1, 45.0}, {2, 45.0}};
    Packet p;
    p.size = 512;

    CHECK(deliver(p, net.nodes[0], l[0], net.nodes[1], l[1], c) == Delivery::Delivered);
    CHECK(l[0].spent_tx() == doctest::Approx(4096 * 1e-7 + 4096 * 20e-12 * 100));
    CHECK(l[1].spent_rx() == doctest::Approx(4096 * 1e-7));

    net.nodes[0].tx_range = 250.0;
    const double before = l[0].spent_tx();
    CHECK(deliver(p, net.nodes[0], l[0], net.nodes[2], l[2], c) == Delivery::OutOfRange);
    CHECK(l[0].spent_tx() - before == doctest::Approx(4096 * 1e-7 + 4096 * 0.0015e-12 * std::pow(300.0, 4)));
    CHECK(l[2].spent_rx() == 0.0);

    net.nodes[1].radio_state = RadioState::Sleep;
    const double rx_before = l[1].spent_rx();
    CHECK(deliver(p, net.nodes[0], l[0], net.nodes[1], l[1], c) == Delivery::ReceiverAsleep);
    CHECK(l[1].spent_rx() == rx_before);

    net.nodes[1].radio_state = RadioState::Idle;
    net.nodes[1].alive = false;
    CHECK(classify_delivery(net.nodes[0], net.nodes[1]) == Delivery::ReceiverDead);
}

TEST_CASE("fixed-power mode charges power times airtime")
{
    NetworkConfig c;
    c.fixed_power_mode = true;
    CHECK(packet_tx_energy(4096, 123.0, c) == doctest::Approx(c.tx_power * 4096 / c.channel_rate));
    CHECK(packet_rx_energy(4096, c) == doctest::Approx(c.rx_power * 4096 / c.channel_rate));
}

TEST_CASE("zero simulated time")
{
    NetworkConfig c;
    c.sim_time = 0.0;
    const auto r = run_simulation(c, 1).report;
    CHECK(r.rounds_completed == 0);
    CHECK(r.residual_energy_percent == 100.0);
    CHECK(r.throughput_kbps == 0.0);
    CHECK(r.pdr_percent == 100.0);
}

TEST_CASE("clean default network")
{
    NetworkConfig c;
    const auto a = run_simulation(c, 42);
    CHECK(a.report.rounds_completed >= 1);
    CHECK(a.report.pdr_percent == 100.0);
    CHECK(a.report.detection_rate_percent == 100.0);
    CHECK(a.report.detection.fp == 0);
    const auto b = run_simulation(c, 42);
    CHECK(a.report == b.report);
    CHECK(a.events_processed == b.events_processed);
}

TEST_CASE("one CH and one member deliver end to end")
{
    const auto c = small_config();
    MemoryLog log;
    auto sim = scripted(c, line_network({{40, 40}, {50, 50}}), 0, &log);
    REQUIRE(sim.run_round());
    CHECK(sim.sink_accepted() == 1);
    CHECK(sim.sink_rejected() == 0);
    const auto r = sim.report();
    const auto per_round = static_cast<std::int64_t>(std::ceil(c.t_dc * c.data_rate_ds / (8.0 * c.packet_size)));
    CHECK(r.sent[1] == per_round);
    CHECK(r.received[1] == per_round);
    CHECK(r.sent[0] == 0);
    CHECK(r.pdr_percent == 100.0);
    CHECK(of_kind(log, "sink_accept").size() == 1);
}

TEST_CASE("TDMA members transmit only inside their slots")
{
    const auto c = small_config();
    MemoryLog log;
    auto sim = scripted(c, line_network({{45, 45}, {40, 40}, {50, 40}, {45, 55}}), 0, &log);
    sim.run_round();
    const double slot = c.t_dc / 3.0;
    std::map<NodeId, int> counted;
    for (const auto *rec : of_kind(log, "data_sent"))
    {
        const auto k = rec->node - 1; // members 1..3 in id order
        const double start = c.t_cf + k * slot;
        CHECK(rec->time >= start);
        CHECK(rec->time < start + slot);
        ++counted[rec->node];
    }
    CHECK(counted.size() == 3);

    // Duty cycling: members are far from awake the whole round.
    double member_idle = 0.0;
    for (std::size_t i = 1; i < 4; ++i)
        member_idle += sim.ledgers()[i].spent_idle();
    CHECK(member_idle < 0.8 * 3 * sim.clock() * c.idle_power);
}

TEST_CASE("a flooding member is caught and its traffic dropped")
{
    auto c = small_config(40.0);
    c.attack_kinds = {AttackKind::SyncFlood};
    auto net = line_network({{45, 45}, {40, 40}, {50, 50}});
    net.nodes[2].is_attacker = true;
    MemoryLog log;
    auto sim = scripted(c, net, 0, &log);
    const auto r = sim.run().report;
    CHECK(of_kind(log, "auth_mode").size() >= 1);
    CHECK(sim.flagged()[2]);
    CHECK_FALSE(sim.flagged()[1]);
    CHECK(r.detection_rate_percent == 100.0);
    CHECK(r.pdr_percent == 100.0);
    CHECK(r.detection.fp == 0);
}

TEST_CASE("without the defense the flood keeps members awake")
{
    auto c = small_config(40.0);
    auto net = line_network({{45, 45}, {40, 40}, {50, 50}});
    net.nodes[2].is_attacker = true;
    auto defended = scripted(c, net, 0, nullptr);
    defended.run();
    c.defense_enabled = false;
    auto open = scripted(c, net, 0, nullptr);
    const auto r = open.run().report;
    CHECK(r.detection_rate_percent == 0.0);
    CHECK(open.ledgers()[1].spent_idle() > defended.ledgers()[1].spent_idle());
}

TEST_CASE("a CH dying mid-round ends its episode at the death")
{
    auto c = small_config(30.0);
    auto net = line_network({{45, 45}, {40, 40}});
    net.nodes[0].residual_energy = 0.2; // idle drain empties it a few seconds in
    MemoryLog log;
    auto sim = scripted(c, net, 0, &log);
    const auto r = sim.run().report;
    const auto deaths = of_kind(log, "node_death");
    REQUIRE(!deaths.empty());
    CHECK(deaths.front()->node == 0);
    const double died = deaths.front()->time;
    CHECK(died == doctest::Approx(0.2 / c.idle_power).epsilon(0.05));
    const auto episodes = of_kind(log, "episode");
    REQUIRE(episodes.size() >= 1);
    CHECK(episodes.front()->node == 0);
    CHECK(episodes.front()->detail.at("end").get<double>() == died);
    CHECK(r.network_lifetime_s == doctest::Approx(died));
    CHECK(sim.ledgers()[0].residual() == 0.0);
}

TEST_CASE("energy is conserved per node")
{
    NetworkConfig c;
    c.node_count = 60;
    c.attack_ratio = 0.2;
    c.sim_time = 30.0;
    Simulation sim(c, 3);
    sim.run();
    for (const auto &l : sim.ledgers())
    {
        CHECK(l.residual() >= 0.0);
        CHECK(l.spent_total() + l.residual() == doctest::Approx(l.initial()).epsilon(1e-12));
    }
}

TEST_CASE("log replay reproduces the inline report")
{
    for (std::uint64_t seed : {1u, 2u})
    {
        NetworkConfig c;
        c.node_count = 80;
        c.attack_ratio = 0.15;
        c.sim_time = 25.0;
        c.defense_enabled = seed == 1;
        MemoryLog log;
        const auto r = run_simulation(c, seed, &log).report;
        CHECK(metrics::recompute_from_log(log.records()) == r);
    }
}
