// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "dossim/cipher.hpp"
#include "dossim/clustering.hpp"
#include "dossim/energy.hpp"
#include "dossim/engine.hpp"
#include "dossim/harness.hpp"
#include "dossim/interlock.hpp"
#include "dossim/rsa.hpp"
#include "dossim/sink_planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace dossim;

namespace
{
    // Pinned tolerances.
    constexpr double kContinuityRel = 1e-12;
    constexpr double kLeachMean = 30.0;
    constexpr double kLeachBand = 3.0;
    constexpr std::int64_t kLeachWindow = 10;
    constexpr double kDrFloor = 90.0;
    constexpr double kDrNoise = 2.0;
    constexpr double kPdrMargin = 10.0;
    constexpr double kDefaultRunBudgetS = 10.0;

    struct Outcome
    {
        bool pass = true;
        std::string detail;
    };

    int failures = 0;

    void report(int id, const char *name, const Outcome &o, double seconds)
    {
        std::printf("criterion %2d %-28s %s  (%.1f s) %s\n", id, name, o.pass ? "PASS" : "FAIL", seconds, o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass)
            ++failures;
    }

    void run(int id, const char *name, const std::function<Outcome()> &check)
    {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try
        {
            o = check();
        }
        catch (const std::exception &e)
        {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        report(id, name, o, s);
    }

    std::string fmt(const char *f, double a, double b = 0.0, double c = 0.0)
    {
        char buf[256];
        std::snprintf(buf, sizeof buf, f, a, b, c);
        return buf;
    }

    Outcome energy_continuity()
    {
        Outcome o;
        for (auto preset : {EnergyPreset::SimulationTable, EnergyPreset::MetricSection})
        {
            NetworkConfig c;
            apply_energy_preset(c, preset);
            const double d0 = std::sqrt(c.eps_fs / c.eps_mp);
            const double bits = 4096.0;
            const double fs = bits * c.e_elec + bits * c.eps_fs * d0 * d0;
            const double mp = bits * c.e_elec + bits * c.eps_mp * d0 * d0 * d0 * d0;
            const double model_below = energy::tx_energy(4096, std::nextafter(d0, 0.0), c);
            const double model_above = energy::tx_energy(4096, std::nextafter(d0, 1e9), c);
            const double rel = std::abs(fs - mp) / fs;
            const double rel_model = std::abs(model_below - model_above) / model_below;
            const bool crossover_ok = std::abs(energy::crossover_distance(c) - d0) <= 1e-9 * d0;
            if (rel >= kContinuityRel || rel_model >= kContinuityRel || !crossover_ok)
                o.pass = false;
            o.detail += fmt("d0=%.5f rel=%.2e model=%.2e ", d0, rel, rel_model);
        }
        return o;
    }

    Outcome rsa_correctness()
    {
        using namespace security;
        // 16-bit modulus: 251 * 241 = 60491
        const auto small = rsa_keypair_from_primes(251, 241, 17);
        std::int64_t bad = 0;
        const auto n = small.modulus.get_ui();
        for (unsigned long m = 0; m < n; ++m)
            if (rsa_decrypt(rsa_encrypt(BigInt(m), small.modulus, small.en), small.modulus, small.de) != m)
                ++bad;
        std::int64_t trials = n;
        for (std::size_t bits : {64u, 128u, 512u})
            for (std::uint64_t k = 0; k < 10; ++k)
            {
                Rng krng(k, Stream::Keys, {bits});
                const auto key = rsa_keygen(bits / 2, krng);
                Rng mrng(k, Stream::Test, {bits});
                for (int i = 0; i < 1000; ++i)
                {
                    const BigInt m = random_below(key.modulus, mrng);
                    if (rsa_decrypt(rsa_encrypt(m, key.modulus, key.en), key.modulus, key.de) != m)
                        ++bad;
                    ++trials;
                }
            }
        return {bad == 0, fmt("%.0f roundtrips, %.0f failed", static_cast<double>(trials), static_cast<double>(bad))};
    }

    Outcome interlock_atomicity()
    {
        using namespace security;
        WideBlockCipher cipher;
        int honest_ok = 0;
        int withheld_failed = 0;
        int tampered_failed = 0;
        for (std::uint64_t t = 0; t < 100; ++t)
        {
            Rng rng(t, Stream::Test, {3});
            Bytes key(1 + rng.below(16));
            for (auto &b : key)
                b = static_cast<std::uint8_t>(rng.below(256));
            Bytes material(1 + rng.below(48));
            for (auto &b : material)
                b = static_cast<std::uint8_t>(rng.below(256));
            const InterlockParty a{1, key};
            const InterlockParty b{2, key};
            const auto matches = [&](std::span<const std::uint8_t> got)
            { return Bytes(got.begin(), got.end()) == material; };

            DirectChannel honest;
            const auto h = interlock_exchange(a, b, material, cipher, honest, matches);
            honest_ok += h.verified() && h.recovered == material;

            const auto half = rng.below(2) == 0 ? PacketKind::KeyHalf1 : PacketKind::KeyHalf2;
            DirectChannel withhold([&](Packet p) -> std::optional<Packet>
                                   {
                                       if (p.kind == half)
                                           return std::nullopt;
                                       return p;
                                   });
            const auto w = interlock_exchange(a, b, material, cipher, withhold, matches);
            withheld_failed += !w.verified() && w.recovered != material;

            const std::uint64_t pos = rng.next_u64();
            const auto bit = static_cast<std::uint8_t>(1u << rng.below(8));
            DirectChannel tamper([&](Packet p) -> std::optional<Packet>
                                 {
                                     if (p.kind == half && !p.payload.empty())
                                         p.payload[pos % p.payload.size()] ^= bit;
                                     return p;
                                 });
            const auto x = interlock_exchange(a, b, material, cipher, tamper, matches);
            tampered_failed += !x.verified() && x.recovered != material;
        }
        return {honest_ok == 100 && withheld_failed == 100 && tampered_failed == 100,
                fmt("honest %.0f/100, withheld %.0f/100, tampered %.0f/100", honest_ok, withheld_failed, tampered_failed)};
    }

    Outcome leach_statistics()
    {
        constexpr std::size_t n = 300;
        constexpr std::int64_t rounds = 200;
        double total = 0.0;
        std::int64_t violations = 0;
        std::int64_t across_epochs = 0;
        std::int64_t forced = 0;
        for (std::uint64_t seed = 1; seed <= 20; ++seed)
        {
            std::vector<SensorNode> nodes(n);
            for (std::size_t i = 0; i < n; ++i)
            {
                nodes[i].id = static_cast<NodeId>(i);
                nodes[i].residual_energy = 45.0;
            }
            clustering::Rotation rotation(n);
            Rng rng(seed, Stream::Election);
            std::vector<std::int64_t> last(n, -1'000'000);
            for (std::int64_t r = 0; r < rounds; ++r)
            {
                const auto e = clustering::elect_cluster_heads(nodes, r, 0.1, rotation, rng);
                total += static_cast<double>(e.heads.size());
                forced += e.forced;
                for (auto id : e.heads)
                {
                    auto &prev = last[static_cast<std::size_t>(id)];
                    if (r - prev < kLeachWindow && !e.forced)
                    {
                        ++violations;
                        across_epochs += prev / kLeachWindow != r / kLeachWindow;
                    }
                    prev = r;
                }
            }
        }
        const double mean = total / (20.0 * rounds);
        return {std::abs(mean - kLeachMean) <= kLeachBand && violations == 0,
                fmt("mean %.3f CHs/round, %.0f forced rounds, ", mean, static_cast<double>(forced)) +
                    fmt("%.0f re-elections inside the window (%.0f across an epoch boundary)", static_cast<double>(violations),
                        static_cast<double>(across_epochs))};
    }

    Outcome clustering_argmax()
    {
        NetworkConfig c;
        c.firefly_alpha = 0.0;
        std::int64_t wrong = 0;
        std::int64_t checked = 0;
        for (std::uint64_t layout = 0; layout < 100; ++layout)
        {
            Rng rng(layout, Stream::Test, {5});
            const std::size_t count = 20 + rng.below(80);
            std::vector<SensorNode> nodes(count);
            for (std::size_t i = 0; i < count; ++i)
            {
                nodes[i].id = static_cast<NodeId>(i);
                nodes[i].position = {rng.uniform(0, c.field_width), rng.uniform(0, c.field_height)};
                nodes[i].tx_range = c.tx_range_max;
                nodes[i].residual_energy = 1.0;
            }
            std::vector<NodeId> heads;
            const std::size_t h = 1 + rng.below(8);
            while (heads.size() < h)
            {
                const auto id = static_cast<NodeId>(rng.below(count));
                if (std::find(heads.begin(), heads.end(), id) == heads.end())
                    heads.push_back(id);
            }
            std::sort(heads.begin(), heads.end());
            for (auto id : heads)
                nodes[static_cast<std::size_t>(id)].role = Role::ClusterHead;

            Rng frng(layout, Stream::Firefly);
            const auto f = clustering::form_clusters(nodes, heads, c, frng);
            std::vector<NodeId> joined(count, kBroadcast);
            for (const auto &cl : f.clusters)
                for (auto m : cl.member_ids)
                    joined[static_cast<std::size_t>(m)] = cl.ch_id;
            for (const auto &node : nodes)
            {
                if (node.role == Role::ClusterHead)
                    continue;
                NodeId nearest = kBroadcast;
                double best = 1e300;
                for (auto id : heads)
                {
                    const double d = distance(node.position, nodes[static_cast<std::size_t>(id)].position);
                    if (d < best)
                    {
                        best = d;
                        nearest = id;
                    }
                }
                ++checked;
                wrong += joined[static_cast<std::size_t>(node.id)] != nearest;
            }
        }
        return {wrong == 0, fmt("%.0f joins checked, %.0f not nearest", static_cast<double>(checked), static_cast<double>(wrong))};
    }

    // Exhaustive assignment of CHs to in-range stops under the per-stop capacity.
    bool brute_force_feasible(const std::vector<std::int64_t> &slots, const std::vector<std::vector<bool>> &reach,
                              std::int64_t capacity, std::size_t stops)
    {
        const std::size_t m = slots.size();
        std::size_t combos = 1;
        for (std::size_t i = 0; i < m; ++i)
            combos *= stops;
        for (std::size_t code = 0; code < combos; ++code)
        {
            std::vector<std::int64_t> used(stops, 0);
            std::size_t rest = code;
            bool ok = true;
            for (std::size_t i = 0; i < m && ok; ++i)
            {
                const std::size_t s = rest % stops;
                rest /= stops;
                if (slots[i] == 0)
                    continue;
                ok = reach[i][s] && (used[s] += slots[i]) <= capacity;
            }
            if (ok)
                return true;
        }
        return false;
    }

    Outcome sink_plan_bookkeeping()
    {
        std::int64_t cases = 0;
        std::int64_t infeasible = 0;
        std::int64_t mismatches = 0;
        std::string first;
        for (std::int64_t m = 1; m <= 4; ++m)
            for (std::int64_t members = 0; members <= 10; ++members)
                for (std::int64_t k = 1; k <= 4; ++k)
                    for (std::uint64_t variant = 0; variant < 4; ++variant)
                    {
                        NetworkConfig c;
                        c.stop_points_k = k;
                        c.slot_time_T = 0.1;
                        c.dwell_units_s = 12;
                        Rng rng(static_cast<std::uint64_t>(m * 1000 + members * 10 + k), Stream::Test, {variant});
                        const double p = sink::phi(c.aggregation_xi, c.t_dc, c.data_rate_ds);
                        std::vector<sink::ChLoad> loads;
                        for (std::int64_t i = 0; i < m; ++i)
                        {
                            sink::ChLoad l;
                            l.ch_id = static_cast<NodeId>(10 + i);
                            l.position = {rng.uniform(0, c.field_width), rng.uniform(0, c.field_height)};
                            l.tx_range = rng.uniform(15.0, 80.0);
                            l.members = (members + 3 * i) % 11;
                            l.rate = p / c.slot_time_T * (0.5 + 0.25 * static_cast<double>(rng.below(4)));
                            loads.push_back(l);
                        }
                        const auto points = sink::candidate_stop_points(c);
                        std::vector<std::int64_t> want;
                        std::vector<std::vector<bool>> reach;
                        std::int64_t expected_total = 0;
                        for (const auto &l : loads)
                        {
                            const auto s = static_cast<std::int64_t>(std::ceil(p * static_cast<double>(l.members) / (c.slot_time_T * l.rate) - 1e-9));
                            want.push_back(s);
                            expected_total += s;
                            std::vector<bool> r;
                            for (const auto &pt : points)
                                r.push_back(distance(pt, l.position) <= l.tx_range);
                            reach.push_back(r);
                        }
                        const bool oracle = brute_force_feasible(want, reach, c.dwell_units_s, points.size());
                        ++cases;
                        bool ok = true;
                        try
                        {
                            const auto plan = sink::plan_sink_tour(loads, c, {0, 0});
                            ok = oracle && plan.total_slots() == expected_total;
                            for (const auto &stop : plan.stops)
                            {
                                ok = ok && stop.dwell_slots <= c.dwell_units_s;
                                for (const auto &s : stop.served_chs)
                                {
                                    const auto &l = loads[static_cast<std::size_t>(s.ch_id - 10)];
                                    ok = ok && distance(stop.point, l.position) <= l.tx_range &&
                                         s.slots == want[static_cast<std::size_t>(s.ch_id - 10)];
                                }
                            }
                        }
                        catch (const sink::Infeasible &)
                        {
                            ++infeasible;
                            ok = !oracle;
                        }
                        if (!ok)
                        {
                            ++mismatches;
                            if (first.empty())
                                first = fmt(" first m=%.0f C=%.0f k=%.0f", static_cast<double>(m), static_cast<double>(members),
                                            static_cast<double>(k));
                        }
                    }
        return {mismatches == 0, fmt("%.0f cases, %.0f infeasible, %.0f mismatches", static_cast<double>(cases),
                                     static_cast<double>(infeasible), static_cast<double>(mismatches)) + first};
    }

    std::vector<std::uint64_t> seeds(std::uint64_t n)
    {
        std::vector<std::uint64_t> s;
        for (std::uint64_t i = 1; i <= n; ++i)
            s.push_back(i);
        return s;
    }

    Outcome zero_attack_baseline()
    {
        harness::SweepSpec spec;
        spec.values = {0.0};
        spec.seeds = seeds(20);
        spec.schemes = {harness::Scheme::Defended};
        const auto rows = harness::run_sweep(NetworkConfig{}, spec, 1);
        double min_pdr = 100.0;
        double min_dr = 100.0;
        bool ok = true;
        for (const auto &r : rows)
        {
            ok = ok && r.report.pdr_percent == 100.0 && r.report.detection_rate_percent == 100.0;
            min_pdr = std::min(min_pdr, r.report.pdr_percent);
            min_dr = std::min(min_dr, r.report.detection_rate_percent);
        }
        return {ok, fmt("min PDR %.4f, min DR %.4f over 20 seeds", min_pdr, min_dr)};
    }

    Outcome attack_trends()
    {
        const std::vector<double> ratios{0.0, 0.05, 0.15, 0.25, 0.35};
        harness::SweepSpec spec;
        spec.values = ratios;
        spec.seeds = seeds(20);
        const auto table = harness::summarize(spec.axis, harness::run_sweep(NetworkConfig{}, spec, 1));
        const auto &def = table.cells.at("defended");
        const auto &und = table.cells.at("undefended");
        Outcome o;
        const auto &dr = def.at("dr");
        if (dr.back() < kDrFloor)
            o.pass = false;
        for (std::size_t i = 1; i < dr.size(); ++i)
            if (dr[i] > dr[i - 1] + kDrNoise)
                o.pass = false;
        for (std::size_t i = 1; i < ratios.size(); ++i)
        {
            if (def.at("pdr")[i] < und.at("pdr")[i] + kPdrMargin)
                o.pass = false;
            if (!(def.at("residual_pct")[i] > und.at("residual_pct")[i]))
                o.pass = false;
            if (def.at("lifetime_s")[i] < und.at("lifetime_s")[i])
                o.pass = false;
        }
        std::ostringstream s;
        s.precision(4);
        for (std::size_t i = 0; i < ratios.size(); ++i)
            s << "| r=" << ratios[i] << " DR " << dr[i] << " PDR " << def.at("pdr")[i] << "/" << und.at("pdr")[i] << " res "
              << def.at("residual_pct")[i] << "/" << und.at("residual_pct")[i] << " life " << def.at("lifetime_s")[i] << "/"
              << und.at("lifetime_s")[i] << " ";
        o.detail = s.str();
        return o;
    }

    Outcome determinism()
    {
        NetworkConfig base;
        base.node_count = 120;
        harness::SweepSpec spec;
        spec.values = {0.0, 0.2};
        spec.seeds = {3, 4};
        const auto a = harness::runs_csv(spec.axis, harness::run_sweep(base, spec, 1));
        const auto b = harness::runs_csv(spec.axis, harness::run_sweep(base, spec, 3));
        const auto sa = harness::summary_csv(harness::summarize(spec.axis, harness::run_sweep(base, spec, 2)));
        const auto sb = harness::summary_csv(harness::summarize(spec.axis, harness::run_sweep(base, spec, 1)));

        NetworkConfig one;
        one.attack_ratio = 0.25;
        std::ostringstream la;
        std::ostringstream lb;
        NdjsonLog log_a(la);
        NdjsonLog log_b(lb);
        const auto ra = engine::run_simulation(one, 9, &log_a);
        const auto rb = engine::run_simulation(one, 9, &log_b);
        const auto ca = harness::runs_csv(spec.axis, {{0.25, 9, harness::Scheme::Defended, ra.report}});
        const auto cb = harness::runs_csv(spec.axis, {{0.25, 9, harness::Scheme::Defended, rb.report}});
        const bool ok = a == b && sa == sb && ca == cb && la.str() == lb.str();
        return {ok, fmt("sweep csv %.0f bytes, event log %.0f bytes", static_cast<double>(a.size()),
                        static_cast<double>(la.str().size()))};
    }

    Outcome dual_accounting()
    {
        std::int64_t equal = 0;
        for (std::uint64_t i = 0; i < 10; ++i)
        {
            Rng rng(i, Stream::Test, {10});
            NetworkConfig c;
            c.node_count = 60 + static_cast<std::int64_t>(rng.below(240));
            c.attack_ratio = 0.4 * rng.uniform01();
            c.sim_time = 20.0 + rng.uniform(0, 50);
            c.defense_enabled = rng.below(4) != 0;
            c.fixed_power_mode = rng.below(4) == 0;
            c.attack_interval = rng.below(2) ? 0.0 : rng.uniform(0.5, 3.0);
            c.id_strategy = rng.below(2) ? IdStrategy::OwnId : IdStrategy::RandomForgedId;
            c.attack_target = rng.below(3) ? AttackTarget::OwnCluster : AttackTarget::Broadcast;
            if (rng.below(3) == 0)
                c.attack_kinds = {AttackKind::SyncFlood, AttackKind::SleepSyncReplay, AttackKind::DummyDataForgedId};
            c.validate();
            std::stringstream text;
            NdjsonLog log(text);
            const auto run = engine::run_simulation(c, 100 + i, &log);
            const auto records = parse_event_log(text);
            equal += metrics::recompute_from_log(records) == run.report;
        }
        return {equal == 10, fmt("%.0f/10 configs reproduce the inline report", static_cast<double>(equal))};
    }

    Outcome crypto_bench_shape()
    {
        harness::BenchOptions options;
        const auto rows = harness::run_crypto_bench(options);
        Outcome o;
        std::int64_t inversions = 0;
        for (auto chunk : options.chunk_sizes)
        {
            double enc = 0.0;
            double dec = 0.0;
            for (const auto &r : rows)
            {
                if (r.chunk_bytes != chunk)
                    continue;
                inversions += r.encrypt_ms < enc;
                inversions += r.decrypt_ms < dec;
                enc = r.encrypt_ms;
                dec = r.decrypt_ms;
            }
        }
        o.pass = inversions == 0 && rows.size() == options.key_sizes.size() * options.chunk_sizes.size();
        o.detail = fmt("%.0f rows, %.0f inversions", static_cast<double>(rows.size()), static_cast<double>(inversions));
        return o;
    }

    Outcome default_run_time()
    {
        const auto t0 = std::chrono::steady_clock::now();
        const auto r = engine::run_simulation(NetworkConfig{}, 1);
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return {s < kDefaultRunBudgetS, fmt("%.3f s wall for %.0f events", s, static_cast<double>(r.events_processed))};
    }
}

int main()
{
    run(1, "energy continuity", energy_continuity);
    run(2, "rsa roundtrip", rsa_correctness);
    run(3, "interlock atomicity", interlock_atomicity);
    run(4, "leach election", leach_statistics);
    run(5, "nearest-CH argmax", clustering_argmax);
    run(6, "sink plan bookkeeping", sink_plan_bookkeeping);
    run(7, "zero-attack baseline", zero_attack_baseline);
    run(8, "attack-ratio trends", attack_trends);
    run(9, "determinism", determinism);
    run(10, "dual accounting", dual_accounting);
    run(11, "crypto bench shape", crypto_bench_shape);
    run(12, "default run time", default_run_time);
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
