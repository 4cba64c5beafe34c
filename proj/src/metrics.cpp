#include "dossim/metrics.hpp"


namespace dossim::metrics
{
    DetectionLedger tally_detection(const std::vector<bool> &is_attacker, const std::vector<bool> &vetted,
                                    const std::vector<bool> &flagged)
    {
        DetectionLedger d;
        for (std::size_t i = 0; i < is_attacker.size(); ++i)
        {
            if (!vetted[i])
                continue;
            if (is_attacker[i])
                ++(flagged[i] ? d.tp : d.fn);
            else
                ++(flagged[i] ? d.fp : d.tn);
        }
        return d;
    }

    double throughput_kbps(std::span<const std::int64_t> x, double packet_bytes, double s_p, double s_r)
    {
        if (x.empty())
            throw std::invalid_argument("throughput needs at least one experiment");
        if (!(s_p > s_r))
            throw ZeroDuration();
        double sum = 0.0;
        for (auto xi : x)
            sum += static_cast<double>(xi) * packet_bytes / (s_p - s_r);
        return sum / static_cast<double>(x.size()) * 8.0 / 1000.0;
    }

    double pdr_percent(std::span<const std::int64_t> x, std::span<const std::int64_t> y, std::int64_t n)
    {
        if (n < 1)
            throw std::invalid_argument("pdr needs n >= 1");
        std::int64_t sx = 0;
        std::int64_t sy = 0;
        for (auto v : x)
            sx += v;
        for (auto v : y)
            sy += v;
        if (sy <= 0)
            throw NoPacketsSent();
        return static_cast<double>(sx) / static_cast<double>(sy) * 100.0 / static_cast<double>(n);
    }

    double network_lifetime(std::span<const double> ch_lifetimes) noexcept
    {
        double total = 0.0;
        for (double l : ch_lifetimes)
            total += l;
        return total;
    }

    double residual_energy_percent(std::span<const double> residual, std::span<const double> initial)
    {
        if (residual.empty() || residual.size() != initial.size())
            throw std::invalid_argument("residual energy needs matching, non-empty ledgers");
        double r = 0.0;
        double e0 = 0.0;
        for (std::size_t i = 0; i < residual.size(); ++i)
        {
            r += residual[i];
            e0 += initial[i];
        }
        return 100.0 * r / e0;
    }

    double residual_energy_percent(std::span<const energy::EnergyLedger> ledgers)
    {
        std::vector<double> residual;
        std::vector<double> initial;
        for (const auto &l : ledgers)
        {
            residual.push_back(l.residual());
            initial.push_back(l.initial());
        }
        return residual_energy_percent(residual, initial);
    }

    double detection_rate(const DetectionLedger &ledger) noexcept
    {
        const auto attackers = ledger.tp + ledger.fn;
        if (attackers == 0)
            return 100.0;
        return static_cast<double>(ledger.tp) / static_cast<double>(attackers) * 100.0;
    }

    MetricsReport assemble_report(std::span<const std::int64_t> received, std::span<const std::int64_t> sent,
                                  const DetectionLedger &detection, std::span<const double> residual,
                                  std::span<const double> initial, std::span<const double> episodes,
                                  double packet_bytes, double duration, std::int64_t rounds)
    {
        MetricsReport r;
        r.received.assign(received.begin(), received.end());
        r.sent.assign(sent.begin(), sent.end());
        r.detection = detection;
        r.rounds_completed = rounds;
        r.duration_s = duration;

        std::int64_t total_x = 0;
        std::int64_t total_y = 0;
        for (auto v : received)
            total_x += v;
        for (auto v : sent)
            total_y += v;

        const std::int64_t xs[] = {total_x};
        r.throughput_kbps = duration > 0.0 ? throughput_kbps(xs, packet_bytes, duration, 0.0) : 0.0;
        r.pdr_percent = total_y > 0 ? pdr_percent(received, sent, 1) : 100.0;
        r.detection_rate_percent = detection_rate(detection);
        r.residual_energy_percent = residual.empty() ? 100.0 : residual_energy_percent(residual, initial);
        r.network_lifetime_s = network_lifetime(episodes);
        return r;
    }

    MetricsReport recompute_from_log(std::span<const LogRecord> records)
    {
        std::size_t n = 0;
        std::vector<double> initial;
        double packet_bytes = 0.0;
        std::vector<bool> attacker;
        std::vector<double> residual;
        std::vector<std::int64_t> received;
        std::vector<std::int64_t> sent;
        std::vector<bool> vetted;
        std::vector<bool> flagged;
        std::vector<double> episodes;
        double duration = 0.0;
        std::int64_t rounds = 0;
        bool started = false;

        for (const auto &rec : records)
        {
            const auto &d = rec.detail;
            if (rec.kind == "run_start")
            {
                n = d.at("node_count").get<std::size_t>();
                initial = d.at("initial").get<std::vector<double>>();
                if (initial.size() != n)
                    throw std::runtime_error("run_start lists the wrong number of initial energies");
                packet_bytes = d.at("packet_size").get<double>();
                attacker.assign(n, false);
                for (const auto &id : d.at("attackers"))
                    attacker[id.get<std::size_t>()] = true;
                residual = initial;
                received.assign(n, 0);
                sent.assign(n, 0);
                vetted.assign(n, false);
                flagged.assign(n, false);
                started = true;
                continue;
            }
            if (!started)
                throw std::runtime_error("event log does not begin with run_start");

            if (rec.kind == "energy")
            {
                // Same clamp arithmetic as the ledger: a debit equal to the residual empties it.
                auto &r = residual[static_cast<std::size_t>(rec.node)];
                const double amount = d.at("joules").get<double>();
                r = amount == r ? 0.0 : r - amount;
            }
            else if (rec.kind == "data_sent")
                ++sent[static_cast<std::size_t>(rec.node)];
            else if (rec.kind == "sink_accept")
            {
                for (const auto &pair : d.at("origins"))
                    received[pair.at(0).get<std::size_t>()] += pair.at(1).get<std::int64_t>();
            }
            else if (rec.kind == "cluster")
            {
                for (const auto &id : d.at("members"))
                    vetted[id.get<std::size_t>()] = true;
            }
            else if (rec.kind == "flag")
                flagged[static_cast<std::size_t>(rec.node)] = true;
            else if (rec.kind == "episode")
                episodes.push_back(d.at("end").get<double>() - d.at("start").get<double>());
            else if (rec.kind == "round_end")
                ++rounds;
            else if (rec.kind == "run_end")
                duration = d.at("clock").get<double>();
        }

        const auto detection = tally_detection(attacker, vetted, flagged);
        return assemble_report(received, sent, detection, residual, initial, episodes, packet_bytes, duration, rounds);
    }
}
