#pragma once

#include "dossim/energy.hpp"
#include "dossim/event_log.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace dossim::metrics
{
    class ZeroDuration : public std::invalid_argument
    {
    public:
        ZeroDuration() : std::invalid_argument("throughput window must have positive length") {}
    };

    class NoPacketsSent : public std::invalid_argument
    {
    public:
        NoPacketsSent() : std::invalid_argument("packet delivery ratio needs at least one sent packet") {}
    };

    struct DetectionLedger
    {
        std::int64_t tp = 0;
        std::int64_t fp = 0;
        std::int64_t tn = 0;
        std::int64_t fn = 0;

        friend bool operator==(const DetectionLedger &, const DetectionLedger &) = default;
    };

    /// Confusion matrix over vetted nodes: flagged attackers are TP, missed attackers FN,
    /// flagged normal nodes FP, the remaining normal nodes TN. Unvetted nodes are skipped.
    DetectionLedger tally_detection(const std::vector<bool> &is_attacker, const std::vector<bool> &vetted,
                                    const std::vector<bool> &flagged);

    /// (1/n) * sum(X_i * P_s / (S_p - S_r)) * 8/1000, n = x.size().
    double throughput_kbps(std::span<const std::int64_t> x, double packet_bytes, double s_p, double s_r);

    /// (1/n) * (sum X / sum Y) * 100.
    double pdr_percent(std::span<const std::int64_t> x, std::span<const std::int64_t> y, std::int64_t n = 1);

    /// Sum of per-episode CH service times.
    double network_lifetime(std::span<const double> ch_lifetimes) noexcept;

    /// 100 * sum(residual) / sum(initial). Throws std::invalid_argument when empty.
    double residual_energy_percent(std::span<const energy::EnergyLedger> ledgers);
    double residual_energy_percent(std::span<const double> residual, std::span<const double> initial);

    /// TP / (TP + FN) * 100, or 100 when there is nothing to detect.
    double detection_rate(const DetectionLedger &ledger) noexcept;

    struct MetricsReport
    {
        double throughput_kbps = 0.0;
        double pdr_percent = 100.0;
        double detection_rate_percent = 100.0;
        double residual_energy_percent = 100.0;
        double network_lifetime_s = 0.0;
        std::int64_t rounds_completed = 0;
        double duration_s = 0.0;
        std::vector<std::int64_t> received; // X_i: node i's packets accepted by the sink
        std::vector<std::int64_t> sent;     // Y_i: legitimate data packets node i sent
        DetectionLedger detection;

        friend bool operator==(const MetricsReport &, const MetricsReport &) = default;
    };

    /// Derives the report from the inputs the engine logs; zero duration gives 0 kbps
    /// and no sent packets gives a PDR of 100.
    MetricsReport assemble_report(std::span<const std::int64_t> received, std::span<const std::int64_t> sent,
                                  const DetectionLedger &detection, std::span<const double> residual,
                                  std::span<const double> initial, std::span<const double> episodes,
                                  double packet_bytes, double duration, std::int64_t rounds);

    /// Rebuilds the report from an event log alone.
    MetricsReport recompute_from_log(std::span<const LogRecord> records);
}
