#pragma once

#include "dossim/config.hpp"
#include "dossim/types.hpp"

#include <array>
#include <cstdint>
#include <string_view>

namespace dossim::energy
{
    /// Transmit cost: electronics plus free-space (d^2) amplifier below the crossover
    /// distance, multipath (d^4) at or above it.
    double tx_energy(std::uint64_t bits, double distance, const NetworkConfig &params) noexcept;

    double rx_energy(std::uint64_t bits, const NetworkConfig &params) noexcept;

    /// sqrt(eps_fs / eps_mp): where the two amplifier models agree.
    double crossover_distance(const NetworkConfig &params) noexcept;

    double state_power(RadioState state, const NetworkConfig &params) noexcept;

    enum class Bucket : std::uint8_t
    {
        Tx,
        Rx,
        Idle,
        Sleep,
        Sensing,
        Sys,
    };

    inline constexpr std::size_t kBucketCount = 6;

    std::string_view to_string(Bucket b) noexcept;
    Bucket bucket_for(RadioState state) noexcept;

    class EnergyLedger
    {
    public:
        EnergyLedger() = default;
        EnergyLedger(NodeId node, double initial) noexcept : node_(node), initial_(initial), residual_(initial) {}

        /// Debits up to `joules` from the bucket, clamping at zero residual.
        /// Returns the amount actually debited; a dead ledger debits nothing.
        double debit(Bucket bucket, double joules) noexcept;

        NodeId node() const noexcept { return node_; }
        double initial() const noexcept { return initial_; }
        double residual() const noexcept { return residual_; }
        double spent(Bucket b) const noexcept { return spent_[static_cast<std::size_t>(b)]; }
        double spent_total() const noexcept;
        bool alive() const noexcept { return residual_ > 0.0; }

        double spent_tx() const noexcept { return spent(Bucket::Tx); }
        double spent_rx() const noexcept { return spent(Bucket::Rx); }
        double spent_idle() const noexcept { return spent(Bucket::Idle); }
        double spent_sleep() const noexcept { return spent(Bucket::Sleep); }
        double spent_sensing() const noexcept { return spent(Bucket::Sensing); }
        double spent_sys() const noexcept { return spent(Bucket::Sys); }

    private:
        NodeId node_ = 0;
        double initial_ = 0.0;
        double residual_ = 0.0;
        std::array<double, kBucketCount> spent_{};
    };

    /// Debits `duration` seconds spent in `state` at the configured state power.
    EnergyLedger charge_state(EnergyLedger ledger, RadioState state, double duration, const NetworkConfig &params) noexcept;
}
