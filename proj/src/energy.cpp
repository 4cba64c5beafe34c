#include "dossim/energy.hpp"

#include <cmath>

namespace dossim::energy
{
    double crossover_distance(const NetworkConfig &params) noexcept
    {
        return std::sqrt(params.eps_fs / params.eps_mp);
    }

    double tx_energy(std::uint64_t bits, double distance, const NetworkConfig &params) noexcept
    {
        const auto lb = static_cast<double>(bits);
        const double d2 = distance * distance;
        if (distance < crossover_distance(params))
            return lb * params.e_elec + lb * params.eps_fs * d2;
        return lb * params.e_elec + lb * params.eps_mp * d2 * d2;
    }

    double rx_energy(std::uint64_t bits, const NetworkConfig &params) noexcept
    {
        return static_cast<double>(bits) * params.e_elec;
    }

    double state_power(RadioState state, const NetworkConfig &params) noexcept
    {
        switch (state)
        {
        case RadioState::Sleep:
            return params.sleep_power;
        case RadioState::Idle:
            return params.idle_power;
        case RadioState::Rx:
            return params.rx_power;
        case RadioState::Tx:
            return params.tx_power;
        }
        return 0.0;
    }

    std::string_view to_string(Bucket b) noexcept
    {
        switch (b)
        {
        case Bucket::Tx:
            return "tx";
        case Bucket::Rx:
            return "rx";
        case Bucket::Idle:
            return "idle";
        case Bucket::Sleep:
            return "sleep";
        case Bucket::Sensing:
            return "sensing";
        case Bucket::Sys:
            return "sys";
        }
        return "?";
    }

    Bucket bucket_for(RadioState state) noexcept
    {
        switch (state)
        {
        case RadioState::Sleep:
            return Bucket::Sleep;
        case RadioState::Idle:
            return Bucket::Idle;
        case RadioState::Rx:
            return Bucket::Rx;
        case RadioState::Tx:
            return Bucket::Tx;
        }
        return Bucket::Sys;
    }

    double EnergyLedger::debit(Bucket bucket, double joules) noexcept
    {
        if (!(joules > 0.0) || residual_ <= 0.0)
            return 0.0;
        const double amount = joules < residual_ ? joules : residual_;
        spent_[static_cast<std::size_t>(bucket)] += amount;
        residual_ = amount == residual_ ? 0.0 : residual_ - amount;
        return amount;
    }

    double EnergyLedger::spent_total() const noexcept
    {
        double total = 0.0;
        for (double s : spent_)
            total += s;
        return total;
    }

    EnergyLedger charge_state(EnergyLedger ledger, RadioState state, double duration, const NetworkConfig &params) noexcept
    {
        if (duration > 0.0)
            ledger.debit(bucket_for(state), duration * state_power(state, params));
        return ledger;
    }
}
