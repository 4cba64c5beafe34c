#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dossim
{
    enum class AttackKind : std::uint8_t
    {
        SyncFlood,
        SleepSyncReplay,
        DummyDataForgedId,
    };

    enum class IdStrategy : std::uint8_t
    {
        OwnId,
        RandomForgedId,
    };

    enum class AttackTarget : std::uint8_t
    {
        OwnCluster,
        Broadcast,
    };

    std::string_view to_string(AttackKind k) noexcept;
    std::string_view to_string(IdStrategy s) noexcept;
    std::string_view to_string(AttackTarget t) noexcept;

    /// All tunable parameters of one simulation. Defaults describe the standard
    /// 300-node scenario; every key is listed in README.md.
    struct NetworkConfig
    {
        // Topology
        double field_width = 90.0;  // m
        double field_height = 90.0; // m
        std::int64_t node_count = 300;
        double tx_range_min = 150.0; // m
        double tx_range_max = 250.0; // m

        // Radio and energy
        std::int64_t packet_size = 512; // bytes
        double initial_energy = 45.0;   // J
        double e_elec = 100e-9;         // J/bit
        double eps_fs = 20e-12;         // J/bit/m^2
        double eps_mp = 0.0015e-12;     // J/bit/m^4
        double idle_power = 0.051;      // W
        double rx_power = 0.055;        // W
        double tx_power = 0.051;        // W
        double sleep_power = 35e-6;     // W
        double sensing_energy = 8e-8;   // J per sensing event
        double sim_time = 70.0;         // s

        // Clustering
        double ch_fraction_z = 0.1;
        double firefly_i0 = 1.0;
        double firefly_gamma = 1.6e-5; // 1 / tx_range_max^2
        double firefly_beta = 1.0;
        double firefly_alpha = 0.1;

        // Round timing and sink planning
        double t_cf = 1.0;            // s
        double t_dc = 5.0;            // s
        double data_rate_ds = 4096.0; // bits/s sensed per member
        double aggregation_xi = 0.9;
        std::int64_t stop_points_k = 9;
        std::int64_t dwell_units_s = 1000;
        double slot_time_T = 0.1; // s

        // Cluster-level defense
        std::int64_t sync_count_threshold = 3; // syncs per duty-cycle window
        double sync_interval_threshold = 0.1;  // s

        // Adversary
        double attack_ratio = 0.0;
        double attacker_sync_rate = 20.0; // packets/s, per attack kind

        std::int64_t rsa_prime_bits = 32;
        std::uint64_t seed = 1;

        // Protocol plumbing.
        double listen_period = 0.5;          // s, S-MAC listen window
        double sleep_period = 0.5;           // s, S-MAC sleep window
        double channel_rate = 250000.0;      // bits/s between members and CH
        double ch_rate = 1000000.0;          // bits/s from CH to sink (r_i)
        std::int64_t control_packet_size = 32; // bytes
        std::vector<AttackKind> attack_kinds{AttackKind::SyncFlood, AttackKind::DummyDataForgedId};
        IdStrategy id_strategy = IdStrategy::OwnId;
        AttackTarget attack_target = AttackTarget::OwnCluster;
        double attack_interval = 0.0; // s between attack bursts; 0 = continuous
        bool defense_enabled = true;
        bool fixed_power_mode = false;
        double sink_speed = 0.0;        // m/s; 0 = instantaneous moves
        double interlock_timeout = 0.5; // s

        double duty_period() const noexcept { return listen_period + sleep_period; }

        /// Throws ConfigError(InvalidValue) on the first violated invariant.
        void validate() const;
    };

    enum class EnergyPreset : std::uint8_t
    {
        SimulationTable, // E_elec 100 nJ/bit, eps_fs 20 pJ, eps_mp 0.0015 pJ
        MetricSection,   // E_elec 90 nJ/bit, eps_fs 30 pJ, eps_mp 0.0023 pJ
    };

    void apply_energy_preset(NetworkConfig &config, EnergyPreset preset) noexcept;

    class ConfigError : public std::runtime_error
    {
    public:
        enum class Code
        {
            MissingKey,
            InvalidValue,
            UnknownKey,
            Unreadable,
        };

        ConfigError(Code code, std::string key, const std::string &message)
            : std::runtime_error(message), code_(code), key_(std::move(key))
        {
        }

        Code code() const noexcept { return code_; }
        const std::string &key() const noexcept { return key_; }

    private:
        Code code_;
        std::string key_;
    };

    /// Parses `key=value` lines (`#` starts a comment). Unspecified keys keep their defaults;
    /// unknown keys are rejected.
    NetworkConfig load_config(std::string_view source);
    NetworkConfig load_config_file(const std::filesystem::path &path);

    /// Canonical text form; `load_config(to_config_text(c))` reproduces `c`.
    std::string to_config_text(const NetworkConfig &config);

    /// Names of every accepted key, in canonical order.
    std::vector<std::string_view> config_keys();
}
