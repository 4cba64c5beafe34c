#include "dossim/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <variant>

namespace dossim
{
    std::string_view to_string(AttackKind k) noexcept
    {
        switch (k)
        {
        case AttackKind::SyncFlood:
            return "sync_flood";
        case AttackKind::SleepSyncReplay:
            return "sleep_sync_replay";
        case AttackKind::DummyDataForgedId:
            return "dummy_data_forged_id";
        }
        return "?";
    }

    std::string_view to_string(IdStrategy s) noexcept
    {
        return s == IdStrategy::OwnId ? "own_id" : "random_forged_id";
    }

    std::string_view to_string(AttackTarget t) noexcept
    {
        return t == AttackTarget::OwnCluster ? "own_cluster" : "broadcast";
    }

    namespace
    {
        std::string_view trim(std::string_view s)
        {
            const auto first = s.find_first_not_of(" \t\r");
            if (first == std::string_view::npos)
                return {};
            const auto last = s.find_last_not_of(" \t\r");
            return s.substr(first, last - first + 1);
        }

        [[noreturn]] void invalid(std::string_view key, std::string_view why)
        {
            throw ConfigError(ConfigError::Code::InvalidValue, std::string(key),
                              "invalid value for '" + std::string(key) + "': " + std::string(why));
        }

        double parse_double(std::string_view key, std::string_view text)
        {
            double v = 0.0;
            const auto *end = text.data() + text.size();
            auto [ptr, ec] = std::from_chars(text.data(), end, v);
            if (ec != std::errc{} || ptr != end || !std::isfinite(v))
                invalid(key, "expected a finite number, got '" + std::string(text) + "'");
            return v;
        }

        std::int64_t parse_int(std::string_view key, std::string_view text)
        {
            std::int64_t v = 0;
            const auto *end = text.data() + text.size();
            auto [ptr, ec] = std::from_chars(text.data(), end, v);
            if (ec != std::errc{} || ptr != end)
                invalid(key, "expected an integer, got '" + std::string(text) + "'");
            return v;
        }

        std::uint64_t parse_uint(std::string_view key, std::string_view text)
        {
            std::uint64_t v = 0;
            const auto *end = text.data() + text.size();
            auto [ptr, ec] = std::from_chars(text.data(), end, v);
            if (ec != std::errc{} || ptr != end)
                invalid(key, "expected a non-negative integer, got '" + std::string(text) + "'");
            return v;
        }

        bool parse_bool(std::string_view key, std::string_view text)
        {
            if (text == "true" || text == "1" || text == "yes")
                return true;
            if (text == "false" || text == "0" || text == "no")
                return false;
            invalid(key, "expected true/false, got '" + std::string(text) + "'");
        }

        AttackKind parse_attack_kind(std::string_view key, std::string_view text)
        {
            for (auto k : {AttackKind::SyncFlood, AttackKind::SleepSyncReplay, AttackKind::DummyDataForgedId})
                if (to_string(k) == text)
                    return k;
            invalid(key, "unknown attack kind '" + std::string(text) + "'");
        }

        std::vector<AttackKind> parse_attack_kinds(std::string_view key, std::string_view text)
        {
            std::vector<AttackKind> kinds;
            if (text == "none")
                return kinds;
            while (!text.empty())
            {
                const auto comma = text.find(',');
                const auto item = trim(text.substr(0, comma));
                const auto kind = parse_attack_kind(key, item);
                if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end())
                    kinds.push_back(kind);
                if (comma == std::string_view::npos)
                    break;
                text.remove_prefix(comma + 1);
            }
            return kinds;
        }

        std::string format_double(double v)
        {
            char buf[64];
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
            return std::string(buf, ptr);
        }

        struct KeySpec
        {
            std::string_view name;
            std::function<void(NetworkConfig &, std::string_view key, std::string_view value)> set;
            std::function<std::string(const NetworkConfig &)> get;
        };

        template <typename T>
        KeySpec number_key(std::string_view name, T NetworkConfig::*field)
        {
            KeySpec spec;
            spec.name = name;
            spec.set = [field](NetworkConfig &c, std::string_view key, std::string_view value)
            {
                if constexpr (std::is_same_v<T, double>)
                    c.*field = parse_double(key, value);
                else if constexpr (std::is_same_v<T, std::uint64_t>)
                    c.*field = parse_uint(key, value);
                else if constexpr (std::is_same_v<T, bool>)
                    c.*field = parse_bool(key, value);
                else
                    c.*field = parse_int(key, value);
            };
            spec.get = [field](const NetworkConfig &c) -> std::string
            {
                if constexpr (std::is_same_v<T, double>)
                    return format_double(c.*field);
                else if constexpr (std::is_same_v<T, bool>)
                    return c.*field ? "true" : "false";
                else
                    return std::to_string(c.*field);
            };
            return spec;
        }

        const std::vector<KeySpec> &key_table()
        {
            static const std::vector<KeySpec> table = []
            {
                std::vector<KeySpec> t;
                t.push_back(number_key("field_width", &NetworkConfig::field_width));
                t.push_back(number_key("field_height", &NetworkConfig::field_height));
                t.push_back(number_key("node_count", &NetworkConfig::node_count));
                t.push_back(number_key("tx_range_min", &NetworkConfig::tx_range_min));
                t.push_back(number_key("tx_range_max", &NetworkConfig::tx_range_max));
                t.push_back(number_key("packet_size", &NetworkConfig::packet_size));
                t.push_back(number_key("initial_energy", &NetworkConfig::initial_energy));
                t.push_back(number_key("e_elec", &NetworkConfig::e_elec));
                t.push_back(number_key("eps_fs", &NetworkConfig::eps_fs));
                t.push_back(number_key("eps_mp", &NetworkConfig::eps_mp));
                t.push_back(number_key("idle_power", &NetworkConfig::idle_power));
                t.push_back(number_key("rx_power", &NetworkConfig::rx_power));
                t.push_back(number_key("tx_power", &NetworkConfig::tx_power));
                t.push_back(number_key("sleep_power", &NetworkConfig::sleep_power));
                t.push_back(number_key("sensing_energy", &NetworkConfig::sensing_energy));
                t.push_back(number_key("sim_time", &NetworkConfig::sim_time));
                t.push_back(number_key("ch_fraction_z", &NetworkConfig::ch_fraction_z));
                t.push_back(number_key("firefly_i0", &NetworkConfig::firefly_i0));
                t.push_back(number_key("firefly_gamma", &NetworkConfig::firefly_gamma));
                t.push_back(number_key("firefly_beta", &NetworkConfig::firefly_beta));
                t.push_back(number_key("firefly_alpha", &NetworkConfig::firefly_alpha));
                t.push_back(number_key("t_cf", &NetworkConfig::t_cf));
                t.push_back(number_key("t_dc", &NetworkConfig::t_dc));
                t.push_back(number_key("data_rate_ds", &NetworkConfig::data_rate_ds));
                t.push_back(number_key("aggregation_xi", &NetworkConfig::aggregation_xi));
                t.push_back(number_key("stop_points_k", &NetworkConfig::stop_points_k));
                t.push_back(number_key("dwell_units_s", &NetworkConfig::dwell_units_s));
                t.push_back(number_key("slot_time_T", &NetworkConfig::slot_time_T));
                t.push_back(number_key("sync_count_threshold", &NetworkConfig::sync_count_threshold));
                t.push_back(number_key("sync_interval_threshold", &NetworkConfig::sync_interval_threshold));
                t.push_back(number_key("attack_ratio", &NetworkConfig::attack_ratio));
                t.push_back(number_key("attacker_sync_rate", &NetworkConfig::attacker_sync_rate));
                t.push_back(number_key("rsa_prime_bits", &NetworkConfig::rsa_prime_bits));
                t.push_back(number_key("seed", &NetworkConfig::seed));
                t.push_back(number_key("listen_period", &NetworkConfig::listen_period));
                t.push_back(number_key("sleep_period", &NetworkConfig::sleep_period));
                t.push_back(number_key("channel_rate", &NetworkConfig::channel_rate));
                t.push_back(number_key("ch_rate", &NetworkConfig::ch_rate));
                t.push_back(number_key("control_packet_size", &NetworkConfig::control_packet_size));
                t.push_back(KeySpec{
                    "attack_kind",
                    [](NetworkConfig &c, std::string_view key, std::string_view v)
                    { c.attack_kinds = parse_attack_kinds(key, v); },
                    [](const NetworkConfig &c)
                    {
                        if (c.attack_kinds.empty())
                            return std::string("none");
                        std::string out;
                        for (auto k : c.attack_kinds)
                        {
                            if (!out.empty())
                                out += ',';
                            out += to_string(k);
                        }
                        return out;
                    }});
                t.push_back(KeySpec{
                    "id_strategy",
                    [](NetworkConfig &c, std::string_view key, std::string_view v)
                    {
                        if (v == "own_id")
                            c.id_strategy = IdStrategy::OwnId;
                        else if (v == "random_forged_id")
                            c.id_strategy = IdStrategy::RandomForgedId;
                        else
                            invalid(key, "expected own_id or random_forged_id");
                    },
                    [](const NetworkConfig &c) { return std::string(to_string(c.id_strategy)); }});
                t.push_back(KeySpec{
                    "attack_target",
                    [](NetworkConfig &c, std::string_view key, std::string_view v)
                    {
                        if (v == "own_cluster")
                            c.attack_target = AttackTarget::OwnCluster;
                        else if (v == "broadcast")
                            c.attack_target = AttackTarget::Broadcast;
                        else
                            invalid(key, "expected own_cluster or broadcast");
                    },
                    [](const NetworkConfig &c) { return std::string(to_string(c.attack_target)); }});
                t.push_back(number_key("attack_interval", &NetworkConfig::attack_interval));
                t.push_back(number_key("defense_enabled", &NetworkConfig::defense_enabled));
                t.push_back(number_key("fixed_power_mode", &NetworkConfig::fixed_power_mode));
                t.push_back(number_key("sink_speed", &NetworkConfig::sink_speed));
                t.push_back(number_key("interlock_timeout", &NetworkConfig::interlock_timeout));
                return t;
            }();
            return table;
        }

        void require(bool ok, std::string_view key, std::string_view why)
        {
            if (!ok)
                invalid(key, why);
        }
    }

    void NetworkConfig::validate() const
    {
        require(node_count >= 1, "node_count", "must be >= 1");
        require(field_width > 0.0, "field_width", "must be > 0");
        require(field_height > 0.0, "field_height", "must be > 0");
        require(tx_range_min > 0.0, "tx_range_min", "must be > 0");
        require(tx_range_max >= tx_range_min, "tx_range_max", "must be >= tx_range_min");
        require(packet_size > 0, "packet_size", "must be > 0");
        require(control_packet_size > 0, "control_packet_size", "must be > 0");
        require(initial_energy > 0.0, "initial_energy", "must be > 0");
        require(e_elec > 0.0, "e_elec", "must be > 0");
        require(eps_fs > 0.0, "eps_fs", "must be > 0");
        require(eps_mp > 0.0, "eps_mp", "must be > 0");
        require(idle_power >= 0.0, "idle_power", "must be >= 0");
        require(rx_power >= 0.0, "rx_power", "must be >= 0");
        require(tx_power >= 0.0, "tx_power", "must be >= 0");
        require(sleep_power >= 0.0, "sleep_power", "must be >= 0");
        require(sensing_energy >= 0.0, "sensing_energy", "must be >= 0");
        require(sim_time >= 0.0, "sim_time", "must be >= 0");
        require(ch_fraction_z > 0.0 && ch_fraction_z < 1.0, "ch_fraction_z", "must lie in (0,1)");
        require(firefly_i0 > 0.0, "firefly_i0", "must be > 0");
        require(firefly_gamma >= 0.0, "firefly_gamma", "must be >= 0");
        require(firefly_alpha >= 0.0, "firefly_alpha", "must be >= 0");
        require(t_cf > 0.0, "t_cf", "must be > 0");
        require(t_dc > 0.0, "t_dc", "must be > 0");
        require(slot_time_T > 0.0, "slot_time_T", "must be > 0");
        require(data_rate_ds > 0.0, "data_rate_ds", "must be > 0");
        require(aggregation_xi > 0.0 && aggregation_xi <= 1.0, "aggregation_xi", "must lie in (0,1]");
        require(stop_points_k >= 1, "stop_points_k", "must be >= 1");
        require(dwell_units_s >= 1, "dwell_units_s", "must be >= 1");
        require(sync_count_threshold >= 1, "sync_count_threshold", "must be >= 1");
        require(sync_interval_threshold >= 0.0, "sync_interval_threshold", "must be >= 0");
        require(attack_ratio >= 0.0 && attack_ratio <= 1.0, "attack_ratio", "must lie in [0,1]");
        require(attacker_sync_rate > 0.0, "attacker_sync_rate", "must be > 0");
        require(rsa_prime_bits >= 8 && rsa_prime_bits <= 2048, "rsa_prime_bits", "must lie in [8,2048]");
        require(listen_period > 0.0, "listen_period", "must be > 0");
        require(sleep_period >= 0.0, "sleep_period", "must be >= 0");
        require(channel_rate > 0.0, "channel_rate", "must be > 0");
        require(ch_rate > 0.0, "ch_rate", "must be > 0");
        require(attack_interval >= 0.0, "attack_interval", "must be >= 0");
        require(sink_speed >= 0.0, "sink_speed", "must be >= 0");
        require(interlock_timeout > 0.0, "interlock_timeout", "must be > 0");
    }

    void apply_energy_preset(NetworkConfig &config, EnergyPreset preset) noexcept
    {
        switch (preset)
        {
        case EnergyPreset::SimulationTable:
            config.e_elec = 100e-9;
            config.eps_fs = 20e-12;
            config.eps_mp = 0.0015e-12;
            break;
        case EnergyPreset::MetricSection:
            config.e_elec = 90e-9;
            config.eps_fs = 30e-12;
            config.eps_mp = 0.0023e-12;
            break;
        }
    }

    NetworkConfig load_config(std::string_view source)
    {
        NetworkConfig config;
        std::vector<std::pair<std::string_view, std::string_view>> entries;

        std::size_t line_no = 0;
        while (!source.empty())
        {
            ++line_no;
            const auto nl = source.find('\n');
            auto line = source.substr(0, nl);
            source.remove_prefix(nl == std::string_view::npos ? source.size() : nl + 1);

            if (const auto hash = line.find('#'); hash != std::string_view::npos)
                line = line.substr(0, hash);
            line = trim(line);
            if (line.empty())
                continue;

            const auto eq = line.find('=');
            const auto key = trim(line.substr(0, eq));
            if (key.empty())
                throw ConfigError(ConfigError::Code::MissingKey, "",
                                  "line " + std::to_string(line_no) + ": missing key before '='");
            if (eq == std::string_view::npos)
                throw ConfigError(ConfigError::Code::InvalidValue, std::string(key),
                                  "line " + std::to_string(line_no) + ": expected key=value for '" + std::string(key) + "'");
            entries.emplace_back(key, trim(line.substr(eq + 1)));
        }

        // The preset is applied first so explicit energy constants override it.
        for (const auto &[key, value] : entries)
        {
            if (key != "energy_preset")
                continue;
            if (value == "table" || value == "simulation_table")
                apply_energy_preset(config, EnergyPreset::SimulationTable);
            else if (value == "metric_section")
                apply_energy_preset(config, EnergyPreset::MetricSection);
            else
                invalid(key, "expected simulation_table or metric_section");
        }

        const auto &table = key_table();
        for (const auto &[key, value] : entries)
        {
            if (key == "energy_preset")
                continue;
            const auto it = std::find_if(table.begin(), table.end(), [&](const KeySpec &s) { return s.name == key; });
            if (it == table.end())
                throw ConfigError(ConfigError::Code::UnknownKey, std::string(key), "unknown config key '" + std::string(key) + "'");
            it->set(config, key, value);
        }

        config.validate();
        return config;
    }

    NetworkConfig load_config_file(const std::filesystem::path &path)
    {
        std::ifstream in(path);
        if (!in)
            throw ConfigError(ConfigError::Code::Unreadable, "", "cannot read config file '" + path.string() + "'");
        std::ostringstream text;
        text << in.rdbuf();
        return load_config(text.str());
    }

    std::string to_config_text(const NetworkConfig &config)
    {
        std::string out;
        for (const auto &spec : key_table())
        {
            out += spec.name;
            out += '=';
            out += spec.get(config);
            out += '\n';
        }
        return out;
    }

    std::vector<std::string_view> config_keys()
    {
        std::vector<std::string_view> keys;
        keys.push_back("energy_preset");
        for (const auto &spec : key_table())
            keys.push_back(spec.name);
        return keys;
    }
}
