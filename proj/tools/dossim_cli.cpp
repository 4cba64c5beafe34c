// Command-line harness: single runs, parameter sweeps, crypto timing and plots.

#include "dossim/engine.hpp"
#include "dossim/harness.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace dossim;

namespace
{
    constexpr int kOk = 0;
    constexpr int kConfigError = 1;
    constexpr int kRuntimeError = 2;

    struct UsageError : std::runtime_error
    {
        using std::runtime_error::runtime_error;
    };

    void write_file(const fs::path &path, const std::string &text)
    {
        if (path.has_parent_path())
            fs::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot write " + path.string());
        out << text;
    }

    std::string read_file(const fs::path &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw UsageError("cannot read " + path.string());
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    }

    NetworkConfig load_base(const std::string &path)
    {
        if (path.empty())
            return NetworkConfig{};
        return load_config_file(path);
    }

    template <typename T, typename F>
    std::vector<T> parse_list(const std::string &text, const char *what, F convert)
    {
        std::vector<T> out;
        for (const auto &field : harness::split_list(text))
        {
            try
            {
                out.push_back(convert(field));
            }
            catch (const std::invalid_argument &)
            {
                throw UsageError(std::string("bad ") + what + " entry: " + field);
            }
            catch (const std::out_of_range &)
            {
                throw UsageError(std::string("bad ") + what + " entry: " + field);
            }
        }
        if (out.empty())
            throw UsageError(std::string(what) + " list is empty");
        return out;
    }

    void write_plots(const std::string &summary, const fs::path &dir)
    {
        const auto table = harness::parse_summary_csv(summary);
        for (const auto &metric : harness::metric_columns())
            write_file(dir / (metric + ".svg"), harness::render_svg(table, metric));
    }

    struct SimulateArgs
    {
        std::string config;
        std::optional<std::uint64_t> seed;
        std::string out;
        std::string event_log;
        std::string scheme;
    };

    int cmd_simulate(const SimulateArgs &a)
    {
        NetworkConfig config = load_base(a.config);
        if (a.seed)
            config.seed = *a.seed;
        if (!a.scheme.empty())
            config.defense_enabled = harness::parse_scheme(a.scheme) == harness::Scheme::Defended;
        config.validate();

        spdlog::info("simulating {} nodes for {} s, seed {}", config.node_count, config.sim_time, config.seed);
        std::unique_ptr<std::ofstream> log_file;
        std::unique_ptr<NdjsonLog> log;
        if (!a.event_log.empty())
        {
            const fs::path p(a.event_log);
            if (p.has_parent_path())
                fs::create_directories(p.parent_path());
            log_file = std::make_unique<std::ofstream>(p, std::ios::binary);
            if (!*log_file)
                throw std::runtime_error("cannot write " + a.event_log);
            log = std::make_unique<NdjsonLog>(*log_file);
        }
        const auto result = engine::run_simulation(config, config.seed, log.get());
        spdlog::info("{} events, {} rounds", result.events_processed, result.report.rounds_completed);

        harness::RunRow row{config.attack_ratio, config.seed,
                            config.defense_enabled ? harness::Scheme::Defended : harness::Scheme::UndefendedBaseline, result.report};
        const auto csv = harness::runs_csv(harness::SweepAxis::MisbehavingRatio, {row});
        if (a.out.empty() || a.out == "-")
            std::cout << csv;
        else
            write_file(a.out, csv);
        return kOk;
    }

    struct SweepArgs
    {
        std::string config;
        std::string axis;
        std::string values;
        std::string seeds;
        std::string schemes = "defended,undefended";
        std::string out;
        unsigned jobs = 0;
    };

    int cmd_sweep(const SweepArgs &a)
    {
        const NetworkConfig base = load_base(a.config);
        harness::SweepSpec spec;
        try
        {
            spec.axis = harness::parse_axis(a.axis);
        }
        catch (const std::invalid_argument &e)
        {
            throw UsageError(e.what());
        }
        spec.values = parse_list<double>(a.values, "value", [](const std::string &s) { return std::stod(s); });
        spec.seeds = parse_list<std::uint64_t>(a.seeds, "seed", [](const std::string &s) { return std::stoull(s); });
        spec.schemes = parse_list<harness::Scheme>(a.schemes, "scheme", [](const std::string &s) { return harness::parse_scheme(s); });
        for (double v : spec.values)
            for (auto scheme : spec.schemes)
                try
                {
                    harness::configure(base, spec.axis, v, spec.seeds.front(), scheme);
                }
                catch (const std::invalid_argument &e)
                {
                    throw UsageError(e.what());
                }

        const unsigned jobs = a.jobs ? a.jobs : std::max(1u, std::thread::hardware_concurrency());
        spdlog::info("sweeping {} over {} values x {} seeds x {} schemes on {} threads", a.axis, spec.values.size(),
                     spec.seeds.size(), spec.schemes.size(), jobs);
        const auto rows = harness::run_sweep(base, spec, jobs);

        const fs::path dir(a.out);
        const auto summary = harness::summary_csv(harness::summarize(spec.axis, rows));
        write_file(dir / "runs.csv", harness::runs_csv(spec.axis, rows));
        write_file(dir / "summary.csv", summary);
        write_plots(summary, dir);
        spdlog::info("wrote {} runs to {}", rows.size(), dir.string());
        return kOk;
    }

    struct BenchArgs
    {
        std::string key_sizes = "128,256,512,768,1024,1280";
        std::string chunk_sizes = "256,512,1024";
        std::string out;
        int trials = 5;
        std::uint64_t seed = 1;
    };

    int cmd_crypto_bench(const BenchArgs &a)
    {
        harness::BenchOptions options;
        auto to_i64 = [](const std::string &s) { return static_cast<std::int64_t>(std::stoll(s)); };
        options.key_sizes = parse_list<std::int64_t>(a.key_sizes, "key size", to_i64);
        options.chunk_sizes = parse_list<std::int64_t>(a.chunk_sizes, "chunk size", to_i64);
        options.trials = a.trials;
        options.seed = a.seed;
        options.power_w = NetworkConfig{}.tx_power;
        for (auto k : options.key_sizes)
            if (k < 64)
                throw UsageError("key sizes must be at least 64 bits");
        for (auto c : options.chunk_sizes)
            if (c < 1)
                throw UsageError("chunk sizes must be positive");
        if (a.trials < 1)
            throw UsageError("trials must be positive");

        const auto csv = harness::bench_csv(harness::run_crypto_bench(options));
        if (a.out.empty() || a.out == "-")
            std::cout << csv;
        else
            write_file(a.out, csv);
        return kOk;
    }

    int cmd_plot(const std::string &summary, const std::string &out)
    {
        write_plots(read_file(summary), fs::path(out));
        return kOk;
    }

    void configure_logging()
    {
        auto logger = spdlog::stderr_color_mt("dossim");
        spdlog::set_default_logger(logger);
        spdlog::set_level(spdlog::level::warn);
        if (const char *level = std::getenv("DOSSIM_LOG_LEVEL"))
            spdlog::set_level(spdlog::level::from_str(level));
    }
}

int main(int argc, char **argv)
{
    configure_logging();

    CLI::App app{"Denial-of-sleep defense simulator for clustered sensor networks"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto *simulate = app.add_subcommand("simulate", "Run one simulation and write its metrics as CSV");
    simulate->add_option("--config", sim.config, "Config file (key=value lines); defaults when omitted");
    simulate->add_option("--seed", sim.seed, "Seed (overrides the config)");
    simulate->add_option("--out", sim.out, "Output CSV path, or - for stdout")->default_val("-");
    simulate->add_option("--event-log", sim.event_log, "Write the NDJSON event log here");
    simulate->add_option("--scheme", sim.scheme, "defended or undefended (overrides defense_enabled)");

    SweepArgs sw;
    auto *sweep = app.add_subcommand("sweep", "Run a parameter sweep and write runs, summary and plots");
    sweep->add_option("--config", sw.config, "Base config file");
    sweep->add_option("--axis", sw.axis, "ratio, node_count, sim_time or attack_interval")->required();
    sweep->add_option("--values", sw.values, "Comma-separated axis values")->required();
    sweep->add_option("--seeds", sw.seeds, "Comma-separated seeds")->required();
    sweep->add_option("--schemes", sw.schemes, "Comma-separated schemes")->capture_default_str();
    sweep->add_option("--out", sw.out, "Output directory")->required();
    sweep->add_option("--jobs", sw.jobs, "Worker threads (0 = hardware concurrency)");

    BenchArgs bench;
    auto *crypto = app.add_subcommand("crypto-bench", "Time chunk-wise RSA encryption and decryption");
    crypto->add_option("--key-sizes", bench.key_sizes, "Comma-separated modulus sizes in bits")->capture_default_str();
    crypto->add_option("--chunk-sizes", bench.chunk_sizes, "Comma-separated chunk sizes in bytes")->capture_default_str();
    crypto->add_option("--out", bench.out, "Output CSV path, or - for stdout")->default_val("-");
    crypto->add_option("--trials", bench.trials, "Repetitions per row; the median is reported")->capture_default_str();
    crypto->add_option("--seed", bench.seed, "Seed for keys and payloads")->capture_default_str();

    std::string plot_summary;
    std::string plot_out;
    auto *plot = app.add_subcommand("plot", "Render SVG plots from a summary CSV");
    plot->add_option("--summary", plot_summary, "summary.csv written by sweep")->required();
    plot->add_option("--out", plot_out, "Output directory")->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try
    {
        if (*simulate)
            return cmd_simulate(sim);
        if (*sweep)
            return cmd_sweep(sw);
        if (*crypto)
            return cmd_crypto_bench(bench);
        if (*plot)
            return cmd_plot(plot_summary, plot_out);
    }
    catch (const ConfigError &e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    }
    catch (const UsageError &e)
    {
        std::cerr << "usage error: " << e.what() << '\n';
        return kConfigError;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kOk;
}
