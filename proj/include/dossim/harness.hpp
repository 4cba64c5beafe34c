#pragma once

#include "dossim/config.hpp"
#include "dossim/metrics.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace dossim::harness
{
    enum class Scheme : std::uint8_t
    {
        Defended,
        UndefendedBaseline,
    };

    std::string_view to_string(Scheme s) noexcept;
    /// Accepts "defended" and "undefended" (or "baseline").
    Scheme parse_scheme(std::string_view text);

    enum class SweepAxis : std::uint8_t
    {
        MisbehavingRatio,
        NodeCount,
        SimTime,
        AttackInterval,
    };

    std::string_view to_string(SweepAxis a) noexcept;
    /// Accepts the column names ("ratio", "node_count", "sim_time", "attack_interval").
    SweepAxis parse_axis(std::string_view text);

    /// Copy of `base` with the axis value, seed and scheme applied.
    NetworkConfig configure(const NetworkConfig &base, SweepAxis axis, double value, std::uint64_t seed, Scheme scheme);

    struct RunRow
    {
        double axis_value = 0.0;
        std::uint64_t seed = 0;
        Scheme scheme = Scheme::Defended;
        metrics::MetricsReport report;
    };

    /// Floats as six significant digits.
    std::string format_number(double v);

    /// Column names after the leading axis column.
    const std::vector<std::string> &metric_columns();

    std::string runs_csv_header(SweepAxis axis);
    std::string runs_csv_line(const RunRow &row);
    std::string runs_csv(SweepAxis axis, const std::vector<RunRow> &rows);

    struct SweepSpec
    {
        SweepAxis axis = SweepAxis::MisbehavingRatio;
        std::vector<double> values;
        std::vector<std::uint64_t> seeds;
        std::vector<Scheme> schemes{Scheme::Defended, Scheme::UndefendedBaseline};

        /// Throws std::invalid_argument when values, seeds or schemes are empty.
        void validate() const;
    };

    /// Runs every (value, seed, scheme) combination on up to `jobs` threads; rows come
    /// back ordered by (value, seed, scheme) regardless of completion order.
    std::vector<RunRow> run_sweep(const NetworkConfig &base, const SweepSpec &spec, unsigned jobs = 1);

    /// One row per axis value; each cell is the mean of the formatted per-run values.
    struct SummaryTable
    {
        std::string axis;
        std::vector<std::string> schemes;
        std::vector<double> values;
        // cells[scheme][metric][value index]
        std::map<std::string, std::map<std::string, std::vector<double>>> cells;
    };

    SummaryTable summarize(SweepAxis axis, const std::vector<RunRow> &rows);
    std::string summary_csv(const SummaryTable &table);
    SummaryTable parse_summary_csv(std::string_view text);

    /// Line chart of one metric against the axis, one series per scheme.
    std::string render_svg(const SummaryTable &table, const std::string &metric);

    struct BenchRow
    {
        std::int64_t key_bits = 0;
        std::int64_t chunk_bytes = 0;
        double encrypt_ms = 0.0;
        double decrypt_ms = 0.0;
        double encrypt_energy_j = 0.0;
        double decrypt_energy_j = 0.0;
    };

    struct BenchOptions
    {
        std::vector<std::int64_t> key_sizes{128, 256, 512, 768, 1024, 1280};
        std::vector<std::int64_t> chunk_sizes{256, 512, 1024};
        int trials = 5;
        std::uint64_t seed = 1;
        double power_w = 0.051;
    };

    /// Times chunk-wise RSA encryption and decryption; reports the median over trials.
    std::vector<BenchRow> run_crypto_bench(const BenchOptions &options);
    std::string bench_csv(const std::vector<BenchRow> &rows);

    /// Splits "a,b,c" into trimmed fields.
    std::vector<std::string> split_list(std::string_view text);
}
