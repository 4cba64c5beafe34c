#include "dossim/harness.hpp"

#include <doctest.h>

using namespace dossim;
using namespace dossim::harness;

TEST_CASE("number formatting")
{
    CHECK(format_number(40.96) == "40.96");
    CHECK(format_number(1.0 / 3.0) == "0.333333");
    CHECK(format_number(100.0) == "100");
    CHECK(format_number(1234567.0) == "1.23457e+06");
}

TEST_CASE("parsers")
{
    CHECK(parse_scheme("defended") == Scheme::Defended);
    CHECK(parse_scheme("undefended") == Scheme::UndefendedBaseline);
    CHECK_THROWS(parse_scheme("asda"));
    CHECK(parse_axis("ratio") == SweepAxis::MisbehavingRatio);
    CHECK(parse_axis("attack_interval") == SweepAxis::AttackInterval);
    CHECK_THROWS(parse_axis("bogus"));
    CHECK(split_list(" 1, 2 ,,3 ") == std::vector<std::string>{"1", "2", "3"});
}

TEST_CASE("run CSV header")
{
    CHECK(runs_csv_header(SweepAxis::MisbehavingRatio) == "ratio,seed,scheme,throughput_kbps,pdr,dr,residual_pct,lifetime_s,rounds");
}

TEST_CASE("configure applies axis, seed and scheme")
{
    NetworkConfig base;
    const auto c = configure(base, SweepAxis::NodeCount, 50, 9, Scheme::UndefendedBaseline);
    CHECK(c.node_count == 50);
    CHECK(c.seed == 9);
    CHECK_FALSE(c.defense_enabled);
    CHECK_THROWS(configure(base, SweepAxis::NodeCount, 50.5, 1, Scheme::Defended));
    CHECK_THROWS(configure(base, SweepAxis::MisbehavingRatio, 2.0, 1, Scheme::Defended));
}

TEST_CASE("degenerate sweep summary equals the single run")
{
    NetworkConfig base;
    base.node_count = 40;
    base.sim_time = 15.0;
    SweepSpec spec;
    spec.values = {0.1};
    spec.seeds = {4};
    spec.schemes = {Scheme::Defended};
    const auto rows = run_sweep(base, spec);
    REQUIRE(rows.size() == 1);
    const auto summary = summary_csv(summarize(spec.axis, rows));
    const auto run_line = runs_csv_line(rows[0]);
    // "0.1,4,defended,<metrics>" vs "0.1,<metrics>"
    const auto metrics_part = run_line.substr(run_line.find("defended,") + 9);
    CHECK(summary == "ratio,defended_throughput_kbps,defended_pdr,defended_dr,defended_residual_pct,defended_lifetime_s,defended_rounds\n"
                     "0.1," + metrics_part + "\n");
}

TEST_CASE("sweep is ordered and thread-count independent")
{
    NetworkConfig base;
    base.node_count = 40;
    base.sim_time = 12.0;
    SweepSpec spec;
    spec.values = {0.0, 0.2};
    spec.seeds = {1, 2};
    const auto serial = run_sweep(base, spec, 1);
    const auto parallel = run_sweep(base, spec, 3);
    REQUIRE(serial.size() == 8);
    CHECK(runs_csv(spec.axis, serial) == runs_csv(spec.axis, parallel));
    CHECK(serial[0].axis_value == 0.0);
    CHECK(serial[0].seed == 1);
    CHECK(serial[0].scheme == Scheme::Defended);
    CHECK(serial[1].scheme == Scheme::UndefendedBaseline);
    CHECK(serial[7].axis_value == 0.2);

    SweepSpec empty;
    CHECK_THROWS_AS(run_sweep(base, empty), std::invalid_argument);
}

TEST_CASE("summary is the mean of the printed values and plots depend only on it")
{
    std::vector<RunRow> rows(3);
    rows[0].axis_value = rows[1].axis_value = 0.5;
    rows[2].axis_value = 1.0;
    rows[0].report.pdr_percent = 1.0 / 3.0;
    rows[1].report.pdr_percent = 2.0 / 3.0;
    rows[2].report.pdr_percent = 7.0;
    const auto table = summarize(SweepAxis::SimTime, rows);
    CHECK(table.cells.at("defended").at("pdr")[0] == (0.333333 + 0.666667) / 2.0);

    const auto csv = summary_csv(table);
    const auto parsed = parse_summary_csv(csv);
    CHECK(summary_csv(parsed) == csv);
    CHECK(render_svg(parsed, "pdr") == render_svg(parse_summary_csv(csv), "pdr"));
    CHECK(render_svg(parsed, "pdr").find("<polyline") != std::string::npos);
}

TEST_CASE("crypto bench shape")
{
    BenchOptions o;
    o.key_sizes = {64, 128};
    o.chunk_sizes = {32, 64};
    o.trials = 1;
    const auto rows = run_crypto_bench(o);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].key_bits == 64);
    CHECK(rows[3].key_bits == 128);
    CHECK(rows[3].chunk_bytes == 64);
    for (const auto &r : rows)
    {
        CHECK(r.encrypt_ms >= 0.0);
        CHECK(r.encrypt_energy_j == doctest::Approx(r.encrypt_ms / 1000 * o.power_w));
    }
    CHECK(bench_csv(rows).rfind("key_bits,chunk_bytes,encrypt_ms,decrypt_ms,encrypt_energy_j,decrypt_energy_j\n", 0) == 0);
    o.key_sizes = {32};
    CHECK_THROWS(run_crypto_bench(o));
}
