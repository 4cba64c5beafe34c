#include "dossim/harness.hpp"

#include "dossim/engine.hpp"
#include "dossim/rsa.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace dossim::harness
{
    std::string_view to_string(Scheme s) noexcept
    {
        return s == Scheme::Defended ? "defended" : "undefended";
    }

    Scheme parse_scheme(std::string_view text)
    {
        if (text == "defended")
            return Scheme::Defended;
        if (text == "undefended" || text == "baseline")
            return Scheme::UndefendedBaseline;
        throw std::invalid_argument("unknown scheme: " + std::string(text));
    }

    std::string_view to_string(SweepAxis a) noexcept
    {
        switch (a)
        {
        case SweepAxis::MisbehavingRatio:
            return "ratio";
        case SweepAxis::NodeCount:
            return "node_count";
        case SweepAxis::SimTime:
            return "sim_time";
        case SweepAxis::AttackInterval:
            return "attack_interval";
        }
        return "?";
    }

    SweepAxis parse_axis(std::string_view text)
    {
        if (text == "ratio" || text == "attack_ratio" || text == "misbehaving_ratio")
            return SweepAxis::MisbehavingRatio;
        if (text == "node_count" || text == "nodes")
            return SweepAxis::NodeCount;
        if (text == "sim_time")
            return SweepAxis::SimTime;
        if (text == "attack_interval")
            return SweepAxis::AttackInterval;
        throw std::invalid_argument("unknown sweep axis: " + std::string(text));
    }

    NetworkConfig configure(const NetworkConfig &base, SweepAxis axis, double value, std::uint64_t seed, Scheme scheme)
    {
        NetworkConfig c = base;
        c.seed = seed;
        c.defense_enabled = scheme == Scheme::Defended;
        switch (axis)
        {
        case SweepAxis::MisbehavingRatio:
            c.attack_ratio = value;
            break;
        case SweepAxis::NodeCount:
            if (value != std::floor(value))
                throw std::invalid_argument("node_count values must be integers");
            c.node_count = static_cast<std::int64_t>(value);
            break;
        case SweepAxis::SimTime:
            c.sim_time = value;
            break;
        case SweepAxis::AttackInterval:
            c.attack_interval = value;
            break;
        }
        c.validate();
        return c;
    }

    std::string format_number(double v)
    {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6g", v);
        return buf;
    }

    const std::vector<std::string> &metric_columns()
    {
        static const std::vector<std::string> cols{"throughput_kbps", "pdr", "dr", "residual_pct", "lifetime_s", "rounds"};
        return cols;
    }

    namespace
    {
        std::vector<double> metric_values(const metrics::MetricsReport &r)
        {
            return {r.throughput_kbps, r.pdr_percent, r.detection_rate_percent, r.residual_energy_percent,
                    r.network_lifetime_s, static_cast<double>(r.rounds_completed)};
        }

        std::string join(const std::vector<std::string> &fields)
        {
            std::string out;
            for (std::size_t i = 0; i < fields.size(); ++i)
            {
                if (i)
                    out += ',';
                out += fields[i];
            }
            return out;
        }
    }

    std::string runs_csv_header(SweepAxis axis)
    {
        std::vector<std::string> cols{std::string(to_string(axis)), "seed", "scheme"};
        for (const auto &m : metric_columns())
            cols.push_back(m);
        return join(cols);
    }

    std::string runs_csv_line(const RunRow &row)
    {
        std::vector<std::string> cols{format_number(row.axis_value), std::to_string(row.seed), std::string(to_string(row.scheme))};
        for (double v : metric_values(row.report))
            cols.push_back(format_number(v));
        return join(cols);
    }

    std::string runs_csv(SweepAxis axis, const std::vector<RunRow> &rows)
    {
        std::string out = runs_csv_header(axis) + '\n';
        for (const auto &row : rows)
            out += runs_csv_line(row) + '\n';
        return out;
    }

    void SweepSpec::validate() const
    {
        if (values.empty())
            throw std::invalid_argument("sweep needs at least one axis value");
        if (seeds.empty())
            throw std::invalid_argument("sweep needs at least one seed");
        if (schemes.empty())
            throw std::invalid_argument("sweep needs at least one scheme");
    }

    std::vector<RunRow> run_sweep(const NetworkConfig &base, const SweepSpec &spec, unsigned jobs)
    {
        spec.validate();
        std::vector<RunRow> rows;
        std::vector<NetworkConfig> configs;
        for (double v : spec.values)
            for (auto seed : spec.seeds)
                for (auto scheme : spec.schemes)
                {
                    configs.push_back(configure(base, spec.axis, v, seed, scheme));
                    rows.push_back(RunRow{v, seed, scheme, {}});
                }

        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto worker = [&]
        {
            for (std::size_t i = next++; i < rows.size(); i = next++)
            {
                try
                {
                    rows[i].report = engine::run_simulation(configs[i], rows[i].seed).report;
                }
                catch (...)
                {
                    std::lock_guard lock(failure_mutex);
                    if (!failure)
                        failure = std::current_exception();
                }
            }
        };

        jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(rows.size())));
        std::vector<std::thread> pool;
        for (unsigned j = 1; j < jobs; ++j)
            pool.emplace_back(worker);
        worker();
        for (auto &t : pool)
            t.join();
        if (failure)
            std::rethrow_exception(failure);
        return rows;
    }

    SummaryTable summarize(SweepAxis axis, const std::vector<RunRow> &rows)
    {
        SummaryTable table;
        table.axis = std::string(to_string(axis));
        for (const auto &row : rows)
        {
            const auto scheme = std::string(to_string(row.scheme));
            if (std::find(table.schemes.begin(), table.schemes.end(), scheme) == table.schemes.end())
                table.schemes.push_back(scheme);
            if (std::find(table.values.begin(), table.values.end(), row.axis_value) == table.values.end())
                table.values.push_back(row.axis_value);
        }

        const auto &cols = metric_columns();
        for (const auto &scheme : table.schemes)
            for (std::size_t m = 0; m < cols.size(); ++m)
            {
                auto &series = table.cells[scheme][cols[m]];
                for (double v : table.values)
                {
                    // Average what an outside reader sees in the per-run CSV.
                    double sum = 0.0;
                    std::size_t count = 0;
                    for (const auto &row : rows)
                        if (row.axis_value == v && to_string(row.scheme) == scheme)
                        {
                            sum += std::stod(format_number(metric_values(row.report)[m]));
                            ++count;
                        }
                    series.push_back(count ? sum / static_cast<double>(count) : std::nan(""));
                }
            }
        return table;
    }

    std::string summary_csv(const SummaryTable &table)
    {
        std::vector<std::string> header{table.axis};
        for (const auto &scheme : table.schemes)
            for (const auto &m : metric_columns())
                header.push_back(scheme + "_" + m);
        std::string out = join(header) + '\n';
        for (std::size_t i = 0; i < table.values.size(); ++i)
        {
            std::vector<std::string> cols{format_number(table.values[i])};
            for (const auto &scheme : table.schemes)
                for (const auto &m : metric_columns())
                    cols.push_back(format_number(table.cells.at(scheme).at(m)[i]));
            out += join(cols) + '\n';
        }
        return out;
    }

    SummaryTable parse_summary_csv(std::string_view text)
    {
        std::istringstream in{std::string(text)};
        std::string line;
        if (!std::getline(in, line))
            throw std::invalid_argument("summary CSV is empty");
        const auto header = split_list(line);
        if (header.empty())
            throw std::invalid_argument("summary CSV has no header");

        SummaryTable table;
        table.axis = header[0];
        std::vector<std::pair<std::string, std::string>> columns;
        for (std::size_t i = 1; i < header.size(); ++i)
        {
            const auto cut = header[i].find('_');
            if (cut == std::string::npos)
                throw std::invalid_argument("summary column without scheme prefix: " + header[i]);
            auto scheme = header[i].substr(0, cut);
            auto metric = header[i].substr(cut + 1);
            if (std::find(table.schemes.begin(), table.schemes.end(), scheme) == table.schemes.end())
                table.schemes.push_back(scheme);
            columns.emplace_back(std::move(scheme), std::move(metric));
        }

        while (std::getline(in, line))
        {
            if (line.empty())
                continue;
            const auto fields = split_list(line);
            if (fields.size() != header.size())
                throw std::invalid_argument("summary row has " + std::to_string(fields.size()) + " fields, expected " +
                                            std::to_string(header.size()));
            table.values.push_back(std::stod(fields[0]));
            for (std::size_t i = 1; i < fields.size(); ++i)
                table.cells[columns[i - 1].first][columns[i - 1].second].push_back(std::stod(fields[i]));
        }
        return table;
    }

    std::string render_svg(const SummaryTable &table, const std::string &metric)
    {
        constexpr double width = 640.0;
        constexpr double height = 400.0;
        constexpr double left = 70.0;
        constexpr double right = 150.0;
        constexpr double top = 40.0;
        constexpr double bottom = 50.0;
        static const char *colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

        double xlo = 0.0, xhi = 1.0, ylo = 0.0, yhi = 1.0;
        if (!table.values.empty())
        {
            const auto [mn, mx] = std::minmax_element(table.values.begin(), table.values.end());
            xlo = *mn;
            xhi = *mx;
        }
        bool any = false;
        for (const auto &scheme : table.schemes)
        {
            auto it = table.cells.find(scheme);
            if (it == table.cells.end() || !it->second.count(metric))
                continue;
            for (double y : it->second.at(metric))
            {
                if (std::isnan(y))
                    continue;
                ylo = any ? std::min(ylo, y) : y;
                yhi = any ? std::max(yhi, y) : y;
                any = true;
            }
        }
        if (xhi <= xlo)
        {
            xlo -= 1.0;
            xhi += 1.0;
        }
        if (yhi <= ylo)
        {
            ylo -= 1.0;
            yhi += 1.0;
        }
        const double pad = 0.05 * (yhi - ylo);
        ylo -= pad;
        yhi += pad;

        auto px = [&](double x) { return left + (x - xlo) / (xhi - xlo) * (width - left - right); };
        auto py = [&](double y) { return height - bottom - (y - ylo) / (yhi - ylo) * (height - top - bottom); };
        auto num = [](double v)
        {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.2f", v);
            return std::string(buf);
        };

        std::string s;
        s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" + num(height) + "\">\n";
        s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        s += "<text x=\"" + num(width / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
             metric + " vs " + table.axis + "</text>\n";
        s += "<line x1=\"" + num(left) + "\" y1=\"" + num(height - bottom) + "\" x2=\"" + num(width - right) + "\" y2=\"" +
             num(height - bottom) + "\" stroke=\"black\"/>\n";
        s += "<line x1=\"" + num(left) + "\" y1=\"" + num(top) + "\" x2=\"" + num(left) + "\" y2=\"" + num(height - bottom) +
             "\" stroke=\"black\"/>\n";
        for (int k = 0; k <= 4; ++k)
        {
            const double yv = ylo + (yhi - ylo) * k / 4.0;
            s += "<text x=\"" + num(left - 6) + "\" y=\"" + num(py(yv) + 4) +
                 "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + format_number(yv) + "</text>\n";
        }
        for (double xv : table.values)
            s += "<text x=\"" + num(px(xv)) + "\" y=\"" + num(height - bottom + 16) +
                 "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + format_number(xv) + "</text>\n";
        s += "<text x=\"" + num((left + width - right) / 2) + "\" y=\"" + num(height - 10) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + table.axis + "</text>\n";

        for (std::size_t si = 0; si < table.schemes.size(); ++si)
        {
            const auto &scheme = table.schemes[si];
            auto it = table.cells.find(scheme);
            if (it == table.cells.end() || !it->second.count(metric))
                continue;
            const auto &ys = it->second.at(metric);
            const char *color = colors[si % std::size(colors)];
            std::string points;
            for (std::size_t i = 0; i < ys.size() && i < table.values.size(); ++i)
            {
                if (std::isnan(ys[i]))
                    continue;
                if (!points.empty())
                    points += ' ';
                points += num(px(table.values[i])) + "," + num(py(ys[i]));
                s += "<circle cx=\"" + num(px(table.values[i])) + "\" cy=\"" + num(py(ys[i])) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
            }
            s += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
            const double ly = top + 20.0 * static_cast<double>(si);
            s += "<line x1=\"" + num(width - right + 15) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(width - right + 35) + "\" y2=\"" +
                 num(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
            s += "<text x=\"" + num(width - right + 40) + "\" y=\"" + num(ly + 4) + "\" font-family=\"sans-serif\" font-size=\"12\">" +
                 scheme + "</text>\n";
        }
        s += "</svg>\n";
        return s;
    }

    namespace
    {
        double median(std::vector<double> v)
        {
            std::sort(v.begin(), v.end());
            const auto n = v.size();
            return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
        }
    }

    std::vector<BenchRow> run_crypto_bench(const BenchOptions &options)
    {
        using clock = std::chrono::steady_clock;
        if (options.trials < 1)
            throw std::invalid_argument("crypto bench needs at least one trial");
        std::vector<BenchRow> rows;
        for (auto bits : options.key_sizes)
        {
            if (bits < 64)
                throw std::invalid_argument("key sizes must be at least 64 bits");
            Rng key_rng(options.seed, Stream::Keys, {static_cast<std::uint64_t>(bits)});
            const auto keys = security::rsa_keygen(static_cast<std::size_t>(bits / 2), key_rng);
            // Same block width for every key so only the modulus size varies.
            const auto block = std::min<std::size_t>(15, (keys.modulus_bits() - 1) / 8);

            for (auto chunk : options.chunk_sizes)
            {
                if (chunk < 1)
                    throw std::invalid_argument("chunk sizes must be positive");
                Rng data_rng(options.seed, Stream::Test, {static_cast<std::uint64_t>(bits), static_cast<std::uint64_t>(chunk)});
                std::vector<security::BigInt> plain;
                for (std::int64_t off = 0; off < chunk; off += static_cast<std::int64_t>(block))
                {
                    const auto len = std::min<std::size_t>(block, static_cast<std::size_t>(chunk - off));
                    std::vector<std::uint8_t> bytes(len);
                    for (auto &b : bytes)
                        b = static_cast<std::uint8_t>(data_rng.below(256));
                    plain.push_back(security::from_bytes(bytes));
                }

                std::vector<double> enc_ms;
                std::vector<double> dec_ms;
                std::vector<security::BigInt> cipher(plain.size());
                std::vector<security::BigInt> back(plain.size());
                for (int trial = 0; trial < options.trials; ++trial)
                {
                    auto t0 = clock::now();
                    for (std::size_t i = 0; i < plain.size(); ++i)
                        cipher[i] = security::rsa_encrypt(plain[i], keys.modulus, keys.en);
                    auto t1 = clock::now();
                    for (std::size_t i = 0; i < plain.size(); ++i)
                        back[i] = security::rsa_decrypt(cipher[i], keys.modulus, keys.de);
                    auto t2 = clock::now();
                    if (back != plain)
                        throw std::runtime_error("RSA roundtrip failed in crypto bench");
                    enc_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
                    dec_ms.push_back(std::chrono::duration<double, std::milli>(t2 - t1).count());
                }

                BenchRow row;
                row.key_bits = static_cast<std::int64_t>(keys.modulus_bits());
                row.chunk_bytes = chunk;
                row.encrypt_ms = median(enc_ms);
                row.decrypt_ms = median(dec_ms);
                row.encrypt_energy_j = row.encrypt_ms / 1000.0 * options.power_w;
                row.decrypt_energy_j = row.decrypt_ms / 1000.0 * options.power_w;
                rows.push_back(row);
            }
        }
        return rows;
    }

    std::string bench_csv(const std::vector<BenchRow> &rows)
    {
        std::string out = "key_bits,chunk_bytes,encrypt_ms,decrypt_ms,encrypt_energy_j,decrypt_energy_j\n";
        for (const auto &r : rows)
            out += join({std::to_string(r.key_bits), std::to_string(r.chunk_bytes), format_number(r.encrypt_ms),
                         format_number(r.decrypt_ms), format_number(r.encrypt_energy_j), format_number(r.decrypt_energy_j)}) +
                   '\n';
        return out;
    }

    std::vector<std::string> split_list(std::string_view text)
    {
        std::vector<std::string> out;
        std::size_t start = 0;
        while (start <= text.size())
        {
            auto end = text.find(',', start);
            if (end == std::string_view::npos)
                end = text.size();
            auto field = text.substr(start, end - start);
            while (!field.empty() && std::isspace(static_cast<unsigned char>(field.front())))
                field.remove_prefix(1);
            while (!field.empty() && std::isspace(static_cast<unsigned char>(field.back())))
                field.remove_suffix(1);
            if (!field.empty())
                out.emplace_back(field);
            start = end + 1;
        }
        return out;
    }
}
