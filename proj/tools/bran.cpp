// bran: analytic model + simulator toolkit for blockchain-mediated access
// networks. Every subcommand is deterministic for a fixed seed and emits
// CSV/JSON only; see README for the file formats.

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bran/bounds.hpp"
#include "bran/config.hpp"
#include "bran/config_io.hpp"
#include "bran/ctmc.hpp"
#include "bran/dessim.hpp"
#include "bran/errors.hpp"
#include "bran/mining.hpp"
#include "bran/security.hpp"
#include "bran/tradeoff.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

// Shortest round-trip decimal for doubles.
std::string fmt(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    (void)ec;
    return std::string(buf, ptr);
}

std::string fmt(long long x) { return std::to_string(x); }
std::string fmt(int x) { return std::to_string(x); }

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

bool looks_like_json_literal(const std::string& cell) {
    if (cell == "true" || cell == "false" || cell == "null") return true;
    double v;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    return ec == std::errc() && ptr == cell.data() + cell.size();
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::string render(const std::string& format) const {
        std::ostringstream os;
        if (format == "json") {
            os << "[";
            for (std::size_t r = 0; r < rows.size(); ++r) {
                os << (r ? ",\n" : "\n") << "  {";
                for (std::size_t c = 0; c < columns.size(); ++c) {
                    if (c) os << ",";
                    os << "\"" << json_escape(columns[c]) << "\":";
                    if (looks_like_json_literal(rows[r][c]))
                        os << rows[r][c];
                    else
                        os << "\"" << json_escape(rows[r][c]) << "\"";
                }
                os << "}";
            }
            os << "\n]\n";
        } else {
            for (std::size_t c = 0; c < columns.size(); ++c)
                os << (c ? "," : "") << columns[c];
            os << "\n";
            for (const auto& row : rows) {
                for (std::size_t c = 0; c < row.size(); ++c)
                    os << (c ? "," : "") << row[c];
                os << "\n";
            }
        }
        return os.str();
    }
};

// Shared invocation context: where artifacts go and how the manifest line
// is produced.
struct Emitter {
    std::string subcommand;
    std::vector<std::string> argv;
    std::uint64_t seed = 0;
    std::optional<std::string> out_dir;
    int artifacts_emitted = 0;

    void emit(const std::string& name, const std::string& content) {
        std::string manifest = manifest_line(name, content);
        if (out_dir) {
            namespace fs = std::filesystem;
            fs::create_directories(*out_dir);
            const fs::path p = fs::path(*out_dir) / name;
            std::ofstream f(p, std::ios::binary);
            f << content;
            std::ofstream m(fs::path(*out_dir) / "manifest.jsonl", std::ios::app);
            m << manifest << "\n";
        } else {
            if (artifacts_emitted > 0) std::cout << "\n";
            std::cout << content;
            std::cerr << manifest << "\n";
        }
        ++artifacts_emitted;
    }

    // Write to an explicit path (e.g. --dump-latencies) with a manifest line.
    void emit_path(const std::string& path, const std::string& content) {
        std::ofstream f(path, std::ios::binary);
        f << content;
        const std::string manifest = manifest_line(path, content);
        if (out_dir) {
            std::ofstream m(std::filesystem::path(*out_dir) / "manifest.jsonl", std::ios::app);
            m << manifest << "\n";
        } else {
            std::cerr << manifest << "\n";
        }
    }

  private:
    std::string manifest_line(const std::string& name, const std::string& content) const {
        const auto now = std::chrono::system_clock::now().time_since_epoch();
        const long long ts = std::chrono::duration_cast<std::chrono::seconds>(now).count();
        std::ostringstream os;
        os << "{\"subcommand\":\"" << json_escape(subcommand) << "\",\"argv\":[";
        for (std::size_t k = 0; k < argv.size(); ++k)
            os << (k ? "," : "") << "\"" << json_escape(argv[k]) << "\"";
        os << "],\"seed\":" << seed << ",\"version\":\"" << kVersion
           << "\",\"artifact\":\"" << json_escape(name) << "\",\"digest\":\""
           << hex64(fnv1a64(content)) << "\",\"timestamp\":" << ts << "}";
        return os.str();
    }
};

std::pair<int, int> parse_int_range(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("range must look like a:b");
    const int a = std::stoi(spec.substr(0, colon));
    const int b = std::stoi(spec.substr(colon + 1));
    if (b < a) throw std::invalid_argument("range upper end below lower end");
    return {a, b};
}

std::vector<double> parse_float_range(const std::string& spec) {
    const auto c1 = spec.find(':');
    const auto c2 = spec.find(':', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw std::invalid_argument("range must look like a:b:step");
    const double a = std::stod(spec.substr(0, c1));
    const double b = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
    const double step = std::stod(spec.substr(c2 + 1));
    if (!(step > 0.0)) throw std::invalid_argument("range step must be positive");
    std::vector<double> out;
    for (double x = a; x <= b + 1e-12; x += step) out.push_back(x);
    return out;
}

std::string opt_fmt(const std::optional<double>& v) {
    return v ? fmt(*v) : std::string("null");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Analytic model and discrete-event simulator for blockchain-mediated radio access"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 12345;
    std::string out_dir;
    std::string format = "csv";
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--seed", seed, "RNG seed (std::mt19937_64)");
    app.add_option("--out-dir", out_dir, "write artifacts into this directory");
    app.add_option("--format", format, "table format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    // config-field overrides, command line winning over the file
    std::optional<double> ov_lambda_a, ov_lambda_b, ov_lambda_c, ov_beta;
    std::optional<int> ov_s, ov_n_conf;
    std::optional<long long> ov_give_up;
    app.add_option("--lambda_a", ov_lambda_a, "request arrival rate");
    app.add_option("--lambda_b", ov_lambda_b, "block generation rate");
    app.add_option("--lambda_c", ov_lambda_c, "per-link service rate");
    app.add_option("--s", ov_s, "number of access links");
    app.add_option("--n_confirmations", ov_n_conf, "required confirmations");
    app.add_option("--beta", ov_beta, "attacker relative mining rate");
    app.add_option("--give_up", ov_give_up, "attacker give-up deficit (omit for unbounded)");

    // mining
    auto* c_mining = app.add_subcommand("mining", "sample block times, optionally histogrammed");
    double mine_rate = 0.1;
    long long mine_count = 10000;
    int mine_hist_bins = 0;
    c_mining->add_option("--rate", mine_rate, "block generation rate")->required();
    c_mining->add_option("--count", mine_count, "number of samples")->required();
    c_mining->add_option("--histogram", mine_hist_bins, "also emit a histogram with this many bins");
    c_mining->fallthrough();

    // steady-state
    auto* c_steady = app.add_subcommand("steady-state", "solve the truncated chain");
    std::optional<int> st_i_max, st_j_max;
    double st_tol = 1e-10;
    c_steady->add_option("--i-max", st_i_max, "pending-axis truncation");
    c_steady->add_option("--j-max", st_j_max, "confirmed-axis truncation");
    c_steady->add_option("--tol", st_tol, "residual tolerance");
    c_steady->fallthrough();

    // latency
    auto* c_latency = app.add_subcommand("latency", "analytic mean waiting time");
    int lat_n = 1;
    bool lat_footnote = false;
    c_latency->add_option("--n-confirmations", lat_n, "required confirmations");
    c_latency->add_flag("--footnote-form", lat_footnote,
                        "also report the (j-1)+ bookkeeping variant");
    c_latency->fallthrough();

    // bounds
    auto* c_bounds = app.add_subcommand("bounds", "closed-form latency bounds");
    int bnd_n = 1;
    c_bounds->add_option("--n-confirmations", bnd_n, "required confirmations");
    c_bounds->fallthrough();

    // security
    auto* c_security = app.add_subcommand("security", "attack success probability");
    int sec_n = 1;
    long long sec_trials = 0;
    c_security->add_option("--n-confirmations", sec_n, "confirmations on the attacked block");
    c_security->add_option("--mc-trials", sec_trials, "Monte-Carlo trials (0 = analytic only)");
    c_security->fallthrough();

    // security-sweep
    auto* c_sweep = app.add_subcommand("security-sweep", "grid of attack probabilities");
    std::string sweep_beta_range, sweep_n_range;
    c_sweep->add_option("--beta-range", sweep_beta_range, "a:b:step")->required();
    c_sweep->add_option("--n-range", sweep_n_range, "a:b inclusive")->required();
    c_sweep->fallthrough();

    // simulate
    auto* c_sim = app.add_subcommand("simulate", "discrete-event simulation run");
    int sim_n = 1;
    long long sim_served = 100000;
    double sim_warmup = 0.1;
    std::string sim_dump;
    c_sim->add_option("--n-confirmations", sim_n, "required confirmations");
    c_sim->add_option("--served", sim_served, "served requests after warm-up");
    c_sim->add_option("--warmup", sim_warmup, "warm-up fraction of served target");
    c_sim->add_option("--dump-latencies", sim_dump, "write per-request CSV to this path");
    c_sim->fallthrough();

    // validate
    auto* c_validate = app.add_subcommand("validate", "analytic vs simulated latency");
    std::string val_n_range = "1:6";
    long long val_served = 100000;
    c_validate->add_option("--n-range", val_n_range, "a:b inclusive");
    c_validate->add_option("--served", val_served, "served requests per cell");
    c_validate->fallthrough();

    // tradeoff
    auto* c_tradeoff = app.add_subcommand("tradeoff", "latency-security curve");
    int to_n_max = 10;
    c_tradeoff->add_option("--n-max", to_n_max, "largest confirmation count");
    c_tradeoff->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << "error BAD_USAGE " << e.get_name() << "\n";
        return 2;
    }

    try {
        bran::ToolConfig tc;
        if (!config_path.empty()) tc = bran::load_tool_config(config_path);
        if (ov_lambda_a) tc.lambda_a = *ov_lambda_a;
        if (ov_lambda_b) tc.lambda_b = *ov_lambda_b;
        if (ov_lambda_c) tc.lambda_c = *ov_lambda_c;
        if (ov_s) tc.s = *ov_s;
        if (ov_n_conf) tc.n_confirmations = *ov_n_conf;
        if (ov_beta) tc.beta = *ov_beta;
        if (app.count("--give_up")) tc.give_up = ov_give_up;

        Emitter em;
        em.argv.assign(argv, argv + argc);
        em.seed = seed;
        if (!out_dir.empty()) em.out_dir = out_dir;

        if (*c_mining) {
            em.subcommand = "mining";
            const bran::BlockTimeSample sample =
                bran::sample_block_times(bran::MiningProcess(mine_rate), mine_count, seed);
            Table t{{"block_time"}, {}};
            for (double d : sample.durations) t.rows.push_back({fmt(d)});
            em.emit("block_times.csv", t.render(format));
            if (mine_hist_bins > 0) {
                const double hi = *std::max_element(sample.durations.begin(),
                                                    sample.durations.end());
                const double width = hi / mine_hist_bins;
                std::vector<long long> counts(static_cast<std::size_t>(mine_hist_bins), 0);
                for (double d : sample.durations) {
                    int b = std::min(mine_hist_bins - 1,
                                     static_cast<int>(d / width));
                    ++counts[static_cast<std::size_t>(b)];
                }
                Table h{{"bin_left", "bin_right", "count"}, {}};
                for (int b = 0; b < mine_hist_bins; ++b)
                    h.rows.push_back({fmt(b * width), fmt((b + 1) * width),
                                      fmt(counts[static_cast<std::size_t>(b)])});
                em.emit("block_time_histogram.csv", h.render(format));
            }
        } else if (*c_steady) {
            em.subcommand = "steady-state";
            const bran::SystemConfig cfg = tc.system();
            bran::Truncation trunc = bran::Truncation::default_for(cfg);
            if (st_i_max || st_j_max)
                trunc = bran::Truncation(st_i_max.value_or(trunc.i_max),
                                         st_j_max.value_or(trunc.j_max));
            const auto dist =
                bran::solve_steady_state(bran::build_generator(cfg, trunc), st_tol);
            Table t{{"i", "j", "probability"}, {}};
            for (std::size_t k = 0; k < dist.states.size(); ++k)
                t.rows.push_back({fmt(dist.states[k].i), fmt(dist.states[k].j),
                                  fmt(dist.probabilities[k])});
            em.emit("steady_state.csv", t.render(format));
            std::ostringstream js;
            js << "{\"mean_outstanding\":" << fmt(bran::mean_outstanding(dist))
               << ",\"boundary_mass\":" << fmt(dist.boundary_mass)
               << ",\"residual\":" << fmt(dist.residual) << "}\n";
            em.emit("steady_state_summary.json", js.str());
        } else if (*c_latency) {
            em.subcommand = "latency";
            const bran::SystemConfig cfg = tc.system();
            const bran::ConfirmationPolicy pol(
                c_latency->count("--n-confirmations") ? lat_n : tc.n_confirmations);
            const auto trunc = bran::Truncation::default_for(cfg);
            const double lat = bran::expected_latency(pol, cfg, trunc);
            std::ostringstream js;
            js << "{\"latency\":" << fmt(lat)
               << ",\"sojourn\":" << fmt(lat + cfg.mean_service_time())
               << ",\"relative_to\":\"T_c\"";
            if (lat_footnote)
                js << ",\"latency_footnote_form\":"
                   << fmt(bran::expected_latency(pol, cfg, trunc, 1e-10,
                                                 bran::LatencyForm::footnote));
            js << "}\n";
            em.emit("latency.json", js.str());
        } else if (*c_bounds) {
            em.subcommand = "bounds";
            const bran::SystemConfig cfg = tc.system();
            const bran::ConfirmationPolicy pol(
                c_bounds->count("--n-confirmations") ? bnd_n : tc.n_confirmations);
            std::ostringstream js;
            js << "{\"lower_block\":" << fmt(bran::latency_lower_block(pol, cfg))
               << ",\"lower_mms\":" << fmt(bran::latency_lower_mms(pol, cfg))
               << ",\"upper\":" << opt_fmt(bran::latency_upper(pol, cfg)) << "}\n";
            em.emit("bounds.json", js.str());
        } else if (*c_security) {
            em.subcommand = "security";
            const int n = c_security->count("--n-confirmations") ? sec_n : tc.n_confirmations;
            const double analytic = bran::attack_success_prob(n, tc.beta, tc.give_up);
            std::optional<double> mc, three_sigma;
            if (sec_trials > 0 && tc.beta > 0.0) {
                const auto race =
                    bran::simulate_attack_race(n, tc.beta, tc.give_up, sec_trials, seed);
                mc = race.success_fraction;
                three_sigma = 3.0 * std::sqrt(analytic * (1.0 - analytic) /
                                              static_cast<double>(sec_trials));
            }
            std::ostringstream js;
            js << "{\"analytic\":" << fmt(analytic)
               << ",\"monte_carlo\":" << opt_fmt(mc)
               << ",\"trials\":" << (sec_trials > 0 ? fmt(sec_trials) : std::string("0"))
               << ",\"three_sigma\":" << opt_fmt(three_sigma) << "}\n";
            em.emit("security.json", js.str());
        } else if (*c_sweep) {
            em.subcommand = "security-sweep";
            const auto betas = parse_float_range(sweep_beta_range);
            const auto [n_lo, n_hi] = parse_int_range(sweep_n_range);
            Table t{{"beta", "n", "give_up", "probability"}, {}};
            const std::string gu = tc.give_up ? fmt(*tc.give_up) : std::string("inf");
            for (double b : betas)
                for (int n = std::max(1, n_lo); n <= n_hi; ++n)
                    t.rows.push_back({fmt(b), fmt(n), gu,
                                      fmt(bran::attack_success_prob(n, b, tc.give_up))});
            em.emit("security_sweep.csv", t.render(format));
        } else if (*c_sim) {
            em.subcommand = "simulate";
            const bran::SystemConfig cfg = tc.system();
            const bran::ConfirmationPolicy pol(
                c_sim->count("--n-confirmations") ? sim_n : tc.n_confirmations);
            const auto res = bran::run_simulation(cfg, pol, sim_served, sim_warmup, seed);
            std::ostringstream js;
            js << "{\"mean_latency\":" << fmt(res.mean_latency)
               << ",\"ci95\":" << fmt(res.ci95_halfwidth)
               << ",\"served\":" << fmt(res.served_count)
               << ",\"horizon\":" << fmt(res.horizon) << "}\n";
            em.emit("simulate.json", js.str());
            if (!sim_dump.empty()) {
                Table t{{"id", "arrival", "service_start", "service_end"}, {}};
                for (const auto& r : res.records)
                    t.rows.push_back({fmt(r.id), fmt(r.arrival_time),
                                      fmt(r.service_start), fmt(r.service_end)});
                em.emit_path(sim_dump, t.render("csv"));
            }
        } else if (*c_validate) {
            em.subcommand = "validate";
            const bran::SystemConfig cfg = tc.system();
            const auto [n_lo, n_hi] = parse_int_range(val_n_range);
            const auto trunc = bran::Truncation::default_for(cfg);
            Table t{{"n", "analytic", "sim_mean", "sim_ci95", "inside_ci"}, {}};
            for (int n = std::max(1, n_lo); n <= n_hi; ++n) {
                const bran::ConfirmationPolicy pol(n);
                const double analytic = bran::expected_latency(pol, cfg, trunc);
                const auto res = bran::run_simulation(
                    cfg, pol, val_served, 0.1,
                    bran::derive_seed(seed, static_cast<std::uint64_t>(n)));
                const bool inside =
                    std::abs(analytic - res.mean_latency) <= res.ci95_halfwidth;
                t.rows.push_back({fmt(n), fmt(analytic), fmt(res.mean_latency),
                                  fmt(res.ci95_halfwidth), inside ? "true" : "false"});
            }
            em.emit("validate.csv", t.render(format));
        } else if (*c_tradeoff) {
            em.subcommand = "tradeoff";
            const bran::SystemConfig cfg = tc.system();
            const auto curve = bran::tradeoff_curve(cfg, tc.beta, to_n_max);
            Table t{{"n", "latency", "attack_prob"}, {}};
            for (const auto& pt : curve)
                t.rows.push_back({fmt(pt.n), fmt(pt.latency), fmt(pt.attack_prob)});
            em.emit("tradeoff.csv", t.render(format));
        }
        return 0;
    } catch (const bran::ConfigNotFoundError& e) {
        std::cerr << "error CONFIG_NOT_FOUND " << e.what() << "\n";
        return 2;
    } catch (const bran::UnstableConfigError& e) {
        std::cerr << "error UNSTABLE_CONFIG " << e.what() << "\n";
        return 3;
    } catch (const bran::NonConvergenceError& e) {
        std::cerr << "error NON_CONVERGENCE " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error INVALID_ARGUMENT " << e.what() << "\n";
        return 2;
    }
}
