// bench: command-line front end for the warm-vapor photon-pair toolkit.
//
// Subcommands:
//   budget     forward rate/noise prediction or inversion of measured rates
//   simulate   synthetic detector timestamp streams (binary + CSV)
//   correlate  g2(tau) histograms and peak summaries from stream files
//   sweep      temperature / power / displacement model sweeps as CSV
//
// Exit codes: 0 success, 2 validation, 3 infeasible, 4 I/O.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "sfwm/budget.hpp"
#include "sfwm/config.hpp"
#include "sfwm/correlate.hpp"
#include "sfwm/errors.hpp"
#include "sfwm/geometry.hpp"
#include "sfwm/montecarlo.hpp"
#include "sfwm/stream_io.hpp"
#include "sfwm/sweep.hpp"
#include "sfwm/vapor.hpp"

namespace {

using nlohmann::json;

struct BudgetArgs {
    std::string config_path;
    std::string format = "text";
    std::optional<double> ms, mas, c;
    std::optional<double> eta_s, eta_as, bg_s, bg_as, window_ns;
    std::optional<double> pair_rate, noise_s, noise_as;
    std::optional<double> g2_cross, g2_ss, g2_asas, g2_raw;
};

json geometry_report(const sfwm::ExperimentConfig& cfg) {
    const sfwm::BeamGeometry g = sfwm::make_geometry(cfg);
    const double d = sfwm::phase_mismatch_length(g);
    json out;
    out["angle_deg"] = cfg.geometry.angle_deg;
    out["overlap_length_mm"] = sfwm::overlap_length(g) * 1e3;
    out["effective_overlap_length_mm"] = sfwm::effective_overlap_length(g) * 1e3;
    out["phase_mismatch_length_mm"] = d * 1e3;
    out["optimal_angle_deg"] =
        sfwm::optimal_angle(g.excitation_diameter, g.detection_diameter, d) * 180.0 /
        std::numbers::pi;
    out["phase_matched"] = sfwm::phase_matched(g);
    return out;
}

json vapor_report(const sfwm::ExperimentConfig& cfg) {
    const sfwm::VaporState v = sfwm::make_vapor(cfg);
    json out;
    out["temperature_c"] = cfg.vapor.temperature_c;
    out["density_per_m3"] = v.density;
    out["doppler_sigma_hz"] = v.doppler_sigma;
    out["od_resonant"] = v.od_resonant;
    return out;
}

void print_budget_text(const json& r) {
    std::printf("mode: %s\n", r.at("mode").get<std::string>().c_str());
    const auto& b = r.at("budget");
    std::printf("budget:\n");
    std::printf("  pair rate P        %12.4f Hz\n", b.at("pair_rate_hz").get<double>());
    std::printf("  noise N_S          %12.4f Hz\n", b.at("noise_stokes_hz").get<double>());
    std::printf("  noise N_AS         %12.4f Hz\n", b.at("noise_antistokes_hz").get<double>());
    std::printf("  eta_S / eta_AS     %8.4f / %.4f\n", b.at("eta_stokes").get<double>(),
                b.at("eta_antistokes").get<double>());
    std::printf("  background B_S     %12.4f Hz\n", b.at("background_stokes_hz").get<double>());
    std::printf("  background B_AS    %12.4f Hz\n",
                b.at("background_antistokes_hz").get<double>());
    std::printf("  window             %12.4f ns\n", b.at("window_ns").get<double>());
    const auto& s = r.at("singles");
    std::printf("singles:  M_S %.4f Hz, M_AS %.4f Hz\n", s.at("m_stokes_hz").get<double>(),
                s.at("m_antistokes_hz").get<double>());
    const auto& c = r.at("coincidences");
    std::printf("coincidences: C_sg %.6f Hz, C_ns %.6f Hz, C %.6f Hz\n",
                c.at("signal_hz").get<double>(), c.at("noise_hz").get<double>(),
                c.at("total_hz").get<double>());
    std::printf("g2 peak: %.4f\n", r.at("g2_peak").get<double>());
    if (r.contains("correlation")) {
        const auto& x = r.at("correlation");
        std::printf("correlation: g2_cross %.4f, g2_SS %.4f, g2_ASAS %.4f\n",
                    x.at("g2_cross").get<double>(), x.at("g2_ss").get<double>(),
                    x.at("g2_asas").get<double>());
        std::printf("  Cauchy-Schwarz factor F: %.4f\n", x.at("cs_factor").get<double>());
        std::printf("  heralded g2:             %.6f\n", x.at("g2_heralded").get<double>());
    }
    if (r.contains("background_correction")) {
        const auto& x = r.at("background_correction");
        std::printf("background correction: raw %.4f -> corrected %.4f\n",
                    x.at("g2_raw").get<double>(), x.at("g2_corrected").get<double>());
    }
    const auto& v = r.at("vapor");
    std::printf("vapor: %.2f C, density %.4e m^-3, doppler sigma %.4e Hz, OD %.2f\n",
                v.at("temperature_c").get<double>(), v.at("density_per_m3").get<double>(),
                v.at("doppler_sigma_hz").get<double>(), v.at("od_resonant").get<double>());
    const auto& g = r.at("geometry");
    std::printf("geometry: overlap %.3f mm (in-cell %.3f mm), phase-mismatch %.3f mm,\n"
                "  optimal angle %.3f deg, configured %.3f deg, phase matched: %s\n",
                g.at("overlap_length_mm").get<double>(),
                g.at("effective_overlap_length_mm").get<double>(),
                g.at("phase_mismatch_length_mm").get<double>(),
                g.at("optimal_angle_deg").get<double>(), g.at("angle_deg").get<double>(),
                g.at("phase_matched").get<bool>() ? "yes" : "no");
}

int run_budget(const BudgetArgs& args) {
    sfwm::ExperimentConfig cfg =
        args.config_path.empty() ? sfwm::ExperimentConfig{} : sfwm::load_config(args.config_path);
    if (args.eta_s) cfg.budget.eta_stokes = *args.eta_s;
    if (args.eta_as) cfg.budget.eta_antistokes = *args.eta_as;
    if (args.bg_s) cfg.budget.background_stokes_hz = *args.bg_s;
    if (args.bg_as) cfg.budget.background_antistokes_hz = *args.bg_as;
    if (args.window_ns) cfg.budget.window_ns = *args.window_ns;
    if (args.pair_rate) {
        cfg.budget.pair_rate_hz = *args.pair_rate;
        cfg.budget.pair_rate_per_mw_hz.reset();
    }
    if (args.noise_s) cfg.budget.noise_stokes_hz = *args.noise_s;
    if (args.noise_as) cfg.budget.noise_antistokes_hz = *args.noise_as;

    const bool solve_mode = args.ms || args.mas || args.c;
    if (solve_mode && !(args.ms && args.mas && args.c)) {
        throw sfwm::validation_error("budget: --ms, --mas and --c must be given together");
    }

    sfwm::RateBudget b;
    if (solve_mode) {
        b = sfwm::solve_budget(*args.ms, *args.mas, *args.c, cfg.budget.eta_stokes,
                               cfg.budget.eta_antistokes, cfg.budget.background_stokes_hz,
                               cfg.budget.background_antistokes_hz,
                               cfg.budget.window_ns * 1e-9);
    } else {
        b = sfwm::make_budget(cfg);
    }
    const sfwm::Singles singles = sfwm::forward_singles(b);
    const sfwm::Coincidences coinc = sfwm::forward_coincidences(b);
    const double g2 = sfwm::g2_peak(b);

    json r;
    r["mode"] = solve_mode ? "solve" : "forward";
    r["budget"] = {{"pair_rate_hz", b.pair_rate},
                   {"noise_stokes_hz", b.noise_stokes},
                   {"noise_antistokes_hz", b.noise_antistokes},
                   {"eta_stokes", b.eta_stokes},
                   {"eta_antistokes", b.eta_antistokes},
                   {"background_stokes_hz", b.background_stokes},
                   {"background_antistokes_hz", b.background_antistokes},
                   {"window_ns", b.window * 1e9}};
    r["singles"] = {{"m_stokes_hz", singles.stokes}, {"m_antistokes_hz", singles.antistokes}};
    r["coincidences"] = {{"signal_hz", coinc.signal},
                         {"noise_hz", coinc.noise},
                         {"total_hz", coinc.total()}};
    r["g2_peak"] = g2;
    if (args.g2_ss && args.g2_asas) {
        const double cross = args.g2_cross.value_or(g2);
        const sfwm::CorrelationSummary cs =
            sfwm::make_correlation_summary(cross, *args.g2_ss, *args.g2_asas);
        r["correlation"] = {{"g2_cross", cs.g2_cross_peak},
                            {"g2_ss", cs.g2_ss},
                            {"g2_asas", cs.g2_asas},
                            {"cs_factor", cs.cs_factor},
                            {"g2_heralded", cs.g2_heralded}};
    }
    if (args.g2_raw) {
        r["background_correction"] = {
            {"g2_raw", *args.g2_raw},
            {"g2_corrected",
             sfwm::background_correct(*args.g2_raw, singles.stokes, singles.antistokes,
                                      b.background_stokes, b.background_antistokes)}};
    }
    r["vapor"] = vapor_report(cfg);
    r["geometry"] = geometry_report(cfg);

    if (args.format == "json") {
        std::cout << r.dump(2) << '\n';
    } else {
        print_budget_text(r);
    }
    return 0;
}

struct SimulateArgs {
    std::string config_path;
    std::string out_path = "stream.bin";
    std::string csv_path, waveform_csv_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> duration_s;
    int threads = 1;
};

int run_simulate(const SimulateArgs& args) {
    const sfwm::ExperimentConfig cfg = sfwm::load_config(args.config_path);
    const sfwm::RateBudget b = sfwm::make_budget(cfg);
    const sfwm::Waveform w = sfwm::make_filtered_waveform(cfg);
    const double duration = args.duration_s.value_or(cfg.simulation.duration_s);
    const std::uint64_t seed = args.seed.value_or(cfg.simulation.seed);

    sfwm::SimulationOptions opt;
    opt.threads = args.threads;
    const sfwm::TimestampStream s = sfwm::simulate_stream(b, w, duration, seed, opt);
    sfwm::write_stream(args.out_path, s);
    if (!args.csv_path.empty()) sfwm::write_stream_csv(args.csv_path, s);
    if (!args.waveform_csv_path.empty()) sfwm::export_waveform_csv(args.waveform_csv_path, w);

    std::size_t n0 = 0, n1 = 0;
    for (const auto& rec : s.records) (rec.channel == 0 ? n0 : n1)++;
    std::printf("wrote %s: %zu records (%zu Stokes, %zu anti-Stokes), %.3f s, seed %llu\n",
                args.out_path.c_str(), s.records.size(), n0, n1, duration,
                static_cast<unsigned long long>(seed));
    return 0;
}

struct CorrelateArgs {
    std::string in_path, in2_path;
    std::string out_path;
    std::string auto_out_prefix;
    std::string format = "text";
    double bin_ps = 200.0;
    double range_ns = 30.0;
    std::optional<double> auto_bin_ps;
    std::optional<double> duration_s;
    std::uint64_t seed = 1;
    int threads = 1;
};

double tail_mean(const sfwm::CorrelationHistogram& h) {
    // outermost quarter of the bins on each side
    double acc = 0.0;
    std::size_t n = 0;
    const std::size_t q = h.bins() / 4;
    for (std::size_t k = 0; k < h.bins(); ++k) {
        if (k < q || k >= h.bins() - q) {
            acc += h.normalized[k];
            ++n;
        }
    }
    return n ? acc / static_cast<double>(n) : 0.0;
}

int run_correlate(const CorrelateArgs& args) {
    const sfwm::TimestampStream in = sfwm::read_stream(args.in_path, args.duration_s);
    sfwm::TimestampStream s1, s2;
    if (!args.in2_path.empty()) {
        s1 = in;
        s2 = sfwm::read_stream(args.in2_path, args.duration_s);
    } else {
        s1 = sfwm::filter_channel(in, sfwm::channel_stokes);
        s2 = sfwm::filter_channel(in, sfwm::channel_antistokes);
    }
    const double bin = args.bin_ps * 1e-12;
    const double range = args.range_ns * 1e-9;
    const sfwm::CorrelationHistogram h =
        sfwm::cross_correlate(s1, s2, bin, range, args.threads);
    if (!args.out_path.empty()) sfwm::export_histogram_csv(args.out_path, h);

    json r;
    r["records_1"] = s1.records.size();
    r["records_2"] = s2.records.size();
    r["duration_s"] = h.duration;
    r["bin_ps"] = args.bin_ps;

    std::optional<sfwm::PeakSummary> peak;
    try {
        peak = sfwm::peak_and_window(h);
    } catch (const sfwm::no_peak_error&) {
    }
    if (peak) {
        r["g2_peak"] = peak->g2_peak;
        r["peak_tau_ns"] = peak->peak_tau * 1e9;
        r["fwhm_window_ns"] = peak->fwhm_window * 1e9;
        r["coincidences_in_window_hz"] = peak->coincidences_in_window;
        r["bandwidth_mhz"] = sfwm::bandwidth_from_width(peak->fwhm_window) / 1e6;
    } else {
        r["note"] = "no detectable correlation peak; histogram consistent with g2 = 1";
        r["tail_mean_g2"] = tail_mean(h);
    }

    const bool want_auto = !args.auto_out_prefix.empty();
    if (want_auto) {
        if (!args.in2_path.empty()) {
            throw sfwm::validation_error(
                "correlate: autocorrelations need a single two-channel stream (--in only)");
        }
        const double abin = args.auto_bin_ps.value_or(args.bin_ps) * 1e-12;
        const sfwm::CorrelationHistogram hss =
            sfwm::auto_correlate(s1, abin, range, args.seed, args.threads);
        const sfwm::CorrelationHistogram hasas =
            sfwm::auto_correlate(s2, abin, range, args.seed + 1, args.threads);
        sfwm::export_histogram_csv(args.auto_out_prefix + "_ss.csv", hss);
        sfwm::export_histogram_csv(args.auto_out_prefix + "_asas.csv", hasas);
        const double g2ss = hss.normalized[hss.zero_bin()];
        const double g2asas = hasas.normalized[hasas.zero_bin()];
        r["g2_ss_zero"] = g2ss;
        r["g2_asas_zero"] = g2asas;
        if (peak && g2ss > 0.0 && g2asas > 0.0) {
            r["cs_factor"] = sfwm::cs_violation(peak->g2_peak, g2ss, g2asas);
            r["g2_heralded"] = sfwm::heralded_g2(g2asas, peak->g2_peak);
        }
    }

    if (args.format == "json") {
        std::cout << r.dump(2) << '\n';
    } else {
        if (peak) {
            std::printf("g2 peak %.4f at tau %.4f ns; FWHM window %.4f ns; "
                        "coincidences in window %.4f Hz; bandwidth %.2f MHz\n",
                        peak->g2_peak, peak->peak_tau * 1e9, peak->fwhm_window * 1e9,
                        peak->coincidences_in_window,
                        sfwm::bandwidth_from_width(peak->fwhm_window) / 1e6);
        } else {
            std::printf("no detectable correlation peak; histogram consistent with g2 = 1 "
                        "(tail mean %.4f)\n",
                        r.at("tail_mean_g2").get<double>());
        }
        if (r.contains("g2_ss_zero")) {
            std::printf("autocorrelations: g2_SS(0) %.4f, g2_ASAS(0) %.4f\n",
                        r.at("g2_ss_zero").get<double>(), r.at("g2_asas_zero").get<double>());
        }
        if (r.contains("cs_factor")) {
            std::printf("Cauchy-Schwarz factor F %.4f; heralded g2 %.6f\n",
                        r.at("cs_factor").get<double>(), r.at("g2_heralded").get<double>());
        }
    }
    return 0;
}

struct SweepArgs {
    std::string config_path;
    std::string axis;
    std::string out_path;
    double from = 0.0, to = 0.0;
    int steps = 0;
    int threads = 1;
};

int run_sweep_cmd(const SweepArgs& args) {
    const sfwm::ExperimentConfig cfg = sfwm::load_config(args.config_path);
    const sfwm::SweepResult result = sfwm::run_sweep(cfg, sfwm::axis_from_name(args.axis),
                                                     args.from, args.to, args.steps,
                                                     args.threads);
    if (args.out_path.empty()) {
        sfwm::write_sweep_csv(result, std::cout);
    } else {
        std::ofstream out(args.out_path, std::ios::trunc);
        if (!out) throw sfwm::io_error("cannot open '" + args.out_path + "' for writing");
        sfwm::write_sweep_csv(result, out);
        std::printf("wrote %s: %zu rows\n", args.out_path.c_str(), result.rows.size());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"warm-vapor photon-pair source simulator and analysis toolkit"};
    app.require_subcommand(1);

    BudgetArgs budget_args;
    CLI::App* budget = app.add_subcommand(
        "budget", "forward rate prediction, or inversion of measured rates into (P, N_S, N_AS)");
    budget->add_option("--config", budget_args.config_path, "experiment config JSON");
    budget->add_option("--ms", budget_args.ms, "measured Stokes singles rate [Hz] (solve mode)");
    budget->add_option("--mas", budget_args.mas,
                       "measured anti-Stokes singles rate [Hz] (solve mode)");
    budget->add_option("--c", budget_args.c, "measured coincidence rate [Hz] (solve mode)");
    budget->add_option("--eta-s", budget_args.eta_s, "Stokes detection efficiency");
    budget->add_option("--eta-as", budget_args.eta_as, "anti-Stokes detection efficiency");
    budget->add_option("--bg-s", budget_args.bg_s, "Stokes background rate [Hz]");
    budget->add_option("--bg-as", budget_args.bg_as, "anti-Stokes background rate [Hz]");
    budget->add_option("--window-ns", budget_args.window_ns, "coincidence window [ns]");
    budget->add_option("--pair-rate", budget_args.pair_rate, "pair rate override [Hz]");
    budget->add_option("--noise-s", budget_args.noise_s, "Stokes noise override [Hz]");
    budget->add_option("--noise-as", budget_args.noise_as, "anti-Stokes noise override [Hz]");
    budget->add_option("--g2-cross", budget_args.g2_cross,
                       "measured cross-correlation peak (defaults to the model value)");
    budget->add_option("--g2-ss", budget_args.g2_ss, "measured Stokes autocorrelation");
    budget->add_option("--g2-asas", budget_args.g2_asas, "measured anti-Stokes autocorrelation");
    budget->add_option("--g2-raw", budget_args.g2_raw,
                       "uncorrected g2 peak to background-correct");
    budget->add_option("--format", budget_args.format, "text|json")
        ->check(CLI::IsMember({"text", "json"}));

    SimulateArgs sim_args;
    CLI::App* simulate =
        app.add_subcommand("simulate", "generate a synthetic detector timestamp stream");
    simulate->add_option("--config", sim_args.config_path, "experiment config JSON")
        ->required();
    simulate->add_option("--out", sim_args.out_path, "output stream file (binary)");
    simulate->add_option("--csv-out", sim_args.csv_path, "also export records as CSV");
    simulate->add_option("--waveform-csv", sim_args.waveform_csv_path,
                         "export the sampled waveform as CSV");
    simulate->add_option("--seed", sim_args.seed, "RNG seed (overrides config)");
    simulate->add_option("--duration-s", sim_args.duration_s, "duration (overrides config)");
    simulate->add_option("--threads", sim_args.threads, "generation threads")
        ->check(CLI::Range(1, 256));

    CorrelateArgs corr_args;
    CLI::App* correlate =
        app.add_subcommand("correlate", "estimate g2(tau) from timestamp stream files");
    correlate->add_option("--in", corr_args.in_path, "stream file (two channels)")->required();
    correlate->add_option("--in2", corr_args.in2_path,
                          "second stream file (correlate file vs file)");
    correlate->add_option("--bin-ps", corr_args.bin_ps, "histogram bin width [ps]");
    correlate->add_option("--range-ns", corr_args.range_ns, "correlation half-range [ns]");
    correlate->add_option("--out", corr_args.out_path, "histogram CSV output");
    correlate->add_option("--auto-out-prefix", corr_args.auto_out_prefix,
                          "also run per-channel autocorrelations; CSV prefix");
    correlate->add_option("--auto-bin-ps", corr_args.auto_bin_ps,
                          "autocorrelation bin width [ps] (default --bin-ps)");
    correlate->add_option("--seed", corr_args.seed, "HBT-splitter seed");
    correlate->add_option("--duration-s", corr_args.duration_s,
                          "stream duration [s] (default: inferred from last timestamp)");
    correlate->add_option("--threads", corr_args.threads, "correlation threads")
        ->check(CLI::Range(1, 256));
    correlate->add_option("--format", corr_args.format, "text|json")
        ->check(CLI::IsMember({"text", "json"}));

    SweepArgs sweep_args;
    CLI::App* sweep =
        app.add_subcommand("sweep", "evaluate the forward model over a parameter axis");
    sweep->add_option("--config", sweep_args.config_path, "experiment config JSON")->required();
    sweep->add_option("--axis", sweep_args.axis, "temperature|power|displacement")->required();
    sweep->add_option("--from", sweep_args.from, "axis start")->required();
    sweep->add_option("--to", sweep_args.to, "axis end")->required();
    sweep->add_option("--steps", sweep_args.steps, "number of points")->required();
    sweep->add_option("--out", sweep_args.out_path, "CSV output path (default stdout)");
    sweep->add_option("--threads", sweep_args.threads, "evaluation threads")
        ->check(CLI::Range(1, 256));

    try {
        app.parse(argc, argv);
        if (budget->parsed()) return run_budget(budget_args);
        if (simulate->parsed()) return run_simulate(sim_args);
        if (correlate->parsed()) return run_correlate(corr_args);
        if (sweep->parsed()) return run_sweep_cmd(sweep_args);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const sfwm::validation_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const sfwm::infeasible_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const sfwm::io_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
