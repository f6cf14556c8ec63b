#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "sfwm/biphoton.hpp"
#include "sfwm/budget.hpp"
#include "sfwm/errors.hpp"
#include "sfwm/geometry.hpp"
#include "sfwm/vapor.hpp"

namespace sfwm {

// JSON experiment configuration. Keys carry their unit as a suffix; unknown
// keys are rejected. Defaults reproduce the reference operating point of the
// source (42 C cell, 1.6 degree crossing, 30 mW pump).
struct VaporConfig {
    double temperature_c = 42.0;
    double od_resonant = 3.4;
    double reference_path_m = 0.075;
    friend bool operator==(const VaporConfig&, const VaporConfig&) = default;
};

struct GeometryConfig {
    double angle_deg = 1.6;
    double excitation_diameter_m = 0.35e-3;
    double detection_diameter_m = 0.10e-3;
    double splitting_hz = 13.6e9;
    double displacement_mm = 0.0;
    double cell_length_m = 0.075;
    friend bool operator==(const GeometryConfig&, const GeometryConfig&) = default;
};

struct BudgetConfig {
    // Pair rate either directly or as pump_power_mw * pair_rate_per_mw_hz.
    std::optional<double> pair_rate_hz = 383.0;
    std::optional<double> pump_power_mw = 30.0;
    std::optional<double> pair_rate_per_mw_hz;
    double noise_stokes_hz = 35e3;
    double noise_antistokes_hz = 33e3;
    double eta_stokes = 0.21;
    double eta_antistokes = 0.22;
    double background_stokes_hz = 200.0;
    double background_antistokes_hz = 2200.0;
    double window_ns = 2.916;
    double min_valid_power_mw = 0.0; // below this, sweep rows are flagged
    std::optional<double> raman_stokes_hz;
    std::optional<double> raman_antistokes_hz;
    friend bool operator==(const BudgetConfig&, const BudgetConfig&) = default;
};

struct WaveformConfig {
    std::optional<double> decay_rate_hz = 3.429355281207133e8; // 1 / 2.916 ns
    std::optional<double> target_bandwidth_mhz;
    friend bool operator==(const WaveformConfig&, const WaveformConfig&) = default;
};

struct FiltersConfig {
    std::optional<double> stokes_fwhm_mhz;
    std::optional<double> antistokes_fwhm_mhz;
    double stokes_peak_transmission = 0.62;
    double antistokes_peak_transmission = 0.71;
    friend bool operator==(const FiltersConfig&, const FiltersConfig&) = default;
};

struct SimulationConfig {
    double duration_s = 10.0;
    std::uint64_t seed = 1;
    double bin_ps = 200.0;
    double tau_range_ns = 30.0;
    friend bool operator==(const SimulationConfig&, const SimulationConfig&) = default;
};

struct ExperimentConfig {
    VaporConfig vapor;
    GeometryConfig geometry;
    BudgetConfig budget;
    WaveformConfig waveform;
    FiltersConfig filters;
    SimulationConfig simulation;
    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

namespace detail {

using json = nlohmann::json;

inline void reject_unknown(const json& j, const std::string& scope,
                           const std::set<std::string>& known) {
    if (!j.is_object()) throw validation_error("config: '" + scope + "' must be an object");
    for (const auto& item : j.items()) {
        if (!known.count(item.key())) {
            throw validation_error("config: unknown key '" + scope + "." + item.key() + "'");
        }
    }
}

inline void get_num(const json& j, const char* key, double& out) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_number()) {
        throw validation_error(std::string("config: '") + key + "' must be a number");
    }
    out = j.at(key).get<double>();
}

inline void get_num(const json& j, const char* key, std::optional<double>& out) {
    if (!j.contains(key)) return;
    if (j.at(key).is_null()) {
        out.reset();
        return;
    }
    if (!j.at(key).is_number()) {
        throw validation_error(std::string("config: '") + key + "' must be a number");
    }
    out = j.at(key).get<double>();
}

} // namespace detail

inline void validate_config(const ExperimentConfig& c) {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) throw validation_error(std::string("config: ") + name + " must be > 0");
    };
    positive(c.vapor.reference_path_m, "vapor.reference_path_m");
    if (!(c.vapor.od_resonant >= 0.0)) {
        throw validation_error("config: vapor.od_resonant must be >= 0");
    }
    positive(c.geometry.angle_deg, "geometry.angle_deg");
    if (!(c.geometry.angle_deg < 90.0)) {
        throw validation_error("config: geometry.angle_deg must be < 90");
    }
    positive(c.geometry.excitation_diameter_m, "geometry.excitation_diameter_m");
    positive(c.geometry.detection_diameter_m, "geometry.detection_diameter_m");
    positive(c.geometry.splitting_hz, "geometry.splitting_hz");
    positive(c.geometry.cell_length_m, "geometry.cell_length_m");
    positive(c.budget.window_ns, "budget.window_ns");

    const bool direct = c.budget.pair_rate_hz.has_value();
    const bool linear =
        c.budget.pump_power_mw.has_value() && c.budget.pair_rate_per_mw_hz.has_value();
    if (direct && c.budget.pair_rate_per_mw_hz.has_value()) {
        throw validation_error("config: give budget.pair_rate_hz or "
                               "budget.pair_rate_per_mw_hz, not both");
    }
    if (!direct && !linear) {
        throw validation_error("config: budget needs pair_rate_hz, or pump_power_mw with "
                               "pair_rate_per_mw_hz");
    }

    const bool decay = c.waveform.decay_rate_hz.has_value();
    const bool target = c.waveform.target_bandwidth_mhz.has_value();
    if (decay == target) {
        throw validation_error("config: waveform needs exactly one of decay_rate_hz or "
                               "target_bandwidth_mhz");
    }
    positive(c.simulation.duration_s, "simulation.duration_s");
    positive(c.simulation.bin_ps, "simulation.bin_ps");
    positive(c.simulation.tau_range_ns, "simulation.tau_range_ns");
}

inline ExperimentConfig parse_config(const nlohmann::json& j) {
    using detail::get_num;
    using detail::reject_unknown;
    reject_unknown(j, "config",
                   {"vapor", "geometry", "budget", "waveform", "filters", "simulation"});
    ExperimentConfig c;
    if (j.contains("vapor")) {
        const auto& v = j.at("vapor");
        reject_unknown(v, "vapor", {"temperature_c", "od_resonant", "reference_path_m"});
        get_num(v, "temperature_c", c.vapor.temperature_c);
        get_num(v, "od_resonant", c.vapor.od_resonant);
        get_num(v, "reference_path_m", c.vapor.reference_path_m);
    }
    if (j.contains("geometry")) {
        const auto& g = j.at("geometry");
        reject_unknown(g, "geometry",
                       {"angle_deg", "excitation_diameter_m", "detection_diameter_m",
                        "splitting_hz", "displacement_mm", "cell_length_m"});
        get_num(g, "angle_deg", c.geometry.angle_deg);
        get_num(g, "excitation_diameter_m", c.geometry.excitation_diameter_m);
        get_num(g, "detection_diameter_m", c.geometry.detection_diameter_m);
        get_num(g, "splitting_hz", c.geometry.splitting_hz);
        get_num(g, "displacement_mm", c.geometry.displacement_mm);
        get_num(g, "cell_length_m", c.geometry.cell_length_m);
    }
    if (j.contains("budget")) {
        const auto& b = j.at("budget");
        reject_unknown(b, "budget",
                       {"pair_rate_hz", "pump_power_mw", "pair_rate_per_mw_hz",
                        "noise_stokes_hz", "noise_antistokes_hz", "eta_stokes",
                        "eta_antistokes", "background_stokes_hz", "background_antistokes_hz",
                        "window_ns", "min_valid_power_mw", "raman_stokes_hz",
                        "raman_antistokes_hz"});
        if (b.contains("pair_rate_per_mw_hz") && !b.at("pair_rate_per_mw_hz").is_null()) {
            c.budget.pair_rate_hz.reset(); // linear power mode replaces the default
        }
        get_num(b, "pair_rate_hz", c.budget.pair_rate_hz);
        get_num(b, "pump_power_mw", c.budget.pump_power_mw);
        get_num(b, "pair_rate_per_mw_hz", c.budget.pair_rate_per_mw_hz);
        get_num(b, "noise_stokes_hz", c.budget.noise_stokes_hz);
        get_num(b, "noise_antistokes_hz", c.budget.noise_antistokes_hz);
        get_num(b, "eta_stokes", c.budget.eta_stokes);
        get_num(b, "eta_antistokes", c.budget.eta_antistokes);
        get_num(b, "background_stokes_hz", c.budget.background_stokes_hz);
        get_num(b, "background_antistokes_hz", c.budget.background_antistokes_hz);
        get_num(b, "window_ns", c.budget.window_ns);
        get_num(b, "min_valid_power_mw", c.budget.min_valid_power_mw);
        get_num(b, "raman_stokes_hz", c.budget.raman_stokes_hz);
        get_num(b, "raman_antistokes_hz", c.budget.raman_antistokes_hz);
    }
    if (j.contains("waveform")) {
        const auto& w = j.at("waveform");
        reject_unknown(w, "waveform", {"decay_rate_hz", "target_bandwidth_mhz"});
        if (w.contains("target_bandwidth_mhz") && !w.at("target_bandwidth_mhz").is_null()) {
            c.waveform.decay_rate_hz.reset();
        }
        get_num(w, "decay_rate_hz", c.waveform.decay_rate_hz);
        get_num(w, "target_bandwidth_mhz", c.waveform.target_bandwidth_mhz);
    }
    if (j.contains("filters")) {
        const auto& f = j.at("filters");
        reject_unknown(f, "filters",
                       {"stokes_fwhm_mhz", "antistokes_fwhm_mhz", "stokes_peak_transmission",
                        "antistokes_peak_transmission"});
        get_num(f, "stokes_fwhm_mhz", c.filters.stokes_fwhm_mhz);
        get_num(f, "antistokes_fwhm_mhz", c.filters.antistokes_fwhm_mhz);
        get_num(f, "stokes_peak_transmission", c.filters.stokes_peak_transmission);
        get_num(f, "antistokes_peak_transmission", c.filters.antistokes_peak_transmission);
    }
    if (j.contains("simulation")) {
        const auto& s = j.at("simulation");
        reject_unknown(s, "simulation", {"duration_s", "seed", "bin_ps", "tau_range_ns"});
        get_num(s, "duration_s", c.simulation.duration_s);
        if (s.contains("seed")) {
            if (!s.at("seed").is_number_unsigned()) {
                throw validation_error("config: 'seed' must be an unsigned integer");
            }
            c.simulation.seed = s.at("seed").get<std::uint64_t>();
        }
        get_num(s, "bin_ps", c.simulation.bin_ps);
        get_num(s, "tau_range_ns", c.simulation.tau_range_ns);
    }
    validate_config(c);
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw validation_error("config '" + path + "': " + e.what());
    }
    return parse_config(j);
}

inline nlohmann::json serialize_config(const ExperimentConfig& c) {
    nlohmann::json j;
    j["vapor"] = {{"temperature_c", c.vapor.temperature_c},
                  {"od_resonant", c.vapor.od_resonant},
                  {"reference_path_m", c.vapor.reference_path_m}};
    j["geometry"] = {{"angle_deg", c.geometry.angle_deg},
                     {"excitation_diameter_m", c.geometry.excitation_diameter_m},
                     {"detection_diameter_m", c.geometry.detection_diameter_m},
                     {"splitting_hz", c.geometry.splitting_hz},
                     {"displacement_mm", c.geometry.displacement_mm},
                     {"cell_length_m", c.geometry.cell_length_m}};
    nlohmann::json b;
    // keys with non-null defaults serialize as null when unset so that
    // parse(serialize(x)) == x
    b["pair_rate_hz"] =
        c.budget.pair_rate_hz ? nlohmann::json(*c.budget.pair_rate_hz) : nlohmann::json();
    b["pump_power_mw"] =
        c.budget.pump_power_mw ? nlohmann::json(*c.budget.pump_power_mw) : nlohmann::json();
    if (c.budget.pair_rate_per_mw_hz) b["pair_rate_per_mw_hz"] = *c.budget.pair_rate_per_mw_hz;
    b["noise_stokes_hz"] = c.budget.noise_stokes_hz;
    b["noise_antistokes_hz"] = c.budget.noise_antistokes_hz;
    b["eta_stokes"] = c.budget.eta_stokes;
    b["eta_antistokes"] = c.budget.eta_antistokes;
    b["background_stokes_hz"] = c.budget.background_stokes_hz;
    b["background_antistokes_hz"] = c.budget.background_antistokes_hz;
    b["window_ns"] = c.budget.window_ns;
    b["min_valid_power_mw"] = c.budget.min_valid_power_mw;
    if (c.budget.raman_stokes_hz) b["raman_stokes_hz"] = *c.budget.raman_stokes_hz;
    if (c.budget.raman_antistokes_hz) {
        b["raman_antistokes_hz"] = *c.budget.raman_antistokes_hz;
    }
    j["budget"] = std::move(b);
    nlohmann::json w;
    w["decay_rate_hz"] =
        c.waveform.decay_rate_hz ? nlohmann::json(*c.waveform.decay_rate_hz) : nlohmann::json();
    if (c.waveform.target_bandwidth_mhz) {
        w["target_bandwidth_mhz"] = *c.waveform.target_bandwidth_mhz;
    }
    j["waveform"] = std::move(w);
    nlohmann::json f;
    if (c.filters.stokes_fwhm_mhz) f["stokes_fwhm_mhz"] = *c.filters.stokes_fwhm_mhz;
    if (c.filters.antistokes_fwhm_mhz) {
        f["antistokes_fwhm_mhz"] = *c.filters.antistokes_fwhm_mhz;
    }
    f["stokes_peak_transmission"] = c.filters.stokes_peak_transmission;
    f["antistokes_peak_transmission"] = c.filters.antistokes_peak_transmission;
    j["filters"] = std::move(f);
    j["simulation"] = {{"duration_s", c.simulation.duration_s},
                       {"seed", c.simulation.seed},
                       {"bin_ps", c.simulation.bin_ps},
                       {"tau_range_ns", c.simulation.tau_range_ns}};
    return j;
}

/// Resolved pair rate (direct or pump-power-linear).
inline double pair_rate_of(const ExperimentConfig& c) {
    if (c.budget.pair_rate_hz) return *c.budget.pair_rate_hz;
    return *c.budget.pump_power_mw * *c.budget.pair_rate_per_mw_hz;
}

inline RateBudget make_budget(const ExperimentConfig& c) {
    RateBudget b;
    b.pair_rate = pair_rate_of(c);
    b.noise_stokes = c.budget.noise_stokes_hz;
    b.noise_antistokes = c.budget.noise_antistokes_hz;
    b.eta_stokes = c.budget.eta_stokes;
    b.eta_antistokes = c.budget.eta_antistokes;
    b.background_stokes = c.budget.background_stokes_hz;
    b.background_antistokes = c.budget.background_antistokes_hz;
    b.window = c.budget.window_ns * 1e-9;
    if (c.budget.raman_stokes_hz || c.budget.raman_antistokes_hz) {
        b.raman = NoiseBreakdown{c.budget.raman_stokes_hz.value_or(0.0),
                                 c.budget.raman_antistokes_hz.value_or(0.0)};
    }
    validate_budget(b);
    return b;
}

inline VaporState make_vapor(const ExperimentConfig& c) {
    return make_vapor_state(c.vapor.temperature_c + 273.15, c.vapor.od_resonant,
                            c.vapor.reference_path_m);
}

inline BeamGeometry make_geometry(const ExperimentConfig& c) {
    BeamGeometry g;
    g.crossing_angle = c.geometry.angle_deg * std::numbers::pi / 180.0;
    g.excitation_diameter = c.geometry.excitation_diameter_m;
    g.detection_diameter = c.geometry.detection_diameter_m;
    g.stokes_antistokes_splitting = c.geometry.splitting_hz;
    g.waist = 290e-6;
    g.cell_length = c.geometry.cell_length_m;
    g.displacement_z = c.geometry.displacement_mm * 1e-3;
    return g;
}

inline std::vector<FilterSpec> make_filters(const ExperimentConfig& c) {
    std::vector<FilterSpec> out;
    if (c.filters.stokes_fwhm_mhz) {
        out.push_back({*c.filters.stokes_fwhm_mhz * 1e6, c.filters.stokes_peak_transmission});
    }
    if (c.filters.antistokes_fwhm_mhz) {
        out.push_back(
            {*c.filters.antistokes_fwhm_mhz * 1e6, c.filters.antistokes_peak_transmission});
    }
    return out;
}

/// Waveform seen by the detectors: the configured wavepacket with each
/// configured filter's impulse response applied once.
inline Waveform make_filtered_waveform(const ExperimentConfig& c, double bin_width = 10e-12) {
    const std::vector<FilterSpec> filters = make_filters(c);
    double decay;
    if (c.waveform.decay_rate_hz) {
        decay = *c.waveform.decay_rate_hz;
    } else {
        decay = fit_decay_rate(*c.waveform.target_bandwidth_mhz * 1e6, filters, bin_width);
    }
    return apply_filters(ideal_waveform(decay, bin_width, 14.0 / decay), filters);
}

} // namespace sfwm
