#include "uavrelay/scenario.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "uavrelay/uav_power.hpp"

namespace uavrelay {

using nlohmann::json;

namespace {

std::string join_lines(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) {
        if (!out.empty()) out += "; ";
        out += s;
    }
    return out;
}

struct KeySpec {
    std::string name;
    std::string help;
    std::function<void(Scenario&, const json&)> apply;
};

double as_number(const json& v, const std::string& key) {
    if (!v.is_number()) throw ScenarioError(ScenarioError::Kind::parse, {key + ": expected a number"});
    return v.get<double>();
}

std::size_t as_count(const json& v, const std::string& key) {
    if (!v.is_number_integer() && !v.is_number_unsigned())
        throw ScenarioError(ScenarioError::Kind::parse, {key + ": expected an integer"});
    const auto n = v.get<long long>();
    if (n < 0) throw ScenarioError(ScenarioError::Kind::validation, {key + " must be >= 1"});
    return static_cast<std::size_t>(n);
}

std::vector<double> as_point(const json& v, const std::string& key, std::size_t min_len,
                             std::size_t max_len) {
    if (!v.is_array() || v.size() < min_len || v.size() > max_len)
        throw ScenarioError(ScenarioError::Kind::parse,
                            {key + ": expected an array of " + std::to_string(min_len) + ".." +
                             std::to_string(max_len) + " numbers"});
    std::vector<double> out;
    for (const auto& x : v) out.push_back(as_number(x, key));
    return out;
}

// Parse-time flags for keys whose defaults depend on other keys.
struct LoadState {
    bool have_n_ues = false;
    bool have_n_sub = false;
    bool have_positions = false;
    bool have_uav = false;
    bool have_freq_list = false;
    double freq_scalar = 1e9;
    bool have_snr_ue_uav = false;
    bool have_snr_uav_bs = false;
};

std::vector<KeySpec> make_keys(LoadState& st) {
    std::vector<KeySpec> keys;
    auto number = [&](std::string name, std::string help, std::function<void(Scenario&, double)> f) {
        keys.push_back({name, std::move(help), [name, f](Scenario& s, const json& v) {
                            f(s, as_number(v, name));
                        }});
    };
    keys.push_back({"n_ues", "number of UEs N", [&st](Scenario& s, const json& v) {
                        s.n_ues = as_count(v, "n_ues");
                        st.have_n_ues = true;
                    }});
    keys.push_back({"n_subchannels", "number of subchannels K", [&st](Scenario& s, const json& v) {
                        s.n_subchannels = as_count(v, "n_subchannels");
                        st.have_n_sub = true;
                    }});
    keys.push_back({"n_slots", "number of time slots T",
                    [](Scenario& s, const json& v) { s.n_slots = as_count(v, "n_slots"); }});
    number("slot_len_s", "slot duration", [](Scenario& s, double x) { s.slot_len = x; });
    number("bs_height_m", "BS antenna height", [](Scenario& s, double x) { s.bs_height = x; });
    number("cell_radius_m", "radius of the disc UEs are sampled in",
           [](Scenario& s, double x) { s.cell_radius = x; });
    number("p_ue_max_dbm", "UE power budget", [](Scenario& s, double x) { s.p_ue_max = dbm_to_watts(x); });
    number("p_ue_max_w", "UE power budget", [](Scenario& s, double x) { s.p_ue_max = x; });
    number("p_uav_max_w", "UAV relay power budget", [](Scenario& s, double x) { s.p_uav_max = x; });
    number("p_uav_max_dbm", "UAV relay power budget",
           [](Scenario& s, double x) { s.p_uav_max = dbm_to_watts(x); });
    number("noise_var_dbm", "noise power per subchannel",
           [](Scenario& s, double x) { s.noise_var = dbm_to_watts(x); });
    number("noise_var_w", "noise power per subchannel", [](Scenario& s, double x) { s.noise_var = x; });
    number("ici_power_dbm", "constant ICI power at the BS",
           [](Scenario& s, double x) { s.ici_power = dbm_to_watts(x); });
    number("ici_power_w", "constant ICI power at the BS", [](Scenario& s, double x) { s.ici_power = x; });
    number("pathloss_exp", "terrestrial path-loss exponent", [](Scenario& s, double x) { s.pathloss_exp = x; });
    number("eta_los_db", "LoS excess attenuation", [](Scenario& s, double x) { s.a2g.eta_los = db_to_linear(x); });
    number("eta_los", "LoS excess attenuation (linear)", [](Scenario& s, double x) { s.a2g.eta_los = x; });
    number("eta_nlos_db", "NLoS excess attenuation",
           [](Scenario& s, double x) { s.a2g.eta_nlos = db_to_linear(x); });
    number("eta_nlos", "NLoS excess attenuation (linear)", [](Scenario& s, double x) { s.a2g.eta_nlos = x; });
    number("a2g_a", "LoS probability parameter a", [](Scenario& s, double x) { s.a2g.a = x; });
    number("a2g_b", "LoS probability parameter b", [](Scenario& s, double x) { s.a2g.b = x; });
    number("subchannel_freq_hz", "carrier of every subchannel", [&st](Scenario&, double x) { st.freq_scalar = x; });
    keys.push_back({"subchannel_freqs_hz", "per-subchannel carriers", [&st](Scenario& s, const json& v) {
                        if (!v.is_array())
                            throw ScenarioError(ScenarioError::Kind::parse,
                                                {"subchannel_freqs_hz: expected an array"});
                        s.subchannel_freqs.clear();
                        for (const auto& f : v) s.subchannel_freqs.push_back(as_number(f, "subchannel_freqs_hz"));
                        st.have_freq_list = true;
                    }});
    number("d_max_m", "maximum displacement per slot", [](Scenario& s, double x) { s.d_max = x; });
    number("e_max_j", "propulsion energy budget per slot", [](Scenario& s, double x) { s.e_max = x; });
    number("min_clearance_m", "minimum height of the UAV above the BS",
           [](Scenario& s, double x) { s.min_clearance = x; });
    number("snr_threshold", "SINR threshold (linear), default for all three links",
           [](Scenario& s, double x) { s.snr.cellular = x; });
    number("snr_threshold_ue_uav", "UE-UAV hop SNR threshold (linear)", [&st](Scenario& s, double x) {
        s.snr.ue_uav = x;
        st.have_snr_ue_uav = true;
    });
    number("snr_threshold_uav_bs", "UAV-BS hop SINR threshold (linear)", [&st](Scenario& s, double x) {
        s.snr.uav_bs = x;
        st.have_snr_uav_bs = true;
    });
    number("eps", "BCD stop threshold", [](Scenario& s, double x) { s.tol.eps = x; });
    number("eps_to", "trajectory SCP stop threshold", [](Scenario& s, double x) { s.tol.eps_to = x; });
    keys.push_back({"fading", "deterministic | rayleigh | rician", [](Scenario& s, const json& v) {
                        const std::string m = v.is_string() ? v.get<std::string>() : "";
                        if (m == "deterministic") s.fading = FadingModel::deterministic;
                        else if (m == "rayleigh") s.fading = FadingModel::rayleigh;
                        else if (m == "rician") s.fading = FadingModel::rician;
                        else
                            throw ScenarioError(ScenarioError::Kind::parse,
                                                {"fading: expected deterministic, rayleigh or rician"});
                    }});
    number("rician_k_db", "Rician K-factor of the air-to-ground links",
           [](Scenario& s, double x) { s.rician_k_db = x; });
    keys.push_back({"rng_seed", "seed for positions and fading", [](Scenario& s, const json& v) {
                        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
                            throw ScenarioError(ScenarioError::Kind::parse,
                                                {"rng_seed: expected a nonnegative integer"});
                        s.rng_seed = v.get<std::uint64_t>();
                    }});
    keys.push_back({"ue_positions_m", "UE positions [[x,y,z],...]; sampled when absent",
                    [&st](Scenario& s, const json& v) {
                        if (!v.is_array())
                            throw ScenarioError(ScenarioError::Kind::parse, {"ue_positions_m: expected an array"});
                        s.ue_positions.clear();
                        for (const auto& p : v) {
                            auto c = as_point(p, "ue_positions_m", 2, 3);
                            s.ue_positions.push_back({c[0], c[1], c.size() == 3 ? c[2] : 0.0});
                        }
                        st.have_positions = true;
                    }});
    keys.push_back({"uav_start_m", "initial UAV position [x,y,z]; sampled when absent",
                    [&st](Scenario& s, const json& v) {
                        auto c = as_point(v, "uav_start_m", 3, 3);
                        s.uav_start = {c[0], c[1], c[2]};
                        st.have_uav = true;
                    }});
    keys.push_back({"regions_m", "region centroids [[x,y],...] for dwell-time metrics",
                    [](Scenario& s, const json& v) {
                        if (!v.is_array())
                            throw ScenarioError(ScenarioError::Kind::parse, {"regions_m: expected an array"});
                        s.regions.clear();
                        for (const auto& p : v) {
                            auto c = as_point(p, "regions_m", 2, 2);
                            s.regions.push_back({c[0], c[1]});
                        }
                    }});
    auto prop = [&](std::string name, std::string help, double PropulsionParams::*field) {
        number(std::move(name), std::move(help), [field](Scenario& s, double x) { s.propulsion.*field = x; });
    };
    prop("profile_drag", "blade profile drag coefficient", &PropulsionParams::delta);
    prop("blade_angular_velocity_rad_s", "blade angular velocity", &PropulsionParams::omega);
    prop("rotor_radius_m", "rotor radius", &PropulsionParams::rotor_radius);
    prop("tip_speed_m_s", "rotor blade tip speed", &PropulsionParams::u_tip);
    prop("induced_velocity_m_s", "mean rotor induced velocity in hover", &PropulsionParams::v0);
    prop("fuselage_drag_ratio", "fuselage drag ratio", &PropulsionParams::d0);
    prop("air_density_kg_m3", "air density", &PropulsionParams::rho);
    prop("rotor_solidity", "rotor solidity", &PropulsionParams::s);
    prop("disc_area_m2", "rotor disc area", &PropulsionParams::disc_area);
    prop("weight_n", "aircraft weight", &PropulsionParams::weight);
    prop("induced_power_factor", "incremental correction to induced power", &PropulsionParams::k_factor);
    return keys;
}

const std::vector<std::pair<std::string, std::string>> kAlternates = {
    {"p_ue_max_dbm", "p_ue_max_w"},  {"p_uav_max_w", "p_uav_max_dbm"},
    {"noise_var_dbm", "noise_var_w"}, {"ici_power_dbm", "ici_power_w"},
    {"eta_los_db", "eta_los"},        {"eta_nlos_db", "eta_nlos"},
    {"subchannel_freq_hz", "subchannel_freqs_hz"},
};

Scenario table_defaults() {
    Scenario s;
    s.p_ue_max = dbm_to_watts(17.0);
    s.noise_var = dbm_to_watts(-96.0);
    s.ici_power = dbm_to_watts(-110.0);
    s.a2g.eta_los = db_to_linear(1.0);
    s.a2g.eta_nlos = db_to_linear(20.0);
    return s;
}

void fill_derived(Scenario& s, const LoadState& st) {
    if (st.have_positions && !st.have_n_ues) s.n_ues = s.ue_positions.size();
    if (st.have_freq_list && !st.have_n_sub) s.n_subchannels = s.subchannel_freqs.size();
    if (!st.have_freq_list) s.subchannel_freqs.assign(s.n_subchannels, st.freq_scalar);
    if (!st.have_positions && s.n_ues > 0 && s.cell_radius > 0)
        s.ue_positions = sample_positions(mix_seed(s.rng_seed, 1), s.cell_radius, s.n_ues);
    if (!st.have_uav && s.cell_radius > 0) s.uav_start = sample_uav_start(mix_seed(s.rng_seed, 2), s.cell_radius);
    if (!st.have_snr_ue_uav) s.snr.ue_uav = s.snr.cellular;
    if (!st.have_snr_uav_bs) s.snr.uav_bs = s.snr.cellular;
}

} // namespace

ScenarioError::ScenarioError(Kind kind, std::vector<std::string> violations)
    : std::runtime_error((kind == Kind::parse ? "parse error: " : "validation error: ") + join_lines(violations)),
      kind_(kind),
      violations_(std::move(violations)) {}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a ^ (b * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::vector<Vec3> sample_positions(std::uint64_t seed, double radius, std::size_t n) {
    if (!(radius > 0.0)) throw DomainError("sample_positions: radius must be positive");
    if (n == 0) throw DomainError("sample_positions: n must be at least 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Vec3> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = radius * std::sqrt(u(rng));
        const double phi = 2.0 * std::numbers::pi * u(rng);
        out.push_back({r * std::cos(phi), r * std::sin(phi), 0.0});
    }
    return out;
}

Vec3 sample_uav_start(std::uint64_t seed, double radius) {
    auto p = sample_positions(seed, radius, 1).front();
    std::mt19937_64 rng(mix_seed(seed, 77));
    p.z = std::uniform_real_distribution<double>(100.0, 200.0)(rng);
    return p;
}

Scenario default_scenario() { return load_scenario("{}"); }

Scenario load_scenario(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ScenarioError(ScenarioError::Kind::parse, {e.what()});
    }
    if (!doc.is_object()) throw ScenarioError(ScenarioError::Kind::parse, {"config must be a JSON object"});

    LoadState st;
    Scenario s = table_defaults();
    auto keys = make_keys(st);
    std::map<std::string, const KeySpec*> index;
    for (const auto& k : keys) index[k.name] = &k;

    std::vector<std::string> problems;
    for (const auto& [k, v] : doc.items()) {
        if (!index.contains(k)) problems.push_back("unknown key '" + k + "'");
    }
    for (const auto& [a, b] : kAlternates) {
        if (doc.contains(a) && doc.contains(b)) problems.push_back("both '" + a + "' and '" + b + "' given");
    }
    if (!problems.empty()) throw ScenarioError(ScenarioError::Kind::validation, problems);

    // snr_threshold first so the per-link keys override it regardless of order.
    auto apply = [&](const std::string& k, const json& v) {
        try {
            index[k]->apply(s, v);
        } catch (const ScenarioError& e) {
            problems.insert(problems.end(), e.violations().begin(), e.violations().end());
        }
    };
    if (doc.contains("snr_threshold")) apply("snr_threshold", doc["snr_threshold"]);
    for (const auto& [k, v] : doc.items()) {
        if (k != "snr_threshold") apply(k, v);
    }
    if (!problems.empty()) throw ScenarioError(ScenarioError::Kind::validation, problems);
    fill_derived(s, st);
    auto violations = validate(s);
    if (!violations.empty()) throw ScenarioError(ScenarioError::Kind::validation, violations);
    return s;
}

std::string serialize(const Scenario& s) {
    json doc;
    doc["n_ues"] = s.n_ues;
    doc["n_subchannels"] = s.n_subchannels;
    doc["n_slots"] = s.n_slots;
    doc["slot_len_s"] = s.slot_len;
    doc["bs_height_m"] = s.bs_height;
    doc["cell_radius_m"] = s.cell_radius;
    doc["p_ue_max_w"] = s.p_ue_max;
    doc["p_uav_max_w"] = s.p_uav_max;
    doc["noise_var_w"] = s.noise_var;
    doc["ici_power_w"] = s.ici_power;
    doc["pathloss_exp"] = s.pathloss_exp;
    doc["eta_los"] = s.a2g.eta_los;
    doc["eta_nlos"] = s.a2g.eta_nlos;
    doc["a2g_a"] = s.a2g.a;
    doc["a2g_b"] = s.a2g.b;
    doc["subchannel_freqs_hz"] = s.subchannel_freqs;
    doc["d_max_m"] = s.d_max;
    doc["e_max_j"] = s.e_max;
    doc["min_clearance_m"] = s.min_clearance;
    doc["snr_threshold"] = s.snr.cellular;
    doc["snr_threshold_ue_uav"] = s.snr.ue_uav;
    doc["snr_threshold_uav_bs"] = s.snr.uav_bs;
    doc["eps"] = s.tol.eps;
    doc["eps_to"] = s.tol.eps_to;
    doc["fading"] = s.fading == FadingModel::deterministic ? "deterministic"
                    : s.fading == FadingModel::rayleigh    ? "rayleigh"
                                                           : "rician";
    doc["rician_k_db"] = s.rician_k_db;
    doc["rng_seed"] = s.rng_seed;
    json ues = json::array();
    for (const auto& p : s.ue_positions) ues.push_back({p.x, p.y, p.z});
    doc["ue_positions_m"] = ues;
    doc["uav_start_m"] = {s.uav_start.x, s.uav_start.y, s.uav_start.z};
    json regions = json::array();
    for (const auto& r : s.regions) regions.push_back({r.x, r.y});
    doc["regions_m"] = regions;
    const auto& p = s.propulsion;
    doc["profile_drag"] = p.delta;
    doc["blade_angular_velocity_rad_s"] = p.omega;
    doc["rotor_radius_m"] = p.rotor_radius;
    doc["tip_speed_m_s"] = p.u_tip;
    doc["induced_velocity_m_s"] = p.v0;
    doc["fuselage_drag_ratio"] = p.d0;
    doc["air_density_kg_m3"] = p.rho;
    doc["rotor_solidity"] = p.s;
    doc["disc_area_m2"] = p.disc_area;
    doc["weight_n"] = p.weight;
    doc["induced_power_factor"] = p.k_factor;
    return doc.dump(2);
}

std::vector<std::string> validate(const Scenario& s) {
    std::vector<std::string> v;
    auto positive = [&](double x, const char* name) {
        if (!(x > 0.0) || !std::isfinite(x)) v.push_back(std::string(name) + " must be finite and > 0");
    };
    if (s.n_ues < 1) v.push_back("n_ues must be >= 1");
    if (s.n_subchannels < 1) v.push_back("n_subchannels must be >= 1");
    if (s.n_slots < 1) v.push_back("n_slots must be >= 1");
    positive(s.slot_len, "slot_len_s");
    positive(s.bs_height, "bs_height_m");
    positive(s.cell_radius, "cell_radius_m");
    positive(s.p_ue_max, "p_ue_max");
    positive(s.p_uav_max, "p_uav_max");
    positive(s.noise_var, "noise_var");
    positive(s.ici_power, "ici_power");
    positive(s.pathloss_exp, "pathloss_exp");
    positive(s.d_max, "d_max_m");
    positive(s.e_max, "e_max_j");
    if (!(s.min_clearance >= 0.0) || !std::isfinite(s.min_clearance))
        v.push_back("min_clearance_m must be finite and >= 0");
    if (!(s.a2g.eta_los >= 1.0)) v.push_back("eta_los must be >= 1 (0 dB)");
    if (!(s.a2g.eta_nlos >= s.a2g.eta_los) || !std::isfinite(s.a2g.eta_nlos))
        v.push_back("eta_nlos must be finite and >= eta_los");
    positive(s.a2g.a, "a2g_a");
    positive(s.a2g.b, "a2g_b");
    const auto& p = s.propulsion;
    positive(p.delta, "profile_drag");
    positive(p.omega, "blade_angular_velocity_rad_s");
    positive(p.rotor_radius, "rotor_radius_m");
    positive(p.u_tip, "tip_speed_m_s");
    positive(p.v0, "induced_velocity_m_s");
    positive(p.d0, "fuselage_drag_ratio");
    positive(p.rho, "air_density_kg_m3");
    positive(p.s, "rotor_solidity");
    positive(p.disc_area, "disc_area_m2");
    positive(p.weight, "weight_n");
    positive(p.k_factor, "induced_power_factor");
    positive(s.snr.cellular, "snr_threshold");
    positive(s.snr.ue_uav, "snr_threshold_ue_uav");
    positive(s.snr.uav_bs, "snr_threshold_uav_bs");
    positive(s.tol.eps, "eps");
    positive(s.tol.eps_to, "eps_to");
    if (!std::isfinite(s.rician_k_db)) v.push_back("rician_k_db must be finite");

    if (s.ue_positions.size() != s.n_ues)
        v.push_back("ue_positions_m has " + std::to_string(s.ue_positions.size()) + " entries, n_ues is " +
                    std::to_string(s.n_ues));
    for (std::size_t i = 0; i < s.ue_positions.size(); ++i) {
        const auto& q = s.ue_positions[i];
        if (!std::isfinite(q.x) || !std::isfinite(q.y))
            v.push_back("ue_positions_m[" + std::to_string(i) + "] must be finite");
        if (q.z != 0.0) v.push_back("ue_positions_m[" + std::to_string(i) + "] z-coordinate must be 0");
        if (q.x == 0.0 && q.y == 0.0) v.push_back("ue_positions_m[" + std::to_string(i) + "] coincides with the BS");
    }
    if (s.subchannel_freqs.size() != s.n_subchannels)
        v.push_back("subchannel_freqs_hz has " + std::to_string(s.subchannel_freqs.size()) +
                    " entries, n_subchannels is " + std::to_string(s.n_subchannels));
    for (std::size_t k = 0; k < s.subchannel_freqs.size(); ++k) {
        if (!(s.subchannel_freqs[k] > 0.0) || !std::isfinite(s.subchannel_freqs[k]))
            v.push_back("subchannel_freqs_hz[" + std::to_string(k) + "] must be finite and > 0");
    }
    if (!std::isfinite(s.uav_start.x) || !std::isfinite(s.uav_start.y) || !std::isfinite(s.uav_start.z))
        v.push_back("uav_start_m must be finite");
    if (!(s.uav_start.z > s.bs_height + s.min_clearance))
        v.push_back("uav_start_m altitude must exceed bs_height_m + min_clearance_m");
    for (std::size_t r = 0; r < s.regions.size(); ++r) {
        if (!std::isfinite(s.regions[r].x) || !std::isfinite(s.regions[r].y))
            v.push_back("regions_m[" + std::to_string(r) + "] must be finite");
    }
    if (v.empty()) {
        const auto d = propulsion::derive(s.propulsion);
        if (s.e_max < (d.p0 + d.pi) * s.slot_len) v.push_back("e_max_j is below the hover energy per slot");
    }
    return v;
}

std::vector<std::pair<std::string, std::string>> config_keys() {
    LoadState st;
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& k : make_keys(st)) out.emplace_back(k.name, k.help);
    return out;
}

} // namespace uavrelay
