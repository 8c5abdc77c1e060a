#include "uavrelay/uavrelay.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "uavrelay/channel.hpp"
#include "uavrelay/orchestrator.hpp"
#include "uavrelay/scenario.hpp"

struct uavr_scenario {
    uavrelay::Scenario s;
};

struct uavr_episode {
    uavrelay::Scenario s;
    uavrelay::EpisodeLog log;
};

namespace {

thread_local std::string g_error;

uavr_status fail(uavr_status st, std::string msg) {
    g_error = std::move(msg);
    return st;
}

char* dup(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (p) std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& line : v) out += line + "\n";
    return out;
}

// Runs f, mapping library exceptions onto status codes.
template <class F>
uavr_status guarded(F&& f) {
    g_error.clear();
    try {
        return f();
    } catch (const uavrelay::ScenarioError& e) {
        const auto st = e.kind() == uavrelay::ScenarioError::Kind::parse ? UAVR_E_PARSE : UAVR_E_VALIDATION;
        return fail(st, join(e.violations()));
    } catch (const uavrelay::DomainError& e) {
        return fail(UAVR_E_INVALID_ARGUMENT, e.what());
    } catch (const std::bad_alloc&) {
        return fail(UAVR_E_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(UAVR_E_INTERNAL, e.what());
    } catch (...) {
        return fail(UAVR_E_INTERNAL, "unknown error");
    }
}

uavrelay::Algorithm to_alg(uavr_algorithm a) {
    switch (a) {
    case UAVR_ALG_JMSTP: return uavrelay::Algorithm::jmstp;
    case UAVR_ALG_RANDOM: return uavrelay::Algorithm::random;
    case UAVR_ALG_CELLULAR: return uavrelay::Algorithm::cellular;
    }
    throw uavrelay::DomainError("unknown algorithm " + std::to_string(static_cast<int>(a)));
}

bool read_file(const char* path, std::string& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::ostringstream ss;
    ss << in.rdbuf();
    out = ss.str();
    return true;
}

} // namespace

extern "C" {

const char* uavr_last_error(void) { return g_error.c_str(); }

void uavr_string_free(char* s) { std::free(s); }

uavr_status uavr_scenario_from_json(const char* json, uavr_scenario** out) {
    if (!json || !out) return fail(UAVR_E_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        *out = new uavr_scenario{uavrelay::load_scenario(json)};
        return UAVR_OK;
    });
}

uavr_status uavr_scenario_from_file(const char* path, uavr_scenario** out) {
    if (!path || !out) return fail(UAVR_E_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    std::string text;
    if (!read_file(path, text)) return fail(UAVR_E_IO, std::string("cannot read ") + path);
    return uavr_scenario_from_json(text.c_str(), out);
}

void uavr_scenario_free(uavr_scenario* s) { delete s; }

uavr_status uavr_scenario_to_json(const uavr_scenario* s, char** out) {
    if (!s || !out) return fail(UAVR_E_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        *out = dup(uavrelay::serialize(s->s));
        return UAVR_OK;
    });
}

uavr_status uavr_validate_json(const char* json, char** report) {
    if (!json) return fail(UAVR_E_INVALID_ARGUMENT, "null argument");
    if (report) *report = nullptr;
    const auto st = guarded([&] {
        uavrelay::load_scenario(json);
        return UAVR_OK;
    });
    if (st != UAVR_OK && report) *report = dup(g_error);
    return st;
}

uavr_status uavr_run_episode(const uavr_scenario* s, uavr_algorithm alg, uavr_episode** out) {
    if (!s || !out) return fail(UAVR_E_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        auto log = uavrelay::run_episode(s->s, to_alg(alg));
        *out = new uavr_episode{s->s, std::move(log)};
        return UAVR_OK;
    });
}

void uavr_episode_free(uavr_episode* e) { delete e; }

uavr_status uavr_episode_metrics_get(const uavr_episode* e, uavr_episode_metrics* out) {
    if (!e || !out) return fail(UAVR_E_INVALID_ARGUMENT, "null argument");
    const auto& m = e->log.metrics;
    out->sum_rate = m.sum_rate;
    out->jain = m.jain ? *m.jain : std::numeric_limits<double>::quiet_NaN();
    out->avg_speed = m.avg_speed;
    out->scheduled_ues = m.scheduled_ues;
    out->relay_ues = m.relay_ues;
    out->n_slots = e->log.slots.size();
    return UAVR_OK;
}

uavr_status uavr_episode_csv(const uavr_episode* e, char** out) {
    if (!e || !out) return fail(UAVR_E_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        *out = dup(uavrelay::episode_csv(e->log));
        return UAVR_OK;
    });
}

uavr_status uavr_episode_summary_json(const uavr_episode* e, char** out) {
    if (!e || !out) return fail(UAVR_E_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        *out = dup(uavrelay::summary_json(e->s, e->log));
        return UAVR_OK;
    });
}

uavr_status uavr_episode_audit(const uavr_episode* e, size_t* violations, char** report) {
    if (!e || !violations) return fail(UAVR_E_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        std::vector<std::string> all;
        for (const auto& sol : e->log.slots)
            for (const auto& v : uavrelay::validate_solution(e->s, sol))
                all.push_back("slot " + std::to_string(sol.slot + 1) + ": " + v);
        *violations = all.size();
        if (report) *report = dup(join(all));
        return UAVR_OK;
    });
}

uavr_status uavr_sweep(const char* config_json, const char* axis, const double* values, size_t n_values, size_t seeds,
                       const uavr_algorithm* algs, size_t n_algs, size_t threads, char** csv) {
    if (!config_json || !axis || (!values && n_values) || (!algs && n_algs) || !csv)
        return fail(UAVR_E_INVALID_ARGUMENT, "null argument");
    *csv = nullptr;
    return guarded([&] {
        std::vector<uavrelay::Algorithm> a;
        for (size_t i = 0; i < n_algs; ++i) a.push_back(to_alg(algs[i]));
        const auto r = uavrelay::sweep(config_json, axis, std::span<const double>(values, n_values), seeds, a, threads);
        *csv = dup(uavrelay::sweep_csv(r));
        return UAVR_OK;
    });
}

uavr_status uavr_ici_check(uavr_ici_ratios* out) {
    if (!out) return fail(UAVR_E_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const auto r = uavrelay::channel::reference_ratios({}, uavrelay::channel::IciOccupancy::lower_half_edge);
        out->cellular_db = r.cellular_db;
        out->relay_db = r.relay_db;
        return UAVR_OK;
    });
}

uavr_status uavr_ici_report(char** out) {
    if (!out) return fail(UAVR_E_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        using uavrelay::channel::IciOccupancy;
        const uavrelay::channel::IciConfig cfg;
        std::string s;
        char line[160];
        std::snprintf(line, sizeof line, "K=%zu spacing=%.0f Hz carrier=%.2f GHz speed=%.1f km/h eps=%.6f\n",
                      cfg.n_subcarriers, cfg.spacing_hz, cfg.carrier_hz / 1e9, cfg.speed_m_s * 3.6,
                      uavrelay::channel::normalized_doppler(cfg));
        s += line;
        s += "occupancy,cellular_db,relay_db\n";
        const std::pair<const char*, IciOccupancy> rows[] = {{"half_band_edge", IciOccupancy::lower_half_edge},
                                                             {"half_band_edge_upper", IciOccupancy::upper_half_edge},
                                                             {"full", IciOccupancy::full}};
        for (const auto& [name, occ] : rows) {
            const auto r = uavrelay::channel::reference_ratios(cfg, occ);
            std::snprintf(line, sizeof line, "%s,%.2f,%.2f\n", name, r.cellular_db, r.relay_db);
            s += line;
        }
        *out = dup(s);
        return UAVR_OK;
    });
}

} // extern "C"
