#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uavrelay/uavrelay.h"

namespace fs = std::filesystem;

namespace {

int exit_code(uavr_status st) {
    switch (st) {
    case UAVR_OK: return 0;
    case UAVR_E_PARSE:
    case UAVR_E_VALIDATION: return 2;
    default: return 1;
    }
}

int report(uavr_status st) {
    if (st != UAVR_OK) std::cerr << "error: " << uavr_last_error() << (st == UAVR_E_VALIDATION ? "" : "\n");
    return exit_code(st);
}

bool read_text(const std::string& path, std::string& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::ostringstream ss;
    ss << in.rdbuf();
    out = ss.str();
    return true;
}

bool write_text(const fs::path& path, const char* text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    return static_cast<bool>(out);
}

bool parse_alg(const std::string& name, uavr_algorithm& a) {
    if (name == "jmstp") a = UAVR_ALG_JMSTP;
    else if (name == "random") a = UAVR_ALG_RANDOM;
    else if (name == "cellular") a = UAVR_ALG_CELLULAR;
    else return false;
    return true;
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

int cmd_run(const std::string& config, const std::string& out_dir, const std::string& alg_name) {
    uavr_algorithm alg;
    if (!parse_alg(alg_name, alg)) {
        std::cerr << "error: unknown algorithm '" << alg_name << "'\n";
        return 1;
    }
    uavr_scenario* s = nullptr;
    if (auto st = uavr_scenario_from_file(config.c_str(), &s); st != UAVR_OK) return report(st);
    uavr_episode* e = nullptr;
    auto st = uavr_run_episode(s, alg, &e);
    uavr_scenario_free(s);
    if (st != UAVR_OK) return report(st);

    char* csv = nullptr;
    char* summary = nullptr;
    st = uavr_episode_csv(e, &csv);
    if (st == UAVR_OK) st = uavr_episode_summary_json(e, &summary);
    uavr_episode_metrics m{};
    if (st == UAVR_OK) st = uavr_episode_metrics_get(e, &m);
    uavr_episode_free(e);
    int rc = report(st);
    if (rc == 0) {
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (!write_text(fs::path(out_dir) / "episode.csv", csv) ||
            !write_text(fs::path(out_dir) / "summary.json", summary)) {
            std::cerr << "error: cannot write to " << out_dir << "\n";
            rc = 1;
        } else {
            std::printf("slots=%zu sum_rate=%.6g jain=%.6g avg_speed=%.6g\n", m.n_slots, m.sum_rate, m.jain,
                        m.avg_speed);
        }
    }
    uavr_string_free(csv);
    uavr_string_free(summary);
    return rc;
}

int cmd_sweep(const std::string& config, const std::string& axis, const std::string& values_arg, std::size_t seeds,
              const std::string& algs_arg, std::size_t threads, const std::string& out_dir) {
    std::vector<double> values;
    for (const auto& v : split(values_arg)) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(v, &used));
            if (used != v.size()) throw std::invalid_argument(v);
        } catch (const std::exception&) {
            std::cerr << "error: bad value '" << v << "'\n";
            return 1;
        }
    }
    std::vector<uavr_algorithm> algs;
    for (const auto& name : split(algs_arg)) {
        uavr_algorithm a;
        if (!parse_alg(name, a)) {
            std::cerr << "error: unknown algorithm '" << name << "'\n";
            return 1;
        }
        algs.push_back(a);
    }
    std::string text;
    if (!read_text(config, text)) {
        std::cerr << "error: cannot read " << config << "\n";
        return 1;
    }
    char* csv = nullptr;
    const auto st = uavr_sweep(text.c_str(), axis.c_str(), values.data(), values.size(), seeds, algs.data(),
                               algs.size(), threads, &csv);
    int rc = report(st);
    if (rc == 0) {
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (!write_text(fs::path(out_dir) / "sweep.csv", csv)) {
            std::cerr << "error: cannot write to " << out_dir << "\n";
            rc = 1;
        } else {
            std::fputs(csv, stdout);
        }
    }
    uavr_string_free(csv);
    return rc;
}

int cmd_validate(const std::string& config) {
    std::string text;
    if (!read_text(config, text)) {
        std::cerr << "error: cannot read " << config << "\n";
        return 1;
    }
    char* rep = nullptr;
    const auto st = uavr_validate_json(text.c_str(), &rep);
    if (st == UAVR_OK) {
        std::puts("ok");
    } else if (rep) {
        std::cerr << rep;
    } else {
        std::cerr << "error: " << uavr_last_error() << "\n";
    }
    uavr_string_free(rep);
    return exit_code(st);
}

int cmd_ici() {
    char* rep = nullptr;
    const auto st = uavr_ici_report(&rep);
    if (st == UAVR_OK) std::fputs(rep, stdout);
    uavr_string_free(rep);
    return report(st);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"UAV relay resource allocation simulator"};
    app.require_subcommand(1);

    std::string config, out_dir = ".", alg = "jmstp";
    auto* run = app.add_subcommand("run", "Run one episode and write episode.csv and summary.json");
    run->add_option("config", config, "JSON config")->required();
    run->add_option("-o,--out", out_dir, "Output directory");
    run->add_option("-a,--algorithm", alg, "jmstp, random or cellular");

    std::string axis, values, algs = "jmstp,random,cellular";
    std::size_t seeds = 1, threads = 0;
    auto* sw = app.add_subcommand("sweep", "Sweep one parameter and write sweep.csv");
    sw->add_option("config", config, "JSON config")->required();
    sw->add_option("--axis", axis, "p_ue_max, d_max, p_uav_max or e_max")->required();
    sw->add_option("--values", values, "Comma-separated values")->required();
    sw->add_option("--seeds", seeds, "Seeds per value")->check(CLI::PositiveNumber);
    sw->add_option("--algorithms", algs, "Comma-separated algorithms");
    sw->add_option("--threads", threads, "Worker threads, 0 for all cores");
    sw->add_option("-o,--out", out_dir, "Output directory");

    auto* val = app.add_subcommand("validate", "Check a config");
    val->add_option("config", config, "JSON config")->required();

    auto* ici = app.add_subcommand("ici-check", "Print Doppler ICI ratios");

    CLI11_PARSE(app, argc, argv);

    if (*run) return cmd_run(config, out_dir, alg);
    if (*sw) return cmd_sweep(config, axis, values, seeds, algs, threads, out_dir);
    if (*val) return cmd_validate(config);
    if (*ici) return cmd_ici();
    return 1;
}
