#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uavrelay/channel.hpp"
#include "uavrelay/link_rate.hpp"
#include "uavrelay/matching.hpp"
#include "uavrelay/scenario.hpp"

namespace uavrelay {

enum class Algorithm { jmstp, random, cellular };

std::string to_string(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view name);

struct UavState {
    Vec3 pos;
    Vec3 prev_pos;
};

struct SlotSolution {
    std::size_t slot = 0;
    matching::Matching matching;
    std::vector<std::optional<Mode>> modes;
    Grid<int> allocation;
    link::PowerAllocation power;
    Vec3 prev_position;
    Vec3 position;
    std::vector<double> weights;
    std::vector<double> rates;
    double objective = 0.0;
    int iterations = 0;
    // Objective at the start and after every stage of every BCD iteration.
    std::vector<double> stage_trace;
    double speed = 0.0;
    double flying_power = 0.0;
    double flying_power_bound = 0.0;
    std::vector<std::string> warnings;
};

struct SlotOptions {
    bool rematch = true;          // run the matching stage
    bool allow_relay = true;
    bool move = true;             // run the trajectory stage
    bool random_matching = false; // fixed random matching drawn at the slot start
    std::ostream* trace = nullptr;
};

// Block coordinate ascent over matching, position and power for one slot.
SlotSolution jmstp_slot(const Scenario& s, const UavState& uav, std::span<const double> weights, std::size_t slot,
                        const std::optional<matching::Matching>& init = std::nullopt, const SlotOptions& opt = {});

struct EpisodeMetrics {
    double sum_rate = 0.0;
    std::optional<double> jain;
    double avg_speed = 0.0;
    double scheduled_ues = 0.0;  // UEs with a positive average rate
    double relay_ues = 0.0;      // relay-mode UEs per slot, averaged over slots
    std::vector<double> dwell_time;
};

struct EpisodeLog {
    Algorithm algorithm = Algorithm::jmstp;
    double move_radius = 0.0;
    std::vector<SlotSolution> slots;
    std::vector<std::vector<double>> weights_history;
    std::vector<std::vector<double>> average_history;  // running averages after each slot
    std::vector<double> avg_rates;
    EpisodeMetrics metrics;
    std::vector<std::string> warnings;
};

EpisodeLog run_episode(const Scenario& s, Algorithm algorithm = Algorithm::jmstp, std::ostream* trace = nullptr);
EpisodeLog baseline_random(const Scenario& s);
EpisodeLog baseline_cellular(const Scenario& s);

// Weighted sum rate and per-UE rates of a slot decision.
link::RateReport evaluate(const Scenario& s, const channel::ChannelGains& g, std::span<const double> weights,
                          const matching::Matching& m, const link::PowerAllocation& p);

// Constraint audit of an emitted slot; empty when everything holds.
std::vector<std::string> validate_solution(const Scenario& s, const SlotSolution& sol);

std::string episode_csv(const EpisodeLog& log);
std::string summary_json(const Scenario& s, const EpisodeLog& log);

enum class SweepAxis { p_ue_max, d_max, p_uav_max, e_max };

std::optional<SweepAxis> parse_axis(std::string_view name);
std::string to_string(SweepAxis a);

struct SweepRun {
    double value = 0.0;
    Algorithm algorithm = Algorithm::jmstp;
    std::size_t seed_index = 0;
    std::uint64_t seed = 0;
    EpisodeMetrics metrics;
};

struct SweepRow {
    double value = 0.0;
    Algorithm algorithm = Algorithm::jmstp;
    std::size_t seeds = 0;
    double sum_rate = 0.0;
    std::optional<double> jain;  // mean over runs where it is defined
    double relay_ues = 0.0;
    double scheduled_ues = 0.0;
    double avg_speed = 0.0;
};

struct SweepResult {
    SweepAxis axis = SweepAxis::p_ue_max;
    std::vector<SweepRun> runs;  // ordered by (value, algorithm, seed)
    std::vector<SweepRow> rows;
};

// One episode per (value, algorithm, seed) with rng_seed = base seed + seed index.
// Throws DomainError for an unknown axis and ScenarioError for bad configs.
SweepResult sweep(std::string_view config_text, std::string_view axis, std::span<const double> values,
                  std::size_t seeds, std::span<const Algorithm> algorithms, std::size_t threads = 0);

std::string sweep_csv(const SweepResult& r);

} // namespace uavrelay
