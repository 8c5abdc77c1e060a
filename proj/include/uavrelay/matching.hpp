#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "uavrelay/channel.hpp"
#include "uavrelay/link_rate.hpp"
#include "uavrelay/scenario.hpp"

namespace uavrelay::matching {

struct McPair {
    std::size_t ue = 0;
    Mode mode = Mode::cellular;

    friend bool operator==(const McPair&, const McPair&) = default;
};

// Subchannel -> MC pair; an empty slot is the vacant pair.
class Matching {
public:
    Matching() = default;
    explicit Matching(std::size_t n_subchannels) : assign_(n_subchannels) {}

    std::size_t size() const { return assign_.size(); }
    const std::optional<McPair>& at(std::size_t k) const { return assign_.at(k); }
    void set(std::size_t k, std::optional<McPair> p) { assign_.at(k) = p; }

    std::vector<std::size_t> subchannels_of(const McPair& p) const;
    std::size_t count_ue(std::size_t n) const;
    std::size_t count_relay() const;
    bool mode_consistent() const;
    bool empty() const;

    // beta per UE; nullopt for UEs without a subchannel.
    std::vector<std::optional<Mode>> modes(std::size_t n_ues) const;
    // A as an N x K 0/1 table.
    Grid<int> allocation(std::size_t n_ues) const;

    Matching swapped(std::size_t k1, std::size_t k2) const;

    friend bool operator==(const Matching&, const Matching&) = default;

private:
    std::vector<std::optional<McPair>> assign_;
};

struct Context {
    const Scenario& scenario;
    const channel::ChannelGains& gains;
    std::span<const double> weights;
    bool allow_relay = true;
};

// P_M^max split equally over each UE's subchannels, P_U^max over relay subchannels.
link::PowerAllocation equal_split(const Scenario& s, const Matching& m);

double subchannel_rate(std::size_t k, const McPair& pair, const Context& ctx, const link::PowerAllocation& power);
double subchannel_utility(std::size_t k, const McPair& pair, const Context& ctx, const link::PowerAllocation& power);
double mc_pair_utility(const McPair& pair, std::span<const std::size_t> subset, const Context& ctx,
                       const link::PowerAllocation& power);
bool qos_ok(std::size_t k, const McPair& pair, const Context& ctx, const link::PowerAllocation& power);

// Sum of subchannel utilities under the equal split.
double system_utility(const Matching& m, const Context& ctx);

// Mode consistency, relay permission, and QoS on every matched subchannel under the equal split.
bool is_feasible(const Matching& m, const Context& ctx);

// Releases subchannels until the matching is feasible.
Matching sanitize(Matching m, const Context& ctx);

// Mode pre-screening per UE from full-power feasibility and rate comparison.
std::vector<std::optional<Mode>> screen_modes(const Context& ctx);

Matching init_matching(const Context& ctx);

struct SwapOutcome {
    bool blocking = false;
    Matching swapped;
};

SwapOutcome swap_blocking(const Matching& psi, std::size_t k1, std::size_t k2, const Context& ctx);

struct MsmaStats {
    std::size_t rounds = 0;
    std::size_t swaps = 0;
    std::vector<std::size_t> examined_per_round;  // distinct unordered subchannel pairs
    std::vector<double> utility_trace;            // system utility before and after every swap
};

struct MsmaResult {
    Matching matching;
    MsmaStats stats;
};

MsmaResult msma(Matching init, const Context& ctx);

// Every feasible mode-consistent matching without a swap-blocking pair.
// Throws DomainError when (pairs + 1)^K exceeds 1e5.
std::vector<Matching> brute_force_stable(const Context& ctx);

bool is_pairwise_stable(const Matching& m, const Context& ctx);

// Uniform random feasible mode per UE, then a random feasible subchannel assignment.
Matching random_matching(const Context& ctx, std::mt19937_64& rng);

} // namespace uavrelay::matching
