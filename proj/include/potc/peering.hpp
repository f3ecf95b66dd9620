#pragma once

#include "potc/consensus.hpp"

#include <functional>

namespace potc::peering {

using potc::Tick;

// Piecewise pull-rate function over the turn index x: requests per time slot.
// Anchors: f(-25)=0.5, f(-9)=2, f(0)=5; the segment shapes are overridable.
struct PullStrategy {
    int deep_sleep_below = -15;   // x < this -> deep_sleep_rate
    double deep_sleep_rate = 0.5;
    int approach_until = -6;      // deep_sleep_below <= x <= this -> approach_rate
    double approach_rate = 2.0;
    int ramp_from = -5;           // linear ramp from (ramp_from, approach_rate) to (0, lead_rate)
    double lead_rate = 5.0;       // x >= 0
    // Post-turn deep sleep (the paper's formula IV): p = t * n/4 instead of
    // t/f(x) once a node's turn has passed. Formula III by flag.
    bool post_turn_deep_sleep = true;

    double rate(int x) const;
    // Rejects the degenerate post-turn choices that disconnect a node for good.
    void validate() const;
};

// p = t / f(x)
double pull_interval(int x, double turn_duration, const PullStrategy& strategy = {});
// Formula IV: p = t * (n/4)
double post_turn_interval(double turn_duration, std::size_t nodes);

// Heuristic leader guess assuming no premature turnover since the last known
// transition block.
std::size_t guess_leader(Tick last_transition_tick, std::size_t last_leader_pos,
                         const consensus::TurnSchedule& schedule, Tick now);

struct UpdateRequest {
    PublicKey requester{};
    Hash32 last_known_transition_block{};
};

struct UpdateResponse {
    enum class Kind { Suffix, Referral, NoAnswer } kind = Kind::NoAnswer;
    std::vector<Block> suffix;   // starts at the requested transition block
    std::size_t referral = 0;    // roster position to try instead
};

// Serves a pull request from a node's chain: the suffix from the requester's
// last known transition block (transition blocks are never deleted).
UpdateResponse serve_pull(const Chain& chain, const UpdateRequest& req);

struct PullResult {
    std::size_t answered_by = 0;  // roster position
    std::size_t probes = 0;
    std::vector<Block> suffix;
};

// Probe function: roster position -> response (NoAnswer models offline).
using ProbeFn = std::function<UpdateResponse(std::size_t)>;

// Targets the guessed LN, then expands alternately predecessor/successor
// outward (predecessor first), skipping self, until a suffix is obtained.
PullResult pull_once(std::size_t self_pos, std::size_t guessed_leader, std::size_t roster_size,
                     const ProbeFn& probe);

// --- Decimal push tree --------------------------------------------------------

inline constexpr std::size_t kFanout = 10;

// Drain set of index x: the root updates 1..9, index x>0 updates x*10..x*10+9.
std::vector<std::size_t> drains(std::size_t x, std::size_t roster_size);

// Decimal digit count of x; the hop count of a fully online delivery.
std::size_t hops_to(std::size_t index);

struct Delivery {
    bool reached = false;
    std::size_t hops = 0;
    std::size_t source = 0;
};

struct DeliveryReport {
    std::vector<Delivery> nodes;  // by index
    std::size_t reached_count = 0;
    std::size_t max_hops = 0;

    std::vector<std::size_t> unreached() const;
    std::string to_csv(std::size_t round = 0) const;  // (round,index,hops,reached)
};

// One push round over the index tree. `online[i]` gates both relay and
// receipt; jump pipes let a source cover an offline drain's children.
DeliveryReport push_round(std::size_t roster_size, const std::vector<bool>& online,
                          bool jump_pipes);

// Direct delivery attempt from the leader to every node.
DeliveryReport full_push(std::size_t roster_size, const std::vector<bool>& online);

}  // namespace potc::peering
