#pragma once

#include "potc/chain.hpp"

#include <variant>

namespace potc::consensus {

using potc::Tick;

// Grace extensions, pauses and skips produced by adapt_turn_time. Applied on
// top of the chain-derived schedule during replay.
struct ScheduleAdjustment {
    enum class Kind { Grace, Pause, Skip } kind;
    std::int64_t turn = 0;   // Grace/Skip: the affected global turn
    Tick at = 0;             // Pause: effective tick
    Tick length = 0;         // Grace/Pause duration
};

struct TurnSchedule {
    std::vector<NodeId> roster;
    Tick turn_duration = 20;        // t
    Tick transition_duration = 5;   // T, the paper's five time-units
    double overflow_fraction = 0.2; // post-turn index overflow at n/5
    // Shifted-start model: an early transition block starts the next turn
    // T ticks later. The alternative waits out the regular slot.
    bool shifted_start = true;

    std::size_t size() const { return roster.size(); }
    const NodeId& leader_of_turn(std::int64_t turn) const;
    std::size_t position_of(const PublicKey& pk) const;

    void validate() const;  // roster non-empty, T >= 1, t > T, 0 < overflow < 1
};

// Round-robin distance index: negative = turns until leadership, 0 = leading,
// positive = turns since leadership until the overflow resets it.
struct TurnIndex {
    int x = 0;
};

TurnIndex turn_index_of(std::size_t node_pos, std::int64_t current_turn,
                        const TurnSchedule& schedule);

struct Leading {
    NodeId node;
    std::int64_t turn = 0;
    Tick turn_end = 0;  // scheduled end (slot expiry or observed transition block)
};
struct Transition {
    NodeId prev;
    NodeId next;
    std::int64_t next_turn = 0;
    Tick until = 0;
};
using LeaderState = std::variant<Leading, Transition>;

// One reconstructed turn window.
struct TurnWindow {
    std::int64_t turn = 0;
    NodeId leader;
    Tick start = 0;
    Tick end = 0;        // transition block time, or slot expiry
    Tick next_start = 0; // end of the transition window
    bool ended_early = false;
};

// Replays the chain's transition blocks (plus adjustments) into turn windows
// up to `until`. The log's early transitions shift every subsequent start.
std::vector<TurnWindow> replay_schedule(const TurnSchedule& schedule, const Chain& log,
                                        Tick until,
                                        const std::vector<ScheduleAdjustment>& adjustments = {});

LeaderState current_leader(Tick now, const TurnSchedule& schedule, const Chain& log,
                           const std::vector<ScheduleAdjustment>& adjustments = {});

// --- Block authoring ---------------------------------------------------------

Block propose_block(const KeyPair& node, std::vector<Transaction> txs, Tick now,
                    const TurnSchedule& schedule, const Chain& log,
                    const std::vector<ScheduleAdjustment>& adjustments = {});

Block handover(const KeyPair& leader, const KeyPair& successor, Tick now,
               const TurnSchedule& schedule, const Chain& log,
               const std::vector<ScheduleAdjustment>& adjustments = {});

Block finalize_turn(const KeyPair& leader, Tick now, const TurnSchedule& schedule,
                    const Chain& log, const std::vector<ScheduleAdjustment>& adjustments = {});

// --- Effective consensus finality --------------------------------------------

enum class FinalityStatus { Pending, EffectiveFinal, Invalidated };

struct FinalityTracker {
    Hash32 block{};
    double threshold = 0.5;          // theta
    std::size_t active_nodes = 0;
    std::size_t roster_size = 0;     // one-full-round bound
    std::set<PublicKey> covered;     // silent passes + explicit approvals
    std::uint64_t turns_elapsed = 0;
    bool disputed = false;           // an open dispute stops silent passes
    FinalityStatus status = FinalityStatus::Pending;

    std::size_t silent_passes() const { return covered.size(); }
};

FinalityTracker make_tracker(const Hash32& block, double threshold, std::size_t active,
                             std::size_t roster_size);

// A completed turn without dispute counts the turn's author as having passed.
void record_pass(FinalityTracker& t, const PublicKey& completed_turn_author);
void approve(FinalityTracker& t, const PublicKey& node);
void invalidate(FinalityTracker& t);  // only while Pending

// --- Voting -------------------------------------------------------------------

enum class VoteQuestion {
    InvalidateTx,
    InvalidateBlockTxs,
    KickNode,
    Pause,
    AcceptPrune,
    AdmitNode,
    ForkChoice,
};

const char* question_name(VoteQuestion q);

struct VoteState {
    Hash32 subject{};
    VoteQuestion question = VoteQuestion::InvalidateTx;
    Tick deadline = 0;
    double threshold = 0.5;
    std::map<PublicKey, bool> ballots;
    bool closed = false;
};

struct VoteOutcome {
    bool passed = false;
    std::size_t yes = 0;       // explicit yes
    std::size_t no = 0;        // explicit no
    std::size_t silent = 0;    // counted as consent
    double fraction = 0.0;
};

VoteState open_vote(const Hash32& subject, VoteQuestion q, Tick deadline, double threshold = 0.5);
void cast_ballot(VoteState& v, const PublicKey& voter, bool yes, Tick now);
VoteOutcome tally(VoteState& v, const std::set<PublicKey>& active, Tick now);

// --- Fork resolution -----------------------------------------------------------

struct Branch {
    Hash32 ancestor{};            // hash of the common ancestor block
    std::vector<Block> blocks;    // suffix after the ancestor
};

// Distinct turns represented by a suffix, derived from transition-block
// boundaries and author changes rather than the blocks' own turn field.
std::size_t turns_represented(const Branch& b);

enum class ForkPolicy { MergeSoftExclusive, DisputeVote, MostProgressive };

struct Resolution {
    enum class Kind { Merge, VoteChoice, Continue, RandomizationTieBreak } kind;
    std::size_t branch = 0;  // winning/carrier branch (Merge: branch kept as base)
    std::vector<std::size_t> tied;
};

Resolution resolve_fork(const std::vector<Branch>& branches, ForkPolicy policy);
// Applies a randomization output to a tie; falls back to the lowest branch
// author if the randomization itself produced no contributions.
std::size_t break_tie(const Resolution& r, const std::vector<Branch>& branches,
                      std::optional<std::uint64_t> randomization_output);

// --- Peer fluctuation ------------------------------------------------------------

struct LeaveNoticeData {
    NodeId node;
    std::set<Hash32> disclosed_secrets;  // ids/digests of network-required secrets
};

struct Membership {
    TurnSchedule schedule;
    std::set<PublicKey> retired;              // identities that disclosed private keys
    std::map<PublicKey, std::uint64_t> missed_turns;
    std::uint64_t liveness_window_rounds = 2;

    std::set<PublicKey> active() const;
};

// insert_index is a roster position; it may be "end of round" == roster size.
TurnSchedule join_node(const TurnSchedule& schedule, const NodeId& candidate,
                       std::size_t insert_index, const VoteOutcome& admit_vote,
                       bool trusted_entity, std::int64_t current_turn,
                       const std::set<PublicKey>& retired);

TurnSchedule leave_node(const TurnSchedule& schedule, const LeaveNoticeData& notice,
                        const std::set<Hash32>& obligations, std::set<PublicKey>& retired);

TurnSchedule kick_node(const TurnSchedule& schedule, const NodeId& node,
                       const VoteOutcome& vote);

// --- Adaptive turn time -------------------------------------------------------------

enum class AdaptiveEvent { LostLeader, NightSwitch, VacationBreak };

struct AdaptivePolicy {
    Tick grace = 0;                      // extension granted to a lost leader
    std::uint64_t pause_cap = 2;         // consecutive automated pauses per node
    std::map<PublicKey, std::uint64_t> consecutive_pauses;
};

ScheduleAdjustment adapt_turn_time(AdaptiveEvent event, const PublicKey& requester,
                                   std::int64_t turn, Tick now, Tick length,
                                   const std::optional<VoteOutcome>& vote,
                                   AdaptivePolicy& policy);

// Single-writer check used by the skew sweeps: whether `node` believes it
// leads at `now` given its local clock offset.
bool believes_leading(const PublicKey& node, Tick now, std::int64_t skew,
                      const TurnSchedule& schedule, const Chain& log,
                      const std::vector<ScheduleAdjustment>& adjustments = {});

}  // namespace potc::consensus
