#include "potc/consensus.hpp"

#include <algorithm>
#include <cmath>

namespace potc::consensus {

const NodeId& TurnSchedule::leader_of_turn(std::int64_t turn) const {
    std::size_t n = roster.size();
    std::size_t idx = static_cast<std::size_t>(((turn % static_cast<std::int64_t>(n)) + n) % n);
    return roster[idx];
}

std::size_t TurnSchedule::position_of(const PublicKey& pk) const {
    for (std::size_t i = 0; i < roster.size(); ++i)
        if (roster[i].public_key == pk) return i;
    fail(Errc::ConfigInvalid, "node not in roster");
}

void TurnSchedule::validate() const {
    if (roster.empty()) fail(Errc::ConfigInvalid, "roster is empty");
    if (transition_duration < 1) fail(Errc::ConfigInvalid, "transition duration must be >= 1");
    if (turn_duration <= transition_duration)
        fail(Errc::ConfigInvalid, "turn duration must exceed transition duration");
    if (overflow_fraction <= 0.0 || overflow_fraction >= 1.0)
        fail(Errc::ConfigInvalid, "overflow fraction must be in (0, 1)");
}

TurnIndex turn_index_of(std::size_t node_pos, std::int64_t current_turn,
                        const TurnSchedule& schedule) {
    const std::int64_t n = static_cast<std::int64_t>(schedule.size());
    const std::size_t leader_pos = schedule.position_of(schedule.leader_of_turn(current_turn).public_key);
    // Turns since this node last led, in [0, n).
    std::int64_t since = (static_cast<std::int64_t>(leader_pos) - static_cast<std::int64_t>(node_pos) + n) % n;
    const std::int64_t overflow = static_cast<std::int64_t>(
        std::llround(schedule.overflow_fraction * static_cast<double>(n)));
    if (since <= overflow) return TurnIndex{static_cast<int>(since)};
    return TurnIndex{static_cast<int>(since - n)};
}

std::vector<TurnWindow> replay_schedule(const TurnSchedule& schedule, const Chain& log,
                                        Tick until,
                                        const std::vector<ScheduleAdjustment>& adjustments) {
    schedule.validate();
    if (log.blocks.empty()) fail(Errc::ConfigInvalid, "log has no genesis");

    const Tick t = schedule.turn_duration;
    const Tick T = schedule.transition_duration;

    struct Seal {
        Tick at;
        PublicKey author;
    };
    std::vector<Seal> seals;
    for (const auto& b : log.blocks)
        if (is_transition(b.kind)) seals.push_back({b.logical_time, b.author});

    std::map<std::int64_t, Tick> grace;
    std::set<std::int64_t> skips;
    std::vector<std::pair<Tick, Tick>> pauses;  // (at, length)
    for (const auto& a : adjustments) {
        switch (a.kind) {
            case ScheduleAdjustment::Kind::Grace: grace[a.turn] += a.length; break;
            case ScheduleAdjustment::Kind::Skip: skips.insert(a.turn); break;
            case ScheduleAdjustment::Kind::Pause: pauses.emplace_back(a.at, a.length); break;
        }
    }
    std::sort(pauses.begin(), pauses.end());

    std::vector<TurnWindow> windows;
    Tick start = log.blocks.front().logical_time;
    std::size_t seal_i = 0, pause_i = 0;
    std::int64_t turn = 0;

    while (windows.empty() || windows.back().next_start <= until) {
        // Pauses shift every turn starting at or after their effective tick.
        while (pause_i < pauses.size() && pauses[pause_i].first <= start) {
            start += pauses[pause_i].second;
            ++pause_i;
        }
        TurnWindow w;
        w.turn = turn;
        w.leader = schedule.leader_of_turn(turn);
        w.start = start;
        Tick g = 0;
        if (auto it = grace.find(turn); it != grace.end()) g = it->second;
        const Tick scheduled_end = start + t + g;
        w.end = scheduled_end;
        if (skips.count(turn)) {
            w.end = start;
            w.ended_early = true;
        } else if (seal_i < seals.size() && seals[seal_i].at <= scheduled_end) {
            w.end = std::max(seals[seal_i].at, start);
            w.ended_early = w.end < scheduled_end;
            ++seal_i;
        }
        if (schedule.shifted_start || skips.count(turn))
            w.next_start = w.end + T;
        else
            w.next_start = scheduled_end + T;
        windows.push_back(w);
        start = w.next_start;
        ++turn;
        if (windows.size() > 1000000) fail(Errc::ConfigInvalid, "schedule replay runaway");
    }
    return windows;
}

LeaderState current_leader(Tick now, const TurnSchedule& schedule, const Chain& log,
                           const std::vector<ScheduleAdjustment>& adjustments) {
    auto windows = replay_schedule(schedule, log, now, adjustments);
    const TurnWindow& w = windows.back();
    if (now < w.end) return Leading{w.leader, w.turn, w.end};
    return Transition{w.leader, schedule.leader_of_turn(w.turn + 1), w.turn + 1, w.next_start};
}

namespace {

// Returns the Leading state for `node`, or raises NotLeader/TurnExpired.
Leading require_leader(const PublicKey& node, Tick now, const TurnSchedule& schedule,
                       const Chain& log, const std::vector<ScheduleAdjustment>& adjustments) {
    LeaderState st = current_leader(now, schedule, log, adjustments);
    if (auto* tr = std::get_if<Transition>(&st)) {
        if (tr->prev.public_key == node)
            fail(Errc::TurnExpired, "turn already sealed, transition running");
        fail(Errc::NotLeader, "transition window, no writer");
    }
    Leading lead = std::get<Leading>(st);
    if (!(lead.node.public_key == node)) fail(Errc::NotLeader, "another node holds the turn");
    return lead;
}

}  // namespace

Block propose_block(const KeyPair& node, std::vector<Transaction> txs, Tick now,
                    const TurnSchedule& schedule, const Chain& log,
                    const std::vector<ScheduleAdjustment>& adjustments) {
    Leading lead = require_leader(node.pub, now, schedule, log, adjustments);
    // Handover margin: no new data inside the final T ticks of the slot.
    if (now + schedule.transition_duration >= lead.turn_end)
        fail(Errc::TurnExpired, "inside the handover margin");
    return build_block(node, log.height() + 1, log.tip_hash(), lead.turn, now, BlockKind::Data,
                       std::move(txs));
}

Block handover(const KeyPair& leader, const KeyPair& successor, Tick now,
               const TurnSchedule& schedule, const Chain& log,
               const std::vector<ScheduleAdjustment>& adjustments) {
    Leading lead = require_leader(leader.pub, now, schedule, log, adjustments);
    const NodeId& next = schedule.leader_of_turn(lead.turn + 1);
    if (!(next.public_key == successor.pub))
        fail(Errc::WrongSuccessor, "handover partner is not the scheduled successor");
    Block b = build_block(leader, log.height() + 1, log.tip_hash(), lead.turn, now,
                          BlockKind::Handover, {});
    countersign(b, successor);
    return b;
}

Block finalize_turn(const KeyPair& leader, Tick now, const TurnSchedule& schedule,
                    const Chain& log, const std::vector<ScheduleAdjustment>& adjustments) {
    Leading lead = require_leader(leader.pub, now, schedule, log, adjustments);
    return build_block(leader, log.height() + 1, log.tip_hash(), lead.turn, now,
                       BlockKind::Finalizing, {});
}

FinalityTracker make_tracker(const Hash32& block, double threshold, std::size_t active,
                             std::size_t roster_size) {
    FinalityTracker t;
    t.block = block;
    t.threshold = threshold;
    t.active_nodes = active;
    t.roster_size = roster_size;
    return t;
}

namespace {

void update_status(FinalityTracker& t) {
    if (t.status != FinalityStatus::Pending) return;
    const double needed = t.threshold * static_cast<double>(t.active_nodes);
    if (static_cast<double>(t.covered.size()) + 1e-9 >= needed ||
        t.turns_elapsed >= t.roster_size)
        t.status = FinalityStatus::EffectiveFinal;
}

}  // namespace

void record_pass(FinalityTracker& t, const PublicKey& completed_turn_author) {
    if (t.status != FinalityStatus::Pending)
        fail(Errc::AlreadyFinal, "tracker already settled");
    if (t.disputed) return;  // passes do not accrue under an open dispute
    t.covered.insert(completed_turn_author);
    ++t.turns_elapsed;
    update_status(t);
}

void approve(FinalityTracker& t, const PublicKey& node) {
    if (t.status != FinalityStatus::Pending)
        fail(Errc::AlreadyFinal, "tracker already settled");
    t.covered.insert(node);
    update_status(t);
}

void invalidate(FinalityTracker& t) {
    if (t.status == FinalityStatus::EffectiveFinal)
        fail(Errc::AlreadyFinal, "effective finality is terminal");
    t.status = FinalityStatus::Invalidated;
}

const char* question_name(VoteQuestion q) {
    switch (q) {
        case VoteQuestion::InvalidateTx: return "invalidate-tx";
        case VoteQuestion::InvalidateBlockTxs: return "invalidate-block";
        case VoteQuestion::KickNode: return "kick";
        case VoteQuestion::Pause: return "pause";
        case VoteQuestion::AcceptPrune: return "accept-prune";
        case VoteQuestion::AdmitNode: return "admit";
        case VoteQuestion::ForkChoice: return "fork-choice";
    }
    return "unknown";
}

VoteState open_vote(const Hash32& subject, VoteQuestion q, Tick deadline, double threshold) {
    VoteState v;
    v.subject = subject;
    v.question = q;
    v.deadline = deadline;
    v.threshold = threshold;
    return v;
}

void cast_ballot(VoteState& v, const PublicKey& voter, bool yes, Tick now) {
    if (v.closed || now > v.deadline) fail(Errc::VoteClosed, "ballot after the deadline");
    if (v.ballots.count(voter)) fail(Errc::DoubleBallot, "one ballot per node");
    v.ballots.emplace(voter, yes);
}

VoteOutcome tally(VoteState& v, const std::set<PublicKey>& active, Tick now) {
    if (now < v.deadline) fail(Errc::VoteNotDue, "tally only at or after the deadline");
    VoteOutcome o;
    for (const auto& pk : active) {
        auto it = v.ballots.find(pk);
        if (it == v.ballots.end())
            ++o.silent;  // silence infers consent
        else if (it->second)
            ++o.yes;
        else
            ++o.no;
    }
    const std::size_t n = active.size();
    o.fraction = n ? static_cast<double>(o.yes + o.silent) / static_cast<double>(n) : 0.0;
    o.passed = o.fraction + 1e-12 >= v.threshold;
    v.closed = true;
    return o;
}

std::size_t turns_represented(const Branch& b) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < b.blocks.size(); ++i) {
        const bool boundary = i == 0 || is_transition(b.blocks[i - 1].kind) ||
                              !(b.blocks[i].author == b.blocks[i - 1].author);
        if (boundary) ++count;
    }
    return count;
}

Resolution resolve_fork(const std::vector<Branch>& branches, ForkPolicy policy) {
    if (branches.empty()) fail(Errc::NoCommonAncestor, "no branches given");
    for (const auto& b : branches)
        if (b.ancestor != branches.front().ancestor)
            fail(Errc::NoCommonAncestor, "branches do not share an ancestor");

    std::size_t best = 0, best_turns = 0;
    std::vector<std::size_t> tied;
    for (std::size_t i = 0; i < branches.size(); ++i) {
        std::size_t tr = turns_represented(branches[i]);
        if (tr > best_turns) {
            best_turns = tr;
            best = i;
            tied.assign(1, i);
        } else if (tr == best_turns) {
            tied.push_back(i);
        }
    }

    Resolution r;
    r.branch = best;
    switch (policy) {
        case ForkPolicy::MergeSoftExclusive: r.kind = Resolution::Kind::Merge; break;
        case ForkPolicy::DisputeVote: r.kind = Resolution::Kind::VoteChoice; break;
        case ForkPolicy::MostProgressive:
            if (branches.size() > 1 && tied.size() > 1) {
                r.kind = Resolution::Kind::RandomizationTieBreak;
                r.tied = tied;
            } else {
                r.kind = Resolution::Kind::Continue;
            }
            break;
    }
    return r;
}

std::size_t break_tie(const Resolution& r, const std::vector<Branch>& branches,
                      std::optional<std::uint64_t> randomization_output) {
    if (r.kind != Resolution::Kind::RandomizationTieBreak) return r.branch;
    if (randomization_output) return r.tied[*randomization_output % r.tied.size()];
    // Randomization itself yielded nothing: lowest branch author wins.
    std::size_t best = r.tied.front();
    for (std::size_t i : r.tied) {
        const PublicKey& a = branches[i].blocks.front().author;
        const PublicKey& b = branches[best].blocks.front().author;
        if (a < b) best = i;
    }
    return best;
}

std::set<PublicKey> Membership::active() const {
    std::set<PublicKey> out;
    for (const auto& n : schedule.roster) {
        auto it = missed_turns.find(n.public_key);
        if (it == missed_turns.end() || it->second <= liveness_window_rounds)
            out.insert(n.public_key);
    }
    return out;
}

TurnSchedule join_node(const TurnSchedule& schedule, const NodeId& candidate,
                       std::size_t insert_index, const VoteOutcome& admit_vote,
                       bool trusted_entity, std::int64_t current_turn,
                       const std::set<PublicKey>& retired) {
    if (retired.count(candidate.public_key))
        fail(Errc::RejoinForbidden, "identity disclosed its keys on leave");
    for (const auto& n : schedule.roster)
        if (n.public_key == candidate.public_key)
            fail(Errc::RoleCollision, "node already in roster");
    if (!trusted_entity && !admit_vote.passed)
        fail(Errc::VoteFailed, "admit vote did not pass");
    const std::size_t n = schedule.size();
    if (insert_index > n) fail(Errc::BadInsertIndex, "insert index out of range");
    const std::size_t ln_pos =
        schedule.position_of(schedule.leader_of_turn(current_turn).public_key);
    // Never replace the recent LN nor become its immediate successor.
    if (insert_index % n == ln_pos || insert_index % n == (ln_pos + 1) % n)
        fail(Errc::BadInsertIndex, "insertion would displace the LN or its successor");
    TurnSchedule next = schedule;
    next.roster.insert(next.roster.begin() + static_cast<std::ptrdiff_t>(insert_index), candidate);
    return next;
}

TurnSchedule leave_node(const TurnSchedule& schedule, const LeaveNoticeData& notice,
                        const std::set<Hash32>& obligations, std::set<PublicKey>& retired) {
    for (const auto& ob : obligations)
        if (!notice.disclosed_secrets.count(ob))
            fail(Errc::UndisclosedObligations,
                 "leave without disclosing network-required secrets");
    TurnSchedule next = schedule;
    auto it = std::find_if(next.roster.begin(), next.roster.end(), [&](const NodeId& n) {
        return n.public_key == notice.node.public_key;
    });
    if (it == next.roster.end()) fail(Errc::ConfigInvalid, "leaver not in roster");
    next.roster.erase(it);
    if (!notice.disclosed_secrets.empty()) retired.insert(notice.node.public_key);
    return next;
}

TurnSchedule kick_node(const TurnSchedule& schedule, const NodeId& node,
                       const VoteOutcome& vote) {
    if (!vote.passed) fail(Errc::VoteFailed, "kick vote did not pass");
    TurnSchedule next = schedule;
    auto it = std::find_if(next.roster.begin(), next.roster.end(), [&](const NodeId& n) {
        return n.public_key == node.public_key;
    });
    if (it == next.roster.end()) fail(Errc::ConfigInvalid, "node not in roster");
    next.roster.erase(it);
    return next;
}

ScheduleAdjustment adapt_turn_time(AdaptiveEvent event, const PublicKey& requester,
                                   std::int64_t turn, Tick now, Tick length,
                                   const std::optional<VoteOutcome>& vote,
                                   AdaptivePolicy& policy) {
    std::uint64_t& streak = policy.consecutive_pauses[requester];
    ++streak;
    if (streak > policy.pause_cap)
        fail(Errc::GraceExhausted, "repeated automated pauses capped");
    if (event == AdaptiveEvent::LostLeader) {
        ScheduleAdjustment a;
        a.kind = ScheduleAdjustment::Kind::Grace;
        a.turn = turn;
        a.length = length ? length : policy.grace;
        return a;
    }
    if (!vote || !vote->passed) fail(Errc::VoteFailed, "pause requires a passed vote");
    ScheduleAdjustment a;
    a.kind = ScheduleAdjustment::Kind::Pause;
    a.at = now;
    a.length = length;
    return a;
}

bool believes_leading(const PublicKey& node, Tick now, std::int64_t skew,
                      const TurnSchedule& schedule, const Chain& log,
                      const std::vector<ScheduleAdjustment>& adjustments) {
    const std::int64_t local = static_cast<std::int64_t>(now) + skew;
    if (local < 0) return false;
    LeaderState st = current_leader(static_cast<Tick>(local), schedule, log, adjustments);
    auto* lead = std::get_if<Leading>(&st);
    return lead && lead->node.public_key == node;
}

}  // namespace potc::consensus
