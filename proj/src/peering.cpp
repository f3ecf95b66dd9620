#include "potc/peering.hpp"

#include <deque>
#include <sstream>

namespace potc::peering {

double PullStrategy::rate(int x) const {
    if (x < deep_sleep_below) return deep_sleep_rate;
    if (x <= approach_until) return approach_rate;
    if (x < 0) {
        const double span = static_cast<double>(-ramp_from);
        const double dx = static_cast<double>(x - ramp_from);
        return approach_rate + (lead_rate - approach_rate) * dx / span;
    }
    return lead_rate;
}

void PullStrategy::validate() const {
    // f(0)=0 and f(0)->0 never trigger another pull and would disconnect the
    // node permanently.
    if (lead_rate <= 0.001) fail(Errc::ConfigInvalid, "post-turn rate would never pull again");
    if (deep_sleep_rate <= 0.0 || approach_rate <= 0.0)
        fail(Errc::ConfigInvalid, "pull rates must be positive");
    if (rate(ramp_from) > rate(0) || rate(deep_sleep_below) > rate(approach_until))
        fail(Errc::ConfigInvalid, "pull rate must be non-decreasing towards the turn");
}

double pull_interval(int x, double turn_duration, const PullStrategy& strategy) {
    strategy.validate();
    return turn_duration / strategy.rate(x);
}

double post_turn_interval(double turn_duration, std::size_t nodes) {
    return turn_duration * (static_cast<double>(nodes) / 4.0);
}

std::size_t guess_leader(Tick last_transition_tick, std::size_t last_leader_pos,
                         const consensus::TurnSchedule& schedule, Tick now) {
    const Tick slot = schedule.turn_duration + schedule.transition_duration;
    const std::uint64_t steps = (now - last_transition_tick) / slot;
    return (last_leader_pos + steps) % schedule.size();
}

UpdateResponse serve_pull(const Chain& chain, const UpdateRequest& req) {
    UpdateResponse resp;
    for (std::size_t i = 0; i < chain.blocks.size(); ++i) {
        const Block& b = chain.blocks[i];
        if ((is_transition(b.kind) || is_genesis(b.kind)) &&
            hash_block(b) == req.last_known_transition_block) {
            resp.kind = UpdateResponse::Kind::Suffix;
            resp.suffix.assign(chain.blocks.begin() + static_cast<std::ptrdiff_t>(i),
                               chain.blocks.end());
            return resp;
        }
    }
    return resp;  // NoAnswer: requester's anchor unknown here
}

PullResult pull_once(std::size_t self_pos, std::size_t guessed_leader, std::size_t roster_size,
                     const ProbeFn& probe) {
    const std::size_t n = roster_size;
    std::vector<bool> tried(n, false);
    tried[self_pos] = true;  // a pull request from itself is skipped

    PullResult result;
    std::deque<std::size_t> queue;
    auto push_target = [&](std::size_t pos) {
        if (!tried[pos]) queue.push_back(pos);
    };

    push_target(guessed_leader % n);
    std::size_t step = 1;
    std::size_t enqueued = 1;
    while (!queue.empty() || enqueued < n) {
        while (queue.empty() && enqueued < n) {
            // Expand alternately: predecessor (led before the guess), then
            // successor, one ring step further each time.
            const std::size_t pred = (guessed_leader + n - step % n) % n;
            const std::size_t succ = (guessed_leader + step % n) % n;
            push_target(pred);
            push_target(succ);
            ++step;
            enqueued += 2;
        }
        if (queue.empty()) break;
        std::size_t target = queue.front();
        queue.pop_front();
        if (tried[target]) continue;
        tried[target] = true;
        ++result.probes;
        UpdateResponse resp = probe(target);
        switch (resp.kind) {
            case UpdateResponse::Kind::Suffix:
                result.answered_by = target;
                result.suffix = std::move(resp.suffix);
                return result;
            case UpdateResponse::Kind::Referral:
                if (!tried[resp.referral % n]) queue.push_front(resp.referral % n);
                break;
            case UpdateResponse::Kind::NoAnswer:
                break;
        }
    }
    fail(Errc::NetworkLost, "full roster probed without an answer");
}

std::vector<std::size_t> drains(std::size_t x, std::size_t roster_size) {
    std::vector<std::size_t> out;
    if (x == 0) {
        for (std::size_t d = 1; d <= 9 && d < roster_size; ++d) out.push_back(d);
        return out;
    }
    for (std::size_t y = 0; y <= 9; ++y) {
        const std::size_t d = x * kFanout + y;
        if (d < roster_size) out.push_back(d);
    }
    return out;
}

std::size_t hops_to(std::size_t index) {
    std::size_t digits = 1;
    while (index >= 10) {
        index /= 10;
        ++digits;
    }
    return digits;
}

std::vector<std::size_t> DeliveryReport::unreached() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i < nodes.size(); ++i)
        if (!nodes[i].reached) out.push_back(i);
    return out;
}

std::string DeliveryReport::to_csv(std::size_t round) const {
    std::ostringstream o;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        o << round << ',' << i << ',' << nodes[i].hops << ',' << (nodes[i].reached ? 1 : 0)
          << '\n';
    return o.str();
}

DeliveryReport push_round(std::size_t roster_size, const std::vector<bool>& online,
                          bool jump_pipes) {
    DeliveryReport report;
    report.nodes.resize(roster_size);
    if (roster_size == 0) return report;
    report.nodes[0] = {true, 0, 0};  // the LN is its own source
    report.reached_count = 1;

    std::deque<std::size_t> frontier{0};
    while (!frontier.empty()) {
        const std::size_t u = frontier.front();
        frontier.pop_front();
        for (std::size_t d : drains(u, roster_size)) {
            if (report.nodes[d].reached) continue;
            if (online[d]) {
                report.nodes[d] = {true, report.nodes[u].hops + 1, u};
                ++report.reached_count;
                report.max_hops = std::max(report.max_hops, report.nodes[d].hops);
                frontier.push_back(d);
            } else if (jump_pipes) {
                // The source covers the offline drain's children directly.
                for (std::size_t g : drains(d, roster_size)) {
                    if (report.nodes[g].reached || !online[g]) continue;
                    report.nodes[g] = {true, report.nodes[u].hops + 1, u};
                    ++report.reached_count;
                    report.max_hops = std::max(report.max_hops, report.nodes[g].hops);
                    frontier.push_back(g);
                }
            }
        }
    }
    return report;
}

DeliveryReport full_push(std::size_t roster_size, const std::vector<bool>& online) {
    DeliveryReport report;
    report.nodes.resize(roster_size);
    if (roster_size == 0) return report;
    report.nodes[0] = {true, 0, 0};
    report.reached_count = 1;
    for (std::size_t i = 1; i < roster_size; ++i) {
        if (!online[i]) continue;
        report.nodes[i] = {true, 1, 0};
        ++report.reached_count;
        report.max_hops = 1;
    }
    return report;
}

}  // namespace potc::peering
