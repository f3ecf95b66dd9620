#include "potc/game.hpp"

#include <algorithm>

namespace potc::game {

CommitResult commit(const KeyPair& owner, const Bytes& data, CommitMode mode,
                    std::int64_t created_turn, std::int64_t deadline_turns, bool salted,
                    Rng& rng, std::optional<std::uint64_t> pad_to, bool bloat) {
    CommitResult r;
    Commitment& c = r.commitment;
    c.mode = mode;
    c.owner = owner.pub;
    c.created_turn = created_turn;
    c.reveal_deadline_turns = deadline_turns;
    c.salted = salted;
    c.is_bloat = bloat;
    r.secret.data = data;

    Bytes payload;
    TransactionKind kind = bloat ? TransactionKind::Bloat
                                 : (mode == CommitMode::GameHash ? TransactionKind::HiddenGameHash
                                                                 : TransactionKind::HiddenEncrypted);
    if (mode == CommitMode::GameHash) {
        if (salted) r.secret.salt = rng.bytes(16);
        Bytes material = data;
        material.insert(material.end(), r.secret.salt.begin(), r.secret.salt.end());
        c.digest = sha256(material);
        payload.assign(c.digest.begin(), c.digest.end());
    } else {
        for (auto& b : r.secret.key) b = static_cast<std::uint8_t>(rng.next());
        c.ciphertext = sym_encrypt(r.secret.key, data);
        payload = c.ciphertext;
    }
    r.tx = make_transaction(owner, kind, payload, pad_to, rng);
    c.id = r.tx.id;
    return r;
}

bool verify_reveal(const Commitment& c, const CommitSecret& secret) {
    if (c.mode == CommitMode::GameHash) {
        Bytes material = secret.data;
        material.insert(material.end(), secret.salt.begin(), secret.salt.end());
        return sha256(material) == c.digest;
    }
    auto plain = sym_decrypt(secret.key, c.ciphertext);
    return plain && *plain == secret.data;
}

RevealOutcome reveal(Commitment& c, const CommitSecret& secret, std::int64_t now_turn) {
    if (c.revealed) fail(Errc::Mismatch, "commitment already revealed");
    if (!verify_reveal(c, secret)) {
        Error e(Errc::Mismatch, "reveal does not open the commitment; emitter blamed");
        throw e;
    }
    RevealOutcome out;
    out.data = secret.data;
    if (c.reveal_deadline_turns > 0 &&
        now_turn > c.created_turn + c.reveal_deadline_turns) {
        out.late = true;
        out.blamed = c.owner;
    }
    c.revealed = true;
    return out;
}

Transaction make_reveal_tx(const KeyPair& owner, const Commitment& c, const CommitSecret& s) {
    Encoder e;
    e.raw(c.id);
    if (c.mode == CommitMode::GameHash) {
        e.u8(0);
        e.blob(s.data);
        e.blob(s.salt);
        return make_transaction(owner, TransactionKind::RevealPreimage, e.out);
    }
    e.u8(1);
    e.raw(s.key.data(), s.key.size());
    return make_transaction(owner, TransactionKind::RevealKey, e.out);
}

const FollowUp& FollowUpRegistry::add(const FollowUp& f) {
    auto [it, inserted] = by_base.emplace(f.base, f);
    if (!inserted)
        fail(Errc::SecondFollowUp, "a fleet can be called back only once");
    return it->second;
}

TimeoutObligation enforce_timeout(const FollowUp& f, std::int64_t now_turn) {
    TimeoutObligation o;
    o.base_published = true;
    // The fleet did not arrive by its expected round, so a callback happened
    // strictly between the send and the arrival.
    o.callback_lo = f.send_turn + 1;
    o.callback_hi = f.send_turn + f.distance - 1;
    // A callback at c returns the fleet at 2c - send.
    o.return_lo = 2 * o.callback_lo - f.send_turn;
    o.return_hi = 2 * o.callback_hi - f.send_turn;
    o.revealed_by_implication = o.callback_lo == o.callback_hi;
    (void)now_turn;
    return o;
}

std::uint64_t generator(std::uint64_t seed) { return mix64(seed); }

std::uint64_t generator_in_range(std::uint64_t seed, std::uint64_t lo, std::uint64_t hi) {
    return lo + generator(seed) % (hi - lo + 1);
}

Hash32 value_commit_digest(std::uint64_t value, const Bytes& salt) {
    Encoder e;
    e.u64(value);
    e.blob(salt);
    return sha256(e.out);
}

void rand_commit(RandomizationSession& s, const PublicKey& node, std::uint64_t value,
                 const Bytes& salt) {
    s.commits[node] = value_commit_digest(value, salt);
}

bool rand_reveal(RandomizationSession& s, const PublicKey& node, std::uint64_t value,
                 const Bytes& salt) {
    auto it = s.commits.find(node);
    if (it == s.commits.end()) return false;
    if (value_commit_digest(value, salt) != it->second) return false;  // excluded, blamed
    s.reveals[node] = value;
    return true;
}

void rand_private_envelope(RandomizationSession& s, const PublicKey& node, std::uint64_t value,
                           const Bytes& salt, const SymKey& key) {
    rand_commit(s, node, value, salt);
    Encoder e;
    e.u64(value);
    e.blob(salt);
    s.private_envelopes[node] = sym_encrypt(key, e.out);
    s.envelope_keys[node] = key;
}

bool rand_open_envelope(RandomizationSession& s, const PublicKey& node, const SymKey& key) {
    auto env = s.private_envelopes.find(node);
    if (env == s.private_envelopes.end()) return false;
    auto plain = sym_decrypt(key, env->second);
    if (!plain) return false;
    Decoder d(*plain);
    std::uint64_t value = d.u64();
    Bytes salt = d.blob();
    return rand_reveal(s, node, value, salt);
}

RandomRunResult random_run(const RandomizationSession& s) {
    if (!s.reveals.count(s.initiator))
        fail(Errc::InitiatorSilent, "the initiator must always reveal");
    RandomRunResult r;
    for (const auto& [node, value] : s.reveals) r.seed += value;  // order-invariant sum
    r.contributors = s.reveals.size();
    std::uint64_t lo = s.range_lo, hi = s.range_hi;
    if (s.mode_uniform_range) {
        lo = 1;
        hi = r.seed ? r.seed : 1;
    }
    r.output = hi >= lo ? generator_in_range(r.seed, lo, hi) : generator(r.seed);
    return r;
}

std::int64_t fog_report(std::int64_t true_value, const FogPolicy& policy,
                        std::uint64_t session_output) {
    const std::int64_t X = policy.band_percent;
    if (X == 0) return true_value;
    const std::int64_t deviation =
        static_cast<std::int64_t>(session_output % static_cast<std::uint64_t>(2 * X + 1)) - X;
    return true_value + (true_value * deviation) / 100;
}

bool fog_in_band(std::int64_t published, std::int64_t true_value, const FogPolicy& policy) {
    const std::int64_t X = policy.band_percent;
    return 100 * published >= true_value * (100 - X) && 100 * published <= true_value * (100 + X);
}

void check_fog_report(std::int64_t published, std::int64_t true_value, const FogPolicy& policy,
                      const PublicKey& emitter) {
    if (!fog_in_band(published, true_value, policy))
        fail(Errc::OutOfBand, "fog report outside the band; emitter " +
                                  hex(emitter.data(), 4) + " blamed");
}

std::vector<std::vector<std::size_t>> build_groups(const Grouping& grouping, std::size_t n) {
    std::vector<std::vector<std::size_t>> groups;
    switch (grouping.kind) {
        case Grouping::Kind::FullMistrust:
            for (std::size_t i = 0; i < n; ++i) groups.push_back({i});
            break;
        case Grouping::Kind::GroupsOf: {
            const std::size_t count = n / grouping.k;
            groups.resize(count ? count : 1);
            for (std::size_t i = 0; i < n; ++i)
                groups[std::min(i / grouping.k, groups.size() - 1)].push_back(i);
            break;
        }
        case Grouping::Kind::FixedGroups: {
            groups.resize(grouping.k);
            for (std::size_t i = 0; i < n; ++i) groups[i % grouping.k].push_back(i);
            break;
        }
    }
    return groups;
}

Ratio fraud_resilience(const Grouping& grouping, std::size_t n) {
    if (n < 3) fail(Errc::TooFewParties, "shuffle needs at least three parties");
    // Fraud needs one hostile node per group; the minimum hostile set is one
    // per group.
    const std::size_t groups = build_groups(grouping, n).size();
    return Ratio{groups, n};
}

TriggerOutcome trigger_pipe(const TriggerIntent& intent, bool leader_relays) {
    TriggerOutcome o;
    o.ordered = {intent};
    o.kind = leader_relays ? TriggerOutcome::Kind::Relayed : TriggerOutcome::Kind::Ignored;
    return o;
}

TriggerOutcome trigger_round(std::vector<TriggerIntent> intents,
                             const std::set<PublicKey>& expected_answers,
                             const std::set<PublicKey>& answered, Tick now, Tick deadline) {
    if (now > deadline) {
        for (const auto& pk : expected_answers)
            if (!answered.count(pk))
                fail(Errc::RoundStalled, "missing answers past the trigger-round deadline");
    }
    std::sort(intents.begin(), intents.end(), [](const TriggerIntent& a, const TriggerIntent& b) {
        if (a.at != b.at) return a.at < b.at;
        return a.claimant < b.claimant;
    });
    TriggerOutcome o;
    o.kind = TriggerOutcome::Kind::RoundComplete;
    o.ordered = std::move(intents);
    return o;
}

TriggerOutcome trigger_detour(const TriggerIntent& intent) {
    TriggerOutcome o;
    o.kind = TriggerOutcome::Kind::DetourGranted;
    o.ordered = {intent};
    return o;
}

Verdict win_claim(const PublicKey& claimant, const std::vector<Commitment>& commitments) {
    for (const auto& c : commitments) {
        if (!(c.owner == claimant)) continue;
        if (!c.revealed) {
            Verdict v;
            v.reason = std::string("unrevealed ") + (c.is_bloat ? "bloat " : "") +
                       "commitment " + hex(c.id.data(), 4) + "; fraud assumed";
            return v;
        }
    }
    return Verdict{true, "full disclosure"};
}

DisputeOutcome resolve_dispute(DisputeStrategy strategy, bool recover_possible) {
    switch (strategy) {
        case DisputeStrategy::Vote: return {DisputeOutcome::Kind::VoteOpened};
        case DisputeStrategy::Escalate: return {DisputeOutcome::Kind::Escalated};
        case DisputeStrategy::StopGame: return {DisputeOutcome::Kind::GameStopped};
        case DisputeStrategy::Recover:
            if (!recover_possible)
                fail(Errc::RecoverImpossible,
                     "reverse shuffle order and encryption keys are lost");
            return {DisputeOutcome::Kind::Recovered};
    }
    fail(Errc::ConfigInvalid, "unknown dispute strategy");
}

}  // namespace potc::game
