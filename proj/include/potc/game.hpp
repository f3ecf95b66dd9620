#pragma once

#include "potc/chain.hpp"

#include <optional>

namespace potc::game {

using potc::Tick;

// --- Offset revealing ---------------------------------------------------------

enum class CommitMode { Encrypted, GameHash };

struct Commitment {
    Hash32 id{};               // the commit transaction's id
    CommitMode mode = CommitMode::GameHash;
    PublicKey owner{};
    Hash32 digest{};           // GameHash: sha256(data | salt)
    Bytes ciphertext;          // Encrypted: sym_encrypt(key, data)
    bool salted = false;
    std::int64_t created_turn = 0;
    std::int64_t reveal_deadline_turns = 0;  // 0 = no deadline
    bool revealed = false;
    bool is_bloat = false;
};

// What the owner keeps back until the reveal.
struct CommitSecret {
    Bytes data;
    Bytes salt;      // GameHash mode
    SymKey key{};    // Encrypted mode
};

struct CommitResult {
    Commitment commitment;
    CommitSecret secret;
    Transaction tx;
};

// Publishes a veiled transaction. GameHash mode puts a 32-byte digest on
// chain no matter the data size; Encrypted mode carries the ciphertext.
CommitResult commit(const KeyPair& owner, const Bytes& data, CommitMode mode,
                    std::int64_t created_turn, std::int64_t deadline_turns, bool salted,
                    Rng& rng, std::optional<std::uint64_t> pad_to = std::nullopt,
                    bool bloat = false);

struct RevealOutcome {
    Bytes data;
    bool late = false;               // deadline blown; timeout-rule consequences apply
    PublicKey blamed{};              // set on mismatch
};

// Verifies a reveal against the commitment; every node can run this check
// independently. Mismatch blames the emitter; DeadlineExceeded flags lateness.
RevealOutcome reveal(Commitment& c, const CommitSecret& secret, std::int64_t now_turn);

// Pure check without mutating the commitment (what verifiers run).
bool verify_reveal(const Commitment& c, const CommitSecret& secret);

// Reveal transaction payload carries (commitment id, secret material).
Transaction make_reveal_tx(const KeyPair& owner, const Commitment& c, const CommitSecret& s);

// --- Hidden follow-up movements -------------------------------------------------

struct FollowUp {
    Hash32 base{};             // base commitment id
    Hash32 delta{};            // follow-up commitment id
    bool return_to_origin = true;
    std::int64_t send_turn = 0;
    std::int64_t distance = 0;  // rounds to the destination
};

struct FollowUpRegistry {
    std::map<Hash32, FollowUp> by_base;

    // Only one follow-up per base, ever.
    const FollowUp& add(const FollowUp& f);
};

struct TimeoutObligation {
    bool base_published = false;
    std::int64_t callback_lo = 0;   // inclusive bounds on the callback round
    std::int64_t callback_hi = 0;
    std::int64_t return_lo = 0;     // induced bounds on the return round
    std::int64_t return_hi = 0;
    bool revealed_by_implication = false;  // a single feasible slot remains
};

// When the hide window expires at the expected arrival, the base must be
// published together with a statement narrowing when the callback happened.
TimeoutObligation enforce_timeout(const FollowUp& f, std::int64_t now_turn);

// --- Randomization ---------------------------------------------------------------

// The fixed generator: splitmix64 finalizer over the seed, mapped by modulo.
std::uint64_t generator(std::uint64_t seed);
std::uint64_t generator_in_range(std::uint64_t seed, std::uint64_t lo, std::uint64_t hi);

enum class RandomizationMode { Broadcast, PrivateToInitiator };

struct RandomizationSession {
    PublicKey initiator{};
    std::uint64_t range_lo = 0;
    std::uint64_t range_hi = 0;
    RandomizationMode mode = RandomizationMode::Broadcast;
    Tick deadline = 0;
    bool allow_single_answer = false;  // the ">= 1 answer" variant; stalls if nobody answers
    // Open question both ways: PRNG-seeded reading is the default; the
    // uniform-over-(1,seed) reading is available behind this flag.
    bool mode_uniform_range = false;

    std::map<PublicKey, Hash32> commits;
    std::map<PublicKey, std::uint64_t> reveals;       // verified values only
    std::map<PublicKey, Bytes> private_envelopes;     // PrivateToInitiator ciphertexts
    std::map<PublicKey, SymKey> envelope_keys;
    bool fake = false;  // bloat cover session (case-3 camouflage)
};

Hash32 value_commit_digest(std::uint64_t value, const Bytes& salt);

void rand_commit(RandomizationSession& s, const PublicKey& node, std::uint64_t value,
                 const Bytes& salt);
// Returns false (and excludes the contributor) when the reveal does not match
// its commit.
bool rand_reveal(RandomizationSession& s, const PublicKey& node, std::uint64_t value,
                 const Bytes& salt);

// PrivateToInitiator: the value travels encrypted to the initiator during the
// window; the key is published after it.
void rand_private_envelope(RandomizationSession& s, const PublicKey& node, std::uint64_t value,
                           const Bytes& salt, const SymKey& key);
bool rand_open_envelope(RandomizationSession& s, const PublicKey& node, const SymKey& key);

struct RandomRunResult {
    std::uint64_t seed = 0;     // sum of verified reveals
    std::uint64_t output = 0;   // generator(seed) mapped to the range
    std::size_t contributors = 0;
};

RandomRunResult random_run(const RandomizationSession& s);

// --- Fog of war ---------------------------------------------------------------------

struct FogPolicy {
    std::uint32_t band_percent = 0;  // X
};

// Published value derived from the committed randomization output; always in
// the closed band [v*(1-X/100), v*(1+X/100)].
std::int64_t fog_report(std::int64_t true_value, const FogPolicy& policy,
                        std::uint64_t session_output);
bool fog_in_band(std::int64_t published, std::int64_t true_value, const FogPolicy& policy);
// Raises OutOfBand (blaming the emitter) when the report leaves the band.
void check_fog_report(std::int64_t published, std::int64_t true_value, const FogPolicy& policy,
                      const PublicKey& emitter);

// --- Shuffle fraud resilience ----------------------------------------------------------

struct Ratio {
    std::uint64_t num = 0;
    std::uint64_t den = 1;
    bool operator==(const Ratio& o) const { return num * o.den == o.num * den; }
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

struct Grouping {
    enum class Kind { FullMistrust, GroupsOf, FixedGroups } kind = Kind::FullMistrust;
    std::size_t k = 1;  // group size (GroupsOf) or group count (FixedGroups)
};

// Minimum hostile fraction able to reconstruct hidden pile information:
// one hostile node per group suffices.
Ratio fraud_resilience(const Grouping& grouping, std::size_t n);

// The concrete partition used (sequential; remainder joins the last group).
std::vector<std::vector<std::size_t>> build_groups(const Grouping& grouping, std::size_t n);

// --- Trigger events ----------------------------------------------------------------------

enum class TriggerMechanism { PipeViaLN, TriggerRound, Detour };

struct TriggerIntent {
    Tick at = 0;
    PublicKey claimant{};
    Bytes payload;
};

struct TriggerOutcome {
    enum class Kind { Relayed, Ignored, RoundComplete, DetourGranted } kind;
    std::vector<TriggerIntent> ordered;  // TriggerRound: deterministic order
};

// Case A: the claimant's signed transaction is relayed by the LN. An ignored
// legit trigger is recorded and escalates to a dispute.
TriggerOutcome trigger_pipe(const TriggerIntent& intent, bool leader_relays);

// Case B: a fast single-purpose round; repeated until no new intents arrive.
// Missing answers past the deadline stall the round.
TriggerOutcome trigger_round(std::vector<TriggerIntent> intents,
                             const std::set<PublicKey>& expected_answers,
                             const std::set<PublicKey>& answered, Tick now, Tick deadline);

// Case C: writing permission lent to the claimant, then returned.
TriggerOutcome trigger_detour(const TriggerIntent& intent);

// --- Win claims & disputes ---------------------------------------------------------------

struct Verdict {
    bool granted = false;
    std::string reason;
};

// Granted only with full disclosure: every commitment of the claimant,
// including bloat, revealed and valid.
Verdict win_claim(const PublicKey& claimant, const std::vector<Commitment>& commitments);

enum class DisputeStrategy { Vote, Escalate, StopGame, Recover };

struct DisputeOutcome {
    enum class Kind { VoteOpened, Escalated, GameStopped, Recovered } kind;
};

// Recover may be impossible (lost shuffle secrets); recover_possible captures
// the implementation callback's answer.
DisputeOutcome resolve_dispute(DisputeStrategy strategy, bool recover_possible);

}  // namespace potc::game
