#pragma once

#include "potc/chain.hpp"

namespace potc::storage {

using potc::Tick;

struct StorageParams {
    double size_relevant_mb = 0.001;              // average transaction, Table defaults
    double size_bloat_large_mb = 0.01;            // BT(l)
    double size_bloat_small_mb = 32.0 / 1048576;  // BT(s): 32 bytes (+ overhead)
    double game_hash_mb = 32.0 / 1048576;         // H(h)
    double bloat_ratio = 1.0;                     // BTs per relevant tx (worst case 50:50)
    double child_capacity_mb = 1.0;               // ~1000 transactions
    double untidy_cap_mb = 1.0;                   // prune trigger
    double reveal_key_mb = 0.0;                   // negligible at this model's scale

    void validate() const;
};

enum class TxClass {
    RelevantHidden,
    RelevantRevealed,
    RelevantHistoric,
    BloatUnrevealed,
    BloatRevealed,
    Meta,
};

const char* class_name(TxClass c);

// Reveal/obsolescence status per transaction id; the application callback
// decides what is historic.
struct ChainState {
    std::set<Hash32> revealed;
    std::set<Hash32> historic;

    bool is_revealed(const Hash32& id) const { return revealed.count(id) > 0; }
};

TxClass classify(const Transaction& tx, const ChainState& state);

// --- Prune procedure -----------------------------------------------------------

struct PruneProof {
    Hash32 old_tip{};
    std::vector<Hash32> removed;       // revealed bloat ids
    std::vector<Hash32> transcribed;   // ids moved into the fixed chain
    std::uint64_t new_fixed_upto = 0;
};

struct PruneResult {
    Chain chain;
    PruneProof proof;
};

// Recomputes the untidy chain: revealed bloat deleted, everything revealed
// transcribed into one GCN-signed block (embedded transactions keep their
// emitters' signatures), unrevealed kept behind the new fixed marker.
PruneResult prune(const Chain& chain, const ChainState& state, const KeyPair& gcn,
                  const PublicKey& designated, Tick now, std::int64_t turn);

// Every node re-runs the derivation and compares; raises InvalidPrune on any
// divergence.
void verify_prune(const Chain& before, const ChainState& state, const Chain& after,
                  const PruneProof& proof);

// --- Child-chain transition -------------------------------------------------------

struct ChildChain {
    std::uint64_t id = 0;
    double capacity_mb = 1.0;
    enum class State { Open, Full, Deletable } state = State::Open;
    std::vector<Hash32> entries;        // unrevealed commitments parked here
    std::set<Hash32> revealed_entries;  // reveal keys appended next to them
    double stored_mb = 0.0;

    bool deletable() const { return revealed_entries.size() == entries.size(); }
};

struct ChildLedger {
    std::vector<ChildChain> children;
    double capacity_mb = 1.0;
    double main_mb = 0.0;      // unencrypted residues live on the main chain
    std::uint64_t next_id = 1;

    ChildChain& open_child();
    // Routes an unrevealed transaction to the open child; rolls over when full.
    void route(const Hash32& id, double size_mb);
    // Reveal: key onto the child, residue onto the main chain.
    void reveal(const Hash32& id, double residue_mb, double key_mb);
    // Local deletion of fully revealed children.
    std::size_t gc();
    double total_mb() const;
};

// --- Meta-state blocks -----------------------------------------------------------

// Deterministic replay digest standing in for the application state: the
// ordered (id, revealed) pairs of all non-bloat transactions up to a height.
Hash32 replay_digest(const Chain& chain, const ChainState& state, std::uint64_t upto_height);

// Rewrites the chain with a meta-state genesis at cut_height: snapshot block,
// retained tail of historic blocks, then the post-cut blocks re-encapsulated.
Chain meta_state_cut(const Chain& chain, const ChainState& state, std::uint64_t cut_height,
                     std::uint64_t retained_tail, const KeyPair& gcn, bool vote_passed);

// --- Break-even ---------------------------------------------------------------------

struct ModeAdvice {
    bool game_hash_wins = false;   // H(h) + f*BT(s) < f*BT(l)
    double threshold_f = 0.0;      // f* solving f*BT(l) = H(h) + f*BT(s)
};

ModeAdvice breakeven(double f, const StorageParams& params);

// --- Storage series ------------------------------------------------------------------

enum StorageMode : unsigned {
    kStorageNone = 0,
    kStoragePrune = 1u << 0,
    kStorageChild = 1u << 1,
    kStorageMeta = 1u << 2,
};

struct StorageScenario {
    std::uint64_t steps = 1000;
    std::uint64_t arrivals_per_step = 1;   // relevant transactions per step
    double bloat_per_relevant = 1.0;       // padded to the same size
    std::uint64_t reveal_delay = 100;      // offset revelation, in steps
    std::uint64_t meta_cut_interval = 0;   // 0 = derived from reveal_delay
    std::uint64_t meta_retain_tail = 0;    // steps of history kept at a cut
};

struct SeriesPoint {
    std::uint64_t step = 0;
    std::uint64_t tx_count = 0;  // arrived so far
    double total_mb = 0.0;
};

std::vector<SeriesPoint> storage_series(const StorageScenario& scenario, unsigned mode,
                                        const StorageParams& params);

// Checkpoints where prune/child events fired (for matched-parameter comparison).
std::vector<std::uint64_t> series_checkpoints(const StorageScenario& scenario, unsigned mode,
                                              const StorageParams& params);

std::string series_to_csv(const std::vector<SeriesPoint>& series, const std::string& mode_name);

}  // namespace potc::storage
