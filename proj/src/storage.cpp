#include "potc/storage.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace potc::storage {

void StorageParams::validate() const {
    if (size_relevant_mb <= 0 || size_bloat_large_mb <= 0 || size_bloat_small_mb <= 0 ||
        game_hash_mb <= 0 || child_capacity_mb <= 0 || untidy_cap_mb <= 0)
        fail(Errc::ConfigInvalid, "sizes must be positive");
    if (bloat_ratio < 0) fail(Errc::ConfigInvalid, "bloat ratio must be >= 0");
}

const char* class_name(TxClass c) {
    switch (c) {
        case TxClass::RelevantHidden: return "relevant-hidden";
        case TxClass::RelevantRevealed: return "relevant-revealed";
        case TxClass::RelevantHistoric: return "relevant-historic";
        case TxClass::BloatUnrevealed: return "bloat-unrevealed";
        case TxClass::BloatRevealed: return "bloat-revealed";
        case TxClass::Meta: return "meta";
    }
    return "unknown";
}

TxClass classify(const Transaction& tx, const ChainState& state) {
    switch (tx.kind) {
        case TransactionKind::Bloat:
            return state.is_revealed(tx.id) ? TxClass::BloatRevealed : TxClass::BloatUnrevealed;
        case TransactionKind::HiddenEncrypted:
        case TransactionKind::HiddenGameHash:
            if (!state.is_revealed(tx.id)) return TxClass::RelevantHidden;
            return state.historic.count(tx.id) ? TxClass::RelevantHistoric
                                               : TxClass::RelevantRevealed;
        case TransactionKind::Payload:
            // Born revealed; historic once the application supersedes it.
            return state.historic.count(tx.id) ? TxClass::RelevantHistoric
                                               : TxClass::RelevantRevealed;
        default:
            return TxClass::Meta;
    }
}

namespace {

struct PrunePlan {
    std::vector<Transaction> transcribed;
    std::vector<Transaction> kept;
    std::vector<Hash32> removed;
};

PrunePlan plan_prune(const Chain& chain, const ChainState& state) {
    PrunePlan plan;
    for (const auto& b : chain.blocks) {
        if (b.height <= chain.fixed_upto) continue;  // fixed chain is untouchable
        for (const auto& t : b.transactions) {
            switch (classify(t, state)) {
                case TxClass::BloatRevealed: plan.removed.push_back(t.id); break;
                case TxClass::RelevantHidden:
                case TxClass::BloatUnrevealed: plan.kept.push_back(t); break;
                default: plan.transcribed.push_back(t); break;
            }
        }
    }
    return plan;
}

}  // namespace

PruneResult prune(const Chain& chain, const ChainState& state, const KeyPair& gcn,
                  const PublicKey& designated, Tick now, std::int64_t turn) {
    if (!(gcn.pub == designated))
        fail(Errc::NotDesignated, "only the designated GCN computes the prune");

    PrunePlan plan = plan_prune(chain, state);
    PruneResult r;
    r.proof.old_tip = chain.tip_hash();
    r.proof.removed = plan.removed;
    for (const auto& t : plan.transcribed) r.proof.transcribed.push_back(t.id);

    if (plan.removed.empty()) {  // nothing to collect
        r.chain = chain;
        r.proof.new_fixed_upto = chain.fixed_upto;
        return r;
    }

    Chain next;
    next.invalidated = chain.invalidated;
    for (const auto& b : chain.blocks) {
        if (b.height > chain.fixed_upto) break;
        next.blocks.push_back(b);
    }
    // All rrTs batch into one GCN-signed block; the embedded transactions
    // still carry their emitters' signatures.
    if (!plan.transcribed.empty()) {
        Block fixed = build_block(gcn, next.height() + 1, next.tip_hash(), turn, now,
                                  BlockKind::Data, plan.transcribed);
        next.blocks.push_back(std::move(fixed));
    }
    r.proof.new_fixed_upto = next.height();
    next.fixed_upto = next.height();
    if (!plan.kept.empty()) {
        Block untidy = build_block(gcn, next.height() + 1, next.tip_hash(), turn, now,
                                   BlockKind::Data, plan.kept);
        next.blocks.push_back(std::move(untidy));
    }
    r.chain = std::move(next);
    return r;
}

void verify_prune(const Chain& before, const ChainState& state, const Chain& after,
                  const PruneProof& proof) {
    PrunePlan expect = plan_prune(before, state);

    auto mismatch = [](const std::string& what) { fail(Errc::InvalidPrune, what); };

    if (!validate_chain(after).ok()) mismatch("pruned chain fails structural validation");
    if (proof.old_tip != before.tip_hash()) mismatch("proof anchored to a different chain");
    if (after.fixed_upto < before.fixed_upto) mismatch("fixed marker moved backwards");

    // The fixed prefix must be untouched.
    for (const auto& b : before.blocks) {
        if (b.height > before.fixed_upto) break;
        if (b.height >= after.blocks.size() ||
            hash_block(after.blocks[b.height]) != hash_block(b))
            mismatch("prune rewrote the fixed chain");
    }

    std::set<Hash32> removed(expect.removed.begin(), expect.removed.end());
    if (std::set<Hash32>(proof.removed.begin(), proof.removed.end()) != removed)
        mismatch("removed set differs from the local derivation");

    // Every surviving id must be present, byte-identical, with its original
    // emitter signature; every removed id must be gone.
    std::map<Hash32, const Transaction*> got;
    for (const auto& b : after.blocks)
        for (const auto& t : b.transactions) got[t.id] = &t;
    auto check_present = [&](const Transaction& t) {
        auto it = got.find(t.id);
        if (it == got.end()) mismatch("transaction lost by prune: " + hex(t.id));
        if (!(it->second->author == t.author) || it->second->body != t.body)
            mismatch("transcription altered a transaction");
        if (!it->second->verify_signature()) mismatch("transcribed signature broken");
    };
    for (const auto& t : expect.transcribed) check_present(t);
    for (const auto& t : expect.kept) check_present(t);
    for (const auto& id : removed)
        if (got.count(id)) mismatch("revealed bloat survived the prune");
}

ChildChain& ChildLedger::open_child() {
    for (auto& c : children)
        if (c.state == ChildChain::State::Open) return c;
    ChildChain c;
    c.id = next_id++;
    c.capacity_mb = capacity_mb;
    children.push_back(std::move(c));
    return children.back();
}

void ChildLedger::route(const Hash32& id, double size_mb) {
    ChildChain& c = open_child();
    if (c.stored_mb + size_mb > c.capacity_mb && !c.entries.empty()) {
        // Rolls over to the next child; the caller retries there.
        c.state = ChildChain::State::Full;
        ChildChain& n = open_child();
        n.entries.push_back(id);
        n.stored_mb += size_mb;
        return;
    }
    c.entries.push_back(id);
    c.stored_mb += size_mb;
    if (c.stored_mb >= c.capacity_mb) c.state = ChildChain::State::Full;
}

void ChildLedger::reveal(const Hash32& id, double residue_mb, double key_mb) {
    for (auto& c : children) {
        if (std::find(c.entries.begin(), c.entries.end(), id) == c.entries.end()) continue;
        c.revealed_entries.insert(id);
        c.stored_mb += key_mb;  // revelation key sits next to the entry
        main_mb += residue_mb;  // unencrypted residue on the main chain
        if (c.state == ChildChain::State::Full && c.deletable())
            c.state = ChildChain::State::Deletable;
        return;
    }
    fail(Errc::ConfigInvalid, "reveal for an unrouted transaction");
}

std::size_t ChildLedger::gc() {
    std::size_t removed = 0;
    auto it = children.begin();
    while (it != children.end()) {
        if (it->state == ChildChain::State::Deletable) {
            it = children.erase(it);
            ++removed;
        } else {
            ++it;
        }
    }
    return removed;
}

double ChildLedger::total_mb() const {
    double total = main_mb;
    for (const auto& c : children) total += c.stored_mb;
    return total;
}

Hash32 replay_digest(const Chain& chain, const ChainState& state, std::uint64_t upto_height) {
    Encoder e;
    for (const auto& b : chain.blocks) {
        if (b.height > upto_height) break;
        for (const auto& t : b.transactions) {
            if (t.kind == TransactionKind::Bloat) continue;  // noise, no game effect
            e.raw(t.id);
            e.u8(static_cast<std::uint8_t>(classify(t, state)));
        }
    }
    return sha256(e.out);
}

Chain meta_state_cut(const Chain& chain, const ChainState& state, std::uint64_t cut_height,
                     std::uint64_t retained_tail, const KeyPair& gcn, bool vote_passed) {
    if (cut_height == 0) return chain;  // degenerate
    if (!vote_passed) fail(Errc::VoteFailed, "meta-state cut needs a passed network vote");
    if (cut_height > chain.height()) fail(Errc::ConfigInvalid, "cut beyond tip");

    for (const auto& b : chain.blocks) {
        if (b.height > cut_height) break;
        for (const auto& t : b.transactions) {
            TxClass c = classify(t, state);
            if (c == TxClass::RelevantHidden || c == TxClass::BloatUnrevealed)
                fail(Errc::UnrevealedBeforeCut,
                     "block " + std::to_string(b.height) + " holds unrevealed content");
        }
    }

    Hash32 snapshot = replay_digest(chain, state, cut_height);
    Bytes snapshot_bytes(snapshot.begin(), snapshot.end());
    Transaction snap_tx = make_transaction(gcn, TransactionKind::Payload, snapshot_bytes);

    Chain next;
    next.invalidated = chain.invalidated;
    Block genesis = build_block(gcn, 0, Hash32{}, -1, chain.blocks.front().logical_time,
                                BlockKind::MetaStateGenesis, {std::move(snap_tx)});
    next.blocks.push_back(std::move(genesis));

    // Retained tail plus post-cut blocks, re-encapsulated onto the new genesis.
    const std::uint64_t tail_from = cut_height > retained_tail ? cut_height - retained_tail + 1 : 1;
    for (const auto& b : chain.blocks) {
        if (b.height < tail_from || b.height == 0) continue;
        if (b.transactions.empty()) continue;  // transition plumbing is not history
        Block wrapped = build_block(gcn, next.height() + 1, next.tip_hash(), b.turn_index,
                                    b.logical_time, BlockKind::Data, b.transactions);
        next.blocks.push_back(std::move(wrapped));
    }
    return next;
}

ModeAdvice breakeven(double f, const StorageParams& params) {
    params.validate();
    const double btl = params.size_bloat_large_mb;
    const double bts = params.size_bloat_small_mb;
    const double h = params.game_hash_mb;
    if (btl <= bts)
        fail(Errc::Degenerate, "BT(l) <= BT(s): no finite break-even factor");
    ModeAdvice a;
    a.threshold_f = h / (btl - bts);
    // Game hashes only pay off when the payload exceeds the fixed hash size.
    a.game_hash_wins = (h + f * bts < f * btl) && params.size_relevant_mb >= params.game_hash_mb;
    return a;
}

namespace {

struct SeriesEngine {
    const StorageScenario& sc;
    unsigned mode;
    const StorageParams& p;

    std::uint64_t rel_per_step;
    std::uint64_t blo_per_step;
    std::uint64_t per_step;
    std::uint64_t prune_freq_txs;   // matched: F * size = child capacity
    std::uint64_t child_cap_txs;
    std::uint64_t cut_interval;

    // counters, all in transactions
    std::uint64_t arrived = 0;
    std::uint64_t since_prune = 0;
    std::uint64_t bloat_dropped = 0;       // prune: revealed bloat removed
    std::uint64_t history_dropped = 0;     // meta: everything before the boundary
    std::uint64_t history_upto_step = 0;   // steps fully dropped by meta cuts
    std::uint64_t bloat_upto_step = 0;     // steps whose revealed bloat is pruned
    std::uint64_t deleted_child_entries = 0;
    std::uint64_t next_child_end = 0;      // arrival ordinal ending the next child
    bool snapshot_present = false;

    std::vector<std::uint64_t> checkpoints;

    explicit SeriesEngine(const StorageScenario& s, unsigned m, const StorageParams& pr)
        : sc(s), mode(m), p(pr) {
        rel_per_step = s.arrivals_per_step;
        blo_per_step = static_cast<std::uint64_t>(
            std::llround(s.bloat_per_relevant * static_cast<double>(rel_per_step)));
        per_step = rel_per_step + blo_per_step;
        prune_freq_txs = std::max<std::uint64_t>(
            1, static_cast<std::uint64_t>(std::llround(p.untidy_cap_mb / p.size_relevant_mb)));
        child_cap_txs = std::max<std::uint64_t>(
            1, static_cast<std::uint64_t>(std::llround(p.child_capacity_mb / p.size_relevant_mb)));
        cut_interval = s.meta_cut_interval ? s.meta_cut_interval : s.reveal_delay;
        next_child_end = child_cap_txs;
    }

    std::uint64_t revealed_steps(std::uint64_t step) const {
        return step > sc.reveal_delay ? step - sc.reveal_delay : 0;
    }

    void step(std::uint64_t now) {
        arrived += per_step;
        since_prune += per_step;
        const std::uint64_t rev_steps = revealed_steps(now);
        bool fired = false;

        if (mode & kStoragePrune) {
            if (since_prune >= prune_freq_txs) {
                // Revealed bloat vanishes; rrTs transcribe (size unchanged).
                bloat_upto_step = std::max(bloat_upto_step, rev_steps);
                since_prune = 0;
                fired = true;
            }
        }
        if (mode & kStorageChild) {
            // A child is gone once every entry in it is revealed.
            while (next_child_end <= rev_steps * per_step) {
                deleted_child_entries += child_cap_txs;
                next_child_end += child_cap_txs;
                fired = true;
            }
        }
        if (mode & kStorageMeta) {
            if (now % cut_interval == 0 && rev_steps > sc.meta_retain_tail) {
                const std::uint64_t keep_from = rev_steps - sc.meta_retain_tail;
                if (keep_from > history_upto_step) {
                    history_upto_step = keep_from;
                    snapshot_present = true;
                    fired = true;
                }
            }
        }
        if (fired) checkpoints.push_back(now);
    }

    double total_mb(std::uint64_t now) const {
        const std::uint64_t rev_steps = revealed_steps(now);
        std::uint64_t rel_alive = rel_per_step * (now - std::min(now, history_upto_step));
        std::uint64_t blo_alive =
            blo_per_step * (now - std::min(now, std::max(history_upto_step, bloat_upto_step)));
        std::uint64_t count = rel_alive + blo_alive + (snapshot_present ? 1 : 0);
        if (mode & kStorageChild) {
            // Residues on the main chain double the revealed relevant weight
            // until their child is deleted.
            const std::uint64_t residue_steps = rev_steps - std::min(rev_steps, history_upto_step);
            const std::uint64_t residues = rel_per_step * residue_steps;
            const std::uint64_t in_children = arrived - deleted_child_entries;
            count = residues + in_children + (snapshot_present ? 1 : 0);
        }
        return static_cast<double>(count) * p.size_relevant_mb;
    }
};

}  // namespace

std::vector<SeriesPoint> storage_series(const StorageScenario& scenario, unsigned mode,
                                        const StorageParams& params) {
    params.validate();
    if ((mode & kStoragePrune) && (mode & kStorageChild))
        fail(Errc::ConfigInvalid, "prune and child chains do not combine");
    SeriesEngine eng(scenario, mode, params);
    std::vector<SeriesPoint> series;
    series.reserve(scenario.steps);
    for (std::uint64_t step = 1; step <= scenario.steps; ++step) {
        eng.step(step);
        series.push_back({step, eng.arrived, eng.total_mb(step)});
    }
    return series;
}

std::vector<std::uint64_t> series_checkpoints(const StorageScenario& scenario, unsigned mode,
                                              const StorageParams& params) {
    SeriesEngine eng(scenario, mode, params);
    for (std::uint64_t step = 1; step <= scenario.steps; ++step) eng.step(step);
    return eng.checkpoints;
}

std::string series_to_csv(const std::vector<SeriesPoint>& series, const std::string& mode_name) {
    std::ostringstream o;
    o << "tx_count,mode,mb\n";
    o.setf(std::ios::fixed);
    o.precision(6);
    for (const auto& pt : series) o << pt.tx_count << ',' << mode_name << ',' << pt.total_mb << '\n';
    return o.str();
}

}  // namespace potc::storage
