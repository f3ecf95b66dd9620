#pragma once

#include "potc/game.hpp"

namespace potc::game {

// Multi-party shuffle-encrypt pile: Party A supplies per-card asymmetric key
// pairs, Party B shuffles and seals each card under one of A's public keys,
// Party C (and any further parties) reshuffles and adds a symmetric layer.
// Nobody can open a card without walking the claim chain through every party.

struct PileEntry {
    Bytes ciphertext;
    Hash32 key_tag{};  // hash of the key that unlocks this layer; A's public
                       // key hash at the terminal (B) layer
};

struct KeyHolderSecrets {            // Party A
    PublicKey party{};
    std::vector<BoxKeyPair> card_keys;
    std::set<std::size_t> released;  // key indexes already handed out
};

struct ShufflerSecrets {             // Parties B, C, D, ...
    PublicKey party{};
    std::vector<std::size_t> permutation;  // output slot -> input slot
    std::vector<SymKey> layer_keys;        // per output slot; unused for B
    std::vector<PileEntry> output;         // this party's published records
};

struct DeckCommitment {
    std::vector<PublicKey> parties;     // [A, B, C, ...]; shuffle layers are B..last
    std::size_t card_count = 0;
    std::vector<PileEntry> published_pile;  // the last party's output
    std::set<std::size_t> drawn;
};

struct DeckSecrets {
    KeyHolderSecrets keyholder;
    std::vector<ShufflerSecrets> shufflers;  // [B, C, ...] in protocol order
};

struct ShuffleResult {
    DeckCommitment deck;
    DeckSecrets secrets;  // escrow for the audit oracle; each party owns its slice
};

// parties[0] = A (keygen), parties[1] = B (first shuffle, asymmetric layer),
// parties[2..] add symmetric layers. Needs >= 3 distinct parties.
ShuffleResult shuffle_deck(const std::vector<PublicKey>& parties,
                           const std::vector<Bytes>& source_deck, Rng& rng);

// One step of the claim chain: the drawing party presents the ciphertext it
// holds and the index it claims; the owner releases the layer key (and the
// next index down) only when both match its records.
struct ClaimRelease {
    SymKey layer_key{};
    std::size_t next_index = 0;
};

ClaimRelease claim_layer(const ShufflerSecrets& party, const Bytes& presented_ciphertext,
                         const Hash32& presented_tag, std::size_t index);

// Terminal step: A releases the private key matching the surfaced tag.
BoxKeyPair claim_terminal_key(KeyHolderSecrets& keyholder, const Bytes& presented_ciphertext,
                              const Hash32& presented_tag);

// Full claim-chain walk for a drawn index (case 5). Marks the index drawn;
// a second draw of the same index raises AlreadyDrawn.
Bytes draw_private(DeckCommitment& deck, DeckSecrets& secrets, std::size_t index);

// Walk without consuming the index (audit oracle path).
Bytes open_card(const DeckCommitment& deck, DeckSecrets& secrets, std::size_t index);

// --- General draws from piles (cases 1..6) --------------------------------------

enum class DrawCase : int {
    PrivatePileOpenDraw = 1,
    PrivatePilePrivateDraw = 2,
    PrivatePileHiddenDraw = 3,
    PublicPileOpenDraw = 4,
    PublicPilePrivateDraw = 5,
    PublicPileHiddenDraw = 6,
};

struct DrawPolicy {
    std::size_t fake_sessions_per_real = 1;  // case-3 camouflage rate
};

struct DrawResult {
    std::size_t index = 0;
    std::optional<Bytes> card;          // broadcast content (cases 1/4) or private content (5)
    std::optional<Commitment> hidden;   // case 2: offset-revealed draw
    std::size_t fake_sessions = 0;      // case 3: camouflage sessions to interleave
};

struct DrawContext {
    std::vector<Bytes>* open_pile = nullptr;       // cases 1/4
    DeckCommitment* deck = nullptr;                // case 5
    DeckSecrets* deck_secrets = nullptr;
    const KeyPair* actor = nullptr;                // case 2 commitments
    std::uint64_t randomization_output = 0;        // cases 1/3/4 index source
    std::int64_t current_turn = 0;
    DrawPolicy policy;
    Rng* rng = nullptr;
};

DrawResult draw(DrawContext& ctx, DrawCase c);

}  // namespace potc::game
