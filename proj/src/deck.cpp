#include "potc/deck.hpp"

namespace potc::game {

namespace {

Hash32 key_hash(const std::array<std::uint8_t, 32>& key) {
    return sha256(key.data(), key.size());
}

Bytes encode_entry(const PileEntry& e) {
    Encoder enc;
    enc.blob(e.ciphertext);
    enc.raw(e.key_tag);
    return enc.out;
}

PileEntry decode_entry(const Bytes& b) {
    Decoder d(b);
    PileEntry e;
    e.ciphertext = d.blob();
    e.key_tag = d.arr<32>();
    return e;
}

Hash32 seed_from(Rng& rng) {
    Hash32 s;
    for (auto& b : s) b = static_cast<std::uint8_t>(rng.next());
    return s;
}

std::vector<std::size_t> random_permutation(std::size_t m, Rng& rng) {
    std::vector<std::size_t> p(m);
    for (std::size_t i = 0; i < m; ++i) p[i] = i;
    rng.shuffle(p);
    return p;
}

}  // namespace

ShuffleResult shuffle_deck(const std::vector<PublicKey>& parties,
                           const std::vector<Bytes>& source_deck, Rng& rng) {
    if (parties.size() < 3)
        fail(Errc::TooFewParties, "at least three parties must participate");
    for (std::size_t i = 0; i < parties.size(); ++i)
        for (std::size_t j = i + 1; j < parties.size(); ++j)
            if (parties[i] == parties[j]) fail(Errc::RoleCollision, "party roles must be distinct");

    const std::size_t m = source_deck.size();
    ShuffleResult r;
    r.deck.parties = parties;
    r.deck.card_count = m;

    // Party A: one asymmetric key pair per card. A never sees the pile.
    r.secrets.keyholder.party = parties[0];
    for (std::size_t i = 0; i < m; ++i)
        r.secrets.keyholder.card_keys.push_back(BoxKeyPair::from_seed(seed_from(rng)));

    // Party B: shuffles the plain deck, then seals each output slot under
    // A's public key of the same slot, tagging it with that key's hash.
    ShufflerSecrets b;
    b.party = parties[1];
    b.permutation = random_permutation(m, rng);
    b.output.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto& pk = r.secrets.keyholder.card_keys[i].pub;
        b.output[i].ciphertext = box_seal(pk, source_deck[b.permutation[i]]);
        b.output[i].key_tag = key_hash(pk);
    }
    r.secrets.shufflers.push_back(std::move(b));

    // Parties C, D, ...: reshuffle and add a symmetric layer over the whole
    // previous entry (ciphertext and tag), so nothing is trackable across
    // the shuffle. Each output slot gets its own single-use key.
    for (std::size_t p = 2; p < parties.size(); ++p) {
        const auto& prev = r.secrets.shufflers.back().output;
        ShufflerSecrets s;
        s.party = parties[p];
        s.permutation = random_permutation(m, rng);
        s.layer_keys.resize(m);
        s.output.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            for (auto& kb : s.layer_keys[i]) kb = static_cast<std::uint8_t>(rng.next());
            s.output[i].ciphertext = sym_encrypt(s.layer_keys[i], encode_entry(prev[s.permutation[i]]));
            s.output[i].key_tag = key_hash(s.layer_keys[i]);
        }
        r.secrets.shufflers.push_back(std::move(s));
    }

    r.deck.published_pile = r.secrets.shufflers.back().output;
    return r;
}

ClaimRelease claim_layer(const ShufflerSecrets& party, const Bytes& presented_ciphertext,
                         const Hash32& presented_tag, std::size_t index) {
    if (index >= party.output.size()) fail(Errc::InvalidClaim, "claimed index out of range");
    const PileEntry& rec = party.output[index];
    // Both values must match the party's records before anything is released.
    if (rec.ciphertext != presented_ciphertext || rec.key_tag != presented_tag)
        fail(Errc::InvalidClaim, "claim does not match the party's records");
    return ClaimRelease{party.layer_keys[index], party.permutation[index]};
}

BoxKeyPair claim_terminal_key(KeyHolderSecrets& keyholder, const Bytes& presented_ciphertext,
                              const Hash32& presented_tag) {
    if (presented_ciphertext.empty()) fail(Errc::InvalidClaim, "terminal claim without ciphertext");
    for (std::size_t i = 0; i < keyholder.card_keys.size(); ++i) {
        if (key_hash(keyholder.card_keys[i].pub) == presented_tag) {
            keyholder.released.insert(i);
            return keyholder.card_keys[i];
        }
    }
    fail(Errc::InvalidClaim, "no key pair matches the surfaced tag");
}

Bytes open_card(const DeckCommitment& deck, DeckSecrets& secrets, std::size_t index) {
    if (index >= deck.card_count) fail(Errc::InvalidClaim, "index out of range");
    PileEntry entry = deck.published_pile[index];
    std::size_t idx = index;
    // Peel symmetric layers outermost-first (last shuffler down to C).
    for (std::size_t layer = secrets.shufflers.size(); layer-- > 1;) {
        ClaimRelease rel =
            claim_layer(secrets.shufflers[layer], entry.ciphertext, entry.key_tag, idx);
        auto plain = sym_decrypt(rel.layer_key, entry.ciphertext);
        if (!plain) fail(Errc::InvalidClaim, "released key does not open the layer");
        entry = decode_entry(*plain);
        idx = rel.next_index;
    }
    // B's layer: the surfaced tag names one of A's key pairs.
    BoxKeyPair terminal = claim_terminal_key(secrets.keyholder, entry.ciphertext, entry.key_tag);
    auto card = box_open(terminal, entry.ciphertext);
    if (!card) fail(Errc::InvalidClaim, "terminal key does not open the card");
    return *card;
}

Bytes draw_private(DeckCommitment& deck, DeckSecrets& secrets, std::size_t index) {
    if (deck.drawn.count(index))
        fail(Errc::AlreadyDrawn, "index " + std::to_string(index) + " already drawn");
    Bytes card = open_card(deck, secrets, index);
    deck.drawn.insert(index);  // the index is broadcast; content stays private
    return card;
}

DrawResult draw(DrawContext& ctx, DrawCase c) {
    DrawResult r;
    switch (c) {
        case DrawCase::PrivatePileOpenDraw:
        case DrawCase::PublicPileOpenDraw: {
            if (!ctx.open_pile || ctx.open_pile->empty())
                fail(Errc::ConfigInvalid, "open draw needs a pile");
            r.index = static_cast<std::size_t>(ctx.randomization_output % ctx.open_pile->size());
            r.card = (*ctx.open_pile)[r.index];  // broadcast
            return r;
        }
        case DrawCase::PrivatePilePrivateDraw: {
            if (!ctx.actor || !ctx.open_pile || !ctx.rng)
                fail(Errc::ConfigInvalid, "private draw needs an actor and a pile");
            r.index = static_cast<std::size_t>(ctx.randomization_output % ctx.open_pile->size());
            // The draw itself goes on chain as a hidden transaction; validity
            // may only be checkable at the end of the game.
            Encoder e;
            e.u64(r.index);
            e.blob((*ctx.open_pile)[r.index]);
            CommitResult cr = commit(*ctx.actor, e.out, CommitMode::GameHash, ctx.current_turn,
                                     0, true, *ctx.rng);
            r.hidden = cr.commitment;
            return r;
        }
        case DrawCase::PrivatePileHiddenDraw: {
            // The randomization call itself implies a draw, so fake sessions
            // (bloat-covered) have to be interleaved per policy.
            r.index = static_cast<std::size_t>(ctx.randomization_output);
            r.fake_sessions = ctx.policy.fake_sessions_per_real;
            return r;
        }
        case DrawCase::PublicPilePrivateDraw: {
            if (!ctx.deck || !ctx.deck_secrets)
                fail(Errc::ConfigInvalid, "case 5 needs a shuffled deck");
            r.index = static_cast<std::size_t>(ctx.randomization_output % ctx.deck->card_count);
            r.card = draw_private(*ctx.deck, *ctx.deck_secrets, r.index);
            return r;
        }
        case DrawCase::PublicPileHiddenDraw:
            fail(Errc::HelperRequired,
                 "public pile with hidden draw cannot be solved without external help");
    }
    fail(Errc::ConfigInvalid, "unknown draw case");
}

}  // namespace potc::game
