#include "potc/chain.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace potc {

const char* errc_name(Errc c) {
    switch (c) {
        case Errc::BadLink: return "BadLink";
        case Errc::BadSignature: return "BadSignature";
        case Errc::MalformedBlock: return "MalformedBlock";
        case Errc::PadTooSmall: return "PadTooSmall";
        case Errc::NotLeader: return "NotLeader";
        case Errc::TurnExpired: return "TurnExpired";
        case Errc::WrongSuccessor: return "WrongSuccessor";
        case Errc::MissingCounterSignature: return "MissingCounterSignature";
        case Errc::AlreadyFinal: return "AlreadyFinal";
        case Errc::DoubleBallot: return "DoubleBallot";
        case Errc::VoteClosed: return "VoteClosed";
        case Errc::VoteNotDue: return "VoteNotDue";
        case Errc::VoteFailed: return "VoteFailed";
        case Errc::NoCommonAncestor: return "NoCommonAncestor";
        case Errc::BadInsertIndex: return "BadInsertIndex";
        case Errc::UndisclosedObligations: return "UndisclosedObligations";
        case Errc::RejoinForbidden: return "RejoinForbidden";
        case Errc::GraceExhausted: return "GraceExhausted";
        case Errc::NetworkLost: return "NetworkLost";
        case Errc::Mismatch: return "Mismatch";
        case Errc::DeadlineExceeded: return "DeadlineExceeded";
        case Errc::SecondFollowUp: return "SecondFollowUp";
        case Errc::InitiatorSilent: return "InitiatorSilent";
        case Errc::TooFewParties: return "TooFewParties";
        case Errc::RoleCollision: return "RoleCollision";
        case Errc::HelperRequired: return "HelperRequired";
        case Errc::AlreadyDrawn: return "AlreadyDrawn";
        case Errc::InvalidClaim: return "InvalidClaim";
        case Errc::OutOfBand: return "OutOfBand";
        case Errc::IgnoredByLeader: return "IgnoredByLeader";
        case Errc::RoundStalled: return "RoundStalled";
        case Errc::RecoverImpossible: return "RecoverImpossible";
        case Errc::InvalidPrune: return "InvalidPrune";
        case Errc::NotDesignated: return "NotDesignated";
        case Errc::ChildFullRace: return "ChildFullRace";
        case Errc::UnrevealedBeforeCut: return "UnrevealedBeforeCut";
        case Errc::Degenerate: return "Degenerate";
        case Errc::ConfigInvalid: return "ConfigInvalid";
        case Errc::TooFewPlayers: return "TooFewPlayers";
    }
    return "Unknown";
}

const char* kind_name(TransactionKind k) {
    switch (k) {
        case TransactionKind::Payload: return "payload";
        case TransactionKind::HiddenEncrypted: return "hidden-enc";
        case TransactionKind::HiddenGameHash: return "hidden-hash";
        case TransactionKind::Bloat: return "bloat";
        case TransactionKind::RevealKey: return "reveal-key";
        case TransactionKind::RevealPreimage: return "reveal-pre";
        case TransactionKind::RandomCall: return "random-call";
        case TransactionKind::RandomCommit: return "random-commit";
        case TransactionKind::RandomReveal: return "random-reveal";
        case TransactionKind::VoteCall: return "vote-call";
        case TransactionKind::VoteBallot: return "vote-ballot";
        case TransactionKind::Dispute: return "dispute";
        case TransactionKind::TriggerClaim: return "trigger";
        case TransactionKind::JoinProposal: return "join";
        case TransactionKind::LeaveNotice: return "leave";
        case TransactionKind::DrawClaim: return "draw";
        case TransactionKind::FogReport: return "fog";
    }
    return "unknown";
}

const char* kind_name(BlockKind k) {
    switch (k) {
        case BlockKind::Genesis: return "genesis";
        case BlockKind::Data: return "data";
        case BlockKind::Handover: return "handover";
        case BlockKind::Finalizing: return "finalizing";
        case BlockKind::MetaStateGenesis: return "meta-genesis";
    }
    return "unknown";
}

Hash32 Transaction::compute_id() const {
    Encoder e;
    e.raw(author);
    e.u8(static_cast<std::uint8_t>(kind));
    e.blob(body);
    e.u64(declared_size);
    return sha256(e.out);
}

Bytes Transaction::signing_message() const {
    Encoder e;
    e.raw(id);
    e.u8(static_cast<std::uint8_t>(kind));
    e.raw(body);
    return e.out;
}

bool Transaction::verify_signature() const {
    return verify(author, signing_message(), signature);
}

Bytes Transaction::payload() const {
    Decoder d(body);
    return d.blob();
}

void Transaction::encode(Encoder& e) const {
    e.raw(author);
    e.u8(static_cast<std::uint8_t>(kind));
    e.blob(body);
    e.u64(declared_size);
    e.raw(id);
    e.raw(signature);
}

Transaction Transaction::decode(Decoder& d) {
    Transaction t;
    t.author = d.arr<32>();
    t.kind = static_cast<TransactionKind>(d.u8());
    t.body = d.blob();
    t.declared_size = d.u64();
    t.id = d.arr<32>();
    t.signature = d.arr<64>();
    return t;
}

Transaction make_transaction(const KeyPair& author, TransactionKind kind, const Bytes& payload,
                             std::optional<std::uint64_t> pad_to, Rng& rng) {
    Transaction t;
    t.author = author.pub;
    t.kind = kind;
    Encoder body;
    body.blob(payload);
    if (pad_to) {
        if (body.out.size() > *pad_to)
            fail(Errc::PadTooSmall, "payload exceeds pad_to (" + std::to_string(body.out.size()) +
                                        " > " + std::to_string(*pad_to) + ")");
        Bytes filler = rng.bytes(*pad_to - body.out.size());
        body.raw(filler);
    }
    t.body = std::move(body.out);
    t.declared_size = t.body.size();
    t.id = t.compute_id();
    t.signature = sign(author.sec, t.signing_message());
    return t;
}

Transaction make_transaction(const KeyPair& author, TransactionKind kind, const Bytes& payload) {
    Rng unused(0);
    return make_transaction(author, kind, payload, std::nullopt, unused);
}

Bytes Block::digest_input() const {
    Encoder e;
    e.u64(height);
    e.raw(prev_hash);
    e.raw(author);
    e.i64(turn_index);
    e.u64(logical_time);
    e.u8(static_cast<std::uint8_t>(kind));
    e.u64(transactions.size());
    for (const auto& t : transactions) t.encode(e);
    return e.out;
}

void Block::encode(Encoder& e) const {
    Bytes d = digest_input();
    e.raw(d);
    e.u8(static_cast<std::uint8_t>(signatures.size()));
    for (const auto& s : signatures) {
        e.raw(s.signer);
        e.raw(s.sig);
    }
}

Block Block::decode(Decoder& d) {
    Block b;
    b.height = d.u64();
    b.prev_hash = d.arr<32>();
    b.author = d.arr<32>();
    b.turn_index = d.i64();
    b.logical_time = d.u64();
    b.kind = static_cast<BlockKind>(d.u8());
    std::uint64_t n = d.u64();
    b.transactions.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) b.transactions.push_back(Transaction::decode(d));
    std::uint8_t sigs = d.u8();
    for (std::uint8_t i = 0; i < sigs; ++i) {
        BlockSignature s;
        s.signer = d.arr<32>();
        s.sig = d.arr<64>();
        b.signatures.push_back(s);
    }
    return b;
}

Hash32 hash_block(const Block& b) { return sha256(b.digest_input()); }

Block build_block(const KeyPair& author, std::uint64_t height, const Hash32& prev,
                  std::int64_t turn_index, Tick logical_time, BlockKind kind,
                  std::vector<Transaction> txs) {
    Block b;
    b.height = height;
    b.prev_hash = prev;
    b.author = author.pub;
    b.turn_index = turn_index;
    b.logical_time = logical_time;
    b.kind = kind;
    b.transactions = std::move(txs);
    Hash32 digest = hash_block(b);
    b.signatures.push_back({author.pub, sign(author.sec, digest.data(), digest.size())});
    return b;
}

void countersign(Block& b, const KeyPair& cosigner) {
    Hash32 digest = hash_block(b);
    b.signatures.push_back({cosigner.pub, sign(cosigner.sec, digest.data(), digest.size())});
}

void check_block_structure(const Block& b, std::vector<Finding>* findings) {
    auto flag = [&](const std::string& what) { findings->push_back({b.height, what}); };

    const std::size_t want_sigs = b.kind == BlockKind::Handover ? 2 : 1;
    if (b.signatures.size() != want_sigs)
        flag(std::string(kind_name(b.kind)) + " block carries " +
             std::to_string(b.signatures.size()) + " signatures, wants " +
             std::to_string(want_sigs));
    if (!b.signatures.empty() && !(b.signatures[0].signer == b.author))
        flag("first signature is not the author's");
    if (b.signatures.size() == 2 && b.signatures[0].signer == b.signatures[1].signer)
        flag("handover counter-signature repeats the leader");

    Hash32 digest = hash_block(b);
    for (const auto& s : b.signatures)
        if (!verify(s.signer, digest.data(), digest.size(), s.sig))
            flag("block signature does not verify under its signer");

    if (b.transactions.empty() && !is_transition(b.kind) )
        flag("transaction list may be empty only for handover/finalizing blocks");

    for (const auto& t : b.transactions) {
        if (t.compute_id() != t.id) flag("transaction id does not recompute from body");
        if (!t.verify_signature()) flag("transaction signature does not verify under author");
        if (t.declared_size != t.body.size()) flag("declared_size differs from body size");
    }
}

const Transaction* Chain::find_transaction(const Hash32& id) const {
    for (const auto& b : blocks)
        for (const auto& t : b.transactions)
            if (t.id == id) return &t;
    return nullptr;
}

const Block* Chain::find_block(const Hash32& h) const {
    for (const auto& b : blocks)
        if (hash_block(b) == h) return &b;
    return nullptr;
}

Chain Chain::with(Block b) const { return append_block(*this, std::move(b)); }

Chain append_block(const Chain& chain, Block block) {
    Chain next = chain;
    append_block_inplace(next, std::move(block));
    return next;
}

void append_block_inplace(Chain& chain, Block block) {
    if (chain.blocks.empty()) {
        if (!is_genesis(block.kind)) fail(Errc::BadLink, "first block must be a genesis kind");
    } else {
        if (block.prev_hash != chain.tip_hash())
            fail(Errc::BadLink, "prev_hash does not match tip at height " +
                                    std::to_string(chain.height()));
        if (block.height != chain.height() + 1)
            fail(Errc::MalformedBlock, "height must increase by one");
    }
    std::vector<Finding> findings;
    check_block_structure(block, &findings);
    for (const auto& f : findings) {
        if (f.what.find("signature") != std::string::npos) fail(Errc::BadSignature, f.what);
    }
    if (!findings.empty()) fail(Errc::MalformedBlock, findings.front().what);
    chain.blocks.push_back(std::move(block));
}

ValidationReport validate_chain(const Chain& chain) {
    ValidationReport r;
    if (chain.blocks.empty()) {
        r.findings.push_back({0, "chain is empty"});
        return r;
    }
    if (!is_genesis(chain.blocks[0].kind))
        r.findings.push_back({0, "chain does not start with a genesis kind"});
    bool link_broken = false;
    for (std::size_t i = 0; i < chain.blocks.size(); ++i) {
        const Block& b = chain.blocks[i];
        if (i > 0) {
            if (b.prev_hash != hash_block(chain.blocks[i - 1])) link_broken = true;
            if (link_broken)
                r.findings.push_back({b.height, "hash link broken at or before this height"});
            if (b.height != chain.blocks[i - 1].height + 1)
                r.findings.push_back({b.height, "non-consecutive height"});
        }
        check_block_structure(b, &r.findings);
    }
    if (chain.fixed_upto > chain.height())
        r.findings.push_back({chain.fixed_upto, "fixed_upto beyond tip"});
    for (const auto& id : chain.invalidated)
        if (!chain.find_transaction(id))
            r.findings.push_back({0, "invalidated id " + hex(id) + " not present in blocks"});
    return r;
}

std::string GenesisConfig::to_text() const {
    std::ostringstream o;
    o << "network_id=" << network_id << "\n";
    o << "turn_duration=" << turn_duration << "\n";
    o << "transition_duration=" << transition_duration << "\n";
    o << "threshold=" << threshold << "\n";
    for (const auto& n : roster) o << "node=" << n.label << ":" << hex(n.public_key) << "\n";
    return o.str();
}

GenesisConfig GenesisConfig::from_text(const std::string& text) {
    GenesisConfig cfg;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) fail(Errc::ConfigInvalid, "expected key=value: " + line);
        std::string key = line.substr(0, eq), val = line.substr(eq + 1);
        if (key == "network_id") cfg.network_id = val;
        else if (key == "turn_duration") cfg.turn_duration = std::stoull(val);
        else if (key == "transition_duration") cfg.transition_duration = std::stoull(val);
        else if (key == "threshold") cfg.threshold = std::stod(val);
        else if (key == "node") {
            auto colon = val.find(':');
            if (colon == std::string::npos) fail(Errc::ConfigInvalid, "node wants label:pubkey");
            NodeId n;
            n.label = val.substr(0, colon);
            Bytes pk = from_hex(val.substr(colon + 1));
            if (pk.size() != 32) fail(Errc::ConfigInvalid, "public key must be 32 bytes");
            std::copy(pk.begin(), pk.end(), n.public_key.begin());
            cfg.roster.push_back(std::move(n));
        } else {
            fail(Errc::ConfigInvalid, "unknown key: " + key);
        }
    }
    return cfg;
}

Block make_genesis(const GenesisConfig& cfg, const KeyPair& founder, Tick at) {
    Transaction t = make_transaction(founder, TransactionKind::Payload, to_bytes(cfg.to_text()));
    return build_block(founder, 0, Hash32{}, -1, at, BlockKind::Genesis, {std::move(t)});
}

Chain make_chain(const GenesisConfig& cfg, const KeyPair& founder, Tick at) {
    Chain c;
    append_block_inplace(c, make_genesis(cfg, founder, at));
    return c;
}

static constexpr std::uint16_t kSnapshotVersion = 1;

Bytes encode_snapshot(const Chain& chain) {
    Encoder e;
    e.raw(to_bytes("POTC"));
    e.u16(kSnapshotVersion);
    e.u64(chain.fixed_upto);
    e.u64(chain.invalidated.size());
    for (const auto& id : chain.invalidated) e.raw(id);
    for (const auto& b : chain.blocks) b.encode(e);
    return e.out;
}

Chain decode_snapshot(const Bytes& data) {
    Decoder d(data);
    Bytes magic = d.raw(4);
    if (to_string(magic) != "POTC") fail(Errc::ConfigInvalid, "bad snapshot magic");
    std::uint16_t version = d.u16();
    if (version != kSnapshotVersion)
        fail(Errc::ConfigInvalid, "unsupported snapshot version " + std::to_string(version));
    Chain c;
    c.fixed_upto = d.u64();
    std::uint64_t inv = d.u64();
    for (std::uint64_t i = 0; i < inv; ++i) c.invalidated.insert(d.arr<32>());
    while (!d.done()) c.blocks.push_back(Block::decode(d));
    return c;
}

void write_snapshot(const Chain& chain, const std::string& path) {
    Bytes data = encode_snapshot(chain);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::ConfigInvalid, "cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
}

Chain read_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::ConfigInvalid, "cannot open " + path);
    Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_snapshot(data);
}

}  // namespace potc
