#pragma once

#include "potc/crypto.hpp"

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace potc {

// Error taxonomy shared by all modules. Each operation documents which codes
// it can raise; catch Error and branch on code where the path matters.
enum class Errc {
    BadLink,
    BadSignature,
    MalformedBlock,
    PadTooSmall,
    NotLeader,
    TurnExpired,
    WrongSuccessor,
    MissingCounterSignature,
    AlreadyFinal,
    DoubleBallot,
    VoteClosed,
    VoteNotDue,
    VoteFailed,
    NoCommonAncestor,
    BadInsertIndex,
    UndisclosedObligations,
    RejoinForbidden,
    GraceExhausted,
    NetworkLost,
    Mismatch,
    DeadlineExceeded,
    SecondFollowUp,
    InitiatorSilent,
    TooFewParties,
    RoleCollision,
    HelperRequired,
    AlreadyDrawn,
    InvalidClaim,
    OutOfBand,
    IgnoredByLeader,
    RoundStalled,
    RecoverImpossible,
    InvalidPrune,
    NotDesignated,
    ChildFullRace,
    UnrevealedBeforeCut,
    Degenerate,
    ConfigInvalid,
    TooFewPlayers,
};

const char* errc_name(Errc c);

struct Error : std::runtime_error {
    Errc code;
    Error(Errc c, const std::string& what) : std::runtime_error(what), code(c) {}
};

[[noreturn]] inline void fail(Errc c, const std::string& what) { throw Error(c, what); }

struct NodeId {
    PublicKey public_key{};
    std::string label;

    bool operator==(const NodeId& o) const { return public_key == o.public_key; }
    bool operator<(const NodeId& o) const { return public_key < o.public_key; }
};

enum class TransactionKind : std::uint8_t {
    Payload = 0,
    HiddenEncrypted = 1,
    HiddenGameHash = 2,
    Bloat = 3,
    RevealKey = 4,
    RevealPreimage = 5,
    RandomCall = 6,
    RandomCommit = 7,
    RandomReveal = 8,
    VoteCall = 9,
    VoteBallot = 10,
    Dispute = 11,
    TriggerClaim = 12,
    JoinProposal = 13,
    LeaveNotice = 14,
    DrawClaim = 15,
    FogReport = 16,
};

const char* kind_name(TransactionKind k);

struct Transaction {
    Hash32 id{};            // digest of the canonical body fields below
    PublicKey author{};
    TransactionKind kind{TransactionKind::Payload};
    Bytes body;             // length-prefixed payload + optional random padding
    std::uint64_t declared_size = 0;
    SigBytes signature{};

    // Digest input: author | kind | blob(body) | declared_size.
    Hash32 compute_id() const;
    // Signature message: id | kind | body.
    Bytes signing_message() const;
    bool verify_signature() const;

    // The logical payload is an inner blob so padding can trail it.
    Bytes payload() const;

    void encode(Encoder& e) const;
    static Transaction decode(Decoder& d);
};

// Build a signed transaction. pad_to pads the body with rng filler so that
// declared_size == pad_to; raises PadTooSmall if the payload cannot fit.
Transaction make_transaction(const KeyPair& author, TransactionKind kind, const Bytes& payload,
                             std::optional<std::uint64_t> pad_to, Rng& rng);
Transaction make_transaction(const KeyPair& author, TransactionKind kind, const Bytes& payload);

enum class BlockKind : std::uint8_t {
    Genesis = 0,
    Data = 1,
    Handover = 2,
    Finalizing = 3,
    MetaStateGenesis = 4,
};

const char* kind_name(BlockKind k);

inline bool is_transition(BlockKind k) {
    return k == BlockKind::Handover || k == BlockKind::Finalizing;
}
inline bool is_genesis(BlockKind k) {
    return k == BlockKind::Genesis || k == BlockKind::MetaStateGenesis;
}

struct BlockSignature {
    PublicKey signer{};
    SigBytes sig{};
};

struct Block {
    std::uint64_t height = 0;
    Hash32 prev_hash{};
    PublicKey author{};
    std::int64_t turn_index = 0;   // global turn counter of the authoring turn
    Tick logical_time = 0;
    BlockKind kind = BlockKind::Data;
    std::vector<Transaction> transactions;
    std::vector<BlockSignature> signatures;  // 1, or 2 for Handover (leader + successor)

    Bytes digest_input() const;
    void encode(Encoder& e) const;  // digest input + signatures (snapshot form)
    static Block decode(Decoder& d);
};

Hash32 hash_block(const Block& b);

// Block builder used by consensus and tests; signs with the author's key.
Block build_block(const KeyPair& author, std::uint64_t height, const Hash32& prev,
                  std::int64_t turn_index, Tick logical_time, BlockKind kind,
                  std::vector<Transaction> txs);
void countersign(Block& b, const KeyPair& cosigner);

struct Finding {
    std::uint64_t height = 0;
    std::string what;
};

struct ValidationReport {
    std::vector<Finding> findings;
    bool ok() const { return findings.empty(); }
};

struct Chain {
    std::vector<Block> blocks;
    std::uint64_t fixed_upto = 0;         // heights <= fixed_upto form the fixed chain
    std::set<Hash32> invalidated;         // transaction ids invalidated by vote

    const Block& tip() const { return blocks.back(); }
    Hash32 tip_hash() const { return hash_block(blocks.back()); }
    std::uint64_t height() const { return blocks.back().height; }
    bool empty() const { return blocks.empty(); }

    const Transaction* find_transaction(const Hash32& id) const;
    const Block* find_block(const Hash32& h) const;

    // Value-semantics append per the module contract.
    Chain with(Block b) const;
};

// Structural append; raises BadLink / BadSignature / MalformedBlock.
Chain append_block(const Chain& chain, Block block);
// In-place variant for the simulator's owned chains (same checks).
void append_block_inplace(Chain& chain, Block block);

ValidationReport validate_chain(const Chain& chain);

// Structural checks on a single block in isolation (signature counts,
// tx integrity); link checks need the predecessor.
void check_block_structure(const Block& b, std::vector<Finding>* findings);

// --- Genesis configuration -------------------------------------------------

struct GenesisConfig {
    std::string network_id;
    std::vector<NodeId> roster;
    Tick turn_duration = 20;
    Tick transition_duration = 5;
    double threshold = 0.5;

    std::string to_text() const;
    static GenesisConfig from_text(const std::string& text);
};

// The genesis block's bytes are derived from the configuration; its hash is
// the network's predetermined genesis hash.
Block make_genesis(const GenesisConfig& cfg, const KeyPair& founder, Tick at = 0);
Chain make_chain(const GenesisConfig& cfg, const KeyPair& founder, Tick at = 0);

// --- Snapshot file ("POTC", version u16) ------------------------------------

Bytes encode_snapshot(const Chain& chain);
Chain decode_snapshot(const Bytes& data);
void write_snapshot(const Chain& chain, const std::string& path);
Chain read_snapshot(const std::string& path);

}  // namespace potc
