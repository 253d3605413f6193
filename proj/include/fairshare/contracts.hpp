#pragma once

#include <functional>
#include <optional>
#include <set>

#include "fairshare/exchange.hpp"
#include "fairshare/ledger.hpp"

namespace fairshare {

// Controller contract S: registration, file metadata (Meta1/Meta2), access
// policy, and the P3/P4 key-exchange escrow.
// Judge contract J: commit-reveal file-exchange escrow (P1/P2) with
// complaint verification and timeout settlement.

enum class Role : uint8_t { fog = 1, cloud = 2, client = 3 };

inline std::string role_name(Role r) {
    switch (r) {
        case Role::fog: return "fog";
        case Role::cloud: return "cloud";
        default: return "client";
    }
}

struct ControllerTerms {
    Coins min_deposit_fog = 0;
    Coins min_deposit_cloud = 0;
    Coins min_deposit_client = 0;
};

enum class EscrowStatus : uint8_t { open = 1, settled = 2, seized = 3 };

class ControllerContract final : public Contract {
  public:
    struct RegistryEntry {
        Role role = Role::client;
        Bytes pk;  // empty for cloud
        Coins deposit = 0;
        uint16_t index = 0;
    };

    struct FileRecord {
        PartyId owner_fog;
        bool has_meta1 = false;
        Digest h1{}, h2{};
        bool has_nonce = false;
        Bytes nonce;
        bool has_policy = false;
        std::set<uint16_t> rho;
        std::optional<Digest> meta2_h3;  // first key session's h3
    };

    struct KeySession {
        uint32_t did = 0;
        PartyId client;
        PartyId fog;
        Coins p3 = 0, p4 = 0;
        bool p3_locked = false, p4_locked = false;
        std::optional<Digest> h3;
        EscrowStatus status = EscrowStatus::open;
    };

    struct State {
        bool initialized = false;
        Digest params_digest{};
        Digest code_ref{};
        std::map<PartyId, RegistryEntry> registry;
        std::map<uint16_t, PartyId> by_index;
        std::map<uint32_t, FileRecord> files;
        std::map<Digest, KeySession> sessions;
        uint16_t next_index = 1;
    };

    explicit ControllerContract(ControllerTerms terms = {}) : terms_(terms) {}

    std::string name() const override { return "S"; }

    bool has_function(const std::string& fn) const override {
        static const std::set<std::string> fns = {
            "register_params", "register_fog",  "register_cloud", "register_client",
            "store_nonce",     "store_meta1",   "store_access_policy",
            "store_meta2",     "lock_p3",       "lock_p4",        "verify_key_hash"};
        return fns.count(fn) != 0;
    }

    Bytes call(CallFrame& frame, const CallInfo& info) override {
        if (info.function == "register_params") return register_params(info);
        if (info.function == "register_fog") return register_party(info, Role::fog);
        if (info.function == "register_cloud") return register_party(info, Role::cloud);
        if (info.function == "register_client") return register_party(info, Role::client);
        if (info.function == "store_nonce") return store_nonce(info);
        if (info.function == "store_meta1") return store_meta1(info);
        if (info.function == "store_access_policy") return store_access_policy(info);
        if (info.function == "store_meta2") return store_meta2(info);
        if (info.function == "lock_p3") return lock_p3(info);
        if (info.function == "lock_p4") return lock_p4(info);
        if (info.function == "verify_key_hash") return verify_key_hash(frame, info);
        throw ContractError("unknown controller function");
    }

    Bytes view(const CallInfo& info) const override {
        if (info.function == "read_params") {
            if (!st_.initialized) throw NotFoundError("params not registered");
            return digest_bytes(st_.params_digest);
        }
        if (info.function == "read_pk") {
            uint16_t idx = read_u16(info.topic, 0);
            auto it = st_.by_index.find(idx);
            if (it == st_.by_index.end()) throw NotFoundError("unknown registry index");
            return st_.registry.at(it->second).pk;
        }
        if (info.function == "read_nonce") {
            const FileRecord& f = file_at(read_u32(info.topic, 0));
            if (!f.has_nonce) throw NotFoundError("nonce not stored");
            return f.nonce;
        }
        if (info.function == "read_meta1") {
            uint32_t did = read_u32(info.topic, 0);
            const FileRecord& f = file_at(did);
            if (!f.has_meta1) throw NotFoundError("meta1 not stored");
            Bytes out;
            append_u32(out, did);
            append(out, ByteView(f.h1.data(), f.h1.size()));
            append(out, ByteView(f.h2.data(), f.h2.size()));
            return out;
        }
        if (info.function == "read_meta2") {
            const KeySession& s = session_at(info.topic);
            if (!s.h3) throw NotFoundError("meta2 not stored");
            return digest_bytes(*s.h3);
        }
        if (info.function == "verify_file_hash") {
            const FileRecord& f = file_at(read_u32(info.topic, 0));
            if (!f.has_meta1) throw NotFoundError("meta1 not stored");
            if (info.payload.size() != 32) throw NotFoundError("bad digest");
            bool ok = std::memcmp(info.payload.data(), f.h1.data(), 32) == 0;
            return Bytes{uint8_t(ok ? 1 : 0)};
        }
        if (info.function == "compare_access_policy") {
            const FileRecord& f = file_at(read_u32(info.topic, 0));
            if (!f.has_policy) throw NotFoundError("no access policy");
            uint16_t client = read_u16(info.payload, 0);
            return Bytes{uint8_t(f.rho.count(client) ? 1 : 0)};
        }
        if (info.function == "key_session") {
            // most recent open session for (did, client)
            uint32_t did = read_u32(info.topic, 0);
            uint16_t client = read_u16(info.topic, 4);
            auto cit = st_.by_index.find(client);
            if (cit == st_.by_index.end()) throw NotFoundError("unknown client index");
            const Digest* found = nullptr;
            for (const auto& [id, s] : st_.sessions)
                if (s.did == did && s.client == cit->second && s.status == EscrowStatus::open)
                    found = &id;
            if (!found) throw NotFoundError("no open key session");
            return digest_bytes(*found);
        }
        if (info.function == "session_status") {
            const KeySession& s = session_at(info.topic);
            return Bytes{uint8_t(s.status)};
        }
        throw NotFoundError("unknown controller view");
    }

    Coins escrowed() const override {
        Coins total = 0;
        for (const auto& [p, e] : st_.registry) total += e.deposit;
        for (const auto& [id, s] : st_.sessions)
            if (s.status == EscrowStatus::open) total += s.p3 + s.p4;
        return total;
    }

    void hash_state(Keccak256& h) const override {
        h.update("S");
        Bytes buf;
        buf.push_back(st_.initialized ? 1 : 0);
        append(buf, ByteView(st_.params_digest.data(), 32));
        for (const auto& [p, e] : st_.registry) {
            append(buf, p);
            buf.push_back(uint8_t(e.role));
            append_u16(buf, e.index);
            append_u64(buf, e.deposit);
            append(buf, e.pk);
        }
        for (const auto& [did, f] : st_.files) {
            append_u32(buf, did);
            append(buf, f.owner_fog);
            buf.push_back(f.has_meta1 ? 1 : 0);
            if (f.has_meta1) {
                append(buf, ByteView(f.h1.data(), 32));
                append(buf, ByteView(f.h2.data(), 32));
            }
            append(buf, f.nonce);
            for (uint16_t c : f.rho) append_u16(buf, c);
            if (f.meta2_h3) append(buf, ByteView(f.meta2_h3->data(), 32));
        }
        for (const auto& [id, s] : st_.sessions) {
            append(buf, ByteView(id.data(), 32));
            append_u32(buf, s.did);
            append(buf, s.client);
            append(buf, s.fog);
            append_u64(buf, s.p3);
            append_u64(buf, s.p4);
            buf.push_back(uint8_t(s.status));
            if (s.h3) append(buf, ByteView(s.h3->data(), 32));
        }
        h.update(buf);
    }

    std::shared_ptr<void> snapshot() const override { return std::make_shared<State>(st_); }
    void restore(const std::shared_ptr<void>& snap) override {
        st_ = *std::static_pointer_cast<State>(snap);
    }

    const State& state() const { return st_; }

  private:
    Bytes register_params(const CallInfo& info) {
        if (st_.initialized) throw ContractError("already initialized");
        if (info.payload.size() != 64) throw ContractError("bad params payload");
        std::memcpy(st_.params_digest.data(), info.payload.data(), 32);
        std::memcpy(st_.code_ref.data(), info.payload.data() + 32, 32);
        st_.initialized = true;
        return digest_bytes(st_.params_digest);
    }

    Bytes register_party(const CallInfo& info, Role role) {
        if (!st_.initialized) throw ContractError("params not registered");
        if (st_.registry.count(info.sender)) throw ContractError("already registered");
        Coins min = role == Role::fog    ? terms_.min_deposit_fog
                    : role == Role::cloud ? terms_.min_deposit_cloud
                                          : terms_.min_deposit_client;
        if (info.attached < min) throw ContractError("deposit below contract terms");
        if (role == Role::cloud) {
            if (!info.payload.empty()) throw ContractError("cloud registration carries no key");
        } else if (info.payload.empty()) {
            throw ContractError("registration requires a public key");
        }
        RegistryEntry e;
        e.role = role;
        e.pk.assign(info.payload.begin(), info.payload.end());
        e.deposit = info.attached;
        e.index = st_.next_index++;
        st_.registry[info.sender] = e;
        st_.by_index[e.index] = info.sender;
        Bytes ret;
        append_u16(ret, e.index);
        return ret;
    }

    void require_role(const PartyId& p, Role role) const {
        auto it = st_.registry.find(p);
        if (it == st_.registry.end() || it->second.role != role)
            throw ContractError("caller lacks required role");
    }

    FileRecord& claim_file(uint32_t did, const PartyId& fog) {
        auto [it, inserted] = st_.files.try_emplace(did);
        if (inserted) it->second.owner_fog = fog;
        if (it->second.owner_fog != fog) throw ContractError("file owned by a different fog");
        return it->second;
    }

    const FileRecord& file_at(uint32_t did) const {
        auto it = st_.files.find(did);
        if (it == st_.files.end()) throw NotFoundError("unknown DId");
        return it->second;
    }

    const KeySession& session_at(ByteView topic) const {
        if (topic.size() != 32) throw NotFoundError("bad session id");
        Digest id;
        std::memcpy(id.data(), topic.data(), 32);
        auto it = st_.sessions.find(id);
        if (it == st_.sessions.end()) throw NotFoundError("unknown key session");
        return it->second;
    }

    KeySession& session_mut(ByteView topic) {
        return const_cast<KeySession&>(session_at(topic));
    }

    Bytes store_nonce(const CallInfo& info) {
        require_role(info.sender, Role::fog);
        if (info.payload.size() != 12) throw ContractError("bad nonce payload");
        FileRecord& f = claim_file(read_u32(info.payload, 0), info.sender);
        if (f.has_nonce) throw ContractError("nonce is write-once");
        f.nonce.assign(info.payload.begin() + 4, info.payload.end());
        f.has_nonce = true;
        return {};
    }

    Bytes store_meta1(const CallInfo& info) {
        require_role(info.sender, Role::fog);
        if (info.payload.size() != 68) throw ContractError("bad meta1 payload");
        FileRecord& f = claim_file(read_u32(info.payload, 0), info.sender);
        if (f.has_meta1) throw ContractError("meta1 is write-once");
        std::memcpy(f.h1.data(), info.payload.data() + 4, 32);
        std::memcpy(f.h2.data(), info.payload.data() + 36, 32);
        f.has_meta1 = true;
        return {};
    }

    // Updatable: revocation rewrites the policy.
    Bytes store_access_policy(const CallInfo& info) {
        require_role(info.sender, Role::fog);
        if (info.payload.size() < 4 || (info.payload.size() - 4) % 2 != 0)
            throw ContractError("bad policy payload");
        FileRecord& f = claim_file(read_u32(info.payload, 0), info.sender);
        f.rho.clear();
        for (size_t off = 4; off < info.payload.size(); off += 2)
            f.rho.insert(read_u16(info.payload, off));
        f.has_policy = true;
        return {};
    }

    Bytes store_meta2(const CallInfo& info) {
        require_role(info.sender, Role::fog);
        if (info.payload.size() != 36) throw ContractError("bad meta2 payload");
        KeySession& s = session_mut(info.topic);
        if (s.fog != info.sender) throw ContractError("session served by a different fog");
        if (s.status != EscrowStatus::open) throw ContractError("session closed");
        if (s.h3) throw ContractError("meta2 is write-once");
        if (read_u32(info.payload, 0) != s.did) throw ContractError("meta2 DId mismatch");
        Digest h3;
        std::memcpy(h3.data(), info.payload.data() + 4, 32);
        s.h3 = h3;
        FileRecord& f = const_cast<FileRecord&>(file_at(s.did));
        if (!f.meta2_h3) f.meta2_h3 = h3;
        return {};
    }

    Bytes lock_p3(const CallInfo& info) {
        require_role(info.sender, Role::client);
        if (info.topic.size() != 4) throw ContractError("bad lock_p3 topic");
        uint32_t did = read_u32(info.topic, 0);
        const FileRecord& f = file_at(did);
        if (info.attached == 0) throw ContractError("P3 lock requires coins");
        uint16_t client_idx = st_.registry.at(info.sender).index;
        if (!f.has_policy || f.rho.count(client_idx) == 0)
            throw ContractError("client not in access policy");
        Keccak256 h;
        h.update("fairshare.keysession");
        Bytes seed;
        append_u32(seed, did);
        append_u16(seed, client_idx);
        append_u64(seed, info.seq);
        h.update(seed);
        Digest id = h.finalize();
        KeySession s;
        s.did = did;
        s.client = info.sender;
        s.fog = f.owner_fog;
        s.p3 = info.attached;
        s.p3_locked = true;
        st_.sessions[id] = s;
        return digest_bytes(id);
    }

    Bytes lock_p4(const CallInfo& info) {
        require_role(info.sender, Role::fog);
        KeySession& s = session_mut(info.topic);
        if (s.fog != info.sender) throw ContractError("session served by a different fog");
        if (s.status != EscrowStatus::open) throw ContractError("session closed");
        if (!s.p3_locked) throw ContractError("client lock precedes fog lock");
        if (s.p4_locked) throw ContractError("P4 already locked");
        if (info.attached == 0) throw ContractError("P4 lock requires coins");
        s.p4 = info.attached;
        s.p4_locked = true;
        return {};
    }

    // Compares the submitted digest with Meta2 and settles the key escrow:
    // match pays the fog P3+P4, mismatch seizes P4 and refunds the client.
    Bytes verify_key_hash(CallFrame& frame, const CallInfo& info) {
        KeySession& s = session_mut(info.topic);
        if (s.client != info.sender) throw ContractError("only the session client settles");
        if (s.status != EscrowStatus::open) throw ContractError("escrow not open");
        if (!s.p3_locked || !s.p4_locked) throw ContractError("both locks required");
        if (!s.h3) throw ContractError("meta2 not stored");
        if (info.payload.size() != 32) throw ContractError("bad key hash payload");
        bool match = std::memcmp(info.payload.data(), s.h3->data(), 32) == 0;
        if (match) {
            frame.credit(s.fog, s.p3 + s.p4);
            s.status = EscrowStatus::settled;
        } else {
            frame.credit(s.client, s.p3 + s.p4);
            s.status = EscrowStatus::seized;
        }
        return Bytes{uint8_t(match ? 1 : 0)};
    }

    ControllerTerms terms_;
    State st_;
};

// ---------------------------------------------------------------------------

enum class JudgePhase : uint8_t {
    created = 1,
    accepted = 2,
    key_revealed = 3,
    settled_seller = 4,
    settled_buyer = 5,
    aborted = 6,
};

class JudgeContract final : public Contract {
  public:
    struct Session {
        uint32_t did = 0;
        PartyId seller;
        uint16_t buyer_index = 0;
        PartyId buyer;
        Digest c{}, r_z{}, r_phi{};
        uint16_t count = 0;
        Coins price = 0;    // P1, locked by the buyer at accept
        Coins deposit = 0;  // P2, locked by the seller at create
        std::optional<SymKey> key;
        uint64_t deadline = 0;
        JudgePhase phase = JudgePhase::created;
    };

    struct State {
        std::map<Digest, Session> sessions;
    };

    JudgeContract(uint64_t ts, uint32_t chunk_size,
                  std::function<PartyId(uint16_t)> resolve_party)
        : ts_(ts), chunk_size_(chunk_size), resolve_party_(std::move(resolve_party)) {}

    std::string name() const override { return "J"; }

    bool has_function(const std::string& fn) const override {
        static const std::set<std::string> fns = {"create",        "accept",
                                                  "reveal_key",    "decide",
                                                  "timeout_claim", "refund_no_key",
                                                  "abort"};
        return fns.count(fn) != 0;
    }

    Bytes call(CallFrame& frame, const CallInfo& info) override {
        if (info.function == "create") return create(info);
        if (info.function == "accept") return accept(info);
        if (info.function == "reveal_key") return reveal_key(info);
        if (info.function == "decide") return decide(frame, info);
        if (info.function == "timeout_claim") return timeout_claim(frame, info);
        if (info.function == "refund_no_key") return refund_no_key(frame, info);
        if (info.function == "abort") return abort_session(frame, info);
        throw ContractError("unknown judge function");
    }

    Bytes view(const CallInfo& info) const override {
        if (info.function == "read_commitment") {
            const Session& s = session_at(info.topic);
            Bytes out = digest_bytes(s.c);
            append(out, ByteView(s.r_z.data(), 32));
            append(out, ByteView(s.r_phi.data(), 32));
            append_u16(out, s.count);
            return out;
        }
        if (info.function == "read_key") {
            const Session& s = session_at(info.topic);
            if (!s.key) throw NotFoundError("key not revealed");
            return Bytes(s.key->begin(), s.key->end());
        }
        if (info.function == "read_phase") {
            const Session& s = session_at(info.topic);
            return Bytes{uint8_t(s.phase)};
        }
        if (info.function == "read_deadline") {
            const Session& s = session_at(info.topic);
            Bytes out;
            append_u64(out, s.deadline);
            return out;
        }
        throw NotFoundError("unknown judge view");
    }

    Coins escrowed() const override {
        Coins total = 0;
        for (const auto& [id, s] : st_.sessions) {
            switch (s.phase) {
                case JudgePhase::created:
                    total += s.deposit;
                    break;
                case JudgePhase::accepted:
                case JudgePhase::key_revealed:
                    total += s.deposit + s.price;
                    break;
                default:
                    break;
            }
        }
        return total;
    }

    void hash_state(Keccak256& h) const override {
        h.update("J");
        Bytes buf;
        for (const auto& [id, s] : st_.sessions) {
            append(buf, ByteView(id.data(), 32));
            append_u32(buf, s.did);
            append(buf, s.seller);
            append(buf, s.buyer);
            append(buf, ByteView(s.c.data(), 32));
            append_u64(buf, s.price);
            append_u64(buf, s.deposit);
            buf.push_back(uint8_t(s.phase));
            if (s.key) append(buf, ByteView(s.key->data(), s.key->size()));
        }
        h.update(buf);
    }

    std::shared_ptr<void> snapshot() const override { return std::make_shared<State>(st_); }
    void restore(const std::shared_ptr<void>& snap) override {
        st_ = *std::static_pointer_cast<State>(snap);
    }

    const State& state() const { return st_; }

  private:
    const Session& session_at(ByteView topic) const {
        if (topic.size() != 32) throw NotFoundError("bad session id");
        Digest id;
        std::memcpy(id.data(), topic.data(), 32);
        auto it = st_.sessions.find(id);
        if (it == st_.sessions.end()) throw NotFoundError("unknown judge session");
        return it->second;
    }

    Session& session_mut(ByteView topic) { return const_cast<Session&>(session_at(topic)); }

    // topic: did_u32 || buyer_index_u16; payload: c || r_z || r_phi || count_u16.
    // The attached coins become the seller's safety deposit P2.
    Bytes create(const CallInfo& info) {
        if (info.topic.size() != 6) throw ContractError("bad create topic");
        if (info.payload.size() != 98) throw ContractError("bad create payload");
        Session s;
        s.did = read_u32(info.topic, 0);
        s.buyer_index = read_u16(info.topic, 4);
        s.buyer = resolve_party_(s.buyer_index);
        if (s.buyer.empty()) throw ContractError("unknown buyer index");
        s.seller = info.sender;
        std::memcpy(s.c.data(), info.payload.data(), 32);
        std::memcpy(s.r_z.data(), info.payload.data() + 32, 32);
        std::memcpy(s.r_phi.data(), info.payload.data() + 64, 32);
        s.count = read_u16(info.payload, 96);
        if (s.count == 0) throw ContractError("empty commitment");
        if (commitment_digest(s.r_z, s.r_phi, s.count, chunk_size_) != s.c)
            throw ContractError("commitment digest mismatch");
        s.deposit = info.attached;
        s.phase = JudgePhase::created;

        Keccak256 h;
        h.update("fairshare.judgesession");
        Bytes seed;
        append_u32(seed, s.did);
        append_u16(seed, s.buyer_index);
        append_u64(seed, info.seq);
        h.update(seed);
        Digest id = h.finalize();
        st_.sessions[id] = s;
        return digest_bytes(id);
    }

    Bytes accept(const CallInfo& info) {
        Session& s = session_mut(info.topic);
        if (info.sender != s.buyer) throw ContractError("only the buyer accepts");
        if (s.phase != JudgePhase::created) throw ContractError("wrong phase for accept");
        if (info.payload.size() != 1 || info.payload[0] != 0x01)
            throw ContractError("bad accept payload");
        if (info.attached == 0) throw ContractError("accept locks the price");
        s.price = info.attached;
        s.phase = JudgePhase::accepted;
        s.deadline = info.time + ts_;  // seller must reveal by then
        return {};
    }

    Bytes reveal_key(const CallInfo& info) {
        Session& s = session_mut(info.topic);
        if (info.sender != s.seller) throw ContractError("only the seller reveals");
        if (s.phase != JudgePhase::accepted) throw ContractError("wrong phase for reveal");
        if (info.payload.size() != kSymKeySize) throw ContractError("bad key payload");
        SymKey k{};
        std::memcpy(k.data(), info.payload.data(), k.size());
        s.key = k;
        s.phase = JudgePhase::key_revealed;
        s.deadline = info.time + ts_;  // buyer must decide by then
        return {};
    }

    // payload 0x01 = valid; 0x02 || proof = complaint. An invalid complaint
    // is a no-op: gas is spent and the timeout path remains.
    Bytes decide(CallFrame& frame, const CallInfo& info) {
        Session& s = session_mut(info.topic);
        if (info.sender != s.buyer) throw ContractError("only the buyer decides");
        if (s.phase != JudgePhase::key_revealed) throw ContractError("wrong phase for decide");
        if (info.time > s.deadline) throw ContractError("decision window closed");
        if (info.payload.empty()) throw ContractError("empty decision");
        if (info.payload[0] == 0x01) {
            if (info.payload.size() != 1) throw ContractError("bad decision payload");
            frame.credit(s.seller, s.price + s.deposit);
            s.phase = JudgePhase::settled_seller;
            return Bytes{1};
        }
        if (info.payload[0] != 0x02) throw ContractError("bad decision payload");
        MisbehaviorProof proof;
        try {
            proof = de_proof(info.payload.subspan(1));
        } catch (const DecodeError& e) {
            throw ContractError(std::string("complaint-invalid: ") + e.what());
        }
        ExchangeCommitment cm{s.c, s.r_z, s.r_phi, s.count, chunk_size_};
        if (judge_verify_proof(cm, *s.key, proof)) {
            frame.credit(s.buyer, s.price + s.deposit);
            s.phase = JudgePhase::settled_buyer;
            return Bytes{1};
        }
        return Bytes{0};
    }

    Bytes timeout_claim(CallFrame& frame, const CallInfo& info) {
        Session& s = session_mut(info.topic);
        if (info.sender != s.seller) throw ContractError("only the seller claims");
        if (s.phase != JudgePhase::key_revealed) throw ContractError("wrong phase for claim");
        if (info.time <= s.deadline) throw ContractError("deadline not passed");
        frame.credit(s.seller, s.price + s.deposit);
        s.phase = JudgePhase::settled_seller;
        return {};
    }

    // Seller never revealed the key: the buyer recovers P1 + P2.
    Bytes refund_no_key(CallFrame& frame, const CallInfo& info) {
        Session& s = session_mut(info.topic);
        if (info.sender != s.buyer) throw ContractError("only the buyer claims the refund");
        if (s.phase != JudgePhase::accepted) throw ContractError("wrong phase for refund");
        if (info.time <= s.deadline) throw ContractError("deadline not passed");
        frame.credit(s.buyer, s.price + s.deposit);
        s.phase = JudgePhase::settled_buyer;
        return {};
    }

    // Buyer rejected the commitment off-chain; the seller reclaims P2.
    Bytes abort_session(CallFrame& frame, const CallInfo& info) {
        Session& s = session_mut(info.topic);
        if (info.sender != s.seller) throw ContractError("only the seller aborts");
        if (s.phase != JudgePhase::created) throw ContractError("wrong phase for abort");
        frame.credit(s.seller, s.deposit);
        s.phase = JudgePhase::aborted;
        return {};
    }

    uint64_t ts_;
    uint32_t chunk_size_;
    std::function<PartyId(uint16_t)> resolve_party_;
    State st_;
};

}  // namespace fairshare
