#pragma once

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include "fairshare/contracts.hpp"
#include "fairshare/exchange.hpp"
#include "fairshare/ledger.hpp"
#include "fairshare/pkenc.hpp"
#include "fairshare/pre.hpp"

namespace fairshare {

// Behavioral layer: Device, Fog, Cloud and Client as deterministic actors
// driven by a FIFO action queue. Malicious variants realize the adversarial
// case taxonomy; collusion is shared strategy state exchanged off-ledger.

enum class FogBehavior { honest, tamper_reenc, collude_forge_file };
enum class CloudBehavior {
    honest,
    tamper_file_claim,
    forward_forged_file,
    withhold_key,
    grant_unauthorized,
    collude_with_fog,
};
enum class ClientBehavior {
    honest,
    unauthorized_request,
    false_complaint,
    silent_after_key,
    collude_with_fog,
};

struct FeeSchedule {
    Coins p1 = 1000;  // file price (client -> cloud)
    Coins p2 = 800;   // cloud safety deposit
    Coins p3 = 600;   // key price (client -> fog)
    Coins p4 = 500;   // fog safety deposit
    Coins eps1 = 50;  // request incentive, client -> cloud
    Coins eps2 = 50;  // forward incentive, cloud -> fog
    Coins register_deposit = 0;
};

// ---- trace ----------------------------------------------------------------

struct TraceEvent {
    enum class Kind : uint8_t { onchain = 1, view = 2, offchain = 3, note = 4 };
    Kind kind;
    std::string from;
    std::string to;
    std::string label;
    uint64_t bytes = 0;  // tx payload / view response / off-chain wire size
    uint64_t aux = 0;    // tx return size / derived payload metric
    uint64_t seq = 0;
    bool ok = true;
    std::string detail;
};

class TraceLog {
  public:
    void onchain(const Transaction& tx) {
        TraceEvent e{TraceEvent::Kind::onchain, tx.sender, "chain", tx.target,
                     tx.payload.size(), tx.ret.size(), tx.seq, tx.ok, tx.error};
        events_.push_back(std::move(e));
    }

    void view(const std::string& caller, const std::string& label, uint64_t response_bytes,
              std::string detail = {}) {
        events_.push_back(TraceEvent{TraceEvent::Kind::view, caller, "chain", label,
                                     response_bytes, 0, 0, true, std::move(detail)});
    }

    void offchain(const std::string& from, const std::string& to, const std::string& label,
                  uint64_t wire_bytes, uint64_t aux = 0) {
        events_.push_back(
            TraceEvent{TraceEvent::Kind::offchain, from, to, label, wire_bytes, aux});
    }

    void note(const std::string& who, const std::string& text) {
        events_.push_back(TraceEvent{TraceEvent::Kind::note, who, "", text});
    }

    const std::vector<TraceEvent>& events() const { return events_; }

    std::string export_text() const {
        std::ostringstream os;
        for (const auto& e : events_) {
            switch (e.kind) {
                case TraceEvent::Kind::onchain:
                    os << "onchain seq=" << e.seq << " sender=" << e.from
                       << " target=" << e.label << " payload=" << e.bytes << " ret=" << e.aux
                       << " ok=" << (e.ok ? 1 : 0);
                    if (!e.ok) os << " err=\"" << e.detail << "\"";
                    break;
                case TraceEvent::Kind::view:
                    os << "view caller=" << e.from << " target=" << e.label
                       << " response=" << e.bytes;
                    if (!e.detail.empty()) os << " detail=" << e.detail;
                    break;
                case TraceEvent::Kind::offchain:
                    os << "offchain from=" << e.from << " to=" << e.to << " label=" << e.label
                       << " bytes=" << e.bytes;
                    if (e.aux != 0) os << " payload=" << e.aux;
                    break;
                case TraceEvent::Kind::note:
                    os << "note who=" << e.from << " text=\"" << e.label << "\"";
                    break;
            }
            os << "\n";
        }
        return os.str();
    }

    Digest digest() const { return keccak256(export_text()); }

  private:
    std::vector<TraceEvent> events_;
};

// ---- shared runtime --------------------------------------------------------

struct Runtime {
    const PublicParams* par = nullptr;
    Ledger* ledger = nullptr;
    TraceLog* trace = nullptr;
    std::deque<std::function<void()>>* queue = nullptr;
    FeeSchedule fees;
    uint64_t ts = 64;
    uint32_t chunk_size = kDefaultChunkSize;

    void enqueue(std::function<void()> fn) { queue->push_back(std::move(fn)); }

    Receipt submit(const PartyId& sender, const std::string& target, Bytes topic,
                   Bytes payload, Coins attached) {
        Receipt r = ledger->submit(sender, target, std::move(topic), std::move(payload),
                                   attached);
        trace->onchain(ledger->log().back());
        return r;
    }

    Receipt transfer(const PartyId& from, const PartyId& to, Coins amount) {
        Receipt r = ledger->transfer(from, to, amount);
        trace->onchain(ledger->log().back());
        return r;
    }

    Bytes view(const PartyId& caller, const std::string& target, Bytes topic,
               Bytes payload = {}, const std::string& detail = {}) {
        Bytes resp = ledger->view(target, std::move(topic), std::move(payload));
        trace->view(caller, target, resp.size(), detail);
        return resp;
    }
};

// Envelope overhead on the wire: the AEAD tag on c_m plus the fixed
// key-encapsulation ciphertext c_k (16 + 256 at defaults).
inline uint64_t envelope_overhead(const PublicParams& par) {
    return kAeadTagSize + asym_ciphertext_size(par);
}

// ---- sensor data layout -----------------------------------------------------

// Reading payload m_i: window_index_u32 || sample_count_u32 || samples
// (sample-major, channels i32 values per sample).
inline Bytes encode_reading(uint32_t window_index, uint32_t sample_count,
                            const std::vector<int32_t>& samples) {
    Bytes m;
    append_u32(m, window_index);
    append_u32(m, sample_count);
    for (int32_t s : samples) append_u32(m, static_cast<uint32_t>(s));
    return m;
}

// Summary record: did || window || sample_count || reserved || per-channel mean.
inline constexpr size_t kRecordHeader = 16;

inline Bytes encode_summary_record(uint32_t did, uint32_t window, uint32_t sample_count,
                                   const std::vector<int32_t>& means) {
    Bytes r;
    append_u32(r, did);
    append_u32(r, window);
    append_u32(r, sample_count);
    append_u32(r, 0);
    for (int32_t m : means) append_u32(r, static_cast<uint32_t>(m));
    return r;
}

// ---- device -----------------------------------------------------------------

struct Envelope {
    uint32_t did = 0;
    uint64_t counter = 0;  // implicit AEAD nonce, reconstructed by the fog
    Bytes c_m;
    Bytes c_k;

    uint64_t wire_size() const { return c_m.size() + c_k.size(); }
};

struct DeviceIdentity {
    uint32_t did = 0;
    SymKey k_d{};
    AsymKeyPair keys;
};

class DeviceActor {
  public:
    DeviceActor(Runtime& rt, uint32_t did, G1Point fog_pk1, DetRng rng)
        : rt_(&rt), rng_(std::move(rng)), fog_pk1_(std::move(fog_pk1)) {
        id_.did = did;
        rng_.fill(id_.k_d.data(), id_.k_d.size());
        id_.keys = asym_keygen(*rt_->par, rng_);
    }

    const DeviceIdentity& identity() const { return id_; }
    std::string party_name() const { return "D" + std::to_string(id_.did >> 16); }

    Envelope emit(ByteView m) {
        Digest h = keccak256(m);
        Bytes sigma = sign_digest(*rt_->par, id_.keys.sk, h);
        Bytes pt(m.begin(), m.end());
        append(pt, ByteView(h.data(), h.size()));
        append(pt, sigma);
        append_u32(pt, id_.did);

        Envelope env;
        env.did = id_.did;
        env.counter = counter_++;
        env.c_m = sym_encrypt(id_.k_d, counter_nonce(env.counter), pt);
        env.c_k = asym_encrypt(*rt_->par, fog_pk1_, ByteView(id_.k_d.data(), id_.k_d.size()),
                               rng_);
        return env;
    }

    bool check_feedback(ByteView ack_sig, const Digest& envelope_digest,
                        const G1Point& fog_pk) const {
        Keccak256 h;
        h.update("fairshare.feedback");
        h.update(ByteView(envelope_digest.data(), envelope_digest.size()));
        return verify_digest(*rt_->par, fog_pk, h.finalize(), ack_sig);
    }

  private:
    Runtime* rt_;
    DetRng rng_;
    DeviceIdentity id_;
    G1Point fog_pk1_;
    uint64_t counter_ = 0;
};

// ---- fog ---------------------------------------------------------------------

class CloudActor;
class ClientActor;

class FogActor {
  public:
    FogActor(Runtime& rt, std::string party, uint32_t did, FogBehavior behavior, DetRng rng)
        : rt_(&rt), id_(std::move(party)), did_(did), behavior_(behavior),
          rng_(std::move(rng)) {
        k_f_ = random_gt_element(*rt_->par, rng_);
        file_key_ = kdf_symmetric_key(*rt_->par, k_f_);
        pre_keys_ = pre_keygen(*rt_->par, rng_);
        asym_keys_ = asym_keygen(*rt_->par, rng_);
    }

    const PartyId& party() const { return id_; }
    uint32_t did() const { return did_; }
    const G1Point& pre_pk() const { return pre_keys_.pk; }
    const G1Point& asym_pk() const { return asym_keys_.pk; }
    const Fp2& k_f() const { return k_f_; }
    uint16_t registry_index() const { return index_; }
    FogBehavior behavior() const { return behavior_; }

    void provision_device(uint32_t did, const G1Point& device_pk) {
        devices_[did] = device_pk;
    }

    void register_on_chain() {
        Receipt r = rt_->submit(id_, "S.register_fog", {},
                                rt_->par->ser_g1(pre_keys_.pk), rt_->fees.register_deposit);
        index_ = read_u16(r.ret, 0);
    }

    // Integrity + signature verification; a signed acknowledgment goes back on
    // success, the envelope is dropped otherwise.
    bool ingest(const Envelope& env, DeviceActor* device) {
        rt_->trace->offchain(device ? device->party_name() : "D?", id_, "envelope",
                             env.wire_size(),
                             env.wire_size() - envelope_overhead(*rt_->par));
        Bytes pt;
        try {
            Bytes kd_raw = asym_decrypt(*rt_->par, asym_keys_.sk, env.c_k);
            if (kd_raw.size() != kSymKeySize) return reject(env, "bad K_D");
            SymKey kd{};
            std::memcpy(kd.data(), kd_raw.data(), kd.size());
            pt = sym_decrypt(kd, counter_nonce(env.counter), env.c_m);
        } catch (const CryptoError& e) {
            return reject(env, e.what());
        }
        const size_t sig_size = signature_size(*rt_->par);
        if (pt.size() < 32 + sig_size + 4) return reject(env, "short payload");
        size_t m_len = pt.size() - 32 - sig_size - 4;
        ByteView m(pt.data(), m_len);
        Digest h;
        std::memcpy(h.data(), pt.data() + m_len, 32);
        ByteView sigma(pt.data() + m_len + 32, sig_size);
        uint32_t did = read_u32(pt, m_len + 32 + sig_size);

        if (keccak256(m) != h) return reject(env, "digest mismatch");
        auto dit = devices_.find(did);
        if (dit == devices_.end() || !verify_digest(*rt_->par, dit->second, h, sigma))
            return reject(env, "signature rejected");

        readings_.emplace_back(m.begin(), m.end());
        Bytes ack = feedback_signature(env);
        rt_->trace->offchain(id_, device ? device->party_name() : "D?", "feedback",
                             ack.size());
        if (device && !device->check_feedback(ack, keccak256(env.c_m), asym_keys_.pk))
            rt_->trace->note(id_, "device rejected feedback");
        return true;
    }

    // Summarize accepted readings (per-channel windowed mean), encrypt, upload
    // to the cloud and anchor nonce / policy / Meta1 on chain.
    void store_file(CloudActor& cloud, const std::vector<uint16_t>& policy);

    // Key leg: re-encrypt the file key for one client and serve it.
    void serve_key(uint16_t client_index, ClientActor& client, CloudActor& cloud);

    Bytes build_file() const {
        Bytes f;
        for (const auto& m : readings_) {
            uint32_t window = read_u32(m, 0);
            uint32_t count = read_u32(m, 4);
            size_t channels = (m.size() - 8) / 4 / count;
            std::vector<int32_t> means(channels, 0);
            for (size_t c = 0; c < channels; ++c) {
                int64_t sum = 0;
                for (uint32_t s = 0; s < count; ++s)
                    sum += static_cast<int32_t>(read_u32(m, 8 + 4 * (s * channels + c)));
                means[c] = static_cast<int32_t>(sum / count);
            }
            Bytes rec = encode_summary_record(did_, window, count, means);
            append(f, rec);
        }
        return f;
    }

    const Bytes& plain_file() const { return file_; }
    const Bytes& encrypted_file() const { return fprime_; }
    const std::vector<Digest>& collusion_phi() const { return collusion_phi_; }
    uint64_t collusion_file_len() const { return collusion_len_; }

  private:
    bool reject(const Envelope& env, const std::string& why) {
        rt_->trace->note(id_, "envelope " + std::to_string(env.counter) + " aborted: " + why);
        return false;
    }

    Bytes feedback_signature(const Envelope& env) const {
        Keccak256 h;
        h.update("fairshare.feedback");
        Digest ed = keccak256(env.c_m);
        h.update(ByteView(ed.data(), ed.size()));
        return sign_digest(*rt_->par, asym_keys_.sk, h.finalize());
    }

    Runtime* rt_;
    PartyId id_;
    uint32_t did_;
    FogBehavior behavior_;
    DetRng rng_;
    uint16_t index_ = 0;

    Fp2 k_f_;
    SymKey file_key_{};
    PreKeyPair pre_keys_;
    AsymKeyPair asym_keys_;
    std::map<uint32_t, G1Point> devices_;
    std::vector<Bytes> readings_;

    Bytes file_;
    Bytes fprime_;
    Bytes nonce_;
    std::optional<PreCiphertext> c_prime_;
    std::vector<Digest> collusion_phi_;
    uint64_t collusion_len_ = 0;
};

// ---- cloud -------------------------------------------------------------------

class CloudActor {
  public:
    CloudActor(Runtime& rt, CloudBehavior behavior, DetRng rng)
        : rt_(&rt), behavior_(behavior), rng_(std::move(rng)) {}

    const PartyId& party() const { return id_; }
    CloudBehavior behavior() const { return behavior_; }

    void register_on_chain() {
        rt_->submit(id_, "S.register_cloud", {}, {}, rt_->fees.register_deposit);
    }

    void accept_collusion(uint32_t did, std::vector<Digest> phi, uint64_t len) {
        collusion_[did] = {std::move(phi), len};
    }

    // Part 2 step 4: integrity verification against Meta1.
    bool receive_file(uint32_t did, Bytes fprime, FogActor& fog) {
        rt_->trace->offchain(fog.party(), id_, "file_upload", fprime.size());
        if (collusion_.count(did)) {
            rt_->trace->note(id_, "collusion: skipped file integrity verification");
            stored_[did] = std::move(fprime);
            return true;
        }
        Digest h = file_digest(fprime, rt_->chunk_size);
        if (behavior_ == CloudBehavior::tamper_file_claim) {
            // claims to have received a different file by submitting a forged digest
            h[0] ^= 0xff;
        }
        Bytes topic;
        append_u32(topic, did);
        Bytes resp = rt_->view(id_, "S.verify_file_hash", topic, digest_bytes(h),
                               "file integrity");
        if (resp.empty() || resp[0] != 1) {
            rt_->trace->note(id_, "file integrity verification failed: aborting storage");
            return false;
        }
        stored_[did] = std::move(fprime);
        return true;
    }

    bool has_file(uint32_t did) const { return stored_.count(did) != 0; }

    void handle_request(uint32_t did, uint16_t client_index, ClientActor& client,
                        FogActor& fog);

    void on_buyer_accepted(const Digest& session);
    void on_buyer_rejected(const Digest& session);
    void settle_timeouts();

    struct ExchangeState {
        uint32_t did = 0;
        SymKey k{};
        CommitResult commit;
        ClientActor* buyer = nullptr;
        bool revealed = false;
        bool terminal = false;
    };

    const std::map<Digest, ExchangeState>& exchanges() const { return exchanges_; }

  private:
    void init_exchange(uint32_t did, uint16_t client_index, ClientActor& client);

    Runtime* rt_;
    PartyId id_ = "Cl";
    CloudBehavior behavior_;
    DetRng rng_;
    std::map<uint32_t, Bytes> stored_;
    struct Collusion {
        std::vector<Digest> phi;
        uint64_t len = 0;
    };
    std::map<uint32_t, Collusion> collusion_;
    std::map<Digest, ExchangeState> exchanges_;
};

// ---- client --------------------------------------------------------------------

class ClientActor {
  public:
    ClientActor(Runtime& rt, std::string party, ClientBehavior behavior, DetRng rng)
        : rt_(&rt), id_(std::move(party)), behavior_(behavior), rng_(std::move(rng)) {
        pre_keys_ = pre_keygen(*rt_->par, rng_);
    }

    const PartyId& party() const { return id_; }
    uint16_t registry_index() const { return index_; }
    const G1Point& pre_pk() const { return pre_keys_.pk; }
    ClientBehavior behavior() const { return behavior_; }

    void register_on_chain() {
        Receipt r = rt_->submit(id_, "S.register_client", {},
                                rt_->par->ser_g1(pre_keys_.pk), rt_->fees.register_deposit);
        index_ = read_u16(r.ret, 0);
    }

    // Data request: incentive first, then Req = DId || client_index [|| token].
    void request(uint32_t did, CloudActor& cloud, FogActor& fog, Bytes token = {}) {
        did_ = did;
        rt_->transfer(id_, cloud.party(), rt_->fees.eps1);
        Bytes req;
        append_u32(req, did);
        append_u16(req, index_);
        append(req, token);
        rt_->trace->offchain(id_, cloud.party(), "access_request", req.size());
        CloudActor* cl = &cloud;
        FogActor* fg = &fog;
        uint32_t d = did;
        uint16_t idx = index_;
        ClientActor* self = this;
        rt_->enqueue([cl, d, idx, self, fg] { cl->handle_request(d, idx, *self, *fg); });
    }

    void on_denied(uint32_t did) {
        rt_->trace->note(id_, "access denied for DId " + std::to_string(did));
        if (!terminal_) {
            verdict_ = "aborted-unauthorized";
            terminal_ = true;
        }
    }

    // The cloud announced the retrieval: lock P3 before c'' can arrive.
    void on_retrieval_init(uint32_t did) {
        if (terminal_) return;
        Bytes topic;
        append_u32(topic, did);
        Receipt r = rt_->submit(id_, "S.lock_p3", topic, {}, rt_->fees.p3);
        if (!r.ok) {
            rt_->trace->note(id_, "P3 lock rejected: " + r.error);
            verdict_ = "aborted-unauthorized";
            terminal_ = true;
            return;
        }
        std::memcpy(key_session_.data(), r.ret.data(), 32);
        key_leg_open_ = true;
    }

    void on_exchange_package(const Digest& j_session, const SellerPackage* pkg,
                             CloudActor& cloud);
    void on_key_revealed(const Digest& j_session, CloudActor& cloud);
    void on_key_delivery(const Digest& key_session, Bytes c2_ser);
    void on_no_key_timeout(const Digest& j_session);

    bool terminal() const { return terminal_; }
    const std::string& verdict() const { return verdict_; }
    const Bytes& recovered_file() const { return file_; }
    bool key_leg_open() const { return key_leg_open_; }
    const Digest& key_session() const { return key_session_; }
    const Digest& judge_session() const { return judge_session_; }

  private:
    ExchangeCommitment read_commitment(const Digest& j_session) {
        Bytes resp = rt_->view(id_, "J.read_commitment", digest_bytes(j_session));
        ExchangeCommitment cm;
        std::memcpy(cm.c.data(), resp.data(), 32);
        std::memcpy(cm.r_z.data(), resp.data() + 32, 32);
        std::memcpy(cm.r_phi.data(), resp.data() + 64, 32);
        cm.count = read_u16(resp, 96);
        cm.chunk_size = rt_->chunk_size;
        return cm;
    }

    Digest agreed_h1() {
        Bytes topic;
        append_u32(topic, did_);
        Bytes meta1 = rt_->view(id_, "S.read_meta1", topic, {}, "agreed file digest");
        Digest h1;
        std::memcpy(h1.data(), meta1.data() + 4, 32);
        return h1;
    }

    void try_finalize();

    Runtime* rt_;
    PartyId id_;
    ClientBehavior behavior_;
    DetRng rng_;
    PreKeyPair pre_keys_;
    uint16_t index_ = 0;

    uint32_t did_ = 0;
    Digest key_session_{};
    Digest judge_session_{};
    const SellerPackage* package_ = nullptr;  // received off-chain at exchange start
    ExchangeCommitment commitment_{};
    bool key_leg_open_ = false;
    bool key_leg_done_ = false;
    bool file_leg_done_ = false;
    bool have_k_f_ = false;
    Fp2 k_f_;
    Bytes fprime_;
    Bytes file_;
    std::string verdict_ = "pending";
    bool terminal_ = false;
};

// ---- late definitions (cross-actor calls) -------------------------------------

inline void FogActor::store_file(CloudActor& cloud, const std::vector<uint16_t>& policy) {
    file_ = build_file();
    nonce_ = rng_.bytes(8);
    fprime_ = sym_encrypt(file_key_, nonce_, file_);
    c_prime_ = pre_encrypt(*rt_->par, pre_keys_.pk, k_f_, rng_);
    Bytes c_prime_ser = ser_pre_ciphertext(*rt_->par, *c_prime_);

    Bytes upload = fprime_;
    if (behavior_ == FogBehavior::collude_forge_file) {
        // correct metadata on chain, corrupted file to the cloud; the true
        // digest list travels off-ledger to the colluding party
        ChunkedFile cf = chunk_file(fprime_, rt_->chunk_size);
        collusion_phi_ = chunk_digests(cf);
        collusion_len_ = fprime_.size();
        size_t chunk = rng_.next_u64() % cf.chunks.size();
        size_t off = rng_.next_u64() % rt_->chunk_size;
        size_t pos = chunk * rt_->chunk_size + off;
        if (pos >= upload.size()) pos = upload.size() - 1;
        upload[pos] ^= 0x01;
        rt_->trace->offchain(id_, cloud.party(), "collusion_phi",
                             32 * collusion_phi_.size() + 8);
        cloud.accept_collusion(did_, collusion_phi_, collusion_len_);
    }

    Digest h1 = file_digest(fprime_, rt_->chunk_size);
    Digest h2 = keccak256(c_prime_ser);

    // Alg order: nonce goes with AesEncrypt, then policy, then Meta1.
    Bytes payload;
    append_u32(payload, did_);
    append(payload, nonce_);
    rt_->submit(id_, "S.store_nonce", {}, payload, 0);

    payload.clear();
    append_u32(payload, did_);
    for (uint16_t c : policy) append_u16(payload, c);
    rt_->submit(id_, "S.store_access_policy", {}, payload, 0);

    payload.clear();
    append_u32(payload, did_);
    append(payload, ByteView(h1.data(), 32));
    append(payload, ByteView(h2.data(), 32));
    rt_->submit(id_, "S.store_meta1", {}, payload, 0);

    CloudActor* cl = &cloud;
    FogActor* self = this;
    uint32_t did = did_;
    Bytes up = std::move(upload);
    rt_->enqueue([cl, did, up, self] { cl->receive_file(did, up, *self); });
}

inline void FogActor::serve_key(uint16_t client_index, ClientActor& client,
                                CloudActor& cloud) {
    // an open key session implies the contract admitted the client (lock_p3
    // enforces the access policy), so the session lookup doubles as the
    // fog-side authorization guard
    Bytes skey_topic;
    append_u32(skey_topic, did_);
    append_u16(skey_topic, client_index);
    Bytes session_raw;
    try {
        session_raw = rt_->view(id_, "S.key_session", skey_topic, {}, "open session");
    } catch (const NotFoundError&) {
        rt_->trace->note(id_, "no admitted key session: request refused");
        ClientActor* c = &client;
        uint32_t did = did_;
        rt_->enqueue([c, did] { c->on_denied(did); });
        return;
    }
    Digest session;
    std::memcpy(session.data(), session_raw.data(), 32);

    Bytes who;
    append_u16(who, client_index);
    Bytes pk_c_raw = rt_->view(id_, "S.read_pk", who, {}, "pk_C");
    G1Point pk_c = rt_->par->de_g1(pk_c_raw);
    ReEncKey rk = pre_rekeygen(*rt_->par, pre_keys_.sk, pk_c, id_, client.party());

    ReCiphertext honest = pre_reencrypt(*rt_->par, rk, *c_prime_, rng_);
    ReCiphertext outgoing = honest;
    if (behavior_ == FogBehavior::tamper_reenc) {
        // correct c'' is hashed on chain, a different one goes to the client
        outgoing = pre_reencrypt(*rt_->par, rk, *c_prime_, rng_);
        rt_->trace->note(id_, "serving tampered re-encryption");
    }
    Bytes honest_ser = ser_re_ciphertext(*rt_->par, honest);
    Bytes out_ser = ser_re_ciphertext(*rt_->par, outgoing);
    Digest h3 = keccak256(honest_ser);

    Bytes payload;
    append_u32(payload, did_);
    append(payload, ByteView(h3.data(), 32));
    rt_->submit(id_, "S.store_meta2", digest_bytes(session), payload, 0);
    rt_->submit(id_, "S.lock_p4", digest_bytes(session), {}, rt_->fees.p4);

    rt_->trace->offchain(id_, client.party(), "c_doubleprime", out_ser.size());
    ClientActor* c = &client;
    rt_->enqueue([c, session, out_ser] { c->on_key_delivery(session, out_ser); });
}

inline void CloudActor::handle_request(uint32_t did, uint16_t client_index,
                                       ClientActor& client, FogActor& fog) {
    if (!has_file(did)) {
        rt_->trace->note(id_, "no stored file for DId " + std::to_string(did));
        ClientActor* c = &client;
        rt_->enqueue([c, did] { c->on_denied(did); });
        return;
    }
    if (behavior_ == CloudBehavior::grant_unauthorized) {
        rt_->trace->note(id_, "collusion: skipped access policy verification");
    } else {
        Bytes topic;
        append_u32(topic, did);
        Bytes who;
        append_u16(who, client_index);
        Bytes resp = rt_->view(id_, "S.compare_access_policy", topic, who, "access check");
        if (resp.empty() || resp[0] != 1) {
            rt_->trace->note(id_, "access policy rejected client " +
                                      std::to_string(client_index));
            ClientActor* c = &client;
            rt_->enqueue([c, did] { c->on_denied(did); });
            return;
        }
    }

    // retrieval begins: the client locks P3, the request is forwarded with
    // eps2, and the fair exchange starts; the two legs then interleave
    ClientActor* c = &client;
    rt_->trace->offchain(id_, client.party(), "retrieval_init", 6);
    rt_->enqueue([c, did] { c->on_retrieval_init(did); });

    Bytes fwd;
    append_u32(fwd, did);
    append_u16(fwd, client_index);
    rt_->trace->offchain(id_, fog.party(), "req_forward", fwd.size());
    rt_->transfer(id_, fog.party(), rt_->fees.eps2);
    FogActor* fg = &fog;
    rt_->enqueue([fg, client_index, c, this] { fg->serve_key(client_index, *c, *this); });

    CloudActor* self = this;
    rt_->enqueue([self, did, client_index, c] { self->init_exchange(did, client_index, *c); });
}

inline void CloudActor::init_exchange(uint32_t did, uint16_t client_index,
                                      ClientActor& client) {
    const Bytes& fprime = stored_.at(did);
    SymKey k{};
    rng_.fill(k.data(), k.size());

    CommitResult cr;
    if (auto cit = collusion_.find(did); cit != collusion_.end()) {
        // colluding with the fog: commit over the corrupted file with the true
        // digest list so the commitment still binds to Meta1
        ChunkedFile cf = chunk_file(fprime, rt_->chunk_size);
        cr = commit_from_chunks(cf.chunks, cit->second.len, cit->second.phi, k,
                                rt_->chunk_size);
    } else if (behavior_ == CloudBehavior::forward_forged_file) {
        size_t chunks = chunk_file(fprime, rt_->chunk_size).chunks.size();
        size_t victim = rng_.next_u64() % chunks;
        cr = seller_commit_corrupted(fprime, k, rt_->chunk_size, victim, 0x01,
                                     rng_.next_u64() % rt_->chunk_size);
        rt_->trace->note(id_, "forwarding forged chunk " + std::to_string(victim));
    } else {
        cr = seller_commit(fprime, k, rt_->chunk_size);
    }

    Bytes topic;
    append_u32(topic, did);
    append_u16(topic, client_index);
    Bytes payload = digest_bytes(cr.commitment.c);
    append(payload, ByteView(cr.commitment.r_z.data(), 32));
    append(payload, ByteView(cr.commitment.r_phi.data(), 32));
    append_u16(payload, cr.commitment.count);
    Receipt r = rt_->submit(id_, "J.create", topic, payload, rt_->fees.p2);
    Digest session;
    std::memcpy(session.data(), r.ret.data(), 32);

    ExchangeState st;
    st.did = did;
    st.k = k;
    st.commit = std::move(cr);
    st.buyer = &client;
    auto [it, _] = exchanges_.emplace(session, std::move(st));

    const SellerPackage* pkg = &it->second.commit.package;
    rt_->trace->offchain(id_, client.party(), "exchange_package", package_wire_size(*pkg),
                         pkg->file_len > kAeadTagSize ? pkg->file_len - kAeadTagSize : 0);
    ClientActor* c = &client;
    CloudActor* self = this;
    rt_->enqueue([c, session, pkg, self] { c->on_exchange_package(session, pkg, *self); });
}

inline void CloudActor::on_buyer_accepted(const Digest& session) {
    ExchangeState& st = exchanges_.at(session);
    if (behavior_ == CloudBehavior::withhold_key) {
        rt_->trace->note(id_, "withholding key after accept");
        return;
    }
    rt_->submit(id_, "J.reveal_key", digest_bytes(session),
                Bytes(st.k.begin(), st.k.end()), 0);
    st.revealed = true;
    ClientActor* c = st.buyer;
    CloudActor* self = this;
    rt_->enqueue([c, session, self] { c->on_key_revealed(session, *self); });
}

inline void CloudActor::on_buyer_rejected(const Digest& session) {
    ExchangeState& st = exchanges_.at(session);
    rt_->submit(id_, "J.abort", digest_bytes(session), {}, 0);
    st.terminal = true;
}

inline void CloudActor::settle_timeouts() {
    for (auto& [session, st] : exchanges_) {
        if (st.terminal) continue;
        Bytes phase = rt_->view(id_, "J.read_phase", digest_bytes(session));
        if (phase[0] == uint8_t(JudgePhase::key_revealed)) {
            Receipt r = rt_->submit(id_, "J.timeout_claim", digest_bytes(session), {}, 0);
            if (r.ok) st.terminal = true;
        } else if (phase[0] >= uint8_t(JudgePhase::settled_seller)) {
            st.terminal = true;
        }
    }
}

inline void ClientActor::on_exchange_package(const Digest& j_session,
                                             const SellerPackage* pkg, CloudActor& cloud) {
    judge_session_ = j_session;
    package_ = pkg;
    CloudActor* cl = &cloud;
    if (terminal_) {
        // already aborted (e.g. not in the access policy): never accept
        rt_->trace->offchain(id_, cloud.party(), "reject", 1);
        rt_->enqueue([cl, j_session] { cl->on_buyer_rejected(j_session); });
        return;
    }
    commitment_ = read_commitment(j_session);
    Digest h1 = agreed_h1();
    if (!buyer_verify_commitment(*pkg, commitment_, h1)) {
        rt_->trace->offchain(id_, cloud.party(), "reject", 1);
        rt_->trace->note(id_, "commitment rejected: aborting exchange");
        file_leg_done_ = true;
        verdict_ = "aborted-commitment";
        rt_->enqueue([cl, j_session] { cl->on_buyer_rejected(j_session); });
        try_finalize();
        return;
    }
    rt_->submit(id_, "J.accept", digest_bytes(j_session), Bytes{0x01}, rt_->fees.p1);
    rt_->enqueue([cl, j_session] { cl->on_buyer_accepted(j_session); });
}

inline void ClientActor::on_key_revealed(const Digest& j_session, CloudActor& cloud) {
    if (terminal_ || package_ == nullptr) return;
    (void)cloud;
    Bytes kraw = rt_->view(id_, "J.read_key", digest_bytes(j_session));
    SymKey k{};
    std::memcpy(k.data(), kraw.data(), k.size());
    const ExchangeCommitment& cm = commitment_;
    Digest h1 = agreed_h1();
    const SellerPackage& pkg = *package_;

    auto opened = buyer_open(pkg, cm, k, h1);
    if (std::holds_alternative<Bytes>(opened)) {
        fprime_ = std::get<Bytes>(std::move(opened));
        if (behavior_ == ClientBehavior::silent_after_key) {
            rt_->trace->note(id_, "going silent instead of deciding");
            file_leg_done_ = true;
            try_finalize();
            return;
        }
        if (behavior_ == ClientBehavior::false_complaint) {
            // fabricated evidence: the digest does not belong to the committed
            // tree, so path authentication must fail at the judge
            MisbehaviorProof forged;
            forged.index = 0;
            forged.z_i = pkg.z[0];
            forged.path_z = MerkleTree::build(z_leaves(pkg.z)).path(0);
            forged.expected_digest = keccak256("claimed-but-never-committed");
            forged.path_phi = MerkleTree::build(phi_leaves(pkg.phi)).path(0);
            Bytes payload{0x02};
            append(payload, ser_proof(forged));
            Receipt r = rt_->submit(id_, "J.decide", digest_bytes(j_session), payload, 0);
            rt_->trace->note(id_, std::string("false complaint ") +
                                      (r.ok && !r.ret.empty() && r.ret[0] == 1
                                           ? "accepted (!)"
                                           : "rejected"));
            verdict_ = "penalized";
            file_leg_done_ = true;
            try_finalize();
            return;
        }
        rt_->submit(id_, "J.decide", digest_bytes(j_session), Bytes{0x01}, 0);
        file_leg_done_ = true;
        try_finalize();
        return;
    }

    // honest complaint with Merkle-authenticated evidence
    const MisbehaviorProof& proof = std::get<MisbehaviorProof>(opened);
    Bytes payload{0x02};
    append(payload, ser_proof(proof));
    Receipt r = rt_->submit(id_, "J.decide", digest_bytes(j_session), payload, 0);
    if (r.ok && !r.ret.empty() && r.ret[0] == 1) {
        rt_->trace->note(id_, "complaint accepted for chunk " + std::to_string(proof.index));
        verdict_ = "compensated";
    } else {
        rt_->trace->note(id_, "complaint rejected");
    }
    file_leg_done_ = true;
    try_finalize();
}

inline void ClientActor::on_key_delivery(const Digest& key_session, Bytes c2_ser) {
    if (terminal_) return;
    Digest h3 = keccak256(c2_ser);
    Receipt r = rt_->submit(id_, "S.verify_key_hash", digest_bytes(key_session),
                            digest_bytes(h3), 0);
    key_leg_done_ = true;
    if (!r.ok || r.ret.empty() || r.ret[0] != 1) {
        rt_->trace->note(id_, "key hash verification failed: fog penalized");
        verdict_ = "compensated";
        try_finalize();
        return;
    }
    try {
        ReCiphertext c = de_re_ciphertext(*rt_->par, c2_ser);
        k_f_ = pre_decrypt(*rt_->par, pre_keys_.sk, c);
        have_k_f_ = true;
    } catch (const CryptoError& e) {
        rt_->trace->note(id_, std::string("re-encrypted key invalid: ") + e.what());
    }
    try_finalize();
}

inline void ClientActor::on_no_key_timeout(const Digest& j_session) {
    Receipt r = rt_->submit(id_, "J.refund_no_key", digest_bytes(j_session), {}, 0);
    if (r.ok) {
        rt_->trace->note(id_, "seller withheld key: refunded");
        verdict_ = "compensated";
        file_leg_done_ = true;
        terminal_ = true;
    }
}

inline void ClientActor::try_finalize() {
    if (!file_leg_done_ || !key_leg_done_) return;
    if (terminal_) return;
    if (!fprime_.empty() && have_k_f_) {
        Bytes topic;
        append_u32(topic, did_);
        Bytes nonce = rt_->view(id_, "S.read_nonce", topic, {}, "file nonce");
        SymKey fkey = kdf_symmetric_key(*rt_->par, k_f_);
        try {
            file_ = sym_decrypt(fkey, nonce, fprime_);
            if (verdict_ == "pending") verdict_ = "file-obtained";
        } catch (const IntegrityError&) {
            rt_->trace->note(id_, "file decryption failed");
            if (verdict_ == "pending") verdict_ = "compensated";
        }
    } else if (verdict_ == "pending") {
        verdict_ = "compensated";
    }
    terminal_ = true;
}

}  // namespace fairshare
