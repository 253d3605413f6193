#pragma once

#include <nlohmann/json.hpp>

#include <memory>

#include "fairshare/parties.hpp"

namespace fairshare {

using OrderedJson = nlohmann::ordered_json;

// ---- configuration -----------------------------------------------------------

struct ScenarioConfig {
    uint64_t seed = 1;
    unsigned lambda = 128;
    uint64_t file_size = 1024;
    uint32_t chunk_size = kDefaultChunkSize;
    uint32_t window_len = 4;
    uint32_t clients = 1;
    uint32_t fogs = 1;
    uint64_t ts = 64;
    Coins initial_balance = 10'000'000;
    FeeSchedule fees;
    GasSchedule gas = GasSchedule::defaults();
    ControllerTerms terms;
    FogBehavior fog_behavior = FogBehavior::honest;
    CloudBehavior cloud_behavior = CloudBehavior::honest;
    ClientBehavior client_behavior = ClientBehavior::honest;
    std::string case_name = "honest";

    // Summary records are 16 header bytes plus one i32 mean per channel; the
    // runner sizes the sensor stream so the summarized file lands exactly on
    // file_size bytes.
    struct RecordShape {
        uint32_t record_count = 0;
        uint32_t record_size = 0;
        uint32_t channels = 0;
    };

    RecordShape record_shape() const {
        for (uint32_t rc = uint32_t(std::min<uint64_t>(64, file_size / 20)); rc >= 1; --rc) {
            if (file_size % rc != 0) continue;
            uint64_t rs = file_size / rc;
            if (rs < kRecordHeader + 4) continue;
            if ((rs - kRecordHeader) % 4 != 0) continue;
            return RecordShape{rc, uint32_t(rs), uint32_t((rs - kRecordHeader) / 4)};
        }
        throw ConfigError("file_size " + std::to_string(file_size) +
                          " not expressible as summary records");
    }

    void validate() const {
        if (file_size < 1) throw ConfigError("file_size must be >= 1");
        if (chunk_size == 0) throw ConfigError("chunk_size must be positive");
        if (clients < 1 || fogs < 1) throw ConfigError("need at least one client and fog");
        if (window_len < 1) throw ConfigError("window_len must be >= 1");
        if (ts < 8) throw ConfigError("ts too small for the transaction schedule");
        record_shape();  // throws when inexpressible
        if ((file_size + kAeadTagSize + chunk_size - 1) / chunk_size > kMaxChunkCount)
            throw ConfigError("file too large for the chunk-count limit");
    }
};

inline FogBehavior fog_behavior_from(const std::string& s) {
    if (s == "honest") return FogBehavior::honest;
    if (s == "tamper-reenc") return FogBehavior::tamper_reenc;
    if (s == "collude-forge-file") return FogBehavior::collude_forge_file;
    throw ConfigError("unknown fog strategy: " + s);
}

inline CloudBehavior cloud_behavior_from(const std::string& s) {
    if (s == "honest") return CloudBehavior::honest;
    if (s == "tamper-file-claim") return CloudBehavior::tamper_file_claim;
    if (s == "forward-forged-file") return CloudBehavior::forward_forged_file;
    if (s == "withhold-key") return CloudBehavior::withhold_key;
    if (s == "grant-unauthorized") return CloudBehavior::grant_unauthorized;
    if (s == "collude-with-fog") return CloudBehavior::collude_with_fog;
    throw ConfigError("unknown cloud strategy: " + s);
}

inline ClientBehavior client_behavior_from(const std::string& s) {
    if (s == "honest") return ClientBehavior::honest;
    if (s == "unauthorized-request") return ClientBehavior::unauthorized_request;
    if (s == "false-complaint") return ClientBehavior::false_complaint;
    if (s == "silent-after-key") return ClientBehavior::silent_after_key;
    if (s == "collude-with-fog") return ClientBehavior::collude_with_fog;
    throw ConfigError("unknown client strategy: " + s);
}

// The six adversarial cases plus the honest baseline.
inline ScenarioConfig configure_case(ScenarioConfig base, const std::string& name) {
    base.case_name = name;
    base.fog_behavior = FogBehavior::honest;
    base.cloud_behavior = CloudBehavior::honest;
    base.client_behavior = ClientBehavior::honest;
    if (name == "honest") return base;
    if (name == "I") {
        base.fog_behavior = FogBehavior::tamper_reenc;
    } else if (name == "II") {
        base.cloud_behavior = CloudBehavior::forward_forged_file;
    } else if (name == "III") {
        base.client_behavior = ClientBehavior::unauthorized_request;
    } else if (name == "IV") {
        base.fog_behavior = FogBehavior::collude_forge_file;
        base.cloud_behavior = CloudBehavior::collude_with_fog;
    } else if (name == "V") {
        base.fog_behavior = FogBehavior::tamper_reenc;
        base.client_behavior = ClientBehavior::collude_with_fog;
    } else if (name == "VI") {
        base.cloud_behavior = CloudBehavior::grant_unauthorized;
        base.client_behavior = ClientBehavior::unauthorized_request;
    } else {
        throw ConfigError("unknown case: " + name);
    }
    return base;
}

// ---- expected outcomes (the case-outcome payout table) -------------------------

struct ExpectedOutcome {
    std::map<PartyId, int64_t> deltas;  // gas excluded
    std::string client_verdict;
    bool escrow_moves = true;
};

inline ExpectedOutcome expected_for_case(const std::string& name, const FeeSchedule& f) {
    const int64_t p1 = int64_t(f.p1), p2 = int64_t(f.p2), p3 = int64_t(f.p3),
                  p4 = int64_t(f.p4), e1 = int64_t(f.eps1), e2 = int64_t(f.eps2);
    ExpectedOutcome out;
    auto set = [&](int64_t cl, int64_t fog, int64_t c, std::string verdict, bool moves) {
        out.deltas = {{"Cl", cl}, {"F1", fog}, {"C1", c}, {"T", 0}};
        out.client_verdict = std::move(verdict);
        out.escrow_moves = moves;
    };
    if (name == "honest")
        set(p1 + e1 - e2, p3 + e2, -p1 - p3 - e1, "file-obtained", true);
    else if (name == "I" || name == "V")
        set(p1 + e1 - e2, e2 - p4, p4 - p1 - e1, "compensated", true);
    else if (name == "II" || name == "IV")
        set(e1 - e2 - p2, p3 + e2, p2 - p3 - e1, "compensated", true);
    else if (name == "III")
        set(e1, 0, -e1, "aborted-unauthorized", false);
    else if (name == "VI")
        set(e1 - e2, e2, -e1, "aborted-unauthorized", false);
    else
        throw ConfigError("no expected outcome for case " + name);
    return out;
}

// ---- report ---------------------------------------------------------------------

struct PhaseBytes {
    uint64_t generation_envelopes = 0;
    uint64_t generation_payload = 0;
    uint64_t generation_overhead = 0;
    uint64_t generation_wire = 0;
    uint64_t feedback = 0;
    uint64_t storage_upload = 0;
    uint64_t request = 0;
    uint64_t retrieval_file = 0;
    uint64_t retrieval_key = 0;
    uint64_t retrieval_total = 0;
    uint64_t exchange_extra = 0;
    uint64_t offchain_other = 0;
    uint64_t onchain_storage_parity = 0;
    uint64_t onchain_retrieval_parity = 0;
    uint64_t onchain_constant_overhead = 0;
    uint64_t onchain_total_payload = 0;
    uint64_t onchain_reads = 0;
};

struct PartyOutcome {
    std::string role;
    std::string verdict;
    int64_t delta = 0;           // balance change including gas
    uint64_t gas_paid = 0;       // coins burned by this party
    int64_t delta_excl_gas = 0;  // protocol-level payout delta
};

struct ScenarioReport {
    ScenarioConfig config;
    uint64_t element_size = 0;
    std::map<PartyId, PartyOutcome> parties;
    PhaseBytes bytes;
    std::map<std::string, uint64_t> gas_per_call;
    std::map<std::string, uint64_t> gas_per_phase;
    uint64_t gas_total = 0;
    uint64_t tx_count = 0;
    uint64_t burned = 0;
    Coins escrowed_final = 0;
    bool conservation = false;
    bool expected_match = false;
    std::vector<std::string> mismatches;
    Digest trace_digest{};
    Digest state_hash{};
    std::string trace_text;
    std::string ledger_text;

    OrderedJson to_json() const {
        OrderedJson j;
        j["scenario"] = {{"case", config.case_name},
                         {"seed", config.seed},
                         {"lambda", config.lambda},
                         {"element_size", element_size},
                         {"file_size", config.file_size},
                         {"chunk_size", config.chunk_size},
                         {"clients", config.clients},
                         {"fogs", config.fogs},
                         {"ts", config.ts}};
        j["fees"] = {{"p1", config.fees.p1},   {"p2", config.fees.p2},
                     {"p3", config.fees.p3},   {"p4", config.fees.p4},
                     {"eps1", config.fees.eps1}, {"eps2", config.fees.eps2}};
        OrderedJson jp = OrderedJson::object();
        for (const auto& [id, o] : parties) {
            jp[id] = {{"role", o.role},
                      {"verdict", o.verdict},
                      {"delta", o.delta},
                      {"gas_paid", o.gas_paid},
                      {"delta_excl_gas", o.delta_excl_gas}};
        }
        j["parties"] = jp;
        j["bytes"] = {
            {"data_generation",
             {{"envelopes", bytes.generation_envelopes},
              {"payload", bytes.generation_payload},
              {"overhead", bytes.generation_overhead},
              {"wire", bytes.generation_wire},
              {"feedback", bytes.feedback}}},
            {"data_storage", {{"file_upload", bytes.storage_upload}}},
            {"data_request", {{"req", bytes.request}}},
            {"data_retrieval",
             {{"file", bytes.retrieval_file},
              {"key", bytes.retrieval_key},
              {"total", bytes.retrieval_total},
              {"exchange_extra", bytes.exchange_extra}}},
            {"offchain_other", bytes.offchain_other},
            {"onchain",
             {{"storage_parity", bytes.onchain_storage_parity},
              {"retrieval_parity", bytes.onchain_retrieval_parity},
              {"constant_overhead", bytes.onchain_constant_overhead},
              {"total_payload", bytes.onchain_total_payload},
              {"reads", bytes.onchain_reads}}}};
        OrderedJson jg = OrderedJson::object();
        for (const auto& [k, v] : gas_per_phase) jg[k] = v;
        OrderedJson jc = OrderedJson::object();
        for (const auto& [k, v] : gas_per_call) jc[k] = v;
        j["gas"] = {{"per_phase", jg}, {"per_call", jc}, {"total", gas_total}};
        j["chain"] = {{"tx_count", tx_count},
                      {"burned", burned},
                      {"escrowed_final", escrowed_final},
                      {"conservation", conservation},
                      {"state_hash", to_hex(state_hash)},
                      {"trace_digest", to_hex(trace_digest)}};
        j["expected_match"] = expected_match;
        j["mismatches"] = mismatches;
        return j;
    }
};

// ---- accounting -------------------------------------------------------------------

inline bool parity_storage_call(const std::string& target) {
    return target == "S.store_nonce" || target == "S.store_meta1" ||
           target == "S.store_access_policy";
}

inline bool parity_retrieval_call(const std::string& target) {
    return target == "S.store_meta2" || target == "J.create" || target == "J.accept" ||
           target == "J.reveal_key" || target == "J.decide";
}

inline PhaseBytes byte_accounting(const std::vector<TraceEvent>& events) {
    PhaseBytes b;
    for (const auto& e : events) {
        switch (e.kind) {
            case TraceEvent::Kind::offchain:
                if (e.label == "envelope") {
                    b.generation_envelopes += 1;
                    b.generation_wire += e.bytes;
                    b.generation_payload += e.aux;
                    b.generation_overhead += e.bytes - e.aux;
                } else if (e.label == "feedback") {
                    b.feedback += e.bytes;
                } else if (e.label == "file_upload") {
                    b.storage_upload += e.bytes;
                } else if (e.label == "access_request") {
                    b.request += e.bytes;
                } else if (e.label == "exchange_package") {
                    b.retrieval_file += e.aux;
                    b.exchange_extra += e.bytes - e.aux;
                } else if (e.label == "c_doubleprime") {
                    b.retrieval_key += e.bytes;
                } else {
                    b.offchain_other += e.bytes;
                }
                break;
            case TraceEvent::Kind::onchain:
                b.onchain_total_payload += e.bytes;
                if (e.ok && parity_storage_call(e.label)) b.onchain_storage_parity += e.bytes;
                if (e.ok && parity_retrieval_call(e.label))
                    b.onchain_retrieval_parity += e.bytes;
                if (e.ok && e.label == "S.verify_key_hash")
                    b.onchain_retrieval_parity += e.aux;  // the 1-byte verdict
                break;
            case TraceEvent::Kind::view:
                b.onchain_reads += e.bytes;
                if (e.label == "S.compare_access_policy") b.onchain_retrieval_parity += e.bytes;
                break;
            case TraceEvent::Kind::note:
                break;
        }
    }
    b.retrieval_total = b.retrieval_file + b.retrieval_key;
    b.onchain_constant_overhead = b.onchain_storage_parity + b.onchain_retrieval_parity;
    return b;
}

struct GasReport {
    std::map<std::string, uint64_t> per_call;
    std::map<std::string, uint64_t> per_phase;
    uint64_t total = 0;
};

inline GasReport gas_accounting(const std::vector<Transaction>& log,
                                const GasSchedule& schedule) {
    GasReport r;
    for (const auto& tx : log) {
        uint64_t expect = schedule.lookup(tx.target);  // AccountingError when missing
        (void)expect;
        r.per_call[tx.target] += tx.gas_used;
        r.per_phase[gas_phase_of(tx.target)] += tx.gas_used;
        r.total += tx.gas_used;
    }
    return r;
}

// ---- chain construction -------------------------------------------------------------

// The simulated chain for one scenario: genesis accounts, the two contracts
// and the ledger hosting them. Building it separately lets tests replay an
// exported log against a fresh instance.
struct Chain {
    std::map<PartyId, Coins> genesis;
    std::unique_ptr<ControllerContract> controller;
    std::unique_ptr<JudgeContract> judge;
    std::unique_ptr<Ledger> ledger;
};

inline Chain make_chain(const ScenarioConfig& cfg) {
    Chain ch;
    ch.genesis["T"] = cfg.initial_balance;
    ch.genesis["Cl"] = cfg.initial_balance;
    for (uint32_t i = 1; i <= cfg.fogs; ++i)
        ch.genesis["F" + std::to_string(i)] = cfg.initial_balance;
    for (uint32_t i = 1; i <= cfg.clients; ++i)
        ch.genesis["C" + std::to_string(i)] = cfg.initial_balance;
    ch.ledger = std::make_unique<Ledger>(cfg.gas, ch.genesis);
    ch.controller = std::make_unique<ControllerContract>(cfg.terms);
    ControllerContract* s = ch.controller.get();
    ch.judge = std::make_unique<JudgeContract>(
        cfg.ts, cfg.chunk_size, [s](uint16_t idx) -> PartyId {
            const auto& st = s->state();
            auto it = st.by_index.find(idx);
            return it == st.by_index.end() ? PartyId{} : it->second;
        });
    ch.ledger->register_contract(ch.controller.get());
    ch.ledger->register_contract(ch.judge.get());
    return ch;
}

// ---- runner -----------------------------------------------------------------------

class ScenarioRunner {
  public:
    explicit ScenarioRunner(ScenarioConfig cfg) : cfg_(std::move(cfg)) {
        cfg_.validate();
        root_ = std::make_unique<DetRng>(cfg_.seed);
        par_ = std::make_unique<PublicParams>(
            setup_params(cfg_.lambda, root_->child("params").next_u64()));
        chain_ = make_chain(cfg_);

        rt_.par = par_.get();
        rt_.ledger = chain_.ledger.get();
        rt_.trace = &trace_;
        rt_.queue = &queue_;
        rt_.fees = cfg_.fees;
        rt_.ts = cfg_.ts;
        rt_.chunk_size = cfg_.chunk_size;
    }

    ScenarioReport run() {
        setup_parties();
        generation_phase();
        request_phase();
        drain();
        timeout_sweep();
        return collect();
    }

    Ledger& ledger() { return *chain_.ledger; }
    const PublicParams& params() const { return *par_; }
    TraceLog& trace() { return trace_; }

  private:
    void setup_parties() {
        // controller deployment with the parameter digest
        Bytes payload = digest_bytes(par_->params_digest());
        Bytes code_ref = digest_bytes(keccak256("fairshare.controller.v1"));
        append(payload, code_ref);
        rt_.submit("T", "S.register_params", {}, payload, 0);

        for (uint32_t i = 1; i <= cfg_.fogs; ++i) {
            uint32_t did = (i << 16) | 1;
            FogBehavior b = (i == 1) ? cfg_.fog_behavior : FogBehavior::honest;
            fogs_.push_back(std::make_unique<FogActor>(
                rt_, "F" + std::to_string(i), did, b, root_->child("fog:" + std::to_string(i))));
            fogs_.back()->register_on_chain();
        }
        cloud_ = std::make_unique<CloudActor>(rt_, cfg_.cloud_behavior, root_->child("cloud"));
        cloud_->register_on_chain();
        for (uint32_t i = 1; i <= cfg_.clients; ++i) {
            ClientBehavior b = (i == 1) ? cfg_.client_behavior : ClientBehavior::honest;
            clients_.push_back(std::make_unique<ClientActor>(
                rt_, "C" + std::to_string(i), b, root_->child("client:" + std::to_string(i))));
            clients_.back()->register_on_chain();
        }
        for (uint32_t i = 0; i < cfg_.fogs; ++i) {
            devices_.push_back(std::make_unique<DeviceActor>(
                rt_, fogs_[i]->did(), fogs_[i]->asym_pk(),
                root_->child("device:" + std::to_string(i + 1))));
            fogs_[i]->provision_device(devices_.back()->identity().did,
                                       devices_.back()->identity().keys.pk);
        }
    }

    void generation_phase() {
        auto shape = cfg_.record_shape();
        for (uint32_t i = 0; i < cfg_.fogs; ++i) {
            DetRng sensor = root_->child("sensor:" + std::to_string(i + 1));
            for (uint32_t w = 0; w < shape.record_count; ++w) {
                std::vector<int32_t> samples(size_t(shape.channels) * cfg_.window_len);
                for (auto& s : samples)
                    s = int32_t(sensor.next_u64() % (1u << 20));
                Bytes m = encode_reading(w, cfg_.window_len, samples);
                Envelope env = devices_[i]->emit(m);
                fogs_[i]->ingest(env, devices_[i].get());
            }
            // access policy per config: unauthorized clients stay outside rho
            std::vector<uint16_t> policy;
            for (const auto& c : clients_)
                if (c->behavior() != ClientBehavior::unauthorized_request)
                    policy.push_back(c->registry_index());
            if (policy.empty()) policy.push_back(0xffff);  // nobody authorized
            fogs_[i]->store_file(*cloud_, policy);
        }
        drain();
    }

    void request_phase() {
        for (auto& c : clients_) c->request(fogs_[0]->did(), *cloud_, *fogs_[0]);
        drain();
    }

    void drain() {
        uint64_t steps = 0;
        while (!queue_.empty()) {
            auto fn = std::move(queue_.front());
            queue_.pop_front();
            fn();
            if (++steps > 100000) throw AccountingError("event loop failed to quiesce");
        }
    }

    // Silent parties leave sessions pending; advancing the clock past the
    // deadline lets the other side settle. Bounded, so every scenario
    // reaches a terminal state.
    void timeout_sweep() {
        for (int round = 0; round < 8; ++round) {
            bool pending = false;
            for (const auto& [session, st] : cloud_->exchanges()) {
                Bytes phase = chain_.ledger->view("J.read_phase", digest_bytes(session));
                JudgePhase p = JudgePhase(phase[0]);
                if (p == JudgePhase::accepted || p == JudgePhase::key_revealed)
                    pending = true;
            }
            if (!pending) return;
            chain_.ledger->advance_time(cfg_.ts + 1);
            for (const auto& [session, st] : cloud_->exchanges()) {
                Bytes phase = chain_.ledger->view("J.read_phase", digest_bytes(session));
                JudgePhase p = JudgePhase(phase[0]);
                if (p == JudgePhase::accepted && st.buyer != nullptr)
                    st.buyer->on_no_key_timeout(session);
            }
            cloud_->settle_timeouts();
            drain();
        }
        throw AccountingError("scenario failed to reach a terminal state");
    }

    ScenarioReport collect() {
        ScenarioReport rep;
        rep.config = cfg_;
        rep.element_size = par_->element_size();

        std::map<PartyId, uint64_t> gas_paid;
        for (const auto& tx : chain_.ledger->log())
            gas_paid[tx.sender] += tx.gas_used * cfg_.gas.gas_price;

        for (const auto& [id, start] : chain_.genesis) {
            PartyOutcome o;
            o.role = id == "T"    ? "authority"
                     : id == "Cl" ? "cloud"
                     : id[0] == 'F' ? "fog"
                                    : "client";
            o.gas_paid = gas_paid.count(id) ? gas_paid[id] : 0;
            o.delta = int64_t(chain_.ledger->balance(id)) - int64_t(start);
            o.delta_excl_gas = o.delta + int64_t(o.gas_paid);
            o.verdict = "n/a";
            rep.parties[id] = o;
        }
        for (const auto& c : clients_) rep.parties[c->party()].verdict = c->verdict();

        rep.bytes = byte_accounting(trace_.events());
        GasReport gr = gas_accounting(chain_.ledger->log(), cfg_.gas);
        rep.gas_per_call = gr.per_call;
        rep.gas_per_phase = gr.per_phase;
        rep.gas_total = gr.total;
        rep.tx_count = chain_.ledger->log().size();
        rep.burned = chain_.ledger->burned();
        rep.escrowed_final = chain_.ledger->total_escrowed();
        rep.conservation = chain_.ledger->conservation_holds();
        rep.state_hash = chain_.ledger->state_hash();
        rep.ledger_text = chain_.ledger->export_log();
        rep.trace_text = trace_.export_text() + rep.ledger_text;
        rep.trace_digest = keccak256(rep.trace_text);

        // canonical cases carry asserted outcomes
        try {
            ExpectedOutcome exp = expected_for_case(cfg_.case_name, cfg_.fees);
            rep.expected_match = true;
            if (cfg_.clients == 1 && cfg_.fogs == 1) {
                for (const auto& [id, want] : exp.deltas) {
                    int64_t got = rep.parties.at(id).delta_excl_gas;
                    if (got != want) {
                        rep.expected_match = false;
                        rep.mismatches.push_back("delta[" + id + "]=" + std::to_string(got) +
                                                 " expected " + std::to_string(want));
                    }
                }
                const std::string& v = rep.parties.at("C1").verdict;
                if (v != exp.client_verdict) {
                    rep.expected_match = false;
                    rep.mismatches.push_back("verdict=" + v + " expected " +
                                             exp.client_verdict);
                }
            }
            if (!rep.conservation) {
                rep.expected_match = false;
                rep.mismatches.push_back("coin conservation violated");
            }
        } catch (const ConfigError&) {
            rep.expected_match = rep.conservation;
        }
        return rep;
    }

    ScenarioConfig cfg_;
    std::unique_ptr<DetRng> root_;
    std::unique_ptr<PublicParams> par_;
    Chain chain_;
    TraceLog trace_;
    std::deque<std::function<void()>> queue_;
    Runtime rt_;
    std::vector<std::unique_ptr<FogActor>> fogs_;
    std::unique_ptr<CloudActor> cloud_;
    std::vector<std::unique_ptr<ClientActor>> clients_;
    std::vector<std::unique_ptr<DeviceActor>> devices_;
};

inline ScenarioReport run_scenario(const ScenarioConfig& cfg) {
    ScenarioRunner runner(cfg);
    return runner.run();
}

// One report per (size, clients) pair.
inline std::vector<ScenarioReport> sweep(const ScenarioConfig& base,
                                         const std::vector<uint64_t>& sizes,
                                         const std::vector<uint32_t>& client_counts) {
    if (sizes.empty()) throw ConfigError("sweep needs at least one size");
    std::vector<ScenarioReport> out;
    for (uint64_t sz : sizes) {
        for (uint32_t n : client_counts.empty() ? std::vector<uint32_t>{base.clients}
                                                : client_counts) {
            ScenarioConfig cfg = base;
            cfg.file_size = sz;
            cfg.clients = n;
            out.push_back(run_scenario(cfg));
        }
    }
    return out;
}

}  // namespace fairshare
