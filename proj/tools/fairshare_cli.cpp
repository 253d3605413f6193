// Scenario-runner CLI: run one scenario, sweep file sizes and client counts,
// replay the adversarial case table, or exercise the invariant self-tests.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "fairshare/fairshare.hpp"

namespace {

using namespace fairshare;

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    in >> j;
    ScenarioConfig cfg;
    cfg.seed = j.value("seed", cfg.seed);
    cfg.lambda = j.value("lambda", cfg.lambda);
    cfg.file_size = j.value("file_size", cfg.file_size);
    cfg.chunk_size = j.value("chunk_size", cfg.chunk_size);
    cfg.window_len = j.value("window_len", cfg.window_len);
    cfg.clients = j.value("clients", cfg.clients);
    cfg.fogs = j.value("fogs", cfg.fogs);
    cfg.ts = j.value("ts", cfg.ts);
    cfg.initial_balance = j.value("initial_balance", cfg.initial_balance);
    if (j.contains("fees")) {
        const auto& f = j["fees"];
        cfg.fees.p1 = f.value("p1", cfg.fees.p1);
        cfg.fees.p2 = f.value("p2", cfg.fees.p2);
        cfg.fees.p3 = f.value("p3", cfg.fees.p3);
        cfg.fees.p4 = f.value("p4", cfg.fees.p4);
        cfg.fees.eps1 = f.value("eps1", cfg.fees.eps1);
        cfg.fees.eps2 = f.value("eps2", cfg.fees.eps2);
        cfg.fees.register_deposit = f.value("register_deposit", cfg.fees.register_deposit);
    }
    if (j.contains("gas")) {
        for (auto& [k, v] : j["gas"].items()) {
            if (k == "gas_price")
                cfg.gas.gas_price = v.get<uint64_t>();
            else
                cfg.gas.cost[k] = v.get<uint64_t>();
        }
    }
    if (j.contains("strategies")) {
        const auto& s = j["strategies"];
        if (s.contains("fog")) cfg.fog_behavior = fog_behavior_from(s["fog"]);
        if (s.contains("cloud")) cfg.cloud_behavior = cloud_behavior_from(s["cloud"]);
        if (s.contains("client")) cfg.client_behavior = client_behavior_from(s["client"]);
        cfg.case_name = "custom";
    }
    if (j.contains("case")) cfg.case_name = j["case"].get<std::string>();
    return cfg;
}

void apply_gas_file(ScenarioConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open gas schedule: " + path);
    nlohmann::json j;
    in >> j;
    for (auto& [k, v] : j.items()) {
        if (k == "gas_price")
            cfg.gas.gas_price = v.get<uint64_t>();
        else
            cfg.gas.cost[k] = v.get<uint64_t>();
    }
}

void write_report(const ScenarioReport& rep, const std::string& path) {
    if (path.empty()) return;
    std::ofstream out(path);
    out << rep.to_json().dump(2) << "\n";
}

void print_summary(const ScenarioReport& rep) {
    std::cout << "case=" << rep.config.case_name << " seed=" << rep.config.seed
              << " file=" << rep.config.file_size << "B tx=" << rep.tx_count
              << " gas=" << rep.gas_total
              << " conservation=" << (rep.conservation ? "ok" : "VIOLATED") << "\n";
    for (const auto& [id, o] : rep.parties) {
        if (id == "T") continue;
        std::cout << "  " << id << " (" << o.role << "): delta=" << o.delta_excl_gas
                  << " gas=" << o.gas_paid;
        if (o.verdict != "n/a") std::cout << " verdict=" << o.verdict;
        std::cout << "\n";
    }
    std::cout << "  bytes: retrieval=" << rep.bytes.retrieval_total
              << " (file " << rep.bytes.retrieval_file << " + key "
              << rep.bytes.retrieval_key << ")"
              << " onchain-overhead=" << rep.bytes.onchain_constant_overhead << "\n";
    if (!rep.mismatches.empty()) {
        for (const auto& m : rep.mismatches) std::cout << "  MISMATCH: " << m << "\n";
    }
}

int cmd_run(ScenarioConfig cfg, const std::string& report_path) {
    ScenarioReport rep = run_scenario(cfg);
    print_summary(rep);
    write_report(rep, report_path);
    return rep.expected_match ? 0 : 1;
}

int cmd_cases(ScenarioConfig base, const std::string& report_path) {
    bool all_ok = true;
    nlohmann::ordered_json all = nlohmann::ordered_json::array();
    for (const std::string name : {"honest", "I", "II", "III", "IV", "V", "VI"}) {
        ScenarioReport rep = run_scenario(configure_case(base, name));
        print_summary(rep);
        all.push_back(rep.to_json());
        all_ok = all_ok && rep.expected_match;
    }
    if (!report_path.empty()) {
        std::ofstream out(report_path);
        out << all.dump(2) << "\n";
    }
    std::cout << (all_ok ? "all case outcomes match the payout table"
                         : "CASE TABLE MISMATCH")
              << "\n";
    return all_ok ? 0 : 1;
}

int cmd_sweep(ScenarioConfig base, std::vector<uint64_t> sizes,
              std::vector<uint32_t> client_counts, const std::string& report_path) {
    if (sizes.empty()) sizes = {1024, 10240, 102400, 1048576, 10485760};
    if (client_counts.empty()) client_counts = {base.clients};
    auto reports = sweep(base, sizes, client_counts);
    bool ok = true;
    nlohmann::ordered_json all = nlohmann::ordered_json::array();
    for (const auto& rep : reports) {
        uint64_t expect = rep.config.file_size + 3 * rep.element_size;
        std::cout << "size=" << rep.config.file_size << " clients=" << rep.config.clients
                  << " retrieval=" << rep.bytes.retrieval_total << " (expect " << expect
                  << ") onchain-overhead=" << rep.bytes.onchain_constant_overhead
                  << " tx=" << rep.tx_count << "\n";
        ok = ok && rep.expected_match && rep.bytes.retrieval_total == expect;
        all.push_back(rep.to_json());
    }
    if (!report_path.empty()) {
        std::ofstream out(report_path);
        out << all.dump(2) << "\n";
    }
    return ok ? 0 : 1;
}

int cmd_selftest(ScenarioConfig base) {
    int failures = 0;
    auto check = [&](const std::string& name, bool ok) {
        std::cout << (ok ? "[ ok ] " : "[FAIL] ") << name << "\n";
        if (!ok) ++failures;
    };

    // re-encryption round trips
    {
        PublicParams par = setup_params(base.lambda, base.seed);
        DetRng rng(base.seed + 1);
        bool ok = true;
        PreKeyPair fog = pre_keygen(par, rng), cli = pre_keygen(par, rng);
        ReEncKey rk = pre_rekeygen(par, fog.sk, cli.pk);
        for (int i = 0; i < 25 && ok; ++i) {
            Fp2 k = random_gt_element(par, rng);
            ReCiphertext c =
                pre_reencrypt(par, rk, pre_encrypt(par, fog.pk, k, rng), rng);
            ok = pre_decrypt(par, cli.sk, c) == k;
        }
        check("re-encryption round trips", ok);
    }
    // misbehavior proofs on corrupted chunks
    {
        DetRng rng(base.seed + 2);
        SymKey k{};
        rng.fill(k.data(), k.size());
        Bytes file = rng.bytes(40000);
        Digest h1 = file_digest(file, 4096);
        bool ok = true;
        for (int i = 0; i < 10 && ok; ++i) {
            size_t victim = rng.next_u64() % 10;
            CommitResult cr = seller_commit_corrupted(file, k, 4096, victim);
            auto opened = buyer_open(cr.package, cr.commitment, k, h1);
            ok = std::holds_alternative<MisbehaviorProof>(opened) &&
                 judge_verify_proof(cr.commitment, k,
                                    std::get<MisbehaviorProof>(opened));
        }
        check("misbehavior proofs accepted", ok);
    }
    // case table + conservation
    {
        bool ok = true;
        for (const std::string name : {"honest", "I", "II", "III", "IV", "V", "VI"}) {
            ScenarioReport rep = run_scenario(configure_case(base, name));
            ok = ok && rep.expected_match && rep.conservation;
        }
        check("case payout table and conservation", ok);
    }
    // determinism
    {
        ScenarioReport a = run_scenario(base);
        ScenarioReport b = run_scenario(base);
        check("identical seeds give identical reports",
              a.trace_digest == b.trace_digest &&
                  a.to_json().dump() == b.to_json().dump());
    }
    std::cout << (failures == 0 ? "selftest passed" : "selftest FAILED") << "\n";
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"FairShare protocol simulator"};
    app.require_subcommand(1);

    std::string config_path, report_path, gas_path, case_name;
    uint64_t seed = 0;
    uint64_t file_size = 0;
    std::vector<uint64_t> sizes;
    std::vector<uint32_t> client_counts;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "scenario config (JSON)");
        cmd->add_option("--seed", seed, "override the scenario seed");
        cmd->add_option("--file-size", file_size, "override the file size in bytes");
        cmd->add_option("--case", case_name, "honest|I|II|III|IV|V|VI");
        cmd->add_option("--report", report_path, "write the report document here");
        cmd->add_option("--gas-schedule", gas_path, "gas schedule override (JSON)");
    };

    CLI::App* run = app.add_subcommand("run", "run one scenario");
    add_common(run);
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "sweep file sizes / client counts");
    add_common(sweep_cmd);
    sweep_cmd->add_option("--sizes", sizes, "file sizes in bytes");
    sweep_cmd->add_option("--clients", client_counts, "client counts");
    CLI::App* cases = app.add_subcommand("cases", "run the six adversarial cases");
    add_common(cases);
    CLI::App* selftest = app.add_subcommand("selftest", "run the invariant suites");
    add_common(selftest);

    CLI11_PARSE(app, argc, argv);

    try {
        fairshare::ScenarioConfig cfg;
        if (!config_path.empty()) cfg = load_config(config_path);
        if (!gas_path.empty()) apply_gas_file(cfg, gas_path);
        if (seed != 0) cfg.seed = seed;
        if (file_size != 0) cfg.file_size = file_size;
        if (!case_name.empty()) cfg = fairshare::configure_case(cfg, case_name);

        if (run->parsed()) return cmd_run(cfg, report_path);
        if (sweep_cmd->parsed()) return cmd_sweep(cfg, sizes, client_counts, report_path);
        if (cases->parsed()) return cmd_cases(cfg, report_path);
        if (selftest->parsed()) return cmd_selftest(cfg);
    } catch (const fairshare::ConfigError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
