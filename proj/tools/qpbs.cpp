// Command-line front end: run the signature protocols, inject attacks, drive
// the Monte Carlo experiments, regenerate the correction tables, and replay
// transcript files.
//
// Exit codes: 0 accepted/pass, 1 rejected/fail, 2 usage error, 3 internal
// invariant violation.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qpbs/protocol.hpp"
#include "qpbs/stats.hpp"
#include "qpbs/teleport.hpp"
#include "qpbs/transcript.hpp"

namespace {

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.good()) {
        throw std::invalid_argument("cannot open file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string s = buf.str();
    return std::vector<std::uint8_t>(s.begin(), s.end());
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out.good()) {
        throw std::invalid_argument("cannot write file '" + path + "'");
    }
    out << content;
}

struct RunFlags {
    int scheme = 1;
    std::string message_file;
    std::string message_a_file;
    std::string message_b_file;
    int n = 16;
    int decoys = 16;
    std::uint64_t seed = qpbs::kDefaultSeed;
    std::string out_path;
};

void add_run_flags(CLI::App* cmd, RunFlags& flags) {
    cmd->add_option("--scheme", flags.scheme, "protocol scheme (1: five-party, 2: two-way)")
        ->check(CLI::IsMember({1, 2}))
        ->capture_default_str();
    cmd->add_option("--message-file", flags.message_file, "message file (scheme 1)");
    cmd->add_option("--message-a", flags.message_a_file, "Alice's message file (scheme 2)");
    cmd->add_option("--message-b", flags.message_b_file, "Bob's message file (scheme 2)");
    cmd->add_option("--n", flags.n, "digest length in bits (even, 2..256)")
        ->capture_default_str();
    cmd->add_option("--decoys", flags.decoys, "decoy qubits for the eavesdropping check")
        ->capture_default_str();
    cmd->add_option("--seed", flags.seed, "run seed; identical flags and seed reproduce the transcript byte for byte")
        ->capture_default_str();
    cmd->add_option("--out", flags.out_path, "write the transcript JSON here");
}

qpbs::SchemeConfig config_from_flags(const RunFlags& flags) {
    qpbs::SchemeConfig cfg;
    cfg.scheme = flags.scheme;
    cfg.digest_bits = flags.n;
    cfg.decoy_count = flags.decoys;
    cfg.seed = flags.seed;
    if (flags.scheme == 1) {
        if (flags.message_file.empty()) {
            throw std::invalid_argument("scheme 1 needs --message-file");
        }
        cfg.message = read_file_bytes(flags.message_file);
    } else {
        if (flags.message_a_file.empty() || flags.message_b_file.empty()) {
            throw std::invalid_argument("scheme 2 needs --message-a and --message-b");
        }
        cfg.message_a = read_file_bytes(flags.message_a_file);
        cfg.message_b = read_file_bytes(flags.message_b_file);
    }
    return cfg;
}

int report_run(const qpbs::Transcript& t, const std::string& out_path) {
    if (!out_path.empty()) write_file(out_path, t.serialize());
    if (t.verdict.accepted) {
        std::cout << "verdict: accepted\n";
        for (const auto& [k, v] : t.verdict.payload) {
            std::cout << "  " << k << " = " << v << "\n";
        }
        return 0;
    }
    std::cout << "verdict: rejected (" << t.verdict.reason << ")\n";
    return 1;
}

// Smallest even digest length giving the bundle stream enough bits to guess.
int digest_bits_for_guess(int scheme, int guess_bits) {
    const int width = scheme == 1 ? 5 : 3;
    const int blocks_needed = (guess_bits + width - 1) / width;
    if (scheme == 1) {
        return std::max(4, 2 * blocks_needed);
    }
    const int q = std::max(4, blocks_needed);
    return q % 2 == 0 ? q : q + 1;
}

int cmd_montecarlo(const std::string& experiment, int scheme, int n, int decoys,
                   long long trials, std::uint64_t seed) {
    qpbs::SchemeConfig cfg;
    cfg.scheme = scheme;
    cfg.decoy_count = decoys;
    cfg.seed = seed;
    if (scheme == 1) {
        cfg.message = {'m', 'c'};
    } else {
        cfg.message_a = {'m'};
        cfg.message_b = {'c'};
    }

    double expected = 0.0;
    qpbs::ExperimentResult result;
    if (experiment == "keyguess") {
        cfg.digest_bits = digest_bits_for_guess(scheme, n);
        cfg.decoy_count = 0;
        cfg.attack = qpbs::KeyGuessAttack{n, false};
        expected = std::pow(2.0, -n);
        result = qpbs::key_guess_experiment(cfg, trials);
    } else {
        cfg.digest_bits = 4;
        cfg.attack = qpbs::InterceptAttack{};
        expected = 1.0 - std::pow(0.75, decoys);
        result = qpbs::eavesdrop_experiment(cfg, trials);
    }

    const double sigma = qpbs::binomial_sigma(expected, result.trials);
    std::cout << "experiment=" << experiment << " trials=" << result.trials
              << " hits=" << result.hits << "\n";
    std::cout << "frequency=" << result.frequency << " expected=" << expected
              << " sigma=" << sigma << "\n";
    const bool ok = std::abs(result.frequency - expected) <= 3.0 * sigma;
    std::cout << (ok ? "within 3 sigma\n" : "OUTSIDE 3 sigma\n");
    return ok ? 0 : 1;
}

int cmd_derive_tables(const std::string& out_dir) {
    const qpbs::Scheme1CorrectionTable t1 = qpbs::derive_correction_table_scheme1();
    const qpbs::Scheme2CorrectionTable t2 = qpbs::derive_correction_table_scheme2();
    const std::string s1 = t1.serialize();
    const std::string s2 = t2.serialize();
    if (!out_dir.empty()) {
        write_file(out_dir + "/correction_table_scheme1.txt", s1);
        write_file(out_dir + "/correction_table_scheme2.txt", s2);
    }
    const bool ok1 = s1 == qpbs::kScheme1CorrectionTableText;
    const bool ok2 = s2 == qpbs::kScheme2CorrectionTableText;
    std::cout << "scheme 1: 64 entries, " << (ok1 ? "matches" : "DIFFERS from")
              << " the frozen table\n";
    std::cout << "scheme 2: 32 entries, " << (ok2 ? "matches" : "DIFFERS from")
              << " the frozen table\n";
    if (!ok1 || !ok2) {
        std::cerr << "regenerated tables differ from the committed data\n";
        return 3;
    }
    return 0;
}

int cmd_verify(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.good()) {
        throw std::invalid_argument("cannot open transcript '" + path + "'");
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        std::cout << "fail: transcript is not valid JSON: " << e.what() << "\n";
        return 1;
    }
    try {
        const qpbs::Transcript t = qpbs::Transcript::from_json(j);
        const qpbs::VerifyResult r = qpbs::verify_transcript(t);
        if (r.pass) {
            std::cout << "pass: transcript replays cleanly\n";
            return 0;
        }
        std::cout << "fail: " << r.reason << "\n";
        return 1;
    } catch (const qpbs::MalformedTranscript& e) {
        std::cout << "fail: malformed transcript: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic simulator of two proxy blind signature protocols built on controlled quantum teleportation"};
    app.require_subcommand(1);

    RunFlags run_flags;
    CLI::App* run = app.add_subcommand("run", "execute one honest protocol run");
    add_run_flags(run, run_flags);

    RunFlags attack_flags;
    std::string forge_field;
    int forge_bit = 0;
    int forge_bundle = 0;
    int tamper_block = -1;
    bool intercept = false;
    int keyguess_bits = 0;
    CLI::App* attack = app.add_subcommand("attack", "run the protocol with one injected attack");
    add_run_flags(attack, attack_flags);
    attack->add_option("--forge", forge_field, "flip one bit of this field inside its signature bundle (sa|sb|sc|sd)")
        ->check(CLI::IsMember({"sa", "sb", "sc", "sd"}));
    attack->add_option("--bit", forge_bit, "bit index into the forged field, counted across blocks");
    attack->add_option("--bundle", forge_bundle, "which bundle carries the forged field (1 or 2; default: its home bundle)");
    attack->add_option("--tamper-block", tamper_block, "apply an X to the teleported qubit of this block");
    attack->add_flag("--intercept", intercept, "intercept-resend on the quantum channel");
    attack->add_option("--keyguess-bits", keyguess_bits, "Eve re-encrypts this many leading S_1 bits under a guessed key");

    std::string experiment = "keyguess";
    long long trials = 100000;
    int mc_n = 8;
    int mc_scheme = 1;
    int mc_decoys = 16;
    std::uint64_t mc_seed = qpbs::kDefaultSeed;
    CLI::App* mc = app.add_subcommand("montecarlo", "frequency experiments against analytic rates");
    mc->add_option("--experiment", experiment, "keyguess: acceptance of an n-bit key guess (expected 2^-n); eavesdrop: detection of intercept-resend (expected 1-(3/4)^t)")
        ->check(CLI::IsMember({"keyguess", "eavesdrop"}));
    mc->add_option("--trials", trials, "number of runs")->capture_default_str();
    mc->add_option("--n", mc_n, "guessed key bits for the keyguess experiment")
        ->capture_default_str();
    mc->add_option("--scheme", mc_scheme, "protocol scheme")->check(CLI::IsMember({1, 2}))
        ->capture_default_str();
    mc->add_option("--decoys", mc_decoys, "decoy count t for the eavesdrop experiment")
        ->capture_default_str();
    mc->add_option("--seed", mc_seed, "experiment seed")->capture_default_str();

    std::string tables_out_dir;
    CLI::App* derive = app.add_subcommand("derive-tables", "regenerate the correction tables and diff against the frozen data");
    derive->add_option("--out-dir", tables_out_dir, "also write the regenerated tables here");

    std::string verify_path;
    CLI::App* verify = app.add_subcommand("verify", "replay a transcript file and recheck every logged verification");
    verify->add_option("transcript", verify_path, "transcript JSON produced by run/attack")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) {
            return report_run(qpbs::run_protocol(config_from_flags(run_flags)),
                              run_flags.out_path);
        }
        if (attack->parsed()) {
            qpbs::SchemeConfig cfg = config_from_flags(attack_flags);
            int chosen = 0;
            if (!forge_field.empty()) ++chosen;
            if (tamper_block >= 0) ++chosen;
            if (intercept) ++chosen;
            if (keyguess_bits > 0) ++chosen;
            if (chosen != 1) {
                throw std::invalid_argument(
                    "attack needs exactly one of --forge/--tamper-block/--intercept/--keyguess-bits");
            }
            if (!forge_field.empty()) {
                cfg.attack = qpbs::ForgeAttack{qpbs::forge_field_from_string(forge_field),
                                               forge_bundle, forge_bit};
            } else if (tamper_block >= 0) {
                cfg.attack = qpbs::TamperAttack{tamper_block};
            } else if (intercept) {
                cfg.attack = qpbs::InterceptAttack{};
            } else {
                cfg.attack = qpbs::KeyGuessAttack{keyguess_bits, false};
            }
            return report_run(qpbs::run_protocol(cfg), attack_flags.out_path);
        }
        if (mc->parsed()) {
            return cmd_montecarlo(experiment, mc_scheme, mc_n, mc_decoys, trials, mc_seed);
        }
        if (derive->parsed()) {
            return cmd_derive_tables(tables_out_dir);
        }
        if (verify->parsed()) {
            return cmd_verify(verify_path);
        }
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const qpbs::NoCorrectionFound& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
