#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <string>
#include <vector>

#include "qpbs/protocol.hpp"
#include "qpbs/stats.hpp"

using namespace qpbs;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& s) {
    return std::vector<std::uint8_t>(s.begin(), s.end());
}

SchemeConfig scheme1_config(const std::string& m = "abc", int n = 16, int t = 0,
                            std::uint64_t seed = 7) {
    SchemeConfig cfg;
    cfg.scheme = 1;
    cfg.message = bytes_of(m);
    cfg.digest_bits = n;
    cfg.decoy_count = t;
    cfg.seed = seed;
    return cfg;
}

SchemeConfig scheme2_config(const std::string& ma = "x", const std::string& mb = "y", int n = 8,
                            int t = 0, std::uint64_t seed = 7) {
    SchemeConfig cfg;
    cfg.scheme = 2;
    cfg.message_a = bytes_of(ma);
    cfg.message_b = bytes_of(mb);
    cfg.digest_bits = n;
    cfg.decoy_count = t;
    cfg.seed = seed;
    return cfg;
}

long long count_measurements(const Transcript& t, const std::string& kind_prefix) {
    long long n = 0;
    for (const Event& e : t.events) {
        if (const auto* m = std::get_if<MeasurementEvent>(&e)) {
            if (m->kind.rfind(kind_prefix, 0) == 0) ++n;
        }
    }
    return n;
}

// Everything a party could observe during the run: channel receipts, the
// ciphertexts addressed to it, and its own measurement outcomes.
std::string observations_of(const Transcript& t, PartyId party) {
    std::string out;
    for (const Event& e : t.events) {
        if (const auto* s = std::get_if<ClassicalSendEvent>(&e)) {
            if (s->to == party) {
                out += "recv " + std::string(to_string(s->from)) + " " + s->label + " " +
                       bits_to_string(s->bits) + "\n";
            }
        } else if (const auto* m = std::get_if<MeasurementEvent>(&e)) {
            if (m->party == party) {
                out += "meas " + m->kind + " " + bits_to_string(m->outcome) + "\n";
            }
        } else if (const auto* c = std::get_if<CorrectionEvent>(&e)) {
            if (c->party == party) {
                out += "corr " + std::to_string(c->particle) + " " +
                       std::string(pauli_name(c->pauli)) + "\n";
            }
        }
    }
    return out;
}

}  // namespace

TEST_CASE("honest scheme-1 run accepts with the expected event counts") {
    const Transcript t = run_scheme1(scheme1_config("abc", 16, 0, 7));
    REQUIRE(t.verdict.accepted);
    // n = 16 means l = 8 blocks, two Bell measurements per block.
    REQUIRE(count_measurements(t, "bell(") == 16);
    REQUIRE(count_measurements(t, "z(4)") == 8);
    REQUIRE(count_measurements(t, "z(5)") == 8);
    REQUIRE(t.verdict.payload.at("m") == "616263");
    REQUIRE(t.verdict.payload.at("s_c").size() == 8);
    REQUIRE(t.verdict.payload.at("s_d").size() == 8);
    REQUIRE(verify_transcript(t).pass);
}

TEST_CASE("honest scheme-2 run accepts in both directions") {
    const Transcript t = run_scheme2(scheme2_config("x", "y", 8, 0, 7));
    REQUIRE(t.verdict.accepted);
    REQUIRE(count_measurements(t, "bell(A,1)") == 8);
    REQUIRE(count_measurements(t, "bell(B,3)") == 8);
    REQUIRE(count_measurements(t, "x(4)") == 8);
    REQUIRE(t.verdict.payload.at("s_a").size() == 16);
    REQUIRE(t.verdict.payload.at("s_b").size() == 16);
    REQUIRE(t.verdict.payload.at("s_c").size() == 8);
    REQUIRE(verify_transcript(t).pass);
}

TEST_CASE("the registries hold exactly the declared key pairs") {
    const Transcript t1 = run_scheme1(scheme1_config());
    std::vector<std::string> pairs1;
    for (const Event& e : t1.events) {
        if (const auto* k = std::get_if<KeyIssuedEvent>(&e)) pairs1.push_back(k->pair);
    }
    REQUIRE(pairs1 == std::vector<std::string>{"alice,bob", "alice,trent", "bob,charlie",
                                               "bob,david", "bob,trent", "charlie,trent",
                                               "david,trent"});

    const Transcript t2 = run_scheme2(scheme2_config());
    std::vector<std::string> pairs2;
    for (const Event& e : t2.events) {
        if (const auto* k = std::get_if<KeyIssuedEvent>(&e)) pairs2.push_back(k->pair);
    }
    REQUIRE(pairs2 == std::vector<std::string>{"alice,bob", "alice,charlie", "alice,trent",
                                               "bob,charlie", "bob,trent", "charlie,trent"});
}

TEST_CASE("completeness over randomized honest configurations") {
    Rng meta(1234);
    const std::vector<int> n_choices{2, 4, 8, 16, 32};
    const std::vector<int> t_choices{0, 8, 16};
    for (int i = 0; i < 100; ++i) {
        const int n = n_choices[meta() % n_choices.size()];
        const int t = t_choices[meta() % t_choices.size()];
        std::string m = "m" + std::to_string(meta() % 100000);
        const Transcript t1 = run_scheme1(scheme1_config(m, n, t, meta()));
        REQUIRE(t1.verdict.accepted);
        std::string mb = "r" + std::to_string(meta() % 100000);
        const Transcript t2 = run_scheme2(scheme2_config(m, mb, n, t, meta()));
        REQUIRE(t2.verdict.accepted);
    }
}

TEST_CASE("forging S_A inside S_1 is rejected before the digest check") {
    SchemeConfig cfg = scheme1_config();
    cfg.attack = ForgeAttack{ForgeField::SA, 0, 0};
    const Transcript t = run_scheme1(cfg);
    REQUIRE_FALSE(t.verdict.accepted);
    REQUIRE(t.verdict.reason.find("S_A mismatch") != std::string::npos);
    // the run stops before Trent ever measures
    REQUIRE(count_measurements(t, "z(6)") == 0);
    REQUIRE(verify_transcript(t).pass);
}

TEST_CASE("tampering with the teleported block is caught by Trent") {
    SchemeConfig cfg = scheme1_config();
    cfg.attack = TamperAttack{0};
    const Transcript t = run_scheme1(cfg);
    REQUIRE_FALSE(t.verdict.accepted);
    REQUIRE(t.verdict.reason.find("blinded digest mismatch at block 0") != std::string::npos);
    REQUIRE(verify_transcript(t).pass);

    SchemeConfig cfg2 = scheme2_config();
    cfg2.attack = TamperAttack{0};
    const Transcript t2 = run_scheme2(cfg2);
    REQUIRE_FALSE(t2.verdict.accepted);
    REQUIRE(t2.verdict.reason.find("direction B") != std::string::npos);
    REQUIRE(verify_transcript(t2).pass);
}

TEST_CASE("scheme-2 forgeries are rejected on the matching side") {
    SchemeConfig cfg = scheme2_config();
    cfg.attack = ForgeAttack{ForgeField::SA, 0, 1};
    const Transcript ta = run_scheme2(cfg);
    REQUIRE_FALSE(ta.verdict.accepted);
    REQUIRE(ta.verdict.reason.find("S_A mismatch") != std::string::npos);

    cfg.attack = ForgeAttack{ForgeField::SB, 0, 0};
    const Transcript tb = run_scheme2(cfg);
    REQUIRE_FALSE(tb.verdict.accepted);
    REQUIRE(tb.verdict.reason.find("S_B mismatch") != std::string::npos);

    // A forged proxy outcome only shifts a phase; the classical forwarding
    // cross-check at Trent has to catch it.
    cfg.attack = ForgeAttack{ForgeField::SC, 0, 0};
    const Transcript tc = run_scheme2(cfg);
    REQUIRE_FALSE(tc.verdict.accepted);
    REQUIRE(tc.verdict.reason.find("bundle mismatch") != std::string::npos);
}

TEST_CASE("exhaustive single-bit forgery at n = 8 never passes") {
    // scheme 1: S_A spans 16 bits per bundle, the proxy bit 4 per bundle
    for (int bundle : {1, 2}) {
        for (int bit = 0; bit < 16; ++bit) {
            SchemeConfig cfg = scheme1_config("abc", 8, 0, 11);
            cfg.attack = ForgeAttack{ForgeField::SA, bundle, bit};
            REQUIRE_FALSE(run_scheme1(cfg).verdict.accepted);
        }
    }
    for (int bit = 0; bit < 4; ++bit) {
        SchemeConfig cfg = scheme1_config("abc", 8, 0, 11);
        cfg.attack = ForgeAttack{ForgeField::SC, 0, bit};
        REQUIRE_FALSE(run_scheme1(cfg).verdict.accepted);
        cfg.attack = ForgeAttack{ForgeField::SD, 0, bit};
        REQUIRE_FALSE(run_scheme1(cfg).verdict.accepted);
    }
    // scheme 2: S_A/S_B span 16 bits, S_C 8 bits per bundle
    for (int bit = 0; bit < 16; ++bit) {
        SchemeConfig cfg = scheme2_config("x", "y", 8, 0, 11);
        cfg.attack = ForgeAttack{ForgeField::SA, 0, bit};
        REQUIRE_FALSE(run_scheme2(cfg).verdict.accepted);
        cfg.attack = ForgeAttack{ForgeField::SB, 0, bit};
        REQUIRE_FALSE(run_scheme2(cfg).verdict.accepted);
    }
    for (int bundle : {1, 2}) {
        for (int bit = 0; bit < 8; ++bit) {
            SchemeConfig cfg = scheme2_config("x", "y", 8, 0, 11);
            cfg.attack = ForgeAttack{ForgeField::SC, bundle, bit};
            REQUIRE_FALSE(run_scheme2(cfg).verdict.accepted);
        }
    }
}

TEST_CASE("attack parameter validation") {
    SchemeConfig cfg = scheme1_config();
    cfg.attack = ForgeAttack{ForgeField::SB, 0, 0};
    REQUIRE_THROWS_AS(run_scheme1(cfg), std::invalid_argument);
    cfg.attack = ForgeAttack{ForgeField::SA, 0, 999};
    REQUIRE_THROWS_AS(run_scheme1(cfg), std::invalid_argument);
    cfg.attack = TamperAttack{99};
    REQUIRE_THROWS_AS(run_scheme1(cfg), std::invalid_argument);
    cfg.attack = KeyGuessAttack{0, false};
    REQUIRE_THROWS_AS(run_scheme1(cfg), std::invalid_argument);
    SchemeConfig cfg2 = scheme2_config();
    cfg2.attack = ForgeAttack{ForgeField::SD, 0, 0};
    REQUIRE_THROWS_AS(run_scheme2(cfg2), std::invalid_argument);
    SchemeConfig bad = scheme1_config();
    bad.digest_bits = 7;
    REQUIRE_THROWS_AS(run_scheme1(bad), std::invalid_argument);
}

TEST_CASE("interception aborts at the decoy check for a detecting seed") {
    SchemeConfig cfg = scheme1_config("abc", 8, 16, 3);
    cfg.attack = InterceptAttack{};
    const Transcript t = run_scheme1(cfg);
    // With t = 16 decoys the detection probability is ~0.99; seed 3 detects.
    REQUIRE_FALSE(t.verdict.accepted);
    REQUIRE(t.verdict.reason == "eavesdropping detected");
    REQUIRE(count_measurements(t, "bell(") == 0);
    REQUIRE(verify_transcript(t).pass);
}

TEST_CASE("blindness: proxies observe identical runs for different messages") {
    for (int pair = 0; pair < 10; ++pair) {
        const std::uint64_t seed = 1000 + static_cast<std::uint64_t>(pair);
        const Transcript t1 = run_scheme1(scheme1_config("first message " + std::to_string(pair), 16, 8, seed));
        const Transcript t2 = run_scheme1(scheme1_config("second message " + std::to_string(pair), 16, 8, seed));
        REQUIRE(t1.verdict.accepted);
        REQUIRE(t2.verdict.accepted);
        REQUIRE(observations_of(t1, PartyId::Charlie) == observations_of(t2, PartyId::Charlie));
        REQUIRE(observations_of(t1, PartyId::David) == observations_of(t2, PartyId::David));
        // sanity: the runs themselves differ (different blinded digests)
        REQUIRE(t1.verdict.payload.at("m") != t2.verdict.payload.at("m"));

        const Transcript u1 = run_scheme2(scheme2_config("alpha" + std::to_string(pair), "bravo", 8, 8, seed));
        const Transcript u2 = run_scheme2(scheme2_config("gamma" + std::to_string(pair), "bravo", 8, 8, seed));
        REQUIRE(u1.verdict.accepted);
        REQUIRE(u2.verdict.accepted);
        REQUIRE(observations_of(u1, PartyId::Charlie) == observations_of(u2, PartyId::Charlie));
    }
}

TEST_CASE("identical configs give byte-identical transcripts") {
    const SchemeConfig cfg = scheme1_config("determinism", 16, 16, 99);
    const std::string a = run_scheme1(cfg).serialize();
    const std::string b = run_scheme1(cfg).serialize();
    REQUIRE(a == b);

    SchemeConfig other = cfg;
    other.seed = 100;
    REQUIRE(run_scheme1(other).serialize() != a);
}

TEST_CASE("key accounting stays clean across runs and attacks") {
    // The sessions audit the registry on exit; a throw here would fail the
    // test. Exercise honest and attacked runs of both schemes.
    run_scheme1(scheme1_config("audit", 8, 8, 5));
    SchemeConfig cfg = scheme1_config("audit", 8, 0, 5);
    cfg.attack = ForgeAttack{ForgeField::SC, 0, 1};
    run_scheme1(cfg);
    SchemeConfig cfg2 = scheme2_config("a", "b", 4, 8, 5);
    run_scheme2(cfg2);
    cfg2.attack = TamperAttack{1};
    cfg2.decoy_count = 0;
    run_scheme2(cfg2);
    SUCCEED("registry audits passed");
}

TEST_CASE("key guess forgery succeeds at the one-time-pad guessing rate") {
    SchemeConfig base = scheme1_config("kg", 4, 0, 2024);
    base.attack = KeyGuessAttack{2, false};
    const ExperimentResult r = key_guess_experiment(base, 2000);
    REQUIRE(within_sigma(r.frequency, 0.25, r.trials, 3.0));

    // Degenerate control: Eve handed the true pad always wins.
    base.attack = KeyGuessAttack{8, true};
    const ExperimentResult control = key_guess_experiment(base, 50);
    REQUIRE(control.frequency == 1.0);
}

TEST_CASE("scheme-2 key guessing behaves identically") {
    SchemeConfig base = scheme2_config("u", "v", 4, 0, 77);
    base.attack = KeyGuessAttack{1, false};
    const ExperimentResult r = key_guess_experiment(base, 1000);
    REQUIRE(within_sigma(r.frequency, 0.5, r.trials, 3.0));
}

TEST_CASE("eavesdrop experiment matches the analytic detection rate") {
    SchemeConfig base = scheme1_config("ev", 4, 16, 31);
    base.attack = InterceptAttack{};
    const ExperimentResult r = eavesdrop_experiment(base, 2000);
    const double expected = 1.0 - std::pow(0.75, 16);
    REQUIRE(within_sigma(r.frequency, expected, r.trials, 3.0));
}

TEST_CASE("transcript json round trip") {
    const Transcript t = run_scheme1(scheme1_config("roundtrip", 8, 4, 13));
    const nlohmann::json j = t.to_json();
    const Transcript back = Transcript::from_json(j);
    REQUIRE(back.serialize() == t.serialize());
    REQUIRE(verify_transcript(back).pass);

    SchemeConfig cfg2 = scheme2_config();
    cfg2.attack = ForgeAttack{ForgeField::SC, 0, 2};
    const Transcript t2 = run_scheme2(cfg2);
    const Transcript back2 = Transcript::from_json(t2.to_json());
    REQUIRE(back2.serialize() == t2.serialize());
    REQUIRE(verify_transcript(back2).pass);
}

TEST_CASE("verify_transcript rejects tampered records") {
    const Transcript honest = run_scheme1(scheme1_config("tamperproof", 8, 0, 21));
    REQUIRE(verify_transcript(honest).pass);

    SECTION("flipping a verification result") {
        nlohmann::json j = honest.to_json();
        for (auto& ev : j["events"]) {
            if (ev["type"] == "verification") {
                ev["pass"] = false;
                break;
            }
        }
        const VerifyResult r = verify_transcript(Transcript::from_json(j));
        REQUIRE_FALSE(r.pass);
        REQUIRE(r.reason.find("verdict mismatch") != std::string::npos);
    }
    SECTION("swapping the verdict") {
        nlohmann::json j = honest.to_json();
        j["verdict"] = {{"status", "rejected"}, {"reason", "fabricated"}};
        REQUIRE_FALSE(verify_transcript(Transcript::from_json(j)).pass);
    }
    SECTION("altering a logged proxy outcome breaks the accepted tuple") {
        nlohmann::json j = honest.to_json();
        for (auto& ev : j["events"]) {
            if (ev["type"] == "measurement" && ev["kind"] == "z(4)") {
                std::string o = ev["outcome"].get<std::string>();
                o[0] = o[0] == '0' ? '1' : '0';
                ev["outcome"] = o;
                break;
            }
        }
        REQUIRE_FALSE(verify_transcript(Transcript::from_json(j)).pass);
    }
    SECTION("truncation before the verdict is malformed") {
        nlohmann::json j = honest.to_json();
        j.erase("verdict");
        REQUIRE_THROWS_AS(Transcript::from_json(j), MalformedTranscript);
    }
    SECTION("garbage event types are malformed") {
        nlohmann::json j = honest.to_json();
        j["events"][0]["type"] = "telepathy";
        REQUIRE_THROWS_AS(Transcript::from_json(j), MalformedTranscript);
    }
}
