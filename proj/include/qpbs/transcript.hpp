// The ordered, replayable record of one protocol run: every classical
// message, measurement, correction, and check, plus the final verdict.
// Serialization is JSON with a committed schema (data/transcript.schema.json);
// field names and event order are semantic, and a fixed seed reproduces the
// file byte for byte.
#pragma once

#include <json.hpp>

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "qpbs/bits.hpp"
#include "qpbs/config.hpp"
#include "qpbs/sigcrypto.hpp"
#include "qpbs/statevec.hpp"

namespace qpbs {

class MalformedTranscript : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Block index for events that happen once per run rather than per block.
inline constexpr int kNoBlock = -1;

struct KeyIssuedEvent {
    std::string pair;
    std::size_t length = 0;
};

struct ChannelDistributedEvent {
    int message_channels = 0;
    int decoys = 0;
    std::map<std::string, std::string> particles;  // particle label -> party
};

struct EavesdropCheckEvent {
    bool pass = true;
    int decoys = 0;
    int mismatches = 0;
};

struct ClassicalSendEvent {
    PartyId from = PartyId::Alice;
    PartyId to = PartyId::Bob;
    std::string label;
    int block = kNoBlock;
    std::string key;  // pair name, or "plain" for unencrypted sends
    std::size_t offset = 0;
    Bits bits;
};

struct MeasurementEvent {
    PartyId party = PartyId::Alice;
    std::string kind;  // "bell(1,3)", "z(4)", "x(4)", ...
    Bits outcome;
    int block = kNoBlock;
};

struct CorrectionEvent {
    PartyId party = PartyId::Bob;
    int particle = 0;
    Pauli pauli = Pauli::I;
    int block = kNoBlock;
};

struct VerificationEvent {
    PartyId party = PartyId::Trent;
    std::string check;
    Bits lhs;
    Bits rhs;
    bool pass = true;
    int block = kNoBlock;
};

using Event = std::variant<KeyIssuedEvent, ChannelDistributedEvent, EavesdropCheckEvent,
                           ClassicalSendEvent, MeasurementEvent, CorrectionEvent,
                           VerificationEvent>;

struct Verdict {
    bool accepted = false;
    std::string reason;  // set when rejected
    // Accepted payload: scheme 1 carries m, s_c, s_d; scheme 2 carries
    // m_a, m_b, s_a, s_b, s_c.
    std::map<std::string, std::string> payload;
};

struct Transcript {
    int scheme = 1;
    SchemeConfig config;
    std::vector<Event> events;
    Verdict verdict;

    nlohmann::json to_json() const;
    static Transcript from_json(const nlohmann::json& j);
    std::string serialize() const { return to_json().dump(2) + "\n"; }
};

// ---------------------------------------------------------------------------
// JSON conversion.

namespace detail {

inline nlohmann::json event_to_json(const Event& event) {
    nlohmann::json j;
    if (const auto* e = std::get_if<KeyIssuedEvent>(&event)) {
        j["type"] = "key_issued";
        j["pair"] = e->pair;
        j["length"] = e->length;
    } else if (const auto* e = std::get_if<ChannelDistributedEvent>(&event)) {
        j["type"] = "channel_distributed";
        j["message_channels"] = e->message_channels;
        j["decoys"] = e->decoys;
        j["particles"] = e->particles;
    } else if (const auto* e = std::get_if<EavesdropCheckEvent>(&event)) {
        j["type"] = "eavesdrop_check";
        j["pass"] = e->pass;
        j["decoys"] = e->decoys;
        j["mismatches"] = e->mismatches;
    } else if (const auto* e = std::get_if<ClassicalSendEvent>(&event)) {
        j["type"] = "classical_send";
        j["from"] = std::string(to_string(e->from));
        j["to"] = std::string(to_string(e->to));
        j["label"] = e->label;
        j["block"] = e->block;
        j["key"] = e->key;
        j["offset"] = e->offset;
        j["bits"] = bits_to_string(e->bits);
    } else if (const auto* e = std::get_if<MeasurementEvent>(&event)) {
        j["type"] = "measurement";
        j["party"] = std::string(to_string(e->party));
        j["kind"] = e->kind;
        j["outcome"] = bits_to_string(e->outcome);
        j["block"] = e->block;
    } else if (const auto* e = std::get_if<CorrectionEvent>(&event)) {
        j["type"] = "correction";
        j["party"] = std::string(to_string(e->party));
        j["particle"] = e->particle;
        j["pauli"] = std::string(pauli_name(e->pauli));
        j["block"] = e->block;
    } else if (const auto* e = std::get_if<VerificationEvent>(&event)) {
        j["type"] = "verification";
        j["party"] = std::string(to_string(e->party));
        j["check"] = e->check;
        j["lhs"] = bits_to_string(e->lhs);
        j["rhs"] = bits_to_string(e->rhs);
        j["pass"] = e->pass;
        j["block"] = e->block;
    }
    return j;
}

inline Event event_from_json(const nlohmann::json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "key_issued") {
        return KeyIssuedEvent{j.at("pair").get<std::string>(), j.at("length").get<std::size_t>()};
    }
    if (type == "channel_distributed") {
        return ChannelDistributedEvent{
            j.at("message_channels").get<int>(), j.at("decoys").get<int>(),
            j.at("particles").get<std::map<std::string, std::string>>()};
    }
    if (type == "eavesdrop_check") {
        return EavesdropCheckEvent{j.at("pass").get<bool>(), j.at("decoys").get<int>(),
                                   j.at("mismatches").get<int>()};
    }
    if (type == "classical_send") {
        return ClassicalSendEvent{party_from_string(j.at("from").get<std::string>()),
                                  party_from_string(j.at("to").get<std::string>()),
                                  j.at("label").get<std::string>(),
                                  j.at("block").get<int>(),
                                  j.at("key").get<std::string>(),
                                  j.at("offset").get<std::size_t>(),
                                  bits_from_string(j.at("bits").get<std::string>())};
    }
    if (type == "measurement") {
        return MeasurementEvent{party_from_string(j.at("party").get<std::string>()),
                                j.at("kind").get<std::string>(),
                                bits_from_string(j.at("outcome").get<std::string>()),
                                j.at("block").get<int>()};
    }
    if (type == "correction") {
        return CorrectionEvent{party_from_string(j.at("party").get<std::string>()),
                               j.at("particle").get<int>(),
                               pauli_from_name(j.at("pauli").get<std::string>()),
                               j.at("block").get<int>()};
    }
    if (type == "verification") {
        return VerificationEvent{party_from_string(j.at("party").get<std::string>()),
                                 j.at("check").get<std::string>(),
                                 bits_from_string(j.at("lhs").get<std::string>()),
                                 bits_from_string(j.at("rhs").get<std::string>()),
                                 j.at("pass").get<bool>(),
                                 j.at("block").get<int>()};
    }
    throw MalformedTranscript("unknown event type '" + type + "'");
}

}  // namespace detail

inline nlohmann::json Transcript::to_json() const {
    nlohmann::json j;
    j["scheme"] = scheme;
    j["config"] = config_to_json(config);
    j["events"] = nlohmann::json::array();
    for (const Event& e : events) j["events"].push_back(detail::event_to_json(e));
    nlohmann::json v;
    v["status"] = verdict.accepted ? "accepted" : "rejected";
    if (verdict.accepted) {
        for (const auto& [k, val] : verdict.payload) v[k] = val;
    } else {
        v["reason"] = verdict.reason;
    }
    j["verdict"] = v;
    return j;
}

inline Transcript Transcript::from_json(const nlohmann::json& j) {
    try {
        Transcript t;
        t.scheme = j.at("scheme").get<int>();
        if (t.scheme != 1 && t.scheme != 2) throw MalformedTranscript("bad scheme");
        t.config = config_from_json(j.at("config"));
        if (!j.contains("verdict")) throw MalformedTranscript("missing verdict");
        for (const auto& ev : j.at("events")) t.events.push_back(detail::event_from_json(ev));
        const auto& v = j.at("verdict");
        const std::string status = v.at("status").get<std::string>();
        if (status == "accepted") {
            t.verdict.accepted = true;
            for (const auto& [key, value] : v.items()) {
                if (key != "status") t.verdict.payload[key] = value.get<std::string>();
            }
        } else if (status == "rejected") {
            t.verdict.accepted = false;
            t.verdict.reason = v.at("reason").get<std::string>();
        } else {
            throw MalformedTranscript("bad verdict status '" + status + "'");
        }
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw MalformedTranscript(std::string("transcript structure: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw MalformedTranscript(std::string("transcript field: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Offline replay. Recomputes every logged check from its logged operands,
// confirms the abort semantics (nothing after the first failure), confirms
// the verdict follows from the checks, and cross-references check operands
// and the accepted payload against the logged measurements.

struct VerifyResult {
    bool pass = true;
    std::string reason;
};

namespace detail {

inline Bits collect_measurements(const Transcript& t, PartyId party, std::string_view kind) {
    Bits out;
    for (const Event& event : t.events) {
        if (const auto* m = std::get_if<MeasurementEvent>(&event)) {
            if (m->party == party && m->kind == kind) {
                out.insert(out.end(), m->outcome.begin(), m->outcome.end());
            }
        }
    }
    return out;
}

inline std::optional<Bits> plain_send_bits(const Transcript& t, std::string_view label) {
    for (const Event& event : t.events) {
        if (const auto* s = std::get_if<ClassicalSendEvent>(&event)) {
            if (s->label == label && s->key == "plain") return s->bits;
        }
    }
    return std::nullopt;
}

}  // namespace detail

inline VerifyResult verify_transcript(const Transcript& t) {
    auto fail = [](std::string reason) { return VerifyResult{false, std::move(reason)}; };

    // 1. Every verification event must match a recomputation from its
    //    operands, and nothing may follow a failed check except the verdict.
    bool aborted = false;
    std::string first_failure;
    for (std::size_t i = 0; i < t.events.size(); ++i) {
        if (aborted) return fail("events continue after a failed check");
        const Event& event = t.events[i];
        if (const auto* v = std::get_if<VerificationEvent>(&event)) {
            const bool recomputed = v->lhs == v->rhs;
            if (recomputed != v->pass) {
                return fail("verdict mismatch: check '" + v->check +
                            "' disagrees with its operands");
            }
            if (!v->pass) {
                aborted = true;
                first_failure = v->check;
            }
        } else if (const auto* e = std::get_if<EavesdropCheckEvent>(&event)) {
            if ((e->mismatches == 0) != e->pass) {
                return fail("eavesdrop check result disagrees with its mismatch count");
            }
            if (!e->pass) {
                aborted = true;
                first_failure = "eavesdrop_check";
            }
        }
    }

    // 2. The verdict must follow from the checks.
    if (t.verdict.accepted && aborted) {
        return fail("verdict mismatch: accepted despite failed check '" + first_failure + "'");
    }
    if (!t.verdict.accepted && !aborted) {
        return fail("verdict mismatch: rejected but every logged check passed");
    }

    // 3. Cross-references that hold under every supported attack: check
    //    operands that came over untampered channels must equal the logged
    //    measurements, and the accepted tuple must be reproducible.
    if (t.scheme == 1) {
        const Bits b13 = detail::collect_measurements(t, PartyId::Alice, "bell(1,3)");
        const Bits b27 = detail::collect_measurements(t, PartyId::Alice, "bell(2,7)");
        // per block, S_A is [bell(1,3) bell(2,7)]: 2 + 2 bits
        Bits sa;
        for (std::size_t blk = 0; 2 * blk + 2 <= b13.size() && 2 * blk + 2 <= b27.size(); ++blk) {
            sa.push_back(b13[2 * blk]);
            sa.push_back(b13[2 * blk + 1]);
            sa.push_back(b27[2 * blk]);
            sa.push_back(b27[2 * blk + 1]);
        }
        Bits trent_bits;
        {
            const Bits z6 = detail::collect_measurements(t, PartyId::Trent, "z(6)");
            const Bits z8 = detail::collect_measurements(t, PartyId::Trent, "z(8)");
            for (std::size_t blk = 0; blk < z6.size() && blk < z8.size(); ++blk) {
                trent_bits.push_back(z6[blk]);
                trent_bits.push_back(z8[blk]);
            }
        }
        std::size_t sa_seen = 0, digest_seen = 0;
        for (const Event& event : t.events) {
            const auto* v = std::get_if<VerificationEvent>(&event);
            if (!v) continue;
            if (v->check == "bob_sa_match_s1") {
                if (4 * sa_seen + 4 > sa.size() ||
                    Bits(sa.begin() + static_cast<std::ptrdiff_t>(4 * sa_seen),
                         sa.begin() + static_cast<std::ptrdiff_t>(4 * sa_seen + 4)) != v->rhs) {
                    return fail("S_A reference in block " + std::to_string(v->block) +
                                " does not match the logged measurements");
                }
                ++sa_seen;
            } else if (v->check == "trent_digest_block") {
                if (2 * digest_seen + 2 > trent_bits.size() ||
                    Bits(trent_bits.begin() + static_cast<std::ptrdiff_t>(2 * digest_seen),
                         trent_bits.begin() + static_cast<std::ptrdiff_t>(2 * digest_seen + 2)) !=
                    v->lhs) {
                    return fail("decoded digest block " + std::to_string(v->block) +
                                " does not match the logged measurements");
                }
                ++digest_seen;
            }
        }
        if (t.verdict.accepted) {
            const auto m = detail::plain_send_bits(t, "m");
            if (!m || t.verdict.payload.count("m") == 0 ||
                bits_to_hex(*m) != t.verdict.payload.at("m")) {
                return fail("accepted message does not match the blinding-phase send");
            }
            const Bits s_c = detail::collect_measurements(t, PartyId::Charlie, "z(4)");
            const Bits s_d = detail::collect_measurements(t, PartyId::David, "z(5)");
            if (t.verdict.payload.count("s_c") == 0 ||
                bits_to_string(s_c) != t.verdict.payload.at("s_c") ||
                t.verdict.payload.count("s_d") == 0 ||
                bits_to_string(s_d) != t.verdict.payload.at("s_d")) {
                return fail("accepted proxy outcomes do not match the logged measurements");
            }
        }
    } else {
        const Bits sa = detail::collect_measurements(t, PartyId::Alice, "bell(A,1)");
        const Bits sb = detail::collect_measurements(t, PartyId::Bob, "bell(B,3)");
        const Bits sc = detail::collect_measurements(t, PartyId::Charlie, "x(4)");
        const Bits z2 = detail::collect_measurements(t, PartyId::Trent, "z(2)");
        const Bits z5 = detail::collect_measurements(t, PartyId::Trent, "z(5)");
        std::size_t sa_seen = 0, sb_seen = 0, a_seen = 0, b_seen = 0;
        for (const Event& event : t.events) {
            const auto* v = std::get_if<VerificationEvent>(&event);
            if (!v) continue;
            if (v->check == "bob_sa_match") {
                if (2 * sa_seen + 2 > sa.size() ||
                    Bits(sa.begin() + static_cast<std::ptrdiff_t>(2 * sa_seen),
                         sa.begin() + static_cast<std::ptrdiff_t>(2 * sa_seen + 2)) != v->rhs) {
                    return fail("S_A reference in block " + std::to_string(v->block) +
                                " does not match the logged measurements");
                }
                ++sa_seen;
            } else if (v->check == "alice_sb_match") {
                if (2 * sb_seen + 2 > sb.size() ||
                    Bits(sb.begin() + static_cast<std::ptrdiff_t>(2 * sb_seen),
                         sb.begin() + static_cast<std::ptrdiff_t>(2 * sb_seen + 2)) != v->rhs) {
                    return fail("S_B reference in block " + std::to_string(v->block) +
                                " does not match the logged measurements");
                }
                ++sb_seen;
            } else if (v->check == "trent_digest_a") {
                if (a_seen >= z2.size() || Bits{z2[a_seen]} != v->lhs) {
                    return fail("decoded digest (direction A) does not match the logged measurements");
                }
                ++a_seen;
            } else if (v->check == "trent_digest_b") {
                if (b_seen >= z5.size() || Bits{z5[b_seen]} != v->lhs) {
                    return fail("decoded digest (direction B) does not match the logged measurements");
                }
                ++b_seen;
            }
        }
        if (t.verdict.accepted) {
            const auto ma = detail::plain_send_bits(t, "m_a");
            const auto mb = detail::plain_send_bits(t, "m_b");
            if (!ma || !mb || t.verdict.payload.count("m_a") == 0 ||
                t.verdict.payload.count("m_b") == 0 ||
                bits_to_hex(*ma) != t.verdict.payload.at("m_a") ||
                bits_to_hex(*mb) != t.verdict.payload.at("m_b")) {
                return fail("accepted messages do not match the blinding-phase sends");
            }
            if (t.verdict.payload.count("s_a") == 0 || t.verdict.payload.count("s_b") == 0 ||
                t.verdict.payload.count("s_c") == 0 ||
                bits_to_string(sa) != t.verdict.payload.at("s_a") ||
                bits_to_string(sb) != t.verdict.payload.at("s_b") ||
                bits_to_string(sc) != t.verdict.payload.at("s_c")) {
                return fail("accepted signature tuple does not match the logged measurements");
            }
        }
    }

    return {true, ""};
}

}  // namespace qpbs
