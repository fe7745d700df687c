// Run configuration: scheme selection, messages, digest length, decoy count,
// seed, and the optional injected attack.
#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "qpbs/bits.hpp"

namespace qpbs {

inline constexpr std::uint64_t kDefaultSeed = 42;

enum class ForgeField : int { SA = 0, SB = 1, SC = 2, SD = 3 };

inline std::string_view to_string(ForgeField f) {
    switch (f) {
        case ForgeField::SA: return "sa";
        case ForgeField::SB: return "sb";
        case ForgeField::SC: return "sc";
        case ForgeField::SD: return "sd";
    }
    throw std::invalid_argument("to_string: bad ForgeField");
}

inline ForgeField forge_field_from_string(std::string_view s) {
    if (s == "sa") return ForgeField::SA;
    if (s == "sb") return ForgeField::SB;
    if (s == "sc") return ForgeField::SC;
    if (s == "sd") return ForgeField::SD;
    throw std::invalid_argument("unknown forge field '" + std::string(s) + "'");
}

// Flip one bit of a field embedded in a signature bundle (S_1 or S_2) on the
// wire. bundle 0 means "the bundle that naturally carries the field".
struct ForgeAttack {
    ForgeField field = ForgeField::SA;
    int bundle = 0;
    int bit = 0;
};

// Apply an X to the teleported qubit of one block after all corrections.
struct TamperAttack {
    int block = 0;
};

// Intercept-resend on the quantum channel; caught by the decoy check.
struct InterceptAttack {};

// Eve re-encrypts the leading guess_bits of the S_1 bundle stream under a
// uniformly guessed key. With use_true_key set she is handed the real pad
// (degenerate control: the run must accept).
struct KeyGuessAttack {
    int guess_bits = 8;
    bool use_true_key = false;
};

using AttackSpec = std::variant<ForgeAttack, TamperAttack, InterceptAttack, KeyGuessAttack>;

struct SchemeConfig {
    int scheme = 1;
    std::vector<std::uint8_t> message;    // scheme 1
    std::vector<std::uint8_t> message_a;  // scheme 2
    std::vector<std::uint8_t> message_b;  // scheme 2
    int digest_bits = 16;  // n, even
    int decoy_count = 16;  // t
    std::uint64_t seed = kDefaultSeed;
    std::optional<AttackSpec> attack;
};

inline void validate_config(const SchemeConfig& cfg) {
    if (cfg.scheme != 1 && cfg.scheme != 2) {
        throw std::invalid_argument("config: scheme must be 1 or 2");
    }
    if (cfg.digest_bits < 2 || cfg.digest_bits > 256 || cfg.digest_bits % 2 != 0) {
        throw std::invalid_argument("config: digest length n must be even and within [2, 256]");
    }
    if (cfg.decoy_count < 0) {
        throw std::invalid_argument("config: decoy count must be >= 0");
    }
}

inline nlohmann::json attack_to_json(const AttackSpec& attack) {
    nlohmann::json j;
    if (const auto* forge = std::get_if<ForgeAttack>(&attack)) {
        j["type"] = "forge";
        j["field"] = std::string(to_string(forge->field));
        j["bundle"] = forge->bundle;
        j["bit"] = forge->bit;
    } else if (const auto* tamper = std::get_if<TamperAttack>(&attack)) {
        j["type"] = "tamper";
        j["block"] = tamper->block;
    } else if (std::holds_alternative<InterceptAttack>(attack)) {
        j["type"] = "intercept";
    } else if (const auto* guess = std::get_if<KeyGuessAttack>(&attack)) {
        j["type"] = "keyguess";
        j["guess_bits"] = guess->guess_bits;
        j["use_true_key"] = guess->use_true_key;
    }
    return j;
}

inline AttackSpec attack_from_json(const nlohmann::json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "forge") {
        return ForgeAttack{forge_field_from_string(j.at("field").get<std::string>()),
                           j.at("bundle").get<int>(), j.at("bit").get<int>()};
    }
    if (type == "tamper") return TamperAttack{j.at("block").get<int>()};
    if (type == "intercept") return InterceptAttack{};
    if (type == "keyguess") {
        return KeyGuessAttack{j.at("guess_bits").get<int>(), j.at("use_true_key").get<bool>()};
    }
    throw std::invalid_argument("unknown attack type '" + type + "'");
}

inline nlohmann::json config_to_json(const SchemeConfig& cfg) {
    nlohmann::json j;
    j["scheme"] = cfg.scheme;
    if (cfg.scheme == 1) {
        j["message"] = bytes_to_hex(cfg.message);
    } else {
        j["message_a"] = bytes_to_hex(cfg.message_a);
        j["message_b"] = bytes_to_hex(cfg.message_b);
    }
    j["n"] = cfg.digest_bits;
    j["decoys"] = cfg.decoy_count;
    j["seed"] = cfg.seed;
    j["attack"] = cfg.attack ? attack_to_json(*cfg.attack) : nlohmann::json(nullptr);
    return j;
}

inline SchemeConfig config_from_json(const nlohmann::json& j) {
    SchemeConfig cfg;
    cfg.scheme = j.at("scheme").get<int>();
    if (cfg.scheme == 1) {
        cfg.message = hex_to_bytes(j.at("message").get<std::string>());
    } else {
        cfg.message_a = hex_to_bytes(j.at("message_a").get<std::string>());
        cfg.message_b = hex_to_bytes(j.at("message_b").get<std::string>());
    }
    cfg.digest_bits = j.at("n").get<int>();
    cfg.decoy_count = j.at("decoys").get<int>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    if (!j.at("attack").is_null()) cfg.attack = attack_from_json(j.at("attack"));
    return cfg;
}

}  // namespace qpbs
