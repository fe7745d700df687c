// Classical cryptographic plumbing: message digests, XOR blinding, one-time
// pad encryption over a shared key registry, and the decoy-qubit
// eavesdropping check.
//
// The registry stands in for QKD: for each declared party pair it issues one
// identical random bit stream. A single cursor per pair hands out segments;
// ciphertexts carry their segment offset so the peer consumes exactly the
// bits the sender used. Key bits are never reused; running out is an error,
// not a wraparound.
#pragma once

#include <openssl/evp.h>

#include <array>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qpbs/bits.hpp"
#include "qpbs/rng.hpp"
#include "qpbs/statevec.hpp"

namespace qpbs {

// ---------------------------------------------------------------------------
// Parties and key identifiers.

enum class PartyId : int { Alice = 0, Bob = 1, Charlie = 2, David = 3, Trent = 4, Eve = 5 };

inline std::string_view to_string(PartyId p) {
    switch (p) {
        case PartyId::Alice: return "alice";
        case PartyId::Bob: return "bob";
        case PartyId::Charlie: return "charlie";
        case PartyId::David: return "david";
        case PartyId::Trent: return "trent";
        case PartyId::Eve: return "eve";
    }
    throw std::invalid_argument("to_string: bad PartyId");
}

inline PartyId party_from_string(std::string_view name) {
    if (name == "alice") return PartyId::Alice;
    if (name == "bob") return PartyId::Bob;
    if (name == "charlie") return PartyId::Charlie;
    if (name == "david") return PartyId::David;
    if (name == "trent") return PartyId::Trent;
    if (name == "eve") return PartyId::Eve;
    throw std::invalid_argument("party_from_string: unknown party '" + std::string(name) + "'");
}

// Unordered pair of parties: {Alice,Bob} and {Bob,Alice} name the same key.
struct KeyId {
    PartyId a;
    PartyId b;

    KeyId(PartyId x, PartyId y) : a(x), b(y) {
        if (static_cast<int>(a) > static_cast<int>(b)) std::swap(a, b);
        if (a == b) throw std::invalid_argument("KeyId: a pair needs two distinct parties");
    }

    bool operator==(const KeyId&) const = default;
    auto operator<=>(const KeyId&) const = default;

    std::string name() const {
        return std::string(to_string(a)) + "," + std::string(to_string(b));
    }
};

class UnknownKeyId : public std::runtime_error {
  public:
    explicit UnknownKeyId(const KeyId& id)
        : std::runtime_error("unknown key pair " + id.name()) {}
};

class KeyExhausted : public std::runtime_error {
  public:
    KeyExhausted(const KeyId& id, std::size_t want, std::size_t have)
        : std::runtime_error("key " + id.name() + " exhausted: need " + std::to_string(want) +
                             " bits, " + std::to_string(have) + " left") {}
};

// ---------------------------------------------------------------------------
// Key registry.

enum class KeyUse : int { Blind = 0, Encrypt = 1, Decrypt = 2 };

struct KeySegment {
    std::size_t offset = 0;
    Bits bits;
};

class KeyRegistry {
  public:
    struct Usage {
        KeyUse use;
        std::size_t offset;
        std::size_t length;
        bool via_read;  // peer-side read of an already-consumed segment
    };

    // Issues one fresh random stream per declared pair. Requested lengths are
    // rounded up to a multiple of 4 bits so dumps stay hex-exact.
    static KeyRegistry init(const std::vector<std::pair<KeyId, std::size_t>>& lengths,
                            Rng& rng) {
        KeyRegistry reg;
        for (const auto& [id, len] : lengths) {
            const std::size_t rounded = (len + 3) / 4 * 4;
            PairState st;
            st.bits.resize(rounded);
            for (auto& bit : st.bits) bit = static_cast<std::uint8_t>(random_bit(rng));
            reg.pairs_.emplace(id, std::move(st));
        }
        return reg;
    }

    bool has_pair(const KeyId& id) const { return pairs_.count(id) > 0; }

    std::size_t stream_length(const KeyId& id) const { return state(id).bits.size(); }
    std::size_t cursor(const KeyId& id) const { return state(id).cursor; }
    std::size_t remaining(const KeyId& id) const {
        const PairState& st = state(id);
        return st.bits.size() - st.cursor;
    }

    // Consume the next `len` bits of the pair's stream.
    KeySegment take(const KeyId& id, std::size_t len, KeyUse use) {
        PairState& st = mutable_state(id);
        if (st.cursor + len > st.bits.size()) {
            throw KeyExhausted(id, len, st.bits.size() - st.cursor);
        }
        KeySegment seg;
        seg.offset = st.cursor;
        seg.bits.assign(st.bits.begin() + static_cast<std::ptrdiff_t>(st.cursor),
                        st.bits.begin() + static_cast<std::ptrdiff_t>(st.cursor + len));
        st.cursor += len;
        st.log.push_back({use, seg.offset, len, false});
        return seg;
    }

    // Read a previously consumed segment; the peer side of an exchange.
    Bits read(const KeyId& id, std::size_t offset, std::size_t len, KeyUse use) {
        PairState& st = mutable_state(id);
        if (offset + len > st.bits.size()) {
            throw KeyExhausted(id, len, st.bits.size() - offset);
        }
        st.log.push_back({use, offset, len, true});
        return Bits(st.bits.begin() + static_cast<std::ptrdiff_t>(offset),
                    st.bits.begin() + static_cast<std::ptrdiff_t>(offset + len));
    }

    std::vector<KeyId> key_ids() const {
        std::vector<KeyId> out;
        out.reserve(pairs_.size());
        for (const auto& [id, st] : pairs_) out.push_back(id);
        return out;
    }

    const std::vector<Usage>& usage_log(const KeyId& id) const { return state(id).log; }

    // One-time-pad discipline: consumed segments never overlap (the cursor is
    // monotone, but assert it anyway), every peer read matches exactly one
    // consumed segment of the right kind, and no segment is read twice.
    void audit() const {
        for (const auto& [id, st] : pairs_) {
            struct Taken {
                Usage u;
                int reads = 0;
            };
            std::vector<Taken> taken;
            for (const Usage& u : st.log) {
                if (u.via_read) continue;
                for (const Taken& t : taken) {
                    const bool disjoint = u.offset + u.length <= t.u.offset ||
                                          t.u.offset + t.u.length <= u.offset;
                    if (!disjoint) {
                        throw InternalError("key " + id.name() + ": overlapping segments at offset " +
                                            std::to_string(u.offset));
                    }
                }
                taken.push_back({u, 0});
            }
            for (const Usage& u : st.log) {
                if (!u.via_read) continue;
                const KeyUse expect = u.use == KeyUse::Decrypt ? KeyUse::Encrypt : u.use;
                bool matched = false;
                for (Taken& t : taken) {
                    if (t.u.use == expect && t.u.offset == u.offset && t.u.length == u.length) {
                        if (t.reads > 0) {
                            throw InternalError("key " + id.name() + ": segment at offset " +
                                                std::to_string(u.offset) + " consumed twice");
                        }
                        ++t.reads;
                        matched = true;
                        break;
                    }
                }
                if (!matched) {
                    throw InternalError("key " + id.name() +
                                        ": read of a segment never handed out (offset " +
                                        std::to_string(u.offset) + ")");
                }
            }
        }
    }

    // Text persistence, one line per pair: pair=<A>,<B> bits=<hex> cursor=<int>
    std::string dump() const {
        std::ostringstream out;
        for (const auto& [id, st] : pairs_) {
            out << "pair=" << id.name() << " bits=" << bits_to_hex(st.bits)
                << " cursor=" << st.cursor << "\n";
        }
        return out.str();
    }

    static KeyRegistry load(std::string_view text) {
        KeyRegistry reg;
        std::istringstream in{std::string(text)};
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::istringstream ls(line);
            std::string pair_tok, bits_tok, cursor_tok;
            if (!(ls >> pair_tok >> bits_tok >> cursor_tok) ||
                pair_tok.rfind("pair=", 0) != 0 || bits_tok.rfind("bits=", 0) != 0 ||
                cursor_tok.rfind("cursor=", 0) != 0) {
                throw std::invalid_argument("registry load: malformed line '" + line + "'");
            }
            const std::string names = pair_tok.substr(5);
            const auto comma = names.find(',');
            if (comma == std::string::npos) {
                throw std::invalid_argument("registry load: malformed pair '" + names + "'");
            }
            const KeyId id(party_from_string(names.substr(0, comma)),
                           party_from_string(names.substr(comma + 1)));
            PairState st;
            st.bits = hex_to_bits(bits_tok.substr(5));
            st.cursor = std::stoul(cursor_tok.substr(7));
            if (st.cursor > st.bits.size()) {
                throw std::invalid_argument("registry load: cursor past end of stream");
            }
            reg.pairs_.emplace(id, std::move(st));
        }
        return reg;
    }

  private:
    struct PairState {
        Bits bits;
        std::size_t cursor = 0;
        std::vector<Usage> log;
    };

    std::map<KeyId, PairState> pairs_;

    const PairState& state(const KeyId& id) const {
        auto it = pairs_.find(id);
        if (it == pairs_.end()) throw UnknownKeyId(id);
        return it->second;
    }
    PairState& mutable_state(const KeyId& id) {
        auto it = pairs_.find(id);
        if (it == pairs_.end()) throw UnknownKeyId(id);
        return it->second;
    }
};

// ---------------------------------------------------------------------------
// One-time pad.

struct Ciphertext {
    Bits bits;
    KeyId key_id;
    std::size_t offset = 0;  // segment start within the pair's stream
};

inline Ciphertext otp_encrypt(KeyRegistry& registry, const KeyId& id, const Bits& plain) {
    KeySegment seg = registry.take(id, plain.size(), KeyUse::Encrypt);
    return {xor_bits(plain, seg.bits), id, seg.offset};
}

inline Bits otp_decrypt(KeyRegistry& registry, const Ciphertext& ct) {
    const Bits key = registry.read(ct.key_id, ct.offset, ct.bits.size(), KeyUse::Decrypt);
    return xor_bits(ct.bits, key);
}

// ---------------------------------------------------------------------------
// Digest and blinding.

inline std::array<std::uint8_t, 32> sha256(const std::vector<std::uint8_t>& message) {
    std::array<std::uint8_t, 32> md{};
    unsigned int len = 0;
    static const std::uint8_t empty = 0;
    const std::uint8_t* data = message.empty() ? &empty : message.data();
    if (EVP_Digest(data, message.size(), md.data(), &len, EVP_sha256(), nullptr) != 1 ||
        len != md.size()) {
        throw InternalError("SHA-256 computation failed");
    }
    return md;
}

// First n bits of SHA-256(message), big-endian bit order within each byte.
inline Bits digest(const std::vector<std::uint8_t>& message, int n) {
    if (n < 2 || n > 256 || n % 2 != 0) {
        throw std::invalid_argument("digest: n must be even and within [2, 256]");
    }
    const auto md = sha256(message);
    Bits out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        out.push_back((md[static_cast<std::size_t>(i / 8)] >> (7 - i % 8)) & 1);
    }
    return out;
}

// XOR blinding of a digest against a key segment of equal length.
inline Bits blind(const Bits& digest_bits, const Bits& key_bits) {
    return xor_bits(digest_bits, key_bits);
}

// ---------------------------------------------------------------------------
// Decoy-qubit eavesdropping check. Decoys are prepared uniformly in
// {|0>,|1>,|+>,|->}; an intercept-resend attacker measures each in a random
// basis and resends the collapsed state; the receiver measures in the
// announced preparation basis. Each decoy exposes the attacker with
// probability 1/4, so t decoys detect with probability 1 - (3/4)^t.

struct EavesdropResult {
    bool pass = true;
    int decoys = 0;
    int mismatches = 0;
};

inline EavesdropResult eavesdrop_check(int decoy_count, bool intercepted, Rng& rng) {
    if (decoy_count < 0) {
        throw std::invalid_argument("eavesdrop_check: decoy count must be >= 0");
    }
    EavesdropResult result;
    result.decoys = decoy_count;
    for (int i = 0; i < decoy_count; ++i) {
        const int basis = random_bit(rng);  // 0: Z, 1: X
        const int value = random_bit(rng);
        StateVector decoy = make_basis_state({1}, value ? "1" : "0");
        if (basis == 1) decoy.apply_gate(1, kHadamard);

        if (intercepted) {
            const int eve_basis = random_bit(rng);
            const auto [eve_bit, rest] = eve_basis == 0 ? measure_z(decoy, 1, rng)
                                                        : measure_x(decoy, 1, rng);
            decoy = make_basis_state({1}, eve_bit ? "1" : "0");
            if (eve_basis == 1) decoy.apply_gate(1, kHadamard);
        }

        const auto [received, rest] =
            basis == 0 ? measure_z(decoy, 1, rng) : measure_x(decoy, 1, rng);
        if (received != value) ++result.mismatches;
    }
    result.pass = result.mismatches == 0;
    return result;
}

}  // namespace qpbs
