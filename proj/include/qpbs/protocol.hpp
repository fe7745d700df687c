// The two signature protocols as deterministic multi-party simulations with
// attack injection.
//
// The driver is a synchronous event loop: parties are passive records, every
// classical exchange is encrypted through the shared key registry and logged,
// and all randomness flows from the run seed, so a fixed SchemeConfig yields
// a byte-identical transcript.
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qpbs/channels.hpp"
#include "qpbs/config.hpp"
#include "qpbs/sigcrypto.hpp"
#include "qpbs/statevec.hpp"
#include "qpbs/teleport.hpp"
#include "qpbs/transcript.hpp"

namespace qpbs {

namespace detail {

inline Bits bell_bits(BellOutcome o) {
    return {static_cast<std::uint8_t>(o.parity_bit), static_cast<std::uint8_t>(o.phase_bit)};
}

inline BellOutcome bell_at(const Bits& bits, std::size_t at) {
    return {bits[at], bits[at + 1]};
}

inline Bits slice(const Bits& bits, std::size_t from, std::size_t len) {
    return Bits(bits.begin() + static_cast<std::ptrdiff_t>(from),
                bits.begin() + static_cast<std::ptrdiff_t>(from + len));
}

// Wire-level tampering of the signature bundles S_1/S_2. Field positions
// within one block's bundle: the originator outcome field leads, the proxy
// outcome bit trails.
class BundleAttacker {
  public:
    BundleAttacker(const SchemeConfig& cfg, int blocks, int bundle_width, int outcome_width)
        : blocks_(blocks),
          width_(bundle_width),
          outcome_width_(outcome_width),
          eve_rng_(mix_seed(cfg.seed, 0x457Dull)) {
        if (!cfg.attack) return;
        if (const auto* forge = std::get_if<ForgeAttack>(&*cfg.attack)) {
            forge_ = *forge;
            resolve_forge(cfg.scheme);
        } else if (const auto* guess = std::get_if<KeyGuessAttack>(&*cfg.attack)) {
            guess_ = *guess;
            if (guess_->guess_bits < 1 || guess_->guess_bits > blocks_ * width_) {
                throw std::invalid_argument("keyguess: guess_bits out of range [1, " +
                                            std::to_string(blocks_ * width_) + "]");
            }
        }
    }

    // Applies to an outgoing bundle ciphertext; plain is the honest content.
    void apply(Ciphertext& ct, int bundle_id, int block, const Bits& plain) {
        if (forge_ && forge_bundle_ == bundle_id && forge_block_ == block) {
            ct.bits[static_cast<std::size_t>(forge_pos_)] ^= 1;
        }
        if (guess_ && bundle_id == 1) {
            for (int pos = 0; pos < width_; ++pos) {
                const int global = block * width_ + pos;
                if (global >= guess_->guess_bits) break;
                const std::uint8_t key_bit =
                    ct.bits[static_cast<std::size_t>(pos)] ^ plain[static_cast<std::size_t>(pos)];
                const std::uint8_t guessed =
                    guess_->use_true_key ? key_bit
                                         : static_cast<std::uint8_t>(random_bit(eve_rng_));
                if (guessed != key_bit) ct.bits[static_cast<std::size_t>(pos)] ^= 1;
            }
        }
    }

  private:
    void resolve_forge(int scheme) {
        const ForgeField f = forge_->field;
        if (scheme == 1 && f == ForgeField::SB) {
            throw std::invalid_argument("forge: scheme 1 has no S_B field");
        }
        if (scheme == 2 && f == ForgeField::SD) {
            throw std::invalid_argument("forge: scheme 2 has no S_D field");
        }
        const bool leading = f == ForgeField::SA || f == ForgeField::SB;
        int bundle = forge_->bundle;
        if (bundle == 0) {
            if (f == ForgeField::SA) bundle = 1;
            else if (f == ForgeField::SB) bundle = 2;
            else if (f == ForgeField::SC) bundle = scheme == 1 ? 1 : 1;
            else bundle = 2;  // SD
        }
        if (bundle != 1 && bundle != 2) {
            throw std::invalid_argument("forge: bundle must be 1 or 2");
        }
        if (scheme == 1) {
            // S_1 = {S_A, c} under K_BC, S_2 = {S_A, d} under K_BD
            if (f == ForgeField::SC && bundle != 1) {
                throw std::invalid_argument("forge: S_C lives in bundle 1");
            }
            if (f == ForgeField::SD && bundle != 2) {
                throw std::invalid_argument("forge: S_D lives in bundle 2");
            }
        } else {
            // S_1 = {S_A, S_C} to Bob, S_2 = {S_B, S_C} to Alice
            if (f == ForgeField::SA && bundle != 1) {
                throw std::invalid_argument("forge: S_A lives in bundle 1");
            }
            if (f == ForgeField::SB && bundle != 2) {
                throw std::invalid_argument("forge: S_B lives in bundle 2");
            }
        }
        const int field_width = leading ? outcome_width_ : 1;
        const int range = blocks_ * field_width;
        if (forge_->bit < 0 || forge_->bit >= range) {
            throw std::invalid_argument("forge: bit index out of range [0, " +
                                        std::to_string(range) + ")");
        }
        forge_bundle_ = bundle;
        forge_block_ = forge_->bit / field_width;
        forge_pos_ = leading ? forge_->bit % field_width : outcome_width_;
    }

    int blocks_;
    int width_;
    int outcome_width_;
    Rng eve_rng_;
    std::optional<ForgeAttack> forge_;
    std::optional<KeyGuessAttack> guess_;
    int forge_bundle_ = 0;
    int forge_block_ = -1;
    int forge_pos_ = 0;
};

}  // namespace detail

// ---------------------------------------------------------------------------

namespace detail {

// Shared driver plumbing: registry-backed sends, logging, verdicts.
class SessionBase {
  protected:
    SessionBase(const SchemeConfig& cfg, int blocks, int bundle_width, int outcome_width)
        : cfg_(validated(cfg)),
          rng_(cfg.seed),
          attacker_(cfg_, blocks, bundle_width, outcome_width) {
        t_.scheme = cfg_.scheme;
        t_.config = cfg_;
    }

    static const SchemeConfig& validated(const SchemeConfig& cfg) {
        validate_config(cfg);
        return cfg;
    }

    void log(Event e) { t_.events.push_back(std::move(e)); }

    void issue_keys(const std::vector<std::pair<KeyId, std::size_t>>& lengths) {
        registry_.emplace(KeyRegistry::init(lengths, rng_));
        for (const KeyId& id : registry_->key_ids()) {
            log(KeyIssuedEvent{id.name(), registry_->stream_length(id)});
        }
    }

    // Encrypt, log, optionally let Eve at the wire, and deliver: the returned
    // bits are what the addressee decrypts.
    Bits send_encrypted(PartyId from, PartyId to, const KeyId& key, std::string label,
                        const Bits& plain, int block, int bundle_id = 0) {
        Ciphertext ct = otp_encrypt(*registry_, key, plain);
        if (bundle_id != 0) attacker_.apply(ct, bundle_id, block, plain);
        log(ClassicalSendEvent{from, to, std::move(label), block, key.name(), ct.offset,
                               ct.bits});
        return otp_decrypt(*registry_, ct);
    }

    Bits send_plain(PartyId from, PartyId to, std::string label, const Bits& bits,
                    int block = kNoBlock) {
        log(ClassicalSendEvent{from, to, std::move(label), block, "plain", 0, bits});
        return bits;
    }

    // Run the decoy check; on failure the whole run aborts.
    bool eavesdrop_phase() {
        const bool intercepted =
            cfg_.attack && std::holds_alternative<InterceptAttack>(*cfg_.attack);
        const EavesdropResult result = eavesdrop_check(cfg_.decoy_count, intercepted, rng_);
        log(EavesdropCheckEvent{result.pass, result.decoys, result.mismatches});
        if (!result.pass) reject("eavesdropping detected");
        return result.pass;
    }

    bool verify(PartyId party, std::string check, Bits lhs, Bits rhs, int block,
                std::string_view reason) {
        const bool pass = lhs == rhs;
        log(VerificationEvent{party, std::move(check), std::move(lhs), std::move(rhs), pass,
                              block});
        if (!pass) reject(std::string(reason) + " at block " + std::to_string(block));
        return pass;
    }

    void reject(std::string reason) {
        aborted_ = true;
        t_.verdict.accepted = false;
        t_.verdict.reason = std::move(reason);
    }

    std::optional<int> tamper_block() const {
        if (cfg_.attack) {
            if (const auto* tamper = std::get_if<TamperAttack>(&*cfg_.attack)) {
                return tamper->block;
            }
        }
        return std::nullopt;
    }

    Transcript finish() {
        registry_->audit();
        return std::move(t_);
    }

    SchemeConfig cfg_;
    Rng rng_;
    detail::BundleAttacker attacker_;
    std::optional<KeyRegistry> registry_;
    Transcript t_;
    bool aborted_ = false;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Scheme 1: five parties, six-particle channel, 2-bit blocks.

class Scheme1Session : private detail::SessionBase {
  public:
    explicit Scheme1Session(const SchemeConfig& cfg)
        : SessionBase(cfg, cfg.digest_bits / 2, 5, 4),
          blocks_(cfg.digest_bits / 2),
          ab_(PartyId::Alice, PartyId::Bob),
          bc_(PartyId::Bob, PartyId::Charlie),
          bd_(PartyId::Bob, PartyId::David),
          ta_(PartyId::Trent, PartyId::Alice),
          tb_(PartyId::Trent, PartyId::Bob),
          tc_(PartyId::Trent, PartyId::Charlie),
          td_(PartyId::Trent, PartyId::David) {
        if (cfg.scheme != 1) throw std::invalid_argument("Scheme1Session: config.scheme != 1");
        if (const auto tb = tamper_block(); tb && (*tb < 0 || *tb >= blocks_)) {
            throw std::invalid_argument("tamper: block out of range");
        }
    }

    Transcript run() {
        initial_phase();
        if (!aborted_) blinding_phase();
        for (int i = 0; i < blocks_ && !aborted_; ++i) run_block(i);
        if (!aborted_) {
            t_.verdict.accepted = true;
            t_.verdict.payload["m"] = bytes_to_hex(cfg_.message);
            t_.verdict.payload["s_c"] = bits_to_string(trent_s_c_);
            t_.verdict.payload["s_d"] = bits_to_string(trent_s_d_);
        }
        return finish();
    }

  private:
    void initial_phase() {
        const std::size_t l = static_cast<std::size_t>(blocks_);
        const int n = cfg_.digest_bits;
        issue_keys({
            {ta_, static_cast<std::size_t>(n) + 4 * l},
            {ab_, 4 * l},
            {bc_, 9 * l},
            {bd_, 9 * l},
            {tb_, 8},  // declared by the key table; this scheme never consumes it
            {tc_, 5 * l},
            {td_, 5 * l},
        });
        // Bob builds the channel states and distributes the particles.
        const StateVector channel = make_channel_scheme1().state;
        channels_.assign(static_cast<std::size_t>(blocks_), channel);
        log(ChannelDistributedEvent{blocks_,
                                    cfg_.decoy_count,
                                    {{"3", "alice"},
                                     {"7", "alice"},
                                     {"4", "charlie"},
                                     {"5", "david"},
                                     {"6", "bob"},
                                     {"8", "bob"}}});
        eavesdrop_phase();
    }

    void blinding_phase() {
        const int n = cfg_.digest_bits;
        const Bits m_received = send_plain(PartyId::Alice, PartyId::Trent, "m",
                                           bytes_to_bits(cfg_.message));
        const KeySegment mask = registry_->take(ta_, static_cast<std::size_t>(n), KeyUse::Blind);
        blinded_ = blind(digest(cfg_.message, n), mask.bits);
        // Trent reads the same mask segment and recomputes the blinded digest
        // from the message he was sent.
        const Bits trent_mask =
            registry_->read(ta_, mask.offset, static_cast<std::size_t>(n), KeyUse::Blind);
        trent_expected_ = blind(digest(bits_to_bytes(m_received), n), trent_mask);
    }

    void run_block(int i) {
        StateVector s = tensor(encode_block_scheme1(blinded_[2 * static_cast<std::size_t>(i)],
                                                    blinded_[2 * static_cast<std::size_t>(i) + 1]),
                               channels_[static_cast<std::size_t>(i)]);

        auto [b13, after13] = measure_bell(s, 1, 3, rng_);
        log(MeasurementEvent{PartyId::Alice, "bell(1,3)", detail::bell_bits(b13), i});
        auto [b27, state] = measure_bell(after13, 2, 7, rng_);
        log(MeasurementEvent{PartyId::Alice, "bell(2,7)", detail::bell_bits(b27), i});
        const Bits sa = concat_bits(detail::bell_bits(b13), detail::bell_bits(b27));

        const Bits sa_trent =
            send_encrypted(PartyId::Alice, PartyId::Trent, ta_, "E_KTA{S_A}", sa, i);
        const Bits sa_bob =
            send_encrypted(PartyId::Alice, PartyId::Bob, ab_, "E_KAB{S_A}", sa, i);

        // Stage-1 corrections from Bob's copy of S_A, before the controllers
        // have spoken.
        const PauliPair stage1 =
            scheme1_table().at(detail::bell_at(sa_bob, 0), detail::bell_at(sa_bob, 2), 0, 0);
        state.apply_pauli(6, stage1.first);
        log(CorrectionEvent{PartyId::Bob, 6, stage1.first, i});
        state.apply_pauli(8, stage1.second);
        log(CorrectionEvent{PartyId::Bob, 8, stage1.second, i});

        const Bits sa_charlie =
            send_encrypted(PartyId::Bob, PartyId::Charlie, bc_, "E_KBC{S_A}", sa_bob, i);
        const Bits sa_david =
            send_encrypted(PartyId::Bob, PartyId::David, bd_, "E_KBD{S_A}", sa_bob, i);

        // Controllers consent: Hadamard then a Z measurement each.
        state.apply_gate(4, kHadamard);
        auto [c, after_c] = measure_z(state, 4, rng_);
        log(MeasurementEvent{PartyId::Charlie, "z(4)", Bits{static_cast<std::uint8_t>(c)}, i});
        after_c.apply_gate(5, kHadamard);
        auto [d, after_d] = measure_z(after_c, 5, rng_);
        log(MeasurementEvent{PartyId::David, "z(5)", Bits{static_cast<std::uint8_t>(d)}, i});

        // Proxy authorizations to Bob and copies to Trent.
        const Bits s1_plain = concat_bits(sa_charlie, Bits{static_cast<std::uint8_t>(c)});
        const Bits s2_plain = concat_bits(sa_david, Bits{static_cast<std::uint8_t>(d)});
        const Bits s1_bob =
            send_encrypted(PartyId::Charlie, PartyId::Bob, bc_, "S_1", s1_plain, i, 1);
        const Bits s2_bob =
            send_encrypted(PartyId::David, PartyId::Bob, bd_, "S_2", s2_plain, i, 2);
        const Bits trent_c_bundle =
            send_encrypted(PartyId::Charlie, PartyId::Trent, tc_, "E_KTC{S_A,S_C}", s1_plain, i);
        const Bits trent_d_bundle =
            send_encrypted(PartyId::David, PartyId::Trent, td_, "E_KTD{S_A,S_D}", s2_plain, i);

        // Trent cross-checks every relayed S_A copy against Alice's.
        if (!verify(PartyId::Trent, "trent_sa_consistent_charlie",
                    detail::slice(trent_c_bundle, 0, 4), sa_trent, i,
                    "S_A mismatch at Trent (Charlie copy)")) {
            return;
        }
        if (!verify(PartyId::Trent, "trent_sa_consistent_david",
                    detail::slice(trent_d_bundle, 0, 4), sa_trent, i,
                    "S_A mismatch at Trent (David copy)")) {
            return;
        }

        // Bob checks both embedded S_A copies against Alice's direct send.
        if (!verify(PartyId::Bob, "bob_sa_match_s1", detail::slice(s1_bob, 0, 4), sa_bob, i,
                    "S_A mismatch in S_1")) {
            return;
        }
        if (!verify(PartyId::Bob, "bob_sa_match_s2", detail::slice(s2_bob, 0, 4), sa_bob, i,
                    "S_A mismatch in S_2")) {
            return;
        }

        const int c_bob = s1_bob[4];
        const int d_bob = s2_bob[4];
        if (c_bob != d_bob) {
            after_d.apply_gate(6, kPauliX);
            log(CorrectionEvent{PartyId::Bob, 6, Pauli::X, i});
        }
        if (const auto tb = tamper_block(); tb && *tb == i) {
            after_d.apply_gate(6, kPauliX);  // in-flight tamper, leaves no event
        }

        // Bob hands the reconstructed pair to Trent, who decodes it.
        auto [m6, after_m6] = measure_z(after_d, 6, rng_);
        log(MeasurementEvent{PartyId::Trent, "z(6)", Bits{static_cast<std::uint8_t>(m6)}, i});
        auto [m8, after_m8] = measure_z(after_m6, 8, rng_);
        log(MeasurementEvent{PartyId::Trent, "z(8)", Bits{static_cast<std::uint8_t>(m8)}, i});

        if (!verify(PartyId::Trent, "trent_digest_block",
                    Bits{static_cast<std::uint8_t>(m6), static_cast<std::uint8_t>(m8)},
                    detail::slice(trent_expected_, 2 * static_cast<std::size_t>(i), 2), i,
                    "blinded digest mismatch")) {
            return;
        }

        trent_s_c_.push_back(trent_c_bundle[4]);
        trent_s_d_.push_back(trent_d_bundle[4]);
    }

    int blocks_;
    KeyId ab_, bc_, bd_, ta_, tb_, tc_, td_;
    std::vector<StateVector> channels_;
    Bits blinded_;         // M, Alice's view
    Bits trent_expected_;  // M, Trent's independent recomputation
    Bits trent_s_c_;
    Bits trent_s_d_;
};

// ---------------------------------------------------------------------------
// Scheme 2: four parties, five-qubit cluster channel, 1-bit blocks, two-way.

class Scheme2Session : private detail::SessionBase {
  public:
    explicit Scheme2Session(const SchemeConfig& cfg)
        : SessionBase(cfg, cfg.digest_bits, 3, 2),
          blocks_(cfg.digest_bits),
          ab_(PartyId::Alice, PartyId::Bob),
          ac_(PartyId::Alice, PartyId::Charlie),
          bc_(PartyId::Bob, PartyId::Charlie),
          ta_(PartyId::Trent, PartyId::Alice),
          tb_(PartyId::Trent, PartyId::Bob),
          tc_(PartyId::Trent, PartyId::Charlie) {
        if (cfg.scheme != 2) throw std::invalid_argument("Scheme2Session: config.scheme != 2");
        if (const auto tb = tamper_block(); tb && (*tb < 0 || *tb >= blocks_)) {
            throw std::invalid_argument("tamper: block out of range");
        }
    }

    Transcript run() {
        initial_phase();
        if (!aborted_) blinding_phase();
        for (int i = 0; i < blocks_ && !aborted_; ++i) run_block(i);
        if (!aborted_) {
            t_.verdict.accepted = true;
            t_.verdict.payload["m_a"] = bytes_to_hex(cfg_.message_a);
            t_.verdict.payload["m_b"] = bytes_to_hex(cfg_.message_b);
            t_.verdict.payload["s_a"] = bits_to_string(trent_s_a_);
            t_.verdict.payload["s_b"] = bits_to_string(trent_s_b_);
            t_.verdict.payload["s_c"] = bits_to_string(trent_s_c_);
        }
        return finish();
    }

  private:
    void initial_phase() {
        const std::size_t q = static_cast<std::size_t>(blocks_);
        const std::size_t n = static_cast<std::size_t>(cfg_.digest_bits);
        issue_keys({
            {ab_, 4 * q},
            {ac_, 5 * q},
            {bc_, 5 * q},
            {ta_, n + 3 * q},
            {tb_, n + 3 * q},
            {tc_, 6 * q},
        });
        const StateVector channel = make_channel_scheme2().state;
        channels_.assign(q, channel);
        log(ChannelDistributedEvent{blocks_,
                                    cfg_.decoy_count,
                                    {{"1", "alice"},
                                     {"5", "alice"},
                                     {"4", "charlie"},
                                     {"2", "bob"},
                                     {"3", "bob"}}});
        eavesdrop_phase();
    }

    void blinding_phase() {
        const int n = cfg_.digest_bits;
        const Bits ma_received = send_plain(PartyId::Alice, PartyId::Trent, "m_a",
                                            bytes_to_bits(cfg_.message_a));
        const KeySegment mask_a = registry_->take(ta_, static_cast<std::size_t>(n), KeyUse::Blind);
        blinded_a_ = blind(digest(cfg_.message_a, n), mask_a.bits);
        trent_expected_a_ = blind(
            digest(bits_to_bytes(ma_received), n),
            registry_->read(ta_, mask_a.offset, static_cast<std::size_t>(n), KeyUse::Blind));

        const Bits mb_received = send_plain(PartyId::Bob, PartyId::Trent, "m_b",
                                            bytes_to_bits(cfg_.message_b));
        const KeySegment mask_b = registry_->take(tb_, static_cast<std::size_t>(n), KeyUse::Blind);
        blinded_b_ = blind(digest(cfg_.message_b, n), mask_b.bits);
        trent_expected_b_ = blind(
            digest(bits_to_bytes(mb_received), n),
            registry_->read(tb_, mask_b.offset, static_cast<std::size_t>(n), KeyUse::Blind));
    }

    void run_block(int i) {
        const std::size_t iu = static_cast<std::size_t>(i);
        StateVector s = tensor(tensor(encode_bit_scheme2(blinded_b_[iu], kParticleB),
                                      encode_bit_scheme2(blinded_a_[iu], kParticleA)),
                               channels_[iu]);

        auto [ba1, after_a] = measure_bell(s, kParticleA, 1, rng_);
        log(MeasurementEvent{PartyId::Alice, "bell(A,1)", detail::bell_bits(ba1), i});
        auto [bb3, state] = measure_bell(after_a, kParticleB, 3, rng_);
        log(MeasurementEvent{PartyId::Bob, "bell(B,3)", detail::bell_bits(bb3), i});

        const Bits sa = detail::bell_bits(ba1);
        const Bits sb = detail::bell_bits(bb3);
        const Bits sa_bob =
            send_encrypted(PartyId::Alice, PartyId::Bob, ab_, "E_KAB{S_A}", sa, i);
        const Bits sa_charlie =
            send_encrypted(PartyId::Alice, PartyId::Charlie, ac_, "E_KAC{S_A}", sa, i);
        const Bits sb_alice =
            send_encrypted(PartyId::Bob, PartyId::Alice, ab_, "E_KAB{S_B}", sb, i);
        const Bits sb_charlie =
            send_encrypted(PartyId::Bob, PartyId::Charlie, bc_, "E_KBC{S_B}", sb, i);

        auto [x4, after_x] = measure_x(state, 4, rng_);
        log(MeasurementEvent{PartyId::Charlie, "x(4)", Bits{static_cast<std::uint8_t>(x4)}, i});

        const Bits s1_plain = concat_bits(sa_charlie, Bits{static_cast<std::uint8_t>(x4)});
        const Bits s2_plain = concat_bits(sb_charlie, Bits{static_cast<std::uint8_t>(x4)});
        const Bits s1_bob =
            send_encrypted(PartyId::Charlie, PartyId::Bob, bc_, "S_1", s1_plain, i, 1);
        const Bits s2_alice =
            send_encrypted(PartyId::Charlie, PartyId::Alice, ac_, "S_2", s2_plain, i, 2);
        const Bits trent_a_bundle =
            send_encrypted(PartyId::Charlie, PartyId::Trent, tc_, "E_KTC{S_A,S_C}", s1_plain, i);
        const Bits trent_b_bundle =
            send_encrypted(PartyId::Charlie, PartyId::Trent, tc_, "E_KTC{S_B,S_C}", s2_plain, i);

        if (!verify(PartyId::Trent, "trent_sc_consistent", Bits{trent_a_bundle[2]},
                    Bits{trent_b_bundle[2]}, i, "S_C mismatch at Trent")) {
            return;
        }

        if (!verify(PartyId::Bob, "bob_sa_match", detail::slice(s1_bob, 0, 2), sa_bob, i,
                    "S_A mismatch in S_1")) {
            return;
        }
        if (!verify(PartyId::Alice, "alice_sb_match", detail::slice(s2_alice, 0, 2), sb_alice, i,
                    "S_B mismatch in S_2")) {
            return;
        }
        const int x4_bob = s1_bob[2];
        const int x4_alice = s2_alice[2];

        // Each original signer forwards what they verified; Trent compares
        // against the proxy's own copies. This is what catches a forged S_C,
        // which only shifts a phase on the teleported qubit and is invisible
        // to the Z-basis decoding below.
        const Bits fwd_a = send_encrypted(PartyId::Bob, PartyId::Trent, tb_, "E_KTB{S_A,S_C}",
                                          concat_bits(sa_bob, Bits{static_cast<std::uint8_t>(x4_bob)}), i);
        const Bits fwd_b = send_encrypted(PartyId::Alice, PartyId::Trent, ta_, "E_KTA{S_B,S_C}",
                                          concat_bits(sb_alice, Bits{static_cast<std::uint8_t>(x4_alice)}), i);
        if (!verify(PartyId::Trent, "trent_bundle_match_a", fwd_a, trent_a_bundle, i,
                    "bundle mismatch at Trent (direction A)")) {
            return;
        }
        if (!verify(PartyId::Trent, "trent_bundle_match_b", fwd_b, trent_b_bundle, i,
                    "bundle mismatch at Trent (direction B)")) {
            return;
        }

        // Corrections. The table is certified so that particle 2 ignores
        // bell(B,3) and particle 5 ignores bell(A,1); each side only needs
        // its own inputs.
        const Pauli p2 =
            scheme2_table().at(detail::bell_at(sa_bob, 0), BellOutcome{0, 0}, x4_bob).first;
        after_x.apply_pauli(2, p2);
        log(CorrectionEvent{PartyId::Bob, 2, p2, i});
        const Pauli p5 =
            scheme2_table().at(BellOutcome{0, 0}, detail::bell_at(sb_alice, 0), x4_alice).second;
        after_x.apply_pauli(5, p5);
        log(CorrectionEvent{PartyId::Alice, 5, p5, i});

        if (const auto tb = tamper_block(); tb && *tb == i) {
            after_x.apply_gate(5, kPauliX);  // in-flight tamper, leaves no event
        }

        auto [z2, after_z2] = measure_z(after_x, 2, rng_);
        log(MeasurementEvent{PartyId::Trent, "z(2)", Bits{static_cast<std::uint8_t>(z2)}, i});
        if (!verify(PartyId::Trent, "trent_digest_a", Bits{static_cast<std::uint8_t>(z2)},
                    Bits{trent_expected_a_[iu]}, i, "blinded digest mismatch (direction A)")) {
            return;
        }
        auto [z5, after_z5] = measure_z(after_z2, 5, rng_);
        log(MeasurementEvent{PartyId::Trent, "z(5)", Bits{static_cast<std::uint8_t>(z5)}, i});
        if (!verify(PartyId::Trent, "trent_digest_b", Bits{static_cast<std::uint8_t>(z5)},
                    Bits{trent_expected_b_[iu]}, i, "blinded digest mismatch (direction B)")) {
            return;
        }

        trent_s_a_.insert(trent_s_a_.end(), trent_a_bundle.begin(), trent_a_bundle.begin() + 2);
        trent_s_b_.insert(trent_s_b_.end(), trent_b_bundle.begin(), trent_b_bundle.begin() + 2);
        trent_s_c_.push_back(trent_a_bundle[2]);
    }

    int blocks_;
    KeyId ab_, ac_, bc_, ta_, tb_, tc_;
    std::vector<StateVector> channels_;
    Bits blinded_a_, blinded_b_;
    Bits trent_expected_a_, trent_expected_b_;
    Bits trent_s_a_, trent_s_b_, trent_s_c_;
};

// ---------------------------------------------------------------------------

inline Transcript run_scheme1(const SchemeConfig& cfg) { return Scheme1Session(cfg).run(); }
inline Transcript run_scheme2(const SchemeConfig& cfg) { return Scheme2Session(cfg).run(); }

inline Transcript run_protocol(const SchemeConfig& cfg) {
    return cfg.scheme == 1 ? run_scheme1(cfg) : run_scheme2(cfg);
}

// ---------------------------------------------------------------------------
// Monte Carlo experiments.

struct ExperimentResult {
    long long trials = 0;
    long long hits = 0;
    double frequency = 0.0;
};

// Fraction of runs Eve's key guess slips through; expected 2^-guess_bits.
inline ExperimentResult key_guess_experiment(const SchemeConfig& base, long long trials) {
    if (!base.attack || !std::holds_alternative<KeyGuessAttack>(*base.attack)) {
        throw std::invalid_argument("key_guess_experiment: config must carry a keyguess attack");
    }
    ExperimentResult result;
    result.trials = trials;
    SchemeConfig cfg = base;
    for (long long trial = 0; trial < trials; ++trial) {
        cfg.seed = mix_seed(base.seed, static_cast<std::uint64_t>(trial));
        const Transcript t = run_protocol(cfg);
        if (t.verdict.accepted) ++result.hits;
    }
    result.frequency = static_cast<double>(result.hits) / static_cast<double>(trials);
    return result;
}

// Fraction of intercepted runs that abort at the decoy check; expected
// 1 - (3/4)^t.
inline ExperimentResult eavesdrop_experiment(const SchemeConfig& base, long long trials) {
    if (!base.attack || !std::holds_alternative<InterceptAttack>(*base.attack)) {
        throw std::invalid_argument("eavesdrop_experiment: config must carry an intercept attack");
    }
    ExperimentResult result;
    result.trials = trials;
    SchemeConfig cfg = base;
    for (long long trial = 0; trial < trials; ++trial) {
        cfg.seed = mix_seed(base.seed, static_cast<std::uint64_t>(trial));
        const Transcript t = run_protocol(cfg);
        if (!t.verdict.accepted && t.verdict.reason == "eavesdropping detected") ++result.hits;
    }
    result.frequency = static_cast<double>(result.hits) / static_cast<double>(trials);
    return result;
}

}  // namespace qpbs
