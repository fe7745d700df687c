// The two controlled-teleportation procedures. Correction tables are derived
// by exhaustive search over Pauli corrections and certified against a probe
// set spanning the message space (including complex relative phases); the
// result is frozen as data and reloaded at protocol start.
#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qpbs/channels.hpp"
#include "qpbs/correction_data.hpp"
#include "qpbs/statevec.hpp"

namespace qpbs {

inline constexpr double kTeleportFidelityTol = 1e-9;

// Raised when the exhaustive search cannot certify a unique Pauli correction
// for some outcome tuple. That means the channel amplitudes or a sign
// convention are wrong; the build halts rather than widening the search.
class NoCorrectionFound : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct PauliPair {
    Pauli first = Pauli::I;
    Pauli second = Pauli::I;
    bool operator==(const PauliPair&) const = default;
};

struct Scheme1Outcomes {
    BellOutcome bell_13;
    BellOutcome bell_27;
    int c = 0;  // Charlie, particle 4
    int d = 0;  // David, particle 5
};

struct Scheme2Outcomes {
    BellOutcome bell_a1;
    BellOutcome bell_b3;
    int x4 = 0;  // Charlie, particle 4, |+/-> basis
};

namespace detail {

inline const std::array<Pauli, 4> kAllPaulis{Pauli::I, Pauli::X, Pauli::Z, Pauli::XZ};

inline void serialize_header(std::ostringstream& out, std::string_view columns) {
    out << "# " << columns << "\n";
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Correction tables. Entries map a complete measurement-outcome tuple to the
// Pauli pair the receiver(s) must apply.

class Scheme1CorrectionTable {
  public:
    static int index(BellOutcome b13, BellOutcome b27, int c, int d) {
        return b13.index() << 4 | b27.index() << 2 | (c & 1) << 1 | (d & 1);
    }

    // Pauli corrections for (particle 6, particle 8).
    const PauliPair& at(BellOutcome b13, BellOutcome b27, int c, int d) const {
        return entries_[index(b13, b27, c, d)];
    }
    PauliPair& entry(int idx) { return entries_[static_cast<std::size_t>(idx)]; }
    const PauliPair& entry(int idx) const { return entries_[static_cast<std::size_t>(idx)]; }

    bool operator==(const Scheme1CorrectionTable&) const = default;

    std::string serialize() const {
        std::ostringstream out;
        out << "# Pauli corrections for the six-particle teleportation channel.\n";
        out << "# columns: bell13(parity phase) bell27(parity phase) c d pauli6 pauli8\n";
        for (int idx = 0; idx < 64; ++idx) {
            const int b13 = idx >> 4, b27 = (idx >> 2) & 3, c = (idx >> 1) & 1, d = idx & 1;
            out << ((b13 >> 1) & 1) << (b13 & 1) << ' ' << ((b27 >> 1) & 1) << (b27 & 1)
                << ' ' << c << ' ' << d << ' ' << pauli_name(entries_[idx].first) << ' '
                << pauli_name(entries_[idx].second) << "\n";
        }
        return out.str();
    }

    static Scheme1CorrectionTable parse(std::string_view text);

  private:
    std::array<PauliPair, 64> entries_{};
};

class Scheme2CorrectionTable {
  public:
    static int index(BellOutcome ba1, BellOutcome bb3, int x4) {
        return ba1.index() << 3 | bb3.index() << 1 | (x4 & 1);
    }

    // Pauli corrections for (particle 2, particle 5).
    const PauliPair& at(BellOutcome ba1, BellOutcome bb3, int x4) const {
        return entries_[index(ba1, bb3, x4)];
    }
    PauliPair& entry(int idx) { return entries_[static_cast<std::size_t>(idx)]; }
    const PauliPair& entry(int idx) const { return entries_[static_cast<std::size_t>(idx)]; }

    bool operator==(const Scheme2CorrectionTable&) const = default;

    std::string serialize() const {
        std::ostringstream out;
        out << "# Pauli corrections for the five-qubit two-way teleportation channel.\n";
        out << "# columns: bellA1(parity phase) bellB3(parity phase) x4 pauli2 pauli5\n";
        for (int idx = 0; idx < 32; ++idx) {
            const int ba1 = idx >> 3, bb3 = (idx >> 1) & 3, x4 = idx & 1;
            out << ((ba1 >> 1) & 1) << (ba1 & 1) << ' ' << ((bb3 >> 1) & 1) << (bb3 & 1)
                << ' ' << x4 << ' ' << pauli_name(entries_[idx].first) << ' '
                << pauli_name(entries_[idx].second) << "\n";
        }
        return out.str();
    }

    static Scheme2CorrectionTable parse(std::string_view text);

  private:
    std::array<PauliPair, 32> entries_{};
};

namespace detail {

struct TableLine {
    std::vector<int> fields;
    Pauli first = Pauli::I;
    Pauli second = Pauli::I;
};

// Lines are "<2-bit bell> <2-bit bell> <bit...> <pauli> <pauli>"; '#' starts
// a comment.
inline std::vector<TableLine> parse_table_lines(std::string_view text, std::size_t bit_fields) {
    std::vector<TableLine> lines;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        TableLine out;
        std::string tok;
        for (std::size_t f = 0; f < bit_fields; ++f) {
            if (!(ls >> tok)) throw std::invalid_argument("correction table: short line '" + line + "'");
            int value = 0;
            for (char ch : tok) {
                if (ch != '0' && ch != '1') {
                    throw std::invalid_argument("correction table: bad field '" + tok + "'");
                }
                value = value << 1 | (ch == '1');
            }
            out.fields.push_back(value);
        }
        std::string p1, p2;
        if (!(ls >> p1 >> p2)) throw std::invalid_argument("correction table: missing paulis in '" + line + "'");
        out.first = pauli_from_name(p1);
        out.second = pauli_from_name(p2);
        lines.push_back(std::move(out));
    }
    return lines;
}

}  // namespace detail

inline Scheme1CorrectionTable Scheme1CorrectionTable::parse(std::string_view text) {
    const auto lines = detail::parse_table_lines(text, 4);
    if (lines.size() != 64) {
        throw std::invalid_argument("scheme-1 correction table must have 64 entries, found " +
                                    std::to_string(lines.size()));
    }
    Scheme1CorrectionTable table;
    std::array<bool, 64> seen{};
    for (const auto& l : lines) {
        const int idx = l.fields[0] << 4 | l.fields[1] << 2 | l.fields[2] << 1 | l.fields[3];
        if (seen[idx]) throw std::invalid_argument("scheme-1 correction table: duplicate tuple");
        seen[idx] = true;
        table.entries_[idx] = {l.first, l.second};
    }
    return table;
}

inline Scheme2CorrectionTable Scheme2CorrectionTable::parse(std::string_view text) {
    const auto lines = detail::parse_table_lines(text, 3);
    if (lines.size() != 32) {
        throw std::invalid_argument("scheme-2 correction table must have 32 entries, found " +
                                    std::to_string(lines.size()));
    }
    Scheme2CorrectionTable table;
    std::array<bool, 32> seen{};
    for (const auto& l : lines) {
        const int idx = l.fields[0] << 3 | l.fields[1] << 1 | l.fields[2];
        if (seen[idx]) throw std::invalid_argument("scheme-2 correction table: duplicate tuple");
        seen[idx] = true;
        table.entries_[idx] = {l.first, l.second};
    }
    return table;
}

// ---------------------------------------------------------------------------
// Probe sets. Informationally complete for pinning a Pauli correction: the
// basis states break any X component, the superposed states with real and
// complex relative phase break pure-Z components.

inline std::vector<StateVector> scheme1_probe_states() {
    std::vector<StateVector> probes;
    probes.push_back(make_basis_state({1, 2}, "00"));
    probes.push_back(make_basis_state({1, 2}, "01"));
    probes.push_back(make_basis_state({1, 2}, "10"));
    probes.push_back(make_basis_state({1, 2}, "11"));
    probes.push_back(StateVector({1, 2}, {Amplitude{M_SQRT1_2, 0}, {0, 0}, {0, 0}, Amplitude{M_SQRT1_2, 0}}));
    probes.push_back(StateVector({1, 2}, {Amplitude{M_SQRT1_2, 0}, Amplitude{0, M_SQRT1_2}, {0, 0}, {0, 0}}));
    return probes;
}

inline std::vector<StateVector> scheme2_probe_states(QubitLabel label) {
    std::vector<StateVector> probes;
    probes.push_back(make_basis_state({label}, "0"));
    probes.push_back(make_basis_state({label}, "1"));
    probes.push_back(StateVector({label}, {Amplitude{M_SQRT1_2, 0}, Amplitude{M_SQRT1_2, 0}}));
    probes.push_back(StateVector({label}, {Amplitude{M_SQRT1_2, 0}, Amplitude{0, M_SQRT1_2}}));
    return probes;
}

// ---------------------------------------------------------------------------
// Deterministic projection cascades: condition on a full outcome tuple
// instead of sampling. Probability is the joint weight of the branch.

struct OutcomeProjection {
    double probability = 0.0;
    std::optional<StateVector> state;
};

// Message on (1,2) through the six-particle channel; residual on (6,8).
inline OutcomeProjection project_scheme1_outcome(const StateVector& msg, BellOutcome b13,
                                                 BellOutcome b27, int c, int d) {
    StateVector s = tensor(msg, make_channel_scheme1().state);
    double probability = 1.0;

    Projection pr = s.project_bell(1, 3, b13);
    if (!pr.state) return {0.0, std::nullopt};
    probability *= pr.probability;
    s = std::move(*pr.state);

    pr = s.project_bell(2, 7, b27);
    if (!pr.state) return {0.0, std::nullopt};
    probability *= pr.probability;
    s = std::move(*pr.state);

    s.apply_gate(4, kHadamard);
    pr = s.project_z(4, c);
    if (!pr.state) return {0.0, std::nullopt};
    probability *= pr.probability;
    s = std::move(*pr.state);

    s.apply_gate(5, kHadamard);
    pr = s.project_z(5, d);
    if (!pr.state) return {0.0, std::nullopt};
    probability *= pr.probability;
    s = std::move(*pr.state);

    return {probability, std::move(s)};
}

// Messages on A and B through the cluster channel; residual on (2,5).
inline OutcomeProjection project_scheme2_outcome(const StateVector& msg_a,
                                                 const StateVector& msg_b, BellOutcome ba1,
                                                 BellOutcome bb3, int x4) {
    StateVector s = tensor(tensor(msg_b, msg_a), make_channel_scheme2().state);
    double probability = 1.0;

    Projection pr = s.project_bell(kParticleA, 1, ba1);
    if (!pr.state) return {0.0, std::nullopt};
    probability *= pr.probability;
    s = std::move(*pr.state);

    pr = s.project_bell(kParticleB, 3, bb3);
    if (!pr.state) return {0.0, std::nullopt};
    probability *= pr.probability;
    s = std::move(*pr.state);

    pr = s.project_x(4, x4);
    if (!pr.state) return {0.0, std::nullopt};
    probability *= pr.probability;
    s = std::move(*pr.state);

    return {probability, std::move(s)};
}

// ---------------------------------------------------------------------------
// Brute-force derivation.

inline Scheme1CorrectionTable derive_correction_table_scheme1() {
    const std::vector<StateVector> probes = scheme1_probe_states();
    Scheme1CorrectionTable table;
    for (int idx = 0; idx < 64; ++idx) {
        const BellOutcome b13 = BellOutcome::from_index(idx >> 4);
        const BellOutcome b27 = BellOutcome::from_index((idx >> 2) & 3);
        const int c = (idx >> 1) & 1;
        const int d = idx & 1;

        std::vector<std::pair<StateVector, const StateVector*>> collapsed;
        for (const StateVector& probe : probes) {
            OutcomeProjection pr = project_scheme1_outcome(probe, b13, b27, c, d);
            if (pr.state) collapsed.emplace_back(std::move(*pr.state), &probe);
        }
        if (collapsed.empty()) {
            throw NoCorrectionFound("scheme 1 tuple " + std::to_string(idx) +
                                    ": every probe collapses with probability 0");
        }

        int matches = 0;
        PauliPair found;
        for (Pauli p6 : detail::kAllPaulis) {
            for (Pauli p8 : detail::kAllPaulis) {
                bool all_ok = true;
                for (const auto& [state, probe] : collapsed) {
                    StateVector fixed = state;
                    fixed.apply_pauli(6, p6);
                    fixed.apply_pauli(8, p8);
                    if (fidelity(probe->relabeled({6, 8}), fixed) < 1.0 - kTeleportFidelityTol) {
                        all_ok = false;
                        break;
                    }
                }
                if (all_ok) {
                    ++matches;
                    found = {p6, p8};
                }
            }
        }
        if (matches != 1) {
            throw NoCorrectionFound("scheme 1 tuple " + std::to_string(idx) + ": " +
                                    (matches == 0 ? "no Pauli pair restores the probes"
                                                  : "correction is ambiguous"));
        }
        table.entry(idx) = found;
    }
    return table;
}

inline Scheme2CorrectionTable derive_correction_table_scheme2() {
    const std::vector<StateVector> probes_a = scheme2_probe_states(kParticleA);
    const std::vector<StateVector> probes_b = scheme2_probe_states(kParticleB);
    Scheme2CorrectionTable table;
    for (int idx = 0; idx < 32; ++idx) {
        const BellOutcome ba1 = BellOutcome::from_index(idx >> 3);
        const BellOutcome bb3 = BellOutcome::from_index((idx >> 1) & 3);
        const int x4 = idx & 1;

        struct Case {
            StateVector state;
            const StateVector* pa;
            const StateVector* pb;
        };
        std::vector<Case> collapsed;
        for (const StateVector& pa : probes_a) {
            for (const StateVector& pb : probes_b) {
                OutcomeProjection pr = project_scheme2_outcome(pa, pb, ba1, bb3, x4);
                if (pr.state) collapsed.push_back({std::move(*pr.state), &pa, &pb});
            }
        }
        if (collapsed.empty()) {
            throw NoCorrectionFound("scheme 2 tuple " + std::to_string(idx) +
                                    ": every probe collapses with probability 0");
        }

        int matches = 0;
        PauliPair found;
        for (Pauli p2 : detail::kAllPaulis) {
            for (Pauli p5 : detail::kAllPaulis) {
                bool all_ok = true;
                for (const auto& cs : collapsed) {
                    StateVector fixed = cs.state;
                    fixed.apply_pauli(2, p2);
                    fixed.apply_pauli(5, p5);
                    const StateVector expect =
                        tensor(cs.pa->relabeled({2}), cs.pb->relabeled({5}));
                    if (fidelity(expect, fixed) < 1.0 - kTeleportFidelityTol) {
                        all_ok = false;
                        break;
                    }
                }
                if (all_ok) {
                    ++matches;
                    found = {p2, p5};
                }
            }
        }
        if (matches != 1) {
            throw NoCorrectionFound("scheme 2 tuple " + std::to_string(idx) + ": " +
                                    (matches == 0 ? "no Pauli pair restores the probes"
                                                  : "correction is ambiguous"));
        }
        table.entry(idx) = found;
    }
    return table;
}

// Frozen tables, parsed once from the committed data. Regeneration via
// derive_correction_table_scheme*() must serialize to the identical text.
inline const Scheme1CorrectionTable& scheme1_table() {
    static const Scheme1CorrectionTable table =
        Scheme1CorrectionTable::parse(kScheme1CorrectionTableText);
    return table;
}

inline const Scheme2CorrectionTable& scheme2_table() {
    static const Scheme2CorrectionTable table =
        Scheme2CorrectionTable::parse(kScheme2CorrectionTableText);
    return table;
}

// ---------------------------------------------------------------------------
// Sampled teleportation runs.

struct Scheme1TeleportResult {
    Scheme1Outcomes outcomes;
    StateVector state;  // on (6,8)
};

struct Scheme2TeleportResult {
    Scheme2Outcomes outcomes;
    StateVector state_2;  // Alice's message, arrived at Bob
    StateVector state_5;  // Bob's message, arrived at Alice
};

inline Scheme1TeleportResult run_teleport_scheme1(const StateVector& msg, Rng& rng) {
    if (msg.num_qubits() != 2) {
        throw std::invalid_argument("run_teleport_scheme1: message must be 2 qubits on (1,2)");
    }
    const Scheme1CorrectionTable& table = scheme1_table();
    StateVector s = tensor(msg.relabeled({1, 2}), make_channel_scheme1().state);

    auto [b13, after_13] = measure_bell(s, 1, 3, rng);
    auto [b27, after_27] = measure_bell(after_13, 2, 7, rng);

    // Stage 1: the receiver corrects from the sender's outcomes alone.
    const PauliPair stage1 = table.at(b13, b27, 0, 0);
    after_27.apply_pauli(6, stage1.first);
    after_27.apply_pauli(8, stage1.second);

    // Controllers consent: Hadamard, then a Z-basis measurement each.
    after_27.apply_gate(4, kHadamard);
    auto [c, after_c] = measure_z(after_27, 4, rng);
    after_c.apply_gate(5, kHadamard);
    auto [d, after_d] = measure_z(after_c, 5, rng);

    // Stage 2: an X on particle 6 exactly when the controllers disagree.
    if (c != d) after_d.apply_gate(6, kPauliX);

    return {{b13, b27, c, d}, std::move(after_d)};
}

// Exact single-qubit factors of a two-qubit product state, up to global
// phase. Used to hand the two teleported qubits back separately.
inline std::pair<StateVector, StateVector> split_product_pair(const StateVector& s) {
    if (s.num_qubits() != 2) {
        throw std::invalid_argument("split_product_pair: need exactly 2 qubits");
    }
    const auto& m = s.amps();
    std::size_t best = 0;
    for (std::size_t i = 1; i < 4; ++i) {
        if (std::norm(m[i]) > std::norm(m[best])) best = i;
    }
    const std::size_t r = best >> 1, col = best & 1;
    std::vector<Amplitude> u{m[col], m[2 + col]};
    std::vector<Amplitude> v{m[r << 1], m[(r << 1) + 1]};
    const double nu = std::sqrt(std::norm(u[0]) + std::norm(u[1]));
    const double nv = std::sqrt(std::norm(v[0]) + std::norm(v[1]));
    u[0] /= nu; u[1] /= nu;
    v[0] /= nv; v[1] /= nv;
    StateVector first({s.labels()[0]}, std::move(u));
    StateVector second({s.labels()[1]}, std::move(v));
    if (fidelity(s, tensor(first, second)) < 1.0 - kTeleportFidelityTol) {
        throw InternalError("split_product_pair: state is not a product state");
    }
    return {std::move(first), std::move(second)};
}

inline Scheme2TeleportResult run_teleport_scheme2(const StateVector& msg_a,
                                                  const StateVector& msg_b, Rng& rng) {
    if (msg_a.num_qubits() != 1 || msg_b.num_qubits() != 1) {
        throw std::invalid_argument("run_teleport_scheme2: messages must be single qubits");
    }
    const Scheme2CorrectionTable& table = scheme2_table();
    StateVector s = tensor(tensor(msg_b.relabeled({kParticleB}), msg_a.relabeled({kParticleA})),
                           make_channel_scheme2().state);

    auto [ba1, after_a] = measure_bell(s, kParticleA, 1, rng);
    auto [bb3, after_b] = measure_bell(after_a, kParticleB, 3, rng);
    auto [x4, after_x] = measure_x(after_b, 4, rng);

    const PauliPair corr = table.at(ba1, bb3, x4);
    after_x.apply_pauli(2, corr.first);
    after_x.apply_pauli(5, corr.second);

    auto [state_2, state_5] = split_product_pair(after_x.reordered({2, 5}));
    return {{ba1, bb3, x4}, std::move(state_2), std::move(state_5)};
}

}  // namespace qpbs
