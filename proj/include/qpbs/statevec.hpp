// Dense state-vector simulation of small labeled qubit registers:
// construction, single-qubit gates, projective measurements with collapse,
// and fidelity comparison.
//
// Bit ordering convention (pinned by tests): the first label of a register is
// the MOST significant bit of the amplitude index, so a register labeled
// (1,2) stores |b1 b2> at index b1*2 + b2.
//
// Measured qubits are removed from the register; the protocols never reuse a
// measured particle. Global phase is never tracked as meaningful: all state
// equality goes through fidelity.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qpbs/rng.hpp"

namespace qpbs {

using Amplitude = std::complex<double>;
using QubitLabel = int;
using Mat2 = std::array<std::array<Amplitude, 2>, 2>;

inline constexpr double kNormTol = 1e-9;
// Branches below this probability are treated as impossible rather than
// renormalized numerical noise.
inline constexpr double kZeroProb = 1e-12;

class InternalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Pauli corrections {I, X, Z, XZ}, closed under composition up to global
// phase. XZ means "apply Z, then X" (matrix product X*Z); the phase that
// distinguishes it from iY is never tracked.

enum class Pauli : int { I = 0, X = 1, Z = 2, XZ = 3 };

inline int pauli_x_part(Pauli p) { return static_cast<int>(p) & 1; }
inline int pauli_z_part(Pauli p) { return (static_cast<int>(p) >> 1) & 1; }

inline Pauli make_pauli(int x_part, int z_part) {
    return static_cast<Pauli>((x_part & 1) | ((z_part & 1) << 1));
}

inline Pauli compose(Pauli a, Pauli b) {
    return make_pauli(pauli_x_part(a) ^ pauli_x_part(b),
                      pauli_z_part(a) ^ pauli_z_part(b));
}

inline std::string_view pauli_name(Pauli p) {
    switch (p) {
        case Pauli::I: return "I";
        case Pauli::X: return "X";
        case Pauli::Z: return "Z";
        case Pauli::XZ: return "XZ";
    }
    throw std::invalid_argument("pauli_name: bad value");
}

inline Pauli pauli_from_name(std::string_view name) {
    if (name == "I") return Pauli::I;
    if (name == "X") return Pauli::X;
    if (name == "Z") return Pauli::Z;
    if (name == "XZ") return Pauli::XZ;
    throw std::invalid_argument("pauli_from_name: unknown name '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Bell measurement outcomes. parity_bit 0 is the Phi family |00>+-|11>,
// parity_bit 1 the Psi family |01>+-|10>; phase_bit 0 is +, 1 is -. The
// classical encoding is fixed as the bit pair (parity, phase).

struct BellOutcome {
    int parity_bit = 0;
    int phase_bit = 0;

    bool operator==(const BellOutcome&) const = default;
    int index() const { return parity_bit << 1 | phase_bit; }
    static BellOutcome from_index(int i) { return {(i >> 1) & 1, i & 1}; }
};

// ---------------------------------------------------------------------------
// Gates.

inline const Mat2 kIdentity{{{Amplitude{1, 0}, Amplitude{0, 0}},
                             {Amplitude{0, 0}, Amplitude{1, 0}}}};
inline const Mat2 kPauliX{{{Amplitude{0, 0}, Amplitude{1, 0}},
                           {Amplitude{1, 0}, Amplitude{0, 0}}}};
inline const Mat2 kPauliZ{{{Amplitude{1, 0}, Amplitude{0, 0}},
                           {Amplitude{0, 0}, Amplitude{-1, 0}}}};
inline const Mat2 kHadamard{{{Amplitude{M_SQRT1_2, 0}, Amplitude{M_SQRT1_2, 0}},
                             {Amplitude{M_SQRT1_2, 0}, Amplitude{-M_SQRT1_2, 0}}}};

inline bool is_unitary(const Mat2& u, double tol = kNormTol) {
    const double c0 = std::norm(u[0][0]) + std::norm(u[1][0]);
    const double c1 = std::norm(u[0][1]) + std::norm(u[1][1]);
    const Amplitude cross = std::conj(u[0][0]) * u[0][1] + std::conj(u[1][0]) * u[1][1];
    return std::abs(c0 - 1.0) < tol && std::abs(c1 - 1.0) < tol && std::abs(cross) < tol;
}

// ---------------------------------------------------------------------------

struct Projection;

class StateVector {
  public:
    StateVector(std::vector<QubitLabel> labels, std::vector<Amplitude> amps)
        : labels_(std::move(labels)), amps_(std::move(amps)) {
        validate();
    }

    // |bits> on the given labels, e.g. basis({1,2}, "10").
    static StateVector basis(std::vector<QubitLabel> labels, std::string_view bits) {
        if (bits.size() != labels.size()) {
            throw std::invalid_argument("basis state: length mismatch between labels and bits");
        }
        std::size_t index = 0;
        for (char c : bits) {
            if (c != '0' && c != '1') {
                throw std::invalid_argument("basis state: bits must be 0/1");
            }
            index = index << 1 | static_cast<std::size_t>(c == '1');
        }
        std::vector<Amplitude> amps(std::size_t{1} << labels.size(), Amplitude{0, 0});
        amps[index] = Amplitude{1, 0};
        return StateVector(std::move(labels), std::move(amps));
    }

    const std::vector<QubitLabel>& labels() const { return labels_; }
    const std::vector<Amplitude>& amps() const { return amps_; }
    std::size_t num_qubits() const { return labels_.size(); }

    // Position of a label within the register; throws for unknown labels.
    std::size_t position(QubitLabel q) const {
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            if (labels_[i] == q) return i;
        }
        throw std::invalid_argument("unknown qubit label " + std::to_string(q));
    }

    double norm() const {
        double s = 0.0;
        for (const auto& a : amps_) s += std::norm(a);
        return std::sqrt(s);
    }

    // Amplitude of a computational basis ket given as a bit string in label
    // order; test convenience.
    Amplitude amplitude(std::string_view bits) const {
        if (bits.size() != labels_.size()) {
            throw std::invalid_argument("amplitude: bit string length mismatch");
        }
        std::size_t index = 0;
        for (char c : bits) index = index << 1 | static_cast<std::size_t>(c == '1');
        return amps_[index];
    }

    // In-place single-qubit gate. The gate must be unitary within kNormTol.
    void apply_gate(QubitLabel q, const Mat2& u) {
        if (!is_unitary(u)) {
            throw std::invalid_argument("apply_gate: matrix is not unitary");
        }
        const std::size_t shift = labels_.size() - 1 - position(q);
        const std::size_t step = std::size_t{1} << shift;
        const std::size_t block = step << 1;
        for (std::size_t base = 0; base < amps_.size(); base += block) {
            for (std::size_t off = 0; off < step; ++off) {
                const std::size_t i0 = base + off;
                const std::size_t i1 = i0 + step;
                const Amplitude a = amps_[i0];
                const Amplitude b = amps_[i1];
                amps_[i0] = u[0][0] * a + u[0][1] * b;
                amps_[i1] = u[1][0] * a + u[1][1] * b;
            }
        }
    }

    void apply_pauli(QubitLabel q, Pauli p) {
        if (pauli_z_part(p)) apply_gate(q, kPauliZ);
        if (pauli_x_part(p)) apply_gate(q, kPauliX);
    }

    // Same amplitudes with the labels permuted to `order`.
    StateVector reordered(const std::vector<QubitLabel>& order) const {
        if (!same_label_set(order)) {
            throw std::invalid_argument("reordered: label sets differ");
        }
        const std::size_t k = labels_.size();
        std::vector<std::size_t> new_shift(k);
        for (std::size_t p = 0; p < k; ++p) {
            std::size_t np = 0;
            while (order[np] != labels_[p]) ++np;
            new_shift[p] = k - 1 - np;
        }
        std::vector<Amplitude> out(amps_.size(), Amplitude{0, 0});
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            std::size_t j = 0;
            for (std::size_t p = 0; p < k; ++p) {
                const std::size_t bit = (i >> (k - 1 - p)) & 1;
                j |= bit << new_shift[p];
            }
            out[j] = amps_[i];
        }
        StateVector result(*this);
        result.labels_ = order;
        result.amps_ = std::move(out);
        return result;
    }

    // Same amplitudes under fresh labels (e.g. message (1,2) compared against
    // the teleported copy on (6,8)).
    StateVector relabeled(std::vector<QubitLabel> new_labels) const {
        if (new_labels.size() != labels_.size()) {
            throw std::invalid_argument("relabeled: label count mismatch");
        }
        StateVector result(*this);
        result.labels_ = std::move(new_labels);
        result.validate();
        return result;
    }

    // --- projections -------------------------------------------------------
    // Each projection returns the branch probability and, when the branch is
    // possible, the renormalized post-measurement state with the measured
    // qubit(s) removed from the register.

    Projection project_z(QubitLabel q, int bit) const;
    Projection project_x(QubitLabel q, int bit) const;
    Projection project_bell(QubitLabel q1, QubitLabel q2, BellOutcome o) const;

    // Collapse without removing the qubit; used to check measurement
    // idempotence.
    Projection project_z_keep(QubitLabel q, int bit) const;
    Projection project_x_keep(QubitLabel q, int bit) const;

  private:
    std::vector<QubitLabel> labels_;
    std::vector<Amplitude> amps_;

    void validate() const {
        if (amps_.size() != (std::size_t{1} << labels_.size())) {
            throw std::invalid_argument("state vector length is not 2^(label count)");
        }
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            for (std::size_t j = i + 1; j < labels_.size(); ++j) {
                if (labels_[i] == labels_[j]) {
                    throw std::invalid_argument("duplicate qubit label " +
                                                std::to_string(labels_[i]));
                }
            }
        }
        double s = 0.0;
        for (const auto& a : amps_) {
            if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
                throw std::invalid_argument("non-finite amplitude");
            }
            s += std::norm(a);
        }
        if (std::abs(std::sqrt(s) - 1.0) > kNormTol) {
            throw std::invalid_argument("state vector is not normalized (norm " +
                                        std::to_string(std::sqrt(s)) + ")");
        }
    }

    bool same_label_set(const std::vector<QubitLabel>& other) const {
        if (other.size() != labels_.size()) return false;
        std::vector<QubitLabel> a = labels_, b = other;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        return a == b;
    }

    std::vector<QubitLabel> remove_positions(std::vector<std::size_t> positions) const {
        std::sort(positions.begin(), positions.end());
        std::vector<QubitLabel> out;
        out.reserve(labels_.size() - positions.size());
        std::size_t next = 0;
        for (std::size_t p = 0; p < labels_.size(); ++p) {
            if (next < positions.size() && positions[next] == p) {
                ++next;
            } else {
                out.push_back(labels_[p]);
            }
        }
        return out;
    }

    static Projection finish_projection(std::vector<QubitLabel> labels,
                                        std::vector<Amplitude> residual);

    // Insert one fixed bit at register position p into reduced index r.
    static std::size_t scatter1(std::size_t r, std::size_t k, std::size_t p, int bit) {
        const std::size_t shift = k - 1 - p;
        const std::size_t high = (r >> shift) << (shift + 1);
        const std::size_t low = r & ((std::size_t{1} << shift) - 1);
        return high | (static_cast<std::size_t>(bit) << shift) | low;
    }

    static std::size_t scatter2(std::size_t r, std::size_t k, std::size_t p1, int b1,
                                std::size_t p2, int b2) {
        if (p1 > p2) {
            std::swap(p1, p2);
            std::swap(b1, b2);
        }
        // Insert at the deeper position first so p1's shift stays valid.
        std::size_t with_low = scatter1(r, k - 1, p2 - 1, b2);
        return scatter1(with_low, k, p1, b1);
    }
};

struct Projection {
    double probability = 0.0;
    // Absent when the branch probability is below kZeroProb.
    std::optional<StateVector> state;
};

inline Projection StateVector::finish_projection(std::vector<QubitLabel> labels,
                                                 std::vector<Amplitude> residual) {
    double prob = 0.0;
    for (const auto& a : residual) prob += std::norm(a);
    if (prob < kZeroProb) return {prob, std::nullopt};
    const double inv = 1.0 / std::sqrt(prob);
    for (auto& a : residual) a *= inv;
    Projection out;
    out.probability = prob;
    out.state.emplace(StateVector(std::move(labels), std::move(residual)));
    return out;
}

inline Projection StateVector::project_z(QubitLabel q, int bit) const {
    const std::size_t p = position(q);
    const std::size_t k = labels_.size();
    const std::size_t rsize = amps_.size() >> 1;
    std::vector<Amplitude> residual(rsize);
    for (std::size_t r = 0; r < rsize; ++r) {
        residual[r] = amps_[scatter1(r, k, p, bit)];
    }
    return finish_projection(remove_positions({p}), std::move(residual));
}

inline Projection StateVector::project_x(QubitLabel q, int bit) const {
    const std::size_t p = position(q);
    const std::size_t k = labels_.size();
    const double sign = bit ? -1.0 : 1.0;
    // <+-| = (<0| +- <1|)/sqrt(2)
    const std::size_t rsize = amps_.size() >> 1;
    std::vector<Amplitude> residual(rsize);
    for (std::size_t r = 0; r < rsize; ++r) {
        const std::size_t i0 = scatter1(r, k, p, 0);
        const std::size_t i1 = scatter1(r, k, p, 1);
        residual[r] = (amps_[i0] + sign * amps_[i1]) * M_SQRT1_2;
    }
    return finish_projection(remove_positions({p}), std::move(residual));
}

inline Projection StateVector::project_bell(QubitLabel q1, QubitLabel q2,
                                            BellOutcome o) const {
    if (q1 == q2) throw std::invalid_argument("project_bell: identical labels");
    const std::size_t p1 = position(q1);
    const std::size_t p2 = position(q2);
    const std::size_t k = labels_.size();
    const double sign = o.phase_bit ? -1.0 : 1.0;
    const int b2_of_0 = o.parity_bit;      // q2 bit paired with q1 = 0
    const int b2_of_1 = 1 - o.parity_bit;  // q2 bit paired with q1 = 1
    const std::size_t rsize = amps_.size() >> 2;
    std::vector<Amplitude> residual(rsize);
    for (std::size_t r = 0; r < rsize; ++r) {
        const std::size_t i0 = scatter2(r, k, p1, 0, p2, b2_of_0);
        const std::size_t i1 = scatter2(r, k, p1, 1, p2, b2_of_1);
        residual[r] = (amps_[i0] + sign * amps_[i1]) * M_SQRT1_2;
    }
    return finish_projection(remove_positions({p1, p2}), std::move(residual));
}

inline Projection StateVector::project_z_keep(QubitLabel q, int bit) const {
    const std::size_t p = position(q);
    const std::size_t k = labels_.size();
    std::vector<Amplitude> kept(amps_.size(), Amplitude{0, 0});
    double prob = 0.0;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        if (((i >> (k - 1 - p)) & 1) == static_cast<std::size_t>(bit)) {
            kept[i] = amps_[i];
            prob += std::norm(amps_[i]);
        }
    }
    if (prob < kZeroProb) return {prob, std::nullopt};
    const double inv = 1.0 / std::sqrt(prob);
    for (auto& a : kept) a *= inv;
    StateVector s(*this);
    s.amps_ = std::move(kept);
    return {prob, std::move(s)};
}

inline Projection StateVector::project_x_keep(QubitLabel q, int bit) const {
    Projection pr = project_x(q, bit);
    if (!pr.state) return pr;
    // Rebuild |+-> on q against the residual: the projected state factorizes.
    const std::size_t p = position(q);
    const std::size_t k = labels_.size();
    const double sign = bit ? -1.0 : 1.0;
    std::vector<Amplitude> full(amps_.size(), Amplitude{0, 0});
    const auto& residual = pr.state->amps();
    for (std::size_t r = 0; r < residual.size(); ++r) {
        full[scatter1(r, k, p, 0)] = residual[r] * M_SQRT1_2;
        full[scatter1(r, k, p, 1)] = sign * residual[r] * M_SQRT1_2;
    }
    StateVector s(*this);
    s.amps_ = std::move(full);
    return {pr.probability, std::move(s)};
}

// ---------------------------------------------------------------------------
// Free-function operations.

inline StateVector make_basis_state(std::vector<QubitLabel> labels, std::string_view bits) {
    return StateVector::basis(std::move(labels), bits);
}

// Kronecker product; labels concatenate a-then-b and must be disjoint.
inline StateVector tensor(const StateVector& a, const StateVector& b) {
    for (QubitLabel la : a.labels()) {
        for (QubitLabel lb : b.labels()) {
            if (la == lb) {
                throw std::invalid_argument("tensor: overlapping label " + std::to_string(la));
            }
        }
    }
    std::vector<QubitLabel> labels = a.labels();
    labels.insert(labels.end(), b.labels().begin(), b.labels().end());
    const std::size_t nb = b.amps().size();
    std::vector<Amplitude> amps(a.amps().size() * nb);
    for (std::size_t i = 0; i < a.amps().size(); ++i) {
        for (std::size_t j = 0; j < nb; ++j) {
            amps[i * nb + j] = a.amps()[i] * b.amps()[j];
        }
    }
    return StateVector(std::move(labels), std::move(amps));
}

inline StateVector apply_1q(StateVector state, QubitLabel q, const Mat2& gate) {
    state.apply_gate(q, gate);
    return state;
}

// |<a|b>|^2 after reordering b into a's label order. Insensitive to global
// phase by construction.
inline double fidelity(const StateVector& a, const StateVector& b) {
    const StateVector br = b.reordered(a.labels());
    Amplitude overlap{0, 0};
    for (std::size_t i = 0; i < a.amps().size(); ++i) {
        overlap += std::conj(a.amps()[i]) * br.amps()[i];
    }
    return std::norm(overlap);
}

namespace detail {

// Born-rule branch selection over precomputed projections. Branches with
// probability < kZeroProb are excluded; the total must reach 1 within
// kNormTol or the state was left unnormalized by an earlier bug.
inline std::size_t select_branch(const std::vector<Projection>& branches, Rng& rng) {
    double total = 0.0;
    for (const auto& b : branches) total += b.probability;
    if (std::abs(total - 1.0) > kNormTol) {
        throw InternalError("measurement branch probabilities sum to " + std::to_string(total));
    }
    const double u = random_unit(rng) * total;
    double cum = 0.0;
    std::size_t last_possible = branches.size();
    for (std::size_t i = 0; i < branches.size(); ++i) {
        if (branches[i].probability < kZeroProb) continue;
        last_possible = i;
        cum += branches[i].probability;
        if (u < cum) return i;
    }
    if (last_possible == branches.size()) {
        throw InternalError("no measurement branch has nonzero probability");
    }
    return last_possible;
}

}  // namespace detail

inline std::pair<BellOutcome, StateVector> measure_bell(const StateVector& state,
                                                        QubitLabel q1, QubitLabel q2,
                                                        Rng& rng) {
    std::vector<Projection> branches;
    branches.reserve(4);
    for (int i = 0; i < 4; ++i) {
        branches.push_back(state.project_bell(q1, q2, BellOutcome::from_index(i)));
    }
    const std::size_t pick = detail::select_branch(branches, rng);
    return {BellOutcome::from_index(static_cast<int>(pick)), std::move(*branches[pick].state)};
}

inline std::pair<int, StateVector> measure_z(const StateVector& state, QubitLabel q, Rng& rng) {
    std::vector<Projection> branches;
    branches.reserve(2);
    for (int bit = 0; bit < 2; ++bit) branches.push_back(state.project_z(q, bit));
    const std::size_t pick = detail::select_branch(branches, rng);
    return {static_cast<int>(pick), std::move(*branches[pick].state)};
}

inline std::pair<int, StateVector> measure_x(const StateVector& state, QubitLabel q, Rng& rng) {
    std::vector<Projection> branches;
    branches.reserve(2);
    for (int bit = 0; bit < 2; ++bit) branches.push_back(state.project_x(q, bit));
    const std::size_t pick = detail::select_branch(branches, rng);
    return {static_cast<int>(pick), std::move(*branches[pick].state)};
}

}  // namespace qpbs
