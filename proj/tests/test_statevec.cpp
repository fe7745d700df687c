#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "qpbs/statevec.hpp"
#include "qpbs/stats.hpp"
#include "test_util.hpp"

using namespace qpbs;
using qpbs::test::epr_pair;
using qpbs::test::random_state;

namespace {
const Amplitude kOne{1, 0};
const Amplitude kHalfRt2{M_SQRT1_2, 0};
}  // namespace

TEST_CASE("basis states and the MSB-first ordering convention") {
    const StateVector zero = make_basis_state({1}, "0");
    REQUIRE(zero.amps()[0] == kOne);
    REQUIRE(zero.amps()[1] == Amplitude{0, 0});

    // First label is the most significant index bit: |10> on (1,2) sits at
    // index 2, not 1. This pins the documented convention.
    const StateVector ten = make_basis_state({1, 2}, "10");
    REQUIRE(ten.amps()[2] == kOne);
    REQUIRE(ten.amps()[0] == Amplitude{0, 0});
    REQUIRE(ten.amps()[1] == Amplitude{0, 0});
    REQUIRE(ten.amps()[3] == Amplitude{0, 0});

    REQUIRE_THROWS_AS(make_basis_state({1, 2}, "1"), std::invalid_argument);
    REQUIRE_THROWS_AS(make_basis_state({1}, "2"), std::invalid_argument);
    REQUIRE_THROWS_AS(StateVector({1, 1}, {kOne, {0, 0}, {0, 0}, {0, 0}}),
                      std::invalid_argument);
}

TEST_CASE("tensor of basis and superposition states") {
    const StateVector a = make_basis_state({1}, "0");
    const StateVector b = make_basis_state({2}, "1");
    const StateVector ab = tensor(a, b);
    REQUIRE(ab.labels() == std::vector<QubitLabel>{1, 2});
    REQUIRE(std::abs(ab.amplitude("01") - kOne) < 1e-15);

    const StateVector plus = apply_1q(make_basis_state({1}, "0"), 1, kHadamard);
    const StateVector prod = tensor(plus, make_basis_state({2}, "0"));
    REQUIRE(std::abs(prod.amplitude("00") - kHalfRt2) < 1e-12);
    REQUIRE(std::abs(prod.amplitude("10") - kHalfRt2) < 1e-12);
    REQUIRE(std::abs(prod.amplitude("01")) < 1e-15);

    REQUIRE_THROWS_AS(tensor(a, make_basis_state({1}, "0")), std::invalid_argument);
}

TEST_CASE("tensor associativity holds amplitude by amplitude") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const StateVector a = random_state({1}, rng);
        const StateVector b = random_state({2, 3}, rng);
        const StateVector c = random_state({4}, rng);
        const StateVector left = tensor(tensor(a, b), c);
        const StateVector right = tensor(a, tensor(b, c));
        REQUIRE(left.labels() == right.labels());
        for (std::size_t i = 0; i < left.amps().size(); ++i) {
            REQUIRE(std::abs(left.amps()[i] - right.amps()[i]) < 1e-12);
        }
    }
}

TEST_CASE("single-qubit gates") {
    SECTION("H on |0> gives |+>") {
        const StateVector s = apply_1q(make_basis_state({1}, "0"), 1, kHadamard);
        REQUIRE(std::abs(s.amplitude("0") - kHalfRt2) < 1e-12);
        REQUIRE(std::abs(s.amplitude("1") - kHalfRt2) < 1e-12);
    }
    SECTION("X on |0> gives |1>") {
        const StateVector s = apply_1q(make_basis_state({1}, "0"), 1, kPauliX);
        REQUIRE(std::abs(s.amplitude("1") - kOne) < 1e-15);
    }
    SECTION("Z flips the relative phase of |+>") {
        StateVector s = apply_1q(make_basis_state({1}, "0"), 1, kHadamard);
        s = apply_1q(std::move(s), 1, kPauliZ);
        REQUIRE(std::abs(s.amplitude("0") - kHalfRt2) < 1e-12);
        REQUIRE(std::abs(s.amplitude("1") + kHalfRt2) < 1e-12);
    }
    SECTION("errors") {
        const Mat2 not_unitary{{{kOne, kOne}, {kOne, kOne}}};
        REQUIRE_THROWS_AS(apply_1q(make_basis_state({1}, "0"), 1, not_unitary),
                          std::invalid_argument);
        REQUIRE_THROWS_AS(apply_1q(make_basis_state({1}, "0"), 9, kPauliX),
                          std::invalid_argument);
    }
    SECTION("norm preserved on random states") {
        Rng rng(5);
        for (int trial = 0; trial < 50; ++trial) {
            StateVector s = random_state({1, 2, 3}, rng);
            s.apply_gate(2, kHadamard);
            s.apply_gate(3, kPauliZ);
            s.apply_gate(1, kPauliX);
            REQUIRE(std::abs(s.norm() - 1.0) < 1e-9);
        }
    }
}

TEST_CASE("pauli algebra composes modulo global phase") {
    REQUIRE(compose(Pauli::X, Pauli::X) == Pauli::I);
    REQUIRE(compose(Pauli::X, Pauli::Z) == Pauli::XZ);
    REQUIRE(compose(Pauli::XZ, Pauli::Z) == Pauli::X);
    REQUIRE(pauli_from_name("XZ") == Pauli::XZ);
    REQUIRE(pauli_name(Pauli::Z) == "Z");
}

TEST_CASE("bell measurement on eigenstates and basis states") {
    Rng rng(7);
    SECTION("Phi+ is a (0,0) eigenstate with empty residual") {
        for (int trial = 0; trial < 8; ++trial) {
            auto [outcome, rest] = measure_bell(epr_pair(1, 2), 1, 2, rng);
            REQUIRE(outcome == BellOutcome{0, 0});
            REQUIRE(rest.num_qubits() == 0);
            REQUIRE(rest.amps().size() == 1);
        }
    }
    SECTION("|01> splits evenly over the Psi family only") {
        const StateVector s = make_basis_state({1, 2}, "01");
        REQUIRE(s.project_bell(1, 2, {1, 0}).probability == Catch::Approx(0.5));
        REQUIRE(s.project_bell(1, 2, {1, 1}).probability == Catch::Approx(0.5));
        REQUIRE(s.project_bell(1, 2, {0, 0}).probability < kZeroProb);
        REQUIRE(s.project_bell(1, 2, {0, 1}).probability < kZeroProb);
        // Zero-probability outcomes are never sampled.
        for (int trial = 0; trial < 32; ++trial) {
            auto [outcome, rest] = measure_bell(s, 1, 2, rng);
            REQUIRE(outcome.parity_bit == 1);
        }
    }
    SECTION("label errors") {
        REQUIRE_THROWS_AS(epr_pair(1, 2).project_bell(1, 1, {0, 0}), std::invalid_argument);
        REQUIRE_THROWS_AS(epr_pair(1, 2).project_bell(1, 3, {0, 0}), std::invalid_argument);
    }
}

// Brute-force teleportation oracle: measuring (1,2) of |phi>_1 (x) |Phi+>_23
// leaves qubit 3 in a fixed Pauli rotation of |phi|, one rotation per
// outcome, each with probability 1/4.
TEST_CASE("bell projection acts as a pauli channel on the epr partner") {
    Rng rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const StateVector phi = random_state({1}, rng);
        const StateVector joint = tensor(phi, epr_pair(2, 3));
        for (int idx = 0; idx < 4; ++idx) {
            const Projection pr = joint.project_bell(1, 2, BellOutcome::from_index(idx));
            REQUIRE(pr.probability == Catch::Approx(0.25).margin(1e-9));
            REQUIRE(pr.state.has_value());
            bool matched = false;
            for (Pauli p : {Pauli::I, Pauli::X, Pauli::Z, Pauli::XZ}) {
                StateVector rotated = phi.relabeled({3});
                rotated.apply_pauli(3, p);
                if (fidelity(rotated, *pr.state) > 1.0 - 1e-9) matched = true;
            }
            REQUIRE(matched);
        }
    }
}

TEST_CASE("z measurement") {
    Rng rng(3);
    auto [bit, rest] = measure_z(make_basis_state({1}, "1"), 1, rng);
    REQUIRE(bit == 1);
    REQUIRE(rest.num_qubits() == 0);

    const StateVector plus = apply_1q(make_basis_state({1}, "0"), 1, kHadamard);
    REQUIRE(plus.project_z(1, 0).probability == Catch::Approx(0.5));
    REQUIRE(plus.project_z(1, 1).probability == Catch::Approx(0.5));

    // Measuring half of an EPR pair leaves the partner collapsed to the same bit.
    for (int trial = 0; trial < 16; ++trial) {
        auto [b, partner] = measure_z(epr_pair(1, 2), 1, rng);
        const StateVector expect = make_basis_state({2}, b ? "1" : "0");
        REQUIRE(fidelity(expect, partner) == Catch::Approx(1.0));
    }
}

TEST_CASE("x measurement") {
    Rng rng(9);
    const StateVector plus = apply_1q(make_basis_state({1}, "0"), 1, kHadamard);
    const StateVector minus = apply_1q(plus, 1, kPauliZ);

    auto [b_plus, r1] = measure_x(plus, 1, rng);
    REQUIRE(b_plus == 0);
    auto [b_minus, r2] = measure_x(minus, 1, rng);
    REQUIRE(b_minus == 1);

    const StateVector zero = make_basis_state({1}, "0");
    REQUIRE(zero.project_x(1, 0).probability == Catch::Approx(0.5));
    REQUIRE(zero.project_x(1, 1).probability == Catch::Approx(0.5));
}

TEST_CASE("born rule completeness on random states") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const StateVector s = random_state({1, 2, 3}, rng);
        double zsum = s.project_z(2, 0).probability + s.project_z(2, 1).probability;
        REQUIRE(std::abs(zsum - 1.0) < 1e-9);
        double xsum = s.project_x(3, 0).probability + s.project_x(3, 1).probability;
        REQUIRE(std::abs(xsum - 1.0) < 1e-9);
        double bsum = 0.0;
        for (int idx = 0; idx < 4; ++idx) {
            bsum += s.project_bell(1, 3, BellOutcome::from_index(idx)).probability;
        }
        REQUIRE(std::abs(bsum - 1.0) < 1e-9);
    }
}

TEST_CASE("collapse is idempotent before removal") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const StateVector s = random_state({1, 2}, rng);
        for (int bit = 0; bit < 2; ++bit) {
            const Projection first = s.project_z_keep(1, bit);
            if (!first.state) continue;
            const Projection again = first.state->project_z_keep(1, bit);
            REQUIRE(again.probability == Catch::Approx(1.0).margin(1e-9));
            const Projection fx = s.project_x_keep(2, bit);
            if (fx.state) {
                REQUIRE(fx.state->project_x_keep(2, bit).probability ==
                        Catch::Approx(1.0).margin(1e-9));
            }
        }
    }
}

TEST_CASE("fidelity") {
    Rng rng(13);
    const StateVector psi = random_state({1, 2}, rng);
    REQUIRE(fidelity(psi, psi) == Catch::Approx(1.0));

    REQUIRE(fidelity(make_basis_state({1}, "0"), make_basis_state({1}, "1")) ==
            Catch::Approx(0.0).margin(1e-15));

    // Global phase is invisible.
    std::vector<Amplitude> amps = psi.amps();
    const Amplitude phase = std::polar(1.0, 1.234);
    for (auto& a : amps) a *= phase;
    const StateVector rotated({1, 2}, std::move(amps));
    REQUIRE(fidelity(psi, rotated) == Catch::Approx(1.0));

    // Label reordering is handled.
    const StateVector swapped = psi.reordered({2, 1});
    REQUIRE(fidelity(psi, swapped) == Catch::Approx(1.0));

    REQUIRE_THROWS_AS(fidelity(psi, random_state({1, 3}, rng)), std::invalid_argument);
}

TEST_CASE("bell outcome marginals are uniform at 10^4 samples") {
    Rng rng(101);
    const int kSamples = 10000;
    std::vector<long long> counts(4, 0);
    const StateVector ancilla = random_state({1}, rng);
    for (int i = 0; i < kSamples; ++i) {
        const StateVector joint = tensor(ancilla, epr_pair(2, 3));
        auto [outcome, rest] = measure_bell(joint, 1, 2, rng);
        ++counts[outcome.index()];
    }
    const double sigma = std::sqrt(0.25 * 0.75 / kSamples);
    for (int idx = 0; idx < 4; ++idx) {
        const double freq = static_cast<double>(counts[idx]) / kSamples;
        REQUIRE(std::abs(freq - 0.25) < 5.0 * sigma);
    }
    const double stat = chi_square_stat(counts, std::vector<double>(4, kSamples / 4.0));
    REQUIRE(stat < chi_square_critical_p001(3));
}
