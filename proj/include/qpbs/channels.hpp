// Constructors for the entangled channel states and the message-encoding
// states used by the two signature schemes.
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "qpbs/statevec.hpp"

namespace qpbs {

// Qubit labels for the single-qubit message carriers of the two-way scheme.
// Particles 1-5 form the cluster channel, so the carriers get 6 and 7.
inline constexpr QubitLabel kParticleA = 6;
inline constexpr QubitLabel kParticleB = 7;

struct Scheme1Channel {
    StateVector state;  // labels (3,4,5,6,7,8)
};

struct Scheme2Channel {
    StateVector state;  // labels (1,2,3,4,5)
};

// Six-particle channel: a four-qubit entangled state on (3,4,5,6) tensored
// with an EPR pair on (7,8).
//
//   (1/2sqrt2) (|0000> - |0111> + |1001> - |1110>
//              + |0110> + |0001> + |1111> + |1000>)_3456
//   (x) (1/sqrt2)(|00> + |11>)_78
inline Scheme1Channel make_channel_scheme1() {
    const double w = 1.0 / (2.0 * std::sqrt(2.0));
    std::vector<Amplitude> four(16, Amplitude{0, 0});
    four[0b0000] = {w, 0};
    four[0b0111] = {-w, 0};
    four[0b1001] = {w, 0};
    four[0b1110] = {-w, 0};
    four[0b0110] = {w, 0};
    four[0b0001] = {w, 0};
    four[0b1111] = {w, 0};
    four[0b1000] = {w, 0};
    StateVector part_3456({3, 4, 5, 6}, std::move(four));

    std::vector<Amplitude> epr(4, Amplitude{0, 0});
    epr[0b00] = {M_SQRT1_2, 0};
    epr[0b11] = {M_SQRT1_2, 0};
    StateVector part_78({7, 8}, std::move(epr));

    return {tensor(part_3456, part_78)};
}

// Five-qubit cluster channel:
//   (1/2)(|00000> + |00111> + |11101> + |11010>)_12345
inline Scheme2Channel make_channel_scheme2() {
    std::vector<Amplitude> amps(32, Amplitude{0, 0});
    amps[0b00000] = {0.5, 0};
    amps[0b00111] = {0.5, 0};
    amps[0b11101] = {0.5, 0};
    amps[0b11010] = {0.5, 0};
    return {StateVector({1, 2, 3, 4, 5}, std::move(amps))};
}

// Two message bits become the computational basis state |b1 b2> on (1,2):
// 00 -> |00>, 01 -> |01>, 10 -> |10>, 11 -> |11>.
inline StateVector encode_block_scheme1(std::string_view two_bits) {
    if (two_bits.size() != 2) {
        throw std::invalid_argument("encode_block_scheme1: expected exactly 2 bits");
    }
    return make_basis_state({1, 2}, two_bits);
}

inline StateVector encode_block_scheme1(int b1, int b2) {
    char bits[2] = {static_cast<char>('0' + (b1 & 1)), static_cast<char>('0' + (b2 & 1))};
    return make_basis_state({1, 2}, std::string_view(bits, 2));
}

// One message bit b becomes |b> on the given carrier label. Basis encoding
// keeps the verifier's decoding deterministic; general amplitudes remain
// supported by the teleportation layer itself.
inline StateVector encode_bit_scheme2(int bit, QubitLabel label) {
    if (bit != 0 && bit != 1) {
        throw std::invalid_argument("encode_bit_scheme2: bit must be 0 or 1");
    }
    return make_basis_state({label}, bit ? "1" : "0");
}

}  // namespace qpbs
