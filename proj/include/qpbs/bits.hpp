// Classical bit-sequence helpers shared by the crypto and protocol layers.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qpbs {

// A bit sequence; each element is 0 or 1.
using Bits = std::vector<std::uint8_t>;

inline Bits xor_bits(const Bits& a, const Bits& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("xor_bits: length mismatch (" +
                                    std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()) + ")");
    }
    Bits out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] ^ b[i];
    return out;
}

inline Bits concat_bits(const Bits& a, const Bits& b) {
    Bits out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

inline std::string bits_to_string(const Bits& bits) {
    std::string s(bits.size(), '0');
    for (std::size_t i = 0; i < bits.size(); ++i) s[i] = bits[i] ? '1' : '0';
    return s;
}

inline Bits bits_from_string(std::string_view s) {
    Bits out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '0' && s[i] != '1') {
            throw std::invalid_argument("bits_from_string: invalid character");
        }
        out[i] = s[i] == '1' ? 1 : 0;
    }
    return out;
}

// Bytes expand to bits most-significant bit first.
inline Bits bytes_to_bits(const std::vector<std::uint8_t>& bytes) {
    Bits out;
    out.reserve(bytes.size() * 8);
    for (std::uint8_t byte : bytes) {
        for (int k = 7; k >= 0; --k) out.push_back((byte >> k) & 1);
    }
    return out;
}

inline std::vector<std::uint8_t> bits_to_bytes(const Bits& bits) {
    if (bits.size() % 8 != 0) {
        throw std::invalid_argument("bits_to_bytes: length not a multiple of 8");
    }
    std::vector<std::uint8_t> out(bits.size() / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        out[i / 8] = static_cast<std::uint8_t>(out[i / 8] << 1 | bits[i]);
    }
    return out;
}

// Hex encoding of a bit sequence, MSB-first nibbles. The bit length must be
// a multiple of 4 so the encoding is self-describing.
inline std::string bits_to_hex(const Bits& bits) {
    if (bits.size() % 4 != 0) {
        throw std::invalid_argument("bits_to_hex: length not a multiple of 4");
    }
    static const char* digits = "0123456789abcdef";
    std::string out(bits.size() / 4, '0');
    for (std::size_t i = 0; i < out.size(); ++i) {
        int v = bits[4 * i] << 3 | bits[4 * i + 1] << 2 | bits[4 * i + 2] << 1 |
                bits[4 * i + 3];
        out[i] = digits[v];
    }
    return out;
}

inline Bits hex_to_bits(std::string_view hex) {
    Bits out;
    out.reserve(hex.size() * 4);
    for (char c : hex) {
        int v;
        if (c >= '0' && c <= '9') v = c - '0';
        else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
        else throw std::invalid_argument("hex_to_bits: invalid character");
        out.push_back((v >> 3) & 1);
        out.push_back((v >> 2) & 1);
        out.push_back((v >> 1) & 1);
        out.push_back(v & 1);
    }
    return out;
}

inline std::string bytes_to_hex(const std::vector<std::uint8_t>& bytes) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (std::uint8_t b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}

inline std::vector<std::uint8_t> hex_to_bytes(std::string_view hex) {
    if (hex.size() % 2 != 0) {
        throw std::invalid_argument("hex_to_bytes: odd hex length");
    }
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw std::invalid_argument("hex_to_bytes: invalid character");
    };
    std::vector<std::uint8_t> out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 |
                                           nibble(hex[2 * i + 1]));
    }
    return out;
}

}  // namespace qpbs
