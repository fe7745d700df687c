// Frozen Pauli correction tables for the two teleportation channels.
// Byte-identical copies live in data/correction_table_scheme{1,2}.txt;
// regeneration via derive_correction_table_scheme*() must reproduce this
// text exactly (checked by tests and by the derive-tables CLI command).
#pragma once

#include <string_view>

namespace qpbs {

inline constexpr std::string_view kScheme1CorrectionTableText = R"TABLE(# Pauli corrections for the six-particle teleportation channel.
# columns: bell13(parity phase) bell27(parity phase) c d pauli6 pauli8
00 00 0 0 I I
00 00 0 1 X I
00 00 1 0 X I
00 00 1 1 I I
00 01 0 0 I Z
00 01 0 1 X Z
00 01 1 0 X Z
00 01 1 1 I Z
00 10 0 0 I X
00 10 0 1 X X
00 10 1 0 X X
00 10 1 1 I X
00 11 0 0 I XZ
00 11 0 1 X XZ
00 11 1 0 X XZ
00 11 1 1 I XZ
01 00 0 0 Z I
01 00 0 1 XZ I
01 00 1 0 XZ I
01 00 1 1 Z I
01 01 0 0 Z Z
01 01 0 1 XZ Z
01 01 1 0 XZ Z
01 01 1 1 Z Z
01 10 0 0 Z X
01 10 0 1 XZ X
01 10 1 0 XZ X
01 10 1 1 Z X
01 11 0 0 Z XZ
01 11 0 1 XZ XZ
01 11 1 0 XZ XZ
01 11 1 1 Z XZ
10 00 0 0 X I
10 00 0 1 I I
10 00 1 0 I I
10 00 1 1 X I
10 01 0 0 X Z
10 01 0 1 I Z
10 01 1 0 I Z
10 01 1 1 X Z
10 10 0 0 X X
10 10 0 1 I X
10 10 1 0 I X
10 10 1 1 X X
10 11 0 0 X XZ
10 11 0 1 I XZ
10 11 1 0 I XZ
10 11 1 1 X XZ
11 00 0 0 XZ I
11 00 0 1 Z I
11 00 1 0 Z I
11 00 1 1 XZ I
11 01 0 0 XZ Z
11 01 0 1 Z Z
11 01 1 0 Z Z
11 01 1 1 XZ Z
11 10 0 0 XZ X
11 10 0 1 Z X
11 10 1 0 Z X
11 10 1 1 XZ X
11 11 0 0 XZ XZ
11 11 0 1 Z XZ
11 11 1 0 Z XZ
11 11 1 1 XZ XZ
)TABLE";

inline constexpr std::string_view kScheme2CorrectionTableText = R"TABLE(# Pauli corrections for the five-qubit two-way teleportation channel.
# columns: bellA1(parity phase) bellB3(parity phase) x4 pauli2 pauli5
00 00 0 I I
00 00 1 Z Z
00 01 0 I Z
00 01 1 Z I
00 10 0 I X
00 10 1 Z XZ
00 11 0 I XZ
00 11 1 Z X
01 00 0 Z I
01 00 1 I Z
01 01 0 Z Z
01 01 1 I I
01 10 0 Z X
01 10 1 I XZ
01 11 0 Z XZ
01 11 1 I X
10 00 0 X I
10 00 1 XZ Z
10 01 0 X Z
10 01 1 XZ I
10 10 0 X X
10 10 1 XZ XZ
10 11 0 X XZ
10 11 1 XZ X
11 00 0 XZ I
11 00 1 X Z
11 01 0 XZ Z
11 01 1 X I
11 10 0 XZ X
11 10 1 X XZ
11 11 0 XZ XZ
11 11 1 X X
)TABLE";

}  // namespace qpbs
