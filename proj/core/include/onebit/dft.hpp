#pragma once

#include "onebit/types.hpp"

namespace onebit {

enum class Direction {
  forward,  // applies F, entries exp(-j 2 pi v m / V) / sqrt(V)
  inverse,  // applies F^H
};

// Unitary DFT of a single length-V sequence.
CVector unitary_dft(const CVector& x, Direction direction);

// Unitary DFT along the columns of every row of a grid: row n of the result
// is the transform of row n of the input. Maps time samples m to subcarriers
// v (forward) and back (inverse) for all antennas or users at once.
void unitary_dft_rows(Grid& grid, Direction direction);
Grid unitary_dft_rows(const Grid& grid, Direction direction);

// Explicit V x V unitary DFT matrix. For oracles and tests.
CMatrix dft_matrix(int size);

}  // namespace onebit
