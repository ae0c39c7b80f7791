#pragma once

#include <complex>

#include "bil/grid.hpp"

namespace bil::fft {

/// Unnormalized in-place c2c transform over the grid's d axes.
/// sign = -1: forward DFT (e^{-i k x}); sign = +1: inverse (e^{+i k x}).
/// Thread-safe: plans are cached behind a mutex and executed with the
/// new-array interface.
void transform(const Grid& grid, std::complex<double>* data, int sign);

} // namespace bil::fft
