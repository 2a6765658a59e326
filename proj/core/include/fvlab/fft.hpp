#pragma once

#include <complex>
#include <vector>

namespace fvlab {

// In-place radix-2 complex FFT. Size must be a power of two.
// sign = -1 gives the forward transform sum_m x_m e^{-2 pi i j m / n}.
void fft_radix2(std::vector<std::complex<double>>& data, int sign);

bool is_power_of_two(std::size_t n);

}  // namespace fvlab
