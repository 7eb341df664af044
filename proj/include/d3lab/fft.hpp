#pragma once

// Discrete Fourier transforms with the number-theory sign convention
//   out[a] = sum_r in[r] e(sign * r a / n).

#include <complex>
#include <span>
#include <vector>

namespace d3lab::fft {

using cplx = std::complex<double>;

bool is_power_of_two(std::size_t n) noexcept;
std::size_t next_power_of_two(std::size_t n) noexcept;

// In-place iterative radix-2 transform; data.size() must be a power of two.
void radix2(std::span<cplx> data, int sign);

// Arbitrary length via Bluestein's chirp-z, O(n log n).
std::vector<cplx> chirp_dft(std::span<const cplx> in, int sign);

// O(n^2) reference.
std::vector<cplx> direct_dft(std::span<const cplx> in, int sign);

// Picks radix-2 for powers of two, chirp-z otherwise.
std::vector<cplx> dft(std::span<const cplx> in, int sign);

}  // namespace d3lab::fft
