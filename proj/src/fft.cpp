#include "d3lab/fft.hpp"

#include <cstdint>

#include "d3lab/arith.hpp"
#include "d3lab/error.hpp"
#include "d3lab/simd.hpp"

namespace d3lab::fft {

using arith::i64;

bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) noexcept {
    std::size_t m = 1;
    while (m < n) m <<= 1;
    return m;
}

void radix2(std::span<cplx> data, int sign) {
    const std::size_t n = data.size();
    if (!is_power_of_two(n)) throw DomainError("radix2: length must be a power of two");
    if (sign != 1 && sign != -1) throw DomainError("radix2: sign must be +1 or -1");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }
    std::vector<cplx> tw;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        tw.resize(half);
        for (std::size_t j = 0; j < half; ++j) tw[j] = arith::unit_phase(sign * static_cast<i64>(j), static_cast<i64>(len));
        for (std::size_t i = 0; i < n; i += len)
            simd::butterfly(data.subspan(i, half), data.subspan(i + half, half), tw);
    }
}

std::vector<cplx> chirp_dft(std::span<const cplx> in, int sign) {
    const std::size_t n = in.size();
    if (n == 0) return {};
    if (n == 1) return {in[0]};
    const i64 two_n = 2 * static_cast<i64>(n);
    // w_j = e(sign j^2 / 2n), with j^2 reduced mod 2n before the phase.
    std::vector<cplx> w(n);
    for (std::size_t j = 0; j < n; ++j) {
        const i64 jj = static_cast<i64>((static_cast<unsigned __int128>(j) * j) % static_cast<std::uint64_t>(two_n));
        w[j] = arith::unit_phase(sign * jj, two_n);
    }
    const std::size_t m = next_power_of_two(2 * n - 1);
    std::vector<cplx> u(m, cplx{}), v(m, cplx{});
    simd::complex_multiply(in, w, std::span<cplx>(u.data(), n));
    v[0] = std::conj(w[0]);
    for (std::size_t j = 1; j < n; ++j) v[j] = v[m - j] = std::conj(w[j]);
    radix2(u, 1);
    radix2(v, 1);
    simd::complex_multiply(u, v, u);
    radix2(u, -1);
    const double scale = 1.0 / static_cast<double>(m);
    std::vector<cplx> out(n);
    for (std::size_t a = 0; a < n; ++a) out[a] = u[a] * scale;
    simd::complex_multiply(out, w, out);
    return out;
}

std::vector<cplx> direct_dft(std::span<const cplx> in, int sign) {
    const std::size_t n = in.size();
    const arith::PhaseTable phases(static_cast<i64>(std::max<std::size_t>(n, 1)));
    std::vector<cplx> row(n), out(n);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t r = 0; r < n; ++r)
            row[r] = phases[static_cast<i64>((sign > 0 ? r * a : n - (r * a) % n) % n)];
        simd::CompensatedComplexSum acc;
        for (std::size_t r = 0; r < n; ++r) acc.add(in[r] * row[r]);
        out[a] = acc.value();
    }
    return out;
}

std::vector<cplx> dft(std::span<const cplx> in, int sign) {
    if (is_power_of_two(in.size())) {
        std::vector<cplx> out(in.begin(), in.end());
        radix2(out, sign);
        return out;
    }
    return chirp_dft(in, sign);
}

}  // namespace d3lab::fft
