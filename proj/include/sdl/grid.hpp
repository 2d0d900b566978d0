// Copyright (c) the sdl authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef SDL_GRID_HPP
#define SDL_GRID_HPP

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace sdl {

/// Uniform collocation grid on the unit torus T^dim = R^dim / Z^dim.
///
/// Resolvable wavenumbers per axis are -N/2 < k <= N/2 in FFT storage order
/// (index i maps to k = i for i <= N/2 and k = i - N otherwise). Collocation
/// points are x_j = j/N, j in {0,...,N-1}^dim.
struct TorusGrid {
    int dim = 1;
    int modes_per_axis = 4;

    TorusGrid() = default;
    TorusGrid(int d, int n) : dim(d), modes_per_axis(n) {
        if (d < 1 || d > 3)
            throw std::invalid_argument("TorusGrid: dim must be in {1,2,3}, got " +
                                        std::to_string(d));
        if (n < 4 || n % 2 != 0)
            throw std::invalid_argument("TorusGrid: modes_per_axis must be even and >= 4, got " +
                                        std::to_string(n));
    }

    bool operator==(const TorusGrid& o) const {
        return dim == o.dim && modes_per_axis == o.modes_per_axis;
    }
    bool operator!=(const TorusGrid& o) const { return !(*this == o); }

    std::size_t points() const {
        std::size_t p = 1;
        for (int i = 0; i < dim; ++i) p *= static_cast<std::size_t>(modes_per_axis);
        return p;
    }

    /// FFT storage index -> signed wavenumber on one axis.
    int freq(int idx) const { return idx <= modes_per_axis / 2 ? idx : idx - modes_per_axis; }

    /// Signed wavenumber -> FFT storage index on one axis (k in (-N/2, N/2]).
    int freq_index(int k) const { return k >= 0 ? k : k + modes_per_axis; }

    /// Decode a linear (row-major) index into the signed wavenumber vector.
    std::array<int, 3> wavevector(std::size_t linear) const {
        std::array<int, 3> k{0, 0, 0};
        const auto n = static_cast<std::size_t>(modes_per_axis);
        for (int a = dim - 1; a >= 0; --a) {
            k[a] = freq(static_cast<int>(linear % n));
            linear /= n;
        }
        return k;
    }

    /// Encode signed wavenumbers as a linear row-major index.
    std::size_t linear_index(const std::array<int, 3>& k) const {
        std::size_t idx = 0;
        for (int a = 0; a < dim; ++a)
            idx = idx * static_cast<std::size_t>(modes_per_axis) +
                  static_cast<std::size_t>(freq_index(k[a]));
        return idx;
    }
};

} // namespace sdl

#endif
