// Copyright (c) the sdl authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef SDL_SNAPSHOT_HPP
#define SDL_SNAPSHOT_HPP

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "sdl/field.hpp"

namespace sdl {

// Binary field snapshot, version 1:
//   magic "SDLF" | u32 version | u32 dim | u32 N | u32 rank | u32 real_flag
//   then ncomp * N^dim coefficients as interleaved f64 (re, im) pairs,
//   row-major (component, k) with k in FFT storage order.
// All integers and floats little-endian.

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

inline void put_f64(std::ostream& os, double d) {
    std::uint64_t v;
    std::memcpy(&v, &d, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

inline double get_f64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double d;
    std::memcpy(&d, &v, 8);
    return d;
}

} // namespace detail

inline void write_snapshot(std::ostream& os, const SpectralField& f) {
    os.write("SDLF", 4);
    detail::put_u32(os, 1u);
    detail::put_u32(os, static_cast<std::uint32_t>(f.grid.dim));
    detail::put_u32(os, static_cast<std::uint32_t>(f.grid.modes_per_axis));
    detail::put_u32(os, static_cast<std::uint32_t>(f.rank));
    detail::put_u32(os, f.real_flag ? 1u : 0u);
    for (const auto& c : f.coeffs) {
        detail::put_f64(os, c.real());
        detail::put_f64(os, c.imag());
    }
}

inline void write_snapshot(const std::string& path, const SpectralField& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_snapshot: cannot open " + path);
    write_snapshot(os, f);
}

inline SpectralField read_snapshot(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "SDLF", 4) != 0)
        throw std::runtime_error("read_snapshot: bad magic");
    const std::uint32_t version = detail::get_u32(is);
    if (version != 1u)
        throw std::runtime_error("read_snapshot: unsupported version " + std::to_string(version));
    const int dim = static_cast<int>(detail::get_u32(is));
    const int n = static_cast<int>(detail::get_u32(is));
    const auto rank = static_cast<FieldRank>(detail::get_u32(is));
    const bool real = detail::get_u32(is) != 0;
    SpectralField f(TorusGrid(dim, n), rank, real);
    for (auto& c : f.coeffs) {
        const double re = detail::get_f64(is);
        const double im = detail::get_f64(is);
        c = {re, im};
    }
    if (!is) throw std::runtime_error("read_snapshot: truncated stream");
    return f;
}

inline SpectralField read_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_snapshot: cannot open " + path);
    return read_snapshot(is);
}

} // namespace sdl

#endif
