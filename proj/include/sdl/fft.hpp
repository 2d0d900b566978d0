// Copyright (c) the sdl authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef SDL_FFT_HPP
#define SDL_FFT_HPP

#include <complex>
#include <map>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "sdl/grid.hpp"

namespace sdl {

/// Thread-safe cache of FFTW c2c plans, one per (dims, sign).
///
/// Plans are created with FFTW_ESTIMATE | FFTW_UNALIGNED so a cached plan can
/// be executed on any buffer via fftw_execute_dft. Plan creation is guarded by
/// a mutex; execution is lock-free and re-entrant.
class FftEngine {
  public:
    /// In-place c2c transform of one component. sign = FFTW_FORWARD applies
    /// the e^{-2 pi i k x} pairing (unscaled); callers divide by the point
    /// count to get Fourier coefficients. FFTW_BACKWARD is the unscaled
    /// synthesis sum.
    static void transform(const TorusGrid& grid, std::complex<double>* data, int sign) {
        fftw_plan plan = instance().plan_for(grid, sign);
        fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(data),
                         reinterpret_cast<fftw_complex*>(data));
    }

  private:
    std::mutex mu_;
    std::map<std::pair<std::vector<int>, int>, fftw_plan> plans_;

    static FftEngine& instance() {
        static FftEngine engine;
        return engine;
    }

    fftw_plan plan_for(const TorusGrid& grid, int sign) {
        std::vector<int> dims(static_cast<std::size_t>(grid.dim), grid.modes_per_axis);
        std::lock_guard<std::mutex> lock(mu_);
        auto key = std::make_pair(dims, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::vector<std::complex<double>> scratch(grid.points());
        fftw_plan plan = fftw_plan_dft(grid.dim, dims.data(),
                                       reinterpret_cast<fftw_complex*>(scratch.data()),
                                       reinterpret_cast<fftw_complex*>(scratch.data()), sign,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(key, plan);
        return plan;
    }
};

} // namespace sdl

#endif
