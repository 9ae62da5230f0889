#pragma once

// Thin RAII layer over FFTW's complex-to-complex n-d transforms.
//
// FFTW's planner is not thread-safe, so plan creation is serialized by a
// global mutex. Plans and their scratch buffers are cached per thread; a
// cached plan is only ever executed by the thread that owns it.

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <tuple>

namespace fpp::fft {

using cplx = std::complex<double>;

enum class Direction { forward = FFTW_FORWARD, backward = FFTW_BACKWARD };

class Plan {
public:
    Plan(int rank, int points, Direction dir) : rank_(rank), points_(points) {
        size_ = 1;
        std::array<int, 3> dims{points, points, points};
        for (int d = 0; d < rank; ++d) size_ *= static_cast<std::size_t>(points);
        buffer_ = fftw_alloc_complex(size_);
        if (!buffer_) throw std::bad_alloc();
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan_ = fftw_plan_dft(rank, dims.data(), buffer_, buffer_, static_cast<int>(dir), FFTW_ESTIMATE);
        if (!plan_) {
            fftw_free(buffer_);
            throw std::runtime_error("fftw: plan creation failed");
        }
    }

    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;

    ~Plan() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan_);
        fftw_free(buffer_);
    }

    std::size_t size() const { return size_; }

    /// Unnormalized in-place style transform: out[k] = Σ_j in[j] e^{∓2πi jk/N}.
    void execute(std::span<const cplx> in, std::span<cplx> out) {
        if (in.size() != size_ || out.size() != size_) throw std::invalid_argument("fft: size mismatch");
        auto* buf = reinterpret_cast<cplx*>(buffer_);
        std::copy(in.begin(), in.end(), buf);
        fftw_execute(plan_);
        std::copy(buf, buf + size_, out.begin());
    }

    /// Transform the plan's own buffer; callers fill/read it through data().
    void execute_in_place() { fftw_execute(plan_); }
    cplx* data() { return reinterpret_cast<cplx*>(buffer_); }

    static std::mutex& planner_mutex() {
        static std::mutex m;
        return m;
    }

private:
    int rank_;
    int points_;
    std::size_t size_ = 0;
    fftw_complex* buffer_ = nullptr;
    fftw_plan plan_ = nullptr;
};

/// Per-thread plan for the given shape and direction.
inline Plan& cached_plan(int rank, int points, Direction dir) {
    using Key = std::tuple<int, int, int>;
    thread_local std::map<Key, std::unique_ptr<Plan>> cache;
    auto key = Key{rank, points, static_cast<int>(dir)};
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, std::make_unique<Plan>(rank, points, dir)).first;
    return *it->second;
}

/// Smallest even integer >= n whose only prime factors are 2, 3, 5, 7.
inline int fast_size(int n) {
    for (int m = std::max(n, 2);; ++m) {
        if (m % 2) continue;
        int r = m;
        for (int p : {2, 3, 5, 7})
            while (r % p == 0) r /= p;
        if (r == 1) return m;
    }
}

}  // namespace fpp::fft
