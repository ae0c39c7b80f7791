// Thin wrapper around FFTW for the d-dimensional complex transforms.
// Plans are created once per (dims, sign) with FFTW_ESTIMATE | FFTW_UNALIGNED
// so the new-array execute functions accept any buffer; creation is guarded
// by a mutex (the FFTW planner is not thread-safe, execution is).

#include "bil/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <vector>

namespace bil::fft {

namespace {

struct PlanKey {
    int dim;
    int res;
    int sign;
    bool operator<(const PlanKey& o) const {
        if (dim != o.dim) return dim < o.dim;
        if (res != o.res) return res < o.res;
        return sign < o.sign;
    }
};

std::mutex plan_mutex;
std::map<PlanKey, fftw_plan> plan_cache;

fftw_plan get_plan(const Grid& grid, int sign) {
    PlanKey key{grid.dim(), grid.res(), sign};
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto it = plan_cache.find(key);
    if (it != plan_cache.end()) return it->second;

    std::vector<int> n(grid.dim(), grid.res());
    std::vector<fftw_complex> scratch(grid.size());
    fftw_plan p = fftw_plan_dft(grid.dim(), n.data(), scratch.data(), scratch.data(),
                                sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
    plan_cache.emplace(key, p);
    return p;
}

} // namespace

void transform(const Grid& grid, std::complex<double>* data, int sign) {
    fftw_plan p = get_plan(grid, sign);
    auto* raw = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(p, raw, raw);
}

} // namespace bil::fft
