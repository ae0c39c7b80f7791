#include "bil/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace bil {

namespace {
bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }
} // namespace

Grid::Grid(int dim, int res, double period) : dim_(dim), res_(res), period_(period) {
    if (dim < 2 || dim > 4)
        throw std::invalid_argument("Grid: dim must be 2, 3 or 4");
    if (!is_power_of_two(res) || res < 8)
        throw std::invalid_argument("Grid: resolution must be a power of two >= 8");
    if (!(period > 0.0) || !std::isfinite(period))
        throw std::invalid_argument("Grid: period must be positive and finite");
    size_ = 1;
    for (int i = 0; i < dim; ++i) size_ *= static_cast<std::size_t>(res);
}

double Grid::box_length() const { return 2.0 * M_PI * period_; }

double Grid::dx() const { return box_length() / res_; }

double Grid::nyquist_radius() const { return res_ / (2.0 * period_); }

KVec Grid::freq(std::size_t flat) const {
    KVec k{0, 0, 0, 0};
    for (int ax = dim_ - 1; ax >= 0; --ax) {
        int idx = static_cast<int>(flat % res_);
        flat /= res_;
        k[ax] = idx <= res_ / 2 ? idx : idx - res_;
    }
    return k;
}

std::size_t Grid::index_of(const KVec& k) const {
    std::size_t flat = 0;
    for (int ax = 0; ax < dim_; ++ax) {
        int idx = ((k[ax] % res_) + res_) % res_;
        flat = flat * res_ + static_cast<std::size_t>(idx);
    }
    return flat;
}

KVec Grid::site(std::size_t flat) const {
    KVec m{0, 0, 0, 0};
    for (int ax = dim_ - 1; ax >= 0; --ax) {
        m[ax] = static_cast<int>(flat % res_);
        flat /= res_;
    }
    return m;
}

double Grid::lattice_norm_sq(const KVec& k, int dim) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += double(k[i]) * double(k[i]);
    return s;
}

double Grid::phys_norm(const KVec& k) const {
    return std::sqrt(lattice_norm_sq(k, dim_)) / period_;
}

bool Grid::same_as(const Grid& other) const {
    return dim_ == other.dim_ && res_ == other.res_ && period_ == other.period_;
}

} // namespace bil
