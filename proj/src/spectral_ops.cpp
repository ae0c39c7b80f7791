#include "bil/spectral_ops.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace bil {

// ============================================================================
// Multipliers
// ============================================================================

SpectralScalar derivative(const SpectralScalar& f, int axis) {
    const Grid& g = f.grid();
    if (axis < 0 || axis >= g.dim()) throw std::invalid_argument("derivative: axis out of range");
    SpectralScalar out(g, f.coeffs());
    auto& c = out.coeffs();
    const double invL = 1.0 / g.period();
    const int nyq = g.res() / 2;
    for (std::size_t i = 0; i < c.size(); ++i) {
        KVec k = g.freq(i);
        if (k[axis] == nyq) {
            c[i] = 0.0;
            continue;
        }
        c[i] *= std::complex<double>(0.0, k[axis] * invL);
    }
    return out;
}

SpectralScalar divergence(const SpectralVector& u) {
    SpectralScalar out = derivative(u[0], 0);
    for (int i = 1; i < u.dim(); ++i) out += derivative(u[i], i);
    return out;
}

SpectralVector gradient(const SpectralScalar& f) {
    SpectralVector out(f.grid());
    for (int i = 0; i < f.grid().dim(); ++i) out[i] = derivative(f, i);
    return out;
}

SpectralScalar inverse_laplacian(const SpectralScalar& f, bool* mean_warning) {
    const Grid& g = f.grid();
    SpectralScalar out(g, f.coeffs());
    auto& c = out.coeffs();
    if (mean_warning) {
        double mean = std::abs(c[g.index_of(KVec{0, 0, 0, 0})]);
        *mean_warning = mean > 1e-12 * parseval_l2(f);
    }
    const double L2 = g.period() * g.period();
    for (std::size_t i = 0; i < c.size(); ++i) {
        KVec k = g.freq(i);
        double ksq = Grid::lattice_norm_sq(k, g.dim());
        c[i] = ksq == 0.0 ? 0.0 : c[i] * L2 / ksq;
    }
    return out;
}

SpectralScalar riesz_potential(const SpectralScalar& f, double alpha, bool* mean_warning) {
    const Grid& g = f.grid();
    SpectralScalar out(g, f.coeffs());
    auto& c = out.coeffs();
    if (mean_warning) {
        double mean = std::abs(c[g.index_of(KVec{0, 0, 0, 0})]);
        *mean_warning = alpha < 0.0 && mean > 1e-12 * parseval_l2(f);
    }
    for (std::size_t i = 0; i < c.size(); ++i) {
        KVec k = g.freq(i);
        double r = g.phys_norm(k);
        if (r == 0.0) {
            if (alpha != 0.0) c[i] = 0.0;
            continue;
        }
        c[i] *= std::pow(r, alpha);
    }
    return out;
}

SpectralScalar apply_multiplier(const SpectralScalar& f,
                                const std::function<double(const KVec&)>& mult) {
    const Grid& g = f.grid();
    SpectralScalar out(g, f.coeffs());
    auto& c = out.coeffs();
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= mult(g.freq(i));
    return out;
}

// ============================================================================
// Norms
// ============================================================================

double lp_norm(const SpectralScalar& f, double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("lp_norm: need 1 <= p < inf");
    std::vector<double> samples = evaluate(f);
    double acc = 0.0;
    for (double v : samples) acc += std::pow(std::abs(v), p);
    const Grid& g = f.grid();
    double cell = std::pow(g.dx(), g.dim());
    return std::pow(cell * acc, 1.0 / p);
}

double lp_norm(const SpectralVector& u, double p) {
    // Pointwise Euclidean magnitude, then the scalar quadrature.
    if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("lp_norm: need 1 <= p < inf");
    const Grid& g = u.grid();
    std::vector<double> mag(g.size(), 0.0);
    for (int i = 0; i < u.dim(); ++i) {
        std::vector<double> s = evaluate(u[i]);
        for (std::size_t j = 0; j < s.size(); ++j) mag[j] += s[j] * s[j];
    }
    double acc = 0.0;
    for (double v : mag) acc += std::pow(v, p / 2.0);
    double cell = std::pow(g.dx(), g.dim());
    return std::pow(cell * acc, 1.0 / p);
}

double parseval_l2(const SpectralScalar& f) {
    double acc = 0.0;
    for (const auto& c : f.coeffs()) acc += std::norm(c);
    const Grid& g = f.grid();
    return std::sqrt(std::pow(g.box_length(), g.dim()) * acc);
}

double parseval_l2(const SpectralVector& u) {
    double acc = 0.0;
    for (int i = 0; i < u.dim(); ++i) {
        double v = parseval_l2(u[i]);
        acc += v * v;
    }
    return std::sqrt(acc);
}

// ============================================================================
// Random test fields
// ============================================================================

SpectralScalar random_band_limited(const Grid& grid, std::uint64_t seed, int kmax) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    SpectralScalar f(grid);
    auto& c = f.coeffs();
    for (std::size_t i = 0; i < c.size(); ++i) {
        KVec k = grid.freq(i);
        int kmx = 0;
        for (int ax = 0; ax < grid.dim(); ++ax) kmx = std::max(kmx, std::abs(k[ax]));
        if (kmx == 0 || kmx > kmax) continue;
        c[i] = std::complex<double>(gauss(rng), gauss(rng));
    }
    f.symmetrize_hermitian();
    return f;
}

SpectralVector random_divergence_free(const Grid& grid, std::uint64_t seed, int kmax) {
    SpectralVector u(grid);
    for (int i = 0; i < grid.dim(); ++i)
        u[i] = random_band_limited(grid, seed + 1000003 * (i + 1), kmax);
    // Project each mode onto the plane orthogonal to k.
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
        KVec k = grid.freq(idx);
        double ksq = Grid::lattice_norm_sq(k, grid.dim());
        if (ksq == 0.0) {
            for (int i = 0; i < grid.dim(); ++i) u[i].coeffs()[idx] = 0.0;
            continue;
        }
        std::complex<double> kdotu = 0.0;
        for (int i = 0; i < grid.dim(); ++i) kdotu += double(k[i]) * u[i].coeffs()[idx];
        for (int i = 0; i < grid.dim(); ++i) u[i].coeffs()[idx] -= double(k[i]) * kdotu / ksq;
    }
    return u;
}

} // namespace bil
