#include "bil/leray.hpp"

#include <cmath>

namespace bil {

namespace {

// Largest occupied |k_i| over all components (coefficients above a roundoff floor).
int support_extent(const SpectralVector& u) {
    const Grid& g = u.grid();
    double peak = 0.0;
    for (int i = 0; i < u.dim(); ++i)
        for (const auto& c : u[i].coeffs()) peak = std::max(peak, std::abs(c));
    const double floor = 1e-14 * peak;
    int ext = 0;
    for (int i = 0; i < u.dim(); ++i) {
        const auto& c = u[i].coeffs();
        for (std::size_t idx = 0; idx < c.size(); ++idx) {
            if (std::abs(c[idx]) <= floor) continue;
            KVec k = g.freq(idx);
            for (int ax = 0; ax < g.dim(); ++ax) ext = std::max(ext, std::abs(k[ax]));
        }
    }
    return ext;
}

double top_third_fraction(const SpectralScalar& f) {
    const Grid& g = f.grid();
    const int cut = g.res() / 3;
    double hi = 0.0, total = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        double e = std::norm(f.coeffs()[i]);
        total += e;
        KVec k = g.freq(i);
        int kmx = 0;
        for (int ax = 0; ax < g.dim(); ++ax) kmx = std::max(kmx, std::abs(k[ax]));
        if (kmx > cut) hi += e;
    }
    return total == 0.0 ? 0.0 : hi / total;
}

} // namespace

SpectralVector leray_project(const SpectralVector& u, bool* nonzero_mean) {
    const Grid& g = u.grid();
    SpectralVector out = u;
    if (nonzero_mean) {
        double mean = 0.0;
        std::size_t zero = g.index_of(KVec{0, 0, 0, 0});
        for (int i = 0; i < g.dim(); ++i) mean = std::max(mean, std::abs(u[i].coeffs()[zero]));
        *nonzero_mean = mean > 1e-12 * parseval_l2(u);
    }
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        KVec k = g.freq(idx);
        double ksq = Grid::lattice_norm_sq(k, g.dim());
        if (ksq == 0.0) continue;
        std::complex<double> kdotu = 0.0;
        for (int i = 0; i < g.dim(); ++i) kdotu += double(k[i]) * out[i].coeffs()[idx];
        for (int i = 0; i < g.dim(); ++i) out[i].coeffs()[idx] -= double(k[i]) * kdotu / ksq;
    }
    return out;
}

TensorField tensor_product(const SpectralVector& u, const SpectralVector& v, AliasingInfo* info) {
    const Grid& g = u.grid();
    if (!g.same_as(v.grid())) throw std::invalid_argument("tensor_product: grid mismatch");
    if (info) info->support_overflow = support_extent(u) + support_extent(v) > g.res() / 2;

    std::vector<std::vector<double>> us(g.dim()), vs(g.dim());
    for (int i = 0; i < g.dim(); ++i) {
        us[i] = evaluate(u[i]);
        vs[i] = evaluate(v[i]);
    }
    TensorField T(g);
    std::vector<double> prod(g.size());
    double top = 0.0;
    for (int i = 0; i < g.dim(); ++i) {
        for (int j = 0; j < g.dim(); ++j) {
            for (std::size_t n = 0; n < g.size(); ++n) prod[n] = us[i][n] * vs[j][n];
            T.at(i, j) = synthesize_from_samples(g, prod);
            if (info) top = std::max(top, top_third_fraction(T.at(i, j)));
        }
    }
    if (info) info->top_third_energy = top;
    return T;
}

SpectralVector bilinear_B(const SpectralVector& u, const SpectralVector& v, AliasingInfo* info) {
    const Grid& g = u.grid();
    if (!g.same_as(v.grid())) throw std::invalid_argument("bilinear_B: grid mismatch");
    if (info) {
        info->support_overflow = support_extent(u) + support_extent(v) > g.res() / 2;
        info->top_third_energy = 0.0;
    }

    std::vector<std::vector<double>> us(g.dim());
    for (int i = 0; i < g.dim(); ++i) us[i] = evaluate(u[i]);

    SpectralVector w(g);
    std::vector<double> prod(g.size());
    for (int j = 0; j < g.dim(); ++j) {
        std::vector<double> vj = evaluate(v[j]);
        SpectralScalar div_j(g);
        for (int i = 0; i < g.dim(); ++i) {
            for (std::size_t n = 0; n < g.size(); ++n) prod[n] = us[i][n] * vj[n];
            SpectralScalar Tij = synthesize_from_samples(g, prod);
            if (info) info->top_third_energy = std::max(info->top_third_energy, top_third_fraction(Tij));
            div_j += derivative(Tij, i);
        }
        w[j] = inverse_laplacian(div_j);
    }
    return leray_project(w);
}

SpectralVector lift_force(const SpectralVector& f) {
    SpectralVector pf = leray_project(f);
    SpectralVector g(f.grid());
    for (int i = 0; i < f.grid().dim(); ++i) g[i] = inverse_laplacian(pf[i]);
    return g;
}

} // namespace bil
