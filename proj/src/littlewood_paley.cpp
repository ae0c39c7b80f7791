#include "bil/littlewood_paley.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace bil {

// ============================================================================
// Smooth step and cutoff profiles
// ============================================================================

namespace {

double bump_psi(double t) {
    double s = 1.0 - t * t;
    return s <= 0.0 ? 0.0 : std::exp(-1.0 / s);
}

// Cumulative Simpson table of psi over [-1, 1], 4096 panels.
struct StepTable {
    static constexpr int panels = 4096;
    std::vector<double> cum; // cum[i] = int_{-1}^{u_i} psi, u_i = -1 + 2i/panels
    double total;

    StepTable() : cum(panels + 1, 0.0) {
        const double h = 2.0 / panels;
        for (int i = 0; i < panels; ++i) {
            double a = -1.0 + h * i;
            double m = a + 0.5 * h;
            double b = a + h;
            cum[i + 1] = cum[i] + h / 6.0 * (bump_psi(a) + 4.0 * bump_psi(m) + bump_psi(b));
        }
        total = cum[panels];
    }
};

const StepTable& step_table() {
    static const StepTable table;
    return table;
}

// Uniform-knot Catmull-Rom interpolation on a table.
double cubic_interp(const std::vector<double>& tab, double pos) {
    const int n = static_cast<int>(tab.size());
    int i = static_cast<int>(std::floor(pos));
    if (i < 0) i = 0;
    if (i > n - 2) i = n - 2;
    double t = pos - i;
    double p0 = tab[std::max(i - 1, 0)];
    double p1 = tab[i];
    double p2 = tab[i + 1];
    double p3 = tab[std::min(i + 2, n - 1)];
    return p1 + 0.5 * t * (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                                          t * (3.0 * (p1 - p2) + p3 - p0)));
}

// chi transition table over [3/4, 4/3], 2^16 samples.
struct ChiTable {
    static constexpr int samples = 1 << 16;
    static constexpr double r_lo = 0.75;
    static constexpr double r_hi = 4.0 / 3.0;
    std::vector<double> val;

    ChiTable() : val(samples) {
        for (int i = 0; i < samples; ++i) {
            double r = r_lo + (r_hi - r_lo) * i / (samples - 1);
            double u = 2.0 * (r - r_lo) / (r_hi - r_lo) - 1.0;
            val[i] = 1.0 - smooth_step(u);
        }
    }
};

const ChiTable& chi_table() {
    static const ChiTable table;
    return table;
}

} // namespace

double smooth_step(double u) {
    if (u <= -1.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const StepTable& t = step_table();
    double pos = (u + 1.0) * 0.5 * StepTable::panels;
    double v = cubic_interp(t.cum, pos) / t.total;
    return std::clamp(v, 0.0, 1.0);
}

double smooth_bump(double t) {
    double a = std::abs(t);
    if (a <= 0.5) return 1.0;
    if (a >= 1.0) return 0.0;
    return 1.0 - smooth_step(4.0 * a - 3.0);
}

double chi_cutoff(double r) {
    if (r <= ChiTable::r_lo) return 1.0;
    if (r >= ChiTable::r_hi) return 0.0;
    const ChiTable& t = chi_table();
    double pos = (r - ChiTable::r_lo) / (ChiTable::r_hi - ChiTable::r_lo) * (ChiTable::samples - 1);
    return std::clamp(cubic_interp(t.val, pos), 0.0, 1.0);
}

double phi_cutoff(double r) { return chi_cutoff(0.5 * r) - chi_cutoff(r); }

// ============================================================================
// Partition
// ============================================================================

DyadicPartition::DyadicPartition(int j_min, int j_max, double phi_scale)
    : j_min_(j_min), j_max_(j_max), phi_scale_(phi_scale) {
    if (j_max_ - j_min_ + 1 < 3)
        throw std::invalid_argument("DyadicPartition: fewer than 3 certified indices");
}

std::pair<double, double> DyadicPartition::certified_radii() const {
    return {4.0 / 3.0 * std::ldexp(1.0, j_min_), 1.5 * std::ldexp(1.0, j_max_)};
}

void DyadicPartition::write_profiles_csv(std::ostream& os, double r_lo, double r_hi,
                                         int samples) const {
    os << "radius,chi,phi\n";
    for (int i = 0; i < samples; ++i) {
        double r = r_lo + (r_hi - r_lo) * i / (samples - 1);
        os << r << "," << chi(r) << "," << phi(r) << "\n";
    }
}

DyadicPartition build_partition(const Grid& grid, double phi_scale) {
    const double nyq = grid.nyquist_radius();
    int j_max = static_cast<int>(std::floor(std::log2(nyq * 3.0 / 8.0)));
    while (8.0 / 3.0 * std::ldexp(1.0, j_max + 1) <= nyq) ++j_max; // guard rounding
    while (8.0 / 3.0 * std::ldexp(1.0, j_max) > nyq) --j_max;

    // Smallest certified index: scan radii of lattice points per candidate j.
    // The smallest nonzero lattice radius is 1/L, so only a few j matter.
    auto annulus_has_mode = [&](int j) {
        double lo = 0.75 * std::ldexp(1.0, j);
        double hi = 8.0 / 3.0 * std::ldexp(1.0, j);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            KVec k = grid.freq(i);
            double r = grid.phys_norm(k);
            if (r > 0.0 && r > lo && r < hi) return true;
        }
        return false;
    };
    double min_radius = 1.0 / grid.period();
    int j_min = static_cast<int>(std::floor(std::log2(min_radius * 3.0 / 8.0))) - 1;
    while (j_min < j_max && !annulus_has_mode(j_min)) ++j_min;

    return DyadicPartition(j_min, j_max, phi_scale);
}

SpectralScalar dyadic_block(const SpectralScalar& f, int j, const DyadicPartition& part) {
    if (!part.certified(j))
        throw std::out_of_range("dyadic_block: index outside certified range");
    const Grid& g = f.grid();
    SpectralScalar out(g, f.coeffs());
    auto& c = out.coeffs();
    const double scale = std::ldexp(1.0, -j);
    for (std::size_t i = 0; i < c.size(); ++i) {
        double r = g.phys_norm(g.freq(i));
        c[i] *= part.phi(scale * r);
    }
    return out;
}

SpectralScalar low_pass(const SpectralScalar& f, int j, const DyadicPartition& part) {
    const Grid& g = f.grid();
    SpectralScalar out(g, f.coeffs());
    auto& c = out.coeffs();
    const double scale = std::ldexp(1.0, -j);
    for (std::size_t i = 0; i < c.size(); ++i) {
        double r = g.phys_norm(g.freq(i));
        c[i] *= part.chi(scale * r);
    }
    return out;
}

double out_of_range_energy(const SpectralScalar& f, const DyadicPartition& part) {
    auto [r_lo, r_hi] = part.certified_radii();
    const Grid& g = f.grid();
    double in = 0.0, out = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        double r = g.phys_norm(g.freq(i));
        if (r == 0.0) continue; // mean handled by the mean-free contract
        double e = std::norm(f.coeffs()[i]);
        if (r >= r_lo && r <= r_hi)
            in += e;
        else
            out += e;
    }
    double total = in + out;
    return total == 0.0 ? 0.0 : out / total;
}

std::vector<std::pair<int, SpectralScalar>> block_partition_apply(const SpectralScalar& f,
                                                                  const DyadicPartition& part,
                                                                  double* out_of_range) {
    if (out_of_range) *out_of_range = out_of_range_energy(f, part);
    std::vector<std::pair<int, SpectralScalar>> blocks;
    blocks.reserve(part.j_max() - part.j_min() + 1);
    for (int j = part.j_min(); j <= part.j_max(); ++j)
        blocks.emplace_back(j, dyadic_block(f, j, part));
    return blocks;
}

} // namespace bil
