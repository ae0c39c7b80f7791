#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>

#include "bil/spectral_ops.hpp"

using namespace bil;

namespace {

// Brute-force DFT oracle, O(N^{2d}); small grids only.
std::vector<std::complex<double>> dft_oracle(const Grid& g, const std::vector<double>& samples) {
    std::vector<std::complex<double>> out(g.size());
    for (std::size_t ki = 0; ki < g.size(); ++ki) {
        KVec k = g.freq(ki);
        std::complex<double> acc = 0.0;
        for (std::size_t mi = 0; mi < g.size(); ++mi) {
            KVec m = g.site(mi);
            double phase = 0.0;
            for (int ax = 0; ax < g.dim(); ++ax) phase += 2.0 * M_PI * k[ax] * m[ax] / g.res();
            acc += samples[mi] * std::exp(std::complex<double>(0.0, -phase));
        }
        out[ki] = acc / double(g.size());
    }
    return out;
}

double max_abs_diff(const std::vector<std::complex<double>>& a,
                    const std::vector<std::complex<double>>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace

TEST_CASE("grid construction and validation") {
    Grid g3(3, 64, 1.0);
    CHECK(g3.dim() == 3);
    CHECK(g3.res() == 64);
    CHECK(g3.period() == 1.0);
    CHECK(g3.size() == 64u * 64u * 64u);

    Grid g4(4, 32, 1.0);
    CHECK(g4.dim() == 4);
    CHECK(g4.size() == 32u * 32u * 32u * 32u);

    CHECK_THROWS(Grid(3, 48, 1.0));  // not a power of two
    CHECK_THROWS(Grid(5, 32, 1.0));
    CHECK_THROWS(Grid(1, 32, 1.0));
    CHECK_THROWS(Grid(3, 4, 1.0));
    CHECK_THROWS(Grid(3, 32, -2.0));
}

TEST_CASE("frequency decode covers (-N/2, N/2] and round-trips") {
    Grid g(2, 8, 1.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        KVec k = g.freq(i);
        for (int ax = 0; ax < 2; ++ax) {
            CHECK(k[ax] > -4);
            CHECK(k[ax] <= 4);
        }
        CHECK(g.index_of(k) == i);
    }
}

TEST_CASE("forward transform matches the brute-force DFT") {
    Grid g(2, 8, 1.0);
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<double> samples(g.size());
    for (auto& v : samples) v = unif(rng);
    SpectralScalar f = synthesize_from_samples(g, samples);
    auto oracle = dft_oracle(g, samples);
    CHECK(max_abs_diff(f.coeffs(), oracle) < 1e-13);
}

TEST_CASE("synthesize: constant and single-mode fields") {
    Grid g(3, 16, 1.0);
    SpectralScalar one = synthesize(g, [](const std::array<double, 4>&) { return 1.0; });
    CHECK(std::abs(one.at(KVec{0, 0, 0, 0}) - 1.0) < 1e-14);
    double off = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (i != g.index_of(KVec{0, 0, 0, 0})) off = std::max(off, std::abs(one.coeffs()[i]));
    CHECK(off < 1e-14);

    SpectralScalar cosx =
        synthesize(g, [&](const std::array<double, 4>& x) { return std::cos(x[0] / g.period()); });
    CHECK(std::abs(cosx.at(KVec{1, 0, 0, 0}) - 0.5) < 1e-14);
    CHECK(std::abs(cosx.at(KVec{-1, 0, 0, 0}) - 0.5) < 1e-14);

    CHECK_THROWS(synthesize(g, [](const std::array<double, 4>&) {
        return std::numeric_limits<double>::quiet_NaN();
    }));
}

TEST_CASE("evaluate/synthesize round trip on random Hermitian coefficients") {
    Grid g(3, 16, 0.7);
    SpectralScalar f = random_band_limited(g, 7, 7);
    double max_imag = 0.0;
    std::vector<double> samples = evaluate(f, &max_imag);
    CHECK(max_imag < 1e-12);
    SpectralScalar back = synthesize_from_samples(g, samples);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        num = std::max(num, std::abs(back.coeffs()[i] - f.coeffs()[i]));
        den = std::max(den, std::abs(f.coeffs()[i]));
    }
    CHECK(num / den < 1e-12);
}

TEST_CASE("hermitian symmetrization reports and repairs the defect") {
    Grid g(2, 8, 1.0);
    SpectralScalar f(g);
    f.set(KVec{1, 2, 0, 0}, {1.0, 0.5});
    // mirror left at zero: deviation |c(k) - conj(c(-k))| is the full coefficient
    CHECK(f.hermitian_deviation() == doctest::Approx(std::abs(std::complex<double>(1.0, 0.5))));
    double fix = f.symmetrize_hermitian();
    CHECK(fix > 0.0);
    CHECK(f.hermitian_deviation() < 1e-15);
    CHECK(std::abs(f.at(KVec{1, 2, 0, 0}) - std::complex<double>(0.5, 0.25)) < 1e-15);
    CHECK(std::abs(f.at(KVec{-1, -2, 0, 0}) - std::complex<double>(0.5, -0.25)) < 1e-15);
}

TEST_CASE("derivative: single modes and commutation") {
    Grid g(3, 16, 2.0);
    SpectralScalar cosx =
        synthesize(g, [&](const std::array<double, 4>& x) { return std::cos(x[0] / g.period()); });
    SpectralScalar d1 = derivative(cosx, 0);
    // d/dx cos(x/L) = -(1/L) sin(x/L)
    SpectralScalar msin = synthesize(
        g, [&](const std::array<double, 4>& x) { return -std::sin(x[0] / g.period()) / g.period(); });
    double err = parseval_l2(d1 - msin);
    CHECK(err < 1e-12 * parseval_l2(msin));

    // field constant in x2: derivative vanishes
    SpectralScalar d2 = derivative(cosx, 1);
    CHECK(parseval_l2(d2) < 1e-14);

    // commutation of axis derivatives (same diagonal multipliers; the only
    // difference is floating-point grouping)
    SpectralScalar f = random_band_limited(g, 3, 5);
    SpectralScalar ab = derivative(derivative(f, 0), 2);
    SpectralScalar ba = derivative(derivative(f, 2), 0);
    CHECK(parseval_l2(ab - ba) <= 1e-12 * parseval_l2(ab));
}

TEST_CASE("divergence of a gradient equals the Laplacian") {
    Grid g(3, 16, 1.3);
    SpectralScalar f = random_band_limited(g, 11, 5);
    SpectralScalar div_grad = divergence(gradient(f));
    SpectralScalar lap(g);
    for (int ax = 0; ax < 3; ++ax) lap += derivative(derivative(f, ax), ax);
    CHECK(parseval_l2(div_grad - lap) < 1e-12 * parseval_l2(lap));
}

TEST_CASE("inverse laplacian: multiplier values, zero mode, round trip") {
    Grid g(3, 16, 1.0);
    SpectralScalar f(g);
    f.set(KVec{2, 0, 0, 0}, {0.5, 0.0});
    f.set(KVec{-2, 0, 0, 0}, {0.5, 0.0});
    SpectralScalar inv = inverse_laplacian(f);
    CHECK(std::abs(inv.at(KVec{2, 0, 0, 0}) - 0.125) < 1e-15); // |k/L|^2 = 4

    bool warn = false;
    SpectralScalar constant = synthesize(g, [](const std::array<double, 4>&) { return 3.0; });
    SpectralScalar z = inverse_laplacian(constant, &warn);
    CHECK(warn);
    CHECK(parseval_l2(z) == 0.0);

    SpectralScalar r = random_band_limited(g, 5, 6);
    SpectralScalar lap_inv(g);
    SpectralScalar inv_r = inverse_laplacian(r);
    for (int ax = 0; ax < 3; ++ax) lap_inv += derivative(derivative(inv_r, ax), ax);
    lap_inv *= -1.0;
    CHECK(parseval_l2(lap_inv - r) < 1e-12 * parseval_l2(r));
}

TEST_CASE("riesz potential: identity, inverse-laplacian agreement, composition") {
    Grid g(3, 16, 1.0);
    SpectralScalar f = random_band_limited(g, 9, 6);
    CHECK(parseval_l2(riesz_potential(f, 0.0) - f) == 0.0);
    CHECK(parseval_l2(riesz_potential(f, -2.0) - inverse_laplacian(f)) < 1e-14 * parseval_l2(f));
    SpectralScalar twice = riesz_potential(riesz_potential(f, 1.0), 1.0);
    SpectralScalar lap(g);
    for (int ax = 0; ax < 3; ++ax) lap += derivative(derivative(f, ax), ax);
    lap *= -1.0;
    CHECK(parseval_l2(twice - lap) < 1e-12 * parseval_l2(lap));
}

TEST_CASE("lp_norm: analytic volumes and Parseval agreement") {
    Grid g(3, 16, 1.0);
    SpectralScalar one = synthesize(g, [](const std::array<double, 4>&) { return 1.0; });
    CHECK(lp_norm(one, 3.0) == doctest::Approx(2.0 * M_PI).epsilon(1e-12));

    SpectralScalar f = random_band_limited(g, 21, 6);
    CHECK(lp_norm(f, 2.0) == doctest::Approx(parseval_l2(f)).epsilon(1e-10));

    SpectralScalar cosx =
        synthesize(g, [&](const std::array<double, 4>& x) { return std::cos(x[0] / g.period()); });
    double expect = std::pow(2.0 * M_PI * g.period(), 1.5) / std::sqrt(2.0);
    CHECK(lp_norm(cosx, 2.0) == doctest::Approx(expect).epsilon(1e-12));

    CHECK_THROWS(lp_norm(f, 0.5));
}

TEST_CASE("bspc1 serialization round trip") {
    Grid g(3, 8, 1.45);
    SpectralScalar f = random_band_limited(g, 33, 3);
    std::stringstream ss;
    write_bspc1(ss, f);
    SpectralScalar back = read_bspc1(ss);
    CHECK(back.grid().same_as(g));
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        err = std::max(err, std::abs(back.coeffs()[i] - f.coeffs()[i]));
    CHECK(err == 0.0);
}
