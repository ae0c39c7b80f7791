#include "bil/spectral_field.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "bil/fft.hpp"

namespace bil {

// ============================================================================
// SpectralScalar
// ============================================================================

SpectralScalar::SpectralScalar(const Grid& grid) : grid_(grid), coeffs_(grid.size()) {}

SpectralScalar::SpectralScalar(const Grid& grid, std::vector<std::complex<double>> coeffs)
    : grid_(grid), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != grid_.size())
        throw std::invalid_argument("SpectralScalar: coefficient count does not match grid");
}

double SpectralScalar::symmetrize_hermitian() {
    double max_fix = 0.0;
    const std::size_t n = coeffs_.size();
    for (std::size_t i = 0; i < n; ++i) {
        KVec k = grid_.freq(i);
        KVec mk{-k[0], -k[1], -k[2], -k[3]};
        std::size_t j = grid_.index_of(mk);
        if (j < i) continue;
        std::complex<double> a = coeffs_[i];
        std::complex<double> b = coeffs_[j];
        std::complex<double> sym = 0.5 * (a + std::conj(b));
        max_fix = std::max(max_fix, std::abs(a - sym));
        coeffs_[i] = sym;
        coeffs_[j] = std::conj(sym);
    }
    return max_fix;
}

double SpectralScalar::hermitian_deviation() const {
    double dev = 0.0;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        KVec k = grid_.freq(i);
        KVec mk{-k[0], -k[1], -k[2], -k[3]};
        std::size_t j = grid_.index_of(mk);
        dev = std::max(dev, std::abs(coeffs_[i] - std::conj(coeffs_[j])));
    }
    return dev;
}

SpectralScalar& SpectralScalar::operator+=(const SpectralScalar& other) {
    if (!grid_.same_as(other.grid_)) throw std::invalid_argument("grid mismatch");
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
    return *this;
}

SpectralScalar& SpectralScalar::operator-=(const SpectralScalar& other) {
    if (!grid_.same_as(other.grid_)) throw std::invalid_argument("grid mismatch");
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
    return *this;
}

SpectralScalar& SpectralScalar::operator*=(double c) {
    for (auto& v : coeffs_) v *= c;
    return *this;
}

SpectralScalar operator+(SpectralScalar a, const SpectralScalar& b) { return a += b; }
SpectralScalar operator-(SpectralScalar a, const SpectralScalar& b) { return a -= b; }
SpectralScalar operator*(double c, SpectralScalar f) { return f *= c; }

// ============================================================================
// SpectralVector / TensorField
// ============================================================================

SpectralVector::SpectralVector(const Grid& grid) {
    comps_.reserve(grid.dim());
    for (int i = 0; i < grid.dim(); ++i) comps_.emplace_back(grid);
}

SpectralVector& SpectralVector::operator+=(const SpectralVector& other) {
    for (int i = 0; i < dim(); ++i) comps_[i] += other.comps_[i];
    return *this;
}

SpectralVector& SpectralVector::operator-=(const SpectralVector& other) {
    for (int i = 0; i < dim(); ++i) comps_[i] -= other.comps_[i];
    return *this;
}

SpectralVector& SpectralVector::operator*=(double c) {
    for (auto& f : comps_) f *= c;
    return *this;
}

SpectralVector operator+(SpectralVector a, const SpectralVector& b) { return a += b; }
SpectralVector operator-(SpectralVector a, const SpectralVector& b) { return a -= b; }
SpectralVector operator*(double c, SpectralVector v) { return v *= c; }

TensorField::TensorField(const Grid& grid) : dim_(grid.dim()) {
    comps_.reserve(static_cast<std::size_t>(dim_) * dim_);
    for (int i = 0; i < dim_ * dim_; ++i) comps_.emplace_back(grid);
}

// ============================================================================
// Transforms
// ============================================================================

SpectralScalar synthesize_from_samples(const Grid& grid, const std::vector<double>& samples) {
    if (samples.size() != grid.size())
        throw std::invalid_argument("synthesize_from_samples: sample count mismatch");
    std::vector<std::complex<double>> buf(grid.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!std::isfinite(samples[i]))
            throw std::invalid_argument("synthesize_from_samples: non-finite sample");
        buf[i] = samples[i];
    }
    fft::transform(grid, buf.data(), -1);
    const double scale = 1.0 / static_cast<double>(grid.size());
    for (auto& v : buf) v *= scale;
    SpectralScalar f(grid, std::move(buf));
    f.symmetrize_hermitian();
    return f;
}

SpectralScalar synthesize(const Grid& grid,
                          const std::function<double(const std::array<double, 4>&)>& sampler) {
    std::vector<double> samples(grid.size());
    const double h = grid.dx();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        KVec m = grid.site(i);
        std::array<double, 4> x{0.0, 0.0, 0.0, 0.0};
        for (int ax = 0; ax < grid.dim(); ++ax) x[ax] = h * m[ax];
        samples[i] = sampler(x);
    }
    return synthesize_from_samples(grid, samples);
}

std::vector<double> evaluate(const SpectralScalar& f, double* max_imag) {
    std::vector<std::complex<double>> buf = f.coeffs();
    fft::transform(f.grid(), buf.data(), +1);
    std::vector<double> out(buf.size());
    double mi = 0.0;
    for (std::size_t i = 0; i < buf.size(); ++i) {
        out[i] = buf[i].real();
        mi = std::max(mi, std::abs(buf[i].imag()));
    }
    if (max_imag) *max_imag = mi;
    return out;
}

// ============================================================================
// Serialization
// ============================================================================

namespace {
template <typename T>
void put_le(std::ostream& os, T v) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
    unsigned char b[sizeof(T)];
    is.read(reinterpret_cast<char*>(b), sizeof(T));
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
}
} // namespace

void write_bspc1(std::ostream& os, const SpectralScalar& f) {
    os.write("BSPC1", 5);
    put_le<std::int32_t>(os, f.grid().dim());
    put_le<std::int32_t>(os, f.grid().res());
    put_le<double>(os, f.grid().period());
    for (const auto& c : f.coeffs()) {
        put_le<double>(os, c.real());
        put_le<double>(os, c.imag());
    }
}

SpectralScalar read_bspc1(std::istream& is) {
    char magic[5];
    is.read(magic, 5);
    if (!is || std::memcmp(magic, "BSPC1", 5) != 0)
        throw std::runtime_error("read_bspc1: bad magic");
    int d = get_le<std::int32_t>(is);
    int n = get_le<std::int32_t>(is);
    double period = get_le<double>(is);
    Grid grid(d, n, period);
    std::vector<std::complex<double>> coeffs(grid.size());
    for (auto& c : coeffs) {
        double re = get_le<double>(is);
        double im = get_le<double>(is);
        c = {re, im};
    }
    if (!is) throw std::runtime_error("read_bspc1: truncated payload");
    return SpectralScalar(grid, std::move(coeffs));
}

void save_bspc1(const std::string& path, const SpectralScalar& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_bspc1: cannot open " + path);
    write_bspc1(os, f);
}

SpectralScalar load_bspc1(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_bspc1: cannot open " + path);
    return read_bspc1(is);
}

void write_slice_csv(std::ostream& os, const SpectralScalar& f, int axis, const KVec& base) {
    std::vector<double> samples = evaluate(f);
    const Grid& g = f.grid();
    os << "x,value\n";
    for (int m = 0; m < g.res(); ++m) {
        KVec site = base;
        site[axis] = m;
        std::size_t flat = 0;
        for (int ax = 0; ax < g.dim(); ++ax)
            flat = flat * g.res() + static_cast<std::size_t>(((site[ax] % g.res()) + g.res()) % g.res());
        os << g.dx() * m << "," << samples[flat] << "\n";
    }
}

} // namespace bil
