#pragma once

#include <complex>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "bil/grid.hpp"

namespace bil {

/// Scalar field stored as Fourier coefficients of a real field.
/// Convention: coeff(0) is the mean of the physical samples, and
/// evaluate() returns f(x_m) = sum_k coeff(k) e^{2 pi i k.m / N}.
/// Hermitian symmetry coeff(-k) = conj(coeff(k)) is an invariant.
class SpectralScalar {
  public:
    explicit SpectralScalar(const Grid& grid);
    SpectralScalar(const Grid& grid, std::vector<std::complex<double>> coeffs);

    const Grid& grid() const { return grid_; }
    const std::vector<std::complex<double>>& coeffs() const { return coeffs_; }
    std::vector<std::complex<double>>& coeffs() { return coeffs_; }

    std::complex<double> at(const KVec& k) const { return coeffs_[grid_.index_of(k)]; }
    void set(const KVec& k, std::complex<double> v) { coeffs_[grid_.index_of(k)] = v; }

    /// Forces coeff(-k) = conj(coeff(k)); returns the largest correction made.
    double symmetrize_hermitian();
    /// Max |coeff(k) - conj(coeff(-k))| over the lattice.
    double hermitian_deviation() const;

    SpectralScalar& operator+=(const SpectralScalar& other);
    SpectralScalar& operator-=(const SpectralScalar& other);
    SpectralScalar& operator*=(double c);

  private:
    Grid grid_;
    std::vector<std::complex<double>> coeffs_;
};

SpectralScalar operator+(SpectralScalar a, const SpectralScalar& b);
SpectralScalar operator-(SpectralScalar a, const SpectralScalar& b);
SpectralScalar operator*(double c, SpectralScalar f);

/// d-component vector field on a shared grid.
class SpectralVector {
  public:
    explicit SpectralVector(const Grid& grid);

    const Grid& grid() const { return comps_.front().grid(); }
    int dim() const { return static_cast<int>(comps_.size()); }
    SpectralScalar& operator[](int i) { return comps_[i]; }
    const SpectralScalar& operator[](int i) const { return comps_[i]; }

    SpectralVector& operator+=(const SpectralVector& other);
    SpectralVector& operator-=(const SpectralVector& other);
    SpectralVector& operator*=(double c);

  private:
    std::vector<SpectralScalar> comps_;
};

SpectralVector operator+(SpectralVector a, const SpectralVector& b);
SpectralVector operator-(SpectralVector a, const SpectralVector& b);
SpectralVector operator*(double c, SpectralVector v);

/// d x d tensor field (component (i,j) = u_i v_j for tensor products).
class TensorField {
  public:
    explicit TensorField(const Grid& grid);
    const Grid& grid() const { return comps_.front().grid(); }
    SpectralScalar& at(int i, int j) { return comps_[i * dim_ + j]; }
    const SpectralScalar& at(int i, int j) const { return comps_[i * dim_ + j]; }

  private:
    int dim_;
    std::vector<SpectralScalar> comps_;
};

/// Physical samples -> coefficients (forward DFT / N^d, then symmetrized).
/// Non-finite samples are rejected.
SpectralScalar synthesize_from_samples(const Grid& grid, const std::vector<double>& samples);

/// Samples the callable at the grid points x_m = (2 pi L / N) m and transforms.
SpectralScalar synthesize(const Grid& grid,
                          const std::function<double(const std::array<double, 4>&)>& sampler);

/// Coefficients -> physical samples (real part; max |imag| optionally reported).
std::vector<double> evaluate(const SpectralScalar& f, double* max_imag = nullptr);

/// Binary container: header "BSPC1", d, N, L little-endian, then the complex
/// coefficient array in row-major frequency order.
void write_bspc1(std::ostream& os, const SpectralScalar& f);
SpectralScalar read_bspc1(std::istream& is);
void save_bspc1(const std::string& path, const SpectralScalar& f);
SpectralScalar load_bspc1(const std::string& path);

/// CSV export of a sampled 1D slice along `axis` through lattice site `base`.
void write_slice_csv(std::ostream& os, const SpectralScalar& f, int axis, const KVec& base);

} // namespace bil
