#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace bil {

/// Integer frequency vector. Only the first Grid::dim() entries are used.
using KVec = std::array<int, 4>;

/// Discrete periodic domain: [0, 2*pi*L)^d sampled on N points per axis.
/// Integer frequency k maps to physical frequency k/L; the lattice covers
/// k_i in (-N/2, N/2].
class Grid {
  public:
    Grid(int dim, int res, double period);

    int dim() const { return dim_; }
    int res() const { return res_; }
    double period() const { return period_; }

    /// Total number of lattice points / Fourier modes (N^d).
    std::size_t size() const { return size_; }

    /// Physical box edge length 2*pi*L.
    double box_length() const;
    /// Grid spacing 2*pi*L/N.
    double dx() const;
    /// Largest resolvable physical radius N/(2L) (per-axis bound is N/2 in
    /// integer units; the radial bound is only used for dyadic bookkeeping).
    double nyquist_radius() const;

    /// Decode a flat row-major index into the integer frequency vector.
    KVec freq(std::size_t flat) const;
    /// Flat index of an integer frequency vector (wrapped mod N per axis).
    std::size_t index_of(const KVec& k) const;
    /// Decode a flat index into per-axis sample indices m_i in [0, N).
    KVec site(std::size_t flat) const;

    /// |k|^2 in integer lattice units.
    static double lattice_norm_sq(const KVec& k, int dim);
    /// Physical |k/L|.
    double phys_norm(const KVec& k) const;

    bool same_as(const Grid& other) const;

  private:
    int dim_;
    int res_;
    double period_;
    std::size_t size_;
};

} // namespace bil
