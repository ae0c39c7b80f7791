#include "bil/besov.hpp"

#include <cmath>
#include <stdexcept>

#include "bil/spectral_ops.hpp"

namespace bil {

namespace {

void check_admissible(const SpectralScalar& f, const DyadicPartition& part) {
    const Grid& g = f.grid();
    double mean = std::abs(f.coeffs()[g.index_of(KVec{0, 0, 0, 0})]);
    double total = parseval_l2(f);
    if (total > 0.0 && mean > 1e-10 * total)
        throw std::invalid_argument("besov_norm: field is not mean-free");
    double oor = out_of_range_energy(f, part);
    if (oor > 1e-8)
        throw std::invalid_argument("besov_norm: " + std::to_string(oor) +
                                    " relative energy outside the certified range");
}

double lq_accumulate(const std::vector<double>& weighted, double q) {
    if (std::isinf(q)) {
        double m = 0.0;
        for (double v : weighted) m = std::max(m, v);
        return m;
    }
    double acc = 0.0;
    for (double v : weighted) acc += std::pow(v, q); // fixed ascending-j order
    return std::pow(acc, 1.0 / q);
}

} // namespace

double besov_norm(const SpectralScalar& f, const BesovParams& params, const DyadicPartition& part) {
    check_admissible(f, part);
    std::vector<double> terms;
    terms.reserve(part.j_max() - part.j_min() + 1);
    for (int j = part.j_min(); j <= part.j_max(); ++j) {
        double bn = lp_norm(dyadic_block(f, j, part), params.p);
        terms.push_back(std::pow(2.0, j * params.s) * bn);
    }
    return lq_accumulate(terms, params.q);
}

double besov_norm(const SpectralVector& u, const BesovParams& params, const DyadicPartition& part) {
    for (int i = 0; i < u.dim(); ++i) check_admissible(u[i], part);
    std::vector<double> terms;
    terms.reserve(part.j_max() - part.j_min() + 1);
    for (int j = part.j_min(); j <= part.j_max(); ++j) {
        double sq = 0.0;
        for (int i = 0; i < u.dim(); ++i) {
            double bn = lp_norm(dyadic_block(u[i], j, part), params.p);
            sq += bn * bn;
        }
        terms.push_back(std::pow(2.0, j * params.s) * std::sqrt(sq));
    }
    return lq_accumulate(terms, params.q);
}

namespace {

void check_indices(const BlockIndexSet& indices, const DyadicPartition& part) {
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (i > 0 && indices[i] <= indices[i - 1])
            throw std::invalid_argument("restricted_besov_norm: indices must strictly increase");
        if (!part.certified(indices[i]))
            throw std::out_of_range("restricted_besov_norm: index outside certified range");
    }
}

} // namespace

double restricted_besov_norm(const SpectralScalar& f, const BesovParams& params,
                             const BlockIndexSet& indices, const DyadicPartition& part) {
    check_indices(indices, part);
    std::vector<double> terms;
    terms.reserve(indices.size());
    for (int j : indices) {
        double bn = lp_norm(dyadic_block(f, j, part), params.p);
        terms.push_back(std::pow(2.0, j * params.s) * bn);
    }
    return lq_accumulate(terms, params.q);
}

double restricted_besov_norm(const SpectralVector& u, const BesovParams& params,
                             const BlockIndexSet& indices, const DyadicPartition& part) {
    check_indices(indices, part);
    std::vector<double> terms;
    terms.reserve(indices.size());
    for (int j : indices) {
        double sq = 0.0;
        for (int i = 0; i < u.dim(); ++i) {
            double bn = lp_norm(dyadic_block(u[i], j, part), params.p);
            sq += bn * bn;
        }
        terms.push_back(std::pow(2.0, j * params.s) * std::sqrt(sq));
    }
    return lq_accumulate(terms, params.q);
}

namespace {

BlockIndexSet full_range(const DyadicPartition& part) {
    BlockIndexSet all;
    for (int j = part.j_min(); j <= part.j_max(); ++j) all.push_back(j);
    return all;
}

} // namespace

double besov_norm_certified(const SpectralScalar& f, const BesovParams& params,
                            const DyadicPartition& part) {
    return restricted_besov_norm(f, params, full_range(part), part);
}

double besov_norm_certified(const SpectralVector& u, const BesovParams& params,
                            const DyadicPartition& part) {
    return restricted_besov_norm(u, params, full_range(part), part);
}

SpectralScalar scaling_transform(const SpectralScalar& f, int lam_log2, double weight) {
    // lambda^w f(lambda x) on the box of period L / lambda: the samples are
    // the originals scaled by lambda^w and the integer mode k acquires the
    // physical frequency lambda k / L. Everything shifts by whole octaves, so
    // the dyadic law is exact.
    const Grid& g = f.grid();
    Grid scaled(g.dim(), g.res(), std::ldexp(g.period(), -lam_log2));
    const double amp = std::pow(2.0, lam_log2 * weight);
    std::vector<std::complex<double>> coeffs = f.coeffs();
    for (auto& c : coeffs) c *= amp;
    return SpectralScalar(scaled, std::move(coeffs));
}

SpectralVector scaling_transform(const SpectralVector& u, int lam_log2, double weight) {
    SpectralVector out(u.grid());
    for (int i = 0; i < u.dim(); ++i) out[i] = scaling_transform(u[i], lam_log2, weight);
    return out;
}

} // namespace bil
