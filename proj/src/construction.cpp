#include "bil/construction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace bil {

// ============================================================================
// Reference profiles (continuum scale)
// ============================================================================

double theta_hat(double xi, int d) {
    // Plateau 1/(200 d), support 1/(100 d); same smooth transition as chi.
    return smooth_bump(std::abs(xi) * 100.0 * d);
}

double theta_eval(double x, int d) {
    const double r1 = 1.0 / (100.0 * d);
    const int panels = 4096;
    const double h = r1 / panels;
    auto f = [&](double xi) { return theta_hat(xi, d) * std::cos(x * xi); };
    double acc = 0.0;
    for (int i = 0; i < panels; ++i) {
        double a = h * i;
        acc += h / 6.0 * (f(a) + 4.0 * f(a + 0.5 * h) + f(a + h));
    }
    return acc / M_PI;
}

std::function<double(const std::array<double, 4>&)> phi_profile(int d) {
    if (d < 2) throw std::invalid_argument("phi_profile: d >= 2");
    return [d](const std::array<double, 4>& x) {
        double v = std::sin(17.0 / 24.0 * x[d - 1]);
        for (int i = 0; i < d; ++i) v *= theta_eval(x[i], d);
        return v;
    };
}

std::array<double, 4> matrix_A_diag(double eps, int d) {
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("matrix_A: eps in (0,1)");
    std::array<double, 4> diag{1.0, 1.0, 1.0, 1.0};
    diag[0] = diag[1] = eps;
    for (int i = d; i < 4; ++i) diag[i] = 0.0;
    return diag;
}

std::array<double, 4> direction_e(int d) {
    std::array<double, 4> e{0.0, 0.0, 0.0, 0.0};
    e[0] = e[1] = std::sqrt(2.0) / 2.0;
    (void)d;
    return e;
}

// ============================================================================
// Schedule
// ============================================================================

double ConstructionSchedule::amplitude() const {
    return amplitude_base * std::pow(n_proxy(), -1.0 / (2.0 * q));
}

BlockIndexSet ConstructionSchedule::block_set() const {
    BlockIndexSet set;
    for (const auto& s : summands) set.push_back(s.block);
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
    return set;
}

namespace {

// Worst-case lattice radius^2 of a mode (C +- T, C -+ T, k3, 0, ...).
double mode_radius_sq(int carrier, int t, int k3) {
    return 2.0 * carrier * carrier + 2.0 * double(t) * t + double(k3) * k3;
}

} // namespace

void ConstructionSchedule::validate(const Grid& grid) const {
    if (dim != grid.dim()) throw std::invalid_argument("schedule: dim mismatch");
    if (dim < 3) throw std::invalid_argument("schedule: construction requires d >= 3");
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("schedule: eps in (0,1)");
    if (!(q >= 1.0)) throw std::invalid_argument("schedule: q >= 1");
    if (carrier < 1) throw std::invalid_argument("schedule: carrier >= 1");
    if (summands.empty()) throw std::invalid_argument("schedule: no summands");

    DyadicPartition part = build_partition(grid);
    if (!part.certified(carrier_block))
        throw std::invalid_argument("schedule: carrier block not certified");

    const double L = grid.period();
    const double lam = std::sqrt(2.0) * carrier / L;
    double ratio = lam * std::ldexp(1.0, -carrier_block);
    if (ratio < 4.0 / 3.0 || ratio > 1.5)
        throw std::invalid_argument("schedule: carrier radius outside its block plateau");

    const int half = grid.res() / 2;
    if (2 * (carrier + spread_cap) > half - 1)
        throw std::invalid_argument("schedule: carrier/spread exceed the product Nyquist budget");
    if (spread_cap > carrier - 1)
        throw std::invalid_argument("schedule: spread reaches the singular plane k2 = 0");

    int k3_max = 0;
    for (const auto& s : summands) {
        if (s.h < 1) throw std::invalid_argument("schedule: internal carrier h >= 1");
        if (s.block >= carrier_block)
            throw std::invalid_argument("schedule: envelope block must lie below the carrier block");
        if (!part.certified(s.block))
            throw std::invalid_argument("schedule: envelope block not certified");
        double diag_ratio = (2.0 * s.h / L) * std::ldexp(1.0, -s.block);
        if (diag_ratio < 4.0 / 3.0 - 1e-12 || diag_ratio > 1.5 + 1e-12)
            throw std::invalid_argument("schedule: squared-envelope mode misses its block plateau");
        int spread = kind == EnvelopeKind::Spectral
                         ? static_cast<int>(std::floor(spectral_hwidth))
                         : fejer_order;
        k3_max = std::max(k3_max, s.h + spread);
        if (kind == EnvelopeKind::Spectral && s.h - spread < 1)
            throw std::invalid_argument("schedule: spectral x3 bump touches k3 <= 0");
    }
    if (2 * k3_max > half - 1)
        throw std::invalid_argument("schedule: x3 modulation exceeds the product Nyquist budget");

    if (kind == EnvelopeKind::Spectral) {
        if (summands.size() != 1)
            throw std::invalid_argument("schedule: spectral kind carries a single summand");
    } else {
        // Envelope translations along x3 must stay well separated; Fejer
        // kernels are quasi-localized, not disjoint, so demand an angular gap.
        const double min_gap = M_PI / 8.0;
        for (std::size_t i = 0; i < summands.size(); ++i)
            for (std::size_t j = i + 1; j < summands.size(); ++j) {
                double gap = std::abs(
                    std::remainder(summands[i].x3_center - summands[j].x3_center, 2.0 * M_PI));
                if (gap < min_gap)
                    throw std::invalid_argument("schedule: translation collision (envelopes overlap)");
            }
    }
}

std::string ConstructionSchedule::to_json() const {
    nlohmann::json j;
    j["dim"] = dim;
    j["q"] = q;
    j["eps"] = eps;
    j["carrier"] = carrier;
    j["carrier_block"] = carrier_block;
    j["amplitude_base"] = amplitude_base;
    j["bandwidth_factor"] = bandwidth_factor;
    j["spread_cap"] = spread_cap;
    j["spectral_hwidth"] = spectral_hwidth;
    j["fejer_order"] = fejer_order;
    j["kind"] = kind == EnvelopeKind::Spectral ? "spectral" : "fejer";
    j["summands"] = nlohmann::json::array();
    for (const auto& s : summands) {
        j["summands"].push_back({{"block", s.block},
                                 {"h", s.h},
                                 {"x3_center", s.x3_center},
                                 {"u_phase", s.u_phase}});
    }
    return j.dump(2);
}

ConstructionSchedule ConstructionSchedule::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    ConstructionSchedule s;
    s.dim = j.at("dim").get<int>();
    s.q = j.at("q").get<double>();
    s.eps = j.at("eps").get<double>();
    s.carrier = j.at("carrier").get<int>();
    s.carrier_block = j.at("carrier_block").get<int>();
    s.amplitude_base = j.at("amplitude_base").get<double>();
    s.bandwidth_factor = j.at("bandwidth_factor").get<double>();
    s.spread_cap = j.at("spread_cap").get<int>();
    s.spectral_hwidth = j.at("spectral_hwidth").get<double>();
    s.fejer_order = j.at("fejer_order").get<int>();
    s.kind = j.at("kind").get<std::string>() == "spectral" ? EnvelopeKind::Spectral
                                                           : EnvelopeKind::Fejer;
    for (const auto& e : j.at("summands")) {
        EnvelopeSummand sum;
        sum.block = e.at("block").get<int>();
        sum.h = e.at("h").get<int>();
        sum.x3_center = e.at("x3_center").get<double>();
        sum.u_phase = e.at("u_phase").get<double>();
        s.summands.push_back(sum);
    }
    return s;
}

// ============================================================================
// desk_scale
// ============================================================================

namespace {

// Integer h whose doubled mode 2h/L sits inside the plateau of `block`;
// -1 when the window contains no integer.
int plateau_h(int block, double L) {
    double lo = 2.0 / 3.0 * std::ldexp(1.0, block) * L;
    double hi = 0.75 * std::ldexp(1.0, block) * L;
    int h = static_cast<int>(std::ceil(lo - 1e-12));
    return (h >= 1 && h <= hi + 1e-12) ? h : -1;
}

// Carrier closest to the plateau center of `block`; -1 if none fits.
int pick_carrier(int block, double L, int half) {
    int best = -1;
    double best_err = 1e300;
    for (int c = 1; 2 * (c + 1) <= half - 1; ++c) {
        double ratio = std::sqrt(2.0) * c / (L * std::ldexp(1.0, block));
        if (ratio <= 4.0 / 3.0 || ratio >= 1.5) continue;
        double err = std::abs(ratio - std::sqrt(2.0));
        if (err < best_err) {
            best_err = err;
            best = c;
        }
    }
    return best;
}

} // namespace

ConstructionSchedule desk_scale(int d, double q, int m, const Grid& grid, EnvelopeKind kind,
                                double eps, int carrier_block_override) {
    if (grid.dim() != d) throw std::runtime_error("desk_scale: grid dimension mismatch");
    if (d < 3) throw std::runtime_error("desk_scale: construction requires d >= 3");
    if (m < 1) throw std::runtime_error("desk_scale: need at least one summand");

    DyadicPartition part = build_partition(grid);
    const double L = grid.period();
    const int half = grid.res() / 2;

    ConstructionSchedule sched;
    sched.dim = d;
    sched.q = q;
    sched.eps = eps;
    sched.kind = kind;

    int nstar = carrier_block_override >= 0
                    ? carrier_block_override
                    : (kind == EnvelopeKind::Spectral ? part.j_max() : part.j_max() - 1);
    int c = pick_carrier(nstar, L, half);
    while (c < 0 && nstar > part.j_min() + 1) c = pick_carrier(--nstar, L, half);
    if (c < 0) throw std::runtime_error("desk_scale: no admissible carrier on this grid");
    sched.carrier = c;
    sched.carrier_block = nstar;
    sched.spread_cap = std::min({4, (half - 1 - 2 * c) / 2, c - 1});
    if (sched.spread_cap < 1) throw std::runtime_error("desk_scale: no room for anisotropy spread");

    std::vector<int> feasible; // envelope blocks below the carrier
    for (int l = std::max(0, part.j_min()); l < nstar; ++l)
        if (plateau_h(l, L) > 0) feasible.push_back(l);
    if (feasible.empty()) throw std::runtime_error("desk_scale: no feasible envelope block");

    if (kind == EnvelopeKind::Spectral) {
        if (m != 1) throw std::runtime_error("desk_scale: spectral kind hosts one summand");
        // Largest block whose x3 mode fits the Lemma A.1 annulus with room
        // left for the anisotropy spread.
        double budget = (std::pow(35.0 / 34.0, 2) - 1.0) * 2.0 * c * c;
        int pick = -1;
        for (int l : feasible) {
            int h = plateau_h(l, L);
            if (double(h) * h <= 0.5 * budget) pick = l;
        }
        if (pick < 0) throw std::runtime_error("desk_scale: annulus budget admits no envelope");
        EnvelopeSummand s;
        s.block = pick;
        s.h = plateau_h(pick, L);
        int dmax = 0;
        while (double(s.h + dmax + 1) * (s.h + dmax + 1) <= 0.5 * budget && s.h - (dmax + 1) >= 1)
            ++dmax;
        sched.spectral_hwidth = dmax + 0.9;
        double rem = budget - double(s.h + dmax) * (s.h + dmax);
        int tcap = static_cast<int>(std::floor(std::sqrt(std::max(0.0, rem) / 2.0)));
        sched.spread_cap = std::max(1, std::min(sched.spread_cap, tcap));
        sched.summands.push_back(s);
    } else {
        // All summands at the top feasible block, translated apart along x3.
        // Spectra must stay inside the certified radius window so the Besov
        // norms remain legal. Order 2 balances translate overlap (which keeps
        // the restricted bilinear norm from sagging across the sweep) against
        // the L^d additivity that drives the decay slope.
        sched.fejer_order = 2;
        int l_top = feasible.back();
        int h = plateau_h(l_top, L);
        auto [rlo, rhi] = part.certified_radii();
        double top_sq = mode_radius_sq(c, sched.spread_cap, h + sched.fejer_order);
        while (sched.fejer_order > 1 && std::sqrt(top_sq) / L > rhi) {
            --sched.fejer_order;
            top_sq = mode_radius_sq(c, sched.spread_cap, h + sched.fejer_order);
        }
        if (std::sqrt(top_sq) / L > rhi)
            throw std::runtime_error("desk_scale: spectra cannot fit the certified window");
        for (int i = 0; i < m; ++i) {
            EnvelopeSummand s;
            s.block = l_top;
            s.h = h;
            s.x3_center = 2.0 * M_PI * (i + 0.5) / m;
            s.u_phase = 2.0 * M_PI * i / m;
            sched.summands.push_back(s);
        }
    }
    sched.validate(grid);
    return sched;
}

// ============================================================================
// Field assembly
// ============================================================================

namespace {

// Antidiagonal profile: 1 + 2 sum_T w(T/sigma_u) cos(T (u - phase)).
struct UProfile {
    std::vector<double> weights;
    double phase;

    UProfile(double sigma_u, int tcap, double phase_) : phase(phase_) {
        weights.push_back(1.0);
        for (int t = 1; t <= tcap; ++t)
            weights.push_back(sigma_u > 0.0 ? smooth_bump(t / sigma_u) : 0.0);
    }

    double eval(double u) const {
        double v = weights[0];
        for (std::size_t t = 1; t < weights.size(); ++t)
            v += 2.0 * weights[t] * std::cos(double(t) * (u - phase));
        return v;
    }
};

double fejer_kernel(double theta, int order) {
    double v = 1.0;
    for (int t = 1; t <= order; ++t)
        v += 2.0 * (1.0 - double(t) / (order + 1)) * std::cos(t * theta);
    return v;
}

std::vector<std::vector<double>> build_summand_fields(const ConstructionSchedule& sched,
                                                      const Grid& grid, bool carrier_on) {
    const int d = grid.dim();
    const int N = grid.res();
    const double sigma_u = sched.eps * sched.bandwidth_factor;

    std::vector<double> angle(N);
    for (int i = 0; i < N; ++i) angle[i] = 2.0 * M_PI * i / N;

    std::vector<std::vector<double>> beta;
    beta.reserve(sched.summands.size());

    for (const auto& s : sched.summands) {
        UProfile uprof(sigma_u, sched.spread_cap, s.u_phase);

        std::vector<double> f3(N);
        if (sched.kind == EnvelopeKind::Spectral) {
            int dmax = static_cast<int>(std::floor(sched.spectral_hwidth));
            for (int i = 0; i < N; ++i) {
                double th = angle[i] - s.x3_center;
                double v = 0.0;
                for (int del = -dmax; del <= dmax; ++del) {
                    if (s.h + del < 1) continue;
                    double w = smooth_bump(del / sched.spectral_hwidth);
                    v += w * std::cos((s.h + del) * th);
                }
                f3[i] = v;
            }
        } else {
            for (int i = 0; i < N; ++i) {
                double th = angle[i] - s.x3_center;
                f3[i] = fejer_kernel(th, sched.fejer_order) * std::cos(s.h * th);
            }
        }

        const double scale = std::ldexp(1.0, s.block);
        std::vector<double> field(grid.size());
        for (std::size_t flat = 0; flat < grid.size(); ++flat) {
            KVec mm = grid.site(flat);
            double th1 = angle[mm[0]];
            double th2 = angle[mm[1]];
            double env = uprof.eval(th1 - th2) * f3[mm[2]];
            double car = carrier_on ? std::sin(sched.carrier * (th1 + th2)) : 1.0;
            field[flat] = scale * env * car;
        }
        (void)d;
        beta.push_back(std::move(field));
    }
    return beta;
}

} // namespace

SpectralScalar build_bn(const ConstructionSchedule& sched, const Grid& grid, bool carrier_on) {
    sched.validate(grid);
    auto beta = build_summand_fields(sched, grid, carrier_on);
    const double a = sched.amplitude();
    std::vector<double> total(grid.size(), 0.0);
    for (const auto& f : beta)
        for (std::size_t i = 0; i < total.size(); ++i) total[i] += f[i];
    for (auto& v : total) v *= a;
    return synthesize_from_samples(grid, total);
}

SpectralScalar build_cn(const SpectralScalar& b) {
    const Grid& g = b.grid();
    double on_plane = 0.0, total = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        KVec k = g.freq(i);
        double e = std::norm(b.coeffs()[i]);
        total += e;
        if (k[1] == 0 && Grid::lattice_norm_sq(k, g.dim()) > 0.0) on_plane += e;
    }
    if (total > 0.0 && on_plane > 1e-12 * total)
        throw std::invalid_argument("build_cn: spectrum touches the singular plane k2 = 0");
    return apply_multiplier(b, [](const KVec& k) {
        return k[1] == 0 ? 0.0 : double(k[1] - k[0]) / double(k[1]);
    });
}

SpectralVector build_gn(const ConstructionSchedule& sched, const Grid& grid) {
    SpectralScalar b = build_bn(sched, grid);
    SpectralScalar c = build_cn(b);
    SpectralVector g(grid);
    g[0] = b;
    g[1] = c - b;
    return g;
}

std::pair<SpectralScalar, SpectralScalar> build_H1_H2(const ConstructionSchedule& sched,
                                                      const Grid& grid) {
    BuiltConstruction built = build_construction(sched, grid);
    return {std::move(built.H1), std::move(built.H2)};
}

BuiltConstruction build_construction(const ConstructionSchedule& sched, const Grid& grid) {
    sched.validate(grid);
    BuiltConstruction out(grid);
    out.amplitude = sched.amplitude();
    out.carrier_radius = std::sqrt(2.0) * sched.carrier / grid.period();
    out.beta = build_summand_fields(sched, grid, true);
    for (const auto& s : sched.summands) out.beta_block.push_back(s.block);

    const std::size_t n = grid.size();
    std::vector<double> total(n, 0.0), h1(n, 0.0), h2(n, 0.0);
    for (const auto& f : out.beta)
        for (std::size_t i = 0; i < n; ++i) {
            total[i] += f[i];
            h1[i] += f[i] * f[i];
        }
    for (std::size_t i = 0; i < n; ++i) h2[i] = total[i] * total[i] - h1[i];

    std::vector<double> b_samples(n);
    for (std::size_t i = 0; i < n; ++i) b_samples[i] = out.amplitude * total[i];

    out.b = synthesize_from_samples(grid, b_samples);
    out.H1 = synthesize_from_samples(grid, h1);
    out.H2 = synthesize_from_samples(grid, h2);
    out.c = build_cn(out.b);
    out.g = SpectralVector(grid);
    out.g[0] = out.b;
    out.g[1] = out.c - out.b;
    return out;
}

std::pair<double, double> lemma_a1_annulus(const ConstructionSchedule& sched, const Grid& grid) {
    double lam = std::sqrt(2.0) * sched.carrier / grid.period();
    return {lam * 33.0 / 34.0, lam * 35.0 / 34.0};
}

// ============================================================================
// Support reports
// ============================================================================

SupportReport verify_support(const SpectralScalar& f, double r_lo, double r_hi) {
    return verify_support(f, std::vector<std::pair<double, double>>{{r_lo, r_hi}});
}

SupportReport verify_support(const SpectralScalar& f,
                             const std::vector<std::pair<double, double>>& annuli) {
    SupportReport rep;
    rep.annuli = annuli;
    const Grid& g = f.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
        double e = std::norm(f.coeffs()[i]);
        if (e == 0.0) continue;
        double r = g.phys_norm(g.freq(i));
        bool inside = false;
        for (const auto& [lo, hi] : annuli)
            if (r >= lo && r <= hi) {
                inside = true;
                break;
            }
        (inside ? rep.inside_energy : rep.outside_energy) += e;
    }
    double total = rep.inside_energy + rep.outside_energy;
    rep.pass = total == 0.0 || rep.outside_energy <= 1e-10 * total;
    return rep;
}

} // namespace bil
