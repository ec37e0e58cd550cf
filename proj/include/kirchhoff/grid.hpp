#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

// Boost 1.74's pchip calls isnan unqualified.
namespace boost::math::interpolators { using std::isnan; }
#include <boost/math/interpolators/pchip.hpp>

#include "error.hpp"

namespace kirchhoff {

enum class GridKind { RadialHalfLine, FullLine1D };

inline const char* to_string(GridKind k)
{
    return k == GridKind::RadialHalfLine ? "radial" : "line";
}

struct GridSpec {
    int N = 1;
    GridKind kind = GridKind::RadialHalfLine;
    double R = 10.0;
    std::size_t M = 1024;

    bool operator==(const GridSpec&) const = default;
};

// Area of the unit sphere in R^N, N = 1..4 (N = 1 counts the two endpoints).
inline double sphere_area(int N)
{
    switch (N) {
    case 1: return 2.0;
    case 2: return 2.0 * std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi;
    case 4: return 2.0 * std::numbers::pi * std::numbers::pi;
    }
    throw ConfigError("dimension must be in 1..4, got " + std::to_string(N));
}

inline double ball_volume(int N, double R)
{
    return sphere_area(N) * std::pow(R, N) / N;
}

// Node-centred finite volumes. On the half line, cell i is the shell
// [r_i - h/2, r_i + h/2] clipped to [0, R], so the weights integrate the
// constant exactly and reduce to the trapezoid rule for N = 1. Edge
// conductances are the shell-surface fluxes w(r_{i+1/2})/h; the resulting
// stiffness matrix is exact for quadratics and an M-matrix.
class Grid {
public:
    explicit Grid(const GridSpec& s) : spec_(s)
    {
        if (s.N < 1 || s.N > 4)
            throw ConfigError("dimension must be in 1..4, got " + std::to_string(s.N));
        if (s.kind == GridKind::FullLine1D && s.N != 1)
            throw ConfigError("full-line grid requires N = 1");
        if (!(s.R > 0) || !std::isfinite(s.R))
            throw ConfigError("grid extent must be positive and finite");
        if (s.M < 3)
            throw ConfigError("grid needs at least 3 nodes");

        const std::size_t M = s.M;
        x_.resize(M);
        w_.resize(M);
        kappa_.resize(M - 1);
        if (s.kind == GridKind::FullLine1D) {
            h_ = 2.0 * s.R / double(M - 1);
            for (std::size_t i = 0; i < M; ++i) {
                x_[i] = -s.R + h_ * double(i);
                w_[i] = h_;
            }
            x_[M - 1] = s.R;
            w_[0] = w_[M - 1] = 0.5 * h_;
            std::fill(kappa_.begin(), kappa_.end(), 1.0 / h_);
        } else {
            h_ = s.R / double(M - 1);
            const double om = sphere_area(s.N);
            for (std::size_t i = 0; i < M; ++i) {
                x_[i] = h_ * double(i);
                w_[i] = om * std::pow(x_[i], s.N - 1) * h_;
            }
            x_[M - 1] = s.R;
            // trapezoid in r with the measure folded in; the origin keeps its inner ball of radius h/2
            w_[0] = om * std::pow(0.5 * h_, s.N) / s.N;
            w_[M - 1] = 0.5 * om * std::pow(s.R, s.N - 1) * h_;
            // conductances chosen so the stencil maps r² to 2N exactly against these weights;
            // this is ω r_{i+1/2}^{N-1}/h for N ≤ 2 and differs from it near the origin otherwise
            double flux = 2.0 * s.N * w_[0];
            for (std::size_t i = 0; i + 1 < M; ++i) {
                if (i > 0)
                    flux += 2.0 * s.N * om * std::pow(x_[i], s.N - 1) * h_;
                kappa_[i] = flux / ((2.0 * double(i) + 1.0) * h_ * h_);
            }
        }
    }

    const GridSpec& spec() const { return spec_; }
    int dim() const { return spec_.N; }
    bool radial() const { return spec_.kind == GridKind::RadialHalfLine; }
    std::size_t size() const { return spec_.M; }
    double h() const { return h_; }
    double R() const { return spec_.R; }
    double x(std::size_t i) const { return x_[i]; }
    const std::vector<double>& nodes() const { return x_; }
    const std::vector<double>& weights() const { return w_; }
    const std::vector<double>& conductance() const { return kappa_; }

    // Dirichlet nodes: the outer radius, or both ends of the line.
    bool pinned(std::size_t i) const
    {
        return i + 1 == spec_.M || (!radial() && i == 0);
    }

private:
    GridSpec spec_;
    double h_ = 0;
    std::vector<double> x_, w_, kappa_;
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr build_grid(const GridSpec& s)
{
    return std::make_shared<const Grid>(s);
}

struct Field {
    GridPtr grid;
    std::vector<double> v;

    Field() = default;
    Field(GridPtr g) : grid(std::move(g)), v(grid->size(), 0.0) {}
    Field(GridPtr g, std::vector<double> vals) : grid(std::move(g)), v(std::move(vals))
    {
        if (v.size() != grid->size())
            throw UsageError("field length does not match grid");
    }

    std::size_t size() const { return v.size(); }
    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }
};

inline bool same_grid(const Grid& a, const Grid& b)
{
    return &a == &b || a.spec() == b.spec();
}

inline void check_on(const Grid& g, const Field& f)
{
    if (!f.grid || !same_grid(g, *f.grid))
        throw UsageError("field does not live on this grid");
}

template <class F>
Field sample(const GridPtr& g, F&& f)
{
    Field out(g);
    for (std::size_t i = 0; i < g->size(); ++i)
        out[i] = f(g->x(i));
    return out;
}

inline double integrate(const Grid& g, const Field& f)
{
    check_on(g, f);
    const auto& w = g.weights();
    double s = 0;
    for (std::size_t i = 0; i < w.size(); ++i)
        s += w[i] * f[i];
    return s;
}

inline double integrate(const Field& f) { return integrate(*f.grid, f); }

// sum_i w_i |u_i|^q
inline double lp_integral(const Field& u, double q)
{
    const auto& w = u.grid->weights();
    double s = 0;
    for (std::size_t i = 0; i < w.size(); ++i)
        s += w[i] * std::pow(std::abs(u[i]), q);
    return s;
}

inline double mass(const Field& u)
{
    const auto& w = u.grid->weights();
    double s = 0;
    for (std::size_t i = 0; i < w.size(); ++i)
        s += w[i] * u[i] * u[i];
    return s;
}

// (K u)_i, the stiffness matrix applied to u.
inline std::vector<double> apply_stiffness(const Grid& g, const std::vector<double>& u)
{
    const auto& k = g.conductance();
    std::vector<double> out(u.size(), 0.0);
    for (std::size_t e = 0; e < k.size(); ++e) {
        const double f = k[e] * (u[e + 1] - u[e]);
        out[e] -= f;
        out[e + 1] += f;
    }
    return out;
}

inline double grad_sq(const Grid& g, const Field& u)
{
    check_on(g, u);
    const auto& k = g.conductance();
    double s = 0;
    for (std::size_t e = 0; e < k.size(); ++e) {
        const double d = u[e + 1] - u[e];
        s += k[e] * d * d;
    }
    return s;
}

inline double grad_sq(const Field& u) { return grad_sq(*u.grid, u); }

inline Field laplacian(const Grid& g, const Field& u)
{
    check_on(g, u);
    const std::size_t M = g.size();
    const auto& w = g.weights();
    auto ku = apply_stiffness(g, u.v);
    Field out(u.grid);
    for (std::size_t i = 0; i < M; ++i)
        out[i] = -ku[i] / w[i];
    if (M < 4)
        return out;
    const double h = g.h();
    const double h2 = h * h;
    const std::size_t n = M - 1;
    // One-sided second-order closures at the Dirichlet ends.
    double d2 = (2 * u[n] - 5 * u[n - 1] + 4 * u[n - 2] - u[n - 3]) / h2;
    double d1 = (3 * u[n] - 4 * u[n - 1] + u[n - 2]) / (2 * h);
    out[n] = d2 + (g.radial() ? (g.dim() - 1) * d1 / g.R() : 0.0);
    if (!g.radial())
        out[0] = (2 * u[0] - 5 * u[1] + 4 * u[2] - u[3]) / h2;
    return out;
}

namespace detail {

// Nodes in order of increasing distance from the centre.
inline std::vector<std::size_t> layout_order(const Grid& g)
{
    std::vector<std::size_t> idx(g.size());
    std::iota(idx.begin(), idx.end(), 0);
    if (!g.radial())
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return std::abs(g.x(a)) < std::abs(g.x(b)) - 1e-12 * g.h();
        });
    return idx;
}

} // namespace detail

// Discrete Schwarz rearrangement: values sorted by size are laid out by
// cumulative measure from the origin outwards.
inline Field rearrange_decreasing(const Grid& g, const Field& u)
{
    check_on(g, u);
    for (double v : u.v)
        if (v < 0 || !std::isfinite(v))
            throw DomainError("rearrangement needs a nonnegative finite field");
    const auto& w = g.weights();
    const std::size_t M = g.size();
    auto lay = detail::layout_order(g);

    std::vector<std::size_t> by_val(M);
    std::iota(by_val.begin(), by_val.end(), 0);
    // Ties keep layout order so that an already decreasing field is a fixed point.
    std::vector<std::size_t> rank(M);
    for (std::size_t k = 0; k < M; ++k)
        rank[lay[k]] = k;
    std::stable_sort(by_val.begin(), by_val.end(), [&](std::size_t a, std::size_t b) {
        if (u[a] != u[b])
            return u[a] > u[b];
        return rank[a] < rank[b];
    });
    std::vector<double> cum(M + 1, 0.0);
    for (std::size_t k = 0; k < M; ++k)
        cum[k + 1] = cum[k] + w[by_val[k]];

    // Each layout cell takes the root mean square of the sorted values over its measure window,
    // so ∫u² is kept exactly and other Lᵖ integrals to second order in h.
    Field out(u.grid);
    double acc = 0;
    std::size_t j = 0;
    for (std::size_t k = 0; k < M; ++k) {
        const std::size_t i = lay[k];
        const double lo = acc, hi = acc + w[i];
        acc = hi;
        while (j + 1 < M && cum[j + 1] <= lo)
            ++j;
        if (j + 1 >= M || cum[j + 1] >= hi) {
            out[i] = u[by_val[j]];
            continue;
        }
        double s = 0;
        for (std::size_t q = j; q < M && cum[q] < hi; ++q) {
            const double v = u[by_val[q]];
            s += (std::min(hi, cum[q + 1]) - std::max(lo, cum[q])) * v * v;
        }
        out[i] = std::sqrt(s / w[i]);
    }
    return out;
}

// Shape-preserving cubic through the samples; zero outside the domain.
class Interpolant {
public:
    explicit Interpolant(const Field& u)
        : radial_(u.grid->radial()), lo_(u.grid->x(0)), hi_(u.grid->x(u.size() - 1))
    {
        auto xs = u.grid->nodes();
        auto ys = u.v;
        if (xs.size() >= 4)
            f_ = std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(
                std::move(xs), std::move(ys));
        else {
            xs_ = std::move(xs);
            ys_ = std::move(ys);
        }
    }

    double operator()(double x) const
    {
        if (radial_)
            x = std::abs(x);
        if (x < lo_ || x > hi_)
            return 0.0;
        if (f_)
            return (*f_)(x);
        auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
        std::size_t k = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - xs_.begin(), 1), xs_.size() - 1);
        const double t = (x - xs_[k - 1]) / (xs_[k] - xs_[k - 1]);
        return (1 - t) * ys_[k - 1] + t * ys_[k];
    }

private:
    bool radial_;
    double lo_, hi_;
    std::shared_ptr<boost::math::interpolators::pchip<std::vector<double>>> f_;
    std::vector<double> xs_, ys_;
};

inline void write_csv(std::ostream& os, const Field& u)
{
    os << "coordinate,value\n";
    char buf[64];
    for (std::size_t i = 0; i < u.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", u.grid->x(i), u[i]);
        os << buf;
    }
}

} // namespace kirchhoff
