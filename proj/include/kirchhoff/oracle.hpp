#pragma once

// Independent reference computations used by the acceptance battery. The
// brute-force minimizer works directly on node values with its own energy
// code; it shares only the quadrature weights with the library.

#include <cmath>
#include <vector>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "error.hpp"

namespace kirchhoff::oracle {

struct LineProblem {
    double a = 1, b = 1, beta = 1, p = 2;
    double R = 8;
    std::size_t M = 64;
    double k = 0;          // V = k x²
};

struct BruteResult {
    double energy = 0;
    std::vector<double> u;
    int iterations = 0;
};

namespace detail {

struct Ctx {
    LineProblem pb;
    double h;
    std::vector<double> x, w;
};

// Free values are the interior nodes; u = v / ‖v‖ keeps the mass exactly 1.
inline void unpack(const Ctx& c, const gsl_vector* v, std::vector<double>& u, double& nrm)
{
    const std::size_t M = c.pb.M;
    u.assign(M, 0.0);
    double s = 0;
    for (std::size_t i = 1; i + 1 < M; ++i) {
        u[i] = gsl_vector_get(v, i - 1);
        s += c.w[i] * u[i] * u[i];
    }
    nrm = std::sqrt(s);
    for (auto& z : u)
        z /= nrm;
}

inline double energy_of(const Ctx& c, const std::vector<double>& u, std::vector<double>* dEdu)
{
    const auto& pb = c.pb;
    const std::size_t M = pb.M;
    double T = 0;
    for (std::size_t i = 0; i + 1 < M; ++i) {
        const double d = (u[i + 1] - u[i]) / c.h;
        T += c.h * d * d;
    }
    double pot = 0, lp = 0;
    for (std::size_t i = 0; i < M; ++i) {
        pot += c.w[i] * pb.k * c.x[i] * c.x[i] * u[i] * u[i];
        lp += c.w[i] * std::pow(std::abs(u[i]), pb.p + 2);
    }
    if (dEdu) {
        dEdu->assign(M, 0.0);
        const double coef = pb.a + pb.b * T;
        for (std::size_t i = 0; i + 1 < M; ++i) {
            const double f = 2 * (u[i + 1] - u[i]) / c.h;
            (*dEdu)[i] -= 0.5 * coef * f;
            (*dEdu)[i + 1] += 0.5 * coef * f;
        }
        for (std::size_t i = 0; i < M; ++i)
            (*dEdu)[i] += c.w[i] * (pb.k * c.x[i] * c.x[i] * u[i]
                                    - pb.beta * std::pow(std::abs(u[i]), pb.p) * u[i]);
    }
    return 0.5 * pb.a * T + 0.25 * pb.b * T * T + 0.5 * pot - pb.beta / (pb.p + 2) * lp;
}

inline double f_cb(const gsl_vector* v, void* p)
{
    auto& c = *static_cast<Ctx*>(p);
    std::vector<double> u;
    double n;
    unpack(c, v, u, n);
    return energy_of(c, u, nullptr);
}

inline void df_cb(const gsl_vector* v, void* p, gsl_vector* g)
{
    auto& c = *static_cast<Ctx*>(p);
    std::vector<double> u, G;
    double n;
    unpack(c, v, u, n);
    energy_of(c, u, &G);
    // chain rule through u = v/‖v‖
    double gu = 0;
    for (std::size_t i = 1; i + 1 < c.pb.M; ++i)
        gu += G[i] * u[i];
    for (std::size_t i = 1; i + 1 < c.pb.M; ++i)
        gsl_vector_set(g, i - 1, (G[i] - gu * c.w[i] * u[i]) / n);
}

inline void fdf_cb(const gsl_vector* v, void* p, double* f, gsl_vector* g)
{
    *f = f_cb(v, p);
    df_cb(v, p, g);
}

} // namespace detail

// Minimizes the discrete energy on a uniform line grid with Dirichlet ends.
inline BruteResult brute_force_line(const LineProblem& pb, int max_iter = 200000)
{
    detail::Ctx c{pb, 2 * pb.R / double(pb.M - 1), {}, {}};
    c.x.resize(pb.M);
    c.w.assign(pb.M, c.h);
    for (std::size_t i = 0; i < pb.M; ++i)
        c.x[i] = -pb.R + c.h * double(i);
    c.w.front() = c.w.back() = 0.5 * c.h;

    const std::size_t n = pb.M - 2;
    gsl_set_error_handler_off();
    gsl_multimin_function_fdf fn{&detail::f_cb, &detail::df_cb, &detail::fdf_cb, n, &c};
    gsl_vector* v = gsl_vector_alloc(n);
    for (std::size_t i = 0; i < n; ++i)
        gsl_vector_set(v, i, std::exp(-0.5 * c.x[i + 1] * c.x[i + 1]));
    gsl_multimin_fdfminimizer* s = gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, n);

    BruteResult out;
    double prev = 0;
    for (int restart = 0; restart < 20; ++restart) {
        gsl_multimin_fdfminimizer_set(s, &fn, v, 1e-2, 1e-4);
        int status = GSL_CONTINUE, it = 0;
        for (; it < max_iter && status == GSL_CONTINUE; ++it) {
            if (gsl_multimin_fdfminimizer_iterate(s))
                break;
            status = gsl_multimin_test_gradient(s->gradient, 1e-11);
        }
        out.iterations += it;
        gsl_vector_memcpy(v, s->x);
        const double e = s->f;
        if (restart > 0 && std::abs(e - prev) <= 1e-14 * std::max(1.0, std::abs(e)))
            break;
        prev = e;
    }
    double nrm;
    detail::unpack(c, v, out.u, nrm);
    out.energy = detail::energy_of(c, out.u, nullptr);
    gsl_multimin_fdfminimizer_free(s);
    gsl_vector_free(v);
    return out;
}

// ∫_0^∞ r³/(1+r²)⁴ dr = B(2,2)/2, so ∫_{R⁴} U⁴ = 64·2π²·B(2,2)/2 for U = 2√2/(1+r²).
inline double bubble_quartic_integral()
{
    const double pi = 3.14159265358979323846;
    return 64.0 * 2 * pi * pi * 0.5 * std::beta(2.0, 2.0);
}

} // namespace kirchhoff::oracle
