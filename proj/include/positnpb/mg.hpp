#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "positnpb/formats.hpp"
#include "positnpb/kernel_run.hpp"
#include "positnpb/npb_rng.hpp"

namespace positnpb {

struct MgClassParams {
    int n;           // interior points per dimension
    int iterations;  // default V-cycle count
};

inline MgClassParams mg_class_params(ProblemClass c)
{
    switch (c) {
        case ProblemClass::S: return {32, 100};
        case ProblemClass::W: return {64, 100};
        case ProblemClass::A: return {256, 100};
    }
    throw std::invalid_argument("mg: unknown class");
}

/// Cubic periodic grid of m^3 values, m = interior + 2, with one ghost
/// layer on each side. Index order (i3, i2, i1), i1 fastest.
template <class T>
struct Grid3D {
    int m = 0;
    std::vector<T> data;

    Grid3D() = default;
    Grid3D(int size, T fill) : m(size), data(static_cast<std::size_t>(size) * size * size, fill) {}

    T& operator()(int i3, int i2, int i1) noexcept
    {
        return data[(static_cast<std::size_t>(i3) * m + i2) * m + i1];
    }
    const T& operator()(int i3, int i2, int i1) const noexcept
    {
        return data[(static_cast<std::size_t>(i3) * m + i2) * m + i1];
    }
};

struct MgCharge {
    int i3, i2, i1;  // interior coordinates, 1-based (ghost layer is 0)
};

struct MgProblem {
    ProblemClass problem_class = ProblemClass::S;
    int n = 0;
    int levels = 0;  // log2(n); level k has 2^k interior points
    int iterations = 0;
    std::array<double, 4> a{-8.0 / 3.0, 0.0, 1.0 / 6.0, 1.0 / 12.0};
    std::array<double, 4> c{-3.0 / 8.0, 1.0 / 32.0, -1.0 / 64.0, 0.0};
    std::vector<MgCharge> plus, minus;
    Grid3D<double> v;
};

template <class T>
void mg_comm3(Grid3D<T>& u)
{
    const int m = u.m;
    for (int i3 = 1; i3 < m - 1; ++i3)
        for (int i2 = 1; i2 < m - 1; ++i2) {
            u(i3, i2, 0) = u(i3, i2, m - 2);
            u(i3, i2, m - 1) = u(i3, i2, 1);
        }
    for (int i3 = 1; i3 < m - 1; ++i3)
        for (int i1 = 0; i1 < m; ++i1) {
            u(i3, 0, i1) = u(i3, m - 2, i1);
            u(i3, m - 1, i1) = u(i3, 1, i1);
        }
    for (int i2 = 0; i2 < m; ++i2)
        for (int i1 = 0; i1 < m; ++i1) {
            u(0, i2, i1) = u(m - 2, i2, i1);
            u(m - 1, i2, i1) = u(1, i2, i1);
        }
}

/// Right-hand side: zero except +1 at the 10 largest and -1 at the 10
/// smallest of n^3 sequential randlc draws (i1 fastest), ghosts filled.
inline MgProblem mg_make_problem(ProblemClass c, double seed = npb_default_seed)
{
    MgProblem p;
    p.problem_class = c;
    const auto params = mg_class_params(c);
    p.n = params.n;
    p.iterations = params.iterations;
    p.levels = 0;
    while ((1 << p.levels) < p.n) ++p.levels;

    const int n = p.n;
    const std::size_t total = static_cast<std::size_t>(n) * n * n;
    std::vector<double> z(total);
    double x = seed;
    vranlc(x, npb_multiplier, z);

    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    constexpr int charges = 10;
    auto to_charge = [n](std::size_t idx) {
        const int i1 = static_cast<int>(idx % n);
        const int i2 = static_cast<int>((idx / n) % n);
        const int i3 = static_cast<int>(idx / (static_cast<std::size_t>(n) * n));
        return MgCharge{i3 + 1, i2 + 1, i1 + 1};
    };
    std::partial_sort(order.begin(), order.begin() + charges, order.end(),
                      [&](std::size_t l, std::size_t r) { return z[l] > z[r]; });
    for (int k = 0; k < charges; ++k) p.plus.push_back(to_charge(order[k]));
    std::partial_sort(order.begin(), order.begin() + charges, order.end(),
                      [&](std::size_t l, std::size_t r) { return z[l] < z[r]; });
    for (int k = 0; k < charges; ++k) p.minus.push_back(to_charge(order[k]));

    p.v = Grid3D<double>(n + 2, 0.0);
    for (const auto& q : p.minus) p.v(q.i3, q.i2, q.i1) = -1.0;
    for (const auto& q : p.plus) p.v(q.i3, q.i2, q.i1) = 1.0;
    mg_comm3(p.v);
    return p;
}

struct MgOptions {
    int iterations = 0;  // 0: class default
    /// dots: quire only in the residual norm; all: every stencil sum too.
    QuireScope quire_scope = QuireScope::all;
};

namespace detail {

struct MgOffset {
    int d3, d2, d1;
};

// Neighbour offsets of the 27-point stencil grouped by distance shell:
// 0 centre, 1 faces, 2 edges, 3 corners.
inline const std::array<std::vector<MgOffset>, 4>& mg_shells()
{
    static const auto shells = [] {
        std::array<std::vector<MgOffset>, 4> s;
        for (int d3 = -1; d3 <= 1; ++d3)
            for (int d2 = -1; d2 <= 1; ++d2)
                for (int d1 = -1; d1 <= 1; ++d1)
                    s[std::abs(d3) + std::abs(d2) + std::abs(d1)].push_back({d3, d2, d1});
        return s;
    }();
    return shells;
}

template <class F>
class MgSolver {
public:
    using T = typename F::value_type;
    using Acc = fused_accumulator_t<F>;

    MgSolver(const MgProblem& p, bool fused_stencils) : p_(p), fused_(fused_stencils)
    {
        for (int k = 0; k < 4; ++k) {
            a_[k] = F::from_double(p.a[k]);
            c_[k] = F::from_double(p.c[k]);
        }
        zero_ = F::from_double(0.0);
        half_ = F::from_double(0.5);
        quarter_ = F::from_double(0.25);
        eighth_ = F::from_double(0.125);
        sixteenth_ = F::from_double(0.0625);
        u_.resize(p.levels + 1);
        r_.resize(p.levels + 1);
        for (int k = 1; k <= p.levels; ++k) {
            u_[k] = Grid3D<T>((1 << k) + 2, zero_);
            r_[k] = Grid3D<T>((1 << k) + 2, zero_);
        }
        v_ = Grid3D<T>(p.v.m, zero_);
        for (std::size_t i = 0; i < v_.data.size(); ++i) v_.data[i] = F::from_double(p.v.data[i]);
        buf1_.assign(p.v.m, zero_);
        buf2_.assign(p.v.m, zero_);
        buf3_.assign(p.v.m, zero_);
    }

    // r = v - A u on the finest level.
    void residual() { resid(u_[top()], v_, r_[top()]); }

    void vcycle()
    {
        const int lt = top();
        for (int k = lt; k > 1; --k) rprj3(r_[k], r_[k - 1]);
        zero(u_[1]);
        psinv(r_[1], u_[1]);
        for (int k = 2; k < lt; ++k) {
            zero(u_[k]);
            interp(u_[k - 1], u_[k]);
            resid(u_[k], r_[k], r_[k]);
            psinv(r_[k], u_[k]);
        }
        interp(u_[lt - 1], u_[lt]);
        resid(u_[lt], v_, r_[lt]);
        psinv(r_[lt], u_[lt]);
    }

    // Sum of squares of the finest residual over interior points.
    T residual_sum_of_squares() const
    {
        const Grid3D<T>& r = r_[top()];
        Acc acc;
        for (int i3 = 1; i3 < r.m - 1; ++i3)
            for (int i2 = 1; i2 < r.m - 1; ++i2)
                for (int i1 = 1; i1 < r.m - 1; ++i1) acc.add_product(r(i3, i2, i1), r(i3, i2, i1));
        return acc.result();
    }

    const Grid3D<T>& solution() const { return u_[top()]; }

    void zero(Grid3D<T>& g) const { std::fill(g.data.begin(), g.data.end(), zero_); }

    // r = v - A u (r may alias v).
    void resid(const Grid3D<T>& u, const Grid3D<T>& v, Grid3D<T>& r)
    {
        const int m = u.m;
        if (fused_) {
            const auto& sh = mg_shells();
            const T na0 = -a_[0], na2 = -a_[2], na3 = -a_[3];
            Acc acc;
            for (int i3 = 1; i3 < m - 1; ++i3)
                for (int i2 = 1; i2 < m - 1; ++i2)
                    for (int i1 = 1; i1 < m - 1; ++i1) {
                        acc.clear();
                        acc.add(v(i3, i2, i1));
                        acc.add_product(na0, u(i3, i2, i1));
                        for (auto o : sh[2]) acc.add_product(na2, u(i3 + o.d3, i2 + o.d2, i1 + o.d1));
                        for (auto o : sh[3]) acc.add_product(na3, u(i3 + o.d3, i2 + o.d2, i1 + o.d1));
                        r(i3, i2, i1) = acc.result();
                    }
        } else {
            auto& u1 = buf1_;
            auto& u2 = buf2_;
            for (int i3 = 1; i3 < m - 1; ++i3)
                for (int i2 = 1; i2 < m - 1; ++i2) {
                    for (int i1 = 0; i1 < m; ++i1) {
                        u1[i1] = u(i3, i2 - 1, i1) + u(i3, i2 + 1, i1) + u(i3 - 1, i2, i1) +
                                 u(i3 + 1, i2, i1);
                        u2[i1] = u(i3 - 1, i2 - 1, i1) + u(i3 - 1, i2 + 1, i1) +
                                 u(i3 + 1, i2 - 1, i1) + u(i3 + 1, i2 + 1, i1);
                    }
                    for (int i1 = 1; i1 < m - 1; ++i1)
                        r(i3, i2, i1) = v(i3, i2, i1) - a_[0] * u(i3, i2, i1) -
                                        a_[2] * (u2[i1] + u1[i1 - 1] + u1[i1 + 1]) -
                                        a_[3] * (u2[i1 - 1] + u2[i1 + 1]);
                }
        }
        mg_comm3(r);
    }

    void psinv(const Grid3D<T>& r, Grid3D<T>& u)
    {
        const int m = u.m;
        if (fused_) {
            const auto& sh = mg_shells();
            Acc acc;
            for (int i3 = 1; i3 < m - 1; ++i3)
                for (int i2 = 1; i2 < m - 1; ++i2)
                    for (int i1 = 1; i1 < m - 1; ++i1) {
                        acc.clear();
                        acc.add(u(i3, i2, i1));
                        acc.add_product(c_[0], r(i3, i2, i1));
                        for (auto o : sh[1]) acc.add_product(c_[1], r(i3 + o.d3, i2 + o.d2, i1 + o.d1));
                        for (auto o : sh[2]) acc.add_product(c_[2], r(i3 + o.d3, i2 + o.d2, i1 + o.d1));
                        u(i3, i2, i1) = acc.result();
                    }
        } else {
            auto& r1 = buf1_;
            auto& r2 = buf2_;
            for (int i3 = 1; i3 < m - 1; ++i3)
                for (int i2 = 1; i2 < m - 1; ++i2) {
                    for (int i1 = 0; i1 < m; ++i1) {
                        r1[i1] = r(i3, i2 - 1, i1) + r(i3, i2 + 1, i1) + r(i3 - 1, i2, i1) +
                                 r(i3 + 1, i2, i1);
                        r2[i1] = r(i3 - 1, i2 - 1, i1) + r(i3 - 1, i2 + 1, i1) +
                                 r(i3 + 1, i2 - 1, i1) + r(i3 + 1, i2 + 1, i1);
                    }
                    for (int i1 = 1; i1 < m - 1; ++i1)
                        u(i3, i2, i1) = u(i3, i2, i1) + c_[0] * r(i3, i2, i1) +
                                        c_[1] * (r(i3, i2, i1 - 1) + r(i3, i2, i1 + 1) + r1[i1]) +
                                        c_[2] * (r2[i1] + r1[i1 - 1] + r1[i1 + 1]);
                }
        }
        mg_comm3(u);
    }

    // Full-weighting restriction from fine r to coarse s.
    void rprj3(const Grid3D<T>& r, Grid3D<T>& s)
    {
        const int mj = s.m;
        if (fused_) {
            const auto& sh = mg_shells();
            const std::array<T, 4> w{half_, quarter_, eighth_, sixteenth_};
            Acc acc;
            for (int j3 = 1; j3 < mj - 1; ++j3)
                for (int j2 = 1; j2 < mj - 1; ++j2)
                    for (int j1 = 1; j1 < mj - 1; ++j1) {
                        const int c3 = 2 * j3, c2 = 2 * j2, c1 = 2 * j1;
                        acc.clear();
                        for (int shell = 0; shell < 4; ++shell)
                            for (auto o : sh[shell])
                                acc.add_product(w[shell], r(c3 + o.d3, c2 + o.d2, c1 + o.d1));
                        s(j3, j2, j1) = acc.result();
                    }
        } else {
            auto& x1 = buf1_;
            auto& y1 = buf2_;
            for (int j3 = 1; j3 < mj - 1; ++j3) {
                const int i3 = 2 * j3 - 1;
                for (int j2 = 1; j2 < mj - 1; ++j2) {
                    const int i2 = 2 * j2 - 1;
                    for (int j1 = 1; j1 < mj; ++j1) {
                        const int i1 = 2 * j1 - 1;
                        x1[i1] = r(i3 + 1, i2, i1) + r(i3 + 1, i2 + 2, i1) + r(i3, i2 + 1, i1) +
                                 r(i3 + 2, i2 + 1, i1);
                        y1[i1] = r(i3, i2, i1) + r(i3 + 2, i2, i1) + r(i3, i2 + 2, i1) +
                                 r(i3 + 2, i2 + 2, i1);
                    }
                    for (int j1 = 1; j1 < mj - 1; ++j1) {
                        const int i1 = 2 * j1 - 1;
                        const T y2 = r(i3, i2, i1 + 1) + r(i3 + 2, i2, i1 + 1) +
                                     r(i3, i2 + 2, i1 + 1) + r(i3 + 2, i2 + 2, i1 + 1);
                        const T x2 = r(i3 + 1, i2, i1 + 1) + r(i3 + 1, i2 + 2, i1 + 1) +
                                     r(i3, i2 + 1, i1 + 1) + r(i3 + 2, i2 + 1, i1 + 1);
                        s(j3, j2, j1) =
                            half_ * r(i3 + 1, i2 + 1, i1 + 1) +
                            quarter_ * (r(i3 + 1, i2 + 1, i1) + r(i3 + 1, i2 + 1, i1 + 2) + x2) +
                            eighth_ * (x1[i1] + x1[i1 + 2] + y2) +
                            sixteenth_ * (y1[i1] + y1[i1 + 2]);
                    }
                }
            }
        }
        mg_comm3(s);
    }

    // Trilinear prolongation of coarse z added into fine u.
    void interp(const Grid3D<T>& z, Grid3D<T>& u)
    {
        const int mm = z.m;
        if (fused_) {
            const std::array<T, 4> w{F::from_double(1.0), half_, quarter_, eighth_};
            Acc acc;
            for (int i3 = 0; i3 < mm - 1; ++i3)
                for (int i2 = 0; i2 < mm - 1; ++i2)
                    for (int i1 = 0; i1 < mm - 1; ++i1)
                        for (int b = 0; b < 8; ++b) {
                            const int b3 = b >> 2, b2 = (b >> 1) & 1, b1 = b & 1;
                            T& target = u(2 * i3 + b3, 2 * i2 + b2, 2 * i1 + b1);
                            const T weight = w[b3 + b2 + b1];
                            acc.clear();
                            acc.add(target);
                            for (int e3 = 0; e3 <= b3; ++e3)
                                for (int e2 = 0; e2 <= b2; ++e2)
                                    for (int e1 = 0; e1 <= b1; ++e1)
                                        acc.add_product(weight, z(i3 + e3, i2 + e2, i1 + e1));
                            target = acc.result();
                        }
            return;
        }
        auto& z1 = buf1_;
        auto& z2 = buf2_;
        auto& z3 = buf3_;
        for (int i3 = 0; i3 < mm - 1; ++i3)
            for (int i2 = 0; i2 < mm - 1; ++i2) {
                for (int i1 = 0; i1 < mm; ++i1) {
                    z1[i1] = z(i3, i2 + 1, i1) + z(i3, i2, i1);
                    z2[i1] = z(i3 + 1, i2, i1) + z(i3, i2, i1);
                    z3[i1] = z(i3 + 1, i2 + 1, i1) + z(i3 + 1, i2, i1) + z1[i1];
                }
                for (int i1 = 0; i1 < mm - 1; ++i1) {
                    u(2 * i3, 2 * i2, 2 * i1) = u(2 * i3, 2 * i2, 2 * i1) + z(i3, i2, i1);
                    u(2 * i3, 2 * i2, 2 * i1 + 1) =
                        u(2 * i3, 2 * i2, 2 * i1 + 1) + half_ * (z(i3, i2, i1 + 1) + z(i3, i2, i1));
                }
                for (int i1 = 0; i1 < mm - 1; ++i1) {
                    u(2 * i3, 2 * i2 + 1, 2 * i1) = u(2 * i3, 2 * i2 + 1, 2 * i1) + half_ * z1[i1];
                    u(2 * i3, 2 * i2 + 1, 2 * i1 + 1) =
                        u(2 * i3, 2 * i2 + 1, 2 * i1 + 1) + quarter_ * (z1[i1] + z1[i1 + 1]);
                }
                for (int i1 = 0; i1 < mm - 1; ++i1) {
                    u(2 * i3 + 1, 2 * i2, 2 * i1) = u(2 * i3 + 1, 2 * i2, 2 * i1) + half_ * z2[i1];
                    u(2 * i3 + 1, 2 * i2, 2 * i1 + 1) =
                        u(2 * i3 + 1, 2 * i2, 2 * i1 + 1) + quarter_ * (z2[i1] + z2[i1 + 1]);
                }
                for (int i1 = 0; i1 < mm - 1; ++i1) {
                    u(2 * i3 + 1, 2 * i2 + 1, 2 * i1) =
                        u(2 * i3 + 1, 2 * i2 + 1, 2 * i1) + quarter_ * z3[i1];
                    u(2 * i3 + 1, 2 * i2 + 1, 2 * i1 + 1) =
                        u(2 * i3 + 1, 2 * i2 + 1, 2 * i1 + 1) + eighth_ * (z3[i1] + z3[i1 + 1]);
                }
            }
    }

private:
    int top() const { return p_.levels; }

    const MgProblem& p_;
    bool fused_;
    std::array<T, 4> a_{}, c_{};
    T zero_{}, half_{}, quarter_{}, eighth_{}, sixteenth_{};
    std::vector<Grid3D<T>> u_, r_;
    Grid3D<T> v_;
    std::vector<T> buf1_, buf2_, buf3_;
};

}  // namespace detail

/// V-cycle multigrid for the periodic Poisson problem in format F.
///
/// Metrics per iteration (0 = initial residual): residual_l2 = ||r||_2 and
/// residual_rms = ||r||_2 / sqrt(n^3), the NPB normalization. Both are
/// computed in F from the in-format sum of squares.
template <class F>
KernelRun mg_run(const MgProblem& prob, const MgOptions& opt = {})
{
    using T = typename F::value_type;
    KernelRun run;
    run.kernel = "mg";
    run.problem_class = prob.problem_class;
    run.format = std::string(F::name);

    const int iterations = opt.iterations > 0 ? opt.iterations : prob.iterations;
    detail::MgSolver<F> solver(prob, F::fused && opt.quire_scope == QuireScope::all);
    const T points = F::from_double(static_cast<double>(prob.n) * prob.n * prob.n);

    auto log_norms = [&](int it) {
        const T s = solver.residual_sum_of_squares();
        if (!F::is_finite(s)) {
            run.mark_diverged(it);
            return false;
        }
        run.log(it, "residual_l2", F::to_double(F::sqrt(s)));
        run.log(it, "residual_rms", F::to_double(F::sqrt(s / points)));
        return true;
    };

    solver.residual();
    if (!log_norms(0)) return run;
    for (int it = 1; it <= iterations; ++it) {
        solver.vcycle();
        solver.residual();
        if (!log_norms(it)) break;
    }
    return run;
}

}  // namespace positnpb
