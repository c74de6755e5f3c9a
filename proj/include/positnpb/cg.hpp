#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "positnpb/formats.hpp"
#include "positnpb/kernel_run.hpp"
#include "positnpb/npb_rng.hpp"

namespace positnpb {

struct CgClassParams {
    int na;
    int nonzer;
    double shift;
    double zeta_reference;
};

inline CgClassParams cg_class_params(ProblemClass c)
{
    switch (c) {
        case ProblemClass::S: return {1400, 7, 10.0, 8.5971775078648};
        case ProblemClass::W: return {7000, 8, 12.0, 10.362595087124};
        case ProblemClass::A: return {14000, 11, 20.0, 17.130235054029};
    }
    throw std::invalid_argument("cg: unknown class");
}

/// Compressed sparse rows, columns sorted within each row.
struct CsrMatrix {
    int rows = 0;
    std::vector<int> row_start;
    std::vector<int> column;
    std::vector<double> value;

    std::size_t nonzeros() const { return column.size(); }
};

struct CgProblem {
    ProblemClass problem_class = ProblemClass::S;
    CgClassParams params{};
    double rcond = 0.1;
    /// zeta_reference applies only to matrices from the NPB default seed.
    bool reference_seed = true;
    CsrMatrix a;
    /// Generating sparse vectors (0-based positions), one per outer product.
    std::vector<std::vector<double>> outer_values;
    std::vector<std::vector<int>> outer_positions;
};

namespace detail {

// Random sparse vector: nz distinct 1-based positions in [1, n] with
// uniform values, drawn as (value, position) pairs.
inline void cg_sprnvc(int n, int nz, int nn1, std::vector<double>& v, std::vector<int>& iv,
                      double& tran, double amult)
{
    v.clear();
    iv.clear();
    while (static_cast<int>(v.size()) < nz) {
        const double vecelt = randlc(tran, amult);
        const double vecloc = randlc(tran, amult);
        const int i = static_cast<int>(nn1 * vecloc) + 1;
        if (i > n) continue;
        bool seen = false;
        for (int k : iv) seen = seen || k == i;
        if (seen) continue;
        v.push_back(vecelt);
        iv.push_back(i);
    }
}

inline void cg_vecset(std::vector<double>& v, std::vector<int>& iv, int i, double val)
{
    for (std::size_t k = 0; k < iv.size(); ++k)
        if (iv[k] == i) {
            v[k] = val;
            return;
        }
    v.push_back(val);
    iv.push_back(i);
}

}  // namespace detail

/// Matrix values assembled with the arithmetic of format F, in CSR order.
/// Each entry is the left-to-right sum of its outer-product contributions,
/// in generation order, as in the NPB reference assembly.
template <class F>
std::vector<typename F::value_type> cg_assemble_values(const CgProblem& p)
{
    using T = typename F::value_type;
    const CsrMatrix& a = p.a;
    const int n = a.rows;
    std::vector<T> out(a.nonzeros(), F::from_double(0.0));
    const T rcond = F::from_double(p.rcond);
    const T shift = F::from_double(p.params.shift);
    const T ratio = F::from_double(std::pow(p.rcond, 1.0 / n));
    T size = F::from_double(1.0);

    auto slot = [&](int row, int col) {
        const auto first = a.column.begin() + a.row_start[row];
        const auto last = a.column.begin() + a.row_start[row + 1];
        return static_cast<std::size_t>(std::lower_bound(first, last, col) - a.column.begin());
    };
    for (int i = 0; i < n; ++i) {
        const auto& v = p.outer_values[i];
        const auto& iv = p.outer_positions[i];
        for (std::size_t nza = 0; nza < iv.size(); ++nza) {
            const int j = iv[nza];
            const T scale = size * F::from_double(v[nza]);
            for (std::size_t nzrow = 0; nzrow < iv.size(); ++nzrow) {
                const int jcol = iv[nzrow];
                T va = F::from_double(v[nzrow]) * scale;
                if (jcol == j && j == i) va = va + rcond - shift;
                T& entry = out[slot(j, jcol)];
                entry = entry + va;
            }
        }
        size = size * ratio;
    }
    return out;
}

/// Builds the NPB CG test matrix: a sum of scaled outer products of random
/// sparse vectors with a geometrically decaying weight, plus
/// (rcond - shift) on the diagonal. The CSR values are assembled in
/// binary64; cg_assemble_values re-runs the assembly in another format.
inline CgProblem cg_make_problem(ProblemClass c, double seed = npb_default_seed)
{
    CgProblem p;
    p.problem_class = c;
    p.params = cg_class_params(c);
    p.reference_seed = seed == npb_default_seed;
    const int n = p.params.na;

    double tran = seed;
    const double amult = npb_multiplier;
    randlc(tran, amult);

    int nn1 = 1;
    while (nn1 < n) nn1 *= 2;

    p.outer_values.resize(n);
    p.outer_positions.resize(n);
    std::vector<std::set<int>> pattern(n);
    for (int i = 0; i < n; ++i) {
        auto& v = p.outer_values[i];
        auto& iv = p.outer_positions[i];
        detail::cg_sprnvc(n, p.params.nonzer, nn1, v, iv, tran, amult);
        detail::cg_vecset(v, iv, i + 1, 0.5);
        for (int& k : iv) --k;
        for (int j : iv) pattern[j].insert(iv.begin(), iv.end());
    }

    p.a.rows = n;
    p.a.row_start.assign(1, 0);
    for (const auto& row : pattern) {
        p.a.column.insert(p.a.column.end(), row.begin(), row.end());
        p.a.row_start.push_back(static_cast<int>(p.a.column.size()));
    }
    p.a.value = cg_assemble_values<DoubleFormat>(p);
    return p;
}

/// Precision of the matrix assembly. `format` reproduces a port where
/// makea runs in the benchmark format; `binary64` casts the reference matrix.
enum class CgAssembly { format, binary64 };

struct CgOptions {
    CgAssembly assembly = CgAssembly::format;
    int outer_iterations = 15;
    int inner_iterations = 25;
    /// dots: quire only in dot products; all: matrix-vector rows as well.
    QuireScope quire_scope = QuireScope::all;
    /// Log ||x - A z|| after every inner iteration (one extra matvec each).
    bool true_residual_each_step = true;
};

namespace detail {

template <class Acc, class T>
void cg_spmv(const CsrMatrix& a, std::span<const T> vals, std::span<const T> in, std::span<T> out)
{
    Acc acc;
    for (int row = 0; row < a.rows; ++row) {
        acc.clear();
        for (int k = a.row_start[row]; k < a.row_start[row + 1]; ++k)
            acc.add_product(vals[k], in[a.column[k]]);
        out[row] = acc.result();
    }
}

}  // namespace detail

/// Runs the CG eigenvalue benchmark in format F.
///
/// Metrics: zeta and zeta_error (default seed only) per outer iteration
/// (1-based); cg_residual
/// (the recurrence sqrt(r.r)) and cg_true_residual per inner iteration,
/// indexed cumulatively from 1; rnorm (||x - A z|| at the end of each solve)
/// per outer iteration.
template <class F>
KernelRun cg_run(const CgProblem& prob, const CgOptions& opt = {})
{
    using T = typename F::value_type;
    using Acc = fused_accumulator_t<F>;

    KernelRun run;
    run.kernel = "cg";
    run.problem_class = prob.problem_class;
    run.format = std::string(F::name);

    const CsrMatrix& a = prob.a;
    const int n = a.rows;
    const std::vector<T> vals = opt.assembly == CgAssembly::format ? cg_assemble_values<F>(prob)
                                                                    : cast_vector<F>(a.value);
    const bool fused_matvec = F::fused && opt.quire_scope == QuireScope::all;

    auto matvec = [&](const std::vector<T>& in, std::vector<T>& out) {
        if (fused_matvec)
            detail::cg_spmv<Acc, T>(a, vals, in, out);
        else
            detail::cg_spmv<plain_accumulator_t<F>, T>(a, vals, in, out);
    };
    auto vdot = [](const std::vector<T>& u, const std::vector<T>& v) {
        return dot<F>(std::span<const T>(u), std::span<const T>(v));
    };
    auto residual_norm = [&](const std::vector<T>& x, const std::vector<T>& z, std::vector<T>& tmp) {
        matvec(z, tmp);
        Acc acc;
        for (int j = 0; j < n; ++j) {
            const T d = x[j] - tmp[j];
            acc.add_product(d, d);
        }
        return F::sqrt(acc.result());
    };

    const T zero = F::from_double(0.0);
    const T one = F::from_double(1.0);
    const T shift = F::from_double(prob.params.shift);
    const DoubleDouble zeta_ref{prob.params.zeta_reference};

    std::vector<T> x(n, one), z(n, zero), r(n), p(n), q(n), tmp(n);
    int step = 0;

    for (int it = 1; it <= opt.outer_iterations; ++it) {
        for (int j = 0; j < n; ++j) {
            q[j] = zero;
            z[j] = zero;
            r[j] = x[j];
            p[j] = r[j];
        }
        T rho = vdot(r, r);
        bool finite = F::is_finite(rho);
        for (int cgit = 1; cgit <= opt.inner_iterations && finite; ++cgit) {
            matvec(p, q);
            const T d = vdot(p, q);
            const T alpha = rho / d;
            const T rho0 = rho;
            for (int j = 0; j < n; ++j) {
                z[j] = z[j] + alpha * p[j];
                r[j] = r[j] - alpha * q[j];
            }
            rho = vdot(r, r);
            const T beta = rho / rho0;
            for (int j = 0; j < n; ++j) p[j] = r[j] + beta * p[j];

            ++step;
            finite = F::is_finite(rho) && F::is_finite(alpha) && F::is_finite(beta);
            run.log(step, "cg_residual", std::sqrt(std::fabs(F::to_double(rho))));
            if (opt.true_residual_each_step)
                run.log(step, "cg_true_residual", F::to_double(residual_norm(x, z, tmp)));
        }
        if (!finite) {
            run.mark_diverged(it);
            break;
        }
        run.log(it, "rnorm", F::to_double(residual_norm(x, z, r)));

        const T norm_temp1 = vdot(x, z);
        const T norm_temp2 = one / F::sqrt(vdot(z, z));
        const T zeta = shift + one / norm_temp1;
        if (!F::is_finite(zeta) || !F::is_finite(norm_temp2)) {
            run.mark_diverged(it);
            break;
        }
        run.log(it, "zeta", F::to_double(zeta));
        if (prob.reference_seed) run.log(it, "zeta_error", abs(F::to_dd(zeta) - zeta_ref).to_double());
        for (int j = 0; j < n; ++j) x[j] = norm_temp2 * z[j];
    }
    return run;
}

}  // namespace positnpb
