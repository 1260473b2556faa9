#pragma once

#include <gmpxx.h>

#include <cstdlib>
#include <utility>
#include <vector>

#include "upbtiles/errors.hpp"
#include "upbtiles/rational.hpp"

namespace upbtiles {

struct IntMat {
    long rows = 0, cols = 0;
    std::vector<Int> a;

    IntMat() = default;
    IntMat(long r, long c) : rows(r), cols(c), a(r * c, Int(0)) {}

    Int& at(long r, long c) { return a[r * cols + c]; }
    const Int& at(long r, long c) const { return a[r * cols + c]; }

    static IntMat identity(long n) {
        IntMat m(n, n);
        for (long i = 0; i < n; ++i) m.at(i, i) = 1;
        return m;
    }
};

inline IntMat int_matmul(const IntMat& x, const IntMat& y) {
    if (x.cols != y.rows) throw dimension_mismatch_error("integer matmul shape mismatch");
    IntMat r(x.rows, y.cols);
    for (long i = 0; i < x.rows; ++i)
        for (long k = 0; k < x.cols; ++k) {
            if (x.at(i, k) == 0) continue;
            for (long j = 0; j < y.cols; ++j) r.at(i, j) += x.at(i, k) * y.at(k, j);
        }
    return r;
}

// U*A*V = D with U, V unimodular and D diagonal, nonnegative, each entry
// dividing the next.  Vinv is maintained alongside V so callers can read
// rows of V^{-1} without a separate inversion.
struct SmithResult {
    IntMat D, U, V, Vinv;
    long rank = 0;
    std::vector<Int> invariant_factors;  // the nonzero diagonal entries
};

inline SmithResult smith_normal_form(IntMat A) {
    const long n = A.rows, m = A.cols;
    SmithResult out;
    out.U = IntMat::identity(n);
    out.V = IntMat::identity(m);
    out.Vinv = IntMat::identity(m);

    auto row_swap = [&](long i, long j) {
        if (i == j) return;
        for (long c = 0; c < m; ++c) std::swap(A.at(i, c), A.at(j, c));
        for (long c = 0; c < n; ++c) std::swap(out.U.at(i, c), out.U.at(j, c));
    };
    auto row_axpy = [&](long i, long j, const Int& q) {
        // row_i -= q * row_j
        if (q == 0) return;
        for (long c = 0; c < m; ++c) A.at(i, c) -= q * A.at(j, c);
        for (long c = 0; c < n; ++c) out.U.at(i, c) -= q * out.U.at(j, c);
    };
    auto row_negate = [&](long i) {
        for (long c = 0; c < m; ++c) A.at(i, c) = -A.at(i, c);
        for (long c = 0; c < n; ++c) out.U.at(i, c) = -out.U.at(i, c);
    };
    auto col_swap = [&](long i, long j) {
        if (i == j) return;
        for (long r = 0; r < n; ++r) std::swap(A.at(r, i), A.at(r, j));
        for (long r = 0; r < m; ++r) std::swap(out.V.at(r, i), out.V.at(r, j));
        for (long c = 0; c < m; ++c) std::swap(out.Vinv.at(i, c), out.Vinv.at(j, c));
    };
    auto col_axpy = [&](long i, long j, const Int& q) {
        // col_i -= q * col_j, so Vinv gets row_j += q * row_i.
        if (q == 0) return;
        for (long r = 0; r < n; ++r) A.at(r, i) -= q * A.at(r, j);
        for (long r = 0; r < m; ++r) out.V.at(r, i) -= q * out.V.at(r, j);
        for (long c = 0; c < m; ++c) out.Vinv.at(j, c) += q * out.Vinv.at(i, c);
    };

    long t = 0;
    while (t < n && t < m) {
        // Smallest nonzero entry of the trailing submatrix becomes the pivot.
        long pr = -1, pc = -1;
        for (long i = t; i < n; ++i)
            for (long j = t; j < m; ++j) {
                if (A.at(i, j) == 0) continue;
                if (pr < 0 || cmp(abs(A.at(i, j)), abs(A.at(pr, pc))) < 0) {
                    pr = i;
                    pc = j;
                }
            }
        if (pr < 0) break;
        row_swap(t, pr);
        col_swap(t, pc);

        bool settled = false;
        while (!settled) {
            settled = true;
            for (long i = t + 1; i < n; ++i) {
                if (A.at(i, t) == 0) continue;
                Int q;
                mpz_tdiv_q(q.get_mpz_t(), A.at(i, t).get_mpz_t(), A.at(t, t).get_mpz_t());
                row_axpy(i, t, q);
                if (A.at(i, t) != 0) {
                    row_swap(t, i);  // strictly smaller remainder becomes pivot
                    settled = false;
                }
            }
            for (long j = t + 1; j < m; ++j) {
                if (A.at(t, j) == 0) continue;
                Int q;
                mpz_tdiv_q(q.get_mpz_t(), A.at(t, j).get_mpz_t(), A.at(t, t).get_mpz_t());
                col_axpy(j, t, q);
                if (A.at(t, j) != 0) {
                    col_swap(t, j);
                    settled = false;
                }
            }
        }

        // Fold in any entry the pivot does not divide, then redo this step.
        bool redo = false;
        for (long i = t + 1; i < n && !redo; ++i)
            for (long j = t + 1; j < m && !redo; ++j)
                if (A.at(i, j) % A.at(t, t) != 0) {
                    row_axpy(t, i, Int(-1));
                    redo = true;
                }
        if (redo) continue;
        if (A.at(t, t) < 0) row_negate(t);
        ++t;
    }

    out.rank = t;
    for (long i = 0; i < t; ++i) out.invariant_factors.push_back(A.at(i, i));
    out.D = std::move(A);
    return out;
}

// A generator of one finite cyclic factor of the solution group of
// {a^row = 1 : row of E}: the assignment a_i = w^exponents[i] with w any
// primitive root of unity of order `factor`.  E V e_i = d_i U^{-1} e_i
// vanishes mod d_i, so column i of V works as the exponent vector.
struct TorsionGen {
    Int factor;
    std::vector<Int> exponents;
};

// Kernel lattice and torsion data of {x : E x = 0} and its root-of-unity
// relaxations.  `basis` spans the integer kernel (a saturated lattice, since
// it comes from unimodular columns); `torsion` lists the invariant factors
// > 1 with the matching columns of V.
struct LatticeKernel {
    long rank = 0;
    std::vector<std::vector<Int>> basis;
    std::vector<TorsionGen> torsion;
};

inline LatticeKernel integer_lattice_kernel(const IntMat& E) {
    LatticeKernel out;
    if (E.rows == 0) {
        out.rank = 0;
        for (long j = 0; j < E.cols; ++j) {
            std::vector<Int> e(E.cols, Int(0));
            e[j] = 1;
            out.basis.push_back(std::move(e));
        }
        return out;
    }
    SmithResult s = smith_normal_form(E);
    out.rank = s.rank;
    for (long j = s.rank; j < E.cols; ++j) {
        std::vector<Int> v(E.cols);
        for (long i = 0; i < E.cols; ++i) v[i] = s.V.at(i, j);
        out.basis.push_back(std::move(v));
    }
    for (long i = 0; i < s.rank; ++i) {
        if (s.invariant_factors[i] <= 1) continue;
        TorsionGen g;
        g.factor = s.invariant_factors[i];
        g.exponents.resize(E.cols);
        for (long r = 0; r < E.cols; ++r) g.exponents[r] = s.V.at(r, i);
        out.torsion.push_back(std::move(g));
    }
    return out;
}

}  // namespace upbtiles
