#pragma once

#include <utility>
#include <vector>

#include "upbtiles/cyclotomic.hpp"

namespace upbtiles {

using CycVec = std::vector<Cyc>;

inline bool is_zero_vec(const CycVec& v) {
    for (const auto& x : v)
        if (!x.is_zero()) return false;
    return true;
}

// Hermitian inner product, conjugate-linear in the first argument.
inline Cyc inner_product(const CycVec& u, const CycVec& v) {
    if (u.size() != v.size()) throw dimension_mismatch_error("inner product length mismatch");
    if (u.empty()) throw dimension_mismatch_error("inner product of empty vectors");
    Cyc acc = Cyc::zero(u[0].field());
    for (std::size_t i = 0; i < u.size(); ++i) acc += u[i].conj() * v[i];
    return acc;
}

inline CycVec scaled(const Cyc& s, const CycVec& v) {
    CycVec r = v;
    for (auto& x : r) x *= s;
    return r;
}

inline CycVec vec_sub(const CycVec& a, const CycVec& b) {
    if (a.size() != b.size()) throw dimension_mismatch_error("vector length mismatch");
    CycVec r = a;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
    return r;
}

struct CycMat {
    long rows = 0, cols = 0;
    std::vector<Cyc> a;

    CycMat() = default;
    CycMat(long r, long c, const CycField& F) : rows(r), cols(c), a(r * c, Cyc::zero(F)) {}

    Cyc& at(long r, long c) { return a[r * cols + c]; }
    const Cyc& at(long r, long c) const { return a[r * cols + c]; }

    static CycMat identity(long n, const CycField& F) {
        CycMat m(n, n, F);
        for (long i = 0; i < n; ++i) m.at(i, i) = Cyc::one(F);
        return m;
    }

    static CycMat from_rows(const std::vector<CycVec>& rows_in) {
        if (rows_in.empty()) throw dimension_mismatch_error("matrix needs at least one row");
        CycMat m(static_cast<long>(rows_in.size()), static_cast<long>(rows_in[0].size()),
                 rows_in[0][0].field());
        for (long r = 0; r < m.rows; ++r) {
            if (static_cast<long>(rows_in[r].size()) != m.cols)
                throw dimension_mismatch_error("ragged rows");
            for (long c = 0; c < m.cols; ++c) m.at(r, c) = rows_in[r][c];
        }
        return m;
    }

    CycVec row(long r) const { return CycVec(a.begin() + r * cols, a.begin() + (r + 1) * cols); }
};

inline Cyc trace(const CycMat& m) {
    if (m.rows != m.cols) throw dimension_mismatch_error("trace of a non-square matrix");
    Cyc t = Cyc::zero(m.a.empty() ? CycField::get(1) : m.a[0].field());
    for (long i = 0; i < m.rows; ++i) t += m.at(i, i);
    return t;
}

inline CycMat matmul(const CycMat& x, const CycMat& y) {
    if (x.cols != y.rows) throw dimension_mismatch_error("matmul shape mismatch");
    const CycField& F = x.a.empty() ? y.a[0].field() : x.a[0].field();
    CycMat r(x.rows, y.cols, F);
    for (long i = 0; i < x.rows; ++i)
        for (long k = 0; k < x.cols; ++k) {
            if (x.at(i, k).is_zero()) continue;
            for (long j = 0; j < y.cols; ++j) {
                if (y.at(k, j).is_zero()) continue;
                r.at(i, j) += x.at(i, k) * y.at(k, j);
            }
        }
    return r;
}

inline CycMat adjoint(const CycMat& m) {
    CycMat r(m.cols, m.rows, m.a.empty() ? CycField::get(1) : m.a[0].field());
    for (long i = 0; i < m.rows; ++i)
        for (long j = 0; j < m.cols; ++j) r.at(j, i) = m.at(i, j).conj();
    return r;
}

inline CycVec mat_vec(const CycMat& m, const CycVec& v) {
    if (m.cols != static_cast<long>(v.size()))
        throw dimension_mismatch_error("matrix-vector shape mismatch");
    CycVec r(m.rows, Cyc::zero(m.a[0].field()));
    for (long i = 0; i < m.rows; ++i)
        for (long j = 0; j < m.cols; ++j)
            if (!m.at(i, j).is_zero() && !v[j].is_zero()) r[i] += m.at(i, j) * v[j];
    return r;
}

struct Rref {
    CycMat mat;
    std::vector<long> pivots;  // pivot column per pivot row
    long rank = 0;
};

// Gauss-Jordan over the exact field; no pivoting heuristics are needed.
inline Rref rref(CycMat m) {
    Rref out;
    long r = 0;
    for (long c = 0; c < m.cols && r < m.rows; ++c) {
        long p = -1;
        for (long i = r; i < m.rows; ++i)
            if (!m.at(i, c).is_zero()) {
                p = i;
                break;
            }
        if (p < 0) continue;
        if (p != r)
            for (long j = 0; j < m.cols; ++j) std::swap(m.at(p, j), m.at(r, j));
        Cyc inv = m.at(r, c).inverse();
        for (long j = c; j < m.cols; ++j) m.at(r, j) *= inv;
        for (long i = 0; i < m.rows; ++i) {
            if (i == r || m.at(i, c).is_zero()) continue;
            Cyc f = m.at(i, c);
            for (long j = c; j < m.cols; ++j) m.at(i, j) -= f * m.at(r, j);
        }
        out.pivots.push_back(c);
        ++r;
    }
    out.rank = r;
    out.mat = std::move(m);
    return out;
}

inline long rank(const CycMat& m) { return rref(m).rank; }

// Basis of the right null space {x : m x = 0}; one vector per free column.
inline std::vector<CycVec> kernel_basis(const CycMat& m) {
    const CycField& F = m.a.empty() ? CycField::get(1) : m.a[0].field();
    Rref rr = rref(m);
    std::vector<bool> is_pivot(m.cols, false);
    for (long c : rr.pivots) is_pivot[c] = true;
    std::vector<CycVec> basis;
    for (long f = 0; f < m.cols; ++f) {
        if (is_pivot[f]) continue;
        CycVec x(m.cols, Cyc::zero(F));
        x[f] = Cyc::one(F);
        for (long r = 0; r < rr.rank; ++r) x[rr.pivots[r]] = -rr.mat.at(r, f);
        basis.push_back(std::move(x));
    }
    return basis;
}

// Classical orthogonalization; dependent inputs are dropped, so the output
// size equals the dimension of the span.  Vectors are not normalized.
inline std::vector<CycVec> gram_schmidt(const std::vector<CycVec>& vs) {
    std::vector<CycVec> out;
    std::vector<Cyc> norms;
    for (const auto& v : vs) {
        CycVec w = v;
        for (std::size_t i = 0; i < out.size(); ++i) {
            Cyc coef = inner_product(out[i], w) / norms[i];
            if (!coef.is_zero()) w = vec_sub(w, scaled(coef, out[i]));
        }
        if (!is_zero_vec(w)) {
            norms.push_back(inner_product(w, w));
            out.push_back(std::move(w));
        }
    }
    return out;
}

}  // namespace upbtiles
