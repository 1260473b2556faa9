#pragma once

#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "upbtiles/builtins.hpp"
#include "upbtiles/complement.hpp"

namespace upbtiles {

// The uniform mixture over the orthocomplement of a state set.  Entries stay
// exact; the float embedding exists only so eigenvalues can be computed.
struct DensityMatrix {
    std::vector<int> dims;
    CycMat mat;         // Hermitian, trace 1
    long set_size = 0;  // |S|; mat * (D - |S|) is the complement projector

    long dimension() const { return mat.rows; }

    Eigen::MatrixXcd embed() const {
        Eigen::MatrixXcd out(mat.rows, mat.cols);
        for (long i = 0; i < mat.rows; ++i)
            for (long j = 0; j < mat.cols; ++j) out(i, j) = mat.at(i, j).to_complex();
        return out;
    }
};

// (I - sum of projectors onto the members) / (D - |S|).  Members are
// normalized here and nowhere else; an empty set gives the maximally mixed
// state.
inline DensityMatrix rho_bar(const OPSet& s) {
    long D = 1;
    for (int d : s.dims) D *= d;
    const long n = static_cast<long>(s.states.size());
    if (n >= D)
        throw degenerate_input_error("the set leaves no complement to mix over");

    std::vector<CycVec> fulls;
    long L = 1;
    for (const auto& ps : s.states) {
        fulls.push_back(full_vector(ps, s.dims));
        L = lcm_long(L, fulls.back()[0].order());
    }
    const CycField& F = CycField::get(L);
    for (auto& v : fulls)
        for (auto& x : v) x = x.promote(F);
    for (std::size_t i = 0; i < fulls.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (!inner_product(fulls[i], fulls[j]).is_zero())
                throw degenerate_input_error("members must be mutually orthogonal");

    CycMat p(D, D, F);
    for (const auto& v : fulls) {
        const Cyc inv_norm = Cyc::one(F) / inner_product(v, v);
        for (long i = 0; i < D; ++i) {
            if (v[i].is_zero()) continue;
            for (long j = 0; j < D; ++j) {
                if (v[j].is_zero()) continue;
                p.at(i, j) += v[i] * v[j].conj() * inv_norm;
            }
        }
    }

    DensityMatrix rho;
    rho.dims = s.dims;
    rho.set_size = n;
    rho.mat = CycMat(D, D, F);
    const Cyc scale = Cyc::from_rat(F, Rat(1, D - n));
    for (long i = 0; i < D; ++i)
        for (long j = 0; j < D; ++j) {
            Cyc e = -p.at(i, j);
            if (i == j) e += Cyc::one(F);
            rho.mat.at(i, j) = e * scale;
        }
    return rho;
}

inline DensityMatrix rho_bar(const SDescription& sd) { return rho_bar(realize(sd)); }

// Transpose over the side_d subsystem: out[(a,b),(a',b')] = in[(a,b'),(a',b)].
inline CycMat partial_transpose(const CycMat& rho, const std::vector<int>& dims,
                                const Bipartition& bp) {
    long D = 1;
    for (int d : dims) D *= d;
    if (rho.rows != D || rho.cols != D)
        throw dimension_mismatch_error("matrix shape disagrees with the party dimensions");
    TileStructure shape;
    shape.dims = dims;
    check_bipartition(shape, bp);

    const long h2 = side_dimension(dims, bp.side_d);
    std::vector<long> rc(D), rd(D), cell(D);
    for (long g = 0; g < D; ++g) {
        std::vector<int> co = cell_coords(dims, g);
        rc[g] = flat_index(dims, bp.side_c, co);
        rd[g] = flat_index(dims, bp.side_d, co);
        cell[rc[g] * h2 + rd[g]] = g;
    }

    CycMat out(D, D, rho.a[0].field());
    for (long i = 0; i < D; ++i)
        for (long j = 0; j < D; ++j)
            out.at(i, j) = rho.at(cell[rc[i] * h2 + rd[j]], cell[rc[j] * h2 + rd[i]]);
    return out;
}

inline CycMat partial_transpose(const DensityMatrix& rho, const Bipartition& bp) {
    return partial_transpose(rho.mat, rho.dims, bp);
}

// Minimum eigenvalue of the partial transpose across bp, computed on the
// float embedding.  This is the only floating-point computation anywhere in
// the library.
inline double ppt_check(const DensityMatrix& rho, const Bipartition& bp) {
    CycMat pt = partial_transpose(rho.mat, rho.dims, bp);
    Eigen::MatrixXcd a(pt.rows, pt.cols);
    for (long i = 0; i < pt.rows; ++i)
        for (long j = 0; j < pt.cols; ++j) a(i, j) = pt.at(i, j).to_complex();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

struct PPTEntry {
    Bipartition bp;
    double min_eigenvalue = 0.0;
    bool pass = false;  // min_eigenvalue >= -tol
};

// One entry per bipartition, side_c in lexicographic order.
struct PPTReport {
    std::vector<PPTEntry> entries;
    double tol = 1e-9;
    double min_eigenvalue = 0.0;  // minimum over all entries
    bool all_pass = false;
};

inline PPTReport ppt_report(const DensityMatrix& rho, double tol = 1e-9) {
    PPTReport rep;
    rep.tol = tol;
    rep.all_pass = true;
    rep.min_eigenvalue = std::numeric_limits<double>::infinity();
    for (const auto& bp : all_bipartitions(static_cast<long>(rho.dims.size()))) {
        PPTEntry e;
        e.bp = bp;
        e.min_eigenvalue = ppt_check(rho, bp);
        e.pass = e.min_eigenvalue >= -tol;
        if (e.min_eigenvalue < rep.min_eigenvalue) rep.min_eigenvalue = e.min_eigenvalue;
        if (!e.pass) rep.all_pass = false;
        rep.entries.push_back(std::move(e));
    }
    return rep;
}

// Range criterion: rho_bar's range is the complement of S, so if the product
// states inside the complement provably fail to span it in some cut, no
// separable decomposition exists there and rho_bar is entangled.  A UPB has
// no product state in its complement at all, which settles every cut at once.
inline bool entangled_via_range(const SDescription& sd) {
    ComplementModel m = complement_model(sd);
    if (is_upb(m, AnalysisMode::multi()).verdict == Verdict::UPB) return true;
    bool undecided = false;
    for (const auto& bp : all_bipartitions(m.sd.ts.party_count())) {
        Certificate c = sucpb_certify(m, bp);
        if (c.verdict == Verdict::SUCPB) return true;
        if (!c.exact) undecided = true;
    }
    if (undecided)
        throw inconclusive_error("product span could not be bounded in some bipartition");
    return false;
}

// The w-333 set is a three-party UPB, yet across AB|C it extends to a full
// orthogonal product basis: the four extension states are psi_k tensor |0>_C
// with {psi_k} an orthogonal basis of the complement of the tiles-3x3 set in
// the nine-dimensional AB space.  Verifies all 27 vectors pairwise orthogonal
// and each of rank one across AB|C.
inline bool verify_w_completion() {
    const OPSet ab = realize(builtin("tiles-3x3").sdesc);
    long L = 1;
    std::vector<CycVec> rows;
    for (const auto& ps : ab.states) {
        rows.push_back(full_vector(ps, ab.dims));
        L = lcm_long(L, rows.back()[0].order());
    }
    const CycField& Fab = CycField::get(L);
    for (auto& r : rows)
        for (auto& x : r) x = x.promote(Fab).conj();
    std::vector<CycVec> psi = gram_schmidt(kernel_basis(CycMat::from_rows(rows)));
    if (psi.size() != 4) return false;

    const OPSet w = realize(builtin("w-333").sdesc);
    const std::vector<int> dims = w.dims;
    long D = 1;
    for (int d : dims) D *= d;

    std::vector<CycVec> all;
    long Lall = L;
    for (const auto& ps : w.states) {
        all.push_back(full_vector(ps, dims));
        Lall = lcm_long(Lall, all.back()[0].order());
    }
    const CycField& F = CycField::get(Lall);
    for (const auto& p : psi) {
        CycVec v(D, Cyc::zero(F));
        for (long ab_idx = 0; ab_idx < 9; ++ab_idx) v[ab_idx * 3] = p[ab_idx].promote(F);
        all.push_back(std::move(v));
    }
    for (auto& v : all)
        for (auto& x : v) x = x.promote(F);
    if (static_cast<long>(all.size()) != D) return false;

    for (std::size_t i = 0; i < all.size(); ++i) {
        if (is_zero_vec(all[i])) return false;
        for (std::size_t j = 0; j < i; ++j)
            if (!inner_product(all[i], all[j]).is_zero()) return false;
    }

    const Bipartition ab_c{{0, 1}, {2}};
    for (const auto& v : all)
        if (rank(flatten_vector(v, dims, ab_c)) != 1) return false;
    return true;
}

}  // namespace upbtiles
