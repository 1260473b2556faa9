#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "upbtiles/linalg.hpp"
#include "upbtiles/tiles.hpp"

namespace upbtiles {

// Smallest root-of-unity order containing every coefficient needed by the
// default Fourier matrices of a structure: the lcm of all subset sizes.
inline long common_order(const TileStructure& ts) {
    long L = 1;
    for (const Tile& t : ts.tiles)
        for (const auto& s : t.subsets) L = lcm_long(L, static_cast<long>(s.size()));
    return L;
}

// k x k matrix with entry (a, e) = w_k^{ae}; rows are mutually orthogonal
// and row 0 is all ones.
inline CycMat fourier_matrix(long k, const CycField& F) {
    if (k < 1) throw invalid_order_error("fourier size must be >= 1");
    if (F.order() % k != 0)
        throw invalid_order_error("field order does not contain order-" + std::to_string(k) +
                                  " roots");
    CycMat m(k, k, F);
    for (long a = 0; a < k; ++a)
        for (long e = 0; e < k; ++e) m.at(a, e) = embed_root(k, a * e, F);
    return m;
}

// Per-party overrides of the member-coefficient matrices, keyed by
// (party, subset size); anything not overridden uses the Fourier matrix.
struct CoefficientSpec {
    std::map<std::pair<int, int>, CycMat> overrides;

    long extra_order() const {
        long L = 1;
        for (const auto& [key, m] : overrides)
            if (!m.a.empty()) L = lcm_long(L, m.a[0].order());
        return L;
    }

    CycMat matrix(int party, int size, const CycField& F) const {
        auto it = overrides.find({party, size});
        if (it == overrides.end()) return fourier_matrix(size, F);
        const CycMat& src = it->second;
        if (src.rows != size || src.cols != size)
            throw dimension_mismatch_error("coefficient matrix size disagrees with tile side");
        CycMat m(size, size, F);
        for (long r = 0; r < size; ++r)
            for (long c = 0; c < size; ++c) m.at(r, c) = src.at(r, c).promote(F);
        for (long c = 0; c < size; ++c)
            if (m.at(0, c) != Cyc::one(F))
                throw degenerate_input_error("coefficient matrix row 0 must be all ones");
        for (long r = 0; r < size; ++r)
            for (long r2 = 0; r2 < r; ++r2)
                if (!inner_product(m.row(r), m.row(r2)).is_zero())
                    throw degenerate_input_error("coefficient matrix rows must be orthogonal");
        return m;
    }
};

struct ProductState {
    std::vector<CycVec> factors;
    std::string label;
};

inline void check_state_dims(const ProductState& ps, const std::vector<int>& dims) {
    if (ps.factors.size() != dims.size())
        throw dimension_mismatch_error("product state arity disagrees with party count");
    for (std::size_t j = 0; j < dims.size(); ++j) {
        if (static_cast<int>(ps.factors[j].size()) != dims[j])
            throw dimension_mismatch_error("factor length disagrees with party dimension");
        if (is_zero_vec(ps.factors[j]))
            throw degenerate_input_error("zero factor in product state");
    }
}

inline CycVec full_vector(const ProductState& ps, const std::vector<int>& dims) {
    check_state_dims(ps, dims);
    const CycField& F = ps.factors[0][0].field();
    CycVec out{Cyc::one(F)};
    for (std::size_t j = 0; j < dims.size(); ++j) {
        CycVec next;
        next.reserve(out.size() * ps.factors[j].size());
        for (const Cyc& base : out)
            for (const Cyc& x : ps.factors[j]) next.push_back(base * x);
        out = std::move(next);
    }
    return out;
}

struct OPSet {
    std::vector<int> dims;
    std::vector<ProductState> states;
};

inline bool verify_orthogonality(const OPSet& s) {
    std::vector<CycVec> fulls;
    for (const auto& ps : s.states) fulls.push_back(full_vector(ps, s.dims));
    for (std::size_t i = 0; i < fulls.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (!inner_product(fulls[i], fulls[j]).is_zero()) return false;
    return true;
}

// Rows are the full vectors of each state, promoted into F.
inline CycMat span_matrix(const OPSet& s, const CycField& F) {
    if (s.states.empty()) throw degenerate_input_error("span of empty state set");
    long D = 1;
    for (int d : s.dims) D *= d;
    CycMat m(static_cast<long>(s.states.size()), D, F);
    for (std::size_t i = 0; i < s.states.size(); ++i) {
        CycVec v = full_vector(s.states[i], s.dims);
        for (long c = 0; c < D; ++c) m.at(static_cast<long>(i), c) = v[c].promote(F);
    }
    return m;
}

// The h1 x h2 matrix of a full vector under a bipartition.
inline CycMat flatten_vector(const CycVec& v, const std::vector<int>& dims,
                             const Bipartition& bp) {
    long h1 = side_dimension(dims, bp.side_c), h2 = side_dimension(dims, bp.side_d);
    long D = 1;
    for (int d : dims) D *= d;
    if (static_cast<long>(v.size()) != D)
        throw dimension_mismatch_error("vector length disagrees with dims");
    CycMat m(h1, h2, v[0].field());
    for (long idx = 0; idx < D; ++idx) {
        std::vector<int> co = cell_coords(dims, idx);
        m.at(flat_index(dims, bp.side_c, co), flat_index(dims, bp.side_d, co)) = v[idx];
    }
    return m;
}

inline CycMat flatten_state(const ProductState& ps, const std::vector<int>& dims,
                            const Bipartition& bp) {
    return flatten_vector(full_vector(ps, dims), dims, bp);
}

// All members of one tile's orthogonal product set: member b has factor
// sum_e M_j[b_j][e] |X_j[e]> on party j.  Member (0,...,0) is the tile
// indicator.  Labels follow "tile:<id>,idx:(b_1,...,b_n)".
inline std::vector<ProductState> tile_ops(const TileStructure& ts, int tile_id, const CycField& F,
                                          const CoefficientSpec& spec = {}) {
    const Tile& t = ts.tiles[tile_id];
    std::vector<CycMat> mats;
    for (std::size_t j = 0; j < t.subsets.size(); ++j)
        mats.push_back(spec.matrix(static_cast<int>(j), static_cast<int>(t.subsets[j].size()), F));

    std::vector<std::vector<int>> members{{}};
    for (std::size_t j = 0; j < t.subsets.size(); ++j) {
        std::vector<std::vector<int>> next;
        for (const auto& prefix : members)
            for (int b = 0; b < static_cast<int>(t.subsets[j].size()); ++b) {
                auto e = prefix;
                e.push_back(b);
                next.push_back(std::move(e));
            }
        members = std::move(next);
    }

    std::vector<ProductState> out;
    for (const auto& b : members) {
        ProductState ps;
        std::string idx;
        for (std::size_t j = 0; j < t.subsets.size(); ++j) {
            CycVec f(ts.dims[j], Cyc::zero(F));
            for (std::size_t e = 0; e < t.subsets[j].size(); ++e)
                f[t.subsets[j][e]] = mats[j].at(b[j], static_cast<long>(e));
            ps.factors.push_back(std::move(f));
            idx += (j ? "," : "") + std::to_string(b[j]);
        }
        ps.label = "tile:" + std::to_string(tile_id) + ",idx:(" + idx + ")";
        out.push_back(std::move(ps));
    }
    return out;
}

inline ProductState stopper_state(const std::vector<int>& dims, const CycField& F) {
    ProductState ps;
    for (int d : dims) ps.factors.push_back(CycVec(d, Cyc::one(F)));
    ps.label = "stopper";
    return ps;
}

// Recipe for an orthogonal product set derived from a tile structure:
// which tiles lose their all-ones member, whether the stopper is appended,
// and any additional tile-constant states.
struct SDescription {
    TileStructure ts;
    std::vector<int> removed;  // sorted tile ids
    bool with_stopper = true;
    std::vector<ProductState> extras;
    CoefficientSpec spec;
};

inline SDescription default_sdesc(TileStructure ts) {
    SDescription sd;
    sd.removed.resize(ts.tiles.size());
    for (std::size_t i = 0; i < ts.tiles.size(); ++i) sd.removed[i] = static_cast<int>(i);
    sd.ts = std::move(ts);
    return sd;
}

inline long working_order(const SDescription& sd) {
    long L = lcm_long(common_order(sd.ts), sd.spec.extra_order());
    for (const auto& e : sd.extras)
        for (const auto& f : e.factors)
            for (const auto& x : f) L = lcm_long(L, x.order());
    return L;
}

inline void check_sdesc(const SDescription& sd) {
    check_well_formed(sd.ts);
    for (std::size_t k = 0; k < sd.removed.size(); ++k) {
        int i = sd.removed[k];
        if (i < 0 || i >= static_cast<int>(sd.ts.tiles.size()))
            throw degenerate_input_error("removed tile id out of range");
        if (k > 0 && sd.removed[k] <= sd.removed[k - 1])
            throw degenerate_input_error("removed ids must be strictly increasing");
    }
    if (sd.with_stopper && sd.removed.size() != sd.ts.tiles.size())
        throw degenerate_input_error(
            "the stopper is only orthogonal to the set when every tile's all-ones member "
            "is removed");
}

// The orthogonal product set described by sd: per tile, its members minus
// the removed all-ones one; then the stopper; then the extras.
inline OPSet realize(const SDescription& sd) {
    check_sdesc(sd);
    const CycField& F = CycField::get(working_order(sd));
    OPSet out;
    out.dims = sd.ts.dims;
    std::vector<bool> removed(sd.ts.tiles.size(), false);
    for (int i : sd.removed) removed[i] = true;
    for (std::size_t i = 0; i < sd.ts.tiles.size(); ++i) {
        auto members = tile_ops(sd.ts, static_cast<int>(i), F, sd.spec);
        for (std::size_t b = 0; b < members.size(); ++b) {
            if (removed[i] && b == 0) continue;
            out.states.push_back(std::move(members[b]));
        }
    }
    if (sd.with_stopper) out.states.push_back(stopper_state(sd.ts.dims, F));
    for (std::size_t k = 0; k < sd.extras.size(); ++k) {
        ProductState e = sd.extras[k];
        if (e.label.empty()) e.label = "extra:" + std::to_string(k);
        for (auto& f : e.factors)
            for (auto& x : f) x = x.promote(F);
        out.states.push_back(std::move(e));
    }
    return out;
}

inline OPSet build_opb(const TileStructure& ts, const CoefficientSpec& spec = {}) {
    SDescription sd;
    sd.ts = ts;
    sd.with_stopper = false;
    sd.spec = spec;
    return realize(sd);  // nothing removed: every member of every tile
}

inline OPSet build_S(const TileStructure& ts, const CoefficientSpec& spec = {}) {
    SDescription sd = default_sdesc(ts);
    sd.spec = spec;
    return realize(sd);
}

}  // namespace upbtiles
