#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "upbtiles/intlattice.hpp"
#include "upbtiles/states.hpp"

namespace upbtiles {

enum class Verdict { UPB, NotUPB, SUCPB, Inconclusive };

inline std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::UPB: return "UPB";
        case Verdict::NotUPB: return "NOT-UPB";
        case Verdict::SUCPB: return "SUCPB";
        default: return "INCONCLUSIVE";
    }
}

// Either the full multipartite product test or a bipartition flattening.
struct AnalysisMode {
    bool multipartite = true;
    Bipartition bp;

    static AnalysisMode multi() { return {}; }
    static AnalysisMode flat(Bipartition b) { return {false, std::move(b)}; }

    std::string name() const {
        if (multipartite) return "multipartite";
        std::string s;
        for (int j : bp.side_c) s += std::to_string(j);
        s += "|";
        for (int j : bp.side_d) s += std::to_string(j);
        return s;
    }
};

// Exact factorization of a full tensor; nullopt when entangled.  The overall
// scale lands on party 0.
inline std::optional<std::vector<CycVec>> is_product_tensor(const CycVec& v,
                                                            const std::vector<int>& dims) {
    long D = 1;
    for (int d : dims) D *= d;
    if (static_cast<long>(v.size()) != D)
        throw dimension_mismatch_error("tensor length disagrees with dims");
    long pivot = -1;
    for (long i = 0; i < D; ++i)
        if (!v[i].is_zero()) {
            pivot = i;
            break;
        }
    if (pivot < 0) throw degenerate_input_error("zero vector has no product factorization");
    const CycField& F = v[0].field();
    std::vector<int> pc = cell_coords(dims, pivot);

    // Candidate factors are the axis slices through the pivot cell.
    std::vector<CycVec> factors;
    for (std::size_t j = 0; j < dims.size(); ++j) {
        CycVec f(dims[j], Cyc::zero(F));
        std::vector<int> c = pc;
        for (int x = 0; x < dims[j]; ++x) {
            c[j] = x;
            f[x] = v[cell_index(dims, c)];
        }
        factors.push_back(std::move(f));
    }
    // v is product iff v * v[pivot]^(n-1) equals the tensor of the slices.
    Cyc scale = v[pivot].pow(static_cast<long>(dims.size()) - 1);
    for (long i = 0; i < D; ++i) {
        std::vector<int> c = cell_coords(dims, i);
        Cyc prod = Cyc::one(F);
        for (std::size_t j = 0; j < dims.size(); ++j) prod *= factors[j][c[j]];
        if (v[i] * scale != prod) return std::nullopt;
    }
    Cyc inv = scale.inverse();
    for (auto& x : factors[0]) x *= inv;
    return factors;
}

// The complement of the realized set in tile-coordinate form: vectors
// sum_i a_i * indicator(t_i) over the removed tiles, one linear constraint
// per stopper or extra state.
struct ComplementModel {
    SDescription sd;
    const CycField* F = nullptr;
    std::vector<long> areas;          // cell counts, indexed like sd.removed
    std::vector<CycVec> constraints;  // rows over the removed coordinates
    long dim = 0;                     // |removed| - rank(constraints)
    long ambient = 0;                 // product of dims

    int local_index(int tile_id) const {
        auto it = std::lower_bound(sd.removed.begin(), sd.removed.end(), tile_id);
        if (it == sd.removed.end() || *it != tile_id)
            throw degenerate_input_error("tile is not part of the complement model");
        return static_cast<int>(it - sd.removed.begin());
    }
};

inline ComplementModel complement_model(const SDescription& sd, bool crosscheck = true) {
    check_sdesc(sd);
    ValidationReport rep = validate(sd.ts);
    if (!rep.ok) throw degenerate_input_error("tile structure is not an exact cover");
    if (sd.removed.size() > 24)
        throw degenerate_input_error("removed-tile count exceeds the subset-scan limit of 24");

    ComplementModel m;
    m.sd = sd;
    m.F = &CycField::get(working_order(sd));
    m.ambient = sd.ts.cell_total();
    const CycField& F = *m.F;
    const long R = static_cast<long>(sd.removed.size());
    for (int id : sd.removed) m.areas.push_back(sd.ts.tiles[id].cell_count());

    if (sd.with_stopper) {
        CycVec row;
        for (long i = 0; i < R; ++i) row.push_back(Cyc::from_long(F, m.areas[i]));
        m.constraints.push_back(std::move(row));
    }

    // Extras must be constant on each removed tile and vanish elsewhere; the
    // constraint row is conj(value) * area.  Mutual orthogonality keeps the
    // realized set an orthogonal one.
    std::vector<bool> removed_cell(m.ambient, false);
    for (int id : sd.removed)
        for_each_cell(sd.ts.tiles[id],
                      [&](const std::vector<int>& c) { removed_cell[cell_index(sd.ts.dims, c)] = true; });
    std::vector<CycVec> extra_values;
    for (const auto& e : sd.extras) {
        CycVec full = full_vector(e, sd.ts.dims);
        for (auto& x : full) x = x.promote(F);
        CycVec values;
        for (long i = 0; i < R; ++i) {
            const Tile& t = sd.ts.tiles[sd.removed[i]];
            std::optional<Cyc> val;
            bool constant = true;
            for_each_cell(t, [&](const std::vector<int>& c) {
                const Cyc& x = full[cell_index(sd.ts.dims, c)];
                if (!val)
                    val = x;
                else if (*val != x)
                    constant = false;
            });
            if (!constant)
                throw degenerate_input_error("extra state '" + e.label + "' is not tile-constant");
            values.push_back(*val);
        }
        for (long i = 0; i < m.ambient; ++i)
            if (!removed_cell[i] && !full[i].is_zero())
                throw degenerate_input_error("extra state '" + e.label +
                                             "' is supported outside the removed tiles");
        if (sd.with_stopper) {
            Cyc ip = Cyc::zero(F);
            for (long i = 0; i < R; ++i) ip += values[i] * Cyc::from_long(F, m.areas[i]);
            if (!ip.is_zero())
                throw degenerate_input_error("extra state '" + e.label +
                                             "' is not orthogonal to the stopper");
        }
        for (const auto& prev : extra_values) {
            Cyc ip = Cyc::zero(F);
            for (long i = 0; i < R; ++i)
                ip += prev[i].conj() * values[i] * Cyc::from_long(F, m.areas[i]);
            if (!ip.is_zero())
                throw degenerate_input_error("extra states are not mutually orthogonal");
        }
        CycVec row;
        for (long i = 0; i < R; ++i)
            row.push_back(values[i].conj() * Cyc::from_long(F, m.areas[i]));
        extra_values.push_back(std::move(values));
        m.constraints.push_back(std::move(row));
    }

    long crank = m.constraints.empty() ? 0 : rank(CycMat::from_rows(m.constraints));
    m.dim = R - crank;

    if (crosscheck) {
        // The a-space solutions, expanded through indicators, must be exactly
        // the orthogonal complement of the realized set.
        OPSet S = realize(sd);
        if (m.dim != m.ambient - static_cast<long>(S.states.size()))
            throw std::logic_error("complement model dimension disagrees with set size");
        std::vector<CycVec> abasis;
        if (m.constraints.empty()) {
            abasis.assign(R, CycVec(R, Cyc::zero(F)));
            for (long i = 0; i < R; ++i) abasis[i][i] = Cyc::one(F);
        } else {
            abasis = kernel_basis(CycMat::from_rows(m.constraints));
        }
        std::vector<CycVec> fulls;
        for (const auto& ps : S.states) {
            CycVec f = full_vector(ps, sd.ts.dims);
            for (auto& x : f) x = x.promote(F);
            fulls.push_back(std::move(f));
        }
        for (const auto& a : abasis) {
            CycVec v(m.ambient, Cyc::zero(F));
            for (long i = 0; i < R; ++i)
                for_each_cell(sd.ts.tiles[sd.removed[i]], [&](const std::vector<int>& c) {
                    v[cell_index(sd.ts.dims, c)] = a[i];
                });
            for (const auto& f : fulls)
                if (!inner_product(f, v).is_zero())
                    throw std::logic_error("complement model vector not orthogonal to the set");
        }
    }
    return m;
}

struct SupportCandidate {
    std::vector<int> tiles;  // tile ids, subset of removed
};

// All removed-tile subsets whose union is a combinatorial rectangle under
// the bipartition (flat mode) or a combinatorial box (multipartite mode).
// Every product state in the complement is supported on such a union, so
// these candidates are exhaustive.
inline std::vector<SupportCandidate> enumerate_supports(const ComplementModel& m,
                                                        const AnalysisMode& mode) {
    const TileStructure& ts = m.sd.ts;
    const long R = static_cast<long>(m.sd.removed.size());
    std::vector<SupportCandidate> out;
    std::vector<int> chosen;

    if (!mode.multipartite) {
        TileMasks masks = make_masks(ts, mode.bp);
        auto rec = [&](auto&& self, long k, const Bits& r, const Bits& c, const Bits& cell) -> void {
            if (k == R) {
                if (!chosen.empty() && cell.count() == r.count() * c.count()) {
                    SupportCandidate sc;
                    for (int i : chosen) sc.tiles.push_back(m.sd.removed[i]);
                    out.push_back(std::move(sc));
                }
                return;
            }
            self(self, k + 1, r, c, cell);
            int id = m.sd.removed[k];
            Bits r2 = r, c2 = c, cell2 = cell;
            r2 |= masks.rows[id];
            c2 |= masks.cols[id];
            cell2 |= masks.cells[id];
            chosen.push_back(static_cast<int>(k));
            self(self, k + 1, r2, c2, cell2);
            chosen.pop_back();
        };
        rec(rec, 0, Bits(masks.h1), Bits(masks.h2), Bits(ts.cell_total()));
    } else {
        BoxMasks masks = make_box_masks(ts);
        const long n = ts.party_count();
        std::vector<Bits> empty_per;
        for (long j = 0; j < n; ++j) empty_per.emplace_back(Bits(ts.dims[j]));
        auto rec = [&](auto&& self, long k, const std::vector<Bits>& per, const Bits& cell) -> void {
            if (k == R) {
                if (!chosen.empty()) {
                    long prod = 1;
                    for (const auto& b : per) prod *= b.count();
                    if (cell.count() == prod) {
                        SupportCandidate sc;
                        for (int i : chosen) sc.tiles.push_back(m.sd.removed[i]);
                        out.push_back(std::move(sc));
                    }
                }
                return;
            }
            self(self, k + 1, per, cell);
            int id = m.sd.removed[k];
            std::vector<Bits> per2 = per;
            Bits cell2 = cell;
            for (long j = 0; j < n; ++j) per2[j] |= masks.party[id][j];
            cell2 |= masks.cells[id];
            chosen.push_back(static_cast<int>(k));
            self(self, k + 1, per2, cell2);
            chosen.pop_back();
        };
        rec(rec, 0, empty_per, Bits(ts.cell_total()));
    }
    std::sort(out.begin(), out.end(), [](const SupportCandidate& a, const SupportCandidate& b) {
        if (a.tiles.size() != b.tiles.size()) return a.tiles.size() < b.tiles.size();
        return a.tiles < b.tiles;
    });
    return out;
}

enum class FamilyKind { Empty, Linear, Toric };

inline std::string family_kind_name(FamilyKind k) {
    switch (k) {
        case FamilyKind::Empty: return "empty";
        case FamilyKind::Linear: return "linear";
        default: return "toric";
    }
}

struct Witness {
    bool exact = true;
    std::vector<std::pair<int, Cyc>> tile_values;  // exact path, ordered like the support
    CycVec full;                                   // exact full coefficient vector
    std::vector<CycVec> factors;                   // per side (flat) or per party (multi)
    std::vector<std::pair<int, std::complex<double>>> numeric_tile_values;  // numeric fallback
};

struct SolutionFamily {
    std::vector<int> support;
    FamilyKind kind = FamilyKind::Empty;
    long dim = 0;                    // dimension of the span contribution
    std::vector<CycVec> span_basis;  // over the support coordinates
    bool exact_span = true;          // false when span_basis is only an upper bound
    bool span_bounded = true;        // false when no sound span bound exists
    bool inconclusive = false;
    std::optional<Witness> witness;
    std::string note;

    // Nonemptiness can be established even when some torsion coset stayed
    // undecided.
    bool proven_nonempty() const {
        return witness.has_value() || (kind != FamilyKind::Empty && !inconclusive);
    }
};

namespace detail {

// Any nonzero root of sum_k cs[k] x^k by Durand-Kerner.  The caller ensures
// at least two surviving terms, so a nonzero root exists.
inline std::complex<double> nonzero_poly_root(std::vector<std::complex<double>> cs) {
    std::size_t lo = 0;
    while (lo < cs.size() && std::abs(cs[lo]) < 1e-300) ++lo;
    cs.erase(cs.begin(), cs.begin() + lo);
    while (!cs.empty() && std::abs(cs.back()) < 1e-300) cs.pop_back();
    long deg = static_cast<long>(cs.size()) - 1;
    if (deg < 1) return {1.0, 0.0};
    std::vector<std::complex<double>> roots(deg);
    for (long k = 0; k < deg; ++k)
        roots[k] = std::polar(1.3, 0.9 + 2.5 * static_cast<double>(k));
    for (int iter = 0; iter < 500; ++iter) {
        for (long k = 0; k < deg; ++k) {
            std::complex<double> p = cs[deg];
            for (long j = deg - 1; j >= 0; --j) p = p * roots[k] + cs[j];
            std::complex<double> den = cs[deg];
            for (long j = 0; j < deg; ++j)
                if (j != k) den *= roots[k] - roots[j];
            if (std::abs(den) < 1e-300) continue;
            roots[k] -= p / den;
        }
    }
    std::complex<double> best = roots[0];
    for (long k = 0; k < deg; ++k)
        if (std::abs(roots[k]) > std::abs(best)) best = roots[k];
    return best;
}

// Binomial consistency rows over the local tile indices of a support.
struct SupportSystem {
    IntMat E;
};

inline SupportSystem build_support_system(const SupportCandidate& cand, const ComplementModel& m,
                                          const AnalysisMode& mode) {
    const TileStructure& ts = m.sd.ts;
    const long p = static_cast<long>(cand.tiles.size());

    std::map<long, int> cell_tile;  // global cell index -> local tile index
    for (long k = 0; k < p; ++k)
        for_each_cell(ts.tiles[cand.tiles[k]], [&](const std::vector<int>& c) {
            cell_tile[cell_index(ts.dims, c)] = static_cast<int>(k);
        });

    std::vector<std::vector<Int>> rows;
    // Exponent row of the minor a(pp) a(qq) = a(pq) a(qp), collected per tile.
    auto add_minor = [&](long c_pp, long c_pq, long c_qp, long c_qq) {
        std::vector<Int> r(p, Int(0));
        r[cell_tile.at(c_pp)] += 1;
        r[cell_tile.at(c_qq)] += 1;
        r[cell_tile.at(c_pq)] -= 1;
        r[cell_tile.at(c_qp)] -= 1;
        for (const auto& x : r)
            if (x != 0) {
                rows.push_back(std::move(r));
                return;
            }
    };

    if (!mode.multipartite) {
        // Row/column support of the flattened union; minors against the base
        // corner force rank 1 once all entries are nonzero.
        std::vector<int> rset, cset;
        {
            std::vector<bool> rs(side_dimension(ts.dims, mode.bp.side_c), false);
            std::vector<bool> cs(side_dimension(ts.dims, mode.bp.side_d), false);
            for (int id : cand.tiles) {
                FlatTile ft = flatten_tile(ts, mode.bp, ts.tiles[id]);
                for (int x : ft.rows) rs[x] = true;
                for (int x : ft.cols) cs[x] = true;
            }
            for (std::size_t i = 0; i < rs.size(); ++i)
                if (rs[i]) rset.push_back(static_cast<int>(i));
            for (std::size_t i = 0; i < cs.size(); ++i)
                if (cs[i]) cset.push_back(static_cast<int>(i));
        }
        auto cell_of = [&](long r, long c) {
            std::vector<int> co(ts.dims.size());
            for (long j = static_cast<long>(mode.bp.side_c.size()) - 1; j >= 0; --j) {
                int party = mode.bp.side_c[j];
                co[party] = static_cast<int>(r % ts.dims[party]);
                r /= ts.dims[party];
            }
            for (long j = static_cast<long>(mode.bp.side_d.size()) - 1; j >= 0; --j) {
                int party = mode.bp.side_d[j];
                co[party] = static_cast<int>(c % ts.dims[party]);
                c /= ts.dims[party];
            }
            return cell_index(ts.dims, co);
        };
        for (std::size_t ri = 1; ri < rset.size(); ++ri)
            for (std::size_t ci = 1; ci < cset.size(); ++ci)
                add_minor(cell_of(rset[ri], cset[ci]), cell_of(rset[ri], cset[0]),
                          cell_of(rset[0], cset[ci]), cell_of(rset[0], cset[0]));
    } else {
        // Box support per party; minors against the base corner through each
        // axis force the product form on all-nonzero box tensors.
        const long n = ts.party_count();
        std::vector<std::vector<int>> X(n);
        for (long j = 0; j < n; ++j) {
            std::vector<bool> seen(ts.dims[j], false);
            for (int id : cand.tiles)
                for (int v : ts.tiles[id].subsets[j]) seen[v] = true;
            for (int v = 0; v < ts.dims[j]; ++v)
                if (seen[v]) X[j].push_back(v);
        }
        std::vector<std::vector<int>> box_cells;
        {
            std::vector<std::size_t> pos(n, 0);
            while (true) {
                std::vector<int> co(n);
                for (long j = 0; j < n; ++j) co[j] = X[j][pos[j]];
                box_cells.push_back(std::move(co));
                long j = n - 1;
                while (j >= 0 && ++pos[j] == X[j].size()) pos[j--] = 0;
                if (j < 0) break;
            }
        }
        for (long j = 0; j < n; ++j) {
            for (const auto& co : box_cells) {
                if (co[j] == X[j][0]) continue;
                bool rest_base = true;
                for (long k = 0; k < n; ++k)
                    if (k != j && co[k] != X[k][0]) {
                        rest_base = false;
                        break;
                    }
                if (rest_base) continue;
                std::vector<int> xb = co, br = co, bb;
                for (long k = 0; k < n; ++k)
                    if (k != j) xb[k] = X[k][0];
                br[j] = X[j][0];
                bb = xb;
                bb[j] = X[j][0];
                add_minor(cell_index(ts.dims, co), cell_index(ts.dims, xb),
                          cell_index(ts.dims, br), cell_index(ts.dims, bb));
            }
        }
    }

    SupportSystem sys;
    sys.E = IntMat(static_cast<long>(rows.size()), p);
    for (long r = 0; r < sys.E.rows; ++r)
        for (long c = 0; c < p; ++c) sys.E.at(r, c) = rows[r][c];
    return sys;
}

// One Laurent condition sum_{c in terms} gamma_c t^{K_c} = 0 with >= 2 terms
// always has a torus solution; construct one, exactly when it lies in a
// cyclotomic field.  Tile values come back ordered like `tiles`.
inline std::optional<Witness> solve_laurent(const CycVec& gamma,
                                            const std::vector<std::vector<Int>>& class_rows,
                                            const std::vector<long>& terms, const CycVec& tau,
                                            const std::vector<int>& cls,
                                            const std::vector<int>& tiles, const CycField& F) {
    const long r = class_rows.empty() ? 0 : static_cast<long>(class_rows[0].size());
    const long p = static_cast<long>(tiles.size());
    const long nc = static_cast<long>(class_rows.size());

    // Substitute t = (s^{B^0}, ..., s^{B^{r-1}}): with B beyond twice the
    // largest exponent, distinct rows give distinct powers of s.
    Int maxabs(0);
    for (long c : terms)
        for (const auto& e : class_rows[c])
            if (abs(e) > maxabs) maxabs = abs(e);
    Int B = 2 * maxabs + 1;
    std::vector<Int> n_all(nc, Int(0));
    for (long c = 0; c < nc; ++c) {
        Int w(1);
        for (long q = 0; q < r; ++q) {
            n_all[c] += class_rows[c][q] * w;
            w *= B;
        }
    }
    Int nmin = n_all[terms[0]];
    for (long c : terms)
        if (n_all[c] < nmin) nmin = n_all[c];
    std::map<long, Cyc> poly;  // exponent -> coefficient, exponents >= 0
    for (long c : terms) {
        Int sh = n_all[c] - nmin;
        if (!sh.fits_slong_p() || sh.get_si() > 4000) return std::nullopt;
        poly.emplace(sh.get_si(), gamma[c]);
    }
    if (poly.size() < 2) return std::nullopt;

    std::optional<Cyc> s_exact;
    std::complex<double> s_num;

    if (poly.size() == 2) {
        auto it = poly.begin();
        long e0 = it->first;
        Cyc g0 = it->second;
        ++it;
        long g = it->first - e0;
        Cyc rho = -(g0 / it->second);  // s^g = rho
        Rat rv;
        if (rho.is_rational(&rv)) {
            Int num = rv.get_num(), den = rv.get_den();
            Int absnum = abs(num), rn, rd;
            bool en = mpz_root(rn.get_mpz_t(), absnum.get_mpz_t(), g) != 0;
            bool ed = mpz_root(rd.get_mpz_t(), den.get_mpz_t(), g) != 0;
            if (en && ed) {
                Rat mag(rn, rd);
                mag.canonicalize();
                if (num >= 0) {
                    s_exact = Cyc::from_rat(F, mag);
                } else if (g % 2 == 1) {
                    s_exact = Cyc::from_rat(F, -mag);
                } else {
                    const CycField& F2 = CycField::get(lcm_long(F.order(), 2 * g));
                    s_exact = embed_root(2 * g, 1, F2) * Cyc::from_rat(F2, mag);
                }
            }
        }
        if (!s_exact) {
            long L2 = lcm_long(2, F.order());
            if (rho.pow(L2) == Cyc::one(F)) {
                const CycField& F2 = CycField::get(L2);
                Cyc rho2 = rho.promote(F2);
                for (long k = 0; k < L2; ++k)
                    if (embed_root(L2, k, F2) == rho2) {
                        const CycField& Fw = CycField::get(lcm_long(F.order(), L2 * g));
                        s_exact = embed_root(L2 * g, k, Fw);
                        break;
                    }
            }
        }
        if (!s_exact) s_num = std::exp(std::log(rho.to_complex()) / static_cast<double>(g));
    } else {
        // Probe simple exact candidates, then fall back to a numeric root.
        long L2 = lcm_long(2, F.order());
        const CycField& F2 = CycField::get(L2);
        std::vector<Cyc> probes;
        for (long v : {1L, -1L, 2L, -2L, 3L, -3L}) probes.push_back(Cyc::from_long(F2, v));
        for (long d : {2L, 3L}) {
            probes.push_back(Cyc::from_rat(F2, Rat(1, d)));
            probes.push_back(Cyc::from_rat(F2, Rat(-1, d)));
        }
        for (long k = 1; k < L2; ++k) probes.push_back(embed_root(L2, k, F2));
        for (const auto& s : probes) {
            Cyc acc = Cyc::zero(F2);
            for (const auto& [e, coef] : poly) acc += coef.promote(F2) * s.pow(e);
            if (acc.is_zero()) {
                s_exact = s;
                break;
            }
        }
        if (!s_exact) {
            long maxdeg = poly.rbegin()->first;
            std::vector<std::complex<double>> cs(maxdeg + 1, {0.0, 0.0});
            for (const auto& [e, coef] : poly) cs[e] = coef.to_complex();
            s_num = nonzero_poly_root(std::move(cs));
        }
    }

    Witness w;
    if (s_exact) {
        const CycField& Fw = s_exact->field();
        std::vector<Cyc> vclass;
        for (long c = 0; c < nc; ++c) {
            if (!n_all[c].fits_slong_p()) return std::nullopt;
            vclass.push_back(s_exact->pow(n_all[c].get_si()));
        }
        Cyc acc = Cyc::zero(Fw);
        for (long c = 0; c < nc; ++c) acc += gamma[c].promote(Fw) * vclass[c];
        if (!acc.is_zero()) throw std::logic_error("constructed root fails its Laurent condition");
        w.exact = true;
        for (long i = 0; i < p; ++i)
            w.tile_values.push_back({tiles[i], tau[i].promote(Fw) * vclass[cls[i]]});
    } else {
        w.exact = false;
        std::vector<std::complex<double>> vclass;
        for (long c = 0; c < nc; ++c)
            vclass.push_back(std::pow(s_num, static_cast<double>(n_all[c].get_si())));
        std::complex<double> acc{0.0, 0.0};
        double scale = 0.0;
        for (long c = 0; c < nc; ++c) {
            acc += gamma[c].to_complex() * vclass[c];
            scale += std::abs(gamma[c].to_complex() * vclass[c]);
        }
        if (std::abs(acc) > 1e-6 * std::max(scale, 1.0))
            throw std::logic_error("numeric root fails its Laurent condition");
        for (long i = 0; i < p; ++i)
            w.numeric_tile_values.push_back({tiles[i], tau[i].to_complex() * vclass[cls[i]]});
    }
    return w;
}

// Fills the exact witness's full vector and factors; asserts product form.
inline void complete_exact_witness(Witness& w, const ComplementModel& m,
                                   const AnalysisMode& mode) {
    const CycField& Fw = w.tile_values.front().second.field();
    CycVec full(m.ambient, Cyc::zero(Fw));
    for (const auto& [id, a] : w.tile_values)
        for_each_cell(m.sd.ts.tiles[id],
                      [&](const std::vector<int>& c) { full[cell_index(m.sd.ts.dims, c)] = a; });
    std::optional<std::vector<CycVec>> f;
    if (mode.multipartite) {
        f = is_product_tensor(full, m.sd.ts.dims);
    } else {
        CycMat M = flatten_vector(full, m.sd.ts.dims, mode.bp);
        f = is_product_tensor(M.a, {static_cast<int>(M.rows), static_cast<int>(M.cols)});
    }
    if (!f) throw std::logic_error("witness failed the product check");
    w.factors = std::move(*f);
    w.full = std::move(full);
}

}  // namespace detail

// Decides existence (and span) of product states supported exactly on the
// candidate: binomial consistency system, integer lattice kernel, torsion
// cosets, then per-coset linear solve or Laurent classification.
inline SolutionFamily solve_support(const SupportCandidate& cand, const ComplementModel& m,
                                    const AnalysisMode& mode) {
    const long p = static_cast<long>(cand.tiles.size());
    SolutionFamily fam;
    fam.support = cand.tiles;

    detail::SupportSystem sys = detail::build_support_system(cand, m, mode);
    LatticeKernel lk = integer_lattice_kernel(sys.E);
    const long r = static_cast<long>(lk.basis.size());

    // Tiles with identical kernel rows carry proportional coefficients.
    std::vector<std::vector<Int>> krows(p, std::vector<Int>(r));
    for (long i = 0; i < p; ++i)
        for (long q = 0; q < r; ++q) krows[i][q] = lk.basis[q][i];
    std::vector<int> cls(p, -1);
    std::vector<std::vector<Int>> class_rows;
    for (long i = 0; i < p; ++i) {
        for (std::size_t c = 0; c < class_rows.size(); ++c)
            if (class_rows[c] == krows[i]) cls[i] = static_cast<int>(c);
        if (cls[i] < 0) {
            cls[i] = static_cast<int>(class_rows.size());
            class_rows.push_back(krows[i]);
        }
    }
    const long nc = static_cast<long>(class_rows.size());

    // Linear exactly when the monomial map onto class values is surjective:
    // full rank with unit invariant factors.
    bool linear_kind = true;
    {
        IntMat Khat(nc, r);
        for (long c = 0; c < nc; ++c)
            for (long q = 0; q < r; ++q) Khat.at(c, q) = class_rows[c][q];
        SmithResult s = smith_normal_form(Khat);
        if (s.rank != nc) linear_kind = false;
        for (const auto& d : s.invariant_factors)
            if (d != 1) linear_kind = false;
    }

    long Lw = m.F->order();
    long n_cosets = 1;
    for (const auto& g : lk.torsion) {
        long d = g.factor.get_si();
        Lw = lcm_long(Lw, d);
        n_cosets *= d;
        if (n_cosets > 4096) {
            fam.kind = FamilyKind::Toric;
            fam.inconclusive = true;
            fam.span_bounded = false;
            fam.note = "torsion group too large to enumerate";
            return fam;
        }
    }
    const CycField& F = CycField::get(Lw);

    std::vector<CycVec> cons;  // model constraints restricted to the support
    for (const auto& row : m.constraints) {
        CycVec sub;
        for (int id : cand.tiles) sub.push_back(row[m.local_index(id)].promote(F));
        cons.push_back(std::move(sub));
    }

    std::vector<CycVec> span_rows;
    bool any_nonempty = false, any_inconclusive = false;
    std::optional<Witness> witness;

    for (long coset = 0; coset < n_cosets; ++coset) {
        CycVec tau(p, Cyc::one(F));
        {
            long rem = coset;
            for (const auto& g : lk.torsion) {
                long d = g.factor.get_si();
                long mk = rem % d;
                rem /= d;
                if (mk == 0) continue;
                for (long i = 0; i < p; ++i) {
                    Int e = mk * g.exponents[i];
                    tau[i] *= embed_root(d, static_cast<long>(mpz_fdiv_ui(e.get_mpz_t(), d)), F);
                }
            }
        }

        // Substitute a_i = tau_i v_{cls(i)} into each constraint.
        std::vector<CycVec> reduced;
        for (const auto& row : cons) {
            CycVec rr(nc, Cyc::zero(F));
            for (long i = 0; i < p; ++i) rr[cls[i]] += row[i] * tau[i];
            if (!is_zero_vec(rr)) reduced.push_back(std::move(rr));
        }
        long eff_rank = reduced.empty() ? 0 : rank(CycMat::from_rows(reduced));

        auto expand_to_support = [&](const CycVec& v) {
            CycVec a(p, Cyc::zero(F));
            for (long i = 0; i < p; ++i) a[i] = tau[i] * v[cls[i]];
            return a;
        };

        if (linear_kind) {
            std::vector<CycVec> vbasis;
            if (reduced.empty()) {
                vbasis.assign(nc, CycVec(nc, Cyc::zero(F)));
                for (long c = 0; c < nc; ++c) vbasis[c][c] = Cyc::one(F);
            } else {
                vbasis = kernel_basis(CycMat::from_rows(reduced));
            }
            if (vbasis.empty()) continue;
            bool full_support = true;
            for (long c = 0; c < nc && full_support; ++c) {
                bool attainable = false;
                for (const auto& b : vbasis)
                    if (!b[c].is_zero()) attainable = true;
                if (!attainable) full_support = false;
            }
            // States with a vanishing class value live on sub-supports and
            // are counted at their own candidates.
            if (!full_support) continue;
            any_nonempty = true;
            for (const auto& b : vbasis) span_rows.push_back(expand_to_support(b));
            if (!witness) {
                for (long lam = 1; lam < 1000 && !witness; ++lam) {
                    CycVec v(nc, Cyc::zero(F));
                    Cyc wgt = Cyc::one(F);
                    for (const auto& b : vbasis) {
                        for (long c = 0; c < nc; ++c) v[c] += wgt * b[c];
                        wgt *= Cyc::from_long(F, lam);
                    }
                    bool ok = true;
                    for (long c = 0; c < nc; ++c)
                        if (v[c].is_zero()) ok = false;
                    if (!ok) continue;
                    Witness wit;
                    wit.exact = true;
                    CycVec a = expand_to_support(v);
                    for (long i = 0; i < p; ++i) wit.tile_values.push_back({cand.tiles[i], a[i]});
                    witness = std::move(wit);
                }
            }
        } else if (eff_rank == 0) {
            // The whole torsion coset of the subtorus solves.
            any_nonempty = true;
            if (!witness) {
                Witness wit;
                wit.exact = true;
                for (long i = 0; i < p; ++i) wit.tile_values.push_back({cand.tiles[i], tau[i]});
                witness = std::move(wit);
            }
            for (long c = 0; c < nc; ++c) {
                CycVec e(nc, Cyc::zero(F));
                e[c] = Cyc::one(F);
                span_rows.push_back(expand_to_support(e));
            }
        } else if (eff_rank == 1) {
            const CycVec& gamma = reduced[0];
            std::vector<long> terms;
            for (long c = 0; c < nc; ++c)
                if (!gamma[c].is_zero()) terms.push_back(c);
            if (terms.size() <= 1) continue;  // a single monomial forces a zero class
            any_nonempty = true;
            for (const auto& b : kernel_basis(CycMat::from_rows(reduced)))
                span_rows.push_back(expand_to_support(b));
            if (!witness || !witness->exact) {
                auto wit = detail::solve_laurent(gamma, class_rows, terms, tau, cls, cand.tiles, F);
                if (wit && (!witness || (wit->exact && !witness->exact))) witness = std::move(wit);
            }
        } else {
            any_inconclusive = true;
            for (const auto& b : kernel_basis(CycMat::from_rows(reduced)))
                span_rows.push_back(expand_to_support(b));
        }
    }

    if (any_inconclusive) {
        fam.kind = FamilyKind::Toric;
        fam.inconclusive = true;
        fam.note = "multiple independent constraints on a toric family";
    } else if (!any_nonempty) {
        fam.kind = FamilyKind::Empty;
        return fam;
    } else {
        fam.kind = linear_kind ? FamilyKind::Linear : FamilyKind::Toric;
    }
    fam.exact_span = linear_kind && !any_inconclusive;
    if (!span_rows.empty()) {
        fam.span_basis = gram_schmidt(span_rows);
        fam.dim = static_cast<long>(fam.span_basis.size());
    }
    fam.witness = std::move(witness);

    if (fam.witness && fam.witness->exact) {
        // The witness must satisfy every model constraint exactly.
        const CycField& Fw = fam.witness->tile_values.front().second.field();
        for (const auto& row : cons) {
            Cyc acc = Cyc::zero(Fw);
            for (long i = 0; i < p; ++i)
                acc += row[i].promote(Fw) * fam.witness->tile_values[i].second;
            if (!acc.is_zero()) throw std::logic_error("witness violates a model constraint");
        }
        detail::complete_exact_witness(*fam.witness, m, mode);
    }
    return fam;
}

// All nonempty (or undecided) families across the enumerated supports.
inline std::vector<SolutionFamily> find_product_states(const ComplementModel& m,
                                                       const AnalysisMode& mode) {
    std::vector<SolutionFamily> out;
    for (const auto& cand : enumerate_supports(m, mode)) {
        SolutionFamily f = solve_support(cand, m, mode);
        if (f.kind != FamilyKind::Empty) out.push_back(std::move(f));
    }
    return out;
}

inline std::vector<SolutionFamily> find_product_states(const SDescription& sd,
                                                       const AnalysisMode& mode) {
    return find_product_states(complement_model(sd), mode);
}

struct Certificate {
    Verdict verdict = Verdict::Inconclusive;
    AnalysisMode mode;
    long complement_dim = 0;
    std::optional<long> product_span_dim;
    std::vector<SolutionFamily> families;
    bool exact = true;
    std::string note;
};

inline Certificate is_upb(const ComplementModel& m, const AnalysisMode& mode) {
    Certificate cert;
    cert.mode = mode;
    cert.complement_dim = m.dim;
    cert.families = find_product_states(m, mode);

    bool nonempty = false, inconclusive = false;
    const Witness* w = nullptr;
    for (const auto& f : cert.families) {
        if (f.proven_nonempty()) nonempty = true;
        if (f.inconclusive) inconclusive = true;
        if (f.witness && (!w || (f.witness->exact && !w->exact))) w = &*f.witness;
    }

    if (nonempty) {
        cert.verdict = Verdict::NotUPB;
        cert.exact = w != nullptr && w->exact;
        if (cert.exact) {
            // Re-verify the witness against every realized member.
            OPSet S = realize(m.sd);
            const CycField& Fw = CycField::get(lcm_long(w->full[0].order(), m.F->order()));
            CycVec wf = w->full;
            for (auto& x : wf) x = x.promote(Fw);
            for (const auto& ps : S.states) {
                CycVec f = full_vector(ps, m.sd.ts.dims);
                for (auto& x : f) x = x.promote(Fw);
                if (!inner_product(f, wf).is_zero())
                    throw std::logic_error("witness is not orthogonal to the realized set");
            }
            cert.note =
                "witness verified against all " + std::to_string(S.states.size()) + " members";
        }
    } else if (inconclusive) {
        cert.verdict = Verdict::Inconclusive;
        cert.exact = false;
        cert.note = "some solution family could not be decided";
    } else {
        cert.verdict = Verdict::UPB;
        cert.exact = true;
    }
    return cert;
}

inline Certificate is_upb(const SDescription& sd, const AnalysisMode& mode) {
    return is_upb(complement_model(sd), mode);
}

// Range-criterion certificate: when the product states in the complement
// provably span less than the whole complement, no orthogonal product
// completion exists across this bipartition.
inline Certificate sucpb_certify(const ComplementModel& m, const Bipartition& bp) {
    AnalysisMode mode = AnalysisMode::flat(bp);
    Certificate cert;
    cert.mode = mode;
    cert.complement_dim = m.dim;
    cert.families = find_product_states(m, mode);

    const long R = static_cast<long>(m.sd.removed.size());
    bool bounded = true, all_exact = true;
    long Lw = m.F->order();
    for (const auto& f : cert.families) {
        if (!f.span_bounded) bounded = false;
        if (!f.exact_span) all_exact = false;
        if (!f.span_basis.empty()) Lw = lcm_long(Lw, f.span_basis[0][0].order());
    }
    if (!bounded) {
        cert.verdict = Verdict::Inconclusive;
        cert.exact = false;
        cert.note = "a family's product span could not be bounded";
        return cert;
    }

    const CycField& Fw = CycField::get(Lw);
    std::vector<CycVec> rows;
    for (const auto& f : cert.families)
        for (const auto& b : f.span_basis) {
            CycVec full(R, Cyc::zero(Fw));
            for (std::size_t i = 0; i < f.support.size(); ++i)
                full[m.local_index(f.support[i])] = b[i].promote(Fw);
            rows.push_back(std::move(full));
        }
    long span = rows.empty() ? 0 : rank(CycMat::from_rows(rows));
    cert.product_span_dim = span;
    cert.exact = all_exact;

    if (span < m.dim) {
        cert.verdict = Verdict::SUCPB;
        cert.note = "product span " + std::to_string(span) + " < complement dimension " +
                    std::to_string(m.dim);
    } else {
        cert.verdict = Verdict::Inconclusive;
        cert.note = "product span bound reaches the complement dimension";
    }
    return cert;
}

inline Certificate sucpb_certify(const SDescription& sd, const Bipartition& bp) {
    return sucpb_certify(complement_model(sd), bp);
}

struct BipartitionReport {
    Bipartition bp;
    Certificate upb;
    Certificate sucpb;
};

struct EveryBipartitionReport {
    std::vector<BipartitionReport> entries;
    bool sucpb_every = false;  // range criterion certified in every bipartition
    bool upb_every = false;    // no bipartite product state in any complement
};

inline EveryBipartitionReport check_every_bipartition(const ComplementModel& m) {
    if (m.sd.ts.party_count() < 3)
        throw degenerate_input_error("per-bipartition report needs at least three parties");
    EveryBipartitionReport rep;
    rep.sucpb_every = rep.upb_every = true;
    for (const auto& bp : all_bipartitions(m.sd.ts.party_count())) {
        BipartitionReport e;
        e.bp = bp;
        e.upb = is_upb(m, AnalysisMode::flat(bp));
        e.sucpb = sucpb_certify(m, bp);
        if (e.upb.verdict != Verdict::UPB) rep.upb_every = false;
        if (e.sucpb.verdict != Verdict::SUCPB) rep.sucpb_every = false;
        rep.entries.push_back(std::move(e));
    }
    return rep;
}

inline EveryBipartitionReport check_every_bipartition(const SDescription& sd) {
    return check_every_bipartition(complement_model(sd));
}

}  // namespace upbtiles
