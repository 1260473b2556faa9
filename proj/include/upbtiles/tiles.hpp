#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "upbtiles/errors.hpp"

namespace upbtiles {

// Dynamic bitset sized at construction; only the operations the subset
// scanners need.
struct Bits {
    std::vector<std::uint64_t> w;

    Bits() = default;
    explicit Bits(long n) : w((n + 63) / 64, 0) {}

    void set(long i) { w[i >> 6] |= (std::uint64_t{1} << (i & 63)); }
    bool test(long i) const { return (w[i >> 6] >> (i & 63)) & 1; }

    Bits& operator|=(const Bits& o) {
        for (std::size_t k = 0; k < w.size(); ++k) w[k] |= o.w[k];
        return *this;
    }

    long count() const {
        long c = 0;
        for (auto x : w) c += std::popcount(x);
        return c;
    }

    bool intersects(const Bits& o) const {
        for (std::size_t k = 0; k < w.size(); ++k)
            if (w[k] & o.w[k]) return true;
        return false;
    }

    friend bool operator==(const Bits& a, const Bits& b) { return a.w == b.w; }
};

// One combinatorial box: the product of an index subset per party.
// Subsets are kept sorted and duplicate-free.
struct Tile {
    std::vector<std::vector<int>> subsets;

    long cell_count() const {
        long n = 1;
        for (const auto& s : subsets) n *= static_cast<long>(s.size());
        return n;
    }

    friend bool operator==(const Tile& a, const Tile& b) { return a.subsets == b.subsets; }
};

struct TileStructure {
    std::vector<int> dims;
    std::vector<Tile> tiles;

    long party_count() const { return static_cast<long>(dims.size()); }

    long cell_total() const {
        long n = 1;
        for (int d : dims) n *= d;
        return n;
    }
};

// Cells are addressed in mixed radix with party 0 most significant.
inline long cell_index(const std::vector<int>& dims, const std::vector<int>& coords) {
    long idx = 0;
    for (std::size_t j = 0; j < dims.size(); ++j) idx = idx * dims[j] + coords[j];
    return idx;
}

inline std::vector<int> cell_coords(const std::vector<int>& dims, long index) {
    std::vector<int> c(dims.size());
    for (long j = static_cast<long>(dims.size()) - 1; j >= 0; --j) {
        c[j] = static_cast<int>(index % dims[j]);
        index /= dims[j];
    }
    return c;
}

namespace detail {

template <class F>
void for_each_cell_rec(const Tile& t, std::vector<int>& coords, std::size_t j, F&& f) {
    if (j == t.subsets.size()) {
        f(coords);
        return;
    }
    for (int v : t.subsets[j]) {
        coords[j] = v;
        for_each_cell_rec(t, coords, j + 1, f);
    }
}

}  // namespace detail

// Visits cells in ascending mixed-radix order (subsets are sorted).
template <class F>
void for_each_cell(const Tile& t, F&& f) {
    std::vector<int> coords(t.subsets.size());
    detail::for_each_cell_rec(t, coords, 0, f);
}

// Throws on malformed tiles; cover defects go into the report instead.
struct ValidationReport {
    bool ok = false;
    std::vector<long> overlapping_cells;
    std::vector<long> uncovered_cells;
};

inline void check_well_formed(const TileStructure& ts) {
    if (ts.dims.empty()) throw degenerate_input_error("tile structure needs at least one party");
    for (int d : ts.dims)
        if (d < 1) throw degenerate_input_error("party dimension must be >= 1");
    for (const Tile& t : ts.tiles) {
        if (t.subsets.size() != ts.dims.size())
            throw degenerate_input_error("tile arity disagrees with party count");
        for (std::size_t j = 0; j < t.subsets.size(); ++j) {
            const auto& s = t.subsets[j];
            if (s.empty()) throw degenerate_input_error("empty index subset in tile");
            for (std::size_t k = 0; k < s.size(); ++k) {
                if (s[k] < 0 || s[k] >= ts.dims[j])
                    throw degenerate_input_error("tile index out of range");
                if (k > 0 && s[k] <= s[k - 1])
                    throw degenerate_input_error("tile subsets must be strictly increasing");
            }
        }
    }
}

inline ValidationReport validate(const TileStructure& ts) {
    check_well_formed(ts);
    ValidationReport rep;
    std::vector<int> hits(ts.cell_total(), 0);
    for (const Tile& t : ts.tiles)
        for_each_cell(t, [&](const std::vector<int>& c) { ++hits[cell_index(ts.dims, c)]; });
    for (long i = 0; i < ts.cell_total(); ++i) {
        if (hits[i] == 0) rep.uncovered_cells.push_back(i);
        if (hits[i] > 1) rep.overlapping_cells.push_back(i);
    }
    rep.ok = rep.overlapping_cells.empty() && rep.uncovered_cells.empty();
    return rep;
}

// A cut of the parties into two blocks; both sides nonempty and sorted.
struct Bipartition {
    std::vector<int> side_c, side_d;

    friend bool operator==(const Bipartition& a, const Bipartition& b) {
        return a.side_c == b.side_c && a.side_d == b.side_d;
    }
};

// All 2^{n-1} - 1 bipartitions, canonicalized so party 0 sits in side_c.
inline std::vector<Bipartition> all_bipartitions(long n) {
    if (n < 2) throw degenerate_input_error("bipartitions need at least two parties");
    std::vector<Bipartition> out;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (n - 1)); ++mask) {
        Bipartition bp;
        bp.side_c.push_back(0);
        for (long j = 1; j < n; ++j)
            ((mask >> (j - 1)) & 1 ? bp.side_c : bp.side_d).push_back(static_cast<int>(j));
        if (bp.side_d.empty()) continue;
        out.push_back(std::move(bp));
    }
    std::sort(out.begin(), out.end(), [](const Bipartition& a, const Bipartition& b) {
        return a.side_c < b.side_c;
    });
    return out;
}

inline void check_bipartition(const TileStructure& ts, const Bipartition& bp) {
    std::vector<int> seen(ts.dims.size(), 0);
    if (bp.side_c.empty() || bp.side_d.empty())
        throw degenerate_input_error("both bipartition blocks must be nonempty");
    for (int j : bp.side_c) {
        if (j < 0 || j >= ts.party_count() || seen[j]++)
            throw degenerate_input_error("bad bipartition block");
    }
    for (int j : bp.side_d) {
        if (j < 0 || j >= ts.party_count() || seen[j]++)
            throw degenerate_input_error("bad bipartition block");
    }
    for (int c : seen)
        if (!c) throw degenerate_input_error("bipartition misses a party");
}

inline long side_dimension(const std::vector<int>& dims, const std::vector<int>& side) {
    long h = 1;
    for (int j : side) h *= dims[j];
    return h;
}

// Row/column index of a cell under a bipartition, mixed radix over the
// parties of one side in their listed order.
inline long flat_index(const std::vector<int>& dims, const std::vector<int>& side,
                       const std::vector<int>& coords) {
    long idx = 0;
    for (int j : side) idx = idx * dims[j] + coords[j];
    return idx;
}

// The flattened footprint of one tile: row set and column set.
struct FlatTile {
    std::vector<int> rows, cols;
};

namespace detail {

inline std::vector<int> flat_subset(const std::vector<int>& dims, const std::vector<int>& side,
                                    const Tile& t) {
    std::vector<int> out{0};
    for (int j : side) {
        std::vector<int> next;
        next.reserve(out.size() * t.subsets[j].size());
        for (int base : out)
            for (int v : t.subsets[j]) next.push_back(base * dims[j] + v);
        out = std::move(next);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace detail

inline FlatTile flatten_tile(const TileStructure& ts, const Bipartition& bp, const Tile& t) {
    return {detail::flat_subset(ts.dims, bp.side_c, t), detail::flat_subset(ts.dims, bp.side_d, t)};
}

// Precomputed masks for subset scans under one bipartition.  Cell masks use
// the global mixed-radix index, so they are shared across bipartitions.
struct TileMasks {
    long h1 = 0, h2 = 0;
    std::vector<Bits> rows, cols, cells;
};

inline TileMasks make_masks(const TileStructure& ts, const Bipartition& bp) {
    check_bipartition(ts, bp);
    TileMasks m;
    m.h1 = side_dimension(ts.dims, bp.side_c);
    m.h2 = side_dimension(ts.dims, bp.side_d);
    for (const Tile& t : ts.tiles) {
        Bits r(m.h1), c(m.h2), cell(ts.cell_total());
        FlatTile ft = flatten_tile(ts, bp, t);
        for (int x : ft.rows) r.set(x);
        for (int x : ft.cols) c.set(x);
        for_each_cell(t, [&](const std::vector<int>& co) { cell.set(cell_index(ts.dims, co)); });
        m.rows.push_back(std::move(r));
        m.cols.push_back(std::move(c));
        m.cells.push_back(std::move(cell));
    }
    return m;
}

// Per-party support masks for multipartite box tests.
struct BoxMasks {
    std::vector<std::vector<Bits>> party;  // [tile][party]
    std::vector<Bits> cells;
};

inline BoxMasks make_box_masks(const TileStructure& ts) {
    BoxMasks m;
    for (const Tile& t : ts.tiles) {
        std::vector<Bits> per;
        for (std::size_t j = 0; j < ts.dims.size(); ++j) {
            Bits b(ts.dims[j]);
            for (int v : t.subsets[j]) b.set(v);
            per.push_back(std::move(b));
        }
        Bits cell(ts.cell_total());
        for_each_cell(t, [&](const std::vector<int>& co) { cell.set(cell_index(ts.dims, co)); });
        m.party.push_back(std::move(per));
        m.cells.push_back(std::move(cell));
    }
    return m;
}

inline bool is_rectangle_union(const TileStructure& ts, const Bipartition& bp,
                               const std::vector<int>& ids) {
    TileMasks m = make_masks(ts, bp);
    Bits r(m.h1), c(m.h2), cell(ts.cell_total());
    for (int i : ids) {
        r |= m.rows[i];
        c |= m.cols[i];
        cell |= m.cells[i];
    }
    return cell.count() == r.count() * c.count();
}

inline bool is_box_union(const TileStructure& ts, const std::vector<int>& ids) {
    BoxMasks m = make_box_masks(ts);
    std::vector<Bits> per;
    for (std::size_t j = 0; j < ts.dims.size(); ++j) per.emplace_back(Bits(ts.dims[j]));
    Bits cell(ts.cell_total());
    for (int i : ids) {
        for (std::size_t j = 0; j < ts.dims.size(); ++j) per[j] |= m.party[i][j];
        cell |= m.cells[i];
    }
    long prod = 1;
    for (const auto& b : per) prod *= b.count();
    return cell.count() == prod;
}

namespace detail {

// Preorder walk over id subsets in sequence-lexicographic order, so the
// first hit is the lexicographically smallest violating subset.
inline bool utile_scan(const TileMasks& m, long s, std::vector<int>& prefix, Bits& r, Bits& c,
                       Bits& cell, std::vector<int>& hit) {
    long k = static_cast<long>(prefix.size());
    if (k >= 2 && k <= s - 1 && cell.count() == r.count() * c.count()) {
        hit = prefix;
        return true;
    }
    int start = prefix.empty() ? 0 : prefix.back() + 1;
    for (int i = start; i < s; ++i) {
        Bits r2 = r, c2 = c, cell2 = cell;
        r2 |= m.rows[i];
        c2 |= m.cols[i];
        cell2 |= m.cells[i];
        prefix.push_back(i);
        if (utile_scan(m, s, prefix, r2, c2, cell2, hit)) return true;
        prefix.pop_back();
    }
    return false;
}

}  // namespace detail

// The union condition under one bipartition: no union of between 2 and s-1
// tiles may flatten to a combinatorial rectangle.  Returns the smallest
// violating id set in sequence-lex order, or nullopt when the condition
// holds.  Only defined for structures with at least 5 tiles.
inline std::optional<std::vector<int>> utile_violation(const TileStructure& ts,
                                                       const Bipartition& bp) {
    check_well_formed(ts);
    long s = static_cast<long>(ts.tiles.size());
    if (s < 5)
        throw degenerate_input_error("union condition needs at least 5 tiles, got " +
                                     std::to_string(s));
    TileMasks m = make_masks(ts, bp);
    std::vector<int> prefix, hit;
    Bits r(m.h1), c(m.h2), cell(ts.cell_total());
    if (detail::utile_scan(m, s, prefix, r, c, cell, hit)) return hit;
    return std::nullopt;
}

inline bool utile_check(const TileStructure& ts, const Bipartition& bp) {
    return !utile_violation(ts, bp).has_value();
}

struct BipartitionVerdict {
    Bipartition bp;
    bool ok = false;
    std::vector<int> violation;  // empty when ok
};

// The condition in every bipartition of the parties.
inline std::vector<BipartitionVerdict> utile_check_all(const TileStructure& ts) {
    std::vector<BipartitionVerdict> out;
    for (const Bipartition& bp : all_bipartitions(ts.party_count())) {
        BipartitionVerdict v;
        v.bp = bp;
        auto hit = utile_violation(ts, bp);
        v.ok = !hit.has_value();
        if (hit) v.violation = *hit;
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace upbtiles
