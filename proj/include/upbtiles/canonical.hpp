#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "upbtiles/tiles.hpp"

namespace upbtiles {

// Cell sets as bit masks; structures are capped at 128 cells.
using CellMask = unsigned __int128;

inline int popcount128(CellMask m) {
    return std::popcount(static_cast<std::uint64_t>(m)) +
           std::popcount(static_cast<std::uint64_t>(m >> 64));
}

inline int ctz128(CellMask m) {
    std::uint64_t lo = static_cast<std::uint64_t>(m);
    if (lo) return std::countr_zero(lo);
    return 64 + std::countr_zero(static_cast<std::uint64_t>(m >> 64));
}

// The relabeling group: independent index permutations per party composed
// with permutations of equal-dimension parties.  Elements are stored as
// permutations of global cell indices.
struct SymmetryGroup {
    std::vector<int> dims;
    std::vector<std::vector<int>> elements;
};

inline SymmetryGroup symmetry_group(const std::vector<int>& dims) {
    if (dims.empty()) throw degenerate_input_error("symmetry group needs at least one party");
    long D = 1;
    for (int d : dims) {
        if (d < 1) throw degenerate_input_error("party dimension must be >= 1");
        D *= d;
    }
    if (D > 128) throw degenerate_input_error("symmetry group supports at most 128 cells");
    const long n = static_cast<long>(dims.size());

    std::vector<std::vector<std::vector<int>>> index_perms(n);
    for (long j = 0; j < n; ++j) {
        std::vector<int> p(dims[j]);
        std::iota(p.begin(), p.end(), 0);
        do {
            index_perms[j].push_back(p);
        } while (std::next_permutation(p.begin(), p.end()));
    }

    std::vector<std::vector<int>> party_perms;
    {
        std::vector<int> pi(n);
        std::iota(pi.begin(), pi.end(), 0);
        do {
            bool ok = true;
            for (long j = 0; j < n; ++j)
                if (dims[pi[j]] != dims[j]) ok = false;
            if (ok) party_perms.push_back(pi);
        } while (std::next_permutation(pi.begin(), pi.end()));
    }

    SymmetryGroup g;
    g.dims = dims;
    std::vector<int> nco(n);
    for (const auto& pi : party_perms) {
        std::vector<std::size_t> pick(n, 0);
        while (true) {
            std::vector<int> perm(D);
            for (long x = 0; x < D; ++x) {
                std::vector<int> co = cell_coords(dims, x);
                for (long j = 0; j < n; ++j) nco[pi[j]] = index_perms[j][pick[j]][co[j]];
                perm[x] = static_cast<int>(cell_index(dims, nco));
            }
            g.elements.push_back(std::move(perm));
            long j = n - 1;
            while (j >= 0 && ++pick[j] == index_perms[j].size()) pick[j--] = 0;
            if (j < 0) break;
        }
    }
    return g;
}

// Lexicographically minimal relabeling of a structure: tiles as sorted cell
// lists, ordered by least cell, minimized over the whole symmetry group.
struct CanonicalKey {
    std::vector<int> dims;
    std::vector<std::vector<long>> tiles;

    friend bool operator==(const CanonicalKey& a, const CanonicalKey& b) {
        return a.dims == b.dims && a.tiles == b.tiles;
    }
    friend bool operator!=(const CanonicalKey& a, const CanonicalKey& b) { return !(a == b); }
    friend bool operator<(const CanonicalKey& a, const CanonicalKey& b) {
        if (a.dims != b.dims) return a.dims < b.dims;
        return a.tiles < b.tiles;
    }
};

namespace detail {

inline void check_disjoint(const TileStructure& ts) {
    std::vector<int> hits(ts.cell_total(), 0);
    for (const Tile& t : ts.tiles)
        for_each_cell(t, [&](const std::vector<int>& c) {
            if (++hits[cell_index(ts.dims, c)] > 1)
                throw degenerate_input_error("tiles overlap");
        });
}

}  // namespace detail

// Accepts partial structures (disjoint tiles, coverage not required).
inline CanonicalKey canonical_form(const TileStructure& ts) {
    check_well_formed(ts);
    if (ts.cell_total() > 128)
        throw degenerate_input_error("canonical form supports at most 128 cells");
    detail::check_disjoint(ts);

    CanonicalKey key;
    key.dims = ts.dims;
    if (ts.tiles.empty()) return key;

    std::vector<std::vector<long>> base;
    for (const Tile& t : ts.tiles) {
        std::vector<long> cells;
        for_each_cell(t, [&](const std::vector<int>& c) { cells.push_back(cell_index(ts.dims, c)); });
        std::sort(cells.begin(), cells.end());
        base.push_back(std::move(cells));
    }

    const SymmetryGroup g = symmetry_group(ts.dims);
    std::optional<std::vector<std::vector<long>>> best;
    for (const auto& perm : g.elements) {
        std::vector<std::vector<long>> image;
        image.reserve(base.size());
        for (const auto& cells : base) {
            std::vector<long> mapped;
            mapped.reserve(cells.size());
            for (long c : cells) mapped.push_back(perm[c]);
            std::sort(mapped.begin(), mapped.end());
            image.push_back(std::move(mapped));
        }
        std::sort(image.begin(), image.end(),
                  [](const auto& a, const auto& b) { return a.front() < b.front(); });
        if (!best || image < *best) best = std::move(image);
    }
    key.tiles = std::move(*best);
    return key;
}

// Rebuilds the structure a key encodes; inverse of canonical_form up to
// relabeling, so canonical_form(structure_from_key(k)) == k.
inline TileStructure structure_from_key(const CanonicalKey& key) {
    TileStructure ts;
    ts.dims = key.dims;
    for (const auto& cells : key.tiles) {
        Tile t;
        t.subsets.assign(key.dims.size(), {});
        for (long c : cells) {
            std::vector<int> co = cell_coords(key.dims, c);
            for (std::size_t j = 0; j < key.dims.size(); ++j) {
                auto& s = t.subsets[j];
                if (std::find(s.begin(), s.end(), co[j]) == s.end()) s.push_back(co[j]);
            }
        }
        for (auto& s : t.subsets) std::sort(s.begin(), s.end());
        if (t.cell_count() != static_cast<long>(cells.size()))
            throw degenerate_input_error("key cells do not form a box");
        ts.tiles.push_back(std::move(t));
    }
    check_well_formed(ts);
    detail::check_disjoint(ts);
    return ts;
}

inline std::string key_string(const CanonicalKey& key) {
    std::string out;
    for (std::size_t j = 0; j < key.dims.size(); ++j) {
        if (j) out += 'x';
        out += std::to_string(key.dims[j]);
    }
    out += ':';
    for (std::size_t i = 0; i < key.tiles.size(); ++i) {
        if (i) out += '|';
        for (std::size_t c = 0; c < key.tiles[i].size(); ++c) {
            if (c) out += ',';
            out += std::to_string(key.tiles[i][c]);
        }
    }
    return out;
}

}  // namespace upbtiles
