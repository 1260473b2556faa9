#pragma once

#include <chrono>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "upbtiles/canonical.hpp"
#include "upbtiles/json_io.hpp"
#include "upbtiles/tiles.hpp"

namespace upbtiles {

struct SearchConfig {
    std::vector<int> dims;
    int min_tiles = 5;
    int max_tiles = 24;
    bool symmetry_reduction = true;
    bool rectangle_prune = true;  // disable only to audit the prune itself
    bool collect_covers = false;  // test hook: record every exact cover reached
    std::string checkpoint_path;  // empty disables checkpointing
    long checkpoint_interval = 50000;  // nodes between checkpoint writes
    long node_budget = 0;              // stop after this many nodes this run (0 = none)
    double time_budget_seconds = 0.0;  // stop after this much wall time (0 = none)
    int workers = 1;
};

struct SearchResult {
    std::vector<TileStructure> found;       // covers passing the union condition everywhere
    std::vector<TileStructure> all_covers;  // filled only with collect_covers
    long nodes = 0;
    long prune_rectangle = 0;
    long prune_symmetry = 0;
    long leaves = 0;
    double wall_seconds = 0.0;
    bool complete = false;  // the whole tree within max_tiles was exhausted
};

namespace detail {

struct TileMasks128 {
    CellMask cells = 0;
    std::vector<CellMask> row, col;  // one mask per bipartition
};

// True when some union of the base with a nonempty subset of the others is
// not the full grid yet flattens to a combinatorial rectangle somewhere.
inline bool rectangle_with_subset(CellMask grid, std::size_t from, CellMask cells,
                                  const std::vector<CellMask>& row,
                                  const std::vector<CellMask>& col,
                                  const std::vector<TileMasks128>& others) {
    for (std::size_t j = from; j < others.size(); ++j) {
        CellMask c2 = cells | others[j].cells;
        if (c2 == grid) continue;  // every superset stays the full grid
        std::vector<CellMask> r2 = row, l2 = col;
        bool rect = false;
        for (std::size_t b = 0; b < r2.size(); ++b) {
            r2[b] |= others[j].row[b];
            l2[b] |= others[j].col[b];
            if (popcount128(c2) == popcount128(r2[b]) * popcount128(l2[b])) rect = true;
        }
        if (rect) return true;
        if (rectangle_with_subset(grid, j + 1, c2, r2, l2, others)) return true;
    }
    return false;
}

inline TileMasks128 tile_masks(const std::vector<int>& dims, const std::vector<Bipartition>& bps,
                               const Tile& t) {
    TileMasks128 m;
    m.row.assign(bps.size(), 0);
    m.col.assign(bps.size(), 0);
    for_each_cell(t, [&](const std::vector<int>& co) {
        m.cells |= CellMask{1} << cell_index(dims, co);
        for (std::size_t b = 0; b < bps.size(); ++b) {
            m.row[b] |= CellMask{1} << flat_index(dims, bps[b].side_c, co);
            m.col[b] |= CellMask{1} << flat_index(dims, bps[b].side_d, co);
        }
    });
    return m;
}

}  // namespace detail

// The search-time filter behind the union condition: true iff some tile
// subset containing `newest`, whose union is not the full grid, flattens to
// a rectangle in some bipartition.  Single tiles are never pruned.
inline bool incremental_prune(const TileStructure& partial, int newest) {
    check_well_formed(partial);
    detail::check_disjoint(partial);
    if (partial.cell_total() > 128)
        throw degenerate_input_error("incremental prune supports at most 128 cells");
    if (newest < 0 || newest >= static_cast<int>(partial.tiles.size()))
        throw degenerate_input_error("newest tile id out of range");
    if (partial.tiles.size() < 2) return false;

    const std::vector<Bipartition> bps = all_bipartitions(partial.party_count());
    CellMask grid = 0;
    for (long c = 0; c < partial.cell_total(); ++c) grid |= CellMask{1} << c;
    detail::TileMasks128 base;
    std::vector<detail::TileMasks128> others;
    for (std::size_t i = 0; i < partial.tiles.size(); ++i) {
        detail::TileMasks128 m = detail::tile_masks(partial.dims, bps, partial.tiles[i]);
        if (static_cast<int>(i) == newest)
            base = std::move(m);
        else
            others.push_back(std::move(m));
    }
    return detail::rectangle_with_subset(grid, 0, base.cells, base.row, base.col, others);
}

namespace detail {

struct SearchEngine {
    SearchConfig cfg;
    long n = 0, D = 0;
    CellMask grid = 0;
    std::vector<Bipartition> bps;
    SymmetryGroup group;

    struct Candidate {
        Tile tile;
        TileMasks128 masks;
    };

    std::vector<Tile> placed_tiles;
    std::vector<TileMasks128> placed_masks;
    CellMask covered = 0;
    std::vector<std::vector<int>> active;  // per depth: group ids fixing every placed tile
    std::vector<int> path;                 // branch index per depth of the current node
    std::vector<int> resume;               // checkpoint path being replayed
    bool replaying = false;
    bool stopped = false;

    SearchResult res;
    std::set<std::string> seen_keys;
    long nodes_this_run = 0;
    long nodes_since_write = 0;
    double prior_seconds = 0.0;
    std::chrono::steady_clock::time_point t0;

    explicit SearchEngine(SearchConfig c) : cfg(std::move(c)) {
        n = static_cast<long>(cfg.dims.size());
        D = 1;
        for (int d : cfg.dims) D *= d;
        for (long i = 0; i < D; ++i) grid |= CellMask{1} << i;
        bps = all_bipartitions(n);
        if (cfg.symmetry_reduction) group = symmetry_group(cfg.dims);
    }

    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }

    TileStructure current_structure() const {
        TileStructure ts;
        ts.dims = cfg.dims;
        ts.tiles = placed_tiles;
        return ts;
    }

    std::vector<int> root_active() const {
        std::vector<int> ids;
        for (std::size_t g = 0; g < group.elements.size(); ++g) {
            bool identity = true;
            for (long i = 0; i < D && identity; ++i)
                if (group.elements[g][i] != i) identity = false;
            if (!identity) ids.push_back(static_cast<int>(g));
        }
        return ids;
    }

    // All boxes through the lowest uncovered cell avoiding covered cells,
    // ordered by per-party subset masks with the last party fastest.
    std::vector<Candidate> candidates() const {
        long u = ctz128(grid & ~covered);
        std::vector<int> co = cell_coords(cfg.dims, u);
        std::vector<std::vector<int>> party_masks(n);
        for (long j = 0; j < n; ++j)
            for (int m = 0; m < (1 << cfg.dims[j]); ++m)
                if ((m >> co[j]) & 1) party_masks[j].push_back(m);

        std::vector<Candidate> out;
        std::vector<std::size_t> pick(n, 0);
        while (true) {
            Candidate c;
            c.tile.subsets.resize(n);
            for (long j = 0; j < n; ++j)
                for (int v = 0; v < cfg.dims[j]; ++v)
                    if ((party_masks[j][pick[j]] >> v) & 1) c.tile.subsets[j].push_back(v);
            c.masks = tile_masks(cfg.dims, bps, c.tile);
            if (!(c.masks.cells & covered)) out.push_back(std::move(c));
            long j = n - 1;
            while (j >= 0 && ++pick[j] == party_masks[j].size()) pick[j--] = 0;
            if (j < 0) break;
        }
        return out;
    }

    // Canonical-representative rejection: a group element fixing every placed
    // tile that maps the new tile onto a smaller set still containing the
    // branch cell witnesses a smaller sibling, so this branch is redundant.
    bool symmetry_reject(const Candidate& c, std::vector<int>& child_active) const {
        const long u = ctz128(c.masks.cells);
        for (int gid : active.back()) {
            const auto& perm = group.elements[gid];
            CellMask img = 0;
            for (CellMask m = c.masks.cells; m;) {
                int b = ctz128(m);
                m &= m - 1;
                img |= CellMask{1} << perm[b];
            }
            if (!((img >> u) & 1)) continue;
            if (img < c.masks.cells) return true;
            if (img == c.masks.cells) child_active.push_back(gid);
        }
        return false;
    }

    void record_found(const TileStructure& ts) {
        if (cfg.symmetry_reduction) {
            std::string key = key_string(canonical_form(ts));
            if (!seen_keys.insert(key).second) return;
        }
        res.found.push_back(ts);
    }

    void handle_leaf() {
        ++res.leaves;
        if (cfg.collect_covers) res.all_covers.push_back(current_structure());
        const long k = static_cast<long>(placed_tiles.size());
        if (k < cfg.min_tiles || k > cfg.max_tiles || k < 5) return;
        TileStructure ts = current_structure();
        if (!validate(ts).ok) return;
        for (const auto& v : utile_check_all(ts))
            if (!v.ok) return;
        record_found(ts);
    }

    bool budget_exceeded() const {
        if (cfg.node_budget > 0 && nodes_this_run >= cfg.node_budget) return true;
        if (cfg.time_budget_seconds > 0 && elapsed() >= cfg.time_budget_seconds) return true;
        return false;
    }

    void dfs(long depth) {
        if (stopped) return;
        if (covered == grid) {
            handle_leaf();
            return;
        }
        if (static_cast<long>(placed_tiles.size()) == cfg.max_tiles) return;

        std::vector<Candidate> cands = candidates();
        std::size_t start = 0;
        if (replaying) {
            if (depth >= static_cast<long>(resume.size())) {
                replaying = false;
            } else {
                if (resume[depth] < 0 || resume[depth] >= static_cast<int>(cands.size()))
                    throw checkpoint_error("checkpoint path does not fit the search tree");
                start = static_cast<std::size_t>(resume[depth]);
            }
        }

        for (std::size_t idx = start; idx < cands.size() && !stopped; ++idx) {
            path.push_back(static_cast<int>(idx));
            bool fresh = true;
            if (replaying) {
                if (path.size() < resume.size())
                    fresh = false;  // ancestor of the checkpoint node, counted before
                else
                    replaying = false;  // reached the checkpointed node itself
            }
            if (fresh) {
                maybe_checkpoint();
                if (budget_exceeded()) {
                    write_checkpoint(false);
                    stopped = true;
                    path.pop_back();
                    return;
                }
                ++res.nodes;
                ++nodes_this_run;
                ++nodes_since_write;
            }

            const Candidate& c = cands[idx];
            std::vector<int> child_active;
            if (cfg.symmetry_reduction && symmetry_reject(c, child_active)) {
                ++res.prune_symmetry;
                path.pop_back();
                continue;
            }
            if (cfg.rectangle_prune && !placed_masks.empty() &&
                rectangle_with_subset(grid, 0, c.masks.cells, c.masks.row, c.masks.col,
                                      placed_masks)) {
                ++res.prune_rectangle;
                path.pop_back();
                continue;
            }

            covered |= c.masks.cells;
            placed_tiles.push_back(c.tile);
            placed_masks.push_back(c.masks);
            if (cfg.symmetry_reduction) active.push_back(std::move(child_active));
            dfs(depth + 1);
            if (cfg.symmetry_reduction) active.pop_back();
            placed_masks.pop_back();
            placed_tiles.pop_back();
            covered &= ~c.masks.cells;
            path.pop_back();
        }
    }

    Json config_json() const {
        return Json{{"dims", cfg.dims},
                    {"min_tiles", cfg.min_tiles},
                    {"max_tiles", cfg.max_tiles},
                    {"symmetry", cfg.symmetry_reduction},
                    {"rectangle", cfg.rectangle_prune}};
    }

    void write_checkpoint(bool done) {
        if (cfg.checkpoint_path.empty()) return;
        Json j;
        j["format"] = 1;
        j["config"] = config_json();
        j["done"] = done;
        j["path"] = path;
        j["nodes"] = res.nodes;
        j["prune_rectangle"] = res.prune_rectangle;
        j["prune_symmetry"] = res.prune_symmetry;
        j["leaves"] = res.leaves;
        j["wall_seconds"] = prior_seconds + elapsed();
        Json found = Json::array();
        for (const TileStructure& ts : res.found) found.push_back(structure_to_json(ts));
        j["found"] = std::move(found);

        const std::string tmp = cfg.checkpoint_path + ".tmp";
        {
            std::ofstream out(tmp);
            if (!out) throw checkpoint_error("cannot write checkpoint " + tmp);
            out << j.dump(1) << "\n";
        }
        if (std::rename(tmp.c_str(), cfg.checkpoint_path.c_str()) != 0)
            throw checkpoint_error("cannot replace checkpoint " + cfg.checkpoint_path);
    }

    void maybe_checkpoint() {
        if (cfg.checkpoint_path.empty() || nodes_since_write < cfg.checkpoint_interval) return;
        write_checkpoint(false);
        nodes_since_write = 0;
    }

    // Returns true when the checkpoint already holds a completed run.
    bool load_checkpoint() {
        if (cfg.checkpoint_path.empty()) return false;
        std::ifstream in(cfg.checkpoint_path);
        if (!in) return false;  // fresh start
        Json j;
        try {
            in >> j;
        } catch (const std::exception& e) {
            throw checkpoint_error(std::string("unreadable checkpoint: ") + e.what());
        }
        try {
            if (j.at("format").get<int>() != 1)
                throw checkpoint_error("unknown checkpoint format");
            if (j.at("config") != config_json())
                throw checkpoint_error("checkpoint disagrees with the search configuration");
            res.nodes = j.at("nodes").get<long>();
            res.prune_rectangle = j.at("prune_rectangle").get<long>();
            res.prune_symmetry = j.at("prune_symmetry").get<long>();
            res.leaves = j.at("leaves").get<long>();
            prior_seconds = j.at("wall_seconds").get<double>();
            for (const auto& f : j.at("found"))
                res.found.push_back(structure_from_json(f));
            for (const TileStructure& ts : res.found)
                seen_keys.insert(key_string(canonical_form(ts)));
            if (j.at("done").get<bool>()) return true;
            resume = j.at("path").get<std::vector<int>>();
            replaying = !resume.empty();
        } catch (const checkpoint_error&) {
            throw;
        } catch (const std::exception& e) {
            throw checkpoint_error(std::string("malformed checkpoint: ") + e.what());
        }
        return false;
    }
};

inline void validate_search_config(const SearchConfig& cfg) {
    if (cfg.dims.size() < 2) throw degenerate_input_error("search needs at least two parties");
    long D = 1;
    for (int d : cfg.dims) {
        if (d < 2) throw degenerate_input_error("search party dimensions must be >= 2");
        D *= d;
    }
    if (D > 128) throw degenerate_input_error("search supports at most 128 cells");
    if (cfg.min_tiles < 2) throw degenerate_input_error("min_tiles must be >= 2");
    if (cfg.max_tiles > 24) throw degenerate_input_error("max_tiles must be <= 24");
    if (cfg.min_tiles > cfg.max_tiles) throw degenerate_input_error("min_tiles exceeds max_tiles");
    if (cfg.workers < 1) throw degenerate_input_error("worker count must be >= 1");
    if (cfg.checkpoint_interval < 1) throw degenerate_input_error("checkpoint interval must be >= 1");
    if (cfg.node_budget < 0 || cfg.time_budget_seconds < 0)
        throw degenerate_input_error("budgets must be nonnegative");
    if (cfg.collect_covers && !cfg.checkpoint_path.empty())
        throw degenerate_input_error("cover collection cannot be checkpointed");
}

}  // namespace detail

// Depth-first exact-cover enumeration branching on the lowest uncovered
// cell.  Deterministic for a fixed config; the worker count never changes
// results or counters.  With a checkpoint path, runs resume from the last
// written prefix and a completed run is served back from its checkpoint.
inline SearchResult search(const SearchConfig& cfg) {
    detail::validate_search_config(cfg);
    detail::SearchEngine e(cfg);
    e.t0 = std::chrono::steady_clock::now();
    if (e.load_checkpoint()) {
        e.res.wall_seconds = e.prior_seconds;
        e.res.complete = true;
        return e.res;
    }
    if (cfg.symmetry_reduction) e.active.push_back(e.root_active());
    e.dfs(0);
    e.res.wall_seconds = e.prior_seconds + e.elapsed();
    e.res.complete = !e.stopped;
    if (e.res.complete && !cfg.checkpoint_path.empty()) e.write_checkpoint(true);
    return e.res;
}

inline Json search_result_to_json(const SearchResult& r) {
    Json found = Json::array();
    for (const TileStructure& ts : r.found) found.push_back(structure_to_json(ts));
    return Json{{"found", std::move(found)},
                {"nodes", r.nodes},
                {"prune_rectangle", r.prune_rectangle},
                {"prune_symmetry", r.prune_symmetry},
                {"leaves", r.leaves},
                {"wall_seconds", r.wall_seconds},
                {"complete", r.complete}};
}

}  // namespace upbtiles
