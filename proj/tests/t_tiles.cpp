#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "upbtiles/builtins.hpp"
#include "upbtiles/tiles.hpp"

using namespace upbtiles;

TEST_CASE("every builtin structure is a disjoint exact cover") {
    for (const auto& b : builtin_instances()) {
        ValidationReport rep = validate(b.sdesc.ts);
        INFO(b.name);
        CHECK(rep.ok);
        CHECK(rep.overlapping_cells.empty());
        CHECK(rep.uncovered_cells.empty());
    }
}

TEST_CASE("validate reports overlaps and holes without throwing") {
    TileStructure ts;
    ts.dims = {2, 2};
    ts.tiles = {Tile{{{0}, {0, 1}}}, Tile{{{0, 1}, {0}}}};  // overlap at (0,0), hole at (1,1)
    ValidationReport rep = validate(ts);
    CHECK(!rep.ok);
    CHECK(rep.overlapping_cells == std::vector<long>{0});
    CHECK(rep.uncovered_cells == std::vector<long>{3});
}

TEST_CASE("malformed tiles throw") {
    TileStructure ts;
    ts.dims = {2, 2};
    ts.tiles = {Tile{{{0, 0}, {0}}}};
    CHECK_THROWS_AS(validate(ts), degenerate_input_error);
    ts.tiles = {Tile{{{2}, {0}}}};
    CHECK_THROWS_AS(validate(ts), degenerate_input_error);
    ts.tiles = {Tile{{{}, {0}}}};
    CHECK_THROWS_AS(validate(ts), degenerate_input_error);
    ts.tiles = {Tile{{{0}}}};
    CHECK_THROWS_AS(validate(ts), degenerate_input_error);
}

TEST_CASE("cell indexing is mixed radix with party 0 most significant") {
    std::vector<int> dims{3, 4};
    CHECK(cell_index(dims, {0, 2}) == 2);
    CHECK(cell_index(dims, {1, 0}) == 4);
    CHECK(cell_index(dims, {2, 3}) == 11);
    std::mt19937 rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<int> d{2 + static_cast<int>(rng() % 3), 2 + static_cast<int>(rng() % 3),
                           2 + static_cast<int>(rng() % 3)};
        long D = static_cast<long>(d[0]) * d[1] * d[2];
        long idx = static_cast<long>(rng() % D);
        CHECK(cell_index(d, cell_coords(d, idx)) == idx);
    }
}

TEST_CASE("bipartition enumeration is canonical and complete") {
    auto b3 = all_bipartitions(3);
    REQUIRE(b3.size() == 3);
    CHECK(b3[0].side_c == std::vector<int>{0});
    CHECK(b3[0].side_d == std::vector<int>{1, 2});
    CHECK(b3[1].side_c == std::vector<int>{0, 1});
    CHECK(b3[2].side_c == std::vector<int>{0, 2});
    CHECK(all_bipartitions(4).size() == 7);
    CHECK(all_bipartitions(2).size() == 1);
    CHECK_THROWS_AS(all_bipartitions(1), degenerate_input_error);
}

TEST_CASE("flattening respects side ordering") {
    const TileStructure& u = builtin("upb-333").sdesc.ts;
    Bipartition a_bc{{0}, {1, 2}};
    FlatTile f0 = flatten_tile(u, a_bc, u.tiles[0]);  // {1,2} x {0} x {0,1}
    CHECK(f0.rows == std::vector<int>{1, 2});
    CHECK(f0.cols == std::vector<int>{0, 1});

    Bipartition ac_b{{0, 2}, {1}};
    FlatTile g0 = flatten_tile(u, ac_b, u.tiles[0]);
    CHECK(g0.rows == std::vector<int>{3, 4, 6, 7});
    CHECK(g0.cols == std::vector<int>{0});
}

TEST_CASE("rectangle and box unions") {
    const TileStructure& f = builtin("fig1-3x4").sdesc.ts;
    Bipartition bp{{0}, {1}};
    CHECK(is_rectangle_union(f, bp, {0, 1}));       // {0} x {0,1,2}
    CHECK(!is_rectangle_union(f, bp, {0, 2}));
    CHECK(is_rectangle_union(f, bp, {0, 1, 2, 3, 4, 5}));  // whole grid
    CHECK(is_box_union(f, {0, 1}));
    const TileStructure& u = builtin("upb-333").sdesc.ts;
    CHECK(!is_box_union(u, {6, 7, 8}));  // three diagonal cells
    CHECK(is_box_union(u, {0, 1, 2, 3, 4, 5, 6, 7, 8}));
    for (int i = 0; i < 9; ++i) CHECK(is_box_union(u, {i}));
}

TEST_CASE("union condition fails on the 3x4 structure at the first pair") {
    auto hit = utile_violation(builtin("fig1-3x4").sdesc.ts, Bipartition{{0}, {1}});
    REQUIRE(hit.has_value());
    CHECK(*hit == std::vector<int>{0, 1});
}

TEST_CASE("union condition holds for the windmill 3x3 structure") {
    CHECK(utile_check(builtin("tiles-3x3").sdesc.ts, Bipartition{{0}, {1}}));
}

TEST_CASE("the 3x3x3 structure has rectangle-forming pairs in every bipartition") {
    auto verdicts = utile_check_all(builtin("upb-333").sdesc.ts);
    REQUIRE(verdicts.size() == 3);
    for (const auto& v : verdicts) CHECK(!v.ok);
    // A|BC: the first two tiles share rows {1,2} and tile disjoint column sets.
    CHECK(verdicts[0].violation == std::vector<int>{0, 1});
    CHECK(verdicts[1].violation == std::vector<int>{0, 2});
    CHECK(verdicts[2].violation == std::vector<int>{0, 6});
}

TEST_CASE("the 3x3x3x3 structure has rectangle-forming pairs in every bipartition") {
    auto verdicts = utile_check_all(builtin("upb-3333").sdesc.ts);
    REQUIRE(verdicts.size() == 7);
    for (const auto& v : verdicts) {
        CHECK(!v.ok);
        CHECK(v.violation.size() == 2);
        CHECK(is_rectangle_union(builtin("upb-3333").sdesc.ts, v.bp, v.violation));
    }
}

TEST_CASE("union verdicts ignore index relabeling and side swaps") {
    const TileStructure& f = builtin("fig1-3x4").sdesc.ts;
    CHECK(utile_violation(f, Bipartition{{0}, {1}}).has_value());
    CHECK(utile_violation(f, Bipartition{{1}, {0}}).has_value());
    TileStructure relabeled = f;  // reverse the column labels: q -> 3 - q
    for (auto& t : relabeled.tiles) {
        for (auto& q : t.subsets[1]) q = 3 - q;
        std::sort(t.subsets[1].begin(), t.subsets[1].end());
    }
    REQUIRE(validate(relabeled).ok);
    CHECK(utile_violation(relabeled, Bipartition{{0}, {1}}).has_value());

    const TileStructure& w = builtin("tiles-3x3").sdesc.ts;
    CHECK(utile_check(w, Bipartition{{0}, {1}}));
    CHECK(utile_check(w, Bipartition{{1}, {0}}));
    TileStructure wr = w;
    for (auto& t : wr.tiles) {
        for (auto& q : t.subsets[0]) q = 2 - q;
        std::sort(t.subsets[0].begin(), t.subsets[0].end());
    }
    REQUIRE(validate(wr).ok);
    CHECK(utile_check(wr, Bipartition{{0}, {1}}));
}

TEST_CASE("layered 3x3x3 variant violates the union condition") {
    const TileStructure& w = builtin("w-333").sdesc.ts;
    Bipartition ab_c{{0, 1}, {2}};
    auto hit = utile_violation(w, ab_c);
    REQUIRE(hit.has_value());
    CHECK(*hit == std::vector<int>{0, 1});
    CHECK(is_rectangle_union(w, ab_c, *hit));
}

TEST_CASE("lexicographically smallest violation is reported") {
    // Rows {0} split as {0}x{0} + {0}x{1,2}; rows {1,2} split into three
    // rectangles; violations include {0,1}, {2,3,4}, and more.
    TileStructure ts;
    ts.dims = {3, 3};
    ts.tiles = {Tile{{{0}, {0}}}, Tile{{{0}, {1, 2}}}, Tile{{{1}, {0, 1, 2}}},
                Tile{{{2}, {0, 1}}}, Tile{{{2}, {2}}}};
    REQUIRE(validate(ts).ok);
    auto hit = utile_violation(ts, Bipartition{{0}, {1}});
    REQUIRE(hit.has_value());
    CHECK(*hit == std::vector<int>{0, 1});
}

TEST_CASE("union condition needs at least five tiles") {
    TileStructure ts;
    ts.dims = {2, 2};
    ts.tiles = {Tile{{{0}, {0, 1}}}, Tile{{{1}, {0, 1}}}};
    CHECK_THROWS_AS(utile_check(ts, Bipartition{{0}, {1}}), degenerate_input_error);
}

TEST_CASE("bad bipartitions are rejected") {
    const TileStructure& f = builtin("fig1-3x4").sdesc.ts;
    CHECK_THROWS_AS(make_masks(f, Bipartition{{0, 1}, {1}}), degenerate_input_error);
    CHECK_THROWS_AS(make_masks(f, Bipartition{{0}, {}}), degenerate_input_error);
    CHECK_THROWS_AS(make_masks(f, Bipartition{{0}, {2}}), degenerate_input_error);
}

TEST_CASE("unknown builtin name throws") {
    CHECK_THROWS_AS(builtin("nope"), unknown_instance_error);
    CHECK(builtin_instances().size() == 5);
}
