#pragma once

#include <string>
#include <vector>

#include "upbtiles/states.hpp"

namespace upbtiles {

struct BuiltinInstance {
    std::string name;
    std::string summary;
    SDescription sdesc;
    long expected_size = 0;            // |S|
    long expected_complement_dim = 0;  // D - |S|
};

namespace detail {

inline Tile tile(std::vector<std::vector<int>> subsets) { return Tile{std::move(subsets)}; }

inline TileStructure fig1_structure() {
    TileStructure ts;
    ts.dims = {3, 4};
    ts.tiles = {
        tile({{0}, {0, 1}}),    tile({{0}, {2}}),    tile({{0, 1}, {3}}),
        tile({{2}, {1, 2, 3}}), tile({{1, 2}, {0}}), tile({{1}, {1, 2}}),
    };
    return ts;
}

inline TileStructure tiles3x3_structure() {
    TileStructure ts;
    ts.dims = {3, 3};
    ts.tiles = {
        tile({{0}, {0, 1}}), tile({{0, 1}, {2}}), tile({{2}, {1, 2}}),
        tile({{1, 2}, {0}}), tile({{1}, {1}}),
    };
    return ts;
}

inline TileStructure upb333_structure() {
    TileStructure ts;
    ts.dims = {3, 3, 3};
    ts.tiles = {
        tile({{1, 2}, {0}, {0, 1}}), tile({{1, 2}, {0, 1}, {2}}), tile({{2}, {1, 2}, {0, 1}}),
        tile({{0, 1}, {2}, {1, 2}}), tile({{0, 1}, {1, 2}, {0}}), tile({{0}, {0, 1}, {1, 2}}),
        tile({{0}, {0}, {0}}),       tile({{1}, {1}, {1}}),       tile({{2}, {2}, {2}}),
    };
    return ts;
}

inline TileStructure upb3333_structure() {
    TileStructure ts;
    ts.dims = {3, 3, 3, 3};
    ts.tiles = {
        tile({{1, 2}, {0, 1}, {0}, {1, 2}}),  // 0
        tile({{1, 2}, {2}, {0, 1}, {0, 1}}),  // 1
        tile({{1, 2}, {1, 2}, {1, 2}, {2}}),  // 2
        tile({{1, 2}, {2}, {0}, {2}}),        // 3
        tile({{2}, {0, 1}, {1, 2}, {0, 1}}),  // 4
        tile({{2}, {0, 1}, {0}, {0}}),        // 5
        tile({{2}, {0}, {1, 2}, {2}}),        // 6
        tile({{2}, {2}, {2}, {0, 1}}),        // 7
        tile({{0, 1}, {1, 2}, {2}, {0, 1}}),  // 8
        tile({{0, 1}, {0}, {1, 2}, {1, 2}}),  // 9
        tile({{0, 1}, {0, 1}, {0, 1}, {0}}),  // 10
        tile({{0, 1}, {0}, {2}, {0}}),        // 11
        tile({{0}, {1, 2}, {0, 1}, {1, 2}}),  // 12
        tile({{0}, {1, 2}, {2}, {2}}),        // 13
        tile({{0}, {2}, {0, 1}, {0}}),        // 14
        tile({{0}, {0}, {0}, {1, 2}}),        // 15
        tile({{1}, {1}, {1}, {1}}),           // 16
    };
    return ts;
}

inline SDescription w333_sdesc() {
    SDescription sd;
    sd.ts.dims = {3, 3, 3};
    for (const Tile& t : tiles3x3_structure().tiles) {
        Tile t3 = t;
        t3.subsets.push_back({0});
        sd.ts.tiles.push_back(std::move(t3));
    }
    for (int c = 1; c <= 2; ++c)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) sd.ts.tiles.push_back(tile({{i}, {j}, {c}}));
    sd.removed = {0, 1, 2, 3, 4};
    sd.with_stopper = false;
    const CycField& F1 = CycField::get(1);
    ProductState partial;
    partial.factors = {CycVec(3, Cyc::one(F1)), CycVec(3, Cyc::one(F1)),
                       {Cyc::one(F1), Cyc::zero(F1), Cyc::zero(F1)}};
    partial.label = "partial-stopper";
    sd.extras.push_back(std::move(partial));
    return sd;
}

}  // namespace detail

inline const std::vector<BuiltinInstance>& builtin_instances() {
    static const std::vector<BuiltinInstance> all = [] {
        std::vector<BuiltinInstance> v;
        {
            BuiltinInstance b;
            b.name = "fig1-3x4";
            b.summary = "six-tile 3x4 set whose complement holds exactly one product state";
            b.sdesc = default_sdesc(detail::fig1_structure());
            b.expected_size = 7;
            b.expected_complement_dim = 5;
            v.push_back(std::move(b));
        }
        {
            BuiltinInstance b;
            b.name = "tiles-3x3";
            b.summary = "five-state 3x3 set from the five-tile windmill structure";
            b.sdesc = default_sdesc(detail::tiles3x3_structure());
            b.expected_size = 5;
            b.expected_complement_dim = 4;
            v.push_back(std::move(b));
        }
        {
            BuiltinInstance b;
            b.name = "upb-333";
            b.summary = "19-state three-party set on 3x3x3";
            b.sdesc = default_sdesc(detail::upb333_structure());
            b.expected_size = 19;
            b.expected_complement_dim = 8;
            v.push_back(std::move(b));
        }
        {
            BuiltinInstance b;
            b.name = "upb-3333";
            b.summary = "65-state four-party set on 3x3x3x3";
            b.sdesc = default_sdesc(detail::upb3333_structure());
            b.expected_size = 65;
            b.expected_complement_dim = 16;
            v.push_back(std::move(b));
        }
        {
            BuiltinInstance b;
            b.name = "w-333";
            b.summary = "23-state three-party set with a partial stopper on the bottom layer";
            b.sdesc = detail::w333_sdesc();
            b.expected_size = 23;
            b.expected_complement_dim = 4;
            v.push_back(std::move(b));
        }
        return v;
    }();
    return all;
}

inline const BuiltinInstance& builtin(const std::string& name) {
    for (const auto& b : builtin_instances())
        if (b.name == name) return b;
    throw unknown_instance_error("no builtin instance named '" + name + "'");
}

}  // namespace upbtiles
