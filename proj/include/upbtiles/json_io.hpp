#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "upbtiles/complement.hpp"
#include "upbtiles/density.hpp"
#include "upbtiles/states.hpp"
#include "upbtiles/tiles.hpp"

namespace upbtiles {

using Json = nlohmann::json;

inline Json tile_to_json(const Tile& t) {
    Json subsets = Json::array();
    for (const auto& s : t.subsets) subsets.push_back(s);
    return Json{{"subsets", std::move(subsets)}};
}

inline Tile tile_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("subsets") || !j["subsets"].is_array())
        throw degenerate_input_error("tile JSON needs a \"subsets\" array");
    Tile t;
    for (const auto& s : j["subsets"]) {
        if (!s.is_array()) throw degenerate_input_error("tile subset must be an array");
        t.subsets.push_back(s.get<std::vector<int>>());
    }
    return t;
}

inline Json structure_to_json(const TileStructure& ts) {
    Json tiles = Json::array();
    for (const Tile& t : ts.tiles) tiles.push_back(tile_to_json(t));
    return Json{{"dims", ts.dims}, {"tiles", std::move(tiles)}};
}

// Shape errors throw; semantic defects surface through check_well_formed.
inline TileStructure structure_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("dims") || !j["dims"].is_array() || !j.contains("tiles") ||
        !j["tiles"].is_array())
        throw degenerate_input_error("tile structure JSON needs \"dims\" and \"tiles\" arrays");
    TileStructure ts;
    ts.dims = j["dims"].get<std::vector<int>>();
    for (const auto& t : j["tiles"]) ts.tiles.push_back(tile_from_json(t));
    check_well_formed(ts);
    return ts;
}

// Party blocks are 0-based under keys "C" and "D".
inline Json bipartition_to_json(const Bipartition& bp) {
    return Json{{"C", bp.side_c}, {"D", bp.side_d}};
}

inline Bipartition bipartition_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("C") || !j.contains("D") || !j["C"].is_array() ||
        !j["D"].is_array())
        throw degenerate_input_error("bipartition JSON needs \"C\" and \"D\" arrays");
    Bipartition bp;
    bp.side_c = j["C"].get<std::vector<int>>();
    bp.side_d = j["D"].get<std::vector<int>>();
    return bp;
}

// Scalars travel as power-basis coordinates over their cyclotomic order,
// each coefficient a lowest-terms "p/q" string.
inline Json cyc_to_json(const Cyc& x) {
    Json coeffs = Json::array();
    for (const Rat& q : x.coeffs()) coeffs.push_back(q.get_str());
    return Json{{"order", x.order()}, {"coeffs", std::move(coeffs)}};
}

inline Cyc cyc_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("order") || !j.contains("coeffs") || !j["coeffs"].is_array())
        throw degenerate_input_error("scalar JSON needs \"order\" and \"coeffs\"");
    const long L = j["order"].get<long>();
    if (L < 1) throw degenerate_input_error("scalar order must be positive");
    const CycField& F = CycField::get(L);
    const Json& cs = j["coeffs"];
    if (static_cast<long>(cs.size()) != F.degree())
        throw degenerate_input_error("scalar JSON needs phi(order) coefficients");
    Cyc out = Cyc::zero(F);
    for (long k = 0; k < F.degree(); ++k) {
        if (!cs[k].is_string())
            throw degenerate_input_error("scalar coefficients are \"p/q\" strings");
        const std::string text = cs[k].get<std::string>();
        Rat q;
        try {
            q = Rat(text);
        } catch (const std::exception&) {
            throw degenerate_input_error("unparseable rational: " + text);
        }
        if (q.get_den() == 0) throw degenerate_input_error("zero denominator in: " + text);
        q.canonicalize();
        if (q != 0) out += Cyc::from_rat(F, q) * Cyc::root_power(F, k);
    }
    return out;
}

inline Json cycvec_to_json(const CycVec& v) {
    Json a = Json::array();
    for (const Cyc& x : v) a.push_back(cyc_to_json(x));
    return a;
}

inline CycVec cycvec_from_json(const Json& j) {
    if (!j.is_array()) throw degenerate_input_error("vector JSON must be an array");
    CycVec v;
    for (const auto& e : j) v.push_back(cyc_from_json(e));
    return v;
}

inline Json state_to_json(const ProductState& ps) {
    Json factors = Json::array();
    for (const CycVec& f : ps.factors) factors.push_back(cycvec_to_json(f));
    return Json{{"factors", std::move(factors)}, {"label", ps.label}};
}

// Factors are promoted to one common field so downstream arithmetic works.
inline ProductState state_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("factors") || !j["factors"].is_array())
        throw degenerate_input_error("product state JSON needs a \"factors\" array");
    ProductState ps;
    for (const auto& f : j["factors"]) ps.factors.push_back(cycvec_from_json(f));
    if (j.contains("label")) ps.label = j["label"].get<std::string>();
    long L = 1;
    for (const auto& f : ps.factors)
        for (const auto& x : f) L = lcm_long(L, x.order());
    const CycField& F = CycField::get(L);
    for (auto& f : ps.factors)
        for (auto& x : f) x = x.promote(F);
    return ps;
}

// An orthogonal product set file is the bare list of states; the dims are
// recovered from the factor lengths on read.
inline Json opset_to_json(const OPSet& s) {
    Json a = Json::array();
    for (const ProductState& ps : s.states) a.push_back(state_to_json(ps));
    return a;
}

inline OPSet opset_from_json(const Json& j) {
    if (!j.is_array() || j.empty())
        throw degenerate_input_error("product set JSON must be a nonempty array of states");
    OPSet s;
    for (const auto& e : j) s.states.push_back(state_from_json(e));
    for (const CycVec& f : s.states.front().factors)
        s.dims.push_back(static_cast<int>(f.size()));
    for (const ProductState& ps : s.states) check_state_dims(ps, s.dims);
    return s;
}

inline Json sdesc_to_json(const SDescription& sd) {
    Json j = structure_to_json(sd.ts);
    j["removed"] = sd.removed;
    j["with_stopper"] = sd.with_stopper;
    if (!sd.extras.empty()) {
        Json ex = Json::array();
        for (const ProductState& ps : sd.extras) ex.push_back(state_to_json(ps));
        j["extras"] = std::move(ex);
    }
    return j;
}

// A bare tile structure means the default reduction: every tile loses its
// all-ones member and the stopper is appended.  Coefficient overrides are
// not part of the format.
inline SDescription sdesc_from_json(const Json& j) {
    SDescription sd;
    sd.ts = structure_from_json(j);
    if (j.contains("removed") || j.contains("with_stopper") || j.contains("extras")) {
        sd.removed = j.value("removed", std::vector<int>{});
        sd.with_stopper = j.value("with_stopper", true);
        if (j.contains("extras"))
            for (const auto& e : j["extras"]) sd.extras.push_back(state_from_json(e));
    } else {
        sd = default_sdesc(std::move(sd.ts));
    }
    check_sdesc(sd);
    return sd;
}

inline Json witness_to_json(const Witness& w) {
    Json j;
    j["exact"] = w.exact;
    if (w.exact) {
        Json tv = Json::array();
        for (const auto& [tile, x] : w.tile_values)
            tv.push_back(Json{{"tile", tile}, {"value", cyc_to_json(x)}});
        j["tile_values"] = std::move(tv);
        j["full"] = cycvec_to_json(w.full);
        Json fs = Json::array();
        for (const CycVec& f : w.factors) fs.push_back(cycvec_to_json(f));
        j["factors"] = std::move(fs);
    } else {
        Json tv = Json::array();
        for (const auto& [tile, z] : w.numeric_tile_values)
            tv.push_back(Json{{"tile", tile}, {"value", Json::array({z.real(), z.imag()})}});
        j["numeric_tile_values"] = std::move(tv);
    }
    return j;
}

inline Json family_to_json(const SolutionFamily& f) {
    Json basis = Json::array();
    for (const CycVec& b : f.span_basis) basis.push_back(cycvec_to_json(b));
    Json j{{"support", f.support},
           {"kind", family_kind_name(f.kind)},
           {"dim", f.dim},
           {"basis", std::move(basis)},
           {"exact_span", f.exact_span},
           {"span_bounded", f.span_bounded},
           {"inconclusive", f.inconclusive}};
    j["witness"] = f.witness ? witness_to_json(*f.witness) : Json();
    if (!f.note.empty()) j["note"] = f.note;
    return j;
}

inline Json certificate_to_json(const Certificate& c) {
    Json mode;
    if (c.mode.multipartite)
        mode = Json{{"multipartite", true}};
    else
        mode = Json{{"multipartite", false}, {"bipartition", bipartition_to_json(c.mode.bp)}};
    Json fams = Json::array();
    for (const SolutionFamily& f : c.families) fams.push_back(family_to_json(f));
    Json j{{"verdict", verdict_name(c.verdict)},
           {"mode", std::move(mode)},
           {"complement_dim", c.complement_dim},
           {"families", std::move(fams)},
           {"exact", c.exact}};
    j["product_span_dim"] = c.product_span_dim ? Json(*c.product_span_dim) : Json();
    if (!c.note.empty()) j["note"] = c.note;
    return j;
}

inline Json every_bipartition_to_json(const EveryBipartitionReport& r) {
    Json entries = Json::array();
    for (const BipartitionReport& e : r.entries)
        entries.push_back(Json{{"bipartition", bipartition_to_json(e.bp)},
                               {"upb", certificate_to_json(e.upb)},
                               {"sucpb", certificate_to_json(e.sucpb)}});
    return Json{{"entries", std::move(entries)},
                {"upb_every", r.upb_every},
                {"sucpb_every", r.sucpb_every}};
}

inline Json ppt_entry_to_json(const PPTEntry& e, double tol) {
    return Json{{"bipartition", bipartition_to_json(e.bp)},
                {"min_eigenvalue", e.min_eigenvalue},
                {"tol", tol}};
}

inline Json ppt_report_to_json(const PPTReport& r) {
    Json entries = Json::array();
    for (const PPTEntry& e : r.entries) entries.push_back(ppt_entry_to_json(e, r.tol));
    return Json{{"entries", std::move(entries)},
                {"min_eigenvalue", r.min_eigenvalue},
                {"all_pass", r.all_pass},
                {"tol", r.tol}};
}

}  // namespace upbtiles
