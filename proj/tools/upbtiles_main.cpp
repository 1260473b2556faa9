#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "upbtiles/builtins.hpp"
#include "upbtiles/complement.hpp"
#include "upbtiles/density.hpp"
#include "upbtiles/json_io.hpp"
#include "upbtiles/search.hpp"

using namespace upbtiles;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Maps the parser's byte offset to a line/column diagnostic.
Json parse_json(const std::string& text, const std::string& origin) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        std::size_t byte = e.byte == 0 ? 0 : e.byte - 1;
        if (byte > text.size()) byte = text.size();
        long line = 1, col = 1;
        for (std::size_t i = 0; i < byte; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw std::runtime_error(origin + ": parse error at line " + std::to_string(line) +
                                 ", column " + std::to_string(col) + ": " + e.what());
    }
}

// Canonical output: sorted keys, one-space indent, trailing newline.
void emit(const Json& j, const std::string& out_path) {
    const std::string text = j.dump(1) + "\n";
    if (out_path.empty() || out_path == "-") {
        std::fwrite(text.data(), 1, text.size(), stdout);
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << text;
}

struct LoadedInput {
    std::string name;
    bool is_opset = false;
    SDescription sdesc;
    OPSet opset;
};

// --builtin takes a compiled-in instance; --input a JSON file holding a tile
// structure, a full description, or (where allowed) a bare state list.
LoadedInput load_input(const std::string& builtin_name, const std::string& input_path,
                       bool allow_opset) {
    if (builtin_name.empty() == input_path.empty())
        throw std::runtime_error("pass exactly one of --builtin or --input");
    LoadedInput li;
    if (!builtin_name.empty()) {
        li.name = builtin_name;
        li.sdesc = builtin(builtin_name).sdesc;
        return li;
    }
    li.name = input_path;
    const Json j = parse_json(slurp(input_path), input_path);
    if (j.is_array()) {
        if (!allow_opset)
            throw degenerate_input_error("this command needs a tile structure, not a state list");
        li.is_opset = true;
        li.opset = opset_from_json(j);
        return li;
    }
    li.sdesc = sdesc_from_json(j);
    return li;
}

int run_instances(const std::string& out_path) {
    Json out = Json::array();
    for (const auto& b : builtin_instances())
        out.push_back(Json{{"name", b.name},
                           {"summary", b.summary},
                           {"dims", b.sdesc.ts.dims},
                           {"tiles", static_cast<long>(b.sdesc.ts.tiles.size())},
                           {"set_size", b.expected_size},
                           {"complement_dim", b.expected_complement_dim}});
    emit(out, out_path);
    return 0;
}

int run_construct(const LoadedInput& li, const std::string& out_dir, const std::string& prefix) {
    const SDescription& sd = li.sdesc;
    const ValidationReport vr = validate(sd.ts);
    if (!vr.ok) {
        emit(Json{{"ok", false},
                  {"overlapping_cells", vr.overlapping_cells},
                  {"uncovered_cells", vr.uncovered_cells}},
             "");
        return 1;
    }
    const OPSet B = build_opb(sd.ts, sd.spec);
    const OPSet S = realize(sd);
    OPSet stop;
    stop.dims = sd.ts.dims;
    stop.states.push_back(stopper_state(sd.ts.dims, CycField::get(working_order(sd))));

    const std::string base = out_dir + "/" + prefix;
    emit(opset_to_json(B), base + "B.json");
    emit(opset_to_json(S), base + "S.json");
    emit(opset_to_json(stop), base + "stopper.json");
    std::fprintf(stderr, "wrote %sB.json (%zu states), %sS.json (%zu states), %sstopper.json\n",
                 base.c_str(), B.states.size(), base.c_str(), S.states.size(), base.c_str());
    return 0;
}

struct VerifyFlags {
    bool every = false;
    bool ppt = false;
    bool w_completion = false;
};

int run_verify(const LoadedInput& li, const VerifyFlags& fl, const std::string& out_path) {
    Json out;
    out["instance"] = li.name;
    if (li.is_opset) {
        if (fl.every || fl.ppt || fl.w_completion)
            throw degenerate_input_error("certificate flags need a tile-structure input");
        const bool ortho = verify_orthogonality(li.opset);
        out["dims"] = li.opset.dims;
        out["size"] = static_cast<long>(li.opset.states.size());
        out["orthogonal"] = ortho;
        out["note"] =
            "state-list input: orthogonality and product form only; certificates need the "
            "tile description";
        emit(out, out_path);
        return ortho ? 0 : 1;
    }

    int rc = 0;
    auto track = [&rc](const Certificate& c) {
        if (c.verdict == Verdict::Inconclusive) rc = 2;
    };

    const SDescription& sd = li.sdesc;
    out["dims"] = sd.ts.dims;
    out["set_size"] = static_cast<long>(realize(sd).states.size());

    const ComplementModel model = complement_model(sd);
    out["complement_dim"] = model.dim;
    const Certificate multi = is_upb(model, AnalysisMode::multi());
    track(multi);
    out["multipartite"] = certificate_to_json(multi);

    if (sd.ts.party_count() == 2) {
        const Certificate sc = sucpb_certify(model, all_bipartitions(2).front());
        track(sc);
        out["sucpb"] = certificate_to_json(sc);
    } else if (fl.every) {
        const EveryBipartitionReport rep = check_every_bipartition(model);
        for (const auto& e : rep.entries) {
            track(e.upb);
            track(e.sucpb);
        }
        out["every_bipartition"] = every_bipartition_to_json(rep);
    }
    if (fl.ppt) out["ppt"] = ppt_report_to_json(ppt_report(rho_bar(sd)));
    if (fl.w_completion) {
        if (li.name != "w-333")
            throw degenerate_input_error("--w-completion applies to the builtin w-333");
        out["w_completion"] = verify_w_completion();
    }
    emit(out, out_path);
    return rc;
}

int run_report(const LoadedInput& li, const std::string& out_path) {
    int rc = 0;
    auto track = [&rc](const Certificate& c) {
        if (c.verdict == Verdict::Inconclusive) rc = 2;
    };

    const SDescription& sd = li.sdesc;
    Json out;
    out["instance"] = li.name;
    out["dims"] = sd.ts.dims;
    out["set_size"] = static_cast<long>(realize(sd).states.size());

    const ComplementModel model = complement_model(sd);
    out["complement_dim"] = model.dim;
    const Certificate multi = is_upb(model, AnalysisMode::multi());
    track(multi);
    out["multipartite"] = certificate_to_json(multi);

    if (sd.ts.party_count() == 2) {
        const Certificate sc = sucpb_certify(model, all_bipartitions(2).front());
        track(sc);
        out["sucpb"] = certificate_to_json(sc);
    } else {
        const EveryBipartitionReport rep = check_every_bipartition(model);
        for (const auto& e : rep.entries) {
            track(e.upb);
            track(e.sucpb);
        }
        out["every_bipartition"] = every_bipartition_to_json(rep);
    }

    out["ppt"] = ppt_report_to_json(ppt_report(rho_bar(sd)));
    try {
        out["entangled_via_range"] = entangled_via_range(sd);
    } catch (const inconclusive_error&) {
        out["entangled_via_range"] = "INCONCLUSIVE";
        rc = 2;
    }
    emit(out, out_path);
    return rc;
}

int run_search(SearchConfig cfg, const std::string& out_path) {
    if (!cfg.checkpoint_path.empty() && cfg.checkpoint_path.front() != '/') {
        const char* dir = std::getenv("UPBTILES_CHECKPOINT_DIR");
        if (dir && *dir) cfg.checkpoint_path = std::string(dir) + "/" + cfg.checkpoint_path;
    }
    emit(search_result_to_json(search(cfg)), out_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tile-structure product-basis toolkit"};
    app.require_subcommand(1);

    std::string builtin_name, input_path, out_path;

    CLI::App* ci = app.add_subcommand("instances", "list the built-in examples");
    std::string ci_out;
    ci->add_option("--out", ci_out, "output file (default stdout)");

    CLI::App* cc = app.add_subcommand(
        "construct", "emit the full basis, the reduced set, and the stopper as state files");
    std::string cc_builtin, cc_input, cc_dir = ".", cc_prefix;
    cc->add_option("--builtin", cc_builtin, "built-in instance name");
    cc->add_option("--input", cc_input, "tile structure or description JSON file");
    cc->add_option("--out-dir", cc_dir, "directory for the emitted files");
    cc->add_option("--prefix", cc_prefix, "filename prefix");

    CLI::App* cv = app.add_subcommand("verify", "certify a set against the completion criteria");
    VerifyFlags fl;
    cv->add_option("--builtin", builtin_name, "built-in instance name");
    cv->add_option("--input", input_path, "tile structure, description, or state-list JSON file");
    cv->add_flag("--every-bipartition", fl.every, "also certify each bipartition");
    cv->add_flag("--ppt", fl.ppt, "partial-transpose eigenvalue report for the complement state");
    cv->add_flag("--w-completion", fl.w_completion, "verify the joint-cut completion (w-333)");
    cv->add_option("--out", out_path, "output file (default stdout)");

    CLI::App* cr = app.add_subcommand("report", "full certificate and spectrum bundle");
    std::string cr_builtin, cr_input, cr_out;
    cr->add_option("--builtin", cr_builtin, "built-in instance name");
    cr->add_option("--input", cr_input, "tile structure or description JSON file");
    cr->add_option("--out", cr_out, "output file (default stdout)");

    CLI::App* cs = app.add_subcommand("search", "enumerate qualifying tile structures");
    SearchConfig cfg;
    std::string sym = "on", cs_out;
    cs->add_option("--dims", cfg.dims, "party dimensions, comma separated")
        ->required()
        ->delimiter(',');
    cs->add_option("--min-tiles", cfg.min_tiles, "smallest admissible tile count");
    cs->add_option("--max-tiles", cfg.max_tiles, "largest admissible tile count");
    cs->add_option("--checkpoint", cfg.checkpoint_path,
                   "checkpoint file; relative paths honor UPBTILES_CHECKPOINT_DIR");
    cs->add_option("--checkpoint-interval", cfg.checkpoint_interval,
                   "nodes between checkpoint writes");
    cs->add_option("--threads", cfg.workers, "worker count");
    cs->add_option("--symmetry", sym, "canonical-representative pruning")
        ->check(CLI::IsMember({"on", "off"}));
    cs->add_option("--node-budget", cfg.node_budget, "stop after this many nodes (0 = none)");
    cs->add_option("--time-budget", cfg.time_budget_seconds,
                   "stop after this many seconds (0 = none)");
    cs->add_option("--out", cs_out, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 1;
    }

    try {
        if (*ci) return run_instances(ci_out);
        if (*cc) return run_construct(load_input(cc_builtin, cc_input, false), cc_dir, cc_prefix);
        if (*cv) return run_verify(load_input(builtin_name, input_path, true), fl, out_path);
        if (*cr) return run_report(load_input(cr_builtin, cr_input, false), cr_out);
        if (*cs) {
            cfg.symmetry_reduction = (sym == "on");
            return run_search(cfg, cs_out);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
