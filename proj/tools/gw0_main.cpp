// Command-line front end: generation, verification, group actions,
// rank-1 orbit coordinates and Frobenius checks, all over JSON files.
//
// Exit codes: 0 pass, 1 verification failure, 2 usage or I/O error,
// 3 precondition violation.

#include "gw0/action.hpp"
#include "gw0/json_io.hpp"
#include "gw0/parallel.hpp"
#include "gw0/points.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace {

constexpr int kExitPass = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitPrecondition = 3;

struct Run {
    gw0::json report;
    int exit_code = kExitPass;

    Run(int argc, char** argv) {
        gw0::json cmd = gw0::json::array();
        for (int i = 0; i < argc; ++i) cmd.push_back(std::string(argv[i]));
        report["command"] = std::move(cmd);
        report["inputs"] = gw0::json::object();
        report["checks"] = gw0::json::array();
    }

    void input(const std::string& path) { report["inputs"][path] = gw0::file_digest(path); }
    void check(gw0::json j) { report["checks"].push_back(std::move(j)); }
    void fail_verification() { exit_code = std::max(exit_code, kExitVerifyFail); }

    int finish() {
        report["pass"] = (exit_code == kExitPass);
        report["exit"] = exit_code;
        std::cout << gw0::dump_json(report);
        return exit_code;
    }
};

gw0::Potential<gw0::Rational> load_potential(Run& run, const std::string& path) {
    run.input(path);
    return gw0::potential_from_json(gw0::load_json(path));
}

gw0::GroupElement<gw0::Rational> load_group(Run& run, const std::string& path) {
    run.input(path);
    return gw0::group_from_json(gw0::load_json(path));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact engine for formal genus-0 theories"};
    app.require_subcommand(1);

    int deg = 8, zmax = 6;
    std::string out_path, in_path, group_path, lie_path, matrix_path, invariance_path;
    bool allow_s1 = false;
    std::vector<std::string> only;
    int n_points = 2;
    bool do_wdvv = false, do_constants = false;

    auto* gen_point = app.add_subcommand("gen-point", "write the point potential");
    gen_point->add_option("--deg", deg, "degree truncation")->capture_default_str();
    gen_point->add_option("--zmax", zmax, "level truncation")->capture_default_str();
    gen_point->add_option("-o,--out", out_path, "output file")->required();

    auto* gen_points = app.add_subcommand("gen-points", "write the potential of N points");
    gen_points->add_option("n", n_points, "number of points")->required();
    gen_points->add_option("--deg", deg, "degree truncation")->capture_default_str();
    gen_points->add_option("--zmax", zmax, "level truncation")->capture_default_str();
    gen_points->add_option("-o,--out", out_path, "output file")->required();

    auto* verify = app.add_subcommand("verify", "run axiom checks on a potential");
    verify->add_option("input", in_path, "potential file")->required();
    verify->add_option("--only", only, "subset: de, se, trr, cone, rank1");

    auto* act = app.add_subcommand("act", "apply a lower-triangular group element");
    act->add_option("input", in_path, "potential file")->required();
    act->add_option("--group", group_path, "group element file")->required();
    act->add_flag("--allow-s1", allow_s1, "permit S_1 != 0 (degrades reliability)");
    act->add_option("-o,--out", out_path, "output file")->required();

    auto* act_lie = app.add_subcommand("act-lie", "apply an infinitesimal Lie direction");
    act_lie->add_option("input", in_path, "potential file")->required();
    act_lie->add_option("--lie", lie_path, "Lie element file")->required();
    act_lie->add_option("-o,--out", out_path, "output file")->required();

    auto* wmat = app.add_subcommand("w-matrices", "quadratic-form operators of a group element");
    wmat->add_option("input", group_path, "group element file")->required();
    wmat->add_option("-o,--out", out_path, "output file")->required();

    auto* frob = app.add_subcommand("frobenius", "small phase space checks");
    frob->add_option("input", in_path, "potential file")->required();
    frob->add_flag("--wdvv", do_wdvv, "check the WDVV identities");
    frob->add_flag("--constants", do_constants, "write the structure constants");
    frob->add_option("--invariance", invariance_path, "compare constants across this action");
    frob->add_option("-o,--out", out_path, "output file for --constants");

    auto* rank1 = app.add_subcommand("rank1", "rank-1 classification operations");
    rank1->require_subcommand(1);
    auto* r_coords = rank1->add_subcommand("coords", "orbit coordinates of a rank-1 potential");
    r_coords->add_option("input", in_path, "potential file")->required();
    r_coords->add_option("-o,--out", out_path, "output file");
    auto* r_from = rank1->add_subcommand("from-coords", "potential of given orbit coordinates");
    r_from->add_option("input", in_path, "coordinates file")->required();
    r_from->add_option("--deg", deg, "degree truncation")->capture_default_str();
    r_from->add_option("--zmax", zmax, "level truncation")->capture_default_str();
    r_from->add_option("-o,--out", out_path, "output file")->required();
    auto* r_rec = rank1->add_subcommand("reconstruct", "rebuild a potential from its cube form");
    r_rec->add_option("input", in_path, "linear form file")->required();
    r_rec->add_option("--deg", deg, "degree truncation")->capture_default_str();
    r_rec->add_option("--zmax", zmax, "level truncation")->capture_default_str();
    r_rec->add_option("-o,--out", out_path, "output file")->required();

    auto* chf = app.add_subcommand("change-frame", "apply a unit-preserving basis change");
    chf->add_option("input", in_path, "potential file")->required();
    chf->add_option("--matrix", matrix_path, "basis change file")->required();
    chf->add_option("-o,--out", out_path, "output file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    Run run(argc, argv);
    try {
        gw0::thread_count(); // validate GW0_THREADS before any work

        if (gen_point->parsed()) {
            auto f = gw0::point_potential(deg, zmax);
            gw0::save_json(out_path, gw0::potential_to_json(f));
            run.report["output"] = out_path;
        } else if (gen_points->parsed()) {
            auto f = gw0::points_potential(n_points, deg, zmax);
            gw0::save_json(out_path, gw0::potential_to_json(f));
            run.report["output"] = out_path;
        } else if (verify->parsed()) {
            auto f = load_potential(run, in_path);
            auto want = [&](const std::string& name) {
                if (only.empty()) return name != "rank1";
                for (const auto& o : only)
                    if (o == name) return true;
                return false;
            };
            for (const auto& o : only)
                if (o != "de" && o != "se" && o != "trr" && o != "cone" && o != "rank1")
                    throw gw0::io_error("unknown check: " + o);
            gw0::AxiomReport rep;
            if (want("de")) {
                rep.dilaton = gw0::check_dilaton(f);
                rep.has_dilaton = true;
            }
            if (want("se")) {
                rep.string_eq = gw0::check_string(f);
                rep.has_string = true;
            }
            if (want("cone")) {
                rep.cone = gw0::check_cone_pairing(f);
                rep.has_cone = true;
            }
            if (want("trr")) rep.trr = gw0::trr_sweep(f);
            run.check(gw0::axiom_report_to_json(rep));
            if (!rep.all_pass()) run.fail_verification();
            if (want("rank1")) {
                gw0::Rank1Report r1 = gw0::check_rank1_relations(f);
                run.check(gw0::rank1_report_to_json(r1));
                if (!r1.all_pass()) run.fail_verification();
            }
        } else if (act->parsed()) {
            auto f = load_potential(run, in_path);
            auto s = load_group(run, group_path);
            gw0::ActOptions opts;
            opts.allow_s1 = allow_s1;
            auto image = gw0::act_lower(s, f, opts);
            gw0::save_json(out_path, gw0::potential_to_json(image));
            run.report["output"] = out_path;
            run.report["reliable"] = image.reliable();
        } else if (act_lie->parsed()) {
            auto f = load_potential(run, in_path);
            run.input(lie_path);
            auto a = gw0::lie_from_json(gw0::load_json(lie_path));
            auto delta = gw0::act_infinitesimal(a, f);
            gw0::save_json(out_path, gw0::series_to_json(delta));
            run.report["output"] = out_path;
            run.report["reliable"] = delta.reliable();
        } else if (wmat->parsed()) {
            auto s = load_group(run, group_path);
            auto fam = gw0::w_matrices(s);
            gw0::save_json(out_path, gw0::wfamily_to_json(fam));
            run.report["output"] = out_path;
        } else if (frob->parsed()) {
            auto f = load_potential(run, in_path);
            bool any = do_wdvv || do_constants || !invariance_path.empty();
            if (do_wdvv || !any) {
                gw0::WdvvReport rep = gw0::check_wdvv(f);
                run.check(gw0::wdvv_report_to_json(rep));
                if (!rep.all_pass()) run.fail_verification();
            }
            if (do_constants || !any) {
                gw0::StructureTensor t = gw0::structure_constants(f);
                run.check(gw0::json{{"name", "unit-axiom"}, {"pass", t.unit_ok}});
                if (!t.unit_ok) run.fail_verification();
                if (!out_path.empty()) {
                    gw0::save_json(out_path, gw0::tensor_to_json(t));
                    run.report["output"] = out_path;
                } else {
                    run.report["result"] = gw0::tensor_to_json(t);
                }
            }
            if (!invariance_path.empty()) {
                auto s = load_group(run, invariance_path);
                gw0::InvarianceReport rep = gw0::check_frobenius_invariance(s, f);
                run.check(gw0::json{{"name", "frobenius-invariance"}, {"pass", rep.pass}});
                if (!rep.pass) run.fail_verification();
            }
        } else if (r_coords->parsed()) {
            auto f = load_potential(run, in_path);
            gw0::OrbitCoords coords = gw0::rank1_coords(f);
            gw0::json jc = gw0::coords_to_json(coords);
            run.report["result"] = jc;
            if (!out_path.empty()) {
                gw0::save_json(out_path, jc);
                run.report["output"] = out_path;
            }
        } else if (r_from->parsed()) {
            run.input(in_path);
            gw0::OrbitCoords coords = gw0::coords_from_json(gw0::load_json(in_path));
            auto f = gw0::rank1_from_coords(coords, deg, zmax);
            gw0::save_json(out_path, gw0::potential_to_json(f));
            run.report["output"] = out_path;
        } else if (r_rec->parsed()) {
            run.input(in_path);
            gw0::LinearForm L = gw0::linear_form_from_json(gw0::load_json(in_path), zmax);
            auto f = gw0::reconstruct_from_c3(L, deg, zmax);
            gw0::save_json(out_path, gw0::potential_to_json(f));
            run.report["output"] = out_path;
        } else if (chf->parsed()) {
            auto f = load_potential(run, in_path);
            run.input(matrix_path);
            gw0::json jm = gw0::load_json(matrix_path);
            if (!jm.contains("matrix")) throw gw0::io_error("basis change file needs a matrix field");
            gw0::RatMat P = gw0::matrix_from_json(jm.at("matrix"), f.frame()->dim());
            auto g = gw0::change_frame(f, P);
            gw0::save_json(out_path, gw0::potential_to_json(g));
            run.report["output"] = out_path;
        }
    } catch (const gw0::precondition_error& e) {
        run.report["error"] = e.what();
        run.exit_code = kExitPrecondition;
    } catch (const gw0::io_error& e) {
        run.report["error"] = e.what();
        run.exit_code = kExitUsage;
    } catch (const std::exception& e) {
        run.report["error"] = e.what();
        run.exit_code = kExitUsage;
    }
    return run.finish();
}
