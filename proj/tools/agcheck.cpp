// agcheck: verification front end for linear assume/guarantee contracts.
//
// Subcommands:
//   refine     decide whether two cascaded contracts refine a composite one
//   satisfy    decide whether an affine closed-loop system implements a contract
//   extend     check the window-extension hypothesis for a constraint triple
//   casestudy  build the vehicle-following study, verify it, and simulate it
//
// Exit codes: 0 verified/holds, 1 verification failed, 2 input error,
// 3 solver failure, 4 capability limit (extend only). casestudy prefixes
// stage failures: 10 refine, 11 satisfy, 12 simulation guarantee violated.

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "agc/casestudy.hpp"
#include "agc/contract.hpp"
#include "agc/jsonio.hpp"
#include "agc/refinement.hpp"
#include "agc/satisfaction.hpp"

namespace fs = std::filesystem;
using agc::Json;

namespace {

struct Manifest {
    std::string command;
    std::vector<std::string> inputs;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    bool has_seed = false;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    Json to_json(const std::string& result_summary) const {
        auto wall = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
        Json j;
        j["command"] = command;
        j["inputs"] = inputs;
        j["overrides"] = overrides;
        if (has_seed) j["seed"] = seed;
        j["tool_version"] = AGC_VERSION;
        j["wall_clock_ms"] = wall;
        j["timestamp"] = std::chrono::duration_cast<std::chrono::seconds>(
                             std::chrono::system_clock::now().time_since_epoch())
                             .count();
        j["result"] = result_summary;
        return j;
    }
};

double default_tolerance() {
    if (const char* env = std::getenv("AGCHECK_TOL")) {
        try {
            return std::stod(env);
        } catch (...) {
            std::cerr << "warning: ignoring unparsable AGCHECK_TOL='" << env << "'\n";
        }
    }
    return 1e-7;
}

int parse_horizon_flag(const std::string& flag, int proposed, const char* name) {
    if (flag == "auto") return proposed;
    if (flag == "1") return 1;
    if (flag == "2") return 2;
    throw agc::FormatError(std::string(name) + " must be 1, 2 or auto");
}

std::string fmt_extreal(double v) {
    if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
    std::ostringstream out;
    out.precision(12);
    out << v;
    return out.str();
}

// Locale-independent shortest round-trip formatting for CSV output.
std::string csv_number(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, end);
}

Json extendability_report(const agc::CascadeTriple& triple, bool& all_certified) {
    Json list = Json::array();
    all_certified = true;
    for (const agc::StackedTriple& st : agc::hypothesis_triples(triple)) {
        agc::ExtendabilityVerdict v = agc::check_extendability(st.v_next, st.v_now, st.v_rhs);
        Json entry;
        entry["triple"] = st.name;
        entry["dimension"] = v.dimension;
        if (v.method == agc::ExtendMethod::UnsupportedDimension) {
            entry["status"] = "unsupported";
            entry["note"] = v.note;
            all_certified = false;
            std::cerr << "warning: extendability of '" << st.name << "' not verified: " << v.note
                      << "\n";
        } else if (v.extendable) {
            entry["status"] = "extendable";
        } else {
            entry["status"] = "not-extendable";
            entry["note"] = v.note;
            all_certified = false;
            if (v.counterexample) {
                entry["counterexample"] = {{"u0", agc::vector_to_json(v.counterexample->first)},
                                           {"u1", agc::vector_to_json(v.counterexample->second)}};
            }
            std::cerr << "warning: '" << st.name
                      << "' is not extendable; a failing verdict would be conservative, "
                         "a holding verdict is unaffected\n";
        }
        list.push_back(std::move(entry));
    }
    return list;
}

int cmd_refine(const std::string& c1_path, const std::string& c2_path, const std::string& c_path,
               const std::string& horizon_ii, const std::string& horizon_iii, double tol,
               bool check_extend, const std::string& report_path) {
    Manifest manifest;
    manifest.command = "refine";
    manifest.inputs = {c1_path, c2_path, c_path};

    agc::CascadeTriple triple;
    triple.c1 = agc::load_contract(c1_path);
    triple.c2 = agc::load_contract(c2_path);
    triple.target = agc::load_contract(c_path);
    agc::validate(triple);

    agc::HorizonConfig proposed = agc::propose_horizons(triple);
    agc::HorizonConfig h;
    h.horizon_ii = parse_horizon_flag(horizon_ii, proposed.horizon_ii, "--horizon-ii");
    h.horizon_iii = parse_horizon_flag(horizon_iii, proposed.horizon_iii, "--horizon-iii");

    agc::RefinementVerdict verdict = agc::check_refinement(triple, h, tol);

    std::cout << "refinement " << (verdict.holds ? "holds" : "fails") << " (horizons ii="
              << h.horizon_ii << ", iii=" << h.horizon_iii << ", " << verdict.lp_count
              << " LPs, tol " << tol << ")\n";
    std::cout << "  rho_D      = " << fmt_extreal(verdict.rho_d) << "\n";
    std::cout << "  rho_otimes = " << fmt_extreal(verdict.rho_otimes) << "\n";
    std::cout << "  rho_Omega  = " << fmt_extreal(verdict.rho_omega) << "\n";
    for (const agc::RowResult& r : verdict.rows) {
        if (r.theta > tol) {
            std::cout << "  violated: family " << agc::family_name(r.family) << " row " << r.row
                      << " theta " << fmt_extreal(r.theta) << "\n";
            if (r.witness) {
                std::cout << "    witness: " << agc::vector_to_json(*r.witness).dump() << "\n";
            }
            if (r.ray) {
                std::cout << "    unbounded ray: " << agc::vector_to_json(*r.ray).dump() << "\n";
            }
        }
    }

    Json report;
    report["verdict"] = agc::verdict_to_json(verdict);
    if (check_extend) {
        bool all_certified = false;
        report["extendability"] = extendability_report(triple, all_certified);
    }
    report["manifest"] = manifest.to_json(verdict.holds ? "holds" : "fails");
    if (!report_path.empty()) agc::save_json_file(report_path, report);

    return verdict.holds ? 0 : 1;
}

int cmd_satisfy(const std::string& system_path, const std::string& contract_path,
                const std::string& init_path, double tol, const std::string& report_path) {
    Manifest manifest;
    manifest.command = "satisfy";
    manifest.inputs = {system_path, contract_path, init_path};

    agc::AffineSystem sys = agc::load_system(system_path);
    agc::LinearContract contract = agc::load_contract(contract_path);
    agc::InitSet init = agc::load_initset(init_path, sys.input_dim + sys.state_dim);

    agc::SatisfactionVerdict verdict = agc::check_satisfaction(sys, contract, init, tol);

    std::cout << "satisfaction " << (verdict.holds ? "holds" : "fails") << " (" << verdict.lp_count
              << " LPs, tol " << tol << ")\n";
    for (const agc::SatRowResult& r : verdict.rows) {
        std::cout << "  " << agc::theta_kind_name(r.kind) << " row " << r.row << ": "
                  << (r.vacuous ? "vacuous" : "theta " + fmt_extreal(r.theta)) << "\n";
    }

    Json report;
    report["verdict"] = agc::satisfaction_to_json(verdict);
    report["manifest"] = manifest.to_json(verdict.holds ? "holds" : "fails");
    if (!report_path.empty()) agc::save_json_file(report_path, report);

    return verdict.holds ? 0 : 1;
}

int cmd_extend(const std::string& triple_path, const std::string& report_path) {
    Manifest manifest;
    manifest.command = "extend";
    manifest.inputs = {triple_path};

    Json j = agc::load_json_file(triple_path);
    const Json& version = agc::require_field(j, "schema_version", "triple");
    if (!version.is_string() || version.get<std::string>() != "1") {
        throw agc::FormatError("triple: unsupported schema_version (expected \"1\")");
    }
    const Json& v1 = agc::require_field(j, "V1", "triple");
    if (!v1.is_array() || v1.empty() || !v1[0].is_array()) {
        throw agc::FormatError("triple: field 'V1' must be a non-empty array of rows");
    }
    const int cols = static_cast<int>(v1[0].size());
    agc::Matrix v_next = agc::matrix_from_json(v1, cols, "V1");
    agc::Matrix v_now = agc::matrix_from_json(agc::require_field(j, "V0", "triple"), cols, "V0");
    agc::Vector v_rhs = agc::vector_from_json(agc::require_field(j, "v0", "triple"), "v0");

    agc::ExtendabilityVerdict v = agc::check_extendability(v_next, v_now, v_rhs);

    Json report;
    report["dimension"] = v.dimension;
    int exit_code = 0;
    if (v.method == agc::ExtendMethod::UnsupportedDimension) {
        std::cout << "unsupported: " << v.note << "\n";
        report["status"] = "unsupported";
        report["note"] = v.note;
        exit_code = 4;
    } else if (v.extendable) {
        std::cout << "extendable\n";
        report["status"] = "extendable";
        if (!v.note.empty()) report["note"] = v.note;
    } else {
        std::cout << "not extendable: " << v.note << "\n";
        report["status"] = "not-extendable";
        report["note"] = v.note;
        if (v.counterexample) {
            report["counterexample"] = {{"u0", agc::vector_to_json(v.counterexample->first)},
                                        {"u1", agc::vector_to_json(v.counterexample->second)}};
            std::cout << "  u0 = " << agc::vector_to_json(v.counterexample->first).dump() << "\n";
            std::cout << "  u1 = " << agc::vector_to_json(v.counterexample->second).dump() << "\n";
        }
        exit_code = 1;
    }
    report["manifest"] = manifest.to_json(report["status"].get<std::string>());
    if (!report_path.empty()) agc::save_json_file(report_path, report);
    return exit_code;
}

void apply_overrides(Json& scenario, const std::vector<std::string>& sets) {
    for (const std::string& kv : sets) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw agc::FormatError("--set expects key=value, got '" + kv + "'");
        }
        const std::string key = kv.substr(0, eq);
        double value = 0;
        try {
            value = std::stod(kv.substr(eq + 1));
        } catch (...) {
            throw agc::FormatError("--set " + key + ": unparsable numeric value");
        }
        if (key == "duration") {
            scenario["duration"] = value;
        } else if (key == "follower_gap") {
            scenario["follower"]["initial_gap"] = value;
        } else if (key == "follower_speed") {
            scenario["follower"]["initial_speed"] = value;
        } else if (scenario["params"].contains(key)) {
            scenario["params"][key] = value;
            if (key == "xi_down" || key == "delta_p") {
                // keep the coupled controller margin unless it was pinned
                scenario["params"]["lambda"] = scenario["params"]["xi_down"].get<double>() +
                                               scenario["params"]["delta_p"].get<double>();
            }
        } else {
            throw agc::FormatError("--set: unknown parameter '" + key + "'");
        }
    }
}

int cmd_casestudy(const std::string& scenario_path, int runs, std::uint64_t seed,
                  const std::string& out_dir, const std::vector<std::string>& sets, double tol) {
    Manifest manifest;
    manifest.command = "casestudy";
    if (!scenario_path.empty()) manifest.inputs = {scenario_path};
    manifest.overrides = sets;
    manifest.seed = seed;
    manifest.has_seed = true;

    Json scenario_json = scenario_path.empty() ? agc::scenario_to_json(agc::default_scenario())
                                               : agc::load_json_file(scenario_path);
    apply_overrides(scenario_json, sets);
    agc::Scenario scenario = agc::scenario_from_json(scenario_json);
    for (const std::string& w : agc::check_params(scenario.params)) {
        std::cerr << "warning: " << w << "\n";
    }

    fs::create_directories(out_dir);
    fs::create_directories(fs::path(out_dir) / "traces");
    agc::save_json_file((fs::path(out_dir) / "scenario.json").string(),
                        agc::scenario_to_json(scenario));

    // Stage 1: compositional refinement at the delayed-guarantee horizon.
    agc::CascadeTriple triple = agc::build_cascade(scenario.params);
    agc::RefinementVerdict refine = agc::check_refinement(triple, {2, 2}, tol);
    Json refine_report;
    refine_report["verdict"] = agc::verdict_to_json(refine);
    refine_report["manifest"] = manifest.to_json(refine.holds ? "holds" : "fails");
    agc::save_json_file((fs::path(out_dir) / "refine.json").string(), refine_report);
    std::cout << "refine: " << (refine.holds ? "holds" : "FAILS") << " (rho_D "
              << fmt_extreal(refine.rho_d) << ", rho_otimes " << fmt_extreal(refine.rho_otimes)
              << ", rho_Omega " << fmt_extreal(refine.rho_omega) << ")\n";
    if (!refine.holds) return 10;

    // Stage 2: the closed-loop follower satisfies the dynamics contract.
    auto [sys, init] = agc::build_follower_system(scenario.params);
    agc::SatisfactionVerdict satisfy =
        agc::check_satisfaction(sys, agc::build_contract_c2(scenario.params), init, tol);
    Json satisfy_report;
    satisfy_report["verdict"] = agc::satisfaction_to_json(satisfy);
    satisfy_report["manifest"] = manifest.to_json(satisfy.holds ? "holds" : "fails");
    agc::save_json_file((fs::path(out_dir) / "satisfy.json").string(), satisfy_report);
    std::cout << "satisfy: " << (satisfy.holds ? "holds" : "FAILS") << " (" << satisfy.lp_count
              << " LPs)\n";
    if (!satisfy.holds) return 11;

    // Stage 3: Monte-Carlo simulation.
    std::vector<agc::SimulationTrace> traces = agc::simulate(scenario, seed, runs);
    double min_composite = std::numeric_limits<double>::infinity();
    double min_measured = std::numeric_limits<double>::infinity();
    Json per_run = Json::array();
    std::ofstream plots(fs::path(out_dir) / "plots.csv");
    plots << "run,k,t,headway_ratio,v_f\n";
    for (const agc::SimulationTrace& tr : traces) {
        char name[32];
        std::snprintf(name, sizeof(name), "run_%03d.csv", tr.run_index);
        std::ofstream csv(fs::path(out_dir) / "traces" / name);
        agc::write_trace_csv(tr, csv);

        agc::TraceReport rep = agc::evaluate_trace(tr, scenario.params);
        min_composite = std::min(min_composite, rep.min_composite_margin);
        min_measured = std::min(min_measured, rep.min_measured_margin);
        Json run_json = agc::trace_report_to_json(rep);
        run_json["run"] = tr.run_index;
        per_run.push_back(std::move(run_json));

        for (size_t k = 0; k < tr.steps.size(); ++k) {
            const agc::TraceStep& s = tr.steps[k];
            plots << tr.run_index << ',' << s.k << ',' << csv_number(s.k * scenario.params.dt)
                  << ','
                  << (std::isinf(rep.headway_ratio[k]) ? std::string("inf")
                                                       : csv_number(rep.headway_ratio[k]))
                  << ',' << csv_number(s.v_f) << '\n';
        }
    }
    const bool safe = min_composite >= -1e-9 && min_measured >= -1e-9;
    std::cout << "simulate: " << runs << " runs, min composite margin " << min_composite
              << " m, min measured margin " << min_measured << " m -> "
              << (safe ? "guarantees kept" : "GUARANTEE VIOLATED") << "\n";

    Json summary;
    summary["scenario"] = agc::scenario_to_json(scenario);
    summary["runs"] = runs;
    summary["per_run"] = std::move(per_run);
    summary["aggregate"] = {{"min_composite_margin", min_composite},
                            {"min_measured_margin", min_measured},
                            {"all_guarantees_hold", safe}};
    summary["verification"] = {{"refine_holds", refine.holds}, {"satisfy_holds", satisfy.holds}};
    summary["status"] = safe ? "verified+simulated" : "simulation-violation";
    summary["manifest"] = manifest.to_json(summary["status"].get<std::string>());
    agc::save_json_file((fs::path(out_dir) / "summary.json").string(), summary);

    return safe ? 0 : 12;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "linear assume/guarantee contract verification\n"
        "exit codes: 0 holds, 1 fails, 2 input error, 3 solver failure,\n"
        "4 capability limit; casestudy stages: 10 refine, 11 satisfy, 12 simulation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("agcheck ") + AGC_VERSION);

    double tol = default_tolerance();

    auto* refine = app.add_subcommand("refine", "check cascaded contract refinement");
    std::string c1_path, c2_path, c_path, horizon_ii = "auto", horizon_iii = "auto";
    std::string refine_report;
    bool check_extend = false;
    refine->add_option("c1", c1_path, "upstream contract JSON")->required();
    refine->add_option("c2", c2_path, "downstream contract JSON")->required();
    refine->add_option("c", c_path, "composite contract JSON")->required();
    refine->add_option("--horizon-ii", horizon_ii, "window length for implication ii (1, 2, auto)");
    refine->add_option("--horizon-iii", horizon_iii,
                       "window length for implication iii (1, 2, auto)");
    refine->add_option("--tol", tol, "non-positivity tolerance (env AGCHECK_TOL)");
    refine->add_flag("--check-extendability", check_extend,
                     "verify the window-extension hypotheses and warn when unsupported");
    refine->add_option("--report", refine_report, "write a JSON report here");

    auto* satisfy = app.add_subcommand("satisfy", "check affine system satisfaction");
    std::string system_path, contract_path, init_path, satisfy_report;
    satisfy->add_option("system", system_path, "affine system JSON")->required();
    satisfy->add_option("contract", contract_path, "contract JSON")->required();
    satisfy->add_option("init", init_path, "initial set JSON")->required();
    satisfy->add_option("--tol", tol, "non-positivity tolerance (env AGCHECK_TOL)");
    satisfy->add_option("--report", satisfy_report, "write a JSON report here");

    auto* extend = app.add_subcommand("extend", "check a (V1, V0, v0) extension hypothesis");
    std::string triple_path, extend_report;
    extend->add_option("triple", triple_path, "constraint triple JSON")->required();
    extend->add_option("--report", extend_report, "write a JSON report here");

    auto* casestudy = app.add_subcommand("casestudy", "run the vehicle-following study");
    std::string scenario_path, out_dir = "casestudy-out";
    int runs = 100;
    std::uint64_t seed = 42;
    std::vector<std::string> sets;
    casestudy->add_option("scenario", scenario_path, "scenario JSON (defaults to built-in)");
    casestudy->add_option("--runs", runs, "number of Monte-Carlo runs");
    casestudy->add_option("--seed", seed, "PRNG seed");
    casestudy->add_option("--out", out_dir, "output directory");
    casestudy->add_option("--set", sets, "override a parameter, e.g. --set delta_p=0.4");
    casestudy->add_option("--tol", tol, "verification tolerance (env AGCHECK_TOL)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (refine->parsed()) {
            return cmd_refine(c1_path, c2_path, c_path, horizon_ii, horizon_iii, tol, check_extend,
                              refine_report);
        }
        if (satisfy->parsed()) {
            return cmd_satisfy(system_path, contract_path, init_path, tol, satisfy_report);
        }
        if (extend->parsed()) {
            return cmd_extend(triple_path, extend_report);
        }
        if (casestudy->parsed()) {
            return cmd_casestudy(scenario_path, runs, seed, out_dir, sets, tol);
        }
    } catch (const agc::SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const agc::CapabilityError& e) {
        std::cerr << "capability error: " << e.what() << "\n";
        return 4;
    } catch (const agc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
