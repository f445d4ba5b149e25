#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sps/sps.hpp"

namespace fs = std::filesystem;
using namespace sps;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 1;
constexpr int exit_not_converged = 2;

struct Overrides {
    std::string config_path;
    std::optional<double> p, lambda;
    std::optional<int> resolution;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
};

RunConfig load_config(const Overrides& ov) {
    RunConfig c = ov.config_path.empty() ? RunConfig{} : parse_config_text(io::read_file(ov.config_path));
    if (ov.p) c.params.p = *ov.p;
    if (ov.lambda) c.params.lambda = *ov.lambda;
    if (ov.resolution) c.resolution = *ov.resolution;
    if (ov.seed) c.solver.seed = *ov.seed;
    if (ov.out) c.output = *ov.out;
    c.validate();
    return c;
}

json point_json(const Point& x) { return json::array({x[0], x[1], x[2]}); }

json energy_json(const EnergyBreakdown& e) {
    return {{"dirichlet", e.dirichlet}, {"mass", e.mass}, {"h1", e.h1},         {"coupling", e.coupling},
            {"lp", e.lp},               {"I", e.I},       {"G", e.G},           {"I_constrained", e.I_constrained}};
}

std::string trace_csv(const GroundState& gs) {
    std::string out = "iteration,I,G_abs,ps_residual,step\n";
    for (const auto& t : gs.trace)
        out += std::to_string(t.iteration) + "," + io::format_double(t.I) + "," + io::format_double(t.G_abs) + "," +
               io::format_double(t.ps_residual) + "," + io::format_double(t.step) + "\n";
    return out;
}

std::string ground_state_csv(const GroundState& gs, const ProblemParams& params, int resolution) {
    std::string out = "p,lambda,resolution,m,nehari_residual,ps_residual,iterations,converged,h1,coupling,lp\n";
    out += io::format_double(params.p) + "," + io::format_double(params.lambda) + "," + std::to_string(resolution) +
           "," + io::format_double(gs.m) + "," + io::format_double(gs.nehari_residual) + "," +
           io::format_double(gs.ps_residual) + "," + std::to_string(gs.iterations) + "," + (gs.converged ? "1" : "0") +
           "," + io::format_double(gs.energy.h1) + "," + io::format_double(gs.energy.coupling) + "," +
           io::format_double(gs.energy.lp) + "\n";
    return out;
}

int cmd_ground_state(const RunConfig& c, RunManifest& man, const fs::path& dir) {
    const GridPtr grid = build_grid(c.domain, c.resolution);
    int status = exit_ok;
    GroundState gs = [&] {
        try {
            return find_ground_state(grid, c.params, c.solver);
        } catch (const NotConvergedError& e) {
            man.add_error(e);
            status = exit_not_converged;
            return e.best();
        }
    }();
    const auto conc = concentration_diagnostic(gs.u);
    man.results() = {{"m", gs.m},
                     {"nehari_residual", gs.nehari_residual},
                     {"ps_residual", gs.ps_residual},
                     {"tolerance", gs.tolerance},
                     {"iterations", gs.iterations},
                     {"converged", gs.converged},
                     {"interior_nodes", grid->interior_count()},
                     {"spacing", grid->spacing()},
                     {"energy", energy_json(gs.energy)},
                     {"peak", conc.peak},
                     {"R_est", conc.R_est},
                     {"barycenter", point_json(barycenter(gs.u))}};
    man.add_file(dir, "ground_state.csv", ground_state_csv(gs, c.params, c.resolution));
    man.add_file(dir, "trace.csv", trace_csv(gs));
    man.add_file(dir, "u.vtk", io::vtk_structured_points(gs.u, "u"));
    std::printf("m = %.12g  nehari residual = %.3g  ps residual = %.3g  iterations = %d  converged = %s\n", gs.m,
                gs.nehari_residual, gs.ps_residual, gs.iterations, gs.converged ? "yes" : "no");
    return status;
}

int cmd_poisson_check(const RunConfig& c, RunManifest& man, const fs::path& dir) {
    const GridPtr grid = build_grid(c.domain, c.resolution);
    const auto samples = poisson_identity_suite(grid, 20, c.solver.seed, c.params.poisson_tol);
    std::string csv = "seed,coupling,green,green_rel_error,min_phi_rel,gradient_ratio,residual,cg_iterations\n";
    double worst_green = 0.0, worst_min = 0.0, max_ratio = 0.0;
    for (const auto& s : samples) {
        csv += std::to_string(s.seed) + "," + io::format_double(s.coupling) + "," + io::format_double(s.green) + "," +
               io::format_double(s.green_rel_error) + "," + io::format_double(s.min_phi_rel) + "," +
               io::format_double(s.gradient_ratio) + "," + io::format_double(s.residual) + "," +
               std::to_string(s.cg_iterations) + "\n";
        worst_green = std::max(worst_green, s.green_rel_error);
        worst_min = std::min(worst_min, s.min_phi_rel);
        max_ratio = std::max(max_ratio, s.gradient_ratio);
    }
    man.results() = {{"samples", samples.size()},
                     {"max_green_rel_error", worst_green},
                     {"min_phi_rel", worst_min},
                     {"gradient_bound_constant", max_ratio},
                     {"green_ok", worst_green <= 10.0 * c.params.poisson_tol},
                     {"positivity_ok", worst_min >= -1e-10}};
    man.add_file(dir, "poisson_check.csv", csv);
    std::printf("Green identity: max rel error %.3g; min phi / ||u||^2 = %.3g; gradient bound constant %.4g\n",
                worst_green, worst_min, max_ratio);
    return exit_ok;
}

int cmd_sweep_p(const RunConfig& c, RunManifest& man, const fs::path& dir) {
    const GridPtr grid = build_grid(c.domain, c.resolution);
    const auto records = sweep_p(grid, c.params, c.p_list, c.solver);
    const double m_star = critical_level(sobolev_constant(10000).S);
    const double r = c.transplant_radius();

    json rows = json::array();
    bool all_converged = true;
    for (const auto& rec : records) {
        all_converged = all_converged && rec.converged;
        json row = {{"p", rec.p}, {"m_p", rec.m_p}, {"m_tilde_p", rec.m_tilde_p}, {"m_star_margin", m_star - rec.m_p},
                    {"t_star_full", rec.t_star_full}, {"h1_norm", rec.h1_norm}};
        try {
            const double m_pr = compute_radial_profile(r, c.params.with_p(rec.p), grid->spacing(), c.solver).m_ball;
            row["m_pr"] = m_pr;
            row["k_p"] = m_pr - rec.m_p;
        } catch (const Error& e) {
            man.add_error(e);
        }
        rows.push_back(row);
    }
    man.results() = {{"m_star", m_star}, {"r", r}, {"resolution", c.resolution}, {"records", rows}};
    man.add_file(dir, "sweep.csv", io::sweep_csv(records));
    std::printf("resolution %d, m_* = %.10g\n", c.resolution, m_star);
    for (const auto& rec : records)
        std::printf("  p = %.3f  m_p = %.8g  m~_p = %.8g  t* = %.6g  R_est = %.4g  %s\n", rec.p, rec.m_p, rec.m_tilde_p,
                    rec.t_star_full, rec.R_est, rec.converged ? "" : "(not converged)");
    if (!all_converged) {
        man.add_error(Error(ErrorCode::not_converged, "at least one sweep entry did not converge"));
        return exit_not_converged;
    }
    return exit_ok;
}

int cmd_instanton(const RunConfig&, RunManifest& man, const fs::path& dir) {
    const auto q = sobolev_constant(10000);
    const double m_star = critical_level(q.S);
    const double identity = std::abs(m_star - std::pow(q.S, 1.5) / 3.0);
    std::string csv = "R,peak,peak_closed_form,S,grad_energy,crit_norm\n";
    for (double R : {0.5, 1.0, 2.0, 10.0}) {
        const auto qr = sobolev_constant(10000, R);
        const Instanton inst{R, {0.0, 0.0, 0.0}};
        csv += io::format_double(R) + "," + io::format_double(inst({0.0, 0.0, 0.0})) + "," +
               io::format_double(std::pow(3.0, 0.25) / std::sqrt(R)) + "," + io::format_double(qr.S) + "," +
               io::format_double(qr.grad_energy) + "," + io::format_double(qr.crit_norm) + "\n";
    }
    man.results() = {{"S", q.S},
                     {"m_star", m_star},
                     {"grad_energy", q.grad_energy},
                     {"crit_norm", q.crit_norm},
                     {"tail_bound", q.tail_bound},
                     {"identity_error", identity}};
    man.add_file(dir, "instanton.csv", csv);
    std::printf("S = %.15g\nm_* = %.15g\n|m_* - S^(3/2)/3| = %.3g\n", q.S, m_star, identity);
    return exit_ok;
}

int cmd_multiplicity(const RunConfig& c, RunManifest& man, const fs::path& dir) {
    const GridPtr grid = build_grid(c.domain, c.resolution);
    const double r = c.transplant_radius();
    TransplantCache cache;
    const auto cat =
        multistart_search(grid, c.params, r, c.multistart.n_centers, c.solver, &cache, {c.multistart.tolerances});

    json starts = json::array();
    std::string starts_csv = "center,cx,cy,cz,transplant_energy,m,iterations,converged\n";
    for (std::size_t i = 0; i < cat.starts.size(); ++i) {
        const auto& s = cat.starts[i];
        starts_csv += std::to_string(i) + "," + io::format_double(s.center[0]) + "," + io::format_double(s.center[1]) +
                      "," + io::format_double(s.center[2]) + "," + io::format_double(s.transplant_energy) + "," +
                      io::format_double(s.m) + "," + std::to_string(s.iterations) + "," + (s.converged ? "1" : "0") +
                      "\n";
        if (!s.error.empty()) starts.push_back({{"center", i}, {"error", s.error}});
    }
    const int bound = cat.category + 1;
    man.results() = {{"distinct_solutions", cat.size()},
                     {"category", cat.category},
                     {"category_bound", bound},
                     {"r", r},
                     {"m_ground", cat.m_ground},
                     {"m_pr", cat.m_pr},
                     {"profile_radiality", cat.profile_radiality},
                     {"orbit_notes", cat.orbit_notes},
                     {"failed_starts", starts}};
    man.add_file(dir, "catalog.csv", io::catalog_csv(cat));
    man.add_file(dir, "starts.csv", starts_csv);
    for (std::size_t i = 0; i < cat.entries.size(); ++i)
        man.add_file(dir, "solution_" + std::to_string(i) + ".vtk", io::vtk_structured_points(cat.entries[i].state.u));
    std::printf("found %zu distinct solutions; category bound cat+1 = %d\n", cat.size(), bound);
    for (const auto& note : cat.orbit_notes) std::printf("  note: %s\n", note.c_str());
    return exit_ok;
}

int cmd_gradcheck(const RunConfig& c, RunManifest& man, const fs::path& dir) {
    const GridPtr grid = build_grid(c.domain, c.resolution);
    ProblemParams params = c.params;
    params.poisson_tol = std::min(params.poisson_tol, 1e-13);
    std::string csv = "seed,p,directional,finite_difference,rel_error\n";
    double worst = 0.0;
    for (double p : {4.5, 5.5}) {
        for (const auto& s : gradient_audit(grid, params.with_p(p), 10, c.solver.seed)) {
            csv += std::to_string(s.seed) + "," + io::format_double(s.p) + "," + io::format_double(s.directional) +
                   "," + io::format_double(s.finite_difference) + "," + io::format_double(s.rel_error) + "\n";
            worst = std::max(worst, s.rel_error);
        }
    }
    man.results() = {{"max_rel_error", worst}, {"passed", worst <= 1e-5}};
    man.add_file(dir, "gradcheck.csv", csv);
    std::printf("gradient audit: max relative error %.3g (%s)\n", worst, worst <= 1e-5 ? "ok" : "above 1e-5");
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nehari-manifold solver for the Schrodinger-Poisson-Slater system on bounded 3D domains"};
    app.require_subcommand(1);
    Overrides ov;
    std::string command;

    using Handler = int (*)(const RunConfig&, RunManifest&, const fs::path&);
    const std::vector<std::tuple<std::string, std::string, Handler>> commands{
        {"ground-state", "ground state and field export", cmd_ground_state},
        {"poisson-check", "Poisson identity suite", cmd_poisson_check},
        {"sweep-p", "ground states across exponents p, written as CSV", cmd_sweep_p},
        {"instanton", "Sobolev constant and critical level", cmd_instanton},
        {"multiplicity", "multi-start search for distinct positive solutions", cmd_multiplicity},
        {"gradcheck", "finite-difference audit of the gradient", cmd_gradcheck},
    };
    for (const auto& [name, help, fn] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", ov.config_path, "JSON run configuration")->check(CLI::ExistingFile);
        sub->add_option("--p", ov.p, "exponent p in (4, 6)");
        sub->add_option("--lambda", ov.lambda, "coupling lambda >= 0");
        sub->add_option("--resolution", ov.resolution, "nodes per axis");
        sub->add_option("--seed", ov.seed, "random seed");
        sub->add_option("--out", ov.out, "output directory");
        sub->callback([&command, n = name] { command = n; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? exit_ok : exit_config;
    }

    RunConfig config;
    try {
        config = load_config(ov);
    } catch (const Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    }

    const fs::path dir = config.output;
    RunManifest man(command, config);
    int status = exit_ok;
    try {
        for (const auto& [name, help, fn] : commands)
            if (name == command) status = fn(config, man, dir);
    } catch (const NotConvergedError& e) {
        man.add_error(e);
        std::cerr << e.what() << "\n";
        status = exit_not_converged;
    } catch (const Error& e) {
        man.add_error(e);
        std::cerr << e.what() << "\n";
        status = e.code() == ErrorCode::config_error ? exit_config : 3;
    }
    man.results()["exit_status"] = status;
    try {
        man.write(dir);
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return 3;
    }
    return status;
}
