// qdtsim: detection-time statistics for a particle in a harmonic waveguide
// terminated by an absorbing detector (CAP or absorbing boundary condition),
// with Bohmian trajectory cross-validation.
//
// Verbs:
//   run <config>       single run, writes series.csv / arrivals.csv / summary.txt
//   sweep <config>     one run per sweep.values entry plus a collated table
//   converge <config>  reruns at refined dt / Nz / NxNy and reports eps_rel
//   units              dimensionless <-> SI translation

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qdt/runner.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitOracle = 4;

int dispatch(const std::function<void()>& body) {
    try {
        body();
        return 0;
    } catch (const qdt::ConfigError& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return kExitConfig;
    } catch (const qdt::SolverFailure& e) {
        std::cerr << "error: solver: " << e.what() << "\n";
        return kExitSolver;
    } catch (const qdt::OracleInvalid& e) {
        std::cerr << "error: oracle: " << e.what() << "\n";
        return kExitOracle;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"detection-time simulation for an absorbing waveguide terminator"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::vector<std::string> overrides;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config_path, "configuration file")->required();
        sub->add_option("--set", overrides, "override a key, e.g. --set numerics.dt=1e-4");
        sub->add_option("--out", out_dir, "output directory (overrides outputs.dir)");
    };

    CLI::App* cmd_run = app.add_subcommand("run", "execute one configured run");
    add_common(cmd_run);
    CLI::App* cmd_sweep = app.add_subcommand("sweep", "run a parameter sweep");
    add_common(cmd_sweep);
    std::string sweep_axis;
    std::string sweep_values;
    cmd_sweep->add_option("--axis", sweep_axis, "sweep axis (omega, w, theta, kappa)");
    cmd_sweep->add_option("--values", sweep_values, "comma-separated sweep values");
    CLI::App* cmd_conv = app.add_subcommand("converge", "refinement check on mu_star");
    add_common(cmd_conv);

    CLI::App* cmd_units = app.add_subcommand("units", "dimensionless <-> SI translation");
    double d_phys = 2e-6, mass = 1.44316e-25, value = 1.0;
    std::string kind = "time";
    cmd_units->add_option("--d-phys", d_phys, "slab width in meters")->capture_default_str();
    cmd_units->add_option("--mass", mass, "particle mass in kg")->capture_default_str();
    cmd_units->add_option("--value", value, "dimensionless value")->capture_default_str();
    cmd_units
        ->add_option("--kind", kind, "quantity kind: length, time, frequency, kappa")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    auto load = [&]() {
        qdt::RunConfig cfg = qdt::parse_config_file(config_path, overrides);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        return cfg;
    };

    if (cmd_run->parsed()) {
        return dispatch([&] {
            qdt::RunConfig cfg = load();
            const qdt::RunResult r = qdt::run(cfg);
            std::printf("detection_fraction = %.6f\n", r.detection_fraction);
            std::printf("mu_star = %.6f\n", r.mu_star);
            if (r.has_trajectories)
                std::printf("arrived = %zu  absorbed = %zu  timed_out = %zu\n", r.arrived,
                            r.absorbed, r.timed_out);
            if (cfg.free_run)
                std::printf("note: model=free is a detector-free comparison scenario, not a "
                            "detector prediction\n");
            std::printf("artifacts: %s\n", cfg.out_dir.c_str());
        });
    }
    if (cmd_sweep->parsed()) {
        return dispatch([&] {
            qdt::RunConfig cfg = load();
            if (!sweep_axis.empty()) cfg.sweep_axis = sweep_axis;
            if (!sweep_values.empty()) {
                cfg.sweep_values.clear();
                std::stringstream ss(sweep_values);
                std::string item;
                while (std::getline(ss, item, ','))
                    if (!item.empty()) cfg.sweep_values.push_back(std::stod(item));
            }
            const qdt::SweepResult s = qdt::sweep(cfg);
            std::printf("%-12s %-20s %-20s\n", "value", "detection_fraction", "mu_star");
            for (const auto& m : s.members)
                std::printf("%-12g %-20.6f %-20.6f\n", m.value, m.result.detection_fraction,
                            m.result.mu_star);
            if (s.omega_fit)
                std::printf("fit mu* = A + B sqrt(omega): A = %.6f, B = %.6f, rms = %.3g\n",
                            s.omega_fit->A, s.omega_fit->B, s.omega_fit->rms_residual);
        });
    }
    if (cmd_conv->parsed()) {
        return dispatch([&] {
            qdt::RunConfig cfg = load();
            const auto rows = qdt::converge(cfg);
            std::printf("%-8s %-12s %-12s %-14s %-14s %-10s\n", "axis", "base", "refined",
                        "mu_base", "mu_refined", "eps_rel");
            for (const auto& r : rows)
                std::printf("%-8s %-12s %-12s %-14.6f %-14.6f %-10.4g\n", r.axis.c_str(),
                            r.base.c_str(), r.refined.c_str(), r.mu_base, r.mu_refined,
                            r.eps_rel);
        });
    }
    // units
    return dispatch([&] {
        qdt::SiKind k;
        if (kind == "length") k = qdt::SiKind::length;
        else if (kind == "time") k = qdt::SiKind::time;
        else if (kind == "frequency") k = qdt::SiKind::frequency;
        else if (kind == "kappa") k = qdt::SiKind::kappa;
        else throw qdt::ConfigError("units: unknown kind '" + kind + "'");
        std::printf("T_star_s = %.6g\n", qdt::si_time_unit(d_phys, mass));
        std::printf("si_value = %.6g\n", qdt::to_si(value, k, d_phys, mass));
    });
}
