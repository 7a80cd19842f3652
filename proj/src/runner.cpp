#include "qdt/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

#include "qdt/reference.hpp"

namespace qdt {

namespace fs = std::filesystem;

namespace {

GuidanceKind resolve_guidance(const RunConfig& cfg) {
    switch (cfg.guidance) {
        case RunConfig::Guidance::convective: return GuidanceKind::convective;
        case RunConfig::Guidance::pauli: return GuidanceKind::pauli;
        case RunConfig::Guidance::matched: break;
    }
    // matched current: j^C for the spinless models on scalar states, j^P
    // whenever the state is a spinor
    if (cfg.detector == DetectorKind::abc_spinor) return GuidanceKind::pauli;
    return cfg.spin_mode == SpinMode::spinor ? GuidanceKind::pauli : GuidanceKind::convective;
}

std::string format_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_summary(const fs::path& dir, const RunConfig& cfg, const RunResult& r,
                   const std::string& model_tag) {
    std::ofstream out(dir / "summary.txt");
    out << "run.status = " << (r.complete ? "ok" : "incomplete") << "\n";
    out << "run.model = " << model_tag << "\n";
    out << "result.detection_fraction = " << format_g(r.detection_fraction) << "\n";
    out << "result.mu_star = " << format_g(r.mu_star) << "\n";
    if (r.has_trajectories) {
        out << "result.mu_star_tau = " << format_g(r.mu_star_tau) << "\n";
        out << "result.arrived = " << r.arrived << "\n";
        out << "result.absorbed = " << r.absorbed << "\n";
        out << "result.timed_out = " << r.timed_out << "\n";
    }
    out << "result.final_norm_sq = " << format_g(r.final_norm_sq) << "\n";
    out << "result.max_residual = " << format_g(r.max_residual) << "\n";
    out << "result.max_wall_amplitude = " << format_g(r.max_wall_amplitude) << "\n";
    out << "result.steps = " << r.steps << "\n";
    if (cfg.si) {
        const double tstar = si_time_unit(cfg.si->d_phys, cfg.si->mass);
        out << "si.T_star_s = " << format_g(tstar) << "\n";
        out << "si.mu_star_s = " << format_g(r.mu_star * tstar) << "\n";
        out << "si.t_cutoff_s = " << format_g(cfg.t_cutoff * tstar) << "\n";
        if (cfg.detector == DetectorKind::abc_spinless ||
            cfg.detector == DetectorKind::abc_spinor)
            out << "si.kappa_per_m = "
                << format_g(to_si(cfg.kappa, SiKind::kappa, cfg.si->d_phys, cfg.si->mass))
                << "\n";
        out << "si.omega_per_s = "
            << format_g(to_si(cfg.omega, SiKind::frequency, cfg.si->d_phys, cfg.si->mass))
            << "\n";
    }
    // resolved configuration echo, sufficient to re-run
    for (const auto& [k, v] : cfg.raw) out << "config." << k << " = " << v << "\n";
    out << "config.resolved.Lx = " << format_g(cfg.free_run || cfg.geometry == GeometryKind::line1d
                                                   ? 0.0
                                                   : cfg.resolved_Lx())
        << "\n";
}

void write_snapshot(const fs::path& dir, double t, const std::vector<double>& rho) {
    char name[64];
    std::snprintf(name, sizeof(name), "snapshot_t%.6f.f64", t);
    std::ofstream out(dir / name, std::ios::binary);
    out.write(reinterpret_cast<const char*>(rho.data()),
              std::streamsize(rho.size() * sizeof(double)));
}

std::string model_tag(const RunConfig& cfg) {
    if (cfg.free_run) return "free";
    switch (cfg.detector) {
        case DetectorKind::cap: return "cap";
        case DetectorKind::abc_spinless: return "abc_spinless";
        case DetectorKind::abc_spinor: return "abc_spinor";
        case DetectorKind::none: break;
    }
    return "none";
}

RunResult run_free(const RunConfig& cfg, const fs::path& dir) {
    RhoFreeOptions opts;
    opts.margin_factor = cfg.Lz / cfg.probe_L;
    opts.hz = cfg.Lz / cfg.Nz;
    opts.dt = cfg.solver.dt;
    opts.far_wall_threshold = cfg.far_wall_threshold;
    opts.solver = cfg.solver;
    RhoFreeCurve curve = rho_free(cfg.probe_L, cfg.t_cutoff, opts);

    RunResult r;
    r.series.times = curve.times;
    r.series.rho_model = curve.rho_flux;
    r.series.rho_normloss = curve.rho_massloss;
    r.series.norm_sq.assign(curve.times.size(), 1.0);
    r.series.cum_fraction.resize(curve.times.size());
    // detected fraction here means mass past the probe
    double acc = 0.0;
    r.series.cum_fraction[0] = 0.0;
    for (std::size_t i = 1; i < curve.times.size(); ++i) {
        acc += 0.5 * (curve.rho_flux[i] + curve.rho_flux[i - 1]) *
               (curve.times[i] - curve.times[i - 1]);
        r.series.cum_fraction[i] = acc;
    }
    r.detection_fraction = acc;
    r.series.detection_fraction = acc;
    r.mu_star = restricted_mean(curve.times, curve.rho_flux, cfg.t_cutoff);
    r.series.mu_star = r.mu_star;
    r.final_norm_sq = 1.0 - acc;
    r.steps = int(curve.times.size()) - 1;

    if (cfg.n_trajectories > 0) {
        FreeArrivalOptions fo;
        fo.margin_factor = cfg.Lz / cfg.probe_L;
        fo.hz = cfg.Lz / cfg.Nz;
        fo.dt = cfg.solver.dt;
        fo.cfl = cfg.cfl;
        FreeArrivalResult fa = free_bohmian_arrivals(cfg.probe_L, cfg.theta, cfg.phi, cfg.omega,
                                                     cfg.n_trajectories, cfg.t_cutoff, cfg.seed,
                                                     fo);
        r.has_trajectories = true;
        r.arrived = fa.arrived;
        r.timed_out = fa.total - fa.arrived;
        r.arrival_taus = fa.tau;
        double acc_tau = 0.0;
        for (double t : fa.tau) acc_tau += std::min(t, cfg.t_cutoff);
        acc_tau += double(r.timed_out) * cfg.t_cutoff;
        r.mu_star_tau = acc_tau / double(fa.total);

        std::ofstream arrivals(dir / "arrivals.csv");
        arrivals << "particle_id,tau,x,y,z,status\n";
        for (std::size_t i = 0; i < fa.tau.size(); ++i)
            arrivals << i << "," << format_g(fa.tau[i]) << "," << format_g(fa.hit[i].x) << ","
                     << format_g(fa.hit[i].y) << "," << format_g(fa.hit[i].z) << ",arrived\n";
    }
    write_series_csv((dir / "series.csv").string(), r.series, cfg.series_stride, "free");
    return r;
}

} // namespace

RunResult run(const RunConfig& cfg) {
    cfg.validate();
    fs::path dir(cfg.out_dir);
    fs::create_directories(dir);

    if (cfg.free_run) {
        RunResult r = run_free(cfg, dir);
        write_summary(dir, cfg, r, "free");
        return r;
    }

    const DetectorModel det = cfg.detector_model();
    const std::string tag = model_tag(cfg);

    if (cfg.geometry == GeometryKind::line1d) {
        Line1DProblem p;
        p.Nz = cfg.Nz;
        p.hz = cfg.Lz / cfg.Nz;
        p.solver = cfg.solver;
        if (det.is_cap()) {
            p.top = Face1D::dirichlet_both;
            p.cap = det;
        } else {
            p.top = Face1D::dirichlet_bottom_robin_top;
            p.kappa = det.kappa;
        }
        RunResult r;
        try {
            Line1DResult lr = evolve_1d(p, cfg.t_cutoff);
            r.series = build_detection_series(lr.norms, std::move(lr.rho_model));
            r.max_residual = lr.max_residual;
        } catch (const SolverFailure&) {
            r.complete = false;
            write_summary(dir, cfg, r, tag);
            throw;
        }
        r.final_norm_sq = r.series.norm_sq.back();
        r.detection_fraction = r.series.detection_fraction;
        r.mu_star = r.series.mu_star;
        r.steps = int(r.series.times.size()) - 1;

        if (cfg.n_trajectories > 0) {
            // z-factorized trajectories: the convective z velocity is
            // transverse-independent, so guide 1d particles directly.
            // (Handled through the full 3d machinery only in box3d runs.)
            throw ConfigError("config: trajectories require geometry.kind = box3d "
                              "(the 1d mode covers field statistics only)");
        }
        write_series_csv((dir / "series.csv").string(), r.series, cfg.series_stride, tag);
        write_summary(dir, cfg, r, tag);
        return r;
    }

    // full 3d run
    const GridSpec grid = cfg.grid();
    const PhysicsConfig phys = cfg.physics();
    InitialStateReport rep;
    SpinorField psi = initial_state(grid, phys, &rep, cfg.strict);
    const SparseOperator H = assemble_hamiltonian(grid, phys, det);

    std::vector<double> rho_model;
    rho_model.push_back(det.is_cap() ? rho_T_capvolume(psi, det) : rho_T_flux(psi, det));

    const GuidanceKind gk = resolve_guidance(cfg);
    std::optional<TrajectoryAdvancer> advancer;
    if (cfg.n_trajectories > 0)
        advancer.emplace(sample_initial(cfg.n_trajectories, grid, phys, cfg.seed, gk), det,
                         cfg.cfl);

    double max_wall = rep.wall_amplitude;
    std::vector<double> snapshot_times = cfg.snapshot_times;
    std::sort(snapshot_times.begin(), snapshot_times.end());
    std::size_t next_snapshot = 0;

    std::ofstream traj_dump;
    if (cfg.trajectory_dump_stride > 0 && advancer) {
        traj_dump.open(dir / "trajectories.csv");
        traj_dump << "step,t,particle_id,x,y,z\n";
    }

    // scratch field wrapping the raw CN vectors for the observables
    SpinorField view(grid, phys.mode);

    std::vector<StepObserver> observers;
    observers.push_back([&](const StepView& v) {
        view.flat() = cfg.freeze_pre_step && advancer ? v.prev : v.next;
        if (advancer) {
            const GuidanceField f = build_guidance(view, gk);
            advancer->advance(f, v.t_prev, v.t - v.t_prev);
            if (cfg.trajectory_dump_stride > 0 && v.step % cfg.trajectory_dump_stride == 0) {
                const auto& e = advancer->ensemble();
                const std::size_t m =
                    std::min<std::size_t>(e.size(), std::size_t(cfg.trajectory_dump_count));
                for (std::size_t q = 0; q < m; ++q)
                    traj_dump << v.step << "," << format_g(v.t) << "," << q << ","
                              << format_g(e.pos[q].x) << "," << format_g(e.pos[q].y) << ","
                              << format_g(e.pos[q].z) << "\n";
            }
        }
        if (cfg.freeze_pre_step && advancer) view.flat() = v.next;
        rho_model.push_back(det.is_cap() ? rho_T_capvolume(view, det) : rho_T_flux(view, det));

        // lateral leak monitor, sampled sparsely
        if (v.step % 50 == 0) {
            double wall = 0.0, peak = 0.0;
            auto upc = view.up();
            for (int k = 0; k < grid.Nz; ++k)
                for (int i = 0; i < grid.Nx; ++i) {
                    wall = std::max({wall, std::abs(upc[grid.index(i, 1, k)]),
                                     std::abs(upc[grid.index(i, grid.Ny - 2, k)])});
                }
            for (int k = 0; k < grid.Nz; ++k)
                for (int j = 0; j < grid.Ny; ++j)
                    wall = std::max({wall, std::abs(upc[grid.index(1, j, k)]),
                                     std::abs(upc[grid.index(grid.Nx - 2, j, k)])});
            for (const cplx& a : view.flat()) peak = std::max(peak, std::abs(a));
            if (peak > 0) max_wall = std::max(max_wall, wall / peak);
        }
        while (next_snapshot < snapshot_times.size() &&
               v.t >= snapshot_times[next_snapshot] - 1e-12) {
            write_snapshot(dir, snapshot_times[next_snapshot], view.density());
            ++next_snapshot;
        }
    });

    RunResult r;
    PropagationResult prop;
    try {
        prop = propagate(psi.flat(), H, cfg.solver, cfg.t_cutoff, observers,
                         grid.cell_volume());
    } catch (const SolverFailure&) {
        r.complete = false;
        write_summary(dir, cfg, r, tag);
        throw;
    }

    if (cfg.strict && max_wall > 1e-8)
        throw ConfigError("run: lateral wall amplitude " + format_g(max_wall) +
                          " exceeds the 1e-8 leak threshold");

    r.series = build_detection_series(prop.norms, std::move(rho_model));
    r.final_norm_sq = r.series.norm_sq.back();
    r.detection_fraction = r.series.detection_fraction;
    r.mu_star = r.series.mu_star;
    r.max_residual = prop.max_residual;
    r.max_wall_amplitude = max_wall;
    r.steps = prop.steps;

    if (advancer) {
        advancer->finalize(cfg.t_cutoff);
        const TrajectoryEnsemble& e = advancer->ensemble();
        r.has_trajectories = true;
        r.arrived = e.count(ParticleStatus::arrived);
        r.absorbed = e.count(ParticleStatus::absorbed);
        r.timed_out = e.count(ParticleStatus::timed_out);
        r.arrival_taus = e.arrival_times();
        double acc = 0.0;
        for (std::size_t p = 0; p < e.size(); ++p)
            acc += (e.status[p] == ParticleStatus::arrived ||
                    e.status[p] == ParticleStatus::absorbed)
                       ? std::min(e.tau[p], cfg.t_cutoff)
                       : cfg.t_cutoff;
        r.mu_star_tau = acc / double(e.size());
        write_arrivals_csv((dir / "arrivals.csv").string(), e);
    }

    write_series_csv((dir / "series.csv").string(), r.series, cfg.series_stride, tag);
    write_summary(dir, cfg, r, tag);
    return r;
}

SqrtFit fit_sqrt_law(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit: need at least two points");
    double sw = double(x.size()), sx = 0, sxx = 0, sy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = std::sqrt(x[i]);
        sx += r;
        sxx += r * r;
        sy += y[i];
        sxy += r * y[i];
    }
    const double det = sw * sxx - sx * sx;
    if (std::abs(det) < 1e-300) throw std::invalid_argument("fit: degenerate abscissae");
    SqrtFit f;
    f.A = (sxx * sy - sx * sxy) / det;
    f.B = (sw * sxy - sx * sy) / det;
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (f.A + f.B * std::sqrt(x[i]));
        ss += e * e;
    }
    f.rms_residual = std::sqrt(ss / double(x.size()));
    return f;
}

namespace {

RunConfig member_config(const RunConfig& base, const std::string& axis, double value,
                        const std::string& dir) {
    RunConfig m = base;
    m.sweep_axis.clear();
    m.sweep_values.clear();
    m.out_dir = dir;
    if (axis == "omega") m.omega = value;
    else if (axis == "w") m.w = value;
    else if (axis == "theta") m.theta = value;
    else if (axis == "kappa") m.kappa = value;
    else throw ConfigError("sweep: axis must be one of omega, w, theta, kappa");
    std::ostringstream v;
    v << value;
    m.raw["sweep.member." + axis] = v.str();
    return m;
}

} // namespace

SweepResult sweep(const RunConfig& cfg) {
    if (cfg.sweep_axis.empty() || cfg.sweep_values.empty())
        throw ConfigError("sweep: sweep.axis and sweep.values are required");
    fs::path root(cfg.out_dir);
    fs::create_directories(root);

    SweepResult out;
    out.members.resize(cfg.sweep_values.size());
    const int parallel = std::max(1, cfg.sweep_parallel);

    std::vector<std::future<void>> pending;
    for (std::size_t i = 0; i < cfg.sweep_values.size(); ++i) {
        auto job = [&, i] {
            const double v = cfg.sweep_values[i];
            std::ostringstream name;
            name << cfg.sweep_axis << "=" << v;
            const std::string dir = (root / name.str()).string();
            RunConfig m = member_config(cfg, cfg.sweep_axis, v, dir);
            out.members[i] = SweepMember{v, run(m), dir};
        };
        if (parallel == 1) {
            job();
        } else {
            pending.push_back(std::async(std::launch::async, job));
            if (int(pending.size()) >= parallel) {
                for (auto& f : pending) f.get();
                pending.clear();
            }
        }
    }
    for (auto& f : pending) f.get();

    std::ofstream csv(root / "sweep.csv");
    csv << "value,detection_fraction,mu_star,mu_star_tau\n";
    for (const auto& m : out.members)
        csv << format_g(m.value) << "," << format_g(m.result.detection_fraction) << ","
            << format_g(m.result.mu_star) << ","
            << (m.result.has_trajectories ? format_g(m.result.mu_star_tau) : "") << "\n";

    if (cfg.sweep_axis == "omega" && cfg.detector == DetectorKind::abc_spinor &&
        out.members.size() >= 2) {
        std::vector<double> x, y;
        for (const auto& m : out.members) {
            x.push_back(m.value);
            y.push_back(m.result.mu_star);
        }
        out.omega_fit = fit_sqrt_law(x, y);
        std::ofstream fit(root / "sweep_fit.txt");
        fit << "fit.model = mu_star = A + B*sqrt(omega)\n";
        fit << "fit.A = " << format_g(out.omega_fit->A) << "\n";
        fit << "fit.B = " << format_g(out.omega_fit->B) << "\n";
        fit << "fit.rms_residual = " << format_g(out.omega_fit->rms_residual) << "\n";
    }
    return out;
}

std::vector<ConvergenceRow> converge(const RunConfig& cfg) {
    cfg.validate();
    fs::path root(cfg.out_dir);
    fs::create_directories(root);

    auto run_variant = [&](const std::string& name, auto mutate) {
        RunConfig m = cfg;
        m.out_dir = (root / name).string();
        mutate(m);
        return run(m).mu_star;
    };

    std::vector<ConvergenceRow> rows;
    {
        ConvergenceRow row;
        row.axis = "dt";
        row.base = format_g(cfg.solver.dt);
        row.refined = format_g(cfg.solver.dt / 2);
        row.mu_base = run_variant("base", [](RunConfig&) {});
        row.mu_refined = run_variant("dt_half", [](RunConfig& m) { m.solver.dt /= 2; });
        row.eps_rel = std::abs(row.mu_base - row.mu_refined) / std::abs(row.mu_refined);
        rows.push_back(row);
    }
    {
        ConvergenceRow row;
        row.axis = "Nz";
        row.base = std::to_string(cfg.Nz);
        row.refined = std::to_string(cfg.Nz * 2);
        row.mu_base = rows[0].mu_base;
        row.mu_refined = run_variant("Nz_x2", [](RunConfig& m) { m.Nz *= 2; });
        row.eps_rel = std::abs(row.mu_base - row.mu_refined) / std::abs(row.mu_refined);
        rows.push_back(row);
    }
    if (cfg.geometry == GeometryKind::box3d && !cfg.free_run) {
        ConvergenceRow row;
        row.axis = "NxNy";
        const int refined = int(std::lround(cfg.Nx * 1.2));
        row.base = std::to_string(cfg.Nx);
        row.refined = std::to_string(refined);
        row.mu_base = rows[0].mu_base;
        row.mu_refined = run_variant("NxNy_x1.2", [refined](RunConfig& m) {
            m.Nx = refined;
            m.Ny = refined;
        });
        row.eps_rel = std::abs(row.mu_base - row.mu_refined) / std::abs(row.mu_refined);
        rows.push_back(row);
    }

    std::ofstream csv(root / "converge.csv");
    csv << "axis,base,refined,mu_base,mu_refined,eps_rel\n";
    for (const auto& r : rows)
        csv << r.axis << "," << r.base << "," << r.refined << "," << format_g(r.mu_base) << ","
            << format_g(r.mu_refined) << "," << format_g(r.eps_rel) << "\n";
    return rows;
}

} // namespace qdt
