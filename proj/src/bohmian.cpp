#include "qdt/bohmian.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "qdt/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qdt {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

const char* to_string(ParticleStatus s) {
    switch (s) {
        case ParticleStatus::alive: return "alive";
        case ParticleStatus::arrived: return "arrived";
        case ParticleStatus::absorbed: return "absorbed";
        case ParticleStatus::timed_out: return "timed_out";
    }
    return "?";
}

std::size_t TrajectoryEnsemble::count(ParticleStatus s) const {
    std::size_t c = 0;
    for (auto st : status)
        if (st == s) ++c;
    return c;
}

std::vector<double> TrajectoryEnsemble::arrival_times() const {
    std::vector<double> out;
    for (std::size_t p = 0; p < size(); ++p)
        if (status[p] == ParticleStatus::arrived || status[p] == ParticleStatus::absorbed)
            out.push_back(tau[p]);
    return out;
}

GuidanceField build_guidance(const SpinorField& psi, GuidanceKind kind) {
    GuidanceField f;
    f.grid = &psi.grid();
    f.current = kind == GuidanceKind::pauli ? pauli_current(psi) : convective_current(psi);
    f.rho = psi.density();
    f.rho_max = 0.0;
    for (double r : f.rho) f.rho_max = std::max(f.rho_max, r);
    return f;
}

Vec3 velocity_at(const Vec3& q, const GuidanceField& f) {
    const GridSpec& g = *f.grid;
    const double rho = trilinear(g, std::span<const double>(f.rho), q);
    const double floor = kDensityFloor * f.rho_max;
    const double denom = std::max(rho, floor);
    if (denom <= 0.0) return {0.0, 0.0, 0.0};
    return {trilinear(g, std::span<const double>(f.current.jx), q) / denom,
            trilinear(g, std::span<const double>(f.current.jy), q) / denom,
            trilinear(g, std::span<const double>(f.current.jz), q) / denom};
}

TrajectoryEnsemble sample_initial(std::size_t n, const GridSpec& grid,
                                  const PhysicsConfig& physics, std::uint64_t seed,
                                  GuidanceKind guidance) {
    if (n < 1) throw ConfigError("sample_initial: ensemble size must be >= 1");
    if (physics.omega <= 0)
        throw ConfigError("sample_initial: Born sampling requires omega > 0");

    TrajectoryEnsemble e;
    e.guidance = guidance;
    e.seed = seed;
    e.pos.resize(n);
    e.prev_pos.resize(n);
    e.status.assign(n, ParticleStatus::alive);
    e.tau.assign(n, 0.0);
    e.hit.assign(n, Vec3{});
    e.survival.assign(n, 0.0);
    e.log_xi.assign(n, 0.0);

    const double sigma = std::sqrt(1.0 / (2.0 * physics.omega));
    const double cx = grid.Lx / 2.0, cy = grid.Ly / 2.0;
    const double off = grid.min_spacing() / 2.0;
    const double d = physics.d;

    for (std::size_t p = 0; p < n; ++p) {
        CounterRng rng(seed, p);
        double qx, qy;
        // transverse: resample until inside the box
        for (;;) {
            double n1, n2;
            rng.normal_pair(n1, n2);
            qx = cx + sigma * n1;
            qy = cy + sigma * n2;
            if (qx > 0.0 && qx < grid.Lx && qy > 0.0 && qy < grid.Ly) break;
        }
        // longitudinal: accept-reject on 2 sin^2(pi z/d)
        double qz;
        for (;;) {
            const double u = rng.uniform();
            const double r = 2.0 * rng.uniform();
            const double s = std::sin(kPi * u);
            if (r < 2.0 * s * s) {
                qz = u * d;
                break;
            }
        }
        // keep starts off the faces
        auto clampc = [off](double v, double hi) {
            return std::min(std::max(v, off), hi - off);
        };
        e.pos[p] = {clampc(qx, grid.Lx), clampc(qy, grid.Ly), clampc(qz, grid.Lz)};
        e.prev_pos[p] = e.pos[p];
        e.log_xi[p] = -std::log(1.0 - rng.uniform()); // -ln(Xi), Xi ~ U(0,1]
    }
    return e;
}

void rk2_advance(TrajectoryEnsemble& e, const GuidanceField& f, double dt, double cfl,
                 const std::vector<std::uint32_t>* only) {
    if (cfl <= 0.0 || cfl >= 1.0) throw ConfigError("rk2_advance: cfl must be in (0,1)");
    const double hmin = f.grid->min_spacing();
    const double vmax1 = cfl * hmin / (dt / 2.0);
    const double vmax2 = cfl * hmin / dt;
    auto cap = [](Vec3 v, double vmax) {
        const double s = v.norm();
        return s > vmax ? v * (vmax / s) : v;
    };

    const std::int64_t count = only ? std::int64_t(only->size()) : std::int64_t(e.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t idx = 0; idx < count; ++idx) {
        const std::size_t p = only ? (*only)[std::size_t(idx)] : std::size_t(idx);
        if (e.status[p] != ParticleStatus::alive) continue;
        const Vec3 q0 = e.pos[p];
        const Vec3 k1 = cap(velocity_at(q0, f), vmax1);
        const Vec3 qmid = q0 + k1 * (dt / 2.0);
        const Vec3 k2 = cap(velocity_at(qmid, f), vmax2);
        e.prev_pos[p] = q0;
        e.pos[p] = q0 + k2 * dt;
    }
}

void detect_first_hit(TrajectoryEnsemble& e, double plane_z, double t0, double dt,
                      const std::vector<std::uint32_t>* only) {
    const std::size_t count = only ? only->size() : e.size();
    for (std::size_t idx = 0; idx < count; ++idx) {
        const std::size_t p = only ? (*only)[idx] : idx;
        if (e.status[p] != ParticleStatus::alive) continue;
        const double z0 = e.prev_pos[p].z;
        const double z1 = e.pos[p].z;
        if (z0 >= plane_z || z1 < plane_z) continue;
        const double m = (plane_z - z0) / (z1 - z0); // in (0, 1]
        Vec3 hit = e.prev_pos[p] + (e.pos[p] - e.prev_pos[p]) * m;
        hit.z = plane_z;
        e.status[p] = ParticleStatus::arrived;
        e.tau[p] = t0 + m * dt;
        e.hit[p] = hit;
        e.pos[p] = hit; // pinned on the plane
    }
}

void cap_terminate(TrajectoryEnsemble& e, const DetectorModel& detector, double t0, double dt,
                   const std::vector<std::uint32_t>* only) {
    const std::size_t count = only ? only->size() : e.size();
    for (std::size_t idx = 0; idx < count; ++idx) {
        const std::size_t p = only ? (*only)[idx] : idx;
        if (e.status[p] != ParticleStatus::alive) continue;
        const double zmid = 0.5 * (e.prev_pos[p].z + e.pos[p].z);
        const double rate = (2.0 / kHbar) * cap_profile(zmid, detector);
        if (rate <= 0.0) continue;
        const double before = e.survival[p];
        const double after = before + rate * dt;
        e.survival[p] = after;
        if (after >= e.log_xi[p]) {
            // crossing fraction in log-survival (exact for piecewise-constant W)
            const double frac = (e.log_xi[p] - before) / (after - before);
            e.status[p] = ParticleStatus::absorbed;
            e.tau[p] = t0 + frac * dt;
            e.hit[p] = e.prev_pos[p] + (e.pos[p] - e.prev_pos[p]) * frac;
            e.survival[p] = e.log_xi[p];
        }
    }
}

TrajectoryAdvancer::TrajectoryAdvancer(TrajectoryEnsemble ensemble, DetectorModel detector,
                                       double cfl)
    : ensemble_(std::move(ensemble)), detector_(std::move(detector)), cfl_(cfl) {}

void TrajectoryAdvancer::advance(const GuidanceField& f, double t0, double dt) {
    const GridSpec& g = *f.grid;
    if (detector_.is_abc()) {
        const double plane = g.counting_plane_z();
        near_.clear();
        far_.clear();
        for (std::size_t p = 0; p < ensemble_.size(); ++p) {
            if (ensemble_.status[p] != ParticleStatus::alive) continue;
            (ensemble_.pos[p].z > plane - 2.0 * g.hz ? near_ : far_)
                .push_back(std::uint32_t(p));
        }
        rk2_advance(ensemble_, f, dt, cfl_, &far_);
        detect_first_hit(ensemble_, plane, t0, dt, &far_);
        // two half-dt calls close to the plane so a capped step cannot jump
        // the bracket test
        rk2_advance(ensemble_, f, dt / 2.0, cfl_, &near_);
        detect_first_hit(ensemble_, plane, t0, dt / 2.0, &near_);
        rk2_advance(ensemble_, f, dt / 2.0, cfl_, &near_);
        detect_first_hit(ensemble_, plane, t0 + dt / 2.0, dt / 2.0, &near_);
    } else if (detector_.is_cap()) {
        rk2_advance(ensemble_, f, dt, cfl_);
        cap_terminate(ensemble_, detector_, t0, dt);
    } else {
        rk2_advance(ensemble_, f, dt, cfl_);
    }
}

void TrajectoryAdvancer::finalize(double t_end) {
    for (std::size_t p = 0; p < ensemble_.size(); ++p)
        if (ensemble_.status[p] == ParticleStatus::alive) {
            ensemble_.status[p] = ParticleStatus::timed_out;
            ensemble_.tau[p] = t_end;
        }
}

void write_arrivals_csv(const std::string& path, const TrajectoryEnsemble& e) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::fprintf(f, "particle_id,tau,x,y,z,status\n");
    for (std::size_t p = 0; p < e.size(); ++p) {
        const bool terminal = e.status[p] == ParticleStatus::arrived ||
                              e.status[p] == ParticleStatus::absorbed;
        const Vec3& q = terminal ? e.hit[p] : e.pos[p];
        if (terminal)
            std::fprintf(f, "%zu,%.17g,%.17g,%.17g,%.17g,%s\n", p, e.tau[p], q.x, q.y, q.z,
                         to_string(e.status[p]));
        else
            std::fprintf(f, "%zu,,%.17g,%.17g,%.17g,%s\n", p, q.x, q.y, q.z,
                         to_string(e.status[p]));
    }
    std::fclose(f);
}

} // namespace qdt
