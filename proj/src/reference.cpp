#include "qdt/reference.hpp"

#include <cmath>
#include <cstdio>

#include "qdt/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qdt {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<cplx> initial_line_state(int Nz, double hz, double d) {
    std::vector<cplx> psi(std::size_t(Nz), cplx(0, 0));
    for (int k = 0; k < Nz; ++k) {
        const double z = k * hz;
        if (z > 0.0 && z < d) psi[std::size_t(k)] = std::sin(kPi * z / d);
    }
    double n2 = 0.0;
    for (const cplx& v : psi) n2 += std::norm(v);
    n2 *= hz;
    if (n2 <= 0.0) throw ConfigError("line problem: initial profile vanishes on this grid");
    const double s = 1.0 / std::sqrt(n2);
    for (cplx& v : psi) v *= s;
    return psi;
}

SparseOperator line_hamiltonian(const Line1DProblem& p) {
    SparseOperator lap = assemble_laplacian_1d(p.Nz, p.hz, p.top, p.kappa);
    if (!p.cap) return lap;
    std::vector<Triplet> t;
    t.reserve(lap.nnz() + std::size_t(p.Nz));
    for (std::size_t r = 0; r < lap.dim(); ++r)
        for (std::int64_t m = lap.row_ptr()[r]; m < lap.row_ptr()[r + 1]; ++m)
            t.push_back({std::int64_t(r), lap.cols()[std::size_t(m)],
                         lap.values()[std::size_t(m)]});
    const int top_pinned = p.top == Face1D::dirichlet_both ? 1 : 0;
    for (int k = 1; k < p.Nz - top_pinned; ++k) {
        const double W = cap_profile(k * p.hz, *p.cap);
        if (W != 0.0) t.push_back({k, k, cplx(0.0, -W)});
    }
    return SparseOperator::from_triplets(lap.dim(), std::move(t));
}

// j_z at a node from the longitudinal stencil family.
double node_flux(std::span<const cplx> psi, int k, double hz) {
    const int n = int(psi.size());
    cplx d;
    if (k == 0)
        d = (psi[1] - psi[0]) / hz;
    else if (k == n - 1)
        d = (psi[std::size_t(n - 1)] - psi[std::size_t(n - 2)]) / hz;
    else
        d = (psi[std::size_t(k + 1)] - psi[std::size_t(k - 1)]) / (2.0 * hz);
    return (kHbar / kMass) * std::imag(std::conj(psi[std::size_t(k)]) * d);
}

double mass_below(std::span<const cplx> psi, int k, double hz) {
    double s = 0.0;
    for (int i = 0; i < k; ++i) s += std::norm(psi[std::size_t(i)]);
    s += 0.5 * std::norm(psi[std::size_t(k)]);
    return s * hz;
}

} // namespace

Line1DResult evolve_1d(const Line1DProblem& p, double t_cutoff, std::optional<int> probe_node) {
    if (p.Nz < 4) throw ConfigError("line problem: Nz must be >= 4");
    if (p.cap && p.cap->kind != DetectorKind::cap)
        throw ConfigError("line problem: detector must be a CAP profile");
    if (probe_node && (*probe_node < 1 || *probe_node >= p.Nz - 1))
        throw ConfigError("line problem: probe node must be interior");

    const SparseOperator H = line_hamiltonian(p);
    std::vector<cplx> psi = initial_line_state(p.Nz, p.hz, p.d);

    Line1DResult out;
    const bool robin = p.top == Face1D::dirichlet_bottom_robin_top;
    auto record_model = [&](const std::vector<cplx>& f) {
        if (p.cap) {
            double s = 0.0;
            for (int k = 0; k < p.Nz; ++k)
                s += cap_profile(k * p.hz, *p.cap) * std::norm(f[std::size_t(k)]);
            out.rho_model.push_back((2.0 / kHbar) * s * p.hz);
        } else if (robin) {
            out.rho_model.push_back((kHbar * p.kappa / kMass) *
                                    std::norm(f[std::size_t(p.Nz - 1)]));
        }
    };
    auto record_probe = [&](const std::vector<cplx>& f) {
        if (!probe_node) return;
        out.probe_flux.push_back(node_flux(f, *probe_node, p.hz));
        out.probe_mass.push_back(mass_below(f, *probe_node, p.hz));
    };
    auto record_wall = [&](const std::vector<cplx>& f) {
        const double occ =
            (std::norm(f[std::size_t(p.Nz - 1)]) + std::norm(f[std::size_t(p.Nz - 2)])) * p.hz;
        out.wall_occupancy.push_back(occ);
        out.max_far_wall = std::max(out.max_far_wall, occ);
    };

    record_model(psi);
    record_probe(psi);
    record_wall(psi);

    std::vector<StepObserver> observers;
    observers.push_back([&](const StepView& v) {
        record_model(v.next);
        record_probe(v.next);
        record_wall(v.next);
    });

    PropagationResult prop = propagate(psi, H, p.solver, t_cutoff, observers, p.hz);
    out.norms = std::move(prop.norms);
    out.max_residual = prop.max_residual;
    out.psi_final = std::move(psi);
    return out;
}

RhoFreeCurve rho_free(double L, double t_cutoff, const RhoFreeOptions& opts) {
    if (L <= 1.0) throw ConfigError("rho_free: probe height must exceed the slab width");
    if (opts.margin_factor <= 1.0) throw ConfigError("rho_free: margin factor must exceed 1");

    Line1DProblem p;
    p.hz = opts.hz;
    p.Nz = int(std::lround(opts.margin_factor * L / opts.hz));
    p.top = Face1D::dirichlet_both;
    p.solver = opts.solver;
    p.solver.dt = opts.dt;
    if (opts.absorber_Wmax > 0.0) {
        const double box = p.Nz * p.hz;
        const double z0 = opts.absorber_start_fraction * box;
        if (z0 <= L + 1.0)
            throw ConfigError("rho_free: absorbing layer would overlap the probe region");
        p.cap = DetectorModel::cap_cubic(z0, 1.0, opts.absorber_Wmax, box);
    }

    const int probe = int(std::lround(L / p.hz));
    Line1DResult r = evolve_1d(p, t_cutoff, probe);

    RhoFreeCurve out;
    out.times = r.norms.times;
    out.rho_flux = std::move(r.probe_flux);
    out.box_length = p.Lz();
    out.probe_node = probe;
    out.max_far_wall = r.max_far_wall;
    // reflections off wall content later than this cannot reach the probe
    // within the cutoff
    out.t_wall_safe = t_cutoff * out.box_length / (2.0 * out.box_length - L);
    for (std::size_t i = 0; i < r.wall_occupancy.size(); ++i) {
        if (out.times[i] > out.t_wall_safe) break;
        out.max_far_wall_windowed = std::max(out.max_far_wall_windowed, r.wall_occupancy[i]);
    }

    // route (ii): -d/dt of the probability below the probe
    const auto& t = out.times;
    const auto& mass = r.probe_mass;
    out.rho_massloss.resize(mass.size());
    if (mass.size() >= 2) {
        out.rho_massloss.front() = -(mass[1] - mass[0]) / (t[1] - t[0]);
        for (std::size_t i = 1; i + 1 < mass.size(); ++i)
            out.rho_massloss[i] = -(mass[i + 1] - mass[i - 1]) / (t[i + 1] - t[i - 1]);
        out.rho_massloss.back() =
            -(mass[mass.size() - 1] - mass[mass.size() - 2]) / (t[t.size() - 1] - t[t.size() - 2]);
    }

    if (out.max_far_wall_windowed > opts.far_wall_threshold) {
        char msg[160];
        std::snprintf(msg, sizeof(msg),
                      "rho_free: far-wall occupancy %.3e before t = %.3f exceeds the "
                      "threshold %.1e; enlarge the margin",
                      out.max_far_wall_windowed, out.t_wall_safe, opts.far_wall_threshold);
        throw OracleInvalid(msg);
    }
    return out;
}

FreeArrivalResult free_bohmian_arrivals(double L, double theta, double phi, double omega,
                                        std::size_t n, double t_cutoff, std::uint64_t seed,
                                        const FreeArrivalOptions& opts) {
    if (omega <= 0) throw ConfigError("free arrivals: omega must be positive");
    if (n < 1) throw ConfigError("free arrivals: ensemble size must be >= 1");

    Line1DProblem p;
    p.hz = opts.hz;
    p.Nz = int(std::lround(opts.margin_factor * L / opts.hz));
    p.top = Face1D::dirichlet_both;
    p.solver.dt = opts.dt;
    if (opts.absorber_Wmax > 0.0) {
        const double box = p.Nz * p.hz;
        const double z0 = opts.absorber_start_fraction * box;
        if (z0 <= L + 1.0)
            throw ConfigError("free arrivals: absorbing layer would overlap the plane");
        p.cap = DetectorModel::cap_cubic(z0, 1.0, opts.absorber_Wmax, box);
    }

    const SparseOperator H = line_hamiltonian(p);
    std::vector<cplx> psi = initial_line_state(p.Nz, p.hz, p.d);

    // Bloch direction; the transverse Gaussian is analytic, so the Pauli
    // velocity reduces to closed-form transverse factors plus three line
    // profiles: rho_z = |psi|^2 and conj(psi) dpsi (u = phase gradient,
    // w = log-amplitude gradient).
    const BlochSpinor chi{theta, phi};
    const auto dir = chi.direction();
    const double nx = dir[0], ny = dir[1], nz = dir[2];

    struct LineGuide {
        std::vector<double> rho, u, w; // u = Im(psi* psi')/..., w = Re(psi* psi')
        double rho_max = 0.0;
    };
    const int Nz = p.Nz;
    const double hz = p.hz;
    std::vector<cplx> dpsi(static_cast<std::size_t>(Nz));
    LineGuide guide;
    guide.rho.resize(std::size_t(Nz));
    guide.u.resize(std::size_t(Nz));
    guide.w.resize(std::size_t(Nz));
    auto rebuild_guide = [&](const std::vector<cplx>& f) {
        diff_line<cplx>(f, dpsi, hz, DiffRule::second_longitudinal);
        guide.rho_max = 0.0;
        for (int k = 0; k < Nz; ++k) {
            const cplx g = std::conj(f[std::size_t(k)]) * dpsi[std::size_t(k)];
            guide.rho[std::size_t(k)] = std::norm(f[std::size_t(k)]);
            guide.u[std::size_t(k)] = g.imag();
            guide.w[std::size_t(k)] = g.real();
            guide.rho_max = std::max(guide.rho_max, guide.rho[std::size_t(k)]);
        }
    };

    // linear interpolation on the line, clamped as in the 3D grid
    auto interp = [&](const std::vector<double>& a, double z) {
        double zc = std::min(std::max(z, 0.0), (Nz - 1) * hz);
        int c = std::min(int(zc / hz), Nz - 2);
        const double f = std::min(std::max(zc / hz - c, 0.0), 1.0);
        return a[std::size_t(c)] * (1 - f) + a[std::size_t(c + 1)] * f;
    };

    // Pauli velocity of the product state: transverse Gaussian |g|^2 with
    // d|g|^2/dx = -2 omega x |g|^2 cancels against rho except through the
    // density floor, which uses the full 3d density.
    auto velocity = [&](const Vec3& q) -> Vec3 {
        const double rz = interp(guide.rho, q.z);
        const double uz = interp(guide.u, q.z);
        const double wz = interp(guide.w, q.z);
        const double gaussian = std::exp(-omega * (q.x * q.x + q.y * q.y));
        const double rho3 = gaussian * rz;
        const double floor = kDensityFloor * guide.rho_max; // |g|^2 max = 1 at the axis
        const double denom = std::max(rho3, floor);
        if (denom <= 0.0) return {0, 0, 0};
        // j_z = |g|^2 (u + omega (y nx - x ny) rho_z); curl gives the rest
        const double jx = gaussian * (-nz * omega * q.y * rz - ny * wz);
        const double jy = gaussian * (nz * omega * q.x * rz + nx * wz);
        const double jz = gaussian * (uz + omega * (q.y * nx - q.x * ny) * rz);
        return {jx / denom, jy / denom, jz / denom};
    };

    // ensemble: transverse normals around the axis, slab profile in z
    std::vector<Vec3> pos(n);
    std::vector<std::uint8_t> alive(n, 1);
    std::vector<double> tau(n, 0.0);
    const double sigma = std::sqrt(1.0 / (2.0 * omega));
    for (std::size_t q = 0; q < n; ++q) {
        CounterRng rng(seed, q);
        double n1, n2;
        rng.normal_pair(n1, n2);
        double qz;
        for (;;) {
            const double u = rng.uniform();
            const double r = 2.0 * rng.uniform();
            const double s = std::sin(kPi * u);
            if (r < 2.0 * s * s) {
                qz = u;
                break;
            }
        }
        pos[q] = {sigma * n1, sigma * n2, std::max(qz, hz / 2.0)};
    }

    const double cfl = opts.cfl;
    const double hmin = hz;
    CnWorkspace cn(H, p.solver);
    const int nsteps = int(std::floor(t_cutoff / p.solver.dt + 1e-9));

    FreeArrivalResult out;
    out.total = n;
    double max_wall = 0.0;

    rebuild_guide(psi);
    auto advance_particles = [&](double t0, double dtp) {
        const double vmax1 = cfl * hmin / (dtp / 2.0);
        const double vmax2 = cfl * hmin / dtp;
        auto cap = [](Vec3 v, double vm) {
            const double s = v.norm();
            return s > vm ? v * (vm / s) : v;
        };
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (std::int64_t q = 0; q < std::int64_t(n); ++q) {
            if (!alive[std::size_t(q)]) continue;
            Vec3 q0 = pos[std::size_t(q)];
            const Vec3 k1 = cap(velocity(q0), vmax1);
            const Vec3 qm = q0 + k1 * (dtp / 2.0);
            const Vec3 k2 = cap(velocity(qm), vmax2);
            Vec3 q1 = q0 + k2 * dtp;
            if (q0.z < L && q1.z >= L) {
                const double m = (L - q0.z) / (q1.z - q0.z);
                alive[std::size_t(q)] = 0;
                tau[std::size_t(q)] = t0 + m * dtp;
                q1 = q0 + (q1 - q0) * m;
                q1.z = L;
            }
            pos[std::size_t(q)] = q1;
        }
    };

    for (int s = 0; s < nsteps; ++s) {
        cn.step(psi);
        rebuild_guide(psi);
        const double t0 = s * p.solver.dt;
        // near-plane substepping mirrors the grid-based advancer
        const double dt_sub = p.solver.dt / std::max(1, opts.substeps_per_field_step);
        for (int sub = 0; sub < std::max(1, opts.substeps_per_field_step); ++sub)
            advance_particles(t0 + sub * dt_sub, dt_sub);
        const double occ =
            (std::norm(psi[std::size_t(Nz - 1)]) + std::norm(psi[std::size_t(Nz - 2)])) * hz;
        max_wall = std::max(max_wall, occ);
    }

    for (std::size_t q = 0; q < n; ++q)
        if (!alive[q]) {
            out.tau.push_back(tau[q]);
            out.hit.push_back(pos[q]);
            out.tau_max = std::max(out.tau_max, tau[q]);
        }
    out.arrived = out.tau.size();
    out.max_far_wall = max_wall;
    return out;
}

} // namespace qdt
