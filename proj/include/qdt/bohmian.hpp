#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "qdt/observables.hpp"

namespace qdt {

enum class ParticleStatus : std::uint8_t { alive, arrived, absorbed, timed_out };

const char* to_string(ParticleStatus s);

enum class GuidanceKind { convective, pauli };

// Velocity data for one frozen field snapshot: the chosen current, the
// density, and the density floor scale.
struct GuidanceField {
    const GridSpec* grid = nullptr;
    CurrentField current;
    std::vector<double> rho;
    double rho_max = 0.0;
};

inline constexpr double kDensityFloor = 1e-6;

GuidanceField build_guidance(const SpinorField& psi, GuidanceKind kind);

// v = j(q) / max(rho(q), 1e-6 rho_max), fields interpolated trilinearly.
Vec3 velocity_at(const Vec3& q, const GuidanceField& f);

struct TrajectoryEnsemble {
    std::vector<Vec3> pos;
    std::vector<Vec3> prev_pos; // positions before the latest RK2 call
    std::vector<ParticleStatus> status;
    std::vector<double> tau;      // first-hit / absorption time
    std::vector<Vec3> hit;        // first-hit / absorption place
    std::vector<double> survival; // accumulated (2/hbar) int W dt'
    std::vector<double> log_xi;   // -ln(Xi), absorption threshold (CAP)
    GuidanceKind guidance = GuidanceKind::convective;
    std::uint64_t seed = 0;

    std::size_t size() const { return pos.size(); }
    std::size_t count(ParticleStatus s) const;
    std::vector<double> arrival_times() const; // tau of arrived+absorbed, by index
};

// Born sampling of the initial positions: transverse normal with variance
// 1/(2 omega) (resampled if outside the box), longitudinal accept-reject on
// 2 sin^2(pi z) in the slab. Deterministic per (seed, particle index).
TrajectoryEnsemble sample_initial(std::size_t n, const GridSpec& grid,
                                  const PhysicsConfig& physics, std::uint64_t seed,
                                  GuidanceKind guidance);

// One capped explicit-midpoint call of duration dt for the listed particles
// (all alive ones if `only` is null). Stage velocities are clipped to
// cfl*h_min/dt_stage; previous positions are kept for the hit tests.
void rk2_advance(TrajectoryEnsemble& e, const GuidanceField& f, double dt, double cfl,
                 const std::vector<std::uint32_t>* only = nullptr);

// First-crossing test against the counting plane: particles with
// z_prev < plane <= z_new get pinned on the plane at the linearly
// interpolated time t0 + m*dt.
void detect_first_hit(TrajectoryEnsemble& e, double plane_z, double t0, double dt,
                      const std::vector<std::uint32_t>* only = nullptr);

// CAP survival bookkeeping over the latest call: the survival integral
// grows by (2/hbar) W(z_mid) dt; absorption happens when it passes -ln(Xi),
// with the time interpolated in log-survival.
void cap_terminate(TrajectoryEnsemble& e, const DetectorModel& detector, double t0, double dt,
                   const std::vector<std::uint32_t>* only = nullptr);

// Per-CN-step driver: advances all alive particles from t0 to t0+dt against
// a frozen guidance field, substepping near the counting plane (ABC) and
// applying the detector-specific termination rule.
class TrajectoryAdvancer {
public:
    TrajectoryAdvancer(TrajectoryEnsemble ensemble, DetectorModel detector, double cfl);

    void advance(const GuidanceField& f, double t0, double dt);
    void finalize(double t_end); // alive -> timed_out

    const TrajectoryEnsemble& ensemble() const { return ensemble_; }
    TrajectoryEnsemble& ensemble() { return ensemble_; }

private:
    TrajectoryEnsemble ensemble_;
    DetectorModel detector_;
    double cfl_;
    std::vector<std::uint32_t> near_, far_;
};

void write_arrivals_csv(const std::string& path, const TrajectoryEnsemble& e);

} // namespace qdt
