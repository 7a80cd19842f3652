#include "qdt/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace qdt {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: " + key + ": expected a number, got '" + v + "'");
    }
}

long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: " + key + ": expected an integer, got '" + v + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: " + key + ": expected true/false, got '" + v + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_double(key, item));
    }
    if (out.empty()) throw ConfigError("config: " + key + ": empty list");
    return out;
}

} // namespace

RunConfig parse_config_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) +
                              ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError("config: line " + std::to_string(lineno) +
                              ": expected key = value");
        kv[key] = val;
    }

    RunConfig c;
    c.raw = kv;
    for (const auto& [key, val] : kv) {
        if (key == "geometry.kind") {
            if (val == "box3d") c.geometry = GeometryKind::box3d;
            else if (val == "line1d") c.geometry = GeometryKind::line1d;
            else throw ConfigError("config: geometry.kind: unknown value '" + val + "'");
        } else if (key == "geometry.Lx") c.Lx = parse_double(key, val);
        else if (key == "geometry.Ly") c.Ly = parse_double(key, val);
        else if (key == "geometry.Lz") c.Lz = parse_double(key, val);
        else if (key == "geometry.Nx") c.Nx = int(parse_int(key, val));
        else if (key == "geometry.Ny") c.Ny = int(parse_int(key, val));
        else if (key == "geometry.Nz") c.Nz = int(parse_int(key, val));
        else if (key == "geometry.transverse_over_sqrt_omega")
            c.transverse_over_sqrt_omega = parse_double(key, val);
        else if (key == "physics.omega") c.omega = parse_double(key, val);
        else if (key == "physics.theta") c.theta = parse_double(key, val);
        else if (key == "physics.phi") c.phi = parse_double(key, val);
        else if (key == "physics.spin_mode") {
            if (val == "scalar") c.spin_mode = SpinMode::scalar;
            else if (val == "spinor") c.spin_mode = SpinMode::spinor;
            else throw ConfigError("config: physics.spin_mode: unknown value '" + val + "'");
        } else if (key == "detector.kind") {
            if (val == "cap") c.detector = DetectorKind::cap;
            else if (val == "abc_spinless") c.detector = DetectorKind::abc_spinless;
            else if (val == "abc_spinor") c.detector = DetectorKind::abc_spinor;
            else if (val == "free") { c.detector = DetectorKind::none; c.free_run = true; }
            else throw ConfigError("config: detector.kind: unknown value '" + val + "'");
        } else if (key == "detector.kappa") c.kappa = parse_double(key, val);
        else if (key == "detector.profile") {
            if (val == "tanh") c.profile = CapProfile::tanh_step;
            else if (val == "sharp") c.profile = CapProfile::sharp_step;
            else if (val == "cubic_ramp") c.profile = CapProfile::cubic_ramp;
            else throw ConfigError("config: detector.profile: unknown value '" + val + "'");
        } else if (key == "detector.z0") c.z0 = parse_double(key, val);
        else if (key == "detector.a") c.a = parse_double(key, val);
        else if (key == "detector.w") c.w = parse_double(key, val);
        else if (key == "detector.Wmax") c.Wmax = parse_double(key, val);
        else if (key == "detector.probe_L") c.probe_L = parse_double(key, val);
        else if (key == "numerics.far_wall_threshold")
            c.far_wall_threshold = parse_double(key, val);
        else if (key == "numerics.dt") c.solver.dt = parse_double(key, val);
        else if (key == "numerics.t_cutoff") c.t_cutoff = parse_double(key, val);
        else if (key == "numerics.rel_tol") c.solver.rel_tol = parse_double(key, val);
        else if (key == "numerics.restart") c.solver.restart = int(parse_int(key, val));
        else if (key == "numerics.max_iter") c.solver.max_iter = int(parse_int(key, val));
        else if (key == "numerics.jacobi") c.solver.jacobi = parse_bool(key, val);
        else if (key == "numerics.cfl") c.cfl = parse_double(key, val);
        else if (key == "numerics.n_trajectories")
            c.n_trajectories = std::size_t(parse_int(key, val));
        else if (key == "numerics.seed") c.seed = std::uint64_t(parse_int(key, val));
        else if (key == "numerics.guidance") {
            if (val == "matched") c.guidance = RunConfig::Guidance::matched;
            else if (val == "convective") c.guidance = RunConfig::Guidance::convective;
            else if (val == "pauli") c.guidance = RunConfig::Guidance::pauli;
            else throw ConfigError("config: numerics.guidance: unknown value '" + val + "'");
        } else if (key == "numerics.freeze") {
            if (val == "post") c.freeze_pre_step = false;
            else if (val == "pre") c.freeze_pre_step = true;
            else throw ConfigError("config: numerics.freeze: expected post|pre");
        } else if (key == "numerics.strict") c.strict = parse_bool(key, val);
        else if (key == "outputs.dir") c.out_dir = val;
        else if (key == "outputs.bins") c.bins = int(parse_int(key, val));
        else if (key == "outputs.series_stride") c.series_stride = int(parse_int(key, val));
        else if (key == "outputs.snapshots") c.snapshot_times = parse_list(key, val);
        else if (key == "outputs.trajectory_dump_stride")
            c.trajectory_dump_stride = int(parse_int(key, val));
        else if (key == "outputs.trajectory_dump_count")
            c.trajectory_dump_count = int(parse_int(key, val));
        else if (key == "si.d_phys") {
            if (!c.si) c.si = SiBlock{};
            c.si->d_phys = parse_double(key, val);
        } else if (key == "si.mass") {
            if (!c.si) c.si = SiBlock{};
            c.si->mass = parse_double(key, val);
        } else if (key == "sweep.axis") c.sweep_axis = val;
        else if (key == "sweep.values") c.sweep_values = parse_list(key, val);
        else if (key == "sweep.parallel") c.sweep_parallel = int(parse_int(key, val));
        else throw ConfigError("config: unknown key '" + key + "'");
    }
    return c;
}

RunConfig parse_config_file(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    for (const std::string& ov : overrides) {
        if (ov.find('=') == std::string::npos)
            throw ConfigError("config: override must be key=value, got '" + ov + "'");
        text += "\n" + ov + "\n";
    }
    return parse_config_text(text);
}

double RunConfig::resolved_Lx() const {
    if (transverse_over_sqrt_omega > 0.0) {
        if (omega <= 0) throw ConfigError("config: transverse scaling requires omega > 0");
        return transverse_over_sqrt_omega / std::sqrt(omega);
    }
    return Lx;
}

void RunConfig::validate() const {
    if (t_cutoff <= 0) throw ConfigError("config: numerics.t_cutoff must be positive");
    solver.validate();
    if (cfl <= 0 || cfl >= 1) throw ConfigError("config: numerics.cfl must be in (0,1)");
    if (bins < 1) throw ConfigError("config: outputs.bins must be >= 1");
    if (series_stride < 1) throw ConfigError("config: outputs.series_stride must be >= 1");
    if (theta < 0 || theta > kPi) throw ConfigError("config: physics.theta must be in [0, pi]");
    if (phi < 0 || phi >= 2 * kPi)
        throw ConfigError("config: physics.phi must be in [0, 2 pi)");
    if (si && (si->d_phys <= 0 || si->mass <= 0))
        throw ConfigError("config: si.d_phys and si.mass must be positive");

    if (free_run) {
        if (Lz <= 0 || Nz < 4)
            throw ConfigError("config: free runs need geometry.Lz > 0 and Nz >= 4");
        if (probe_L <= 1.0 || probe_L >= Lz)
            throw ConfigError("config: free runs need 1 < detector.probe_L < Lz (box length)");
        if (n_trajectories > 0 && spin_mode != SpinMode::spinor)
            throw ConfigError("config: free-run arrivals use the Pauli current; set "
                              "physics.spin_mode = spinor");
        return;
    }

    if (detector == DetectorKind::none)
        throw ConfigError("config: detector.kind is required");
    if (detector == DetectorKind::abc_spinor && spin_mode != SpinMode::spinor)
        throw ConfigError("config: the spinor ABC requires physics.spin_mode = spinor");
    if (detector == DetectorKind::cap) {
        if (Lz <= 0) throw ConfigError("config: geometry.Lz must be positive");
        if (z0 <= 0 || z0 >= Lz) throw ConfigError("config: CAP requires 0 < detector.z0 < Lz");
        if (Wmax <= 0) throw ConfigError("config: CAP requires detector.Wmax > 0");
        if (profile == CapProfile::tanh_step && a <= 0)
            throw ConfigError("config: tanh CAP requires detector.a > 0");
        if (profile == CapProfile::cubic_ramp && (w <= 0 || w > 1))
            throw ConfigError("config: cubic CAP requires 0 < detector.w <= 1");
    } else if (kappa <= 0)
        throw ConfigError("config: ABC requires detector.kappa > 0");

    if (geometry == GeometryKind::line1d) {
        if (detector == DetectorKind::abc_spinor)
            throw ConfigError("config: the spinor ABC does not factorize; use geometry.kind "
                              "= box3d");
        if (Nz < 4 || Lz <= 0)
            throw ConfigError("config: line1d needs geometry.Lz > 0 and Nz >= 4");
        if (n_trajectories > 0 &&
            (guidance == Guidance::pauli ||
             (guidance == Guidance::matched && spin_mode == SpinMode::spinor)))
            throw ConfigError("config: Pauli-guided trajectories need geometry.kind = box3d");
    } else {
        if (resolved_Lx() <= 0 || (transverse_over_sqrt_omega <= 0 && Ly <= 0) || Lz <= 0)
            throw ConfigError("config: geometry.Lx/Ly/Lz must be positive (or set "
                              "geometry.transverse_over_sqrt_omega)");
        if (Nx < 4 || Ny < 4 || Nz < 4)
            throw ConfigError("config: geometry.Nx/Ny/Nz must be >= 4");
        if (omega <= 0)
            throw ConfigError("config: box3d runs require physics.omega > 0");
    }
    if (n_trajectories > 0 && omega <= 0)
        throw ConfigError("config: Born sampling requires physics.omega > 0");
}

DetectorModel RunConfig::detector_model() const {
    switch (detector) {
        case DetectorKind::cap:
            switch (profile) {
                case CapProfile::tanh_step: return DetectorModel::cap_tanh(z0, a, Wmax, Lz);
                case CapProfile::sharp_step: return DetectorModel::cap_sharp(z0, Wmax, Lz);
                case CapProfile::cubic_ramp: return DetectorModel::cap_cubic(z0, w, Wmax, Lz);
            }
            break;
        case DetectorKind::abc_spinless: return DetectorModel::abc_spinless(kappa);
        case DetectorKind::abc_spinor: return DetectorModel::abc_spinor(kappa);
        case DetectorKind::none: break;
    }
    return DetectorModel::none();
}

PhysicsConfig RunConfig::physics() const {
    PhysicsConfig p;
    p.omega = omega;
    p.L = Lz;
    p.mode = spin_mode;
    if (spin_mode == SpinMode::spinor) p.spinor = BlochSpinor{theta, phi};
    return p;
}

GridSpec RunConfig::grid() const {
    const double lx = resolved_Lx();
    const double ly = transverse_over_sqrt_omega > 0 ? lx : Ly;
    return GridSpec::make(lx, ly, Lz, Nx, Ny, Nz);
}

} // namespace qdt
