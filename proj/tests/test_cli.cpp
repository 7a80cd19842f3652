#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qdt/runner.hpp"

using namespace qdt;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kTinyCap1D = R"(
geometry.kind = line1d
geometry.Lz = 3
geometry.Nz = 150
detector.kind = cap
detector.profile = tanh
detector.z0 = 2
detector.a = 0.165
detector.Wmax = 40
numerics.dt = 1e-3
numerics.t_cutoff = 2
)";

} // namespace

TEST_CASE("config parsing: values, defaults, and diagnostics") {
    RunConfig c = parse_config_text(kTinyCap1D);
    c.validate();
    CHECK(c.geometry == GeometryKind::line1d);
    CHECK(c.Nz == 150);
    CHECK(c.solver.rel_tol == 1e-8);
    CHECK(c.solver.restart == 30);
    CHECK(c.solver.max_iter == 1000);
    CHECK(c.bins == 200);
    CHECK(c.cfl == 0.8);

    CHECK_THROWS_WITH_AS((void)parse_config_text("geometry.bogus = 1"),
                         doctest::Contains("unknown key"), ConfigError);
    CHECK_THROWS_AS((void)parse_config_text("geometry.Nz = abc"), ConfigError);

    RunConfig bad = parse_config_text(kTinyCap1D);
    bad.z0 = 5.0; // outside the box
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    RunConfig spin = parse_config_text(kTinyCap1D);
    spin.detector = DetectorKind::abc_spinor;
    spin.kappa = 1.0;
    CHECK_THROWS_AS(spin.validate(), ConfigError); // spinor ABC needs spinor mode
}

TEST_CASE("run produces artifacts and is bitwise reproducible") {
    RunConfig c = parse_config_text(kTinyCap1D);
    c.out_dir = "test_out/tiny_cap_a";
    fs::remove_all(c.out_dir);
    RunResult r1 = run(c);
    CHECK(r1.detection_fraction > 0.1);
    CHECK(fs::exists(fs::path(c.out_dir) / "series.csv"));
    CHECK(fs::exists(fs::path(c.out_dir) / "summary.txt"));
    const std::string series1 = slurp(fs::path(c.out_dir) / "series.csv");

    c.out_dir = "test_out/tiny_cap_b";
    fs::remove_all(c.out_dir);
    (void)run(c);
    const std::string series2 = slurp(fs::path(c.out_dir) / "series.csv");
    CHECK(series1 == series2);

    const std::string summary = slurp(fs::path("test_out/tiny_cap_a") / "summary.txt");
    CHECK(summary.find("run.status = ok") != std::string::npos);
    CHECK(summary.find("config.geometry.Nz = 150") != std::string::npos);
}

TEST_CASE("3d run with trajectories writes arrivals deterministically") {
    std::stringstream cfg;
    cfg << "geometry.kind = box3d\n"
        << "geometry.Lx = 6\ngeometry.Ly = 6\ngeometry.Lz = 3\n"
        << "geometry.Nx = 12\ngeometry.Ny = 12\ngeometry.Nz = 60\n"
        << "physics.omega = 4\n"
        << "detector.kind = abc_spinless\ndetector.kappa = 3.14159265358979\n"
        << "numerics.dt = 2e-3\nnumerics.t_cutoff = 1.0\n"
        << "numerics.n_trajectories = 200\nnumerics.seed = 12\n"
        << "outputs.snapshots = 0.5\n";
    RunConfig c = parse_config_text(cfg.str());
    c.out_dir = "test_out/abc3d_a";
    fs::remove_all(c.out_dir);
    RunResult r = run(c);
    CHECK(r.has_trajectories);
    CHECK(r.arrived + r.timed_out == 200);
    CHECK(fs::exists(fs::path(c.out_dir) / "arrivals.csv"));
    CHECK(fs::exists(fs::path(c.out_dir) / "snapshot_t0.500000.f64"));
    const auto snap_size = fs::file_size(fs::path(c.out_dir) / "snapshot_t0.500000.f64");
    CHECK(snap_size == 12 * 12 * 60 * sizeof(double));
    const std::string a1 = slurp(fs::path(c.out_dir) / "arrivals.csv");

    c.out_dir = "test_out/abc3d_b";
    fs::remove_all(c.out_dir);
    (void)run(c);
    CHECK(a1 == slurp(fs::path(c.out_dir) / "arrivals.csv"));
}

TEST_CASE("sweep collates members and fits the omega law for the spinor ABC") {
    // mechanics-level check on a tiny 1d CAP sweep over the ramp width
    RunConfig c = parse_config_text(kTinyCap1D);
    c.raw["detector.profile"] = "cubic_ramp";
    c.profile = CapProfile::cubic_ramp;
    c.sweep_axis = "w";
    c.sweep_values = {1.0, 0.5};
    c.out_dir = "test_out/sweep_w";
    fs::remove_all(c.out_dir);
    SweepResult s = sweep(c);
    CHECK(s.members.size() == 2);
    CHECK(fs::exists(fs::path(c.out_dir) / "sweep.csv"));
    CHECK(fs::exists(fs::path(c.out_dir) / "w=1" / "summary.txt"));
    CHECK(fs::exists(fs::path(c.out_dir) / "w=0.5" / "summary.txt"));
    // sharper ramp detects less within the window
    CHECK(s.members[1].result.detection_fraction < s.members[0].result.detection_fraction);
    CHECK_FALSE(s.omega_fit.has_value());
}

TEST_CASE("converge subcommand reports refinement rows") {
    RunConfig c = parse_config_text(kTinyCap1D);
    c.t_cutoff = 1.0;
    c.out_dir = "test_out/converge";
    fs::remove_all(c.out_dir);
    const auto rows = converge(c);
    REQUIRE(rows.size() == 2); // dt and Nz for line1d
    for (const auto& row : rows) {
        CHECK(row.eps_rel < 0.05);
        CHECK(row.mu_refined > 0.0);
    }
    CHECK(fs::exists(fs::path(c.out_dir) / "converge.csv"));
}

TEST_CASE("cli binary: exit codes and run flow") {
    const std::string bin = QDTSIM_BIN;
    const fs::path dir = "test_out/cli";
    fs::remove_all(dir);
    fs::create_directories(dir);
    {
        std::ofstream f(dir / "tiny.conf");
        f << kTinyCap1D;
    }
    {
        std::ofstream f(dir / "bad.conf");
        f << "geometry.kind = line1d\n"; // missing everything else
    }

    auto exit_code = [](int rc) {
#ifdef _WIN32
        return rc;
#else
        return WEXITSTATUS(rc);
#endif
    };

    const std::string out = (dir / "run_out").string();
    const int ok = std::system(
        (bin + " run " + (dir / "tiny.conf").string() + " --out " + out + " > /dev/null").c_str());
    CHECK(exit_code(ok) == 0);
    CHECK(fs::exists(fs::path(out) / "summary.txt"));

    const int bad = std::system(
        (bin + " run " + (dir / "bad.conf").string() + " > /dev/null 2>&1").c_str());
    CHECK(exit_code(bad) == 2);

    const int units = std::system((bin + " units --value 5.921 --kind time > " +
                                   (dir / "units.txt").string())
                                      .c_str());
    CHECK(exit_code(units) == 0);
    const std::string utxt = slurp(dir / "units.txt");
    CHECK(utxt.find("T_star_s = 0.00547") != std::string::npos);

    // --set override changes the resolved config
    const int ov = std::system((bin + " run " + (dir / "tiny.conf").string() + " --out " +
                                (dir / "ov").string() +
                                " --set numerics.t_cutoff=1 > /dev/null")
                                   .c_str());
    CHECK(exit_code(ov) == 0);
    const std::string summary = slurp(dir / "ov" / "summary.txt");
    CHECK(summary.find("config.numerics.t_cutoff = 1") != std::string::npos);
}
