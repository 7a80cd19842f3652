#include "qdt/observables.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace qdt {

namespace {

void add_im_conj_grad(const GridSpec& g, std::span<const cplx> comp, CurrentField& out) {
    for (Axis ax : {Axis::x, Axis::y, Axis::z}) {
        const auto d = grad_component<cplx>(g, comp, ax);
        std::vector<double>& tgt = ax == Axis::x ? out.jx : (ax == Axis::y ? out.jy : out.jz);
        for (std::size_t l = 0; l < d.size(); ++l)
            tgt[l] += (kHbar / kMass) * std::imag(std::conj(comp[l]) * d[l]);
    }
}

} // namespace

CurrentField convective_current(const SpinorField& psi) {
    const GridSpec& g = psi.grid();
    CurrentField out;
    out.kind = CurrentKind::convective;
    out.jx.assign(g.size(), 0.0);
    out.jy.assign(g.size(), 0.0);
    out.jz.assign(g.size(), 0.0);
    add_im_conj_grad(g, psi.up(), out);
    if (psi.mode() == SpinMode::spinor) add_im_conj_grad(g, psi.down(), out);
    return out;
}

std::array<std::vector<double>, 3> spin_density(const SpinorField& psi) {
    if (psi.mode() != SpinMode::spinor)
        throw std::logic_error("spin_density: spinor mode required");
    const std::size_t n = psi.grid().size();
    std::array<std::vector<double>, 3> S{std::vector<double>(n), std::vector<double>(n),
                                         std::vector<double>(n)};
    auto up = psi.up();
    auto dn = psi.down();
    for (std::size_t l = 0; l < n; ++l) {
        const cplx cross = std::conj(up[l]) * dn[l];
        S[0][l] = 2.0 * cross.real();
        S[1][l] = 2.0 * cross.imag();
        S[2][l] = std::norm(up[l]) - std::norm(dn[l]);
    }
    return S;
}

CurrentField pauli_current(const SpinorField& psi) {
    if (psi.mode() != SpinMode::spinor)
        throw std::logic_error("pauli_current: spinor mode required");
    const GridSpec& g = psi.grid();
    CurrentField out = convective_current(psi);
    out.kind = CurrentKind::pauli;

    const auto S = spin_density(psi);
    const auto dySz = grad_component<double>(g, S[2], Axis::y);
    const auto dzSy = grad_component<double>(g, S[1], Axis::z);
    const auto dzSx = grad_component<double>(g, S[0], Axis::z);
    const auto dxSz = grad_component<double>(g, S[2], Axis::x);
    const auto dxSy = grad_component<double>(g, S[1], Axis::x);
    const auto dySx = grad_component<double>(g, S[0], Axis::y);
    const double c = kHbar / (2.0 * kMass);
    for (std::size_t l = 0; l < g.size(); ++l) {
        out.jx[l] += c * (dySz[l] - dzSy[l]);
        out.jy[l] += c * (dzSx[l] - dxSz[l]);
        out.jz[l] += c * (dxSy[l] - dySx[l]);
    }
    return out;
}

double plane_flux(const GridSpec& g, const CurrentField& j, int k) {
    if (k < 0 || k >= g.Nz) throw std::out_of_range("plane_flux: layer out of range");
    double s = 0.0;
    for (int i = 0; i < g.Nx; ++i)
        for (int jj = 0; jj < g.Ny; ++jj) s += j.jz[g.index(i, jj, k)];
    return s * g.hx * g.hy;
}

double rho_T_flux(const SpinorField& psi, const DetectorModel& detector) {
    if (!detector.is_abc())
        throw std::logic_error("rho_T_flux: ABC detector required (CAP uses rho_T_capvolume)");
    const GridSpec& g = psi.grid();
    const int k = g.Nz - 1;
    double s = 0.0;
    for (std::size_t c = 0; c < psi.components(); ++c) {
        auto comp = psi.component(c);
        for (int i = 0; i < g.Nx; ++i)
            for (int j = 0; j < g.Ny; ++j) s += std::norm(comp[g.index(i, j, k)]);
    }
    return (kHbar * detector.kappa / kMass) * s * g.hx * g.hy;
}

double rho_T_capvolume(const SpinorField& psi, const DetectorModel& detector) {
    if (!detector.is_cap())
        throw std::logic_error("rho_T_capvolume: CAP detector required (ABC uses rho_T_flux)");
    const GridSpec& g = psi.grid();
    double s = 0.0;
    for (std::size_t c = 0; c < psi.components(); ++c) {
        auto comp = psi.component(c);
        for (int k = 0; k < g.Nz; ++k) {
            const double W = cap_profile(g.z(k), detector);
            if (W == 0.0) continue;
            for (int i = 0; i < g.Nx; ++i)
                for (int j = 0; j < g.Ny; ++j) s += W * std::norm(comp[g.index(i, j, k)]);
        }
    }
    return (2.0 / kHbar) * s * g.cell_volume();
}

DetectionSeries build_detection_series(const NormSeries& norms, std::vector<double> rho_model) {
    const std::size_t n = norms.times.size();
    if (n < 2) throw std::invalid_argument("detection series needs at least two samples");
    if (!rho_model.empty() && rho_model.size() != n)
        throw std::invalid_argument("model density series length mismatch");

    DetectionSeries s;
    s.times = norms.times;
    s.norm_sq = norms.norm_sq;
    s.rho_model = std::move(rho_model);
    s.rho_normloss.resize(n);
    s.cum_fraction.resize(n);

    const auto& t = s.times;
    const auto& nn = s.norm_sq;
    s.rho_normloss[0] = -(nn[1] - nn[0]) / (t[1] - t[0]);
    for (std::size_t i = 1; i + 1 < n; ++i)
        s.rho_normloss[i] = -(nn[i + 1] - nn[i - 1]) / (t[i + 1] - t[i - 1]);
    s.rho_normloss[n - 1] = -(nn[n - 1] - nn[n - 2]) / (t[n - 1] - t[n - 2]);

    for (std::size_t i = 0; i < n; ++i) s.cum_fraction[i] = 1.0 - nn[i];
    s.detection_fraction = s.cum_fraction[n - 1];
    const auto& rho = s.rho_model.empty() ? s.rho_normloss : s.rho_model;
    s.mu_star = restricted_mean(s.times, rho, s.times.back());
    return s;
}

double restricted_mean(const std::vector<double>& times, const std::vector<double>& rho,
                       double t_cutoff) {
    if (times.size() != rho.size() || times.size() < 2)
        throw std::invalid_argument("restricted_mean: bad series");
    if (times.back() < t_cutoff * (1.0 - 1e-12))
        throw std::invalid_argument("restricted_mean: series does not cover the cutoff");
    double m1 = 0.0, m0 = 0.0; // trapezoids of t*rho and rho up to the cutoff
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (times[i - 1] >= t_cutoff) break;
        const double t1 = std::min(times[i], t_cutoff);
        const double dt = t1 - times[i - 1];
        m0 += 0.5 * dt * (rho[i] + rho[i - 1]);
        m1 += 0.5 * dt * (times[i] * rho[i] + times[i - 1] * rho[i - 1]);
    }
    return m1 + t_cutoff * (1.0 - m0);
}

Histogram make_histogram(const std::vector<double>& samples, int bins, double lo, double hi,
                         std::size_t ensemble_size) {
    if (bins < 1) throw std::invalid_argument("histogram: bins must be >= 1");
    if (!(hi > lo)) throw std::invalid_argument("histogram: empty range");
    if (ensemble_size == 0) throw std::invalid_argument("histogram: empty ensemble");
    Histogram h;
    h.edges.resize(std::size_t(bins) + 1);
    for (int b = 0; b <= bins; ++b) h.edges[std::size_t(b)] = lo + (hi - lo) * b / bins;
    h.count.assign(std::size_t(bins), 0);
    const double width = (hi - lo) / bins;
    for (double x : samples) {
        if (x < lo || x > hi) continue;
        int b = int((x - lo) / width);
        if (b == bins) b = bins - 1; // right edge inclusive
        h.count[std::size_t(b)]++;
    }
    h.height.resize(std::size_t(bins));
    for (int b = 0; b < bins; ++b)
        h.height[std::size_t(b)] = double(h.count[std::size_t(b)]) / (double(ensemble_size) * width);
    return h;
}

void write_series_csv(const std::string& path, const DetectionSeries& s, int stride,
                      const std::string& model_tag) {
    if (stride < 1) stride = 1;
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::fprintf(f, "t,norm_sq,rho_T_normloss,rho_T_model,cum_fraction,model\n");
    const std::size_t n = s.times.size();
    for (std::size_t i = 0; i < n; i += std::size_t(stride)) {
        const double rm = s.rho_model.empty() ? 0.0 : s.rho_model[i];
        std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g,%s\n", s.times[i], s.norm_sq[i],
                     s.rho_normloss[i], rm, s.cum_fraction[i], model_tag.c_str());
    }
    if (n > 0 && (n - 1) % std::size_t(stride) != 0) {
        const std::size_t i = n - 1;
        const double rm = s.rho_model.empty() ? 0.0 : s.rho_model[i];
        std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g,%s\n", s.times[i], s.norm_sq[i],
                     s.rho_normloss[i], rm, s.cum_fraction[i], model_tag.c_str());
    }
    std::fclose(f);
}

} // namespace qdt
