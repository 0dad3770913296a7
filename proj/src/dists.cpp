#include "spqm/dists.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <vector>

#include "spqm/errors.hpp"
#include "spqm/group.hpp"
#include "spqm/paths.hpp"
#include "spqm/quadrature.hpp"

namespace spqm {

double sigma_width(double kT) {
    if (!(kT >= 0.0)) throw ContractError("sigma_width: kT must be >= 0");
    if (kT < 1e-3) {
        // kT − tanh kT = x³/3 − 2x⁵/15 + 17x⁷/315 − …
        const double x2 = kT * kT;
        return kT * x2 * (1.0 / 3.0 - x2 * (2.0 / 15.0 - x2 * 17.0 / 315.0));
    }
    return kT - std::tanh(kT);
}

double sigma_rate(double kappa, double t) {
    const double th = std::tanh(kappa * t);
    return kappa * th * th;
}

double normalization_factor(double kT) { return std::exp(2.0 * kT) / (1.0 + kT); }

ReducedPoint ReducedPoint::from_cartan(double r, cplx beta, cplx alpha) {
    const HCCoords x = cartan_to_hc(CartanCoords{beta, 0.0, r, 0.0, alpha});
    return {r, beta, alpha, x.nu, x.mu};
}

ReducedPoint ReducedPoint::from_hc(double r, cplx nu, cplx mu) {
    const CartanCoords y = hc_to_cartan(HCCoords{nu, r, cplx{0.0, 0.0}, mu});
    return {r, y.beta, y.alpha, nu, mu};
}

double DensityValue::value() const { return prefactor * std::exp(exponent); }
double DensityValue::log_value() const { return std::log(prefactor) + exponent; }

namespace {

void require_on_shell(const ReducedPoint& p, double kT) {
    if (!(kT > 0.0)) throw ContractError("reduced density: kT must be > 0");
    if (std::abs(p.r - 2.0 * kT) > 1e-9 * std::max(1.0, p.r))
        throw ContractError("reduced density: off-shell ruler (the solution is supported on r = 2kT)");
}

}  // namespace

DensityValue density_cartan_reduced(const ReducedPoint& point, double kT) {
    require_on_shell(point, kT);
    const double sig = sigma_width(kT);
    return {2.0 * kT, 2.0 / (std::sinh(2.0 * kT) * sig), -std::norm(point.beta - point.alpha) / sig};
}

SumDifferenceCoefficients hc_exponent_coefficients(double kT) {
    const double sig = sigma_width(kT);
    const double ek = std::exp(kT);
    return {ek / (4.0 * std::sinh(kT)), ek * (1.0 + kT) / (4.0 * std::cosh(kT) * sig)};
}

DensityValue density_hc_reduced(const ReducedPoint& point, double kT, bool normalized, PhaseVariables vars) {
    require_on_shell(point, kT);
    const double sig = sigma_width(kT);
    DensityValue d;
    d.radial_r = 2.0 * kT;
    d.prefactor = 2.0 / (sig * std::sinh(2.0 * kT));
    if (normalized) d.prefactor /= normalization_factor(kT);
    if (vars == PhaseVariables::HC) {
        const auto c = hc_exponent_coefficients(kT);
        d.exponent = -c.a * std::norm(point.nu + point.mu) - c.b * std::norm(point.nu - point.mu);
    } else {
        const double emk = std::exp(-kT);
        d.exponent = -std::norm(point.beta + point.alpha) * emk * std::sinh(kT) -
                     std::norm(point.beta - point.alpha) * emk * std::cosh(kT) * (1.0 + kT) / sig;
    }
    return d;
}

double gauge_relation_residual(const ReducedPoint& point, double kT) {
    const DensityValue C = density_cartan_reduced(point, kT);
    const DensityValue B = density_hc_reduced(point, kT, false, PhaseVariables::HC);
    const double f = gauge_functions(CartanCoords{point.beta, 0.0, point.r, 0.0, point.alpha}).f;
    const double log_ratio =
        (std::log(B.prefactor) - std::log(C.prefactor)) + (2.0 * f + B.exponent - C.exponent);
    return std::abs(std::expm1(log_ratio));
}

ReducedIntegrals integrate_reduced_hc(double kT, bool normalized, int nodes) {
    const auto gh = gauss_hermite(nodes);
    const auto c = hc_exponent_coefficients(kT);
    const double r = 2.0 * kT;
    const double su = 1.0 / std::sqrt(c.a), sv = 1.0 / std::sqrt(c.b);
    // d⁵μ = e^{2r}/(2π)² d²ν d²μ and d²ν d²μ = ¼ d²u d²v for u = ν+μ, v = ν−μ.
    const double measure = std::exp(2.0 * r) / (4.0 * std::numbers::pi * std::numbers::pi) * 0.25 / (c.a * c.b);
    ReducedIntegrals out;
    const std::size_t n = gh.nodes.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const cplx u(su * gh.nodes[i], su * gh.nodes[j]);
            const double wu = gh.weights[i] * gh.weights[j];
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t l = 0; l < n; ++l) {
                    const cplx v(sv * gh.nodes[k], sv * gh.nodes[l]);
                    const cplx nu = 0.5 * (u + v), mu = 0.5 * (u - v);
                    ReducedPoint p;
                    p.r = r;
                    p.nu = nu;
                    p.mu = mu;
                    const DensityValue d = density_hc_reduced(p, kT, normalized, PhaseVariables::HC);
                    // Divide out the Gaussian the Hermite weights already carry.
                    const double g = d.prefactor * std::exp(d.exponent + c.a * std::norm(u) + c.b * std::norm(v));
                    const double w = measure * wu * gh.weights[k] * gh.weights[l] * g;
                    out.norm += w;
                    out.n += w * std::norm(nu);
                    out.m += w * std::norm(mu);
                    out.q += w * (std::conj(nu) * mu).real();
                }
        }
    return out;
}

std::string to_string(PathWeight w) {
    switch (w) {
        case PathWeight::None: return "none";
        case PathWeight::ExpMinus2s: return "exp(-2s)";
        case PathWeight::ExpMinus2ell: return "exp(-2ell)";
    }
    return "?";
}

std::string to_string(Observable o) {
    switch (o) {
        case Observable::One: return "1";
        case Observable::NuSq: return "|nu|^2";
        case Observable::MuSq: return "|mu|^2";
        case Observable::NuStarMuRe: return "Re(nu* mu)";
        case Observable::SumDiffCrossRe: return "Re((nu+mu)*(nu-mu))";
        case Observable::SumDiffCrossIm: return "Im((nu+mu)*(nu-mu))";
    }
    return "?";
}

std::string to_string(PathMeasure m) { return m == PathMeasure::Plain ? "plain" : "modified"; }

namespace {

double observe(Observable o, const HCCoords& x) {
    switch (o) {
        case Observable::One: return 1.0;
        case Observable::NuSq: return std::norm(x.nu);
        case Observable::MuSq: return std::norm(x.mu);
        case Observable::NuStarMuRe: return (std::conj(x.nu) * x.mu).real();
        case Observable::SumDiffCrossRe: return (std::conj(x.nu + x.mu) * (x.nu - x.mu)).real();
        case Observable::SumDiffCrossIm: return (std::conj(x.nu + x.mu) * (x.nu - x.mu)).imag();
    }
    return 0.0;
}

}  // namespace

std::vector<FeynmanKacResult> feynman_kac_estimate_many(const FeynmanKacConfig& cfg,
                                                        const std::vector<Observable>& observables,
                                                        Execution exec) {
    if (cfg.n_paths < 2) throw ContractError("feynman_kac_estimate: need at least 2 paths");
    const ClosedFormTables tables(cfg.N, cfg.dt, cfg.kappa);
    std::optional<ModifiedSampler> sampler;
    if (cfg.measure == PathMeasure::Modified) sampler.emplace(cfg.N, cfg.dt, cfg.kappa);

    const std::size_t n_obs = observables.size();
    const auto n_paths = static_cast<std::size_t>(cfg.n_paths);
    std::vector<double> wv(n_paths);
    std::vector<double> gv(n_paths * n_obs);
    for_each_index(exec, cfg.n_paths, [&](std::int64_t i) {
        WienerPath path{cfg.dt, cfg.kappa, std::vector<cplx>(static_cast<std::size_t>(cfg.N))};
        PathRng rng(cfg.seed, static_cast<std::uint64_t>(i));
        if (sampler)
            sampler->draw(path, rng);
        else
            fill_wiener(path, rng);
        const HCCoords x = closed_form_hc(path, tables);
        double w = 1.0;
        if (cfg.weight != PathWeight::None) {
            double log_w = -2.0 * toeplitz_center(path);
            if (cfg.weight == PathWeight::ExpMinus2ell) log_w += 2.0 * gauge_functions(x).f;
            w = std::exp(log_w);
        }
        const auto row = static_cast<std::size_t>(i);
        wv[row] = w;
        for (std::size_t o = 0; o < n_obs; ++o) gv[row * n_obs + o] = w * observe(observables[o], x);
    });

    // Serial, index-ordered reduction: results do not depend on the worker count.
    double sum_w = 0.0, max_w = 0.0;
    bool finite = true;
    for (const double w : wv) {
        if (!std::isfinite(w)) finite = false;
        sum_w += w;
        max_w = std::max(max_w, w);
    }
    const double ess = (max_w > 0.0 && finite) ? sum_w / max_w : 0.0;
    const double floor = std::max(100.0, cfg.ess_floor_fraction * cfg.n_paths);

    std::vector<FeynmanKacResult> out(n_obs);
    for (std::size_t o = 0; o < n_obs; ++o) {
        FeynmanKacResult& res = out[o];
        res.n_paths = cfg.n_paths;
        double mean = 0.0, m2 = 0.0;
        bool ok = finite;
        for (std::size_t i = 0; i < n_paths; ++i) {
            const double g = gv[i * n_obs + o];
            if (!std::isfinite(g)) ok = false;
            const double delta = g - mean;
            mean += delta / static_cast<double>(i + 1);
            m2 += delta * (g - mean);
        }
        res.mean = mean;
        res.std_error = std::sqrt(m2 / static_cast<double>(cfg.n_paths - 1) / cfg.n_paths);
        res.max_weight = max_w;
        res.ess = ess;
        if (!ok || ess < floor) {
            res.ess_collapsed = true;
            std::ostringstream os;
            os << "effective sample size collapsed: ESS = " << ess << " < " << floor
               << (ok ? "" : " (non-finite weights)") << "; estimate is not reliable";
            res.diagnostic = os.str();
            if (!ok) {
                res.mean = std::numeric_limits<double>::quiet_NaN();
                res.std_error = std::numeric_limits<double>::quiet_NaN();
            }
        }
    }
    return out;
}

FeynmanKacResult feynman_kac_estimate(const FeynmanKacConfig& cfg, Execution exec) {
    return feynman_kac_estimate_many(cfg, {cfg.observable}, exec).front();
}

}  // namespace spqm
