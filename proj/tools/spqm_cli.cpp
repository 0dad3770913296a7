#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "spqm/acceptance.hpp"
#include "spqm/dists.hpp"
#include "spqm/errors.hpp"
#include "spqm/group.hpp"
#include "spqm/moments.hpp"
#include "spqm/parallel.hpp"
#include "spqm/paths.hpp"
#include "spqm/povm.hpp"

namespace {

using namespace spqm;
using json = nlohmann::json;

/// \brief Parameters shared by every subcommand.
struct ExperimentConfig {
    double kappa = 1.0;
    double t_final = 1.0;
    double dt = 1e-3;
    int dim = 24;
    int paths = 1000;
    std::uint64_t seed = 7;
    std::string out_path;
    std::string format = "csv";
};

/// A usage error detected after parsing (exit status 2).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Field = std::variant<double, long long, std::string>;

/// \brief Rows of one output file; written as CSV or JSON lines after the metadata line.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Field>> rows;

    void add(std::vector<Field> row) { rows.push_back(std::move(row)); }
};

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string format_field(const Field& f) {
    if (const auto* d = std::get_if<double>(&f)) {
        if (!std::isfinite(*d)) return "";
        std::ostringstream os;
        os << std::setprecision(12) << *d;
        return os.str();
    }
    if (const auto* i = std::get_if<long long>(&f)) return std::to_string(*i);
    return csv_quote(std::get<std::string>(f));
}

json field_json(const Field& f) {
    if (const auto* d = std::get_if<double>(&f)) return std::isfinite(*d) ? json(*d) : json(nullptr);
    if (const auto* i = std::get_if<long long>(&f)) return *i;
    return std::get<std::string>(f);
}

json metadata(const std::string& subcommand, const ExperimentConfig& cfg, bool uses_dt) {
    json m;
    m["artifact"] = "spqm";
    m["version"] = kVersion;
    m["subcommand"] = subcommand;
    m["kappa"] = cfg.kappa;
    m["t_final"] = cfg.t_final;
    m["dt"] = uses_dt ? json(cfg.dt) : json(nullptr);
    m["dim"] = cfg.dim;
    m["paths"] = cfg.paths;
    m["seed"] = cfg.seed;
    m["format"] = cfg.format;
    // Per-path values are reduced serially in index order.
    m["parallel_reduction_tolerance"] = 0.0;
    return m;
}

/// Single writer: metadata line, then the table in the requested format.
void write_output(const ExperimentConfig& cfg, const json& meta, const Table& table) {
    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!cfg.out_path.empty()) {
        file.open(cfg.out_path);
        if (!file) throw std::runtime_error("cannot open output file " + cfg.out_path);
        os = &file;
    }
    *os << meta.dump() << '\n';
    if (cfg.format == "csv") {
        for (std::size_t i = 0; i < table.columns.size(); ++i) *os << (i ? "," : "") << csv_quote(table.columns[i]);
        *os << '\n';
        for (const auto& row : table.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) *os << (i ? "," : "") << format_field(row[i]);
            *os << '\n';
        }
    } else {
        for (const auto& row : table.rows) {
            json obj;
            for (std::size_t i = 0; i < row.size(); ++i) obj[table.columns[i]] = field_json(row[i]);
            *os << obj.dump() << '\n';
        }
    }
}

int steps_of(double T, double dt) {
    const double n = T / dt;
    const long long N = std::llround(n);
    if (N < 1 || std::abs(n - static_cast<double>(N)) > 1e-9 * std::max(1.0, n))
        throw UsageError("--t-final must be a positive multiple of --dt");
    if (N > 100000000LL) throw UsageError("--t-final/--dt gives too many steps");
    return static_cast<int>(N);
}

void validate(const ExperimentConfig& cfg, bool uses_dt) {
    if (!(cfg.kappa > 0.0)) throw UsageError("--kappa must be > 0");
    if (!(cfg.t_final > 0.0)) throw UsageError("--t-final must be > 0");
    if (cfg.dim < 2) throw UsageError("--dim must be >= 2");
    if (cfg.paths < 1) throw UsageError("--paths must be >= 1");
    if (cfg.format != "csv" && cfg.format != "json") throw UsageError("--format must be csv or json");
    if (uses_dt) {
        if (!(cfg.dt > 0.0)) throw UsageError("--dt must be > 0");
        steps_of(cfg.t_final, cfg.dt);
    }
}

Table simulate(const ExperimentConfig& cfg, bool trajectory) {
    const int N = steps_of(cfg.t_final, cfg.dt);
    Table t;
    if (trajectory) {
        t.columns = {"step", "t", "nu_re", "nu_im", "r", "s", "psi", "mu_re", "mu_im",
                     "beta_re", "beta_im", "alpha_re", "alpha_im", "ell", "phi"};
        const WienerPath p = sample_wiener(N, cfg.dt, cfg.kappa, cfg.seed, 0);
        const Trajectory tr = propagate_sde(p, Chart::Cartan);
        for (int k = 0; k <= N; ++k) {
            const HCCoords& x = tr.hc[static_cast<std::size_t>(k)];
            std::vector<Field> row{static_cast<long long>(k), tr.times[static_cast<std::size_t>(k)], x.nu.real(),
                                   x.nu.imag(), x.r, x.s(), x.psi(), x.mu.real(), x.mu.imag()};
            if (k == 0) {
                for (int i = 0; i < 6; ++i) row.emplace_back(std::nan(""));
            } else {
                const CartanCoords& y = tr.cartan[static_cast<std::size_t>(k - 1)];
                for (const double v : {y.beta.real(), y.beta.imag(), y.alpha.real(), y.alpha.imag(), y.ell, y.phi})
                    row.emplace_back(v);
            }
            t.add(std::move(row));
        }
        return t;
    }
    t.columns = {"path", "nu_re", "nu_im", "r", "s", "psi", "mu_re", "mu_im", "hc_recursion_vs_sums",
                 "cartan_beta_alpha_error", "cartan_phi_error", "cartan_ell_error"};
    struct Endpoint {
        HCCoords x;
        double e_hc = 0.0, e_ba = 0.0, e_phi = 0.0, e_ell = 0.0;
    };
    std::vector<Endpoint> ends(static_cast<std::size_t>(cfg.paths));
    for_each_index(Execution::Parallel, cfg.paths, [&](std::int64_t i) {
        const WienerPath p = sample_wiener(N, cfg.dt, cfg.kappa, cfg.seed, static_cast<std::uint64_t>(i));
        const Trajectory tr = propagate_sde(p, Chart::Cartan);
        const HCCoords& x = tr.hc.back();
        const HCCoords cf = closed_form_hc(p);
        const CartanCoords ref = hc_to_cartan(x);
        const CartanCoords& y = tr.cartan.back();
        Endpoint& e = ends[static_cast<std::size_t>(i)];
        e.x = x;
        e.e_hc = std::max({std::abs(x.nu - cf.nu), std::abs(x.mu - cf.mu), std::abs(x.z - cf.z)});
        e.e_ba = std::max(std::abs(y.beta - ref.beta), std::abs(y.alpha - ref.alpha));
        e.e_phi = std::abs(std::remainder(y.phi - ref.phi, 2.0 * M_PI));
        e.e_ell = std::abs(y.ell - (x.s() - gauge_functions(x).f));
    });
    for (std::size_t i = 0; i < ends.size(); ++i) {
        const Endpoint& e = ends[i];
        t.add({static_cast<long long>(i), e.x.nu.real(), e.x.nu.imag(), e.x.r, e.x.s(), e.x.psi(), e.x.mu.real(),
               e.x.mu.imag(), e.e_hc, e.e_ba, e.e_phi, e.e_ell});
    }
    return t;
}

Table moments(const ExperimentConfig& cfg, bool with_kernel, int points) {
    const double kT = cfg.kappa * cfg.t_final;
    const int per = std::max(1, static_cast<int>(std::ceil(kRiccatiMinStepsPerUnit * 10.0 * kT / points)));
    const RiccatiSolution sol = riccati_integrate(cfg.kappa, cfg.t_final, per * points);
    Table t;
    t.columns = {"t", "kT", "n", "m", "q", "n_riccati", "m_riccati", "q_riccati", "det", "n_kernel", "m_kernel",
                 "q_kernel", "det_kernel"};
    constexpr int kMaxKernel = 4000;
    for (int i = 0; i <= points; ++i) {
        const std::size_t j = static_cast<std::size_t>(i * per);
        const double ti = sol.t[j];
        const AnalyticMoments a = analytic_moments(cfg.kappa * ti);
        std::vector<Field> row{ti, cfg.kappa * ti, a.n, a.m, a.q, sol.n[j], sol.m[j], sol.q[j],
                               analytic_determinant(cfg.kappa * ti)};
        const double nan = std::nan("");
        double kn = nan, km = nan, kq = nan, kd = nan;
        if (with_kernel && i > 0) {
            const double steps = ti / cfg.dt;
            const long long N = std::llround(steps);
            if (N >= 1 && N <= kMaxKernel && std::abs(steps - N) <= 1e-9 * steps) {
                const Kernel K = build_kernel(static_cast<int>(N), cfg.dt, cfg.kappa);
                const MomentTriple m = direct_moments(K);
                kn = m.n;
                km = m.m;
                kq = m.q;
                kd = direct_determinant(K);
            }
        }
        for (const double v : {kn, km, kq, kd}) row.emplace_back(v);
        t.add(std::move(row));
    }
    return t;
}

Table distributions(const ExperimentConfig& cfg, int points) {
    Table t;
    t.columns = {"quantity", "kT", "value", "std_error"};
    const double nan = std::nan("");
    for (int i = 1; i <= points; ++i) {
        const double kT = cfg.kappa * cfg.t_final * i / points;
        const auto c = hc_exponent_coefficients(kT);
        t.add({std::string("sigma"), kT, sigma_width(kT), nan});
        t.add({std::string("sigma_rate"), kT, sigma_rate(1.0, kT), nan});
        t.add({std::string("normalization"), kT, normalization_factor(kT), nan});
        t.add({std::string("hc_sum_coefficient"), kT, c.a, nan});
        t.add({std::string("hc_difference_coefficient"), kT, c.b, nan});
    }
    const double kT = cfg.kappa * cfg.t_final;
    FeynmanKacConfig fk;
    fk.n_paths = std::max(2, cfg.paths);
    fk.N = steps_of(cfg.t_final, cfg.dt);
    fk.dt = cfg.dt;
    fk.kappa = cfg.kappa;
    fk.seed = cfg.seed;
    fk.weight = PathWeight::ExpMinus2s;
    const FeynmanKacResult w = feynman_kac_estimate(fk);
    if (w.ess_collapsed) std::cerr << "warning: " << w.diagnostic << '\n';
    t.add({std::string("mc_plain_exp(-2s)"), kT, w.mean, w.std_error});
    t.add({std::string("mc_plain_exp(-2s)_ess"), kT, w.ess, nan});
    fk.weight = PathWeight::None;
    fk.measure = PathMeasure::Modified;
    const auto mm = feynman_kac_estimate_many(fk, {Observable::NuSq, Observable::MuSq, Observable::NuStarMuRe});
    t.add({std::string("mc_modified_|nu|^2"), kT, mm[0].mean, mm[0].std_error});
    t.add({std::string("mc_modified_|mu|^2"), kT, mm[1].mean, mm[1].std_error});
    t.add({std::string("mc_modified_Re(nu*mu)"), kT, mm[2].mean, mm[2].std_error});
    return t;
}

Table povm(const ExperimentConfig& cfg) {
    const double kT = cfg.kappa * cfg.t_final;
    Table t;
    t.columns = {"quantity", "value", "std_error"};
    const double nan = std::nan("");
    const PartitionCheck pc = partition_function_check(kT, cfg.dim);
    if (pc.truncation_warning) std::cerr << "warning: " << pc.warning << '\n';
    t.add({std::string("partition_trace"), pc.trace, nan});
    t.add({std::string("partition_closed_form"), pc.closed_form, nan});
    t.add({std::string("partition_residual"), pc.residual, nan});
    const CompletenessResult c = completeness_quadrature(kT, cfg.dim, 32, 64);
    if (!c.grid_converged) std::cerr << "warning: completeness quadrature grid not converged\n";
    t.add({std::string("completeness_deviation"), c.deviation, nan});
    t.add({std::string("completeness_refined_deviation"), c.refined_deviation, nan});
    t.add({std::string("completeness_schur_deviation"), c.schur_deviation, nan});
    CMatrix rho = CMatrix::Zero(cfg.dim, cfg.dim);
    rho(0, 0) = 1.0;
    const ChannelReport r = channel_monte_carlo(rho, kT, std::max(2, cfg.paths), cfg.dt, cfg.dim, cfg.seed, cfg.kappa);
    t.add({std::string("channel_trace_distance"), r.channel_distance, nan});
    t.add({std::string("channel_trace"), r.trace_mean, r.trace_std_error});
    t.add({std::string("channel_leakage"), r.leakage, nan});
    return t;
}

std::vector<int> parse_ids(const std::string& list) {
    std::vector<int> ids;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const int id = std::stoi(item);
        if (id < 1 || id > kCriterionCount) throw UsageError("--only: ids must be in 1.." + std::to_string(kCriterionCount));
        ids.push_back(id);
    }
    return ids;
}

int verify(const ExperimentConfig& cfg, const std::string& only) {
    AcceptanceConfig ac;
    ac.kappa = cfg.kappa;
    ac.t_final = cfg.t_final;
    ac.dt = cfg.dt;
    ac.dim = cfg.dim;
    ac.paths = cfg.paths;
    ac.seed = cfg.seed;
    const std::vector<int> ids = parse_ids(only);
    const auto results = run_acceptance(ac, ids, [](const CriterionResult& r) {
        std::cerr << std::setw(2) << r.id << ' ' << (r.passed ? "PASS" : "FAIL") << "  " << std::left
                  << std::setw(18) << r.name << std::right << ' ' << r.detail << "  [" << std::fixed
                  << std::setprecision(1) << r.seconds << " s]" << std::defaultfloat << '\n';
    });
    Table t;
    t.columns = {"id", "name", "passed", "seconds", "detail"};
    bool all = true;
    for (const auto& r : results) {
        all = all && r.passed;
        t.add({static_cast<long long>(r.id), r.name, std::string(r.passed ? "true" : "false"), r.seconds, r.detail});
    }
    json meta = metadata("verify", cfg, true);
    meta["all_passed"] = all;
    write_output(cfg, meta, t);
    std::cerr << (all ? "all checks passed" : "some checks FAILED") << '\n';
    return all ? 0 : 1;
}

void add_common(CLI::App& app, ExperimentConfig& cfg) {
    app.add_option("--kappa", cfg.kappa, "Measurement rate kappa")->capture_default_str();
    app.add_option("--t-final", cfg.t_final, "Final time T")->capture_default_str();
    app.add_option("--dt", cfg.dt, "Time step (required except for moments)");
    app.add_option("--dim", cfg.dim, "Fock truncation dimension")->capture_default_str();
    app.add_option("--paths", cfg.paths, "Monte Carlo paths")->capture_default_str();
    app.add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
    app.add_option("--out", cfg.out_path, "Output file (default: stdout)");
    app.add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simultaneous P&Q measurement: trajectories, moments, distributions and POVM checks"};
    app.name("spqm");
    app.set_config("--config", "", "Plain-text key=value file with the options above");
    ExperimentConfig cfg;
    add_common(app, cfg);
    app.require_subcommand(1);
    app.fallthrough();

    bool trajectory = false;
    int points = 50;
    std::string only;
    auto* sim = app.add_subcommand("simulate", "Sample paths; HC and Cartan integration with closed-form cross-checks");
    sim->add_flag("--trajectory", trajectory, "Write every step of path 0 instead of per-path endpoints");
    auto* mom = app.add_subcommand("moments", "Kernel, Riccati and closed-form moment sweep over [0, T]");
    mom->add_option("--points", points, "Rows in the sweep")->check(CLI::PositiveNumber);
    auto* dis = app.add_subcommand("distributions", "Sigma, N_T, density coefficients and weighted Monte Carlo");
    dis->add_option("--points", points, "Rows in the sweep")->check(CLI::PositiveNumber);
    auto* pov = app.add_subcommand("povm", "Partition identity, completeness quadrature and channel Monte Carlo");
    auto* ver = app.add_subcommand("verify", "Run the numbered acceptance checks; exit 0 iff all pass");
    ver->add_option("--only", only, "Comma-separated subset of check ids");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    const int workers = apply_worker_env();
    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    const bool uses_dt = name != "moments" || app.count("--dt") > 0;
    try {
        if (name != "moments" && app.count("--dt") == 0) throw UsageError("--dt is required for " + name);
        validate(cfg, uses_dt);
        std::cerr << "spqm " << name << ": " << workers << " worker(s)\n";
        if (name == "verify") return verify(cfg, only);
        Table t;
        if (name == "simulate")
            t = simulate(cfg, trajectory);
        else if (name == "moments")
            t = moments(cfg, uses_dt, points);
        else if (name == "distributions")
            t = distributions(cfg, points);
        else
            t = povm(cfg);
        json meta = metadata(name, cfg, uses_dt);
        if (name == "moments" || name == "distributions") meta["points"] = points;
        write_output(cfg, meta, t);
        return 0;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help() << '\n' << sub->help();
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
