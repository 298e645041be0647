#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "kfp/exponents.hpp"
#include "kfp/fluxes.hpp"
#include "kfp/lattice.hpp"
#include "kfp/pde.hpp"
#include "kfp/profiles.hpp"
#include "kfp/reproduce.hpp"
#include "kfp/sde.hpp"
#include "kfp/specfun.hpp"
#include "kfp/stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "kfp 0.1.0";

std::string timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

struct Manifest {
    std::string command;
    json config;
    std::uint64_t seed = 0;
    std::string started = timestamp();
    std::vector<std::string> outputs;

    void write(const fs::path& dir) {
        json m;
        m["command"] = command;
        m["config"] = config;
        m["seed"] = seed;
        m["version"] = kVersion;
        m["started"] = started;
        m["finished"] = timestamp();
        m["outputs"] = outputs;
        std::ofstream out(dir / "manifest.json");
        out << m.dump(2) << "\n";
    }
};

std::ofstream open_csv(Manifest& manifest, const fs::path& dir,
                       const std::string& name) {
    fs::create_directories(dir);
    manifest.outputs.push_back((dir / name).string());
    std::ofstream out(dir / name);
    out << std::setprecision(17);
    return out;
}

double parse_lambda(const std::string& text, double h) {
    const auto star = text.find('*');
    if (star == std::string::npos) return std::stod(text);
    const std::string head = text.substr(0, star);
    const std::string rest = text.substr(star + 1);
    if (rest != "h") throw CLI::ValidationError("--lambda", "expected <v> or <mu>*h");
    return std::stod(head) * h;
}

double parse_gamma(const std::string& text, double r) {
    if (text == "m23") return -2.0 / 3.0;
    if (text == "alpha") return kfp::alpha_of_r(r);
    return std::stod(text);
}

json constants_json(const kfp::RestitutionConstants& c) {
    json j;
    j["r"] = c.r;
    j["r_c"] = c.r_c;
    j["alpha"] = c.alpha;
    j["beta"] = c.beta;
    j["k_alpha"] = c.k_alpha;
    j["kappa"] = c.kappa;
    if (std::isnan(c.c_star)) j["c_star"] = nullptr;
    else j["c_star"] = c.c_star;
    return j;
}

int run_specfun(const std::string& func, double a, double b, double z) {
    // snap b to the supported exact values for convenience
    if (std::abs(b - 2.0 / 3.0) < 1e-3) b = 2.0 / 3.0;
    if (std::abs(b - 4.0 / 3.0) < 1e-3) b = 4.0 / 3.0;
    if (func == "M") {
        std::printf("%.17g\n", kfp::kummer_m(a, b, z));
    } else if (func == "U") {
        std::printf("%.17g\n", kfp::tricomi_u(a, b, z));
    } else if (func == "lngamma") {
        const auto lg = kfp::ln_gamma(a);
        std::printf("%.17g\n", lg.log_abs);
        std::printf("%d\n", lg.sign);
    } else {
        std::cerr << "unknown --func " << func << "\n";
        return 2;
    }
    return 0;
}

kfp::PdeBc parse_bc(const std::string& text, double& mu_star) {
    if (text == "trap") return kfp::PdeBc::Trapping;
    if (text == "nontrap") return kfp::PdeBc::Nontrapping;
    if (text == "super") return kfp::PdeBc::Supercritical;
    if (text.rfind("partial:", 0) == 0) {
        mu_star = std::stod(text.substr(8));
        return kfp::PdeBc::PartialTrapping;
    }
    throw CLI::ValidationError("--bc", "expected trap|nontrap|partial:<mu>|super");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for the kinetic Fokker-Planck equation "
                 "with an inelastic wall"};
    app.set_help_flag("--help", "print help");  // frees -h / --h for options
    app.set_version_flag("--version", kVersion);
    int threads = 0;
    app.add_option("--threads", threads, "worker count (0 = hardware)");

    // ---- specfun eval (debugging aid, hidden from help) ----
    auto* sf = app.add_subcommand("specfun")->group("");
    auto* sf_eval = sf->add_subcommand("eval", "evaluate M/U/lngamma at a point");
    std::string sf_func = "M";
    double sf_a = 0.0, sf_b = 2.0 / 3.0, sf_z = 0.0;
    sf_eval->add_option("--func", sf_func, "M | U | lngamma");
    sf_eval->add_option("--a", sf_a);
    sf_eval->add_option("--b", sf_b);
    sf_eval->add_option("--z", sf_z);

    // ---- exponents ----
    auto* exps = app.add_subcommand("exponents", "r-derived constants");
    double exp_r = 0.1;
    bool exp_json = false;
    exps->add_option("--r", exp_r, "restitution coefficient");
    exps->add_flag("--json", exp_json, "JSON output");
    auto* exp_table = exps->add_subcommand("table", "CSV sweep over r");
    double tab_from = 0.01, tab_to = 1.0;
    int tab_n = 20;
    exp_table->add_option("--from", tab_from)->required();
    exp_table->add_option("--to", tab_to)->required();
    exp_table->add_option("--n", tab_n)->required();

    // ---- profile dump ----
    auto* prof = app.add_subcommand("profile", "self-similar profiles");
    auto* prof_dump = prof->add_subcommand("dump", "CSV x,v,value grid dump");
    std::string prof_kind = "G", prof_gamma = "m23", prof_grid = "64x64";
    double prof_r = 0.1, prof_xmax = 1.0, prof_vmax = 1.0;
    std::string prof_out;
    prof_dump->add_option("--kind", prof_kind, "G | F | S");
    prof_dump->add_option("--r", prof_r);
    prof_dump->add_option("--gamma", prof_gamma, "m23 | alpha (G only)");
    prof_dump->add_option("--grid", prof_grid, "<nx>x<nv>");
    prof_dump->add_option("--xmax", prof_xmax);
    prof_dump->add_option("--vmax", prof_vmax);
    prof_dump->add_option("--out", prof_out, "output directory (default stdout)");

    // ---- flux ----
    auto* flux = app.add_subcommand("flux", "flux lemmas");
    auto* flux_moment = flux->add_subcommand("moment", "zeta-Lambda moment");
    double fm_M = 50.0;
    flux_moment->add_option("--M", fm_M);
    auto* flux_boundary = flux->add_subcommand("boundary", "excision boundary flux");
    std::string fb_gamma = "m23";
    double fb_r = 0.1, fb_delta = 1.0, fb_b = 1e-4;
    flux_boundary->add_option("--gamma", fb_gamma, "m23 | alpha | <number>");
    flux_boundary->add_option("--r", fb_r);
    flux_boundary->add_option("--delta", fb_delta);
    flux_boundary->add_option("--b", fb_b);
    auto* flux_cstar = flux->add_subcommand("cstar", "C* via quadrature");
    double fc_r = 0.05, fc_R = 50.0;
    bool fc_compare = false;
    flux_cstar->add_option("--r", fc_r);
    flux_cstar->add_option("--R", fc_R);
    flux_cstar->add_flag("--compare", fc_compare, "also print the closed form");

    // ---- sde ----
    auto* sde = app.add_subcommand("sde", "inelastic Brownian particle");
    auto* sde_collapse = sde->add_subcommand("collapse", "collapse experiment");
    double sc_r = 0.1, sc_tmax = 50.0;
    std::size_t sc_n = 10000;
    std::uint64_t sc_seed = 1;
    bool sc_json = false;
    std::string sc_csv;
    sde_collapse->add_option("--r", sc_r);
    sde_collapse->add_option("--n", sc_n);
    sde_collapse->add_option("--tmax", sc_tmax);
    sde_collapse->add_option("--seed", sc_seed);
    sde_collapse->add_flag("--json", sc_json);
    sde_collapse->add_option("--csv", sc_csv, "per-path CSV output file");
    auto* sde_hitting = sde->add_subcommand("hitting", "first-return statistics");
    double sh_b = 1.0;
    std::size_t sh_n = 10000;
    std::uint64_t sh_seed = 1;
    std::string sh_csv;
    sde_hitting->add_option("--b", sh_b);
    sde_hitting->add_option("--n", sh_n);
    sde_hitting->add_option("--seed", sh_seed);
    sde_hitting->add_option("--csv", sh_csv, "samples CSV output file");
    auto* sde_sweep = sde->add_subcommand("sweep", "collapse fraction vs r");
    std::string ss_rs = "0.05,0.1,0.14,0.18,0.25";
    std::size_t ss_n = 10000;
    double ss_tmax = 50.0;
    std::uint64_t ss_seed = 1;
    sde_sweep->add_option("--rs", ss_rs, "comma-separated r values");
    sde_sweep->add_option("--n", ss_n);
    sde_sweep->add_option("--tmax", ss_tmax);
    sde_sweep->add_option("--seed", ss_seed);

    // ---- lattice ----
    auto* lat = app.add_subcommand("lattice", "half-line toy model");
    auto* lat_run = lat->add_subcommand("run", "iterate and compare to continuum");
    std::string lr_lambda = "1.0", lr_bc = "neumann", lr_profile_out;
    double lr_h = 1.0 / 128.0, lr_t = 0.25, lr_mu = 1.0;
    lat_run->add_option("--lambda", lr_lambda, "<v> or <mu>*h");
    lat_run->add_option("--h", lr_h);
    lat_run->add_option("--t", lr_t);
    lat_run->add_option("--bc-check", lr_bc, "neumann | dirichlet | dynamic");
    lat_run->add_option("--mu", lr_mu, "dynamic-condition rate");
    lat_run->add_option("--profile-out", lr_profile_out, "CSV profile dump file");

    // ---- pde ----
    auto* pde = app.add_subcommand("pde", "phase-space solver");
    auto* pde_run = pde->add_subcommand("run", "evolve and dump CSV outputs");
    std::string pr_mode = "halfline", pr_bc = "nontrap", pr_out = "pde_out",
                pr_config;
    kfp::PdeConfig pcfg;
    double pr_dt = 0.0;
    pde_run->add_option("--mode", pr_mode, "halfline | strip");
    pde_run->add_option("--bc", pr_bc, "trap|nontrap|partial:<mu>|super");
    pde_run->add_option("--r", pcfg.r);
    pde_run->add_option("--nx", pcfg.nx);
    pde_run->add_option("--nv", pcfg.nv);
    pde_run->add_option("--delta", pcfg.delta);
    pde_run->add_option("--tend", pcfg.tend);
    pde_run->add_option("--dt", pr_dt);
    pde_run->add_option("--L", pcfg.L);
    pde_run->add_option("--V", pcfg.V);
    pde_run->add_option("--x0", pcfg.x0);
    pde_run->add_option("--v0", pcfg.v0);
    pde_run->add_option("--out", pr_out, "output directory");
    pde_run->add_option("--config", pr_config, "JSON config file");

    // ---- reproduce ----
    auto* rep = app.add_subcommand("reproduce", "acceptance experiments");
    auto* rep_all = rep->add_subcommand("all", "run every criterion");
    bool rep_fast = false;
    std::string rep_out;
    std::vector<int> rep_only;
    rep_all->add_flag("--fast", rep_fast, "scaled-down smoke run");
    rep_all->add_option("--out", rep_out, "output directory");
    rep_all->add_option("--only", rep_only, "criterion ids (default all)");

    app.require_subcommand(0, 1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the usage text
        return 2;
    }

    try {
        if (*sf_eval) return run_specfun(sf_func, sf_a, sf_b, sf_z);

        if (*exp_table) {
            std::printf("r,alpha,beta,kappa,c_star\n");
            for (int k = 0; k < tab_n; ++k) {
                const double r =
                    tab_n == 1 ? tab_from
                               : tab_from + (tab_to - tab_from) * k / (tab_n - 1);
                const auto c = kfp::RestitutionConstants::for_r(r);
                std::printf("%.12g,%.12g,%.12g,%.12g,%.12g\n", r, c.alpha, c.beta,
                            c.kappa, c.c_star);
            }
            return 0;
        }
        if (*exps) {
            const auto c = kfp::RestitutionConstants::for_r(exp_r);
            if (exp_json) {
                std::cout << constants_json(c).dump(2) << "\n";
            } else {
                std::printf("%-8s %.12g\n", "r", c.r);
                std::printf("%-8s %.12g\n", "r_c", c.r_c);
                std::printf("%-8s %.12g\n", "alpha", c.alpha);
                std::printf("%-8s %.12g\n", "beta", c.beta);
                std::printf("%-8s %.12g\n", "k_alpha", c.k_alpha);
                std::printf("%-8s %.12g\n", "kappa", c.kappa);
                std::printf("%-8s %.12g\n", "c_star", c.c_star);
            }
            return 0;
        }

        if (*prof_dump) {
            int nx = 64, nv = 64;
            if (std::sscanf(prof_grid.c_str(), "%dx%d", &nx, &nv) != 2)
                throw CLI::ValidationError("--grid", "expected <nx>x<nv>");
            const auto c = kfp::RestitutionConstants::for_r(prof_r);
            auto value = [&](double x, double v) {
                if (prof_kind == "G")
                    return kfp::g_gamma(parse_gamma(prof_gamma, prof_r), x, v);
                if (prof_kind == "F") return kfp::f_beta(c, x, v);
                if (prof_kind == "S") return kfp::supersolution_s(c, x, v);
                throw CLI::ValidationError("--kind", "expected G|F|S");
            };
            std::ostringstream csv;
            csv << std::setprecision(17) << "x,v,value\n";
            for (int i = 1; i <= nx; ++i) {
                const double x = prof_xmax * i / nx;
                for (int j = 0; j <= nv; ++j) {
                    const double v = -prof_vmax + 2.0 * prof_vmax * j / nv;
                    csv << x << "," << v << "," << value(x, v) << "\n";
                }
            }
            if (prof_out.empty()) {
                std::cout << csv.str();
            } else {
                Manifest manifest;
                manifest.command = "profile dump";
                manifest.config = {{"kind", prof_kind}, {"r", prof_r},
                                   {"gamma", prof_gamma}, {"grid", prof_grid},
                                   {"xmax", prof_xmax}, {"vmax", prof_vmax}};
                auto out = open_csv(manifest, prof_out, "profile.csv");
                out << csv.str();
                manifest.write(prof_out);
            }
            return 0;
        }

        if (*flux_moment) {
            std::printf("%.12g\n", kfp::zeta_lambda_moment(fm_M));
            return 0;
        }
        if (*flux_boundary) {
            const double gamma = parse_gamma(fb_gamma, fb_r);
            std::printf("%.12g\n",
                        kfp::boundary_flux(gamma, {fb_delta, fb_b, fb_r}));
            return 0;
        }
        if (*flux_cstar) {
            const auto c = kfp::RestitutionConstants::for_r(fc_r);
            const auto q = kfp::c_star_quadrature(c, fc_R);
            json j;
            j["r"] = fc_r;
            j["R"] = fc_R;
            j["quadrature"] = q.value;
            j["tail"] = q.tail;
            j["tail_exponent"] = q.tail_exponent;
            if (fc_compare) {
                const double closed = kfp::c_star_closed_form(fc_r);
                j["closed_form"] = closed;
                j["relative_deviation"] = std::abs(q.value - closed) / std::abs(closed);
            }
            std::cout << j.dump(2) << "\n";
            return 0;
        }

        if (*sde_collapse) {
            kfp::SimConfig cfg;
            cfg.r = sc_r;
            cfg.n_paths = sc_n;
            cfg.t_max = sc_tmax;
            cfg.seed = sc_seed;
            cfg.threads = threads;
            const auto outcomes = kfp::run_paths(cfg);
            std::size_t collapsed = 0, capped = 0;
            double bounce_sum = 0, time_sum = 0;
            for (const auto& o : outcomes) {
                collapsed += o.collapsed;
                capped += o.bounce_capped;
                bounce_sum += static_cast<double>(o.bounce_count);
                if (o.collapsed) time_sum += o.t_final;
            }
            json j;
            j["r"] = sc_r;
            j["n"] = sc_n;
            j["t_max"] = sc_tmax;
            j["seed"] = sc_seed;
            j["fraction_collapsed"] = static_cast<double>(collapsed) / sc_n;
            j["ci_halfwidth"] = kfp::binomial_ci_halfwidth(collapsed, sc_n);
            j["mean_bounce_count"] = bounce_sum / sc_n;
            j["mean_collapse_time"] =
                collapsed ? time_sum / static_cast<double>(collapsed) : 0.0;
            j["bounce_capped"] = capped;
            if (!sc_csv.empty()) {
                std::ofstream out(sc_csv);
                out << std::setprecision(17) << "path,collapsed,t_final,bounces\n";
                for (std::size_t i = 0; i < outcomes.size(); ++i)
                    out << i << "," << outcomes[i].collapsed << ","
                        << outcomes[i].t_final << "," << outcomes[i].bounce_count
                        << "\n";
                j["csv"] = sc_csv;
            }
            std::cout << j.dump(sc_json ? 2 : -1) << "\n";
            return 0;
        }
        if (*sde_hitting) {
            kfp::SimConfig cfg;
            cfg.seed = sh_seed;
            cfg.threads = threads;
            const auto res = kfp::hitting_statistics(sh_b, sh_n, cfg);
            std::vector<double> t1;
            for (const auto& s : res.samples) t1.push_back(s.t1);
            json j;
            j["b"] = sh_b;
            j["n"] = sh_n;
            j["returned"] = res.samples.size();
            j["censored"] = res.censored;
            j["median_t1"] = kfp::median(t1);
            if (!sh_csv.empty()) {
                std::ofstream out(sh_csv);
                out << std::setprecision(17) << "t1,h1\n";
                for (const auto& s : res.samples)
                    out << s.t1 << "," << s.h1 << "\n";
                j["csv"] = sh_csv;
            }
            std::cout << j.dump(2) << "\n";
            return 0;
        }
        if (*sde_sweep) {
            json arr = json::array();
            std::stringstream ss(ss_rs);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                kfp::SimConfig cfg;
                cfg.r = std::stod(tok);
                cfg.n_paths = ss_n;
                cfg.t_max = ss_tmax;
                cfg.seed = ss_seed;
                cfg.threads = threads;
                const auto s = kfp::collapse_experiment(cfg);
                arr.push_back({{"r", cfg.r},
                               {"fraction", s.fraction},
                               {"ci", s.ci_halfwidth}});
            }
            std::cout << arr.dump(2) << "\n";
            return 0;
        }

        if (*lat_run) {
            const double lambda = parse_lambda(lr_lambda, lr_h);
            auto dist = kfp::LatticeDist::gaussian_initial(lr_h, lambda);
            kfp::run_to_time(dist, lr_t);
            kfp::HeatBc bc;
            if (lr_bc == "neumann") bc = kfp::HeatBc::Neumann;
            else if (lr_bc == "dirichlet") bc = kfp::HeatBc::Dirichlet;
            else if (lr_bc == "dynamic") bc = kfp::HeatBc::Dynamic;
            else throw CLI::ValidationError("--bc-check", "unknown value");
            const auto cmp = kfp::continuum_compare(dist, bc, lr_mu);
            json j;
            j["h"] = lr_h;
            j["lambda"] = lambda;
            j["t"] = dist.time();
            j["max_error"] = cmp.max_error;
            j["m_lattice"] = cmp.m_lattice;
            j["m_reference"] = cmp.m_reference;
            j["continuum_regime"] = cmp.continuum_regime;
            if (!lr_profile_out.empty()) {
                std::ofstream out(lr_profile_out);
                out << std::setprecision(17) << "x,p_over_h\n";
                for (Eigen::Index n = 0; n < dist.p.size(); ++n)
                    out << n * dist.h << "," << dist.p[n] / dist.h << "\n";
                j["csv"] = lr_profile_out;
            }
            std::cout << j.dump(2) << "\n";
            return 0;
        }

        if (*pde_run) {
            if (!pr_config.empty()) {
                std::ifstream in(pr_config);
                if (!in) throw std::runtime_error("cannot open " + pr_config);
                json jc;
                in >> jc;
                pr_mode = jc.value("mode", pr_mode);
                pr_bc = jc.value("bc", pr_bc);
                pcfg.r = jc.value("r", pcfg.r);
                pcfg.nx = jc.value("nx", pcfg.nx);
                pcfg.nv = jc.value("nv", pcfg.nv);
                pcfg.delta = jc.value("delta", pcfg.delta);
                pcfg.tend = jc.value("tend", pcfg.tend);
                pr_dt = jc.value("dt", pr_dt);
                pcfg.L = jc.value("L", pcfg.L);
                pcfg.V = jc.value("V", pcfg.V);
                pcfg.x0 = jc.value("x0", pcfg.x0);
                pcfg.v0 = jc.value("v0", pcfg.v0);
                pcfg.sx = jc.value("sx", pcfg.sx);
                pcfg.sv = jc.value("sv", pcfg.sv);
                pcfg.m0 = jc.value("m0", pcfg.m0);
            }
            pcfg.mode = pr_mode == "strip" ? kfp::PdeMode::Strip
                                           : kfp::PdeMode::HalfLine;
            pcfg.bc = parse_bc(pr_bc, pcfg.mu_star);
            pcfg.dt = pr_dt;

            Manifest manifest;
            manifest.command = "pde run";
            manifest.config = {{"mode", pr_mode}, {"bc", pr_bc}, {"r", pcfg.r},
                               {"nx", pcfg.nx}, {"nv", pcfg.nv},
                               {"delta", pcfg.delta_or_default()},
                               {"tend", pcfg.tend}, {"dt", pcfg.dt},
                               {"L", pcfg.L}, {"V", pcfg.V},
                               {"x0", pcfg.x0}, {"v0", pcfg.v0},
                               {"sx", pcfg.sx}, {"sv", pcfg.sv},
                               {"m0", pcfg.m0}};

            kfp::PdeSystem sys(pcfg);
            auto series = open_csv(manifest, pr_out, "series.csv");
            series << "t,interior_mass,m,a_alpha,a_m23\n";
            sys.run(pcfg.tend, [&](const kfp::TimeSeriesRow& row) {
                series << row.t << "," << row.interior_mass << "," << row.m << ","
                       << row.a_alpha << "," << row.a_m23 << "\n";
            });
            auto snap = open_csv(manifest, pr_out, "snapshot.csv");
            snap << "x,v,P\n";
            const auto& f = sys.field();
            for (Eigen::Index i = 0; i < f.x_nodes.size(); ++i)
                for (Eigen::Index j = 0; j < f.v_nodes.size(); ++j)
                    snap << f.x_nodes[i] << "," << f.v_nodes[j] << ","
                         << f.values(i, j) << "\n";
            manifest.write(pr_out);
            json j;
            j["t"] = sys.time();
            j["interior_mass"] = sys.interior_mass();
            j["m"] = sys.origin().m;
            if (pcfg.mode == kfp::PdeMode::Strip) j["m_far"] = sys.origin_far().m;
            j["total_mass"] = sys.total_mass();
            j["out"] = pr_out;
            std::cout << j.dump(2) << "\n";
            return 0;
        }

        if (*rep_all) {
            kfp::ReproduceOptions opts;
            opts.fast = rep_fast;
            opts.threads = threads;
            opts.out_dir = rep_out;
            std::vector<kfp::CriterionResult> results;
            if (rep_only.empty()) {
                results = kfp::run_all_criteria(opts);
            } else {
                for (int id : rep_only) results.push_back(kfp::run_criterion(id, opts));
            }
            bool all_ok = true;
            for (const auto& res : results) {
                all_ok = all_ok && res.passed;
                std::printf("[%s] %2d %-38s (%.1fs) %s\n",
                            res.passed ? "PASS" : "FAIL", res.id,
                            res.name.c_str(), res.seconds, res.details.c_str());
            }
            if (!rep_out.empty()) {
                Manifest manifest;
                manifest.command = "reproduce all";
                manifest.config = {{"fast", rep_fast}};
                fs::create_directories(rep_out);
                json j = json::array();
                for (const auto& res : results)
                    j.push_back({{"id", res.id}, {"name", res.name},
                                 {"passed", res.passed},
                                 {"details", res.details},
                                 {"seconds", res.seconds}});
                std::ofstream out(fs::path(rep_out) / "criteria.json");
                out << j.dump(2) << "\n";
                manifest.outputs.push_back((fs::path(rep_out) / "criteria.json").string());
                manifest.write(rep_out);
            }
            return all_ok ? 0 : 1;
        }

        std::cout << app.help();
        return 0;
    } catch (const std::exception& e) {
        json err;
        err["error"] = e.what();
        std::cerr << err.dump() << "\n";
        return 1;
    }
}
