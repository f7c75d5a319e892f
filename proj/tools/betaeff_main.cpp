// Command line front end: benchmark tables, asymptotic efficiencies,
// Hellinger distances, single power evaluations, matched efficiencies and
// scaling probes. Exit status: 0 ok, 1 tolerance/runtime failure, 2 usage.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "betaeff/tables.hpp"

#ifndef BETAEFF_DATA_DIR
#define BETAEFF_DATA_DIR "data/tables"
#endif

namespace {

using namespace betaeff;

struct CommonOpts {
    std::uint64_t seed = 1;
    long long reps = 100000;
    double alpha = 0.05;
    std::string cv_rule = "paper";
    int threads = 0;
    std::string out;
    std::string cache_path;
    std::string format = "csv";
    long long cal_reps = 200000;
    std::uint64_t cal_seed = 0x5eedc0deull;
    long long n_max = default_n_max;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--seed", o.seed, "global random seed");
    cmd->add_option("--reps", o.reps, "Monte Carlo replications");
    cmd->add_option("--alpha", o.alpha, "test level");
    cmd->add_option("--cv-rule", o.cv_rule, "critical values: paper|normal|mc")
        ->check(CLI::IsMember({"paper", "normal", "mc"}));
    cmd->add_option("--threads", o.threads,
                    "worker threads (0 = hardware); never changes results");
    cmd->add_option("--out", o.out, "write output to this file");
    cmd->add_option("--cache", o.cache_path, "file-backed power cache");
    cmd->add_option("--format", o.format, "output format")
        ->check(CLI::IsMember({"csv", "md"}));
    cmd->add_option("--cal-reps", o.cal_reps,
                    "replications for mc-calibrated thresholds");
    cmd->add_option("--cal-seed", o.cal_seed,
                    "seed for mc-calibrated thresholds");
    cmd->add_option("--n-max", o.n_max, "sample size search cap");
}

McConfig make_config(const CommonOpts& o, TestId test_for_rule) {
    McConfig cfg;
    cfg.reps = o.reps;
    cfg.seed = o.seed;
    cfg.threads_hint = o.threads;
    if (o.cv_rule == "paper") {
        cfg.cv_rule.kind = test_for_rule == TestId::T
                               ? CriticalValueRule::Kind::formula_t
                               : CriticalValueRule::Kind::normal_approx;
    } else if (o.cv_rule == "normal") {
        cfg.cv_rule.kind = CriticalValueRule::Kind::normal_approx;
    } else {
        cfg.cv_rule.kind = CriticalValueRule::Kind::mc_calibrated;
    }
    cfg.cv_rule.alpha = o.alpha;
    cfg.cv_rule.reps = o.cal_reps;
    cfg.cv_rule.seed = o.cal_seed;
    return cfg;
}

std::unique_ptr<PowerCache> make_cache(const CommonOpts& o) {
    if (o.cache_path.empty()) return nullptr;
    return std::make_unique<PowerCache>(o.cache_path);
}

int emit(const CommonOpts& o, const std::string& text) {
    if (o.out.empty()) {
        std::cout << text;
        return 0;
    }
    std::ofstream f(o.out);
    if (!f) {
        std::cerr << "cannot write " << o.out << "\n";
        return 1;
    }
    f << text;
    return 0;
}

std::map<std::string, double> parse_params(
    const std::vector<std::string>& kvs) {
    std::map<std::string, double> params;
    for (const std::string& kv : kvs) {
        const auto pos = kv.find('=');
        if (pos == std::string::npos || pos == 0)
            throw CLI::ValidationError("--param expects name=value, got '" +
                                       kv + "'");
        params[kv.substr(0, pos)] = std::stod(kv.substr(pos + 1));
    }
    return params;
}

std::string fmt_opt(const std::optional<double>& v) {
    if (!v) return "-";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", *v);
    return buf;
}

// ---- table ----------------------------------------------------------------

int cmd_table(const CommonOpts& o, const std::vector<int>& ids,
              const std::string& data_dir, bool heavy, bool has_reps) {
    std::vector<int> tables = ids;
    if (tables.empty()) tables = {1, 2, 3, 4, 5, 6, 7};

    auto cache = make_cache(o);
    TableRunOptions opts;
    opts.mc.seed = o.seed;
    opts.mc.threads_hint = o.threads;
    opts.mc.cv_rule.reps = o.cal_reps;
    opts.mc.cv_rule.seed = o.cal_seed;
    opts.cv_rule = o.cv_rule;
    if (has_reps) opts.reps_override = o.reps;
    opts.include_heavy = heavy;
    opts.cache = cache.get();

    std::ostringstream out;
    bool all_ok = true;
    for (int id : tables) {
        const std::string path =
            data_dir + "/table" + std::to_string(id) + ".json";
        const TableSpec spec = load_table_spec(path);
        const TableRunResult result = run_table(spec, opts);
        all_ok = all_ok && result.all_ok;
        out << (o.format == "md" ? render_markdown(result)
                                 : render_csv(result));
        if (o.format == "md") out << '\n';
        for (const RowResult& rr : result.rows) {
            for (const std::string& f : rr.failures) {
                std::cerr << "table " << id << " [" << rr.row.label
                          << "]: " << f << "\n";
            }
        }
    }
    const int rc = emit(o, out.str());
    if (rc != 0) return rc;
    return all_ok ? 0 : 1;
}

// ---- pitman ---------------------------------------------------------------

int cmd_pitman(const CommonOpts& o, double p, double q, bool has_pq,
               const std::string& path_name,
               const std::vector<std::string>& params) {
    std::ostringstream out;
    if (!path_name.empty()) {
        const Path path = builtin_path(path_name, parse_params(params));
        const PitmanResult res = pitman_path(path);
        const SlopeEstimate sv = path_slopes(path, TestId::V);
        const SlopeEstimate st = path_slopes(path, TestId::T);
        out << "path=" << path.name << "\n";
        out << "mu_slope_v=" << fmt_opt(sv.mu_slope0)
            << " sigma0_v=" << fmt_opt(sv.sigma0) << "\n";
        out << "mu_slope_t=" << fmt_opt(st.mu_slope0)
            << " sigma0_t=" << fmt_opt(st.sigma0) << "\n";
        out << "c_v=" << fmt_opt(res.c_v) << "\n";
        out << "c_t=" << fmt_opt(res.c_t) << "\n";
        out << "efficiency=" << fmt_opt(res.efficiency) << "\n";
        if (path.closed_form_efficiency)
            out << "closed_form=" << fmt_opt(*path.closed_form_efficiency)
                << "\n";
    } else if (has_pq) {
        out << "efficiency=" << fmt_opt(pitman_linear(p, q)) << "\n";
    } else {
        throw CLI::ValidationError(
            "pitman needs either --p/--q or --path");
    }
    return emit(o, out.str());
}

// ---- hellinger ------------------------------------------------------------

int cmd_hellinger(const CommonOpts& o, const Alternative& a,
                  const std::optional<Alternative>& b, long long n) {
    const Alternative other = b ? *b : Alternative::null();
    const double h = hellinger(a, other);
    std::ostringstream out;
    out << "h=" << fmt_opt(h) << "\n";
    if (n > 1) out << "h_product=" << fmt_opt(hellinger_product(h, n)) << "\n";
    return emit(o, out.str());
}

// ---- power ----------------------------------------------------------------

int cmd_power(const CommonOpts& o, TestId test, const Alternative& alt,
              long long n) {
    auto cache = make_cache(o);
    PowerEvaluator eval;
    eval.base = make_config(o, test);
    eval.cache = cache.get();
    const PowerEstimate est = eval.evaluate(test, alt, n);
    std::ostringstream out;
    out << "test=" << to_string(test) << " n=" << n
        << " power=" << fmt_opt(est.power) << " se=" << fmt_opt(est.se)
        << " reps=" << est.reps << "\n";
    return emit(o, out.str());
}

// ---- ere ------------------------------------------------------------------

int cmd_ere(const CommonOpts& o, const Alternative& alt, long long anchor_n) {
    auto cache = make_cache(o);
    EfficiencyReport rep;
    if (o.cv_rule != "paper") {
        rep = matched_ere(alt, o.alpha, anchor_n, make_config(o, TestId::T),
                          cache.get(), o.n_max);
    } else {
        // The "paper" rule is per-test (normal approximation for the mean
        // test, the calibrated formula for the second-moment test), so the
        // anchor and the matched search run with different rule kinds.
        PowerEvaluator ev;
        ev.base = make_config(o, TestId::V);
        ev.cache = cache.get();
        rep.alt = alt;
        rep.alpha = o.alpha;
        rep.n_v = anchor_n;
        rep.power_v = ev.evaluate(TestId::V, alt, anchor_n);
        const SampleSizeResult match = min_sample_size(
            TestId::T, alt, o.alpha, rep.power_v.power,
            make_config(o, TestId::T), cache.get(), o.n_max, anchor_n);
        rep.n_t = match.n;
        rep.power_t = match.achieved_power;
        rep.ere = static_cast<double>(rep.n_v) / static_cast<double>(rep.n_t);
        if (!alt.beta.is_uniform()) {
            try {
                rep.pitman_linear_value =
                    pitman_linear(alt.beta.p, alt.beta.q);
            } catch (const std::exception&) {
            }
        }
        try {
            rep.hellinger_from_null = hellinger(alt, Alternative::null());
        } catch (const QuadratureError&) {
        }
    }
    std::ostringstream out;
    out << "n_v=" << rep.n_v << " power_v=" << fmt_opt(rep.power_v.power)
        << "\n";
    out << "n_t=" << rep.n_t << " power_t=" << fmt_opt(rep.power_t.power)
        << "\n";
    out << "ere=" << fmt_opt(rep.ere) << "\n";
    out << "pitman_linear=" << fmt_opt(rep.pitman_linear_value) << "\n";
    out << "hellinger=" << fmt_opt(rep.hellinger_from_null) << "\n";
    return emit(o, out.str());
}

// ---- probe ----------------------------------------------------------------

int cmd_probe(const CommonOpts& o, const std::string& path_name,
              const std::vector<std::string>& params, TestId test,
              double beta_power, std::vector<double> grid) {
    if (grid.empty()) grid = {0.4, 0.2, 0.1};
    auto cache = make_cache(o);
    const Path path = builtin_path(path_name, parse_params(params));
    const McConfig cfg = make_config(o, test);
    const ProbeSeries series = convergence_probe(
        path, test, o.alpha, beta_power, grid, cfg, cache.get(), o.n_max);
    std::ostringstream out;
    out << "path=" << path.name << " test=" << to_string(test)
        << " c=" << fmt_opt(series.c_value)
        << " limit=" << fmt_opt(series.theory_limit) << "\n";
    for (const ProbePoint& pt : series.points) {
        out << "s=" << fmt_opt(pt.s) << " n=" << pt.n
            << " s_sqrt_n=" << fmt_opt(pt.s_sqrt_n)
            << " power=" << fmt_opt(pt.achieved.power)
            << (pt.capped ? " capped" : "") << "\n";
    }
    return emit(o, out.str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Uniformity test efficiency toolkit"};
    app.require_subcommand(1);

    CommonOpts o;

    // table
    auto* t = app.add_subcommand("table", "re-run bundled benchmark tables");
    std::vector<int> table_ids;
    std::string data_dir = BETAEFF_DATA_DIR;
    bool heavy = false;
    t->add_option("--table", table_ids, "table ids (default: all)")
        ->check(CLI::Range(1, 7));
    t->add_option("--data-dir", data_dir, "directory with tableN.json");
    t->add_flag("--heavy", heavy, "include cells needing n >= 15000");
    add_common(t, o);
    auto* t_reps = t->get_option("--reps");

    // pitman
    auto* pi = app.add_subcommand("pitman", "asymptotic relative efficiency");
    double pi_p = 0, pi_q = 0;
    std::string pi_path;
    std::vector<std::string> pi_params;
    auto* pi_po = pi->add_option("--p", pi_p, "first shape");
    auto* pi_qo = pi->add_option("--q", pi_q, "second shape");
    pi->add_option("--path", pi_path, "built-in family name");
    pi->add_option("--param", pi_params, "family parameter name=value");
    add_common(pi, o);

    // hellinger
    auto* h = app.add_subcommand("hellinger", "Hellinger distance");
    double h_p = 1, h_q = 1, h_eps = 1, h_p2 = 1, h_q2 = 1, h_eps2 = 1;
    long long h_n = 1;
    h->add_option("--p", h_p, "first shape")->required();
    h->add_option("--q", h_q, "second shape")->required();
    h->add_option("--eps", h_eps, "mixture weight");
    auto* h_p2o = h->add_option("--p2", h_p2, "first shape, second density");
    h->add_option("--q2", h_q2, "second shape, second density");
    h->add_option("--eps2", h_eps2, "mixture weight, second density");
    h->add_option("-n,--n", h_n, "product sample size");
    add_common(h, o);

    // power
    auto* pw = app.add_subcommand("power", "Monte Carlo power");
    std::string pw_test = "V";
    double pw_p = 1, pw_q = 1, pw_eps = 1;
    long long pw_n = 0;
    pw->add_option("--test", pw_test, "V or T")
        ->check(CLI::IsMember({"V", "T"}));
    pw->add_option("--p", pw_p, "first shape")->required();
    pw->add_option("--q", pw_q, "second shape")->required();
    pw->add_option("--eps", pw_eps, "mixture weight");
    pw->add_option("--n", pw_n, "sample size")->required();
    add_common(pw, o);

    // ere
    auto* er = app.add_subcommand("ere", "power-matched relative efficiency");
    double er_p = 1, er_q = 1, er_eps = 1;
    long long er_anchor = 0;
    er->add_option("--p", er_p, "first shape")->required();
    er->add_option("--q", er_q, "second shape")->required();
    er->add_option("--eps", er_eps, "mixture weight");
    er->add_option("--anchor-n", er_anchor, "mean-test sample size")
        ->required();
    add_common(er, o);

    // probe
    auto* pr = app.add_subcommand("probe", "sample size scaling probe");
    std::string pr_path;
    std::vector<std::string> pr_params;
    std::string pr_test = "V";
    double pr_beta = 0.5;
    std::vector<double> pr_grid;
    pr->add_option("--path", pr_path, "built-in family name")->required();
    pr->add_option("--param", pr_params, "family parameter name=value");
    pr->add_option("--test", pr_test, "V or T")
        ->check(CLI::IsMember({"V", "T"}));
    pr->add_option("--beta", pr_beta, "target power");
    pr->add_option("--s", pr_grid, "decreasing grid of scale values");
    add_common(pr, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (t->parsed())
            return cmd_table(o, table_ids, data_dir, heavy,
                             t_reps->count() > 0);
        if (pi->parsed())
            return cmd_pitman(o, pi_p, pi_q,
                              pi_po->count() > 0 && pi_qo->count() > 0,
                              pi_path, pi_params);
        if (h->parsed()) {
            Alternative a(h_eps, BetaParams(h_p, h_q));
            std::optional<Alternative> b;
            if (h_p2o->count() > 0)
                b = Alternative(h_eps2, BetaParams(h_p2, h_q2));
            return cmd_hellinger(o, a, b, h_n);
        }
        if (pw->parsed())
            return cmd_power(o, test_from_string(pw_test),
                             Alternative(pw_eps, BetaParams(pw_p, pw_q)),
                             pw_n);
        if (er->parsed())
            return cmd_ere(o, Alternative(er_eps, BetaParams(er_p, er_q)),
                           er_anchor);
        if (pr->parsed())
            return cmd_probe(o, pr_path, pr_params,
                             test_from_string(pr_test), pr_beta, pr_grid);
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
