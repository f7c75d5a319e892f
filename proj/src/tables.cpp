#include "betaeff/tables.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace betaeff {

namespace {

using nlohmann::json;

// Gate widths. Reference powers are printed to two decimals, so half a
// unit of rounding plus the run's own sampling noise sets the budget.
constexpr double power_gate_base = 0.016;
constexpr double power_gate_se_mult = 4.0;
constexpr double hellinger_gate = 0.002;
constexpr double efficiency_gate = 0.004;
constexpr double ere_rel_gate = 0.10;
constexpr double bound_slack = 1e-9;

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string fmt_short(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", x);
    return buf;
}

double json_efficiency(const json& v, const std::string& ctx) {
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "inf" || s == "+inf" || s == "infinity")
            return std::numeric_limits<double>::infinity();
        throw std::runtime_error(ctx + ": unrecognized efficiency '" + s +
                                 "'");
    }
    return v.get<double>();
}

ExpectedCells parse_expected(const json& j, const std::string& ctx) {
    ExpectedCells e;
    if (j.contains("power_anchor_v"))
        e.power_anchor_v = j.at("power_anchor_v").get<double>();
    if (j.contains("power_anchor_t"))
        e.power_anchor_t = j.at("power_anchor_t").get<double>();
    if (j.contains("power_matched_v"))
        e.power_matched_v = j.at("power_matched_v").get<double>();
    if (j.contains("power_matched_t"))
        e.power_matched_t = j.at("power_matched_t").get<double>();
    if (j.contains("ere")) {
        const json& v = j.at("ere");
        EreExpectation ex;
        if (v.is_object()) {
            const std::string b = v.at("bound").get<std::string>();
            if (b == "lower")
                ex.kind = EreExpectation::Kind::lower_bound;
            else if (b == "upper")
                ex.kind = EreExpectation::Kind::upper_bound;
            else
                throw std::runtime_error(ctx + ": bad ere bound '" + b + "'");
            ex.value = v.at("value").get<double>();
        } else {
            ex.kind = EreExpectation::Kind::value;
            ex.value = v.get<double>();
        }
        e.ere = ex;
    }
    if (j.contains("e_linear"))
        e.e_linear = json_efficiency(j.at("e_linear"), ctx);
    if (j.contains("e_path")) e.e_path = json_efficiency(j.at("e_path"), ctx);
    if (j.contains("hellinger")) e.hellinger = j.at("hellinger").get<double>();
    return e;
}

}  // namespace

TableSpec load_table_spec(const std::string& json_path) {
    std::ifstream in(json_path);
    if (!in) throw std::runtime_error("cannot open table spec: " + json_path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::runtime_error("bad table spec " + json_path + ": " +
                                 e.what());
    }
    TableSpec spec;
    spec.table_id = j.at("table").get<int>();
    spec.alpha = j.value("alpha", 0.05);
    spec.default_reps = j.value("default_reps", 100000LL);
    spec.description = j.value("description", std::string());
    for (const json& r : j.at("rows")) {
        TableRowSpec row;
        row.label = r.at("label").get<std::string>();
        if (r.contains("path")) {
            PathRef ref;
            const json& pj = r.at("path");
            ref.name = pj.at("name").get<std::string>();
            if (pj.contains("s")) ref.s = pj.at("s").get<double>();
            if (pj.contains("params")) {
                for (auto it = pj.at("params").begin();
                     it != pj.at("params").end(); ++it) {
                    ref.params[it.key()] = it.value().get<double>();
                }
            }
            row.path = ref;
        }
        row.p = r.at("p").get<double>();
        row.q = r.at("q").get<double>();
        row.eps = r.value("eps", 1.0);
        row.anchor_test =
            test_from_string(r.value("anchor_test", std::string("V")));
        row.anchor_n = r.at("anchor_n").get<long long>();
        if (r.contains("matched_n"))
            row.matched_n = r.at("matched_n").get<long long>();
        if (r.contains("reps")) row.reps = r.at("reps").get<long long>();
        if (r.contains("expected"))
            row.expected =
                parse_expected(r.at("expected"), json_path + ":" + row.label);
        spec.rows.push_back(std::move(row));
    }
    return spec;
}

namespace {

CriticalValueRule::Kind rule_kind_for(const std::string& cv_rule,
                                      TestId test) {
    if (cv_rule == "paper") {
        return test == TestId::T ? CriticalValueRule::Kind::formula_t
                                 : CriticalValueRule::Kind::normal_approx;
    }
    if (cv_rule == "normal") return CriticalValueRule::Kind::normal_approx;
    if (cv_rule == "mc") return CriticalValueRule::Kind::mc_calibrated;
    throw std::invalid_argument("unknown cv rule: " + cv_rule);
}

struct RowContext {
    const TableSpec& spec;
    const TableRunOptions& opts;
    long long reps;
    Alternative alt;
    std::vector<std::string>* failures;
};

std::optional<CellResult> eval_cell(const RowContext& ctx, TestId test,
                                    long long n,
                                    const std::optional<double>& expected,
                                    const char* cell_name) {
    CellResult cell;
    cell.test = test;
    cell.n = n;
    if (n >= heavy_cell_threshold && !ctx.opts.include_heavy) {
        cell.skipped = true;
        return cell;
    }
    PowerEvaluator eval;
    eval.base = ctx.opts.mc;
    eval.base.reps = ctx.reps;
    eval.base.cv_rule.kind = rule_kind_for(ctx.opts.cv_rule, test);
    eval.base.cv_rule.alpha = ctx.spec.alpha;
    eval.cache = ctx.opts.cache;
    cell.est = eval.evaluate(test, ctx.alt, n);
    if (expected) {
        const double tol =
            power_gate_base + power_gate_se_mult * cell.est.se;
        if (std::fabs(cell.est.power - *expected) > tol) {
            ctx.failures->push_back(
                std::string("power ") + cell_name + "@" + std::to_string(n) +
                ": got " + fmt_short(cell.est.power) + " want " +
                fmt_short(*expected) + " tol " + fmt_short(tol));
        }
    }
    return cell;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        out += c;
    }
    out += '"';
    return out;
}

std::string opt_cell(const std::optional<CellResult>& c, bool se_field) {
    if (!c) return "";
    if (c->skipped) return se_field ? "" : "skipped";
    return fmt(se_field ? c->est.se : c->est.power);
}

std::string path_params_string(const PathRef& ref) {
    std::string out;
    for (const auto& [k, v] : ref.params) {
        if (!out.empty()) out += ';';
        out += k + "=" + fmt(v);
    }
    return out;
}

}  // namespace

TableRunResult run_table(const TableSpec& spec, const TableRunOptions& opts) {
    TableRunResult result;
    result.spec = spec;
    result.options = opts;
    rule_kind_for(opts.cv_rule, TestId::V);  // validate the name up front

    std::map<std::string, double> tangent_memo;

    for (const TableRowSpec& row : spec.rows) {
        RowResult rr;
        rr.row = row;
        RowContext ctx{spec, opts,
                       opts.reps_override
                           ? *opts.reps_override
                           : row.reps.value_or(spec.default_reps),
                       Alternative(row.eps, BetaParams(row.p, row.q)),
                       &rr.failures};

        rr.anchor_v = eval_cell(ctx, TestId::V, row.anchor_n,
                                row.expected.power_anchor_v, "V");
        rr.anchor_t = eval_cell(ctx, TestId::T, row.anchor_n,
                                row.expected.power_anchor_t, "T");
        if (row.matched_n) {
            rr.matched_v = eval_cell(ctx, TestId::V, *row.matched_n,
                                     row.expected.power_matched_v, "V");
            rr.matched_t = eval_cell(ctx, TestId::T, *row.matched_n,
                                     row.expected.power_matched_t, "T");
        }

        if (row.matched_n) {
            const double n_v = static_cast<double>(
                row.anchor_test == TestId::V ? row.anchor_n : *row.matched_n);
            const double n_t = static_cast<double>(
                row.anchor_test == TestId::V ? *row.matched_n : row.anchor_n);
            rr.ere = n_v / n_t;
            if (row.expected.ere) {
                const EreExpectation& ex = *row.expected.ere;
                bool ok = true;
                switch (ex.kind) {
                    case EreExpectation::Kind::value:
                        ok = std::fabs(*rr.ere - ex.value) <=
                             ere_rel_gate * std::fabs(ex.value);
                        break;
                    case EreExpectation::Kind::lower_bound:
                        ok = *rr.ere >= ex.value * (1.0 - bound_slack);
                        break;
                    case EreExpectation::Kind::upper_bound:
                        ok = *rr.ere <= ex.value * (1.0 + bound_slack);
                        break;
                }
                if (!ok) {
                    rr.failures.push_back("ere: got " + fmt_short(*rr.ere) +
                                          " want " + fmt_short(ex.value));
                }
            }
        }

        try {
            rr.e_linear = pitman_linear(row.p, row.q);
        } catch (const std::exception& e) {
            if (row.expected.e_linear)
                rr.failures.push_back(std::string("e_linear: ") + e.what());
        }
        if (rr.e_linear && row.expected.e_linear) {
            const double want = *row.expected.e_linear;
            const bool ok = std::isinf(want)
                                ? std::isinf(*rr.e_linear)
                                : std::fabs(*rr.e_linear - want) <=
                                      efficiency_gate;
            if (!ok) {
                rr.failures.push_back("e_linear: got " +
                                      fmt_short(*rr.e_linear) + " want " +
                                      fmt_short(want));
            }
        }

        if (row.path) {
            const std::string memo_key =
                row.path->name + "|" + path_params_string(*row.path);
            auto it = tangent_memo.find(memo_key);
            if (it == tangent_memo.end()) {
                const Path path = builtin_path(row.path->name,
                                               row.path->params);
                it = tangent_memo
                         .emplace(memo_key, pitman_path(path).efficiency)
                         .first;
            }
            rr.e_path = it->second;
            if (row.expected.e_path &&
                std::fabs(*rr.e_path - *row.expected.e_path) >
                    efficiency_gate) {
                rr.failures.push_back("e_path: got " + fmt_short(*rr.e_path) +
                                      " want " +
                                      fmt_short(*row.expected.e_path));
            }
        }

        try {
            rr.hellinger_from_null =
                hellinger(ctx.alt, Alternative::null());
        } catch (const QuadratureError& e) {
            if (row.expected.hellinger)
                rr.failures.push_back(std::string("hellinger: ") + e.what());
        }
        if (rr.hellinger_from_null && row.expected.hellinger &&
            std::fabs(*rr.hellinger_from_null - *row.expected.hellinger) >
                hellinger_gate) {
            rr.failures.push_back(
                "hellinger: got " + fmt_short(*rr.hellinger_from_null) +
                " want " + fmt_short(*row.expected.hellinger));
        }

        if (!rr.failures.empty()) result.all_ok = false;
        result.rows.push_back(std::move(rr));
    }
    return result;
}

std::string render_csv(const TableRunResult& result, bool with_timestamp) {
    const TableSpec& spec = result.spec;
    const TableRunOptions& opts = result.options;
    std::ostringstream out;
    out << "# manifest: table=" << spec.table_id << " alpha="
        << fmt(spec.alpha) << " cv_rule=" << opts.cv_rule
        << " reps_default=" << spec.default_reps << " reps_override="
        << (opts.reps_override ? std::to_string(*opts.reps_override)
                               : std::string("none"))
        << " include_heavy=" << (opts.include_heavy ? 1 : 0)
        << " seed=" << opts.mc.seed;
    if (opts.cv_rule == "mc") {
        out << " cal_reps=" << opts.mc.cv_rule.reps
            << " cal_seed=" << opts.mc.cv_rule.seed;
    }
    out << '\n';
    if (with_timestamp) {
        char stamp[32] = "unknown";
        const std::time_t now = std::time(nullptr);
        std::tm tm{};
        if (gmtime_r(&now, &tm) != nullptr)
            std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm);
        out << "# generated: " << stamp << '\n';
    }
    out << "table,label,path,s,p,q,eps,anchor_test,n_anchor,"
           "power_v_anchor,se_v_anchor,power_t_anchor,se_t_anchor,"
           "n_matched,power_v_matched,se_v_matched,power_t_matched,"
           "se_t_matched,ere,e_linear,e_path,hellinger,failures\n";
    for (const RowResult& rr : result.rows) {
        const TableRowSpec& row = rr.row;
        out << spec.table_id << ',' << csv_escape(row.label) << ','
            << (row.path ? row.path->name : "") << ','
            << (row.path && row.path->s ? fmt(*row.path->s) : "") << ','
            << fmt(row.p) << ',' << fmt(row.q) << ',' << fmt(row.eps) << ','
            << to_string(row.anchor_test) << ',' << row.anchor_n << ','
            << opt_cell(rr.anchor_v, false) << ','
            << opt_cell(rr.anchor_v, true) << ','
            << opt_cell(rr.anchor_t, false) << ','
            << opt_cell(rr.anchor_t, true) << ','
            << (row.matched_n ? std::to_string(*row.matched_n) : "") << ','
            << opt_cell(rr.matched_v, false) << ','
            << opt_cell(rr.matched_v, true) << ','
            << opt_cell(rr.matched_t, false) << ','
            << opt_cell(rr.matched_t, true) << ','
            << (rr.ere ? fmt(*rr.ere) : "") << ','
            << (rr.e_linear ? fmt(*rr.e_linear) : "") << ','
            << (rr.e_path ? fmt(*rr.e_path) : "") << ','
            << (rr.hellinger_from_null ? fmt(*rr.hellinger_from_null) : "")
            << ',';
        std::string joined;
        for (const std::string& f : rr.failures) {
            if (!joined.empty()) joined += "; ";
            joined += f;
        }
        out << csv_escape(joined) << '\n';
    }
    return out.str();
}

std::string strip_timestamp(const std::string& csv) {
    std::istringstream in(csv);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("# generated", 0) == 0) continue;
        out << line << '\n';
    }
    return out.str();
}

namespace {

std::string pct(const std::optional<CellResult>& c) {
    if (!c) return "";
    if (c->skipped) return "(skipped)";
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.0f",
                  std::nearbyint(c->est.power * 100.0));
    return buf;
}

std::string md3(const std::optional<double>& v) {
    if (!v) return "";
    if (std::isinf(*v)) return "inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", *v);
    return buf;
}

}  // namespace

std::string render_markdown(const TableRunResult& result) {
    std::ostringstream out;
    out << "### Table " << result.spec.table_id;
    if (!result.spec.description.empty())
        out << " - " << result.spec.description;
    out << "\n\n";
    out << "| alternative | n | V% | T% | n' | V% | T% | ERE | E(line) | "
           "E(path) | H | status |\n";
    out << "|---|---|---|---|---|---|---|---|---|---|---|---|\n";
    for (const RowResult& rr : result.rows) {
        const TableRowSpec& row = rr.row;
        out << "| " << row.label << " | " << row.anchor_n << " | "
            << pct(rr.anchor_v) << " | " << pct(rr.anchor_t) << " | "
            << (row.matched_n ? std::to_string(*row.matched_n) : "") << " | "
            << pct(rr.matched_v) << " | " << pct(rr.matched_t) << " | "
            << md3(rr.ere) << " | " << md3(rr.e_linear) << " | "
            << md3(rr.e_path) << " | " << md3(rr.hellinger_from_null)
            << " | " << (rr.failures.empty() ? "ok" : "FAIL") << " |\n";
    }
    return out.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::string cur;
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            const char c = line[i];
            if (quoted) {
                if (c == '"') {
                    if (i + 1 < line.size() && line[i + 1] == '"') {
                        cur += '"';
                        ++i;
                    } else {
                        quoted = false;
                    }
                } else {
                    cur += c;
                }
            } else if (c == '"') {
                quoted = true;
            } else if (c == ',') {
                fields.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        fields.push_back(cur);
        rows.push_back(std::move(fields));
    }
    return rows;
}

}  // namespace betaeff
