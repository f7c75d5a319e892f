#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "betaeff/empirical.hpp"

namespace betaeff {

// Cells needing at least this many observations per replicate are excluded
// from default runs and enabled with include_heavy.
inline constexpr long long heavy_cell_threshold = 15000;

struct PathRef {
    std::string name;
    std::map<std::string, double> params;   // for parametrized families
    std::optional<double> s;                // provenance only
};

struct EreExpectation {
    enum class Kind { value, lower_bound, upper_bound };
    Kind kind = Kind::value;
    double value = 0.0;
};

// Reference cells a run is gated against; all optional. Powers are printed
// to two decimals, efficiencies to three.
struct ExpectedCells {
    std::optional<double> power_anchor_v;
    std::optional<double> power_anchor_t;
    std::optional<double> power_matched_v;
    std::optional<double> power_matched_t;
    std::optional<EreExpectation> ere;
    std::optional<double> e_linear;  // may be +infinity
    std::optional<double> e_path;    // tangent value of the row's path
    std::optional<double> hellinger;
};

struct TableRowSpec {
    std::string label;
    std::optional<PathRef> path;
    double p = 1.0;
    double q = 1.0;
    double eps = 1.0;
    TestId anchor_test = TestId::V;   // test whose power fixes the match
    long long anchor_n = 0;
    std::optional<long long> matched_n;
    std::optional<long long> reps;    // row-level override
    ExpectedCells expected;
};

struct TableSpec {
    int table_id = 0;
    double alpha = 0.05;
    long long default_reps = 100000;
    std::string description;
    std::vector<TableRowSpec> rows;
};

TableSpec load_table_spec(const std::string& json_path);

struct TableRunOptions {
    McConfig mc;                  // seed/batch/threads + mc-rule settings
    std::string cv_rule = "paper";  // paper | normal | mc
    std::optional<long long> reps_override;
    bool include_heavy = false;
    PowerCache* cache = nullptr;
};

struct CellResult {
    TestId test = TestId::V;
    long long n = 0;
    bool skipped = false;
    PowerEstimate est;
};

struct RowResult {
    TableRowSpec row;
    std::optional<CellResult> anchor_v, anchor_t, matched_v, matched_t;
    std::optional<double> ere;        // ratio of the printed sample sizes
    std::optional<double> e_linear;   // one-parameter family value at (p,q)
    std::optional<double> e_path;     // tangent value of the row's path
    std::optional<double> hellinger_from_null;
    std::vector<std::string> failures;
};

struct TableRunResult {
    TableSpec spec;
    TableRunOptions options;
    std::vector<RowResult> rows;
    bool all_ok = true;
};

// Recomputes every cell of a benchmark table at its printed sample sizes
// and gates the result against the expected cells. Deterministic in
// (seed, reps, cv_rule): thread count and batch size do not change values.
TableRunResult run_table(const TableSpec& spec, const TableRunOptions& opts);

// Comma-separated rendering, one line per row, doubles at full precision.
// Leading "# manifest:" lines pin the configuration; the "# generated:"
// line carries the only run-dependent content.
std::string render_csv(const TableRunResult& result,
                       bool with_timestamp = true);
std::string strip_timestamp(const std::string& csv);
std::string render_markdown(const TableRunResult& result);

// Minimal CSV reader (handles double-quoted fields) for round-trips.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

}  // namespace betaeff
