#pragma once

#include "spice/qcqp.hpp"
#include "spice/solver.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <locale>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace spice::bench {

/// Process exit codes of the harness.
enum ExitCode : int { kConverged = 0, kSolverFailure = 1, kUsageError = 2 };

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Where the common constraint bound comes from.
enum class PiChoice { Default, Fixed, Auto };

struct RunSpec {
    qcqp::Structure problem = qcqp::Structure::Single;
    Eigen::Index n = 50;
    Eigen::Index m = 50;
    Eigen::Index q = 60;
    Eigen::Index p = 5;
    std::uint64_t seed = 0;
    ScheduleKind schedule = ScheduleKind::Constant;
    double alpha = 2.0;
    double beta = 2.0;
    double mu = 1.5;
    double tol = 1e-9;
    long max_iters = 100000;
    SolveMode mode = SolveMode::Spice;
    PiChoice pi_choice = PiChoice::Default;
    double pi = 0.0; // used with PiChoice::Fixed
    double pi_fraction = 0.5;
    EtaEscalation escalation = EtaEscalation::Geometric;
    bool diagnostics = false;
    bool record_wall_time = true; // off makes the JSON summary byte-reproducible
    std::string out;              // CSV path; the JSON summary goes next to it

    qcqp::QcqpConfig qcqp_config() const
    {
        qcqp::QcqpConfig c;
        c.structure = problem;
        c.n = n;
        c.m = m;
        c.q = q;
        c.p = p;
        c.seed = seed;
        switch (pi_choice) {
        case PiChoice::Default:
            c.pi = qcqp::QcqpConfig::default_pi(problem);
            break;
        case PiChoice::Fixed:
            c.pi = pi;
            break;
        case PiChoice::Auto:
            c.bound_rule = qcqp::BoundRule::ActiveFraction;
            c.pi_fraction = pi_fraction;
            break;
        }
        return c;
    }

    SolveConfig solve_config() const
    {
        SolveConfig c;
        c.schedule.kind = schedule;
        c.schedule.alpha = alpha;
        c.schedule.beta = beta;
        c.mu = mu;
        c.tolerance = tol;
        c.max_iters = max_iters;
        c.mode = mode;
        c.escalation = escalation;
        c.diagnostics = diagnostics;
        return c;
    }

    void validate() const
    {
        try {
            qcqp_config().validate();
            solve_config().validate();
        } catch (const ArgumentError& e) {
            throw UsageError(e.what());
        }
    }

    /// Stable identifier of everything that influences the iteration sequence.
    std::string key() const
    {
        std::ostringstream os;
        os.imbue(std::locale::classic());
        os << qcqp::to_string(problem) << "_n" << n << "_m" << (problem == qcqp::Structure::Separable ? m : 0) << "_q"
           << q << "_p" << p << "_s" << seed << "_" << (mode == SolveMode::TraditionalPc ? "pc" : "spice") << "_r"
           << static_cast<int>(schedule) << "_a" << alpha << "_b" << beta << "_mu" << mu << "_t" << tol << "_i"
           << max_iters << "_e" << static_cast<int>(escalation);
        switch (pi_choice) {
        case PiChoice::Default: os << "_pidef"; break;
        case PiChoice::Fixed: os << "_pi" << pi; break;
        case PiChoice::Auto: os << "_piauto" << pi_fraction; break;
        }
        return os.str();
    }
};

/// Locale-independent rendering with 17 significant digits.
inline std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline constexpr std::array<const char*, 10> kCsvColumns = {"k", "f", "delta_f", "rho", "eta",
                                                            "r", "s", "pred_gap", "feas", "gmin"};

inline void write_history_csv(std::ostream& os, const SolveHistory& h)
{
    for (std::size_t i = 0; i < kCsvColumns.size(); ++i) {
        os << (i ? "," : "") << kCsvColumns[i];
    }
    os << '\n';
    for (const IterationRecord& r : h.records) {
        os << std::to_string(r.k) << ',' << format_double(r.f) << ',' << format_double(r.delta_f) << ',' << format_double(r.rho) << ','
           << format_double(r.eta) << ',' << format_double(r.r) << ',' << format_double(r.s) << ','
           << format_double(r.pred_gap) << ',' << format_double(r.feas) << ',' << format_double(r.gmin) << '\n';
    }
}

struct RunSummary {
    std::string status = to_string(SolveStatus::MaxIterations);
    long iterations = 0;
    double final_f = 0.0;
    double final_feas = 0.0;
    std::optional<double> wall_time_ms;
    std::string message;

    bool converged() const { return status == to_string(SolveStatus::Converged); }

    nlohmann::json to_json() const
    {
        nlohmann::json j;
        j["status"] = status;
        j["iterations"] = iterations;
        j["final_f"] = final_f;
        j["final_feas"] = final_feas;
        j["wall_time_ms"] = wall_time_ms ? nlohmann::json(*wall_time_ms) : nlohmann::json(nullptr);
        if (!message.empty()) {
            j["message"] = message;
        }
        return j;
    }

    static RunSummary from_json(const nlohmann::json& j)
    {
        RunSummary s;
        s.status = j.at("status").get<std::string>();
        s.iterations = j.at("iterations").get<long>();
        s.final_f = j.at("final_f").get<double>();
        s.final_feas = j.at("final_feas").get<double>();
        if (!j.at("wall_time_ms").is_null()) {
            s.wall_time_ms = j.at("wall_time_ms").get<double>();
        }
        if (j.contains("message")) {
            s.message = j.at("message").get<std::string>();
        }
        return s;
    }
};

struct RunResult {
    SolveHistory history;
    RunSummary summary;
    int exit_code = kSolverFailure;
};

inline std::filesystem::path summary_path(const std::string& csv_path)
{
    std::filesystem::path path(csv_path);
    if (path.extension() == ".csv") {
        return path.replace_extension(".json");
    }
    path += ".json";
    return path;
}

inline RunSummary summarize(const SolveHistory& h)
{
    RunSummary s;
    s.status = to_string(h.status);
    s.iterations = h.iterations();
    if (!h.records.empty()) {
        s.final_f = h.records.back().f;
        s.final_feas = h.records.back().feas;
    }
    if (!h.converged()) {
        s.message = h.message;
    }
    return s;
}

/// Generates the instance, solves it, and writes the CSV history and JSON summary
/// when `spec.out` is set.
inline RunResult run(const RunSpec& spec)
{
    spec.validate();
    const auto start = std::chrono::steady_clock::now();
    const qcqp::QcqpProblem prob = qcqp::generate(spec.qcqp_config());
    RunResult result;
    result.history = solve(prob, spec.solve_config(), qcqp::zero_start(prob.data()));
    result.summary = summarize(result.history);
    if (spec.record_wall_time) {
        result.summary.wall_time_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
    result.exit_code = result.history.converged() ? kConverged : kSolverFailure;

    if (!spec.out.empty()) {
        std::ofstream csv(spec.out, std::ios::binary);
        if (!csv) {
            throw UsageError("cannot open " + spec.out + " for writing");
        }
        write_history_csv(csv, result.history);
        std::ofstream json(summary_path(spec.out), std::ios::binary);
        json << result.summary.to_json().dump(2) << '\n';
    }
    return result;
}

// ---------------------------------------------------------------------------
// Iteration-count tables

inline constexpr std::array<const char*, 3> kTableColumns = {"PC", "Spice rho=1", "Spice e^{beta t}"};

/// The three solver configurations compared in each table row.
inline std::array<RunSpec, 3> table_variants(const RunSpec& base)
{
    std::array<RunSpec, 3> v{base, base, base};
    v[0].mode = SolveMode::TraditionalPc;
    v[0].schedule = ScheduleKind::Constant;
    v[1].mode = SolveMode::Spice;
    v[1].schedule = ScheduleKind::Constant;
    v[2].mode = SolveMode::Spice;
    v[2].schedule = ScheduleKind::Exponential;
    for (RunSpec& s : v) {
        s.out.clear();
        s.diagnostics = false;
        s.record_wall_time = false;
    }
    return v;
}

struct TableOptions {
    std::vector<std::uint64_t> seeds{0};
    unsigned threads = 0; // 0: SPICE_THREADS or the hardware concurrency
    std::string cache_dir; // reuse/store per-run JSON summaries here when set
};

struct TableCell {
    std::vector<long> per_seed;
    bool failed = false;
    long median = 0; // lower median over seeds

    std::string render() const { return failed ? "FAIL" : std::to_string(median); }
};

struct TableRow {
    RunSpec base;
    std::array<TableCell, 3> cells;
};

struct Table {
    std::vector<TableRow> rows;

    bool any_failed() const
    {
        return std::any_of(rows.begin(), rows.end(), [](const TableRow& r) {
            return std::any_of(r.cells.begin(), r.cells.end(), [](const TableCell& c) { return c.failed; });
        });
    }

    std::string csv() const
    {
        std::ostringstream os;
        os << "problem,n,m,p," << kTableColumns[0] << ',' << kTableColumns[1] << ',' << kTableColumns[2] << '\n';
        for (const TableRow& r : rows) {
            os << qcqp::to_string(r.base.problem) << ',' << r.base.n << ',' << r.base.m << ',' << r.base.p;
            for (const TableCell& c : r.cells) {
                os << ',' << c.render();
            }
            os << '\n';
        }
        return os.str();
    }

    std::string text() const
    {
        std::vector<std::vector<std::string>> grid;
        grid.push_back({"problem", "n", "m", "p", kTableColumns[0], kTableColumns[1], kTableColumns[2]});
        for (const TableRow& r : rows) {
            grid.push_back({qcqp::to_string(r.base.problem), std::to_string(r.base.n), std::to_string(r.base.m),
                            std::to_string(r.base.p), r.cells[0].render(), r.cells[1].render(), r.cells[2].render()});
        }
        std::vector<std::size_t> width(grid.front().size(), 0);
        for (const auto& line : grid) {
            for (std::size_t i = 0; i < line.size(); ++i) {
                width[i] = std::max(width[i], line[i].size());
            }
        }
        std::ostringstream os;
        for (const auto& line : grid) {
            for (std::size_t i = 0; i < line.size(); ++i) {
                if (i) {
                    os << "  ";
                }
                os << std::string(width[i] - line[i].size(), ' ') << line[i];
            }
            os << '\n';
        }
        return os.str();
    }
};

inline unsigned thread_budget(unsigned requested)
{
    unsigned n = requested;
    if (n == 0) {
        n = std::max(1u, std::thread::hardware_concurrency());
    }
    if (const char* env = std::getenv("SPICE_THREADS")) {
        unsigned cap = 0;
        const std::string_view text(env);
        const auto res = std::from_chars(text.data(), text.data() + text.size(), cap);
        if (res.ec == std::errc() && cap > 0) {
            n = std::min(n, cap);
        }
    }
    return std::max(1u, n);
}

inline std::optional<RunSummary> load_cached(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        return std::nullopt;
    }
    try {
        return RunSummary::from_json(nlohmann::json::parse(is));
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
}

/// One row per base spec; columns PC, Spice rho=1, Spice e^{beta t}. Independent
/// runs are spread over a small thread pool; results are placed by index.
inline Table table(const std::vector<RunSpec>& specs, const TableOptions& opts = {})
{
    if (specs.empty()) {
        throw UsageError("table: no run specifications");
    }
    if (opts.seeds.empty()) {
        throw UsageError("table: no seeds");
    }
    struct Job {
        RunSpec spec;
        std::size_t row, col, seed_index;
    };
    std::vector<Job> jobs;
    for (std::size_t r = 0; r < specs.size(); ++r) {
        specs[r].validate();
        const auto variants = table_variants(specs[r]);
        for (std::size_t c = 0; c < variants.size(); ++c) {
            for (std::size_t s = 0; s < opts.seeds.size(); ++s) {
                RunSpec spec = variants[c];
                spec.seed = opts.seeds[s];
                jobs.push_back({spec, r, c, s});
            }
        }
    }
    if (!opts.cache_dir.empty()) {
        std::filesystem::create_directories(opts.cache_dir);
    }

    std::vector<RunSummary> results(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            const RunSpec& spec = jobs[i].spec;
            std::filesystem::path cached;
            if (!opts.cache_dir.empty()) {
                cached = std::filesystem::path(opts.cache_dir) / (spec.key() + ".json");
                if (auto hit = load_cached(cached)) {
                    results[i] = *hit;
                    continue;
                }
            }
            try {
                results[i] = run(spec).summary;
            } catch (const std::exception& e) {
                results[i].status = to_string(SolveStatus::OracleFailure);
                results[i].message = e.what();
            }
            if (!cached.empty()) {
                std::ofstream os(cached, std::ios::binary);
                os << results[i].to_json().dump(2) << '\n';
            }
        }
    };
    const unsigned threads = std::min<unsigned>(thread_budget(opts.threads), static_cast<unsigned>(jobs.size()));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (std::thread& t : pool) {
        t.join();
    }

    Table out;
    for (const RunSpec& s : specs) {
        out.rows.push_back({s, {}});
    }
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        TableCell& cell = out.rows[jobs[i].row].cells[jobs[i].col];
        if (!results[i].converged()) {
            cell.failed = true;
        }
        cell.per_seed.push_back(results[i].iterations);
    }
    for (TableRow& row : out.rows) {
        for (TableCell& cell : row.cells) {
            std::vector<long> sorted = cell.per_seed;
            std::sort(sorted.begin(), sorted.end());
            cell.median = sorted[(sorted.size() - 1) / 2];
        }
    }
    return out;
}

} // namespace spice::bench
