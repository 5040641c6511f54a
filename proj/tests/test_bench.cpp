#include "spice/bench.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <locale>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace spice;
using namespace spice::bench;

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path)
{
    std::ifstream is(path, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

fs::path scratch_dir(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("spice_bench_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text)
{
    std::vector<std::vector<std::string>> out;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            cells.push_back(cell);
        }
        out.push_back(cells);
    }
    return out;
}

int cli(const std::string& args)
{
    const std::string cmd = std::string(SPICE_BENCH_EXE) + " " + args + " > /dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

RunSpec desk(qcqp::Structure problem, ScheduleKind schedule)
{
    RunSpec spec;
    spec.problem = problem;
    spec.schedule = schedule;
    spec.record_wall_time = false;
    return spec;
}

} // namespace

TEST(FormatDouble, SeventeenSignificantDigits)
{
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(format_double(1.0), "1");
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", -2.5e-300);
    EXPECT_EQ(format_double(-2.5e-300), buf);
    SeededRng rng(1);
    for (int i = 0; i < 1000; ++i) {
        const double v = rng.normal() * std::exp(40.0 * rng.normal());
        EXPECT_EQ(std::strtod(format_double(v).c_str(), nullptr), v);
    }
}

TEST(FormatDouble, IgnoresProcessLocale)
{
    struct CommaDecimal : std::numpunct<char> {
        char do_decimal_point() const override { return ','; }
        char do_thousands_sep() const override { return '.'; }
        std::string do_grouping() const override { return "\3"; }
    };
    const std::string before = format_double(1234.5);
    const std::locale saved = std::locale::global(std::locale(std::locale::classic(), new CommaDecimal));
    EXPECT_EQ(format_double(1234.5), before);

    SolveHistory h;
    IterationRecord rec;
    rec.k = 12345;
    rec.f = 1234.5;
    h.records.push_back(rec);
    std::ostringstream os; // picks up the global locale
    write_history_csv(os, h);
    std::locale::global(saved);
    EXPECT_NE(os.str().find("\n12345,1234.5,"), std::string::npos) << os.str();
}

TEST(HistoryCsv, SchemaAndDeltaColumn)
{
    const RunResult res = run(desk(qcqp::Structure::Single, ScheduleKind::Exponential));
    std::ostringstream os;
    write_history_csv(os, res.history);
    const auto rows = parse_csv(os.str());
    ASSERT_EQ(rows.front(),
              (std::vector<std::string>{"k", "f", "delta_f", "rho", "eta", "r", "s", "pred_gap", "feas", "gmin"}));
    ASSERT_EQ(rows.size(), res.history.records.size() + 1);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        ASSERT_EQ(rows[i].size(), 10u);
        EXPECT_EQ(std::stol(rows[i][0]), static_cast<long>(i - 1));
        if (i > 1) {
            const double f_prev = std::strtod(rows[i - 1][1].c_str(), nullptr);
            const double f = std::strtod(rows[i][1].c_str(), nullptr);
            EXPECT_EQ(std::strtod(rows[i][2].c_str(), nullptr), std::abs(f_prev - f));
        }
    }
    EXPECT_LE(std::strtod(rows.back()[2].c_str(), nullptr), 1e-9);
}

TEST(HistoryCsv, ObjectiveSettlesOnDeskRuns)
{
    for (qcqp::Structure problem : {qcqp::Structure::Single, qcqp::Structure::Separable}) {
        for (ScheduleKind schedule : {ScheduleKind::Constant, ScheduleKind::Exponential}) {
            const RunResult res = run(desk(problem, schedule));
            ASSERT_TRUE(res.history.converged());
            const auto& rec = res.history.records;
            for (std::size_t k = 4; k < rec.size(); ++k) {
                EXPECT_LE(rec[k].f, rec[k - 1].f * (1.0 + 1e-12)) << "k = " << k;
            }
            EXPECT_LE(rec.back().delta_f, 1e-9);
        }
    }
}

TEST(Run, DeskExponentialConvergesQuickly)
{
    RunSpec spec = desk(qcqp::Structure::Single, ScheduleKind::Exponential);
    spec.record_wall_time = true;
    const RunResult res = run(spec);
    EXPECT_EQ(res.exit_code, kConverged);
    EXPECT_TRUE(res.summary.converged());
    EXPECT_LE(res.summary.iterations, 30);
    ASSERT_TRUE(res.summary.wall_time_ms.has_value());
    EXPECT_GE(*res.summary.wall_time_ms, 0.0);
}

TEST(Run, ExponentialBeatsConstant)
{
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        RunSpec c = desk(qcqp::Structure::Single, ScheduleKind::Constant);
        RunSpec e = desk(qcqp::Structure::Single, ScheduleKind::Exponential);
        c.seed = e.seed = seed;
        EXPECT_LT(run(e).summary.iterations, run(c).summary.iterations) << "seed " << seed;
    }
}

TEST(Run, SameSpecGivesIdenticalFiles)
{
    const fs::path dir = scratch_dir("determinism");
    for (bool timing : {false, true}) {
        RunSpec spec = desk(qcqp::Structure::Separable, ScheduleKind::Exponential);
        spec.record_wall_time = timing;
        spec.out = (dir / "a.csv").string();
        run(spec);
        spec.out = (dir / "b.csv").string();
        run(spec);
        EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
        EXPECT_FALSE(slurp(dir / "a.csv").empty());
        if (!timing) {
            EXPECT_EQ(slurp(dir / "a.json"), slurp(dir / "b.json"));
        }
    }
    fs::remove_all(dir);
}

TEST(Run, SummaryFileAndJsonRoundTrip)
{
    EXPECT_EQ(summary_path("out/run.csv"), fs::path("out/run.json"));
    EXPECT_EQ(summary_path("out/run"), fs::path("out/run.json"));

    const fs::path dir = scratch_dir("summary");
    RunSpec spec = desk(qcqp::Structure::Single, ScheduleKind::Exponential);
    spec.out = (dir / "h.csv").string();
    const RunResult res = run(spec);
    const nlohmann::json j = nlohmann::json::parse(slurp(dir / "h.json"));
    EXPECT_EQ(j.at("status"), "CONVERGED");
    EXPECT_TRUE(j.at("wall_time_ms").is_null());
    const RunSummary back = RunSummary::from_json(j);
    EXPECT_EQ(back.iterations, res.summary.iterations);
    EXPECT_EQ(back.final_f, res.summary.final_f);
    EXPECT_EQ(back.final_feas, res.summary.final_feas);
    fs::remove_all(dir);
}

TEST(Run, InvalidSpecIsUsageError)
{
    RunSpec spec = desk(qcqp::Structure::Single, ScheduleKind::Constant);
    spec.mu = 1.0;
    EXPECT_THROW(run(spec), UsageError);
    spec.mu = 1.5;
    spec.p = 0;
    EXPECT_THROW(run(spec), UsageError);
    spec.p = 5;
    spec.pi_choice = PiChoice::Fixed;
    spec.pi = -3.0;
    EXPECT_THROW(run(spec), UsageError);
}

TEST(RunSpec, KeySeparatesRelevantFields)
{
    RunSpec a;
    RunSpec b = a;
    EXPECT_EQ(a.key(), b.key());
    b.seed = 1;
    EXPECT_NE(a.key(), b.key());
    b = a;
    b.pi_choice = PiChoice::Auto;
    EXPECT_NE(a.key(), b.key());
    b = a;
    b.out = "elsewhere.csv"; // output location does not change the run
    EXPECT_EQ(a.key(), b.key());
}

TEST(Cli, ExitCodes)
{
    const fs::path dir = scratch_dir("cli");
    EXPECT_EQ(cli("--problem single --n 50 --q 60 --p 5 --rho exp --beta 2 --seed 0 --out " + (dir / "r.csv").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "r.csv"));
    EXPECT_TRUE(fs::exists(dir / "r.json"));
    EXPECT_EQ(cli("--max-iters 2"), 1);
    EXPECT_EQ(cli("--mu 1"), 2);
    EXPECT_EQ(cli("--rho sideways"), 2);
    EXPECT_EQ(cli("--pi lots"), 2);
    EXPECT_EQ(cli("--no-such-flag"), 2);
    EXPECT_EQ(cli("table --rows 50x50"), 2);
    EXPECT_EQ(cli("table --seeds 3-1"), 2);
    EXPECT_EQ(cli("--help"), 0);
    fs::remove_all(dir);
}

TEST(Cli, DeterministicAcrossProcesses)
{
    const fs::path dir = scratch_dir("cli_det");
    const std::string args = "--problem separable --rho exp --no-timing --seed 2 --out ";
    ASSERT_EQ(cli(args + (dir / "a.csv").string()), 0);
    ASSERT_EQ(cli(args + (dir / "b.csv").string()), 0);
    EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
    EXPECT_EQ(slurp(dir / "a.json"), slurp(dir / "b.json"));
    fs::remove_all(dir);
}

TEST(Table, SingleRowIsMonotone)
{
    RunSpec base;
    base.n = 100;
    base.m = 100;
    base.p = 10;
    const Table t = table({base});
    ASSERT_EQ(t.rows.size(), 1u);
    const auto& cells = t.rows[0].cells;
    ASSERT_FALSE(t.any_failed());
    EXPECT_GT(cells[0].median, cells[1].median);
    EXPECT_GT(cells[1].median, cells[2].median);
    EXPECT_NE(t.text().find("Spice rho=1"), std::string::npos);
    EXPECT_EQ(parse_csv(t.csv()).size(), 2u);
}

TEST(Table, EmptyInputIsUsageError)
{
    EXPECT_THROW(table({}), UsageError);
    TableOptions opts;
    opts.seeds.clear();
    EXPECT_THROW(table({RunSpec{}}, opts), UsageError);
}

TEST(Table, CachedEqualsFresh)
{
    const fs::path dir = scratch_dir("cache");
    RunSpec base;
    base.p = 3;
    TableOptions opts;
    opts.seeds = {0, 1};
    opts.cache_dir = (dir / "cache").string();
    const std::string fresh = table({base}, TableOptions{{0, 1}, 0, ""}).csv();
    const std::string first = table({base}, opts).csv();
    EXPECT_FALSE(fs::is_empty(dir / "cache"));
    const std::string second = table({base}, opts).csv();
    EXPECT_EQ(first, fresh);
    EXPECT_EQ(second, fresh);
    fs::remove_all(dir);
}

TEST(Table, FailuresRenderAsFail)
{
    TableCell cell;
    cell.failed = true;
    EXPECT_EQ(cell.render(), "FAIL");
    RunSpec base;
    base.max_iters = 3;
    const Table t = table({base});
    EXPECT_TRUE(t.any_failed());
    EXPECT_NE(t.csv().find("FAIL"), std::string::npos);
    EXPECT_EQ(cli("table --max-iters 3"), 1);
}

TEST(Table, LowerMedianOverSeeds)
{
    RunSpec base;
    base.p = 2;
    const Table t = table({base}, TableOptions{{0, 1, 2, 3}, 2, ""});
    for (const TableCell& c : t.rows[0].cells) {
        ASSERT_EQ(c.per_seed.size(), 4u);
        std::vector<long> sorted = c.per_seed;
        std::sort(sorted.begin(), sorted.end());
        EXPECT_EQ(c.median, sorted[1]);
    }
}

TEST(ThreadBudget, EnvironmentCap)
{
    ::setenv("SPICE_THREADS", "1", 1);
    EXPECT_EQ(thread_budget(8), 1u);
    ::setenv("SPICE_THREADS", "junk", 1);
    EXPECT_EQ(thread_budget(3), 3u);
    ::unsetenv("SPICE_THREADS");
    EXPECT_GE(thread_budget(0), 1u);
}
