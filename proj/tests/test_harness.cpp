#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ordbo/errors.hpp"
#include "ordbo/harness.hpp"
#include "ordbo/warp.hpp"

using namespace ordbo;
namespace fs = std::filesystem;
using Catch::Matchers::WithinAbs;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig c;
    c.function = "bent-cigar";
    c.n_init = 5;
    c.n_iter = 5;
    c.repeats = 2;
    c.seed = 7;
    return c;
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

std::vector<std::string> lines(const std::string& text) { return split(text, '\n'); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch_dir(const std::string& name) {
    auto p = fs::temp_directory_path() / ("ordbo_test_" + name);
    fs::remove_all(p);
    return p;
}

double median_of(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * (v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    return v[lo] + (pos - lo) * (v[hi] - v[lo]);
}

}  // namespace

TEST_CASE("initial design") {
    Rng rng(1);
    const Eigen::VectorXd lo = Eigen::VectorXd::Constant(2, -5.0), hi = Eigen::VectorXd::Constant(2, 5.0);
    auto two = initial_design(lo, hi, 2, rng);
    REQUIRE(two.rows() == 2);
    CHECK(two.row(0).transpose() == lo);
    CHECK(two.row(1).transpose() == hi);

    Rng r1(5), r2(5);
    const Eigen::VectorXd l1 = Eigen::VectorXd::Zero(1), h1 = Eigen::VectorXd::Ones(1);
    auto X = initial_design(l1, h1, 5, r1);
    REQUIRE(X.rows() == 5);
    CHECK(initial_design(l1, h1, 5, r2) == X);
    std::vector<double> xs(X.data(), X.data() + 5);
    std::sort(xs.begin(), xs.end());
    CHECK(xs.front() == 0.0);
    CHECK(xs.back() == 1.0);
    CHECK(std::adjacent_find(xs.begin(), xs.end()) == xs.end());
    const auto data = RankedDataset::from(X, Eigen::VectorXd::Zero(5));
    std::set<int> seen(data.input_ranks.data(), data.input_ranks.data() + 5);
    CHECK(seen == std::set<int>{1, 2, 3, 4, 5});
}

TEST_CASE("config parsing and validation") {
    ExperimentConfig c;
    CHECK_NOTHROW(c.validate());
    c.apply_text("function = diff-powers\nn_iter = 7\nmethod = ordinal-lcb, ei\n# comment\nts-samples = 50\n");
    CHECK(c.function == "diff-powers");
    CHECK(c.n_iter == 7);
    CHECK(c.ts_samples == 50);
    CHECK(c.methods == std::vector<Method>{Method::OrdinalLCB, Method::VanillaEI});
    CHECK_THROWS_AS(c.apply_text("colour = blue\n"), ConfigError);
    ExperimentConfig bad;
    bad.n_init = 1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = {};
    bad.function = "nope";
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK(parse_method("ordinal-ts") == Method::OrdinalTS);
    CHECK_THROWS_AS(parse_method("ucb"), ConfigError);
}

TEST_CASE("n_iter = 0 logs only the initial design") {
    auto c = small_config();
    c.n_iter = 0;
    const auto log = run_ordinal(c, Method::OrdinalLCB, 11);
    CHECK(log.records.size() == 5);
    CHECK(log.evaluations == 5);
    for (const auto& r : log.records) CHECK(r.iteration == 0);
    CHECK(log.final_cell_count == 16);
}

TEST_CASE("tree runs follow the cell count and budget") {
    auto c = small_config();
    const auto obj = make_objective(c.function);
    for (Method m : {Method::OrdinalLCB, Method::OrdinalTS}) {
        const auto log = run_ordinal(c, m, 3);
        CHECK(log.final_cell_count == 31);
        CHECK(log.evaluations == 10);
        REQUIRE(log.records.size() == 10);
        for (const auto& r : log.records) CHECK(r.y == obj.evaluate(r.x));
        for (int i = 5; i < 10; ++i) {
            CHECK(log.records[i].iteration == i - 4);
            CHECK(log.records[i].cell_id >= 0);
            CHECK(std::isfinite(log.records[i].elbo));
            CHECK(log.records[i].cell_count == 16 + 3 * (i - 4));
        }
        REQUIRE(log.trace.has_value());
        CHECK(log.trace->size() == 5);
        for (std::size_t i = 0; i < 5; ++i) CHECK(log.trace->max_movement[i] <= log.trace->delta_bound[i] * (1 + 1e-12));
    }
    c.partition = PartitionMode::Exhaustive;
    const auto ex = run_ordinal(c, Method::OrdinalLCB, 3);
    CHECK(ex.final_cell_count == 9 * 9);
}

TEST_CASE("runs are bitwise reproducible") {
    auto c = small_config();
    CHECK(run_ordinal(c, Method::OrdinalLCB, 4).to_csv() == run_ordinal(c, Method::OrdinalLCB, 4).to_csv());
    CHECK(run_ordinal(c, Method::OrdinalTS, 4).to_csv() == run_ordinal(c, Method::OrdinalTS, 4).to_csv());
    CHECK(run_baseline(c, 4).to_csv() == run_baseline(c, 4).to_csv());
    CHECK(run_ordinal(c, Method::OrdinalLCB, 4).to_csv() != run_ordinal(c, Method::OrdinalLCB, 5).to_csv());
}

TEST_CASE("ordinal runs depend on objective ranks only") {
    auto c = small_config();
    c.n_iter = 6;
    const auto f = make_objective("bent-cigar");
    auto g = f;
    g.evaluate = [h = f.evaluate](const Eigen::VectorXd& x) { return std::cbrt(h(x)) - 40.0; };
    g.f_star = std::cbrt(f.f_star) - 40.0;
    for (Method m : {Method::OrdinalLCB, Method::OrdinalTS}) {
        const auto a = run_ordinal(c, m, 9, f);
        const auto b = run_ordinal(c, m, 9, g);
        REQUIRE(a.records.size() == b.records.size());
        for (std::size_t i = 0; i < a.records.size(); ++i) {
            CHECK(a.records[i].cell_id == b.records[i].cell_id);
            CHECK(a.records[i].x == b.records[i].x);
        }
    }
}

TEST_CASE("baseline log schema matches the ordinal one") {
    auto c = small_config();
    const auto o = lines(run_ordinal(c, Method::OrdinalLCB, 2).to_csv());
    const auto e = lines(run_baseline(c, 2).to_csv());
    CHECK(split(o[0]) == split(e[0]));
    CHECK(split(o[0]) == std::vector<std::string>{"iteration", "method", "function", "seed", "cell_id", "x_0", "x_1",
                                                  "y", "best_y", "cum_regret", "elbo", "I_n", "V_n"});
    CHECK(o.size() == e.size());
    for (std::size_t i = 1; i < e.size(); ++i) CHECK(split(e[i]).size() == split(o[i]).size());
}

TEST_CASE("EI finds the bottom of a smooth 1D bowl") {
    ObjectiveSpec bowl;
    bowl.name = "bowl";
    bowl.dim = 1;
    bowl.lower = Eigen::VectorXd::Zero(1);
    bowl.upper = Eigen::VectorXd::Ones(1);
    bowl.evaluate = [](const Eigen::VectorXd& x) { return (x(0) - 0.37) * (x(0) - 0.37); };
    bowl.f_star = 0.0;
    bowl.argmin = Eigen::VectorXd::Constant(1, 0.37);
    auto c = small_config();
    c.n_iter = 20;
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto log = run_baseline(c, seed, bowl);
        double best = INFINITY;
        for (const auto& r : log.records) best = std::min(best, r.y);
        CHECK(best <= 1e-2);
        CHECK(log.evaluations == 25);
    }
}

TEST_CASE("battery: serial and threaded outputs agree") {
    auto c = small_config();
    c.methods = {Method::OrdinalLCB, Method::OrdinalTS, Method::VanillaEI};
    c.repeats = 3;
    const auto serial_dir = scratch_dir("serial");
    const auto threaded_dir = scratch_dir("threaded");
    c.out_dir = serial_dir.string();
    c.workers = 1;
    const auto s = run_battery(c);
    c.out_dir = threaded_dir.string();
    c.workers = 4;
    const auto t = run_battery(c);
    CHECK(s.failures.empty());
    CHECK(s.attempted == 9);
    CHECK(s.aggregate_csv == t.aggregate_csv);
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(serial_dir / "runs")) {
        ++files;
        const auto other = threaded_dir / "runs" / entry.path().filename();
        REQUIRE(fs::exists(other));
        CHECK(slurp(entry.path()) == slurp(other));
    }
    CHECK(files >= 9);
    CHECK(slurp(serial_dir / "aggregate.csv") == slurp(threaded_dir / "aggregate.csv"));

    // child seeds: distinct, shared across methods, reproducible
    std::set<std::uint64_t> seeds;
    for (int r = 0; r < 3; ++r) seeds.insert(child_seed(c.seed, r));
    CHECK(seeds.size() == 3);
    CHECK(child_seed(c.seed, 1) == child_seed(c.seed, 1));
    for (const auto& l : s.logs) CHECK(seeds.count(l.seed) == 1);

    // aggregate recomputed from the per-seed CSV files
    std::map<std::pair<std::string, int>, std::vector<double>> cum;
    for (const auto& entry : fs::directory_iterator(serial_dir / "runs")) {
        const auto name = entry.path().filename().string();
        if (name.size() < 4 || name.substr(name.size() - 4) != ".csv" || name.find(".trace.") != std::string::npos) continue;
        const auto rows = lines(slurp(entry.path()));
        const auto header = split(rows[0]);
        const auto col = std::find(header.begin(), header.end(), "cum_regret") - header.begin();
        std::map<int, double> last;  // final row of each iteration index
        std::string method;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const auto f = split(rows[i]);
            method = f[1];
            last[std::stoi(f[0])] = std::stod(f[col]);
        }
        for (const auto& [it, v] : last) cum[{method, it}].push_back(v);
    }
    const auto agg = lines(slurp(serial_dir / "aggregate.csv"));
    CHECK(agg[0] == "iteration,method,function,median_cum_regret,q25,q75");
    int checked = 0;
    for (std::size_t i = 1; i < agg.size(); ++i) {
        const auto f = split(agg[i]);
        const auto& v = cum[{f[1], std::stoi(f[0])}];
        REQUIRE(v.size() == 3);
        CHECK_THAT(std::stod(f[3]), WithinAbs(median_of(v, 0.5), 1e-9 * (1 + std::abs(median_of(v, 0.5)))));
        CHECK_THAT(std::stod(f[4]), WithinAbs(median_of(v, 0.25), 1e-9 * (1 + std::abs(median_of(v, 0.25)))));
        CHECK_THAT(std::stod(f[5]), WithinAbs(median_of(v, 0.75), 1e-9 * (1 + std::abs(median_of(v, 0.75)))));
        ++checked;
    }
    CHECK(checked == 3 * (c.n_iter + 1));
    fs::remove_all(serial_dir);
    fs::remove_all(threaded_dir);
}

TEST_CASE("battery with one repeat reproduces the single run") {
    auto c = small_config();
    c.repeats = 1;
    const auto b = run_battery(c);
    REQUIRE(b.logs.size() == 1);
    const auto single = run_single(c, Method::OrdinalLCB, child_seed(c.seed, 0));
    CHECK(b.logs[0].to_csv() == single.to_csv());
    const auto cum = single.cumulative_regret();
    const auto agg = lines(b.aggregate_csv);
    const auto last = split(agg.back());
    CHECK_THAT(std::stod(last[3]), WithinAbs(cum.back(), 1e-6 * (1 + std::abs(cum.back()))));
    CHECK(std::stod(last[3]) == std::stod(last[4]));
}

TEST_CASE("quantile interpolation") {
    CHECK(quantile({3.0, 1.0, 2.0}, 0.5) == 2.0);
    CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.5) == 2.5);
    CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.25) == 1.75);
    CHECK(quantile({5.0}, 0.75) == 5.0);
}
