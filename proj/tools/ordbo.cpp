#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ordbo/benchfns.hpp"
#include "ordbo/diagnostics.hpp"
#include "ordbo/harness.hpp"
#include "ordbo/text_doc.hpp"

namespace fs = std::filesystem;
using namespace ordbo;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBoundViolated = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRunFailure = 3;
constexpr int kExitPartial = 4;

std::string read_file(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw ConfigError("cannot read " + p.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(read_file(p));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> row;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(cell);
        rows.push_back(std::move(row));
    }
    return rows;
}

int check_bounds(const std::string& run_dir) {
    const fs::path runs = fs::path(run_dir) / "runs";
    if (!fs::is_directory(runs)) {
        std::cerr << "error: no runs/ directory under " << run_dir << '\n';
        return kExitConfig;
    }
    std::vector<fs::path> traces;
    for (const auto& e : fs::directory_iterator(runs)) {
        const auto name = e.path().filename().string();
        if (name.size() > 10 && name.ends_with(".trace.csv")) traces.push_back(e.path());
    }
    std::sort(traces.begin(), traces.end());
    if (traces.empty()) {
        std::cerr << "error: no diagnostics traces found (only ordinal runs produce them)\n";
        return kExitConfig;
    }
    int violated = 0;
    for (const auto& path : traces) {
        const auto stem = path.filename().string().substr(0, path.filename().string().size() - 10);
        const auto side = TextDocument::parse(read_file(runs / (stem + ".analysis.txt")));
        AnalysisTrace t;
        t.sigma2 = side.get_double("analysis", "sigma2");
        t.C = side.get_double("analysis", "C");
        t.d = std::stoi(side.get("analysis", "d"));
        const auto rows = read_csv(path);
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const auto& r = rows[i];
            t.sigma2_obs.push_back(parse_double(r[1]));
            t.V.push_back(parse_double(r[2]));
            t.I.push_back(parse_double(r[3]));
            t.beta.push_back(parse_double(r[4]));
            t.delta_bound.push_back(parse_double(r[5]));
            t.max_movement.push_back(parse_double(r[6]));
            t.cum_regret_orig.push_back(parse_double(r[7]));
            t.cum_regret_latent.push_back(parse_double(r[8]));
            t.bound_rhs.push_back(parse_double(r[9]));
        }
        const auto rep = lemma2_check(t);
        const bool ok = rep.holds && rep.movement_violations == 0;
        if (!ok) ++violated;
        std::cout << stem << ": N=" << rep.N << " V_N=" << format_double(rep.V_N) << " C1*I_N+C2*log(N+1)="
                  << format_double(rep.rhs) << " slack=" << format_double(rep.slack)
                  << " movement_violations=" << rep.movement_violations << " step_violations=" << rep.step_violations
                  << " variance_breaches=" << rep.unit_variance_breaches;
        if (!t.bound_rhs.empty()) {
            std::cout << " regret=" << format_double(t.cum_regret_latent.back())
                      << " (latent proxy) theorem_rhs=" << format_double(t.bound_rhs.back());
        }
        std::cout << (ok ? " OK" : " VIOLATED") << '\n';
    }
    return violated ? kExitBoundViolated : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ordinal Bayesian optimisation benchmark harness"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run a battery of optimisation experiments");
    std::string config_path, function, methods, partition;
    int dim = -1, n_init = -1, n_iter = -1, repeats = -1, ts_samples = -1, workers = -1, quad_order = -1,
        train_steps = -1;
    double beta = -1, C = -1;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out;
    bool ts_argmax = false;
    run->add_option("--config", config_path, "key = value config file (flags override it)");
    run->add_option("--function", function, "objective name");
    run->add_option("--dim", dim, "dimension for bent-cigar / diff-powers");
    run->add_option("--method", methods, "ordinal-lcb, ordinal-ts, ei (comma-separated list allowed)");
    run->add_option("--partition", partition, "tree or exhaustive");
    run->add_option("--n-init", n_init);
    run->add_option("--n-iter", n_iter);
    run->add_option("--repeats", repeats);
    auto* seed_opt = run->add_option("--seed", seed, "master seed");
    run->add_option("--beta", beta);
    run->add_option("--ts-samples", ts_samples);
    run->add_flag("--ts-argmax", ts_argmax, "pick the most frequent Thompson cell instead of sampling");
    run->add_option("-C,--movement-constant", C);
    run->add_option("--quad-order", quad_order);
    run->add_option("--train-steps", train_steps);
    run->add_option("--workers", workers, "concurrent runs");
    run->add_option("--out", out, "output directory");

    auto* check = app.add_subcommand("check-bounds", "report the regret-analysis bound checks of a run directory");
    std::string run_dir;
    check->add_option("--run", run_dir, "output directory of a previous run")->required();

    app.add_subcommand("list-functions", "list the registered objectives");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return e.get_exit_code() == 0 ? code : kExitConfig;
    }
    seed_set = seed_opt->count() > 0;

    if (app.got_subcommand("list-functions")) {
        for (const auto& name : objective_names()) {
            const auto spec = make_objective(name);
            std::cout << name << "\tdim=" << spec.dim << "\tf*=" << format_double(spec.f_star) << '\n';
        }
        return kExitOk;
    }
    if (app.got_subcommand("check-bounds")) {
        try {
            return check_bounds(run_dir);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kExitConfig;
        }
    }

    ExperimentConfig cfg;
    try {
        if (!config_path.empty()) cfg.apply_text(read_file(config_path));
        if (!function.empty()) cfg.function = function;
        if (dim >= 0) cfg.dim = dim;
        if (!methods.empty()) {
            std::ostringstream m;
            m << "method = " << methods;
            cfg.apply_text(m.str());
        }
        if (!partition.empty()) cfg.partition = parse_partition(partition);
        if (n_init >= 0) cfg.n_init = n_init;
        if (n_iter >= 0) cfg.n_iter = n_iter;
        if (repeats >= 0) cfg.repeats = repeats;
        if (seed_set) cfg.seed = seed;
        if (beta >= 0) cfg.beta = beta;
        if (ts_samples >= 0) cfg.ts_samples = ts_samples;
        if (ts_argmax) cfg.ts_argmax = true;
        if (C >= 0) cfg.movement_constant = C;
        if (quad_order >= 0) cfg.quad_order = quad_order;
        if (train_steps >= 0) cfg.train_steps = train_steps;
        if (workers >= 0) cfg.workers = workers;
        if (!out.empty()) cfg.out_dir = out;
        cfg.validate();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    BatteryResult res;
    try {
        res = run_battery(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRunFailure;
    }
    for (const auto& f : res.failures) std::cerr << "failed: " << f << '\n';
    if (cfg.out_dir.empty()) {
        std::cout << res.aggregate_csv;
    } else {
        std::cout << "wrote " << res.logs.size() << " run(s) to " << cfg.out_dir << '\n';
    }
    if (res.failures.empty()) return kExitOk;
    return res.logs.empty() ? kExitRunFailure : kExitPartial;
}
