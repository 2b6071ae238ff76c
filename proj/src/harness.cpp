#include "ordbo/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "ordbo/acquisition.hpp"
#include "ordbo/baseline_ei.hpp"
#include "ordbo/errors.hpp"
#include "ordbo/text_doc.hpp"
#include "ordbo/vgp.hpp"

namespace ordbo {
namespace {

// stream tags for counter-based seeding
constexpr std::uint64_t kDesignStream = 1;
constexpr std::uint64_t kAcqStream = 2;
constexpr std::uint64_t kTsStream = 3;
constexpr std::uint64_t kSelectStream = 4;
constexpr std::uint64_t kSampleStream = 5;
constexpr std::uint64_t kFitStream = 6;
constexpr std::uint64_t kEiStream = 7;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct RefitStep {
    Eigen::MatrixXd before;    // locations of the retained points before insertion
    Eigen::VectorXd s_new;     // latent location of the new point under the previous warp
    Eigen::MatrixXd after;     // all locations after the constrained refit
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        T out;
        if constexpr (std::is_same_v<T, double>) {
            out = std::stod(v, &used);
        } else if constexpr (std::is_same_v<T, std::uint64_t>) {
            if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
            out = std::stoull(v, &used);
        } else {
            out = static_cast<T>(std::stol(v, &used));
        }
        if (used != v.size()) throw std::invalid_argument("trailing characters");
        return out;
    } catch (const std::exception&) {
        throw ConfigError("invalid value '" + v + "' for " + key);
    }
}

AnalysisTrace build_trace(const ExperimentConfig& config, const LatentModel& final_model,
                          const std::vector<RefitStep>& steps, const std::vector<double>& acquired_y, double f_star,
                          const Partition& partition, double& I_initial, const Eigen::MatrixXd& initial_locations) {
    AnalysisTrace t;
    const int d = final_model.dim();
    t.sigma2 = final_model.warp().noise_sigma * final_model.warp().noise_sigma;
    t.C = config.movement_constant;
    t.d = d;
    const auto consts = lemma2_constants(t.sigma2, t.C, d);
    const BetaSchedule sched{config.beta_delta, 1.0, 1.0, d};
    const KernelSpec kernel = final_model.kernel();
    I_initial = info_gain(cov_matrix(kernel, initial_locations), t.sigma2);

    // latent regret proxy: final posterior mean against its minimum over witnesses and observations
    AcquisitionConfig acq;
    acq.beta = 0.0;
    acq.candidates_per_cell = config.candidates_per_cell;
    const auto scores = score_cells_lcb(final_model, partition, acq);
    Eigen::VectorXd obs_mean, obs_var;
    final_model.marginals(final_model.locations(), obs_mean, obs_var);
    double f_proxy = obs_mean.minCoeff();
    for (const auto& s : scores) f_proxy = std::min(f_proxy, s.score);
    const int n_final = final_model.size();
    const int n_acq = static_cast<int>(steps.size());

    double V = 0.0, cum = 0.0, cum_latent = 0.0;
    for (int i = 0; i < n_acq; ++i) {
        const auto& st = steps[i];
        const double s2 = gp_posterior_variance(kernel, st.before, st.s_new, t.sigma2);
        V += s2;
        const double I = info_gain(cov_matrix(kernel, st.after), t.sigma2);
        const int n_after = static_cast<int>(st.after.rows());
        double moved = 0.0;
        for (Eigen::Index j = 0; j < st.before.rows(); ++j) {
            moved = std::max(moved, (st.after.row(j) - st.before.row(j)).norm());
        }
        cum += acquired_y[i] - f_star;
        const int obs_index = n_final - n_acq + i;
        cum_latent += obs_mean(obs_index) - f_proxy;
        const double b = beta_n(i + 1, sched);
        t.sigma2_obs.push_back(s2);
        t.V.push_back(V);
        t.I.push_back(I);
        t.beta.push_back(b);
        t.delta_bound.push_back(movement_radius(n_after, t.C, d));
        t.max_movement.push_back(moved);
        t.cum_regret_orig.push_back(cum);
        t.cum_regret_latent.push_back(cum_latent);
        t.bound_rhs.push_back(theorem1_bound(i + 1, b, I, consts.C1, consts.C2));
    }
    return t;
}

std::string checkpoint_text(const LatentModel* model, int iteration, const std::string& message) {
    TextDocument doc;
    doc.set("failure", "iteration", std::to_string(iteration));
    doc.set("failure", "message", message);
    std::string out = doc.str();
    if (model) out += serialize(*model);
    return out;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << text;
}

}  // namespace

// --- names and config --------------------------------------------------------------------

std::string method_name(Method m) {
    switch (m) {
        case Method::OrdinalLCB: return "ordinal-lcb";
        case Method::OrdinalTS: return "ordinal-ts";
        case Method::VanillaEI: return "ei";
    }
    return "?";
}

Method parse_method(const std::string& s) {
    if (s == "ordinal-lcb") return Method::OrdinalLCB;
    if (s == "ordinal-ts") return Method::OrdinalTS;
    if (s == "ei") return Method::VanillaEI;
    throw ConfigError("unknown method '" + s + "' (expected ordinal-lcb, ordinal-ts or ei)");
}

std::string partition_name(PartitionMode m) { return m == PartitionMode::TreeSearch ? "tree" : "exhaustive"; }

PartitionMode parse_partition(const std::string& s) {
    if (s == "tree") return PartitionMode::TreeSearch;
    if (s == "exhaustive") return PartitionMode::Exhaustive;
    throw ConfigError("unknown partition mode '" + s + "' (expected tree or exhaustive)");
}

void ExperimentConfig::validate() const {
    try {
        (void)make_objective(function, dim);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    if (methods.empty()) throw ConfigError("at least one method is required");
    if (n_init < 2) throw ConfigError("n_init must be >= 2");
    if (n_iter < 0) throw ConfigError("n_iter must be >= 0");
    if (repeats < 1) throw ConfigError("repeats must be >= 1");
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be a non-negative number");
    if (ts_samples < 1) throw ConfigError("ts_samples must be >= 1");
    if (candidates_per_cell < 1) throw ConfigError("candidates_per_cell must be >= 1");
    if (!(movement_constant > 0.0)) throw ConfigError("C must be positive");
    if (quad_order < 2) throw ConfigError("quad_order must be >= 2");
    if (train_steps < 0) throw ConfigError("train_steps must be >= 0");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (!(beta_delta > 0.0 && beta_delta < 1.0)) throw ConfigError("beta_delta must lie in (0, 1)");
}

void ExperimentConfig::apply_text(std::string_view text) {
    TextDocument doc;
    try {
        doc = TextDocument::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config file: ") + e.what());
    }
    for (const auto& name : doc.section_order()) {
        if (!name.empty()) throw ConfigError("config file: sections are not supported ([" + name + "])");
    }
    if (doc.section_order().empty()) return;
    for (const auto& [raw_key, value] : doc.section("")) {
        std::string key = raw_key;
        std::replace(key.begin(), key.end(), '-', '_');
        if (key == "function") function = value;
        else if (key == "dim") dim = parse_number<int>(key, value);
        else if (key == "method") {
            methods.clear();
            for (const auto& m : split_list(value)) methods.push_back(parse_method(m));
        } else if (key == "partition") partition = parse_partition(value);
        else if (key == "n_init") n_init = parse_number<int>(key, value);
        else if (key == "n_iter") n_iter = parse_number<int>(key, value);
        else if (key == "repeats") repeats = parse_number<int>(key, value);
        else if (key == "beta") beta = parse_number<double>(key, value);
        else if (key == "ts_samples") ts_samples = parse_number<int>(key, value);
        else if (key == "ts_argmax") ts_argmax = value == "true" || value == "1";
        else if (key == "candidates_per_cell") candidates_per_cell = parse_number<int>(key, value);
        else if (key == "C" || key == "movement_constant") movement_constant = parse_number<double>(key, value);
        else if (key == "quad_order") quad_order = parse_number<int>(key, value);
        else if (key == "train_steps") train_steps = parse_number<int>(key, value);
        else if (key == "learning_rate") learning_rate = parse_number<double>(key, value);
        else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
        else if (key == "out") out_dir = value;
        else if (key == "workers") workers = parse_number<int>(key, value);
        else if (key == "beta_delta") beta_delta = parse_number<double>(key, value);
        else throw ConfigError("config file: unknown key '" + raw_key + "'");
    }
}

// --- design ------------------------------------------------------------------------------

Eigen::MatrixXd initial_design(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper, int n_init, Rng& rng) {
    if (n_init < 2) throw DomainError("initial_design: n_init must be >= 2");
    const Eigen::Index d = lower.size();
    if (upper.size() != d || !((upper - lower).array() > 0).all()) throw DomainError("initial_design: invalid domain");
    constexpr int kPool = 64;
    Eigen::MatrixXd U(n_init, d);  // unit-cube coordinates
    U.row(0).setZero();
    U.row(1).setOnes();
    for (int i = 2; i < n_init; ++i) {
        double best_dist = -1.0;
        Eigen::RowVectorXd best(d);
        for (int c = 0; c < kPool; ++c) {
            Eigen::RowVectorXd cand(d);
            for (Eigen::Index k = 0; k < d; ++k) cand(k) = rng.uniform_open();
            double dist = std::numeric_limits<double>::infinity();
            for (int j = 0; j < i; ++j) dist = std::min(dist, (U.row(j) - cand).squaredNorm());
            if (dist > best_dist) {
                best_dist = dist;
                best = cand;
            }
        }
        U.row(i) = best;
    }
    Eigen::MatrixXd X(n_init, d);
    for (int i = 0; i < n_init; ++i) {
        X.row(i) = (lower.array() + U.row(i).transpose().array() * (upper - lower).array()).transpose();
    }
    // the corners must be exact
    X.row(0) = lower.transpose();
    X.row(1) = upper.transpose();
    return X;
}

// --- runs --------------------------------------------------------------------------------

std::vector<double> RunLog::cumulative_regret() const {
    std::vector<double> out;
    double cum = 0.0;
    for (const auto& r : records) {
        if (r.iteration > 0) cum += r.y - f_star;
        out.push_back(cum);
    }
    return out;
}

std::string RunLog::to_csv() const {
    std::ostringstream os;
    os << "iteration,method,function,seed,cell_id";
    for (int k = 0; k < dim; ++k) os << ",x_" << k;
    os << ",y,best_y,cum_regret,elbo,I_n,V_n\n";
    const auto cum = cumulative_regret();
    double best = std::numeric_limits<double>::infinity();
    const bool ordinal = method != Method::VanillaEI;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        best = std::min(best, r.y);
        os << r.iteration << ',' << method_name(method) << ',' << function << ',' << seed << ',' << r.cell_id;
        for (int k = 0; k < dim; ++k) os << ',' << format_double(r.x(k));
        os << ',' << format_double(r.y) << ',' << format_double(best) << ',' << format_double(cum[i]) << ','
           << format_double(r.elbo);
        double I = std::numeric_limits<double>::quiet_NaN(), V = I;
        if (ordinal && trace) {
            if (r.iteration == 0) {
                I = I_initial;
                V = 0.0;
            } else {
                I = trace->I[r.iteration - 1];
                V = trace->V[r.iteration - 1];
            }
        }
        os << ',' << format_double(I) << ',' << format_double(V) << '\n';
    }
    return os.str();
}

RunLog run_ordinal(const ExperimentConfig& config, Method method, std::uint64_t seed) {
    return run_ordinal(config, method, seed, make_objective(config.function, config.dim));
}

RunLog run_ordinal(const ExperimentConfig& config, Method method, std::uint64_t seed, const ObjectiveSpec& objective) {
    if (method == Method::VanillaEI) throw DomainError("run_ordinal: not an ordinal method");
    const int d = objective.dim;
    RunLog log;
    log.method = method;
    log.function = objective.name;
    log.seed = seed;
    log.dim = d;
    log.n_init = config.n_init;
    log.f_star = objective.f_star;

    Rng design_rng(derive_seed(seed, 0, kDesignStream));
    const Eigen::MatrixXd X0 = initial_design(objective.lower, objective.upper, config.n_init, design_rng);
    Eigen::VectorXd y0(X0.rows());
    for (Eigen::Index i = 0; i < X0.rows(); ++i) y0(i) = objective.evaluate(X0.row(i).transpose());
    log.evaluations = static_cast<int>(X0.rows());

    std::optional<LatentModel> model;
    int iteration = 0;
    try {
        const auto t0 = Clock::now();
        TrainOptions opts;
        opts.steps = config.train_steps;
        opts.learning_rate = config.learning_rate;
        model = train(LatentModel::initial(KernelSpec{}, RankedDataset::from(X0, y0), config.movement_constant,
                                           config.quad_order),
                      opts);
        const Eigen::MatrixXd initial_locations = model->locations();
        Partition partition = Partition::build_exhaustive(X0, config.partition);
        const double e0 = elbo(*model);
        for (Eigen::Index i = 0; i < X0.rows(); ++i) {
            IterationRecord r;
            r.x = X0.row(i).transpose();
            r.y = y0(i);
            r.elbo = e0;
            r.cell_count = partition.size();
            r.wall_seconds = seconds_since(t0);
            log.records.push_back(std::move(r));
        }

        std::vector<RefitStep> steps;
        std::vector<double> acquired;
        for (iteration = 1; iteration <= config.n_iter; ++iteration) {
            const auto ti = Clock::now();
            const auto it = static_cast<std::uint64_t>(iteration);
            IterationRecord rec;
            rec.iteration = iteration;
            int cell = 0;
            if (method == Method::OrdinalLCB) {
                AcquisitionConfig acq;
                acq.beta = config.beta;
                acq.candidates_per_cell = config.candidates_per_cell;
                acq.rng_seed = derive_seed(seed, it, kAcqStream);
                std::vector<CellScore> scores;
                cell = select_lcb(*model, partition, acq, &scores);
                rec.witness = scores[cell].witness;
                rec.score_min = scores[cell].score;
                rec.score_max = scores[cell].score;
                for (const auto& s : scores) rec.score_max = std::max(rec.score_max, s.score);
            } else {
                const auto counts = ts_counts(*model, partition, config.ts_samples, derive_seed(seed, kTsStream), it);
                Rng pick(derive_seed(seed, it, kSelectStream));
                cell = config.ts_argmax ? select_ts_argmax(counts) : select_ts(counts, pick);
                const Box lb = latent_box(partition.cell(cell), model->locations());
                rec.witness = 0.5 * (lb.lo + lb.hi);
                rec.score_min = *std::min_element(counts.begin(), counts.end());
                rec.score_max = *std::max_element(counts.begin(), counts.end());
            }
            rec.cell_id = cell;
            {
                Eigen::VectorXd m, v;
                model->marginals(rec.witness.transpose(), m, v);
                rec.post_mean = m(0);
                rec.post_sd = std::sqrt(v(0));
            }

            Rng sampler(derive_seed(seed, it, kSampleStream));
            const Eigen::VectorXd x = sample_in_cell(partition.x_box(cell, model->data().X), sampler);
            const double y = objective.evaluate(x);
            ++log.evaluations;

            const int n_prev = model->size();
            const LatentModel grown = insert_observation(*model, x, y);
            const Eigen::MatrixXd& X = grown.data().X;
            if (config.partition == PartitionMode::TreeSearch) {
                partition.split_cell(cell, X, n_prev);
            } else {
                partition = Partition::build_exhaustive(X, PartitionMode::Exhaustive);
            }
            const double radius = movement_radius(n_prev + 1, config.movement_constant, d);
            const MovementBox box{model->locations(), radius / std::sqrt(static_cast<double>(d))};
            TrainOptions opts;
            opts.steps = config.train_steps;
            opts.learning_rate = config.learning_rate;
            LatentModel trained = train(grown, opts, box);
            steps.push_back({model->locations(), grown.locations().row(n_prev).transpose(), trained.locations()});
            acquired.push_back(y);
            model.emplace(std::move(trained));

            rec.x = x;
            rec.y = y;
            rec.elbo = elbo(*model);
            rec.cell_count = partition.size();
            rec.wall_seconds = seconds_since(ti);
            log.records.push_back(std::move(rec));
        }
        --iteration;
        log.final_cell_count = partition.size();
        double I0 = 0.0;
        log.trace = build_trace(config, *model, steps, acquired, objective.f_star, partition, I0, initial_locations);
        log.I_initial = I0;
    } catch (const std::exception& e) {
        const std::string msg = "run failed at iteration " + std::to_string(iteration) + ": " + e.what();
        throw RunFailure(msg, iteration, checkpoint_text(model ? &*model : nullptr, iteration, e.what()));
    }
    return log;
}

RunLog run_baseline(const ExperimentConfig& config, std::uint64_t seed) {
    return run_baseline(config, seed, make_objective(config.function, config.dim));
}

RunLog run_baseline(const ExperimentConfig& config, std::uint64_t seed, const ObjectiveSpec& objective) {
    const int d = objective.dim;
    RunLog log;
    log.method = Method::VanillaEI;
    log.function = objective.name;
    log.seed = seed;
    log.dim = d;
    log.n_init = config.n_init;
    log.f_star = objective.f_star;

    Rng design_rng(derive_seed(seed, 0, kDesignStream));
    Eigen::MatrixXd X = initial_design(objective.lower, objective.upper, config.n_init, design_rng);
    Eigen::VectorXd y(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        y(i) = objective.evaluate(X.row(i).transpose());
        IterationRecord r;
        r.x = X.row(i).transpose();
        r.y = y(i);
        log.records.push_back(std::move(r));
    }
    log.evaluations = static_cast<int>(X.rows());

    int iteration = 0;
    try {
        for (iteration = 1; iteration <= config.n_iter; ++iteration) {
            const auto ti = Clock::now();
            const auto it = static_cast<std::uint64_t>(iteration);
            Rng fit_rng(derive_seed(seed, it, kFitStream));
            const auto gp = GpModel::fit(X, y, objective.lower, objective.upper, fit_rng);
            Rng ei_rng(derive_seed(seed, it, kEiStream));
            const Eigen::VectorXd x = select_ei(gp, ei_rng);
            IterationRecord rec;
            rec.iteration = iteration;
            {
                Eigen::VectorXd m, s;
                gp.predict(x.transpose(), m, s);
                rec.post_mean = m(0);
                rec.post_sd = s(0);
            }
            rec.x = x;
            rec.y = objective.evaluate(x);
            ++log.evaluations;
            X.conservativeResize(X.rows() + 1, Eigen::NoChange);
            X.row(X.rows() - 1) = x.transpose();
            y.conservativeResize(y.size() + 1);
            y(y.size() - 1) = rec.y;
            rec.wall_seconds = seconds_since(ti);
            log.records.push_back(std::move(rec));
        }
    } catch (const std::exception& e) {
        const std::string msg = "run failed at iteration " + std::to_string(iteration) + ": " + e.what();
        throw RunFailure(msg, iteration, checkpoint_text(nullptr, iteration, e.what()));
    }
    return log;
}

RunLog run_single(const ExperimentConfig& config, Method method, std::uint64_t seed) {
    return method == Method::VanillaEI ? run_baseline(config, seed) : run_ordinal(config, method, seed);
}

std::uint64_t child_seed(std::uint64_t master, int repeat) {
    return derive_seed(master, 0x5eedULL, static_cast<std::uint64_t>(repeat));
}

// --- battery -----------------------------------------------------------------------------

double quantile(std::vector<double> v, double q) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::string aggregate_csv(const std::vector<RunLog>& logs) {
    std::ostringstream os;
    os << "iteration,method,function,median_cum_regret,q25,q75\n";
    std::vector<Method> order;
    for (const auto& l : logs) {
        if (std::find(order.begin(), order.end(), l.method) == order.end()) order.push_back(l.method);
    }
    for (Method m : order) {
        std::map<int, std::vector<double>> by_iter;
        std::string fn;
        for (const auto& l : logs) {
            if (l.method != m) continue;
            fn = l.function;
            const auto cum = l.cumulative_regret();
            std::map<int, double> last;
            for (std::size_t i = 0; i < l.records.size(); ++i) last[l.records[i].iteration] = cum[i];
            for (const auto& [it, v] : last) by_iter[it].push_back(v);
        }
        for (const auto& [it, vals] : by_iter) {
            os << it << ',' << method_name(m) << ',' << fn << ',' << format_double(quantile(vals, 0.5)) << ','
               << format_double(quantile(vals, 0.25)) << ',' << format_double(quantile(vals, 0.75)) << '\n';
        }
    }
    return os.str();
}

std::string run_file_stem(const RunLog& log) {
    return method_name(log.method) + "_" + log.function + "_seed" + std::to_string(log.seed);
}

BatteryResult run_battery(const ExperimentConfig& config) {
    config.validate();
    struct Task {
        Method method;
        int repeat;
    };
    std::vector<Task> tasks;
    for (Method m : config.methods)
        for (int r = 0; r < config.repeats; ++r) tasks.push_back({m, r});

    std::vector<std::optional<RunLog>> results(tasks.size());
    std::vector<std::string> errors(tasks.size());
    std::vector<std::string> checkpoints(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            const auto seed = child_seed(config.seed, tasks[i].repeat);
            try {
                results[i] = run_single(config, tasks[i].method, seed);
            } catch (const RunFailure& e) {
                errors[i] = e.what();
                checkpoints[i] = e.checkpoint();
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    const int nthreads = std::min<int>(config.workers, static_cast<int>(tasks.size()));
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    BatteryResult out;
    out.attempted = static_cast<int>(tasks.size());
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (results[i]) {
            out.logs.push_back(std::move(*results[i]));
        } else {
            out.failures.push_back(method_name(tasks[i].method) + " repeat " + std::to_string(tasks[i].repeat) + ": " +
                                   errors[i]);
        }
    }
    out.aggregate_csv = aggregate_csv(out.logs);

    if (!config.out_dir.empty()) {
        namespace fs = std::filesystem;
        const fs::path root(config.out_dir);
        fs::create_directories(root / "runs");
        for (const auto& l : out.logs) {
            const auto stem = run_file_stem(l);
            write_file(root / "runs" / (stem + ".csv"), l.to_csv());
            if (l.trace) {
                write_file(root / "runs" / (stem + ".trace.csv"), l.trace->to_csv());
                TextDocument side;
                side.set("analysis", "sigma2", l.trace->sigma2);
                side.set("analysis", "C", l.trace->C);
                side.set("analysis", "d", std::to_string(l.trace->d));
                side.set("analysis", "final_cell_count", std::to_string(l.final_cell_count));
                write_file(root / "runs" / (stem + ".analysis.txt"), side.str());
            }
        }
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            if (results[i]) continue;
            RunLog stub;
            stub.method = tasks[i].method;
            stub.function = config.function;
            stub.seed = child_seed(config.seed, tasks[i].repeat);
            write_file(root / "runs" / (run_file_stem(stub) + ".checkpoint.txt"),
                       checkpoints[i].empty() ? errors[i] + "\n" : checkpoints[i]);
        }
        write_file(root / "aggregate.csv", out.aggregate_csv);
    }
    return out;
}

}  // namespace ordbo
