// Command-line front end: generate data, fit linear or Koopman models, clip
// their spectra, roll out predictions, evaluate them, inspect modes, sweep
// the stability margin, and benchmark clipping cost.
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical error.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "specclip/clip.hpp"
#include "specclip/datagen.hpp"
#include "specclip/io.hpp"
#include "specclip/koopman.hpp"
#include "specclip/matrix.hpp"
#include "specclip/simeval.hpp"
#include "specclip/sysid.hpp"

namespace {

using namespace specclip;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

struct Options {
    // gen
    std::string kind = "linear";
    int n = 2;
    int m = 1;
    double rho = 0.9;
    int n_traj = 5;
    int horizon_T = 20;
    double noise_sigma = 0.0;
    int truncate_to = 0;  // 0 = absent
    double failure_fraction = 0.0;
    std::string truth_out;

    // shared
    std::uint64_t seed = 0;
    double eps = 0.0;
    std::string in_path;
    std::string out_path;

    // fit / koopman-fit
    int degree = 2;
    bool koopman_clip = false;

    // rollout / eval / modes / sweep
    std::string model_path;
    int horizon = 100;
    std::string x0 = "unit";
    std::string pred_path;
    std::string truth_path;
    std::string metric = "mae";
    double moving_threshold = 9.0;
    double bound = 1e12;
    std::string subset = "all";
    std::string values = "0,1e-5,1e-2";
    std::string data_path;
    int sweep_degree = 0;  // 0 = plain linear fit

    // bench
    std::string dims = "64,128,256,512";
    int repeats = 3;
};

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::string current;
    for (char c : std::string(text + ",")) {
        if (c == ',') {
            if (!current.empty()) {
                out.push_back(std::stod(current));
                current.clear();
            }
        } else {
            current += c;
        }
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    for (double v : parse_double_list(text)) {
        out.push_back(static_cast<int>(v));
    }
    return out;
}

GenKind parse_kind(const std::string& kind) {
    if (kind == "linear") return GenKind::Linear;
    if (kind == "controlled") return GenKind::Controlled;
    if (kind == "polynomial") return GenKind::Polynomial;
    if (kind == "corrupted") return GenKind::Corrupted;
    throw DimensionMismatch("unknown --kind '" + kind + "'");
}

// Initial state from --x0: literal "zero", literal "unit" (normalized ones),
// or a path to a trajectory CSV whose first state is used.
RealVector resolve_x0(const std::string& spec, int n) {
    if (spec == "zero") {
        return RealVector::Zero(n);
    }
    if (spec == "unit") {
        return RealVector::Ones(n) / std::sqrt(static_cast<double>(n));
    }
    const TrajectoryDataset ds = load_trajectories(spec);
    if (ds.state_dim != n) {
        throw DimensionMismatch("--x0 file has state dimension " +
                                std::to_string(ds.state_dim) + ", expected " + std::to_string(n));
    }
    return ds.trajectories.front().states.col(0);
}

TrajectoryDataset dataset_from_states(const RealMatrix& states) {
    TrajectoryDataset ds;
    ds.state_dim = static_cast<int>(states.rows());
    ds.trajectories.push_back({states, RealMatrix{}});
    return ds;
}

void print_clip_summary(const ClipReport& r) {
    std::cout << "radius_before=" << format_double(r.radius_before)
              << " radius_after=" << format_double(r.radius_after)
              << " n_clipped=" << r.n_clipped
              << " gamma=" << format_double(r.perturbation_applied)
              << " cond_modal=" << format_double(r.cond_modal) << "\n";
}

int cmd_gen(const Options& opt) {
    GenSpec spec;
    spec.kind = parse_kind(opt.kind);
    spec.n = opt.n;
    spec.m = spec.kind == GenKind::Controlled ? opt.m : 0;
    spec.rho_target = opt.rho;
    spec.n_traj = opt.n_traj;
    spec.T = opt.horizon_T;
    spec.noise_sigma = opt.noise_sigma;
    if (opt.truncate_to > 0) {
        spec.truncate_to = opt.truncate_to;
    }
    spec.failure_fraction = opt.failure_fraction;
    spec.seed = opt.seed;

    const Generated gen = generate(spec);
    save_trajectories(opt.out_path, gen.data);
    if (!opt.truth_out.empty() && gen.A) {
        LinearModel truth;
        truth.A = *gen.A;
        if (gen.B) {
            truth.B = *gen.B;
        }
        save_model(opt.truth_out, truth);
    }
    std::cout << "written=" << opt.out_path << " trajectories=" << gen.data.trajectories.size()
              << " state_dim=" << gen.data.state_dim << " input_dim=" << gen.data.input_dim
              << "\n";
    return 0;
}

int cmd_fit(const Options& opt) {
    const TrajectoryDataset data = load_trajectories(opt.in_path);

    LinearModel model;
    if (data.input_dim > 0) {
        auto [A, B] = fit_ls_controlled(data);
        model.A = std::move(A);
        model.B = std::move(B);
    } else {
        model.A = fit_ls(data);
    }
    save_model(opt.out_path, model);
    std::cout << "written=" << opt.out_path << " n=" << model.A.rows()
              << " m=" << (model.B ? model.B->cols() : 0)
              << " spectral_radius=" << format_double(spectral_radius(model.A)) << "\n";
    return 0;
}

int cmd_clip(const Options& opt) {
    const AnyModel loaded = load_model(opt.in_path);

    if (std::holds_alternative<KoopmanModel>(loaded)) {
        const KoopmanModel cooled = clip_koopman(std::get<KoopmanModel>(loaded), opt.eps);
        save_model(opt.out_path, cooled);
        print_clip_summary(*cooled.clip_report);
        return 0;
    }

    const LinearModel& model = std::get<LinearModel>(loaded);
    LinearModel cooled;
    if (model.B) {
        cooled = clip_controlled(model.A, *model.B, opt.eps);
    } else {
        auto [A, report] = clip_spectrum(model.A, opt.eps);
        cooled.A = std::move(A);
        cooled.eps = opt.eps;
        cooled.clip_report = report;
    }
    save_model(opt.out_path, cooled);
    print_clip_summary(*cooled.clip_report);
    return 0;
}

int cmd_koopman_fit(const Options& opt) {
    const TrajectoryDataset data = load_trajectories(opt.in_path);
    KoopmanModel model = fit_koopman(data, make_lifting_spec(data.state_dim, opt.degree));
    if (opt.koopman_clip) {
        model = clip_koopman(model, opt.eps);
    }
    save_model(opt.out_path, model);
    std::cout << "written=" << opt.out_path << " lifted_dim=" << model.spec.lifted_dim()
              << " spectral_radius=" << format_double(spectral_radius(model.K))
              << " clipped=" << (model.clip_report ? 1 : 0) << "\n";
    return 0;
}

int cmd_rollout(const Options& opt) {
    const AnyModel loaded = load_model(opt.model_path);

    RealMatrix states;
    if (std::holds_alternative<KoopmanModel>(loaded)) {
        const KoopmanModel& model = std::get<KoopmanModel>(loaded);
        const RealVector x0 = resolve_x0(opt.x0, model.spec.state_dim);
        states = predict_states(model, x0, opt.horizon);
    } else {
        const LinearModel& model = std::get<LinearModel>(loaded);
        const RealVector x0 = resolve_x0(opt.x0, static_cast<int>(model.A.rows()));
        const RolloutResult result = rollout(model.A, x0, opt.horizon, opt.bound);
        states = result.states;
        if (result.diverged_at) {
            std::cout << "diverged_at=" << *result.diverged_at << "\n";
        }
    }
    save_trajectories(opt.out_path, dataset_from_states(states));
    std::cout << "written=" << opt.out_path << " steps=" << states.cols() << "\n";
    return 0;
}

int cmd_eval(const Options& opt) {
    const TrajectoryDataset pred = load_trajectories(opt.pred_path);
    const TrajectoryDataset truth = load_trajectories(opt.truth_path);
    if (pred.trajectories.size() != truth.trajectories.size()) {
        throw DimensionMismatch("eval: prediction and truth have different trajectory counts");
    }
    const ErrorMetric metric =
        opt.metric == "mse" ? ErrorMetric::MeanSquared : ErrorMetric::MeanAbsolute;

    // average the per-step error curves across trajectory pairs
    RealVector accumulated;
    double total_mean = 0.0;
    std::optional<int> first_divergence;
    std::vector<RealMatrix> predicted_sequences;
    for (std::size_t j = 0; j < pred.trajectories.size(); ++j) {
        const RealMatrix& p = pred.trajectories[j].states;
        const RealMatrix& t = truth.trajectories[j].states;
        const Eigen::Index steps = std::min(p.cols(), t.cols());
        const ErrorCurve curve =
            reconstruction_error(p.leftCols(steps), t.leftCols(steps), metric);
        if (accumulated.size() == 0) {
            accumulated = curve.per_step;
        } else {
            const Eigen::Index overlap = std::min(accumulated.size(), curve.per_step.size());
            // ragged lengths: report on the common prefix
            accumulated.conservativeResize(overlap);
            accumulated += curve.per_step.head(overlap);
        }
        total_mean += curve.summary_mean;
        predicted_sequences.push_back(p);
        for (Eigen::Index c = 0; c < p.cols(); ++c) {
            if (p.col(c).norm() > opt.bound && !first_divergence) {
                first_divergence = static_cast<int>(c);
            }
        }
    }
    accumulated /= static_cast<double>(pred.trajectories.size());
    total_mean /= static_cast<double>(pred.trajectories.size());

    if (!opt.out_path.empty()) {
        std::ofstream out(opt.out_path);
        if (!out) {
            throw ParseError("cannot open '" + opt.out_path + "' for writing");
        }
        out << "step,error\n";
        for (Eigen::Index k = 0; k < accumulated.size(); ++k) {
            out << k << "," << format_double(accumulated[k]) << "\n";
        }
    }

    double moving = 0.0;
    bool moving_ok = true;
    try {
        moving = moving_ratio(predicted_sequences, opt.moving_threshold);
    } catch (const TooShort&) {
        moving_ok = false;
    }

    std::cout << "summary_mean=" << format_double(total_mean)
              << " moving_ratio=" << (moving_ok ? format_double(moving) : "n/a")
              << " diverged_at=" << (first_divergence ? std::to_string(*first_divergence) : "none")
              << "\n";
    return 0;
}

int cmd_modes(const Options& opt) {
    const AnyModel loaded = load_model(opt.model_path);
    if (!std::holds_alternative<KoopmanModel>(loaded)) {
        throw DimensionMismatch("modes: the model file does not hold a lifted model");
    }
    const KoopmanModel& model = std::get<KoopmanModel>(loaded);
    const ModeSet modes = mode_decompose(model);

    std::vector<int> subset;
    if (opt.subset == "all") {
        for (int i = 0; i < model.spec.lifted_dim(); ++i) {
            subset.push_back(i);
        }
    } else if (opt.subset == "unstable" || opt.subset == "stable") {
        const bool want_unstable = opt.subset == "unstable";
        for (int i = 0; i < model.spec.lifted_dim(); ++i) {
            const bool unstable = std::abs(modes.eigenvalues[i]) > 1.0;
            if (unstable == want_unstable) {
                subset.push_back(i);
            }
        }
    } else {
        subset = parse_int_list(opt.subset);  // zero-based indices
    }

    const RealVector x0 = resolve_x0(opt.x0, model.spec.state_dim);
    const RealVector z0 = lift(x0, model.spec);
    const RealMatrix lifted = rollout_modes(modes, subset, z0, opt.horizon);
    save_trajectories(opt.out_path, dataset_from_states(lifted));

    std::cout << "written=" << opt.out_path << " modes_used=" << subset.size()
              << " gamma=" << format_double(modes.perturbation_applied) << "\n";
    return 0;
}

int cmd_sweep_eps(const Options& opt) {
    const TrajectoryDataset data = load_trajectories(opt.data_path);
    const TrajectoryDataset truth = load_trajectories(opt.truth_path);
    const std::vector<double> values = parse_double_list(opt.values);
    if (values.empty()) {
        throw DimensionMismatch("sweep-eps: no eps values given");
    }

    std::ofstream out;
    if (!opt.out_path.empty()) {
        out.open(opt.out_path);
        if (!out) {
            throw ParseError("cannot open '" + opt.out_path + "' for writing");
        }
        out << "eps,summary_mean,n_clipped,radius_before,radius_after\n";
    }

    const RealVector x0 = truth.trajectories.front().states.col(0);
    const Eigen::Index horizon =
        std::min<Eigen::Index>(opt.horizon, truth.trajectories.front().states.cols() - 1);

    for (double eps : values) {
        RealMatrix predicted;
        ClipReport report;
        if (opt.sweep_degree >= 2) {
            const KoopmanModel fitted =
                fit_koopman(data, make_lifting_spec(data.state_dim, opt.sweep_degree));
            const KoopmanModel cooled = clip_koopman(fitted, eps);
            report = *cooled.clip_report;
            predicted = predict_states(cooled, x0, static_cast<int>(horizon));
        } else {
            const RealMatrix fitted = fit_ls(data);
            auto [clipped, r] = clip_spectrum(fitted, eps);
            report = r;
            predicted = rollout(clipped, x0, static_cast<int>(horizon), opt.bound).states;
        }

        const RealMatrix truth_states =
            truth.trajectories.front().states.leftCols(predicted.cols());
        const ErrorCurve curve = reconstruction_error(predicted, truth_states);

        std::cout << "eps=" << format_double(eps)
                  << " summary_mean=" << format_double(curve.summary_mean)
                  << " n_clipped=" << report.n_clipped
                  << " radius_after=" << format_double(report.radius_after) << "\n";
        if (out.is_open()) {
            out << format_double(eps) << "," << format_double(curve.summary_mean) << ","
                << report.n_clipped << "," << format_double(report.radius_before) << ","
                << format_double(report.radius_after) << "\n";
        }
    }
    return 0;
}

int cmd_bench(const Options& opt) {
    const std::vector<int> dims = parse_int_list(opt.dims);
    const BenchResult result = bench_clip(dims, opt.repeats, opt.seed);

    std::ofstream out;
    if (!opt.out_path.empty()) {
        out.open(opt.out_path);
        if (!out) {
            throw ParseError("cannot open '" + opt.out_path + "' for writing");
        }
    }

    // one record per line: n,wall_time_seconds,slope_running
    std::vector<BenchRecord> so_far;
    for (const BenchRecord& record : result.records) {
        so_far.push_back(record);
        std::string slope_running = "n/a";
        if (so_far.size() >= 2) {
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            for (const BenchRecord& r : so_far) {
                const double lx = std::log(static_cast<double>(r.n));
                const double ly = std::log(r.wall_time_seconds);
                sx += lx;
                sy += ly;
                sxx += lx * lx;
                sxy += lx * ly;
            }
            const double count = static_cast<double>(so_far.size());
            slope_running = format_double((count * sxy - sx * sy) / (count * sxx - sx * sx));
        }
        const std::string line = std::to_string(record.n) + "," +
                                 format_double(record.wall_time_seconds) + "," + slope_running;
        std::cout << line << "\n";
        if (out.is_open()) {
            out << line << "\n";
        }
    }
    const std::string final_line =
        "slope," + (result.slope ? format_double(*result.slope) : std::string("n/a"));
    std::cout << final_line << "\n";
    if (out.is_open()) {
        out << final_line << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    Options opt;
    CLI::App app{"spectral clipping toolkit: learn linear dynamical systems by least "
                 "squares and stabilize them by clipping eigenvalue magnitudes"};
    app.require_subcommand(1);

    auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option("--seed", opt.seed, "random seed")->envname("SPECCLIP_SEED");
    };

    CLI::App* gen = app.add_subcommand("gen", "generate a synthetic trajectory dataset");
    gen->add_option("--kind", opt.kind, "linear|controlled|polynomial|corrupted");
    gen->add_option("--n", opt.n, "state dimension");
    gen->add_option("--m", opt.m, "input dimension (controlled)");
    gen->add_option("--rho", opt.rho, "target spectral radius of the ground truth");
    gen->add_option("--n-traj", opt.n_traj, "number of trajectories");
    gen->add_option("--T", opt.horizon_T, "trajectory length");
    gen->add_option("--noise-sigma", opt.noise_sigma, "process noise scale");
    gen->add_option("--truncate-to", opt.truncate_to, "truncate trajectories to this length");
    gen->add_option("--failure-fraction", opt.failure_fraction,
                    "fraction of failed demonstrations (corrupted kind)");
    gen->add_option("--out", opt.out_path, "output dataset CSV")->required();
    gen->add_option("--truth-out", opt.truth_out, "also write the ground-truth model here");
    add_seed(gen);

    CLI::App* fit = app.add_subcommand("fit", "least-squares fit (controlled auto-detected)");
    fit->add_option("--in", opt.in_path, "input dataset CSV")->required();
    fit->add_option("--out", opt.out_path, "output model JSON")->required();

    CLI::App* clip = app.add_subcommand("clip", "clip a model's spectrum to the unit disk");
    clip->add_option("--in", opt.in_path, "input model JSON")->required();
    clip->add_option("--eps", opt.eps, "stability margin in [0,1)")
        ->check(CLI::Range(0.0, 0.999999999));
    clip->add_option("--out", opt.out_path, "output model JSON")->required();

    CLI::App* kfit = app.add_subcommand("koopman-fit", "fit a lifted linear model");
    kfit->add_option("--in", opt.in_path, "input dataset CSV")->required();
    kfit->add_option("--degree", opt.degree, "monomial lifting degree >= 2");
    kfit->add_flag("--clip", opt.koopman_clip, "clip after fitting");
    kfit->add_option("--eps", opt.eps, "stability margin used with --clip")
        ->check(CLI::Range(0.0, 0.999999999));
    kfit->add_option("--out", opt.out_path, "output model JSON")->required();

    CLI::App* roll = app.add_subcommand("rollout", "roll a model forward from x0");
    roll->add_option("--model", opt.model_path, "model JSON")->required();
    roll->add_option("--horizon", opt.horizon, "steps to roll")->check(CLI::PositiveNumber);
    roll->add_option("--x0", opt.x0, "initial state: zero, unit, or a CSV path");
    roll->add_option("--bound", opt.bound, "divergence bound on the state norm");
    roll->add_option("--out", opt.out_path, "output trajectory CSV")->required();

    CLI::App* eval = app.add_subcommand("eval", "compare predictions against a truth file");
    eval->add_option("--pred", opt.pred_path, "predicted trajectories CSV")->required();
    eval->add_option("--truth", opt.truth_path, "ground-truth trajectories CSV")->required();
    eval->add_option("--metric", opt.metric, "mae|mse");
    eval->add_option("--moving-threshold", opt.moving_threshold,
                     "L1 gap defining a still-moving final frame");
    eval->add_option("--bound", opt.bound, "divergence bound");
    eval->add_option("--out", opt.out_path, "output error-curve CSV");

    CLI::App* modes = app.add_subcommand("modes", "mode-subset rollouts of a lifted model");
    modes->add_option("--model", opt.model_path, "lifted model JSON")->required();
    modes->add_option("--subset", opt.subset,
                      "all|unstable|stable or comma-separated zero-based indices");
    modes->add_option("--x0", opt.x0, "initial state: zero, unit, or a CSV path");
    modes->add_option("--horizon", opt.horizon, "steps to roll")->check(CLI::PositiveNumber);
    modes->add_option("--out", opt.out_path, "output lifted-rollout CSV")->required();

    CLI::App* sweep = app.add_subcommand("sweep-eps", "fit-clip-rollout-eval per eps value");
    sweep->add_option("--data", opt.data_path, "training dataset CSV")->required();
    sweep->add_option("--truth", opt.truth_path, "truth trajectory CSV for evaluation")
        ->required();
    sweep->add_option("--values", opt.values, "comma-separated eps values");
    sweep->add_option("--horizon", opt.horizon, "rollout horizon")->check(CLI::PositiveNumber);
    sweep->add_option("--koopman-degree", opt.sweep_degree,
                      "fit a lifted model of this degree instead of a plain linear fit");
    sweep->add_option("--out", opt.out_path, "output summary CSV");

    CLI::App* bench = app.add_subcommand("bench", "time clip calls across dimensions");
    bench->add_option("--dims", opt.dims, "comma-separated ascending dimensions >= 16");
    bench->add_option("--repeats", opt.repeats, "timing repeats per dimension")
        ->check(CLI::PositiveNumber);
    bench->add_option("--out", opt.out_path, "also write records to this CSV");
    add_seed(bench);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);  // --help
        }
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (gen->parsed()) return cmd_gen(opt);
        if (fit->parsed()) return cmd_fit(opt);
        if (clip->parsed()) return cmd_clip(opt);
        if (kfit->parsed()) return cmd_koopman_fit(opt);
        if (roll->parsed()) return cmd_rollout(opt);
        if (eval->parsed()) return cmd_eval(opt);
        if (modes->parsed()) return cmd_modes(opt);
        if (sweep->parsed()) return cmd_sweep_eps(opt);
        if (bench->parsed()) return cmd_bench(opt);
    } catch (const Error& e) {
        std::cerr << "error=" << e.code() << " message=\"" << e.what() << "\"\n";
        return e.category() == ErrorCategory::Data ? kExitData : kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error=Internal message=\"" << e.what() << "\"\n";
        return kExitNumerical;
    }
    return kExitUsage;
}
