// End-to-end tests of the command-line tool: every subcommand's output must
// be a valid input for the next stage, with the documented exit codes.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "specclip/io.hpp"
#include "specclip/matrix.hpp"

using namespace specclip;

namespace {

namespace fs = std::filesystem;

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

class Sandbox {
public:
    Sandbox() {
        dir_ = fs::temp_directory_path() /
               ("specclip_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
        fs::create_directories(dir_);
    }
    ~Sandbox() {
        std::error_code ec;
        fs::remove_all(dir_, ec);
    }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    RunResult run(const std::string& args, const std::string& env = "") const {
        const std::string log = path("cmd.log");
        const std::string cmd =
            env + (env.empty() ? "" : " ") + SPECCLIP_CLI_PATH + " " + args + " > " + log +
            " 2>&1";
        const int status = std::system(cmd.c_str());

        RunResult result;
        result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        std::ifstream in(log);
        std::stringstream buffer;
        buffer << in.rdbuf();
        result.output = buffer.str();
        return result;
    }

private:
    fs::path dir_;
    static inline int counter_ = 0;
};

double value_after(const std::string& text, const std::string& key) {
    const auto pos = text.find(key + "=");
    REQUIRE(pos != std::string::npos);
    return std::stod(text.substr(pos + key.size() + 1));
}

}  // namespace

TEST_CASE("cli: gen/fit/clip pipeline on a stable ground truth is a no-op clip") {
    Sandbox box;
    const RunResult gen = box.run("gen --kind linear --n 4 --rho 0.9 --n-traj 5 --T 30 --seed 7 "
                                  "--out " + box.path("data.csv") +
                                  " --truth-out " + box.path("truth.json"));
    REQUIRE(gen.exit_code == 0);

    const RunResult fit =
        box.run("fit --in " + box.path("data.csv") + " --out " + box.path("model.json"));
    REQUIRE(fit.exit_code == 0);
    CHECK(value_after(fit.output, "spectral_radius") == doctest::Approx(0.9).epsilon(1e-6));

    const RunResult clip = box.run("clip --in " + box.path("model.json") + " --eps 0 --out " +
                                   box.path("clipped.json"));
    REQUIRE(clip.exit_code == 0);
    CHECK(value_after(clip.output, "n_clipped") == 0);
    CHECK(value_after(clip.output, "radius_before") ==
          doctest::Approx(value_after(clip.output, "radius_after")));

    // the fitted matrix recovers the generator matrix
    const AnyModel truth = load_model(box.path("truth.json"));
    const AnyModel fitted = load_model(box.path("model.json"));
    const RealMatrix& A_true = std::get<LinearModel>(truth).A;
    const RealMatrix& A_fit = std::get<LinearModel>(fitted).A;
    CHECK((A_true - A_fit).norm() <= 1e-7 * A_true.norm());
}

TEST_CASE("cli: unstable ground truth is stabilized by clip") {
    Sandbox box;
    REQUIRE(box.run("gen --kind linear --n 4 --rho 1.3 --n-traj 4 --T 25 --seed 3 --out " +
                    box.path("data.csv"))
                .exit_code == 0);
    REQUIRE(box.run("fit --in " + box.path("data.csv") + " --out " + box.path("model.json"))
                .exit_code == 0);

    const RunResult clip = box.run("clip --in " + box.path("model.json") + " --eps 0 --out " +
                                   box.path("clipped.json"));
    REQUIRE(clip.exit_code == 0);
    CHECK(value_after(clip.output, "n_clipped") >= 1);
    CHECK(value_after(clip.output, "radius_before") > 1.0);
    CHECK(value_after(clip.output, "radius_after") <= 1.0 + 1e-8);

    const AnyModel clipped = load_model(box.path("clipped.json"));
    CHECK(is_schur_stable(std::get<LinearModel>(clipped).A, 0.0));
}

TEST_CASE("cli: controlled pipeline keeps B through clip") {
    Sandbox box;
    REQUIRE(box.run("gen --kind controlled --n 3 --m 2 --rho 0.8 --n-traj 4 --T 40 --seed 11 "
                    "--out " + box.path("data.csv"))
                .exit_code == 0);
    REQUIRE(box.run("fit --in " + box.path("data.csv") + " --out " + box.path("model.json"))
                .exit_code == 0);
    REQUIRE(box.run("clip --in " + box.path("model.json") + " --eps 0 --out " +
                    box.path("clipped.json"))
                .exit_code == 0);

    const AnyModel before = load_model(box.path("model.json"));
    const AnyModel after = load_model(box.path("clipped.json"));
    REQUIRE(std::get<LinearModel>(before).B.has_value());
    REQUIRE(std::get<LinearModel>(after).B.has_value());
    CHECK(*std::get<LinearModel>(before).B == *std::get<LinearModel>(after).B);
}

TEST_CASE("cli: rollout and eval close the loop") {
    Sandbox box;
    REQUIRE(box.run("gen --kind linear --n 3 --rho 0.85 --n-traj 3 --T 20 --seed 5 --out " +
                    box.path("data.csv") + " --truth-out " + box.path("truth.json"))
                .exit_code == 0);
    REQUIRE(box.run("fit --in " + box.path("data.csv") + " --out " + box.path("model.json"))
                .exit_code == 0);
    REQUIRE(box.run("rollout --model " + box.path("model.json") +
                    " --horizon 40 --x0 unit --out " + box.path("pred.csv"))
                .exit_code == 0);
    REQUIRE(box.run("rollout --model " + box.path("truth.json") +
                    " --horizon 40 --x0 unit --out " + box.path("true.csv"))
                .exit_code == 0);

    const RunResult eval = box.run("eval --pred " + box.path("pred.csv") + " --truth " +
                                   box.path("true.csv") + " --out " + box.path("curve.csv"));
    REQUIRE(eval.exit_code == 0);
    CHECK(value_after(eval.output, "summary_mean") <= 1e-8);
    CHECK(eval.output.find("diverged_at=none") != std::string::npos);

    // curve file: header + one row per step
    std::ifstream curve(box.path("curve.csv"));
    std::string line;
    int rows = 0;
    while (std::getline(curve, line)) {
        ++rows;
    }
    CHECK(rows == 42);  // header + 41 steps
}

TEST_CASE("cli: koopman fit, clip, rollout, and modes on the polynomial benchmark") {
    Sandbox box;
    REQUIRE(box.run("gen --kind polynomial --n 2 --n-traj 10 --T 15 --seed 2 --out " +
                    box.path("poly.csv"))
                .exit_code == 0);

    const RunResult kfit = box.run("koopman-fit --in " + box.path("poly.csv") +
                                   " --degree 2 --out " + box.path("koop.json"));
    REQUIRE(kfit.exit_code == 0);
    CHECK(value_after(kfit.output, "lifted_dim") == 5);
    CHECK(value_after(kfit.output, "spectral_radius") == doctest::Approx(0.9).epsilon(1e-3));

    REQUIRE(box.run("clip --in " + box.path("koop.json") + " --eps 0.01 --out " +
                    box.path("koopclip.json"))
                .exit_code == 0);
    REQUIRE(box.run("rollout --model " + box.path("koopclip.json") +
                    " --horizon 60 --x0 unit --out " + box.path("kpred.csv"))
                .exit_code == 0);

    const RunResult modes = box.run("modes --model " + box.path("koop.json") +
                                    " --subset all --x0 unit --horizon 20 --out " +
                                    box.path("modes.csv"));
    REQUIRE(modes.exit_code == 0);
    CHECK(value_after(modes.output, "modes_used") == 5);

    const RunResult stable_modes = box.run("modes --model " + box.path("koop.json") +
                                           " --subset stable --x0 unit --horizon 20 --out " +
                                           box.path("smodes.csv"));
    REQUIRE(stable_modes.exit_code == 0);
    CHECK(value_after(stable_modes.output, "modes_used") == 5);  // benchmark is stable
}

TEST_CASE("cli: sweep-eps on the clean polynomial benchmark never clips") {
    Sandbox box;
    REQUIRE(box.run("gen --kind polynomial --n 2 --n-traj 10 --T 15 --seed 2 --out " +
                    box.path("poly.csv"))
                .exit_code == 0);

    // truth for evaluation: one long noiseless trajectory from the same system
    REQUIRE(box.run("gen --kind polynomial --n 2 --n-traj 1 --T 101 --seed 77 --out " +
                    box.path("truth.csv"))
                .exit_code == 0);

    const RunResult sweep = box.run("sweep-eps --data " + box.path("poly.csv") + " --truth " +
                                    box.path("truth.csv") +
                                    " --values 0,1e-5,1e-2 --horizon 100 --koopman-degree 2 "
                                    "--out " + box.path("sweep.csv"));
    REQUIRE(sweep.exit_code == 0);

    // all three rows fit the same stable model: nothing to clip at any eps
    std::ifstream in(box.path("sweep.csv"));
    std::string line;
    std::getline(in, line);  // header
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        CHECK(line.find(",0,") != std::string::npos);  // n_clipped column
    }
    CHECK(rows == 3);
}

TEST_CASE("cli: bench emits records and a final slope line") {
    Sandbox box;
    const RunResult bench = box.run("bench --dims 16,24,32 --repeats 1 --seed 4 --out " +
                                    box.path("bench.csv"));
    REQUIRE(bench.exit_code == 0);
    CHECK(bench.output.find("slope,") != std::string::npos);

    std::ifstream in(box.path("bench.csv"));
    std::string line;
    int rows = 0;
    bool slope_last = false;
    while (std::getline(in, line)) {
        ++rows;
        slope_last = line.rfind("slope,", 0) == 0;
    }
    CHECK(rows == 4);  // three records + slope
    CHECK(slope_last);
}

TEST_CASE("cli: deterministic given identical inputs and --seed") {
    Sandbox box;
    const std::string args = "gen --kind linear --n 3 --rho 0.9 --n-traj 2 --T 10 --seed 42 ";
    REQUIRE(box.run(args + "--out " + box.path("a.csv")).exit_code == 0);
    REQUIRE(box.run(args + "--out " + box.path("b.csv")).exit_code == 0);

    std::ifstream fa(box.path("a.csv")), fb(box.path("b.csv"));
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    CHECK(sa.str() == sb.str());
    CHECK(sa.str().find("traj_id,t,x_0,x_1,x_2") == 0);
}

TEST_CASE("cli: SPECCLIP_SEED environment variable sets the default seed") {
    Sandbox box;
    const std::string args = "gen --kind linear --n 2 --rho 0.9 --n-traj 1 --T 6 --out ";
    REQUIRE(box.run(args + box.path("env9.csv"), "SPECCLIP_SEED=9").exit_code == 0);
    REQUIRE(box.run(args + box.path("cli9.csv") + " --seed 9").exit_code == 0);
    REQUIRE(box.run(args + box.path("env1.csv"), "SPECCLIP_SEED=1").exit_code == 0);

    auto slurp = [&](const std::string& p) {
        std::ifstream f(p);
        std::stringstream s;
        s << f.rdbuf();
        return s.str();
    };
    CHECK(slurp(box.path("env9.csv")) == slurp(box.path("cli9.csv")));
    CHECK(slurp(box.path("env9.csv")) != slurp(box.path("env1.csv")));

    // an explicit --seed wins over the environment
    REQUIRE(box.run(args + box.path("mix.csv") + " --seed 9", "SPECCLIP_SEED=1").exit_code == 0);
    CHECK(slurp(box.path("mix.csv")) == slurp(box.path("cli9.csv")));
}

TEST_CASE("cli: exit codes distinguish usage, data, and numerical failures") {
    Sandbox box;

    // usage: unknown flag / missing required / out-of-range eps
    CHECK(box.run("clip --nonsense").exit_code == 2);
    CHECK(box.run("fit").exit_code == 2);
    CHECK(box.run("frobnicate").exit_code == 2);

    // data: unreadable input file
    CHECK(box.run("fit --in " + box.path("missing.csv") + " --out " + box.path("x.json"))
              .exit_code == 3);

    // data: malformed CSV
    {
        std::ofstream bad(box.path("bad.csv"));
        bad << "traj_id,t,x_0\n0,0,1.0\n0,1\n";
    }
    CHECK(box.run("fit --in " + box.path("bad.csv") + " --out " + box.path("x.json"))
              .exit_code == 3);

    // numerical: rolling an unstable lifted model overflows
    {
        std::ofstream model(box.path("hot.json"));
        model << R"({"schema_version": 1, "n": 1, "m": 0, "eps": 0,
                     "lifting": {"degree": 2, "n": 1},
                     "A": [[3.0, 0.0], [0.0, 3.0]]})";
    }
    const RunResult overflow = box.run("rollout --model " + box.path("hot.json") +
                                       " --horizon 2000 --x0 unit --out " + box.path("y.csv"));
    CHECK(overflow.exit_code == 4);
    CHECK(overflow.output.find("error=NumericalOverflow") != std::string::npos);

    // data: schema version gate
    {
        std::ofstream model(box.path("v9.json"));
        model << R"({"schema_version": 9, "n": 1, "m": 0, "eps": 0, "A": [[0.5]]})";
    }
    const RunResult vmis = box.run("clip --in " + box.path("v9.json") + " --eps 0 --out " +
                                   box.path("z.json"));
    CHECK(vmis.exit_code == 3);
    CHECK(vmis.output.find("error=VersionMismatch") != std::string::npos);
}

TEST_CASE("cli: corrupted datasets flow through the pipeline") {
    Sandbox box;
    REQUIRE(box.run("gen --kind corrupted --n 4 --rho 0.95 --n-traj 10 --T 40 "
                    "--failure-fraction 0.2 --noise-sigma 0.01 --seed 14 --out " +
                    box.path("corrupt.csv"))
                .exit_code == 0);
    const RunResult fit =
        box.run("fit --in " + box.path("corrupt.csv") + " --out " + box.path("model.json"));
    REQUIRE(fit.exit_code == 0);
    REQUIRE(box.run("clip --in " + box.path("model.json") + " --eps 0 --out " +
                    box.path("clipped.json"))
                .exit_code == 0);
    const AnyModel clipped = load_model(box.path("clipped.json"));
    CHECK(is_schur_stable(std::get<LinearModel>(clipped).A, 0.0));
}
