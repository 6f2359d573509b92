// Command-line front end: train, evaluate, verify, list-problems, export.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cdnn/config.hpp"
#include "cdnn/errors.hpp"
#include "cdnn/eval.hpp"
#include "cdnn/parallel.hpp"
#include "cdnn/problems.hpp"
#include "cdnn/training.hpp"
#include "cdnn/verify.hpp"

namespace {

using namespace cdnn;

int run_train(const std::string& config_path, const std::string& history_path, const std::string& checkpoint_path,
              bool quiet) {
    Experiment exp = load_experiment(config_path);
    exp.training.record_wall_clock = !reference_mode();

    std::ofstream history;
    if (!history_path.empty()) {
        history.open(history_path, std::ios::binary);
        if (!history) throw IoError("cannot open history file '" + history_path + "' for writing");
        history << history_csv_header() << '\n';
    }
    auto on_log = [&](const TrainRecord& rec, const CoupledParams& params) {
        if (history.is_open()) {
            history << history_csv_row(rec) << '\n' << std::flush;
            if (!history) throw IoError("failed writing history file '" + history_path + "'");
        }
        if (!checkpoint_path.empty()) save_checkpoint(checkpoint_path, exp.training.seed, params);
        if (!quiet)
            std::fprintf(stderr, "iter %8llu  loss %.6e  |grad| %.3e\n", static_cast<unsigned long long>(rec.iteration),
                         rec.loss.total, rec.grad_norm);
    };
    const TrainResult result = train(exp.problem, exp.training, on_log);
    if (!checkpoint_path.empty()) save_checkpoint(checkpoint_path, exp.training.seed, result.params);
    if (result.error) {
        std::fprintf(stderr, "numerical failure: %s\n", result.error->c_str());
        return kExitNumerical;
    }
    if (!quiet) {
        std::fprintf(stderr, "%llu updates%s\n", static_cast<unsigned long long>(result.updates),
                     result.converged ? " (gradient-norm tolerance reached)" : "");
    }
    return kExitOk;
}

int run_evaluate(const std::string& checkpoint_path, const std::string& config_path) {
    const Experiment exp = load_experiment(config_path);
    const Checkpoint ckpt = load_checkpoint(checkpoint_path);
    const ErrorReport report = evaluate(ckpt.params, exp.problem, exp.grid, exp.interface_points);
    json out = report_to_json(report);
    out["problem"] = exp.problem.name;
    std::cout << out.dump(2) << '\n';
    return kExitOk;
}

int run_export(const std::string& checkpoint_path, const std::string& config_path, const std::string& out_path) {
    const Experiment exp = load_experiment(config_path);
    const Checkpoint ckpt = load_checkpoint(checkpoint_path);
    export_fields(ckpt.params, exp.problem, exp.grid, out_path);
    return 0;
}

int run_verify(const std::string& name) {
    const ProblemSpec spec = make_problem(name);
    bool ok = true;
    if (spec.exact) {
        const ForcingCheck fc = forcing_consistency(spec, 1000, 7);
        const bool pass = fc.max() <= 1e-10;
        ok = ok && pass;
        std::printf("%s forcing consistency: max residual %.3e (stokes %.3e, darcy %.3e, interface %.3e, boundary %.3e)\n",
                    pass ? "PASS" : "FAIL", fc.max(), fc.stokes, fc.darcy, fc.interface, fc.boundary);
    } else {
        std::printf("SKIP forcing consistency: %s has no closed-form solution\n", name.c_str());
    }
    const CoupledParams params = init_params(coupled_archs(3, 16), 1);
    Rng rng(sampler_seed(1));
    const SampleBatch batch = draw_batch(spec.geometry, BatchSizes{}, rng);
    const GradientCheck gc = gradient_check(spec, params, batch, unit_weights(), 50, 11);
    const bool pass = gc.max_rel_error <= 1e-5;
    ok = ok && pass;
    std::printf("%s gradient check: max relative error %.3e over %zu coordinates\n", pass ? "PASS" : "FAIL",
                gc.max_rel_error, gc.coordinates.size());
    return ok ? kExitOk : kExitNumerical;
}

int run_list() {
    for (const auto& p : list_problems()) std::printf("%-8s %s\n", p.name.c_str(), p.description.c_str());
    std::printf("%-8s %s\n", "custom", "inline problem object in the config file");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coupled Stokes/Darcy-Forchheimer solver with deep residual networks"};
    app.require_subcommand(1);

    std::string config, checkpoint, history, out_csv, problem;
    bool quiet = false;

    auto* train_cmd = app.add_subcommand("train", "train the four networks on a config");
    train_cmd->add_option("config", config, "experiment config (JSON)")->required();
    train_cmd->add_option("--history", history, "write the training history CSV here");
    train_cmd->add_option("--checkpoint", checkpoint, "write parameter checkpoints here");
    train_cmd->add_flag("-q,--quiet", quiet, "no progress output");

    auto* eval_cmd = app.add_subcommand("evaluate", "print error metrics of a checkpoint as JSON");
    eval_cmd->add_option("checkpoint", checkpoint, "checkpoint (JSON)")->required();
    eval_cmd->add_option("config", config, "experiment config (JSON)")->required();

    auto* verify_cmd = app.add_subcommand("verify", "forcing-consistency and gradient checks for a benchmark");
    verify_cmd->add_option("problem", problem, "benchmark name")->required();

    auto* list_cmd = app.add_subcommand("list-problems", "list the registered benchmarks");

    auto* export_cmd = app.add_subcommand("export", "write network fields on the evaluation grid as CSV");
    export_cmd->add_option("checkpoint", checkpoint, "checkpoint (JSON)")->required();
    export_cmd->add_option("config", config, "experiment config (JSON)")->required();
    export_cmd->add_option("out", out_csv, "output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*train_cmd) return run_train(config, history, checkpoint, quiet);
        if (*eval_cmd) return run_evaluate(checkpoint, config);
        if (*verify_cmd) return run_verify(problem);
        if (*list_cmd) return run_list();
        if (*export_cmd) return run_export(checkpoint, config, out_csv);
    } catch (const cdnn::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.exit_code();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
