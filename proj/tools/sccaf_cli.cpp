// Command-line front end: train / experiment / grid / sweep / audit.
//
// Every run writes results.csv, epochs.csv, and config.lock into --out so a
// finished directory is self-describing and reproducible.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sccaf/trainer.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string dataset;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::optional<double> alpha, beta, gamma, omega, eta, tau;
    std::optional<int> k, k_prime;
    std::string features_path, edges_path;
};

void add_common_flags(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "key = value config file");
    cmd->add_option("--dataset", args.dataset, "dataset name recorded in the outputs");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "single split seed (replaces the configured list)");
    cmd->add_option("--jobs", args.jobs, "worker threads across splits");
    cmd->add_option("--features", args.features_path, "node feature CSV");
    cmd->add_option("--edges", args.edges_path, "edge list CSV");
    cmd->add_option("--alpha", args.alpha, "invariance weight");
    cmd->add_option("--beta", args.beta, "sufficiency weight");
    cmd->add_option("--gamma", args.gamma, "orthogonality weight");
    cmd->add_option("--omega", args.omega, "contrastive weight");
    cmd->add_option("--eta", args.eta, "environmental weight");
    cmd->add_option("--tau", args.tau, "contrastive temperature");
    cmd->add_option("--K", args.k, "counterfactuals per node");
    cmd->add_option("--Kprime", args.k_prime, "opposite-sensitive neighbors per node");
}

sccaf::ExperimentConfig resolve_config(const CommonArgs& args) {
    sccaf::ExperimentConfig cfg;
    if (!args.config_path.empty()) cfg = sccaf::load_config(args.config_path);
    if (!args.dataset.empty()) cfg.meta.name = args.dataset;
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    if (!args.features_path.empty()) cfg.features_path = args.features_path;
    if (!args.edges_path.empty()) cfg.edges_path = args.edges_path;
    if (args.seed) cfg.split_seeds = {*args.seed};
    if (args.jobs) cfg.jobs = *args.jobs;
    if (args.alpha) cfg.weights.alpha = *args.alpha;
    if (args.beta) cfg.weights.beta = *args.beta;
    if (args.gamma) cfg.weights.gamma = *args.gamma;
    if (args.omega) cfg.weights.omega = *args.omega;
    if (args.eta) cfg.weights.eta = *args.eta;
    if (args.tau) cfg.weights.tau = *args.tau;
    if (args.k) cfg.weights.k = *args.k;
    if (args.k_prime) cfg.weights.k_prime = *args.k_prime;
    cfg.validate();
    return cfg;
}

std::filesystem::path prepare_out_dir(const sccaf::ExperimentConfig& cfg) {
    std::filesystem::path out(cfg.out_dir);
    std::filesystem::create_directories(out);
    return out;
}

void write_standard_outputs(const std::filesystem::path& out, const sccaf::ExperimentConfig& cfg,
                            const sccaf::RunResult& result) {
    sccaf::write_results_csv((out / "results.csv").string(), cfg.meta.name, cfg.method, result);
    sccaf::write_epochs_csv((out / "epochs.csv").string(), result);
    sccaf::write_config_lock((out / "config.lock").string(), cfg);
}

void print_summary(const sccaf::RunResult& result) {
    const auto agg = result.aggregate();
    std::printf("splits: %zu  auc: %.2f±%.2f  f1: %.2f±%.2f  dSP: %.2f±%.2f  dEO: %.2f±%.2f\n",
                result.splits.size(), agg.auc_mean, agg.auc_std, agg.f1_mean, agg.f1_std,
                agg.sp_mean, agg.sp_std, agg.eo_mean, agg.eo_std);
    for (const sccaf::SplitRun& r : result.splits)
        if (r.failed) std::printf("split %llu failed: %s\n",
                                  static_cast<unsigned long long>(r.seed), r.fail_reason.c_str());
}

std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(std::stod(tok));
    return out;
}

int run_train(const CommonArgs& args) {
    sccaf::ExperimentConfig cfg = resolve_config(args);
    if (!args.seed) cfg.split_seeds = {cfg.split_seeds.front()};
    const auto out = prepare_out_dir(cfg);

    sccaf::TabularGraphDataset raw =
        sccaf::load_dataset(cfg.features_path, cfg.edges_path, cfg.meta);
    sccaf::SplitAssignment split = sccaf::make_split(raw, cfg.train_ratio, cfg.val_ratio,
                                                     cfg.test_ratio, cfg.split_seeds.front());
    sccaf::TabularGraphDataset ds = sccaf::standardize_features(raw, split.train_idx);
    sccaf::PretrainedModel pre = sccaf::pretrain(ds, split, cfg);
    sccaf::TrainedModel model = sccaf::train(ds, split, pre, cfg);

    sccaf::RunResult result;
    result.splits = {model.run};
    write_standard_outputs(out, cfg, result);
    sccaf::save_checkpoint((out / "checkpoint.txt").string(), model.encoder, model.head);
    print_summary(result);
    return model.run.failed ? 1 : 0;
}

int run_experiment_cmd(const CommonArgs& args) {
    sccaf::ExperimentConfig cfg = resolve_config(args);
    const auto out = prepare_out_dir(cfg);
    sccaf::RunResult result = sccaf::run_experiment(cfg);
    write_standard_outputs(out, cfg, result);
    print_summary(result);
    return result.failed ? 1 : 0;
}

int run_grid(const CommonArgs& args, const std::vector<std::string>& grid_specs) {
    sccaf::ExperimentConfig cfg = resolve_config(args);
    const auto out = prepare_out_dir(cfg);

    std::map<std::string, std::vector<double>> grid;
    if (grid_specs.empty()) {
        // default search space
        grid = {{"K", {4, 6, 10}},
                {"Kprime", {10, 20}},
                {"alpha", {0.2, 0.1, 0.07}},
                {"beta", {0.1, 0.05, 0.01}},
                {"eta", {0.1, 0.03}}};
    } else {
        for (const std::string& spec : grid_specs) {
            const auto eq = spec.find('=');
            if (eq == std::string::npos)
                throw sccaf::contract_error("grid spec must look like name=v1,v2: " + spec);
            grid[spec.substr(0, eq)] = parse_values(spec.substr(eq + 1));
        }
    }

    sccaf::TabularGraphDataset ds =
        sccaf::load_dataset(cfg.features_path, cfg.edges_path, cfg.meta);
    sccaf::GridOutcome outcome = sccaf::grid_search(ds, cfg, grid);

    std::ofstream table((out / "grid.csv").string());
    table << "alpha,beta,gamma,omega,eta,tau,K,Kprime,val_auc,test_auc,test_dsp\n";
    table.precision(17);
    for (const sccaf::GridPoint& p : outcome.table) {
        const auto agg = p.result.aggregate();
        const sccaf::LossWeights& w = p.config.weights;
        table << w.alpha << "," << w.beta << "," << w.gamma << "," << w.omega << "," << w.eta
              << "," << w.tau << "," << w.k << "," << w.k_prime << "," << agg.val_auc_mean << ","
              << agg.auc_mean << "," << agg.sp_mean << "\n";
    }

    const sccaf::GridPoint& best = outcome.table[outcome.best_index];
    write_standard_outputs(out, best.config, best.result);
    std::printf("grid points: %zu, best index: %zu\n", outcome.table.size(), outcome.best_index);
    print_summary(best.result);
    return best.result.failed ? 1 : 0;
}

int run_sweep(const CommonArgs& args, const std::string& parameter, const std::string& values) {
    sccaf::ExperimentConfig cfg = resolve_config(args);
    const auto out = prepare_out_dir(cfg);
    sccaf::TabularGraphDataset ds =
        sccaf::load_dataset(cfg.features_path, cfg.edges_path, cfg.meta);
    auto rows = sccaf::sweep(ds, cfg, parameter, parse_values(values));

    std::ofstream table((out / "sweep.csv").string());
    table << parameter << ",auc,auc_std,f1,delta_sp,delta_eo\n";
    table.precision(17);
    for (const sccaf::SweepRow& row : rows) {
        const auto agg = row.result.aggregate();
        table << row.value << "," << agg.auc_mean << "," << agg.auc_std << "," << agg.f1_mean
              << "," << agg.sp_mean << "," << agg.eo_mean << "\n";
    }
    write_standard_outputs(out, cfg, rows.back().result);
    std::printf("sweep over %s: %zu values written to sweep.csv\n", parameter.c_str(),
                rows.size());
    return 0;
}

int run_audit(const CommonArgs& args) {
    sccaf::ExperimentConfig cfg = resolve_config(args);
    if (!args.seed) cfg.split_seeds = {cfg.split_seeds.front()};
    const auto out = prepare_out_dir(cfg);

    sccaf::TabularGraphDataset raw =
        sccaf::load_dataset(cfg.features_path, cfg.edges_path, cfg.meta);
    sccaf::SplitAssignment split = sccaf::make_split(raw, cfg.train_ratio, cfg.val_ratio,
                                                     cfg.test_ratio, cfg.split_seeds.front());
    sccaf::TabularGraphDataset ds = sccaf::standardize_features(raw, split.train_idx);
    sccaf::PretrainedModel pre = sccaf::pretrain(ds, split, cfg);
    sccaf::TrainedModel model = sccaf::train(ds, split, pre, cfg);

    sccaf::RunResult result;
    result.splits = {model.run};
    write_standard_outputs(out, cfg, result);

    // per-group outcome table on the test split
    std::ofstream audit((out / "audit.csv").string());
    audit << "sensitive,label,prediction,count\n";
    for (int s = 0; s < 2; ++s)
        for (int y = 0; y < 2; ++y)
            for (int p = 0; p < 2; ++p)
                audit << s << "," << y << "," << p << ","
                      << model.run.test.group_counts[static_cast<std::size_t>(s)]
                                                    [static_cast<std::size_t>(y)]
                                                    [static_cast<std::size_t>(p)]
                      << "\n";

    // latent-space counterfactual structure for the audited checkpoint
    {
        sccaf::Tape tape;
        sccaf::ModelVars vars = sccaf::watch(tape, model.encoder, model.head);
        sccaf::LatentState state = sccaf::encode(ds.features, sccaf::sym_normalize(ds.graph), vars);
        std::vector<int> pool(static_cast<std::size_t>(ds.n()));
        for (int i = 0; i < ds.n(); ++i) pool[static_cast<std::size_t>(i)] = i;
        sccaf::CounterfactualIndex idx = sccaf::build_counterfactual_index(
            state.h, pre.pseudo_labels, ds.sensitive, cfg.weights.k, cfg.weights.k_prime, pool);
        std::ofstream cf((out / "counterfactuals.csv").string());
        sccaf::dump_counterfactual_csv(cf, state.h, idx);
    }

    std::printf("test  auc %.2f  f1 %.2f  dSP %.2f  dEO %.2f  (%s = %s)\n", model.run.test.auc,
                model.run.test.f1, model.run.test.delta_sp, model.run.test.delta_eo,
                "sensitive attribute", ds.sensitive_name.c_str());
    return model.run.failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fairness-aware graph neural network toolkit"};
    app.require_subcommand(1);

    CommonArgs args;
    std::vector<std::string> grid_specs;
    std::string sweep_param = "omega";
    std::string sweep_values = "0.001,0.01,0.1";

    CLI::App* train_cmd = app.add_subcommand("train", "train on a single seeded split");
    add_common_flags(train_cmd, args);
    CLI::App* exp_cmd = app.add_subcommand("experiment", "run every configured split seed");
    add_common_flags(exp_cmd, args);
    CLI::App* grid_cmd = app.add_subcommand("grid", "hyperparameter grid search");
    add_common_flags(grid_cmd, args);
    grid_cmd->add_option("--grid", grid_specs,
                         "search dimension as name=v1,v2 (repeatable; default: standard grids)");
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "one-dimensional weight sweep");
    add_common_flags(sweep_cmd, args);
    sweep_cmd->add_option("--param", sweep_param, "omega or eta");
    sweep_cmd->add_option("--values", sweep_values, "comma-separated weight values");
    CLI::App* audit_cmd = app.add_subcommand("audit", "fairness audit of one trained split");
    add_common_flags(audit_cmd, args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_cmd->parsed()) return run_train(args);
        if (exp_cmd->parsed()) return run_experiment_cmd(args);
        if (grid_cmd->parsed()) return run_grid(args, grid_specs);
        if (sweep_cmd->parsed()) return run_sweep(args, sweep_param, sweep_values);
        if (audit_cmd->parsed()) return run_audit(args);
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 1;
    }
    return 0;
}
