#pragma once

// Two-phase training (pretrain for pseudo-labels, then the full objective
// with counterfactual guidance), experiment orchestration over seeded splits,
// grid search, parameter sweeps, and CSV export.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "sccaf/common.hpp"
#include "sccaf/counterfactual.hpp"
#include "sccaf/dataset.hpp"
#include "sccaf/encoder.hpp"
#include "sccaf/graph.hpp"
#include "sccaf/losses.hpp"
#include "sccaf/metrics.hpp"
#include "sccaf/tensor.hpp"

namespace sccaf {

struct ExperimentConfig {
    std::string features_path, edges_path;
    DatasetMeta meta;
    std::string method = "sccaf";
    std::string out_dir = ".";

    double train_ratio = 0.5, val_ratio = 0.25, test_ratio = 0.25;
    std::vector<std::uint64_t> split_seeds = {0, 1, 2, 3, 4};

    LossWeights weights;
    int hidden = 16;
    int d_c = 8;

    double learning_rate = 0.01;  // fixed by the experimental protocol
    double weight_decay = 1e-5;
    int pretrain_epochs = 300;
    int train_epochs = 1000;
    int patience = 100;
    int cf_refresh_period = 1;
    int jobs = 1;

    void validate() const {
        if (learning_rate <= 0.0) throw contract_error("config: learning rate must be positive");
        if (pretrain_epochs < 1 || train_epochs < 1) throw contract_error("config: epochs must be >= 1");
        if (patience < 1) throw contract_error("config: patience must be >= 1");
        if (cf_refresh_period < 1) throw contract_error("config: cf refresh period must be >= 1");
        if (split_seeds.empty()) throw contract_error("config: at least one split seed required");
        weights.validate();
    }
};

struct SplitRun {
    std::uint64_t seed = 0;
    EvalReport test;
    EvalReport val;
    double best_val_auc = 0.0;
    int epochs_ran = 0;
    std::vector<LossReport> epoch_log;
    bool failed = false;
    std::string fail_reason;
};

struct RunResult {
    std::vector<SplitRun> splits;
    bool failed = false;
    std::string fail_reason;
    double wall_seconds = 0.0;
    std::string config_fingerprint;

    struct Aggregate {
        double auc_mean = 0, auc_std = 0;
        double f1_mean = 0, f1_std = 0;
        double sp_mean = 0, sp_std = 0;
        double eo_mean = 0, eo_std = 0;
        double val_auc_mean = 0;
        double val_sp_mean = 0;
    };

    Aggregate aggregate() const {
        Aggregate a;
        std::vector<const SplitRun*> ok;
        for (const SplitRun& r : splits)
            if (!r.failed) ok.push_back(&r);
        if (ok.empty()) return a;
        auto stats = [&](auto get, double& m, double& sd) {
            double acc = 0.0;
            for (auto* r : ok) acc += get(*r);
            m = acc / static_cast<double>(ok.size());
            double var = 0.0;
            for (auto* r : ok) {
                const double d = get(*r) - m;
                var += d * d;
            }
            sd = std::sqrt(var / static_cast<double>(ok.size()));
        };
        stats([](const SplitRun& r) { return r.test.auc; }, a.auc_mean, a.auc_std);
        stats([](const SplitRun& r) { return r.test.f1; }, a.f1_mean, a.f1_std);
        stats([](const SplitRun& r) { return r.test.delta_sp; }, a.sp_mean, a.sp_std);
        stats([](const SplitRun& r) { return r.test.delta_eo; }, a.eo_mean, a.eo_std);
        double dummy = 0.0;
        stats([](const SplitRun& r) { return r.val.auc; }, a.val_auc_mean, dummy);
        stats([](const SplitRun& r) { return r.val.delta_sp; }, a.val_sp_mean, dummy);
        return a;
    }
};

// ---------------------------------------------------------------------------
// Optimizer
// ---------------------------------------------------------------------------

// Adam with classic (coupled) L2 weight decay.
class Adam {
  public:
    Adam(double lr, double weight_decay) : lr_(lr), wd_(weight_decay) {}

    void step(std::vector<Param*> params, const std::vector<std::vector<double>>& grads) {
        if (slots_.empty()) {
            slots_.resize(params.size());
            for (std::size_t p = 0; p < params.size(); ++p) {
                slots_[p].m.assign(params[p]->size(), 0.0);
                slots_[p].v.assign(params[p]->size(), 0.0);
            }
        }
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, t_);
        const double bc2 = 1.0 - std::pow(beta2_, t_);
        for (std::size_t p = 0; p < params.size(); ++p) {
            auto& w = params[p]->v;
            auto& m = slots_[p].m;
            auto& v = slots_[p].v;
            const auto& g = grads[p];
            for (std::size_t i = 0; i < w.size(); ++i) {
                const double gi = g[i] + wd_ * w[i];
                m[i] = beta1_ * m[i] + (1.0 - beta1_) * gi;
                v[i] = beta2_ * v[i] + (1.0 - beta2_) * gi * gi;
                w[i] -= lr_ * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps_);
            }
        }
    }

  private:
    struct Slot {
        std::vector<double> m, v;
    };
    double lr_, wd_;
    double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
    long t_ = 0;
    std::vector<Slot> slots_;
};

namespace detail {

inline std::vector<Param*> param_ptrs(EncoderParams& enc, HeadParams& head) {
    return {&enc.w1, &enc.b1, &enc.w2, &enc.b2, &head.wy, &head.by};
}

inline std::vector<std::vector<double>> read_grads(const ModelVars& vars) {
    std::vector<std::vector<double>> g;
    for (const Tensor& t : vars.all()) g.push_back(t.grad());
    return g;
}

inline void check_finite(double loss, const char* phase, int epoch) {
    if (!std::isfinite(loss))
        throw error(std::string("training diverged: non-finite ") + phase + " loss at epoch " +
                    std::to_string(epoch));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Pretraining phase
// ---------------------------------------------------------------------------

struct PretrainedModel {
    EncoderParams encoder;
    HeadParams head;
    std::vector<int> pseudo_labels;
    std::vector<LossReport> epoch_log;
};

inline PretrainedModel pretrain(const TabularGraphDataset& ds, const SplitAssignment& split,
                                const ExperimentConfig& cfg) {
    cfg.validate();
    const Tensor a_hat = sym_normalize(ds.graph);
    auto [enc, head] = init_params(ds.d(), cfg.hidden, cfg.d_c, split.seed);
    Adam opt(cfg.learning_rate, cfg.weight_decay);
    const LossWeights& w = cfg.weights;
    const std::vector<int> all_nodes = [&] {
        std::vector<int> v(static_cast<std::size_t>(ds.n()));
        for (int i = 0; i < ds.n(); ++i) v[static_cast<std::size_t>(i)] = i;
        return v;
    }();

    PretrainedModel model;
    std::vector<std::vector<int>> env_nb;
    for (int epoch = 0; epoch < cfg.pretrain_epochs; ++epoch) {
        Tape tape;
        ModelVars vars = watch(tape, enc, head);
        LatentState state = encode(ds.features, a_hat, vars);
        Tensor logits = predict(state.c, vars);

        LossReport rep;
        Tensor pred = prediction_loss(logits, ds.labels, split.train_idx);
        Tensor sc = Tensor::frozen(1, 1, {0.0});
        Tensor env = Tensor::frozen(1, 1, {0.0});
        if (w.omega > 0.0 && split.train_idx.size() >= 2) {
            ScLossResult r = supervised_contrastive_loss(state.c, ds.labels, w.tau, split.train_idx);
            sc = r.value;
            rep.skipped_sc_anchors = r.skipped_anchors;
        }
        if (w.eta > 0.0) {
            if (epoch % cfg.cf_refresh_period == 0 || env_nb.empty())
                env_nb = find_env_neighbors(state.h, ds.sensitive, w.k_prime, all_nodes);
            env = environmental_loss(state.e, env_nb, w.dis_kind, &rep.skipped_env_nb);
        }
        Tensor total = pretrain_objective(pred, sc, env, w.omega, w.eta);
        detail::check_finite(total.item(), "pretrain", epoch);
        rep.pred = pred.item();
        rep.sc = sc.item();
        rep.env = env.item();
        rep.total = total.item();
        model.epoch_log.push_back(rep);

        tape.backward(total);
        opt.step(detail::param_ptrs(enc, head), detail::read_grads(vars));
    }

    // final pseudo-label assignment from the pretrained head
    Tape tape;
    ModelVars vars = watch(tape, enc, head);
    LatentState state = encode(ds.features, a_hat, vars);
    Tensor logits = predict(state.c, vars);
    model.pseudo_labels = assign_pseudo_labels(logits, ds.labels, split.train_idx);
    model.encoder = std::move(enc);
    model.head = std::move(head);
    return model;
}

// ---------------------------------------------------------------------------
// Training phase
// ---------------------------------------------------------------------------

struct TrainedModel {
    EncoderParams encoder;
    HeadParams head;
    SplitRun run;
};

namespace detail {

struct EvalSnapshot {
    std::vector<double> scores;
    std::vector<int> y_hat;
};

inline EvalSnapshot forward_eval(const TabularGraphDataset& ds, const Tensor& a_hat,
                                 const EncoderParams& enc, const HeadParams& head) {
    Tape tape;
    ModelVars vars = watch(tape, enc, head);
    LatentState state = encode(ds.features, a_hat, vars);
    Tensor logits = predict(state.c, vars);
    EvalSnapshot snap;
    snap.scores = positive_probabilities(logits);
    snap.y_hat = argmax_rows(logits);
    return snap;
}

}  // namespace detail

inline TrainedModel train(const TabularGraphDataset& ds, const SplitAssignment& split,
                          const PretrainedModel& pretrained, const ExperimentConfig& cfg) {
    cfg.validate();
    const Tensor a_hat = sym_normalize(ds.graph);
    EncoderParams enc = pretrained.encoder;
    HeadParams head = pretrained.head;
    Adam opt(cfg.learning_rate, cfg.weight_decay);
    const LossWeights& w = cfg.weights;
    const std::vector<int>& y_hat = pretrained.pseudo_labels;
    const std::vector<int> all_nodes = [&] {
        std::vector<int> v(static_cast<std::size_t>(ds.n()));
        for (int i = 0; i < ds.n(); ++i) v[static_cast<std::size_t>(i)] = i;
        return v;
    }();

    TrainedModel best;
    best.encoder = enc;
    best.head = head;
    SplitRun& run = best.run;
    run.seed = split.seed;
    run.best_val_auc = -1.0;
    int since_best = 0;

    CounterfactualIndex cf;
    bool cf_valid = false;
    for (int epoch = 0; epoch < cfg.train_epochs; ++epoch) {
        Tape tape;
        ModelVars vars = watch(tape, enc, head);
        LatentState state = encode(ds.features, a_hat, vars);
        Tensor logits = predict(state.c, vars);

        // validation tracking on the pre-update parameters
        {
            std::vector<double> scores = positive_probabilities(logits);
            std::vector<int> hard = argmax_rows(logits);
            const double val_auc = auc(scores, ds.labels, split.val_idx);
            if (val_auc > run.best_val_auc) {
                run.best_val_auc = val_auc;
                run.val = evaluate(scores, hard, ds.labels, ds.sensitive, split.val_idx);
                best.encoder = enc;
                best.head = head;
                since_best = 0;
            } else if (++since_best >= cfg.patience) {
                break;
            }
        }

        LossReport rep;
        if ((w.alpha > 0.0 || w.eta > 0.0) &&
            (!cf_valid || epoch % cfg.cf_refresh_period == 0)) {
            cf = build_counterfactual_index(state.h, y_hat, ds.sensitive, w.k, w.k_prime,
                                            all_nodes);
            cf_valid = true;
        }

        Tensor pred = prediction_loss(logits, ds.labels, split.train_idx);
        Tensor inv = Tensor::frozen(1, 1, {0.0});
        Tensor suf = Tensor::frozen(1, 1, {0.0});
        Tensor sc = Tensor::frozen(1, 1, {0.0});
        Tensor env = Tensor::frozen(1, 1, {0.0});
        if (w.alpha > 0.0) {
            inv = invariance_loss(state.c, state.e, cf.env_cf, cf.content_cf, w.gamma, w.dis_kind);
            rep.skipped_env_cf = cf.empty_env;
            rep.skipped_content_cf = cf.empty_content;
        }
        if (w.beta > 0.0 && !ds.graph.edges().empty()) {
            const std::vector<Edge> negatives = sample_negative_edges(
                ds.graph,
                std::min(ds.graph.edges().size(), ds.graph.non_edge_count()),
                split.seed * 1000003ULL + static_cast<std::uint64_t>(epoch));
            suf = sufficiency_loss(state.h, ds.graph.edges(), negatives);
        }
        if (w.omega > 0.0 && ds.n() >= 2) {
            ScLossResult r = supervised_contrastive_loss(state.c, y_hat, w.tau, all_nodes);
            sc = r.value;
            rep.skipped_sc_anchors = r.skipped_anchors;
        }
        if (w.eta > 0.0) {
            env = environmental_loss(state.e, cf.env_neighbors, w.dis_kind, &rep.skipped_env_nb);
        }
        Tensor total = train_objective(pred, inv, suf, sc, env, w);
        detail::check_finite(total.item(), "train", epoch);
        rep.pred = pred.item();
        rep.inv = inv.item();
        rep.suf = suf.item();
        rep.sc = sc.item();
        rep.env = env.item();
        rep.total = total.item();
        run.epoch_log.push_back(rep);
        ++run.epochs_ran;

        tape.backward(total);
        opt.step(detail::param_ptrs(enc, head), detail::read_grads(vars));
    }

    // evaluate the best checkpoint on the test split
    detail::EvalSnapshot snap = detail::forward_eval(ds, a_hat, best.encoder, best.head);
    run.test = evaluate(snap.scores, snap.y_hat, ds.labels, ds.sensitive, split.test_idx);
    return best;
}

// ---------------------------------------------------------------------------
// Experiment orchestration
// ---------------------------------------------------------------------------

namespace detail {

inline std::string config_lock_text(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out.precision(17);
    out << "data.features = " << cfg.features_path << "\n";
    out << "data.edges = " << cfg.edges_path << "\n";
    out << "data.name = " << cfg.meta.name << "\n";
    out << "data.label_column = " << cfg.meta.label_column << "\n";
    out << "data.sensitive_column = " << cfg.meta.sensitive_column << "\n";
    out << "data.sensitive_name = " << cfg.meta.sensitive_name << "\n";
    if (cfg.meta.sensitive_threshold)
        out << "data.sensitive_threshold = " << *cfg.meta.sensitive_threshold << "\n";
    out << "run.method = " << cfg.method << "\n";
    out << "run.out_dir = " << cfg.out_dir << "\n";
    out << "run.jobs = " << cfg.jobs << "\n";
    out << "split.train = " << cfg.train_ratio << "\n";
    out << "split.val = " << cfg.val_ratio << "\n";
    out << "split.test = " << cfg.test_ratio << "\n";
    out << "split.seeds = ";
    for (std::size_t i = 0; i < cfg.split_seeds.size(); ++i)
        out << cfg.split_seeds[i] << (i + 1 == cfg.split_seeds.size() ? "" : ",");
    out << "\n";
    out << "loss.alpha = " << cfg.weights.alpha << "\n";
    out << "loss.beta = " << cfg.weights.beta << "\n";
    out << "loss.gamma = " << cfg.weights.gamma << "\n";
    out << "loss.omega = " << cfg.weights.omega << "\n";
    out << "loss.eta = " << cfg.weights.eta << "\n";
    out << "loss.tau = " << cfg.weights.tau << "\n";
    out << "loss.K = " << cfg.weights.k << "\n";
    out << "loss.Kprime = " << cfg.weights.k_prime << "\n";
    out << "loss.dis = " << (cfg.weights.dis_kind == DisKind::cosine ? "cosine" : "l2") << "\n";
    out << "model.hidden = " << cfg.hidden << "\n";
    out << "model.d_c = " << cfg.d_c << "\n";
    out << "opt.learning_rate = " << cfg.learning_rate << "\n";
    out << "opt.weight_decay = " << cfg.weight_decay << "\n";
    out << "train.pretrain_epochs = " << cfg.pretrain_epochs << "\n";
    out << "train.epochs = " << cfg.train_epochs << "\n";
    out << "train.patience = " << cfg.patience << "\n";
    out << "train.cf_refresh_period = " << cfg.cf_refresh_period << "\n";
    return out.str();
}

inline std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream out;
    out << std::hex << h;
    return out.str();
}

}  // namespace detail

inline RunResult run_experiment(const TabularGraphDataset& raw_ds, const ExperimentConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    RunResult result;
    result.config_fingerprint = detail::fnv1a_hex(detail::config_lock_text(cfg));
    const std::vector<SplitAssignment> splits =
        make_splits(raw_ds, cfg.train_ratio, cfg.val_ratio, cfg.test_ratio, cfg.split_seeds);
    result.splits.resize(splits.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= splits.size()) return;
            SplitRun& slot = result.splits[i];
            try {
                TabularGraphDataset ds = standardize_features(raw_ds, splits[i].train_idx);
                PretrainedModel pre = pretrain(ds, splits[i], cfg);
                TrainedModel model = train(ds, splits[i], pre, cfg);
                slot = std::move(model.run);
            } catch (const std::exception& ex) {
                slot.seed = splits[i].seed;
                slot.failed = true;
                slot.fail_reason = ex.what();
            }
        }
    };
    const int jobs = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(splits.size())));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    for (const SplitRun& r : result.splits)
        if (r.failed) {
            result.failed = true;
            result.fail_reason = r.fail_reason;
        }
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

inline RunResult run_experiment(const ExperimentConfig& cfg) {
    TabularGraphDataset ds = load_dataset(cfg.features_path, cfg.edges_path, cfg.meta);
    return run_experiment(ds, cfg);
}

// ---------------------------------------------------------------------------
// Grid search and sweeps
// ---------------------------------------------------------------------------

struct GridPoint {
    ExperimentConfig config;
    RunResult result;
};

struct GridOutcome {
    std::vector<GridPoint> table;
    std::size_t best_index = 0;
};

// Cartesian product over per-hyperparameter candidate lists. Selection by
// highest mean validation AUC, ties broken by lower validation parity gap,
// then by enumeration-independent config ordering.
inline GridOutcome grid_search(const TabularGraphDataset& ds, const ExperimentConfig& base,
                               const std::map<std::string, std::vector<double>>& grid) {
    if (grid.empty()) throw contract_error("grid_search: empty grid");
    for (const auto& [key, values] : grid)
        if (values.empty()) throw contract_error("grid_search: empty candidate list for " + key);

    std::vector<ExperimentConfig> configs{base};
    for (const auto& [key, values] : grid) {
        std::vector<ExperimentConfig> expanded;
        for (const ExperimentConfig& c : configs)
            for (double v : values) {
                ExperimentConfig nc = c;
                if (key == "alpha") nc.weights.alpha = v;
                else if (key == "beta") nc.weights.beta = v;
                else if (key == "gamma") nc.weights.gamma = v;
                else if (key == "omega") nc.weights.omega = v;
                else if (key == "eta") nc.weights.eta = v;
                else if (key == "tau") nc.weights.tau = v;
                else if (key == "K") nc.weights.k = static_cast<int>(v);
                else if (key == "Kprime") nc.weights.k_prime = static_cast<int>(v);
                else throw contract_error("grid_search: unknown parameter '" + key + "'");
                expanded.push_back(std::move(nc));
            }
        configs = std::move(expanded);
    }

    GridOutcome outcome;
    for (const ExperimentConfig& c : configs) {
        GridPoint point;
        point.config = c;
        point.result = run_experiment(ds, c);
        outcome.table.push_back(std::move(point));
    }
    double best_auc = -1.0, best_sp = 1e18;
    std::string best_fp;
    for (std::size_t i = 0; i < outcome.table.size(); ++i) {
        if (outcome.table[i].result.failed) continue;
        const auto agg = outcome.table[i].result.aggregate();
        const std::string& fp = outcome.table[i].result.config_fingerprint;
        const bool better = agg.val_auc_mean > best_auc ||
                            (agg.val_auc_mean == best_auc && agg.val_sp_mean < best_sp) ||
                            (agg.val_auc_mean == best_auc && agg.val_sp_mean == best_sp &&
                             fp < best_fp);
        if (better) {
            best_auc = agg.val_auc_mean;
            best_sp = agg.val_sp_mean;
            best_fp = fp;
            outcome.best_index = i;
        }
    }
    return outcome;
}

struct SweepRow {
    double value = 0.0;
    RunResult result;
};

// One run_experiment per value of omega or eta, others held fixed.
inline std::vector<SweepRow> sweep(const TabularGraphDataset& ds, const ExperimentConfig& base,
                                   const std::string& parameter, std::vector<double> values) {
    if (values.empty()) throw contract_error("sweep: empty value list");
    if (parameter != "omega" && parameter != "eta")
        throw contract_error("sweep: parameter must be omega or eta");
    std::sort(values.begin(), values.end());
    std::vector<SweepRow> rows;
    for (double v : values) {
        ExperimentConfig c = base;
        (parameter == "omega" ? c.weights.omega : c.weights.eta) = v;
        SweepRow row;
        row.value = v;
        row.result = run_experiment(ds, c);
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// CSV export
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

}  // namespace detail

inline void write_results_csv(const std::string& path, const std::string& dataset,
                              const std::string& method, const RunResult& result) {
    std::ofstream out(path);
    if (!out) throw contract_error("write_results_csv: cannot write " + path);
    out << "dataset,method,split_seed,auc,f1,delta_sp,delta_eo\n";
    for (const SplitRun& r : result.splits) {
        if (r.failed) {
            out << dataset << "," << method << "," << r.seed << ",failed,failed,failed,failed\n";
            continue;
        }
        out << dataset << "," << method << "," << r.seed << "," << detail::fmt(r.test.auc) << ","
            << detail::fmt(r.test.f1) << "," << detail::fmt(r.test.delta_sp) << ","
            << detail::fmt(r.test.delta_eo) << "\n";
    }
    const auto agg = result.aggregate();
    out << dataset << "," << method << ",aggregate," << detail::fmt(agg.auc_mean) << "±"
        << detail::fmt(agg.auc_std) << "," << detail::fmt(agg.f1_mean) << "±"
        << detail::fmt(agg.f1_std) << "," << detail::fmt(agg.sp_mean) << "±"
        << detail::fmt(agg.sp_std) << "," << detail::fmt(agg.eo_mean) << "±"
        << detail::fmt(agg.eo_std) << "\n";
}

inline void write_epochs_csv(const std::string& path, const RunResult& result) {
    std::ofstream out(path);
    if (!out) throw contract_error("write_epochs_csv: cannot write " + path);
    out << "split_seed,epoch,pred,inv,suf,sc,env,total\n";
    for (const SplitRun& r : result.splits) {
        for (std::size_t e = 0; e < r.epoch_log.size(); ++e) {
            const LossReport& l = r.epoch_log[e];
            out << r.seed << "," << e << "," << detail::fmt(l.pred) << "," << detail::fmt(l.inv)
                << "," << detail::fmt(l.suf) << "," << detail::fmt(l.sc) << ","
                << detail::fmt(l.env) << "," << detail::fmt(l.total) << "\n";
        }
    }
}

inline void write_config_lock(const std::string& path, const ExperimentConfig& cfg) {
    std::ofstream out(path);
    if (!out) throw contract_error("write_config_lock: cannot write " + path);
    out << detail::config_lock_text(cfg);
}

// ---------------------------------------------------------------------------
// Flat key = value config files; later keys win, CLI overrides come after.
// ---------------------------------------------------------------------------

inline std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw contract_error("parse_config_file: cannot open " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!key.empty()) kv[key] = value;
    }
    return kv;
}

inline void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                               const std::string& value) {
    auto as_double = [&] { return std::stod(value); };
    auto as_int = [&] { return std::stoi(value); };
    if (key == "data.features") cfg.features_path = value;
    else if (key == "data.edges") cfg.edges_path = value;
    else if (key == "data.name") cfg.meta.name = value;
    else if (key == "data.label_column") cfg.meta.label_column = value;
    else if (key == "data.sensitive_column") cfg.meta.sensitive_column = value;
    else if (key == "data.sensitive_name") cfg.meta.sensitive_name = value;
    else if (key == "data.sensitive_threshold") cfg.meta.sensitive_threshold = as_double();
    else if (key == "run.method") cfg.method = value;
    else if (key == "run.out_dir") cfg.out_dir = value;
    else if (key == "run.jobs") cfg.jobs = as_int();
    else if (key == "split.train") cfg.train_ratio = as_double();
    else if (key == "split.val") cfg.val_ratio = as_double();
    else if (key == "split.test") cfg.test_ratio = as_double();
    else if (key == "split.seeds") {
        cfg.split_seeds.clear();
        std::stringstream ss(value);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) cfg.split_seeds.push_back(std::stoull(tok));
    } else if (key == "loss.alpha") cfg.weights.alpha = as_double();
    else if (key == "loss.beta") cfg.weights.beta = as_double();
    else if (key == "loss.gamma") cfg.weights.gamma = as_double();
    else if (key == "loss.omega") cfg.weights.omega = as_double();
    else if (key == "loss.eta") cfg.weights.eta = as_double();
    else if (key == "loss.tau") cfg.weights.tau = as_double();
    else if (key == "loss.K") cfg.weights.k = as_int();
    else if (key == "loss.Kprime") cfg.weights.k_prime = as_int();
    else if (key == "loss.dis") cfg.weights.dis_kind = dis_kind_from_string(value);
    else if (key == "model.hidden") cfg.hidden = as_int();
    else if (key == "model.d_c") cfg.d_c = as_int();
    else if (key == "opt.learning_rate") cfg.learning_rate = as_double();
    else if (key == "opt.weight_decay") cfg.weight_decay = as_double();
    else if (key == "train.pretrain_epochs") cfg.pretrain_epochs = as_int();
    else if (key == "train.epochs") cfg.train_epochs = as_int();
    else if (key == "train.patience") cfg.patience = as_int();
    else if (key == "train.cf_refresh_period") cfg.cf_refresh_period = as_int();
    else throw contract_error("unknown config key '" + key + "'");
}

inline ExperimentConfig load_config(const std::string& path) {
    ExperimentConfig cfg;
    for (const auto& [k, v] : parse_config_file(path)) apply_config_entry(cfg, k, v);
    return cfg;
}

}  // namespace sccaf
