#pragma once

// Two-layer GCN encoder producing the partitioned latent H = [C | E], and a
// linear prediction head that reads C only.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "sccaf/common.hpp"
#include "sccaf/tensor.hpp"

namespace sccaf {

// Plain parameter matrix living outside any tape; training copies it onto a
// fresh tape each step and reads the gradient back out.
struct Param {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    static Param zeros(int r, int c) {
        return Param{r, c, std::vector<double>(static_cast<std::size_t>(r) * c, 0.0)};
    }
    std::size_t size() const { return v.size(); }
};

struct EncoderParams {
    Param w1, b1, w2, b2;
    int hidden = 16;
    int d_c = 8;
    int d_e = 8;
};

struct HeadParams {
    Param wy, by;
};

namespace detail {

inline Param glorot(int rows, int cols, std::mt19937_64& rng) {
    const double bound = std::sqrt(6.0 / (rows + cols));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Param p = Param::zeros(rows, cols);
    for (double& x : p.v) x = dist(rng);
    return p;
}

}  // namespace detail

inline std::pair<EncoderParams, HeadParams> init_params(int d, int hidden, int d_c,
                                                        std::uint64_t seed) {
    if (d < 1 || hidden < 1 || d_c < 1) throw contract_error("init_params: dimensions must be >= 1");
    std::mt19937_64 rng(seed);
    EncoderParams enc;
    enc.hidden = hidden;
    enc.d_c = d_c;
    enc.d_e = d_c;  // partition widths are equal
    enc.w1 = detail::glorot(d, hidden, rng);
    enc.b1 = Param::zeros(1, hidden);
    enc.w2 = detail::glorot(hidden, 2 * d_c, rng);
    enc.b2 = Param::zeros(1, 2 * d_c);
    HeadParams head;
    head.wy = detail::glorot(d_c, 2, rng);
    head.by = Param::zeros(1, 2);
    return {std::move(enc), std::move(head)};
}

// Tape-resident copies of the model parameters for one forward/backward pass.
struct ModelVars {
    Tensor w1, b1, w2, b2, wy, by;
    int d_c = 0;

    std::vector<Tensor> all() const { return {w1, b1, w2, b2, wy, by}; }
};

inline ModelVars watch(Tape& tape, const EncoderParams& enc, const HeadParams& head) {
    ModelVars v;
    v.w1 = tape.leaf(enc.w1.rows, enc.w1.cols, enc.w1.v);
    v.b1 = tape.leaf(enc.b1.rows, enc.b1.cols, enc.b1.v);
    v.w2 = tape.leaf(enc.w2.rows, enc.w2.cols, enc.w2.v);
    v.b2 = tape.leaf(enc.b2.rows, enc.b2.cols, enc.b2.v);
    v.wy = tape.leaf(head.wy.rows, head.wy.cols, head.wy.v);
    v.by = tape.leaf(head.by.rows, head.by.cols, head.by.v);
    v.d_c = enc.d_c;
    return v;
}

struct LatentState {
    Tensor h;  // n x (d_c + d_e)
    Tensor c;  // first d_c columns
    Tensor e;  // last d_e columns
    std::vector<int> pseudo_labels;  // filled after pretraining
};

// H = A^ relu(A^ X W1 + b1) W2 + b2, split at column d_c.
inline LatentState encode(const Tensor& x, const Tensor& a_hat, const ModelVars& vars) {
    if (x.rows() != a_hat.rows() || a_hat.rows() != a_hat.cols())
        throw shape_error("encode: X and A^ row counts disagree");
    Tensor z1 = relu(add_row_bias(matmul(a_hat, matmul(x, vars.w1)), vars.b1));
    Tensor h = add_row_bias(matmul(a_hat, matmul(z1, vars.w2)), vars.b2);
    LatentState state;
    state.h = h;
    state.c = slice_cols(h, 0, vars.d_c);
    state.e = slice_cols(h, vars.d_c, h.cols());
    return state;
}

// logits = C Wy + by. The head never sees E.
inline Tensor predict(const Tensor& c, const ModelVars& vars) {
    if (c.cols() != vars.wy.rows()) throw shape_error("predict: C width does not match head");
    return add_row_bias(matmul(c, vars.wy), vars.by);
}

inline std::vector<int> argmax_rows(const Tensor& logits) {
    std::vector<int> out(static_cast<std::size_t>(logits.rows()));
    for (int i = 0; i < logits.rows(); ++i) {
        int best = 0;
        for (int j = 1; j < logits.cols(); ++j)
            if (logits.at(i, j) > logits.at(i, best)) best = j;
        out[static_cast<std::size_t>(i)] = best;
    }
    return out;
}

// Positive-class probabilities from 2-class logits.
inline std::vector<double> positive_probabilities(const Tensor& logits) {
    std::vector<double> probs = softmax_rows_values(logits);
    std::vector<double> pos(static_cast<std::size_t>(logits.rows()));
    for (int i = 0; i < logits.rows(); ++i) pos[static_cast<std::size_t>(i)] = probs[static_cast<std::size_t>(i) * 2 + 1];
    return pos;
}

// ---------------------------------------------------------------------------
// Checkpoint IO: named matrices, shape header, full precision, lossless.
// ---------------------------------------------------------------------------

inline void save_checkpoint(const std::string& path, const EncoderParams& enc,
                            const HeadParams& head) {
    std::ofstream out(path);
    if (!out) throw contract_error("save_checkpoint: cannot write " + path);
    out.precision(17);  // round-trips IEEE754 doubles exactly
    auto dump = [&out](const std::string& name, const Param& p) {
        out << name << " " << p.rows << " " << p.cols << "\n";
        for (std::size_t i = 0; i < p.v.size(); ++i)
            out << p.v[i] << (i + 1 == p.v.size() ? "\n" : " ");
    };
    out << "sccaf-checkpoint v1 hidden " << enc.hidden << " d_c " << enc.d_c << "\n";
    dump("w1", enc.w1);
    dump("b1", enc.b1);
    dump("w2", enc.w2);
    dump("b2", enc.b2);
    dump("wy", head.wy);
    dump("by", head.by);
}

inline std::pair<EncoderParams, HeadParams> load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw contract_error("load_checkpoint: cannot open " + path);
    std::string magic, version, khidden, kdc;
    int hidden = 0, d_c = 0;
    in >> magic >> version >> khidden >> hidden >> kdc >> d_c;
    if (magic != "sccaf-checkpoint" || version != "v1")
        throw contract_error("load_checkpoint: unrecognized header in " + path);
    std::map<std::string, Param> mats;
    std::string name;
    while (in >> name) {
        Param p;
        in >> p.rows >> p.cols;
        p.v.resize(static_cast<std::size_t>(p.rows) * p.cols);
        for (double& x : p.v)
            if (!(in >> x)) throw contract_error("load_checkpoint: truncated matrix " + name);
        mats[name] = std::move(p);
    }
    for (const char* required : {"w1", "b1", "w2", "b2", "wy", "by"})
        if (!mats.count(required))
            throw contract_error(std::string("load_checkpoint: missing matrix ") + required);
    EncoderParams enc;
    enc.hidden = hidden;
    enc.d_c = d_c;
    enc.d_e = d_c;
    enc.w1 = mats["w1"];
    enc.b1 = mats["b1"];
    enc.w2 = mats["w2"];
    enc.b2 = mats["b2"];
    HeadParams head;
    head.wy = mats["wy"];
    head.by = mats["by"];
    return {std::move(enc), std::move(head)};
}

}  // namespace sccaf
