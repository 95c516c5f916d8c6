#pragma once

// Dense row-major matrices with reverse-mode automatic differentiation.
// A Tape records every differentiable operation in forward order; backward()
// replays the records in reverse, accumulating gradients additively into
// every requires_grad leaf. 64-bit floats throughout. No broadcasting beyond
// scalars and an explicit row-bias op.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "sccaf/common.hpp"

namespace sccaf {

class Tape;

namespace detail {

struct TensorData {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;
    std::vector<double> g;  // allocated iff requires_grad
    bool requires_grad = false;
    Tape* tape = nullptr;

    std::size_t size() const { return v.size(); }
};

}  // namespace detail

// Value-semantic handle onto shared tensor storage.
class Tensor {
  public:
    Tensor() = default;
    explicit Tensor(std::shared_ptr<detail::TensorData> d) : d_(std::move(d)) {}

    // Frozen tensor: no tape, no gradient, immutable by convention.
    static Tensor frozen(int rows, int cols, std::vector<double> values) {
        check_extent(rows, cols, values.size());
        auto d = std::make_shared<detail::TensorData>();
        d->rows = rows;
        d->cols = cols;
        d->v = std::move(values);
        return Tensor(std::move(d));
    }

    static Tensor zeros(int rows, int cols) {
        return frozen(rows, cols, std::vector<double>(static_cast<std::size_t>(rows) * cols, 0.0));
    }

    bool valid() const { return d_ != nullptr; }
    int rows() const { return d_->rows; }
    int cols() const { return d_->cols; }
    std::size_t size() const { return d_->v.size(); }
    bool requires_grad() const { return d_->requires_grad; }
    Tape* tape() const { return d_->tape; }

    const std::vector<double>& values() const { return d_->v; }
    std::vector<double>& mutable_values() { return d_->v; }
    const std::vector<double>& grad() const { return d_->g; }

    double at(int i, int j) const { return d_->v[static_cast<std::size_t>(i) * d_->cols + j]; }
    double grad_at(int i, int j) const { return d_->g[static_cast<std::size_t>(i) * d_->cols + j]; }

    // Scalar extraction for 1x1 tensors.
    double item() const {
        if (rows() != 1 || cols() != 1) throw contract_error("item(): tensor is not 1x1");
        return d_->v[0];
    }

    std::shared_ptr<detail::TensorData> data() const { return d_; }

  private:
    static void check_extent(int rows, int cols, std::size_t n) {
        if (rows < 0 || cols < 0 || n != static_cast<std::size_t>(rows) * cols)
            throw shape_error("tensor extent does not match value count");
    }

    std::shared_ptr<detail::TensorData> d_;
};

// Records the forward pass of one training-step computation. Single-threaded;
// distinct tapes are independent.
class Tape {
  public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // Differentiable leaf owned by this tape.
    Tensor leaf(int rows, int cols, std::vector<double> values) {
        Tensor t = Tensor::frozen(rows, cols, std::move(values));
        t.data()->requires_grad = true;
        t.data()->tape = this;
        t.data()->g.assign(t.size(), 0.0);
        return t;
    }

    void record(std::function<void()> backward_rule) { ops_.push_back(std::move(backward_rule)); }

    // Reverse sweep from a 1x1 output. Gradients accumulate additively, so a
    // tensor used in several branches collects every contribution.
    void backward(const Tensor& output) {
        if (output.rows() != 1 || output.cols() != 1)
            throw contract_error("backward(): output must be a 1x1 scalar");
        if (output.tape() != this)
            throw contract_error("backward(): output was not recorded on this tape");
        if (output.requires_grad()) output.data()->g[0] += 1.0;
        for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
    }

    std::size_t op_count() const { return ops_.size(); }

  private:
    std::vector<std::function<void()>> ops_;
};

namespace detail {

inline Tape* result_tape(std::initializer_list<const Tensor*> inputs) {
    Tape* tape = nullptr;
    for (const Tensor* t : inputs) {
        if (!t->requires_grad()) continue;
        if (tape != nullptr && t->tape() != tape)
            throw contract_error("operands belong to different tapes");
        tape = t->tape();
    }
    return tape;
}

inline Tensor make_result(Tape* tape, int rows, int cols) {
    auto d = std::make_shared<TensorData>();
    d->rows = rows;
    d->cols = cols;
    d->v.assign(static_cast<std::size_t>(rows) * cols, 0.0);
    if (tape != nullptr) {
        d->requires_grad = true;
        d->tape = tape;
        d->g.assign(d->v.size(), 0.0);
    }
    return Tensor(std::move(d));
}

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw shape_error(std::string(op) + ": operand shapes differ");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Linear algebra
// ---------------------------------------------------------------------------

inline Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows()) throw shape_error("matmul: inner dimensions differ");
    const int m = a.rows(), k = a.cols(), n = b.cols();
    Tape* tape = detail::result_tape({&a, &b});
    Tensor out = detail::make_result(tape, m, n);
    const double* av = a.values().data();
    const double* bv = b.values().data();
    double* ov = out.mutable_values().data();
    for (int i = 0; i < m; ++i)
        for (int p = 0; p < k; ++p) {
            const double aip = av[static_cast<std::size_t>(i) * k + p];
            if (aip == 0.0) continue;
            const double* brow = bv + static_cast<std::size_t>(p) * n;
            double* orow = ov + static_cast<std::size_t>(i) * n;
            for (int j = 0; j < n; ++j) orow[j] += aip * brow[j];
        }
    if (tape != nullptr) {
        auto ad = a.data(), bd = b.data(), od = out.data();
        tape->record([ad, bd, od, m, k, n] {
            const double* g = od->g.data();
            if (ad->requires_grad) {
                // a.grad += g * b^T
                double* ag = ad->g.data();
                const double* bv2 = bd->v.data();
                for (int i = 0; i < m; ++i)
                    for (int p = 0; p < k; ++p) {
                        double acc = 0.0;
                        const double* grow = g + static_cast<std::size_t>(i) * n;
                        const double* brow = bv2 + static_cast<std::size_t>(p) * n;
                        for (int j = 0; j < n; ++j) acc += grow[j] * brow[j];
                        ag[static_cast<std::size_t>(i) * k + p] += acc;
                    }
            }
            if (bd->requires_grad) {
                // b.grad += a^T * g
                double* bg = bd->g.data();
                const double* av2 = ad->v.data();
                for (int i = 0; i < m; ++i)
                    for (int p = 0; p < k; ++p) {
                        const double aip = av2[static_cast<std::size_t>(i) * k + p];
                        if (aip == 0.0) continue;
                        const double* grow = g + static_cast<std::size_t>(i) * n;
                        double* brow = bg + static_cast<std::size_t>(p) * n;
                        for (int j = 0; j < n; ++j) brow[j] += aip * grow[j];
                    }
            }
        });
    }
    return out;
}

inline Tensor transpose(const Tensor& a) {
    const int m = a.rows(), n = a.cols();
    Tape* tape = detail::result_tape({&a});
    Tensor out = detail::make_result(tape, n, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
            out.mutable_values()[static_cast<std::size_t>(j) * m + i] = a.at(i, j);
    if (tape != nullptr) {
        auto ad = a.data(), od = out.data();
        tape->record([ad, od, m, n] {
            if (!ad->requires_grad) return;
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < n; ++j)
                    ad->g[static_cast<std::size_t>(i) * n + j] +=
                        od->g[static_cast<std::size_t>(j) * m + i];
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// Elementwise ops
// ---------------------------------------------------------------------------

namespace detail {

// Shared skeleton for unary elementwise ops: fwd(x) -> y, dydx(x, y).
template <class Fwd, class Dydx>
Tensor unary_op(const Tensor& a, Fwd fwd, Dydx dydx) {
    Tape* tape = result_tape({&a});
    Tensor out = make_result(tape, a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out.mutable_values()[i] = fwd(a.values()[i]);
    if (tape != nullptr) {
        auto ad = a.data(), od = out.data();
        tape->record([ad, od, dydx] {
            if (!ad->requires_grad) return;
            for (std::size_t i = 0; i < ad->v.size(); ++i)
                ad->g[i] += od->g[i] * dydx(ad->v[i], od->v[i]);
        });
    }
    return out;
}

}  // namespace detail

inline Tensor add(const Tensor& a, const Tensor& b) {
    detail::require_same_shape(a, b, "add");
    Tape* tape = detail::result_tape({&a, &b});
    Tensor out = detail::make_result(tape, a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i)
        out.mutable_values()[i] = a.values()[i] + b.values()[i];
    if (tape != nullptr) {
        auto ad = a.data(), bd = b.data(), od = out.data();
        tape->record([ad, bd, od] {
            for (std::size_t i = 0; i < od->g.size(); ++i) {
                if (ad->requires_grad) ad->g[i] += od->g[i];
                if (bd->requires_grad) bd->g[i] += od->g[i];
            }
        });
    }
    return out;
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
    detail::require_same_shape(a, b, "sub");
    Tape* tape = detail::result_tape({&a, &b});
    Tensor out = detail::make_result(tape, a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i)
        out.mutable_values()[i] = a.values()[i] - b.values()[i];
    if (tape != nullptr) {
        auto ad = a.data(), bd = b.data(), od = out.data();
        tape->record([ad, bd, od] {
            for (std::size_t i = 0; i < od->g.size(); ++i) {
                if (ad->requires_grad) ad->g[i] += od->g[i];
                if (bd->requires_grad) bd->g[i] -= od->g[i];
            }
        });
    }
    return out;
}

inline Tensor mul(const Tensor& a, const Tensor& b) {
    detail::require_same_shape(a, b, "mul");
    Tape* tape = detail::result_tape({&a, &b});
    Tensor out = detail::make_result(tape, a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i)
        out.mutable_values()[i] = a.values()[i] * b.values()[i];
    if (tape != nullptr) {
        auto ad = a.data(), bd = b.data(), od = out.data();
        tape->record([ad, bd, od] {
            for (std::size_t i = 0; i < od->g.size(); ++i) {
                if (ad->requires_grad) ad->g[i] += od->g[i] * bd->v[i];
                if (bd->requires_grad) bd->g[i] += od->g[i] * ad->v[i];
            }
        });
    }
    return out;
}

inline Tensor scale(const Tensor& a, double s) {
    return detail::unary_op(
        a, [s](double x) { return s * x; }, [s](double, double) { return s; });
}

inline Tensor add_scalar(const Tensor& a, double s) {
    return detail::unary_op(
        a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

inline Tensor relu(const Tensor& a) {
    return detail::unary_op(
        a, [](double x) { return x > 0.0 ? x : 0.0; },
        [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

inline Tensor sigmoid(const Tensor& a) {
    auto sig = [](double x) {
        return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    };
    return detail::unary_op(a, sig, [](double, double y) { return y * (1.0 - y); });
}

inline Tensor exp(const Tensor& a) {
    return detail::unary_op(
        a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

// log with an epsilon floor; negative inputs are a domain breach, not a clamp.
inline Tensor log(const Tensor& a) {
    for (double x : a.values())
        if (x < 0.0) throw domain_error("log: negative input");
    return detail::unary_op(
        a, [](double x) { return std::log(std::max(x, kEps)); },
        [](double x, double) { return 1.0 / std::max(x, kEps); });
}

inline Tensor sqrt(const Tensor& a) {
    for (double x : a.values())
        if (x < 0.0) throw domain_error("sqrt: negative input");
    return detail::unary_op(
        a, [](double x) { return std::sqrt(x); },
        [](double, double y) { return 0.5 / std::max(y, kEps); });
}

inline Tensor abs(const Tensor& a) {
    return detail::unary_op(
        a, [](double x) { return std::abs(x); },
        [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

inline Tensor clamp(const Tensor& a, double lo, double hi) {
    if (lo > hi) throw contract_error("clamp: lo > hi");
    return detail::unary_op(
        a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
        [lo, hi](double x, double) { return (x > lo && x < hi) ? 1.0 : 0.0; });
}

// Numerically stable log(1 + exp(x)); gradient is sigmoid(x).
inline Tensor softplus(const Tensor& a) {
    return detail::unary_op(
        a, [](double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); },
        [](double x, double) {
            return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
        });
}

// ---------------------------------------------------------------------------
// Reductions
// ---------------------------------------------------------------------------

namespace detail {

inline Tensor reduce_impl(const Tensor& a, int axis, bool take_mean) {
    const int m = a.rows(), n = a.cols();
    Tape* tape = result_tape({&a});
    Tensor out;
    double w = 1.0;
    if (axis == -1) {
        out = make_result(tape, 1, 1);
        double acc = 0.0;
        for (double x : a.values()) acc += x;
        w = take_mean && !a.values().empty() ? 1.0 / static_cast<double>(a.size()) : 1.0;
        out.mutable_values()[0] = acc * w;
    } else if (axis == 0) {
        out = make_result(tape, 1, n);
        w = take_mean && m > 0 ? 1.0 / m : 1.0;
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int i = 0; i < m; ++i) acc += a.at(i, j);
            out.mutable_values()[j] = acc * w;
        }
    } else if (axis == 1) {
        out = make_result(tape, m, 1);
        w = take_mean && n > 0 ? 1.0 / n : 1.0;
        for (int i = 0; i < m; ++i) {
            double acc = 0.0;
            for (int j = 0; j < n; ++j) acc += a.at(i, j);
            out.mutable_values()[i] = acc * w;
        }
    } else {
        throw shape_error("reduce: axis must be 0, 1, or none");
    }
    if (tape != nullptr) {
        auto ad = a.data(), od = out.data();
        tape->record([ad, od, axis, w, m, n] {
            if (!ad->requires_grad) return;
            if (axis == -1) {
                for (std::size_t i = 0; i < ad->g.size(); ++i) ad->g[i] += od->g[0] * w;
            } else if (axis == 0) {
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < n; ++j)
                        ad->g[static_cast<std::size_t>(i) * n + j] += od->g[j] * w;
            } else {
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < n; ++j)
                        ad->g[static_cast<std::size_t>(i) * n + j] += od->g[i] * w;
            }
        });
    }
    return out;
}

}  // namespace detail

inline Tensor sum(const Tensor& a) { return detail::reduce_impl(a, -1, false); }
inline Tensor sum(const Tensor& a, int axis) { return detail::reduce_impl(a, axis, false); }
inline Tensor mean(const Tensor& a) { return detail::reduce_impl(a, -1, true); }
inline Tensor mean(const Tensor& a, int axis) { return detail::reduce_impl(a, axis, true); }

// ---------------------------------------------------------------------------
// Structural ops
// ---------------------------------------------------------------------------

// Each row divided by max(||row||_2, eps). Zero rows pass through unchanged
// up to the eps divisor.
inline Tensor row_l2_normalize(const Tensor& a) {
    const int m = a.rows(), n = a.cols();
    Tape* tape = detail::result_tape({&a});
    Tensor out = detail::make_result(tape, m, n);
    std::vector<double> norms(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += a.at(i, j) * a.at(i, j);
        const double nm = std::max(std::sqrt(acc), kEps);
        norms[static_cast<std::size_t>(i)] = nm;
        for (int j = 0; j < n; ++j)
            out.mutable_values()[static_cast<std::size_t>(i) * n + j] = a.at(i, j) / nm;
    }
    if (tape != nullptr) {
        auto ad = a.data(), od = out.data();
        tape->record([ad, od, norms, m, n] {
            if (!ad->requires_grad) return;
            for (int i = 0; i < m; ++i) {
                const double nm = norms[static_cast<std::size_t>(i)];
                const double* y = od->v.data() + static_cast<std::size_t>(i) * n;
                const double* gy = od->g.data() + static_cast<std::size_t>(i) * n;
                double* gx = ad->g.data() + static_cast<std::size_t>(i) * n;
                double dot = 0.0;
                for (int j = 0; j < n; ++j) dot += gy[j] * y[j];
                for (int j = 0; j < n; ++j) gx[j] += (gy[j] - y[j] * dot) / nm;
            }
        });
    }
    return out;
}

// Row gather with scatter-add backward. Indices may repeat.
inline Tensor gather_rows(const Tensor& a, const std::vector<int>& idx) {
    const int n = a.cols();
    for (int i : idx)
        if (i < 0 || i >= a.rows()) throw shape_error("gather_rows: index out of range");
    Tape* tape = detail::result_tape({&a});
    Tensor out = detail::make_result(tape, static_cast<int>(idx.size()), n);
    for (std::size_t r = 0; r < idx.size(); ++r)
        for (int j = 0; j < n; ++j)
            out.mutable_values()[r * n + j] = a.at(idx[r], j);
    if (tape != nullptr) {
        auto ad = a.data(), od = out.data();
        tape->record([ad, od, idx, n] {
            if (!ad->requires_grad) return;
            for (std::size_t r = 0; r < idx.size(); ++r)
                for (int j = 0; j < n; ++j)
                    ad->g[static_cast<std::size_t>(idx[r]) * n + j] += od->g[r * n + j];
        });
    }
    return out;
}

// Columns [c0, c1) as a new tensor.
inline Tensor slice_cols(const Tensor& a, int c0, int c1) {
    if (c0 < 0 || c1 > a.cols() || c0 >= c1) throw shape_error("slice_cols: bad column range");
    const int m = a.rows(), n = a.cols(), w = c1 - c0;
    Tape* tape = detail::result_tape({&a});
    Tensor out = detail::make_result(tape, m, w);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < w; ++j)
            out.mutable_values()[static_cast<std::size_t>(i) * w + j] = a.at(i, c0 + j);
    if (tape != nullptr) {
        auto ad = a.data(), od = out.data();
        tape->record([ad, od, c0, m, n, w] {
            if (!ad->requires_grad) return;
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < w; ++j)
                    ad->g[static_cast<std::size_t>(i) * n + c0 + j] +=
                        od->g[static_cast<std::size_t>(i) * w + j];
        });
    }
    return out;
}

// a[m x n] + bias[1 x n] broadcast down the rows.
inline Tensor add_row_bias(const Tensor& a, const Tensor& bias) {
    if (bias.rows() != 1 || bias.cols() != a.cols())
        throw shape_error("add_row_bias: bias must be 1 x cols(a)");
    const int m = a.rows(), n = a.cols();
    Tape* tape = detail::result_tape({&a, &bias});
    Tensor out = detail::make_result(tape, m, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
            out.mutable_values()[static_cast<std::size_t>(i) * n + j] = a.at(i, j) + bias.at(0, j);
    if (tape != nullptr) {
        auto ad = a.data(), bd = bias.data(), od = out.data();
        tape->record([ad, bd, od, m, n] {
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < n; ++j) {
                    const double g = od->g[static_cast<std::size_t>(i) * n + j];
                    if (ad->requires_grad) ad->g[static_cast<std::size_t>(i) * n + j] += g;
                    if (bd->requires_grad) bd->g[j] += g;
                }
        });
    }
    return out;
}

// Row-wise log-softmax with the standard fused backward:
// dx = g - softmax(x) * rowsum(g).
inline Tensor log_softmax_rows(const Tensor& a) {
    const int m = a.rows(), n = a.cols();
    Tape* tape = detail::result_tape({&a});
    Tensor out = detail::make_result(tape, m, n);
    for (int i = 0; i < m; ++i) {
        double mx = a.at(i, 0);
        for (int j = 1; j < n; ++j) mx = std::max(mx, a.at(i, j));
        double lse = 0.0;
        for (int j = 0; j < n; ++j) lse += std::exp(a.at(i, j) - mx);
        lse = mx + std::log(lse);
        for (int j = 0; j < n; ++j)
            out.mutable_values()[static_cast<std::size_t>(i) * n + j] = a.at(i, j) - lse;
    }
    if (tape != nullptr) {
        auto ad = a.data(), od = out.data();
        tape->record([ad, od, m, n] {
            if (!ad->requires_grad) return;
            for (int i = 0; i < m; ++i) {
                const double* y = od->v.data() + static_cast<std::size_t>(i) * n;
                const double* gy = od->g.data() + static_cast<std::size_t>(i) * n;
                double* gx = ad->g.data() + static_cast<std::size_t>(i) * n;
                double gsum = 0.0;
                for (int j = 0; j < n; ++j) gsum += gy[j];
                for (int j = 0; j < n; ++j) gx[j] += gy[j] - std::exp(y[j]) * gsum;
            }
        });
    }
    return out;
}

// Softmax over rows; forward convenience for probability readout.
inline std::vector<double> softmax_rows_values(const Tensor& logits) {
    const int m = logits.rows(), n = logits.cols();
    std::vector<double> probs(logits.size());
    for (int i = 0; i < m; ++i) {
        double mx = logits.at(i, 0);
        for (int j = 1; j < n; ++j) mx = std::max(mx, logits.at(i, j));
        double z = 0.0;
        for (int j = 0; j < n; ++j) z += std::exp(logits.at(i, j) - mx);
        for (int j = 0; j < n; ++j)
            probs[static_cast<std::size_t>(i) * n + j] = std::exp(logits.at(i, j) - mx) / z;
    }
    return probs;
}

}  // namespace sccaf
