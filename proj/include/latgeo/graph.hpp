#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "latgeo/errors.hpp"
#include "latgeo/tensor.hpp"

namespace latgeo {

enum class OpKind {
    Leaf,
    MatMul,
    Add,
    Subtract,
    Multiply,
    Scale,
    Sum,
    Tanh,
    Sigmoid,
    Softplus,
    Exp,
    Log,
    Square,
    Sin,
    Cos,
    ConcatRows,
};

inline const char* op_name(OpKind k) {
    switch (k) {
        case OpKind::Leaf: return "leaf";
        case OpKind::MatMul: return "matmul";
        case OpKind::Add: return "add";
        case OpKind::Subtract: return "subtract";
        case OpKind::Multiply: return "multiply";
        case OpKind::Scale: return "scale";
        case OpKind::Sum: return "sum";
        case OpKind::Tanh: return "tanh";
        case OpKind::Sigmoid: return "sigmoid";
        case OpKind::Softplus: return "softplus";
        case OpKind::Exp: return "exp";
        case OpKind::Log: return "log";
        case OpKind::Square: return "square";
        case OpKind::Sin: return "sin";
        case OpKind::Cos: return "cos";
        case OpKind::ConcatRows: return "concat-rows";
    }
    return "?";
}

inline double sigmoid_scalar(double x) {
    if (x >= 0.0) {
        double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

inline double softplus_scalar(double x) {
    // ln(1 + e^x), stable on both tails
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

class Graph;

// Lightweight handle to a node in a Graph.
struct Var {
    int idx = -1;
    bool valid() const { return idx >= 0; }
};

// Define-by-run reverse-mode autodiff over dense tensors. A Graph instance is
// single-threaded; distinct graphs over shared read-only parameter tensors may
// run in parallel. Values are computed eagerly at op construction.
class Graph {
public:
    Var leaf(Tensor value, bool requires_grad = true) {
        value.require_finite("leaf");
        return push(OpKind::Leaf, {}, std::move(value), requires_grad);
    }

    Var constant(Tensor value) { return leaf(std::move(value), false); }

    // A [m,k] * B [k,n] -> [m,n];  A [m,k] * b [k] -> [m];  a [k] * B [k,n] -> [n]
    Var matmul(Var a, Var b) {
        const Tensor& A = value(a);
        const Tensor& B = value(b);
        int m, k, n;
        std::vector<int> out_shape;
        if (A.rank() == 2 && B.rank() == 2) {
            m = A.shape()[0]; k = A.shape()[1]; n = B.shape()[1];
            if (B.shape()[0] != k) shape_error(OpKind::MatMul, A, B);
            out_shape = {m, n};
        } else if (A.rank() == 2 && B.rank() == 1) {
            m = A.shape()[0]; k = A.shape()[1]; n = 1;
            if (B.shape()[0] != k) shape_error(OpKind::MatMul, A, B);
            out_shape = {m};
        } else if (A.rank() == 1 && B.rank() == 2) {
            m = 1; k = A.shape()[0]; n = B.shape()[1];
            if (B.shape()[0] != k) shape_error(OpKind::MatMul, A, B);
            out_shape = {n};
        } else {
            shape_error(OpKind::MatMul, A, B);
            return {};
        }
        Tensor out = Tensor::zeros(out_shape);
        gemm(A.data(), B.data(), out.data(), m, k, n);
        return push(OpKind::MatMul, {a.idx, b.idx}, std::move(out), grad_of(a) || grad_of(b));
    }

    Var add(Var a, Var b) { return add_like(OpKind::Add, a, b); }
    Var subtract(Var a, Var b) { return add_like(OpKind::Subtract, a, b); }

    Var multiply(Var a, Var b) {
        const Tensor& A = value(a);
        const Tensor& B = value(b);
        if (!A.same_shape(B)) shape_error(OpKind::Multiply, A, B);
        Tensor out = A;
        double* o = out.data();
        const double* y = B.data();
        for (std::size_t i = 0; i < out.numel(); ++i) o[i] *= y[i];
        return push(OpKind::Multiply, {a.idx, b.idx}, std::move(out), grad_of(a) || grad_of(b));
    }

    Var scale(Var a, double c) {
        Tensor out = value(a);
        for (double& v : out.vec()) v *= c;
        Var r = push(OpKind::Scale, {a.idx}, std::move(out), grad_of(a));
        nodes_[r.idx].scalar = c;
        return r;
    }

    Var sum(Var a) {
        const Tensor& A = value(a);
        double s = 0.0;
        for (std::size_t i = 0; i < A.numel(); ++i) s += A[i];
        return push(OpKind::Sum, {a.idx}, Tensor::scalar(s), grad_of(a));
    }

    Var tanh_(Var a) { return unary(OpKind::Tanh, a, [](double x) { return std::tanh(x); }); }
    Var sigmoid_(Var a) { return unary(OpKind::Sigmoid, a, sigmoid_scalar); }
    Var softplus_(Var a) { return unary(OpKind::Softplus, a, softplus_scalar); }
    Var exp_(Var a) { return unary(OpKind::Exp, a, [](double x) { return std::exp(x); }); }
    Var log_(Var a) { return unary(OpKind::Log, a, [](double x) { return std::log(x); }); }
    Var square(Var a) { return unary(OpKind::Square, a, [](double x) { return x * x; }); }
    Var sin_(Var a) { return unary(OpKind::Sin, a, [](double x) { return std::sin(x); }); }
    Var cos_(Var a) { return unary(OpKind::Cos, a, [](double x) { return std::cos(x); }); }

    // Stacks inputs along axis 0. Rank-1 [n] counts as one row; rank-2 [r,n]
    // contributes r rows. All inputs must share the column count n.
    Var concat_rows(const std::vector<Var>& parts) {
        if (parts.empty()) throw DimensionError("concat-rows: no inputs");
        int cols = value(parts[0]).cols();
        int rows = 0;
        bool rg = false;
        for (Var p : parts) {
            const Tensor& t = value(p);
            if (t.rank() < 1 || t.rank() > 2 || t.cols() != cols) {
                throw DimensionError(std::string("concat-rows: shape ") + t.shape_str() +
                                     " does not conform to column count " + std::to_string(cols));
            }
            rows += t.rank() == 2 ? t.shape()[0] : 1;
            rg = rg || grad_of(p);
        }
        Tensor out = Tensor::zeros({rows, cols});
        double* o = out.data();
        std::vector<int> in;
        in.reserve(parts.size());
        for (Var p : parts) {
            const Tensor& t = value(p);
            const double* x = t.data();
            std::size_t n = t.numel();
            for (std::size_t i = 0; i < n; ++i) o[i] = x[i];
            o += n;
            in.push_back(p.idx);
        }
        return push(OpKind::ConcatRows, std::move(in), std::move(out), rg);
    }

    const Tensor& value(Var v) const { return nodes_[v.idx].value; }

    // Adjoint of a node after backward(); zeros if the node was not reached.
    const Tensor& grad(Var v) const {
        const NodeRec& n = nodes_[v.idx];
        if (n.adjoint.numel() == 0) {
            throw NumericError("grad: backward() has not populated this node");
        }
        return n.adjoint;
    }

    // Reverse pass from a scalar root. Adjoints are zeroed first, so repeated
    // calls are idempotent.
    void backward(Var root) {
        NodeRec& r = nodes_[root.idx];
        if (!r.value.is_scalar()) {
            throw DimensionError("backward: root must be scalar, got shape " + r.value.shape_str());
        }
        for (NodeRec& n : nodes_) {
            if (n.requires_grad) {
                n.adjoint = Tensor::zeros(n.value.shape());
            }
        }
        if (!r.requires_grad) return;
        r.adjoint[0] = 1.0;
        for (int i = root.idx; i >= 0; --i) {
            NodeRec& n = nodes_[i];
            if (!n.requires_grad || n.adjoint.numel() == 0) continue;
            propagate(n);
        }
    }

    void clear() { nodes_.clear(); }
    std::size_t size() const { return nodes_.size(); }

private:
    struct NodeRec {
        OpKind kind = OpKind::Leaf;
        std::vector<int> inputs;
        Tensor value;
        Tensor adjoint;
        double scalar = 0.0;
        bool requires_grad = false;
    };

    bool grad_of(Var v) const { return nodes_[v.idx].requires_grad; }

    Var push(OpKind kind, std::vector<int> inputs, Tensor value, bool requires_grad) {
        if (kind != OpKind::Leaf && !value.all_finite()) {
            throw NumericError(std::string(op_name(kind)) + ": non-finite result, shape " + value.shape_str());
        }
        NodeRec n;
        n.kind = kind;
        n.inputs = std::move(inputs);
        n.value = std::move(value);
        n.requires_grad = requires_grad;
        nodes_.push_back(std::move(n));
        return Var{static_cast<int>(nodes_.size()) - 1};
    }

    [[noreturn]] static void shape_error(OpKind kind, const Tensor& a, const Tensor& b) {
        throw DimensionError(std::string(op_name(kind)) + ": shapes " + a.shape_str() + " and " + b.shape_str() +
                             " do not conform");
    }

    template <typename F>
    Var unary(OpKind kind, Var a, F f) {
        Tensor out = value(a);
        for (double& v : out.vec()) v = f(v);
        return push(kind, {a.idx}, std::move(out), grad_of(a));
    }

    // add/subtract: identical shapes, or matrix [m,n] with a row vector [n]
    // (or [1,n]) broadcast over rows.
    Var add_like(OpKind kind, Var a, Var b) {
        const Tensor& A = value(a);
        const Tensor& B = value(b);
        double sgn = kind == OpKind::Subtract ? -1.0 : 1.0;
        if (A.same_shape(B)) {
            Tensor out = A;
            double* o = out.data();
            const double* y = B.data();
            for (std::size_t i = 0; i < out.numel(); ++i) o[i] += sgn * y[i];
            return push(kind, {a.idx, b.idx}, std::move(out), grad_of(a) || grad_of(b));
        }
        if (A.rank() == 2 && is_row(B) && B.numel() == static_cast<std::size_t>(A.shape()[1])) {
            int m = A.shape()[0], n = A.shape()[1];
            Tensor out = A;
            double* o = out.data();
            const double* y = B.data();
            for (int i = 0; i < m; ++i) {
                for (int j = 0; j < n; ++j) o[static_cast<std::size_t>(i) * n + j] += sgn * y[j];
            }
            return push(kind, {a.idx, b.idx}, std::move(out), grad_of(a) || grad_of(b));
        }
        shape_error(kind, A, B);
    }

    static bool is_row(const Tensor& t) {
        return t.rank() == 1 || (t.rank() == 2 && t.shape()[0] == 1);
    }

    // C[m,n] += A[m,k] * B[k,n]
    static void gemm(const double* a, const double* b, double* c, int m, int k, int n) {
        for (int i = 0; i < m; ++i) {
            const double* ai = a + static_cast<std::size_t>(i) * k;
            double* ci = c + static_cast<std::size_t>(i) * n;
            for (int p = 0; p < k; ++p) {
                double aip = ai[p];
                if (aip == 0.0) continue;
                const double* bp = b + static_cast<std::size_t>(p) * n;
                for (int j = 0; j < n; ++j) ci[j] += aip * bp[j];
            }
        }
    }

    // dA[m,k] += dC[m,n] * B^T  (row dot row, contiguous)
    static void gemm_dA(const double* dc, const double* b, double* da, int m, int k, int n) {
        for (int i = 0; i < m; ++i) {
            const double* dci = dc + static_cast<std::size_t>(i) * n;
            double* dai = da + static_cast<std::size_t>(i) * k;
            for (int p = 0; p < k; ++p) {
                const double* bp = b + static_cast<std::size_t>(p) * n;
                double s = 0.0;
                for (int j = 0; j < n; ++j) s += dci[j] * bp[j];
                dai[p] += s;
            }
        }
    }

    // dB[k,n] += A^T * dC[m,n]
    static void gemm_dB(const double* a, const double* dc, double* db, int m, int k, int n) {
        for (int i = 0; i < m; ++i) {
            const double* ai = a + static_cast<std::size_t>(i) * k;
            const double* dci = dc + static_cast<std::size_t>(i) * n;
            for (int p = 0; p < k; ++p) {
                double aip = ai[p];
                if (aip == 0.0) continue;
                double* dbp = db + static_cast<std::size_t>(p) * n;
                for (int j = 0; j < n; ++j) dbp[j] += aip * dci[j];
            }
        }
    }

    Tensor* adj(int idx) {
        NodeRec& n = nodes_[idx];
        if (!n.requires_grad) return nullptr;
        return &n.adjoint;
    }

    void propagate(NodeRec& n) {
        const Tensor& d = n.adjoint;
        switch (n.kind) {
            case OpKind::Leaf:
                return;
            case OpKind::MatMul: {
                const Tensor& A = nodes_[n.inputs[0]].value;
                const Tensor& B = nodes_[n.inputs[1]].value;
                int m, k, nn;
                if (A.rank() == 2) { m = A.shape()[0]; k = A.shape()[1]; } else { m = 1; k = A.shape()[0]; }
                nn = B.rank() == 2 ? B.shape()[1] : 1;
                if (Tensor* da = adj(n.inputs[0])) gemm_dA(d.data(), B.data(), da->data(), m, k, nn);
                if (Tensor* db = adj(n.inputs[1])) gemm_dB(A.data(), d.data(), db->data(), m, k, nn);
                return;
            }
            case OpKind::Add:
            case OpKind::Subtract: {
                double sgn = n.kind == OpKind::Subtract ? -1.0 : 1.0;
                if (Tensor* da = adj(n.inputs[0])) {
                    for (std::size_t i = 0; i < d.numel(); ++i) (*da)[i] += d[i];
                }
                if (Tensor* db = adj(n.inputs[1])) {
                    if (db->numel() == d.numel()) {
                        for (std::size_t i = 0; i < d.numel(); ++i) (*db)[i] += sgn * d[i];
                    } else {
                        // row broadcast: adjoint sums over rows
                        int m = d.shape()[0], c = d.shape()[1];
                        for (int i = 0; i < m; ++i) {
                            const double* row = d.data() + static_cast<std::size_t>(i) * c;
                            for (int j = 0; j < c; ++j) (*db)[j] += sgn * row[j];
                        }
                    }
                }
                return;
            }
            case OpKind::Multiply: {
                const Tensor& A = nodes_[n.inputs[0]].value;
                const Tensor& B = nodes_[n.inputs[1]].value;
                if (Tensor* da = adj(n.inputs[0])) {
                    for (std::size_t i = 0; i < d.numel(); ++i) (*da)[i] += d[i] * B[i];
                }
                if (Tensor* db = adj(n.inputs[1])) {
                    for (std::size_t i = 0; i < d.numel(); ++i) (*db)[i] += d[i] * A[i];
                }
                return;
            }
            case OpKind::Scale: {
                if (Tensor* da = adj(n.inputs[0])) {
                    for (std::size_t i = 0; i < d.numel(); ++i) (*da)[i] += n.scalar * d[i];
                }
                return;
            }
            case OpKind::Sum: {
                if (Tensor* da = adj(n.inputs[0])) {
                    double g = d[0];
                    for (std::size_t i = 0; i < da->numel(); ++i) (*da)[i] += g;
                }
                return;
            }
            case OpKind::Tanh: {
                if (Tensor* da = adj(n.inputs[0])) {
                    for (std::size_t i = 0; i < d.numel(); ++i) {
                        double y = n.value[i];
                        (*da)[i] += d[i] * (1.0 - y * y);
                    }
                }
                return;
            }
            case OpKind::Sigmoid: {
                if (Tensor* da = adj(n.inputs[0])) {
                    for (std::size_t i = 0; i < d.numel(); ++i) {
                        double y = n.value[i];
                        (*da)[i] += d[i] * y * (1.0 - y);
                    }
                }
                return;
            }
            case OpKind::Softplus: {
                const Tensor& X = nodes_[n.inputs[0]].value;
                if (Tensor* da = adj(n.inputs[0])) {
                    for (std::size_t i = 0; i < d.numel(); ++i) (*da)[i] += d[i] * sigmoid_scalar(X[i]);
                }
                return;
            }
            case OpKind::Exp: {
                if (Tensor* da = adj(n.inputs[0])) {
                    for (std::size_t i = 0; i < d.numel(); ++i) (*da)[i] += d[i] * n.value[i];
                }
                return;
            }
            case OpKind::Log: {
                const Tensor& X = nodes_[n.inputs[0]].value;
                if (Tensor* da = adj(n.inputs[0])) {
                    for (std::size_t i = 0; i < d.numel(); ++i) (*da)[i] += d[i] / X[i];
                }
                return;
            }
            case OpKind::Square: {
                const Tensor& X = nodes_[n.inputs[0]].value;
                if (Tensor* da = adj(n.inputs[0])) {
                    for (std::size_t i = 0; i < d.numel(); ++i) (*da)[i] += d[i] * 2.0 * X[i];
                }
                return;
            }
            case OpKind::Sin: {
                const Tensor& X = nodes_[n.inputs[0]].value;
                if (Tensor* da = adj(n.inputs[0])) {
                    for (std::size_t i = 0; i < d.numel(); ++i) (*da)[i] += d[i] * std::cos(X[i]);
                }
                return;
            }
            case OpKind::Cos: {
                const Tensor& X = nodes_[n.inputs[0]].value;
                if (Tensor* da = adj(n.inputs[0])) {
                    for (std::size_t i = 0; i < d.numel(); ++i) (*da)[i] -= d[i] * std::sin(X[i]);
                }
                return;
            }
            case OpKind::ConcatRows: {
                std::size_t off = 0;
                for (int in_idx : n.inputs) {
                    std::size_t cnt = nodes_[in_idx].value.numel();
                    if (Tensor* da = adj(in_idx)) {
                        for (std::size_t i = 0; i < cnt; ++i) (*da)[i] += d[off + i];
                    }
                    off += cnt;
                }
                return;
            }
        }
    }

    std::vector<NodeRec> nodes_;
};

// Max over coordinates of |autodiff - central difference| / max(1, |central difference|).
// `build` constructs the scalar objective from a parameter leaf; it is called
// once per perturbed evaluation with a fresh graph.
inline double gradient_check(const std::function<Var(Graph&, Var)>& build, const Tensor& p, double h) {
    if (!(h > 0.0)) throw NumericError("gradient_check: step must be positive");
    Graph g;
    Var leaf = g.leaf(p, true);
    Var root = build(g, leaf);
    g.backward(root);
    Tensor auto_grad = g.grad(leaf);

    auto eval_at = [&](const Tensor& q) {
        Graph gg;
        Var l = gg.leaf(q, false);
        Var r = build(gg, l);
        double v = gg.value(r).value();
        if (!std::isfinite(v)) throw NumericError("gradient_check: non-finite objective");
        return v;
    };

    double worst = 0.0;
    for (std::size_t i = 0; i < p.numel(); ++i) {
        Tensor hi = p, lo = p;
        hi[i] += h;
        lo[i] -= h;
        double cd = (eval_at(hi) - eval_at(lo)) / (2.0 * h);
        double err = std::abs(auto_grad[i] - cd) / std::max(1.0, std::abs(cd));
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace latgeo
