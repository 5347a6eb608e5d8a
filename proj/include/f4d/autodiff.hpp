#pragma once

#include <memory>
#include <vector>

#include "f4d/errors.hpp"
#include "f4d/kernels.hpp"

namespace f4d::ad {

/// Dense n-dimensional value array. `grad` is filled by training code after a
/// reverse pass; it is empty otherwise.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> v;
    std::vector<double> grad;

    Tensor() = default;
    Tensor(std::vector<int> s, std::vector<double> vals)
        : shape(std::move(s)), v(std::move(vals)) {}

    static Tensor zeros(std::vector<int> s);
    static Tensor scalar(double x) { return Tensor({1}, {x}); }

    std::size_t numel() const;
    void require_finite(const char* what) const;
};

/// Handle to a node of a Graph.
struct Value {
    int id = -1;
    bool valid() const { return id >= 0; }
};

/// Eagerly evaluated computation tape. Reverse passes build new tape nodes,
/// so gradients are themselves differentiable values: the second reverse pass
/// needed by the gradient penalty runs over the first pass's nodes. The
/// piecewise-linear activations contribute locally constant masks, whose
/// (almost-everywhere zero) second-derivative terms are dropped.
class Graph {
public:
    // -- node creation -------------------------------------------------------
    Value leaf(Tensor t);
    Value leaf(std::vector<int> shape, std::vector<double> vals);
    Value scalar(double x) { return leaf({1}, {x}); }

    // -- elementwise and reductions ------------------------------------------
    Value add(Value a, Value b);
    Value sub(Value a, Value b);
    Value mul(Value a, Value b);
    Value div(Value a, Value b);
    Value scale(Value a, double c);
    Value sum(Value a);  ///< all elements -> scalar
    Value mean(Value a);
    Value broadcast(Value s, std::vector<int> shape);
    Value sqrt(Value a);
    Value log_sigmoid(Value a); ///< numerically stable -softplus(-x)
    Value leaky_relu(Value a, double slope);

    // -- network building blocks ---------------------------------------------
    // Conv tensors are {C, D, H, W}; kernels are {Cout, Cin, k, k, k}.
    Value conv3(Value x, Value w, int stride, int pad);
    Value conv3_dx(Value gy, Value w, int stride, int pad, kern::Shape3 xs);
    Value conv3_dw(Value x, Value gy, int stride, int pad, int k, int cout);
    Value bias_add(Value x, Value b);      ///< per-channel bias on {C,D,H,W}
    Value channel_sum(Value x);            ///< {C,D,H,W} -> {C}
    Value channel_broadcast(Value b, kern::Shape3 spatial);
    Value upsample2(Value x);              ///< trilinear x2
    Value upsample2_adj(Value gy);
    Value matvec(Value w, Value x);        ///< {m,n} x {n} -> {m}
    Value matvec_t(Value w, Value y);      ///< {m,n}^T x {m} -> {n}
    Value outer(Value a, Value b);         ///< {m} x {n} -> {m,n}
    Value concat_c(Value a, Value b);
    Value slice_c(Value x, int c0, int c1);
    Value pad_c(Value x, int c0, int ctotal);
    Value reshape(Value x, std::vector<int> shape);

    // -- access ---------------------------------------------------------------
    const std::vector<double>& val(Value v) const;
    const std::vector<int>& shape(Value v) const;
    double scalar_val(Value v) const;
    Tensor tensor(Value v) const;
    std::size_t size() const { return nodes_.size(); }

    void set_exec(kern::Exec e) { exec_ = e; }
    kern::Exec exec() const { return exec_; }

    /// Reverse-mode gradients of the scalar `out` with respect to each entry
    /// of `wrt` (graph values, in order; zero tensors where no path exists).
    std::vector<Value> gradients(Value out, const std::vector<Value>& wrt);

private:
    enum class Op {
        Leaf, Add, Sub, Mul, Div, Scale, Sum, Broadcast, Sqrt, LogSigmoid,
        LeakyRelu, Conv3, Conv3Dx, Conv3Dw, BiasAdd, ChannelSum, ChannelBroadcast,
        Up2, Up2Adj, Matvec, MatvecT, Outer, ConcatC, SliceC, PadC, Reshape,
    };
    struct Attr {
        int stride = 1, pad = 0, k = 0, i0 = 0, i1 = 0;
        double x = 0.0;
        kern::Shape3 s{};
    };
    struct Node {
        Op op = Op::Leaf;
        int a = -1, b = -1;
        Attr attr;
        std::vector<int> shape;
        std::shared_ptr<std::vector<double>> val;
    };

    Value push(Op op, int a, int b, Attr attr, std::vector<int> shape,
               std::vector<double> vals);
    const Node& node(Value v) const;
    void check_same_shape(Value a, Value b, const char* what) const;
    static kern::Shape3 spatial(const std::vector<int>& s);

    std::vector<Node> nodes_;
    kern::Exec exec_ = kern::Exec::Par;
};

} // namespace f4d::ad
