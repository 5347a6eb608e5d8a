#include "f4d/autodiff.hpp"

#include <cmath>
#include <string>

namespace f4d::ad {

Tensor Tensor::zeros(std::vector<int> s) {
    std::size_t n = 1;
    for (int d : s) n *= static_cast<std::size_t>(d);
    Tensor t;
    t.shape = std::move(s);
    t.v.assign(n, 0.0);
    return t;
}

std::size_t Tensor::numel() const {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    return n;
}

void Tensor::require_finite(const char* what) const {
    for (double x : v)
        if (!std::isfinite(x))
            throw NumericError(std::string(what) + ": non-finite value");
}

namespace {
std::size_t numel_of(const std::vector<int>& s) {
    std::size_t n = 1;
    for (int d : s) n *= static_cast<std::size_t>(d);
    return n;
}
} // namespace

Value Graph::push(Op op, int a, int b, Attr attr, std::vector<int> shape,
                  std::vector<double> vals) {
    Node n;
    n.op = op;
    n.a = a;
    n.b = b;
    n.attr = attr;
    n.shape = std::move(shape);
    n.val = std::make_shared<std::vector<double>>(std::move(vals));
    nodes_.push_back(std::move(n));
    return Value{static_cast<int>(nodes_.size()) - 1};
}

const Graph::Node& Graph::node(Value v) const {
    if (v.id < 0 || v.id >= static_cast<int>(nodes_.size()))
        throw ValidationError("autodiff: invalid value handle");
    return nodes_[static_cast<std::size_t>(v.id)];
}

void Graph::check_same_shape(Value a, Value b, const char* what) const {
    if (node(a).shape != node(b).shape)
        throw ValidationError(std::string(what) + ": shape mismatch");
}

kern::Shape3 Graph::spatial(const std::vector<int>& s) {
    if (s.size() != 4)
        throw ValidationError("autodiff: expected a {C,D,H,W} tensor");
    return {s[1], s[2], s[3]};
}

Value Graph::leaf(Tensor t) {
    if (t.v.size() != t.numel())
        throw ValidationError("autodiff: tensor value/shape size mismatch");
    return push(Op::Leaf, -1, -1, {}, std::move(t.shape), std::move(t.v));
}

Value Graph::leaf(std::vector<int> shape, std::vector<double> vals) {
    if (vals.size() != numel_of(shape))
        throw ValidationError("autodiff: tensor value/shape size mismatch");
    return push(Op::Leaf, -1, -1, {}, std::move(shape), std::move(vals));
}

Value Graph::add(Value a, Value b) {
    check_same_shape(a, b, "add");
    const auto& va = *node(a).val;
    const auto& vb = *node(b).val;
    std::vector<double> out(va.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[i] + vb[i];
    return push(Op::Add, a.id, b.id, {}, node(a).shape, std::move(out));
}

Value Graph::sub(Value a, Value b) {
    check_same_shape(a, b, "sub");
    const auto& va = *node(a).val;
    const auto& vb = *node(b).val;
    std::vector<double> out(va.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[i] - vb[i];
    return push(Op::Sub, a.id, b.id, {}, node(a).shape, std::move(out));
}

Value Graph::mul(Value a, Value b) {
    check_same_shape(a, b, "mul");
    const auto& va = *node(a).val;
    const auto& vb = *node(b).val;
    std::vector<double> out(va.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[i] * vb[i];
    return push(Op::Mul, a.id, b.id, {}, node(a).shape, std::move(out));
}

Value Graph::div(Value a, Value b) {
    check_same_shape(a, b, "div");
    const auto& va = *node(a).val;
    const auto& vb = *node(b).val;
    std::vector<double> out(va.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[i] / vb[i];
    return push(Op::Div, a.id, b.id, {}, node(a).shape, std::move(out));
}

Value Graph::scale(Value a, double c) {
    const auto& va = *node(a).val;
    std::vector<double> out(va.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = c * va[i];
    Attr at;
    at.x = c;
    return push(Op::Scale, a.id, -1, at, node(a).shape, std::move(out));
}

Value Graph::sum(Value a) {
    const auto& va = *node(a).val;
    double s = 0.0;
    for (double x : va) s += x;
    return push(Op::Sum, a.id, -1, {}, {1}, {s});
}

Value Graph::mean(Value a) {
    const std::size_t n = node(a).val->size();
    return scale(sum(a), 1.0 / static_cast<double>(n));
}

Value Graph::broadcast(Value s, std::vector<int> shape) {
    if (node(s).val->size() != 1)
        throw ValidationError("broadcast: source must be scalar");
    const double x = (*node(s).val)[0];
    const std::size_t n = numel_of(shape);
    return push(Op::Broadcast, s.id, -1, {}, std::move(shape),
                std::vector<double>(n, x));
}

Value Graph::sqrt(Value a) {
    const auto& va = *node(a).val;
    std::vector<double> out(va.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::sqrt(va[i]);
    return push(Op::Sqrt, a.id, -1, {}, node(a).shape, std::move(out));
}

namespace {
double log_sigmoid_stable(double x) {
    // log sigma(x) = -softplus(-x)
    return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}
} // namespace

Value Graph::log_sigmoid(Value a) {
    const auto& va = *node(a).val;
    std::vector<double> out(va.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = log_sigmoid_stable(va[i]);
    return push(Op::LogSigmoid, a.id, -1, {}, node(a).shape, std::move(out));
}

Value Graph::leaky_relu(Value a, double slope) {
    const auto& va = *node(a).val;
    std::vector<double> out(va.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = va[i] > 0.0 ? va[i] : slope * va[i];
    Attr at;
    at.x = slope;
    return push(Op::LeakyRelu, a.id, -1, at, node(a).shape, std::move(out));
}

Value Graph::conv3(Value x, Value w, int stride, int pad) {
    const auto& xs = node(x).shape;
    const auto& ws = node(w).shape;
    if (xs.size() != 4 || ws.size() != 5 || ws[2] != ws[3] || ws[3] != ws[4])
        throw ValidationError("conv3: expected {C,D,H,W} input and cubic kernel");
    if (ws[1] != xs[0]) throw ValidationError("conv3: channel mismatch");
    const int k = ws[2];
    const kern::Shape3 in = spatial(xs);
    const kern::Shape3 os{kern::conv_out_dim(in.d, k, stride, pad),
                          kern::conv_out_dim(in.h, k, stride, pad),
                          kern::conv_out_dim(in.w, k, stride, pad)};
    if (os.d < 1 || os.h < 1 || os.w < 1)
        throw ValidationError("conv3: output would be empty");
    std::vector<double> out(static_cast<std::size_t>(ws[0]) * os.voxels());
    kern::conv3_fwd(node(x).val->data(), in, xs[0], node(w).val->data(), ws[0], k,
                    stride, pad, out.data(), exec_);
    Attr at;
    at.stride = stride;
    at.pad = pad;
    at.k = k;
    return push(Op::Conv3, x.id, w.id, at, {ws[0], os.d, os.h, os.w}, std::move(out));
}

Value Graph::conv3_dx(Value gy, Value w, int stride, int pad, kern::Shape3 xs) {
    const auto& ys = node(gy).shape;
    const auto& ws = node(w).shape;
    if (ys.size() != 4 || ws.size() != 5)
        throw ValidationError("conv3_dx: bad operand ranks");
    const int k = ws[2];
    std::vector<double> out(static_cast<std::size_t>(ws[1]) * xs.voxels());
    kern::conv3_dx(node(gy).val->data(), spatial(ys), ys[0], node(w).val->data(),
                   ws[1], k, stride, pad, out.data(), xs, exec_);
    Attr at;
    at.stride = stride;
    at.pad = pad;
    at.k = k;
    at.s = xs;
    return push(Op::Conv3Dx, gy.id, w.id, at, {ws[1], xs.d, xs.h, xs.w},
                std::move(out));
}

Value Graph::conv3_dw(Value x, Value gy, int stride, int pad, int k, int cout) {
    const auto& xs = node(x).shape;
    const auto& ys = node(gy).shape;
    if (xs.size() != 4 || ys.size() != 4)
        throw ValidationError("conv3_dw: bad operand ranks");
    const int cin = xs[0];
    std::vector<double> out(static_cast<std::size_t>(cout) * cin * k * k * k);
    kern::conv3_dw(node(x).val->data(), spatial(xs), cin, node(gy).val->data(),
                   spatial(ys), cout, k, stride, pad, out.data(), exec_);
    Attr at;
    at.stride = stride;
    at.pad = pad;
    at.k = k;
    return push(Op::Conv3Dw, x.id, gy.id, at, {cout, cin, k, k, k}, std::move(out));
}

Value Graph::bias_add(Value x, Value b) {
    const auto& xs = node(x).shape;
    const auto& bs = node(b).shape;
    if (xs.size() != 4 || bs.size() != 1 || bs[0] != xs[0])
        throw ValidationError("bias_add: bias must be {C} matching input channels");
    const std::size_t vox = spatial(xs).voxels();
    std::vector<double> out(*node(x).val);
    for (int c = 0; c < xs[0]; ++c) {
        const double bc = (*node(b).val)[static_cast<std::size_t>(c)];
        for (std::size_t i = 0; i < vox; ++i) out[c * vox + i] += bc;
    }
    return push(Op::BiasAdd, x.id, b.id, {}, xs, std::move(out));
}

Value Graph::channel_sum(Value x) {
    const auto& xs = node(x).shape;
    if (xs.size() != 4) throw ValidationError("channel_sum: expected {C,D,H,W}");
    const std::size_t vox = spatial(xs).voxels();
    std::vector<double> out(static_cast<std::size_t>(xs[0]), 0.0);
    for (int c = 0; c < xs[0]; ++c) {
        double s = 0.0;
        for (std::size_t i = 0; i < vox; ++i) s += (*node(x).val)[c * vox + i];
        out[static_cast<std::size_t>(c)] = s;
    }
    return push(Op::ChannelSum, x.id, -1, {}, {xs[0]}, std::move(out));
}

Value Graph::channel_broadcast(Value b, kern::Shape3 sp) {
    const auto& bs = node(b).shape;
    if (bs.size() != 1) throw ValidationError("channel_broadcast: expected {C}");
    const std::size_t vox = sp.voxels();
    std::vector<double> out(static_cast<std::size_t>(bs[0]) * vox);
    for (int c = 0; c < bs[0]; ++c) {
        const double bc = (*node(b).val)[static_cast<std::size_t>(c)];
        for (std::size_t i = 0; i < vox; ++i) out[c * vox + i] = bc;
    }
    Attr at;
    at.s = sp;
    return push(Op::ChannelBroadcast, b.id, -1, at, {bs[0], sp.d, sp.h, sp.w},
                std::move(out));
}

Value Graph::upsample2(Value x) {
    const auto& xs = node(x).shape;
    if (xs.size() != 4) throw ValidationError("upsample2: expected {C,D,H,W}");
    const kern::Shape3 in = spatial(xs);
    std::vector<double> out(static_cast<std::size_t>(xs[0]) * in.voxels() * 8);
    kern::up2_fwd(node(x).val->data(), xs[0], in, out.data(), exec_);
    return push(Op::Up2, x.id, -1, {}, {xs[0], 2 * in.d, 2 * in.h, 2 * in.w},
                std::move(out));
}

Value Graph::upsample2_adj(Value gy) {
    const auto& ys = node(gy).shape;
    if (ys.size() != 4 || ys[1] % 2 || ys[2] % 2 || ys[3] % 2)
        throw ValidationError("upsample2_adj: dims must be even");
    const kern::Shape3 xs{ys[1] / 2, ys[2] / 2, ys[3] / 2};
    std::vector<double> out(static_cast<std::size_t>(ys[0]) * xs.voxels());
    kern::up2_adj(node(gy).val->data(), ys[0], xs, out.data(), exec_);
    return push(Op::Up2Adj, gy.id, -1, {}, {ys[0], xs.d, xs.h, xs.w}, std::move(out));
}

Value Graph::matvec(Value w, Value x) {
    const auto& ws = node(w).shape;
    const auto& xs = node(x).shape;
    if (ws.size() != 2 || xs.size() != 1 || ws[1] != xs[0])
        throw ValidationError("matvec: shape mismatch");
    std::vector<double> out(static_cast<std::size_t>(ws[0]), 0.0);
    const auto& wv = *node(w).val;
    const auto& xv = *node(x).val;
    for (int i = 0; i < ws[0]; ++i) {
        double s = 0.0;
        const double* row = wv.data() + static_cast<std::size_t>(i) * ws[1];
        for (int j = 0; j < ws[1]; ++j) s += row[j] * xv[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(i)] = s;
    }
    return push(Op::Matvec, w.id, x.id, {}, {ws[0]}, std::move(out));
}

Value Graph::matvec_t(Value w, Value y) {
    const auto& ws = node(w).shape;
    const auto& ys = node(y).shape;
    if (ws.size() != 2 || ys.size() != 1 || ws[0] != ys[0])
        throw ValidationError("matvec_t: shape mismatch");
    std::vector<double> out(static_cast<std::size_t>(ws[1]), 0.0);
    const auto& wv = *node(w).val;
    const auto& yv = *node(y).val;
    for (int i = 0; i < ws[0]; ++i) {
        const double yi = yv[static_cast<std::size_t>(i)];
        const double* row = wv.data() + static_cast<std::size_t>(i) * ws[1];
        for (int j = 0; j < ws[1]; ++j) out[static_cast<std::size_t>(j)] += yi * row[j];
    }
    return push(Op::MatvecT, w.id, y.id, {}, {ws[1]}, std::move(out));
}

Value Graph::outer(Value a, Value b) {
    const auto& as = node(a).shape;
    const auto& bs = node(b).shape;
    if (as.size() != 1 || bs.size() != 1)
        throw ValidationError("outer: expected vectors");
    const auto& av = *node(a).val;
    const auto& bv = *node(b).val;
    std::vector<double> out(av.size() * bv.size());
    for (std::size_t i = 0; i < av.size(); ++i)
        for (std::size_t j = 0; j < bv.size(); ++j)
            out[i * bv.size() + j] = av[i] * bv[j];
    return push(Op::Outer, a.id, b.id, {}, {as[0], bs[0]}, std::move(out));
}

Value Graph::concat_c(Value a, Value b) {
    const auto& as = node(a).shape;
    const auto& bs = node(b).shape;
    if (as.size() != 4 || bs.size() != 4 || as[1] != bs[1] || as[2] != bs[2] ||
        as[3] != bs[3])
        throw ValidationError("concat_c: spatial dims must match");
    std::vector<double> out;
    out.reserve(node(a).val->size() + node(b).val->size());
    out.insert(out.end(), node(a).val->begin(), node(a).val->end());
    out.insert(out.end(), node(b).val->begin(), node(b).val->end());
    return push(Op::ConcatC, a.id, b.id, {}, {as[0] + bs[0], as[1], as[2], as[3]},
                std::move(out));
}

Value Graph::slice_c(Value x, int c0, int c1) {
    const auto& xs = node(x).shape;
    if (xs.size() != 4 || c0 < 0 || c1 > xs[0] || c0 >= c1)
        throw ValidationError("slice_c: bad channel range");
    const std::size_t vox = spatial(xs).voxels();
    std::vector<double> out(node(x).val->begin() + c0 * vox,
                            node(x).val->begin() + c1 * vox);
    Attr at;
    at.i0 = c0;
    at.i1 = c1;
    return push(Op::SliceC, x.id, -1, at, {c1 - c0, xs[1], xs[2], xs[3]},
                std::move(out));
}

Value Graph::pad_c(Value x, int c0, int ctotal) {
    const auto& xs = node(x).shape;
    if (xs.size() != 4 || c0 < 0 || c0 + xs[0] > ctotal)
        throw ValidationError("pad_c: bad channel placement");
    const std::size_t vox = spatial(xs).voxels();
    std::vector<double> out(static_cast<std::size_t>(ctotal) * vox, 0.0);
    std::copy(node(x).val->begin(), node(x).val->end(), out.begin() + c0 * vox);
    Attr at;
    at.i0 = c0;
    at.i1 = ctotal;
    return push(Op::PadC, x.id, -1, at, {ctotal, xs[1], xs[2], xs[3]}, std::move(out));
}

Value Graph::reshape(Value x, std::vector<int> shape) {
    if (numel_of(shape) != node(x).val->size())
        throw ValidationError("reshape: element count mismatch");
    Node n;
    n.op = Op::Reshape;
    n.a = x.id;
    n.shape = std::move(shape);
    n.val = node(x).val; // aliases the same buffer
    nodes_.push_back(std::move(n));
    return Value{static_cast<int>(nodes_.size()) - 1};
}

const std::vector<double>& Graph::val(Value v) const { return *node(v).val; }
const std::vector<int>& Graph::shape(Value v) const { return node(v).shape; }

double Graph::scalar_val(Value v) const {
    if (node(v).val->size() != 1)
        throw ValidationError("scalar_val: value is not scalar");
    return (*node(v).val)[0];
}

Tensor Graph::tensor(Value v) const { return Tensor(node(v).shape, *node(v).val); }

std::vector<Value> Graph::gradients(Value out, const std::vector<Value>& wrt) {
    if (node(out).val->size() != 1)
        throw ValidationError("gradients: output must be scalar");
    const int top = out.id;
    for (Value w : wrt)
        if (w.id < 0 || w.id > top)
            throw ValidationError("gradients: wrt values must precede the output");

    // needs[i]: node i transitively reads some wrt entry.
    std::vector<char> needs(static_cast<std::size_t>(top) + 1, 0);
    for (Value w : wrt) needs[static_cast<std::size_t>(w.id)] = 1;
    for (int i = 0; i <= top; ++i) {
        if (needs[static_cast<std::size_t>(i)]) continue;
        const Node& n = nodes_[static_cast<std::size_t>(i)];
        if ((n.a >= 0 && needs[static_cast<std::size_t>(n.a)]) ||
            (n.b >= 0 && needs[static_cast<std::size_t>(n.b)]))
            needs[static_cast<std::size_t>(i)] = 1;
    }

    std::vector<int> grad(static_cast<std::size_t>(top) + 1, -1);
    grad[static_cast<std::size_t>(top)] = scalar(1.0).id;

    auto accum = [&](int id, Value contrib) {
        auto& slot = grad[static_cast<std::size_t>(id)];
        slot = slot < 0 ? contrib.id : add(Value{slot}, contrib).id;
    };

    for (int id = top; id >= 0; --id) {
        if (grad[static_cast<std::size_t>(id)] < 0 ||
            !needs[static_cast<std::size_t>(id)])
            continue;
        const Node n = nodes_[static_cast<std::size_t>(id)]; // copy: vector may grow
        const Value g{grad[static_cast<std::size_t>(id)]};
        const Value self{id};
        const Value a{n.a};
        const Value b{n.b};
        const bool na = n.a >= 0 && needs[static_cast<std::size_t>(n.a)];
        const bool nb = n.b >= 0 && needs[static_cast<std::size_t>(n.b)];

        switch (n.op) {
        case Op::Leaf:
            break;
        case Op::Add:
            if (na) accum(n.a, g);
            if (nb) accum(n.b, g);
            break;
        case Op::Sub:
            if (na) accum(n.a, g);
            if (nb) accum(n.b, scale(g, -1.0));
            break;
        case Op::Mul:
            if (na) accum(n.a, mul(g, b));
            if (nb) accum(n.b, mul(g, a));
            break;
        case Op::Div:
            if (na) accum(n.a, div(g, b));
            if (nb) accum(n.b, scale(mul(g, div(self, b)), -1.0));
            break;
        case Op::Scale:
            if (na) accum(n.a, scale(g, n.attr.x));
            break;
        case Op::Sum:
            if (na) accum(n.a, broadcast(g, nodes_[static_cast<std::size_t>(n.a)].shape));
            break;
        case Op::Broadcast:
            if (na) accum(n.a, sum(g));
            break;
        case Op::Sqrt:
            if (na) accum(n.a, div(g, scale(self, 2.0)));
            break;
        case Op::LogSigmoid:
            if (na) {
                // d/dx log sigma(x) = sigma(-x); locally constant per pass
                const auto& xv = *nodes_[static_cast<std::size_t>(n.a)].val;
                std::vector<double> s(xv.size());
                for (std::size_t i = 0; i < s.size(); ++i)
                    s[i] = std::exp(log_sigmoid_stable(-xv[i]));
                accum(n.a, mul(g, leaf(nodes_[static_cast<std::size_t>(n.a)].shape,
                                       std::move(s))));
            }
            break;
        case Op::LeakyRelu:
            if (na) {
                const auto& xv = *nodes_[static_cast<std::size_t>(n.a)].val;
                std::vector<double> m(xv.size());
                for (std::size_t i = 0; i < m.size(); ++i)
                    m[i] = xv[i] > 0.0 ? 1.0 : n.attr.x;
                accum(n.a, mul(g, leaf(nodes_[static_cast<std::size_t>(n.a)].shape,
                                       std::move(m))));
            }
            break;
        case Op::Conv3:
            if (na)
                accum(n.a, conv3_dx(g, b, n.attr.stride, n.attr.pad,
                                    spatial(nodes_[static_cast<std::size_t>(n.a)].shape)));
            if (nb)
                accum(n.b, conv3_dw(a, g, n.attr.stride, n.attr.pad, n.attr.k,
                                    n.shape[0]));
            break;
        case Op::Conv3Dx:
            if (na) accum(n.a, conv3(g, b, n.attr.stride, n.attr.pad));
            if (nb)
                accum(n.b, conv3_dw(g, a, n.attr.stride, n.attr.pad, n.attr.k,
                                    nodes_[static_cast<std::size_t>(n.b)].shape[0]));
            break;
        case Op::Conv3Dw:
            if (na)
                accum(n.a, conv3_dx(b, g, n.attr.stride, n.attr.pad,
                                    spatial(nodes_[static_cast<std::size_t>(n.a)].shape)));
            if (nb) accum(n.b, conv3(a, g, n.attr.stride, n.attr.pad));
            break;
        case Op::BiasAdd:
            if (na) accum(n.a, g);
            if (nb) accum(n.b, channel_sum(g));
            break;
        case Op::ChannelSum:
            if (na)
                accum(n.a, channel_broadcast(
                               g, spatial(nodes_[static_cast<std::size_t>(n.a)].shape)));
            break;
        case Op::ChannelBroadcast:
            if (na) accum(n.a, channel_sum(g));
            break;
        case Op::Up2:
            if (na) accum(n.a, upsample2_adj(g));
            break;
        case Op::Up2Adj:
            if (na) accum(n.a, upsample2(g));
            break;
        case Op::Matvec:
            if (na) accum(n.a, outer(g, b));
            if (nb) accum(n.b, matvec_t(a, g));
            break;
        case Op::MatvecT:
            if (na) accum(n.a, outer(b, g));
            if (nb) accum(n.b, matvec(a, g));
            break;
        case Op::Outer:
            if (na) accum(n.a, matvec(g, b));
            if (nb) accum(n.b, matvec_t(g, a));
            break;
        case Op::ConcatC: {
            const int ca = nodes_[static_cast<std::size_t>(n.a)].shape[0];
            if (na) accum(n.a, slice_c(g, 0, ca));
            if (nb) accum(n.b, slice_c(g, ca, n.shape[0]));
            break;
        }
        case Op::SliceC: {
            const int ctotal = nodes_[static_cast<std::size_t>(n.a)].shape[0];
            if (na) accum(n.a, pad_c(g, n.attr.i0, ctotal));
            break;
        }
        case Op::PadC:
            if (na)
                accum(n.a, slice_c(g, n.attr.i0,
                                   n.attr.i0 +
                                       nodes_[static_cast<std::size_t>(n.a)].shape[0]));
            break;
        case Op::Reshape:
            if (na) accum(n.a, reshape(g, nodes_[static_cast<std::size_t>(n.a)].shape));
            break;
        }
    }

    std::vector<Value> result;
    result.reserve(wrt.size());
    for (Value w : wrt) {
        const int gid = grad[static_cast<std::size_t>(w.id)];
        if (gid >= 0) {
            result.push_back(Value{gid});
        } else {
            result.push_back(leaf(Tensor::zeros(node(w).shape)));
        }
    }
    return result;
}

} // namespace f4d::ad
