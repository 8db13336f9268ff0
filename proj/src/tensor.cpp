#include "seqcast/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>
#include <utility>

#include "seqcast/core/rng.hpp"
#include "seqcast/kernels.hpp"

namespace seqcast {

std::size_t shape_size(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::string shape_str(const Shape& shape) {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + ")";
}

namespace {

std::shared_ptr<Node> make_node(Shape shape) {
    for (std::size_t d : shape) {
        if (d == 0) throw std::invalid_argument("tensor dimension must be positive, got shape " + shape_str(shape));
    }
    auto node = std::make_shared<Node>();
    node->data.resize(shape_size(shape));
    node->shape = std::move(shape);
    return node;
}

void ensure_grad(Node& n) {
    if (n.grad.size() != n.data.size()) n.grad.assign(n.data.size(), 0.0);
}

/// Row-major strides; stride of the last axis is 1.
std::vector<std::size_t> row_strides(const Shape& s) {
    std::vector<std::size_t> st(s.size(), 1);
    for (std::size_t i = s.size(); i-- > 1;) st[i - 1] = st[i] * s[i];
    return st;
}

Shape broadcast_shape(const Shape& a, const Shape& b) {
    const std::size_t rank = std::max(a.size(), b.size());
    Shape out(rank, 1);
    for (std::size_t i = 0; i < rank; ++i) {
        std::size_t da = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
        std::size_t db = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
        if (da != db && da != 1 && db != 1) {
            throw std::invalid_argument("shapes not broadcastable: " + shape_str(a) + " vs " + shape_str(b));
        }
        out[i] = std::max(da, db);
    }
    return out;
}

/// Strides of `in` as seen through `out` (0 on stretched axes), aligned at
/// the trailing axes per the broadcasting rules.
std::vector<std::size_t> bcast_strides(const Shape& in, const Shape& out) {
    auto in_st = row_strides(in);
    std::vector<std::size_t> st(out.size(), 0);
    const std::size_t off = out.size() - in.size();
    for (std::size_t i = 0; i < in.size(); ++i) {
        if (in[i] == out[off + i]) {
            st[off + i] = in_st[i];
        } else if (in[i] == 1) {
            st[off + i] = 0;
        } else {
            throw std::invalid_argument("cannot broadcast " + shape_str(in) + " to " + shape_str(out));
        }
    }
    return st;
}

inline std::size_t map_index(std::size_t flat, const std::vector<std::size_t>& out_st,
                             const std::vector<std::size_t>& in_st) {
    std::size_t idx = 0;
    for (std::size_t d = 0; d < out_st.size(); ++d) {
        idx += (flat / out_st[d]) * in_st[d];
        flat %= out_st[d];
    }
    return idx;
}

void check_defined(const Tensor& t, const char* op) {
    if (!t.defined()) throw std::invalid_argument(std::string(op) + ": undefined tensor");
}

enum class BinKind { Add, Sub, Mul };

Tensor binary(const Tensor& ta, const Tensor& tb, BinKind kind) {
    check_defined(ta, "binary op");
    check_defined(tb, "binary op");
    auto a = ta.node();
    auto b = tb.node();
    Shape out_shape = broadcast_shape(a->shape, b->shape);
    auto n = make_node(out_shape);
    const std::size_t count = n->data.size();
    const bool a_same = a->shape == out_shape;
    const bool b_same = b->shape == out_shape;

    if (a_same && b_same) {
        switch (kind) {
            case BinKind::Add: kernels::add(a->data.data(), b->data.data(), n->data.data(), count); break;
            case BinKind::Sub: kernels::sub(a->data.data(), b->data.data(), n->data.data(), count); break;
            case BinKind::Mul: kernels::mul(a->data.data(), b->data.data(), n->data.data(), count); break;
        }
    } else {
        auto os = row_strides(out_shape);
        auto as = bcast_strides(a->shape, out_shape);
        auto bs = bcast_strides(b->shape, out_shape);
        for (std::size_t i = 0; i < count; ++i) {
            const double av = a->data[map_index(i, os, as)];
            const double bv = b->data[map_index(i, os, bs)];
            switch (kind) {
                case BinKind::Add: n->data[i] = av + bv; break;
                case BinKind::Sub: n->data[i] = av - bv; break;
                case BinKind::Mul: n->data[i] = av * bv; break;
            }
        }
    }

    n->requires_grad = a->requires_grad || b->requires_grad;
    n->parents = {a, b};
    if (n->requires_grad) {
        auto os = row_strides(out_shape);
        auto as = bcast_strides(a->shape, out_shape);
        auto bs = bcast_strides(b->shape, out_shape);
        n->backward = [a, b, kind, os, as, bs, a_same, b_same](Node& self) {
            const std::size_t count = self.data.size();
            if (a->requires_grad) {
                ensure_grad(*a);
                for (std::size_t i = 0; i < count; ++i) {
                    const std::size_t ai = a_same ? i : map_index(i, os, as);
                    double g = self.grad[i];
                    if (kind == BinKind::Mul) g *= b->data[b_same ? i : map_index(i, os, bs)];
                    a->grad[ai] += g;
                }
            }
            if (b->requires_grad) {
                ensure_grad(*b);
                for (std::size_t i = 0; i < count; ++i) {
                    const std::size_t bi = b_same ? i : map_index(i, os, bs);
                    double g = self.grad[i];
                    if (kind == BinKind::Sub) g = -g;
                    if (kind == BinKind::Mul) g = self.grad[i] * a->data[a_same ? i : map_index(i, os, as)];
                    b->grad[bi] += g;
                }
            }
        };
    }
    return Tensor(n);
}

/// Elementwise op with derivative df(x, y) evaluated from the input and
/// output values.
template <class F, class DF>
Tensor unary(const Tensor& ta, F f, DF df, const char* name) {
    check_defined(ta, name);
    auto a = ta.node();
    auto n = make_node(a->shape);
    const std::size_t count = n->data.size();
    for (std::size_t i = 0; i < count; ++i) n->data[i] = f(a->data[i]);
    n->requires_grad = a->requires_grad;
    n->parents = {a};
    if (n->requires_grad) {
        n->backward = [a, df](Node& self) {
            ensure_grad(*a);
            for (std::size_t i = 0; i < self.data.size(); ++i) {
                a->grad[i] += self.grad[i] * df(a->data[i], self.data[i]);
            }
        };
    }
    return Tensor(n);
}

/// The [outer, axis, inner] decomposition every axis-wise op uses.
struct AxisDims {
    std::size_t outer, n, inner;
};

AxisDims axis_dims(const Shape& shape, std::size_t axis, const char* op) {
    if (axis >= shape.size()) {
        throw std::invalid_argument(std::string(op) + ": axis " + std::to_string(axis) +
                                    " out of range for shape " + shape_str(shape));
    }
    AxisDims d{1, shape[axis], 1};
    for (std::size_t i = 0; i < axis; ++i) d.outer *= shape[i];
    for (std::size_t i = axis + 1; i < shape.size(); ++i) d.inner *= shape[i];
    return d;
}

Tensor reduce_axis(const Tensor& ta, std::size_t axis, bool keepdims, bool take_mean, const char* name) {
    check_defined(ta, name);
    auto a = ta.node();
    const AxisDims d = axis_dims(a->shape, axis, name);
    Shape out_shape = a->shape;
    if (keepdims) {
        out_shape[axis] = 1;
    } else {
        out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(axis));
        if (out_shape.empty()) out_shape = {1};
    }
    auto n = make_node(out_shape);
    const double scale = take_mean ? 1.0 / static_cast<double>(d.n) : 1.0;
    for (std::size_t o = 0; o < d.outer; ++o) {
        for (std::size_t i = 0; i < d.inner; ++i) {
            double acc = 0.0;
            for (std::size_t k = 0; k < d.n; ++k) acc += a->data[(o * d.n + k) * d.inner + i];
            n->data[o * d.inner + i] = acc * scale;
        }
    }
    n->requires_grad = a->requires_grad;
    n->parents = {a};
    if (n->requires_grad) {
        n->backward = [a, d, scale](Node& self) {
            ensure_grad(*a);
            for (std::size_t o = 0; o < d.outer; ++o) {
                for (std::size_t i = 0; i < d.inner; ++i) {
                    const double g = self.grad[o * d.inner + i] * scale;
                    for (std::size_t k = 0; k < d.n; ++k) a->grad[(o * d.n + k) * d.inner + i] += g;
                }
            }
        };
    }
    return Tensor(n);
}

}  // namespace

// ---- Tensor --------------------------------------------------------------

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    auto n = make_node(std::move(shape));
    n->requires_grad = requires_grad;
    return Tensor(n);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    auto n = make_node(std::move(shape));
    std::fill(n->data.begin(), n->data.end(), value);
    n->requires_grad = requires_grad;
    return Tensor(n);
}

Tensor Tensor::from_values(Shape shape, std::vector<double> values, bool requires_grad) {
    auto n = make_node(std::move(shape));
    if (values.size() != n->data.size()) {
        throw std::invalid_argument("value count " + std::to_string(values.size()) +
                                    " does not match shape " + shape_str(n->shape));
    }
    n->data = std::move(values);
    n->requires_grad = requires_grad;
    return Tensor(n);
}

Tensor Tensor::scalar(double value) { return from_values({1}, {value}); }

double Tensor::item() const {
    if (!node_ || node_->data.size() != 1) {
        throw std::invalid_argument("item() requires a single-element tensor");
    }
    return node_->data[0];
}

void Tensor::zero_grad() { node_->grad.assign(node_->data.size(), 0.0); }

// ---- primitives ------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) { return binary(a, b, BinKind::Add); }
Tensor sub(const Tensor& a, const Tensor& b) { return binary(a, b, BinKind::Sub); }
Tensor mul(const Tensor& a, const Tensor& b) { return binary(a, b, BinKind::Mul); }

Tensor addc(const Tensor& a, double c) {
    return unary(a, [c](double x) { return x + c; }, [](double, double) { return 1.0; }, "addc");
}

Tensor mulc(const Tensor& a, double c) {
    return unary(a, [c](double x) { return x * c; }, [c](double, double) { return c; }, "mulc");
}

Tensor neg(const Tensor& a) { return mulc(a, -1.0); }

Tensor matmul(const Tensor& ta, const Tensor& tb) {
    check_defined(ta, "matmul");
    check_defined(tb, "matmul");
    auto a = ta.node();
    auto b = tb.node();
    if (a->shape.size() != 2 || b->shape.size() != 2 || a->shape[1] != b->shape[0]) {
        throw std::invalid_argument("matmul shape mismatch: " + shape_str(a->shape) + " x " + shape_str(b->shape));
    }
    const std::size_t m = a->shape[0], k = a->shape[1], n_cols = b->shape[1];
    auto n = make_node({m, n_cols});
    kernels::matmul(a->data.data(), b->data.data(), n->data.data(), m, k, n_cols);
    n->requires_grad = a->requires_grad || b->requires_grad;
    n->parents = {a, b};
    if (n->requires_grad) {
        n->backward = [a, b, m, k, n_cols](Node& self) {
            if (a->requires_grad) {
                ensure_grad(*a);
                std::vector<double> tmp(m * k);
                // dA = G * B^T : [m,n] x [k,n]^T -> [m,k]
                kernels::matmul_nt(self.grad.data(), b->data.data(), tmp.data(), m, n_cols, k);
                kernels::axpy(1.0, tmp.data(), a->grad.data(), m * k);
            }
            if (b->requires_grad) {
                ensure_grad(*b);
                std::vector<double> tmp(k * n_cols);
                // dB = A^T * G : [m,k]^T x [m,n] -> [k,n]
                kernels::matmul_tn(a->data.data(), self.grad.data(), tmp.data(), m, k, n_cols);
                kernels::axpy(1.0, tmp.data(), b->grad.data(), k * n_cols);
            }
        };
    }
    return Tensor(n);
}

Tensor transpose(const Tensor& ta) {
    check_defined(ta, "transpose");
    auto a = ta.node();
    if (a->shape.size() != 2) {
        throw std::invalid_argument("transpose requires a 2-D tensor, got " + shape_str(a->shape));
    }
    const std::size_t r = a->shape[0], c = a->shape[1];
    auto n = make_node({c, r});
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) n->data[j * r + i] = a->data[i * c + j];
    }
    n->requires_grad = a->requires_grad;
    n->parents = {a};
    if (n->requires_grad) {
        n->backward = [a, r, c](Node& self) {
            ensure_grad(*a);
            for (std::size_t i = 0; i < r; ++i) {
                for (std::size_t j = 0; j < c; ++j) a->grad[i * c + j] += self.grad[j * r + i];
            }
        };
    }
    return Tensor(n);
}

Tensor reshape(const Tensor& ta, Shape shape) {
    check_defined(ta, "reshape");
    auto a = ta.node();
    if (shape_size(shape) != a->data.size()) {
        throw std::invalid_argument("reshape " + shape_str(a->shape) + " -> " + shape_str(shape) +
                                    " changes the element count");
    }
    auto n = make_node(std::move(shape));
    n->data = a->data;
    n->requires_grad = a->requires_grad;
    n->parents = {a};
    if (n->requires_grad) {
        n->backward = [a](Node& self) {
            ensure_grad(*a);
            kernels::axpy(1.0, self.grad.data(), a->grad.data(), self.grad.size());
        };
    }
    return Tensor(n);
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
    if (parts.empty()) throw std::invalid_argument("concat of zero tensors");
    for (const auto& p : parts) check_defined(p, "concat");
    const Shape& first = parts[0].shape();
    if (axis >= first.size()) {
        throw std::invalid_argument("concat axis " + std::to_string(axis) + " out of range for " + shape_str(first));
    }
    Shape out_shape = first;
    std::size_t axis_total = 0;
    for (const auto& p : parts) {
        const Shape& s = p.shape();
        if (s.size() != first.size()) throw std::invalid_argument("concat rank mismatch");
        for (std::size_t d = 0; d < s.size(); ++d) {
            if (d != axis && s[d] != first[d]) {
                throw std::invalid_argument("concat shape mismatch: " + shape_str(first) + " vs " + shape_str(s));
            }
        }
        axis_total += s[axis];
    }
    out_shape[axis] = axis_total;
    auto n = make_node(out_shape);
    const AxisDims d = axis_dims(out_shape, axis, "concat");

    std::vector<std::shared_ptr<Node>> srcs;
    std::vector<std::size_t> lens;
    srcs.reserve(parts.size());
    for (const auto& p : parts) {
        srcs.push_back(p.node());
        lens.push_back(p.shape()[axis]);
    }
    std::size_t offset = 0;
    for (std::size_t pi = 0; pi < srcs.size(); ++pi) {
        const auto& src = srcs[pi]->data;
        const std::size_t len = lens[pi];
        for (std::size_t o = 0; o < d.outer; ++o) {
            std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(o * len * d.inner), len * d.inner,
                        n->data.begin() + static_cast<std::ptrdiff_t>((o * d.n + offset) * d.inner));
        }
        offset += len;
    }

    bool any_grad = false;
    for (const auto& s : srcs) any_grad = any_grad || s->requires_grad;
    n->requires_grad = any_grad;
    n->parents = srcs;
    if (any_grad) {
        n->backward = [srcs, lens, d](Node& self) {
            std::size_t offset = 0;
            for (std::size_t pi = 0; pi < srcs.size(); ++pi) {
                const std::size_t len = lens[pi];
                if (srcs[pi]->requires_grad) {
                    ensure_grad(*srcs[pi]);
                    auto& g = srcs[pi]->grad;
                    for (std::size_t o = 0; o < d.outer; ++o) {
                        const double* src_g = self.grad.data() + (o * d.n + offset) * d.inner;
                        double* dst = g.data() + o * len * d.inner;
                        for (std::size_t j = 0; j < len * d.inner; ++j) dst[j] += src_g[j];
                    }
                }
                offset += len;
            }
        };
    }
    return Tensor(n);
}

Tensor slice(const Tensor& ta, std::size_t axis, std::size_t start, std::size_t len) {
    check_defined(ta, "slice");
    auto a = ta.node();
    const AxisDims d = axis_dims(a->shape, axis, "slice");
    if (len == 0 || start + len > d.n) {
        throw std::invalid_argument("slice [" + std::to_string(start) + "," + std::to_string(start + len) +
                                    ") out of range for axis of size " + std::to_string(d.n));
    }
    Shape out_shape = a->shape;
    out_shape[axis] = len;
    auto n = make_node(out_shape);
    for (std::size_t o = 0; o < d.outer; ++o) {
        std::copy_n(a->data.begin() + static_cast<std::ptrdiff_t>((o * d.n + start) * d.inner), len * d.inner,
                    n->data.begin() + static_cast<std::ptrdiff_t>(o * len * d.inner));
    }
    n->requires_grad = a->requires_grad;
    n->parents = {a};
    if (n->requires_grad) {
        n->backward = [a, d, start, len](Node& self) {
            ensure_grad(*a);
            for (std::size_t o = 0; o < d.outer; ++o) {
                const double* g = self.grad.data() + o * len * d.inner;
                double* dst = a->grad.data() + (o * d.n + start) * d.inner;
                for (std::size_t j = 0; j < len * d.inner; ++j) dst[j] += g[j];
            }
        };
    }
    return Tensor(n);
}

Tensor broadcast_to(const Tensor& ta, const Shape& shape) {
    check_defined(ta, "broadcast_to");
    auto a = ta.node();
    if (a->shape == shape) return ta;
    auto n = make_node(shape);
    auto os = row_strides(shape);
    auto as = bcast_strides(a->shape, shape);  // validates compatibility
    const std::size_t count = n->data.size();
    for (std::size_t i = 0; i < count; ++i) n->data[i] = a->data[map_index(i, os, as)];
    n->requires_grad = a->requires_grad;
    n->parents = {a};
    if (n->requires_grad) {
        n->backward = [a, os, as](Node& self) {
            ensure_grad(*a);
            for (std::size_t i = 0; i < self.data.size(); ++i) {
                a->grad[map_index(i, os, as)] += self.grad[i];
            }
        };
    }
    return Tensor(n);
}

Tensor sum(const Tensor& ta) {
    check_defined(ta, "sum");
    auto a = ta.node();
    auto n = make_node({1});
    double acc = 0.0;
    for (double v : a->data) acc += v;
    n->data[0] = acc;
    n->requires_grad = a->requires_grad;
    n->parents = {a};
    if (n->requires_grad) {
        n->backward = [a](Node& self) {
            ensure_grad(*a);
            const double g = self.grad[0];
            for (double& v : a->grad) v += g;
        };
    }
    return Tensor(n);
}

Tensor mean(const Tensor& ta) {
    Tensor s = sum(ta);
    return mulc(s, 1.0 / static_cast<double>(ta.size()));
}

Tensor sum(const Tensor& a, std::size_t axis, bool keepdims) {
    return reduce_axis(a, axis, keepdims, false, "sum");
}

Tensor mean(const Tensor& a, std::size_t axis, bool keepdims) {
    return reduce_axis(a, axis, keepdims, true, "mean");
}

Tensor relu(const Tensor& a) {
    return unary(a, [](double x) { return x > 0.0 ? x : 0.0; },
                 [](double x, double) { return x > 0.0 ? 1.0 : 0.0; }, "relu");
}

Tensor tanh(const Tensor& a) {
    return unary(a, [](double x) { return std::tanh(x); },
                 [](double, double y) { return 1.0 - y * y; }, "tanh");
}

Tensor sigmoid(const Tensor& a) {
    return unary(a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
                 [](double, double y) { return y * (1.0 - y); }, "sigmoid");
}

Tensor exp(const Tensor& a) {
    return unary(a, [](double x) { return std::exp(x); },
                 [](double, double y) { return y; }, "exp");
}

Tensor log(const Tensor& a) {
    return unary(a, [](double x) { return std::log(x); },
                 [](double x, double) { return 1.0 / x; }, "log");
}

Tensor powc(const Tensor& a, double exponent) {
    return unary(a, [exponent](double x) { return std::pow(x, exponent); },
                 [exponent](double x, double) { return exponent * std::pow(x, exponent - 1.0); }, "powc");
}

Tensor softmax(const Tensor& ta, std::size_t axis) {
    check_defined(ta, "softmax");
    auto a = ta.node();
    const AxisDims d = axis_dims(a->shape, axis, "softmax");
    auto n = make_node(a->shape);
    for (std::size_t o = 0; o < d.outer; ++o) {
        for (std::size_t i = 0; i < d.inner; ++i) {
            double hi = a->data[o * d.n * d.inner + i];
            for (std::size_t k = 1; k < d.n; ++k) hi = std::max(hi, a->data[(o * d.n + k) * d.inner + i]);
            double total = 0.0;
            for (std::size_t k = 0; k < d.n; ++k) {
                const std::size_t idx = (o * d.n + k) * d.inner + i;
                n->data[idx] = std::exp(a->data[idx] - hi);
                total += n->data[idx];
            }
            const double inv = 1.0 / total;
            for (std::size_t k = 0; k < d.n; ++k) n->data[(o * d.n + k) * d.inner + i] *= inv;
        }
    }
    n->requires_grad = a->requires_grad;
    n->parents = {a};
    if (n->requires_grad) {
        n->backward = [a, d](Node& self) {
            ensure_grad(*a);
            for (std::size_t o = 0; o < d.outer; ++o) {
                for (std::size_t i = 0; i < d.inner; ++i) {
                    double dot = 0.0;
                    for (std::size_t k = 0; k < d.n; ++k) {
                        const std::size_t idx = (o * d.n + k) * d.inner + i;
                        dot += self.grad[idx] * self.data[idx];
                    }
                    for (std::size_t k = 0; k < d.n; ++k) {
                        const std::size_t idx = (o * d.n + k) * d.inner + i;
                        a->grad[idx] += self.data[idx] * (self.grad[idx] - dot);
                    }
                }
            }
        };
    }
    return Tensor(n);
}

Tensor layer_norm(const Tensor& a, std::size_t axis, double eps) {
    // composite: (x - mean) / sqrt(var + eps), all recorded primitives
    Tensor mu = mean(a, axis, true);
    Tensor centred = sub(a, mu);
    Tensor var = mean(mul(centred, centred), axis, true);
    Tensor inv_std = powc(addc(var, eps), -0.5);
    return mul(centred, inv_std);
}

Tensor dropout(const Tensor& ta, double rate, std::uint64_t stream_seed, bool train) {
    check_defined(ta, "dropout");
    if (rate < 0.0 || rate >= 1.0) {
        throw std::invalid_argument("dropout rate must lie in [0,1), got " + std::to_string(rate));
    }
    if (!train || rate == 0.0) return ta;
    auto a = ta.node();
    auto n = make_node(a->shape);
    auto mask = std::make_shared<std::vector<double>>(a->data.size());
    core::Rng rng(stream_seed);
    const double keep_scale = 1.0 / (1.0 - rate);
    for (std::size_t i = 0; i < mask->size(); ++i) {
        (*mask)[i] = rng.uniform01() < rate ? 0.0 : keep_scale;
        n->data[i] = a->data[i] * (*mask)[i];
    }
    n->requires_grad = a->requires_grad;
    n->parents = {a};
    if (n->requires_grad) {
        n->backward = [a, mask](Node& self) {
            ensure_grad(*a);
            for (std::size_t i = 0; i < self.data.size(); ++i) a->grad[i] += self.grad[i] * (*mask)[i];
        };
    }
    return Tensor(n);
}

Tensor masked_fill(const Tensor& ta, const std::vector<unsigned char>& mask, double value) {
    check_defined(ta, "masked_fill");
    auto a = ta.node();
    if (mask.size() != a->data.size()) {
        throw std::invalid_argument("masked_fill mask size " + std::to_string(mask.size()) +
                                    " does not match tensor " + shape_str(a->shape));
    }
    auto n = make_node(a->shape);
    for (std::size_t i = 0; i < mask.size(); ++i) n->data[i] = mask[i] ? value : a->data[i];
    n->requires_grad = a->requires_grad;
    n->parents = {a};
    if (n->requires_grad) {
        auto mask_copy = std::make_shared<std::vector<unsigned char>>(mask);
        n->backward = [a, mask_copy](Node& self) {
            ensure_grad(*a);
            for (std::size_t i = 0; i < self.data.size(); ++i) {
                if (!(*mask_copy)[i]) a->grad[i] += self.grad[i];
            }
        };
    }
    return Tensor(n);
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
    return add(matmul(x, w), b);
}

// ---- reverse pass ----------------------------------------------------------

void backward(const Tensor& loss) {
    if (!loss.defined()) throw std::invalid_argument("backward: undefined tensor");
    auto root = loss.node();
    if (root->data.size() != 1) {
        throw std::invalid_argument("backward requires a scalar loss, got shape " + shape_str(root->shape));
    }
    if (!root->requires_grad) return;

    // Iterative post-order DFS over the requires_grad subgraph: parents are
    // recorded before their consumers, so walking `order` backwards visits
    // every node after all nodes that consume it.
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(root.get(), 0);
    visited.insert(root.get());
    while (!stack.empty()) {
        Node* n = stack.back().first;
        std::size_t& idx = stack.back().second;
        if (idx < n->parents.size()) {
            Node* p = n->parents[idx].get();
            ++idx;
            if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
            continue;
        }
        order.push_back(n);
        stack.pop_back();
    }

    ensure_grad(*root);
    root->grad[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        ensure_grad(*n);
        if (n->backward) n->backward(*n);
    }
}

namespace {

/// Relative error of analytic vs central-difference gradients. Differences
/// below kGradAtol count as exact: the finite difference itself carries
/// rounding noise of about ulp(f)/(2*eps), so below that resolution the two
/// values agree as well as they can. Without the floor, a parameter whose
/// true gradient is exactly zero (e.g. an attention key bias, which cancels
/// inside softmax) would read its own FD noise as relative error ~1.
constexpr double kGradAtol = 1e-9;

double grad_rel_err(double analytic, double numeric) {
    const double diff = std::fabs(analytic - numeric);
    if (diff < kGradAtol) return 0.0;
    return diff / std::max(1e-8, std::fabs(analytic) + std::fabs(numeric));
}

}  // namespace

double grad_check(const std::function<Tensor(const Tensor&)>& f, Tensor x, double eps) {
    x.set_requires_grad(true);
    x.zero_grad();
    backward(f(x));
    const std::vector<double> analytic = x.grad();

    double max_err = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = x.data()[i];
        x.data()[i] = orig + eps;
        const double fp = f(x).item();
        x.data()[i] = orig - eps;
        const double fm = f(x).item();
        x.data()[i] = orig;
        const double numeric = (fp - fm) / (2.0 * eps);
        max_err = std::max(max_err, grad_rel_err(analytic[i], numeric));
    }
    return max_err;
}

double grad_check_params(const std::function<Tensor()>& f,
                         const std::vector<Tensor>& params, double eps) {
    for (const auto& p : params) {
        const_cast<Tensor&>(p).set_requires_grad(true);
        const_cast<Tensor&>(p).zero_grad();
    }
    backward(f());
    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (const auto& p : params) {
        analytic.push_back(p.grad().empty() ? std::vector<double>(p.size(), 0.0) : p.grad());
    }

    double max_err = 0.0;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Tensor p = params[pi];
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double orig = p.data()[i];
            p.data()[i] = orig + eps;
            const double fp = f().item();
            p.data()[i] = orig - eps;
            const double fm = f().item();
            p.data()[i] = orig;
            const double numeric = (fp - fm) / (2.0 * eps);
            max_err = std::max(max_err, grad_rel_err(analytic[pi][i], numeric));
        }
    }
    return max_err;
}

}  // namespace seqcast
