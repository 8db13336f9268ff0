#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

/// Reverse-mode automatic differentiation over dense row-major tensors of
/// 64-bit reals. Every operation records its inputs and an exact backward
/// rule into a dynamic graph; backward() replays the graph in reverse
/// topological order. Reduction orders are fixed (row-major sequential) so
/// identical inputs give bitwise-identical values and gradients everywhere.
namespace seqcast {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_str(const Shape& shape);

struct Node {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;  // allocated lazily by backward()
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    // Accumulates d(loss)/d(parent) into each parent's grad buffer, reading
    // d(loss)/d(self) from this node's grad.
    std::function<void(Node&)> backward;
};

/// Value-semantics handle onto a graph node. Copies share the node.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor from_values(Shape shape, std::vector<double> values,
                              bool requires_grad = false);
    static Tensor scalar(double value);

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const { return node_->shape; }
    std::size_t size() const { return node_->data.size(); }
    std::size_t rank() const { return node_->shape.size(); }
    double* data() { return node_->data.data(); }
    const double* data() const { return node_->data.data(); }
    std::vector<double>& values() { return node_->data; }
    const std::vector<double>& values() const { return node_->data; }

    /// The sole element of a size-1 tensor.
    double item() const;

    bool requires_grad() const { return node_->requires_grad; }
    void set_requires_grad(bool on) { node_->requires_grad = on; }

    /// Gradient buffer; empty until backward() has touched this node.
    const std::vector<double>& grad() const { return node_->grad; }
    /// Allocates (if needed) and zero-fills the gradient buffer.
    void zero_grad();

    std::shared_ptr<Node> node() const { return node_; }

private:
    std::shared_ptr<Node> node_;
};

// ---- primitive operations ------------------------------------------------
// Binary elementwise ops broadcast per the standard rules (shapes aligned at
// the trailing axes, size-1 axes stretched).

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor addc(const Tensor& a, double c);
Tensor mulc(const Tensor& a, double c);
Tensor neg(const Tensor& a);

/// 2-D matrix product [m,k] x [k,n] -> [m,n].
Tensor matmul(const Tensor& a, const Tensor& b);
/// 2-D transpose.
Tensor transpose(const Tensor& a);
Tensor reshape(const Tensor& a, Shape shape);
/// Concatenates along `axis`; all other dimensions must agree.
Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);
/// Contiguous sub-range [start, start+len) along `axis`.
Tensor slice(const Tensor& a, std::size_t axis, std::size_t start, std::size_t len);
Tensor broadcast_to(const Tensor& a, const Shape& shape);

/// Full reduction to shape {1}.
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
/// Reduction over one axis; keepdims retains it as size 1.
Tensor sum(const Tensor& a, std::size_t axis, bool keepdims);
Tensor mean(const Tensor& a, std::size_t axis, bool keepdims);

Tensor relu(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
/// Elementwise a^c for constant real exponent c.
Tensor powc(const Tensor& a, double exponent);

/// Softmax along `axis`, computed with the max-subtraction trick.
Tensor softmax(const Tensor& a, std::size_t axis);

/// Normalizes along `axis` to zero mean and unit variance (+eps). Built as a
/// composite of recorded primitives, so its gradient needs no bespoke rule.
Tensor layer_norm(const Tensor& a, std::size_t axis, double eps = 1e-5);

/// Train mode: zeroes each element with probability `rate` and scales
/// survivors by 1/(1-rate); the mask is a pure function of `stream_seed`.
/// Eval mode (or rate 0): identity.
Tensor dropout(const Tensor& a, double rate, std::uint64_t stream_seed, bool train);

/// Where mask is nonzero the output takes `value` (and passes no gradient);
/// elsewhere it is the input. The mask length must equal the tensor size.
Tensor masked_fill(const Tensor& a, const std::vector<unsigned char>& mask, double value);

/// x @ w + b with b broadcast over rows; the workhorse of every model head.
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);

// ---- reverse pass and verification ---------------------------------------

/// Accumulates d(loss)/d(t) into every requires_grad tensor reachable from
/// `loss`. The loss must hold exactly one element.
void backward(const Tensor& loss);

/// Max relative error between backward() gradients of f at x and central
/// finite differences, err = |a-n| / max(1e-8, |a|+|n|). Differences under
/// 1e-9 count as exact: that is the resolution of the finite difference
/// itself (rounding noise ~ ulp(f)/(2*eps)), reached e.g. by parameters
/// whose true gradient is identically zero.
double grad_check(const std::function<Tensor(const Tensor&)>& f, Tensor x,
                  double eps = 1e-5);

/// Same check over an arbitrary parameter set; f() must re-run the forward
/// pass reading the current parameter values.
double grad_check_params(const std::function<Tensor()>& f,
                         const std::vector<Tensor>& params, double eps = 1e-5);

}  // namespace seqcast
