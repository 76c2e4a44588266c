#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hoigaze/nd/ndarray.hpp"

namespace hoigaze::nd {

/// A learnable array together with its accumulated gradient.
struct Param {
  Param(std::string name, NdArray value);

  std::string name;
  NdArray value;
  NdArray grad;

  void zero_grad() { grad.fill(0.0); }
};

/// Owns the parameters of one model. Addresses stay stable for the
/// lifetime of the set, including across moves.
class ParamSet {
 public:
  ParamSet() = default;
  ParamSet(ParamSet&&) noexcept = default;
  ParamSet& operator=(ParamSet&&) noexcept = default;
  ParamSet(const ParamSet&) = delete;
  ParamSet& operator=(const ParamSet&) = delete;

  /// Throws UsageError on a duplicate name.
  Param& add(std::string name, NdArray value);
  Param& get(const std::string& name);
  const Param& get(const std::string& name) const;
  Param* find(const std::string& name);

  std::size_t size() const noexcept { return params_.size(); }
  std::size_t scalar_count() const;
  void zero_grad();

  /// Parameters in insertion order.
  std::vector<Param*> all();
  std::vector<const Param*> all() const;

 private:
  std::vector<std::unique_ptr<Param>> params_;
};

class Graph;

/// Handle to a value recorded on a Graph.
struct Var {
  Graph* graph = nullptr;
  std::size_t id = 0;

  const NdArray& value() const;
  const Shape& shape() const { return value().shape(); }
};

/// Records a forward computation so gradients can be pulled back through it.
/// Nodes are appended in evaluation order, which is already topological.
class Graph {
 public:
  using BackwardFn = std::function<void(const NdArray& upstream)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// Input that never receives a gradient.
  Var constant(NdArray value);
  /// Input leaf whose gradient can be read with grad() after backward().
  Var variable(NdArray value);
  /// Leaf bound to a Param; backward() accumulates into param.grad.
  Var param(Param& p);

  const NdArray& value(Var v) const;
  bool requires_grad(Var v) const;

  /// Gradient of the last backward() pass with respect to v.
  NdArray grad(Var v) const;

  /// Seeds d(loss)/d(loss) = seed and propagates to every reachable leaf.
  /// Node gradients are recomputed on each call; Param gradients accumulate.
  void backward(Var loss, double seed = 1.0);

  /// Appends an op result. `fn` receives the upstream gradient and must
  /// push contributions to its inputs through accumulate().
  Var record(NdArray value, bool requires_grad, BackwardFn fn);

  /// Gradient buffer of `v`, zero-initialised on first use.
  NdArray& grad_buffer(Var v);

  std::size_t node_count() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    NdArray value;
    const NdArray* external = nullptr;
    Param* param = nullptr;
    NdArray grad;
    bool requires_grad = false;
    BackwardFn backward;
  };

  Var push(Node node);

  std::deque<Node> nodes_;
};

}  // namespace hoigaze::nd
