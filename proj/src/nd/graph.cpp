#include "hoigaze/nd/graph.hpp"

#include "hoigaze/errors.hpp"

namespace hoigaze::nd {

Param::Param(std::string name_, NdArray value_)
    : name(std::move(name_)), value(std::move(value_)), grad(value.shape()) {}

Param& ParamSet::add(std::string name, NdArray value) {
  if (find(name) != nullptr) throw UsageError("duplicate parameter name '" + name + "'");
  params_.push_back(std::make_unique<Param>(std::move(name), std::move(value)));
  return *params_.back();
}

Param* ParamSet::find(const std::string& name) {
  for (auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

Param& ParamSet::get(const std::string& name) {
  if (Param* p = find(name)) return *p;
  throw UsageError("unknown parameter '" + name + "'");
}

const Param& ParamSet::get(const std::string& name) const {
  return const_cast<ParamSet*>(this)->get(name);
}

std::size_t ParamSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

void ParamSet::zero_grad() {
  for (auto& p : params_) p->zero_grad();
}

std::vector<Param*> ParamSet::all() {
  std::vector<Param*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Param*> ParamSet::all() const {
  std::vector<const Param*> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

const NdArray& Var::value() const {
  if (graph == nullptr) throw UsageError("Var is not bound to a graph");
  return graph->value(*this);
}

Var Graph::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

Var Graph::constant(NdArray value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Graph::variable(NdArray value) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = true;
  return push(std::move(n));
}

Var Graph::param(Param& p) {
  Node n;
  n.external = &p.value;
  n.param = &p;
  n.requires_grad = true;
  return push(std::move(n));
}

const NdArray& Graph::value(Var v) const {
  const Node& n = nodes_.at(v.id);
  return n.external ? *n.external : n.value;
}

bool Graph::requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }

NdArray Graph::grad(Var v) const {
  const Node& n = nodes_.at(v.id);
  if (n.grad.empty()) return NdArray(value(v).shape());
  return n.grad;
}

Var Graph::record(NdArray value, bool requires_grad, BackwardFn fn) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.backward = std::move(fn);
  return push(std::move(n));
}

NdArray& Graph::grad_buffer(Var v) {
  Node& n = nodes_.at(v.id);
  if (n.grad.empty()) n.grad = NdArray(value(v).shape());
  return n.grad;
}

void Graph::backward(Var loss, double seed) {
  if (loss.graph != this) throw UsageError("backward: loss belongs to another graph");
  if (value(loss).size() != 1) {
    throw UsageError("backward requires a scalar loss, got shape " +
                     shape_string(value(loss).shape()));
  }
  for (Node& n : nodes_) n.grad = NdArray();
  if (!nodes_[loss.id].requires_grad) return;
  grad_buffer(loss).fill(seed);

  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.param != nullptr) {
      n.param->grad.add_scaled(n.grad);
    } else if (n.backward) {
      n.backward(n.grad);
    }
  }
}

}  // namespace hoigaze::nd
