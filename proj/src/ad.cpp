#include "shadow/ad.hpp"

#include <stdexcept>

namespace shadow::ad {

namespace {
thread_local Tape* g_active = nullptr;
}  // namespace

Tape::Tape() : previous_(g_active) {
  nodes_.reserve(4096);
  g_active = this;
}

Tape::~Tape() { g_active = previous_; }

Tape* Tape::active() { return g_active; }

std::int32_t Tape::push(const Node& n) {
  nodes_.push_back(n);
  return static_cast<std::int32_t>(nodes_.size() - 1);
}

Var Tape::variable(double value) { return {value, push(Node{})}; }

std::vector<double> Tape::gradient(std::span<const Var> outputs, std::span<const double> seeds) const {
  if (outputs.size() != seeds.size()) {
    throw std::invalid_argument("Tape::gradient: outputs and seeds differ in length");
  }
  std::vector<double> adj(nodes_.size(), 0.0);
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (outputs[i].id >= 0) adj[static_cast<std::size_t>(outputs[i].id)] += seeds[i];
  }
  for (std::size_t k = nodes_.size(); k-- > 0;) {
    const double a = adj[k];
    if (a == 0.0) continue;
    const Node& n = nodes_[k];
    if (n.lhs >= 0) adj[static_cast<std::size_t>(n.lhs)] += a * n.dlhs;
    if (n.rhs >= 0) adj[static_cast<std::size_t>(n.rhs)] += a * n.drhs;
  }
  return adj;
}

namespace detail {

Var unary(const Var& a, double value, double partial) {
  if (a.id < 0) return Var(value);
  Tape* t = Tape::active();
  return {value, t->push(Node{a.id, -1, partial, 0.0})};
}

Var binary(const Var& a, const Var& b, double value, double da, double db) {
  if (a.id < 0 && b.id < 0) return Var(value);
  Tape* t = Tape::active();
  return {value, t->push(Node{a.id, b.id, da, db})};
}

}  // namespace detail
}  // namespace shadow::ad
