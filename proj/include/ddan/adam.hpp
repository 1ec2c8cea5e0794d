#pragma once

#include "ddan/params.hpp"

namespace ddan {

// Adam with bias correction: m <- b1*m + (1-b1)*g, v <- b2*v + (1-b2)*g^2,
// theta <- theta - lr * mhat / (sqrt(vhat) + eps).
template <typename S>
class AdamState {
 public:
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void attach(const ParamSet<S>& ps) {
    m_.clear();
    v_.clear();
    for (const auto& p : ps.all()) {
      m_.push_back(Arr4<S>(p.value.dims()));
      v_.push_back(Arr4<S>(p.value.dims()));
    }
    t_ = 0;
  }

  bool attached() const { return !m_.empty(); }
  i64 step_count() const { return t_; }

  void step(ParamSet<S>& ps, double lr) {
    if (m_.size() != ps.size()) throw std::invalid_argument("adam: state/param count mismatch");
    if (t_ >= (i64(1) << 52)) throw std::runtime_error("adam: step counter overflow");
    ++t_;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
    for (size_t k = 0; k < m_.size(); ++k) {
      auto& p = ps.all()[k];
      if (!p.trainable) continue;
      if (!p.value.has_grad()) continue;  // zero gradient: moments decay toward zero anyway
      const Arr4<S>& g = p.value.grad();
      if (!g.same_dims(m_[k]))
        throw std::invalid_argument("adam: gradient dims mismatch for " + p.name);
      Arr4<S>& m = m_[k];
      Arr4<S>& v = v_[k];
      Arr4<S>& theta = p.value.value_mut();
      for (i64 i = 0; i < g.numel(); ++i) {
        const double gi = static_cast<double>(g.data[i]);
        const double mi = beta1 * static_cast<double>(m.data[i]) + (1.0 - beta1) * gi;
        const double vi = beta2 * static_cast<double>(v.data[i]) + (1.0 - beta2) * gi * gi;
        m.data[i] = static_cast<S>(mi);
        v.data[i] = static_cast<S>(vi);
        const double mhat = mi / c1;
        const double vhat = vi / c2;
        theta.data[i] =
            static_cast<S>(static_cast<double>(theta.data[i]) - lr * mhat / (std::sqrt(vhat) + eps));
      }
    }
  }

  // Moments ride along in checkpoints under a reserved prefix.
  void export_entries(const ParamSet<S>& ps, std::vector<CkptEntry>& out) const {
    for (size_t k = 0; k < m_.size(); ++k) {
      const auto& p = ps.all()[k];
      auto dump = [&](const char* tag, const Arr4<S>& a) {
        CkptEntry e;
        e.name = std::string("__adam__.") + tag + "." + p.name;
        e.dims = a.dims;
        e.data.resize(static_cast<size_t>(a.numel()));
        for (i64 i = 0; i < a.numel(); ++i) e.data[i] = static_cast<float>(a.data[i]);
        out.push_back(std::move(e));
      };
      dump("m", m_[k]);
      dump("v", v_[k]);
    }
    CkptEntry t;
    t.name = "__adam__.t";
    t.dims = {1, 1, 1, 1};
    t.data = {static_cast<float>(t_)};
    out.push_back(std::move(t));
  }

  void import_entries(const ParamSet<S>& ps, const std::vector<CkptEntry>& entries) {
    attach(ps);
    std::unordered_map<std::string, const CkptEntry*> by_name;
    for (const auto& e : entries) by_name[e.name] = &e;
    auto fetch = [&](const std::string& name) -> const CkptEntry& {
      auto it = by_name.find(name);
      if (it == by_name.end())
        throw std::runtime_error("checkpoint has no optimizer entry " + name);
      return *it->second;
    };
    for (size_t k = 0; k < m_.size(); ++k) {
      const auto& p = ps.all()[k];
      auto restore = [&](const char* tag, Arr4<S>& a) {
        const CkptEntry& e = fetch(std::string("__adam__.") + tag + "." + p.name);
        if (e.dims != a.dims)
          throw std::runtime_error("optimizer entry dims mismatch for " + p.name);
        for (i64 i = 0; i < a.numel(); ++i) a.data[i] = static_cast<S>(e.data[i]);
      };
      restore("m", m_[k]);
      restore("v", v_[k]);
    }
    t_ = static_cast<i64>(fetch("__adam__.t").data.at(0));
  }

 private:
  std::vector<Arr4<S>> m_, v_;
  i64 t_ = 0;
};

}  // namespace ddan
