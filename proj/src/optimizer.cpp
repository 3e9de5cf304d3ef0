#include "lgp/optimizer.hpp"

#include <cmath>

#include "lgp/error.hpp"

namespace lgp {

void adamw_step(const AdamWConfig& cfg, ParamMap& params, const ParamMap& grads, AdamWState& state) {
  for (const auto& [name, g] : grads) {
    auto it = params.find(name);
    if (it == params.end()) throw ShapeError("gradient for unknown parameter '" + name + "'");
    if (it->second.size() != g.size()) throw ShapeError("gradient shape mismatch for '" + name + "'");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);

  for (auto& [name, theta] : params) {
    auto git = grads.find(name);
    const Vec* g = git == grads.end() ? nullptr : &git->second;
    auto& m = state.first_moment[name];
    auto& v = state.second_moment[name];
    if (m.empty()) m.assign(theta.size(), 0.0);
    if (v.empty()) v.assign(theta.size(), 0.0);
    if (m.size() != theta.size() || v.size() != theta.size()) {
      throw ShapeError("optimizer moments do not match parameter '" + name + "'");
    }
    for (std::size_t k = 0; k < theta.size(); ++k) {
      const double gk = g ? (*g)[k] : 0.0;
      m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * gk;
      v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * gk * gk;
      const double m_hat = m[k] / bc1;
      const double v_hat = v[k] / bc2;
      theta[k] -= cfg.lr * (m_hat / (std::sqrt(v_hat) + cfg.eps)) + cfg.lr * cfg.weight_decay * theta[k];
    }
  }
}

}  // namespace lgp
