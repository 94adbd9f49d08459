#include "onestep.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"
#include "mdp.hpp"

namespace cgail {

void ScalarSystemParams::Validate() const {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw ValidationError("c: must be positive and finite");
  }
  if (!(expert_prob > 0.0 && expert_prob < 1.0)) {
    throw ValidationError("expert_prob: must lie in (0, 1)");
  }
  if (!std::isfinite(lambda) || !std::isfinite(k) || !std::isfinite(alpha)) {
    throw ValidationError("lambda, k, alpha: must be finite");
  }
}

Integrator ParseIntegrator(const std::string& name) {
  if (name == "rk4") return Integrator::kRk4;
  if (name == "euler") return Integrator::kEuler;
  throw ValidationError("integrator: expected 'rk4' or 'euler', got '" + name +
                        "'");
}

const char* IntegratorName(Integrator integrator) {
  return integrator == Integrator::kRk4 ? "rk4" : "euler";
}

Drift2 DriftUncontrolled(const ScalarSystemParams& p, double x, double y) {
  const double c = p.c;
  return {c * y / x + c * p.expert_prob / (x - 1.0),
          -c * std::log(x) - c * p.lambda * std::log(y) - c * p.lambda};
}

double ControllerU1(const ScalarSystemParams& p, double x) {
  return -p.k * (x - 0.5);
}

double ControllerU2(const ScalarSystemParams& p, double y) {
  const double c = p.c;
  const double e = p.expert_prob;
  return c * p.lambda * std::log(e) + c * std::log(0.5) + c * p.lambda +
         p.alpha * y / e - p.alpha;
}

Drift2 DriftControlled(const ScalarSystemParams& p, double x, double y) {
  const double c = p.c;
  const double e = p.expert_prob;
  // -c log x - c lam log y - c lam + u2, with the constants of u2 folded in.
  const double dy = -c * (std::log(x) - std::log(0.5)) -
                    c * p.lambda * (std::log(y) - std::log(e)) +
                    p.alpha * (y / e - 1.0);
  return {c * y / x + c * e / (x - 1.0) + ControllerU1(p, x), dy};
}

Drift2 Drift(const ScalarSystemParams& p, double x, double y, bool controlled) {
  return controlled ? DriftControlled(p, x, y) : DriftUncontrolled(p, x, y);
}

DriftJacobian DriftDerivatives(const ScalarSystemParams& p, double x, double y,
                               bool controlled) {
  const double c = p.c;
  const double e = p.expert_prob;
  DriftJacobian j{};
  j.xx = -c * y / (x * x) - c * e / ((x - 1.0) * (x - 1.0));
  j.xy = c / x;
  j.yx = -c / x;
  j.yy = -c * p.lambda / y;
  if (controlled) {
    j.xx -= p.k;
    j.yy += p.alpha / e;
  }
  return j;
}

double DistanceToDesired(const ScalarSystemParams& p, const ScalarState& s) {
  return std::hypot(s.x - 0.5, s.y - p.expert_prob);
}

namespace {

struct ClampResult {
  double x, y;
  bool clamped;
  bool capped;
};

ClampResult ClampState(double x, double y) {
  if (!std::isfinite(x) || !std::isfinite(y)) {
    throw Error(ErrorCode::kNonFinite,
                "integrate: non-finite state encountered; dt is too large");
  }
  ClampResult r{std::clamp(x, kDiscClamp, 1.0 - kDiscClamp),
                std::max(y, kYFloor), false, false};
  if (r.y > kYCap) {
    r.y = kYCap;
    r.capped = true;
  }
  r.clamped = r.x != x || r.y != y;
  return r;
}

}  // namespace

ScalarTrajectory Integrate(const ScalarSystemParams& p, const ScalarState& init,
                           bool controlled, double dt, long steps,
                           Integrator integrator, int record_every) {
  p.Validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ValidationError("dt: must be positive and finite");
  }
  if (steps < 0) throw ValidationError("steps: must be >= 0");
  if (record_every < 1) throw ValidationError("record_every: must be >= 1");

  ScalarTrajectory traj;
  traj.dt = dt;
  traj.stride = record_every;
  traj.integrator = integrator;
  traj.states.reserve(static_cast<std::size_t>(steps / record_every + 1));

  ClampResult start = ClampState(init.x, init.y);
  double x = start.x;
  double y = start.y;
  traj.states.push_back({x, y, init.t});

  for (long n = 1; n <= steps; ++n) {
    bool clamped = false;
    bool capped = false;
    // Stage points are clamped too so the vector field is never evaluated
    // outside its domain.
    auto eval = [&](double sx, double sy) {
      const ClampResult c = ClampState(sx, sy);
      clamped |= c.clamped;
      capped |= c.capped;
      return Drift(p, c.x, c.y, controlled);
    };
    double nx, ny;
    if (integrator == Integrator::kEuler) {
      const Drift2 k1 = Drift(p, x, y, controlled);
      nx = x + dt * k1.dx;
      ny = y + dt * k1.dy;
    } else {
      const Drift2 k1 = Drift(p, x, y, controlled);
      const Drift2 k2 = eval(x + 0.5 * dt * k1.dx, y + 0.5 * dt * k1.dy);
      const Drift2 k3 = eval(x + 0.5 * dt * k2.dx, y + 0.5 * dt * k2.dy);
      const Drift2 k4 = eval(x + dt * k3.dx, y + dt * k3.dy);
      nx = x + dt / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
      ny = y + dt / 6.0 * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy);
    }
    const ClampResult c = ClampState(nx, ny);
    clamped |= c.clamped;
    capped |= c.capped;
    x = c.x;
    y = c.y;
    if (clamped) ++traj.clamp_events;
    if (capped) ++traj.cap_hits;
    if (n % record_every == 0) {
      traj.states.push_back({x, y, init.t + static_cast<double>(n) * dt});
    }
  }
  traj.terminal = {x, y, init.t + static_cast<double>(steps) * dt};
  return traj;
}

namespace {

double Residual(const Drift2& d) { return std::max(std::abs(d.dx), std::abs(d.dy)); }

bool InDomain(double x, double y, double y_max) {
  return x > kDiscClamp && x < 1.0 - kDiscClamp && y > kYFloor && y <= y_max;
}

}  // namespace

std::vector<Equilibrium> FindEquilibria(const ScalarSystemParams& p,
                                        bool controlled, int grid,
                                        double y_max) {
  p.Validate();
  if (grid < 2) throw ValidationError("grid: must be >= 2");
  constexpr double kAccept = 1e-10;
  constexpr double kSame = 1e-7;

  std::vector<Equilibrium> roots;
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      double x = kDiscClamp + (i + 0.5) / grid * (1.0 - 2.0 * kDiscClamp);
      double y = kYFloor + (j + 0.5) / grid * (y_max - kYFloor);
      Drift2 f = Drift(p, x, y, controlled);
      double res = Residual(f);
      for (int iter = 0; iter < 100 && res > 1e-14; ++iter) {
        const DriftJacobian jac = DriftDerivatives(p, x, y, controlled);
        const double det = jac.xx * jac.yy - jac.xy * jac.yx;
        if (det == 0.0 || !std::isfinite(det)) break;
        const double sx = -(jac.yy * f.dx - jac.xy * f.dy) / det;
        const double sy = -(-jac.yx * f.dx + jac.xx * f.dy) / det;
        double step = 1.0;
        bool moved = false;
        for (int h = 0; h < 40; ++h, step *= 0.5) {
          const double tx = x + step * sx;
          const double ty = y + step * sy;
          if (!InDomain(tx, ty, y_max)) continue;
          const Drift2 tf = Drift(p, tx, ty, controlled);
          const double tres = Residual(tf);
          if (tres < res) {
            x = tx;
            y = ty;
            f = tf;
            res = tres;
            moved = true;
            break;
          }
        }
        if (!moved) break;
      }
      if (!(res < kAccept)) continue;
      auto same = std::find_if(roots.begin(), roots.end(), [&](const Equilibrium& r) {
        return std::hypot(r.x - x, r.y - y) < kSame;
      });
      if (same == roots.end()) {
        roots.push_back({x, y, res});
      } else if (res < same->residual) {
        *same = {x, y, res};
      }
    }
  }
  std::sort(roots.begin(), roots.end(), [](const Equilibrium& a, const Equilibrium& b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  return roots;
}

}  // namespace cgail
