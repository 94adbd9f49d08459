#pragma once

#include <string>
#include <vector>

namespace cgail {

inline constexpr double kYFloor = 1e-10;  // epsilon_y
inline constexpr double kYCap = 10.0;

// Constants of one decoupled (s, a) pair: c = p(s), E = pi_E(a|s), and the
// controller gains k (discriminator) and alpha (policy).
struct ScalarSystemParams {
  double c = 1.0;
  double lambda = 1.0;
  double expert_prob = 0.5;
  double k = 0.0;
  double alpha = 0.0;

  void Validate() const;
};

// x = D_t(s, a), y = pi_t(a|s).
struct ScalarState {
  double x = 0.5;
  double y = 0.5;
  double t = 0.0;
};

struct Drift2 {
  double dx = 0.0;
  double dy = 0.0;
};

enum class Integrator { kEuler, kRk4 };

Integrator ParseIntegrator(const std::string& name);
const char* IntegratorName(Integrator integrator);

struct ScalarTrajectory {
  std::vector<ScalarState> states;
  // Always the state after the last step, recorded or not.
  ScalarState terminal;
  double dt = 0.0;
  // Recorded states are every `stride` integration steps apart.
  int stride = 1;
  Integrator integrator = Integrator::kRk4;
  // Integration steps in which a clamp or the y cap changed the state.
  long clamp_events = 0;
  long cap_hits = 0;
};

Drift2 DriftUncontrolled(const ScalarSystemParams& p, double x, double y);

// u1 = -k (x - 1/2).
double ControllerU1(const ScalarSystemParams& p, double x);

// u2 = c lambda log E + c log(1/2) + c lambda + alpha y / E - alpha.
double ControllerU2(const ScalarSystemParams& p, double y);

// Uncontrolled drift plus (u1, u2). The sum is regrouped as differences of
// logarithms so that it vanishes exactly at (1/2, E).
Drift2 DriftControlled(const ScalarSystemParams& p, double x, double y);

Drift2 Drift(const ScalarSystemParams& p, double x, double y, bool controlled);

// Partial derivatives of the drift at (x, y): {ddx/dx, ddx/dy, ddy/dx, ddy/dy}.
struct DriftJacobian {
  double xx, xy, yx, yy;
};
DriftJacobian DriftDerivatives(const ScalarSystemParams& p, double x, double y,
                               bool controlled);

double DistanceToDesired(const ScalarSystemParams& p, const ScalarState& s);

// Fixed-step integration with x clamped to [delta_D, 1 - delta_D] and y to
// [epsilon_y, 10] after every stage. Throws kNonFinite on NaN/inf.
ScalarTrajectory Integrate(const ScalarSystemParams& p, const ScalarState& init,
                           bool controlled, double dt, long steps,
                           Integrator integrator = Integrator::kRk4,
                           int record_every = 1);

struct Equilibrium {
  double x;
  double y;
  double residual;
};

// Damped Newton from a grid x grid set of seeds over the clamped domain.
// Roots are deduplicated and sorted by (x, y); all have residual < 1e-10.
std::vector<Equilibrium> FindEquilibria(const ScalarSystemParams& p,
                                        bool controlled, int grid,
                                        double y_max = kYCap);

}  // namespace cgail
