#include <doctest.h>

#include <cmath>
#include <random>

#include "gradcon/huber.hpp"

using namespace gradcon;
using namespace gradcon::huber;

TEST_CASE("phi values") {
  CHECK(phi({0, 0}, 0.3) == 0.0);
  CHECK(phi({0.2, 0}, 0.1) == doctest::Approx(0.15).epsilon(1e-15));
  CHECK(phi({0.05, 0}, 0.1) == doctest::Approx(0.0125).epsilon(1e-15));
}

TEST_CASE("dphi values") {
  const Point2 z = dphi({0, 0}, 0.1);
  CHECK(z.x == 0.0);
  CHECK(z.y == 0.0);
  const Point2 a = dphi({0.2, 0}, 0.1);
  CHECK(a.x == doctest::Approx(1.0));
  CHECK(a.y == 0.0);
  const Point2 b = dphi({0.05, 0}, 0.1);
  CHECK(b.x == doctest::Approx(0.5));
}

TEST_CASE("d2phi values") {
  const Sym2 a = d2phi({0, 0}, 0.5);
  CHECK(a.xx == doctest::Approx(2.0));
  CHECK(a.xy == 0.0);
  CHECK(a.yy == doctest::Approx(2.0));
  const Sym2 b = d2phi({1, 0}, 0.1);
  CHECK(std::abs(b.xx) < 1e-15);
  CHECK(std::abs(b.xy) < 1e-15);
  CHECK(b.yy == doctest::Approx(1.0));
  const Sym2 c = d2phi({0.6, 0.8}, 0.1);
  CHECK(c.xx == doctest::Approx(0.64));
  CHECK(c.xy == doctest::Approx(-0.48));
  CHECK(c.yy == doctest::Approx(0.36));
}

TEST_CASE("branches agree on the switch circle") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI), logtau(-6.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const double tau = std::pow(10.0, logtau(rng));
    const double th = angle(rng);
    const Point2 v{tau * std::cos(th), tau * std::sin(th)};
    const double r = std::hypot(v.x, v.y);
    // Linear-branch formulas evaluated at the same point.
    const double lin = r - 0.5 * tau;
    const Point2 dlin = (1.0 / r) * v;
    CHECK(std::abs(phi(v, tau) - lin) <= 1e-14 * std::max(1.0, tau));
    const Point2 d = dphi(v, tau);
    CHECK(std::abs(d.x - dlin.x) <= 1e-14);
    CHECK(std::abs(d.y - dlin.y) <= 1e-14);
  }
}

TEST_CASE("derivatives match central differences away from the switch") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> comp(-2.0, 2.0), logtau(-3.0, 0.5);
  int checked = 0;
  double worst_grad = 0.0, worst_hess = 0.0;
  while (checked < 1000) {
    const Point2 v{comp(rng), comp(rng)};
    const double tau = std::pow(10.0, logtau(rng));
    const double r = std::hypot(v.x, v.y);
    const double eps = 1e-6 * std::max(tau, r);
    if (std::abs(r - tau) < 10.0 * eps || r < 10.0 * eps) continue;
    ++checked;

    const Point2 ex{eps, 0}, ey{0, eps};
    const Point2 g = dphi(v, tau);
    const double gx = (phi(v + ex, tau) - phi(v - ex, tau)) / (2 * eps);
    const double gy = (phi(v + ey, tau) - phi(v - ey, tau)) / (2 * eps);
    worst_grad = std::max(worst_grad, std::max(std::abs(gx - g.x), std::abs(gy - g.y)));

    const Sym2 h = d2phi(v, tau);
    const Point2 hx = (1.0 / (2 * eps)) * (dphi(v + ex, tau) - dphi(v - ex, tau));
    const Point2 hy = (1.0 / (2 * eps)) * (dphi(v + ey, tau) - dphi(v - ey, tau));
    const double scale = 1.0 / std::min(tau, r);
    worst_hess = std::max(worst_hess, std::max({std::abs(hx.x - h.xx), std::abs(hx.y - h.xy), std::abs(hy.x - h.xy),
                                                std::abs(hy.y - h.yy)}) / scale);
  }
  CHECK(worst_grad < 1e-7);
  CHECK(worst_hess < 1e-6);
}

TEST_CASE("bounds, convexity and convergence to the norm") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> comp(-3.0, 3.0), logtau(-6.0, 1.0), unit(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const Point2 v{comp(rng), comp(rng)}, w{comp(rng), comp(rng)};
    const double tau = std::pow(10.0, logtau(rng));
    const double r = std::hypot(v.x, v.y);
    const double f = phi(v, tau);
    CHECK(f >= 0.0);
    // 0 <= |v| - phi_tau(v) <= tau / 2
    CHECK(r - f >= -1e-15);
    CHECK(r - f <= 0.5 * tau + 1e-15);
    const Point2 d = dphi(v, tau);
    CHECK(std::hypot(d.x, d.y) <= 1.0 + 1e-15);
    const double s = unit(rng);
    CHECK(phi(s * v + (1 - s) * w, tau) <= s * f + (1 - s) * phi(w, tau) + 1e-12);
    const Sym2 h = d2phi(v, tau);
    const double tr = h.xx + h.yy, det = h.xx * h.yy - h.xy * h.xy;
    const double lmin = 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4 * det)));
    CHECK(lmin >= -1e-14 * std::max(1.0, tr));
  }
}
