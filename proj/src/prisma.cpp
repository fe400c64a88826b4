#include "kolmo/prisma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kolmo {

namespace {

constexpr double kRhoFloor = 1.25;
constexpr double kRhoCeil = 4.0;

// log C(ρ) = max_n ρ^{-n} log|x_n|, nondecreasing in ρ because every log is
// negative.
double log_C(const std::vector<std::pair<double, double>>& pts, double rho) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& [n, lx] : pts) best = std::max(best, lx * std::pow(rho, -n));
  return best;
}

struct StructuralFit {
  double rho;
  double A;  ///< coefficient of ρ^n
  double sse;
};

// Least squares for log|x_n| ≈ A ρ^n + B + D n at fixed ρ, through the
// normal equations; returns the coefficient A and the squared residual.
StructuralFit fit_at(const std::vector<std::pair<double, double>>& pts, double rho) {
  double M[3][4] = {};
  for (const auto& [n, lx] : pts) {
    double row[3] = {std::pow(rho, n), 1.0, n};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) M[i][j] += row[i] * row[j];
      M[i][3] += row[i] * lx;
    }
  }
  for (int c = 0; c < 3; ++c) {
    int piv = c;
    for (int r = c + 1; r < 3; ++r)
      if (std::fabs(M[r][c]) > std::fabs(M[piv][c])) piv = r;
    std::swap(M[c], M[piv]);
    if (M[c][c] == 0.0) return {rho, 0.0, std::numeric_limits<double>::infinity()};
    for (int r = c + 1; r < 3; ++r) {
      double f = M[r][c] / M[c][c];
      for (int k = c; k < 4; ++k) M[r][k] -= f * M[c][k];
    }
  }
  double sol[3];
  for (int c = 2; c >= 0; --c) {
    double acc = M[c][3];
    for (int k = c + 1; k < 3; ++k) acc -= M[c][k] * sol[k];
    sol[c] = acc / M[c][c];
  }
  double sse = 0.0;
  for (const auto& [n, lx] : pts) {
    double e = sol[0] * std::pow(rho, n) + sol[1] + sol[2] * n - lx;
    sse += e * e;
  }
  return {rho, sol[0], sse};
}

// Scan ρ over [floor, ceil], then refine the best cell by golden section.
StructuralFit best_structural_fit(const std::vector<std::pair<double, double>>& pts) {
  constexpr int kCells = 600;
  StructuralFit best = fit_at(pts, kRhoFloor);
  for (int i = 1; i <= kCells; ++i) {
    StructuralFit f = fit_at(pts, kRhoFloor + (kRhoCeil - kRhoFloor) * i / kCells);
    if (f.sse < best.sse) best = f;
  }
  double h = (kRhoCeil - kRhoFloor) / kCells;
  double lo = std::max(kRhoFloor, best.rho - h), hi = std::min(kRhoCeil, best.rho + h);
  const double g = (std::sqrt(5.0) - 1) / 2;
  for (int it = 0; it < 80 && hi - lo > 1e-13; ++it) {
    double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
    if (fit_at(pts, m1).sse <= fit_at(pts, m2).sse)
      hi = m2;
    else
      lo = m1;
  }
  StructuralFit refined = fit_at(pts, (lo + hi) / 2);
  return refined.sse <= best.sse ? refined : best;
}

// Fallback for short sequences: slope of log(-log|x_n|) against n.
double slope_rho(const std::vector<std::pair<double, double>>& pts) {
  double mn = 0, my = 0;
  for (const auto& [n, lx] : pts) {
    mn += n;
    my += std::log(-lx);
  }
  mn /= pts.size();
  my /= pts.size();
  double sxy = 0, sxx = 0;
  for (const auto& [n, lx] : pts) {
    sxy += (n - mn) * (std::log(-lx) - my);
    sxx += (n - mn) * (n - mn);
  }
  return std::exp(sxy / sxx);
}

}  // namespace

RapidConvergence rapid_convergence_check_log(const std::vector<double>& log_abs_xs) {
  if (log_abs_xs.empty()) throw Error(Errc::domain, "rapid convergence check needs data");
  std::vector<std::pair<double, double>> pts;
  double scale = 0.0;
  for (std::size_t n = 0; n < log_abs_xs.size(); ++n) {
    double lx = log_abs_xs[n];
    if (std::isinf(lx) && lx < 0) continue;
    if (!(lx < 0.0)) return {false, std::exp(lx), 0.0};
    pts.emplace_back(static_cast<double>(n), lx);
    scale = std::max(scale, -lx);
  }
  if (pts.empty()) return {true, 0.0, 2.0};
  if (pts.size() == 1) return {true, std::exp(log_C(pts, 2.0)), 2.0};

  double rho;
  if (pts.size() >= 4) {
    // The doubly exponential term must carry a visible share of the decay;
    // geometric or polynomial decay fits with A ≈ 0 or A > 0.
    StructuralFit fit = best_structural_fit(pts);
    double last = pts.back().first;
    if (!(fit.A < 0.0) || -fit.A * std::pow(fit.rho, last) < 1e-2 * scale)
      return {false, std::exp(log_C(pts, kRhoFloor)), fit.rho};
    rho = fit.rho;
  } else {
    rho = std::min(slope_rho(pts), kRhoCeil);
    if (rho < kRhoFloor) return {false, std::exp(log_C(pts, kRhoFloor)), rho};
  }

  if (log_C(pts, rho) >= 0.0) {
    if (log_C(pts, kRhoFloor) >= 0.0) return {false, std::exp(log_C(pts, kRhoFloor)), kRhoFloor};
    double lo = kRhoFloor, hi = rho;
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
      double mid = 0.5 * (lo + hi);
      (log_C(pts, mid) < 0.0 ? lo : hi) = mid;
    }
    rho = lo;
  }
  return {true, std::exp(log_C(pts, rho)), rho};
}

RapidConvergence rapid_convergence_check(const std::vector<double>& xs) {
  std::vector<double> logs;
  logs.reserve(xs.size());
  for (double x : xs)
    logs.push_back(x == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(std::fabs(x)));
  return rapid_convergence_check_log(logs);
}

}  // namespace kolmo
