#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "qcorr/channels.hpp"
#include "qcorr/errors.hpp"

namespace qcorr {

using EigFn = std::function<std::array<double, 3>(double)>;

// Continuity-matched eigenvalue trajectories: branch identity is preserved
// across grid steps, so branches may cross in value.
struct EigenBranchSeries {
  std::vector<double> times;
  std::array<std::vector<double>, 3> branches;
  std::vector<int> max_index;  // which branch is maximal at each time
};

namespace detail {

// Rank of each branch by (value descending, index ascending).
inline std::array<int, 3> value_ranks(const std::array<double, 3>& v) {
  std::array<int, 3> idx{0, 1, 2};
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (v[a] != v[b]) return v[a] > v[b];
    return a < b;
  });
  std::array<int, 3> rank{};
  for (int pos = 0; pos < 3; ++pos) rank[idx[pos]] = pos;
  return rank;
}

inline constexpr std::array<std::array<int, 3>, 6> permutations3{
    {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

// Assign the freshly computed values (in arbitrary slot order) to branches so
// that total L1 displacement from the per-branch linear predictions is
// minimal. Exact cost ties are the signature of branches touching without
// exchanging order; they are resolved by keeping the previous value-rank
// order. A tie that cannot be resolved that way is materially ambiguous.
inline std::array<int, 3> match_branches(const std::array<double, 3>& predicted,
                                         const std::array<double, 3>& fresh,
                                         const std::array<int, 3>& prev_rank) {
  double best_cost = std::numeric_limits<double>::infinity();
  std::array<double, 6> costs{};
  for (int p = 0; p < 6; ++p) {
    double c = 0.0;
    for (int i = 0; i < 3; ++i) c += std::abs(fresh[permutations3[p][i]] - predicted[i]);
    costs[p] = c;
    best_cost = std::min(best_cost, c);
  }
  double scale = 1.0;
  for (double v : fresh) scale = std::max(scale, std::abs(v));
  const double tie_tol = 1e-14 * scale;

  std::vector<int> tied;
  for (int p = 0; p < 6; ++p)
    if (costs[p] <= best_cost + tie_tol) tied.push_back(p);
  if (tied.size() == 1) return permutations3[tied[0]];
  for (int p : tied) {
    std::array<double, 3> assigned{};
    for (int i = 0; i < 3; ++i) assigned[i] = fresh[permutations3[p][i]];
    if (value_ranks(assigned) == prev_rank) return permutations3[p];
  }
  throw GridTooCoarse("scan_branches: ambiguous branch assignment; refine the grid");
}

}  // namespace detail

// Track the three eigenvalue branches of eig_fn across the grid. The values
// returned by eig_fn may be in any per-call order (e.g. sorted); matching
// against linear predictions restores branch identity through crossings.
inline EigenBranchSeries scan_branches(const EigFn& eig_fn,
                                       const std::vector<double>& t_grid) {
  if (t_grid.size() < 2) throw OutOfRange("scan_branches: grid needs >= 2 points");
  for (size_t k = 0; k + 1 < t_grid.size(); ++k)
    if (!(t_grid[k] < t_grid[k + 1]))
      throw OutOfRange("scan_branches: grid must be strictly increasing");

  EigenBranchSeries series;
  const size_t n = t_grid.size();
  series.times = t_grid;
  for (auto& b : series.branches) b.reserve(n);

  std::array<double, 3> current = eig_fn(t_grid[0]);
  std::array<int, 3> rank = detail::value_ranks(current);

  // Bootstrap per-branch slopes with a half-step probe.
  const double h0 = 0.5 * (t_grid[1] - t_grid[0]);
  const std::array<double, 3> probe = eig_fn(t_grid[0] + h0);
  const std::array<int, 3> boot = detail::match_branches(current, probe, rank);
  std::array<double, 3> slope{};
  for (int i = 0; i < 3; ++i) slope[i] = (probe[boot[i]] - current[i]) / h0;

  auto push = [&](const std::array<double, 3>& v) {
    for (int i = 0; i < 3; ++i) series.branches[i].push_back(v[i]);
    int mi = 0;
    for (int i = 1; i < 3; ++i)
      if (v[i] > v[mi]) mi = i;
    series.max_index.push_back(mi);
  };
  push(current);

  for (size_t k = 1; k < n; ++k) {
    const double dt = t_grid[k] - t_grid[k - 1];
    std::array<double, 3> predicted{};
    for (int i = 0; i < 3; ++i) predicted[i] = current[i] + slope[i] * dt;
    const std::array<double, 3> fresh = eig_fn(t_grid[k]);
    const std::array<int, 3> perm = detail::match_branches(predicted, fresh, rank);
    std::array<double, 3> next{};
    for (int i = 0; i < 3; ++i) next[i] = fresh[perm[i]];
    for (int i = 0; i < 3; ++i) slope[i] = (next[i] - current[i]) / dt;
    current = next;
    rank = detail::value_ranks(current);
    push(current);
  }
  return series;
}

enum class CrossingKind { crossing, osculation };

struct CrossingEvent {
  double t_star = 0.0;
  int branch_m = 0;  // 1-based branch identities
  int branch_n = 0;
  double lambda_at_crossing = 0.0;
  bool involves_max = false;
  CrossingKind kind = CrossingKind::crossing;
  double t_lo = 0.0;  // grid bracket around t_star
  double t_hi = 0.0;
};

// One event per sign change of a matched pairwise branch difference, plus
// osculation events where a difference dips below tolerance and returns
// without changing sign. involves_max is set only when the two branches of
// the event exchange which of them is maximal.
inline std::vector<CrossingEvent> detect_crossings(const EigenBranchSeries& s,
                                                   double osc_tol = 1e-6) {
  std::vector<CrossingEvent> events;
  const size_t n = s.times.size();
  if (n < 2) return events;

  double magnitude = 1.0;
  for (const auto& b : s.branches)
    for (double v : b) magnitude = std::max(magnitude, std::abs(v));
  const double touch_tol = osc_tol * magnitude;

  const std::array<std::pair<int, int>, 3> pairs{{{0, 1}, {0, 2}, {1, 2}}};
  for (const auto& [m, np] : pairs) {
    std::vector<double> d(n);
    for (size_t k = 0; k < n; ++k) d[k] = s.branches[m][k] - s.branches[np][k];

    auto sgn = [&](size_t k) { return (d[k] > 0.0) - (d[k] < 0.0); };
    auto max_swap = [&](size_t klo, size_t khi) {
      const int a = s.max_index[klo], b = s.max_index[khi];
      return a != b && ((a == m && b == np) || (a == np && b == m));
    };
    auto interp_branch = [&](int br, size_t k, double frac) {
      return s.branches[br][k] + frac * (s.branches[br][k + 1] - s.branches[br][k]);
    };

    // Sign changes, tolerating exact zeros on interior grid points.
    int last_sign = 0;
    size_t last_idx = 0;
    bool have_sign = false;
    for (size_t k = 0; k < n; ++k) {
      const int sg = sgn(k);
      if (sg == 0) continue;
      if (have_sign && sg != last_sign) {
        CrossingEvent ev;
        ev.branch_m = m + 1;
        ev.branch_n = np + 1;
        ev.kind = CrossingKind::crossing;
        ev.t_lo = s.times[last_idx];
        ev.t_hi = s.times[k];
        if (k == last_idx + 1) {
          const double frac = d[last_idx] / (d[last_idx] - d[k]);
          ev.t_star = s.times[last_idx] + frac * (s.times[k] - s.times[last_idx]);
          ev.lambda_at_crossing = interp_branch(m, last_idx, frac);
        } else {
          // Crossing through an exact-zero run on the grid.
          ev.t_star = 0.5 * (s.times[last_idx + 1] + s.times[k - 1]);
          ev.lambda_at_crossing = s.branches[m][last_idx + 1];
        }
        ev.involves_max = max_swap(last_idx, k);
        events.push_back(ev);
      } else if (have_sign && sg == last_sign && k > last_idx + 1) {
        // Branches touched zero exactly and separated without exchanging.
        CrossingEvent ev;
        ev.branch_m = m + 1;
        ev.branch_n = np + 1;
        ev.kind = CrossingKind::osculation;
        ev.t_lo = s.times[last_idx];
        ev.t_hi = s.times[k];
        ev.t_star = 0.5 * (s.times[last_idx + 1] + s.times[k - 1]);
        ev.lambda_at_crossing = s.branches[m][last_idx + 1];
        ev.involves_max = false;
        events.push_back(ev);
      }
      last_sign = sg;
      last_idx = k;
      have_sign = true;
    }

    // Non-zero local minima of |d| below tolerance, same sign on both flanks.
    for (size_t k = 1; k + 1 < n; ++k) {
      if (d[k] == 0.0 || d[k - 1] == 0.0 || d[k + 1] == 0.0) continue;
      if (sgn(k - 1) != sgn(k + 1) || sgn(k) != sgn(k - 1)) continue;
      if (!(std::abs(d[k]) < touch_tol)) continue;
      if (!(std::abs(d[k]) <= std::abs(d[k - 1]) && std::abs(d[k]) < std::abs(d[k + 1])))
        continue;
      CrossingEvent ev;
      ev.branch_m = m + 1;
      ev.branch_n = np + 1;
      ev.kind = CrossingKind::osculation;
      ev.t_lo = s.times[k - 1];
      ev.t_hi = s.times[k + 1];
      const double denom = d[k + 1] - 2.0 * d[k] + d[k - 1];
      double t_star = s.times[k];
      if (denom != 0.0)
        t_star = s.times[k] -
                 0.5 * (s.times[k + 1] - s.times[k]) * (d[k + 1] - d[k - 1]) / denom;
      ev.t_star = std::clamp(t_star, s.times[k - 1], s.times[k + 1]);
      ev.lambda_at_crossing = s.branches[m][k];
      ev.involves_max = false;
      events.push_back(ev);
    }
  }

  std::sort(events.begin(), events.end(), [](const CrossingEvent& a, const CrossingEvent& b) {
    if (a.t_star != b.t_star) return a.t_star < b.t_star;
    if (a.branch_m != b.branch_m) return a.branch_m < b.branch_m;
    return a.branch_n < b.branch_n;
  });
  return events;
}

// Bisect a bracketed sign change of diff_fn down to |hi - lo| <= tol * max(1, |t|).
inline double refine_crossing(const std::function<double(double)>& diff_fn,
                              double t_lo, double t_hi, double tol = 1e-10) {
  double f_lo = diff_fn(t_lo);
  double f_hi = diff_fn(t_hi);
  if (f_lo == 0.0) return t_lo;
  if (f_hi == 0.0) return t_hi;
  if ((f_lo > 0.0) == (f_hi > 0.0))
    throw NoSignChange("refine_crossing: no sign change over [" +
                       std::to_string(t_lo) + ", " + std::to_string(t_hi) + "]");
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (t_lo + t_hi);
    if (t_hi - t_lo <= tol * std::max(1.0, std::abs(mid))) return mid;
    const double f_mid = diff_fn(mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      t_lo = mid;
      f_lo = f_mid;
    } else {
      t_hi = mid;
    }
  }
  return 0.5 * (t_lo + t_hi);
}

enum class BdLaw { phase_bitflip, phase_phase };

struct BdCrossing {
  double t_star = 0.0;
  int i = 0;  // 1-based component indices of the crossing pair
  int j = 0;
  bool max_changing = false;
};

// All positive finite solutions of |c_i(t)| = |c_j(t)| for the two analytic
// Bell-diagonal laws, each labeled with whether the maximal |c| changes there.
inline std::vector<BdCrossing> analytic_crossings_bd(const BellDiagonalParams& c0,
                                                     double gamma1, double gamma2,
                                                     BdLaw law) {
  if (gamma1 < 0.0 || gamma2 < 0.0)
    throw OutOfRange("analytic_crossings_bd: rate < 0");

  auto abs_c = [&](double t) -> std::array<double, 3> {
    const BellDiagonalParams c = law == BdLaw::phase_bitflip
                                     ? evolve_bd_phase_bitflip(c0, gamma1, gamma2, t)
                                     : evolve_bd_phase_phase(c0, gamma1, gamma2, t);
    return {std::abs(c.c1), std::abs(c.c2), std::abs(c.c3)};
  };

  // log|c_i0| - rate_i * t = log|c_j0| - rate_j * t
  const std::array<double, 3> c0v{c0.c1, c0.c2, c0.c3};
  std::array<double, 3> rate{};
  if (law == BdLaw::phase_bitflip)
    rate = {gamma1, gamma1 + gamma2, gamma2};
  else
    rate = {gamma1 + gamma2, gamma1 + gamma2, 0.0};

  std::vector<BdCrossing> out;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      const double ci = std::abs(c0v[i]), cj = std::abs(c0v[j]);
      const double dr = rate[i] - rate[j];
      if (ci < 1e-300 || cj < 1e-300 || std::abs(dr) < 1e-300) continue;
      const double t = std::log(ci / cj) / dr;
      if (!(t > 0.0) || !std::isfinite(t)) continue;
      BdCrossing ev;
      ev.t_star = t;
      ev.i = i + 1;
      ev.j = j + 1;
      const double dt = std::max(1e-6 * t, 1e-12);
      const auto before = abs_c(std::max(t - dt, 0.0));
      const auto after = abs_c(t + dt);
      const auto argmax3 = [](const std::array<double, 3>& v) {
        int mi = 0;
        for (int k = 1; k < 3; ++k)
          if (v[k] > v[mi]) mi = k;
        return mi;
      };
      const int pre = argmax3(before), post = argmax3(after);
      ev.max_changing = pre != post && ((pre == i && post == j) || (pre == j && post == i));
      out.push_back(ev);
    }
  std::sort(out.begin(), out.end(),
            [](const BdCrossing& a, const BdCrossing& b) { return a.t_star < b.t_star; });
  return out;
}

struct DerivativeJump {
  double left_slope = 0.0;
  double right_slope = 0.0;
  double jump = 0.0;   // right - left
  double noise = 0.0;  // estimated finite-difference noise floor
  bool discontinuous = false;
};

// One-sided slopes of f at t_star from a decreasing step schedule with
// Richardson extrapolation; classified discontinuous when the slope jump
// exceeds 10x the estimated noise floor. The quotients are anchored at
// t_star + h/2 rather than t_star itself: the typical probe center is an
// eigenvalue crossing, where polynomial root extraction loses half its
// digits, and extrapolation would amplify a center-value error by 1/h.
inline DerivativeJump derivative_jump(const std::function<double(double)>& f,
                                      double t_star,
                                      std::vector<double> h_schedule = {},
                                      double noise_floor = 0.0) {
  if (h_schedule.empty()) {
    const double s = std::max(1.0, std::abs(t_star));
    h_schedule = {1e-3 * s, 1e-4 * s, 1e-5 * s};
  }
  if (h_schedule.size() < 2)
    throw OutOfRange("derivative_jump: need at least two steps");
  for (size_t k = 0; k + 1 < h_schedule.size(); ++k)
    if (!(h_schedule[k] > h_schedule[k + 1] && h_schedule[k + 1] > 0.0))
      throw OutOfRange("derivative_jump: steps must be positive and decreasing");

  auto one_sided = [&](int side, double& slope, double& noise) {
    std::vector<double> s(h_schedule.size());
    for (size_t k = 0; k < h_schedule.size(); ++k) {
      const double h = h_schedule[k];
      s[k] = side * (f(t_star + side * h) - f(t_star + side * 0.5 * h)) /
             (0.5 * h);
    }
    std::vector<double> extrap;
    for (size_t k = 0; k + 1 < s.size(); ++k) {
      const double ha = h_schedule[k], hb = h_schedule[k + 1];
      extrap.push_back((ha * s[k + 1] - hb * s[k]) / (ha - hb));
    }
    slope = extrap.back();
    noise = extrap.size() >= 2 ? std::abs(extrap.back() - extrap[extrap.size() - 2])
                               : std::abs(s.back() - extrap.back());
  };

  DerivativeJump res;
  double noise_l = 0.0, noise_r = 0.0;
  one_sided(-1, res.left_slope, noise_l);
  one_sided(+1, res.right_slope, noise_r);
  res.jump = res.right_slope - res.left_slope;
  res.noise = std::max({noise_l, noise_r, noise_floor});
  const double floor =
      std::max(res.noise, 1e-15 * (1.0 + std::abs(res.left_slope) +
                                   std::abs(res.right_slope)));
  res.discontinuous = std::abs(res.jump) > 10.0 * floor;
  return res;
}

}  // namespace qcorr
