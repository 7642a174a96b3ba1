#include "kinoplan/kino_search.hpp"


#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <memory>
#include <new>
#include <limits>
#include <queue>
#include <stdexcept>

namespace kinoplan {

double SearchConfig::effective_check_step(double resolution) const {
  if (check_step > 0.0) return check_step;
  return std::min(tau / 10.0, resolution / v_max);
}

double SearchConfig::effective_goal_tolerance(double resolution) const {
  return goal_tolerance > 0.0 ? goal_tolerance : 1.5 * resolution;
}

void SearchConfig::validate() const {
  if (r < 1) throw std::invalid_argument("SearchConfig: r must be >= 1");
  if (!(tau > 0.0)) throw std::invalid_argument("SearchConfig: tau must be > 0");
  if (!(rho > 0.0)) throw std::invalid_argument("SearchConfig: rho must be > 0");
  if (!(u_max > 0.0) || !(v_max > 0.0) || !(a_max > 0.0))
    throw std::invalid_argument("SearchConfig: limits must be > 0");
  if (check_step >= tau) throw std::invalid_argument("SearchConfig: check_step must be < tau");
  if (max_expansions < 1) throw std::invalid_argument("SearchConfig: max_expansions must be >= 1");
}

State state_transition(const State& x0, const Vec3& u, double t) {
  return {x0.position + x0.velocity * t + 0.5 * u * t * t, x0.velocity + u * t};
}

std::vector<MotionPrimitive> expand(const State& from, const SearchConfig& cfg) {
  std::vector<MotionPrimitive> out;
  expand(from, cfg, out);
  return out;
}

void expand(const State& from, const SearchConfig& cfg, std::vector<MotionPrimitive>& out) {
  out.clear();
  const int levels = 2 * cfg.r + 1;
  out.reserve(static_cast<std::size_t>(levels * levels * levels));
  auto level = [&](int k) { return cfg.u_max * static_cast<double>(k - cfg.r) / cfg.r; };
  for (int ix = 0; ix < levels; ++ix)
    for (int iy = 0; iy < levels; ++iy)
      for (int iz = 0; iz < levels; ++iz) {
        MotionPrimitive p;
        p.start = from;
        p.input = Vec3(level(ix), level(iy), level(iz));
        p.duration = cfg.tau;
        p.end = state_transition(from, p.input, cfg.tau);
        p.edge_cost = (p.input.squaredNorm() + cfg.rho) * cfg.tau;
        out.push_back(p);
      }
}

namespace {

struct ObvpTerms {
  double a;  // |dp|^2
  double b;  // (v0 + v1) . dp
  double k;  // |v0|^2 + v0.v1 + |v1|^2
};

ObvpTerms obvp_terms(const State& from, const State& to) {
  const Vec3 dp = to.position - from.position;
  const Vec3& v0 = from.velocity;
  const Vec3& v1 = to.velocity;
  return {dp.squaredNorm(), (v0 + v1).dot(dp), v0.squaredNorm() + v0.dot(v1) + v1.squaredNorm()};
}

double obvp_cost(const ObvpTerms& c, double t, double rho) {
  return 12.0 * c.a / (t * t * t) - 12.0 * c.b / (t * t) + 4.0 * c.k / t + rho * t;
}

}  // namespace

double obvp_cost(const State& from, const State& to, double duration, double rho) {
  return obvp_cost(obvp_terms(from, to), duration, rho);
}

namespace {

double fast_cbrt(double x) {
  if (x == 0.0) return 0.0;
  const double ax = std::abs(x);
  double y = std::bit_cast<double>(std::bit_cast<std::uint64_t>(ax) / 3 + 0x2A9F7893782DA1CEull);
  for (int i = 0; i < 4; ++i) y -= (y * y * y - ax) / (3.0 * y * y);
  return x < 0.0 ? -y : y;
}

// Largest real root of x^3 + a x^2 + b x + c.
double largest_cubic_root(double a, double b, double c) {
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const double disc = 0.25 * q * q + p * p * p / 27.0;
  double y;
  if (disc > 0.0) {
    const double sq = std::sqrt(disc);
    y = fast_cbrt(-0.5 * q + sq) + fast_cbrt(-0.5 * q - sq);
  } else if (p == 0.0) {
    y = 0.0;
  } else {
    const double r = std::sqrt(-p / 3.0);
    const double arg = std::clamp(-0.5 * q / (r * r * r), -1.0, 1.0);
    y = 2.0 * r * std::cos(std::acos(arg) / 3.0);
  }
  double x = y - a / 3.0;
  for (int it = 0; it < 2; ++it) {
    const double f = ((x + a) * x + b) * x + c;
    const double df = (3.0 * x + 2.0 * a) * x + b;
    if (df == 0.0) break;
    x -= f / df;
  }
  return x;
}

// Real roots of x^4 + p x^2 + q x + r (Ferrari); returns the count.
int depressed_quartic_roots(double p, double q, double r, double* out) {
  int n = 0;
  auto quadratic = [&](double b, double c) {
    const double disc = b * b - 4.0 * c;
    if (disc < 0.0) return;
    const double sq = std::sqrt(disc);
    out[n++] = 0.5 * (-b + sq);
    out[n++] = 0.5 * (-b - sq);
  };
  const double scale = std::max({std::abs(p), std::sqrt(std::abs(r)), fast_cbrt(std::abs(q)), 1e-300});
  if (std::abs(q) <= 1e-14 * scale * scale * scale) {
    double y[2];
    const double disc = p * p - 4.0 * r;
    if (disc < 0.0) return 0;
    y[0] = 0.5 * (-p + std::sqrt(disc));
    y[1] = 0.5 * (-p - std::sqrt(disc));
    for (double v : y)
      if (v >= 0.0) {
        out[n++] = std::sqrt(v);
        out[n++] = -std::sqrt(v);
      }
    return n;
  }
  const double m = largest_cubic_root(p, 0.25 * p * p - r, -0.125 * q * q);
  if (!(m > 0.0)) return 0;
  const double s = std::sqrt(2.0 * m);
  quadratic(-s, 0.5 * p + m + q / (2.0 * s));
  quadratic(s, 0.5 * p + m - q / (2.0 * s));
  return n;
}

}  // namespace

HeuristicValue heuristic(const State& from, const State& to, double rho) {
  // Already there: the zero-duration connection.
  if (from.position == to.position && from.velocity == to.velocity) return {0.0, 0.0, false};
  const ObvpTerms c = obvp_terms(from, to);

  // dC/dT = 0  <=>  rho T^4 - 4k T^2 + 24b T - 36a = 0.
  const double qp = -4.0 * c.k / rho, qq = 24.0 * c.b / rho, qr = -36.0 * c.a / rho;
  HeuristicValue best{std::numeric_limits<double>::infinity(), 0.0, false};
  double roots[4];
  const int n = depressed_quartic_roots(qp, qq, qr, roots);
  for (int i = 0; i < n; ++i) {
    double t = roots[i];
    for (int it = 0; it < 2; ++it) {
      const double f = ((t * t + qp) * t + qq) * t + qr;
      const double df = (4.0 * t * t + 2.0 * qp) * t + qq;
      if (df == 0.0) break;
      t -= f / df;
    }
    if (!(t > 0.0)) continue;
    const double cost = obvp_cost(c, t, rho);
    if (cost < best.cost) best = {cost, t, false};
  }
  if (std::isfinite(best.cost)) return best;

  // Golden-section over log T.
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = std::log(1e-6), hi = std::log(1e4);
  auto eval = [&](double s) { return obvp_cost(c, std::exp(s), rho); };
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = eval(x1), f2 = eval(x2);
  for (int it = 0; it < 200; ++it) {
    if (f1 < f2) {
      hi = x2, x2 = x1, f2 = f1;
      x1 = hi - phi * (hi - lo), f1 = eval(x1);
    } else {
      lo = x1, x1 = x2, f1 = f2;
      x2 = lo + phi * (hi - lo), f2 = eval(x2);
    }
  }
  const double t = std::exp(0.5 * (lo + hi));
  return {obvp_cost(c, t, rho), t, true};
}

CubicConnection CubicConnection::solve(const State& from, const State& to, double duration) {
  CubicConnection c;
  c.start = from;
  c.duration = duration;
  if (duration <= 0.0) return c;
  const double t = duration;
  const Vec3 d = to.position - from.position - from.velocity * t;
  const Vec3 dv = to.velocity - from.velocity;
  c.alpha = (-12.0 * d + 6.0 * t * dv) / (t * t * t);
  c.beta = (6.0 * t * d - 2.0 * t * t * dv) / (t * t * t);
  return c;
}

State CubicConnection::at(double t) const {
  return {start.position + start.velocity * t + beta * (t * t / 2.0) + alpha * (t * t * t / 6.0),
          start.velocity + beta * t + alpha * (t * t / 2.0)};
}

double CubicConnection::control_cost() const {
  const double t = duration;
  return beta.squaredNorm() * t + alpha.dot(beta) * t * t + alpha.squaredNorm() * t * t * t / 3.0;
}

namespace {

bool within(const Vec3& v, double bound) { return v.cwiseAbs().maxCoeff() <= bound * (1.0 + 1e-9); }

}  // namespace

std::optional<CubicConnection> analytic_expand(const State& from, const State& goal,
                                               const VoxelGrid& map, const SearchConfig& cfg) {
  const HeuristicValue h = heuristic(from, goal, cfg.rho);
  const CubicConnection conn = CubicConnection::solve(from, goal, h.time);
  if (conn.duration <= 0.0) return conn;
  const double step = cfg.effective_check_step(map.resolution());
  const int n = static_cast<int>(std::ceil(conn.duration / step));
  for (int k = 0; k <= n; ++k) {
    const double t = std::min(conn.duration, k * step);
    const State s = conn.at(t);
    if (!map.is_free(s.position)) return std::nullopt;
    if (!within(s.velocity, cfg.v_max) || !within(conn.acceleration(t), cfg.a_max))
      return std::nullopt;
  }
  return conn;
}

bool check_feasible(const MotionPrimitive& prim, const VoxelGrid& map, const SearchConfig& cfg) {
  const double step = cfg.effective_check_step(map.resolution());
  const int n = static_cast<int>(std::floor(prim.duration / step + 1e-9));
  // Velocity is linear in t, so the first and last samples bound it.
  const double t_first = n >= 1 ? step : prim.duration;
  if (!within(prim.start.velocity + prim.input * t_first, cfg.v_max)) return false;
  if (!within(prim.start.velocity + prim.input * prim.duration, cfg.v_max)) return false;
  for (int k = 1; k <= n + 1; ++k) {
    const double t = k <= n ? k * step : prim.duration;
    const Vec3 p = prim.start.position + prim.start.velocity * t + prim.input * (0.5 * t * t);
    if (!map.is_free(p)) return false;
  }
  return true;
}


std::string_view to_string(SearchStatus s) {
  switch (s) {
    case SearchStatus::Success: return "success";
    case SearchStatus::StartInCollision: return "start-in-collision";
    case SearchStatus::OpenSetExhausted: return "open-set-exhausted";
    case SearchStatus::MaxExpansions: return "max-expansions";
  }
  return "unknown";
}

double SearchResult::duration() const {
  double d = 0.0;
  for (const auto& p : primitives) d += p.duration;
  if (tail) d += tail->duration;
  return d;
}

double SearchResult::control_cost() const {
  double c = 0.0;
  for (const auto& p : primitives) c += p.input.squaredNorm() * p.duration;
  if (tail) c += tail->control_cost();
  return c;
}

State SearchResult::end_state() const {
  if (tail) return tail->at(tail->duration);
  if (!primitives.empty()) return primitives.back().end;
  return start;
}

State SearchResult::at(double t) const {
  for (const auto& p : primitives) {
    if (t <= p.duration) return p.at(std::max(0.0, t));
    t -= p.duration;
  }
  if (tail) return tail->at(std::clamp(t, 0.0, tail->duration));
  return end_state();
}

namespace {

struct Node {
  State state;
  std::int64_t key = 0;
  double g = 0.0;
  double h = 0.0;
  double f = 0.0;
  int parent = -1;
  MotionPrimitive arrival;
  bool closed = false;
  bool beyond_horizon = false;
};

struct OpenEntry {
  double f;
  double h;
  std::uint64_t seq;
  double g;
  int node;
};

struct OpenOrder {
  bool operator()(const OpenEntry& a, const OpenEntry& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.h != b.h) return a.h > b.h;
    return a.seq > b.seq;
  }
};

// Pruning cells over the map's extent: node per cell, plus the best sibling
// of the current expansion (tagged by expansion number).
class CellTable {
 public:
  CellTable(const VoxelGrid& map, double cell) : origin_(map.origin()), inv_(1.0 / cell) {
    for (int a = 0; a < 3; ++a)
      dims_[a] = static_cast<std::int64_t>(std::ceil(map.dims()[a] * map.resolution() * inv_ - 1e-9));
    const std::size_t n = static_cast<std::size_t>(dims_[0] * dims_[1] * dims_[2]);
    cells_.reset(static_cast<Cell*>(std::calloc(n, sizeof(Cell))));
    if (!cells_) throw std::bad_alloc();
  }

  /// Cell index of `p`, or -1 outside the covered extent.
  std::int64_t operator()(const Vec3& p) const {
    std::int64_t idx[3];
    for (int a = 0; a < 3; ++a) {
      const double f = std::floor((p[a] - origin_[a]) * inv_);
      if (!(f >= 0.0) || f >= static_cast<double>(dims_[a])) return -1;
      idx[a] = static_cast<std::int64_t>(f);
    }
    return idx[0] + dims_[0] * (idx[1] + dims_[1] * idx[2]);
  }

  int node(std::int64_t c) const { return cells_[c].node - 1; }
  void set_node(std::int64_t c, int n) { cells_[c].node = n + 1; }
  /// Candidate slot of `c` during expansion `stamp`, or -1.
  int sibling(std::int64_t c, int stamp) const { return cells_[c].stamp == stamp ? cells_[c].cand : -1; }
  void set_sibling(std::int64_t c, int stamp, int cand) { cells_[c].stamp = stamp, cells_[c].cand = cand; }

 private:
  struct Cell {
    int node;
    int stamp;
    int cand;
  };
  struct Free {
    void operator()(Cell* c) const { std::free(c); }
  };
  Vec3 origin_;
  double inv_;
  std::int64_t dims_[3];
  std::unique_ptr<Cell[], Free> cells_;
};

}  // namespace

SearchResult search(const State& start, const State& goal, const VoxelGrid& map,
                    const SearchConfig& cfg, const SearchHorizon* horizon) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  SearchResult result;
  result.start = start;
  auto finish = [&](SearchStatus status) {
    result.status = status;
    result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
  };
  if (!map.is_free(start.position)) return finish(SearchStatus::StartInCollision);

  const double tolerance = cfg.effective_goal_tolerance(map.resolution());
  const bool goal_in_range =
      !horizon || (goal.position - horizon->center).norm() <= horizon->radius;
  const bool horizon_active = !goal_in_range;
  auto outside = [&](const Vec3& p) {
    return horizon_active && (p - horizon->center).norm() > horizon->radius;
  };
  CellTable cells(map, cfg.prune_resolution > 0.0 ? cfg.prune_resolution : map.resolution());

  std::vector<Node> nodes;
  std::priority_queue<OpenEntry, std::vector<OpenEntry>, OpenOrder> open;
  std::vector<int> horizon_nodes;
  std::uint64_t seq = 0;

  {
    Node n;
    n.state = start;
    n.key = cells(start.position);
    n.h = heuristic(start, goal, cfg.rho).cost;
    n.f = n.h;
    nodes.push_back(n);
    cells.set_node(n.key, 0);
    open.push({n.f, n.h, seq++, 0.0, 0});
  }

  auto build_chain = [&](int end) {
    std::vector<MotionPrimitive> chain;
    for (int i = end; nodes[i].parent >= 0; i = nodes[i].parent) chain.push_back(nodes[i].arrival);
    std::reverse(chain.begin(), chain.end());
    result.primitives = std::move(chain);
    result.g_cost = nodes[end].g;
    result.total_cost = result.g_cost;
  };

  struct Candidate {
    MotionPrimitive prim;
    std::int64_t key;
    double h;
    double f;
  };
  std::vector<MotionPrimitive> prims;
  std::vector<Candidate> candidates;

  while (!open.empty()) {
    const OpenEntry top = open.top();
    open.pop();
    if (nodes[top.node].closed || top.g > nodes[top.node].g) continue;
    nodes[top.node].closed = true;
    if (++result.expansions > cfg.max_expansions) return finish(SearchStatus::MaxExpansions);
    const int current = top.node;

    if (nodes[current].beyond_horizon) {
      int best = horizon_nodes.front();
      for (int i : horizon_nodes)
        if (nodes[i].h < nodes[best].h) best = i;
      // End on the last node inside the sphere.
      if (nodes[best].parent > 0) best = nodes[best].parent;
      build_chain(best);
      result.reached_horizon = true;
      return finish(SearchStatus::Success);
    }
    if (goal_in_range) {
      if ((nodes[current].state.position - goal.position).norm() <= tolerance) {
        build_chain(current);
        return finish(SearchStatus::Success);
      }
      if (cfg.analytic_expansion) {
        if (auto tail = analytic_expand(nodes[current].state, goal, map, cfg)) {
          build_chain(current);
          result.tail = *tail;
          result.total_cost += tail->control_cost() + cfg.rho * tail->duration;
          return finish(SearchStatus::Success);
        }
      }
    }

    const State cur_state = nodes[current].state;
    const double cur_g = nodes[current].g;
    const std::int64_t cur_key = nodes[current].key;
    const int stamp = result.expansions;
    candidates.clear();
    expand(cur_state, cfg, prims);
    for (const auto& prim : prims) {
      // Cells outside the map's extent hold no free positions.
      const std::int64_t key = cells(prim.end.position);
      if (key < 0 || key == cur_key) continue;
      if (!within(prim.end.velocity, cfg.v_max)) continue;
      if (const int n = cells.node(key); n >= 0 && nodes[n].closed) continue;
      const double h = heuristic(prim.end, goal, cfg.rho).cost;
      const double f = cur_g + prim.edge_cost + h;
      if (cfg.prune_siblings) {
        if (const int slot = cells.sibling(key, stamp); slot >= 0) {
          if (f < candidates[slot].f) candidates[slot] = {prim, key, h, f};
          continue;
        }
        cells.set_sibling(key, stamp, static_cast<int>(candidates.size()));
      }
      candidates.push_back({prim, key, h, f});
    }

    for (const auto& cand : candidates) {
      const int found = cells.node(cand.key);
      if (found >= 0 && nodes[found].closed) continue;
      const double g = cur_g + cand.prim.edge_cost;
      if (found >= 0 && g >= nodes[found].g) continue;
      if (!check_feasible(cand.prim, map, cfg)) continue;
      int idx = found;
      if (found < 0) {
        idx = static_cast<int>(nodes.size());
        nodes.emplace_back();
        nodes[idx].key = cand.key;
        cells.set_node(cand.key, idx);
      }
      Node& n = nodes[idx];
      n.state = cand.prim.end;
      n.arrival = cand.prim;
      n.parent = current;
      n.g = g;
      n.h = cand.h;
      n.f = g + cand.h;
      const bool was_beyond = n.beyond_horizon;
      n.beyond_horizon = outside(n.state.position);
      if (n.beyond_horizon && !was_beyond) horizon_nodes.push_back(idx);
      open.push({n.f, n.h, seq++, n.g, idx});
    }
  }
  return finish(SearchStatus::OpenSetExhausted);
}

std::vector<TimedState> retrieve_path(const SearchResult& result, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("retrieve_path: dt must be > 0");
  const double total = result.duration();
  std::vector<TimedState> out;
  const int n = static_cast<int>(std::floor(total / dt + 1e-9));
  for (int k = 0; k <= n; ++k) out.push_back({k * dt, result.at(k * dt)});
  if (total - n * dt > 1e-9 * std::max(1.0, total))
    out.push_back({total, result.end_state()});
  else
    out.back() = {total, result.end_state()};
  out.front() = {0.0, result.start};
  return out;
}

}  // namespace kinoplan
