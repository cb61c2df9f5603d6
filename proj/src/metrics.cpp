#include "mdplearn/metrics.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace mdplearn {

namespace {

std::vector<std::string> split_ws(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::optional<int> parse_bound_suffix(const std::string& tok, std::size_t from) {
  if (from >= tok.size()) return std::nullopt;
  if (tok.compare(from, 2, "<=") != 0)
    throw std::invalid_argument("bad bound in property: " + tok);
  std::size_t pos = from + 2;
  if (pos >= tok.size()) throw std::invalid_argument("bad bound in property: " + tok);
  int value = 0;
  for (; pos < tok.size(); ++pos) {
    if (!std::isdigit(static_cast<unsigned char>(tok[pos])))
      throw std::invalid_argument("bad bound in property: " + tok);
    value = value * 10 + (tok[pos] - '0');
  }
  return value;
}

}  // namespace

PropertySpec parse_property(const std::string& text) {
  auto toks = split_ws(text);
  PropertySpec p;
  p.text = text;
  if (toks.size() == 2 && !toks[0].empty() && toks[0][0] == 'F') {
    p.bound = parse_bound_suffix(toks[0], 1);
    p.goal = toks[1];
  } else if (toks.size() == 3 && !toks[0].empty() && toks[0][0] == '!' &&
             !toks[1].empty() && toks[1][0] == 'U') {
    std::string avoid = toks[0].substr(1);
    if (avoid.empty()) throw std::invalid_argument("empty avoid label in property: " + text);
    std::size_t start = 0;
    while (start <= avoid.size()) {
      std::size_t comma = avoid.find(',', start);
      std::string one = avoid.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (one.empty()) throw std::invalid_argument("empty avoid label in property: " + text);
      p.avoid.insert(one);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    p.bound = parse_bound_suffix(toks[1], 1);
    p.goal = toks[2];
  } else {
    throw std::invalid_argument("cannot parse property: " + text);
  }
  if (p.goal.empty()) throw std::invalid_argument("empty goal label in property: " + text);
  if (p.avoid.count(p.goal))
    throw std::invalid_argument("goal label may not appear in the avoid set: " + text);
  return p;
}

namespace {

// Resolves a label name against a model; "chaos" may be absent (then no state
// matches), anything else must exist.
std::optional<int> resolve_label(const Mdp& m, const std::string& name) {
  auto id = m.outputs.index_of(name);
  if (!id && name != "chaos")
    throw std::invalid_argument("property label not in model outputs: " + name);
  return id;
}

}  // namespace

double pmax(const Mdp& m, const PropertySpec& prop) {
  auto goal = resolve_label(m, prop.goal);
  std::set<int> avoid;
  for (const auto& name : prop.avoid) {
    if (auto id = resolve_label(m, name)) avoid.insert(*id);
  }

  int n = m.num_states();
  auto is_goal = [&](int q) { return goal && m.labels[static_cast<std::size_t>(q)] == *goal; };
  auto is_avoid = [&](int q) { return avoid.count(m.labels[static_cast<std::size_t>(q)]) > 0; };

  std::vector<double> v(static_cast<std::size_t>(n), 0.0);
  for (int q = 0; q < n; ++q)
    if (is_goal(q)) v[static_cast<std::size_t>(q)] = 1.0;

  auto step = [&](const std::vector<double>& cur) {
    std::vector<double> next(static_cast<std::size_t>(n), 0.0);
    for (int q = 0; q < n; ++q) {
      if (is_goal(q)) {
        next[static_cast<std::size_t>(q)] = 1.0;
        continue;
      }
      if (is_avoid(q)) continue;
      double best = 0.0;
      for (int i = 0; i < m.inputs.size(); ++i) {
        double sum = 0.0;
        for (const auto& [succ, p] : m.trans[static_cast<std::size_t>(q)][static_cast<std::size_t>(i)])
          sum += p * cur[static_cast<std::size_t>(succ)];
        best = std::max(best, sum);
      }
      next[static_cast<std::size_t>(q)] = best;
    }
    return next;
  };

  if (prop.bound) {
    for (int k = 0; k < *prop.bound; ++k) v = step(v);
  } else {
    constexpr double tol = 1e-9;
    for (int it = 0; it < 10000000; ++it) {
      auto next = step(v);
      double delta = 0.0;
      for (int q = 0; q < n; ++q)
        delta = std::max(delta, std::abs(next[static_cast<std::size_t>(q)] - v[static_cast<std::size_t>(q)]));
      v = std::move(next);
      if (delta < tol) break;
    }
  }
  return v[static_cast<std::size_t>(m.initial)];
}

ReachabilityResult max_state_reachability(const Mdp& m, int target_state) {
  if (target_state < 0 || target_state >= m.num_states())
    throw std::invalid_argument("target state out of range");
  int n = m.num_states();
  std::vector<double> v(static_cast<std::size_t>(n), 0.0);
  v[static_cast<std::size_t>(target_state)] = 1.0;
  constexpr double tol = 1e-6;
  for (int it = 0; it < 1000000; ++it) {
    std::vector<double> next(static_cast<std::size_t>(n), 0.0);
    next[static_cast<std::size_t>(target_state)] = 1.0;
    double delta = 0.0;
    for (int q = 0; q < n; ++q) {
      if (q == target_state) continue;
      double best = 0.0;
      for (int i = 0; i < m.inputs.size(); ++i) {
        double sum = 0.0;
        for (const auto& [succ, p] : m.trans[static_cast<std::size_t>(q)][static_cast<std::size_t>(i)])
          sum += p * v[static_cast<std::size_t>(succ)];
        best = std::max(best, sum);
      }
      next[static_cast<std::size_t>(q)] = best;
      delta = std::max(delta, std::abs(best - v[static_cast<std::size_t>(q)]));
    }
    v = std::move(next);
    if (delta < tol) break;
  }

  MemorylessScheduler sched(static_cast<std::size_t>(n), 0);
  for (int q = 0; q < n; ++q) {
    double best = -1.0;
    int best_input = 0;
    for (int i = 0; i < m.inputs.size(); ++i) {
      double sum = 0.0;
      for (const auto& [succ, p] : m.trans[static_cast<std::size_t>(q)][static_cast<std::size_t>(i)])
        sum += p * v[static_cast<std::size_t>(succ)];
      if (sum > best) {  // strict: ties keep the earliest input
        best = sum;
        best_input = i;
      }
    }
    sched[static_cast<std::size_t>(q)] = best_input;
  }
  return {std::move(v), std::move(sched)};
}

double kantorovich(const std::vector<std::vector<double>>& distance,
                   const std::vector<std::pair<int, double>>& mu1,
                   const std::vector<std::pair<int, double>>& mu2) {
  constexpr double eps = 1e-12;
  double s1 = 0.0, s2 = 0.0;
  for (const auto& [i, p] : mu1) {
    (void)i;
    s1 += p;
  }
  for (const auto& [i, p] : mu2) {
    (void)i;
    s2 += p;
  }
  if (std::abs(s1 - 1.0) > 1e-9 || std::abs(s2 - 1.0) > 1e-9)
    throw std::invalid_argument("kantorovich marginals must sum to 1");

  const int m = static_cast<int>(mu1.size());
  const int n = static_cast<int>(mu2.size());
  std::vector<double> supply(static_cast<std::size_t>(m));
  std::vector<double> demand(static_cast<std::size_t>(n));
  for (int a = 0; a < m; ++a) supply[static_cast<std::size_t>(a)] = mu1[static_cast<std::size_t>(a)].second;
  for (int b = 0; b < n; ++b) demand[static_cast<std::size_t>(b)] = mu2[static_cast<std::size_t>(b)].second;
  std::vector<std::vector<double>> flow(static_cast<std::size_t>(m),
                                        std::vector<double>(static_cast<std::size_t>(n), 0.0));
  auto cost = [&](int a, int b) {
    return distance[static_cast<std::size_t>(mu1[static_cast<std::size_t>(a)].first)]
                   [static_cast<std::size_t>(mu2[static_cast<std::size_t>(b)].first)];
  };

  // Successive shortest augmenting paths on the bipartite residual graph.
  // Nodes: 0 = source, 1..m = supplies, m+1..m+n = demands, m+n+1 = sink.
  const int nodes = m + n + 2;
  const int src = 0, snk = m + n + 1;
  double total = 0.0;
  int augmentations = 0;
  for (;;) {
    double remaining = 0.0;
    for (double s : supply) remaining += s;
    if (remaining <= eps) break;
    if (++augmentations > 10 * (m + n) + 10)
      throw std::logic_error("kantorovich: augmentation limit exceeded");

    std::vector<double> dist_v(static_cast<std::size_t>(nodes), std::numeric_limits<double>::infinity());
    std::vector<int> prev(static_cast<std::size_t>(nodes), -1);
    dist_v[static_cast<std::size_t>(src)] = 0.0;
    // Bellman-Ford; the graph is tiny and residual costs may be negative.
    for (int round = 0; round < nodes; ++round) {
      bool changed = false;
      for (int a = 0; a < m; ++a) {
        if (supply[static_cast<std::size_t>(a)] > eps && dist_v[0] < dist_v[static_cast<std::size_t>(1 + a)]) {
          dist_v[static_cast<std::size_t>(1 + a)] = 0.0;
          prev[static_cast<std::size_t>(1 + a)] = src;
          changed = true;
        }
      }
      for (int a = 0; a < m; ++a) {
        for (int b = 0; b < n; ++b) {
          // forward edge a -> b (unbounded capacity)
          double da = dist_v[static_cast<std::size_t>(1 + a)];
          if (da + cost(a, b) < dist_v[static_cast<std::size_t>(1 + m + b)] - 1e-15) {
            dist_v[static_cast<std::size_t>(1 + m + b)] = da + cost(a, b);
            prev[static_cast<std::size_t>(1 + m + b)] = 1 + a;
            changed = true;
          }
          // residual edge b -> a (capacity = shipped flow)
          double db = dist_v[static_cast<std::size_t>(1 + m + b)];
          if (flow[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] > eps &&
              db - cost(a, b) < dist_v[static_cast<std::size_t>(1 + a)] - 1e-15) {
            dist_v[static_cast<std::size_t>(1 + a)] = db - cost(a, b);
            prev[static_cast<std::size_t>(1 + a)] = 1 + m + b;
            changed = true;
          }
        }
      }
      for (int b = 0; b < n; ++b) {
        if (demand[static_cast<std::size_t>(b)] > eps &&
            dist_v[static_cast<std::size_t>(1 + m + b)] < dist_v[static_cast<std::size_t>(snk)] - 1e-15) {
          dist_v[static_cast<std::size_t>(snk)] = dist_v[static_cast<std::size_t>(1 + m + b)];
          prev[static_cast<std::size_t>(snk)] = 1 + m + b;
          changed = true;
        }
      }
      if (!changed) break;
    }
    if (prev[static_cast<std::size_t>(snk)] < 0)
      throw std::logic_error("kantorovich: no augmenting path despite remaining supply");

    // bottleneck along the path
    double push = std::numeric_limits<double>::infinity();
    for (int v = snk; v != src;) {
      int u = prev[static_cast<std::size_t>(v)];
      if (u == src) {
        push = std::min(push, supply[static_cast<std::size_t>(v - 1)]);
      } else if (v == snk) {
        push = std::min(push, demand[static_cast<std::size_t>(u - 1 - m)]);
      } else if (u <= m) {
        // forward a -> b: unbounded
      } else {
        // residual b -> a
        push = std::min(push, flow[static_cast<std::size_t>(v - 1)][static_cast<std::size_t>(u - 1 - m)]);
      }
      v = u;
    }
    for (int v = snk; v != src;) {
      int u = prev[static_cast<std::size_t>(v)];
      if (u == src) {
        supply[static_cast<std::size_t>(v - 1)] -= push;
      } else if (v == snk) {
        demand[static_cast<std::size_t>(u - 1 - m)] -= push;
      } else if (u <= m) {
        flow[static_cast<std::size_t>(u - 1)][static_cast<std::size_t>(v - 1 - m)] += push;
        total += push * cost(u - 1, v - 1 - m);
      } else {
        flow[static_cast<std::size_t>(v - 1)][static_cast<std::size_t>(u - 1 - m)] -= push;
        total -= push * cost(v - 1, u - 1 - m);
      }
      v = u;
    }
  }
  return total;
}

namespace {

struct PooledView {
  const Mdp* m1;
  const Mdp* m2;
  int n1;

  int total() const { return n1 + m2->num_states(); }
  const std::string& label(int pooled) const {
    if (pooled < n1) return m1->outputs.name(m1->labels[static_cast<std::size_t>(pooled)]);
    return m2->outputs.name(m2->labels[static_cast<std::size_t>(pooled - n1)]);
  }
  // successor distribution in pooled indices
  std::vector<std::pair<int, double>> dist(int pooled, int input) const {
    std::vector<std::pair<int, double>> out;
    if (pooled < n1) {
      for (const auto& [s, p] : m1->trans[static_cast<std::size_t>(pooled)][static_cast<std::size_t>(input)])
        if (p > 0.0) out.emplace_back(s, p);
    } else {
      for (const auto& [s, p] :
           m2->trans[static_cast<std::size_t>(pooled - n1)][static_cast<std::size_t>(input)])
        if (p > 0.0) out.emplace_back(s + n1, p);
    }
    return out;
  }
};

void check_inputs_match(const Mdp& m1, const Mdp& m2) {
  if (m1.inputs != m2.inputs)
    throw std::invalid_argument("distance requires identical input alphabets");
}

}  // namespace

double bisim_distance(const Mdp& m1, const Mdp& m2, const DistanceConfig& cfg) {
  check_inputs_match(m1, m2);
  PooledView pool{&m1, &m2, m1.num_states()};

  // Pair set closed under joint successors, starting from the initial pair.
  // Pairs with unequal labels sit at distance 1 and need no successors.
  std::map<std::pair<int, int>, int> pair_index;
  std::vector<std::pair<int, int>> pairs;
  std::deque<std::pair<int, int>> queue;
  auto add_pair = [&](int x, int y) {
    auto key = std::make_pair(x, y);
    auto it = pair_index.find(key);
    if (it != pair_index.end()) return it->second;
    int idx = static_cast<int>(pairs.size());
    pair_index.emplace(key, idx);
    pairs.push_back(key);
    if (pool.label(x) == pool.label(y)) queue.push_back(key);
    return idx;
  };
  add_pair(m1.initial, m2.initial + pool.n1);
  while (!queue.empty()) {
    auto [x, y] = queue.front();
    queue.pop_front();
    for (int i = 0; i < m1.inputs.size(); ++i) {
      for (const auto& [sx, px] : pool.dist(x, i)) {
        (void)px;
        for (const auto& [sy, py] : pool.dist(y, i)) {
          (void)py;
          add_pair(sx, sy);
        }
      }
    }
  }

  std::vector<double> d(pairs.size(), 0.0);
  for (std::size_t k = 0; k < pairs.size(); ++k)
    d[k] = pool.label(pairs[k].first) == pool.label(pairs[k].second) ? 0.0 : 1.0;

  // d as a ground distance for couplings: only pairs in our closed set are
  // ever queried, by construction.
  double prev_gap = -1.0;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    std::vector<double> next(pairs.size());
    double gap = 0.0;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      auto [x, y] = pairs[k];
      if (pool.label(x) != pool.label(y)) {
        next[k] = 1.0;
        continue;
      }
      double worst = 0.0;
      for (int i = 0; i < m1.inputs.size(); ++i) {
        auto dx = pool.dist(x, i);
        auto dy = pool.dist(y, i);
        // transport under current iterate, via a local distance view
        std::vector<std::vector<double>> ground(dx.size(), std::vector<double>(dy.size(), 0.0));
        for (std::size_t a = 0; a < dx.size(); ++a)
          for (std::size_t b = 0; b < dy.size(); ++b)
            ground[a][b] = d[static_cast<std::size_t>(pair_index.at({dx[a].first, dy[b].first}))];
        std::vector<std::pair<int, double>> mu1, mu2;
        for (std::size_t a = 0; a < dx.size(); ++a) mu1.emplace_back(static_cast<int>(a), dx[a].second);
        for (std::size_t b = 0; b < dy.size(); ++b) mu2.emplace_back(static_cast<int>(b), dy[b].second);
        worst = std::max(worst, cfg.discount * kantorovich(ground, mu1, mu2));
      }
      next[k] = worst;
      gap = std::max(gap, std::abs(next[k] - d[k]));
    }
    d = std::move(next);
    // The map is a discount-factor contraction; successive gaps must shrink
    // accordingly (small slack for float noise).
    assert(prev_gap < 0.0 || gap <= cfg.discount * prev_gap + 1e-9);
    prev_gap = gap;
    if (gap < cfg.tolerance) break;
  }
  return d[static_cast<std::size_t>(pair_index.at({m1.initial, m2.initial + pool.n1}))];
}

std::vector<std::vector<double>> bisim_distance_matrix(const Mdp& m1, const Mdp& m2,
                                                       const DistanceConfig& cfg) {
  check_inputs_match(m1, m2);
  PooledView pool{&m1, &m2, m1.num_states()};
  int n = pool.total();
  std::vector<std::vector<double>> d(static_cast<std::size_t>(n),
                                     std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      d[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] =
          pool.label(x) == pool.label(y) ? 0.0 : 1.0;

  double prev_gap = -1.0;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    auto next = d;
    double gap = 0.0;
    for (int x = 0; x < n; ++x) {
      for (int y = 0; y < n; ++y) {
        if (pool.label(x) != pool.label(y)) {
          next[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] = 1.0;
          continue;
        }
        double worst = 0.0;
        for (int i = 0; i < m1.inputs.size(); ++i) {
          auto dx = pool.dist(x, i);
          auto dy = pool.dist(y, i);
          worst = std::max(worst, cfg.discount * kantorovich(d, dx, dy));
        }
        next[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] = worst;
        gap = std::max(gap, std::abs(worst - d[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)]));
      }
    }
    d = std::move(next);
    assert(prev_gap < 0.0 || gap <= cfg.discount * prev_gap + 1e-9);
    prev_gap = gap;
    if (gap < cfg.tolerance) break;
  }
  return d;
}

}  // namespace mdplearn
