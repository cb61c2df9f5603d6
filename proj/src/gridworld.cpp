#include "mdplearn/gridworld.hpp"

#include <array>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mdplearn {

namespace {

const std::string kTileChars = "#CSMGX";

std::string base_terrain_name(char c) {
  switch (c) {
    case 'C': return "concrete";
    case 'S': return "sand";
    case 'M': return "mud";
    case 'G': return "grass";
    case 'X': return "goal";
    default: throw std::logic_error("no terrain name for wall");
  }
}

struct Delta {
  int dr;
  int dc;
};

// north, east, south, west
constexpr std::array<Delta, 4> kMoves{{{-1, 0}, {0, 1}, {1, 0}, {0, -1}}};
// 45-degree deviations per direction, counterclockwise neighbour first
constexpr std::array<std::array<Delta, 2>, 4> kDeviations{{
    {{{-1, -1}, {-1, 1}}},  // north -> NW, NE
    {{{-1, 1}, {1, 1}}},    // east  -> NE, SE
    {{{1, 1}, {1, -1}}},    // south -> SE, SW
    {{{-1, -1}, {1, -1}}},  // west  -> NW, SW (counterclockwise = SW; keep row-major pair order)
}};

}  // namespace

GridworldSpec parse_gridworld_map(const std::string& text) {
  GridworldSpec spec;
  std::istringstream in(text);
  std::string line;
  char start_terrain = 0;
  bool saw_start = false;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    if (line.find('=') != std::string::npos) {
      if (line.size() != 3 || line[0] != '@' || line[1] != '=')
        throw std::invalid_argument("bad annotation line: " + line);
      start_terrain = line[2];
      if (kTileChars.find(start_terrain) == std::string::npos || start_terrain == '#')
        throw std::invalid_argument("start terrain must be a non-wall tile character");
      continue;
    }
    spec.rows.push_back(line);
  }
  if (spec.rows.size() < 3) throw std::invalid_argument("map needs at least 3 rows");
  std::size_t width = spec.rows.front().size();
  for (std::size_t r = 0; r < spec.rows.size(); ++r) {
    if (spec.rows[r].size() != width) throw std::invalid_argument("map rows must have equal length");
    for (std::size_t c = 0; c < width; ++c) {
      char t = spec.rows[r][c];
      if (t == '@') {
        if (saw_start) throw std::invalid_argument("multiple start markers");
        saw_start = true;
        spec.start_row = static_cast<int>(r);
        spec.start_col = static_cast<int>(c);
        continue;
      }
      if (kTileChars.find(t) == std::string::npos)
        throw std::invalid_argument(std::string("unknown tile character '") + t + "'");
    }
  }
  if (!saw_start) throw std::invalid_argument("map has no start marker '@'");
  if (start_terrain == 0) throw std::invalid_argument("missing start terrain annotation \"@=T\"");
  spec.rows[static_cast<std::size_t>(spec.start_row)][static_cast<std::size_t>(spec.start_col)] =
      start_terrain;
  // border must be wall
  for (std::size_t c = 0; c < width; ++c) {
    if (spec.rows.front()[c] != '#' || spec.rows.back()[c] != '#')
      throw std::invalid_argument("map border must be wall");
  }
  for (const auto& row : spec.rows) {
    if (row.front() != '#' || row.back() != '#')
      throw std::invalid_argument("map border must be wall");
  }
  return spec;
}

GridworldSpec load_gridworld_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open map file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_gridworld_map(buf.str());
}

GridworldBuildResult build_gridworld(const GridworldSpec& spec) {
  const int rows = static_cast<int>(spec.rows.size());
  const int cols = static_cast<int>(spec.rows.front().size());
  auto tile = [&](int r, int c) -> char {
    if (r < 0 || r >= rows || c < 0 || c >= cols) return '#';
    return spec.rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  };
  auto error_of = [&](char t) -> double {
    auto it = spec.error_probs.find(t);
    if (it == spec.error_probs.end())
      throw std::invalid_argument(std::string("no error probability for tile '") + t + "'");
    if (it->second < 0.0 || it->second >= 1.0)
      throw std::invalid_argument("tile error probability must lie in [0,1)");
    return it->second;
  };
  if (tile(spec.start_row, spec.start_col) == '#')
    throw std::invalid_argument("start tile must not be a wall");

  GridworldBuildResult result;
  // position -> label override introduced by determinism repair
  std::map<std::pair<int, int>, std::string> overrides;
  auto label_of = [&](int r, int c) -> std::string {
    auto it = overrides.find({r, c});
    if (it != overrides.end()) return it->second;
    return base_terrain_name(tile(r, c));
  };

  struct Outcome {
    int r, c;
    bool bumped;  // wall hit: stay in place, observe "wall"
    double p;
  };
  auto outcomes_for = [&](int r, int c, int dir) {
    std::vector<Outcome> out;
    int tr = r + kMoves[static_cast<std::size_t>(dir)].dr;
    int tc = c + kMoves[static_cast<std::size_t>(dir)].dc;
    if (tile(tr, tc) == '#') {
      out.push_back({r, c, true, 1.0});
      return out;
    }
    double e = error_of(tile(tr, tc));
    out.push_back({tr, tc, false, 1.0 - e});
    if (e > 0.0) {
      double wall_mass = 0.0;
      for (const auto& dev : kDeviations[static_cast<std::size_t>(dir)]) {
        int dr = r + dev.dr;
        int dc = c + dev.dc;
        if (tile(dr, dc) == '#') {
          wall_mass += e / 2.0;
        } else {
          out.push_back({dr, dc, false, e / 2.0});
        }
      }
      if (wall_mass > 0.0) out.push_back({r, c, true, wall_mass});
    }
    return out;
  };

  // Determinism repair loop: find a (position, direction) whose distinct
  // non-wall outcomes share a label and relabel the later tile, then retry.
  for (;;) {
    bool collision = false;
    for (int r = 0; r < rows && !collision; ++r) {
      for (int c = 0; c < cols && !collision; ++c) {
        if (tile(r, c) == '#') continue;
        for (int dir = 0; dir < 4 && !collision; ++dir) {
          auto outs = outcomes_for(r, c, dir);
          std::set<std::string> seen;
          for (const auto& o : outs) {
            std::string lbl = o.bumped ? "wall" : label_of(o.r, o.c);
            if (!seen.insert(lbl).second) {
              // find a fresh suffixed name for this tile
              int k = 2;
              std::string fresh;
              for (;;) {
                fresh = base_terrain_name(tile(o.r, o.c)) + "_" + std::to_string(k++);
                bool taken = false;
                for (const auto& [pos, name] : overrides)
                  if (name == fresh) taken = true;
                if (!taken) break;
              }
              overrides[{o.r, o.c}] = fresh;
              result.notes.push_back("relabelled tile (" + std::to_string(o.r) + "," +
                                     std::to_string(o.c) + ") to " + fresh +
                                     " to keep observations deterministic");
              collision = true;
              break;
            }
          }
        }
      }
    }
    if (!collision) break;
  }

  // Collect reachable states, then assemble the model. State identity is
  // (position, bumped); the bumped copy behaves like the normal one but is
  // observed as "wall".
  Mdp& m = result.model;
  m.inputs = Alphabet({"north", "east", "south", "west"});

  // output alphabet: canonical terrain order, restricted to what occurs
  std::vector<std::string> base_order = {"concrete", "sand", "mud", "grass", "goal", "wall"};
  std::set<std::string> used;
  std::set<std::string> suffixed;
  std::deque<std::tuple<int, int, bool>> queue;
  std::map<std::tuple<int, int, bool>, int> index;
  queue.push_back({spec.start_row, spec.start_col, false});
  index[{spec.start_row, spec.start_col, false}] = 0;
  std::vector<std::tuple<int, int, bool>> order{{spec.start_row, spec.start_col, false}};
  while (!queue.empty()) {
    auto [r, c, bumped] = queue.front();
    queue.pop_front();
    used.insert(bumped ? "wall" : label_of(r, c));
    for (int dir = 0; dir < 4; ++dir) {
      for (const auto& o : outcomes_for(r, c, dir)) {
        std::tuple<int, int, bool> key{o.r, o.c, o.bumped};
        if (index.find(key) == index.end()) {
          index[key] = static_cast<int>(order.size());
          order.push_back(key);
          queue.push_back(key);
        }
      }
    }
  }
  for (const auto& [pos, name] : overrides) {
    (void)pos;
    suffixed.insert(name);
  }
  for (const auto& name : base_order)
    if (used.count(name)) m.outputs.add(name);
  for (const auto& name : suffixed)
    if (used.count(name)) m.outputs.add(name);

  for (const auto& [r, c, bumped] : order) {
    std::string name = "s" + std::to_string(r) + "_" + std::to_string(c) + (bumped ? "w" : "");
    std::string lbl = bumped ? "wall" : label_of(r, c);
    m.add_state(name, m.outputs.require(lbl));
  }
  m.initial = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    auto [r, c, bumped] = order[k];
    (void)bumped;
    for (int dir = 0; dir < 4; ++dir) {
      std::map<int, double> acc;
      for (const auto& o : outcomes_for(r, c, dir))
        acc[index.at({o.r, o.c, o.bumped})] += o.p;
      StateDistribution dist(acc.begin(), acc.end());
      m.trans[k][static_cast<std::size_t>(dir)] = std::move(dist);
    }
  }
  return result;
}

}  // namespace mdplearn
