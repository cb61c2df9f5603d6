#pragma once

#include <map>
#include <string>
#include <vector>

#include "mdplearn/mdp.hpp"

namespace mdplearn {

// A rectangular tile world. Tile characters:
//   '#' wall   'C' concrete   'S' sand   'M' mud   'G' grass   'X' goal
// The border must consist of walls. Movement inputs are north/east/south/
// west. Entering a tile succeeds with probability 1 - error(tile); the
// remaining mass is split between the two 45-degree neighbours of the
// intended direction. Any move (direct or deviated) into a wall leaves the
// position unchanged and is observed as "wall"; otherwise the entered tile's
// terrain (or "goal") is observed.
struct GridworldSpec {
  std::vector<std::string> rows;  // tile characters, start tile already resolved to terrain
  int start_row = 0;
  int start_col = 0;
  // error probability per tile character
  std::map<char, double> error_probs = {
      {'C', 0.0}, {'S', 0.2}, {'M', 0.4}, {'G', 0.1}, {'X', 0.0}};
};

struct GridworldBuildResult {
  Mdp model;
  // Disambiguation notes: when two distinct tiles reachable under one
  // (state, input) share a terrain label, the later tile is relabelled with a
  // numeric suffix to preserve determinism; each such rewrite is reported.
  std::vector<std::string> notes;
};

// Parses the textual map format: grid lines, then an annotation line "@=T"
// giving the terrain under the start marker '@'.
GridworldSpec parse_gridworld_map(const std::string& text);
GridworldSpec load_gridworld_map(const std::string& path);

GridworldBuildResult build_gridworld(const GridworldSpec& spec);

}  // namespace mdplearn
