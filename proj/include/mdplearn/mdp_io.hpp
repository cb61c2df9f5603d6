#pragma once

#include <stdexcept>
#include <string>

#include "mdplearn/mdp.hpp"

namespace mdplearn {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parses the canonical JSON model format. Structural problems (missing
// fields, unknown state references, bad types) raise ParseError with the
// offending field; numeric invariants are left to validate().
Mdp parse_mdp(const std::string& text);
Mdp load_mdp(const std::string& path);

// Canonical serialization; serialize_mdp(parse_mdp(x)) == x byte-for-byte
// for files produced by this serializer.
std::string serialize_mdp(const Mdp& m);
void save_mdp(const Mdp& m, const std::string& path);

// Graphviz rendering: one node per state labelled "name/output", one edge per
// positive-probability transition labelled "input:prob".
std::string export_dot(const Mdp& m);

}  // namespace mdplearn
