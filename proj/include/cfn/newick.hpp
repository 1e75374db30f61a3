#pragma once

#include <string>

#include "cfn/tree.hpp"

namespace cfn {

struct NewickTree {
  BalancedTree tree;
  EdgeParams params;
};

/// Newick with integer leaf labels (leaf index + 1). Branch lengths are
/// -ln(theta) so path lengths add; a leaf branch carries its attenuation as
/// a `[&eta=...]` comment when eta differs from 1.
std::string to_newick(const BalancedTree& tree, const EdgeParams& params);

/// Topology only: every branch has length 1.
std::string to_newick(const BalancedTree& tree);

/// Parses the format written by to_newick. Missing branch lengths mean
/// theta = 1, missing eta means 1. Throws ParseError with the position of
/// the first problem, ModelError if the tree is not balanced.
NewickTree parse_newick(const std::string& text);

}  // namespace cfn
