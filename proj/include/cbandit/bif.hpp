#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cbandit/causal_model.hpp"

namespace cbandit {

struct BifVariable {
  std::string name;
  std::vector<std::string> states;

  bool operator==(const BifVariable&) const = default;
};

/// Structure of a BIF network. Conditional probability numbers are checked
/// for syntax and then dropped.
struct BifNetwork {
  std::string name;
  std::vector<BifVariable> variables;  ///< declaration order
  std::map<std::string, std::vector<std::string>> parent_map;  ///< parents in declared order

  /// Declaration index of `name`, or variables.size() when absent.
  std::size_t find(std::string_view name) const;
  bool operator==(const BifNetwork&) const = default;
};

/// Parses the textual BIF 0.15 subset: `network`, `variable` and
/// `probability` blocks, `property` lines, `//` and `/* */` comments.
/// Throws ParseError with the offending line and column.
BifNetwork parse_bif(std::string_view text);
BifNetwork parse_bif(std::istream& in);
BifNetwork read_bif_file(const std::string& path);

/// Canonical BIF text with uniform probability tables.
std::string write_bif(const BifNetwork& net);

struct BifDag {
  CausalDag dag;
  std::vector<std::string> names;          ///< node index -> variable name
  std::map<std::string, NodeIndex> index;  ///< variable name -> node index
  std::vector<NodeIndex> targets;          ///< parentless nodes, ascending
};

/// Topological relabelling (ties broken by declaration order). Every variable
/// becomes one binary node whatever its declared state count.
BifDag to_causal_dag(const BifNetwork& net);

}  // namespace cbandit
