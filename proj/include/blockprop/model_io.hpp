#pragma once

#include "blockprop/tree.hpp"

#include <string>
#include <string_view>

namespace blockprop {

/// Self-describing JSON: mode, params, base score, feature names and one
/// object of flattened node arrays per tree. Doubles are written with
/// round-trip precision, so parse_model(serialize_model(m)) == m.
std::string serialize_model(const TreeEnsemble& model);
TreeEnsemble parse_model(std::string_view json_text);

void save_model(const TreeEnsemble& model, const std::string& path);
TreeEnsemble load_model(const std::string& path);

}  // namespace blockprop
