#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace vertexkit::text {

std::string trim(std::string_view s);

// Split a sum at top-level '+'/'-' signs.  Each piece keeps its sign as a
// leading '-' (or none).  A sign directly after '^', '*', '/' or '(' is part
// of an exponent or factor and does not split.
std::vector<std::string> split_sum(std::string_view s);

// Split a product at top-level '*'.
std::vector<std::string> split_product(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

bool parse_int(std::string_view s, long& out);

}  // namespace vertexkit::text
