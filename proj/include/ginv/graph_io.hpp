#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "ginv/graph.hpp"

namespace ginv {

// Graph JSONL: one object per line with fields n, edges, attrs (optional) and
// label (optional). Blank lines are skipped.
std::vector<Graph> read_graphs(std::istream& in);
std::vector<Graph> read_graphs(const std::filesystem::path& path);

void write_graphs(std::ostream& out, const std::vector<Graph>& graphs);
void write_graphs(const std::filesystem::path& path, const std::vector<Graph>& graphs);

}  // namespace ginv
