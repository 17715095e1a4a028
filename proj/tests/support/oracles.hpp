// SPDX-License-Identifier: Apache-2.0
//
// Straight-line reference implementations used to cross-check the library.
// They index raw parameter storage directly and share no code with the model.
#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "eventclone/model.hpp"

namespace oracle {

using Vec = std::vector<double>;

Vec event_cell(const Vec& a, std::size_t op, const Vec& o, const eventclone::model::ModelParams& p);
Vec transformer_step(const Vec& prev, std::size_t op, const Vec& o, const eventclone::model::ModelParams& p);
/// Pads, convolves position by position and averages, with no window-sum shortcut.
Vec convolve(const std::vector<Vec>& rows, const eventclone::model::ModelParams& p,
             const eventclone::model::ModelConfig& c);

/// Rows of `events` whose node is statement-final, ordered by statement index.
std::vector<Vec> restore_filter(const std::vector<Vec>& events, const eventclone::graph::EventDependencyGraph& g);

/// Random straight-line fragment with its per-statement read and write sets.
struct StraightLine {
  std::string source;
  std::vector<std::set<std::string>> reads;
  std::vector<std::set<std::string>> writes;
};
StraightLine random_straight_line(std::uint64_t seed, std::size_t max_statements);

/// (def statement, use statement) pairs: for every variable read by a
/// statement, the latest earlier statement that wrote it.
std::set<std::pair<std::size_t, std::size_t>> def_use_pairs(const StraightLine& frag);

/// Small random function body mixing assignments, calls and control flow.
std::string random_fragment(std::uint64_t seed, std::size_t statements);

/// Every topological order of the graph's edge relation.
std::vector<std::vector<std::size_t>> all_topological_orders(std::size_t n,
                                                             const std::set<std::pair<std::size_t, std::size_t>>& edges);

}  // namespace oracle
