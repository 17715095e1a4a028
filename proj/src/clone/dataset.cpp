// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "eventclone/clone.hpp"
#include "eventclone/error.hpp"

namespace eventclone::clone {

namespace fs = std::filesystem;

std::vector<std::size_t> CloneDataset::indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fragments.size(); ++i) {
    if (fragments[i].split == split) out.push_back(i);
  }
  return out;
}

std::vector<std::string> CloneDataset::labels() const {
  std::set<std::string> s;
  for (const auto& f : fragments) s.insert(f.label);
  return {s.begin(), s.end()};
}

namespace {

CloneDataset build(const std::vector<SourceFragment>& sources, const std::vector<fs::path>& paths,
                   double ratio, std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw DatasetError("split ratio must lie in [0, 1]");
  if (sources.empty()) throw DatasetError("dataset has no fragments");

  CloneDataset data;
  std::map<std::string, std::vector<Fragment>> problems;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const auto& s = sources[i];
    problems[s.label];
    try {
      Fragment f{s.id, s.label, paths.empty() ? fs::path() : paths[i], graph::graph_from_source(s.source),
                 Split::Train};
      if (f.graph.statement_count == 0) throw GraphError("no statements");
      problems[s.label].push_back(std::move(f));
    } catch (const Error& e) {
      ++data.skipped;
      data.skip_reasons.push_back(s.id + ": " + e.what());
    }
  }

  num::Rng rng(seed);
  for (auto& [label, frags] : problems) {
    if (frags.size() < 2) {
      throw DatasetError("problem " + label + " has " + std::to_string(frags.size()) +
                         " usable fragments, at least 2 are required");
    }
    std::sort(frags.begin(), frags.end(), [](const Fragment& a, const Fragment& b) { return a.id < b.id; });
    std::vector<std::size_t> order(frags.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(frags.size())));
    std::vector<bool> is_train(frags.size(), false);
    for (std::size_t i = 0; i < n_train; ++i) is_train[order[i]] = true;
    for (std::size_t i = 0; i < frags.size(); ++i) {
      frags[i].split = is_train[i] ? Split::Train : Split::Test;
      data.fragments.push_back(std::move(frags[i]));
    }
  }
  return data;
}

}  // namespace

CloneDataset dataset_from_sources(const std::vector<SourceFragment>& sources, double train_ratio,
                                  std::uint64_t seed) {
  return build(sources, {}, train_ratio, seed);
}

CloneDataset load_dataset(const fs::path& root, double train_ratio, std::uint64_t seed) {
  if (!fs::is_directory(root)) throw DatasetError(root.string() + " is not a directory");
  std::vector<SourceFragment> sources;
  std::vector<fs::path> paths;
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".c") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      std::ifstream in(file, std::ios::binary);
      if (!in) throw DatasetError("cannot read " + file.string());
      std::ostringstream ss;
      ss << in.rdbuf();
      std::string label = dir.filename().string();
      sources.push_back({label + "/" + file.stem().string(), label, ss.str()});
      paths.push_back(file);
    }
  }
  if (sources.empty()) throw DatasetError("no .c fragments under " + root.string());
  return build(sources, paths, train_ratio, seed);
}

}  // namespace eventclone::clone
