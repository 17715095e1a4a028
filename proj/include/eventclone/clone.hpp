// SPDX-License-Identifier: Apache-2.0
//
// Clone-detection layer: corpus loading and splits, pair generation, cosine
// scoring, threshold classification, two-model fusion, metrics and sweeps.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eventclone/eventgraph.hpp"
#include "eventclone/model.hpp"

namespace eventclone::clone {

enum class Split { Train, Test };

struct Fragment {
  std::string id;     // "<problem>/<file stem>"
  std::string label;  // problem id
  std::filesystem::path path;
  graph::EventDependencyGraph graph;
  Split split = Split::Train;
};

struct CloneDataset {
  std::vector<Fragment> fragments;
  std::size_t skipped = 0;
  std::vector<std::string> skip_reasons;

  std::vector<std::size_t> indices(Split split) const;
  std::vector<std::string> labels() const;  // sorted, unique
};

struct SourceFragment {
  std::string id;
  std::string label;
  std::string source;
};

/// Parses every fragment, skipping (and counting) the ones that fail, then
/// splits each problem at `train_ratio` after a seeded shuffle.
/// Throws DatasetError when nothing is left or a problem keeps < 2 fragments.
CloneDataset dataset_from_sources(const std::vector<SourceFragment>& sources, double train_ratio,
                                  std::uint64_t seed);
/// Reads `<root>/<problem>/<fragment>.c`.
CloneDataset load_dataset(const std::filesystem::path& root, double train_ratio, std::uint64_t seed);

// -- similarity ---------------------------------------------------------------

/// u.v / (|u||v|) clamped to [-1, 1]. Throws DegenerateVector if a norm is < 1e-12.
double cosine_similarity(std::span<const double> u, std::span<const double> v);
/// Strictly greater than theta.
bool classify_pair(std::span<const double> u, std::span<const double> v, double theta);
double fuse_scores(double s1, double s2, double beta);

// -- pairs and metrics --------------------------------------------------------

enum class PairMode { Unordered, OrderedWithSelf };

struct LabeledPair {
  std::size_t a = 0;  // fragment indices
  std::size_t b = 0;
  bool positive = false;
};

/// Positives are same-problem pairs of the split under `mode`. Negatives are
/// every cross-problem unordered pair unless `negative_count` asks for a seeded
/// uniform sample of that size (DatasetError if it exceeds the available pairs).
std::vector<LabeledPair> make_pairs(const CloneDataset& data, Split split, PairMode mode,
                                    std::optional<std::size_t> negative_count = std::nullopt,
                                    std::uint64_t seed = 0);

struct PairVerdict {
  std::size_t a = 0;
  std::size_t b = 0;
  double similarity = 0.0;
  bool predicted = false;
  bool label = false;
};

struct EvalReport {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  bool precision_defined = false, recall_defined = false, f1_defined = false;
  double theta = 0.0;
  std::optional<double> beta;
  std::string model2;

  std::size_t total() const { return tp + fp + fn + tn; }
};

/// Throws EmptyEval on an empty input.
EvalReport evaluate(std::span<const PairVerdict> verdicts);
/// Scores the pairs at `theta` (strict) and evaluates.
EvalReport evaluate_scores(std::span<const double> scores, std::span<const LabeledPair> pairs, double theta);

std::vector<model::ProgramVector> embed_fragments(const CloneDataset& data, const model::ModelParams& params,
                                                  const model::ModelConfig& config);
std::vector<double> score_pairs(std::span<const LabeledPair> pairs,
                                const std::vector<model::ProgramVector>& embeddings);

struct SweepResult {
  std::vector<EvalReport> reports;  // theta-major, then beta
  std::size_t best = 0;             // argmax F1, first on ties
};

/// One report per (theta, beta) grid point. With no second score vector the
/// beta grid is ignored and reports carry no beta.
SweepResult sweep(std::span<const double> theta_grid, std::span<const double> beta_grid,
                  std::span<const LabeledPair> pairs, std::span<const double> scores1,
                  std::span<const double> scores2 = {});

/// Parses "a:b:step" into an inclusive grid. Throws std::invalid_argument.
std::vector<double> parse_grid(const std::string& spec);

struct Match {
  std::string id;
  double similarity = 0.0;
};

/// Corpus entries with similarity >= theta, descending, ties by id.
std::vector<Match> detect(const model::ProgramVector& target, std::span<const std::string> corpus_ids,
                          const std::vector<model::ProgramVector>& corpus, double theta);

/// "theta beta TP FP FN TN precision recall f1" per line; beta is "-" when absent.
void write_records(std::ostream& out, std::span<const EvalReport> reports);
void write_report(std::ostream& out, const EvalReport& report);
/// "id label split v1 ... vn" per fragment.
void write_embeddings(std::ostream& out, const CloneDataset& data,
                      const std::vector<model::ProgramVector>& embeddings);

}  // namespace eventclone::clone
