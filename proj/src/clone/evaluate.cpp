// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "eventclone/clone.hpp"
#include "eventclone/error.hpp"

namespace eventclone::clone {

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  double uu = num::dot(u, u);
  double vv = num::dot(v, v);
  if (!(std::sqrt(uu) >= 1e-12) || !(std::sqrt(vv) >= 1e-12))
    throw DegenerateVector("cosine similarity of a vector with norm below 1e-12");
  double c = num::dot(u, v) / std::sqrt(uu * vv);
  return std::clamp(c, -1.0, 1.0);
}

bool classify_pair(std::span<const double> u, std::span<const double> v, double theta) {
  return cosine_similarity(u, v) > theta;
}

double fuse_scores(double s1, double s2, double beta) {
  return beta * s1 + (1.0 - beta) * s2;
}

std::vector<LabeledPair> make_pairs(const CloneDataset& data, Split split, PairMode mode,
                                    std::optional<std::size_t> negative_count, std::uint64_t seed) {
  auto idx = data.indices(split);
  std::vector<LabeledPair> positives, negatives;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const auto& a = data.fragments[idx[i]];
      const auto& b = data.fragments[idx[j]];
      if (a.label == b.label) {
        if (mode == PairMode::OrderedWithSelf || i < j) positives.push_back({idx[i], idx[j], true});
      } else if (i < j) {
        negatives.push_back({idx[i], idx[j], false});
      }
    }
  }
  if (negative_count && *negative_count > negatives.size())
    throw DatasetError("requested " + std::to_string(*negative_count) + " negative pairs, only " +
                       std::to_string(negatives.size()) + " exist");
  if (negative_count && *negative_count < negatives.size()) {
    num::Rng rng(seed);
    // Partial Fisher-Yates keeps the first `count` of a uniform permutation.
    for (std::size_t i = 0; i < *negative_count; ++i) {
      std::size_t j = i + rng.below(negatives.size() - i);
      std::swap(negatives[i], negatives[j]);
    }
    negatives.resize(*negative_count);
  }
  positives.insert(positives.end(), negatives.begin(), negatives.end());
  return positives;
}

EvalReport evaluate(std::span<const PairVerdict> verdicts) {
  if (verdicts.empty()) throw EmptyEval();
  EvalReport r;
  for (const auto& v : verdicts) {
    if (v.predicted && v.label) ++r.tp;
    else if (v.predicted) ++r.fp;
    else if (v.label) ++r.fn;
    else ++r.tn;
  }
  if (r.tp + r.fp > 0) {
    r.precision = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp);
    r.precision_defined = true;
  }
  if (r.tp + r.fn > 0) {
    r.recall = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn);
    r.recall_defined = true;
  }
  if (r.precision_defined && r.recall_defined) {
    r.f1_defined = true;
    double s = r.precision + r.recall;
    r.f1 = s > 0.0 ? 2.0 * r.precision * r.recall / s : 0.0;
  }
  return r;
}

EvalReport evaluate_scores(std::span<const double> scores, std::span<const LabeledPair> pairs, double theta) {
  if (scores.size() != pairs.size()) throw std::invalid_argument("score and pair counts differ");
  std::vector<PairVerdict> verdicts;
  verdicts.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i)
    verdicts.push_back({pairs[i].a, pairs[i].b, scores[i], scores[i] > theta, pairs[i].positive});
  EvalReport r = evaluate(verdicts);
  r.theta = theta;
  return r;
}

std::vector<model::ProgramVector> embed_fragments(const CloneDataset& data, const model::ModelParams& params,
                                                  const model::ModelConfig& config) {
  std::vector<model::ProgramVector> out;
  out.reserve(data.fragments.size());
  for (const auto& f : data.fragments) out.push_back(model::embed_program(f.graph, params, config));
  return out;
}

std::vector<double> score_pairs(std::span<const LabeledPair> pairs,
                                const std::vector<model::ProgramVector>& embeddings) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs)
    out.push_back(cosine_similarity(embeddings.at(p.a).values, embeddings.at(p.b).values));
  return out;
}

SweepResult sweep(std::span<const double> theta_grid, std::span<const double> beta_grid,
                  std::span<const LabeledPair> pairs, std::span<const double> scores1,
                  std::span<const double> scores2) {
  if (theta_grid.empty()) throw std::invalid_argument("empty theta grid");
  const bool fused = !scores2.empty();
  if (fused && beta_grid.empty()) throw std::invalid_argument("empty beta grid");
  if (fused && scores2.size() != scores1.size()) throw std::invalid_argument("score vectors differ in length");

  SweepResult result;
  std::vector<double> fusedscores(scores1.size());
  for (double theta : theta_grid) {
    if (!fused) {
      result.reports.push_back(evaluate_scores(scores1, pairs, theta));
      continue;
    }
    for (double beta : beta_grid) {
      for (std::size_t i = 0; i < scores1.size(); ++i) fusedscores[i] = fuse_scores(scores1[i], scores2[i], beta);
      EvalReport r = evaluate_scores(fusedscores, pairs, theta);
      r.beta = beta;
      result.reports.push_back(r);
    }
  }
  for (std::size_t i = 1; i < result.reports.size(); ++i) {
    if (result.reports[i].f1 > result.reports[result.best].f1) result.best = i;
  }
  return result;
}

std::vector<double> parse_grid(const std::string& spec) {
  auto c1 = spec.find(':');
  auto c2 = c1 == std::string::npos ? std::string::npos : spec.find(':', c1 + 1);
  if (c2 == std::string::npos) {
    double v = std::stod(spec);
    return {v};
  }
  double a = std::stod(spec.substr(0, c1));
  double b = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
  double step = std::stod(spec.substr(c2 + 1));
  if (!(step > 0.0) || !(b >= a)) throw std::invalid_argument("grid needs a <= b and step > 0: " + spec);
  auto n = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(a + static_cast<double>(i) * step);
  return out;
}

std::vector<Match> detect(const model::ProgramVector& target, std::span<const std::string> corpus_ids,
                          const std::vector<model::ProgramVector>& corpus, double theta) {
  if (corpus_ids.size() != corpus.size()) throw std::invalid_argument("corpus ids and vectors differ in length");
  std::vector<Match> out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    double s = cosine_similarity(target.values, corpus[i].values);
    if (s >= theta) out.push_back({corpus_ids[i], s});
  }
  std::sort(out.begin(), out.end(), [](const Match& a, const Match& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.id < b.id;
  });
  return out;
}

void write_records(std::ostream& out, std::span<const EvalReport> reports) {
  auto flags = out.flags();
  out << std::setprecision(17);
  for (const auto& r : reports) {
    out << r.theta << ' ';
    if (r.beta) out << *r.beta;
    else out << '-';
    out << ' ' << r.tp << ' ' << r.fp << ' ' << r.fn << ' ' << r.tn << ' ' << r.precision << ' ' << r.recall
        << ' ' << r.f1 << '\n';
  }
  out.flags(flags);
}

void write_report(std::ostream& out, const EvalReport& r) {
  auto metric = [&](const char* name, double v, bool defined) {
    out << "  " << name << ": " << std::fixed << std::setprecision(4) << v;
    if (!defined) out << " (undefined)";
    out << '\n';
  };
  out << "theta " << r.theta;
  if (r.beta) out << "  beta " << *r.beta;
  if (!r.model2.empty()) out << "  model2 " << r.model2;
  out << "\n  TP " << r.tp << "  FP " << r.fp << "  FN " << r.fn << "  TN " << r.tn << '\n';
  metric("precision", r.precision, r.precision_defined);
  metric("recall", r.recall, r.recall_defined);
  metric("f1", r.f1, r.f1_defined);
  out.unsetf(std::ios::floatfield);
}

void write_embeddings(std::ostream& out, const CloneDataset& data,
                      const std::vector<model::ProgramVector>& embeddings) {
  auto flags = out.flags();
  out << std::setprecision(17);
  for (std::size_t i = 0; i < data.fragments.size(); ++i) {
    const auto& f = data.fragments[i];
    out << f.id << ' ' << f.label << ' ' << (f.split == Split::Train ? "train" : "test");
    for (double x : embeddings.at(i).values) out << ' ' << x;
    out << '\n';
  }
  out.flags(flags);
}

}  // namespace eventclone::clone
