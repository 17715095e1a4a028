// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "eventclone/clone.hpp"
#include "eventclone/error.hpp"
#include "toy_corpus.hpp"

using namespace eventclone;
using namespace eventclone::clone;
using num::Vec;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("eventclone_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

PairVerdict verdict(bool predicted, bool label) { return {0, 0, 0.0, predicted, label}; }

}  // namespace

TEST_CASE("cosine similarity") {
  Vec v = {0.3, -2.0, 5.5};
  CHECK(cosine_similarity(v, v) == 1.0);
  CHECK(cosine_similarity(Vec{1, 0}, Vec{0, 1}) == 0.0);
  CHECK(cosine_similarity(v, Vec{-0.3, 2.0, -5.5}) == -1.0);
  num::Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    Vec a(6), b(6);
    for (double& x : a) x = rng.uniform(-1, 1);
    for (double& x : b) x = rng.uniform(-1, 1);
    double s = cosine_similarity(a, b);
    CHECK(s == cosine_similarity(b, a));
    CHECK(s >= -1.0);
    CHECK(s <= 1.0);
  }
  CHECK_THROWS_AS(cosine_similarity(Vec{0, 0}, Vec{1, 0}), DegenerateVector);
  CHECK_THROWS_AS(cosine_similarity(Vec{1}, Vec{1, 0}), ShapeError);
}

TEST_CASE("classification is strict") {
  Vec v = {1, 2, 3};
  CHECK_FALSE(classify_pair(v, v, 1.0));
  CHECK(classify_pair(v, v, 0.999));
  CHECK(classify_pair(Vec{1, 0}, Vec{-1, 0.0001}, -1.0));
  std::vector<LabeledPair> pairs = {{0, 1, true}, {0, 2, false}};
  std::vector<double> scores = {0.75, 0.70};
  auto r = evaluate_scores(scores, pairs, 0.70);
  CHECK(r.tp == 1);
  CHECK(r.tn == 1);
  CHECK(r.fp == 0);
}

TEST_CASE("fusion") {
  CHECK(fuse_scores(0.9, 0.4, 0.6) == doctest::Approx(0.70).epsilon(1e-15));
  CHECK(fuse_scores(0.37, -0.8, 1.0) == 0.37);
  CHECK(fuse_scores(-0.2, -0.2, 0.3) == doctest::Approx(-0.2).epsilon(1e-15));
  for (double b = 0.0; b <= 1.0; b += 0.1) {
    double f = fuse_scores(0.9, 0.4, b);
    CHECK(f >= 0.4 - 1e-15);
    CHECK(f <= 0.9 + 1e-15);
  }
}

TEST_CASE("metrics") {
  std::vector<PairVerdict> v;
  for (int i = 0; i < 2; ++i) v.push_back(verdict(true, true));
  v.push_back(verdict(true, false));
  for (int i = 0; i < 2; ++i) v.push_back(verdict(false, true));
  for (int i = 0; i < 5; ++i) v.push_back(verdict(false, false));
  auto r = evaluate(v);
  CHECK(r.tp == 2);
  CHECK(r.fp == 1);
  CHECK(r.fn == 2);
  CHECK(r.tn == 5);
  CHECK(r.total() == 10);
  CHECK(r.precision == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(r.recall == 0.5);
  CHECK(r.f1 == doctest::Approx(4.0 / 7.0).epsilon(1e-15));

  std::vector<PairVerdict> perfect = {verdict(true, true), verdict(false, false)};
  auto p = evaluate(perfect);
  CHECK(p.precision == 1.0);
  CHECK(p.recall == 1.0);
  CHECK(p.f1 == 1.0);

  std::vector<PairVerdict> none = {verdict(false, true), verdict(false, false)};
  auto n = evaluate(none);
  CHECK_FALSE(n.precision_defined);
  CHECK(n.precision == 0.0);
  CHECK(n.recall_defined);
  CHECK(n.recall == 0.0);
  CHECK_FALSE(n.f1_defined);

  CHECK_THROWS_AS(evaluate(std::vector<PairVerdict>{}), EmptyEval);
}

TEST_CASE("dataset split sizes and pair counts") {
  auto data = dataset_from_sources(toy::make_corpus(100, 3), 0.7, 11);
  CHECK(data.fragments.size() == 1000);
  CHECK(data.skipped == 0);
  CHECK(data.indices(Split::Train).size() == 700);
  CHECK(data.indices(Split::Test).size() == 300);
  CHECK(data.labels().size() == 10);

  auto pairs = make_pairs(data, Split::Test, PairMode::Unordered);
  std::size_t pos = 0, neg = 0;
  for (const auto& p : pairs) (p.positive ? pos : neg)++;
  CHECK(pos == 4350);
  CHECK(neg == 40500);

  auto ordered = make_pairs(data, Split::Train, PairMode::OrderedWithSelf, 0);
  CHECK(ordered.size() == 10 * 70 * 70);

  auto sampled = make_pairs(data, Split::Test, PairMode::Unordered, 1000, 4);
  auto again = make_pairs(data, Split::Test, PairMode::Unordered, 1000, 4);
  std::size_t sneg = 0;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& p : sampled) {
    if (p.positive) continue;
    ++sneg;
    CHECK(data.fragments[p.a].label != data.fragments[p.b].label);
    seen.emplace(p.a, p.b);
  }
  CHECK(sneg == 1000);
  CHECK(seen.size() == 1000);
  CHECK(sampled.size() == again.size());
  for (std::size_t i = 0; i < sampled.size(); ++i) CHECK(sampled[i].b == again[i].b);
  CHECK_THROWS_AS(make_pairs(data, Split::Test, PairMode::Unordered, 40501), DatasetError);
}

TEST_CASE("split is deterministic per seed") {
  auto src = toy::make_corpus(10, 2);
  auto a = dataset_from_sources(src, 0.7, 5);
  auto b = dataset_from_sources(src, 0.7, 5);
  auto c = dataset_from_sources(src, 0.7, 6);
  std::vector<Split> sa, sb, sc;
  for (const auto& f : a.fragments) sa.push_back(f.split);
  for (const auto& f : b.fragments) sb.push_back(f.split);
  for (const auto& f : c.fragments) sc.push_back(f.split);
  CHECK(sa == sb);
  CHECK(sa != sc);
  for (const auto& label : a.labels()) {
    std::size_t train = 0;
    for (const auto& f : a.fragments) train += f.label == label && f.split == Split::Train;
    CHECK(train == 7);
  }
}

TEST_CASE("dataset errors and skipped fragments") {
  CHECK_THROWS_AS(dataset_from_sources({}, 0.7, 0), DatasetError);
  auto src = toy::make_corpus(3, 1);
  src.push_back({"p10/f000", "p10", "int f() { return 1; }"});
  CHECK_THROWS_AS(dataset_from_sources(src, 0.7, 0), DatasetError);
  src.back() = {"p00/bad", "p00", "int f( { return 1; }"};
  src.push_back({"p00/unsupported", "p00", "void f(int x) { switch (x) { } }"});
  auto d = dataset_from_sources(src, 0.7, 0);
  CHECK(d.skipped == 2);
  CHECK(d.skip_reasons.size() == 2);
  CHECK(d.fragments.size() == 30);
}

TEST_CASE("loading a corpus directory") {
  auto root = scratch_dir("load");
  toy::write_corpus(root, 6, 9);
  std::ofstream(root / "README.txt") << "not a problem";
  std::ofstream(root / "p00" / "notes.md") << "ignored";
  auto d = load_dataset(root, 0.5, 1);
  auto direct = dataset_from_sources(toy::make_corpus(6, 9), 0.5, 1);
  REQUIRE(d.fragments.size() == direct.fragments.size());
  for (std::size_t i = 0; i < d.fragments.size(); ++i) {
    CHECK(d.fragments[i].id == direct.fragments[i].id);
    CHECK(d.fragments[i].split == direct.fragments[i].split);
    CHECK(d.fragments[i].graph == direct.fragments[i].graph);
  }
  CHECK_THROWS_AS(load_dataset(root / "missing", 0.7, 0), DatasetError);
  auto empty = scratch_dir("empty");
  CHECK_THROWS_AS(load_dataset(empty, 0.7, 0), DatasetError);
  std::filesystem::remove_all(root);
  std::filesystem::remove_all(empty);
}

TEST_CASE("sweeps") {
  num::Rng rng(2);
  std::vector<LabeledPair> pairs;
  std::vector<double> s1, s2;
  for (std::size_t i = 0; i < 200; ++i) {
    bool pos = rng.below(3) == 0;
    pairs.push_back({i, i + 1, pos});
    s1.push_back(rng.uniform(-1, 1) * 0.5 + (pos ? 0.4 : 0.0));
    s2.push_back(rng.uniform(-1, 1));
  }
  std::vector<double> minus_one = {-1.0};
  auto low = sweep(minus_one, {}, pairs, s1);
  REQUIRE(low.reports.size() == 1);
  CHECK(low.reports[0].recall == 1.0);
  CHECK_FALSE(low.reports[0].beta);

  auto grid = parse_grid("-1:1:0.05");
  auto r = sweep(grid, {}, pairs, s1);
  REQUIRE(r.reports.size() == grid.size());
  for (std::size_t i = 1; i < r.reports.size(); ++i)
    CHECK(r.reports[i].tp + r.reports[i].fp <= r.reports[i - 1].tp + r.reports[i - 1].fp);
  for (const auto& rep : r.reports) CHECK(rep.f1 <= r.reports[r.best].f1);
  for (std::size_t i = 0; i < r.best; ++i) CHECK(r.reports[i].f1 < r.reports[r.best].f1);

  std::vector<double> betas = {0.0, 0.5, 1.0};
  auto fused = sweep(grid, betas, pairs, s1, s2);
  REQUIRE(fused.reports.size() == grid.size() * 3);
  CHECK(fused.reports[2].theta == grid[0]);
  CHECK(fused.reports[2].beta == std::optional<double>(1.0));
  CHECK(fused.reports[3].theta == grid[1]);
  for (std::size_t t = 0; t < grid.size(); ++t) {
    const auto& one = fused.reports[3 * t + 2];
    CHECK(one.tp == r.reports[t].tp);
    CHECK(one.fp == r.reports[t].fp);
  }
}

TEST_CASE("grid parsing") {
  auto g = parse_grid("0.5:0.9:0.1");
  REQUIRE(g.size() == 5);
  CHECK(g[0] == 0.5);
  CHECK(g[4] == doctest::Approx(0.9));
  CHECK(parse_grid("0.7") == std::vector<double>{0.7});
  CHECK(parse_grid("-1:1:0.01").size() == 201);
  CHECK_THROWS_AS(parse_grid("1:0:0.1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid("0:1:0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid("a:b:c"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid(""), std::invalid_argument);
}

TEST_CASE("detection ranks by similarity") {
  std::vector<std::string> ids = {"b", "a", "c", "d"};
  std::vector<model::ProgramVector> corpus = {{{1, 0, 0}}, {{1, 0, 0}}, {{1, 1, 0}}, {{0, 0, 1}}};
  model::ProgramVector target{{1, 0, 0}};
  auto m = detect(target, ids, corpus, 0.5);
  REQUIRE(m.size() == 3);
  CHECK(m[0].id == "a");
  CHECK(m[0].similarity == 1.0);
  CHECK(m[1].id == "b");
  CHECK(m[2].id == "c");
  auto exact = detect(target, ids, corpus, 1.0);
  CHECK(exact.size() == 2);
  CHECK(detect(target, {}, {}, 0.0).empty());
}

TEST_CASE("embedding fragments and scoring pairs") {
  model::ModelConfig c;
  c.dim = 6;
  c.kernels = 8;
  c.pad_len = 64;
  c.top_vocab = 16;
  auto data = dataset_from_sources(toy::make_corpus(4, 5), 0.5, 0);
  auto params = model::ModelParams::initialize(c, 1);
  auto e = embed_fragments(data, params, c);
  REQUIRE(e.size() == data.fragments.size());
  auto pairs = make_pairs(data, Split::Test, PairMode::Unordered);
  auto s = score_pairs(pairs, e);
  REQUIRE(s.size() == pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i)
    CHECK(s[i] == cosine_similarity(e[pairs[i].a].values, e[pairs[i].b].values));

  std::ostringstream out;
  write_embeddings(out, data, e);
  std::string first;
  std::getline(std::istringstream(out.str()), first);
  CHECK(first.rfind(data.fragments[0].id + " " + data.fragments[0].label + " ", 0) == 0);
}

TEST_CASE("record output") {
  EvalReport r;
  r.tp = 2;
  r.fp = 1;
  r.fn = 2;
  r.tn = 5;
  r.precision = 0.5;
  r.recall = 0.25;
  r.f1 = 1.0 / 3.0;
  r.theta = 0.7;
  std::ostringstream out;
  std::vector<EvalReport> one = {r};
  write_records(out, one);
  CHECK(out.str().rfind("0.69999999999999996 - 2 1 2 5 0.5 0.25 ", 0) == 0);
  r.beta = 0.6;
  std::ostringstream fused;
  std::vector<EvalReport> two = {r};
  write_records(fused, two);
  CHECK(fused.str().find(" 0.59999999999999998 2 1 2 5 ") != std::string::npos);
}
