// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>

#include "eventclone/error.hpp"
#include "eventclone/model.hpp"
#include "oracles.hpp"
#include "toy_corpus.hpp"

using namespace eventclone;
using namespace eventclone::model;
using graph::Entity;

namespace {

ModelConfig small(ConvKernel conv = ConvKernel::FullWidth) {
  ModelConfig c;
  c.dim = 4;
  c.slices = 2;
  c.kernels = 5;
  c.kernel_length = 2;
  c.pad_len = 16;
  c.top_vocab = 20;
  c.conv = conv;
  return c;
}

Entity ranked(const char* name, int rank) {
  Entity e = Entity::variable(name);
  e.rank = rank;
  return e;
}

num::Vec random_vec(num::Rng& rng, std::size_t n) {
  num::Vec v(n);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

}  // namespace

TEST_CASE("entity lookup uses the clamped rank row") {
  ModelConfig c = small();
  c.top_vocab = 500;
  CHECK(entity_row(ranked("a", 1), c) == 0);
  CHECK(entity_row(ranked("a", 7), c) == 6);
  CHECK(entity_row(ranked("a", 1000000), c) == 499);
  auto p = ModelParams::initialize(c, 3);
  auto v = lookup_entity(ranked("a", 1000000), p, c);
  CHECK(v == num::Vec(p.entities.matrix().row(499).begin(), p.entities.matrix().row(499).end()));
  CHECK_THROWS_AS(entity_row(Entity::node_ref(0), c), RefError);
  CHECK_THROWS_AS(entity_row(Entity::variable("unranked"), c), RefError);
}

TEST_CASE("event cell on zero parameters is tanh of the bias") {
  ModelConfig c = small();
  auto p = ModelParams::zeros(c);
  for (std::size_t i = 0; i < c.dim; ++i) p.bias[i] = 0.25 * static_cast<double>(i) - 0.3;
  num::Vec a = {1, -2, 3, 0.5}, o = {0.1, 0.2, 0.3, 0.4};
  auto out = event_cell(a, 0, o, p);
  for (std::size_t i = 0; i < c.dim; ++i) CHECK(out[i] == std::tanh(p.bias[i]));
  CHECK_THROWS_AS(event_cell(num::Vec{1, 2}, 0, o, p), ShapeError);
}

TEST_CASE("scalar event cell") {
  ModelConfig c = small();
  c.dim = 1;
  c.slices = 1;
  auto p = ModelParams::zeros(c);
  auto op = graph::ops::id("add");
  p.left[op][0] = 2.0;
  p.right[op][0] = 3.0;
  p.dense[0] = 1.0;
  p.dense[1] = 1.0;
  CHECK(event_cell(num::Vec{1.0}, op, num::Vec{1.0}, p)[0] == std::tanh(5.0));
}

TEST_CASE("cell and step agree with straight-line oracles") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    ModelConfig c = small();
    c.dim = 1 + seed % 6;
    c.slices = 1 + seed % 2;
    auto p = ModelParams::initialize(c, seed);
    num::Rng rng(seed * 31);
    auto a = random_vec(rng, c.dim);
    auto o = random_vec(rng, c.dim);
    auto op = static_cast<graph::OperatorId>(rng.below(graph::kOperatorCount));
    auto got = event_cell(a, op, o, p);
    auto want = oracle::event_cell(a, op, o, p);
    for (std::size_t i = 0; i < c.dim; ++i) CHECK(std::abs(got[i] - want[i]) <= 1e-12);
    auto s = event_transformer_step(a, op, o, p);
    auto sw = oracle::transformer_step(a, op, o, p);
    for (std::size_t i = 0; i < c.dim; ++i) CHECK(std::abs(s[i] - sw[i]) <= 1e-12);
  }
}

TEST_CASE("transformer step gating") {
  ModelConfig c = small();
  auto p = ModelParams::initialize(c, 9);
  p.update_gate.fill(0.0);
  num::Rng rng(4);
  auto prev = random_vec(rng, c.dim);
  auto o = random_vec(rng, c.dim);
  auto op = graph::ops::id("mul");
  auto out = event_transformer_step(prev, op, o, p);

  auto joined = num::concat(prev, o);
  auto rv = num::sigmoid(num::matvec(p.reset_gate, joined));
  auto cand = event_cell(num::hadamard(rv, prev), op, o, p);
  for (std::size_t i = 0; i < c.dim; ++i) CHECK(out[i] == doctest::Approx(0.5 * prev[i] + 0.5 * cand[i]));

  auto q = ModelParams::zeros(c);
  q.reset_gate = p.reset_gate;
  q.update_gate = ModelParams::initialize(c, 10).update_gate;
  num::Vec fixed(c.dim);
  for (std::size_t i = 0; i < c.dim; ++i) {
    fixed[i] = 0.1 * static_cast<double>(i + 1);
    q.bias[i] = std::atanh(fixed[i]);
  }
  auto held = event_transformer_step(fixed, op, o, q);
  for (std::size_t i = 0; i < c.dim; ++i) CHECK(held[i] == doctest::Approx(fixed[i]).epsilon(1e-14));
}

TEST_CASE("step output lies between the previous state and the candidate") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    ModelConfig c = small();
    auto p = ModelParams::initialize(c, seed);
    num::Rng rng(seed + 100);
    auto prev = random_vec(rng, c.dim);
    auto o = random_vec(rng, c.dim);
    auto rv = num::sigmoid(num::matvec(p.reset_gate, num::concat(prev, o)));
    auto cand = event_cell(num::hadamard(rv, prev), 3, o, p);
    auto out = event_transformer_step(prev, 3, o, p);
    for (std::size_t i = 0; i < c.dim; ++i) {
      CHECK(out[i] >= std::min(prev[i], cand[i]) - 1e-15);
      CHECK(out[i] <= std::max(prev[i], cand[i]) + 1e-15);
    }
  }
}

TEST_CASE("single-node graph embeds to one transformer step") {
  ModelConfig c = small();
  auto p = ModelParams::initialize(c, 2);
  auto g = graph::graph_from_source("void f() { a = 1; }");
  auto e = embed_graph(g, p, c);
  REQUIRE(e.rows.size() == 1);
  auto want = event_transformer_step(lookup_entity(g.nodes[0].entity1, p, c), g.nodes[0].op,
                                     lookup_entity(g.nodes[0].entity2, p, c), p);
  CHECK(e.rows[0] == want);
}

TEST_CASE("chain inputs prefer entity1 unless only entity2 is a node-ref") {
  graph::EventNode n{0, Entity::variable("a"), 0, Entity::node_ref(0), 0, true};
  auto [s, o] = chain_inputs(n);
  CHECK(s == &n.entity2);
  CHECK(o == &n.entity1);
  n.entity1 = Entity::node_ref(1);
  auto [s2, o2] = chain_inputs(n);
  CHECK(s2 == &n.entity1);
  CHECK(o2 == &n.entity2);
}

TEST_CASE("embedding is invariant to the topological processing order") {
  ModelConfig c = small();
  auto p = ModelParams::initialize(c, 5);
  for (const char* src : {"void f() { this.printf(\"hello\", p); }", "void f() { x = (a + b) * (c - d); }",
                          "void f() { x = 1; y = 2; z = x + y; }"}) {
    auto g = graph::graph_from_source(src);
    auto base = embed_graph(g, p, c);
    auto orders = oracle::all_topological_orders(g.nodes.size(), g.edges);
    CHECK(!orders.empty());
    for (const auto& ord : orders) CHECK(embed_graph(g, p, c, ord).rows == base.rows);
  }
  auto g = graph::graph_from_source("void f() { x = (a + b) * (c - d); }");
  std::vector<graph::NodeId> bad = {2, 0, 1, 3};
  CHECK_THROWS_AS(embed_graph(g, p, c, bad), GraphError);
  std::vector<graph::NodeId> short_order = {0, 1, 2};
  CHECK_THROWS_AS(embed_graph(g, p, c, short_order), GraphError);
}

TEST_CASE("restore keeps statement-final rows in statement order") {
  auto g = graph::graph_from_source("void f() { this.printf(\"hello\", p); }");
  EventEmbeddingMatrix e{{{0.0}, {1.0}, {2.0}}};
  CHECK(restore(e, g).rows == std::vector<num::Vec>{{2.0}});

  auto three = graph::graph_from_source("void f() { a = 1; b = 2; c = 3; }");
  CHECK(restore(e, three).rows == e.rows);

  auto fig = graph::graph_from_source(
      "int f(int n) { int maxs = 0; int i; for (i = 0; i < n; i++) maxs = maxs + i; printf(\"%d\", maxs); }");
  EventEmbeddingMatrix ids;
  for (std::size_t i = 0; i < fig.nodes.size(); ++i) ids.rows.push_back({static_cast<double>(i)});
  auto rows = restore(ids, fig).rows;
  CHECK(rows.size() == fig.statement_count);
  CHECK(rows == oracle::restore_filter(ids.rows, fig));
  CHECK(rows.back()[0] == static_cast<double>(fig.nodes.size() - 1));

  EventEmbeddingMatrix wrong{{{0.0}}};
  CHECK_THROWS_AS(restore(wrong, g), ShapeError);
}

TEST_CASE("convolution") {
  ModelConfig c;
  c.dim = 1;
  c.kernels = 1;
  c.kernel_length = 1;
  c.pad_len = 3;
  for (ConvKernel mode : {ConvKernel::StatementAxis, ConvKernel::FullWidth}) {
    c.conv = mode;
    auto p = ModelParams::zeros(c);
    p.conv[0] = 1.0;
    ProgramEmbeddingMatrix x{{{1.0}, {2.0}, {3.0}}};
    CHECK(convolve(x, p, c).values == num::Vec{2.0});
    ProgramEmbeddingMatrix four{{{1.0}, {2.0}, {3.0}, {4.0}}};
    CHECK_THROWS_AS(convolve(four, p, c), ShapeError);
    CHECK_THROWS_AS(convolve(ProgramEmbeddingMatrix{}, p, c), ShapeError);
  }

  for (ConvKernel mode : {ConvKernel::StatementAxis, ConvKernel::FullWidth}) {
    ModelConfig s = small(mode);
    auto zero = ModelParams::zeros(s);
    ProgramEmbeddingMatrix x{{{1, 2, 3, 4}, {5, 6, 7, 8}}};
    CHECK(convolve(x, zero, s).values == num::Vec(s.kernels, 0.0));
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      auto p = ModelParams::initialize(s, seed);
      num::Rng rng(seed);
      ProgramEmbeddingMatrix m;
      for (std::size_t r = 0, n = 1 + rng.below(s.pad_len); r < n; ++r) m.rows.push_back(random_vec(rng, s.dim));
      auto got = convolve(m, p, s).values;
      auto want = oracle::convolve(m.rows, p, s);
      for (std::size_t i = 0; i < s.kernels; ++i) CHECK(std::abs(got[i] - want[i]) <= 1e-12);
    }
  }
}

TEST_CASE("program vectors") {
  ModelConfig c = small();
  c.pad_len = 64;
  auto p = ModelParams::initialize(c, 8);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto g = graph::graph_from_source(toy::render_fragment(seed % toy::kProblems, seed));
    auto v = embed_program(g, p, c);
    CHECK(v.values.size() == c.kernels);
    CHECK(embed_program(g, p, c) == v);
    auto t = trace_program(g, p, c);
    CHECK(t.vector == v);
    CHECK(t.finals.size() == g.statement_count);
  }
  auto a = graph::graph_from_source("int f(int n){int s=0;while(n>0){s+=n%10;n/=10;}return s;}");
  auto b = graph::graph_from_source(
      "int f(int n)\n{\n  int s = 0; /* sum */\n  while (n > 0) {\n    s += n % 10;\n    n /= 10;\n  }\n  return s;\n}\n");
  auto r = graph::graph_from_source("int g(int k){int t=0;while(k>0){t+=k%10;k/=10;}return t;}");
  CHECK(embed_program(a, p, c) == embed_program(b, p, c));
  CHECK(embed_program(a, p, c) == embed_program(r, p, c));

  ModelConfig tiny = c;
  tiny.pad_len = 2;
  auto q = ModelParams::initialize(tiny, 8);
  CHECK_THROWS_AS(embed_program(a, q, tiny), ShapeError);
}

TEST_CASE("parameter shapes") {
  for (ConvKernel mode : {ConvKernel::StatementAxis, ConvKernel::FullWidth}) {
    ModelConfig c = small(mode);
    auto p = ModelParams::initialize(c, 1);
    CHECK(p.left.size() == graph::kOperatorCount);
    CHECK(p.left[0].shape() == std::vector<std::size_t>{2, 4, 4});
    CHECK(p.reset_gate.shape() == std::vector<std::size_t>{4, 8});
    CHECK(p.dense.shape() == std::vector<std::size_t>{4, 16});
    CHECK(p.entities.shape() == std::vector<std::size_t>{20, 4});
    if (mode == ConvKernel::FullWidth)
      CHECK(p.conv.shape() == std::vector<std::size_t>{5, 2, 4});
    else
      CHECK(p.conv.shape() == std::vector<std::size_t>{5, 2});
    for (double b : p.bias.data()) CHECK(b == 0.0);
    CHECK(ModelParams::initialize(c, 1) == p);
    CHECK_FALSE(ModelParams::initialize(c, 2) == p);
    CHECK_NOTHROW(p.check(c));
    std::size_t named = 0;
    p.for_each([&](const std::string&, const Tensor&) { ++named; });
    CHECK(named == 2 * graph::kOperatorCount + 6);
    p.dense[3] = NAN;
    CHECK_THROWS_AS(p.check(c), NumericError);
  }
  ModelConfig bad = small();
  bad.kernel_length = 17;
  CHECK_THROWS_AS(bad.validate(), ShapeError);
  bad = small();
  bad.dim = 0;
  CHECK_THROWS_AS(bad.validate(), ShapeError);
}

TEST_CASE("checkpoints round-trip and reject corruption") {
  for (ConvKernel mode : {ConvKernel::StatementAxis, ConvKernel::FullWidth}) {
    ModelConfig c = small(mode);
    auto p = ModelParams::initialize(c, 12);
    auto bytes = encode_checkpoint(c, p);
    CHECK(bytes.rfind("EDAM1", 0) == 0);
    auto [c2, p2] = decode_checkpoint(bytes);
    CHECK(c2 == c);
    CHECK(p2 == p);
    CHECK(encode_checkpoint(c2, p2) == bytes);

    CHECK_THROWS_AS(decode_checkpoint(bytes.substr(0, bytes.size() - 3)), CheckpointError);
    CHECK_THROWS_AS(decode_checkpoint(bytes + "x"), CheckpointError);
    CHECK_THROWS_AS(decode_checkpoint(""), CheckpointError);
    std::string magic = bytes;
    magic[0] = 'X';
    CHECK_THROWS_AS(decode_checkpoint(magic), CheckpointError);
    std::string nan = bytes;
    double q = NAN;
    std::memcpy(nan.data() + nan.size() - sizeof q, &q, sizeof q);
    CHECK_THROWS_AS(decode_checkpoint(nan), CheckpointError);
    std::string renamed = bytes;
    auto at = renamed.find("W_r");
    REQUIRE(at != std::string::npos);
    renamed[at] = 'Q';
    CHECK_THROWS_AS(decode_checkpoint(renamed), CheckpointError);
  }

  auto path = std::filesystem::temp_directory_path() / "eventclone_test_model.ckpt";
  ModelConfig c = small();
  auto p = ModelParams::initialize(c, 4);
  save_checkpoint(path, c, p);
  auto [lc, lp] = load_checkpoint(path);
  CHECK(lc == c);
  CHECK(lp == p);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_checkpoint(path), CheckpointError);
}
