// SPDX-License-Identifier: Apache-2.0
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "eventclone/clone.hpp"
#include "eventclone/cparse.hpp"
#include "eventclone/error.hpp"
#include "eventclone/eventgraph.hpp"
#include "eventclone/model.hpp"
#include "eventclone/train.hpp"

namespace {

using namespace eventclone;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DatasetError("cannot write " + path);
  out << text;
}

struct DataArgs {
  std::string root;
  double ratio = 0.7;
  std::uint64_t seed = 0;

  void add(CLI::App* app) {
    app->add_option("--data", root, "Corpus root laid out as <root>/<problem>/<fragment>.c")->required();
    app->add_option("--split-ratio", ratio, "Train fraction per problem")->check(CLI::Range(0.0, 1.0));
    app->add_option("--split-seed", seed, "Seed of the per-problem split");
  }

  clone::CloneDataset load() const {
    auto data = clone::load_dataset(root, ratio, seed);
    if (data.skipped) std::cerr << "skipped " << data.skipped << " unparseable fragment(s)\n";
    return data;
  }
};

struct Scored {
  std::vector<clone::LabeledPair> pairs;
  std::vector<double> s1, s2;
};

Scored score_test_pairs(const clone::CloneDataset& data, const std::string& ckpt, const std::string& ckpt2) {
  Scored out;
  out.pairs = clone::make_pairs(data, clone::Split::Test, clone::PairMode::Unordered);
  auto [c1, p1] = model::load_checkpoint(ckpt);
  out.s1 = clone::score_pairs(out.pairs, clone::embed_fragments(data, p1, c1));
  if (!ckpt2.empty()) {
    auto [c2, p2] = model::load_checkpoint(ckpt2);
    out.s2 = clone::score_pairs(out.pairs, clone::embed_fragments(data, p2, c2));
  }
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"Semantic code clone detection with event embeddings"};
  app.require_subcommand(1);

  // parse-graph
  std::string pg_file, pg_out;
  bool pg_ast = false;
  auto* pg = app.add_subcommand("parse-graph", "Parse a C fragment and print its event dependency graph");
  pg->add_option("file", pg_file, "C source file")->required();
  pg->add_flag("--emit-ast", pg_ast, "Print the syntax tree instead");
  pg->add_option("-o,--output", pg_out, "Output file (default stdout)");

  // train
  DataArgs tr_data;
  std::string tr_out, tr_history, tr_optimizer = "sgd", tr_conv = "full";
  train::TrainConfig tcfg;
  model::ModelConfig mcfg;
  auto* tr = app.add_subcommand("train", "Train a model on the train split of a corpus");
  tr_data.add(tr);
  tr->add_option("--out", tr_out, "Checkpoint path, rewritten after every epoch")->required();
  tr->add_option("--epochs", tcfg.epochs, "Training epochs");
  tr->add_option("--lr", tcfg.learning_rate, "Learning rate");
  tr->add_option("--seed", tcfg.seed, "Seed for initialization and sampling");
  tr->add_option("--optimizer", tr_optimizer, "sgd or adaptive")->check(CLI::IsMember({"sgd", "adaptive"}));
  tr->add_option("--batch-size", tcfg.batch_size, "Triplets per update")->check(CLI::PositiveNumber);
  tr->add_option("--negatives", tcfg.negatives_per_anchor, "Negatives per anchor")->check(CLI::PositiveNumber);
  tr->add_option("--loss-history", tr_history, "Loss history file (default <out>.loss)");
  tr->add_option("--dim", mcfg.dim, "Embedding width d");
  tr->add_option("--slices", mcfg.slices, "Operator tensor slices K");
  tr->add_option("--kernels", mcfg.kernels, "Convolution kernels");
  tr->add_option("--kernel-length", mcfg.kernel_length, "Convolution kernel length");
  tr->add_option("--pad-len", mcfg.pad_len, "Statements after padding");
  tr->add_option("--top-vocab", mcfg.top_vocab, "Entity ranks with their own vector");
  tr->add_option("--conv", tr_conv, "Kernel layout: full or statement")->check(CLI::IsMember({"full", "statement"}));

  // embed
  std::string em_file, em_model, em_out;
  auto* em = app.add_subcommand("embed", "Print the program vector of one C fragment, one value per line");
  em->add_option("file", em_file, "C source file")->required();
  em->add_option("--model", em_model, "Checkpoint")->required();
  em->add_option("--out", em_out, "Output file (default stdout)");

  // export
  DataArgs ex_data;
  std::string ex_model, ex_out;
  auto* ex = app.add_subcommand("export", "Write one program vector per corpus fragment");
  ex_data.add(ex);
  ex->add_option("--model", ex_model, "Checkpoint")->required();
  ex->add_option("-o,--output", ex_out, "Output file (default stdout)");

  // detect
  std::string dt_file, dt_corpus, dt_model;
  double dt_theta = 0.70;
  auto* dt = app.add_subcommand("detect", "Rank corpus fragments by similarity to a target fragment");
  dt->add_option("target", dt_file, "Target C source file")->required();
  dt->add_option("--corpus", dt_corpus, "Corpus root")->required();
  dt->add_option("--model", dt_model, "Checkpoint")->required();
  dt->add_option("--theta", dt_theta, "Similarity threshold")->check(CLI::Range(-1.0, 1.0));

  // eval
  DataArgs ev_data;
  std::string ev_model, ev_model2, ev_records;
  double ev_beta = 0.60;
  std::optional<double> ev_theta;
  auto* ev = app.add_subcommand("eval", "Evaluate on the test pairs of a corpus");
  ev_data.add(ev);
  ev->add_option("--model", ev_model, "Checkpoint")->required();
  ev->add_option("--model2", ev_model2, "Second checkpoint for score fusion");
  ev->add_option("--beta", ev_beta, "Fusion weight of the first model")->check(CLI::Range(0.0, 1.0));
  ev->add_option("--theta", ev_theta, "Similarity threshold (0.70, or 0.50 when fusing)")->check(CLI::Range(-1.0, 1.0));
  ev->add_option("--records", ev_records, "Machine-readable record file");

  // sweep
  DataArgs sw_data;
  std::string sw_model, sw_model2, sw_theta_grid, sw_beta_grid = "0.6", sw_records;
  auto* sw = app.add_subcommand("sweep", "Evaluate over a threshold grid, and a fusion-weight grid with --model2");
  sw_data.add(sw);
  sw->add_option("--model", sw_model, "Checkpoint")->required();
  sw->add_option("--model2", sw_model2, "Second checkpoint for score fusion");
  sw->add_option("--theta-grid", sw_theta_grid, "a:b:step")->required();
  sw->add_option("--beta-grid", sw_beta_grid, "a:b:step");
  sw->add_option("--records", sw_records, "Machine-readable record file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (pg->parsed()) {
    std::string src = read_file(pg_file);
    if (pg_ast) {
      write_output(pg_out, cparse::dump_ast(cparse::parse_source(src)));
    } else {
      std::vector<std::string> warnings;
      auto g = graph::graph_from_source(src, {&warnings});
      for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
      write_output(pg_out, graph::serialize_graph(g));
    }
    return 0;
  }

  if (tr->parsed()) {
    tcfg.optimizer = tr_optimizer == "adaptive" ? train::Optimizer::Adam : train::Optimizer::Sgd;
    mcfg.conv = tr_conv == "statement" ? model::ConvKernel::StatementAxis : model::ConvKernel::FullWidth;
    try {
      tcfg.validate();
      mcfg.validate();
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    }
    auto data = tr_data.load();
    if (tr_history.empty()) tr_history = tr_out + ".loss";
    std::ofstream history(tr_history, std::ios::trunc);
    if (!history) throw DatasetError("cannot write " + tr_history);
    history << std::setprecision(17);
    train::train(data, mcfg, tcfg, [&](std::size_t epoch, const model::ModelParams& params, double loss) {
      model::save_checkpoint(tr_out, mcfg, params);
      history << epoch << ' ' << loss << '\n' << std::flush;
      std::cerr << "epoch " << epoch << " loss " << loss << '\n';
    });
    return 0;
  }

  if (em->parsed()) {
    auto [cfg, params] = model::load_checkpoint(em_model);
    auto v = model::embed_program(graph::graph_from_source(read_file(em_file)), params, cfg);
    std::ostringstream out;
    out << std::setprecision(17);
    for (double x : v.values) out << x << '\n';
    write_output(em_out, out.str());
    return 0;
  }

  if (ex->parsed()) {
    auto data = ex_data.load();
    auto [cfg, params] = model::load_checkpoint(ex_model);
    std::ostringstream out;
    clone::write_embeddings(out, data, clone::embed_fragments(data, params, cfg));
    write_output(ex_out, out.str());
    return 0;
  }

  if (dt->parsed()) {
    auto [cfg, params] = model::load_checkpoint(dt_model);
    auto corpus = clone::load_dataset(dt_corpus, 1.0, 0);
    std::vector<std::string> ids;
    for (const auto& f : corpus.fragments) ids.push_back(f.id);
    auto target = model::embed_program(graph::graph_from_source(read_file(dt_file)), params, cfg);
    for (const auto& m : clone::detect(target, ids, clone::embed_fragments(corpus, params, cfg), dt_theta))
      std::cout << m.id << ' ' << std::fixed << std::setprecision(6) << m.similarity << '\n';
    return 0;
  }

  if (ev->parsed()) {
    auto data = ev_data.load();
    auto scored = score_test_pairs(data, ev_model, ev_model2);
    double theta = ev_theta.value_or(ev_model2.empty() ? 0.70 : 0.50);
    std::vector<double> betas = {ev_beta};
    auto result = clone::sweep(std::vector<double>{theta}, betas, scored.pairs, scored.s1, scored.s2);
    auto& report = result.reports.front();
    report.model2 = ev_model2;
    clone::write_report(std::cout, report);
    if (!ev_records.empty()) {
      std::ofstream rec(ev_records, std::ios::trunc);
      clone::write_records(rec, result.reports);
    }
    return 0;
  }

  if (sw->parsed()) {
    std::vector<double> thetas, betas;
    try {
      thetas = clone::parse_grid(sw_theta_grid);
      betas = clone::parse_grid(sw_beta_grid);
    } catch (const std::exception& e) {
      std::cerr << "error: bad grid: " << e.what() << '\n';
      return 1;
    }
    auto data = sw_data.load();
    auto scored = score_test_pairs(data, sw_model, sw_model2);
    auto result = clone::sweep(thetas, betas, scored.pairs, scored.s1, scored.s2);
    std::cout << std::setprecision(6);
    for (std::size_t i = 0; i < result.reports.size(); ++i) {
      const auto& r = result.reports[i];
      std::cout << "theta " << r.theta;
      if (r.beta) std::cout << " beta " << *r.beta;
      std::cout << " P " << r.precision << " R " << r.recall << " F1 " << r.f1
                << (i == result.best ? "  <- best" : "") << '\n';
    }
    if (!sw_records.empty()) {
      std::ofstream rec(sw_records, std::ios::trunc);
      clone::write_records(rec, result.reports);
    }
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const eventclone::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.error_class() == eventclone::ErrorClass::Numeric ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
