// SPDX-License-Identifier: Apache-2.0
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

namespace oracle {

namespace {

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

Vec event_cell(const Vec& a, std::size_t op, const Vec& o, const eventclone::model::ModelParams& p) {
  const std::size_t d = a.size();
  const std::size_t K = p.left[op].shape()[0];
  auto t1 = p.left[op].data();
  auto t2 = p.right[op].data();
  Vec joined(2 * K * d, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t j = 0; j < d; ++j) {
      double l = 0.0, r = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        l += a[i] * t1[k * d * d + i * d + j];
        r += o[i] * t2[k * d * d + i * d + j];
      }
      joined[2 * k * d + j] = l;
      joined[2 * k * d + d + j] = r;
    }
  }
  auto w = p.dense.data();
  Vec out(d);
  for (std::size_t i = 0; i < d; ++i) {
    double s = p.bias.data()[i];
    for (std::size_t j = 0; j < 2 * K * d; ++j) s += w[i * 2 * K * d + j] * joined[j];
    out[i] = std::tanh(s);
  }
  return out;
}

Vec transformer_step(const Vec& prev, std::size_t op, const Vec& o, const eventclone::model::ModelParams& p) {
  const std::size_t d = prev.size();
  auto wr = p.reset_gate.data();
  auto wz = p.update_gate.data();
  Vec r(d), z(d), masked(d);
  for (std::size_t i = 0; i < d; ++i) {
    double sr = 0.0, sz = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      sr += wr[i * 2 * d + j] * prev[j] + wr[i * 2 * d + d + j] * o[j];
      sz += wz[i * 2 * d + j] * prev[j] + wz[i * 2 * d + d + j] * o[j];
    }
    r[i] = sig(sr);
    z[i] = sig(sz);
    masked[i] = r[i] * prev[i];
  }
  Vec cand = event_cell(masked, op, o, p);
  Vec out(d);
  for (std::size_t i = 0; i < d; ++i) out[i] = (1.0 - z[i]) * prev[i] + z[i] * cand[i];
  return out;
}

Vec convolve(const std::vector<Vec>& rows, const eventclone::model::ModelParams& p,
             const eventclone::model::ModelConfig& c) {
  const std::size_t d = c.dim;
  std::vector<Vec> padded(c.pad_len, Vec(d, 0.0));
  for (std::size_t r = 0; r < rows.size(); ++r) padded[r] = rows[r];
  const std::size_t positions = c.pad_len - c.kernel_length + 1;
  const bool full = c.conv == eventclone::model::ConvKernel::FullWidth;
  auto w = p.conv.data();
  Vec q(c.kernels, 0.0);
  for (std::size_t m = 0; m < c.kernels; ++m) {
    double total = 0.0;
    if (full) {
      for (std::size_t t = 0; t < positions; ++t) {
        double z = 0.0;
        for (std::size_t j = 0; j < c.kernel_length; ++j)
          for (std::size_t ch = 0; ch < d; ++ch) z += w[(m * c.kernel_length + j) * d + ch] * padded[t + j][ch];
        total += z;
      }
      q[m] = total / static_cast<double>(positions);
    } else {
      for (std::size_t ch = 0; ch < d; ++ch) {
        for (std::size_t t = 0; t < positions; ++t) {
          double z = 0.0;
          for (std::size_t j = 0; j < c.kernel_length; ++j) z += w[m * c.kernel_length + j] * padded[t + j][ch];
          total += z;
        }
      }
      q[m] = total / static_cast<double>(positions * d);
    }
  }
  return q;
}

std::vector<Vec> restore_filter(const std::vector<Vec>& events, const eventclone::graph::EventDependencyGraph& g) {
  std::vector<std::pair<std::size_t, std::size_t>> finals;
  for (std::size_t i = 0; i < g.nodes.size(); ++i)
    if (g.nodes[i].statement_final) finals.emplace_back(g.nodes[i].statement, i);
  std::sort(finals.begin(), finals.end());
  std::vector<Vec> out;
  for (const auto& [stmt, id] : finals) out.push_back(events[id]);
  return out;
}

namespace {

class ExprGen {
 public:
  ExprGen(eventclone::num::Rng& rng, std::size_t vars) : rng_(rng), vars_(vars) {}

  std::string var(std::set<std::string>& reads) {
    std::string v = "v" + std::to_string(rng_.below(vars_));
    reads.insert(v);
    return v;
  }

  std::string expr(std::set<std::string>& reads, int depth) {
    std::size_t choice = depth <= 0 ? rng_.below(2) : rng_.below(6);
    switch (choice) {
      case 0: return var(reads);
      case 1: return std::to_string(rng_.below(9));
      case 2:
      case 3: {
        static const char* ops[] = {"+", "-", "*", "/", "%", "<", "==", "&&", "|", "<<"};
        std::string l = expr(reads, depth - 1);
        std::string r = expr(reads, depth - 1);
        return "(" + l + " " + ops[rng_.below(10)] + " " + r + ")";
      }
      case 4: return "-(" + expr(reads, depth - 1) + ")";
      default: return "g(" + expr(reads, depth - 1) + ")";
    }
  }

 private:
  eventclone::num::Rng& rng_;
  std::size_t vars_;
};

}  // namespace

StraightLine random_straight_line(std::uint64_t seed, std::size_t max_statements) {
  eventclone::num::Rng rng(seed);
  const std::size_t vars = 2 + rng.below(5);
  const std::size_t count = 1 + rng.below(max_statements);
  ExprGen gen(rng, vars);
  StraightLine out;
  std::string body;
  for (std::size_t s = 0; s < count; ++s) {
    std::set<std::string> reads, writes;
    std::string line;
    switch (rng.below(6)) {
      case 0: {
        std::string rhs = gen.expr(reads, 2);
        std::string target = "v" + std::to_string(rng.below(vars));
        writes.insert(target);
        line = "int " + target + " = " + rhs + ";";
        break;
      }
      case 1: {
        std::string target = gen.var(reads);
        std::string rhs = gen.expr(reads, 2);
        writes.insert(target);
        line = target + " += " + rhs + ";";
        break;
      }
      case 2: {
        std::string target = gen.var(reads);
        writes.insert(target);
        line = target + (rng.below(2) ? "++;" : "--;");
        break;
      }
      case 3: {
        std::string a = gen.expr(reads, 1);
        std::string b = gen.expr(reads, 1);
        line = "h(" + a + ", " + b + ");";
        break;
      }
      default: {
        std::string rhs = gen.expr(reads, 2);
        std::string target = "v" + std::to_string(rng.below(vars));
        writes.insert(target);
        line = target + " = " + rhs + ";";
        break;
      }
    }
    body += "  " + line + "\n";
    out.reads.push_back(std::move(reads));
    out.writes.push_back(std::move(writes));
  }
  out.source = "int f(void) {\n" + body + "}\n";
  return out;
}

std::set<std::pair<std::size_t, std::size_t>> def_use_pairs(const StraightLine& frag) {
  std::set<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t u = 0; u < frag.reads.size(); ++u) {
    for (const auto& v : frag.reads[u]) {
      for (std::size_t f = u; f-- > 0;) {
        if (frag.writes[f].count(v)) {
          out.emplace(f, u);
          break;
        }
      }
    }
  }
  return out;
}

std::string random_fragment(std::uint64_t seed, std::size_t statements) {
  eventclone::num::Rng rng(seed);
  const std::size_t vars = 2 + rng.below(3);
  ExprGen gen(rng, vars);
  std::function<std::string(int)> stmt = [&](int depth) -> std::string {
    std::set<std::string> ignore;
    std::size_t choice = depth > 0 ? rng.below(8) : rng.below(5);
    std::string v = "v" + std::to_string(rng.below(vars));
    switch (choice) {
      case 0: return v + " = " + gen.expr(ignore, 1) + ";";
      case 1: return v + " -= " + gen.expr(ignore, 0) + ";";
      case 2: return "p(" + gen.expr(ignore, 0) + ");";
      case 3: return "return " + gen.expr(ignore, 1) + ";";
      case 4: return "int " + v + " = " + gen.expr(ignore, 0) + ";";
      case 5: return "if (" + gen.expr(ignore, 0) + ") " + stmt(depth - 1);
      case 6: return "while (" + v + " < " + gen.expr(ignore, 0) + ") { " + stmt(depth - 1) + " }";
      default: return "for (" + v + " = 0; " + v + " < 3; " + v + "++) " + stmt(depth - 1);
    }
  };
  std::string body;
  for (std::size_t s = 0; s < statements; ++s) body += "  " + stmt(1) + "\n";
  return "int f(int v0) {\n" + body + "}\n";
}

std::vector<std::vector<std::size_t>> all_topological_orders(std::size_t n,
                                                             const std::set<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<std::size_t> indeg(n, 0);
  std::vector<std::vector<std::size_t>> succ(n);
  for (const auto& [a, b] : edges) {
    ++indeg[b];
    succ[a].push_back(b);
  }
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> current;
  std::vector<bool> used(n, false);
  std::function<void()> rec = [&] {
    if (current.size() == n) {
      out.push_back(current);
      return;
    }
    for (std::size_t v = 0; v < n; ++v) {
      if (used[v] || indeg[v] != 0) continue;
      used[v] = true;
      current.push_back(v);
      for (std::size_t s : succ[v]) --indeg[s];
      rec();
      for (std::size_t s : succ[v]) ++indeg[s];
      current.pop_back();
      used[v] = false;
    }
  };
  rec();
  return out;
}

}  // namespace oracle
