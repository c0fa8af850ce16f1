#include "treelab/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "treelab/errors.hpp"
#include "treelab/influence.hpp"
#include "treelab/rng.hpp"

namespace treelab {

namespace {

// Substream tags so the generator families never share a stream with the
// oracle's example/noise streams (1 and 2).
constexpr std::uint64_t kTreeStream = 4;
constexpr std::uint64_t kJuntaStream = 5;
constexpr std::uint64_t kMonotoneStream = 6;
constexpr std::uint64_t kMeasureStream = 7;

struct BuildNode {
  int var = -1;
  bool bit = false;
  std::unique_ptr<BuildNode> lo, hi;
};

DecisionTree freeze(const BuildNode& node) {
  if (node.var < 0) return DecisionTree::leaf(node.bit);
  return DecisionTree::internal(node.var, freeze(*node.lo), freeze(*node.hi));
}

}  // namespace

DecisionTree gen_random_tree(int s, int n, std::uint64_t seed) {
  if (n < 1 || n > Input::kMaxVars) throw std::invalid_argument("bad dimension");
  if (s < 1) throw std::invalid_argument("leaf count must be >= 1");
  if (n < 63 && static_cast<std::uint64_t>(s) > (1ULL << n))
    throw std::invalid_argument("leaf count exceeds the cube");

  Rng rng = make_rng(seed, kTreeStream);
  auto root = std::make_unique<BuildNode>();
  root->bit = rand_bit(rng);

  struct LeafRef {
    BuildNode* node;
    std::vector<int> path;
  };
  std::vector<LeafRef> leaves;
  leaves.push_back({root.get(), {}});

  while (static_cast<int>(leaves.size()) < s) {
    std::vector<int> splittable;
    for (int i = 0; i < static_cast<int>(leaves.size()); ++i)
      if (static_cast<int>(leaves[i].path.size()) < n) splittable.push_back(i);
    const int pick = splittable[rand_below(rng, splittable.size())];

    LeafRef leaf = std::move(leaves[pick]);
    leaves.erase(leaves.begin() + pick);

    std::vector<char> used(n, 0);
    for (int v : leaf.path) used[v] = 1;
    std::uint64_t skip = rand_below(rng, n - leaf.path.size());
    int var = 0;
    for (;; ++var) {
      if (used[var]) continue;
      if (skip == 0) break;
      --skip;
    }

    leaf.node->var = var;
    leaf.node->lo = std::make_unique<BuildNode>();
    leaf.node->lo->bit = rand_bit(rng);
    leaf.node->hi = std::make_unique<BuildNode>();
    leaf.node->hi->bit = rand_bit(rng);

    std::vector<int> child_path = leaf.path;
    child_path.push_back(var);
    leaves.push_back({leaf.node->lo.get(), child_path});
    leaves.push_back({leaf.node->hi.get(), std::move(child_path)});
  }

  return freeze(*root);
}

namespace {

DecisionTree junta_subtree(const std::vector<int>& vars, std::size_t level, Rng& rng) {
  if (level == vars.size()) return DecisionTree::leaf(rand_bit(rng));
  DecisionTree lo = junta_subtree(vars, level + 1, rng);
  DecisionTree hi = junta_subtree(vars, level + 1, rng);
  return DecisionTree::internal(vars[level], lo, hi);
}

}  // namespace

DecisionTree gen_junta(int k, int n, std::uint64_t seed) {
  if (n < 1 || n > Input::kMaxVars) throw std::invalid_argument("bad dimension");
  if (k < 0 || k > 12 || k > n) throw std::invalid_argument("junta arity must fit min(n, 12)");

  Rng rng = make_rng(seed, kJuntaStream);
  // Floyd's sampling: k distinct variables out of n, uniform.
  std::vector<int> vars;
  for (int i = n - k; i < n; ++i) {
    const int j = static_cast<int>(rand_below(rng, static_cast<std::uint64_t>(i) + 1));
    if (std::find(vars.begin(), vars.end(), j) == vars.end())
      vars.push_back(j);
    else
      vars.push_back(i);
  }
  std::sort(vars.begin(), vars.end());

  return junta_subtree(vars, 0, rng);
}

TruthTable gen_monotone(int n, std::uint64_t seed) {
  if (n < 1 || n > 16) throw std::invalid_argument("monotone generator caps at 16 variables");
  Rng rng = make_rng(seed, kMonotoneStream);
  TruthTable f = TruthTable::random(n, rng);
  // Upward closure, one coordinate at a time: after processing variable v,
  // f(x) includes the OR over flipping any processed coordinate down.
  for (int v = 0; v < n; ++v) {
    const std::uint64_t step = 1ULL << v;
    for (std::uint64_t x = 0; x < f.size(); ++x)
      if ((x & step) != 0 && f.bit(x ^ step)) f.set_bit(x, true);
  }
  return f;
}

double measure_error(const DecisionTree& h, const TruthTable& target) {
  return distance(tree_to_table(h, target.n()), target);
}

double measure_error(const DecisionTree& h, const Oracle& o, double eps, std::uint64_t seed) {
  if (o.can_materialize()) return distance(tree_to_table(h, o.n()), o.materialized_table());
  const std::int64_t m = error_sample_count(eps);
  Rng rng = make_rng(seed, kMeasureStream);
  std::int64_t bad = 0;
  for (std::int64_t i = 0; i < m; ++i) {
    const Input x = Input::random(o.n(), rng);
    bad += h.eval(x) != o.eval_label(x) ? 1 : 0;
  }
  return static_cast<double>(bad) / static_cast<double>(m);
}

std::int64_t error_sample_count(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0,1)");
  const double tau = eps / 4.0;
  return static_cast<std::int64_t>(std::ceil(std::log(2.0 / 0.01) / (2.0 * tau * tau)));
}

const char* family_name(TargetSpec::Family family) {
  switch (family) {
    case TargetSpec::Family::RandomTree: return "tree";
    case TargetSpec::Family::Junta: return "junta";
    case TargetSpec::Family::MonotoneRandom: return "monotone";
    case TargetSpec::Family::Explicit: return "explicit";
  }
  return "unknown";
}

const char* csv_header() {
  return "family,s_target,n,k_junta,noise,algo,k1,k2,phase_split,lookahead,depth_cap,eps,"
         "delta,mode,seed,trial,err,hyp_size,hyp_depth,mq_count,ex_count,subproblems,wall_ms";
}

namespace {

struct BuiltTarget {
  std::optional<DecisionTree> tree;
  std::optional<TruthTable> table;
  int n = 0;
  int s_echo = 0;
  int k_echo = 0;
};

BuiltTarget build_target(const TargetSpec& spec, std::uint64_t target_seed) {
  BuiltTarget b;
  switch (spec.family) {
    case TargetSpec::Family::RandomTree:
      b.tree = gen_random_tree(spec.s, spec.n, target_seed);
      b.n = spec.n;
      b.s_echo = spec.s;
      break;
    case TargetSpec::Family::Junta:
      b.tree = gen_junta(spec.k, spec.n, target_seed);
      b.n = spec.n;
      b.s_echo = 1 << spec.k;
      b.k_echo = spec.k;
      break;
    case TargetSpec::Family::MonotoneRandom:
      b.table = gen_monotone(spec.n, target_seed);
      b.n = spec.n;
      break;
    case TargetSpec::Family::Explicit: {
      LoadedTarget t = load_target(spec.file);
      b.tree = std::move(t.tree);
      b.table = std::move(t.table);
      b.n = t.n;
      break;
    }
  }
  return b;
}

void run_one(std::ostream& out, const ExperimentCell& cell, int cell_index, int trial,
             std::uint64_t master_seed) {
  const std::uint64_t run_seed =
      mix64(master_seed, mix64(static_cast<std::uint64_t>(cell_index) + 1,
                               static_cast<std::uint64_t>(trial) + 1));
  const TargetSpec& spec = cell.target;
  const std::uint64_t target_seed = spec.seed != 0 ? spec.seed : mix64(run_seed, 1);

  const BuiltTarget built = build_target(spec, target_seed);

  OracleConfig ocfg;
  ocfg.mode = cell.cfg.mode;
  ocfg.noise_rate = spec.noise;
  ocfg.seed = mix64(run_seed, 2);
  ocfg.exact = cell.exact_oracle;
  std::optional<Oracle> holder;
  if (built.tree)
    holder.emplace(*built.tree, built.n, ocfg);
  else
    holder.emplace(*built.table, ocfg);
  const Oracle& oracle = *holder;

  LearnerConfig cfg = cell.cfg;
  cfg.seed = mix64(run_seed, 3);

  LearnResult res;
  if (cell.algo == "greedy") {
    res = learn_greedy(oracle, cfg);
  } else if (cell.algo == "topk") {
    res = learn_topk(oracle, cfg);
  } else if (cell.algo == "adaptive") {
    res = learn_adaptive(oracle, cfg);
  } else if (cell.algo == "dp") {
    res = learn_restriction_dp(oracle.materialized_table(), cfg);
  } else {
    throw std::invalid_argument("unknown algorithm: " + cell.algo);
  }

  double err;
  if (spec.noise == 0.0 && built.tree) {
    err = tree_distance(res.tree, *built.tree);
  } else {
    err = measure_error(res.tree, oracle, cfg.eps, mix64(run_seed, 4));
  }

  const int depth_cap = cfg.resolved_depth();
  int k1 = cfg.schedule.k_at(0, cfg.s);
  int k2 = cfg.schedule.k_at(std::max(0, depth_cap - 1), cfg.s);
  int phase_split = 0;
  if (cfg.schedule.kind == GreedSchedule::Kind::TwoPhase) {
    k1 = cfg.schedule.k1;
    k2 = cfg.schedule.k2;
    phase_split = cfg.schedule.t_star;
  }
  if (cell.algo == "dp") {
    k1 = k2 = cfg.dp_topk;
    phase_split = 0;
  }

  char row[512];
  std::snprintf(row, sizeof(row),
                "%s,%d,%d,%d,%g,%s,%d,%d,%d,%d,%d,%g,%g,%s,%llu,%d,%.10g,%d,%d,%llu,%llu,%lld,%.3f",
                family_name(spec.family), built.s_echo, built.n, built.k_echo, spec.noise,
                cell.algo.c_str(), k1, k2, phase_split, cfg.lookahead, depth_cap, cfg.eps,
                cfg.delta, cfg.mode == AccessMode::MqEx ? "mq" : "ex",
                static_cast<unsigned long long>(run_seed), trial, err, res.tree.size(),
                res.tree.depth(), static_cast<unsigned long long>(res.stats.mq_used),
                static_cast<unsigned long long>(res.stats.ex_used),
                static_cast<long long>(res.stats.subproblems_explored), res.stats.wall_ms);
  out << row << "\n";
  out.flush();
}

}  // namespace

void run_experiment(const std::vector<ExperimentCell>& cells, const ExperimentOptions& opt,
                    const std::string& out_path) {
  if (opt.trials < 0) throw std::invalid_argument("trials must be >= 0");
  if (opt.resume_from_cell < 0) throw std::invalid_argument("resume index must be >= 0");

  std::ofstream out(out_path,
                    opt.resume_from_cell > 0 ? std::ios::app : std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  if (opt.resume_from_cell == 0) out << csv_header() << "\n";

  for (int ci = opt.resume_from_cell; ci < static_cast<int>(cells.size()); ++ci) {
    for (int trial = 0; trial < opt.trials; ++trial) {
      try {
        run_one(out, cells[ci], ci, trial, opt.master_seed);
      } catch (const std::exception& e) {
        std::cerr << "cell " << ci << " trial " << trial << " failed: " << e.what() << "\n";
      }
    }
  }
}

namespace {

TargetSpec::Family parse_family(const std::string& name) {
  if (name == "tree") return TargetSpec::Family::RandomTree;
  if (name == "junta") return TargetSpec::Family::Junta;
  if (name == "monotone") return TargetSpec::Family::MonotoneRandom;
  if (name == "explicit") return TargetSpec::Family::Explicit;
  throw std::invalid_argument("unknown target family: " + name);
}

GreedSchedule parse_schedule(const nlohmann::json& c, int s) {
  const std::string kind = c.value("schedule", std::string{"constant"});
  const int k = c.value("k", 1);
  if (kind == "constant") return GreedSchedule::constant(k);
  if (kind == "polylog") return GreedSchedule::polylog(c.value("c", 2.0));
  if (kind == "two_phase") {
    // "k1" is accepted as an alias for "k": the CSV echoes the phase counts
    // as k1/k2, so that's what people write back.
    const int k1 = c.contains("k1") ? c["k1"].get<int>() : k;
    const int k2 = c.value("k2", 1);
    const int split = c.value("phase_split", -1);
    return GreedSchedule::two_phase(k1, k2, split >= 0 ? split : default_phase_split(s));
  }
  throw std::invalid_argument("unknown schedule: " + kind);
}

ExperimentCell parse_cell(const nlohmann::json& j) {
  ExperimentCell cell;
  const nlohmann::json& t = j.at("target");
  cell.target.family = parse_family(t.at("family").get<std::string>());
  cell.target.s = t.value("s", 1);
  cell.target.k = t.value("k", 0);
  cell.target.n = t.value("n", 1);
  cell.target.noise = t.value("noise", 0.0);
  cell.target.seed = t.value("seed", static_cast<std::uint64_t>(0));
  cell.target.file = t.value("file", std::string{});

  cell.algo = j.value("algo", std::string{"topk"});

  const nlohmann::json& c = j.at("config");
  cell.cfg.s = c.value("s", 1);
  cell.cfg.eps = c.value("eps", 0.1);
  cell.cfg.delta = c.value("delta", 0.1);
  cell.cfg.depth = c.value("depth", -1);
  cell.cfg.lookahead = c.value("lookahead", 0);
  cell.cfg.dp_topk = c.value("dp_topk", 0);
  const std::string mode = c.value("mode", std::string{"mq"});
  if (mode == "mq")
    cell.cfg.mode = AccessMode::MqEx;
  else if (mode == "ex")
    cell.cfg.mode = AccessMode::ExOnly;
  else
    throw std::invalid_argument("unknown mode: " + mode);
  cell.cfg.schedule = parse_schedule(c, cell.cfg.s);
  cell.exact_oracle = c.value("exact", false);
  cell.cfg.validate();
  return cell;
}

}  // namespace

std::vector<ExperimentCell> load_matrix_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open matrix file: " + path);
  nlohmann::json doc = nlohmann::json::parse(in);
  if (!doc.is_array()) throw std::runtime_error("matrix root must be a JSON array");

  std::vector<ExperimentCell> cells;
  cells.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    try {
      cells.push_back(parse_cell(doc[i]));
    } catch (const std::exception& e) {
      std::cerr << "matrix entry " << i << " skipped: " << e.what() << "\n";
    }
  }
  return cells;
}

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

LoadedTarget load_target(const std::string& path) {
  const std::string text = slurp(path);
  LoadedTarget out;

  if (text.find("hex=") != std::string::npos) {
    out.table = parse_table_text(text);
    out.n = out.table->n();
    return out;
  }

  std::size_t pos = 0;
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  if (text.compare(pos, 2, "n=") == 0) {
    pos += 2;
    std::size_t end = pos;
    long n = 0;
    while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end]))) {
      n = n * 10 + (text[end] - '0');
      ++end;
    }
    if (end == pos || n < 1 || n > Input::kMaxVars)
      throw ParseError("bad dimension header", pos);
    out.tree = parse_tree(text.substr(end));
    out.n = static_cast<int>(n);
    out.tree->validate(out.n);
    return out;
  }

  out.tree = parse_tree(text);
  const std::vector<int> vars = out.tree->variables();
  out.n = vars.empty() ? 1 : vars.back() + 1;
  return out;
}

void save_tree(const DecisionTree& t, int n, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "n=" << n << "\n" << serialize_tree(t) << "\n";
  if (!out.good()) throw std::runtime_error("write failed: " + path);
}

void save_table(const TruthTable& f, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_table_text(f);
  if (!out.good()) throw std::runtime_error("write failed: " + path);
}

}  // namespace treelab
