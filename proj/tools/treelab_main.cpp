#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "treelab/harness.hpp"
#include "treelab/influence.hpp"
#include "treelab/learners.hpp"
#include "treelab/oracle.hpp"
#include "treelab/restriction.hpp"
#include "treelab/rng.hpp"

namespace {

using namespace treelab;

// Substream tags shared with the harness so CLI runs reproduce library runs.
constexpr std::uint64_t kOracleStream = 2;
constexpr std::uint64_t kLearnStream = 3;
constexpr std::uint64_t kMeasureStream = 4;

AccessMode parse_mode(const std::string& mode) {
  return mode == "ex" ? AccessMode::ExOnly : AccessMode::MqEx;
}

struct GenArgs {
  std::string family;
  int s = 8;
  int k = 4;
  int n = 8;
  std::uint64_t seed = 0;
  std::string out;
};

int run_gen(const GenArgs& a) {
  if (a.family == "tree") {
    const DecisionTree t = gen_random_tree(a.s, a.n, a.seed);
    save_tree(t, a.n, a.out);
    std::printf("wrote tree: n=%d leaves=%d depth=%d -> %s\n", a.n, t.size(), t.depth(),
                a.out.c_str());
  } else if (a.family == "junta") {
    const DecisionTree t = gen_junta(a.k, a.n, a.seed);
    save_tree(t, a.n, a.out);
    std::printf("wrote junta: n=%d k=%d leaves=%d -> %s\n", a.n, a.k, t.size(), a.out.c_str());
  } else {
    const TruthTable f = gen_monotone(a.n, a.seed);
    save_table(f, a.out);
    std::printf("wrote monotone table: n=%d ones=%llu -> %s\n", a.n,
                static_cast<unsigned long long>(f.ones()), a.out.c_str());
  }
  return 0;
}

struct LearnArgs {
  std::string target;
  std::string algo;
  int s = 8;
  double eps = 0.1;
  double delta = 0.1;
  int k = 0;
  int k2 = 0;
  int phase_split = -1;
  int lookahead = 0;
  int depth = -1;
  std::string mode = "mq";
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::string out;
};

GreedSchedule schedule_for(const LearnArgs& a) {
  if (a.algo == "topk")
    return a.k > 0 ? GreedSchedule::constant(a.k) : GreedSchedule::polylog(2.0);
  if (a.algo == "adaptive") {
    const int k1 = a.k > 0 ? a.k : GreedSchedule::polylog(2.0).k_at(0, a.s);
    const int k2 = a.k2 > 0 ? a.k2 : 1;
    const int split = a.phase_split >= 0 ? a.phase_split : default_phase_split(a.s);
    return GreedSchedule::two_phase(k1, k2, split);
  }
  return GreedSchedule::constant(1);
}

int run_learn(const LearnArgs& a) {
  const LoadedTarget tgt = load_target(a.target);

  OracleConfig ocfg;
  ocfg.mode = parse_mode(a.mode);
  ocfg.noise_rate = a.noise;
  ocfg.seed = mix64(a.seed, kOracleStream);
  std::optional<Oracle> oracle;
  if (tgt.tree)
    oracle.emplace(*tgt.tree, tgt.n, ocfg);
  else
    oracle.emplace(*tgt.table, ocfg);

  LearnerConfig cfg;
  cfg.s = a.s;
  cfg.eps = a.eps;
  cfg.delta = a.delta;
  cfg.depth = a.depth;
  cfg.lookahead = a.lookahead;
  cfg.mode = ocfg.mode;
  cfg.seed = mix64(a.seed, kLearnStream);
  cfg.schedule = schedule_for(a);
  if (a.algo == "dp" && a.k > 0) cfg.dp_topk = a.k;

  LearnResult res;
  if (a.algo == "greedy")
    res = learn_greedy(*oracle, cfg);
  else if (a.algo == "topk")
    res = learn_topk(*oracle, cfg);
  else if (a.algo == "adaptive")
    res = learn_adaptive(*oracle, cfg);
  else
    res = learn_restriction_dp(oracle->materialized_table(), cfg);

  double err;
  if (a.noise == 0.0 && tgt.tree)
    err = tree_distance(res.tree, *tgt.tree);
  else
    err = measure_error(res.tree, *oracle, a.eps, mix64(a.seed, kMeasureStream));

  std::printf("size=%d depth=%d err=%.10g mq=%llu ex=%llu subproblems=%lld wall_ms=%.3f\n",
              res.tree.size(), res.tree.depth(), err,
              static_cast<unsigned long long>(res.stats.mq_used),
              static_cast<unsigned long long>(res.stats.ex_used),
              static_cast<long long>(res.stats.subproblems_explored), res.stats.wall_ms);
  if (!a.out.empty()) save_tree(res.tree, tgt.n, a.out);
  return 0;
}

struct EvalArgs {
  std::string hypothesis;
  std::string target;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
};

int run_eval(const EvalArgs& a) {
  const LoadedTarget hyp = load_target(a.hypothesis);
  const LoadedTarget tgt = load_target(a.target);
  if (!hyp.tree) throw std::invalid_argument("hypothesis file must hold a tree");

  double err;
  const char* method;
  std::int64_t used = 0;
  if (a.samples > 0) {
    const int n = tgt.table ? tgt.n : std::max(hyp.n, tgt.n);
    hyp.tree->validate(n);
    Rng rng = make_rng(a.seed, kMeasureStream);
    std::int64_t bad = 0;
    for (std::int64_t i = 0; i < a.samples; ++i) {
      const Input x = Input::random(n, rng);
      const bool want = tgt.tree ? tgt.tree->eval(x) : tgt.table->eval(x);
      bad += hyp.tree->eval(x) != want ? 1 : 0;
    }
    err = static_cast<double>(bad) / static_cast<double>(a.samples);
    method = "sampled";
    used = a.samples;
  } else if (tgt.tree) {
    err = tree_distance(*hyp.tree, *tgt.tree);
    method = "exact";
  } else {
    hyp.tree->validate(tgt.n);
    err = distance(tree_to_table(*hyp.tree, tgt.n), *tgt.table);
    method = "exact";
  }
  std::printf("err=%.10g method=%s samples=%lld\n", err, method, static_cast<long long>(used));
  return 0;
}

struct InfluenceArgs {
  std::string target;
  std::string restriction;
  double tau = 0.05;
  double delta = 0.05;
  std::string mode = "mq";
};

int run_influence(const InfluenceArgs& a) {
  const LoadedTarget tgt = load_target(a.target);
  const Restriction pi = Restriction::parse(a.restriction);
  if (pi.max_var() >= tgt.n)
    throw std::invalid_argument("restriction fixes a variable outside the target");

  OracleConfig ocfg;
  ocfg.mode = parse_mode(a.mode);
  std::optional<Oracle> oracle;
  if (tgt.tree)
    oracle.emplace(*tgt.tree, tgt.n, ocfg);
  else
    oracle.emplace(*tgt.table, ocfg);

  const EstimationBudget budget(a.tau, a.delta);
  Rng rng = make_rng(0, pi.hash());
  const InfluenceVector iv = influence_profile(*oracle, pi, budget, rng);
  for (std::size_t i = 0; i < iv.vars.size(); ++i)
    std::printf("x%d %.6f\n", iv.vars[i], iv.scores[i]);
  return 0;
}

struct BenchArgs {
  std::string matrix;
  int trials = 1;
  std::uint64_t seed = 0;
  std::string out;
  int resume = 0;
};

int run_bench(const BenchArgs& a) {
  const std::vector<ExperimentCell> cells = load_matrix_json(a.matrix);
  ExperimentOptions opt;
  opt.trials = a.trials;
  opt.master_seed = a.seed;
  opt.resume_from_cell = a.resume;
  run_experiment(cells, opt, a.out);
  std::printf("ran %zu cells x %d trials -> %s\n", cells.size(), a.trials, a.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decision-tree proper-learning laboratory"};
  app.require_subcommand(1);

  GenArgs g;
  CLI::App* gen = app.add_subcommand("gen", "generate a target function file");
  gen->add_option("--family", g.family, "tree | junta | monotone")
      ->required()
      ->check(CLI::IsMember({"tree", "junta", "monotone"}));
  gen->add_option("--s", g.s, "leaf count for tree targets");
  gen->add_option("--k", g.k, "arity for junta targets");
  gen->add_option("--n", g.n, "ambient dimension")->required();
  gen->add_option("--seed", g.seed, "generator seed");
  gen->add_option("--out", g.out, "output file")->required();

  LearnArgs l;
  CLI::App* learn = app.add_subcommand("learn", "learn a tree from a target file");
  learn->add_option("--target", l.target)->required();
  learn->add_option("--algo", l.algo, "greedy | topk | adaptive | dp")
      ->required()
      ->check(CLI::IsMember({"greedy", "topk", "adaptive", "dp"}));
  learn->add_option("--s", l.s, "hypothesis leaf budget")->required();
  learn->add_option("--eps", l.eps, "target error");
  learn->add_option("--delta", l.delta, "failure budget");
  learn->add_option("--k", l.k, "candidates per level (0 = schedule default)");
  learn->add_option("--k2", l.k2, "adaptive: candidates after the phase split");
  learn->add_option("--phase-split", l.phase_split, "adaptive: switch level (-1 = default)");
  learn->add_option("--lookahead", l.lookahead, "joint scoring depth (0 = influence only)");
  learn->add_option("--depth", l.depth, "depth cap (-1 = ceil(log2(s/eps)))");
  learn->add_option("--mode", l.mode)->check(CLI::IsMember({"mq", "ex"}));
  learn->add_option("--noise", l.noise, "corrupted input fraction");
  learn->add_option("--seed", l.seed);
  learn->add_option("--out", l.out, "write the hypothesis here");

  EvalArgs e;
  CLI::App* eval = app.add_subcommand("eval", "disagreement between hypothesis and target");
  eval->add_option("--hypothesis", e.hypothesis)->required();
  eval->add_option("--target", e.target)->required();
  eval->add_option("--samples", e.samples, "0 = exact");
  eval->add_option("--seed", e.seed);

  InfluenceArgs f;
  CLI::App* infl = app.add_subcommand("influence", "influence profile under a restriction");
  infl->add_option("--target", f.target)->required();
  infl->add_option("--restriction", f.restriction, "e.g. \"x3=1,x7=0\"");
  infl->add_option("--tau", f.tau, "estimate accuracy");
  infl->add_option("--delta", f.delta, "estimate failure probability");
  infl->add_option("--mode", f.mode)->check(CLI::IsMember({"mq", "ex"}));

  BenchArgs b;
  CLI::App* bench = app.add_subcommand("bench", "run an experiment matrix to CSV");
  bench->add_option("--matrix", b.matrix, "JSON matrix file")->required();
  bench->add_option("--trials", b.trials);
  bench->add_option("--seed", b.seed, "master seed");
  bench->add_option("--out", b.out, "CSV path")->required();
  bench->add_option("--resume", b.resume, "skip cells below this index and append");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return run_gen(g);
    if (learn->parsed()) return run_learn(l);
    if (eval->parsed()) return run_eval(e);
    if (infl->parsed()) return run_influence(f);
    if (bench->parsed()) return run_bench(b);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
