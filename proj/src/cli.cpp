#include "perch/cli.hpp"

#include <chrono>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>

#include "CLI11.hpp"
#include "perch/errors.hpp"
#include "perch/io.hpp"
#include "perch/metrics.hpp"
#include "perch/rotation.hpp"

namespace perch {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct ClusterArgs {
  std::string input;
  std::string order = "given";
  std::uint64_t seed = 0;
  std::string mode = "approx";
  std::string rotations = "full";
  std::string search = "astar";
  std::size_t beam_width = 5;
  std::optional<std::size_t> collapse;
  unsigned threads = 1;
  std::string output;
  std::string trace;
};

struct EvaluateArgs {
  std::string tree;
  std::string input;
  std::string dp = "exact";
  std::size_t mc_samples = 50000;
  std::uint64_t seed = 0;
  std::string flat;
};

struct ExtractArgs {
  std::string tree;
  std::size_t k = 1;
  std::string output;
};

struct GenArgs {
  SeparableOptions options;
  std::string output;
};

void run_cluster(const ClusterArgs& a, std::ostream& out) {
  ModeConfig cfg;
  cfg.masking_check = a.mode == "exact" ? MaskingCheck::kExact
                                        : MaskingCheck::kApprox;
  static const std::map<std::string, Rotations> kRotations{
      {"none", Rotations::kNone},
      {"masking", Rotations::kMasking},
      {"full", Rotations::kMaskingAndBalance}};
  cfg.rotations = kRotations.at(a.rotations);
  cfg.search = a.search == "beam" ? SearchKind::kBeam : SearchKind::kAStar;
  cfg.beam_width = a.beam_width;
  cfg.collapse_bound = a.collapse;
  cfg.search_threads = a.threads;
  cfg.validate();

  const Dataset ds = load_dataset(a.input);
  const auto order = order_stream(ds, {parse_order_kind(a.order), a.seed});

  std::ofstream trace;
  if (!a.trace.empty()) {
    trace.open(a.trace);
    if (!trace) throw ParseError(a.trace + ": cannot open for writing");
    trace << "i\tpoint\tseconds\tdepth\tmasking_rotations\tbalance_rotations\n";
  }

  ClusterTree tree(cfg);
  std::size_t masking = 0;
  std::size_t balance = 0;
  const auto start = Clock::now();
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Point& p = ds.points[order[i]];
    const auto t0 = Clock::now();
    const InsertStats s = insert(tree, p);
    const double dt = seconds_since(t0);
    masking += s.masking_rotations;
    balance += s.balance_rotations;
    if (trace.is_open()) {
      trace << i << '\t' << p.id << '\t' << format_real(dt) << '\t'
            << tree.depth(tree.leaf_of(p.id)) << '\t' << s.masking_rotations
            << '\t' << s.balance_rotations << '\n';
    }
  }
  const double elapsed = seconds_since(start);
  save_tree(a.output, tree);

  out << "n\t" << tree.num_points() << '\n';
  out << "leaves\t" << tree.num_leaves() << '\n';
  out << "max_depth\t" << tree.max_depth() << '\n';
  out << "masking_rotations\t" << masking << '\n';
  out << "balance_rotations\t" << balance << '\n';
  out << "seconds\t" << format_real(elapsed) << '\n';
}

void run_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const ClusterTree tree = load_tree(a.tree);
  const Dataset ds = load_dataset(a.input);
  const GroundTruth truth = GroundTruth::from_points(ds.points);

  const auto start = Clock::now();
  EvalReport r;
  r.dendrogram_purity =
      a.dp == "mc" ? dendrogram_purity_mc(tree, truth, a.mc_samples, a.seed)
                   : dendrogram_purity_exact(tree, truth);
  if (!a.flat.empty()) {
    std::ifstream in(a.flat);
    if (!in) throw ParseError(a.flat + ": cannot open file");
    r.flat = pairwise_f1(parse_assignment(in), truth);
    r.has_flat = true;
  }
  r.tree_balance = tree_balance(tree);
  r.max_depth = tree.max_depth();
  r.n = tree.num_points();
  r.seconds = seconds_since(start);
  write_report(out, r);
}

void run_extract(const ExtractArgs& a, std::ostream& out) {
  const ClusterTree tree = load_tree(a.tree);
  const FlatClustering flat = extract_flat(tree, a.k);
  std::ofstream file(a.output);
  if (!file) throw ParseError(a.output + ": cannot open for writing");
  write_assignment(file, flat);
  out << "k\t" << flat.k << '\n';
  out << "n\t" << flat.assignment.size() << '\n';
}

void run_gen(const GenArgs& a, std::ostream& out) {
  const LabeledData data = generate_separable(a.options);
  std::ofstream file(a.output);
  if (!file) throw ParseError(a.output + ": cannot open for writing");
  write_dataset(file, data.dataset);
  out << "n\t" << data.dataset.points.size() << '\n';
  out << "k\t" << data.truth.k() << '\n';
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Online hierarchical clustering with purity-enhancing rotations",
               "perch"};
  app.require_subcommand(1);

  ClusterArgs ca;
  auto* cluster = app.add_subcommand("cluster", "Build a cluster tree online");
  cluster->add_option("--input", ca.input, "Dataset TSV")->required();
  cluster->add_option("--order", ca.order, "Arrival order")
      ->check(CLI::IsMember({"given", "random", "sorted", "roundrobin"}));
  cluster->add_option("--seed", ca.seed, "Seed for the random order");
  cluster->add_option("--mode", ca.mode, "Masking check")
      ->check(CLI::IsMember({"exact", "approx"}));
  cluster->add_option("--rotations", ca.rotations, "Rotations to apply")
      ->check(CLI::IsMember({"none", "masking", "full"}));
  cluster->add_option("--search", ca.search, "Nearest-neighbor search")
      ->check(CLI::IsMember({"astar", "beam"}));
  cluster->add_option("--beam-width", ca.beam_width, "Beam width W")
      ->check(CLI::PositiveNumber);
  cluster->add_option("--collapse", ca.collapse,
                      "Collapsed mode with at most L leaves")
      ->check(CLI::Range(std::size_t{2}, std::numeric_limits<std::size_t>::max()));
  cluster->add_option("--threads", ca.threads, "Beam scoring threads")
      ->check(CLI::PositiveNumber);
  cluster->add_option("--output", ca.output, "Tree document to write")
      ->required();
  cluster->add_option("--trace", ca.trace,
                      "Per-insert latency/depth TSV to write");

  EvaluateArgs ea;
  auto* evaluate = app.add_subcommand("evaluate", "Score a tree");
  evaluate->add_option("--tree", ea.tree, "Tree document")->required();
  evaluate->add_option("--input", ea.input, "Labeled dataset TSV")->required();
  evaluate->add_option("--dp", ea.dp, "Dendrogram purity method")
      ->check(CLI::IsMember({"exact", "mc"}));
  evaluate->add_option("--mc-samples", ea.mc_samples, "Monte Carlo pairs")
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--seed", ea.seed, "Monte Carlo seed");
  evaluate->add_option("--flat", ea.flat, "Assignment TSV to score with F1");

  ExtractArgs xa;
  auto* extract = app.add_subcommand("extract", "Extract a flat clustering");
  extract->add_option("--tree", xa.tree, "Tree document")->required();
  extract->add_option("--k", xa.k, "Number of clusters")->required();
  extract->add_option("--output", xa.output, "Assignment TSV")->required();

  GenArgs ga;
  auto* gen = app.add_subcommand("gen", "Generate a separable dataset");
  gen->add_option("--k", ga.options.k, "Clusters")->required();
  gen->add_option("--n", ga.options.n_per_cluster, "Points per cluster")
      ->required();
  gen->add_option("--d", ga.options.dim, "Dimension")->required();
  gen->add_option("--margin", ga.options.margin, "Separation margin (> 1)");
  gen->add_option("--radius", ga.options.radius, "Cluster radius");
  gen->add_option("--seed", ga.options.seed, "Seed");
  gen->add_option("--output", ga.output, "Dataset TSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    err << "run with --help for usage\n";
    return 2;
  }

  try {
    if (*cluster) run_cluster(ca, out);
    if (*evaluate) run_evaluate(ea, out);
    if (*extract) run_extract(xa, out);
    if (*gen) run_gen(ga, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace perch
