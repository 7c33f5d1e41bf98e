#include "cli.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "egnn/config.hpp"
#include "egnn/dataset.hpp"
#include "egnn/diagnostics.hpp"
#include "egnn/emp.hpp"
#include "egnn/error.hpp"
#include "egnn/graph.hpp"
#include "egnn/kernels.hpp"
#include "egnn/trainer.hpp"

#ifndef EGNN_VERSION
#define EGNN_VERSION "unknown"
#endif

namespace egnn::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

void write_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw InputError("failed writing '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

/// Collects inputs and outputs of one command; the manifest goes last.
class Run {
 public:
  Run(std::string command, fs::path out_dir)
      : command_(std::move(command)), out_(std::move(out_dir)), start_(std::chrono::steady_clock::now()) {
    fs::create_directories(out_);
  }

  void input(const fs::path& p) { inputs_.push_back(p.string()); }
  void write(const std::string& name, const std::string& content) {
    const fs::path p = out_ / name;
    write_atomic(p, content);
    outputs_.push_back(p.string());
  }
  json& config() { return config_; }
  json& extra() { return extra_; }
  void seeds(const std::vector<std::uint64_t>& s) { seeds_ = s; }

  void finish() {
    json m;
    m["command"] = command_;
    m["config"] = config_;
    m["seeds"] = seeds_;
    m["inputs"] = inputs_;
    m["outputs"] = outputs_;
    m["wall_time_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    m["version"] = EGNN_VERSION;
    m["simd_backend"] = simd::active().name;
    for (auto& [k, v] : extra_.items()) m[k] = v;
    write_atomic(out_ / "manifest.json", m.dump(2) + "\n");
  }

 private:
  std::string command_;
  fs::path out_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> inputs_, outputs_;
  std::vector<std::uint64_t> seeds_;
  json config_ = json::object();
  json extra_ = json::object();
};

// ---- shared flags --------------------------------------------------------------

struct SolverFlags {
  std::string config_file;
  std::optional<double> lambda1, lambda2, gamma, beta;
  std::optional<std::size_t> k;
  std::optional<std::string> mode;

  void add(CLI::App& app) {
    app.add_option("--config", config_file, "key = value settings file (flags take precedence)");
    app.add_option("--lambda1", lambda1, "weight of the l1/l21 edge-difference penalty");
    app.add_option("--lambda2", lambda2, "weight of the Laplacian smoothing penalty");
    app.add_option("--k,-K", k, "number of propagation steps");
    app.add_option("--mode", mode, "penalty: l1 or l21");
    app.add_option("--gamma", gamma, "primal stepsize override");
    app.add_option("--beta", beta, "dual stepsize override");
  }

  KeyValueConfig file() const {
    if (config_file.empty()) return {};
    return read_key_values(config_file);
  }

  // Flags override file values.
  EmpConfig emp(double l1, double l2, std::size_t iterations, Penalty m) const {
    const KeyValueConfig kv = file();
    EmpConfig base = emp_config_from(kv, l1, l2, iterations, m);
    const double lam1 = lambda1.value_or(base.lambda1), lam2 = lambda2.value_or(base.lambda2);
    const std::size_t steps = k.value_or(base.iterations);
    const Penalty pm = mode ? parse_penalty(*mode) : base.mode;
    const bool explicit_steps = gamma || beta || kv.has("gamma") || kv.has("beta");
    EmpConfig cfg;
    if (explicit_steps) {
      const Stepsizes d = default_stepsizes(lam2);
      const double g = gamma.value_or(kv.has("gamma") ? base.gamma : d.gamma);
      const double b = beta.value_or(kv.has("beta") ? base.beta : d.beta);
      cfg = EmpConfig::with_stepsizes(lam1, lam2, g, b, steps, pm);
    } else {
      cfg = EmpConfig::make(lam1, lam2, steps, pm);
    }
    cfg.tolerance = base.tolerance;
    return cfg;
  }

  void apply(TrainConfig& cfg) const {
    cfg = train_config_from(file(), cfg);
    if (lambda1) cfg.lambda1 = *lambda1;
    if (lambda2) cfg.lambda2 = *lambda2;
    if (k) cfg.K = *k;
    if (mode) cfg.mode = parse_penalty(*mode);
    if (gamma) cfg.gamma = gamma;
    if (beta) cfg.beta = beta;
  }
};

struct TrainFlags {
  std::optional<double> lr, weight_decay, dropout;
  std::optional<std::size_t> epochs, patience, hidden;

  void add(CLI::App& app, bool fixed_optimizer = false) {
    if (!fixed_optimizer) {
      app.add_option("--lr", lr, "Adam learning rate");
      app.add_option("--weight-decay", weight_decay, "L2 penalty on MLP weights");
      app.add_option("--dropout", dropout, "dropout rate on inputs and hidden units");
      app.add_option("--hidden", hidden, "hidden units");
    }
    app.add_option("--epochs", epochs, "epoch cap");
    app.add_option("--patience", patience, "early-stopping patience (epochs)");
  }

  void apply(TrainConfig& cfg) const {
    if (lr) cfg.lr = *lr;
    if (weight_decay) cfg.weight_decay = *weight_decay;
    if (dropout) cfg.dropout = *dropout;
    if (epochs) cfg.epochs = *epochs;
    if (patience) cfg.patience = *patience;
    if (hidden) cfg.hidden = *hidden;
    cfg.validate();
  }
};

struct DataFlags {
  std::string dir;
  bool identity_features = false;
  std::string split = "per-class";
  std::uint64_t split_seed = 0;
  bool lcc = false;
  bool row_normalize = false;

  void add(CLI::App& app) {
    app.add_option("--dataset", dir, "dataset directory (edges.txt, labels.csv, features.csv, masks.csv)")->required();
    app.add_flag("--identity-features", identity_features, "use one-hot node identities as features");
    app.add_option("--split", split, "split when masks.csv is absent: per-class or fraction")
        ->check(CLI::IsMember({"per-class", "fraction"}));
    app.add_option("--split-seed", split_seed, "seed of the generated split");
    app.add_flag("--lcc", lcc, "restrict to the largest connected component");
    app.add_flag("--row-normalize", row_normalize, "scale feature rows to unit l1 norm");
  }

  LoadOptions options() const {
    LoadOptions o;
    o.identity_features = identity_features;
    o.split = split == "fraction" ? SplitProtocol::RandomFraction : SplitProtocol::PerClass;
    o.split_seed = split_seed;
    o.largest_component = lcc;
    o.row_normalize = row_normalize;
    return o;
  }

  json echo() const {
    return {{"dataset", dir},           {"identity_features", identity_features}, {"split", split},
            {"split_seed", split_seed}, {"largest_component", lcc},               {"row_normalize", row_normalize}};
  }
};

json emp_echo(const EmpConfig& c) {
  json j{{"lambda1", c.lambda1}, {"lambda2", c.lambda2}, {"gamma", c.gamma},        {"beta", c.beta},
         {"K", c.iterations},    {"mode", to_string(c.mode)}, {"fast_path", c.fast_path}};
  if (c.tolerance) j["tolerance"] = *c.tolerance;
  return j;
}

struct Summary {
  double mean = 0.0;
  double sd = 0.0;
};

// Sample standard deviation; 0 for a single value.
Summary summarize(const std::vector<double>& v) {
  Summary s;
  if (v.empty()) return s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double acc = 0.0;
    for (double x : v) acc += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(acc / static_cast<double>(v.size() - 1));
  }
  return s;
}

std::string cell(const Summary& s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f \xC2\xB1 %.1f", 100.0 * s.mean, 100.0 * s.sd);
  return buf;
}

std::string num(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::vector<double> train_seeds(const Dataset& data, const NormalizedOperators& ops, TrainConfig cfg,
                                const std::vector<std::uint64_t>& seeds, std::vector<TrainResult>* keep = nullptr) {
  std::vector<double> acc;
  for (std::uint64_t s : seeds) {
    cfg.seed = s;
    TrainResult r;
    try {
      r = train(data, ops, cfg);
    } catch (const std::exception& e) {
      throw std::runtime_error("seed " + std::to_string(s) + " on '" + data.name + "': " + e.what());
    }
    acc.push_back(r.report.test_accuracy);
    if (keep) keep->push_back(std::move(r));
  }
  return acc;
}

// ---- commands ------------------------------------------------------------------

struct DenoiseArgs {
  SolverFlags solver;
  std::string edges, signal, out;
  bool no_trace = false;
};

void cmd_denoise(const DenoiseArgs& a) {
  std::ifstream in(a.signal);
  if (!in) throw InputError("cannot open signal '" + a.signal + "'");
  const Matrix x = read_csv_matrix(in, a.signal.c_str());
  const Graph g = load_graph(a.edges, x.rows());
  const NormalizedOperators ops = normalized_operators(g);
  const EmpConfig cfg = a.solver.emp(0.0, 0.0, 10, Penalty::L21);
  const EmpResult r = emp_run(x, ops, cfg, true);

  Run run("denoise", a.out);
  run.input(a.edges);
  run.input(a.signal);
  if (!a.solver.config_file.empty()) run.input(a.solver.config_file);
  run.config() = emp_echo(cfg);
  std::ostringstream f, t;
  write_csv_matrix(f, r.f);
  write_trace_csv(t, r.trace);
  run.write("signal.csv", f.str());
  run.write("trace.csv", t.str());
  run.extra()["iterations"] = r.iterations;
  run.extra()["converged"] = r.converged;
  run.extra()["final_objective"] = r.trace.back().total;
  run.finish();
}

struct TrainArgs {
  SolverFlags solver;
  TrainFlags train;
  DataFlags data;
  std::vector<std::uint64_t> seeds{0};
  std::string out;
};

void cmd_train(const TrainArgs& a) {
  const Dataset data = load_dataset(a.data.dir, a.data.options());
  const NormalizedOperators ops = normalized_operators(data.graph);
  TrainConfig cfg;
  a.solver.apply(cfg);
  a.train.apply(cfg);

  Run run("train", a.out);
  run.input(a.data.dir);
  if (!a.solver.config_file.empty()) run.input(a.solver.config_file);
  run.seeds(a.seeds);
  run.config() = json::parse(to_json(cfg));
  run.config()["data"] = a.data.echo();

  std::vector<TrainResult> results;
  const std::vector<double> acc = train_seeds(data, ops, cfg, a.seeds, &results);
  for (const auto& r : results) {
    const std::string tag = std::to_string(r.report.config.seed);
    run.write("report_seed" + tag + ".json", to_json(r.report) + "\n");
    const fs::path tmp = fs::path(a.out) / ("checkpoint_seed" + tag + ".json.part");
    save_checkpoint(tmp, r.model, r.report.config);
    std::ifstream ck(tmp);
    std::stringstream buf;
    buf << ck.rdbuf();
    ck.close();
    fs::remove(tmp);
    run.write("checkpoint_seed" + tag + ".json", buf.str());
  }
  const Summary s = summarize(acc);
  json summary{{"dataset", data.name}, {"seeds", a.seeds}, {"test_accuracy", acc},
               {"mean", s.mean},       {"sd", s.sd},       {"cell", cell(s)}};
  run.write("summary.json", summary.dump(2) + "\n");
  std::cout << data.name << ": test accuracy " << cell(s) << " over " << acc.size() << " seed(s)\n";
  run.finish();
}

struct VariantsArgs {
  TrainFlags train;
  DataFlags data;
  std::vector<std::string> perturbed;
  std::vector<std::uint64_t> seeds{0};
  std::string out;
};

struct Variant {
  const char* column;
  double lambda1, lambda2;
  Penalty mode;
};

constexpr Variant kVariants[] = {
    {"l2", 0.0, 9.0, Penalty::L21},       {"l1", 3.0, 0.0, Penalty::L1},       {"l21", 3.0, 0.0, Penalty::L21},
    {"l1_l2", 3.0, 3.0, Penalty::L1},     {"l21_l2", 3.0, 3.0, Penalty::L21},
};

void cmd_variants(const VariantsArgs& a) {
  const Dataset base = load_dataset(a.data.dir, a.data.options());
  struct GraphCase {
    Dataset data;
    double rate;
  };
  std::vector<GraphCase> cases{{base, 0.0}};
  for (const auto& p : a.perturbed) {
    PerturbedDataset pd = load_perturbed_edges(base, p);
    cases.push_back({std::move(pd.data), pd.perturbation_rate});
  }

  TrainConfig fixed;
  fixed.lr = 0.01;
  fixed.weight_decay = 5e-4;
  fixed.dropout = 0.5;
  fixed.K = 10;
  a.train.apply(fixed);

  Run run("variants", a.out);
  run.input(a.data.dir);
  for (const auto& p : a.perturbed) run.input(p);
  run.seeds(a.seeds);
  run.config() = json::parse(to_json(fixed));
  run.config().erase("lambda1");
  run.config().erase("lambda2");
  run.config().erase("mode");
  run.config()["data"] = a.data.echo();
  json vs = json::array();
  for (const auto& v : kVariants)
    vs.push_back({{"column", v.column}, {"lambda1", v.lambda1}, {"lambda2", v.lambda2}, {"mode", to_string(v.mode)}});
  run.config()["variants"] = vs;

  std::ostringstream csv;
  csv << "graph,ptb_rate";
  for (const auto& v : kVariants) csv << ',' << v.column;
  csv << '\n';
  json detail = json::array();
  for (const auto& c : cases) {
    const NormalizedOperators ops = normalized_operators(c.data.graph);
    csv << c.data.name << ',' << num(c.rate);
    json row{{"graph", c.data.name}, {"ptb_rate", c.rate}};
    for (const auto& v : kVariants) {
      TrainConfig cfg = fixed;
      cfg.lambda1 = v.lambda1;
      cfg.lambda2 = v.lambda2;
      cfg.mode = v.mode;
      const std::vector<double> acc = train_seeds(c.data, ops, cfg, a.seeds);
      const Summary s = summarize(acc);
      csv << ',' << num(s.mean);
      row[v.column] = {{"mean", s.mean}, {"sd", s.sd}, {"test_accuracy", acc}};
    }
    csv << '\n';
    detail.push_back(row);
  }
  run.write("variants.csv", csv.str());
  run.write("variants.json", detail.dump(2) + "\n");
  run.finish();
}

struct DiagnoseArgs {
  DataFlags data;
  std::string checkpoint, out;
  double threshold = kDefaultSparsityThreshold;
};

void cmd_diagnose(const DiagnoseArgs& a) {
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  const Dataset data = load_dataset(a.data.dir, a.data.options());
  if (data.features.cols() != ck.model.input_dim() || data.num_classes > ck.model.num_classes())
    throw InputError("checkpoint '" + a.checkpoint + "' does not match dataset '" + data.name + "'");
  const NormalizedOperators ops = normalized_operators(data.graph);
  const Matrix f = forward(ck.model, data, ops, ck.config, false).logits;
  const EdgeDiagnostics d = edge_diagnostics(f, ops, data.labels, a.threshold);

  Run run("diagnose", a.out);
  run.input(a.checkpoint);
  run.input(a.data.dir);
  run.config() = json::parse(to_json(ck.config));
  run.config()["data"] = a.data.echo();
  run.config()["threshold"] = a.threshold;
  json metrics = json::parse(to_json(d));
  metrics["forward_mode"] = "eval";
  metrics["signal"] = "propagated output logits";
  run.write("metrics.json", metrics.dump(2) + "\n");
  run.finish();
}

struct SweepArgs {
  SolverFlags solver;
  TrainFlags train;
  DataFlags data;
  std::vector<std::size_t> ks{0, 1, 2, 5, 10};
  std::vector<std::uint64_t> seeds{0};
  std::string out;
};

void cmd_sweep_k(const SweepArgs& a) {
  const Dataset data = load_dataset(a.data.dir, a.data.options());
  const NormalizedOperators ops = normalized_operators(data.graph);
  TrainConfig cfg;
  a.solver.apply(cfg);
  a.train.apply(cfg);

  Run run("sweep-k", a.out);
  run.input(a.data.dir);
  if (!a.solver.config_file.empty()) run.input(a.solver.config_file);
  run.seeds(a.seeds);
  run.config() = json::parse(to_json(cfg));
  run.config().erase("K");
  run.config()["K_list"] = a.ks;
  run.config()["data"] = a.data.echo();

  std::ostringstream csv;
  csv << "K,accuracy_mean,accuracy_sd\n";
  for (std::size_t k : a.ks) {
    cfg.K = k;
    const Summary s = summarize(train_seeds(data, ops, cfg, a.seeds));
    csv << k << ',' << num(s.mean) << ',' << num(s.sd) << '\n';
  }
  run.write("sweep_k.csv", csv.str());
  run.finish();
}

struct SyntheticArgs {
  SyntheticSpec spec;
  bool no_degree_scaling = false;
  std::string out;
};

void cmd_synthetic(const SyntheticArgs& a) {
  SyntheticSpec spec = a.spec;
  spec.degree_scaled = !a.no_degree_scaling;
  const Dataset data = generate_synthetic(spec);
  Run run("synthetic", a.out);
  run.config() = {{"clusters", spec.clusters}, {"nodes_per_cluster", spec.nodes_per_cluster},
                  {"p_in", spec.p_in},         {"p_out", spec.p_out},
                  {"signal_gap", spec.signal_gap}, {"noise_sd", spec.noise_sd},
                  {"feature_dims", spec.feature_dims}, {"degree_scaled", spec.degree_scaled}};
  run.seeds({spec.seed});
  const fs::path staging = fs::path(a.out) / ".staging";
  write_dataset(data, staging);
  for (const char* name : {"edges.txt", "features.csv", "labels.csv", "masks.csv"}) {
    std::ifstream in(staging / name);
    std::stringstream buf;
    buf << in.rdbuf();
    in.close();
    run.write(name, buf.str());
  }
  fs::remove_all(staging);
  run.finish();
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Elastic graph smoothing and node classification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(EGNN_VERSION));

  DenoiseArgs denoise;
  auto* c_denoise = app.add_subcommand("denoise", "smooth a graph signal, writing F and the objective trace");
  denoise.solver.add(*c_denoise);
  c_denoise->add_option("--edges", denoise.edges, "edge list: i j [w] per line")->required();
  c_denoise->add_option("--signal", denoise.signal, "n x d CSV signal")->required();
  c_denoise->add_option("--out", denoise.out, "output directory")->required();

  TrainArgs train_args;
  auto* c_train = app.add_subcommand("train", "train the MLP + propagation classifier for each seed");
  train_args.solver.add(*c_train);
  train_args.train.add(*c_train);
  train_args.data.add(*c_train);
  c_train->add_option("--seeds,--seed", train_args.seeds, "comma-separated seeds")->delimiter(',');
  c_train->add_option("--out", train_args.out, "output directory")->required();

  VariantsArgs variants;
  auto* c_var = app.add_subcommand("variants", "five penalty variants on the clean and perturbed graphs");
  variants.train.add(*c_var, true);
  variants.data.add(*c_var);
  c_var->add_option("--perturbed", variants.perturbed, "perturbed edge lists")->delimiter(',');
  c_var->add_option("--seeds,--seed", variants.seeds, "comma-separated seeds")->delimiter(',');
  c_var->add_option("--out", variants.out, "output directory")->required();

  DiagnoseArgs diag;
  auto* c_diag = app.add_subcommand("diagnose", "edge-difference smoothness and sparsity ratios of a trained model");
  diag.data.add(*c_diag);
  c_diag->add_option("--checkpoint", diag.checkpoint, "checkpoint written by train")->required();
  c_diag->add_option("--threshold", diag.threshold, "sparsity threshold on edge-difference l2 norms");
  c_diag->add_option("--out", diag.out, "output directory")->required();

  SweepArgs sweep;
  auto* c_sweep = app.add_subcommand("sweep-k", "test accuracy against the number of propagation steps");
  sweep.solver.add(*c_sweep);
  sweep.train.add(*c_sweep);
  sweep.data.add(*c_sweep);
  c_sweep->add_option("--k-list", sweep.ks, "comma-separated K values")->delimiter(',');
  c_sweep->add_option("--seeds,--seed", sweep.seeds, "comma-separated seeds")->delimiter(',');
  c_sweep->add_option("--out", sweep.out, "output directory")->required();

  SyntheticArgs syn;
  auto* c_syn = app.add_subcommand("synthetic", "write a planted-cluster dataset");
  c_syn->add_option("--clusters", syn.spec.clusters);
  c_syn->add_option("--nodes-per-cluster", syn.spec.nodes_per_cluster);
  c_syn->add_option("--p-in", syn.spec.p_in);
  c_syn->add_option("--p-out", syn.spec.p_out);
  c_syn->add_option("--gap", syn.spec.signal_gap);
  c_syn->add_option("--noise", syn.spec.noise_sd);
  c_syn->add_option("--seed", syn.spec.seed);
  c_syn->add_option("--feature-dims", syn.spec.feature_dims, "0 = one per cluster");
  c_syn->add_flag("--no-degree-scaling", syn.no_degree_scaling);
  c_syn->add_option("--out", syn.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (c_denoise->parsed()) cmd_denoise(denoise);
    else if (c_train->parsed()) cmd_train(train_args);
    else if (c_var->parsed()) cmd_variants(variants);
    else if (c_diag->parsed()) cmd_diagnose(diag);
    else if (c_sweep->parsed()) cmd_sweep_k(sweep);
    else if (c_syn->parsed()) cmd_synthetic(syn);
  } catch (const std::exception& e) {
    std::cerr << "egnn: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace egnn::cli
