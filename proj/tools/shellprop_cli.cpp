// Copyright 2026 The shellprop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// shellprop command-line tool: train, shells, metrics, sweep, rerun.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "shellprop/shellprop.hpp"

#ifndef SHELLPROP_VERSION
#define SHELLPROP_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using shellprop::ErrorKind;
using ordered_json = nlohmann::ordered_json;

namespace {

struct Options {
  // shared training knobs
  std::string data;
  double alpha = 2.0;
  std::uint32_t lcap = 0;  // 0 = full depth
  std::size_t hidden = 64;
  double dropout = 0.5;
  double lr = 1e-2;
  double weight_decay = 5e-3;
  std::size_t epochs = 500;
  std::size_t patience = 100;
  std::uint64_t seed = 0;
  std::string out;
  std::string precision = "f64";
  std::size_t per_class = 20;
  std::size_t val = 500;
  std::size_t test = 1000;
  // graph-only commands
  std::string edges;
  std::size_t nodes = 0;
  // metrics
  std::string propagator = "sym";
  std::string base = "sym";
  double beta = 0.5;
  std::size_t kmax = 100;
  std::string csv;
  // sweep
  std::string layers = "2,4,8";
  std::string alphas = "2,5";
  // rerun
  std::string manifest;
};

class Outputs {
 public:
  explicit Outputs(std::string dir) : dir_(std::move(dir)) {
    if (!dir_.empty()) fs::create_directories(dir_);
  }

  bool enabled() const { return !dir_.empty(); }

  void write(const std::string& name, const std::string& bytes) {
    std::ofstream f(fs::path(dir_) / name, std::ios::binary);
    shellprop::require(static_cast<bool>(f), ErrorKind::Input,
                       "cannot write " + (fs::path(dir_) / name).string());
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    digests_[name] = shellprop::fnv1a_hex(bytes);
  }

  ordered_json digests() const {
    ordered_json files = ordered_json::object();
    std::string all;
    for (const auto& [name, digest] : digests_) {
      files[name] = digest;
      all += name + ":" + digest + "\n";
    }
    return {{"files", files}, {"combined", shellprop::fnv1a_hex(all)}};
  }

  const std::string& dir() const { return dir_; }

 private:
  std::string dir_;
  std::map<std::string, std::string> digests_;
};

// Every long option of the subcommand with its effective value, as an argv
// fragment that reproduces the run.
std::vector<std::string> resolved_argv(const CLI::App& sub, const Options& o) {
  std::vector<std::string> argv;
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string name = opt->get_lnames().front();
    if (name == "help" || name == "out") continue;
    std::string value;
    if (opt->count() > 0) {
      value = opt->as<std::string>();
    } else {
      value = opt->get_default_str();
    }
    if (name == "data") value = o.data;
    if (name == "edges") value = o.edges;
    if (value.empty()) continue;
    argv.push_back("--" + name);
    argv.push_back(value);
  }
  return argv;
}

void write_manifest(Outputs& out, const std::string& command, const CLI::App& sub,
                    const Options& o, double wall_seconds) {
  if (!out.enabled()) return;
  const auto argv = resolved_argv(sub, o);
  ordered_json config = ordered_json::object();
  for (std::size_t i = 0; i + 1 < argv.size(); i += 2) config[argv[i].substr(2)] = argv[i + 1];
  ordered_json m;
  m["command"] = command;
  m["config"] = config;
  m["argv"] = argv;
  m["seed"] = o.seed;
  m["data"] = !o.data.empty() ? o.data : o.edges;
  m["version"] = SHELLPROP_VERSION;
  m["threads"] = shellprop::thread_count();
  m["wall_time_seconds"] = wall_seconds;
  m["output_digest"] = out.digests();
  std::ofstream f(fs::path(out.dir()) / "manifest.json", std::ios::binary);
  f << m.dump(2) << '\n';
}

std::string absolute(const std::string& p) {
  return p.empty() ? p : fs::absolute(p).lexically_normal().string();
}

shellprop::SparseGraph load_graph(const Options& o) {
  shellprop::require(o.data.empty() != o.edges.empty(), ErrorKind::Config,
                     "give exactly one of --data or --edges");
  if (!o.data.empty()) return shellprop::load_dataset(o.data).graph;
  const auto list = shellprop::read_edge_list(o.edges);
  const std::size_t n = o.nodes ? o.nodes : list.implied_nodes;
  shellprop::require(list.implied_nodes <= n, ErrorKind::Input,
                     o.edges + ": node id exceeds --nodes");
  return shellprop::build_graph(list.edges, n);
}

shellprop::TrainConfig train_config(const Options& o) {
  shellprop::TrainConfig c;
  c.alpha = o.alpha;
  if (o.lcap) c.l_cap = o.lcap;
  c.hidden = o.hidden;
  c.dropout = o.dropout;
  c.lr = o.lr;
  c.weight_decay = o.weight_decay;
  c.epochs = o.epochs;
  c.patience = o.patience;
  c.seed = o.seed;
  c.validate();
  return c;
}

constexpr std::uint64_t kSplitSalt = 0x73706c6974;

shellprop::Split resolve_split(const shellprop::Dataset& ds, const Options& o) {
  if (ds.split) return *ds.split;
  auto split = shellprop::make_split(ds.labels, ds.num_classes, o.per_class, o.val, o.test,
                                     shellprop::mix_seed(o.seed, kSplitSalt));
  if (split.shrunk)
    std::cerr << "warning: dataset too small for the requested val/test sizes; shrunk to "
              << split.val.size() << "/" << split.test.size() << "\n";
  return split;
}

template <class T>
std::pair<shellprop::Experiment<T>, std::vector<unsigned char>> run_typed(
    const shellprop::Dataset& ds, const shellprop::Split& split,
    const shellprop::TrainConfig& config, const shellprop::ShellDecomposition* full) {
  auto exp = shellprop::run_experiment<T>(ds, split, config, full);
  auto bytes = shellprop::encode_checkpoint(exp.trained.params);
  return {std::move(exp), std::move(bytes)};
}

int cmd_train(const Options& o, const CLI::App& sub) {
  const auto started = std::chrono::steady_clock::now();
  const auto config = train_config(o);
  const auto ds = shellprop::load_dataset(o.data);
  const auto split = resolve_split(ds, o);
  Outputs out(o.out);

  ordered_json metrics;
  std::string history;
  std::vector<unsigned char> checkpoint;
  auto collect = [&](const auto& result) {
    const auto& [exp, bytes] = result;
    metrics = shellprop::train_metrics_json(exp.test, exp.val, exp.trained.history, exp.l_max);
    history = shellprop::history_csv(exp.trained.history);
    checkpoint = bytes;
  };
  if (o.precision == "f32")
    collect(run_typed<float>(ds, split, config, nullptr));
  else
    collect(run_typed<double>(ds, split, config, nullptr));

  out.write("checkpoint.bin", std::string(checkpoint.begin(), checkpoint.end()));
  out.write("history.csv", history);
  out.write("metrics.json", metrics.dump(2) + "\n");
  out.write("split.json", shellprop::split_to_json(split).dump() + "\n");
  std::cout << metrics.dump(2) << "\n";
  write_manifest(out, "train", sub, o,
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
  return 0;
}

int cmd_shells(const Options& o, const CLI::App& sub) {
  const auto started = std::chrono::steady_clock::now();
  if (o.lcap) shellprop::require(o.lcap >= 1, ErrorKind::Config, "lcap must be >= 1");
  const auto g = load_graph(o);
  const auto d = shellprop::shell_decompose(
      g, o.lcap ? std::optional<std::uint32_t>(o.lcap) : std::nullopt);
  const auto report = shellprop::shell_report_json(d, shellprop::diameter(g)).dump(2) + "\n";
  std::cout << report;
  Outputs out(o.out);
  if (out.enabled()) out.write("shells.json", report);
  write_manifest(out, "shells", sub, o,
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
  return 0;
}

shellprop::Propagator base_propagator(const shellprop::SparseGraph& g, const std::string& kind) {
  return kind == "rw" ? shellprop::rw_norm_propagator(g) : shellprop::sym_norm_propagator(g);
}

int cmd_metrics(const Options& o, const CLI::App& sub) {
  const auto started = std::chrono::steady_clock::now();
  const auto g = load_graph(o);
  ordered_json report;
  shellprop::MetricReport primary;
  if (o.propagator == "fused") {
    const auto d = shellprop::shell_decompose(
        g, o.lcap ? std::optional<std::uint32_t>(o.lcap) : std::nullopt);
    const auto p = shellprop::fused_shell_propagator(shellprop::make_fused_propagator(d, o.alpha));
    primary = shellprop::make_metric_report(g, p, o.kmax, &d);
    report = shellprop::metric_report_json(primary);
  } else if (o.propagator == "residual") {
    const auto base = base_propagator(g, o.base);
    const auto res = shellprop::residual_propagator(base, o.beta);
    primary = shellprop::make_metric_report(g, res, o.kmax);
    report = shellprop::metric_report_json(primary);
    report["beta"] = o.beta;
    report["baseline"] = shellprop::metric_report_json(shellprop::make_metric_report(g, base, o.kmax));
  } else {
    primary = shellprop::make_metric_report(g, base_propagator(g, o.propagator), o.kmax);
    report = shellprop::metric_report_json(primary);
  }
  const auto text = report.dump(2) + "\n";
  std::cout << text;
  Outputs out(o.out);
  if (out.enabled()) out.write("metrics.json", text);
  if (!o.csv.empty()) {
    std::ofstream f(o.csv, std::ios::binary);
    shellprop::require(static_cast<bool>(f), ErrorKind::Input, "cannot write " + o.csv);
    f << shellprop::sas_csv(primary);
  }
  write_manifest(out, "metrics", sub, o,
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
  return 0;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> items;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) items.push_back(item);
  return items;
}

int cmd_sweep(const Options& o, const CLI::App& sub) {
  const auto started = std::chrono::steady_clock::now();
  train_config(o);
  const auto ds = shellprop::load_dataset(o.data);
  const auto split = resolve_split(ds, o);
  const auto full = shellprop::shell_decompose(ds.graph);
  const auto diam = shellprop::diameter(ds.graph);

  std::set<std::pair<std::uint32_t, double>> seen;
  std::vector<std::pair<std::uint32_t, double>> combos;
  for (const auto& layer : split_list(o.layers)) {
    std::uint32_t l = 0;
    if (layer == "diam") {
      l = diam;
    } else {
      try {
        std::size_t pos = 0;
        const long v = std::stol(layer, &pos);
        shellprop::require(pos == layer.size() && v >= 1, ErrorKind::Config, "");
        l = static_cast<std::uint32_t>(v);
      } catch (const std::exception&) {
        shellprop::fail(ErrorKind::Config, "--layers: '" + layer +
                                               "' is neither a positive integer nor 'diam'");
      }
    }
    for (const auto& a : split_list(o.alphas)) {
      double alpha = 0.0;
      try {
        alpha = std::stod(a);
      } catch (const std::exception&) {
        shellprop::fail(ErrorKind::Config, "--alphas: cannot parse '" + a + "'");
      }
      if (seen.emplace(l, alpha).second) combos.emplace_back(l, alpha);
    }
  }
  shellprop::require(!combos.empty(), ErrorKind::Config, "sweep: no combinations");

  std::string csv = "layers,alpha,accuracy,macro_f1\n";
  for (const auto& [layers, alpha] : combos) {
    Options run = o;
    run.alpha = alpha;
    run.lcap = layers;
    std::uint64_t alpha_bits = 0;
    std::memcpy(&alpha_bits, &alpha, sizeof alpha_bits);
    run.seed = shellprop::mix_seed(shellprop::mix_seed(o.seed, layers), alpha_bits);
    const auto config = train_config(run);
    shellprop::Scores s;
    if (o.precision == "f32") {
      const auto exp = shellprop::run_experiment<float>(ds, split, config, &full);
      s = exp.test ? *exp.test : exp.val;
    } else {
      const auto exp = shellprop::run_experiment<double>(ds, split, config, &full);
      s = exp.test ? *exp.test : exp.val;
    }
    const std::string row = std::to_string(layers) + "," + shellprop::format_real(alpha) + "," +
                            shellprop::format_real(s.accuracy) + "," +
                            shellprop::format_real(s.macro_f1) + "\n";
    std::cerr << row;
    csv += row;
  }
  std::cout << csv;
  Outputs out(o.out);
  out.write("sweep.csv", csv);
  write_manifest(out, "sweep", sub, o,
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
  return 0;
}

int run(std::vector<std::string> args);

int cmd_rerun(const Options& o) {
  std::ifstream in(o.manifest);
  shellprop::require(static_cast<bool>(in), ErrorKind::Input, "cannot open " + o.manifest);
  ordered_json m;
  try {
    m = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    shellprop::fail(ErrorKind::Input, o.manifest + ": " + e.what());
  }
  shellprop::require(m.contains("command") && m.contains("argv") && m.contains("output_digest"),
                     ErrorKind::Input, o.manifest + ": not a run manifest");
  std::vector<std::string> args = {"shellprop", m["command"].get<std::string>()};
  for (const auto& a : m["argv"]) args.push_back(a.get<std::string>());
  args.push_back("--out");
  args.push_back(o.out);
  const int rc = run(args);
  if (rc != 0) return rc;

  std::ifstream again(fs::path(o.out) / "manifest.json");
  const auto fresh = ordered_json::parse(again);
  const bool same = fresh["output_digest"] == m["output_digest"];
  std::cerr << (same ? "rerun reproduced every output byte-for-byte\n"
                     : "rerun outputs differ from the manifest digests\n");
  return same ? 0 : 4;
}

int run(std::vector<std::string> args) {
  CLI::App app{"shellprop: shell-decomposed graph propagation experiments"};
  app.set_version_flag("--version", std::string(SHELLPROP_VERSION));
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  Options o;

  auto add_data = [&](CLI::App* s, bool required) {
    auto* opt = s->add_option("--data", o.data, "dataset directory")->check(CLI::ExistingDirectory);
    if (required) opt->required();
  };
  auto add_training = [&](CLI::App* s) {
    s->add_option("--alpha", o.alpha, "shell weight decay parameter (> 1)");
    s->add_option("--lcap", o.lcap, "maximum shell count (0 = graph depth)");
    s->add_option("--hidden", o.hidden, "hidden width");
    s->add_option("--dropout", o.dropout, "dropout rate");
    s->add_option("--lr", o.lr, "Adam learning rate");
    s->add_option("--weight-decay", o.weight_decay, "L2 coefficient on weights");
    s->add_option("--epochs", o.epochs, "maximum epochs");
    s->add_option("--patience", o.patience, "early-stopping window");
    s->add_option("--seed", o.seed, "random seed");
    s->add_option("--precision", o.precision, "floating point width")
        ->check(CLI::IsMember({"f32", "f64"}));
    s->add_option("--per-class", o.per_class, "training nodes per class when no split.json");
    s->add_option("--val", o.val, "validation size when no split.json");
    s->add_option("--test", o.test, "test size when no split.json");
  };
  auto add_graph = [&](CLI::App* s) {
    add_data(s, false);
    s->add_option("--edges", o.edges, "edge list file")->check(CLI::ExistingFile);
    s->add_option("--nodes", o.nodes, "node count for --edges (default: max id + 1)");
  };

  auto* train = app.add_subcommand("train", "train and evaluate on a dataset");
  add_data(train, true);
  add_training(train);
  train->add_option("--out", o.out, "output directory")->required();

  auto* shells = app.add_subcommand("shells", "report the shell decomposition of a graph");
  add_graph(shells);
  shells->add_option("--lcap", o.lcap, "maximum shell count (0 = graph depth)");
  shells->add_option("--out", o.out, "output directory");

  auto* metrics = app.add_subcommand("metrics", "aggregation diagnostics of a propagator");
  add_graph(metrics);
  metrics->add_option("--propagator", o.propagator, "propagator kind")
      ->check(CLI::IsMember({"sym", "rw", "residual", "fused"}));
  metrics->add_option("--base", o.base, "base of the residual propagator")
      ->check(CLI::IsMember({"sym", "rw"}));
  metrics->add_option("--beta", o.beta, "residual mixing weight in (0, 1)");
  metrics->add_option("--alpha", o.alpha, "shell weight parameter for the fused propagator");
  metrics->add_option("--lcap", o.lcap, "maximum shell count for the fused propagator");
  metrics->add_option("--kmax", o.kmax, "largest power in the trajectory")
      ->check(CLI::Range(std::size_t{1}, std::size_t{1} << 20));
  metrics->add_option("--csv", o.csv, "also write the trajectory as CSV");
  metrics->add_option("--out", o.out, "output directory");

  auto* sweep = app.add_subcommand("sweep", "accuracy over shell counts and alphas");
  add_data(sweep, true);
  add_training(sweep);
  sweep->add_option("--layers", o.layers, "comma list of shell counts; 'diam' = diameter");
  sweep->add_option("--alphas", o.alphas, "comma list of alpha values");
  sweep->add_option("--out", o.out, "output directory")->required();

  auto* rerun = app.add_subcommand("rerun", "repeat a run from its manifest and compare outputs");
  rerun->add_option("--manifest", o.manifest, "manifest.json of an earlier run")
      ->required()
      ->check(CLI::ExistingFile);
  rerun->add_option("--out", o.out, "output directory for the repeat")->required();

  try {
    std::reverse(args.begin(), args.end());
    args.pop_back();
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  o.data = absolute(o.data);
  o.edges = absolute(o.edges);

  try {
    if (*train) return cmd_train(o, *train);
    if (*shells) return cmd_shells(o, *shells);
    if (*metrics) return cmd_metrics(o, *metrics);
    if (*sweep) return cmd_sweep(o, *sweep);
    if (*rerun) return cmd_rerun(o);
  } catch (const shellprop::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return shellprop::exit_code_for(e.kind());
  } catch (const std::bad_alloc&) {
    std::cerr << "error: out of memory\n";
    return shellprop::exit_code_for(ErrorKind::Resource);
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return shellprop::exit_code_for(ErrorKind::Input);
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) { return run({argv, argv + argc}); }
