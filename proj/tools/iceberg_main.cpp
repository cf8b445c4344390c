// iceberg: split / propagate / train / sweep / eval entry points.
#include <omp.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "iceberg/hash.hpp"
#include "iceberg/selftrain.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace iceberg;

namespace {

// Failures while reading arguments or input files exit with 2; failures
// during computation or output exit with 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename F>
auto input_phase(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing file: " + path.string());
  Fnv1a h;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    h.update(buf, static_cast<std::size_t>(in.gcount()));
  }
  return hex64(h.digest());
}

json dataset_hashes(const fs::path& dir) {
  json j;
  for (const char* name : {"meta.json", "edges.txt", "features.txt", "labels.txt"}) {
    j[name] = file_hash(dir / name);
  }
  return j;
}

void write_manifest(const fs::path& path, const json& manifest) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << manifest.dump(2) << '\n';
}

json argv_json(int argc, char** argv) {
  json j = json::array();
  for (int i = 0; i < argc; ++i) j.push_back(argv[i]);
  return j;
}

// ---------------------------------------------------------------- split ----

struct SplitArgs {
  std::string data, kind = "step", out = "split.json";
  int base = 20, k = 1, val = 30;
  double ir = 10.0;
  std::uint64_t seed = 0;
};

int cmd_split(const SplitArgs& a, const json& argv) {
  auto [graph, masks] = input_phase([&] {
    SparseGraph g = load_graph(a.data);
    SplitMasks m;
    if (a.kind == "step") {
      m = make_step_imbalance(g, a.base, a.ir, a.val, a.seed);
    } else if (a.kind == "few") {
      m = make_fewshot(g, a.k, a.val, a.seed);
    } else {
      throw UsageError("split: --kind must be 'step' or 'few'");
    }
    return std::pair{std::move(g), std::move(m)};
  });

  save_split(masks, a.out);
  json manifest;
  manifest["command"] = "split";
  manifest["argv"] = argv;
  manifest["config"] = {{"data", a.data},   {"kind", a.kind}, {"base", a.base},
                        {"k", a.k},         {"ir", a.ir},     {"val", a.val},
                        {"seed", a.seed},   {"out", a.out}};
  manifest["inputs"] = {{"dataset", dataset_hashes(a.data)}};
  write_manifest(a.out + ".manifest.json", manifest);

  std::cout << "split: train " << masks.train_idx.size() << " val "
            << masks.val_idx.size() << " test " << masks.test_idx.size()
            << " counts [";
  for (std::size_t c = 0; c < masks.labeled_counts.size(); ++c) {
    std::cout << (c ? " " : "") << masks.labeled_counts[c];
  }
  std::cout << "] ir " << masks.imbalance_ratio << "\n";
  return 0;
}

// ------------------------------------------------------------ propagate ----

struct PropagateArgs {
  std::string data, out = "diffusion.bin";
  double alpha = 0.1;
  int hops = 10;
};

int cmd_propagate(const PropagateArgs& a, const json& argv) {
  SparseGraph graph = input_phase([&] { return load_graph(a.data); });
  const PropagationConfig prop{a.alpha, a.hops};
  DiffusedFeatures diffused = diffuse_graph(graph, prop);
  cache_diffusion(diffused, a.out);

  json manifest;
  manifest["command"] = "propagate";
  manifest["argv"] = argv;
  manifest["config"] = {{"data", a.data}, {"alpha", a.alpha}, {"hops", a.hops}, {"out", a.out}};
  manifest["inputs"] = {{"dataset", dataset_hashes(a.data)}};
  manifest["source_hash"] = hex64(diffused.source_hash);
  write_manifest(a.out + ".manifest.json", manifest);

  std::cout << "propagate: cached " << graph.num_nodes << "x" << graph.feature_dim()
            << " (alpha " << a.alpha << ", hops " << a.hops << ") hash "
            << hex64(diffused.source_hash) << "\n";
  return 0;
}

// ---------------------------------------------------------------- train ----

struct TrainArgs {
  std::string data, split, config, out = "run", cache;
  // Overrides; empty string means "keep the config value".
  std::string mode, db, noise, threshold;
  int hops = -1, epochs = -1;
  double alpha = -1.0, lr = -1.0, dropout = -1.0, weight_decay = -1.0;
  double lambda = -1.0, mu = -1.0, beta = -1.0;
  std::vector<int> hidden;
  long long seed = -1;
};

bool parse_on_off(const std::string& v, const char* flag) {
  if (v == "on") return true;
  if (v == "off") return false;
  throw UsageError(std::string(flag) + " must be 'on' or 'off'");
}

TrainConfig resolve_train_config(const TrainArgs& a) {
  TrainConfig c = a.config.empty() ? TrainConfig{} : train_config_from_json_file(a.config);
  if (!a.mode.empty()) c.supervised_mode = parse_balancing_mode(a.mode);
  if (!a.db.empty()) c.use_double_balancing = parse_on_off(a.db, "--db");
  if (!a.noise.empty()) c.use_noise_tolerant = parse_on_off(a.noise, "--noise");
  if (!a.threshold.empty()) {
    if (a.threshold == "dynamic") {
      c.threshold_mode = ThresholdMode::dynamic_mean;
    } else {
      try {
        c.threshold_mode = ThresholdMode::fixed;
        c.fixed_tau = std::stod(a.threshold);
      } catch (const std::exception&) {
        throw UsageError("--threshold must be 'dynamic' or a number");
      }
    }
  }
  if (a.hops >= 0) c.propagation.hops = a.hops;
  if (a.epochs >= 0) c.epochs = a.epochs;
  if (a.alpha >= 0.0) c.propagation.alpha = a.alpha;
  if (a.lr >= 0.0) c.learning_rate = a.lr;
  if (a.dropout >= 0.0) c.dropout = a.dropout;
  if (a.weight_decay >= 0.0) c.weight_decay = a.weight_decay;
  if (a.lambda >= 0.0) c.lambda = a.lambda;
  if (a.mu >= 0.0) c.mu = a.mu;
  if (a.beta >= 0.0) c.beta = a.beta;
  if (!a.hidden.empty()) c.hidden_dims = a.hidden;
  if (a.seed >= 0) c.seed = static_cast<std::uint64_t>(a.seed);
  return c;
}

int cmd_train(const TrainArgs& a, const json& argv) {
  auto [graph, masks, config] = input_phase([&] {
    SparseGraph g = load_graph(a.data);
    SplitMasks m = load_split(a.split);
    TrainConfig c = resolve_train_config(a);
    return std::tuple{std::move(g), std::move(m), c};
  });

  DiffusedFeatures diffused;
  const std::uint64_t want = diffusion_hash(graph, config.propagation);
  if (!a.cache.empty() && fs::exists(a.cache)) {
    diffused = input_phase([&] { return load_diffusion(a.cache, want); });
  } else {
    diffused = diffuse_graph(graph, config.propagation);
    if (!a.cache.empty()) cache_diffusion(diffused, a.cache);
  }

  auto [model, record] = train(graph, masks, config, diffused);

  fs::create_directories(a.out);
  const fs::path out(a.out);
  {
    std::ofstream s(out / "summary.json");
    if (!s) throw std::runtime_error("cannot write " + (out / "summary.json").string());
    s << run_summary_json(record, config) << '\n';
  }
  save_run_record(record, config, out / "record.jsonl");
  save_model(model, out / "model.ckpt");

  json manifest;
  manifest["command"] = "train";
  manifest["argv"] = argv;
  manifest["config"] = json::parse(train_config_to_json(config));
  manifest["paths"] = {{"data", a.data}, {"split", a.split}, {"out", a.out}};
  manifest["inputs"] = {{"dataset", dataset_hashes(a.data)}, {"split", file_hash(a.split)}};
  if (!a.config.empty()) manifest["inputs"]["config"] = file_hash(a.config);
  write_manifest(out / "manifest.json", manifest);

  std::printf("train: best_epoch %d val %.4f | test bacc %.4f f1 %.4f acc %.4f\n",
              record.best_epoch, record.best_val_balanced_accuracy,
              record.final_test.balanced_accuracy, record.final_test.macro_f1,
              record.final_test.accuracy);
  return 0;
}

// ---------------------------------------------------------------- sweep ----

struct Agg {
  double sum = 0.0, sq = 0.0;
  int n = 0;
  void add(double v) {
    sum += v;
    sq += v * v;
    ++n;
  }
  double mean() const { return n ? sum / n : 0.0; }
  double stdev() const {
    if (n == 0) return 0.0;
    const double m = mean();
    return std::sqrt(std::max(0.0, sq / n - m * m));
  }
};

struct GridPoint {
  std::string mode, plugin;
  int hops;
  Agg bacc, f1, acc;
};

void apply_plugin(TrainConfig& c, const std::string& plugin) {
  if (plugin == "base") {
    c.use_double_balancing = false;
    c.use_noise_tolerant = false;
  } else if (plugin == "db") {
    c.use_double_balancing = true;
    c.use_noise_tolerant = false;
  } else if (plugin == "iceberg") {
    c.use_double_balancing = true;
    c.use_noise_tolerant = true;
  } else {
    throw UsageError("sweep: unknown plugin '" + plugin + "' (base|db|iceberg)");
  }
}

int cmd_sweep(const std::string& spec_path, const json& argv) {
  struct Spec {
    std::string data, out;
    json split;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> modes, plugins;
    std::vector<int> hops;
    TrainConfig base;
  };
  auto [spec, graph] = input_phase([&] {
    std::ifstream in(spec_path);
    if (!in) throw std::runtime_error("missing file: " + spec_path);
    json j;
    in >> j;
    Spec s;
    s.data = j.at("data").get<std::string>();
    s.out = j.value("out", std::string("sweep"));
    s.split = j.value("split", json{{"kind", "step"}, {"base", 20}, {"ir", 10.0}, {"val", 30}});
    s.seeds = j.value("seeds", std::vector<std::uint64_t>{});
    s.modes = j.value("modes", std::vector<std::string>{"erm"});
    s.plugins = j.value("plugins", std::vector<std::string>{"base"});
    if (j.contains("train")) {
      const fs::path tmp = fs::temp_directory_path() / "iceberg_sweep_train.json";
      std::ofstream out(tmp);
      out << j.at("train").dump();
      out.close();
      s.base = train_config_from_json_file(tmp);
      fs::remove(tmp);
    }
    s.hops = j.value("hops", std::vector<int>{s.base.propagation.hops});
    if (s.seeds.empty()) throw std::runtime_error("sweep: need at least one seed");
    if (s.modes.empty() || s.plugins.empty() || s.hops.empty()) {
      throw std::runtime_error("sweep: empty grid");
    }
    return std::pair{std::move(s), load_graph(j.at("data").get<std::string>())};
  });

  fs::create_directories(spec.out);
  fs::create_directories(fs::path(spec.out) / "curves");

  auto make_masks = [&](std::uint64_t seed) {
    const std::string kind = spec.split.value("kind", "step");
    if (kind == "step") {
      return make_step_imbalance(graph, spec.split.value("base", 20),
                                 spec.split.value("ir", 10.0), spec.split.value("val", 30),
                                 seed);
    }
    if (kind == "few") {
      return make_fewshot(graph, spec.split.value("k", 1), spec.split.value("val", 30), seed);
    }
    throw UsageError("sweep: split.kind must be 'step' or 'few'");
  };

  // One diffusion per (alpha, hops) serves the whole grid.
  std::map<std::pair<std::uint64_t, int>, DiffusedFeatures> diffusion_cache;
  auto diffusion_for = [&](const PropagationConfig& p) -> const DiffusedFeatures& {
    std::uint64_t bits;
    static_assert(sizeof bits == sizeof p.alpha);
    std::memcpy(&bits, &p.alpha, sizeof bits);
    auto key = std::make_pair(bits, p.hops);
    auto it = diffusion_cache.find(key);
    if (it == diffusion_cache.end()) {
      it = diffusion_cache.emplace(key, diffuse_graph(graph, p)).first;
    }
    return it->second;
  };

  std::vector<GridPoint> grid;
  for (const std::string& mode : spec.modes) {
    for (const std::string& plugin : spec.plugins) {
      for (int hops : spec.hops) {
        GridPoint gp{mode, plugin, hops, {}, {}, {}};
        for (std::uint64_t seed : spec.seeds) {
          TrainConfig c = spec.base;
          c.supervised_mode = parse_balancing_mode(mode);
          apply_plugin(c, plugin);
          c.propagation.hops = hops;
          c.seed = seed;
          SplitMasks masks = make_masks(seed);
          auto [model, record] = train(graph, masks, c, diffusion_for(c.propagation));
          gp.bacc.add(record.final_test.balanced_accuracy);
          gp.f1.add(record.final_test.macro_f1);
          gp.acc.add(record.final_test.accuracy);

          char name[128];
          std::snprintf(name, sizeof name, "curves/curve_%s_%s_h%d_s%llu.csv",
                        mode.c_str(), plugin.c_str(), hops,
                        static_cast<unsigned long long>(seed));
          std::ofstream curve(fs::path(spec.out) / name);
          curve << "epoch,utilization,pseudo_accuracy,val_balanced_accuracy,"
                   "supervised_loss,unsupervised_loss\n";
          for (std::size_t e = 0; e < record.epochs.size(); ++e) {
            const EpochStats& st = record.epochs[e];
            char row[256];
            std::snprintf(row, sizeof row, "%zu,%.6f,%.6f,%.6f,%.6f,%.6f\n", e,
                          st.utilization, st.pseudo_accuracy, st.val_balanced_accuracy,
                          st.supervised_loss, st.unsupervised_loss);
            curve << row;
          }
          std::fprintf(stderr, "sweep: %s/%s h%d seed %llu bacc %.4f (%.1fs)\n",
                       mode.c_str(), plugin.c_str(), hops,
                       static_cast<unsigned long long>(seed),
                       record.final_test.balanced_accuracy, record.total_seconds);
        }
        grid.push_back(std::move(gp));
      }
    }
  }

  // results.csv
  {
    std::ofstream csv(fs::path(spec.out) / "results.csv");
    csv << "dataset,mode,plugin,hops,num_seeds,bacc_mean,bacc_std,f1_mean,f1_std,"
           "acc_mean,acc_std\n";
    for (const GridPoint& gp : grid) {
      char row[320];
      std::snprintf(row, sizeof row, "%s,%s,%s,%d,%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                    graph.name.c_str(), gp.mode.c_str(), gp.plugin.c_str(), gp.hops,
                    gp.bacc.n, gp.bacc.mean(), gp.bacc.stdev(), gp.f1.mean(),
                    gp.f1.stdev(), gp.acc.mean(), gp.acc.stdev());
      csv << row;
    }
  }

  // results.txt: aligned main table plus a per-hop table when hops vary.
  std::ostringstream table;
  {
    char row[320];
    std::snprintf(row, sizeof row, "%-10s %-8s %-8s %5s  %-16s %-16s %-16s\n",
                  "dataset", "mode", "plugin", "hops", "bacc", "macro_f1", "acc");
    table << row;
    for (const GridPoint& gp : grid) {
      char b[32], f[32], a[32];
      std::snprintf(b, sizeof b, "%.2f+-%.2f", 100 * gp.bacc.mean(), 100 * gp.bacc.stdev());
      std::snprintf(f, sizeof f, "%.2f+-%.2f", 100 * gp.f1.mean(), 100 * gp.f1.stdev());
      std::snprintf(a, sizeof a, "%.2f+-%.2f", 100 * gp.acc.mean(), 100 * gp.acc.stdev());
      std::snprintf(row, sizeof row, "%-10s %-8s %-8s %5d  %-16s %-16s %-16s\n",
                    graph.name.c_str(), gp.mode.c_str(), gp.plugin.c_str(), gp.hops, b, f, a);
      table << row;
    }
    if (spec.hops.size() > 1) {
      table << "\nbalanced accuracy by hops\n";
      std::snprintf(row, sizeof row, "%-10s %-8s", "mode", "plugin");
      table << row;
      for (int h : spec.hops) {
        std::snprintf(row, sizeof row, " %13s%2d", "hop", h);
        table << row;
      }
      table << "\n";
      for (const std::string& mode : spec.modes) {
        for (const std::string& plugin : spec.plugins) {
          std::snprintf(row, sizeof row, "%-10s %-8s", mode.c_str(), plugin.c_str());
          table << row;
          for (int h : spec.hops) {
            for (const GridPoint& gp : grid) {
              if (gp.mode == mode && gp.plugin == plugin && gp.hops == h) {
                std::snprintf(row, sizeof row, "    %5.2f+-%4.2f", 100 * gp.bacc.mean(),
                              100 * gp.bacc.stdev());
                table << row;
              }
            }
          }
          table << "\n";
        }
      }
    }
  }
  {
    std::ofstream txt(fs::path(spec.out) / "results.txt");
    txt << table.str();
  }
  std::cout << table.str();

  json manifest;
  manifest["command"] = "sweep";
  manifest["argv"] = argv;
  {
    std::ifstream in(spec_path);
    json j;
    in >> j;
    manifest["config"] = j;
  }
  manifest["inputs"] = {{"dataset", dataset_hashes(spec.data)}, {"spec", file_hash(spec_path)}};
  write_manifest(fs::path(spec.out) / "manifest.json", manifest);
  return 0;
}

// ----------------------------------------------------------------- eval ----

struct EvalArgs {
  std::string model, data, split, config, out;
  double alpha = -1.0;
  int hops = -1;
};

int cmd_eval(const EvalArgs& a, const json& argv) {
  auto [graph, masks, model, prop] = input_phase([&] {
    SparseGraph g = load_graph(a.data);
    SplitMasks m = load_split(a.split);
    MlpModel mdl = load_model(a.model);
    PropagationConfig p;
    if (!a.config.empty()) p = train_config_from_json_file(a.config).propagation;
    if (a.alpha >= 0.0) p.alpha = a.alpha;
    if (a.hops >= 0) p.hops = a.hops;
    if (mdl.input_dim() != g.feature_dim()) {
      throw std::runtime_error("eval: model expects " + std::to_string(mdl.input_dim()) +
                               " features, dataset has " + std::to_string(g.feature_dim()));
    }
    return std::tuple{std::move(g), std::move(m), std::move(mdl), p};
  });

  DiffusedFeatures diffused = diffuse_graph(graph, prop);
  auto [confidence, pred] = predict_confidence(model, diffused);
  MetricReport report = evaluate(pred, graph.labels, masks.test_idx, graph.num_classes);

  json j;
  j["balanced_accuracy"] = report.balanced_accuracy;
  j["macro_f1"] = report.macro_f1;
  j["accuracy"] = report.accuracy;
  j["per_class_recall"] = report.per_class_recall;
  std::cout << j.dump(2) << "\n";

  if (!a.out.empty()) {
    fs::create_directories(a.out);
    {
      std::ofstream out(fs::path(a.out) / "metrics.json");
      out << j.dump(2) << '\n';
    }
    json manifest;
    manifest["command"] = "eval";
    manifest["argv"] = argv;
    manifest["config"] = {{"model", a.model}, {"data", a.data},     {"split", a.split},
                          {"alpha", prop.alpha}, {"hops", prop.hops}, {"out", a.out}};
    manifest["inputs"] = {{"dataset", dataset_hashes(a.data)},
                          {"split", file_hash(a.split)},
                          {"model", file_hash(a.model)}};
    write_manifest(fs::path(a.out) / "manifest.json", manifest);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("ICEBERG_THREADS")) {
    const int n = std::atoi(threads);
    if (n > 0) omp_set_num_threads(n);
  }

  CLI::App app{"IceBerg: debiased self-training for imbalanced node classification"};
  app.require_subcommand(1);

  SplitArgs sa;
  CLI::App* split = app.add_subcommand("split", "Generate a train/val/test split");
  split->add_option("--data", sa.data, "dataset directory")->required();
  split->add_option("--kind", sa.kind, "step|few");
  split->add_option("--base", sa.base, "labels per majority class (step)");
  split->add_option("--ir", sa.ir, "imbalance ratio gamma (step)");
  split->add_option("--k", sa.k, "labels per class (few)");
  split->add_option("--val", sa.val, "validation nodes per class");
  split->add_option("--seed", sa.seed, "split seed");
  split->add_option("--out", sa.out, "output split.json path");

  PropagateArgs pa;
  CLI::App* prop = app.add_subcommand("propagate", "Warm a diffusion cache");
  prop->add_option("--data", pa.data, "dataset directory")->required();
  prop->add_option("--alpha", pa.alpha, "teleport weight in (0,1]");
  prop->add_option("--hops", pa.hops, "propagation hops");
  prop->add_option("--out", pa.out, "cache file path");

  TrainArgs ta;
  CLI::App* train = app.add_subcommand("train", "Train one model");
  train->add_option("--data", ta.data, "dataset directory")->required();
  train->add_option("--split", ta.split, "split.json path")->required();
  train->add_option("--config", ta.config, "TrainConfig JSON");
  train->add_option("--out", ta.out, "output run directory");
  train->add_option("--cache", ta.cache, "diffusion cache path (reused if present)");
  train->add_option("--mode", ta.mode, "erm|reweight|bs");
  train->add_option("--db", ta.db, "double balancing on|off");
  train->add_option("--noise", ta.noise, "noise-tolerant term on|off");
  train->add_option("--threshold", ta.threshold, "'dynamic' or a fixed tau");
  train->add_option("--hops", ta.hops, "propagation hops");
  train->add_option("--alpha", ta.alpha, "teleport weight");
  train->add_option("--epochs", ta.epochs, "training epochs");
  train->add_option("--lr", ta.lr, "learning rate");
  train->add_option("--dropout", ta.dropout, "dropout rate");
  train->add_option("--weight-decay", ta.weight_decay, "weight decay");
  train->add_option("--lambda", ta.lambda, "unsupervised loss weight");
  train->add_option("--mu", ta.mu, "logit adjustment strength");
  train->add_option("--beta", ta.beta, "reverse-CE weight");
  train->add_option("--hidden", ta.hidden, "hidden layer widths");
  train->add_option("--seed", ta.seed, "training seed");

  std::string sweep_spec;
  CLI::App* sweep = app.add_subcommand("sweep", "Run a seed x grid experiment");
  sweep->add_option("--spec", sweep_spec, "ExperimentSpec JSON path")->required();

  EvalArgs ea;
  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a split");
  eval->add_option("--model", ea.model, "model.ckpt path")->required();
  eval->add_option("--data", ea.data, "dataset directory")->required();
  eval->add_option("--split", ea.split, "split.json path")->required();
  eval->add_option("--config", ea.config, "TrainConfig JSON (for alpha/hops)");
  eval->add_option("--alpha", ea.alpha, "teleport weight");
  eval->add_option("--hops", ea.hops, "propagation hops");
  eval->add_option("--out", ea.out, "optional output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const json argv_j = argv_json(argc, argv);
  try {
    if (split->parsed()) return cmd_split(sa, argv_j);
    if (prop->parsed()) return cmd_propagate(pa, argv_j);
    if (train->parsed()) return cmd_train(ta, argv_j);
    if (sweep->parsed()) return cmd_sweep(sweep_spec, argv_j);
    if (eval->parsed()) return cmd_eval(ea, argv_j);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
