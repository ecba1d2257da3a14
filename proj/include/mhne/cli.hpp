// Command-line front end: train, eval-link, ablate, aspect-probe, recommend,
// intensity and simulate.
#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "mhne/eval.hpp"
#include "mhne/intensity.hpp"
#include "mhne/params.hpp"
#include "mhne/synth.hpp"
#include "mhne/temporal_graph.hpp"
#include "mhne/training.hpp"

namespace mhne::cli {

namespace fs = std::filesystem;
using nlohmann::json;

// Reads a flat JSON object whose keys are long option names. Keys are routed
// to the subcommand being run.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* root = nullptr) : root_(root) {}

  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    try {
      input >> j;
    } catch (const json::exception& e) {
      throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
    std::vector<std::string> parents;
    if (root_ != nullptr) {
      for (const auto* sub : root_->get_subcommands()) parents = {sub->get_name()};
    }
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      if (key == "subcommand") continue;
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_string()) {
        item.inputs = {value.get<std::string>()};
      } else if (value.is_boolean()) {
        item.inputs = {value.get<bool>() ? "true" : "false"};
      } else {
        item.inputs = {value.dump()};
      }
      items.push_back(std::move(item));
    }
    return items;
  }

 private:
  const CLI::App* root_;
};

struct TrainSettings {
  std::string edges;
  bool directed = false;
  std::size_t aspects = 4;
  std::size_t dim_per = 20;
  std::size_t history = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 20;
  double lr = 0.003;
  std::size_t batch = 0;  // 0: 200 below 10k nodes, else 1000
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::size_t checkpoint_every = 0;
  std::string out;

  HyperParams hyper(std::size_t node_count) const {
    HyperParams h;
    h.aspects = aspects;
    h.dim = dim_per;
    h.history = history;
    h.negatives = negatives;
    h.epochs = epochs;
    h.lr = lr;
    h.batch = batch != 0 ? batch : (node_count < 10000 ? 200 : 1000);
    h.seed = seed;
    return h;
  }
};

struct EvalSettings {
  std::size_t mask = 0;  // 0: 5000 below 10k nodes, else 20000; capped at half the static edges
  bool write_pairs = false;
  std::string variant = "full";
  std::string slice;
};

struct QuerySettings {
  std::string model;
  std::string node;
  double time = std::numeric_limits<double>::quiet_NaN();
  std::size_t k = 10;
};

struct SimSettings {
  PlantedSpec spec;
  std::uint64_t seed = 0;
  std::string out;
};

namespace detail {

inline void add_train_options(CLI::App* sub, TrainSettings& s) {
  sub->add_option("--edges", s.edges, "Edge list (`src dst time` per line)")->required()->check(CLI::ExistingFile);
  sub->add_flag("--directed", s.directed, "Treat edges as directed");
  sub->add_option("--aspects", s.aspects, "Number of aspects K")->check(CLI::PositiveNumber);
  sub->add_option("--dim-per", s.dim_per, "Per-embedding size m; total dim is m(K+1)")->check(CLI::PositiveNumber);
  sub->add_option("--history", s.history, "History length H")->check(CLI::PositiveNumber);
  sub->add_option("--negatives", s.negatives, "Negatives per positive")->check(CLI::PositiveNumber);
  sub->add_option("--epochs", s.epochs, "Training epochs");
  sub->add_option("--lr", s.lr, "Adam learning rate")->check(CLI::PositiveNumber);
  sub->add_option("--batch", s.batch, "Batch size (default 200 below 10k nodes, else 1000)");
  sub->add_option("--seed", s.seed, "Random seed");
  sub->add_option("--workers", s.workers, "Worker threads (1 = bit-reproducible)")->check(CLI::PositiveNumber);
  sub->add_option("--checkpoint-every", s.checkpoint_every, "Save model every E epochs (0 = off)");
  sub->add_option("--out", s.out, "Output directory")->required();
}

inline json train_json(const TrainSettings& s) {
  return json{{"edges", s.edges},         {"directed", s.directed}, {"aspects", s.aspects},
              {"dim-per", s.dim_per},     {"history", s.history},   {"negatives", s.negatives},
              {"epochs", s.epochs},       {"lr", s.lr},             {"batch", s.batch},
              {"seed", s.seed},           {"workers", s.workers},   {"checkpoint-every", s.checkpoint_every},
              {"out", s.out}};
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

inline void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

inline json report_json(const EvalReport& r) {
  json metrics = json::object();
  for (const auto& [k, v] : r.metrics) metrics[k] = v;
  json config = json::object();
  for (const auto& [k, v] : r.config) config[k] = v;
  return json{{"task", r.task}, {"metrics", metrics}, {"config", config}, {"seed", r.seed}};
}

inline void write_pairs(const fs::path& path, const TemporalNetwork& net, const std::vector<NodePair>& pairs) {
  std::ostringstream os;
  for (auto [a, b] : pairs) os << net.label(a) << ' ' << net.label(b) << '\n';
  write_text(path, os.str());
}

// Trains and writes model.bin, embeddings.txt and train_log.csv under `dir`.
inline ModelParams train_and_save(const TemporalNetwork& net, const HyperParams& hyper, const TrainSettings& s,
                                  const fs::path& dir, std::ostream& log) {
  std::ostringstream csv;
  csv << "epoch,mean_loss,wall_seconds\n";
  csv << std::setprecision(10);
  log << std::setprecision(10);
  TrainCallbacks cb;
  cb.on_epoch = [&](const EpochStats& st, const ModelParams& p) {
    log << st.epoch << ", " << st.mean_loss << ", " << st.seconds << '\n';
    csv << st.epoch << ',' << st.mean_loss << ',' << st.seconds << '\n';
    if (s.checkpoint_every > 0 && st.epoch % s.checkpoint_every == 0) {
      save_params(p, (dir / ("checkpoint_" + std::to_string(st.epoch) + ".bin")).string());
    }
  };
  TrainOptions opts;
  opts.workers = s.workers;
  auto params = train(net, hyper, cb, opts);
  save_params(params, (dir / "model.bin").string());
  std::ostringstream emb;
  export_embeddings(params, emb, net.labels());
  write_text(dir / "embeddings.txt", emb.str());
  write_text(dir / "train_log.csv", csv.str());
  return params;
}

inline std::size_t resolve_mask(std::size_t requested, const TemporalNetwork& net) {
  std::size_t m = requested != 0 ? requested : (net.node_count() < 10000 ? 5000 : 20000);
  if (requested == 0) m = std::min(m, net.static_edge_count() / 2);
  return m;
}

// Mask, train on the remainder, return the split and the trained model.
struct MaskedRun {
  MaskedSplit split;
  ModelParams params;
  std::size_t masked = 0;
};

inline MaskedRun masked_training(const TemporalNetwork& net, const HyperParams& hyper, const TrainSettings& s,
                                 const EvalSettings& e, const fs::path& dir, std::ostream& log) {
  MaskedRun run;
  run.masked = resolve_mask(e.mask, net);
  Rng rng(s.seed);
  run.split = mask_static_edges(net, run.masked, rng);
  if (e.write_pairs) {
    write_pairs(dir / "positives.txt", net, run.split.positives);
    write_pairs(dir / "negatives.txt", net, run.split.negatives);
  }
  run.params = train_and_save(run.split.train, hyper, s, dir, log);
  return run;
}

inline void decorate(EvalReport& r, const HyperParams& h, std::size_t masked) {
  r.config["dim"] = static_cast<double>(h.total_dim());
  r.config["K"] = static_cast<double>(h.aspects);
  r.config["H"] = static_cast<double>(h.history);
  r.config["m"] = static_cast<double>(h.dim);
  r.config["masked"] = static_cast<double>(masked);
  r.config["use_attention"] = h.use_attention ? 1.0 : 0.0;
  r.config["use_gumbel"] = h.use_gumbel ? 1.0 : 0.0;
}

}  // namespace detail

// Returns the process exit code: 0 ok, 1 runtime failure, 2 usage error.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Multi-aspect temporal network embedding with mixtures of Hawkes processes", "mhne"};
  app.require_subcommand(1);
  app.set_config("--config", "", "JSON file with option values (flags override)");
  app.config_formatter(std::make_shared<JsonConfig>(&app));
  app.allow_config_extras(CLI::config_extras_mode::ignore);

  TrainSettings ts;
  EvalSettings es;
  QuerySettings qs;
  SimSettings ss;

  // --config belongs to the top-level app; subcommands hand it up.
  auto with_config = [&](CLI::App* sub) {
    sub->fallthrough();
    sub->allow_config_extras(CLI::config_extras_mode::ignore);
  };

  auto* train_cmd = app.add_subcommand("train", "Train embeddings on an edge list");
  detail::add_train_options(train_cmd, ts);
  with_config(train_cmd);

  auto* link_cmd = app.add_subcommand("eval-link", "Mask static edges, train, and run link prediction");
  detail::add_train_options(link_cmd, ts);
  link_cmd->add_option("--mask", es.mask, "Static edges to mask (default 5000 below 10k nodes, else 20000)");
  link_cmd->add_flag("--write-pairs", es.write_pairs, "Write positives.txt / negatives.txt");
  with_config(link_cmd);

  auto* ablate_cmd = app.add_subcommand("ablate", "Link prediction for a model variant");
  detail::add_train_options(ablate_cmd, ts);
  ablate_cmd->add_option("--variant", es.variant, "full | no_attn | no_gumbel | no_attn_no_gumbel")
      ->check(CLI::IsMember({"full", "no_attn", "no_gumbel", "no_attn_no_gumbel"}));
  ablate_cmd->add_option("--mask", es.mask, "Static edges to mask");
  ablate_cmd->add_flag("--write-pairs", es.write_pairs, "Write positives.txt / negatives.txt");
  with_config(ablate_cmd);

  auto* probe_cmd = app.add_subcommand("aspect-probe", "Link prediction from single embedding slices");
  detail::add_train_options(probe_cmd, ts);
  probe_cmd->add_option("--mask", es.mask, "Static edges to mask");
  probe_cmd->add_option("--slice", es.slice, "identity | aspectK | concat (default: all)");
  probe_cmd->add_flag("--write-pairs", es.write_pairs, "Write positives.txt / negatives.txt");
  with_config(probe_cmd);

  auto add_query = [&](CLI::App* sub) {
    sub->add_option("--edges", ts.edges, "Edge list the model was trained on")->required()->check(CLI::ExistingFile);
    sub->add_flag("--directed", ts.directed, "Treat edges as directed");
    sub->add_option("--model", qs.model, "model.bin from train")->required()->check(CLI::ExistingFile);
    sub->add_option("--node", qs.node, "Source node label")->required();
    sub->add_option("--out", ts.out, "Output directory")->required();
    with_config(sub);
  };
  auto* rec_cmd = app.add_subcommand("recommend", "Rank new neighbors of a node by intensity");
  add_query(rec_cmd);
  rec_cmd->add_option("--time", qs.time, "Query time in normalized units (default: end of the network)");
  rec_cmd->add_option("--k", qs.k, "Number of recommendations")->check(CLI::PositiveNumber);

  auto* int_cmd = app.add_subcommand("intensity", "Per-aspect intensity trace over a node's events");
  add_query(int_cmd);

  auto* sim_cmd = app.add_subcommand("simulate", "Generate a planted multi-aspect network");
  sim_cmd->add_option("--aspects", ss.spec.aspects, "Number of planted aspects")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--nodes-per", ss.spec.nodes_per_aspect, "Nodes per aspect")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--mu", ss.spec.mu0, "Base rate");
  sim_cmd->add_option("--alpha", ss.spec.alpha0, "Excitation jump");
  sim_cmd->add_option("--delta", ss.spec.delta0, "Decay");
  sim_cmd->add_option("--horizon", ss.spec.horizon, "Time horizon");
  sim_cmd->add_option("--cross", ss.spec.cross_aspect_prob, "Probability of an out-of-aspect target");
  sim_cmd->add_option("--seed", ss.seed, "Random seed");
  sim_cmd->add_option("--out", ss.out, "Output directory")->required();
  with_config(sim_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "mhne: " << e.what() << '\n';
    return 2;
  }

  try {
    if (sim_cmd->parsed()) {
      const fs::path dir(ss.out);
      fs::create_directories(dir);
      Rng rng(ss.seed);
      const auto planted = generate(ss.spec, rng);
      std::ostringstream edges, truth;
      edges << std::setprecision(std::numeric_limits<double>::max_digits10);
      for (const auto& e : planted.truth.events) edges << e.edge.source << ' ' << e.edge.target << ' ' << e.edge.time << '\n';
      truth << "node,aspect\n";
      for (std::size_t u = 0; u < planted.truth.labels.size(); ++u) truth << u << ',' << planted.truth.labels[u] + 1 << '\n';
      detail::write_text(dir / "edges.txt", edges.str());
      detail::write_text(dir / "truth.csv", truth.str());
      detail::write_json(dir / "config.json",
                         json{{"subcommand", "simulate"}, {"aspects", ss.spec.aspects},
                              {"nodes-per", ss.spec.nodes_per_aspect}, {"mu", ss.spec.mu0},
                              {"alpha", ss.spec.alpha0}, {"delta", ss.spec.delta0},
                              {"horizon", ss.spec.horizon}, {"cross", ss.spec.cross_aspect_prob},
                              {"seed", ss.seed}, {"out", ss.out}});
      out << "wrote " << planted.truth.events.size() << " events for " << planted.truth.labels.size()
          << " nodes to " << dir.string() << '\n';
      return 0;
    }

    const auto net = load_edge_list(ts.edges, ts.directed);

    if (rec_cmd->parsed() || int_cmd->parsed()) {
      const fs::path dir(ts.out);
      fs::create_directories(dir);
      const auto params = load_params(qs.model);
      if (params.node_count != net.node_count()) {
        throw std::runtime_error("model has " + std::to_string(params.node_count) + " nodes, edge list has " +
                                 std::to_string(net.node_count()));
      }
      const NodeId u = net.find(qs.node);
      std::ostringstream csv;
      csv << std::setprecision(std::numeric_limits<double>::max_digits10);
      json cfg = {{"edges", ts.edges}, {"directed", ts.directed}, {"model", qs.model},
                  {"node", qs.node},   {"out", ts.out}};
      if (rec_cmd->parsed()) {
        const double t = std::isnan(qs.time) ? net.end_time() : qs.time;
        csv << "rank,node,score\n";
        const auto recs = recommend(params, net, u, t, qs.k);
        for (std::size_t i = 0; i < recs.size(); ++i) {
          csv << i + 1 << ',' << net.label(recs[i].node) << ',' << recs[i].score << '\n';
        }
        detail::write_text(dir / "recommendations.csv", csv.str());
        cfg["subcommand"] = "recommend";
        cfg["time"] = t;
        cfg["k"] = qs.k;
      } else {
        // lambda^k = exp(raw per-aspect intensity) of each realized event.
        csv << "time,aspect,lambda\n";
        for (const auto& e : net.events(u)) {
          const auto ctx = build_edge_context(params, u, e.neighbor, e.time,
                                              history(net, u, e.time, params.hyper.history));
          for (std::size_t k = 0; k < params.K(); ++k) {
            csv << e.time << ',' << k + 1 << ',' << std::exp(aspect_intensity(params, ctx, k)) << '\n';
          }
        }
        detail::write_text(dir / "intensity.csv", csv.str());
        cfg["subcommand"] = "intensity";
      }
      detail::write_json(dir / "config.json", cfg);
      return 0;
    }

    HyperParams hyper = ts.hyper(net.node_count());
    fs::path dir(ts.out);
    json cfg = detail::train_json(ts);
    if (ablate_cmd->parsed()) {
      hyper = ablation_config(hyper, es.variant);
      dir /= es.variant;
      cfg["variant"] = es.variant;
    }
    fs::create_directories(dir);

    if (train_cmd->parsed()) {
      cfg["subcommand"] = "train";
      cfg["total_dim"] = hyper.total_dim();
      detail::write_json(dir / "config.json", cfg);
      detail::train_and_save(net, hyper, ts, dir, out);
      return 0;
    }

    cfg["mask"] = es.mask;
    cfg["write-pairs"] = es.write_pairs;
    cfg["total_dim"] = hyper.total_dim();
    if (probe_cmd->parsed()) {
      cfg["subcommand"] = "aspect-probe";
      if (!es.slice.empty()) cfg["slice"] = es.slice;
    } else {
      cfg["subcommand"] = ablate_cmd->parsed() ? "ablate" : "eval-link";
    }
    detail::write_json(dir / "config.json", cfg);
    auto run = detail::masked_training(net, hyper, ts, es, dir, out);

    if (probe_cmd->parsed()) {
      std::vector<EmbeddingSlice> slices;
      if (!es.slice.empty()) {
        slices.push_back(EmbeddingSlice::parse(es.slice));
      } else {
        slices.push_back(EmbeddingSlice::identity());
        for (std::size_t k = 0; k < hyper.aspects; ++k) slices.push_back(EmbeddingSlice::aspect_k(k));
        slices.push_back(EmbeddingSlice::concat());
      }
      const auto data = labeled_pairs(run.split.positives, run.split.negatives);
      json reports = json::array();
      for (const auto& sl : slices) {
        auto r = aspect_probe(run.params, data, sl, ts.seed);
        detail::decorate(r, hyper, run.masked);
        r.config["slice_dim"] = static_cast<double>(sl.extract(run.params, 0).size());
        reports.push_back(detail::report_json(r));
        out << r.task << ": macro_f1=" << r.metrics["macro_f1"] << " auc_roc=" << r.metrics["auc_roc"] << '\n';
      }
      detail::write_json(dir / "report.json", reports);
      return 0;
    }

    auto r = link_prediction(run.params, run.split.positives, run.split.negatives, ts.seed);
    detail::decorate(r, hyper, run.masked);
    if (ablate_cmd->parsed()) r.task = "link_prediction:" + es.variant;
    detail::write_json(dir / "report.json", detail::report_json(r));
    out << r.task << ": macro_f1=" << r.metrics["macro_f1"] << " auc_roc=" << r.metrics["auc_roc"] << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "mhne: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace mhne::cli
