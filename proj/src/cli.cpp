#include "lgp/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <set>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lgp/config.hpp"
#include "lgp/error.hpp"
#include "lgp/evaluate.hpp"
#include "lgp/gradcheck.hpp"
#include "lgp/pipeline.hpp"
#include "lgp/synthetic.hpp"
#include "lgp/trainer.hpp"

namespace lgp::cli {
namespace {

namespace fs = std::filesystem;

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::string> out;
};

struct ThresholdFlags {
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> gamma;
  std::optional<std::string> fallback;
};

struct ShapeFlags {
  std::optional<std::size_t> ways;
  std::optional<std::size_t> shots;
  std::optional<std::size_t> queries;
  std::optional<std::string> part;
};

void add_threshold_flags(CLI::App* cmd, ThresholdFlags& f) {
  cmd->add_option("--alpha", f.alpha, "Dynamic-threshold mean coefficient");
  cmd->add_option("--beta", f.beta, "Dynamic-threshold std coefficient");
  cmd->add_option("--gamma", f.gamma, "Dynamic-threshold max/min mixing coefficient");
  cmd->add_option("--fallback", f.fallback, "Empty-prediction fallback: argmax or none");
}

void add_shape_flags(CLI::App* cmd, ShapeFlags& f) {
  cmd->add_option("--ways", f.ways, "Classes per episode (N)");
  cmd->add_option("--shots", f.shots, "Support sentences per class (K)");
  cmd->add_option("--queries", f.queries, "Query positives per class (Q)");
  cmd->add_option("--part", f.part, "Split part to sample from: train, val or test");
}

RunConfig resolve_config(const GlobalFlags& g, const ThresholdFlags* t = nullptr, const ShapeFlags* s = nullptr) {
  RunConfig c = g.config.empty() ? RunConfig{} : RunConfig::load(g.config);
  if (g.seed) c.seed = *g.seed;
  if (g.workers) c.workers = *g.workers;
  if (g.out) c.out = *g.out;
  if (t) {
    if (t->alpha) c.threshold.alpha = *t->alpha;
    if (t->beta) c.threshold.beta = *t->beta;
    if (t->gamma) c.threshold.gamma = *t->gamma;
    if (t->fallback) c.fallback = parse_fallback(*t->fallback);
  }
  if (s) {
    if (s->ways) c.protocol.shape.ways = *s->ways;
    if (s->shots) c.protocol.shape.shots = *s->shots;
    if (s->queries) c.protocol.shape.queries = *s->queries;
    if (s->part) c.protocol.split_part = *s->part;
  }
  c.validate();
  return c;
}

void require_inputs(const RunConfig& c) {
  if (c.corpus.empty()) throw ValidationError("config needs a corpus path");
  if (c.split.empty()) throw ValidationError("config needs a split path");
  for (const auto* p : {&c.corpus, &c.split}) {
    if (!fs::exists(*p)) throw ValidationError("input file does not exist: " + *p);
  }
}

std::unique_ptr<DescriptionProvider> make_provider(const RunConfig& c) {
  auto p = std::make_unique<DescriptionProvider>(c.templates(), c.descriptions.mode, c.descriptions.remote);
  if (!c.descriptions.cache.empty() && fs::exists(c.descriptions.cache)) p->load_cache(c.descriptions.cache);
  return p;
}

void persist_descriptions(const RunConfig& c, const DescriptionProvider& p) {
  if (!c.descriptions.cache.empty() && p.generated() > 0) p.save_cache(c.descriptions.cache);
}

struct LoadedEncoder {
  std::unique_ptr<Encoder> encoder;
  StubEncoder* stub = nullptr;
};

LoadedEncoder make_encoder(const RunConfig& c, const std::string& checkpoint) {
  LoadedEncoder out;
  switch (c.encoder.kind) {
    case EncoderKind::stub: {
      std::unique_ptr<StubEncoder> stub;
      if (!checkpoint.empty()) {
        const Checkpoint ckpt = load_checkpoint(checkpoint);
        require_compatible(ckpt, c.encoder.dim, c.encoder.mask_count);
        stub = std::make_unique<StubEncoder>(encoder_from_checkpoint(ckpt));
      } else {
        stub = std::make_unique<StubEncoder>(c.encoder.dim, c.encoder.mask_count, c.encoder_seed(),
                                             c.encoder.token_state);
      }
      out.stub = stub.get();
      out.encoder = std::move(stub);
      break;
    }
    case EncoderKind::store: {
      if (!checkpoint.empty()) throw ValidationError("--checkpoint applies to the stub encoder only");
      auto store = std::make_shared<const EmbeddingStore>(store_load(c.encoder.store));
      if (store->mask_count != c.encoder.mask_count) {
        throw ValidationError("embedding store has m=" + std::to_string(store->mask_count) + ", config has m=" +
                              std::to_string(c.encoder.mask_count));
      }
      out.encoder = std::make_unique<StoreEncoder>(std::move(store));
      break;
    }
    case EncoderKind::remote:
      if (!checkpoint.empty()) throw ValidationError("--checkpoint applies to the stub encoder only");
      out.encoder = std::make_unique<RemoteEncoder>(c.encoder.url, c.encoder.dim, c.encoder.mask_count);
      break;
  }
  return out;
}

// Lists every prompt key of the protocol's episodes that the store lacks.
std::set<std::string> missing_store_keys(const Pipeline& pipeline, const StoreEncoder& store,
                                         const EpisodeStream& stream, const Corpus& corpus) {
  std::set<std::string> missing;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    for (const auto& p : pipeline.prompts(stream.at(i), corpus)) {
      if (!store.contains(p.key)) missing.insert(p.key);
    }
  }
  return missing;
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
  return buf;
}

int cmd_describe(const GlobalFlags& g, const std::string& part, std::ostream& out, std::ostream& err) {
  const RunConfig c = resolve_config(g);
  if (c.split.empty()) throw ValidationError("describe needs a split path");
  if (c.descriptions.cache.empty()) throw ValidationError("describe needs descriptions.cache");
  const SplitSpec split = SplitSpec::load(c.split);
  std::vector<std::string> labels;
  if (part == "all") {
    for (const auto* p : {&split.train, &split.val, &split.test}) labels.insert(labels.end(), p->begin(), p->end());
  } else {
    labels = split.part(part);
  }
  const auto provider_ptr = make_provider(c);
  DescriptionProvider& provider = *provider_ptr;
  std::size_t failures = 0;
  for (const auto& label : labels) {
    try {
      provider.get(label);
    } catch (const RemoteError& e) {
      ++failures;
      err << "unresolved " << label << ": " << e.what() << '\n';
    }
  }
  if (provider.generated() > 0 || !fs::exists(c.descriptions.cache)) provider.save_cache(c.descriptions.cache);
  out << "described " << labels.size() - failures << " of " << labels.size() << " labels ("
      << provider.generated() << " new, " << provider.remote_requests() << " remote requests)\n";
  return failures == 0 ? kOk : kRemote;
}

int cmd_train(const GlobalFlags& g, const ThresholdFlags& t, const ShapeFlags& s,
              std::optional<std::size_t> epochs, std::optional<std::size_t> tasks, std::optional<double> lr,
              std::ostream& out) {
  RunConfig c = resolve_config(g, &t, &s);
  if (epochs) c.protocol.epochs = *epochs;
  if (tasks) c.protocol.train_episodes = *tasks;
  if (lr) c.optimizer.lr = *lr;
  c.validate();
  if (c.encoder.kind != EncoderKind::stub) throw ValidationError("train updates the stub encoder only");
  require_inputs(c);

  const Corpus corpus = Corpus::load(c.corpus);
  const SplitSpec split = SplitSpec::load(c.split);
  const TemplateSet templates = c.templates();
  const auto provider_ptr = make_provider(c);
  DescriptionProvider& provider = *provider_ptr;
  StubEncoder encoder(c.encoder.dim, c.encoder.mask_count, c.encoder_seed(), c.encoder.token_state);

  TrainConfig tc;
  tc.shape = c.protocol.shape;
  tc.epochs = c.protocol.epochs;
  tc.tasks_per_epoch = c.protocol.train_episodes;
  tc.val_episodes = c.protocol.val_episodes;
  tc.optimizer = c.optimizer;
  tc.threshold = c.threshold;
  tc.fallback = c.fallback;
  tc.seed = c.seed;
  tc.eps = c.sigma_eps;
  tc.workers = c.workers;

  fs::create_directories(c.out);
  std::ofstream log(fs::path(c.out) / "train_log.jsonl");
  TrainResult result = train(encoder, templates, provider, corpus, split, tc, [&](const EpochLog& e) {
    char line[160];
    std::snprintf(line, sizeof line, "epoch %zu loss %.6f val_f1 %s val_auc %s\n", e.epoch, e.mean_loss,
                  pct(e.val_f1).c_str(), e.val_auc ? pct(*e.val_auc).c_str() : "n/a");
    out << line;
    log << nlohmann::json{{"epoch", e.epoch},
                          {"mean_loss", e.mean_loss},
                          {"val_f1", e.val_f1},
                          {"val_auc", e.val_auc ? nlohmann::json(*e.val_auc) : nlohmann::json(nullptr)}}
               .dump()
        << '\n';
  });
  result.best.config = c.to_json();
  const auto path = (fs::path(c.out) / "checkpoint.json").string();
  save_checkpoint(path, result.best);
  persist_descriptions(c, provider);
  out << "best epoch " << result.best.epoch << " written to " << path << '\n';
  return kOk;
}

int cmd_eval(const GlobalFlags& g, const ThresholdFlags& t, const ShapeFlags& s, const std::string& checkpoint,
             std::optional<std::size_t> episodes, std::ostream& out, std::ostream& err) {
  RunConfig c = resolve_config(g, &t, &s);
  if (episodes) c.protocol.eval_episodes = *episodes;
  c.validate();
  require_inputs(c);
  if (!checkpoint.empty() && !fs::exists(checkpoint)) throw ValidationError("checkpoint does not exist: " + checkpoint);

  const Corpus corpus = Corpus::load(c.corpus);
  const SplitSpec split = SplitSpec::load(c.split);
  const auto provider_ptr = make_provider(c);
  DescriptionProvider& provider = *provider_ptr;
  const LoadedEncoder enc = make_encoder(c, checkpoint);
  const Pipeline pipeline(c.templates(), *enc.encoder, provider, c.sigma_eps);

  const Protocol protocol{c.protocol.shape, c.protocol.eval_episodes, c.seed, c.protocol.split_part};
  const auto& classes = split.part(protocol.split);
  if (const auto* store = dynamic_cast<const StoreEncoder*>(enc.encoder.get())) {
    const EpisodeStream stream(protocol.seed, corpus, classes, protocol.shape, protocol.episodes);
    const auto missing = missing_store_keys(pipeline, *store, stream, corpus);
    if (!missing.empty()) {
      err << "embedding store lacks " << missing.size() << " prompt key(s):\n";
      for (const auto& k : missing) err << "  " << k << '\n';
      return kRuntime;
    }
  }
  const Report report = evaluate(pipeline, corpus, classes, protocol, c.threshold, c.fallback, c.workers);
  fs::create_directories(c.out);
  report.save((fs::path(c.out) / "report.json").string());
  persist_descriptions(c, provider);
  out << "F1 " << pct(report.macro_f1) << " AUC " << (report.auc ? pct(*report.auc) : std::string("n/a")) << '\n';
  if (report.degenerate_auc_episodes > 0) {
    err << report.degenerate_auc_episodes << " episode(s) had no class with both positive and negative queries\n";
  }
  return kOk;
}

int cmd_gradcheck(const GlobalFlags& g, GradcheckOptions opt, std::ostream& out) {
  if (!g.config.empty()) RunConfig::load(g.config).validate();
  if (g.seed) opt.seed = *g.seed;
  if (opt.episodes == 0 || opt.dim == 0 || opt.mask_count == 0 || opt.shots == 0 || opt.queries == 0 ||
      opt.ways == 0) {
    throw ValidationError("gradcheck sizes must be positive");
  }
  const GradcheckResult r = run_gradcheck(opt);
  if (r.skipped) {
    out << "skipped: " << r.notice << '\n';
    return kOk;
  }
  char line[200];
  std::snprintf(line, sizeof line, "checked %zu coordinates over %zu episodes\nmax rel err %.3e <= %.0e: %s\n",
                r.coordinates, r.episodes, r.max_rel_err, opt.tolerance, r.passed ? "PASS" : "FAIL");
  out << line;
  return r.passed ? kOk : kRuntime;
}

int cmd_export(const GlobalFlags& g, const ShapeFlags& s, const std::string& checkpoint,
               std::optional<std::size_t> episodes, std::ostream& out) {
  RunConfig c = resolve_config(g, nullptr, &s);
  if (episodes) c.protocol.eval_episodes = *episodes;
  c.validate();
  require_inputs(c);
  const Corpus corpus = Corpus::load(c.corpus);
  const SplitSpec split = SplitSpec::load(c.split);
  const auto provider_ptr = make_provider(c);
  DescriptionProvider& provider = *provider_ptr;
  const LoadedEncoder enc = make_encoder(c, checkpoint);
  const Pipeline pipeline(c.templates(), *enc.encoder, provider, c.sigma_eps);
  const EpisodeStream stream(c.seed, corpus, split.part(c.protocol.split_part), c.protocol.shape,
                             c.protocol.eval_episodes);

  std::vector<std::vector<ClassBundle>> per(stream.size());
  parallel_for(stream.size(), c.workers, [&](std::size_t i) {
    per[i] = pipeline.forward(pipeline.encode(stream.at(i), corpus)).classes;
  });
  fs::create_directories(c.out);
  const auto path = (fs::path(c.out) / "prototypes.jsonl").string();
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  std::set<std::string> labels;
  std::size_t lines = 0;
  for (std::size_t i = 0; i < per.size(); ++i) {
    for (std::size_t k = 0; k < per[i].size(); ++k) {
      std::vector<float> r(per[i][k].r.begin(), per[i][k].r.end());
      const auto ep_label = stream.at(i).classes[k];
      f << nlohmann::json{{"label", ep_label}, {"r", r}}.dump() << '\n';
      labels.insert(ep_label);
      ++lines;
    }
  }
  persist_descriptions(c, provider);
  out << "exported " << lines << " prototypes for " << labels.size() << " classes to " << path << '\n';
  return kOk;
}

int cmd_synth(const GlobalFlags& g, SyntheticSpec spec, std::ostream& out) {
  if (g.seed) spec.seed = *g.seed;
  const std::string dir = g.out.value_or("out");
  if (spec.sentences_per_class == 0 || spec.filler_vocab == 0) throw ValidationError("synthetic sizes must be positive");
  if (spec.multi_label_fraction < 0.0 || spec.multi_label_fraction > 1.0) {
    throw ValidationError("--multi-label must be in [0, 1]");
  }
  const SyntheticData data = make_synthetic(spec);
  fs::create_directories(dir);
  data.corpus.save((fs::path(dir) / "corpus.jsonl").string());
  data.split.save((fs::path(dir) / "split.json").string());
  out << "wrote " << data.corpus.size() << " sentences over " << data.corpus.labels().size() << " classes to "
      << dir << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Label-guided prompt few-shot multi-label aspect detection"};
  app.fallthrough();
  app.require_subcommand(1);
  GlobalFlags g;
  app.add_option("--config", g.config, "Run configuration JSON");
  app.add_option("--seed", g.seed, "Seed for every random choice of the run");
  app.add_option("--workers", g.workers, "Episode-level worker threads");
  app.add_option("--out", g.out, "Output directory");

  ThresholdFlags thr;
  ShapeFlags shape;
  std::string checkpoint;
  std::optional<std::size_t> episodes;

  auto* describe = app.add_subcommand("describe", "Resolve category descriptions into the cache");
  std::string describe_part = "all";
  describe->add_option("--part", describe_part, "Split part to describe: train, val, test or all")
      ->check(CLI::IsMember({"train", "val", "test", "all"}));

  auto* train_cmd = app.add_subcommand("train", "Episodic training of the stub encoder");
  std::optional<std::size_t> epochs, tasks;
  std::optional<double> lr;
  add_threshold_flags(train_cmd, thr);
  add_shape_flags(train_cmd, shape);
  train_cmd->add_option("--epochs", epochs, "Training epochs");
  train_cmd->add_option("--tasks-per-epoch", tasks, "Episodes per epoch");
  train_cmd->add_option("--lr", lr, "Learning rate");

  auto* eval_cmd = app.add_subcommand("eval", "Episodic Macro-F1 / AUC evaluation");
  add_threshold_flags(eval_cmd, thr);
  add_shape_flags(eval_cmd, shape);
  eval_cmd->add_option("--checkpoint", checkpoint, "Stub encoder checkpoint");
  eval_cmd->add_option("--episodes", episodes, "Evaluation episodes");

  auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference check of the analytic backward");
  GradcheckOptions gopt;
  grad_cmd->add_option("--episodes", gopt.episodes, "Random episodes")->capture_default_str();
  grad_cmd->add_option("--ways", gopt.ways, "N")->capture_default_str();
  grad_cmd->add_option("--shots", gopt.shots, "K")->capture_default_str();
  grad_cmd->add_option("--queries", gopt.queries, "Q")->capture_default_str();
  grad_cmd->add_option("--dim", gopt.dim, "d")->capture_default_str();
  grad_cmd->add_option("--mask-count", gopt.mask_count, "m")->capture_default_str();
  grad_cmd->add_option("--tolerance", gopt.tolerance, "Maximum relative error")->capture_default_str();
  grad_cmd->add_flag("--flip-sign", gopt.flip_sign, "Negate one analytic gradient (mutation check)");

  auto* export_cmd = app.add_subcommand("export-prototypes", "Write per-episode class prototypes as JSONL");
  add_shape_flags(export_cmd, shape);
  export_cmd->add_option("--checkpoint", checkpoint, "Stub encoder checkpoint");
  export_cmd->add_option("--episodes", episodes, "Episodes to sample");

  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic marker-token corpus and split");
  SyntheticSpec sspec;
  synth_cmd->add_option("--train-classes", sspec.train_classes)->capture_default_str();
  synth_cmd->add_option("--val-classes", sspec.val_classes)->capture_default_str();
  synth_cmd->add_option("--test-classes", sspec.test_classes)->capture_default_str();
  synth_cmd->add_option("--sentences-per-class", sspec.sentences_per_class)->capture_default_str();
  synth_cmd->add_option("--filler-vocab", sspec.filler_vocab)->capture_default_str();
  synth_cmd->add_option("--fillers-per-sentence", sspec.filler_per_sentence)->capture_default_str();
  synth_cmd->add_option("--multi-label", sspec.multi_label_fraction, "Fraction of two-label sentences")
      ->capture_default_str();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kValidation;
  }

  try {
    if (*describe) return cmd_describe(g, describe_part, out, err);
    if (*train_cmd) return cmd_train(g, thr, shape, epochs, tasks, lr, out);
    if (*eval_cmd) return cmd_eval(g, thr, shape, checkpoint, episodes, out, err);
    if (*grad_cmd) return cmd_gradcheck(g, gopt, out);
    if (*export_cmd) return cmd_export(g, shape, checkpoint, episodes, out);
    if (*synth_cmd) return cmd_synth(g, sspec, out);
  } catch (const ValidationError& e) {
    err << "invalid configuration: " << e.what() << '\n';
    return kValidation;
  } catch (const InvalidArgument& e) {
    err << "invalid argument: " << e.what() << '\n';
    return kValidation;
  } catch (const RemoteError& e) {
    err << "remote error: " << e.what() << '\n';
    return kRemote;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kValidation;
}

}  // namespace lgp::cli
