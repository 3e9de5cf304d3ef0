#include <doctest.h>

#include <regex>
#include <sys/wait.h>

#include "lgp/cli.hpp"
#include "lgp/config.hpp"
#include "lgp/encoder.hpp"
#include "lgp/pipeline.hpp"
#include "lgp/evaluate.hpp"
#include "support.hpp"

using namespace lgp;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "lgp");
  std::ostringstream o, e;
  const int code = cli::run(args, o, e);
  return {code, o.str(), e.str()};
}

std::size_t count_lines(const std::string& text) { return std::count(text.begin(), text.end(), '\n'); }

// Synthetic corpus plus a config pointing at it.
struct Workspace {
  testing::TempDir tmp;
  std::string config;

  explicit Workspace(json extra = json::object()) {
    REQUIRE(run({"--out", tmp.file("data"), "synth", "--sentences-per-class", "20"}).code == 0);
    json c = {{"corpus", tmp.file("data/corpus.jsonl")},
              {"split", tmp.file("data/split.json")},
              {"encoder", {{"d", 16}}},
              {"descriptions", {{"cache", tmp.file("descriptions.jsonl")}}}};
    c.merge_patch(extra);
    config = tmp.file("config.json");
    testing::write_file(config, c.dump());
  }
  std::string out(const std::string& name) const { return tmp.file(name); }
};

}  // namespace

TEST_CASE("usage errors exit with 1") {
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"eval", "--ways", "many"}).code == 1);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("an invalid config exits with 1 before writing anything") {
  testing::TempDir tmp;
  testing::write_file(tmp.file("c.json"), R"({"threshold": {"alpha": 0.3, "delta": 1}})");
  for (const char* cmd : {"eval", "train", "export-prototypes", "describe"}) {
    CAPTURE(cmd);
    const Run r = run({"--config", tmp.file("c.json"), "--out", tmp.file("out"), cmd});
    CHECK(r.code == 1);
    CHECK(r.err.find("delta") != std::string::npos);
    CHECK_FALSE(fs::exists(tmp.file("out")));
  }
  const Run r = run({"--out", tmp.file("out"), "eval"});
  CHECK(r.code == 1);
  CHECK_FALSE(fs::exists(tmp.file("out")));
}

TEST_CASE("describe fills the cache once") {
  Workspace ws;
  const Run first = run({"--config", ws.config, "describe", "--part", "test"});
  CHECK(first.code == 0);
  CHECK(first.out.find("5 new") != std::string::npos);
  const std::string cache = testing::read_file(ws.out("descriptions.jsonl"));
  CHECK(count_lines(cache) == 5);

  const Run again = run({"--config", ws.config, "describe", "--part", "test"});
  CHECK(again.code == 0);
  CHECK(again.out.find("0 new") != std::string::npos);
  CHECK(testing::read_file(ws.out("descriptions.jsonl")) == cache);

  CHECK(run({"--config", ws.config, "describe", "--part", "all"}).code == 0);
  const std::string all = testing::read_file(ws.out("descriptions.jsonl"));
  CHECK(count_lines(all) == 20);
  CHECK(all.substr(0, cache.size()) == cache);
}

TEST_CASE("describe reports unresolved labels with exit 3") {
  testing::LocalServer server([](httplib::Server& s) {
    s.Post("/chat", [](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  });
  Workspace ws(json{{"descriptions", {{"mode", "remote"}, {"url", server.url("/chat")}, {"timeout_s", 5.0}}}});
  const Run r = run({"--config", ws.config, "describe", "--part", "val"});
  CHECK(r.code == 3);
  CHECK(r.err.find("unresolved aspect_m10") != std::string::npos);
}

TEST_CASE("eval prints both metrics and is reproducible") {
  Workspace ws;
  const Run a = run({"--config", ws.config, "--seed", "7", "--out", ws.out("a"), "eval", "--episodes", "40"});
  REQUIRE(a.code == 0);
  CHECK(std::regex_match(a.out, std::regex("F1 \\d+\\.\\d\\d AUC \\d+\\.\\d\\d\n")));
  const Run b = run({"--config", ws.config, "--seed", "7", "--out", ws.out("b"), "eval", "--episodes", "40"});
  const Run c = run({"--config", ws.config, "--seed", "7", "--workers", "4", "--out", ws.out("c"), "eval",
                     "--episodes", "40"});
  CHECK(a.out == b.out);
  CHECK(a.out == c.out);
  const std::string ra = testing::read_file(ws.out("a/report.json"));
  CHECK(ra == testing::read_file(ws.out("b/report.json")));
  const json ja = json::parse(ra), jc = json::parse(testing::read_file(ws.out("c/report.json")));
  CHECK(ja["macro_f1"] == jc["macro_f1"]);
  CHECK(ja["auc"] == jc["auc"]);
  CHECK(ja["episodes"].size() == 40);

  CHECK(run({"--config", ws.config, "--out", ws.out("d"), "eval", "--ways", "50"}).code == 2);
  CHECK(run({"--config", ws.config, "--out", ws.out("d"), "eval", "--part", "dev"}).code == 1);
}

TEST_CASE("train writes a log and a checkpoint that eval accepts") {
  Workspace ws(json{{"encoder", {{"token_state", "learnable"}}}, {"protocol", {{"val_episodes", 5}}}});
  const Run t = run({"--config", ws.config, "--seed", "3", "--out", ws.out("run"), "train", "--epochs", "2",
                     "--tasks-per-epoch", "5", "--lr", "0.005"});
  REQUIRE(t.code == 0);
  CHECK(std::regex_search(t.out, std::regex("epoch 1 loss [0-9.]+ val_f1 [0-9.]+ val_auc")));
  CHECK(count_lines(testing::read_file(ws.out("run/train_log.jsonl"))) == 2);
  REQUIRE(fs::exists(ws.out("run/checkpoint.json")));

  const Run e = run({"--config", ws.config, "--out", ws.out("ev"), "eval", "--episodes", "5", "--checkpoint",
                     ws.out("run/checkpoint.json")});
  CHECK(e.code == 0);

  // a checkpoint trained with another d is rejected
  testing::write_file(ws.out("d8.json"),
                      json{{"encoder", {{"d", 8}}}, {"corpus", ws.out("data/corpus.jsonl")},
                           {"split", ws.out("data/split.json")}}
                          .dump());
  const Run bad = run({"--config", ws.out("d8.json"), "--out", ws.out("ev2"), "eval", "--episodes", "5",
                       "--checkpoint", ws.out("run/checkpoint.json")});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("d=16") != std::string::npos);
}

TEST_CASE("eval with an incomplete embedding store lists the missing keys") {
  Workspace ws;
  const RunConfig cfg = RunConfig::load(ws.config);
  const Corpus corpus = Corpus::load(cfg.corpus);
  const SplitSpec split = SplitSpec::load(cfg.split);
  StubEncoder stub(16, 3, 1);
  DescriptionProvider desc;
  const Pipeline pipe(TemplateSet{}, stub, desc);
  const EpisodeStream stream(0, corpus, split.test, EpisodeShape{}, 3);

  EmbeddingStore full{16, 3, "stub", {}};
  for (std::size_t i = 0; i < stream.size(); ++i) {
    for (const auto& p : pipe.prompts(stream.at(i), corpus)) full.records.emplace(p.key, stub.encode(p));
  }
  EmbeddingStore partial = full;
  const std::string dropped = partial.records.begin()->first;
  partial.records.erase(partial.records.begin());
  store_save(ws.out("full.jsonl"), full);
  store_save(ws.out("partial.jsonl"), partial);

  auto with_store = [&](const std::string& store) {
    json c = json::parse(testing::read_file(ws.config));
    c["encoder"] = {{"kind", "store"}, {"d", 16}, {"store", store}};
    testing::write_file(ws.out("store.json"), c.dump());
    return run({"--config", ws.out("store.json"), "--seed", "0", "--out", ws.out("st"), "eval", "--episodes", "3"});
  };
  const Run miss = with_store(ws.out("partial.jsonl"));
  CHECK(miss.code == 2);
  CHECK(miss.err.find(dropped) != std::string::npos);
  CHECK_FALSE(fs::exists(ws.out("st/report.json")));

  const Run ok = with_store(ws.out("full.jsonl"));
  CHECK(ok.code == 0);
  CHECK(fs::exists(ws.out("st/report.json")));
}

TEST_CASE("gradcheck passes, catches a flipped sign and skips N=1") {
  const Run pass = run({"gradcheck", "--episodes", "3", "--dim", "8"});
  CHECK(pass.code == 0);
  CHECK(pass.out.find("PASS") != std::string::npos);
  const Run flip = run({"gradcheck", "--episodes", "3", "--dim", "8", "--flip-sign"});
  CHECK(flip.code == 2);
  CHECK(flip.out.find("FAIL") != std::string::npos);
  const Run one = run({"gradcheck", "--episodes", "2", "--ways", "1"});
  CHECK(one.code == 0);
  CHECK(one.out.rfind("skipped", 0) == 0);
}

TEST_CASE("export-prototypes writes deterministic d-length vectors") {
  Workspace ws;
  std::string first;
  for (int i = 0; i < 2; ++i) {
    const std::string dir = ws.out("exp" + std::to_string(i));
    REQUIRE(run({"--config", ws.config, "--out", dir, "export-prototypes", "--episodes", "4"}).code == 0);
    const std::string text = testing::read_file(dir + "/prototypes.jsonl");
    CHECK(count_lines(text) >= 20);
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      const json j = json::parse(line);
      CHECK(j["r"].size() == 16);
      CHECK(j["label"].get<std::string>().rfind("aspect_m", 0) == 0);
    }
    if (i == 0) first = text;
    else CHECK(text == first);
  }
}

TEST_CASE("the installed binary maps errors onto exit codes") {
  testing::TempDir tmp;
  auto status = [](const std::string& cmd) {
    const int raw = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  const std::string bin = LGP_CLI_PATH;
  CHECK(status(bin + " --help") == 0);
  CHECK(status(bin + " nope") == 1);
  CHECK(status(bin + " --config " + tmp.file("missing.json") + " eval") == 1);
  CHECK(status(bin + " gradcheck --episodes 1 --dim 4 --flip-sign") == 2);
  CHECK(status(bin + " --out " + tmp.file("s") + " synth --sentences-per-class 10") == 0);
  CHECK(fs::exists(tmp.file("s/corpus.jsonl")));
}
