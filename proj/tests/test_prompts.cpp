#include <doctest.h>

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "lgp/error.hpp"
#include "lgp/prompts.hpp"
#include "lgp/rng.hpp"
#include "support.hpp"

using namespace lgp;

namespace {

TemplateSet with_m(std::size_t m) {
  TemplateSet t;
  t.mask_count = m;
  return t;
}

void check_mask_slots(const RenderedPrompt& p, std::size_t m) {
  REQUIRE(p.mask_positions.size() == m);
  for (std::size_t j = 0; j < m; ++j) {
    REQUIRE(p.mask_positions[j] < p.tokens.size());
    if (j > 0) CHECK(p.mask_positions[j] > p.mask_positions[j - 1]);
    CHECK(p.tokens[p.mask_positions[j]] == mask_sentinel(j));
  }
  std::size_t sentinels = 0;
  for (const auto& tok : p.tokens) sentinels += is_mask_sentinel(tok);
  CHECK(sentinels == m);
}

}  // namespace

TEST_CASE("support prompt structure") {
  const auto p = render_support(with_m(3), "great pizza", "food_food_pizza");
  CHECK(p.kind == PromptKind::support);
  check_mask_slots(p, 3);
  const auto great = std::find(p.tokens.begin(), p.tokens.end(), "great");
  const auto pizza = std::find(p.tokens.begin(), p.tokens.end(), "pizza");
  REQUIRE(great != p.tokens.end());
  CHECK(pizza == great + 1);
  CHECK(static_cast<std::size_t>(pizza - p.tokens.begin()) < p.mask_positions.front());
  // label text after the masks
  const std::vector<std::string> tail(p.tokens.end() - 4, p.tokens.end());
  CHECK(tail == std::vector<std::string>{"food", "food", "pizza", "."});
  CHECK(p.canonical_text == "About great pizza Category [MASK_1] [MASK_2] [MASK_3] are : food food pizza.");
  CHECK(render_support(with_m(3), "great pizza", "food_food_pizza").key == p.key);
  check_mask_slots(render_support(with_m(1), "great pizza", "food_food_pizza"), 1);
}

TEST_CASE("query prompt structure") {
  const auto q = render_query(with_m(3), "Slow service");
  check_mask_slots(q, 3);
  CHECK(q.kind == PromptKind::query);
  CHECK(std::find(q.tokens.begin(), q.tokens.end(), "slow") != q.tokens.end());
  CHECK(std::find(q.tokens.begin(), q.tokens.end(), "Slow") == q.tokens.end());
  CHECK(q.tokens == std::vector<std::string>{"about", "slow", "service", "category", "[mask_1]", "[mask_2]",
                                             "[mask_3]", "."});
  const auto s = render_support(with_m(3), "Slow service", "service_general");
  CHECK(s.canonical_text != q.canonical_text);
  CHECK(s.key != q.key);
}

TEST_CASE("empty inputs are rejected") {
  CHECK_THROWS_AS(render_query(with_m(3), ""), InvalidArgument);
  CHECK_THROWS_AS(render_query(with_m(3), "   \t "), InvalidArgument);
  CHECK_THROWS_AS(render_support(with_m(3), "ok", ""), InvalidArgument);
  CHECK_THROWS_AS(render_description_request(TemplateSet{}, ""), InvalidArgument);
}

TEST_CASE("description request") {
  CHECK(render_description_request(TemplateSet{}, "food_food_bread") ==
        "Provide a comprehensive description of food food bread.");
  CHECK(render_description_request(TemplateSet{}, "price") == "Provide a comprehensive description of price.");
  CHECK(render_description_request(TemplateSet{}, "food_portion") ==
        "Provide a comprehensive description of food portion.");
}

TEST_CASE("description prompt uses the support template with the own label") {
  const auto d = render_description(TemplateSet{}, "Bread is baked.", "food_food_bread");
  CHECK(d.kind == PromptKind::description);
  CHECK(d.canonical_text == "About Bread is baked. Category [MASK_1] [MASK_2] [MASK_3] are : food food bread.");
  CHECK(d.key == render_support(TemplateSet{}, "Bread is baked.", "food_food_bread").key);
}

TEST_CASE("tokenize") {
  CHECK(tokenize("Tasty pizza!") == std::vector<std::string>{"tasty", "pizza", "!"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("  \n ").empty());
  CHECK(tokenize("It's 5-star, really.") ==
        std::vector<std::string>{"it", "'", "s", "5", "-", "star", ",", "really", "."});
  // sentence text can never forge a mask sentinel
  for (const auto& t : tokenize("[mask_1] [MASK_2]")) CHECK_FALSE(is_mask_sentinel(t));
}

TEST_CASE("tokenize is idempotent on joined tokens") {
  Rng rng(21);
  const std::string alphabet = "abcXYZ ,.!?'-\t";
  for (int trial = 0; trial < 300; ++trial) {
    std::string s;
    const std::size_t len = rng.index(40);
    for (std::size_t i = 0; i < len; ++i) s.push_back(alphabet[rng.index(alphabet.size())]);
    const auto once = tokenize(s);
    std::string joined;
    for (const auto& t : once) joined += (joined.empty() ? "" : " ") + t;
    CHECK(tokenize(joined) == once);
  }
}

TEST_CASE("rendering is pure and keys hash the canonical text") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  Rng rng(22);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 1 + rng.index(5);
    std::string sentence = "w" + std::to_string(rng.index(1000)) + " tasty  food";
    const auto a = render_support(with_m(m), sentence, "food_quality");
    const auto b = render_support(with_m(m), sentence, "food_quality");
    CHECK(a.canonical_text == b.canonical_text);
    CHECK(a.key == b.key);
    CHECK(a.key == sha256_hex(a.canonical_text));
    check_mask_slots(a, m);
    check_mask_slots(render_query(with_m(m), sentence), m);
  }
}

TEST_CASE("canonical text and keys match the golden file") {
  std::ifstream f(std::string(LGP_TEST_DATA) + "/prompt_keys.json");
  const auto cases = nlohmann::json::parse(f);
  REQUIRE(cases.size() >= 4);
  for (const auto& c : cases) {
    const auto t = with_m(c.at("m").get<std::size_t>());
    const auto p = c.at("kind") == "support"
                       ? render_support(t, c.at("sentence").get<std::string>(), c.at("label").get<std::string>())
                       : render_query(t, c.at("sentence").get<std::string>());
    CHECK(p.canonical_text == c.at("canonical_text").get<std::string>());
    CHECK(p.key == c.at("key").get<std::string>());
  }
}

TEST_CASE("template validation") {
  TemplateSet ok;
  CHECK_NOTHROW(ok.validate());

  auto bad = ok;
  bad.support = "About {x} Category {MASK}.";
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = ok;
  bad.support = "About {x} {x} Category {MASK} are : {L}.";
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = ok;
  bad.query = "About {x} Category {MASK} {L}.";
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = ok;
  bad.query = "About {x} Category.";
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = ok;
  bad.description_request = "Describe it.";
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = ok;
  bad.description_request = "Describe {c} and {c}.";
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = ok;
  bad.mask_count = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("presets") {
  const auto names = TemplateSet::preset_names();
  CHECK(names.size() == 5);
  CHECK(std::find(names.begin(), names.end(), "about-category") != names.end());
  for (const auto& n : names) {
    const auto t = TemplateSet::preset(n, 2);
    CHECK(t.mask_count == 2);
    check_mask_slots(render_support(t, "nice view", "ambience_general"), 2);
    check_mask_slots(render_query(t, "nice view"), 2);
  }
  const auto def = TemplateSet::preset("about-category");
  CHECK(def.support == TemplateSet{}.support);
  CHECK(def.query == TemplateSet{}.query);
  CHECK_THROWS_AS(TemplateSet::preset("nope"), ValidationError);
}

TEST_CASE("template files") {
  testing::TempDir dir;
  const auto path = dir.file("t.json");
  testing::write_file(path, R"({"support":"S {x} {MASK} {L}","query":"Q {x} {MASK}",)"
                            R"("description_request":"D {c}","mask_count":4})");
  const auto t = TemplateSet::load(path);
  CHECK(t.mask_count == 4);
  CHECK(TemplateSet::from_json(t.to_json()).support == t.support);

  testing::write_file(path, R"({"support":"S {x} {MASK} {L}","query":"Q {x} {MASK}",)"
                            R"("description_request":"D {c}","mask_count":4,"extra":1})");
  CHECK_THROWS_AS(TemplateSet::load(path), ValidationError);
  testing::write_file(path, R"({"support":"S {x} {MASK}","query":"Q {x} {MASK}",)"
                            R"("description_request":"D {c}","mask_count":4})");
  CHECK_THROWS_AS(TemplateSet::load(path), ValidationError);
  testing::write_file(path, "{not json");
  CHECK_THROWS_AS(TemplateSet::load(path), ParseError);
}
