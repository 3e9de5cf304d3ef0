#include "lgp/prompts.hpp"

#include <array>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include <openssl/evp.h>

#include "lgp/error.hpp"

namespace lgp {
namespace {

struct Segment {
  enum Kind { literal, sentence, mask, label, category } kind;
  std::string text;
};

std::vector<Segment> parse_template(std::string_view tpl) {
  static const std::array<std::pair<std::string_view, Segment::Kind>, 4> names = {{
      {"{x}", Segment::sentence},
      {"{MASK}", Segment::mask},
      {"{L}", Segment::label},
      {"{c}", Segment::category},
  }};
  std::vector<Segment> out;
  std::string literal;
  std::size_t i = 0;
  while (i < tpl.size()) {
    bool matched = false;
    if (tpl[i] == '{') {
      for (const auto& [name, kind] : names) {
        if (tpl.substr(i, name.size()) == name) {
          if (!literal.empty()) out.push_back({Segment::literal, std::move(literal)});
          literal.clear();
          out.push_back({kind, {}});
          i += name.size();
          matched = true;
          break;
        }
      }
    }
    if (!matched) literal.push_back(tpl[i++]);
  }
  if (!literal.empty()) out.push_back({Segment::literal, std::move(literal)});
  return out;
}

std::size_t count_kind(const std::vector<Segment>& segs, Segment::Kind k) {
  std::size_t n = 0;
  for (const auto& s : segs) n += s.kind == k;
  return n;
}

void require_placeholders(std::string_view which, std::string_view tpl,
                          std::initializer_list<std::pair<Segment::Kind, const char*>> wanted) {
  const auto segs = parse_template(tpl);
  const std::array<const char*, 5> names = {"", "{x}", "{MASK}", "{L}", "{c}"};
  for (Segment::Kind k : {Segment::sentence, Segment::mask, Segment::label, Segment::category}) {
    std::size_t expected = 0;
    for (const auto& [wk, _] : wanted) expected += wk == k;
    const std::size_t got = count_kind(segs, k);
    if (got != expected) {
      throw ValidationError(std::string(which) + " template must contain " + names[k] + " " +
                            std::to_string(expected) + " time(s), found " + std::to_string(got) +
                            ": \"" + std::string(tpl) + "\"");
    }
  }
}

std::string normalize_space(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

void append(std::vector<std::string>& dst, std::vector<std::string> src) {
  dst.insert(dst.end(), std::make_move_iterator(src.begin()), std::make_move_iterator(src.end()));
}

RenderedPrompt render(const TemplateSet& t, std::string_view tpl, PromptKind kind,
                      std::string_view sentence, std::string_view label) {
  const std::string x = normalize_space(sentence);
  if (x.empty()) throw InvalidArgument("cannot render a prompt for an empty sentence");
  if (t.mask_count == 0) throw ValidationError("mask count must be at least 1");
  const std::string l = normalize_space(label_text(label));

  RenderedPrompt p;
  p.kind = kind;
  for (const auto& seg : parse_template(tpl)) {
    switch (seg.kind) {
      case Segment::literal:
        p.canonical_text += seg.text;
        append(p.tokens, tokenize(seg.text));
        break;
      case Segment::sentence:
        p.canonical_text += x;
        append(p.tokens, tokenize(x));
        break;
      case Segment::label:
      case Segment::category:
        p.canonical_text += l;
        append(p.tokens, tokenize(l));
        break;
      case Segment::mask:
        for (std::size_t j = 0; j < t.mask_count; ++j) {
          if (j > 0) p.canonical_text += ' ';
          p.canonical_text += "[MASK_" + std::to_string(j + 1) + "]";
          p.mask_positions.push_back(p.tokens.size());
          p.tokens.push_back(mask_sentinel(j));
        }
        break;
    }
  }
  p.key = sha256_hex(p.canonical_text);
  return p;
}

const std::map<std::string, std::pair<std::string, std::string>, std::less<>>& presets() {
  static const std::map<std::string, std::pair<std::string, std::string>, std::less<>> table = {
      {"about-category", {"About {x} Category {MASK} are : {L}.", "About {x} Category {MASK}."}},
      {"opinions-about",
       {"In {x}, the opinions about {L} are {MASK}.", "In {x}, the opinion that exists are {MASK}."}},
      {"aspects-of", {"{L} The aspects of {x} are {MASK}.", "The aspects of {x} are {MASK}."}},
      {"what-are-aspects",
       {"{L} What are the aspects of {x} {MASK}.", "What are the aspects of {x} {MASK}."}},
      {"means", {"This {x} means : {L} {MASK}.", "This {x} means : {MASK}."}},
  };
  return table;
}

}  // namespace

void TemplateSet::validate() const {
  if (mask_count == 0) throw ValidationError("mask_count must be at least 1");
  require_placeholders("support", support,
                       {{Segment::sentence, ""}, {Segment::mask, ""}, {Segment::label, ""}});
  require_placeholders("query", query, {{Segment::sentence, ""}, {Segment::mask, ""}});
  require_placeholders("description_request", description_request, {{Segment::category, ""}});
}

TemplateSet TemplateSet::preset(std::string_view name, std::size_t mask_count) {
  const auto& table = presets();
  auto it = table.find(name);
  if (it == table.end()) throw ValidationError("unknown template preset '" + std::string(name) + "'");
  TemplateSet t;
  t.support = it->second.first;
  t.query = it->second.second;
  t.mask_count = mask_count;
  t.validate();
  return t;
}

std::vector<std::string> TemplateSet::preset_names() {
  std::vector<std::string> out;
  for (const auto& [name, _] : presets()) out.push_back(name);
  return out;
}

TemplateSet TemplateSet::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("template set must be a JSON object");
  for (const auto& [k, _] : j.items()) {
    if (k != "support" && k != "query" && k != "description_request" && k != "mask_count") {
      throw ValidationError("unknown template key '" + k + "'");
    }
  }
  TemplateSet t;
  try {
    t.support = j.at("support").get<std::string>();
    t.query = j.at("query").get<std::string>();
    t.description_request = j.at("description_request").get<std::string>();
    const auto m = j.at("mask_count").get<long long>();
    if (m < 1) throw ValidationError("mask_count must be at least 1");
    t.mask_count = static_cast<std::size_t>(m);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("template set: ") + e.what());
  }
  t.validate();
  return t;
}

TemplateSet TemplateSet::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open template file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return from_json(j);
}

nlohmann::json TemplateSet::to_json() const {
  return {{"support", support},
          {"query", query},
          {"description_request", description_request},
          {"mask_count", mask_count}};
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      flush();
    } else if (c < 0x80 && std::ispunct(c)) {
      flush();
      out.emplace_back(1, ch);
    } else {
      cur.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    }
  }
  flush();
  return out;
}

std::string label_text(std::string_view label) {
  std::string out(label);
  for (char& c : out) {
    if (c == '_') c = ' ';
  }
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

std::string mask_sentinel(std::size_t index) { return "[mask_" + std::to_string(index + 1) + "]"; }

bool is_mask_sentinel(std::string_view token) {
  return token.size() > 7 && token.starts_with("[mask_") && token.back() == ']';
}

RenderedPrompt render_support(const TemplateSet& t, std::string_view sentence, std::string_view label) {
  if (label.empty()) throw InvalidArgument("support prompt needs a label");
  return render(t, t.support, PromptKind::support, sentence, label);
}

RenderedPrompt render_query(const TemplateSet& t, std::string_view sentence) {
  return render(t, t.query, PromptKind::query, sentence, {});
}

RenderedPrompt render_description(const TemplateSet& t, std::string_view description,
                                  std::string_view label) {
  if (label.empty()) throw InvalidArgument("description prompt needs a label");
  return render(t, t.support, PromptKind::description, description, label);
}

std::string render_description_request(const TemplateSet& t, std::string_view label) {
  if (label.empty()) throw InvalidArgument("description request needs a nonempty label");
  std::string out;
  for (const auto& seg : parse_template(t.description_request)) {
    if (seg.kind == Segment::literal) {
      out += seg.text;
    } else if (seg.kind == Segment::category) {
      out += label_text(label);
    }
  }
  return out;
}

}  // namespace lgp
