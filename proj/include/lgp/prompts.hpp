#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace lgp {

// Support, query and description-request templates plus the mask count m.
// Placeholders: {x} sentence, {MASK} the m mask slots, {L} label, {c} label
// in the description request.
struct TemplateSet {
  std::string support = "About {x} Category {MASK} are : {L}.";
  std::string query = "About {x} Category {MASK}.";
  std::string description_request = "Provide a comprehensive description of {c}.";
  std::size_t mask_count = 3;

  // Throws ValidationError on a missing or duplicated placeholder or m == 0.
  void validate() const;

  static TemplateSet preset(std::string_view name, std::size_t mask_count = 3);
  static std::vector<std::string> preset_names();
  static TemplateSet from_json(const nlohmann::json& j);
  static TemplateSet load(const std::string& path);
  nlohmann::json to_json() const;
};

enum class PromptKind { support, query, description };

struct RenderedPrompt {
  std::vector<std::string> tokens;
  std::vector<std::size_t> mask_positions;
  PromptKind kind = PromptKind::query;
  std::string canonical_text;
  std::string key;  // hex SHA-256 of canonical_text
};

// Lowercase, whitespace split, ASCII punctuation detached as single tokens.
std::vector<std::string> tokenize(std::string_view text);

// Underscores become spaces: "food_food_bread" -> "food food bread".
std::string label_text(std::string_view label);

std::string sha256_hex(std::string_view bytes);

std::string mask_sentinel(std::size_t index);
bool is_mask_sentinel(std::string_view token);

RenderedPrompt render_support(const TemplateSet& t, std::string_view sentence, std::string_view label);
RenderedPrompt render_query(const TemplateSet& t, std::string_view sentence);
// A category description rendered through the support template, with the
// category's own label filling the label slot.
RenderedPrompt render_description(const TemplateSet& t, std::string_view description,
                                  std::string_view label);
std::string render_description_request(const TemplateSet& t, std::string_view label);

}  // namespace lgp
