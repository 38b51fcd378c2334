#include "ensprompt/core/labels.hpp"

#include <algorithm>
#include <cctype>

#include <json.hpp>

namespace ensprompt {

namespace {

using nlohmann::json;

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_trailing_punct(char c) {
  switch (c) {
    case '.':
    case ',':
    case '!':
    case '?':
    case ';':
    case ':':
      return true;
    default:
      return false;
  }
}

std::optional<std::string> label_from_json_value(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number()) return value.dump();
  if (value.is_boolean()) return value.get<bool>() ? "true" : "false";
  return std::nullopt;
}

std::optional<std::string> extract_json_label(std::string_view text) {
  json doc = json::parse(text.begin(), text.end(), nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) return std::nullopt;
  if (doc.is_array()) {
    for (const auto& item : doc) {
      if (item.is_object() && item.contains("label")) {
        return label_from_json_value(item["label"]);
      }
    }
    return std::nullopt;
  }
  if (doc.is_object() && doc.contains("label")) {
    return label_from_json_value(doc["label"]);
  }
  return std::nullopt;
}

std::string strip_code_fences(std::string_view text) {
  std::string body = trim(text);
  if (body.rfind("```", 0) == 0) {
    const auto first_newline = body.find('\n');
    body = first_newline == std::string::npos ? body.substr(3) : body.substr(first_newline + 1);
    const auto closing = body.rfind("```");
    if (closing != std::string::npos) body.erase(closing);
  }
  std::erase(body, '`');
  return trim(body);
}

// Resolve a raw label string against the label space.
Prediction resolve(std::string_view candidate, const LabelSpace& label_space) {
  if (trim(candidate).empty()) return std::nullopt;
  if (!label_space.open()) return label_space.canonical(candidate);
  return normalize_label(candidate);
}

std::optional<std::string> last_number_token(std::string_view text) {
  std::optional<std::string> last;
  std::size_t i = 0;
  while (i < text.size()) {
    if (is_digit(text[i])) {
      std::size_t start = i;
      if (start > 0 && text[start - 1] == '-') --start;
      std::size_t end = i;
      while (end < text.size()) {
        if (is_digit(text[end])) {
          ++end;
        } else if ((text[end] == ',' || text[end] == '.') && end + 1 < text.size() &&
                   is_digit(text[end + 1])) {
          ++end;
        } else {
          break;
        }
      }
      last = std::string(text.substr(start, end - start));
      i = end;
    } else {
      ++i;
    }
  }
  return last;
}

}  // namespace

std::string trim(std::string_view text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && is_space(text[begin])) ++begin;
  while (end > begin && is_space(text[end - 1])) --end;
  return std::string(text.substr(begin, end - begin));
}

std::string casefold(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<std::string> normalize_number(std::string_view text) {
  std::string s = trim(text);
  if (s.empty()) return std::nullopt;
  bool negative = false;
  std::size_t pos = 0;
  if (s[0] == '+' || s[0] == '-') {
    negative = s[0] == '-';
    pos = 1;
  }
  std::string integer_part;
  std::string fraction_part;
  bool seen_point = false;
  bool seen_digit = false;
  for (; pos < s.size(); ++pos) {
    const char c = s[pos];
    if (is_digit(c)) {
      (seen_point ? fraction_part : integer_part).push_back(c);
      seen_digit = true;
    } else if (c == ',' && !seen_point && seen_digit) {
      continue;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      return std::nullopt;
    }
  }
  if (!seen_digit) return std::nullopt;
  const auto first_nonzero = integer_part.find_first_not_of('0');
  integer_part = first_nonzero == std::string::npos ? "0" : integer_part.substr(first_nonzero);
  while (!fraction_part.empty() && fraction_part.back() == '0') fraction_part.pop_back();
  std::string out = integer_part;
  if (!fraction_part.empty()) out += "." + fraction_part;
  if (negative && out != "0") out.insert(out.begin(), '-');
  return out;
}

std::string normalize_label(std::string_view text) {
  std::string s = casefold(trim(text));
  while (!s.empty() && is_trailing_punct(s.back())) s.pop_back();
  s = trim(s);
  if (auto number = normalize_number(s)) return *number;
  return s;
}

std::string normalize_prompt_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

Prediction parse_label(std::string_view raw_output, const LabelSpace& label_space) {
  try {
    if (auto label = extract_json_label(raw_output)) {
      if (auto resolved = resolve(*label, label_space)) return resolved;
    }
    const std::string stripped = strip_code_fences(raw_output);
    if (auto label = extract_json_label(stripped)) {
      if (auto resolved = resolve(*label, label_space)) return resolved;
    }
    if (!label_space.open()) {
      return label_space.canonical(stripped);
    }
    if (auto number = last_number_token(stripped)) {
      return normalize_number(*number);
    }
    return std::nullopt;
  } catch (...) {
    // Malformed input of any kind is INVALID, never an error.
    return std::nullopt;
  }
}

std::string serialize_label(std::string_view label) {
  json payload = json::array({json{{"label", std::string(label)}}});
  return payload.dump();
}

bool labels_match(const Prediction& prediction, std::string_view gold) {
  return prediction.has_value() && normalize_label(*prediction) == normalize_label(gold);
}

}  // namespace ensprompt
