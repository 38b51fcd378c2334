#include "ensprompt/core/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ensprompt/core/labels.hpp"
#include "ensprompt/errors.hpp"
#include "ensprompt/rng.hpp"

namespace ensprompt {

using nlohmann::json;

std::vector<Example> parse_jsonl(std::string_view text, std::string_view source) {
  std::vector<Example> out;
  std::set<std::string> ids;
  std::size_t line_number = 0;
  std::size_t begin = 0;
  auto fail = [&](const std::string& why) {
    throw LoadError(std::string(source) + ":" + std::to_string(line_number) + ": " + why);
  };
  while (begin <= text.size()) {
    auto end = text.find('\n', begin);
    if (end == std::string_view::npos) end = text.size();
    ++line_number;
    const std::string line = trim(text.substr(begin, end - begin));
    begin = end + 1;
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    json object = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (object.is_discarded() || !object.is_object()) fail("not a JSON object");
    if (!object.contains("input") || !object["input"].is_string()) {
      fail("missing string field 'input'");
    }
    if (!object.contains("expected")) fail("missing field 'expected'");

    Example example;
    example.input = object["input"].get<std::string>();
    const json& expected = object["expected"];
    if (expected.is_string()) {
      example.expected = expected.get<std::string>();
    } else if (expected.is_number()) {
      example.expected = expected.dump();
    } else {
      fail("field 'expected' must be a string or number");
    }
    if (trim(example.expected).empty()) fail("field 'expected' is empty");

    if (object.contains("id")) {
      const json& id = object["id"];
      example.id = id.is_string() ? id.get<std::string>() : id.dump();
    } else {
      example.id = std::to_string(line_number);
    }
    if (!ids.insert(example.id).second) fail("duplicate id '" + example.id + "'");
    out.push_back(std::move(example));
    if (end == text.size()) break;
  }
  if (out.empty()) {
    throw LoadError(std::string(source) + ": dataset is empty");
  }
  return out;
}

std::vector<Example> load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw LoadError("cannot open dataset '" + path.string() + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_jsonl(buffer.str(), path.string());
}

SplitPair split_holdout(std::span<const Example> examples, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ContractViolation("split_holdout: fraction must lie in (0, 1)");
  }
  const std::size_t n = examples.size();
  if (n < 2) {
    throw ContractViolation("split_holdout: need at least two examples");
  }
  auto held = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  held = std::clamp<std::size_t>(held, 1, n - 1);
  Rng rng(seed);
  auto picked = rng.sample_without_replacement(n, held);
  std::vector<bool> in_second(n, false);
  for (auto index : picked) in_second[index] = true;
  SplitPair out;
  for (std::size_t i = 0; i < n; ++i) {
    (in_second[i] ? out.second : out.first).push_back(examples[i]);
  }
  return out;
}

}  // namespace ensprompt
