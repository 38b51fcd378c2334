#include "ensprompt/llm/client.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>

#include "ensprompt/core/labels.hpp"
#include "ensprompt/errors.hpp"

namespace ensprompt {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv_mix(std::uint64_t& hash, std::string_view bytes) {
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= kFnvPrime;
  }
}

}  // namespace

void validate(const ChatRequest& request) {
  if (trim(request.user_text).empty()) {
    throw ContractViolation("chat request has empty user text");
  }
  if (!(request.temperature >= 0.0)) {
    throw ContractViolation("chat request temperature must be >= 0");
  }
  if (request.max_output <= 0) {
    throw ContractViolation("chat request max_output must be positive");
  }
}

std::string request_fingerprint(std::string_view system_text, std::string_view user_text) {
  std::uint64_t hash = kFnvOffset;
  fnv_mix(hash, system_text);
  fnv_mix(hash, std::string_view("\x1f", 1));
  fnv_mix(hash, user_text);
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(hash));
  return buffer;
}

std::string request_fingerprint(const ChatRequest& request) {
  return request_fingerprint(request.system_text.value_or(""), request.user_text);
}

void l2_normalize(EmbeddingVector& values) {
  double sum = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericError("embedding has a non-finite entry");
    sum += v * v;
  }
  if (sum <= 0.0) throw NumericError("cannot normalize a zero embedding");
  const double norm = std::sqrt(sum);
  for (double& v : values) v /= norm;
}

}  // namespace ensprompt
