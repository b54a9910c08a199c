#include "util/rng.hpp"

#include <sstream>

#include "util/error.hpp"

namespace nevo {

std::string Rng::save_state() const {
  std::ostringstream out;
  out << gen_;
  return out.str();
}

void Rng::load_state(const std::string& text) {
  std::istringstream in(text);
  in >> gen_;
  if (in.fail()) raise(ErrorCode::parse_error, "malformed rng state");
}

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t basis) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = basis;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a(const std::string& text, std::uint64_t basis) {
  return fnv1a(text.data(), text.size(), basis);
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = fnv1a(&a, sizeof(a));
  h = fnv1a(&b, sizeof(b), h);
  return h;
}

}  // namespace nevo
