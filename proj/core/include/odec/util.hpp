#ifndef ODEC_UTIL_HPP
#define ODEC_UTIL_HPP

#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace odec {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Integration blew up (non-finite state or magnitude guard tripped).
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, long step) : Error(what), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

namespace detail {
inline void concat_into(std::ostringstream&) {}
template <class T, class... Rest>
void concat_into(std::ostringstream& os, T&& v, Rest&&... rest) {
  os << v;
  concat_into(os, std::forward<Rest>(rest)...);
}
}  // namespace detail

template <class... Args>
std::string concat(Args&&... args) {
  std::ostringstream os;
  detail::concat_into(os, std::forward<Args>(args)...);
  return os.str();
}

template <class... Args>
[[noreturn]] void fail(Args&&... args) {
  throw Error(concat(std::forward<Args>(args)...));
}

// FNV-1a, used for provenance fingerprints in output artifacts.
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t fnv1a64(std::string_view s);
std::string hash_string(std::uint64_t h);  // "fnv1a:<16 hex digits>"
std::string hash_file(const std::string& path);

// Shortest-round-trip-safe decimal formatting for doubles in CSV output.
std::string format_double(double v);

// Deterministic RNG. std::normal_distribution is implementation-defined,
// so normal variates use an explicit Box-Muller transform on top of the
// standardized mt19937_64 stream; artifacts stay byte-stable per seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  double uniform() {  // [0, 1)
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double normal();

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_u64() % i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace odec

#endif
