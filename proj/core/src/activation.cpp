#include "odec/activation.hpp"

#include <cmath>

namespace odec {

namespace {
thread_local std::uint64_t g_eval_count = 0;
}

namespace activation_counter {
void reset() { g_eval_count = 0; }
std::uint64_t count() { return g_eval_count; }
}  // namespace activation_counter

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::Relu: return "relu";
    case Activation::Identity: return "identity";
  }
  fail("unreachable activation value");
}

Activation activation_from_string(const std::string& s) {
  if (s == "tanh") return Activation::Tanh;
  if (s == "relu") return Activation::Relu;
  if (s == "identity") return Activation::Identity;
  fail("unknown activation: ", s);
}

Vector apply_activation(Activation a, const Vector& z, bool count) {
  if (count) g_eval_count += static_cast<std::uint64_t>(z.size());
  switch (a) {
    case Activation::Tanh: return z.array().tanh();
    case Activation::Relu: return z.cwiseMax(0.0);
    case Activation::Identity: return z;
  }
  fail("unreachable activation value");
}

}  // namespace odec
