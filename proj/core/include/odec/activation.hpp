#ifndef ODEC_ACTIVATION_HPP
#define ODEC_ACTIVATION_HPP

#include <cstdint>
#include <string>

#include "odec/matrix.hpp"

namespace odec {

enum class Activation { Tanh, Relu, Identity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

// Elementwise nonlinearity of the ODE right-hand side. Each call adds
// z.size() to the evaluation counter unless counting is suppressed
// (trajectory recording re-evaluates activations outside the model path).
Vector apply_activation(Activation a, const Vector& z, bool count = true);

// Counts scalar activation evaluations performed by ODE blocks. Thread-local;
// used by tests to pin the m+o evaluation guarantee of reduced models.
namespace activation_counter {
void reset();
std::uint64_t count();
}  // namespace activation_counter

}  // namespace odec

#endif
