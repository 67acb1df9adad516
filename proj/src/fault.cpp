#include "osclab/fault.hpp"

#include <atomic>
#include <stdexcept>

namespace osclab {
namespace {
std::atomic<Fault> g_fault{Fault::none};
}

Fault active_fault() noexcept { return g_fault.load(std::memory_order_relaxed); }

void set_active_fault(Fault fault) noexcept {
  g_fault.store(fault, std::memory_order_relaxed);
}

Fault parse_fault(std::string_view name) {
  if (name.empty() || name == "none") return Fault::none;
  if (name == "c_d_prime") return Fault::c_d_prime;
  if (name == "weight_exponent") return Fault::weight_exponent;
  if (name == "local_constant") return Fault::local_constant;
  throw std::invalid_argument("unknown fault '" + std::string(name) +
                              "' (expected none, c_d_prime, weight_exponent, "
                              "local_constant)");
}

std::string to_string(Fault fault) {
  switch (fault) {
    case Fault::none: return "none";
    case Fault::c_d_prime: return "c_d_prime";
    case Fault::weight_exponent: return "weight_exponent";
    case Fault::local_constant: return "local_constant";
  }
  return "none";
}

}  // namespace osclab
