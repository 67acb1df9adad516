#pragma once

#include <string>
#include <string_view>

namespace osclab {

/// Deliberate corruption of one proved constant, used to show that the
/// verification suites are sensitive to it. Each fault scales its constant
/// by kFaultFactor.
enum class Fault {
  none,
  c_d_prime,        ///< slope constant of the local expansion
  weight_exponent,  ///< the p+1 in dr / r^{p+1}
  local_constant,   ///< the 3d/(d+2) remainder constant
};

inline constexpr double kFaultFactor = 1.05;

Fault active_fault() noexcept;
void set_active_fault(Fault fault) noexcept;

Fault parse_fault(std::string_view name);
std::string to_string(Fault fault);

/// Installs a fault for the lifetime of the guard. Not meant to be toggled
/// while computations are running on other threads.
class ScopedFault {
 public:
  explicit ScopedFault(Fault fault) : previous_(active_fault()) {
    set_active_fault(fault);
  }
  ~ScopedFault() { set_active_fault(previous_); }
  ScopedFault(const ScopedFault&) = delete;
  ScopedFault& operator=(const ScopedFault&) = delete;

 private:
  Fault previous_;
};

}  // namespace osclab
