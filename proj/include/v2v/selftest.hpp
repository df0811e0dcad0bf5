#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace v2v {

// Deliberate faults, used to show the checks can fail.
struct SelftestFaults {
  double gradient_perturbation = 0.0;  // added to one weight gradient
  double noise_offset_db = 0.0;        // applied to the noise power seen by the simulator
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelftestReport {
  std::vector<CheckResult> checks;
  bool all_passed() const;
};

CheckResult check_gradients(const SelftestFaults& faults = {});
CheckResult check_tabular_oracle();
CheckResult check_sinr_equivalence(const SelftestFaults& faults = {});
CheckResult check_replay_fifo();
CheckResult check_determinism();

SelftestReport run_selftest(const SelftestFaults& faults = {});
void print_report(std::ostream& out, const SelftestReport& report);

}  // namespace v2v
