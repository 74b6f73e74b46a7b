#ifndef FMCF_VALIDATION_HPP
#define FMCF_VALIDATION_HPP

#include <string>
#include <vector>

namespace fmcf {

/// One checked quantity. `criterion` groups results for the acceptance table.
struct CheckResult {
  int criterion = 0;
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  /// "<=" or ">=": how measured is compared with tolerance.
  std::string relation = "<=";
  bool pass = false;
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  int resolution = 0;
  std::vector<CheckResult> checks;

  bool pass() const;
};

/// m1-identity, scaling, shrinking-circle, bc, identities.
const std::vector<std::string>& suite_names();
bool is_suite(const std::string& name);
int default_resolution(const std::string& suite);

/// Runs a suite; resolution 0 selects the suite default.
/// Throws std::invalid_argument for an unknown suite name.
SuiteReport run_suite(const std::string& suite, int resolution = 0);

/// Fixed-width table, one row per check, ending with an overall verdict.
std::string format_report(const SuiteReport& report);

}  // namespace fmcf

#endif  // FMCF_VALIDATION_HPP
