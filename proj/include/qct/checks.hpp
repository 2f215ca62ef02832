#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace qct {

/// One named audit check with pass/fail and a capped list of witnesses.
struct CheckResult {
  std::string name;
  bool pass = true;
  std::uint64_t violation_count = 0;
  std::vector<std::string> witnesses;  // first few offending instances

  CheckResult() = default;
  explicit CheckResult(std::string check_name) : name(std::move(check_name)) {}

  static constexpr std::size_t kMaxWitnesses = 16;

  void fail(std::string witness) {
    pass = false;
    ++violation_count;
    if (witnesses.size() < kMaxWitnesses) witnesses.push_back(std::move(witness));
  }
};

inline const CheckResult* find_check(const std::vector<CheckResult>& checks,
                                     std::string_view name) {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

inline bool all_checks_pass(const std::vector<CheckResult>& checks) {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

}  // namespace qct
