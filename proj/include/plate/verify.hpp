#pragma once

// Built-in property suites behind `plate verify --case <name>`.

#include <string>
#include <vector>

namespace plate {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Case names accepted by run_verify.
const std::vector<std::string>& verify_cases();

/// Runs one suite. Throws InvalidArgument for an unknown case.
std::vector<CheckResult> run_verify(const std::string& name);

}  // namespace plate
