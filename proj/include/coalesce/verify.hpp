#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace coalesce {

struct CriterionResult {
    int id = 0;
    std::string name;
    std::string suite; ///< oracle | quadrature | montecarlo
    bool passed = false;
    std::string detail; ///< measured vs expected values
    double seconds = 0.0;
};

struct Criterion {
    int id;
    std::string name;
    std::string suite;
    std::function<CriterionResult()> run;
};

/// The acceptance criteria, in order.
const std::vector<Criterion>& acceptance_criteria();

/// Runs a suite ("all" or a suite tag), printing one pass/fail line per
/// criterion. Returns the results.
std::vector<CriterionResult> run_acceptance(const std::string& suite, std::ostream& out);

} // namespace coalesce
