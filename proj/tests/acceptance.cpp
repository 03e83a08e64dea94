// Acceptance gate: runs every criterion and prints one pass/fail line each.
#include <cstdio>
#include <iostream>
#include <string>

#include "coalesce/verify.hpp"

int main(int argc, char** argv) {
    std::string suite = argc > 1 ? argv[1] : "all";
    auto results = coalesce::run_acceptance(suite, std::cout);
    int failed = 0;
    for (const auto& r : results)
        if (!r.passed) ++failed;
    std::printf("%zu criteria run, %d failed\n", results.size(), failed);
    return failed == 0 ? 0 : 1;
}
