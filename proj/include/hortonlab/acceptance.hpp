#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hortonlab/statistics.hpp"

namespace hortonlab {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    std::vector<Check> checks;
    std::vector<std::string> notes;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    std::uint64_t seed = 7;
    int workers = 1;
    double scale = 1.0;  // multiplies every sample size
    std::vector<int> only;
};

inline constexpr int kCriterionCount = 13;

CriterionResult run_criterion(int id, const AcceptanceOptions& options);
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options,
                                            const std::function<void(const CriterionResult&)>& on_done = {});

// "PASS  3  title  (details)"
std::string summary_line(const CriterionResult& r);
std::string check_line(const Check& c);

}  // namespace hortonlab
