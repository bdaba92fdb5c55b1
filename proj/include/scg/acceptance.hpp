#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace scg {

struct CriterionResult {
    std::string id;
    bool pass = false;
    std::string summary;               // one line with the decisive measurement
    std::vector<std::string> details;  // per-point measurements
};

struct Criterion {
    std::string_view id;
    std::string_view title;
    CriterionResult (*run)();
};

// A1..A8 in order.
std::span<const Criterion> acceptance_criteria();
// Throws ConfigError for an unknown id.
CriterionResult run_criterion(std::string_view id);

CriterionResult run_a1();  // end-to-end Helmholtz against the resolvent
CriterionResult run_a2();  // resolvent = u0 + u1
CriterionResult run_a3();  // O(h^inf) decay of u1 and the boundary part
CriterionResult run_a4();  // model operator residual
CriterionResult run_a5();  // Hamilton-Jacobi and criticality identities
CriterionResult run_a6();  // refocusing and the Maslov factor
CriterionResult run_a7();  // stationary phase and Bessel quadrature
CriterionResult run_a8();  // cutoff robustness

// Least-squares slope of log(value) against log(h).
double log_slope(std::span<const double> hs, std::span<const double> values);

}  // namespace scg
