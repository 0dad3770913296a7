#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace spqm {

/// \brief Parameters shared by the acceptance checks; defaults reproduce the reference run.
struct AcceptanceConfig {
    double kappa = 1.0;
    double t_final = 1.0;   ///< horizon of the moment, determinant and isometry checks
    double dt = 1e-3;       ///< step of the moment, determinant and Kraus-product checks
    int dim = 24;           ///< truncation of the Kraus-product and frame checks
    int paths = 20000;      ///< paths of the channel Monte Carlo
    std::uint64_t seed = 7;
};

/// \brief Outcome of one numbered check: measured deviations and the verdict.
struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

/// Number of numbered checks.
inline constexpr int kCriterionCount = 17;

/// \brief Run check `id` (1..kCriterionCount).
CriterionResult run_criterion(int id, const AcceptanceConfig& cfg);

/// \brief Run the listed checks (all when empty), reporting each as it finishes.
std::vector<CriterionResult> run_acceptance(const AcceptanceConfig& cfg, const std::vector<int>& ids = {},
                                            const std::function<void(const CriterionResult&)>& on_result = {});

/// Artifact version string recorded in output metadata.
inline constexpr const char* kVersion = "0.1.0";

}  // namespace spqm
