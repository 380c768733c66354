#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kscore/kernel_model.hpp"

namespace kscore {

/// A kernel model with random centers and random per-center SPD precisions
/// (table provider, raw parameters drawn from seeded streams).
KernelModel random_model(int d, int n_centers, std::uint64_t seed, double beta = 1.0,
                         double horizon = 1.0);

/// A snapshot whose precisions do NOT follow the heat-flow evolution
/// (Gamma_s = Gamma / (1 + s)); negative control for the HJB property.
KernelModel::Evolved corrupted_evolved(const KernelModel& model, double s);

/// HJB residual computed against an arbitrary family of snapshots
/// s -> Evolved (central FD in t, closed-form spatial terms).
double hjb_residual_of_family(
    const KernelModel& model,
    const std::function<KernelModel::Evolved(double)>& family,
    const Eigen::VectorXd& x, double t, double fd_step);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Built-in verification suites: "hjb" (closed-form solution solves the HJB,
/// plus corrupted-evolution negative control), "gradcheck" (tape vs finite
/// differences), "equiv" (lifted network == kernel score), "heat"
/// (1D quadrature heat-closure), or "all".
/// Throws std::invalid_argument for unknown suite names.
std::vector<CheckResult> run_check_suite(const std::string& suite, std::uint64_t seed);

}  // namespace kscore
