#pragma once

#include <Eigen/Core>
#include <vector>

#include "mega/dataset.hpp"

namespace mega {

// Theta[a][b] = <O[a], O_j[b]> / (|O[a]| * |O_j[b]|). Throws on a
// zero-norm row (cannot happen for LiDAR ranges, which are positive).
Eigen::MatrixXd cosine_matrix(const Eigen::MatrixXd& O,
                              const Eigen::MatrixXd& O_j);

// Per-member evaluation score: group-local min-max normalized safety score
// plus min-max normalized speed, optionally weighted. A term with
// max == min contributes 0.5 to every member.
std::vector<double> evaluation_score(
    const std::vector<std::pair<double, double>>& sigma_v,
    double w_sigma = 1.0, double w_speed = 1.0);

struct ResolveStats {
  std::size_t groups_with_matches = 0;
  std::size_t labels_replaced = 0;  // records whose action changed
};

// For each new demonstration d in d_new (ascending step_index), its group
// is {d} plus every record of d_global with cosine similarity > eps. The
// group winner (highest evaluation score; ties broken by earliest
// (rollout_id, step_index), d_global before d_new) donates its action
// label to the other group members. Records that win any group keep their
// own label, which makes the operation idempotent. Only action labels
// change; observations, sigma, and v are never touched.
ResolveStats resolve_conflicts(Dataset& d_new, Dataset& d_global, double eps,
                               double w_sigma = 1.0, double w_speed = 1.0);

Eigen::MatrixXd observation_matrix(const Dataset& d);

}  // namespace mega
