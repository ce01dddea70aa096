#include "mega/conflict.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace mega {

Eigen::MatrixXd observation_matrix(const Dataset& d) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(d.size()), kObsDim);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (int c = 0; c < kObsDim; ++c) m(r, c) = d[r].obs[c];
  return m;
}

Eigen::MatrixXd cosine_matrix(const Eigen::MatrixXd& O,
                              const Eigen::MatrixXd& O_j) {
  if (O.cols() != O_j.cols())
    throw std::invalid_argument("cosine_matrix: dimension mismatch");
  const Eigen::VectorXd na = O.rowwise().norm();
  const Eigen::VectorXd nb = O_j.rowwise().norm();
  if ((na.array() == 0.0).any() || (nb.array() == 0.0).any())
    throw std::invalid_argument("cosine_matrix: zero-norm observation row");
  Eigen::MatrixXd theta = O * O_j.transpose();
  theta.array().colwise() /= na.array();
  theta.array().rowwise() /= nb.transpose().array();
  return theta;
}

std::vector<double> evaluation_score(
    const std::vector<std::pair<double, double>>& sigma_v, double w_sigma,
    double w_speed) {
  if (sigma_v.empty())
    throw std::invalid_argument("evaluation_score: empty group");
  auto term = [&](auto get) {
    double lo = get(sigma_v.front()), hi = lo;
    for (const auto& m : sigma_v) {
      lo = std::min(lo, get(m));
      hi = std::max(hi, get(m));
    }
    std::vector<double> t(sigma_v.size());
    for (std::size_t i = 0; i < sigma_v.size(); ++i)
      t[i] = hi > lo ? (get(sigma_v[i]) - lo) / (hi - lo) : 0.5;
    return t;
  };
  const auto ts = term([](const auto& m) { return m.first; });
  const auto tv = term([](const auto& m) { return m.second; });
  std::vector<double> omega(sigma_v.size());
  for (std::size_t i = 0; i < sigma_v.size(); ++i)
    omega[i] = w_sigma * ts[i] + w_speed * tv[i];
  return omega;
}

namespace {

// group member: either a d_global record (in_global) or the anchor
struct Member {
  bool in_global;
  std::size_t idx;
};

bool earlier(const Demonstration& a, bool a_global, std::size_t ai,
             const Demonstration& b, bool b_global, std::size_t bi) {
  if (a.rollout_id != b.rollout_id) return a.rollout_id < b.rollout_id;
  if (a.step_index != b.step_index) return a.step_index < b.step_index;
  if (a_global != b_global) return a_global;  // d_global counts as earlier
  return ai < bi;
}

}  // namespace

ResolveStats resolve_conflicts(Dataset& d_new, Dataset& d_global, double eps,
                               double w_sigma, double w_speed) {
  ResolveStats stats;
  if (d_new.empty()) return stats;

  Eigen::MatrixXd theta;
  if (!d_global.empty())
    theta = cosine_matrix(observation_matrix(d_global),
                          observation_matrix(d_new));

  // anchors in ascending step_index order
  std::vector<std::size_t> order(d_new.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return d_new[a].step_index < d_new[b].step_index;
  });

  // first pass: build groups and winners on the immutable (sigma, v) data
  struct Group {
    std::vector<Member> members;
    Member winner{false, 0};
  };
  std::vector<Group> groups;
  groups.reserve(order.size());
  for (const std::size_t a : order) {
    Group g;
    g.members.push_back({false, a});
    for (std::size_t e = 0; e < d_global.size(); ++e)
      if (theta(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(a)) > eps)
        g.members.push_back({true, e});

    std::vector<std::pair<double, double>> sv;
    sv.reserve(g.members.size());
    for (const auto& m : g.members) {
      const Demonstration& d = m.in_global ? d_global[m.idx] : d_new[m.idx];
      sv.emplace_back(d.sigma, d.v);
    }
    const auto omega = evaluation_score(sv, w_sigma, w_speed);
    std::size_t best = 0;
    for (std::size_t i = 1; i < g.members.size(); ++i) {
      const auto& mi = g.members[i];
      const auto& mb = g.members[best];
      const Demonstration& di = mi.in_global ? d_global[mi.idx] : d_new[mi.idx];
      const Demonstration& db = mb.in_global ? d_global[mb.idx] : d_new[mb.idx];
      if (omega[i] > omega[best] ||
          (omega[i] == omega[best] &&
           earlier(di, mi.in_global, mi.idx, db, mb.in_global, mb.idx)))
        best = i;
    }
    g.winner = g.members[best];
    if (g.members.size() > 1) ++stats.groups_with_matches;
    groups.push_back(std::move(g));
  }

  // winners of any group keep their own labels
  std::vector<std::uint8_t> win_new(d_new.size(), 0),
      win_glob(d_global.size(), 0);
  for (const auto& g : groups)
    (g.winner.in_global ? win_glob[g.winner.idx] : win_new[g.winner.idx]) = 1;

  // Records can sit in several groups; the last group processed decides
  // their final label. Resolve that to one assignment per record so a
  // second pass over already-resolved data replaces nothing.
  auto action_of = [&](const Member& m) {
    return m.in_global ? d_global[m.idx].action : d_new[m.idx].action;
  };
  std::vector<Action> final_new, final_glob;
  final_new.reserve(d_new.size());
  final_glob.reserve(d_global.size());
  for (const auto& d : d_new) final_new.push_back(d.action);
  for (const auto& d : d_global) final_glob.push_back(d.action);
  for (const auto& g : groups) {
    const Action wa = action_of(g.winner);  // winners keep their own labels
    for (const auto& m : g.members) {
      if (m.in_global ? win_glob[m.idx] : win_new[m.idx]) continue;
      (m.in_global ? final_glob[m.idx] : final_new[m.idx]) = wa;
    }
  }
  auto apply = [&](Demonstration& d, const Action& a) {
    if (d.action.steering != a.steering || d.action.speed != a.speed) {
      d.action = a;
      ++stats.labels_replaced;
    }
  };
  for (std::size_t k = 0; k < d_new.size(); ++k) apply(d_new[k], final_new[k]);
  for (std::size_t k = 0; k < d_global.size(); ++k)
    apply(d_global[k], final_glob[k]);
  return stats;
}

}  // namespace mega
