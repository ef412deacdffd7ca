#ifndef VIGRID_TESTS_FIXTURES_HPP
#define VIGRID_TESTS_FIXTURES_HPP

#include <random>
#include <vector>

#include "vigrid/grid.hpp"
#include "vigrid/supply.hpp"

namespace fixtures {

using vigrid::BusParams;
using vigrid::Line;
using vigrid::LtiSupply;
using vigrid::NetworkGraph;

inline NetworkGraph two_bus(double B = 1.0, std::vector<double> M0 = {1.0, 1.0},
                            std::vector<double> pL = {0.0, 0.0}) {
  return NetworkGraph({"1", "2"}, {{M0[0], 0.0, pL[0]}, {M0[1], 0.0, pL[1]}},
                      {{0, 1, B}});
}

inline NetworkGraph path3() {
  return NetworkGraph({"1", "2", "3"}, {{1, 0, 0}, {1, 0, 0}, {1, 0, 0}},
                      {{0, 1, 1.0}, {1, 2, 1.0}});
}

inline NetworkGraph triangle() {
  return NetworkGraph({"1", "2", "3"}, {{1, 0, 0}, {1, 0, 0}, {1, 0, 0}},
                      {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}});
}

// buses 1-2-3-4-1; the parameters behind the stability/oscillation
// experiments (slow governors, light damping, small physical inertia)
inline NetworkGraph ring4(std::vector<double> pL = {0, 0, 0, 0}) {
  return NetworkGraph(
      {"1", "2", "3", "4"},
      {{0.3, 0, pL[0]}, {0.24, 0, pL[1]}, {0.27, 0, pL[2]}, {0.21, 0, pL[3]}},
      {{0, 1, 8.0}, {1, 2, 8.0}, {2, 3, 8.0}, {3, 0, 8.0}});
}

inline std::vector<LtiSupply> ring4_supplies() {
  std::vector<LtiSupply> s;
  s.push_back(to_state_space(vigrid::FirstOrderSupply{3.0, 120.0, 0.5}));
  s.push_back(to_state_space(vigrid::FirstOrderSupply{2.7, 104.0, 0.5}));
  s.push_back(to_state_space(vigrid::FirstOrderSupply{3.3, 92.0, 0.5}));
  s.push_back(to_state_space(vigrid::FirstOrderSupply{2.55, 84.0, 0.5}));
  return s;
}

// second-order supply K wn^2 / (s^2 + 2 z wn s + wn^2) + lambda
inline LtiSupply second_order(double K, double wn, double zeta, double lambda) {
  Eigen::MatrixXd A(2, 2);
  A << 0.0, 1.0, -wn * wn, -2.0 * zeta * wn;
  Eigen::VectorXd B(2);
  B << 0.0, K * wn * wn;
  Eigen::RowVectorXd C(2);
  C << 1.0, 0.0;
  return LtiSupply(A, B, C, lambda);
}

// underdamped target bus + stiff passive neighbour; release-phase system is
// stable with a ~3.7x frequency overshoot from gamma-point starts
struct TwoBusUnderdamped {
  NetworkGraph graph = NetworkGraph({"1", "2"}, {{0.2, 0, 0}, {0.33, 0, 0}},
                                    {{0, 1, 4.0}});
  std::vector<LtiSupply> supplies = {
      second_order(0.3, 12.0, 0.2, 0.05),
      to_state_space(vigrid::FirstOrderSupply{0.1, 3.0, 1.2})};
};

inline NetworkGraph random_connected(std::mt19937_64& gen, std::size_t n,
                                     std::size_t extra_edges) {
  std::vector<std::string> ids;
  std::vector<BusParams> params;
  std::uniform_real_distribution<double> unif(0.5, 3.0);
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back(std::to_string(i + 1));
    params.push_back({unif(gen), 0.0, 0.0});
  }
  std::vector<Line> lines;
  std::vector<std::pair<std::size_t, std::size_t>> used;
  for (std::size_t i = 1; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    const std::size_t p = pick(gen);
    lines.push_back({p, i, unif(gen)});
    used.emplace_back(std::min(p, i), std::max(p, i));
  }
  std::size_t attempts = 0;
  while (extra_edges > 0 && attempts++ < 100) {
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::size_t a = pick(gen), b = pick(gen);
    if (a == b) continue;
    const std::pair<std::size_t, std::size_t> key = std::minmax(a, b);
    if (std::find(used.begin(), used.end(), key) != used.end()) continue;
    lines.push_back({key.first, key.second, unif(gen)});
    used.push_back(key);
    --extra_edges;
  }
  return NetworkGraph(ids, params, lines);
}

// random stable minimal 2-3 state system for the passivity oracle tests
inline LtiSupply random_stable_lti(std::mt19937_64& gen, int order) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::uniform_real_distribution<double> dpos(0.5, 3.0);
  for (;;) {
    Eigen::MatrixXd A(order, order);
    for (int r = 0; r < order; ++r)
      for (int c = 0; c < order; ++c) A(r, c) = 2.0 * unif(gen);
    const double shift = A.eigenvalues().real().maxCoeff();
    A -= (shift + 0.3 + 0.7 * std::abs(unif(gen))) *
         Eigen::MatrixXd::Identity(order, order);
    Eigen::VectorXd B(order);
    Eigen::RowVectorXd C(order);
    for (int i = 0; i < order; ++i) {
      B(i) = unif(gen);
      C(i) = unif(gen);
    }
    if (B.norm() < 0.1 || C.norm() < 0.1) continue;
    return LtiSupply(A, B, C, dpos(gen));
  }
}

}  // namespace fixtures

#endif
