#include "atvkit/ot_core.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

#include "atvkit/tolerances.hpp"

namespace atvkit {

namespace {

constexpr double kPerturb = 1e-11;    // anti-degeneracy marginal shift
constexpr double kEnterTol = 1e-11;   // reduced cost considered negative
constexpr double kCertTol = 1e-9;     // dual certificate slack

struct Arc {
  int i;
  int j;
  double x;
};

// Dense transportation simplex over a spanning-tree basis.
class TransportSimplex {
 public:
  explicit TransportSimplex(const TransportProblem& p)
      : m_(p.rows), n_(p.cols), cost_(p.cost), a_(p.source), b_(p.target) {
    // Rescale the target so both sides match exactly up to float addition,
    // then perturb against degenerate bases.
    double sa = 0.0, sb = 0.0;
    for (double v : a_) sa += v;
    for (double v : b_) sb += v;
    double scale = sa / sb;
    for (double& v : b_) v *= scale;
    for (double& v : a_) v += kPerturb;
    b_.back() += kPerturb * static_cast<double>(m_);
  }

  TransportPlan solve(const std::vector<double>& source,
                      const std::vector<double>& target) {
    northwest_corner();
    const long max_pivots = 40L * (m_ + n_) * (m_ + n_) + 10000L;
    for (long iter = 0; iter < max_pivots; ++iter) {
      compute_duals();
      auto [ei, ej] = entering_arc();
      if (ei < 0) {
        reallocate(source, target);
        compute_duals();
        return extract(source, target);
      }
      pivot(ei, ej);
    }
    throw Error("transport simplex exceeded its pivot limit");
  }

 private:
  double cost_at(int i, int j) const {
    return cost_[static_cast<size_t>(i) * n_ + j];
  }

  void northwest_corner() {
    basis_.clear();
    basis_.reserve(static_cast<size_t>(m_ + n_ - 1));
    std::vector<double> a = a_, b = b_;
    int i = 0, j = 0;
    while (true) {
      double x = std::min(a[static_cast<size_t>(i)], b[static_cast<size_t>(j)]);
      basis_.push_back(Arc{i, j, x});
      a[static_cast<size_t>(i)] -= x;
      b[static_cast<size_t>(j)] -= x;
      if (i == m_ - 1 && j == n_ - 1) break;
      if (i == m_ - 1) {
        ++j;
      } else if (j == n_ - 1) {
        ++i;
      } else if (a[static_cast<size_t>(i)] <= b[static_cast<size_t>(j)]) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  void build_adjacency() {
    adj_.assign(static_cast<size_t>(m_ + n_), {});
    for (int k = 0; k < static_cast<int>(basis_.size()); ++k) {
      adj_[static_cast<size_t>(basis_[static_cast<size_t>(k)].i)].push_back(k);
      adj_[static_cast<size_t>(m_ + basis_[static_cast<size_t>(k)].j)].push_back(k);
    }
  }

  void compute_duals() {
    build_adjacency();
    u_.assign(static_cast<size_t>(m_), 0.0);
    v_.assign(static_cast<size_t>(n_), 0.0);
    std::vector<char> seen(static_cast<size_t>(m_ + n_), 0);
    std::queue<int> queue;
    queue.push(0);
    seen[0] = 1;
    int visited = 1;
    while (!queue.empty()) {
      int node = queue.front();
      queue.pop();
      for (int k : adj_[static_cast<size_t>(node)]) {
        const Arc& arc = basis_[static_cast<size_t>(k)];
        int other = node < m_ ? m_ + arc.j : arc.i;
        if (seen[static_cast<size_t>(other)]) continue;
        if (node < m_) {
          v_[static_cast<size_t>(arc.j)] = cost_at(arc.i, arc.j) - u_[static_cast<size_t>(arc.i)];
        } else {
          u_[static_cast<size_t>(arc.i)] = cost_at(arc.i, arc.j) - v_[static_cast<size_t>(arc.j)];
        }
        seen[static_cast<size_t>(other)] = 1;
        ++visited;
        queue.push(other);
      }
    }
    if (visited != m_ + n_) {
      throw Error("transport basis lost connectivity");
    }
  }

  // Bland's rule: first cell in row-major order with negative reduced cost.
  std::pair<int, int> entering_arc() const {
    for (int i = 0; i < m_; ++i) {
      for (int j = 0; j < n_; ++j) {
        double rc = cost_at(i, j) - u_[static_cast<size_t>(i)] - v_[static_cast<size_t>(j)];
        if (rc < -kEnterTol) return {i, j};
      }
    }
    return {-1, -1};
  }

  void pivot(int ei, int ej) {
    // Unique tree path from row node ei to column node m_+ej.
    std::vector<int> parent_arc(static_cast<size_t>(m_ + n_), -1);
    std::vector<int> parent_node(static_cast<size_t>(m_ + n_), -1);
    std::vector<char> seen(static_cast<size_t>(m_ + n_), 0);
    std::queue<int> queue;
    queue.push(ei);
    seen[static_cast<size_t>(ei)] = 1;
    const int target = m_ + ej;
    while (!queue.empty() && !seen[static_cast<size_t>(target)]) {
      int node = queue.front();
      queue.pop();
      for (int k : adj_[static_cast<size_t>(node)]) {
        const Arc& arc = basis_[static_cast<size_t>(k)];
        int other = node < m_ ? m_ + arc.j : arc.i;
        if (seen[static_cast<size_t>(other)]) continue;
        seen[static_cast<size_t>(other)] = 1;
        parent_arc[static_cast<size_t>(other)] = k;
        parent_node[static_cast<size_t>(other)] = node;
        queue.push(other);
      }
    }
    if (!seen[static_cast<size_t>(target)]) {
      throw Error("transport basis lost connectivity during pivot");
    }
    // Walk back from the column node, alternating signs; the arc that
    // touches the column endpoint of the entering cell gets a minus.
    std::vector<std::pair<int, int>> cycle;  // (arc index, sign)
    int node = target;
    int sign = -1;
    while (node != ei) {
      int k = parent_arc[static_cast<size_t>(node)];
      cycle.emplace_back(k, sign);
      sign = -sign;
      node = parent_node[static_cast<size_t>(node)];
    }
    double theta = -1.0;
    for (const auto& [k, s] : cycle) {
      if (s < 0) {
        double x = basis_[static_cast<size_t>(k)].x;
        if (theta < 0.0 || x < theta) theta = x;
      }
    }
    // Leaving arc: lowest cell index among the minus arcs attaining theta.
    int leave = -1;
    long leave_index = 0;
    for (const auto& [k, s] : cycle) {
      if (s < 0 && basis_[static_cast<size_t>(k)].x <= theta) {
        long index = static_cast<long>(basis_[static_cast<size_t>(k)].i) * n_ +
                     basis_[static_cast<size_t>(k)].j;
        if (leave < 0 || index < leave_index) {
          leave = k;
          leave_index = index;
        }
      }
    }
    for (const auto& [k, s] : cycle) {
      basis_[static_cast<size_t>(k)].x += s * theta;
    }
    basis_[static_cast<size_t>(leave)] = Arc{ei, ej, theta};
  }

  // Solve the tree system for the unperturbed marginals by leaf elimination.
  void reallocate(const std::vector<double>& source,
                  const std::vector<double>& target) {
    build_adjacency();
    std::vector<double> residual(static_cast<size_t>(m_ + n_), 0.0);
    for (int i = 0; i < m_; ++i) residual[static_cast<size_t>(i)] = source[static_cast<size_t>(i)];
    double sa = 0.0, sb = 0.0;
    for (double x : source) sa += x;
    for (double x : target) sb += x;
    double scale = sa / sb;
    for (int j = 0; j < n_; ++j) {
      residual[static_cast<size_t>(m_ + j)] = target[static_cast<size_t>(j)] * scale;
    }
    std::vector<int> degree(static_cast<size_t>(m_ + n_), 0);
    std::vector<char> arc_done(basis_.size(), 0);
    for (const Arc& arc : basis_) {
      ++degree[static_cast<size_t>(arc.i)];
      ++degree[static_cast<size_t>(m_ + arc.j)];
    }
    std::queue<int> leaves;
    for (int node = 0; node < m_ + n_; ++node) {
      if (degree[static_cast<size_t>(node)] == 1) leaves.push(node);
    }
    size_t processed = 0;
    while (!leaves.empty() && processed + 1 < basis_.size()) {
      int node = leaves.front();
      leaves.pop();
      if (degree[static_cast<size_t>(node)] != 1) continue;
      int arc_id = -1;
      for (int k : adj_[static_cast<size_t>(node)]) {
        if (!arc_done[static_cast<size_t>(k)]) {
          arc_id = k;
          break;
        }
      }
      Arc& arc = basis_[static_cast<size_t>(arc_id)];
      double x = residual[static_cast<size_t>(node)];
      arc.x = std::max(0.0, x);
      int other = node < m_ ? m_ + arc.j : arc.i;
      residual[static_cast<size_t>(other)] -= x;
      residual[static_cast<size_t>(node)] = 0.0;
      arc_done[static_cast<size_t>(arc_id)] = 1;
      ++processed;
      --degree[static_cast<size_t>(node)];
      --degree[static_cast<size_t>(other)];
      if (degree[static_cast<size_t>(other)] == 1) leaves.push(other);
    }
    for (size_t k = 0; k < basis_.size(); ++k) {
      if (!arc_done[k]) {
        Arc& arc = basis_[k];
        arc.x = std::max(0.0, residual[static_cast<size_t>(arc.i)]);
      }
    }
  }

  TransportPlan extract(const std::vector<double>& source,
                        const std::vector<double>& target) const {
    TransportPlan plan;
    plan.rows = m_;
    plan.cols = n_;
    plan.plan.assign(static_cast<size_t>(m_) * n_, 0.0);
    plan.row_duals = u_;
    plan.col_duals = v_;
    double value = 0.0;
    for (const Arc& arc : basis_) {
      plan.plan[static_cast<size_t>(arc.i) * n_ + arc.j] += arc.x;
      value += cost_at(arc.i, arc.j) * arc.x;
    }
    plan.value = value;
    certify(plan, source, target);
    return plan;
  }

  void certify(const TransportPlan& plan, const std::vector<double>& source,
               const std::vector<double>& target) const {
    for (int i = 0; i < m_; ++i) {
      double row = 0.0;
      for (int j = 0; j < n_; ++j) row += plan.plan_at(i, j);
      if (std::abs(row - source[static_cast<size_t>(i)]) > tol::kMarginal) {
        throw Error("transport plan violates a row marginal");
      }
    }
    for (int j = 0; j < n_; ++j) {
      double col = 0.0;
      for (int i = 0; i < m_; ++i) col += plan.plan_at(i, j);
      if (std::abs(col - target[static_cast<size_t>(j)]) > tol::kMarginal) {
        throw Error("transport plan violates a column marginal");
      }
    }
    for (int i = 0; i < m_; ++i) {
      for (int j = 0; j < n_; ++j) {
        double rc = cost_at(i, j) - plan.row_duals[static_cast<size_t>(i)] -
                    plan.col_duals[static_cast<size_t>(j)];
        if (rc < -kCertTol) {
          throw Error("transport duals violate feasibility");
        }
        if (plan.plan_at(i, j) > 0.0 && std::abs(rc) > kCertTol) {
          throw Error("transport plan violates complementary slackness");
        }
      }
    }
  }

  int m_;
  int n_;
  const std::vector<double>& cost_;
  std::vector<double> a_;
  std::vector<double> b_;
  std::vector<Arc> basis_;
  std::vector<std::vector<int>> adj_;
  std::vector<double> u_;
  std::vector<double> v_;
};

}  // namespace

void TransportProblem::validate() const {
  if (rows < 1 || cols < 1) throw InvalidParameter("empty transport problem");
  if (static_cast<int>(source.size()) != rows ||
      static_cast<int>(target.size()) != cols ||
      static_cast<int>(cost.size()) != rows * cols) {
    throw InvalidParameter("transport problem dimensions are inconsistent");
  }
  for (double c : cost) {
    if (c < 0.0 || !std::isfinite(c)) {
      throw InvalidParameter("transport costs must be finite and nonnegative");
    }
  }
  double sa = 0.0, sb = 0.0;
  for (double x : source) {
    if (x < 0.0) throw MarginalMismatch("negative source mass");
    sa += x;
  }
  for (double x : target) {
    if (x < 0.0) throw MarginalMismatch("negative target mass");
    sb += x;
  }
  std::ostringstream msg;
  if (std::abs(sa - sb) > 1e-9) {
    msg << "marginal totals differ: " << sa << " vs " << sb;
    throw MarginalMismatch(msg.str());
  }
  if (std::abs(sa - 1.0) > 1e-9) {
    msg << "marginals must be probability vectors, total is " << sa;
    throw MarginalMismatch(msg.str());
  }
}

TransportPlan solve_transport(const TransportProblem& problem) {
  problem.validate();
  TransportSimplex simplex(problem);
  return simplex.solve(problem.source, problem.target);
}

double wasserstein(const ProcessLaw& mu, const ProcessLaw& nu,
                   const PathMetric& metric, double p) {
  require_same_spaces(mu, nu);
  if (p < 1.0) throw InvalidParameter("wasserstein order must satisfy p >= 1");
  PathMeasure pm = mu.path_measure();
  PathMeasure pn = nu.path_measure();
  TransportProblem problem;
  problem.rows = static_cast<int>(pm.atoms().size());
  problem.cols = static_cast<int>(pn.atoms().size());
  problem.source.reserve(static_cast<size_t>(problem.rows));
  problem.target.reserve(static_cast<size_t>(problem.cols));
  std::vector<const Path*> xs, ys;
  for (const auto& [path, mass] : pm.atoms()) {
    xs.push_back(&path);
    problem.source.push_back(mass);
  }
  for (const auto& [path, mass] : pn.atoms()) {
    ys.push_back(&path);
    problem.target.push_back(mass);
  }
  problem.cost.resize(static_cast<size_t>(problem.rows) * problem.cols);
  for (int i = 0; i < problem.rows; ++i) {
    for (int j = 0; j < problem.cols; ++j) {
      double d = metric.distance(*xs[static_cast<size_t>(i)], *ys[static_cast<size_t>(j)]);
      problem.cost[static_cast<size_t>(i) * problem.cols + j] =
          p == 1.0 ? d : std::pow(d, p);
    }
  }
  TransportPlan plan = solve_transport(problem);
  return p == 1.0 ? plan.value : std::pow(plan.value, 1.0 / p);
}

}  // namespace atvkit
