#include "atvkit/oracle.hpp"

#include <map>
#include <utility>

namespace atvkit::oracle {

Rat rat_from_double(double v) {
  // mpq_class(double) is the exact binary expansion of v.
  return mpq_class(v);
}

double rat_to_double(const Rat& r) { return r.get_d(); }

namespace {

// Gaussian elimination over the rationals: keeps a maximal independent set
// of rows and rejects inconsistent systems. The reduced rows are kept in
// reduced row echelon form (unit pivot, zeros at every other pivot column)
// so that membership of a new row is a single elimination pass.
void drop_dependent_rows(LinearProgram& lp) {
  const int n = lp.num_vars;
  std::vector<std::vector<Rat>> reduced;  // width n + 1, rhs appended
  std::vector<int> pivot_cols;
  std::vector<std::vector<Rat>> kept_rows;
  std::vector<Rat> kept_rhs;
  for (size_t r = 0; r < lp.rows.size(); ++r) {
    std::vector<Rat> row = lp.rows[r];
    row.push_back(lp.rhs[r]);
    for (size_t k = 0; k < reduced.size(); ++k) {
      Rat factor = row[static_cast<size_t>(pivot_cols[k])];
      if (sgn(factor) == 0) continue;
      for (int j = 0; j <= n; ++j) {
        if (sgn(reduced[k][static_cast<size_t>(j)]) != 0) {
          row[static_cast<size_t>(j)] -= factor * reduced[k][static_cast<size_t>(j)];
        }
      }
    }
    int pivot = -1;
    for (int j = 0; j < n; ++j) {
      if (sgn(row[static_cast<size_t>(j)]) != 0) {
        pivot = j;
        break;
      }
    }
    if (pivot < 0) {
      if (sgn(row[static_cast<size_t>(n)]) != 0) {
        throw Error("oracle LP is inconsistent");
      }
      continue;  // dependent row
    }
    Rat lead = row[static_cast<size_t>(pivot)];
    for (int j = 0; j <= n; ++j) row[static_cast<size_t>(j)] /= lead;
    for (size_t k = 0; k < reduced.size(); ++k) {
      Rat factor = reduced[k][static_cast<size_t>(pivot)];
      if (sgn(factor) == 0) continue;
      for (int j = 0; j <= n; ++j) {
        if (sgn(row[static_cast<size_t>(j)]) != 0) {
          reduced[k][static_cast<size_t>(j)] -= factor * row[static_cast<size_t>(j)];
        }
      }
    }
    reduced.push_back(std::move(row));
    pivot_cols.push_back(pivot);
    kept_rows.push_back(lp.rows[r]);
    kept_rhs.push_back(lp.rhs[r]);
  }
  lp.rows = std::move(kept_rows);
  lp.rhs = std::move(kept_rhs);
}

// Dense rational simplex tableau with Bland's pivot rule.
class RationalSimplex {
 public:
  explicit RationalSimplex(const LinearProgram& lp)
      : n_(lp.num_vars), m_(static_cast<int>(lp.rows.size())), objective_(lp.objective) {
    tableau_.assign(static_cast<size_t>(m_),
                    std::vector<Rat>(static_cast<size_t>(n_ + m_ + 1), Rat(0)));
    basis_.resize(static_cast<size_t>(m_));
    for (int r = 0; r < m_; ++r) {
      bool negate = sgn(lp.rhs[static_cast<size_t>(r)]) < 0;
      for (int j = 0; j < n_; ++j) {
        Rat v = lp.rows[static_cast<size_t>(r)][static_cast<size_t>(j)];
        tableau_[static_cast<size_t>(r)][static_cast<size_t>(j)] = negate ? Rat(-v) : v;
      }
      Rat b = lp.rhs[static_cast<size_t>(r)];
      tableau_[static_cast<size_t>(r)][static_cast<size_t>(n_ + m_)] = negate ? Rat(-b) : b;
      tableau_[static_cast<size_t>(r)][static_cast<size_t>(n_ + r)] = Rat(1);
      basis_[static_cast<size_t>(r)] = n_ + r;
    }
  }

  Rat solve() {
    // Phase I: drive the artificial variables to zero.
    std::vector<Rat> phase1(static_cast<size_t>(n_ + m_), Rat(0));
    for (int j = n_; j < n_ + m_; ++j) phase1[static_cast<size_t>(j)] = Rat(1);
    run(phase1, /*allow_artificial=*/true);
    if (sgn(objective_value(phase1)) != 0) {
      throw Error("oracle LP is infeasible");
    }
    // Pivot remaining artificial variables out of the basis. Rows are
    // independent after the elimination pass, so a pivot always exists.
    for (int r = 0; r < m_; ++r) {
      if (basis_[static_cast<size_t>(r)] < n_) continue;
      int col = -1;
      for (int j = 0; j < n_; ++j) {
        if (sgn(tableau_[static_cast<size_t>(r)][static_cast<size_t>(j)]) != 0) {
          col = j;
          break;
        }
      }
      if (col < 0) throw Error("oracle LP has a dependent row after phase one");
      pivot(r, col);
    }
    // Phase II.
    std::vector<Rat> phase2(static_cast<size_t>(n_ + m_), Rat(0));
    for (int j = 0; j < n_; ++j) phase2[static_cast<size_t>(j)] = objective_[static_cast<size_t>(j)];
    run(phase2, /*allow_artificial=*/false);
    return objective_value(phase2);
  }

 private:
  Rat objective_value(const std::vector<Rat>& cost) const {
    Rat v(0);
    for (int r = 0; r < m_; ++r) {
      v += cost[static_cast<size_t>(basis_[static_cast<size_t>(r)])] *
           tableau_[static_cast<size_t>(r)][static_cast<size_t>(n_ + m_)];
    }
    return v;
  }

  Rat reduced_cost(const std::vector<Rat>& cost, int j) const {
    Rat rc = cost[static_cast<size_t>(j)];
    for (int r = 0; r < m_; ++r) {
      const Rat& coef = tableau_[static_cast<size_t>(r)][static_cast<size_t>(j)];
      if (sgn(coef) != 0) {
        rc -= cost[static_cast<size_t>(basis_[static_cast<size_t>(r)])] * coef;
      }
    }
    return rc;
  }

  void run(const std::vector<Rat>& cost, bool allow_artificial) {
    const int limit = allow_artificial ? n_ + m_ : n_;
    while (true) {
      // Bland: lowest-index column with negative reduced cost.
      int enter = -1;
      for (int j = 0; j < limit; ++j) {
        if (sgn(reduced_cost(cost, j)) < 0) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return;
      int leave = -1;
      Rat best_ratio(0);
      for (int r = 0; r < m_; ++r) {
        const Rat& coef = tableau_[static_cast<size_t>(r)][static_cast<size_t>(enter)];
        if (sgn(coef) <= 0) continue;
        Rat ratio = tableau_[static_cast<size_t>(r)][static_cast<size_t>(n_ + m_)] / coef;
        if (leave < 0 || ratio < best_ratio ||
            (ratio == best_ratio &&
             basis_[static_cast<size_t>(r)] < basis_[static_cast<size_t>(leave)])) {
          leave = r;
          best_ratio = ratio;
        }
      }
      if (leave < 0) throw Error("oracle LP is unbounded");
      pivot(leave, enter);
    }
  }

  void pivot(int row, int col) {
    std::vector<Rat>& prow = tableau_[static_cast<size_t>(row)];
    Rat lead = prow[static_cast<size_t>(col)];
    for (Rat& v : prow) v /= lead;
    for (int r = 0; r < m_; ++r) {
      if (r == row) continue;
      Rat factor = tableau_[static_cast<size_t>(r)][static_cast<size_t>(col)];
      if (sgn(factor) == 0) continue;
      std::vector<Rat>& target = tableau_[static_cast<size_t>(r)];
      for (int j = 0; j < n_ + m_ + 1; ++j) {
        if (sgn(prow[static_cast<size_t>(j)]) != 0) {
          target[static_cast<size_t>(j)] -= factor * prow[static_cast<size_t>(j)];
        }
      }
    }
    basis_[static_cast<size_t>(row)] = col;
  }

  int n_;
  int m_;
  std::vector<Rat> objective_;
  std::vector<std::vector<Rat>> tableau_;
  std::vector<int> basis_;
};

// A law re-expressed in exact arithmetic: kernel rows normalized to exact
// probability vectors, path masses as exact products.
struct RationalLaw {
  std::vector<Path> paths;                 // supported full paths, sorted
  std::map<Path, Rat> path_mass;
  std::map<Path, std::vector<Rat>> kernels;

  explicit RationalLaw(const ProcessLaw& law) {
    for (const auto& [prefix, row] : law.kernels()) {
      Rat total(0);
      std::vector<Rat> exact(row.size(), Rat(0));
      for (size_t a = 0; a < row.size(); ++a) {
        if (row[a] > 0.0) {
          exact[a] = rat_from_double(row[a]);
          total += exact[a];
        }
      }
      for (Rat& v : exact) v /= total;
      kernels.emplace(prefix, std::move(exact));
    }
    Path prefix;
    auto walk = [&](auto&& self, Rat mass) -> void {
      if (static_cast<int>(prefix.size()) == law.horizon()) {
        paths.push_back(prefix);
        path_mass.emplace(prefix, mass);
        return;
      }
      const std::vector<Rat>& row = kernels.at(prefix);
      for (int a = 0; a < static_cast<int>(row.size()); ++a) {
        if (sgn(row[static_cast<size_t>(a)]) <= 0) continue;
        prefix.push_back(a);
        self(self, mass * row[static_cast<size_t>(a)]);
        prefix.pop_back();
      }
    };
    walk(walk, Rat(1));
  }
};

}  // namespace

Rat solve_min(const LinearProgram& lp) {
  if (lp.num_vars > kMaxVariables) {
    throw TooLarge("oracle LP exceeds the variable cap");
  }
  LinearProgram reduced = lp;
  drop_dependent_rows(reduced);
  RationalSimplex simplex(reduced);
  return simplex.solve();
}

Rat classical_ot_lp(const TransportProblem& problem) {
  problem.validate();
  const int m = problem.rows;
  const int n = problem.cols;
  if (m * n > kMaxVariables) {
    throw TooLarge("classical oracle cap is " + std::to_string(kMaxVariables) +
                   " variables");
  }
  std::vector<Rat> source(static_cast<size_t>(m)), target(static_cast<size_t>(n));
  Rat sa(0), sb(0);
  for (int i = 0; i < m; ++i) {
    source[static_cast<size_t>(i)] = rat_from_double(problem.source[static_cast<size_t>(i)]);
    sa += source[static_cast<size_t>(i)];
  }
  for (int j = 0; j < n; ++j) {
    target[static_cast<size_t>(j)] = rat_from_double(problem.target[static_cast<size_t>(j)]);
    sb += target[static_cast<size_t>(j)];
  }
  for (Rat& v : source) v /= sa;
  for (Rat& v : target) v /= sb;

  LinearProgram lp;
  lp.num_vars = m * n;
  lp.objective.resize(static_cast<size_t>(m * n));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      lp.objective[static_cast<size_t>(i * n + j)] = rat_from_double(problem.cost_at(i, j));
    }
  }
  for (int i = 0; i < m; ++i) {
    std::vector<Rat> row(static_cast<size_t>(m * n), Rat(0));
    for (int j = 0; j < n; ++j) row[static_cast<size_t>(i * n + j)] = Rat(1);
    lp.rows.push_back(std::move(row));
    lp.rhs.push_back(source[static_cast<size_t>(i)]);
  }
  for (int j = 0; j < n; ++j) {
    std::vector<Rat> row(static_cast<size_t>(m * n), Rat(0));
    for (int i = 0; i < m; ++i) row[static_cast<size_t>(i * n + j)] = Rat(1);
    lp.rows.push_back(std::move(row));
    lp.rhs.push_back(target[static_cast<size_t>(j)]);
  }
  return solve_min(lp);
}

Rat bicausal_lp(const ProcessLaw& mu, const ProcessLaw& nu,
                const std::function<double(const Path&, const Path&)>& cost) {
  require_same_spaces(mu, nu);
  const int T = mu.horizon();
  RationalLaw rmu(mu), rnu(nu);
  const int m = static_cast<int>(rmu.paths.size());
  const int n = static_cast<int>(rnu.paths.size());
  if (m * n > kMaxVariables) {
    throw TooLarge("bicausal oracle cap is " + std::to_string(kMaxVariables) +
                   " path pairs");
  }

  LinearProgram lp;
  lp.num_vars = m * n;
  lp.objective.resize(static_cast<size_t>(m * n));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      lp.objective[static_cast<size_t>(i * n + j)] =
          rat_from_double(cost(rmu.paths[static_cast<size_t>(i)],
                               rnu.paths[static_cast<size_t>(j)]));
    }
  }

  // Marginal constraints.
  for (int i = 0; i < m; ++i) {
    std::vector<Rat> row(static_cast<size_t>(m * n), Rat(0));
    for (int j = 0; j < n; ++j) row[static_cast<size_t>(i * n + j)] = Rat(1);
    lp.rows.push_back(std::move(row));
    lp.rhs.push_back(rmu.path_mass.at(rmu.paths[static_cast<size_t>(i)]));
  }
  for (int j = 0; j < n; ++j) {
    std::vector<Rat> row(static_cast<size_t>(m * n), Rat(0));
    for (int i = 0; i < m; ++i) row[static_cast<size_t>(i * n + j)] = Rat(1);
    lp.rows.push_back(std::move(row));
    lp.rhs.push_back(rnu.path_mass.at(rnu.paths[static_cast<size_t>(j)]));
  }

  // Causality constraints, linearized: for every stage t, prefix pair (a, b)
  // and child atom c,
  //   sum_{x >= a.c, y >= b} pi(x, y)  =  mu^a(c) * sum_{x >= a, y >= b} pi(x, y)
  // and symmetrically with the roles of the two sides swapped.
  auto extends = [](const Path& path, const Path& prefix) {
    for (size_t k = 0; k < prefix.size(); ++k) {
      if (path[k] != prefix[k]) return false;
    }
    return true;
  };
  for (int t = 1; t < T; ++t) {
    std::vector<Path> mu_prefixes = mu.supported_prefixes(t);
    std::vector<Path> nu_prefixes = nu.supported_prefixes(t);
    for (const Path& a : mu_prefixes) {
      const std::vector<Rat>& mu_row = rmu.kernels.at(a);
      for (const Path& b : nu_prefixes) {
        // X side: child distribution of x given (a, b) is mu^a.
        for (int c = 0; c < static_cast<int>(mu_row.size()); ++c) {
          if (sgn(mu_row[static_cast<size_t>(c)]) <= 0) continue;
          Path ac = a;
          ac.push_back(c);
          std::vector<Rat> row(static_cast<size_t>(m * n), Rat(0));
          bool nonzero = false;
          for (int i = 0; i < m; ++i) {
            const Path& x = rmu.paths[static_cast<size_t>(i)];
            if (!extends(x, a)) continue;
            for (int j = 0; j < n; ++j) {
              if (!extends(rnu.paths[static_cast<size_t>(j)], b)) continue;
              Rat coef = extends(x, ac) ? Rat(1) - mu_row[static_cast<size_t>(c)]
                                        : Rat(-mu_row[static_cast<size_t>(c)]);
              row[static_cast<size_t>(i * n + j)] = coef;
              nonzero = true;
            }
          }
          if (nonzero) {
            lp.rows.push_back(std::move(row));
            lp.rhs.push_back(Rat(0));
          }
        }
        // Y side.
        const std::vector<Rat>& nu_row = rnu.kernels.at(b);
        for (int c = 0; c < static_cast<int>(nu_row.size()); ++c) {
          if (sgn(nu_row[static_cast<size_t>(c)]) <= 0) continue;
          Path bc = b;
          bc.push_back(c);
          std::vector<Rat> row(static_cast<size_t>(m * n), Rat(0));
          bool nonzero = false;
          for (int j = 0; j < n; ++j) {
            const Path& y = rnu.paths[static_cast<size_t>(j)];
            if (!extends(y, b)) continue;
            for (int i = 0; i < m; ++i) {
              if (!extends(rmu.paths[static_cast<size_t>(i)], a)) continue;
              Rat coef = extends(y, bc) ? Rat(1) - nu_row[static_cast<size_t>(c)]
                                        : Rat(-nu_row[static_cast<size_t>(c)]);
              row[static_cast<size_t>(i * n + j)] = coef;
              nonzero = true;
            }
          }
          if (nonzero) {
            lp.rows.push_back(std::move(row));
            lp.rhs.push_back(Rat(0));
          }
        }
      }
    }
  }
  return solve_min(lp);
}

}  // namespace atvkit::oracle
