#ifndef EVCS_QP_HPP_
#define EVCS_QP_HPP_

#include <Eigen/Dense>

#include <limits>
#include <string>
#include <vector>

namespace evcs {

/// Convex quadratic program
///
///   minimize   0.5 x' Q x + c' x
///   subject to a_eq x == b_eq
///              a_in x <= b_in
///              lower <= x <= upper
///
/// Q must be symmetric positive semidefinite; validate() symmetrizes a
/// near-symmetric matrix and rejects one with an eigenvalue below a small
/// negative floor. Row and variable names are carried for diagnostics.
struct QuadraticProgram {
  Eigen::MatrixXd quad;  // Q
  Eigen::VectorXd lin;   // c
  Eigen::MatrixXd a_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd a_in;
  Eigen::VectorXd b_in;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::vector<std::string> var_names;
  std::vector<std::string> eq_names;
  std::vector<std::string> in_names;

  Eigen::Index num_vars() const { return lin.size(); }

  /// Dimension checks plus PSD test (symmetrization + eigenvalue floor).
  void validate() const;

  double objective(const Eigen::VectorXd& x) const {
    return 0.5 * x.dot(quad * x) + lin.dot(x);
  }

  int var_index(const std::string& name) const;
  int eq_index(const std::string& name) const;
  int in_index(const std::string& name) const;
};

enum class SolveStatus { optimal, max_iter, infeasible };

const char* to_string(SolveStatus status);

struct SolveReport {
  Eigen::VectorXd solution;
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::max_iter;
  std::string message;  // worst violated row on non-optimal exits
};

struct QpTolerances {
  double eps_abs = 1e-6;
  double eps_rel = 1e-4;
};

/// Operator-splitting (ADMM) solve with Ruiz equilibration, adaptive
/// penalty and an active-set polish step. Deterministic for identical
/// inputs and tolerances.
SolveReport solve_qp(const QuadraticProgram& qp, QpTolerances tol = {},
                     int max_iter = 50000);

/// Incremental builder keeping variable/row bookkeeping in one place.
class ProgramBuilder {
 public:
  using Term = std::pair<int, double>;

  int add_var(const std::string& name, double lo, double hi);
  int var(const std::string& name) const;

  /// Adds w * x_i * x_j to the objective (not 0.5 * w).
  void add_quad(int i, int j, double w);
  void add_lin(int i, double w);
  void add_constant(double w) { constant_ += w; }

  void add_eq(const std::vector<Term>& terms, double rhs, const std::string& name);
  /// sum(terms) <= rhs
  void add_ineq(const std::vector<Term>& terms, double rhs, const std::string& name);

  double constant() const { return constant_; }
  QuadraticProgram build() const;

 private:
  struct Row {
    std::vector<Term> terms;
    double rhs = 0.0;
    std::string name;
  };
  std::vector<std::string> names_;
  std::vector<double> lower_, upper_;
  std::vector<std::tuple<int, int, double>> quad_;
  std::vector<Term> lin_;
  std::vector<Row> eqs_, ins_;
  double constant_ = 0.0;
};

}  // namespace evcs

#endif  // EVCS_QP_HPP_
