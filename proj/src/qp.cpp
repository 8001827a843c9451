#include "evcs/qp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace evcs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSigma = 1e-6;
constexpr double kAlpha = 1.6;          // over-relaxation
constexpr double kRhoEqScale = 1e3;     // stiffer penalty on equality rows
constexpr double kRhoMin = 1e-6;
constexpr double kRhoMax = 1e6;
constexpr double kEpsPinf = 1e-5;
constexpr int kCheckInterval = 25;

struct Stacked {
  // l <= A x <= u with rows [eq; ineq; box]
  Eigen::MatrixXd a;
  Eigen::VectorXd l, u;
  Eigen::Index n = 0, m = 0, n_eq = 0, n_in = 0;
};

Stacked stack(const QuadraticProgram& qp) {
  Stacked s;
  s.n = qp.num_vars();
  s.n_eq = qp.b_eq.size();
  s.n_in = qp.b_in.size();
  s.m = s.n_eq + s.n_in + s.n;
  s.a.setZero(s.m, s.n);
  s.l.resize(s.m);
  s.u.resize(s.m);
  if (s.n_eq > 0) {
    s.a.topRows(s.n_eq) = qp.a_eq;
    s.l.head(s.n_eq) = qp.b_eq;
    s.u.head(s.n_eq) = qp.b_eq;
  }
  if (s.n_in > 0) {
    s.a.middleRows(s.n_eq, s.n_in) = qp.a_in;
    s.l.segment(s.n_eq, s.n_in).setConstant(-kInf);
    s.u.segment(s.n_eq, s.n_in) = qp.b_in;
  }
  s.a.bottomRows(s.n).setIdentity();
  s.l.tail(s.n) = qp.lower;
  s.u.tail(s.n) = qp.upper;
  return s;
}

double inf_norm(const Eigen::VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

std::string row_name(const QuadraticProgram& qp, const Stacked& s, Eigen::Index j) {
  if (j < s.n_eq) return qp.eq_names.empty() ? "eq[" + std::to_string(j) + "]" : qp.eq_names[j];
  j -= s.n_eq;
  if (j < s.n_in) return qp.in_names.empty() ? "ineq[" + std::to_string(j) + "]" : qp.in_names[j];
  j -= s.n_in;
  return qp.var_names.empty() ? "box[" + std::to_string(j) + "]" : "box(" + qp.var_names[j] + ")";
}

std::string worst_violation(const QuadraticProgram& qp, const Stacked& s,
                            const Eigen::VectorXd& x) {
  const Eigen::VectorXd ax = s.a * x;
  double worst = 0.0;
  Eigen::Index worst_row = -1;
  for (Eigen::Index j = 0; j < s.m; ++j) {
    double v = 0.0;
    if (std::isfinite(s.l[j])) v = std::max(v, s.l[j] - ax[j]);
    if (std::isfinite(s.u[j])) v = std::max(v, ax[j] - s.u[j]);
    if (v > worst) {
      worst = v;
      worst_row = j;
    }
  }
  if (worst_row < 0) return "no constraint violated";
  std::ostringstream os;
  os << "worst violated constraint: " << row_name(qp, s, worst_row) << " by " << worst;
  return os.str();
}

struct Scaling {
  Eigen::VectorXd d;  // variable scaling
  Eigen::VectorXd e;  // row scaling
  double cost = 1.0;
};

double clamp_scale(double v) { return std::clamp(v, 1e-4, 1e4); }

// Modified Ruiz equilibration on [P A'; A 0] plus cost normalization.
Scaling equilibrate(Eigen::MatrixXd& p, Eigen::VectorXd& q, Eigen::MatrixXd& a,
                    Eigen::VectorXd& l, Eigen::VectorXd& u) {
  const Eigen::Index n = q.size(), m = l.size();
  Scaling sc;
  sc.d.setOnes(n);
  sc.e.setOnes(m);
  for (int pass = 0; pass < 10; ++pass) {
    Eigen::VectorXd dd(n), de(m);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double np = p.col(i).cwiseAbs().maxCoeff();
      const double na = m > 0 ? a.col(i).cwiseAbs().maxCoeff() : 0.0;
      const double nm = std::max(np, na);
      dd[i] = nm > 0.0 ? clamp_scale(1.0 / std::sqrt(nm)) : 1.0;
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      const double na = a.row(j).cwiseAbs().maxCoeff();
      de[j] = na > 0.0 ? clamp_scale(1.0 / std::sqrt(na)) : 1.0;
    }
    p = dd.asDiagonal() * p * dd.asDiagonal();
    q = dd.cwiseProduct(q);
    a = de.asDiagonal() * a * dd.asDiagonal();
    sc.d = sc.d.cwiseProduct(dd);
    sc.e = sc.e.cwiseProduct(de);

    double mean_col = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) mean_col += p.col(i).cwiseAbs().maxCoeff();
    mean_col = n > 0 ? mean_col / static_cast<double>(n) : 0.0;
    const double denom = std::max(mean_col, inf_norm(q));
    const double gamma = denom > 0.0 ? clamp_scale(1.0 / denom) : 1.0;
    p *= gamma;
    q *= gamma;
    sc.cost *= gamma;
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    if (std::isfinite(l[j])) l[j] *= sc.e[j];
    if (std::isfinite(u[j])) u[j] *= sc.e[j];
  }
  return sc;
}

}  // namespace

void QuadraticProgram::validate() const {
  const Eigen::Index n = num_vars();
  if (quad.rows() != n || quad.cols() != n)
    throw std::invalid_argument("qp: quad matrix dimension mismatch");
  if (lower.size() != n || upper.size() != n)
    throw std::invalid_argument("qp: box bound dimension mismatch");
  if (a_eq.rows() != b_eq.size() || (a_eq.rows() > 0 && a_eq.cols() != n))
    throw std::invalid_argument("qp: equality block dimension mismatch");
  if (a_in.rows() != b_in.size() || (a_in.rows() > 0 && a_in.cols() != n))
    throw std::invalid_argument("qp: inequality block dimension mismatch");
  for (Eigen::Index i = 0; i < n; ++i)
    if (lower[i] > upper[i])
      throw std::invalid_argument("qp: lower bound above upper bound for " +
                                  (var_names.empty() ? std::to_string(i) : var_names[i]));
  if (n == 0) return;
  const Eigen::MatrixXd sym = 0.5 * (quad + quad.transpose());
  if ((quad - sym).cwiseAbs().maxCoeff() > 1e-8 * std::max(1.0, sym.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("qp: quad matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
  const double max_eig = eig.eigenvalues().cwiseAbs().maxCoeff();
  if (eig.eigenvalues().minCoeff() < -1e-8 * std::max(1.0, max_eig))
    throw std::invalid_argument("qp: quad matrix is not positive semidefinite");
}

int QuadraticProgram::var_index(const std::string& name) const {
  const auto it = std::find(var_names.begin(), var_names.end(), name);
  if (it == var_names.end()) throw std::out_of_range("qp: unknown variable " + name);
  return static_cast<int>(it - var_names.begin());
}

int QuadraticProgram::eq_index(const std::string& name) const {
  const auto it = std::find(eq_names.begin(), eq_names.end(), name);
  if (it == eq_names.end()) throw std::out_of_range("qp: unknown equality row " + name);
  return static_cast<int>(it - eq_names.begin());
}

int QuadraticProgram::in_index(const std::string& name) const {
  const auto it = std::find(in_names.begin(), in_names.end(), name);
  if (it == in_names.end()) throw std::out_of_range("qp: unknown inequality row " + name);
  return static_cast<int>(it - in_names.begin());
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::max_iter: return "max-iter";
    case SolveStatus::infeasible: return "infeasible";
  }
  return "unknown";
}

SolveReport solve_qp(const QuadraticProgram& qp, QpTolerances tol, int max_iter) {
  qp.validate();
  const Eigen::Index n = qp.num_vars();
  SolveReport rep;
  if (n == 0) {
    rep.status = SolveStatus::optimal;
    return rep;
  }

  const Stacked st = stack(qp);
  const Eigen::MatrixXd p_orig = 0.5 * (qp.quad + qp.quad.transpose());

  // Scaled working copies.
  Eigen::MatrixXd p = p_orig;
  Eigen::VectorXd q = qp.lin;
  Eigen::MatrixXd a = st.a;
  Eigen::VectorXd l = st.l, u = st.u;
  const Scaling sc = equilibrate(p, q, a, l, u);

  Eigen::VectorXd rho(st.m);
  double rho_bar = 0.1;
  auto fill_rho = [&](double base) {
    for (Eigen::Index j = 0; j < st.m; ++j) {
      const bool is_eq = std::isfinite(l[j]) && std::isfinite(u[j]) && l[j] == u[j];
      rho[j] = is_eq ? kRhoEqScale * base : base;
    }
  };
  fill_rho(rho_bar);

  Eigen::LDLT<Eigen::MatrixXd> kkt;
  auto factor = [&] {
    Eigen::MatrixXd k = p;
    k.diagonal().array() += kSigma;
    k.noalias() += a.transpose() * rho.asDiagonal() * a;
    kkt.compute(k);
  };
  factor();

  Eigen::VectorXd x = Eigen::VectorXd::Zero(st.n);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(st.m);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(st.m);
  for (Eigen::Index j = 0; j < st.m; ++j) {
    const double lo = l[j], hi = u[j];
    z[j] = std::clamp(0.0, std::isfinite(lo) ? lo : 0.0, std::isfinite(hi) ? hi : 0.0);
  }

  Eigen::VectorXd y_prev_check = y;

  auto unscale_x = [&](const Eigen::VectorXd& xs) { return (sc.d.cwiseProduct(xs)).eval(); };
  auto unscale_y = [&](const Eigen::VectorXd& ys) {
    return (sc.e.cwiseProduct(ys) / sc.cost).eval();
  };

  rep.status = SolveStatus::max_iter;
  int iter = 0;
  for (iter = 1; iter <= max_iter; ++iter) {
    const Eigen::VectorXd rhs = kSigma * x - q + a.transpose() * (rho.cwiseProduct(z) - y);
    const Eigen::VectorXd x_tilde = kkt.solve(rhs);
    const Eigen::VectorXd z_tilde = a * x_tilde;
    x = kAlpha * x_tilde + (1.0 - kAlpha) * x;
    const Eigen::VectorXd z_relaxed = kAlpha * z_tilde + (1.0 - kAlpha) * z;
    Eigen::VectorXd z_next = z_relaxed + y.cwiseQuotient(rho);
    for (Eigen::Index j = 0; j < st.m; ++j) z_next[j] = std::clamp(z_next[j], l[j], u[j]);
    y += rho.cwiseProduct(z_relaxed - z_next);
    z = z_next;

    if (iter % kCheckInterval != 0 && iter != max_iter) continue;

    const Eigen::VectorXd xu = unscale_x(x);
    const Eigen::VectorXd yu = unscale_y(y);
    const Eigen::VectorXd zu = z.cwiseQuotient(sc.e);
    const Eigen::VectorXd ax = st.a * xu;
    const Eigen::VectorXd px = p_orig * xu;
    const Eigen::VectorXd aty = st.a.transpose() * yu;

    const double r_prim = inf_norm(ax - zu);
    const double r_dual = inf_norm(px + qp.lin + aty);
    const double eps_prim = tol.eps_abs + tol.eps_rel * std::max(inf_norm(ax), inf_norm(zu));
    const double eps_dual =
        tol.eps_abs + tol.eps_rel * std::max({inf_norm(px), inf_norm(aty), inf_norm(qp.lin)});
    rep.primal_residual = r_prim;
    rep.dual_residual = r_dual;

    if (r_prim <= eps_prim && r_dual <= eps_dual) {
      rep.status = SolveStatus::optimal;
      break;
    }

    // Primal infeasibility certificate from the dual increment.
    const Eigen::VectorXd dy = yu - unscale_y(y_prev_check);
    const double dy_norm = inf_norm(dy);
    if (dy_norm > tol.eps_abs) {
      bool certificate = inf_norm(st.a.transpose() * dy) <= kEpsPinf * dy_norm;
      double support = 0.0;
      for (Eigen::Index j = 0; j < st.m && certificate; ++j) {
        const double dp = std::max(dy[j], 0.0);
        const double dm = std::min(dy[j], 0.0);
        if (dp > 0.0) {
          if (std::isfinite(st.u[j])) support += st.u[j] * dp;
          else if (dp > kEpsPinf * dy_norm) certificate = false;
        }
        if (dm < 0.0) {
          if (std::isfinite(st.l[j])) support += st.l[j] * dm;
          else if (-dm > kEpsPinf * dy_norm) certificate = false;
        }
      }
      if (certificate && support <= -kEpsPinf * dy_norm) {
        rep.status = SolveStatus::infeasible;
        break;
      }
    }
    y_prev_check = y;

    // Residual-balancing penalty adaptation.
    const double sp = r_prim / std::max({inf_norm(ax), inf_norm(zu), 1e-10});
    const double sd = r_dual / std::max({inf_norm(px), inf_norm(aty), inf_norm(qp.lin), 1e-10});
    const double ratio = std::sqrt(sp / std::max(sd, 1e-16));
    if (ratio > 5.0 || ratio < 0.2) {
      rho_bar = std::clamp(rho_bar * ratio, kRhoMin, kRhoMax);
      fill_rho(rho_bar);
      factor();
    }
  }
  rep.iterations = std::min(iter, max_iter);

  Eigen::VectorXd x_best = unscale_x(x);
  Eigen::VectorXd y_best = unscale_y(y);

  if (rep.status == SolveStatus::optimal) {
    // Active-set polish against the unscaled data.
    const double y_tol = 1e-10 * std::max(1.0, inf_norm(y_best));
    std::vector<Eigen::Index> act;
    for (Eigen::Index j = 0; j < st.m; ++j)
      if (std::abs(y_best[j]) > y_tol &&
          (std::isfinite(st.l[j]) || std::isfinite(st.u[j])))
        act.push_back(j);
    const Eigen::Index k = static_cast<Eigen::Index>(act.size());
    if (k > 0) {
      Eigen::MatrixXd kk = Eigen::MatrixXd::Zero(st.n + k, st.n + k);
      kk.topLeftCorner(st.n, st.n) = p_orig;
      kk.topLeftCorner(st.n, st.n).diagonal().array() += 1e-12;
      Eigen::VectorXd rhs(st.n + k);
      rhs.head(st.n) = -qp.lin;
      for (Eigen::Index r = 0; r < k; ++r) {
        const Eigen::Index j = act[r];
        kk.block(st.n + r, 0, 1, st.n) = st.a.row(j);
        kk.block(0, st.n + r, st.n, 1) = st.a.row(j).transpose();
        kk(st.n + r, st.n + r) = -1e-9;
        rhs[st.n + r] = y_best[j] > 0.0 ? st.u[j] : st.l[j];
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(kk);
      if (lu.isInvertible()) {
        Eigen::VectorXd sol = lu.solve(rhs);
        for (int refine = 0; refine < 2; ++refine) sol += lu.solve(rhs - kk * sol);
        Eigen::VectorXd x_pol = sol.head(st.n);
        Eigen::VectorXd y_pol = Eigen::VectorXd::Zero(st.m);
        for (Eigen::Index r = 0; r < k; ++r) y_pol[act[r]] = sol[st.n + r];

        Eigen::VectorXd ax = st.a * x_pol;
        Eigen::VectorXd zp = ax;
        for (Eigen::Index j = 0; j < st.m; ++j) zp[j] = std::clamp(zp[j], st.l[j], st.u[j]);
        const double r_prim = inf_norm(ax - zp);
        const double r_dual = inf_norm(p_orig * x_pol + qp.lin + st.a.transpose() * y_pol);
        if (std::max(r_prim, r_dual) <
            std::max(rep.primal_residual, rep.dual_residual)) {
          x_best = x_pol;
          rep.primal_residual = r_prim;
          rep.dual_residual = r_dual;
        }
      }
    }
  }

  rep.solution = x_best;
  rep.objective = qp.objective(x_best);
  if (rep.status != SolveStatus::optimal) rep.message = worst_violation(qp, st, x_best);
  return rep;
}

int ProgramBuilder::add_var(const std::string& name, double lo, double hi) {
  names_.push_back(name);
  lower_.push_back(lo);
  upper_.push_back(hi);
  return static_cast<int>(names_.size()) - 1;
}

int ProgramBuilder::var(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw std::out_of_range("builder: unknown variable " + name);
  return static_cast<int>(it - names_.begin());
}

void ProgramBuilder::add_quad(int i, int j, double w) { quad_.emplace_back(i, j, w); }

void ProgramBuilder::add_lin(int i, double w) { lin_.emplace_back(i, w); }

void ProgramBuilder::add_eq(const std::vector<Term>& terms, double rhs,
                            const std::string& name) {
  eqs_.push_back({terms, rhs, name});
}

void ProgramBuilder::add_ineq(const std::vector<Term>& terms, double rhs,
                              const std::string& name) {
  ins_.push_back({terms, rhs, name});
}

QuadraticProgram ProgramBuilder::build() const {
  const Eigen::Index n = static_cast<Eigen::Index>(names_.size());
  QuadraticProgram qp;
  qp.quad.setZero(n, n);
  qp.lin.setZero(n);
  qp.lower.resize(n);
  qp.upper.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    qp.lower[i] = lower_[i];
    qp.upper[i] = upper_[i];
  }
  for (const auto& [i, j, w] : quad_) {
    qp.quad(i, j) += w;
    if (i != j) qp.quad(j, i) += w;  // keep symmetric; off-diagonal splits the weight
  }
  // add_quad(i,i,w) contributes w*x_i^2, i.e. Q(i,i) = 2w under 0.5 x'Qx.
  qp.quad.diagonal() *= 2.0;
  for (const auto& [i, w] : lin_) qp.lin[i] += w;

  qp.a_eq.setZero(static_cast<Eigen::Index>(eqs_.size()), n);
  qp.b_eq.resize(static_cast<Eigen::Index>(eqs_.size()));
  for (std::size_t r = 0; r < eqs_.size(); ++r) {
    for (const auto& [i, w] : eqs_[r].terms) qp.a_eq(static_cast<Eigen::Index>(r), i) += w;
    qp.b_eq[static_cast<Eigen::Index>(r)] = eqs_[r].rhs;
    qp.eq_names.push_back(eqs_[r].name);
  }
  qp.a_in.setZero(static_cast<Eigen::Index>(ins_.size()), n);
  qp.b_in.resize(static_cast<Eigen::Index>(ins_.size()));
  for (std::size_t r = 0; r < ins_.size(); ++r) {
    for (const auto& [i, w] : ins_[r].terms) qp.a_in(static_cast<Eigen::Index>(r), i) += w;
    qp.b_in[static_cast<Eigen::Index>(r)] = ins_[r].rhs;
    qp.in_names.push_back(ins_[r].name);
  }
  qp.var_names = names_;
  return qp;
}

}  // namespace evcs
