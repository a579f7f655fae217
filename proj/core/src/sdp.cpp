#include "passmat/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "passmat/errors.hpp"

namespace passmat {

const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::Optimal: return "Optimal";
    case SdpStatus::Infeasible: return "Infeasible";
    case SdpStatus::MaxIter: return "MaxIter";
    case SdpStatus::NumericalFailure: return "NumericalFailure";
  }
  return "?";
}

void SdpProblem::Validate() const {
  if (num_vars < 0) throw InvalidInput("SdpProblem: negative num_vars");
  if (objective.size() != num_vars) throw InvalidInput("SdpProblem: objective size != num_vars");
  if (blocks.empty()) throw InvalidInput("SdpProblem: at least one block is required");
  for (const SdpBlock& b : blocks) {
    if (static_cast<int>(b.fi.size()) != num_vars) {
      throw InvalidInput("SdpProblem: each block needs one F_i per variable");
    }
    for (const SymmetricMatrix& f : b.fi) {
      if (f.dim() != b.f0.dim()) throw InvalidInput("SdpProblem: F_i dimension differs from F0");
    }
  }
  if (lower && lower->size() != num_vars) throw InvalidInput("SdpProblem: lower bound size");
  if (upper && upper->size() != num_vars) throw InvalidInput("SdpProblem: upper bound size");
  if (!objective.allFinite()) throw InvalidInput("SdpProblem: non-finite objective");
}

double SdpProblem::Scale() const {
  double s = 0.0;
  for (const SdpBlock& b : blocks) {
    s = std::max(s, b.f0.matrix().norm());
    for (const SymmetricMatrix& f : b.fi) s = std::max(s, f.matrix().norm());
  }
  return s;
}

namespace {

struct DenseBlock {
  Matrix f0;
  std::vector<Matrix> fi;
};

std::vector<DenseBlock> Lower(const SdpProblem& p) {
  std::vector<DenseBlock> out;
  out.reserve(p.blocks.size() + 2 * static_cast<std::size_t>(p.num_vars));
  for (const SdpBlock& b : p.blocks) {
    DenseBlock d{b.f0.matrix(), {}};
    d.fi.reserve(b.fi.size());
    for (const SymmetricMatrix& f : b.fi) d.fi.push_back(f.matrix());
    out.push_back(std::move(d));
  }
  // Box bounds become 1×1 blocks x_i − lo ≥ 0 and hi − x_i ≥ 0.
  auto add_bound = [&](int i, double offset, double coeff) {
    DenseBlock d{Matrix::Constant(1, 1, offset), {}};
    for (int j = 0; j < p.num_vars; ++j) d.fi.push_back(Matrix::Constant(1, 1, j == i ? coeff : 0.0));
    out.push_back(std::move(d));
  };
  for (int i = 0; i < p.num_vars; ++i) {
    if (p.lower && std::isfinite((*p.lower)(i))) add_bound(i, -(*p.lower)(i), 1.0);
    if (p.upper && std::isfinite((*p.upper)(i))) add_bound(i, (*p.upper)(i), -1.0);
  }
  return out;
}

Matrix Evaluate(const DenseBlock& b, const Vector& x) {
  Matrix f = b.f0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i) != 0.0) f.noalias() += x(i) * b.fi[static_cast<std::size_t>(i)];
  }
  return f;
}

double Inner(const Matrix& a, const Matrix& b) { return a.cwiseProduct(b).sum(); }

Matrix Sym(const Matrix& a) { return 0.5 * (a + a.transpose()); }

// Largest α with X + α·dX ⪰ 0 (infinity if unbounded); X must be positive definite.
double MaxStep(const Matrix& x, const Matrix& dx) {
  Eigen::LLT<Matrix> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  const Matrix l_inv_dx = llt.matrixL().solve(dx);
  const Matrix scaled = llt.matrixL().solve(Matrix(l_inv_dx.transpose()));
  Eigen::SelfAdjointEigenSolver<Matrix> es(Sym(scaled), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

// λ_min(Lᵀ Z L) with S = L Lᵀ; equals λ_min(S Z). NaN if S is not positive definite.
double MinCompl(const Matrix& s, const Matrix& z) {
  Eigen::LLT<Matrix> llt(s);
  if (llt.info() != Eigen::Success) return std::numeric_limits<double>::quiet_NaN();
  const Matrix l = llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Matrix> es(Sym(l.transpose() * z * l), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double MinEig(const Matrix& a) {
  if (a.rows() == 1) return a(0, 0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

struct Direction {
  Vector dx;
  std::vector<Matrix> ds;
  std::vector<Matrix> dz;
};

}  // namespace

SdpSolution solve(const SdpProblem& problem, const SdpOptions& opts) {
  problem.Validate();
  if (opts.feas_tol <= 0 || opts.gap_tol <= 0 || opts.max_iter < 1) {
    throw InvalidInput("SdpOptions: tolerances must be positive and max_iter >= 1");
  }
  const std::vector<DenseBlock> blocks = Lower(problem);
  const int k = problem.num_vars;
  const std::size_t nb = blocks.size();
  const Vector& c = problem.objective;

  double f0_norm = 0.0;
  double fi_norm = 0.0;
  int total_dim = 0;
  for (const DenseBlock& b : blocks) {
    f0_norm = std::max(f0_norm, b.f0.norm());
    for (const Matrix& f : b.fi) fi_norm = std::max(fi_norm, f.norm());
    total_dim += static_cast<int>(b.f0.rows());
  }
  const double c_norm = c.size() > 0 ? c.norm() : 0.0;

  Vector x = Vector::Zero(k);
  std::vector<Matrix> s(nb), z(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const Eigen::Index dim = blocks[b].f0.rows();
    const double xi = std::max({10.0, std::sqrt(static_cast<double>(dim)), f0_norm, fi_norm});
    double eta = std::max(10.0, std::sqrt(static_cast<double>(dim)));
    for (int i = 0; i < k; ++i) {
      eta = std::max(eta, (1.0 + std::abs(c(i))) / (1.0 + blocks[b].fi[static_cast<std::size_t>(i)].norm()));
    }
    s[b] = xi * Matrix::Identity(dim, dim);
    z[b] = eta * Matrix::Identity(dim, dim);
  }

  SdpSolution sol;
  std::vector<Matrix> rp(nb), s_inv(nb);
  Vector rd(k);
  Matrix schur(k, k);

  auto finish = [&](SdpStatus status, int iters, std::string msg) {
    sol.x = x;
    sol.status = status;
    sol.iterations = iters;
    sol.message = std::move(msg);
    sol.objective_value = c.dot(x);
    double viol = 0.0;
    double dobj = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      viol = std::max(viol, -MinEig(Evaluate(blocks[b], x)));
      dobj += Inner(blocks[b].f0, z[b]);
    }
    sol.max_constraint_violation = std::max(0.0, viol);
    double sz = 0.0;
    for (std::size_t b = 0; b < nb; ++b) sz += Inner(s[b], z[b]);
    sol.duality_gap_estimate = sz / (1.0 + std::abs(sol.objective_value) + std::abs(dobj));
    Vector r = c;
    for (std::size_t b = 0; b < nb; ++b) {
      for (int i = 0; i < k; ++i) r(i) += Inner(blocks[b].fi[static_cast<std::size_t>(i)], z[b]);
    }
    sol.dual_infeasibility = (k > 0 ? r.norm() : 0.0) / (1.0 + c_norm);
    return sol;
  };

  // The dual residual can plateau above feas_tol while the gap keeps closing:
  // Schur-system round-off near the optimum, or a dual without interior when the
  // primal optimum is only approached at infinity. On a stall, breakdown or
  // max_iter, the iterate that is primal feasible with a closed gap and the
  // smallest dual residual is returned as optimal; dual_infeasibility says how
  // far from dual feasible it is.
  constexpr double kNeighbourhood = 1e-4;
  constexpr int kStallIters = 15;
  struct Best {
    double dinf = std::numeric_limits<double>::infinity();
    Vector x;
    std::vector<Matrix> s, z;
    int iter = -1;
    bool acceptable = false;
  } best;
  double best_merit = std::numeric_limits<double>::infinity();
  int best_merit_iter = 0;
  auto fallback = [&](SdpStatus status, int iters, std::string msg) {
    if (!best.acceptable) return finish(status, iters, std::move(msg));
    x = best.x;
    s = best.s;
    z = best.z;
    return finish(SdpStatus::Optimal, iters, msg + "; returned best primal-feasible iterate");
  };

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    // Residuals: Rp = F(x) − S, rd_i = c_i + ⟨F_i, Z⟩.
    double pinf = 0.0;
    double gap_sz = 0.0;
    double dobj = 0.0;
    double ztrace = 0.0;
    rd = c;
    for (std::size_t b = 0; b < nb; ++b) {
      rp[b] = Evaluate(blocks[b], x) - s[b];
      pinf = std::max(pinf, rp[b].norm());
      gap_sz += Inner(s[b], z[b]);
      dobj += Inner(blocks[b].f0, z[b]);
      ztrace += z[b].trace();
      for (int i = 0; i < k; ++i) rd(i) += Inner(blocks[b].fi[static_cast<std::size_t>(i)], z[b]);
    }
    const double pobj = c.dot(x);
    const double rel_pinf = pinf / (1.0 + f0_norm);
    const double rel_dinf = (k > 0 ? rd.norm() : 0.0) / (1.0 + c_norm);
    const double denom = 1.0 + std::abs(pobj) + std::abs(dobj);
    const double rel_gap = gap_sz / denom;
    const double mu = gap_sz / total_dim;

    if (rel_pinf <= opts.feas_tol && rel_dinf <= opts.feas_tol && rel_gap <= opts.gap_tol) {
      return finish(SdpStatus::Optimal, iter, "");
    }
    const double merit = std::max({rel_pinf / opts.feas_tol, rel_dinf / opts.feas_tol, rel_gap / opts.gap_tol});
    if (merit < 0.99 * best_merit) {
      best_merit = merit;
      best_merit_iter = iter;
    }
    if (rel_pinf <= opts.feas_tol && rel_gap <= opts.gap_tol && rel_dinf < best.dinf) {
      best = {rel_dinf, x, s, z, iter, true};
    }
    if (best.acceptable && iter - best_merit_iter >= kStallIters) {
      return fallback(SdpStatus::MaxIter, iter, "stalled");
    }

    // Primal infeasibility: Z/tr(Z) approaches Z̄ ⪰ 0 with ⟨F_i, Z̄⟩ = 0 and ⟨F0, Z̄⟩ < 0.
    if (ztrace > 1e6 * (1.0 + c_norm)) {
      double ax = 0.0;
      for (int i = 0; i < k; ++i) ax = std::max(ax, std::abs(rd(i) - c(i)));
      const double f0z = dobj / ztrace;
      if (f0z < -1e-3 * opts.feas_tol * (1.0 + f0_norm) && ax / ztrace < 1e-2 * std::abs(f0z)) {
        return finish(SdpStatus::Infeasible, iter, "dual ray certifies primal infeasibility");
      }
    }
    if (!x.allFinite() || x.norm() > 1e12 * (1.0 + f0_norm)) {
      return finish(SdpStatus::NumericalFailure, iter, "iterates diverged (objective unbounded?)");
    }

    // Schur complement matrix M_ij = Σ_b tr(F_i S⁻¹ F_j Z).
    schur.setZero();
    std::vector<std::vector<Matrix>> g(nb);
    for (std::size_t b = 0; b < nb; ++b) {
      Eigen::LLT<Matrix> llt(s[b]);
      if (llt.info() != Eigen::Success) {
        return fallback(SdpStatus::NumericalFailure, iter, "primal slack lost definiteness");
      }
      const Eigen::Index dim = s[b].rows();
      s_inv[b] = llt.solve(Matrix::Identity(dim, dim));
      s_inv[b] = Sym(s_inv[b]);
      g[b].resize(static_cast<std::size_t>(k));
      for (int j = 0; j < k; ++j) {
        g[b][static_cast<std::size_t>(j)] = s_inv[b] * blocks[b].fi[static_cast<std::size_t>(j)] * z[b];
      }
      for (int i = 0; i < k; ++i) {
        for (int j = i; j < k; ++j) {
          const double v = Inner(blocks[b].fi[static_cast<std::size_t>(i)], g[b][static_cast<std::size_t>(j)]);
          schur(i, j) += v;
          if (i != j) schur(j, i) += v;
        }
      }
    }
    Eigen::LDLT<Matrix> ldlt(schur);
    if (ldlt.info() != Eigen::Success || (k > 0 && ldlt.rcond() < 1e-16)) {
      // Mild Tikhonov shift before giving up.
      const double shift = 1e-14 * std::max(1.0, schur.diagonal().cwiseAbs().maxCoeff());
      ldlt.compute(schur + shift * Matrix::Identity(k, k));
      if (ldlt.info() != Eigen::Success) {
        return fallback(SdpStatus::NumericalFailure, iter, "singular Schur complement");
      }
    }

    // Base term of dZ without the −S⁻¹ dS Z part.
    auto direction = [&](double sigma_mu, const std::vector<Matrix>* corr) {
      Direction d;
      std::vector<Matrix> t(nb);
      Vector rhs = rd;
      for (std::size_t b = 0; b < nb; ++b) {
        t[b] = sigma_mu * s_inv[b] - z[b];
        if (corr) t[b].noalias() -= s_inv[b] * (*corr)[b];
        const Matrix rhs_mat = t[b] - s_inv[b] * rp[b] * z[b];
        for (int i = 0; i < k; ++i) rhs(i) += Inner(blocks[b].fi[static_cast<std::size_t>(i)], rhs_mat);
      }
      d.ds.resize(nb);
      d.dz.resize(nb);
      auto complete = [&] {
        for (std::size_t b = 0; b < nb; ++b) {
          d.ds[b] = rp[b];
          for (int j = 0; j < k; ++j) d.ds[b].noalias() += d.dx(j) * blocks[b].fi[static_cast<std::size_t>(j)];
          d.dz[b] = Sym(t[b] - s_inv[b] * d.ds[b] * z[b]);
        }
      };
      d.dx = Vector::Zero(k);
      if (k > 0) {
        d.dx = ldlt.solve(rhs);
        d.dx += ldlt.solve(Vector(rhs - schur * d.dx));
      }
      complete();
      // Refine against the dZ actually formed: ⟨F_i, dZ⟩ = −rd_i is what keeps the
      // dual residual from drifting once S⁻¹ and Z are badly scaled.
      for (int pass = 0; pass < 2 && k > 0; ++pass) {
        Vector e = rd;
        for (std::size_t b = 0; b < nb; ++b) {
          for (int i = 0; i < k; ++i) e(i) += Inner(blocks[b].fi[static_cast<std::size_t>(i)], d.dz[b]);
        }
        if (e.norm() <= 1e-3 * opts.feas_tol * (1.0 + c_norm)) break;
        d.dx += ldlt.solve(e);
        complete();
      }
      return d;
    };
    auto step_lengths = [&](const Direction& d, double tau) {
      double ap = std::numeric_limits<double>::infinity();
      double ad = std::numeric_limits<double>::infinity();
      for (std::size_t b = 0; b < nb; ++b) {
        ap = std::min(ap, MaxStep(s[b], d.ds[b]));
        ad = std::min(ad, MaxStep(z[b], d.dz[b]));
      }
      return std::pair<double, double>{std::min(1.0, tau * ap), std::min(1.0, tau * ad)};
    };

    // Predictor.
    const Direction aff = direction(0.0, nullptr);
    const auto [ap_aff, ad_aff] = step_lengths(aff, 1.0);
    double gap_aff = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      gap_aff += Inner(s[b] + ap_aff * aff.ds[b], z[b] + ad_aff * aff.dz[b]);
    }
    double sigma = std::pow(std::max(0.0, gap_aff) / std::max(gap_sz, 1e-300), 3.0);
    sigma = std::clamp(sigma, 0.0, 1.0);

    // Corrector with the second-order term dS_aff·dZ_aff.
    std::vector<Matrix> corr(nb);
    for (std::size_t b = 0; b < nb; ++b) corr[b] = aff.ds[b] * aff.dz[b];
    const Direction dir = direction(sigma * mu, &corr);
    auto [ap, ad] = step_lengths(dir, 0.95);
    // Stay in a wide neighbourhood of the central path: λ_min(S Z) ≥ γ·μ. Letting a
    // few eigenvalue pairs of S Z collapse makes S⁻¹ huge and the dual steps stall.
    for (int cut = 0; cut < 30; ++cut) {
      double lmin = std::numeric_limits<double>::infinity();
      double sz = 0.0;
      for (std::size_t b = 0; b < nb; ++b) {
        const Matrix sn = s[b] + ap * dir.ds[b];
        const Matrix zn = z[b] + ad * dir.dz[b];
        const double v = MinCompl(Sym(sn), Sym(zn));
        lmin = std::isnan(v) ? -1.0 : std::min(lmin, v);
        sz += Inner(sn, zn);
      }
      if (lmin >= kNeighbourhood * sz / total_dim) break;
      ap *= 0.8;
      ad *= 0.8;
    }
    if (ap < 1e-12 && ad < 1e-12) {
      return fallback(SdpStatus::NumericalFailure, iter, "step length collapsed");
    }

    x += ap * dir.dx;
    for (std::size_t b = 0; b < nb; ++b) {
      s[b] = Sym(s[b] + ap * dir.ds[b]);
      z[b] = Sym(z[b] + ad * dir.dz[b]);
    }
  }

  // Budget exhausted: no interior point found means the problem is (likely) infeasible.
  double pinf = 0.0;
  for (std::size_t b = 0; b < nb; ++b) pinf = std::max(pinf, (Evaluate(blocks[b], x) - s[b]).norm());
  if (pinf / (1.0 + f0_norm) > opts.feas_tol) {
    return finish(SdpStatus::Infeasible, opts.max_iter, "no interior point found within max_iter");
  }
  return fallback(SdpStatus::MaxIter, opts.max_iter, "iteration limit reached");
}

}  // namespace passmat
