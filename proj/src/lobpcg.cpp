#include "choquard/lobpcg.hpp"

#include <vector>

#include "choquard/errors.hpp"

namespace choquard {

namespace {

/// Orthonormal basis of span(Q) as Q * B, B = V S^{-1/2} over retained Gram directions.
Eigen::MatrixXd gram_basis(const Eigen::MatrixXd& Q, double drop_tol) {
  Eigen::MatrixXd G = Q.transpose() * Q;
  G = 0.5 * (G + G.transpose()).eval();
  const Eigen::VectorXd d = G.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  // scale columns first so that the drop tolerance is relative to each direction
  const Eigen::MatrixXd Gs = d.asDiagonal() * G * d.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Gs);
  const double top = es.eigenvalues().maxCoeff();
  std::vector<int> keep;
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()[i] > drop_tol * top) keep.push_back(i);
  Eigen::MatrixXd B(Q.cols(), keep.size());
  for (std::size_t j = 0; j < keep.size(); ++j)
    B.col(j) = d.asDiagonal() * es.eigenvectors().col(keep[j]) / std::sqrt(es.eigenvalues()[keep[j]]);
  return B;
}

}  // namespace

LobpcgResult lobpcg(const BlockOperator& A, const BlockOperator& T, Eigen::MatrixXd X, const LobpcgOptions& opt) {
  const Eigen::Index n = X.rows();
  const Eigen::Index m = X.cols();
  if (m < opt.nev || m == 0) throw DomainError("LOBPCG block is narrower than the number of wanted pairs");
  if (3 * m > n) throw DomainError("LOBPCG block too wide for the problem size");

  {
    const Eigen::MatrixXd B = gram_basis(X, opt.drop_tol);
    if (B.cols() < m) throw DomainError("LOBPCG initial block is rank deficient");
    X = X * B;
  }
  Eigen::MatrixXd AX(n, m);
  A(X, AX);
  Eigen::VectorXd theta;
  {
    Eigen::MatrixXd H = X.transpose() * AX;
    H = 0.5 * (H + H.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    X = X * es.eigenvectors();
    AX = AX * es.eigenvectors();
    theta = es.eigenvalues();
  }

  Eigen::MatrixXd P, AP;
  LobpcgResult res;
  bool refreshed = false;
  for (int it = 0;; ++it) {
    Eigen::MatrixXd R = AX - X * theta.asDiagonal();
    Eigen::VectorXd rn = R.colwise().norm().transpose();
    bool done = (rn.head(opt.nev).array() < opt.tol).all();
    if (done && !refreshed) {
      // recompute A X to remove drift from the recurrences before declaring convergence
      A(X, AX);
      R = AX - X * theta.asDiagonal();
      rn = R.colwise().norm().transpose();
      done = (rn.head(opt.nev).array() < opt.tol).all();
      refreshed = true;
    }
    res.iterations = it;
    if (done || it >= opt.max_iter) {
      res.values = theta;
      res.vectors = X;
      res.residuals = rn;
      res.converged = done;
      return res;
    }
    if (it % 25 == 24) {
      A(X, AX);
      refreshed = false;
    }

    std::vector<Eigen::Index> active;
    for (Eigen::Index j = 0; j < m; ++j)
      if (rn[j] >= opt.tol) active.push_back(j);
    Eigen::MatrixXd Ract(n, active.size());
    for (std::size_t j = 0; j < active.size(); ++j) Ract.col(j) = R.col(active[j]);
    Eigen::MatrixXd W(n, active.size());
    T(Ract, W);
    W -= X * (X.transpose() * W);
    Eigen::MatrixXd AW(n, W.cols());
    A(W, AW);

    const Eigen::Index nw = W.cols(), np = P.cols();
    Eigen::MatrixXd Q(n, m + nw + np), AQ(n, m + nw + np);
    Q << X, W, P;
    AQ << AX, AW, AP;
    const Eigen::MatrixXd B = gram_basis(Q, opt.drop_tol);
    if (B.cols() < m) throw ConvergenceError("LOBPCG search space collapsed");
    const Eigen::MatrixXd Z = Q * B;
    const Eigen::MatrixXd AZ = AQ * B;
    Eigen::MatrixXd H = Z.transpose() * AZ;
    H = 0.5 * (H + H.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    const Eigen::MatrixXd Y = es.eigenvectors().leftCols(m);
    theta = es.eigenvalues().head(m);
    const Eigen::MatrixXd C = B * Y;  // coefficients in [X W P]

    const Eigen::MatrixXd Cx = C.topRows(m);
    Eigen::MatrixXd Pn = W * C.middleRows(m, nw);
    Eigen::MatrixXd APn = AW * C.middleRows(m, nw);
    if (np > 0) {
      Pn += P * C.bottomRows(np);
      APn += AP * C.bottomRows(np);
    }
    X = X * Cx + Pn;
    AX = AX * Cx + APn;
    P = std::move(Pn);
    AP = std::move(APn);
  }
}

}  // namespace choquard
