#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "rplab/error.hpp"
#include "rplab/scalar.hpp"

namespace rplab {

/// Gauss quadrature for the weight exp(-V(phi)) on the real line.
///
/// Recurrence coefficients of the orthogonal polynomials come from a
/// discretized Stieltjes procedure on a fine trapezoid grid (spectrally
/// accurate for this smooth, rapidly decaying weight); nodes and weights
/// follow from the Golub-Welsch eigenproblem. All weights are positive.
inline QuadratureMeasure gauss_quadrature(const ScalarModel& model, int levels, int grid_points = 4001) {
  model.validate();
  if (levels < 2) throw ModelError("quadrature needs at least two levels");

  double vmin = model.potential(0.0);
  if (model.c2 < 0.0) vmin = model.potential(std::sqrt(-model.c2 / (2.0 * model.c4)));
  double range = 1.0;
  while (model.potential(range) - vmin < 80.0) range *= 1.25;

  const double h = 2.0 * range / (grid_points - 1);
  std::vector<double> x(grid_points), w(grid_points);
  for (int j = 0; j < grid_points; ++j) {
    x[j] = -range + h * j;
    w[j] = h * std::exp(-(model.potential(x[j]) - vmin));
  }

  std::vector<double> a(levels), b(levels, 0.0);
  std::vector<double> p_prev(grid_points, 0.0), p(grid_points, 1.0), p_next(grid_points);
  double norm_prev = 1.0;
  double mu0 = 0.0;
  for (int k = 0; k < levels; ++k) {
    double norm = 0.0, xnorm = 0.0;
    for (int j = 0; j < grid_points; ++j) {
      norm += w[j] * p[j] * p[j];
      xnorm += w[j] * x[j] * p[j] * p[j];
    }
    if (k == 0) mu0 = norm;
    a[k] = xnorm / norm;
    b[k] = k == 0 ? 0.0 : norm / norm_prev;
    for (int j = 0; j < grid_points; ++j) p_next[j] = (x[j] - a[k]) * p[j] - b[k] * p_prev[j];
    p_prev.swap(p);
    p.swap(p_next);
    norm_prev = norm;
  }

  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(levels, levels);
  for (int k = 0; k < levels; ++k) {
    jacobi(k, k) = a[k];
    if (k + 1 < levels) jacobi(k, k + 1) = jacobi(k + 1, k) = std::sqrt(b[k + 1]);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);

  QuadratureMeasure q;
  const double scale = std::exp(-vmin);
  for (int k = 0; k < levels; ++k) {
    const double v0 = solver.eigenvectors()(0, k);
    q.nodes.push_back(solver.eigenvalues()(k));
    q.weights.push_back(mu0 * v0 * v0 * scale);
  }
  return q;
}

}  // namespace rplab
