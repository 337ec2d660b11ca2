#pragma once

#include <vector>

#include "prdl/problem.hpp"

namespace prdl {

// ||Y||_F * max_i sigma_max(F_i); valid for every operator.
double lambda_max_general(const ProblemInstance& inst);
// sigma_max(A) * max_i sum_m |b_im| ||y_m||; K = 1 only.
double lambda_max_time_invariant(const ProblemInstance& inst);
// max_i sigma_max(A_i) ||y_i||; independent snapshots only.
double lambda_max_independent(const ProblemInstance& inst);
// Tightest available bound for the operator case.
double lambda_max(const ProblemInstance& inst);

// mu sigma_max(F) ||Y||_F / (sigma_min(F)^2 + mu).
double rho_max_general(const ProblemInstance& inst);
// max_i mu sigma_max(A_i) ||y_i|| / (sigma_min(A_i)^2 + mu); independent snapshots only.
double rho_max_independent(const ProblemInstance& inst);
double rho_max(const ProblemInstance& inst);

// sigma_min,nz(F)^2
double mu_default(const ProblemInstance& inst);

// upper * 0.75^k
double grid_value(double upper, int k);
std::vector<double> sparsity_grid(double upper, int count);

// X = (F^H F + mu I)^{-1} F^H (Y .* phase(F X0)), i.e. the signal making the
// auxiliary majorizer stationary in X at Z = 0 for the anchor F(X0). Repeating
// `sweeps` times iterates towards a fixed point of the anchor update.
CMatrix zero_code_signal(const ProblemInstance& inst, const CMatrix& X0, int sweeps = 1);

}  // namespace prdl
