#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "bihc/bezier.hpp"
#include "bihc/cage.hpp"
#include "bihc/kernels.hpp"

namespace bihc {

enum class SolverMethod { BiHC1, BiHC12 };
enum class Execution { Serial, Parallel };

std::string to_string(SolverMethod m);
SolverMethod parse_solver_method(const std::string& s);

struct DeformationConfig {
  int n = 3;
  int k = 0;        ///< 0 → n
  int subdiv = 4;
  int samples = 0;  ///< per sub-element; 0 → 2n
  double offset_fraction = 1e-4;
  SolverMethod method = SolverMethod::BiHC12;
  /// First-order Taylor correction of the offset sample equations.
  bool offset_correction = true;
  double w = 1.0;
  KernelSettings kernel;
  Execution execution = Execution::Parallel;

  int order_k() const { return k > 0 ? k : n; }
  int samples_per_element() const { return samples > 0 ? samples : 2 * n; }
};

/// Throws ValidationError if the config is unusable for a cage of order `cage_order`.
void check_config(const DeformationConfig& config, int cage_order);

struct SubElementParent {
  std::size_t edge = 0;
  double a = 0.0;
  double b = 1.0;
};

struct BoundarySample {
  std::size_t element = 0;
  double t = 0.0;
  Point2 point = Point2::Zero();  ///< c(t) on the sub-element
  Point2 eta = Point2::Zero();    ///< inward-offset evaluation point
  double offset = 0.0;            ///< actual δ used for this sample
  Point2 outward = Point2::Zero();  ///< unit outward normal at c(t)
  double speed = 0.0;              ///< ‖c'(t)‖ on the sub-element
};

/// Column layouts: sub-element s, Bernstein index j. Order-p "shared" layouts put
/// j < p at s·p + j and j = p at ((s+1) mod N)·p (the next element's start).
inline int shared_index(int s, int j, int p, int count) {
  return j < p ? s * p + j : ((s + 1) % count) * p;
}

struct Discretization {
  Cage cage;                       ///< normalized, curves at a common order
  std::vector<BezierCurve> elements;
  std::vector<SubElementParent> parents;
  std::vector<BoundarySample> samples;
  int n = 0;
  int k = 0;
  double diagonal = 0.0;
  double delta = 0.0;
  /// Edge-level G1 (N_c·n, shared) → sub-level G1 (N_sub·n, shared).
  Eigen::MatrixXd S;
  /// Edge-level G2 (N_c·n) → sub-level G2 (N_sub·n).
  Eigen::MatrixXd T;

  int edge_count() const { return static_cast<int>(cage.size()); }
  int element_count() const { return static_cast<int>(elements.size()); }
};

Discretization discretize(const Cage& cage, const DeformationConfig& config);

/// Basis integrals of one evaluation point against every sub-element,
/// scattered into global column layouts.
struct BasisRow {
  Eigen::RowVectorXd phi, psi;    ///< G1 / G2 layouts, order n
  Eigen::RowVectorXd phit, psit;  ///< H1 / H2 layouts, order k
  Eigen::RowVectorXd phik, psiw;  ///< H1 / H2 layouts, Laplacian identity
  int fallbacks = 0;
};

struct BasisRowGradient {
  BasisRow dx, dy;
  int fallbacks = 0;
};

BasisRow basis_row(const Discretization& disc, const Point2& eta, const KernelSettings& settings = {});
BasisRowGradient basis_row_gradient(const Discretization& disc, const Point2& eta,
                                    const KernelSettings& settings = {});

struct BemMatrices {
  Eigen::MatrixXd M_n, Phi_n, Psi_n;
  Eigen::MatrixXd PhiBar_k, PsiBar_k;
  Eigen::MatrixXd M_k, Phi_k, PsiW_k;
  /// Offset corrections: N_n maps G2 and N_k maps H2 to −δ·∂ₙ at each sample.
  Eigen::MatrixXd N_n, N_k;
  std::vector<int> fallback_rows;
  bool offset_correction = false;

  /// Stacked operators of the constraint system E·H = R, F·H = 0.
  Eigen::MatrixXd E() const;
  Eigen::MatrixXd F() const;
  /// R = W_g1·G1 + W_g2·G2 (sub-level layouts).
  Eigen::MatrixXd W_g1() const;
  Eigen::MatrixXd W_g2() const;
};

BemMatrices assemble(const Discretization& disc, const KernelSettings& settings = {},
                     Execution execution = Execution::Parallel, bool offset_correction = true);

struct RegularizedSolve {
  SolverMethod method = SolverMethod::BiHC12;
  Eigen::MatrixXd C_L, C_D;
  Eigen::MatrixXd C() const;
};

RegularizedSolve solve_regularization(const BemMatrices& mats, SolverMethod method);

/// ρ(C) = ‖E·C − I‖_F² + ‖F·C‖_F².
double combined_residual(const BemMatrices& mats, const RegularizedSolve& solve);

struct BieValue {
  double f = 0.0;
  double laplacian = 0.0;
};

/// Both discretized identities at η with arbitrary sub-level coefficient data.
BieValue evaluate_bie(const Discretization& disc, const Eigen::VectorXd& g1, const Eigen::VectorXd& g2,
                      const Eigen::VectorXd& h1, const Eigen::VectorXd& h2, const Point2& eta,
                      const KernelSettings& settings = {});

}  // namespace bihc
