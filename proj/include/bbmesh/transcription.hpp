#pragma once

#include "bbmesh/lgr.hpp"
#include "bbmesh/nlp.hpp"
#include "bbmesh/ocp.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

namespace bbmesh {

/**
 * Index bookkeeping for the multi-domain LGR transcription.
 *
 * States live on a single global point sequence: domain d owns points
 * point_offset[d] .. point_offset[d] + N_d, and the last point of a domain is
 * the first point of the next one. Mesh intervals inside a domain share their
 * boundary points the same way. Controls follow the states, one row per
 * collocation point. Times that have a zero-width box are constants, not
 * variables.
 */
struct VariableLayout {
  std::size_t n_y = 0;
  std::size_t n_u = 0;
  std::size_t n_c = 0;
  std::size_t n_b = 0;
  std::vector<std::size_t> points;        // N_d per domain
  std::vector<std::size_t> point_offset;  // global index of each domain's first point
  std::vector<std::size_t> control_row;   // global collocation index of each domain's first point
  std::size_t state_points = 0;
  std::size_t control_points = 0;

  /// Variable index of each domain boundary time t_s^[0..Q]; nullopt when fixed.
  std::vector<std::optional<std::size_t>> time_index;
  /// Values used for boundary times that are not variables.
  std::vector<double> time_value;

  std::size_t num_variables = 0;
  std::size_t num_constraints = 0;

  std::size_t domains() const { return points.size(); }
  std::size_t state(std::size_t d, std::size_t j, std::size_t k) const {
    return (point_offset[d] + j) * n_y + k;
  }
  std::size_t control(std::size_t d, std::size_t l, std::size_t i) const {
    return state_points * n_y + (control_row[d] + l) * n_u + i;
  }
  std::size_t defect_row(std::size_t d, std::size_t l, std::size_t k) const {
    return row_offset[d] + l * n_y + k;
  }
  std::size_t path_row(std::size_t d, std::size_t l, std::size_t c) const {
    return row_offset[d] + points[d] * n_y + l * n_c + c;
  }
  std::size_t boundary_row(std::size_t b) const { return boundary_offset + b; }

  std::vector<std::size_t> row_offset;
  std::size_t boundary_offset = 0;
};

/// Domain-level discretization data derived from a mesh.
struct DomainGrid {
  MeshLayout mesh;
  std::vector<double> taus;     // N + 1 domain-level points
  std::vector<double> weights;  // N composite quadrature weights
  Eigen::MatrixXd diff;         // N x (N + 1) composite differentiation matrix
};

DomainGrid make_grid(const MeshLayout& mesh);

/**
 * The transcribed NLP. Derivatives are assembled block by block: every defect,
 * path and quadrature term depends only on one point's state and control plus
 * the two boundary times of its domain, and the endpoint terms only on the
 * first and last states and t0, tf.
 */
class CollocationNlp : public NlpProblem {
 public:
  CollocationNlp(MultiDomainProblem mdp, std::vector<MeshLayout> meshes);

  const VariableLayout& layout() const { return layout_; }
  const MultiDomainProblem& problem() const { return mdp_; }
  const std::vector<DomainGrid>& grids() const { return grids_; }

  double objective(std::span<const double> x) const override;
  void gradient(std::span<const double> x, std::span<double> grad) const override;
  void constraints(std::span<const double> x, std::span<double> g) const override;
  void jacobian(std::span<const double> x, Eigen::MatrixXd& jac) const override;
  void hessian(std::span<const double> x, double objective_factor, std::span<const double> lambda,
               Eigen::MatrixXd& hess) const override;

  /// Boundary time t_s^[i] at x.
  double time(std::span<const double> x, std::size_t i) const;

  /// Local variable block for collocation point l of domain d, or for the
  /// endpoint terms when d == domains(); exposed for derivative tests.
  std::vector<std::size_t> block_variables(std::size_t d, std::size_t l) const;

 private:
  MultiDomainProblem mdp_;
  std::vector<DomainGrid> grids_;
  VariableLayout layout_;
};

/**
 * Builds the NLP for a multi-domain problem. Without a prior solution the
 * start point interpolates the guess linearly in time; with one, the previous
 * trajectory is sampled at the new points.
 */
std::unique_ptr<CollocationNlp> assemble(const MultiDomainProblem& mdp, const std::vector<MeshLayout>& meshes,
                                         const CollocatedSolution* prior = nullptr);

/**
 * Costate transform lambda = W^{-1} Lambda at the collocation points and
 * lambda_{N+1} = D_{N+1}^T Lambda at the end point. `multipliers` is N x n_y in
 * the convention where the Lagrangian subtracts multiplier * defect.
 */
Eigen::MatrixXd costates_from_multipliers(const Eigen::MatrixXd& multipliers, std::span<const double> weights,
                                           const Eigen::MatrixXd& diff);

/**
 * Maps an NLP result back to per-domain trajectories. Costates are produced
 * only when the result carries multipliers; otherwise has_costates is false
 * and the costate matrices stay empty.
 */
CollocatedSolution extract(const NlpResult& result, const CollocationNlp& nlp);

}  // namespace bbmesh
