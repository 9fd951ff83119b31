#pragma once

#include <string>
#include <vector>

#include "quadrics/quadric_system.hpp"

namespace quadrics {

/// Lossless all-PV network with one slack bus at node 0.
struct PowerNetwork {
    struct Edge {
        int k = 0;
        int m = 0;
        double b = 0.0; // susceptance, per-unit
    };

    int node_count = 0;
    std::vector<Edge> edges;
    Vector injections; // P_k for k = 1..n-1

    /// Throws ValidationError on self-loops, duplicate edges,
    /// bad injections shape, or a disconnected graph.
    void validate() const;
};

/// Raw symmetric forms of the power-flow quadrics in the variable order
/// z = (x_0..x_{n-1}, y_0..y_{n-1}).
///
/// power_forms[0] encodes the slack constraint x_0^2; power_forms[k]
/// for k = 1..n-1 encodes P_k = sum_m b_km (x_m y_k - x_k y_m).
/// selector_forms[k] encodes x_k^2 + y_k^2 and the selectors partition
/// the identity.
struct RawQuadricForms {
    int n = 0;
    std::vector<Matrix> power_forms;
    std::vector<Matrix> selector_forms;
    Vector injections;
};

RawQuadricForms build_raw_forms(const PowerNetwork& network);

/// Positive-definite combinations
///   A_k = sum_j alphas(j,k) S_j                      for k < n
///   B_k = sum_j betas(j,k) S_j + sum_j gammas(j,k) Q_j   for k >= n
/// returned as a 2n-dimensional QuadricSystem whose factor matrices are
/// the symmetric square roots of the combinations. The rhs entry is the
/// same combination applied to the constants of the raw equations
/// (1 for every selector and for x_0^2, P_j for the flow equation j), so
/// the combined system has the same solution set as the raw one.
QuadricSystem combine_to_definite(const RawQuadricForms& raw, const Matrix& alphas,
                                  const Matrix& betas, const Matrix& gammas);

/// Randomized coefficient generator: alpha, beta = 1 + U(0,1) and gamma
/// small positive uniform, scaled so the selector part dominates the flow
/// forms; retries with fresh randomness up to 32 times when a combination
/// fails the definiteness, rank, or positive-rhs checks.
QuadricSystem random_definite_combination(const RawQuadricForms& raw, Rng& rng);

/// Positions that can be nonzero in any admissible combination:
/// the diagonal and the x-y couplings of existing edges.
Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> sparsity_pattern(const PowerNetwork& network);

nlohmann::json network_to_json(const PowerNetwork& network);
PowerNetwork network_from_json(const nlohmann::json& j);
PowerNetwork load_network(const std::string& path);
void save_network(const PowerNetwork& network, const std::string& path);

/// Random connected network: a spanning tree plus extra edges with
/// probability edge_prob, susceptances U(0.5, 1.5) signed, injections
/// U(-0.5, 0.5).
PowerNetwork random_network(int n, double edge_prob, Rng& rng);

} // namespace quadrics
