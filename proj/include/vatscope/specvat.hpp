#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "vatscope/core.hpp"
#include "vatscope/vat.hpp"

namespace vatscope {

struct SpecVatConfig {
    std::size_t k = 3;           // eigenvector count
    std::size_t k_max = 10;      // ceiling for automatic selection
    std::size_t knn_scale = 7;   // neighbor rank for local scaling
    double sigma_floor = 1e-12;  // lower bound on each local scale

    /// Throws InputError if the fields are inconsistent with an n-point matrix.
    void validate(std::size_t n) const;
};

/// A_ij = exp(-m_ij^2 / (sigma_i sigma_j)), A_ii = 0, where sigma_i is the
/// distance from i to its knn_scale-th nearest neighbor (at least sigma_floor).
/// The rank is capped at n - 1 for small inputs.
Eigen::MatrixXd local_scale_affinity(const DissimilarityMatrix& m, const SpecVatConfig& cfg);

/// Local scales used by local_scale_affinity.
std::vector<double> local_scales(const DissimilarityMatrix& m, std::size_t knn_scale, double sigma_floor);

/// S^{-1/2} A S^{-1/2} with S the row sums; rows/columns with zero sum stay zero.
Eigen::MatrixXd normalized_affinity(const Eigen::MatrixXd& a);

struct EigenPairs {
    Eigen::VectorXd values;   // descending
    Eigen::MatrixXd vectors;  // one orthonormal column per value
};

/// k largest eigenpairs of a symmetric matrix. The first component of each
/// vector exceeding 1e-12 in magnitude is made positive.
EigenPairs sym_eigen_topk(const Eigen::MatrixXd& mat, std::size_t k);

struct SpectralEmbedding {
    FeatureMatrix coords;               // n x k, unit rows except zero_rows
    std::vector<std::size_t> zero_rows; // rows left at zero (no normalization possible)
};

/// Row-normalized leading k columns of `vectors`.
SpectralEmbedding embed_rows(const Eigen::MatrixXd& vectors, std::size_t k);

struct SpecVatResult {
    SpectralEmbedding embedding;
    Eigen::VectorXd eigenvalues;
    DissimilarityMatrix d_prime;
    VatOrdering ordering;
    OdImage image;
};

SpecVatResult specvat(const DissimilarityMatrix& m, const SpecVatConfig& cfg);

struct KSelection {
    std::size_t k_best = 2;
    std::vector<std::pair<std::size_t, double>> scores;  // (k, clarity) for k = 2..k_max
    bool degenerate = false;
    std::vector<std::string> warnings;
};

/// Image clarity used for choosing k: Otsu between-class variance over total
/// variance of the intensity histogram, 0 for a constant image.
double odi_clarity(const OdImage& img);

/// Scores the SpecVAT image for every k in 2..k_max and keeps the clearest,
/// smallest k on ties.
KSelection a_specvat_select_k(const DissimilarityMatrix& m, const SpecVatConfig& cfg);

std::string k_selection_to_json(const KSelection& sel);

}  // namespace vatscope
