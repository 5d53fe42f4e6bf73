#include "vatscope/specvat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "vatscope/cce.hpp"
#include "vatscope/error.hpp"

namespace vatscope {

void SpecVatConfig::validate(std::size_t n) const {
    if (n < 2) throw InputError("SpecVAT needs at least 2 points");
    if (k < 1 || k > n - 1)
        throw InputError("k = " + std::to_string(k) + " must lie in [1, " + std::to_string(n - 1) + "]");
    if (knn_scale < 1) throw InputError("knn_scale must be >= 1");
    if (!(sigma_floor > 0.0)) throw InputError("sigma_floor must be > 0");
}

std::vector<double> local_scales(const DissimilarityMatrix& m, std::size_t knn_scale, double sigma_floor) {
    const std::size_t n = m.size();
    const std::size_t rank = std::min(knn_scale, n - 1);
    std::vector<double> sigma(n);
    std::vector<double> others;
    others.reserve(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        others.clear();
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) others.push_back(m(i, j));
        std::nth_element(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(rank - 1), others.end());
        sigma[i] = std::max(others[rank - 1], sigma_floor);
    }
    return sigma;
}

Eigen::MatrixXd local_scale_affinity(const DissimilarityMatrix& m, const SpecVatConfig& cfg) {
    const std::size_t n = m.size();
    if (n < 2) throw InputError("local_scale_affinity needs at least 2 points");
    if (cfg.knn_scale < 1) throw InputError("knn_scale must be >= 1");
    if (!(cfg.sigma_floor > 0.0)) throw InputError("sigma_floor must be > 0");
    const auto sigma = local_scales(m, cfg.knn_scale, cfg.sigma_floor);

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = m(i, j);
            const double v = std::exp(-(d * d) / (sigma[i] * sigma[j]));
            a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
        }
    return a;
}

Eigen::MatrixXd normalized_affinity(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) throw InputError("affinity matrix must be square");
    const Eigen::VectorXd sums = a.rowwise().sum();
    Eigen::VectorXd inv_sqrt(a.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) inv_sqrt(i) = sums(i) > 0.0 ? 1.0 / std::sqrt(sums(i)) : 0.0;
    return inv_sqrt.asDiagonal() * a * inv_sqrt.asDiagonal();
}

namespace {

// Above this size the O(n^3)-per-sweep Jacobi iteration is too slow and the
// tridiagonal QR solver takes over.
constexpr Eigen::Index kJacobiMaxN = 1024;
constexpr int kJacobiMaxSweeps = 100;

// Cyclic Jacobi with the classical threshold strategy: during the first
// sweeps only large off-diagonal entries are rotated away, later ones that
// no longer change the diagonal are set to zero. Entries that are exactly
// zero are never touched, so block-diagonal input keeps block-supported
// eigenvectors.
void cyclic_jacobi(const Eigen::MatrixXd& input, Eigen::VectorXd& d, Eigen::MatrixXd& v) {
    Eigen::MatrixXd a = input;
    const Eigen::Index n = a.rows();
    v = Eigen::MatrixXd::Identity(n, n);
    d = a.diagonal();
    Eigen::VectorXd b = d, z = Eigen::VectorXd::Zero(n);

    auto rotate = [](Eigen::MatrixXd& m, Eigen::Index i, Eigen::Index j, Eigen::Index k, Eigen::Index l, double s,
                     double tau) {
        const double g = m(i, j), h = m(k, l);
        m(i, j) = g - s * (h + g * tau);
        m(k, l) = h + s * (g - h * tau);
    };

    for (int sweep = 1; sweep <= kJacobiMaxSweeps; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) off += std::abs(a(p, q));
        if (off == 0.0) return;
        const double thresh = sweep < 4 ? 0.2 * off / static_cast<double>(n * n) : 0.0;

        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                const double g = 100.0 * std::abs(apq);
                if (sweep > 4 && std::abs(d(p)) + g == std::abs(d(p)) && std::abs(d(q)) + g == std::abs(d(q))) {
                    a(p, q) = 0.0;
                    continue;
                }
                if (!(std::abs(apq) > thresh)) continue;
                double h = d(q) - d(p);
                double t;
                if (std::abs(h) + g == std::abs(h)) {
                    t = apq / h;
                } else {
                    const double theta = 0.5 * h / apq;
                    t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                    if (theta < 0.0) t = -t;
                }
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                const double tau = s / (1.0 + c);
                h = t * apq;
                z(p) -= h;
                z(q) += h;
                d(p) -= h;
                d(q) += h;
                a(p, q) = 0.0;
                for (Eigen::Index j = 0; j < p; ++j) rotate(a, j, p, j, q, s, tau);
                for (Eigen::Index j = p + 1; j < q; ++j) rotate(a, p, j, j, q, s, tau);
                for (Eigen::Index j = q + 1; j < n; ++j) rotate(a, p, j, q, j, s, tau);
                for (Eigen::Index j = 0; j < n; ++j) rotate(v, j, p, j, q, s, tau);
            }
        }
        b += z;
        d = b;
        z.setZero();
    }
    throw NumericError("sym_eigen_topk: Jacobi iteration did not converge in " + std::to_string(kJacobiMaxSweeps) +
                       " sweeps");
}

}  // namespace

EigenPairs sym_eigen_topk(const Eigen::MatrixXd& mat, std::size_t k) {
    const auto n = mat.rows();
    if (n != mat.cols() || n == 0) throw InputError("sym_eigen_topk: matrix must be square and non-empty");
    if (k < 1 || k > static_cast<std::size_t>(n))
        throw InputError("sym_eigen_topk: k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
    if (!mat.allFinite()) throw InputError("sym_eigen_topk: non-finite entry");
    const double tol = 1e-10 * std::max(1.0, mat.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            if (std::abs(mat(i, j) - mat(j, i)) > tol)
                throw InputError("sym_eigen_topk: matrix is not symmetric at (" + std::to_string(i) + ", " +
                                 std::to_string(j) + ")");

    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
    if (n <= kJacobiMaxN) {
        cyclic_jacobi(mat, values, vectors);
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(mat, Eigen::ComputeEigenvectors);
        if (solver.info() != Eigen::Success) throw NumericError("sym_eigen_topk: eigensolver did not converge");
        values = solver.eigenvalues();
        vectors = solver.eigenvectors();
    }

    std::vector<Eigen::Index> rank(static_cast<std::size_t>(n));
    std::iota(rank.begin(), rank.end(), Eigen::Index{0});
    std::stable_sort(rank.begin(), rank.end(), [&](Eigen::Index a, Eigen::Index b) { return values(a) > values(b); });

    const auto kk = static_cast<Eigen::Index>(k);
    EigenPairs out{Eigen::VectorXd(kk), Eigen::MatrixXd(n, kk)};
    for (Eigen::Index c = 0; c < kk; ++c) {
        const Eigen::Index src = rank[static_cast<std::size_t>(c)];
        out.values(c) = values(src);
        Eigen::VectorXd v = vectors.col(src);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (std::abs(v(i)) > 1e-12) {
                if (v(i) < 0.0) v = -v;
                break;
            }
        }
        out.vectors.col(c) = v;
    }
    return out;
}

SpectralEmbedding embed_rows(const Eigen::MatrixXd& vectors, std::size_t k) {
    const auto n = static_cast<std::size_t>(vectors.rows());
    if (k < 1 || k > static_cast<std::size_t>(vectors.cols())) throw InputError("embed_rows: k out of range");
    std::vector<double> coords(n * k, 0.0);
    std::vector<std::size_t> zero_rows;
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = vectors.row(static_cast<Eigen::Index>(i)).head(static_cast<Eigen::Index>(k));
        const double norm = row.norm();
        if (norm <= 1e-12) {
            zero_rows.push_back(i);
            continue;
        }
        for (std::size_t c = 0; c < k; ++c) coords[i * k + c] = row(static_cast<Eigen::Index>(c)) / norm;
    }
    return {FeatureMatrix(n, k, std::move(coords)), std::move(zero_rows)};
}

namespace {

EigenPairs leading_spectrum(const DissimilarityMatrix& m, const SpecVatConfig& cfg, std::size_t k) {
    return sym_eigen_topk(normalized_affinity(local_scale_affinity(m, cfg)), k);
}

SpecVatResult finish(const EigenPairs& spectrum, std::size_t k) {
    auto embedding = embed_rows(spectrum.vectors, k);
    auto d_prime = euclidean_dissim(embedding.coords);
    auto ordering = vat_order(d_prime);
    auto image = odi_from(d_prime, ordering);
    return SpecVatResult{std::move(embedding), spectrum.values.head(static_cast<Eigen::Index>(k)),
                         std::move(d_prime), std::move(ordering), std::move(image)};
}

}  // namespace

SpecVatResult specvat(const DissimilarityMatrix& m, const SpecVatConfig& cfg) {
    cfg.validate(m.size());
    return finish(leading_spectrum(m, cfg, cfg.k), cfg.k);
}

double odi_clarity(const OdImage& img) {
    try {
        return otsu(img.pixels()).separability();
    } catch (const NumericError&) {
        return 0.0;
    }
}

KSelection a_specvat_select_k(const DissimilarityMatrix& m, const SpecVatConfig& cfg) {
    const std::size_t n = m.size();
    if (n < 3) throw InputError("automatic k selection needs at least 3 points");
    if (cfg.k_max < 2) throw InputError("k_max must be >= 2");
    SpecVatConfig base = cfg;
    base.k = 1;
    base.validate(n);

    KSelection sel;
    std::size_t k_max = cfg.k_max;
    if (k_max > n - 1) {
        k_max = n - 1;
        sel.warnings.push_back("k_max reduced to " + std::to_string(k_max) + " (n - 1)");
    }

    bool constant_input = true;
    const double first = m(0, 1);
    for (std::size_t i = 0; i < n && constant_input; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (m(i, j) != first) {
                constant_input = false;
                break;
            }
    if (constant_input) {
        for (std::size_t k = 2; k <= k_max; ++k) sel.scores.emplace_back(k, 0.0);
        sel.k_best = 2;
        sel.degenerate = true;
        sel.warnings.push_back("all pairwise distances are equal; no structure to score, using k = 2");
        return sel;
    }

    const auto spectrum = leading_spectrum(m, base, k_max);
    double best = -1.0;
    for (std::size_t k = 2; k <= k_max; ++k) {
        const double score = odi_clarity(finish(spectrum, k).image);
        sel.scores.emplace_back(k, score);
        if (score > best) {
            best = score;
            sel.k_best = k;
        }
    }
    const bool all_equal = std::all_of(sel.scores.begin(), sel.scores.end(),
                                       [&](const auto& s) { return s.second == sel.scores.front().second; });
    if (all_equal) {
        sel.degenerate = true;
        sel.k_best = 2;
        sel.warnings.push_back("clarity score is identical for every k; using k = 2");
    }
    return sel;
}

std::string k_selection_to_json(const KSelection& sel) {
    nlohmann::json j;
    j["k_best"] = sel.k_best;
    auto scores = nlohmann::json::array();
    for (auto [k, s] : sel.scores) scores.push_back({{"k", k}, {"score", s}});
    j["scores"] = scores;
    j["degenerate"] = sel.degenerate;
    j["warnings"] = sel.warnings;
    return j.dump() + "\n";
}

}  // namespace vatscope
