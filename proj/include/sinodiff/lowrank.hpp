#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include "sinodiff/core.hpp"
#include "sinodiff/hankel.hpp"

namespace sinodiff {

struct RankSpec {
    int K         = 38;
    bool per_part = true;  // truncate the overlapped half-blocks before the global pass

    void validate() const { require(K >= 1 && K <= 64, "rank: K must be in [1, 64]"); }
};

inline void to_json(nlohmann::json& j, const RankSpec& r) {
    j = nlohmann::json{{"K", r.K}, {"per_part", r.per_part}};
}

inline void from_json(const nlohmann::json& j, RankSpec& r) {
    if (j.contains("K")) j.at("K").get_to(r.K);
    if (j.contains("per_part")) j.at("per_part").get_to(r.per_part);
    r.validate();
}

enum class SvdPath { Auto, Gram, Dense };

/// Frobenius-optimal rank-K approximation U_[K] D_[K] V_[K]^T. Tall-skinny
/// inputs go through the Gram-matrix eigendecomposition (the truncation is
/// then the projection M V_[K] V_[K]^T), everything else through a dense SVD.
inline Eigen::MatrixXd svd_hard_threshold(const Eigen::MatrixXd& m, int k,
                                          SvdPath path = SvdPath::Auto) {
    require(k >= 1, "svd_hard_threshold: K must be >= 1");
    require(m.rows() > 0 && m.cols() > 0, "svd_hard_threshold: empty matrix");
    const int kk = std::min<Index>(k, std::min(m.rows(), m.cols()));

    const bool gram = path == SvdPath::Gram ||
                      (path == SvdPath::Auto && m.rows() >= 4 * m.cols() && m.cols() <= 256);
    if (gram) {
        const Eigen::MatrixXd g = m.transpose() * m;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g);
        // Eigenvalues ascend; the top-K right singular vectors are the last K columns.
        const Eigen::MatrixXd vk = eig.eigenvectors().rightCols(kk);
        if (kk == m.cols()) return m;  // projection onto the full column space
        return m * vk * vk.transpose();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return svd.matrixU().leftCols(kk) * svd.singularValues().head(kk).asDiagonal() *
           svd.matrixV().leftCols(kk).transpose();
}

inline MatRM svd_hard_threshold(const MatRM& m, int k, SvdPath path = SvdPath::Auto) {
    return svd_hard_threshold(Eigen::MatrixXd(m), k, path);
}

/// One low-rank pass over a triple* partition. With per_part set, the four
/// overlapped half-blocks H1R, H3L, H2L, H3R are rank-K truncated, the
/// overlapping pairs averaged, the stitched matrix [H1L; avg; avg; H2R]
/// truncated once more globally. Without it, only the mean recombination and
/// the global truncation run.
inline HankelMatrix lr_step(const PartitionSet& ps, const RankSpec& spec) {
    spec.validate();
    MatRM stitched;
    if (spec.per_part) {
        const Index p   = ps.parent_rows;
        const Index m1  = ps.ranges[0].end;
        const Index h1l = ps.ranges[2].begin;
        const Index h1r_rows = m1 - h1l;
        const Index h2l_rows = ps.ranges[2].end - m1;
        const Index cols = ps.parts[0].cols();

        const MatRM t1r = svd_hard_threshold(MatRM(ps.parts[0].bottomRows(h1r_rows)), spec.K);
        const MatRM t3l = svd_hard_threshold(MatRM(ps.parts[2].topRows(h1r_rows)), spec.K);
        const MatRM t2l = svd_hard_threshold(MatRM(ps.parts[1].topRows(h2l_rows)), spec.K);
        const MatRM t3r = svd_hard_threshold(MatRM(ps.parts[2].bottomRows(h2l_rows)), spec.K);

        stitched.resize(p, cols);
        stitched.topRows(h1l)              = ps.parts[0].topRows(h1l);
        stitched.middleRows(h1l, h1r_rows) = (t1r + t3l) / 2.0;
        stitched.middleRows(m1, h2l_rows)  = (t2l + t3r) / 2.0;
        stitched.bottomRows(p - m1 - h2l_rows) = ps.parts[1].bottomRows(p - m1 - h2l_rows);
    } else {
        stitched = recombine(ps).values;
    }
    HankelMatrix out;
    out.src    = ps.src;
    out.values = svd_hard_threshold(stitched, spec.K);
    return out;
}

}  // namespace sinodiff
