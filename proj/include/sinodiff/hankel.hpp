#pragma once

#include <array>
#include <vector>

#include "sinodiff/core.hpp"

namespace sinodiff {

/// Dimensions a Hankel matrix was built from: an lx x ly sinogram swept by
/// an l x l window with stride 1.
struct SrcDims {
    int lx = 0;  // sinogram rows (views)
    int ly = 0;  // sinogram cols (detectors)
    int l  = 0;  // window size

    Index rows() const { return Index(lx - l + 1) * Index(ly - l + 1); }
    Index cols() const { return Index(l) * Index(l); }
};

/// Patch-row block-Hankel matrix: row k holds the row-major vectorization of
/// the window at position k, windows enumerated row-major over
/// (lx-l+1) x (ly-l+1) positions.
struct HankelMatrix {
    MatRM values;  // P x l^2
    SrcDims src;

    Index rows() const { return values.rows(); }
    Index cols() const { return values.cols(); }

    void validate() const {
        require(src.l >= 2 && src.lx >= src.l && src.ly >= src.l,
                "hankel: corrupted src_dims");
        require(values.rows() == src.rows() && values.cols() == src.cols(),
                "hankel: values inconsistent with src_dims");
    }
};

/// Half-open global row range [begin, end) within a parent Hankel matrix.
struct RowRange {
    Index begin = 0;
    Index end   = 0;
    Index size() const { return end - begin; }
};

/// The triple* partition: part 0 and 1 split the parent rows in half, part 2
/// is the exactly overlapping middle block [H1R; H2L].
struct PartitionSet {
    std::array<MatRM, 3> parts;
    std::array<RowRange, 3> ranges;
    Index parent_rows = 0;
    SrcDims src;
};

/// A stack of fixed-size row-window patches cut from one partition, with the
/// originating row offsets recorded for exact untiling.
struct PatchTensor {
    std::vector<MatRM> patches;
    std::vector<Index> origins;
    Index patch_rows = 0;
    Index patch_cols = 0;
};

inline HankelMatrix hankel_transform(const Sinogram& x, int l) {
    require(l >= 2, "hankel_transform: window must be >= 2");
    require(x.num_views >= l && x.num_detectors >= l,
            "hankel_transform: window larger than sinogram");
    const int wx = x.num_views - l + 1;
    const int wy = x.num_detectors - l + 1;
    HankelMatrix h;
    h.src = {x.num_views, x.num_detectors, l};
    h.values.resize(Index(wx) * Index(wy), Index(l) * Index(l));
    Index k = 0;
    for (int i = 0; i < wx; ++i) {
        for (int j = 0; j < wy; ++j, ++k) {
            for (int a = 0; a < l; ++a)
                for (int b = 0; b < l; ++b) h.values(k, a * l + b) = x.values(i + a, j + b);
        }
    }
    return h;
}

/// Number of windows covering position p along an axis of length n.
inline int window_cover_count(int p, int n, int l) {
    return std::min(p, n - l) - std::max(0, p - l + 1) + 1;
}

/// Pseudo-inverse of the Hankel transform: each sinogram pixel is the mean
/// of all matrix entries that map to it.
inline Sinogram hankel_pinv(const HankelMatrix& h) {
    h.validate();
    const int l  = h.src.l;
    const int wy = h.src.ly - l + 1;
    const int wx = h.src.lx - l + 1;
    Sinogram out(h.src.lx, h.src.ly);
    Index k = 0;
    for (int i = 0; i < wx; ++i) {
        for (int j = 0; j < wy; ++j, ++k) {
            for (int a = 0; a < l; ++a)
                for (int b = 0; b < l; ++b) out.values(i + a, j + b) += h.values(k, a * l + b);
        }
    }
    for (int p = 0; p < h.src.lx; ++p) {
        const double cx = window_cover_count(p, h.src.lx, l);
        for (int q = 0; q < h.src.ly; ++q) {
            out.values(p, q) /= cx * window_cover_count(q, h.src.ly, l);
        }
    }
    return out;
}

/// True when every pair of entries mapping to the same sinogram pixel agrees
/// to within tol, i.e. the matrix is in the range of hankel_transform.
inline bool is_consistent(const HankelMatrix& h, double tol = 0.0) {
    h.validate();
    const Sinogram x = hankel_pinv(h);
    const HankelMatrix round = hankel_transform(x, h.src.l);
    return ((round.values - h.values).array().abs() <= tol).all();
}

inline PartitionSet partition_triple_star(const HankelMatrix& h) {
    h.validate();
    const Index p = h.rows();
    require(p >= 8, "partition_triple_star: P must be >= 8");
    const Index m1  = p / 2;
    const Index m2  = p - m1;
    const Index h1l = m1 / 2;
    const Index h2l = m2 / 2;

    PartitionSet ps;
    ps.parent_rows = p;
    ps.src         = h.src;
    ps.ranges[0]   = {0, m1};
    ps.ranges[1]   = {m1, p};
    ps.ranges[2]   = {h1l, m1 + h2l};
    ps.parts[0]    = h.values.topRows(m1);
    ps.parts[1]    = h.values.bottomRows(m2);
    ps.parts[2]    = h.values.middleRows(h1l, ps.ranges[2].size());
    return ps;
}

/// Mean recombination of the triple* partition:
/// [H1L; (H1R+H3L)/2; (H2L+H3R)/2; H2R]. Unmodified parts reproduce the
/// parent bitwise.
inline HankelMatrix recombine(const PartitionSet& ps) {
    const Index p   = ps.parent_rows;
    const Index m1  = ps.ranges[0].end;
    const Index h1l = ps.ranges[2].begin;
    const Index h3_rows = ps.ranges[2].size();
    require(ps.ranges[0].begin == 0 && ps.ranges[1].end == p &&
                ps.ranges[1].begin == m1 && ps.ranges[2].end <= p,
            "recombine: inconsistent ranges");
    require(ps.parts[0].rows() == m1 && ps.parts[1].rows() == p - m1 &&
                ps.parts[2].rows() == h3_rows,
            "recombine: part row counts do not match ranges");
    const Index cols = ps.parts[0].cols();
    require(ps.parts[1].cols() == cols && ps.parts[2].cols() == cols,
            "recombine: column mismatch");

    const Index h1r_rows = m1 - h1l;            // rows of H1R == rows of H3L
    const Index h2l_rows = ps.ranges[2].end - m1;  // rows of H2L == rows of H3R

    HankelMatrix out;
    out.src = ps.src;
    out.values.resize(p, cols);
    out.values.topRows(h1l) = ps.parts[0].topRows(h1l);
    out.values.middleRows(h1l, h1r_rows) =
        (ps.parts[0].bottomRows(h1r_rows) + ps.parts[2].topRows(h1r_rows)) / 2.0;
    out.values.middleRows(m1, h2l_rows) =
        (ps.parts[1].topRows(h2l_rows) + ps.parts[2].bottomRows(h2l_rows)) / 2.0;
    out.values.bottomRows(p - m1 - h2l_rows) = ps.parts[1].bottomRows(p - m1 - h2l_rows);
    return out;
}

inline PatchTensor extract_patches(const MatRM& part, int count, Rng& rng,
                                   Index patch_rows = 64) {
    require(part.rows() >= patch_rows, "extract_patches: partition narrower than patch");
    require(count >= 1, "extract_patches: count must be >= 1");
    PatchTensor t;
    t.patch_rows = patch_rows;
    t.patch_cols = part.cols();
    t.patches.reserve(count);
    t.origins.reserve(count);
    const Index span = part.rows() - patch_rows + 1;
    for (int i = 0; i < count; ++i) {
        const Index off = static_cast<Index>(rng.below(static_cast<std::uint64_t>(span)));
        t.origins.push_back(off);
        t.patches.emplace_back(part.middleRows(off, patch_rows));
    }
    return t;
}

inline PatchTensor extract_patches(const MatRM& part, int count, std::uint64_t seed,
                                   Index patch_rows = 64) {
    Rng rng(seed);
    return extract_patches(part, count, rng, patch_rows);
}

/// Aligned tiles covering every row: floor(rows/patch_rows) aligned tiles
/// plus, when rows is not a multiple, one final tile aligned to the last row
/// (overlapping its predecessor).
inline PatchTensor tile_for_inference(const MatRM& part, Index patch_rows = 64) {
    require(part.rows() >= patch_rows, "tile_for_inference: fewer rows than one tile");
    PatchTensor t;
    t.patch_rows = patch_rows;
    t.patch_cols = part.cols();
    const Index full = part.rows() / patch_rows;
    for (Index i = 0; i < full; ++i) {
        t.origins.push_back(i * patch_rows);
        t.patches.emplace_back(part.middleRows(i * patch_rows, patch_rows));
    }
    if (part.rows() % patch_rows != 0) {
        const Index off = part.rows() - patch_rows;
        t.origins.push_back(off);
        t.patches.emplace_back(part.middleRows(off, patch_rows));
    }
    return t;
}

/// Inverse of tile_for_inference: rows covered by two tiles are averaged.
inline MatRM untile(const PatchTensor& t, Index rows) {
    require(!t.patches.empty(), "untile: empty tensor");
    MatRM sum = MatRM::Zero(rows, t.patch_cols);
    Eigen::VectorXd cover = Eigen::VectorXd::Zero(rows);
    for (std::size_t i = 0; i < t.patches.size(); ++i) {
        const Index off = t.origins[i];
        require(off >= 0 && off + t.patch_rows <= rows, "untile: origin out of range");
        sum.middleRows(off, t.patch_rows) += t.patches[i];
        cover.segment(off, t.patch_rows).array() += 1.0;
    }
    require((cover.array() > 0.0).all(), "untile: uncovered rows");
    return cover.array().inverse().matrix().asDiagonal() * sum;
}

}  // namespace sinodiff
