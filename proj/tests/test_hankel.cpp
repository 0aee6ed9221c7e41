#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include "sinodiff/hankel.hpp"
#include "test_util.hpp"

using namespace sinodiff;

namespace {

Sinogram random_sinogram(int views, int dets, std::uint64_t seed) {
    Rng rng(seed);
    Sinogram s(views, dets);
    s.values = testutil::random_array(views, dets, rng);
    return s;
}

}  // namespace

TEST_CASE("hankel dimensions match the window sweep", "[hankel]") {
    // 5x5 sinogram, l = 3 -> 9x9
    const HankelMatrix h5 = hankel_transform(random_sinogram(5, 5, 1), 3);
    REQUIRE(h5.rows() == 9);
    REQUIRE(h5.cols() == 9);
    // full 768x768, l = 8 -> 579121x64
    const HankelMatrix hbig = hankel_transform(Sinogram(768, 768), 8);
    REQUIRE(hbig.rows() == 579121);
    REQUIRE(hbig.cols() == 64);
}

TEST_CASE("hankel row is the row-major window vectorization", "[hankel]") {
    Sinogram s(5, 5);
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 5; ++c) s.values(r, c) = 10.0 * r + c;
    const HankelMatrix h = hankel_transform(s, 3);
    // window position (1, 2) is row k = 1*3 + 2 = 5
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) REQUIRE(h.values(5, a * 3 + b) == 10.0 * (1 + a) + (2 + b));
}

TEST_CASE("single-window transform is the vectorized sinogram", "[hankel]") {
    const Sinogram s     = random_sinogram(8, 8, 2);
    const HankelMatrix h = hankel_transform(s, 8);
    REQUIRE(h.rows() == 1);
    REQUIRE(h.cols() == 64);
    for (int a = 0; a < 8; ++a)
        for (int b = 0; b < 8; ++b) REQUIRE(h.values(0, a * 8 + b) == s.values(a, b));
}

TEST_CASE("pinv inverts the transform exactly", "[hankel]") {
    const Sinogram s = random_sinogram(64, 64, 3);
    const Sinogram r = hankel_pinv(hankel_transform(s, 8));
    REQUIRE((r.values - s.values).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("pinv of a constant matrix is the constant sinogram", "[hankel]") {
    HankelMatrix h;
    h.src = {10, 12, 3};
    h.values.setConstant(h.src.rows(), h.src.cols(), 2.5);
    const Sinogram s = hankel_pinv(h);
    REQUIRE(((s.values - 2.5).abs() <= 1e-14).all());
}

TEST_CASE("single-entry perturbation spreads as delta over cover count", "[hankel]") {
    const Sinogram s = random_sinogram(12, 12, 4);
    const int l      = 3;
    HankelMatrix h   = hankel_transform(s, l);

    // perturb the entry of window (i,j)=(2,5), offset (a,b)=(1,2) -> pixel (3,7)
    const int wy = 12 - l + 1;
    const Index row = 2 * wy + 5;
    const Index col = 1 * l + 2;
    const double delta = 0.75;
    h.values(row, col) += delta;

    // independent enumeration of windows covering pixel (3, 7)
    int cover = 0;
    for (int i = 0; i <= 12 - l; ++i)
        for (int j = 0; j <= 12 - l; ++j)
            if (i <= 3 && 3 < i + l && j <= 7 && 7 < j + l) ++cover;

    const Sinogram r = hankel_pinv(h);
    for (int p = 0; p < 12; ++p) {
        for (int q = 0; q < 12; ++q) {
            const double expect = (p == 3 && q == 7) ? delta / cover : 0.0;
            REQUIRE(r.values(p, q) - s.values(p, q) == Catch::Approx(expect).margin(1e-12));
        }
    }
}

TEST_CASE("pinv is the least-squares inverse under overlap averaging", "[hankel]") {
    // dense oracle on 6x6 / l = 3: normal equations of the selection operator
    const int n = 6, l = 3, wn = n - l + 1;
    const Index p = wn * wn, cols = l * l, pixels = n * n;
    Rng rng(5);
    MatRM m = MatRM::Zero(p, cols);
    for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = rng.normal();

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p * cols, pixels);
    Eigen::VectorXd rhs(p * cols);
    for (int i = 0; i < wn; ++i)
        for (int j = 0; j < wn; ++j)
            for (int aa = 0; aa < l; ++aa)
                for (int bb = 0; bb < l; ++bb) {
                    const Index out = (i * wn + j) * cols + aa * l + bb;
                    a(out, (i + aa) * n + (j + bb)) = 1.0;
                    rhs(out) = m(i * wn + j, aa * l + bb);
                }
    const Eigen::VectorXd star = (a.transpose() * a).ldlt().solve(a.transpose() * rhs);

    HankelMatrix h;
    h.src    = {n, n, l};
    h.values = m;
    const Sinogram got = hankel_pinv(h);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            REQUIRE(got.values(r, c) == Catch::Approx(star(r * n + c)).margin(1e-10));
}

TEST_CASE("transform and pinv are linear", "[hankel]") {
    const Sinogram a = random_sinogram(10, 11, 6);
    const Sinogram b = random_sinogram(10, 11, 7);
    Sinogram mix(10, 11);
    mix.values = 2.0 * a.values - 3.0 * b.values;
    const HankelMatrix ha = hankel_transform(a, 3), hb = hankel_transform(b, 3);
    const HankelMatrix hm = hankel_transform(mix, 3);
    REQUIRE((hm.values - (2.0 * ha.values - 3.0 * hb.values)).cwiseAbs().maxCoeff() <= 1e-12);

    HankelMatrix lin;
    lin.src    = ha.src;
    lin.values = 2.0 * ha.values - 3.0 * hb.values;
    const Sinogram back = hankel_pinv(lin);
    REQUIRE((back.values - mix.values).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("triple* partition sizes at full scale", "[hankel]") {
    HankelMatrix h;
    h.src = {762, 762, 2};  // P = 761*761 = 579121 rows
    h.values.setZero(h.src.rows(), h.src.cols());
    REQUIRE(h.rows() == 579121);
    const PartitionSet ps = partition_triple_star(h);
    REQUIRE(ps.parts[0].rows() == 289560);
    REQUIRE(ps.parts[1].rows() == 289561);
    REQUIRE(ps.parts[2].rows() == 289560);
    REQUIRE(ps.ranges[2].begin == 144780);
    REQUIRE(ps.ranges[2].end == 434340);
}

TEST_CASE("triple* partition of nine rows", "[hankel]") {
    const Sinogram s      = random_sinogram(5, 5, 8);
    const PartitionSet ps = partition_triple_star(hankel_transform(s, 3));
    REQUIRE(ps.parts[0].rows() == 4);
    REQUIRE(ps.parts[1].rows() == 5);
    REQUIRE(ps.parts[2].rows() == 4);
    // H1L/H1R = 2/2 rows, H2L/H2R = 2/3 rows, part3 = global rows [2, 6)
    REQUIRE(ps.ranges[2].begin == 2);
    REQUIRE(ps.ranges[2].end == 6);
}

TEST_CASE("recombine of unmodified parts is bitwise identity", "[hankel]") {
    for (int n : {5, 64}) {  // P = 9 and P = 3249
        const Sinogram s     = random_sinogram(n, n, 9 + n);
        const HankelMatrix h = hankel_transform(s, n == 5 ? 3 : 8);
        const HankelMatrix r = recombine(partition_triple_star(h));
        REQUIRE((r.values.array() == h.values.array()).all());
    }
}

TEST_CASE("recombine averages the modified middle block", "[hankel]") {
    const Sinogram s     = random_sinogram(7, 7, 10);
    const HankelMatrix h = hankel_transform(s, 3);  // P = 25
    PartitionSet ps      = partition_triple_star(h);
    ps.parts[2].array() += 2.0;
    const HankelMatrix r = recombine(ps);
    const Index b = ps.ranges[2].begin, e = ps.ranges[2].end;
    for (Index row = 0; row < h.rows(); ++row) {
        const double shift = (row >= b && row < e) ? 1.0 : 0.0;  // mean of (v, v+2)
        for (Index col = 0; col < h.cols(); ++col)
            REQUIRE(r.values(row, col) == Catch::Approx(h.values(row, col) + shift).margin(1e-12));
    }
}

TEST_CASE("partition requires at least eight rows", "[hankel]") {
    HankelMatrix h;
    h.src = {3, 4, 2};  // P = 6
    h.values.setZero(6, 4);
    REQUIRE_THROWS_AS(partition_triple_star(h), std::invalid_argument);
}

TEST_CASE("inference tiling covers every row with an end-aligned remainder", "[hankel]") {
    MatRM part = MatRM::Zero(289560, 4);
    const PatchTensor t = tile_for_inference(part, 64);
    REQUIRE(t.patches.size() == 4525);  // 4524 aligned + 1 end-aligned overlap
    REQUIRE(t.origins[4523] == 4523 * 64);
    REQUIRE(t.origins[4524] == 289560 - 64);

    MatRM even = MatRM::Zero(128, 4);
    REQUIRE(tile_for_inference(even, 64).patches.size() == 2);
}

TEST_CASE("untile of unmodified tiles is the identity", "[hankel]") {
    Rng rng(12);
    MatRM part(150, 9);
    for (Index r = 0; r < part.rows(); ++r)
        for (Index c = 0; c < part.cols(); ++c) part(r, c) = rng.normal();
    const MatRM back = untile(tile_for_inference(part, 64), part.rows());
    REQUIRE((back.array() == part.array()).all());
}

TEST_CASE("extract_patches from an exact-size partition repeats the block", "[hankel]") {
    Rng rng(13);
    MatRM part(64, 9);
    for (Index r = 0; r < 64; ++r)
        for (Index c = 0; c < 9; ++c) part(r, c) = rng.normal();
    const PatchTensor t = extract_patches(part, 3, std::uint64_t(99), 64);
    REQUIRE(t.patches.size() == 3);
    for (const auto& p : t.patches) REQUIRE((p.array() == part.array()).all());
    for (Index o : t.origins) REQUIRE(o == 0);
}

TEST_CASE("extract_patches is seed-deterministic", "[hankel]") {
    MatRM part = MatRM::Zero(500, 4);
    const PatchTensor a = extract_patches(part, 20, std::uint64_t(7), 64);
    const PatchTensor b = extract_patches(part, 20, std::uint64_t(7), 64);
    REQUIRE(a.origins == b.origins);
}

TEST_CASE("patch offsets are uniform over the admissible range", "[hankel]") {
    // chi-square on 20 equal bins, 1e4 draws: critical value 36.19 at p = 0.01
    MatRM part = MatRM::Zero(1063, 4);  // span = 1000 offsets
    const PatchTensor t = extract_patches(part, 10000, std::uint64_t(21), 64);
    const Index span = part.rows() - 64 + 1;
    std::vector<int> counts(20, 0);
    for (Index o : t.origins) {
        REQUIRE(o >= 0);
        REQUIRE(o < span);
        ++counts[static_cast<std::size_t>(o * 20 / span)];
    }
    const double expect = 10000.0 / 20.0;
    double chi2 = 0.0;
    for (int c : counts) chi2 += (c - expect) * (c - expect) / expect;
    CAPTURE(chi2);
    REQUIRE(chi2 < 36.19);
}

TEST_CASE("consistency predicate distinguishes fresh from perturbed", "[hankel]") {
    const Sinogram s = random_sinogram(10, 10, 14);
    HankelMatrix h   = hankel_transform(s, 3);
    REQUIRE(is_consistent(h, 1e-14));
    h.values(5, 5) += 0.1;
    REQUIRE_FALSE(is_consistent(h, 1e-6));
}

TEST_CASE("window larger than the sinogram is rejected", "[hankel]") {
    REQUIRE_THROWS_AS(hankel_transform(Sinogram(5, 5), 6), std::invalid_argument);
    MatRM tiny = MatRM::Zero(10, 4);
    REQUIRE_THROWS_AS(tile_for_inference(tiny, 64), std::invalid_argument);
    REQUIRE_THROWS_AS(extract_patches(tiny, 2, std::uint64_t(1), 64), std::invalid_argument);
}

TEST_CASE("corrupted src_dims are rejected", "[hankel]") {
    HankelMatrix h;
    h.src = {10, 10, 3};
    h.values.setZero(63, 9);  // should be 64 rows
    REQUIRE_THROWS_AS(hankel_pinv(h), std::invalid_argument);
    h.values.setZero(64, 8);  // should be 9 cols
    REQUIRE_THROWS_AS(hankel_pinv(h), std::invalid_argument);
}
