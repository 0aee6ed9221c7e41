#include <catch2/catch_amalgamated.hpp>

#include "sinodiff/fbp.hpp"
#include "sinodiff/phantom.hpp"
#include "sinodiff/projector.hpp"
#include "test_util.hpp"

using namespace sinodiff;

TEST_CASE("zero sinogram back-projects to the zero image", "[fbp]") {
    FanGeometry g;
    g.num_views     = 30;
    g.num_detectors = 64;
    g.image_size    = 32;
    g.pixel_spacing = 20.0 / 32;
    const Image img = fbp_reconstruct(Sinogram(30, 64), g);
    REQUIRE((img.values == 0.0).all());
    const Image img2 = fbp_reconstruct(radon_forward(Image(32, 32), g), g, "hann");
    REQUIRE((img2.values == 0.0).all());
}

TEST_CASE("fbp of the projected phantom recovers the interior", "[fbp]") {
    FanGeometry g;
    g.num_views     = 180;
    g.num_detectors = 256;
    g.image_size    = 128;
    g.pixel_spacing = 20.0 / 128;
    const Image ph  = make_phantom(128, {"shepp-logan", 1.0, -1.0});
    const Image rec = fbp_reconstruct(radon_forward(ph, g), g);
    REQUIRE(testutil::roi_psnr(ph.values, rec.values) >= 22.0);
}

TEST_CASE("roi psnr improves as views double", "[fbp]") {
    const Image ph = make_phantom(128, {"shepp-logan", 1.0, -1.0});
    double prev    = -1e9;
    for (int views : {90, 180, 360}) {
        FanGeometry g;
        g.num_views     = views;
        g.num_detectors = 256;
        g.image_size    = 128;
        g.pixel_spacing = 20.0 / 128;
        const double p = testutil::roi_psnr(ph.values, fbp_reconstruct(radon_forward(ph, g), g).values);
        CAPTURE(views, p);
        REQUIRE(p > prev);
        prev = p;
    }
}

TEST_CASE("fbp input validation", "[fbp]") {
    FanGeometry g;
    g.image_size = 32;
    REQUIRE_THROWS_AS(fbp_reconstruct(Sinogram(2, 2), g), std::invalid_argument);
    g.num_views     = 4;
    g.num_detectors = 8;
    REQUIRE_THROWS_AS(fbp_reconstruct(Sinogram(4, 8), g, "butterworth"), std::invalid_argument);
}
