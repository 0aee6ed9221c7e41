// Command-line front end: phantom generation, projection, low-dose
// simulation, prior training, iterative reconstruction, metrics and PNG
// export. Every run prints a single-line JSON run record to stdout.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <iostream>
#include <vector>

#include "sinodiff/core.hpp"
#include "sinodiff/fbp.hpp"
#include "sinodiff/geometry.hpp"
#include "sinodiff/hankel.hpp"
#include "sinodiff/io.hpp"
#include "sinodiff/metrics.hpp"
#include "sinodiff/noise.hpp"
#include "sinodiff/phantom.hpp"
#include "sinodiff/projector.hpp"
#include "sinodiff/sampler.hpp"
#include "sinodiff/score.hpp"

namespace {

using nlohmann::json;
using namespace sinodiff;

struct RunRecord {
    std::string command;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    json config;
    std::uint64_t seed = 0;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void emit() const {
        const double ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - start)
                              .count();
        json j{{"command", command},
               {"inputs", inputs},
               {"outputs", outputs},
               {"config_hash", config_hash(config)},
               {"seed", seed},
               {"timings_ms", json{{"total", ms}}}};
        std::cout << j.dump() << "\n";
    }
};

RunConfig load_run_config(const std::string& path) {
    RunConfig cfg;
    if (!path.empty()) {
        std::ifstream f(path);
        require_data(f.good(), "cannot open config: " + path);
        json j = json::parse(f);
        j.get_to(cfg);
    }
    return cfg;
}

void apply_preset(FanGeometry& g, const std::string& preset) {
    if (preset.empty()) return;
    const int size = g.image_size;
    if (preset == "desk")
        g = desk_geometry(size);
    else if (preset == "full-720x360")
        g = preset_720x360(size);
    else if (preset == "full-768x768")
        g = preset_768x768(size);
    else
        throw std::runtime_error("unknown preset: " + preset);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sinogram-domain diffusion toolkit for few-shot low-dose CT"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "run configuration JSON file")->expected(1);

    // ---- phantom ----------------------------------------------------------
    auto* cmd_phantom = app.add_subcommand("phantom", "generate an analytic phantom image");
    int ph_size = 256;
    std::string ph_kind = "shepp-logan", ph_out;
    double ph_value = 1.0, ph_radius = -1.0;
    cmd_phantom->add_option("--size", ph_size, "image size in pixels");
    cmd_phantom->add_option("--kind", ph_kind, "phantom kind")
        ->check(CLI::IsMember({"shepp-logan", "uniform-disk", "constant"}));
    cmd_phantom->add_option("--value", ph_value, "constant / disk value");
    cmd_phantom->add_option("--radius", ph_radius, "disk radius in pixels (default 0.5*size)");
    cmd_phantom->add_option("--out", ph_out, "output basename")->required();

    // ---- project ----------------------------------------------------------
    auto* cmd_project = app.add_subcommand("project", "fan-beam forward projection");
    std::string pr_image, pr_out, pr_preset;
    int pr_views = -1, pr_dets = -1;
    double pr_spacing = -1.0;
    cmd_project->add_option("--image", pr_image, "input image basename")->required();
    cmd_project->add_option("--out", pr_out, "output sinogram basename")->required();
    cmd_project->add_option("--preset", pr_preset, "geometry preset")
        ->check(CLI::IsMember({"desk", "full-720x360", "full-768x768"}));
    cmd_project->add_option("--views", pr_views, "number of projection views");
    cmd_project->add_option("--detectors", pr_dets, "number of detector bins");
    cmd_project->add_option("--pixel-spacing", pr_spacing, "pixel spacing in cm");

    // ---- lowdose ----------------------------------------------------------
    auto* cmd_lowdose = app.add_subcommand("lowdose", "simulate a low-dose acquisition");
    std::string ld_sino, ld_out;
    double ld_intensity = -1.0, ld_background = -1.0, ld_rescale = -1.0;
    std::uint64_t ld_seed = 0;
    bool ld_seed_set = false;
    cmd_lowdose->add_option("--sino", ld_sino, "input sinogram basename")->required();
    cmd_lowdose->add_option("--out", ld_out, "output basename")->required();
    cmd_lowdose->add_option("--intensity", ld_intensity, "photons per ray (e.g. 1e5, 5e4, 1e4)");
    cmd_lowdose->add_option("--background", ld_background, "expected background counts");
    cmd_lowdose->add_option("--rescale-max", ld_rescale,
                            "scale input so its max line integral equals this (0 disables)");
    cmd_lowdose->add_option("--seed", ld_seed, "master seed")->each([&](const std::string&) {
        ld_seed_set = true;
    });

    // ---- train ------------------------------------------------------------
    auto* cmd_train = app.add_subcommand("train", "train the three partition score models");
    std::vector<std::string> tr_sinos;
    std::string tr_out;
    int tr_steps = -1, tr_batch = -1, tr_hidden = -1, tr_levels = -1, tr_window = -1,
        tr_patch_rows = -1, tr_ppe = -1;
    double tr_lr = -1.0, tr_smin = -1.0, tr_smax = -1.0;
    std::uint64_t tr_seed = 0;
    bool tr_seed_set = false;
    cmd_train->add_option("--sino", tr_sinos, "training sinogram basenames (1-50 shots)")
        ->required()
        ->expected(-1);
    cmd_train->add_option("--out", tr_out, "output checkpoint prefix")->required();
    cmd_train->add_option("--steps", tr_steps, "total optimization steps");
    cmd_train->add_option("--batch", tr_batch, "patches per step");
    cmd_train->add_option("--lr", tr_lr, "Adam learning rate");
    cmd_train->add_option("--hidden", tr_hidden, "hidden layer width");
    cmd_train->add_option("--patches-per-epoch", tr_ppe, "patch pool size per epoch");
    cmd_train->add_option("--sigma-min", tr_smin, "training schedule sigma_min");
    cmd_train->add_option("--sigma-max", tr_smax, "training schedule sigma_max");
    cmd_train->add_option("--levels", tr_levels, "training schedule level count");
    cmd_train->add_option("--window", tr_window, "Hankel window l");
    cmd_train->add_option("--patch-rows", tr_patch_rows, "patch rows");
    cmd_train->add_option("--seed", tr_seed, "master seed")->each([&](const std::string&) {
        tr_seed_set = true;
    });

    // ---- reconstruct ------------------------------------------------------
    auto* cmd_recon = app.add_subcommand("reconstruct", "iterative sinogram reconstruction + FBP");
    std::string rc_lowdose, rc_models, rc_out, rc_ref, rc_filter = "ram-lak", rc_dump_hankel;
    int rc_iters = -1, rc_correctors = -1, rc_k = -1, rc_tv_iters = -1, rc_image_size = -1;
    double rc_lambda = -1.0, rc_snr = -1.0, rc_alpha = -1.0, rc_smin = -1.0, rc_smax = -1.0,
           rc_intensity = -1.0, rc_eta = -1.0, rc_spacing = -1.0;
    std::uint64_t rc_seed = 0;
    bool rc_seed_set = false;
    int rc_per_part = -1;
    cmd_recon->add_option("--lowdose", rc_lowdose, "low-dose sinogram basename")->required();
    cmd_recon->add_option("--models", rc_models, "model checkpoint prefix")->required();
    cmd_recon->add_option("--out", rc_out, "output prefix")->required();
    cmd_recon->add_option("--ref", rc_ref, "clean sinogram basename for per-iteration PSNR");
    cmd_recon->add_option("--iters", rc_iters, "outer iterations N");
    cmd_recon->add_option("--correctors", rc_correctors, "corrector iterations M");
    cmd_recon->add_option("--K", rc_k, "retained rank");
    cmd_recon->add_option("--per-part", rc_per_part, "half-block truncation before global (0/1)");
    cmd_recon->add_option("--lambda", rc_lambda, "data-consistency blend weight");
    cmd_recon->add_option("--snr", rc_snr, "Langevin step-size ratio");
    cmd_recon->add_option("--tv-alpha", rc_alpha, "TV step factor");
    cmd_recon->add_option("--tv-iters", rc_tv_iters, "TV inner iterations");
    cmd_recon->add_option("--sigma-min", rc_smin, "sampling schedule sigma_min");
    cmd_recon->add_option("--sigma-max", rc_smax, "sampling schedule sigma_max");
    cmd_recon->add_option("--intensity", rc_intensity, "photons per ray for the PWLS weights");
    cmd_recon->add_option("--eta", rc_eta, "PWLS calibration constant");
    cmd_recon->add_option("--image-size", rc_image_size, "FBP image size in pixels");
    cmd_recon->add_option("--pixel-spacing", rc_spacing, "FBP pixel spacing in cm");
    cmd_recon->add_option("--filter", rc_filter, "FBP filter")
        ->check(CLI::IsMember({"ram-lak", "hann"}));
    cmd_recon->add_option("--dump-hankel", rc_dump_hankel,
                          "debug: dump the Hankel matrix of the input to this basename");
    cmd_recon->add_option("--seed", rc_seed, "master seed")->each([&](const std::string&) {
        rc_seed_set = true;
    });

    // ---- metrics ----------------------------------------------------------
    auto* cmd_metrics = app.add_subcommand("metrics", "PSNR / SSIM / MSE between two arrays");
    std::string mt_ref, mt_test;
    cmd_metrics->add_option("--ref", mt_ref, "reference basename")->required();
    cmd_metrics->add_option("--test", mt_test, "test basename")->required();

    // ---- export-png -------------------------------------------------------
    auto* cmd_png = app.add_subcommand("export-png", "16-bit grayscale PNG with display window");
    std::string xp_in, xp_out;
    double xp_low = 0.0, xp_high = 1.0;
    cmd_png->add_option("--in", xp_in, "input basename")->required();
    cmd_png->add_option("--out", xp_out, "output PNG path")->required();
    cmd_png->add_option("--low", xp_low, "window lower bound")->required();
    cmd_png->add_option("--high", xp_high, "window upper bound")->required();

    // ---- defaults ---------------------------------------------------------
    auto* cmd_defaults = app.add_subcommand("defaults", "print the full default run configuration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        RunConfig cfg = load_run_config(config_path);
        RunRecord rec;

        if (*cmd_defaults) {
            std::cout << json(RunConfig{}).dump(2) << "\n";
            return 0;
        }

        if (*cmd_phantom) {
            rec.command = "phantom";
            PhantomSpec spec;
            spec.kind   = ph_kind;
            spec.value  = ph_value;
            spec.radius = ph_radius;
            const Image img = make_phantom(ph_size, spec);
            save_image(ph_out, img);
            rec.outputs = {ph_out + ".raw", ph_out + ".json"};
            rec.config  = json{{"size", ph_size}, {"kind", ph_kind}, {"value", ph_value},
                               {"radius", ph_radius}};
            rec.emit();
            return 0;
        }

        if (*cmd_project) {
            rec.command = "project";
            const RawArray raw = load_raw(pr_image);
            const Image img    = as_image(raw);
            FanGeometry geom = cfg.geometry;
            if (geom.image_size != img.width) {  // geometry not configured for this image
                geom.image_size    = img.width;
                geom.pixel_spacing = 20.0 / img.width;
            }
            apply_preset(geom, pr_preset);
            if (pr_views > 0) geom.num_views = pr_views;
            if (pr_dets > 0) geom.num_detectors = pr_dets;
            if (pr_spacing > 0) geom.pixel_spacing = pr_spacing;
            const Sinogram sino = radon_forward(img, geom);
            save_sinogram(pr_out, sino, raw.scale);
            rec.inputs  = {pr_image + ".raw"};
            rec.outputs = {pr_out + ".raw", pr_out + ".json"};
            rec.config  = json{{"geometry", geom}};
            rec.emit();
            return 0;
        }

        if (*cmd_lowdose) {
            rec.command = "lowdose";
            const RawArray raw = load_raw(ld_sino);
            Sinogram x         = as_sinogram(raw);
            DoseSpec dose      = cfg.dose;
            if (ld_intensity > 0) dose.source_intensity = ld_intensity;
            if (ld_background >= 0) dose.background = ld_background;
            const std::uint64_t master = ld_seed_set ? ld_seed : cfg.seed;
            dose.seed                  = Rng::derive(master, "noise");
            double rescale             = ld_rescale >= 0 ? ld_rescale : cfg.rescale_max;
            double scale               = raw.scale;
            if (rescale > 0) scale *= rescale_to_max(x, rescale);
            const Sinogram y = simulate_low_dose(x, dose);
            nlohmann::json extra{{"dose", dose}};
            save_raw(ld_out, y.values, "sinogram", scale, extra);
            rec.inputs  = {ld_sino + ".raw"};
            rec.outputs = {ld_out + ".raw", ld_out + ".json"};
            rec.seed    = master;
            rec.config  = json{{"dose", dose}, {"rescale_max", rescale}};
            rec.emit();
            return 0;
        }

        if (*cmd_train) {
            rec.command = "train";
            std::vector<Sinogram> shots;
            for (const std::string& base : tr_sinos) {
                shots.push_back(as_sinogram(load_raw(base)));
                rec.inputs.push_back(base + ".raw");
            }
            TrainConfig tcfg = cfg.train;
            if (tr_steps >= 0) tcfg.total_steps = tr_steps;
            if (tr_batch > 0) tcfg.batch_size = tr_batch;
            if (tr_lr > 0) tcfg.learning_rate = tr_lr;
            if (tr_hidden > 0) tcfg.hidden_dim = tr_hidden;
            if (tr_ppe > 0) tcfg.patches_per_epoch = tr_ppe;
            const std::uint64_t master = tr_seed_set ? tr_seed : cfg.seed;
            tcfg.seed                  = Rng::derive(master, "training");
            ScheduleSpec sspec         = cfg.train_schedule;
            if (tr_levels > 0) sspec.levels = tr_levels;
            if (tr_smin > 0) sspec.sigma_min = tr_smin;
            if (tr_smax > 0) sspec.sigma_max = tr_smax;
            const int window     = tr_window > 0 ? tr_window : cfg.window;
            const int patch_rows = tr_patch_rows > 0 ? tr_patch_rows : cfg.patch_rows;

            const auto models = train(shots, tcfg, sspec.build(), window, patch_rows);
            for (int p = 0; p < 3; ++p) {
                const std::string base = tr_out + "_p" + std::to_string(p);
                save_model(models[p], base);
                rec.outputs.push_back(base + ".bin");
                rec.outputs.push_back(base + ".json");
            }
            rec.seed   = master;
            rec.config = json{{"train", tcfg}, {"train_schedule", sspec},
                              {"window", window}, {"patch_rows", patch_rows}};
            rec.emit();
            return 0;
        }

        if (*cmd_recon) {
            rec.command = "reconstruct";
            const RawArray raw = load_raw(rc_lowdose);
            const Sinogram y   = as_sinogram(raw);
            rec.inputs         = {rc_lowdose + ".raw"};

            PartitionModels models;
            for (int p = 0; p < 3; ++p) {
                const std::string base = rc_models + "_p" + std::to_string(p);
                models[p]              = load_model(base);
                rec.inputs.push_back(base + ".bin");
            }

            ReconConfig rcfg = cfg.recon;
            if (rc_iters >= 0) rcfg.outer_iters = rc_iters;
            if (rc_correctors >= 0) rcfg.corrector_iters = rc_correctors;
            if (rc_k > 0) rcfg.rank.K = rc_k;
            if (rc_per_part >= 0) rcfg.rank.per_part = rc_per_part != 0;
            if (rc_lambda >= 0) rcfg.lambda_dc = rc_lambda;
            if (rc_snr > 0) rcfg.corrector_snr = rc_snr;
            if (rc_alpha >= 0) rcfg.tv.alpha = rc_alpha;
            if (rc_tv_iters >= 0) rcfg.tv.iters = rc_tv_iters;
            if (rc_smin > 0) rcfg.schedule.sigma_min = rc_smin;
            if (rc_smax > 0) rcfg.schedule.sigma_max = rc_smax;
            rcfg.schedule.levels       = rcfg.outer_iters + 1;
            const std::uint64_t master = rc_seed_set ? rc_seed : cfg.seed;
            rcfg.seed                  = Rng::derive(master, "sampling");

            DoseSpec dose = cfg.dose;
            if (raw.sidecar.contains("dose")) raw.sidecar.at("dose").get_to(dose);
            if (rc_intensity > 0) dose.source_intensity = rc_intensity;  // flag wins
            const double eta   = rc_eta > 0 ? rc_eta : cfg.eta;
            const WeightMap w  = pwls_weights(y, dose, eta);

            FanGeometry geom = cfg.geometry;
            geom.num_views     = y.num_views;
            geom.num_detectors = y.num_detectors;
            if (rc_image_size > 0) {
                geom.image_size    = rc_image_size;
                geom.pixel_spacing = 20.0 / rc_image_size;
            }
            if (rc_spacing > 0) geom.pixel_spacing = rc_spacing;

            if (!rc_dump_hankel.empty()) {
                Sinogram yn = y;
                yn.values /= models[0].normalization_scale;
                save_hankel(rc_dump_hankel, hankel_transform(yn, models[0].window), raw.scale);
                rec.outputs.push_back(rc_dump_hankel + ".raw");
                rec.outputs.push_back(rc_dump_hankel + ".json");
            }

            ReconCallback callback;
            Sinogram ref;
            if (!rc_ref.empty()) {
                const RawArray rref = load_raw(rc_ref);
                ref                 = as_sinogram(rref);
                require_data(rref.scale > 0, "reconstruct: reference has non-positive scale");
                ref.values *= raw.scale / rref.scale;  // bring reference into y's units
                rec.inputs.push_back(rc_ref + ".raw");
                callback = [&](int i, const Sinogram& x) {
                    std::cout << json{{"iter", i}, {"psnr", psnr(ref, x)}}.dump() << "\n";
                };
            }

            const auto [x_out, img] = reconstruct(y, models, w, geom, rcfg, callback, rc_filter);
            save_sinogram(rc_out + "_sino", x_out, raw.scale);
            save_image(rc_out + "_img", img, raw.scale);
            rec.outputs.push_back(rc_out + "_sino.raw");
            rec.outputs.push_back(rc_out + "_img.raw");
            rec.seed   = master;
            rec.config = json{{"recon", rcfg}, {"dose", dose}, {"eta", eta}, {"geometry", geom},
                              {"filter", rc_filter}};
            rec.emit();
            return 0;
        }

        if (*cmd_metrics) {
            rec.command = "metrics";
            const RawArray a = load_raw(mt_ref);
            const RawArray b = load_raw(mt_test);
            require_data(a.scale > 0 && b.scale > 0, "metrics: non-positive scale");
            const ArrayRM ref  = a.values / a.scale;  // compare in physical units
            const ArrayRM test = b.values / b.scale;
            json out           = compute_metrics(ref, test);
            out["domain"]      = a.kind == b.kind ? a.kind : "mixed";
            std::cout << out.dump() << "\n";
            rec.inputs = {mt_ref + ".raw", mt_test + ".raw"};
            rec.config = json{{"ref", mt_ref}, {"test", mt_test}};
            rec.emit();
            return 0;
        }

        if (*cmd_png) {
            rec.command = "export-png";
            const RawArray raw = load_raw(xp_in);
            export_png(xp_out, raw.values, xp_low, xp_high);
            rec.inputs  = {xp_in + ".raw"};
            rec.outputs = {xp_out};
            rec.config  = json{{"low", xp_low}, {"high", xp_high}};
            rec.emit();
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
