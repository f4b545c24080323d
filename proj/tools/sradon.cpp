// Command-line front end: simulation, inversion, diagnostics and experiments.

#include <cmath>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sradon/experiment.hpp"
#include "sradon/io.hpp"

using namespace sradon;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitThreshold = 4;

struct NumericFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template<class F>
decltype(auto) with_dim(int n, F&& fn) {
    switch (n) {
        case 2: return fn(std::integral_constant<int, 2>{});
        case 3: return fn(std::integral_constant<int, 3>{});
        default: throw ConfigError("dimension " + std::to_string(n) + " is not supported (n = 2, 3)");
    }
}

std::vector<double> parse_list(std::string const& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (std::exception const&) {
            throw ConfigError("cannot parse number '" + item + "'");
        }
    }
    return out;
}

template<int N>
Vec<N> parse_point(std::string const& s) {
    auto const v = parse_list(s);
    if (v.size() != N) throw ConfigError("expected " + std::to_string(N) + " comma-separated values, got '" + s + "'");
    return from_vector<N>(v);
}

template<int N>
GridSpec<N> parse_box(std::string const& box, std::size_t size, Surface<N> const& s, Phantom<N> const* f) {
    if (box == "auto") return auto_box(s, size, f);
    auto const v = parse_list(box);
    if (v.size() != 2 * N) throw ConfigError("--box needs 'auto' or 2n comma-separated values lo..., hi...");
    GridSpec<N> g;
    for (int a = 0; a < N; ++a) {
        g.lo[a] = v[static_cast<std::size_t>(a)];
        g.hi[a] = v[static_cast<std::size_t>(a + N)];
    }
    g.dims.fill(size);
    g.validate();
    return g;
}

template<int N>
void require_finite(ImageGrid<N> const& img) {
    for (double v : img.values)
        if (!std::isfinite(v)) throw NumericFailure("reconstruction produced non-finite values");
}

int phantom_dimension(json const& j) {
    if (j.contains("n")) return j.at("n").get<int>();
    auto const& terms = detail::require(j, "terms");
    if (terms.empty()) throw ConfigError("empty phantom needs an explicit 'n'");
    return static_cast<int>(detail::require(terms.at(0), "center").size());
}

template<int N>
Phantom<N> phantom_from_metadata(Sinogram<N> const& s) {
    if (!s.metadata.contains("phantom")) return {};
    return phantom_from_json<N>(s.metadata.at("phantom"));
}

void write_pgm_if(std::string const& path, ImageGrid<2> const& img) {
    if (!path.empty()) write_file(path, export_pgm(img));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spherical Radon transform toolkit"};
    app.require_subcommand(1);
    unsigned workers = 1;
    app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);

    // phantom
    auto* phantom_cmd = app.add_subcommand("phantom", "rasterize a phantom");
    std::string ph_spec, ph_out, ph_box = "auto", ph_surface, ph_pgm;
    std::size_t ph_grid = 256;
    phantom_cmd->add_option("--spec", ph_spec, "phantom JSON")->required();
    phantom_cmd->add_option("--surface", ph_surface, "surface JSON (for --box auto)");
    phantom_cmd->add_option("--grid", ph_grid, "cells per axis");
    phantom_cmd->add_option("--box", ph_box, "'auto' or lo...,hi...");
    phantom_cmd->add_option("--out", ph_out, "image file (.smi)")->required();
    phantom_cmd->add_option("--pgm", ph_pgm, "also export a 16-bit PGM (2-D)");

    // forward
    auto* forward_cmd = app.add_subcommand("forward", "simulate spherical-mean data");
    std::string fw_phantom, fw_surface, fw_out, fw_centers = "256";
    std::size_t fw_radii = 400;
    double fw_rmax = 0, fw_noise = 0;
    int fw_nodes = 64;
    std::uint64_t fw_seed = 0;
    forward_cmd->add_option("--phantom", fw_phantom, "phantom JSON")->required();
    forward_cmd->add_option("--surface", fw_surface, "surface JSON")->required();
    forward_cmd->add_option("--centers", fw_centers, "centers per chart parameter (k or k1,k2)");
    forward_cmd->add_option("--radii", fw_radii, "radius samples");
    forward_cmd->add_option("--rmax", fw_rmax, "largest radius")->required();
    forward_cmd->add_option("--nodes", fw_nodes, "quadrature nodes per sphere");
    forward_cmd->add_option("--noise", fw_noise, "additive Gaussian noise level");
    forward_cmd->add_option("--seed", fw_seed, "noise seed");
    forward_cmd->add_option("--out", fw_out, "sinogram file (.smr)")->required();

    // filter
    auto* filter_cmd = app.add_subcommand("filter", "apply the radial filter");
    std::string fi_in, fi_out;
    int fi_n = 0;
    filter_cmd->add_option("--in", fi_in, "sinogram")->required();
    filter_cmd->add_option("--n", fi_n, "dimension (must match the sinogram)");
    filter_cmd->add_option("--out", fi_out, "filtered sinogram")->required();

    // reconstruct / reconstruct-partial
    auto* recon_cmd = app.add_subcommand("reconstruct", "filtered back-projection");
    auto* partial_cmd = app.add_subcommand("reconstruct-partial", "apply cut-offs, then reconstruct");
    std::string rc_in, rc_out, rc_box = "auto", rc_cut, rc_pgm, rc_phantom;
    std::size_t rc_grid = 256;
    bool rc_calibration = false;
    for (auto* cmd : {recon_cmd, partial_cmd}) {
        cmd->add_option("--in", rc_in, "sinogram (raw or filtered)")->required();
        cmd->add_option("--grid", rc_grid, "cells per axis");
        cmd->add_option("--box", rc_box, "'auto' or lo...,hi...");
        cmd->add_option("--phantom", rc_phantom, "phantom JSON (auto box on unbounded surfaces)");
        cmd->add_option("--out", rc_out, "image file (.smi)")->required();
        cmd->add_option("--pgm", rc_pgm, "also export a 16-bit PGM (2-D)");
        cmd->add_flag("--calibration", rc_calibration, "report the reference-bump amplitude ratio");
    }
    partial_cmd->add_option("--cut", rc_cut, "cut-off JSON")->required();

    // visible-zone
    auto* vz_cmd = app.add_subcommand("visible-zone", "visibility mask over an image grid");
    std::string vz_surface, vz_cut, vz_out, vz_box = "auto";
    std::size_t vz_grid = 128, vz_dirs = 16;
    vz_cmd->add_option("--surface", vz_surface, "surface JSON")->required();
    vz_cmd->add_option("--cut", vz_cut, "cut-off JSON")->required();
    vz_cmd->add_option("--grid", vz_grid, "cells per axis");
    vz_cmd->add_option("--box", vz_box, "'auto' (bounded surfaces) or lo...,hi...");
    vz_cmd->add_option("--dirs", vz_dirs, "probe directions");
    vz_cmd->add_option("--out", vz_out, "mask file")->required();

    // symbol-check
    auto* sym_cmd = app.add_subcommand("symbol-check", "correction-symbol report at one point");
    std::string sc_surface, sc_x, sc_xi, sc_cut, sc_report;
    int sc_kmax = 4;
    sym_cmd->add_option("--surface", sc_surface, "surface JSON")->required();
    sym_cmd->add_option("--x", sc_x, "point in Omega")->required();
    sym_cmd->add_option("--xi", sc_xi, "covector direction (default e_1 + e_n)");
    sym_cmd->add_option("--kmax", sc_kmax, "largest correction order");
    sym_cmd->add_option("--cut", sc_cut, "cut-off JSON (default full data)");
    sym_cmd->add_option("--report", sc_report, "report file (default stdout)");

    // oracle
    auto* oracle_cmd = app.add_subcommand("oracle", "quadrature vs Monte-Carlo sphere integral");
    std::string or_phantom, or_z;
    double or_r = 0;
    std::size_t or_samples = 1000000;
    std::uint64_t or_seed = 0;
    oracle_cmd->add_option("--phantom", or_phantom, "phantom JSON")->required();
    oracle_cmd->add_option("--z", or_z, "sphere center")->required();
    oracle_cmd->add_option("--r", or_r, "sphere radius")->required();
    oracle_cmd->add_option("--samples", or_samples, "Monte-Carlo samples");
    oracle_cmd->add_option("--seed", or_seed, "Monte-Carlo seed");

    // profile
    auto* profile_cmd = app.add_subcommand("profile", "CSV line profile of a 2-D image");
    std::string pr_in, pr_p0, pr_p1, pr_out;
    std::size_t pr_samples = 200;
    profile_cmd->add_option("--in", pr_in, "image file")->required();
    profile_cmd->add_option("--p0", pr_p0, "start point")->required();
    profile_cmd->add_option("--p1", pr_p1, "end point")->required();
    profile_cmd->add_option("--samples", pr_samples, "samples");
    profile_cmd->add_option("--out", pr_out, "CSV file (default stdout)");

    // run
    auto* run_cmd = app.add_subcommand("run", "config-driven experiment");
    std::string run_config, run_report;
    bool run_check = false;
    run_cmd->add_option("--config", run_config, "experiment JSON")->required();
    run_cmd->add_option("--report", run_report, "report file (default stdout)");
    run_cmd->add_flag("--check", run_check, "exit 4 when a threshold in config.check fails");

    try {
        app.parse(argc, argv);
    } catch (CLI::ParseError const& e) {
        int const code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*phantom_cmd) {
            json const pj = read_json_file(ph_spec);
            with_dim(phantom_dimension(pj), [&](auto dim) {
                constexpr int N = decltype(dim)::value;
                auto const f = phantom_from_json<N>(pj);
                auto const s = ph_surface.empty() ? Surface<N>::hyperplane() : surface_from_json<N>(read_json_file(ph_surface));
                auto const img = rasterize(f, parse_box<N>(ph_box, ph_grid, s, &f));
                write_file(ph_out, encode_container(to_container(img)));
                if constexpr (N == 2) write_pgm_if(ph_pgm, img);
            });
        } else if (*forward_cmd) {
            json const sj = read_json_file(fw_surface);
            json const pj = read_json_file(fw_phantom);
            with_dim(surface_dimension(sj), [&](auto dim) {
                constexpr int N = decltype(dim)::value;
                auto const s = surface_from_json<N>(sj);
                auto const f = phantom_from_json<N>(pj);
                auto counts = parse_list(fw_centers);
                if (counts.size() == 1) counts.assign(N - 1, counts[0]);
                std::vector<std::size_t> res;
                for (double c : counts) res.push_back(static_cast<std::size_t>(c));
                auto const q = surface_quadrature(s, patch_from_json(sj, s), res);
                auto sino = forward_sinogram(f, s, q, radius_grid(fw_rmax, fw_radii), {fw_nodes, workers});
                if (fw_noise > 0) add_gaussian_noise(sino, fw_noise, fw_seed);
                sino.metadata["phantom"] = to_json(f);
                write_file(fw_out, encode_container(to_container(sino)));
            });
        } else if (*filter_cmd) {
            auto const c = decode_container(read_file(fi_in));
            int const n = surface_dimension(detail::require(c.header, "surface"));
            if (fi_n != 0 && fi_n != n) throw ConfigError("--n does not match the sinogram dimension");
            with_dim(n, [&](auto dim) {
                constexpr int N = decltype(dim)::value;
                auto const f = filter_sinogram(sinogram_from_container<N>(c), {workers});
                write_file(fi_out, encode_container(to_container(f)));
            });
        } else if (*recon_cmd || *partial_cmd) {
            auto const c = decode_container(read_file(rc_in));
            with_dim(surface_dimension(detail::require(c.header, "surface")), [&](auto dim) {
                constexpr int N = decltype(dim)::value;
                auto sino = sinogram_from_container<N>(c);
                Phantom<N> f = rc_phantom.empty() ? phantom_from_metadata(sino)
                                                  : phantom_from_json<N>(read_json_file(rc_phantom));
                auto const grid = parse_box<N>(rc_box, rc_grid, sino.surface, &f);
                if (*partial_cmd) sino = apply_cutoffs(std::move(sino), cutoff_from_json(read_json_file(rc_cut)));
                ImageGrid<N> img;
                if (sino.filter) {
                    img = backproject(sino, grid, {workers, 1e-3});
                } else {
                    img = reconstruct(sino, grid, {workers, 1e-3});
                }
                require_finite(img);
                if (rc_calibration) {
                    if (sino.filter) throw ConfigError("--calibration needs a raw sinogram");
                    double const ratio = calibration_ratio(sino, grid, workers);
                    img.provenance["calibration_ratio"] = ratio;
                    std::cout << json{{"calibration_ratio", ratio}}.dump() << "\n";
                }
                write_file(rc_out, encode_container(to_container(img)));
                if constexpr (N == 2) write_pgm_if(rc_pgm, img);
            });
        } else if (*vz_cmd) {
            json const sj = read_json_file(vz_surface);
            auto const cut = cutoff_from_json(read_json_file(vz_cut));
            with_dim(surface_dimension(sj), [&](auto dim) {
                constexpr int N = decltype(dim)::value;
                auto const s = surface_from_json<N>(sj);
                auto const grid = parse_box<N>(vz_box, vz_grid, s, nullptr);
                auto const vz = visible_zone_mask(grid, probe_directions<N>(vz_dirs), s, cut, workers);
                write_file(vz_out, encode_container(to_container(vz)));
            });
        } else if (*sym_cmd) {
            json const sj = read_json_file(sc_surface);
            auto const cut = sc_cut.empty() ? CutoffSpec::full() : cutoff_from_json(read_json_file(sc_cut));
            std::string const text = with_dim(surface_dimension(sj), [&](auto dim) {
                constexpr int N = decltype(dim)::value;
                auto const s = surface_from_json<N>(sj);
                Vec<N> xi = Vec<N>::unit(0) + Vec<N>::unit(N - 1);
                if (!sc_xi.empty()) xi = parse_point<N>(sc_xi);
                auto const rep = partial_symbol_probe(parse_point<N>(sc_x), xi, sc_kmax, s, cut);
                json j = to_json(rep);
                j["surface"] = to_json(s);
                return j.dump(2) + "\n";
            });
            if (sc_report.empty()) std::cout << text;
            else write_file(sc_report, text);
        } else if (*oracle_cmd) {
            json const pj = read_json_file(or_phantom);
            with_dim(phantom_dimension(pj), [&](auto dim) {
                constexpr int N = decltype(dim)::value;
                auto const f = phantom_from_json<N>(pj);
                auto const z = parse_point<N>(or_z);
                double const q = sphere_integral(f, z, or_r);
                auto const mc = mc_sphere_integral(f, z, or_r, or_samples, or_seed);
                std::cout << json{{"quadrature", q}, {"monte_carlo", mc.estimate}, {"standard_error", mc.standard_error},
                                  {"difference", q - mc.estimate}}
                                 .dump(2)
                          << "\n";
            });
        } else if (*profile_cmd) {
            auto const img = image_from_container<2>(decode_container(read_file(pr_in)));
            auto const text = profile_csv(line_profile(img, parse_point<2>(pr_p0), parse_point<2>(pr_p1), pr_samples));
            if (pr_out.empty()) std::cout << text;
            else write_file(pr_out, text);
        } else if (*run_cmd) {
            json const cfg = read_json_file(run_config);
            int failures = 0;
            std::string const text = with_dim(surface_dimension(detail::require(cfg, "surface")), [&](auto dim) {
                constexpr int N = decltype(dim)::value;
                auto c = experiment_from_json<N>(cfg);
                if (workers > 1) c.workers = workers;
                auto const rep = run_experiment(c);
                json j = rep.to_json();
                if (run_check) {
                    auto const fails = evaluate_checks(rep, c.check);
                    j["check"] = {{"passed", fails.empty()}, {"failures", fails}};
                    failures = static_cast<int>(fails.size());
                }
                return j.dump(2) + "\n";
            });
            if (run_report.empty()) std::cout << text;
            else write_file(run_report, text);
            if (failures > 0) {
                std::cerr << "threshold check failed (" << failures << ")\n";
                return kExitThreshold;
            }
        }
    } catch (StageError const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.config_error ? kExitConfig : kExitNumeric;
    } catch (ConfigError const& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (ArgumentError const& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (json::exception const& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (Unsupported const& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (std::exception const& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    }
    return 0;
}
