#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sradon/backprojection.hpp"
#include "sradon/forward.hpp"
#include "sradon/io.hpp"
#include "sradon/microlocal.hpp"

namespace sradon {

//---------------------------------------------------------------------------//
// Configuration
//---------------------------------------------------------------------------//
//! Edge probe for the jump metric (2-D images).
struct EdgeProbe {
    std::string label;
    Vec<2> point;
    Vec<2> normal;  //!< pointing out of the bright side
    double gap = 0.012;
    double len = 0.045;
};

template<int N>
struct ExperimentConfig {
    Surface<N> surface = Surface<N>::hyperplane();
    ParamBox patch;
    Phantom<N> phantom;
    std::vector<std::size_t> resolution;
    std::size_t radii = 0;
    double r_max = 0;  //!< 0: chosen from the geometry
    int nodes = 64;
    double noise = 0;
    std::optional<CutoffSpec> cutoff;
    std::size_t grid_size = 128;
    std::optional<GridSpec<N>> box;  //!< unset: auto_box
    std::optional<std::pair<Vec<N>, Vec<N>>> region;  //!< metric mask
    std::vector<EdgeProbe> edges;
    std::vector<double> sweep;
    bool calibration = false;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    std::string output_dir;
    json check = json::object();
};

template<int N>
ExperimentConfig<N> experiment_from_json(json const& j) {
    ExperimentConfig<N> c;
    auto const& sj = detail::require(j, "surface");
    c.surface = surface_from_json<N>(sj);
    c.patch = patch_from_json(sj, c.surface);
    c.phantom = phantom_from_json<N>(detail::require(j, "phantom"));

    auto const& acq = detail::require(j, "acquisition");
    auto const& centers = detail::require(acq, "centers");
    c.resolution = centers.is_array() ? centers.get<std::vector<std::size_t>>()
                                      : std::vector<std::size_t>(N - 1, centers.get<std::size_t>());
    c.radii = detail::require(acq, "radii").get<std::size_t>();
    c.r_max = acq.value("rmax", 0.0);
    c.nodes = acq.value("nodes", 64);
    c.noise = acq.value("noise", 0.0);
    if (c.resolution.size() != N - 1) throw ConfigError("acquisition.centers needs n-1 counts");
    for (auto r : c.resolution)
        if (r == 0) throw ConfigError("acquisition.centers must be positive");
    if (c.radii == 0) throw ConfigError("acquisition.radii must be positive");
    if (c.r_max < 0 || c.noise < 0) throw ConfigError("acquisition values must be non-negative");

    if (j.contains("cutoff") && !j.at("cutoff").is_null()) c.cutoff = cutoff_from_json(j.at("cutoff"));

    if (j.contains("grid")) {
        auto const& g = j.at("grid");
        c.grid_size = g.value("size", c.grid_size);
        if (g.contains("box") && g.at("box").is_object()) {
            auto const& b = g.at("box");
            GridSpec<N> spec;
            spec.lo = detail::vec_from_json<N>(detail::require(b, "lo"));
            spec.hi = detail::vec_from_json<N>(detail::require(b, "hi"));
            if (b.contains("dims")) {
                auto const dims = b.at("dims").get<std::vector<std::size_t>>();
                if (dims.size() != N) throw ConfigError("grid.box.dims length mismatch");
                std::copy(dims.begin(), dims.end(), spec.dims.begin());
            } else {
                spec.dims.fill(c.grid_size);
            }
            c.box = spec;
        }
        if (g.contains("region"))
            c.region = std::pair{detail::vec_from_json<N>(detail::require(g.at("region"), "lo")),
                                 detail::vec_from_json<N>(detail::require(g.at("region"), "hi"))};
    }
    if (c.grid_size == 0) throw ConfigError("grid.size must be positive");

    if (j.contains("edges")) {
        if constexpr (N != 2) {
            throw ConfigError("edge probes are only available in 2-D");
        } else {
            for (auto const& e : j.at("edges")) {
                EdgeProbe p;
                p.label = e.value("label", "");
                p.point = detail::vec_from_json<2>(detail::require(e, "point"));
                p.normal = detail::vec_from_json<2>(detail::require(e, "normal"));
                p.gap = e.value("gap", p.gap);
                p.len = e.value("len", p.len);
                if (!(norm(p.normal) > 0)) throw ConfigError("edge normal must be nonzero");
                c.edges.push_back(p);
            }
        }
    }
    c.sweep = j.value("sweep", std::vector<double>{});
    c.calibration = j.value("calibration", false);
    c.seed = j.value("seed", std::uint64_t{0});
    c.workers = j.value("workers", 1u);
    c.output_dir = j.value("output", std::string{});
    c.check = j.value("check", json::object());
    if (c.cutoff && std::isfinite(c.cutoff->R) && c.r_max > 0 && c.cutoff->R + c.cutoff->eps > c.r_max)
        throw ConfigError("cut-off R + eps exceeds r_max");
    return c;
}

//---------------------------------------------------------------------------//
// Report
//---------------------------------------------------------------------------//
struct JumpEntry {
    std::string label;
    double measured = 0;
    double reference = 0;
    double ratio = 0;
    std::optional<double> sigma0;
};

struct ErrorReport {
    double rel_l2 = 0;
    double max_error = 0;
    double peak_ratio = 0;
    std::optional<double> calibration_ratio;
    std::vector<JumpEntry> jumps;
    std::optional<double> visible_invisible_ratio;
    std::optional<double> half_visible_ratio;
    std::size_t out_of_range = 0;
    std::vector<std::pair<double, double>> sweep;  //!< (scale, rel_l2)
    std::map<std::string, double> timings;

    //! Everything except wall-clock timings.
    json metrics() const {
        json jumps_json = json::array();
        for (auto const& e : jumps) {
            json je{{"label", e.label}, {"measured", e.measured}, {"reference", e.reference}, {"ratio", e.ratio}};
            if (e.sigma0) je["sigma0"] = *e.sigma0;
            jumps_json.push_back(je);
        }
        json sw = json::array();
        for (auto const& [s, e] : sweep) sw.push_back({{"scale", s}, {"rel_l2", e}});
        json j{{"rel_l2", rel_l2},
               {"max_error", max_error},
               {"peak_ratio", peak_ratio},
               {"jumps", jumps_json},
               {"out_of_range", out_of_range},
               {"sweep", sw}};
        if (calibration_ratio) j["calibration_ratio"] = *calibration_ratio;
        if (visible_invisible_ratio) j["visible_invisible_ratio"] = *visible_invisible_ratio;
        if (half_visible_ratio) j["half_visible_ratio"] = *half_visible_ratio;
        return j;
    }

    json to_json() const {
        json j = metrics();
        j["timings"] = timings;
        return j;
    }
};

//---------------------------------------------------------------------------//
// Pipeline pieces
//---------------------------------------------------------------------------//
template<int N>
std::vector<char> region_mask(GridSpec<N> const& grid, std::optional<std::pair<Vec<N>, Vec<N>>> const& region) {
    std::vector<char> mask(grid.size(), 1);
    if (!region) return mask;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        auto const x = grid.cell_center(i);
        for (int a = 0; a < N; ++a)
            if (x[a] < region->first[a] || x[a] > region->second[a]) mask[i] = 0;
    }
    return mask;
}

//! Smallest r_max covering every (center, grid corner) and (center, support corner) distance.
template<int N>
double covering_rmax(std::vector<Vec<N>> const& centers, GridSpec<N> const& grid, Phantom<N> const& f) {
    std::vector<std::pair<Vec<N>, Vec<N>>> boxes{{grid.lo, grid.hi}};
    if (!f.terms.empty()) boxes.push_back(f.support_box());
    double r = 0;
    for (auto const& z : centers)
        for (auto const& [lo, hi] : boxes)
            for (unsigned corner = 0; corner < (1u << N); ++corner) {
                Vec<N> p;
                for (int a = 0; a < N; ++a) p[a] = (corner >> a) & 1u ? hi[a] : lo[a];
                r = std::max(r, distance(z, p));
            }
    return 1.02 * r;
}

template<int N>
SurfaceQuadrature<N> quadrature_of(Sinogram<N> const& s) {
    SurfaceQuadrature<N> q;
    q.patch = s.patch;
    q.resolution = s.resolution;
    for (auto const& c : s.centers) {
        q.nodes.push_back(c.point);
        q.params.push_back(c.params);
        q.weights.push_back(c.weight);
    }
    return q;
}

/*!
 * Peak of the reconstruction of a reference SmoothBump (centered in the grid
 * box, p = 3) divided by its true peak, using the acquisition geometry of
 * \c sino.
 */
template<int N>
double calibration_ratio(Sinogram<N> const& sino, GridSpec<N> const& grid, unsigned workers = 1) {
    Vec<N> const mid = 0.5 * (grid.lo + grid.hi);
    double half = std::numeric_limits<double>::infinity();
    for (int a = 0; a < N; ++a) half = std::min(half, 0.5 * (grid.hi[a] - grid.lo[a]));
    Phantom<N> ref;
    ref.terms.push_back(smooth_bump(mid, 0.5 * half, 1.0, 3.0));
    auto const data = forward_sinogram(ref, sino.surface, quadrature_of(sino), sino.radii, {64, workers});
    auto const img = reconstruct(data, grid, {workers, 1e-3});
    double peak = 0;
    for (double v : img.values) peak = std::max(peak, v);
    return peak;
}

template<int N>
struct ExperimentArtifacts {
    Sinogram<N> sinogram;
    ImageGrid<N> image;
    ImageGrid<N> truth;
};

//! Failure inside one pipeline stage; \c config_error selects exit code 2 over 3.
struct StageError : std::runtime_error {
    StageError(std::string stage_name, std::string const& what, bool config)
        : std::runtime_error(stage_name + ": " + what), stage(std::move(stage_name)), config_error(config) {}
    std::string stage;
    bool config_error = false;
};

namespace detail {

template<class F>
auto stage(char const* name, F&& fn) {
    try {
        return fn();
    } catch (StageError const&) {
        throw;
    } catch (ConfigError const& e) {
        throw StageError(name, e.what(), true);
    } catch (ArgumentError const& e) {
        throw StageError(name, e.what(), true);
    } catch (std::exception const& e) {
        throw StageError(name, e.what(), false);
    }
}

template<int N>
ErrorReport run_once(ExperimentConfig<N> const& cfg, double scale, ExperimentArtifacts<N>* artifacts) {
    using clock = std::chrono::steady_clock;
    auto seconds = [](clock::time_point a, clock::time_point b) { return std::chrono::duration<double>(b - a).count(); };
    ErrorReport rep;

    GridSpec<N> const grid =
        stage("grid", [&] { return cfg.box ? *cfg.box : auto_box(cfg.surface, cfg.grid_size, &cfg.phantom); });
    std::vector<std::size_t> res = cfg.resolution;
    for (auto& r : res) r = static_cast<std::size_t>(std::llround(static_cast<double>(r) * scale));
    auto const nr = static_cast<std::size_t>(std::llround(static_cast<double>(cfg.radii) * scale));

    auto t0 = clock::now();
    auto sino = stage("forward", [&] {
        auto const quad = surface_quadrature(cfg.surface, cfg.patch, res);
        double r_max = cfg.r_max;
        if (r_max <= 0) r_max = covering_rmax(quad.nodes, grid, cfg.phantom);
        auto s = forward_sinogram(cfg.phantom, cfg.surface, quad, radius_grid(r_max, nr), {cfg.nodes, cfg.workers});
        if (cfg.noise > 0) add_gaussian_noise(s, cfg.noise, cfg.seed);
        return s;
    });
    sino.metadata["phantom"] = to_json(cfg.phantom);
    auto t1 = clock::now();
    rep.timings["forward"] = seconds(t0, t1);

    if (cfg.cutoff) sino = stage("cutoff", [&] { return apply_cutoffs(std::move(sino), *cfg.cutoff); });
    auto t2 = clock::now();
    rep.timings["cutoff"] = seconds(t1, t2);

    BackprojectStats stats;
    auto img = stage("reconstruct", [&] { return reconstruct(sino, grid, {cfg.workers, 1e-3}, &stats); });
    rep.out_of_range = stats.out_of_range;
    auto t3 = clock::now();
    rep.timings["reconstruct"] = seconds(t2, t3);

    auto const truth = rasterize(cfg.phantom, grid);
    auto const mask = region_mask(grid, cfg.region);
    rep.rel_l2 = relative_l2(img.values, truth.values, mask);
    rep.max_error = max_abs_error(img.values, truth.values, mask);
    double peak = 0, true_peak = 0;
    for (std::size_t i = 0; i < img.size(); ++i) {
        if (!mask[i]) continue;
        peak = std::max(peak, img[i]);
        true_peak = std::max(true_peak, truth[i]);
    }
    rep.peak_ratio = true_peak > 0 ? peak / true_peak : 0.0;

    if constexpr (N == 2) {
        std::vector<double> vis, half, invis;
        for (auto const& e : cfg.edges) {
            JumpEntry je;
            je.label = e.label;
            je.measured = stage("metrics", [&] { return measure_jump(img, e.point, e.normal, e.gap, e.len); });
            Vec<2> const n = (1.0 / norm(e.normal)) * e.normal;
            double const d = 1e-9;
            je.reference = cfg.phantom.eval(e.point - d * n) - cfg.phantom.eval(e.point + d * n);
            je.ratio = je.reference != 0 ? je.measured / je.reference : 0.0;
            if (cfg.cutoff) {
                je.sigma0 = principal_symbol(e.point, n, cfg.surface, *cfg.cutoff);
                if (*je.sigma0 == 1.0) vis.push_back(std::abs(je.measured));
                else if (*je.sigma0 == 0.5) half.push_back(std::abs(je.measured));
                else if (*je.sigma0 == 0.0) invis.push_back(std::abs(je.measured));
            }
            rep.jumps.push_back(je);
        }
        auto mean = [](std::vector<double> const& v) {
            double s = 0;
            for (double x : v) s += x;
            return s / static_cast<double>(v.size());
        };
        if (!vis.empty() && !invis.empty()) rep.visible_invisible_ratio = mean(invis) / mean(vis);
        if (!vis.empty() && !half.empty()) rep.half_visible_ratio = mean(half) / mean(vis);
    }

    if (cfg.calibration) {
        auto t4 = clock::now();
        rep.calibration_ratio = stage("calibration", [&] { return calibration_ratio(sino, grid, cfg.workers); });
        rep.timings["calibration"] = seconds(t4, clock::now());
    }
    if (artifacts) *artifacts = {std::move(sino), std::move(img), truth};
    return rep;
}

}  // namespace detail

//! Stage failures surface as StageError tagged with the stage name.
template<int N>
ErrorReport run_experiment(ExperimentConfig<N> const& cfg, ExperimentArtifacts<N>* artifacts = nullptr) {
    ExperimentArtifacts<N> local;
    ErrorReport rep = detail::run_once(cfg, 1.0, &local);
    for (double s : cfg.sweep) {
        if (!(s > 0)) throw ConfigError("sweep scales must be positive");
        rep.sweep.emplace_back(s, s == 1.0 ? rep.rel_l2 : detail::run_once<N>(cfg, s, nullptr).rel_l2);
    }
    if (!cfg.output_dir.empty()) {
        std::filesystem::create_directories(cfg.output_dir);
        auto const dir = std::filesystem::path(cfg.output_dir);
        write_file((dir / "sinogram.smr").string(), encode_container(to_container(local.sinogram)));
        write_file((dir / "image.smi").string(), encode_container(to_container(local.image)));
        write_file((dir / "report.json").string(), rep.to_json().dump(2) + "\n");
        if constexpr (N == 2) {
            if (cfg.cutoff) {
                auto const vz = visible_zone_mask(local.image.spec, probe_directions<2>(16), cfg.surface, *cfg.cutoff,
                                                  cfg.workers);
                write_file((dir / "mask.smi").string(), encode_container(to_container(vz)));
            }
        }
    }
    if (artifacts) *artifacts = std::move(local);
    return rep;
}

//---------------------------------------------------------------------------//
// Threshold checks for `run --check`
//---------------------------------------------------------------------------//
/*!
 * Keys: rel_l2_max, peak_ratio [lo, hi], jump_ratio [lo, hi] (edges with
 * sigma0 = 1 or no cut-off), half_visible [lo, hi], invisible_max,
 * sweep_gain_min. Returns one message per failed check.
 */
inline std::vector<std::string> evaluate_checks(ErrorReport const& rep, json const& check) {
    std::vector<std::string> fails;
    auto range = [&](char const* key, double v) {
        if (!check.contains(key)) return;
        auto const r = check.at(key).get<std::vector<double>>();
        if (r.size() != 2) throw ConfigError(std::string("check.") + key + " needs [lo, hi]");
        if (!(v >= r[0] && v <= r[1]))
            fails.push_back(std::string(key) + " = " + std::to_string(v) + " outside [" + std::to_string(r[0]) + ", "
                            + std::to_string(r[1]) + "]");
    };
    if (check.contains("rel_l2_max") && !(rep.rel_l2 < check.at("rel_l2_max").get<double>()))
        fails.push_back("rel_l2 = " + std::to_string(rep.rel_l2) + " >= " + check.at("rel_l2_max").dump());
    range("peak_ratio", rep.peak_ratio);
    if (check.contains("jump_ratio"))
        for (auto const& j : rep.jumps)
            if (!j.sigma0 || *j.sigma0 == 1.0) range("jump_ratio", j.ratio);
    if (check.contains("half_visible")) {
        if (!rep.half_visible_ratio) fails.push_back("half_visible: no sigma0 = 1/2 edges measured");
        else range("half_visible", *rep.half_visible_ratio);
    }
    if (check.contains("invisible_max")) {
        if (!rep.visible_invisible_ratio) fails.push_back("invisible_max: no invisible edges measured");
        else if (!(*rep.visible_invisible_ratio < check.at("invisible_max").get<double>()))
            fails.push_back("invisible/visible = " + std::to_string(*rep.visible_invisible_ratio));
    }
    if (check.contains("sweep_gain_min")) {
        if (rep.sweep.size() < 2) {
            fails.push_back("sweep_gain_min: needs a sweep of at least two scales");
        } else {
            double const gain = rep.sweep.front().second / rep.sweep.back().second;
            if (!(gain >= check.at("sweep_gain_min").get<double>()))
                fails.push_back("sweep gain = " + std::to_string(gain));
        }
    }
    if (check.contains("calibration")) {
        if (!rep.calibration_ratio) fails.push_back("calibration: not computed");
        else range("calibration", *rep.calibration_ratio);
    }
    return fails;
}

}  // namespace sradon
