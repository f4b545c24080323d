#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sradon/backprojection.hpp"
#include "sradon/core.hpp"
#include "sradon/forward.hpp"
#include "sradon/geometry.hpp"
#include "sradon/image.hpp"
#include "sradon/microlocal.hpp"
#include "sradon/phantom.hpp"

namespace sradon {

using nlohmann::json;

//! Malformed or inconsistent configuration / file content.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

//---------------------------------------------------------------------------//
// JSON helpers
//---------------------------------------------------------------------------//
namespace detail {

inline json const& require(json const& j, char const* key) {
    if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
    return j.at(key);
}

template<int N>
Vec<N> vec_from_json(json const& j) {
    auto const v = j.get<std::vector<double>>();
    if (v.size() != N) throw ConfigError("expected a vector of length " + std::to_string(N));
    return from_vector<N>(v);
}

}  // namespace detail

inline json to_json(ParamBox const& b) { return {{"lo", b.lo}, {"hi", b.hi}}; }

inline ParamBox param_box_from_json(json const& j) {
    ParamBox b{detail::require(j, "lo").get<std::vector<double>>(), detail::require(j, "hi").get<std::vector<double>>()};
    if (b.lo.size() != b.hi.size()) throw ConfigError("box lo/hi lengths differ");
    return b;
}

//! Dimension recorded in a surface description.
inline int surface_dimension(json const& j) { return detail::require(j, "n").get<int>(); }

template<int N>
json to_json(Surface<N> const& s, std::optional<ParamBox> const& patch = std::nullopt) {
    json j{{"kind", to_string(s.kind())}, {"n", N}, {"omega", s.omega()}};
    if (s.kind() == SurfaceKind::GeneralQuadric) j["m"] = s.split();
    if (patch) j["patch"] = to_json(*patch);
    return j;
}

template<int N>
Surface<N> surface_from_json(json const& j) {
    if (surface_dimension(j) != N) throw ConfigError("surface dimension mismatch");
    std::vector<double> omega = j.value("omega", std::vector<double>{});
    try {
        SurfaceKind const kind = surface_kind_from_string(detail::require(j, "kind").get<std::string>());
        switch (kind) {
            case SurfaceKind::Ellipsoid: return Surface<N>::ellipsoid(omega);
            case SurfaceKind::EllipticParaboloid: return Surface<N>::paraboloid(omega);
            case SurfaceKind::Hyperplane: return Surface<N>::hyperplane();
            case SurfaceKind::GeneralQuadric: return Surface<N>::quadric(omega, detail::require(j, "m").get<int>());
        }
    } catch (ArgumentError const& e) {
        throw ConfigError(e.what());
    }
    throw ConfigError("unknown surface kind");
}

//! Patch recorded with the surface, or the chart default.
template<int N>
ParamBox patch_from_json(json const& surface_json, Surface<N> const& s) {
    if (surface_json.contains("patch")) return param_box_from_json(surface_json.at("patch"));
    return s.default_patch();
}

template<int N>
json to_json(Phantom<N> const& f) {
    json terms = json::array();
    for (auto const& t : f.terms) {
        json e{{"type", t.type == PrimitiveType::IndicatorBall ? "IndicatorBall" : "SmoothBump"},
               {"center", to_vector(t.center)},
               {"radius", t.radius},
               {"amplitude", t.amplitude}};
        if (t.type == PrimitiveType::SmoothBump) e["p"] = t.exponent;
        terms.push_back(std::move(e));
    }
    return {{"n", N}, {"terms", terms}};
}

template<int N>
Phantom<N> phantom_from_json(json const& j) {
    Phantom<N> f;
    for (auto const& e : detail::require(j, "terms")) {
        auto const type = detail::require(e, "type").get<std::string>();
        auto const c = detail::vec_from_json<N>(detail::require(e, "center"));
        double const rho = detail::require(e, "radius").get<double>();
        double const a = e.value("amplitude", 1.0);
        if (!(rho > 0) || !std::isfinite(a)) throw ConfigError("phantom radius must be positive, amplitude finite");
        if (type == "IndicatorBall") {
            f.terms.push_back(indicator_ball(c, rho, a));
        } else if (type == "SmoothBump") {
            f.terms.push_back(smooth_bump(c, rho, a, e.value("p", 3.0)));
        } else {
            throw ConfigError("unknown phantom term type '" + type + "'");
        }
    }
    return f;
}

inline json to_json(CutoffSpec const& c) {
    json j{{"eps", c.eps}};
    j["R"] = std::isfinite(c.R) ? json(c.R) : json(nullptr);
    if (c.gamma0) j["gamma0"] = to_json(*c.gamma0);
    if (c.gamma) j["gamma"] = to_json(*c.gamma);
    return j;
}

inline CutoffSpec cutoff_from_json(json const& j) {
    CutoffSpec c;
    if (j.contains("gamma0")) c.gamma0 = param_box_from_json(j.at("gamma0"));
    if (j.contains("gamma")) c.gamma = param_box_from_json(j.at("gamma"));
    if (j.contains("R") && !j.at("R").is_null()) c.R = j.at("R").get<double>();
    c.eps = j.value("eps", 0.0);
    try {
        c.validate();
    } catch (ArgumentError const& e) {
        throw ConfigError(e.what());
    }
    return c;
}

template<int N>
json to_json(GridSpec<N> const& g) {
    return {{"lo", to_vector(g.lo)}, {"hi", to_vector(g.hi)}, {"dims", g.dims}};
}

template<int N>
GridSpec<N> grid_from_json(json const& j) {
    GridSpec<N> g;
    g.lo = detail::vec_from_json<N>(detail::require(j, "lo"));
    g.hi = detail::vec_from_json<N>(detail::require(j, "hi"));
    auto const dims = detail::require(j, "dims").get<std::vector<std::size_t>>();
    if (dims.size() != N) throw ConfigError("grid dims length mismatch");
    std::copy(dims.begin(), dims.end(), g.dims.begin());
    try {
        g.validate();
    } catch (ArgumentError const& e) {
        throw ConfigError(e.what());
    }
    return g;
}

template<int N>
json to_json(SymbolReport<N> const& r) {
    json terms = json::array();
    for (auto const& t : r.terms) {
        json coeffs = json::array();
        for (auto const& [e, c] : t.polynomial.terms()) coeffs.push_back({{"exponent", e}, {"coefficient", c}});
        terms.push_back({{"k", t.k},
                         {"J", t.jk_value},
                         {"laplacian_fd", t.fd_laplacian},
                         {"laplacian_exact", t.exact_laplacian},
                         {"degree", t.degree},
                         {"coefficients", coeffs}});
    }
    auto const& p = r.probe;
    return {{"x", to_vector(p.x)},
            {"xi", to_vector(p.xi)},
            {"in_plus", p.in_plus},
            {"in_minus", p.in_minus},
            {"visible", p.in_visible},
            {"both_sides", r.both_sides},
            {"sigma0", p.sigma0},
            {"symbol", {r.symbol.real(), r.symbol.imag()}},
            {"terms", terms}};
}

//---------------------------------------------------------------------------//
// Binary container: one JSON header line, then little-endian float64 payload
//---------------------------------------------------------------------------//
struct Container {
    json header;
    std::vector<double> payload;
};

namespace detail {

inline void put_le(std::string& out, double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

inline double get_le(char const* p) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    return std::bit_cast<double>(bits);
}

}  // namespace detail

inline std::string encode_container(Container const& c) {
    json h = c.header;
    h["payload_count"] = c.payload.size();
    std::string out = h.dump();
    out.push_back('\n');
    out.reserve(out.size() + 8 * c.payload.size());
    for (double v : c.payload) detail::put_le(out, v);
    return out;
}

inline Container decode_container(std::string const& bytes) {
    auto const nl = bytes.find('\n');
    if (nl == std::string::npos) throw ConfigError("container has no header line");
    Container c;
    try {
        c.header = json::parse(bytes.substr(0, nl));
    } catch (json::parse_error const& e) {
        throw ConfigError(std::string("bad container header: ") + e.what());
    }
    std::size_t const body = bytes.size() - nl - 1;
    if (body % 8 != 0) throw ConfigError("container payload is not a whole number of float64 values");
    std::size_t const count = body / 8;
    if (c.header.value("payload_count", count) != count) throw ConfigError("container payload truncated");
    c.header.erase("payload_count");
    c.payload.resize(count);
    for (std::size_t i = 0; i < count; ++i) c.payload[i] = detail::get_le(bytes.data() + nl + 1 + 8 * i);
    return c;
}

inline void write_file(std::string const& path, std::string const& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ConfigError("write to '" + path + "' failed");
}

inline std::string read_file(std::string const& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json read_json_file(std::string const& path) {
    try {
        return json::parse(read_file(path));
    } catch (json::parse_error const& e) {
        throw ConfigError("'" + path + "': " + e.what());
    }
}

inline std::string container_format(Container const& c) { return c.header.value("format", ""); }

//---------------------------------------------------------------------------//
// Sinograms (.smr)
//---------------------------------------------------------------------------//
template<int N>
Container to_container(Sinogram<N> const& s) {
    json centers = json::array();
    for (auto const& c : s.centers)
        centers.push_back({{"point", to_vector(c.point)}, {"params", c.params}, {"weight", c.weight}});
    json h{{"format", "sinogram"},
           {"version", 1},
           {"surface", to_json(s.surface, s.patch)},
           {"resolution", s.resolution},
           {"centers", centers},
           {"radii", {{"start", s.radii.start}, {"step", s.radii.step}, {"count", s.radii.count}}},
           {"metadata", s.metadata}};
    if (s.filter) h["filter"] = {{"n", s.filter->dimension}, {"even", s.filter->even}, {"prefactor", s.filter->prefactor}};
    return {h, s.data};
}

template<int N>
Sinogram<N> sinogram_from_container(Container const& c) {
    if (container_format(c) != "sinogram") throw ConfigError("not a sinogram file");
    auto const& h = c.header;
    auto const& sj = detail::require(h, "surface");
    Sinogram<N> s{surface_from_json<N>(sj), {}, {}, {}, {}, {}, {}, {}};
    s.patch = patch_from_json(sj, s.surface);
    s.resolution = h.value("resolution", std::vector<std::size_t>{});
    for (auto const& cj : detail::require(h, "centers"))
        s.centers.push_back({detail::vec_from_json<N>(cj.at("point")), cj.at("params").get<std::vector<double>>(),
                             cj.at("weight").get<double>()});
    auto const& r = detail::require(h, "radii");
    s.radii = {r.at("start").get<double>(), r.at("step").get<double>(), r.at("count").get<std::size_t>()};
    s.metadata = h.value("metadata", json::object());
    if (h.contains("filter")) {
        auto const& f = h.at("filter");
        s.filter = FilterInfo{f.at("n").get<int>(), f.at("even").get<bool>(), f.at("prefactor").get<double>()};
    }
    if (c.payload.size() != s.centers.size() * s.radii.count) throw ConfigError("sinogram payload size mismatch");
    s.data = c.payload;
    return s;
}

//---------------------------------------------------------------------------//
// Images (.smi), axis 0 fastest (row-major in (y, x))
//---------------------------------------------------------------------------//
template<int N>
Container to_container(ImageGrid<N> const& img) {
    return {{{"format", "image"}, {"version", 1}, {"n", N}, {"grid", to_json(img.spec)}, {"provenance", img.provenance}},
            img.values};
}

template<int N>
ImageGrid<N> image_from_container(Container const& c) {
    if (container_format(c) != "image") throw ConfigError("not an image file");
    ImageGrid<N> img(grid_from_json<N>(detail::require(c.header, "grid")));
    img.provenance = c.header.value("provenance", json::object());
    if (c.payload.size() != img.size()) throw ConfigError("image payload size mismatch");
    img.values = c.payload;
    return img;
}

//! Visible-zone masks: bits block (cells x directions) followed by sigma0 block.
template<int N>
Container to_container(VisibleZone<N> const& vz) {
    json dirs = json::array();
    for (auto const& d : vz.directions) dirs.push_back(to_vector(d));
    std::vector<double> payload(vz.bits.begin(), vz.bits.end());
    payload.insert(payload.end(), vz.sigma0.begin(), vz.sigma0.end());
    return {{{"format", "mask"},
             {"version", 1},
             {"n", N},
             {"grid", to_json(vz.grid)},
             {"directions", dirs},
             {"channels", {"bits", "sigma0"}},
             {"bits", {{"A_plus", 1}, {"A_minus", 2}, {"tangential", 4}}}},
            payload};
}

template<int N>
VisibleZone<N> mask_from_container(Container const& c) {
    if (container_format(c) != "mask") throw ConfigError("not a mask file");
    VisibleZone<N> vz;
    vz.grid = grid_from_json<N>(detail::require(c.header, "grid"));
    for (auto const& d : detail::require(c.header, "directions")) vz.directions.push_back(detail::vec_from_json<N>(d));
    std::size_t const count = vz.grid.size() * vz.directions.size();
    if (c.payload.size() != 2 * count) throw ConfigError("mask payload size mismatch");
    vz.bits.resize(count);
    for (std::size_t i = 0; i < count; ++i) vz.bits[i] = static_cast<std::uint8_t>(c.payload[i]);
    vz.sigma0.assign(c.payload.begin() + static_cast<std::ptrdiff_t>(count), c.payload.end());
    return vz;
}

//---------------------------------------------------------------------------//
// Exporters (2-D images)
//---------------------------------------------------------------------------//
struct Window {
    double lo = 0;
    double hi = 0;
};

/*!
 * Binary 16-bit PGM, linear window, top row = largest y. Without an explicit
 * window the image min/max are used; an empty window is an error.
 */
inline std::string export_pgm(ImageGrid<2> const& img, std::optional<Window> window = std::nullopt) {
    if (img.size() == 0) throw ArgumentError("empty image");
    Window w;
    if (window) {
        w = *window;
    } else {
        auto [mn, mx] = std::minmax_element(img.values.begin(), img.values.end());
        w = {*mn, *mx};
    }
    if (!(w.hi > w.lo)) throw ArgumentError("degenerate PGM window");
    auto const nx = img.spec.dims[0], ny = img.spec.dims[1];
    std::string out = "P5\n" + std::to_string(nx) + " " + std::to_string(ny) + "\n65535\n";
    out.reserve(out.size() + 2 * nx * ny);
    for (std::size_t row = 0; row < ny; ++row) {
        std::size_t const j = ny - 1 - row;
        for (std::size_t i = 0; i < nx; ++i) {
            double const t = std::clamp((img.values[j * nx + i] - w.lo) / (w.hi - w.lo), 0.0, 1.0);
            auto const v = static_cast<std::uint16_t>(std::lround(t * 65535.0));
            out.push_back(static_cast<char>(v >> 8));
            out.push_back(static_cast<char>(v & 0xff));
        }
    }
    return out;
}

//! Bilinear interpolation between cell centers; points in the outer half cell use the edge cells.
inline double sample_bilinear(ImageGrid<2> const& img, Vec<2> const& p) {
    auto const& g = img.spec;
    constexpr double slack = 1e-12;
    for (int a = 0; a < 2; ++a) {
        double const tol = slack * (g.hi[a] - g.lo[a]);
        if (!(p[a] >= g.lo[a] - tol && p[a] <= g.hi[a] + tol)) throw DomainError("sample point outside the image grid");
        if (g.dims[static_cast<std::size_t>(a)] < 2) throw ArgumentError("bilinear sampling needs two cells per axis");
    }
    std::array<std::size_t, 2> i0{};
    std::array<double, 2> u{};
    for (int a = 0; a < 2; ++a) {
        auto const n = static_cast<std::ptrdiff_t>(g.dims[static_cast<std::size_t>(a)]);
        double const f = (p[a] - g.lo[a]) / g.spacing(a) - 0.5;
        auto const k = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(std::floor(f)), 0, n - 2);
        i0[static_cast<std::size_t>(a)] = static_cast<std::size_t>(k);
        u[static_cast<std::size_t>(a)] = std::clamp(f - static_cast<double>(k), 0.0, 1.0);
    }
    auto at = [&](std::size_t di, std::size_t dj) { return img.values[g.flatten({i0[0] + di, i0[1] + dj})]; };
    return (1 - u[0]) * (1 - u[1]) * at(0, 0) + u[0] * (1 - u[1]) * at(1, 0) + (1 - u[0]) * u[1] * at(0, 1)
           + u[0] * u[1] * at(1, 1);
}

struct ProfileSample {
    double s = 0;
    double value = 0;
};

//! Bilinear samples at uniform arclength from p0 to p1 (inclusive).
inline std::vector<ProfileSample> line_profile(ImageGrid<2> const& img, Vec<2> const& p0, Vec<2> const& p1,
                                               std::size_t samples) {
    if (samples < 2) throw ArgumentError("line profile needs at least two samples");
    double const len = distance(p0, p1);
    std::vector<ProfileSample> out(samples);
    for (std::size_t k = 0; k < samples; ++k) {
        double const t = static_cast<double>(k) / static_cast<double>(samples - 1);
        out[k] = {t * len, sample_bilinear(img, p0 + t * (p1 - p0))};
    }
    return out;
}

inline std::string profile_csv(std::vector<ProfileSample> const& prof) {
    std::ostringstream ss;
    ss.precision(17);
    ss << "s,value\n";
    for (auto const& p : prof) ss << p.s << ',' << p.value << '\n';
    return ss.str();
}

/*!
 * Jump across an edge through \c point with unit normal \c normal: least-squares
 * lines on [-len, -gap] and [gap, len] along the normal, each extrapolated to
 * the edge; returns (inside limit) - (outside limit).
 */
inline double measure_jump(ImageGrid<2> const& img, Vec<2> const& point, Vec<2> const& normal, double gap,
                           double len, std::size_t samples = 40) {
    if (!(gap >= 0) || !(len > gap)) throw ArgumentError("jump window needs 0 <= gap < len");
    if (samples < 2) throw ArgumentError("jump fit needs at least two samples per side");
    Vec<2> const n = (1.0 / norm(normal)) * normal;
    auto fit_at_zero = [&](double a, double b) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        auto const m = static_cast<double>(samples);
        for (std::size_t k = 0; k < samples; ++k) {
            double const s = a + (b - a) * (static_cast<double>(k) + 0.5) / m;
            double const y = sample_bilinear(img, point + s * n);
            sx += s;
            sy += y;
            sxx += s * s;
            sxy += s * y;
        }
        double const slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        return (sy - slope * sx) / m;
    };
    return fit_at_zero(-len, -gap) - fit_at_zero(gap, len);
}

}  // namespace sradon
