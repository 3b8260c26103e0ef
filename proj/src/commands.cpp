#include "nsrl/commands.hpp"

#include "nsrl/diagnostics.hpp"
#include "nsrl/error.hpp"
#include "nsrl/pressure_split.hpp"
#include "nsrl/rescale.hpp"
#include "nsrl/solver.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace nsrl::cli {

namespace {

Json vec(const Vec3& v) { return Json::array({v[0], v[1], v[2]}); }

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json array(const std::vector<double>& v)
{
    Json out = Json::array();
    for (double x : v) out.push_back(x);
    return out;
}

Vec3 as_vec3(const std::string& key, const std::vector<double>& v, std::size_t offset = 0)
{
    if (v.size() < offset + 3) throw ConfigError(key, "expected x y z");
    return {v[offset], v[offset + 1], v[offset + 2]};
}

Ball as_ball(const std::string& key, const std::vector<double>& v)
{
    if (v.size() != 4) throw ConfigError(key, "expected x y z radius");
    return Ball{{v[0], v[1], v[2]}, v[3]};
}

Json ball_json(const Ball& b) { return Json{{"center", vec(b.center)}, {"radius", b.radius}}; }

Json domain_json(const SplitDomain& d)
{
    if (std::holds_alternative<PeriodicDomain>(d)) return "periodic";
    return ball_json(std::get<Ball>(d));
}

Json sides_json(const IdentitySides& s)
{
    return Json{{"original", s.original}, {"zoomed", s.zoomed}, {"relative_discrepancy", s.relative_discrepancy}};
}

SplitDomain parse_domain(const io::ConfigReader& r, const std::string& key)
{
    const auto text = r.get_string(key, "periodic");
    if (text == "periodic") return PeriodicDomain{};
    return as_ball(key, r.get_list(key));
}

Json split_section(const SpaceTimeSlab& slab, const io::ConfigReader& r)
{
    const SplitDomain domain = parse_domain(r, "split_domain");
    SplitOptions opts;
    opts.cg_tol = r.get_double("cg_tol", opts.cg_tol);
    opts.max_iterations = static_cast<int>(r.get_int("cg_max_iterations", 0));

    std::vector<std::size_t> which;
    const auto sel = r.get_string("split_snapshots", "last");
    if (sel == "last") {
        which.push_back(slab.size() - 1);
    } else if (sel == "all") {
        for (std::size_t i = 0; i < slab.size(); ++i) which.push_back(i);
    } else {
        for (double x : r.get_list("split_snapshots")) {
            if (x < 0 || x != std::floor(x) || x >= static_cast<double>(slab.size()))
                throw ConfigError("split_snapshots", "index out of range");
            which.push_back(static_cast<std::size_t>(x));
        }
    }

    Json out = Json::array();
    for (std::size_t i : which) {
        const auto s = split_pressure(slab[i], domain, opts);
        out.push_back(Json{{"snapshot", i},
                           {"time", slab[i].time},
                           {"domain", domain_json(domain)},
                           {"cz_ratio", s.cz_ratio},
                           {"harmonic_residual", s.harmonic_residual},
                           {"p2_max", s.p2_max},
                           {"cg_iterations", s.cg_iterations},
                           {"cg_relative_residual", s.cg_relative_residual}});
    }
    return out;
}

const std::vector<std::string> split_keys{"split_domain", "split_snapshots", "cg_tol", "cg_max_iterations"};

void require_finite(const Json& j, const std::string& where)
{
    if (j.is_number_float() && !std::isfinite(j.get<double>())) throw FormatError("report: non-finite number at " + where);
    if (j.is_object())
        for (const auto& [k, v] : j.items()) require_finite(v, where + "/" + k);
    if (j.is_array())
        for (std::size_t i = 0; i < j.size(); ++i) require_finite(j[i], where + "/" + std::to_string(i));
}

} // namespace

fs::path simulate(const fs::path& config_path, const fs::path& out_dir)
{
    const auto cfg = io::read_config(config_path);
    const io::ConfigReader r(cfg, {"n", "box_length", "dt", "t_start", "t_end", "output_stride", "init", "seed",
                                   "amplitude", "wavenumber", "max_mode", "viscosity", "cfl", "dealias"});
    SolverConfig sc;
    const long n = r.get_int("n", 32);
    if (n < 4 || n % 2 != 0) throw ConfigError("n", "must be an even integer >= 4");
    const double L = r.get_double("box_length", 2.0 * std::numbers::pi);
    if (!(L > 0.0)) throw ConfigError("box_length", "must be positive");
    sc.grid = Grid(static_cast<int>(n), L);
    sc.dt = r.get_double("dt", sc.dt);
    sc.t_start = r.get_double("t_start", 0.0);
    sc.t_end = r.get_double("t_end", sc.t_end);
    if (!(sc.t_end > sc.t_start)) throw ConfigError("t_end", "degenerate window: t_end must exceed t_start");
    sc.output_stride = static_cast<int>(r.get_int("output_stride", 1));
    sc.initial.kind = parse_initial_kind(r.get_string("init", "taylor_green"));
    const long seed = r.get_int("seed", 0);
    if (seed < 0) throw ConfigError("seed", "must be non-negative");
    sc.initial.seed = static_cast<std::uint64_t>(seed);
    sc.initial.amplitude = r.get_double("amplitude", 1.0);
    sc.initial.wavenumber = static_cast<int>(r.get_int("wavenumber", 1));
    sc.initial.max_mode = static_cast<int>(r.get_int("max_mode", 2));
    sc.viscosity = r.get_double("viscosity", 1.0);
    sc.cfl = r.get_double("cfl", sc.cfl);
    sc.dealias = r.get_bool("dealias", true);
    return io::write_series(run(sc), out_dir);
}

fs::path synthesize(const fs::path& config_path, const fs::path& out_dir)
{
    const auto cfg = io::read_config(config_path);
    const io::ConfigReader r(cfg, {"n", "box_length", "alpha", "t_sing", "k", "amplitude", "u_min", "u_max", "count"});
    const long n = r.get_int("n", 64);
    if (n < 4 || n % 2 != 0) throw ConfigError("n", "must be an even integer >= 4");
    const Grid g(static_cast<int>(n), r.get_double("box_length", 2.0 * std::numbers::pi));
    SyntheticProfile prof;
    prof.alpha = r.require_double("alpha");
    prof.T_sing = r.get_double("t_sing", 0.0);
    prof.k = static_cast<int>(r.get_int("k", 2));
    prof.amplitude = r.get_double("amplitude", 1.0);
    const double u_min = r.require_double("u_min");
    const double u_max = r.require_double("u_max");
    const long count = r.get_int("count", 40);
    if (!(u_min > 0.0)) throw ConfigError("u_min", "must be positive");
    if (!(u_max > u_min)) throw ConfigError("u_max", "must exceed u_min");
    if (count < 2) throw ConfigError("count", "need at least two snapshots");

    io::SeriesWriter w(out_dir);
    for (long i = 0; i < count; ++i) {
        // u runs from u_max down to u_min geometrically, so times increase.
        const double u = i + 1 == count ? u_min : u_max * std::pow(u_min / u_max, static_cast<double>(i) / (count - 1));
        w.add(synthetic_snapshot(prof, g, prof.T_sing - u));
    }
    return w.finish();
}

Json report_header(const fs::path& manifest_path, const io::Config& config)
{
    const auto manifest_text = io::read_file(manifest_path);
    const auto m = io::decode_manifest(manifest_text);
    Json values = Json::object();
    for (const auto& [k, v] : config.values) values[k] = v;
    Json rep;
    rep["tool"] = Json{{"name", "nsrl"}, {"version", tool_version}};
    rep["manifest"] = Json{{"path", manifest_path.string()},
                           {"digest", io::hex64(io::fnv1a64(manifest_text))},
                           {"snapshots", m.entries.size()}};
    rep["grid"] = Json{{"n", m.n}, {"box_length", m.box_length}, {"spacing", m.box_length / m.n}};
    rep["config"] = Json{{"text", config.text}, {"values", values}};
    rep["criterion"] = nullptr;
    rep["good_slices"] = Json::array();
    rep["fatou"] = nullptr;
    rep["ckn"] = Json::array();
    rep["energy"] = Json::array();
    rep["pressure_split"] = Json::array();
    rep["rescale"] = Json::array();
    rep["summary"] = Json{{"m_proxy", nullptr}, {"M_proxy", nullptr}, {"flagged", 0}};
    return rep;
}

Json diagnose(const fs::path& manifest_path, const fs::path& config_path)
{
    const auto cfg = io::read_config(config_path);
    std::vector<std::string> keys{"criterion",   "criterion_T",    "criterion_delta", "criterion_windows",
                                  "criterion_domain", "g_ball",    "good_M",          "good_t_k",
                                  "good_t_final", "ckn_centers",   "ckn_t0",          "ckn_radii",
                                  "eps_threshold", "ckn_min_radius_cells", "energy_functions", "energy_t"};
    keys.insert(keys.end(), split_keys.begin(), split_keys.end());
    const io::ConfigReader r(cfg, keys);

    const auto slab = io::load_series(manifest_path);
    Json rep = report_header(manifest_path, cfg);

    if (r.get_bool("criterion", true)) {
        const double T = r.get_double("criterion_T", slab.t_end());
        CriterionOptions co;
        co.delta = r.get_double("criterion_delta", T - slab.t_start());
        co.windows = static_cast<int>(r.get_int("criterion_windows", co.windows));
        if (r.has("criterion_domain")) co.domain = as_ball("criterion_domain", r.get_list("criterion_domain"));
        const auto prof = criterion_profile(slab, T, co);
        Json windows = Json::array();
        for (const auto& w : prof.windows) windows.push_back(Json{{"t", w.t}, {"average", w.average}});
        rep["criterion"] = Json{{"T", prof.T},
                                {"delta", co.delta},
                                {"domain", co.domain ? ball_json(*co.domain) : Json("box")},
                                {"windows", windows},
                                {"m_proxy", prof.m_proxy},
                                {"M_proxy", prof.M_proxy},
                                {"fitted_exponent", opt(prof.fitted_exponent)}};
        rep["summary"]["m_proxy"] = prof.m_proxy;
        rep["summary"]["M_proxy"] = prof.M_proxy;
    }

    if (r.has("good_M")) {
        const Ball ball = r.has("g_ball") ? as_ball("g_ball", r.get_list("g_ball")) : Ball{{0.0, 0.0, 0.0}, 5.0 / 6.0};
        const auto g = g_profile(slab, ball);
        const double M = r.require_double("good_M");
        const double t_final = r.get_double("good_t_final", slab.t_end());
        auto t_ks = r.get_list("good_t_k");
        if (t_ks.empty()) throw ConfigError("good_t_k", "required with good_M");
        const auto fatou = fatou_final_slice(g, t_ks, M, t_final);
        for (const auto& s : fatou.slices)
            rep["good_slices"].push_back(Json{{"M", s.M},
                                              {"threshold", s.threshold},
                                              {"t_k", s.t_k},
                                              {"t_final", s.t_final},
                                              {"window_average", s.window_average},
                                              {"precondition_holds", s.precondition_holds},
                                              {"E_k_measure", s.E_k_measure},
                                              {"Ek_bound", s.Ek_bound},
                                              {"s_k", s.s_k},
                                              {"g_at_sk", s.g_at_sk}});
        rep["fatou"] = Json{{"g_final", fatou.g_final}, {"bound", fatou.bound}, {"holds", fatou.holds}};
    }

    if (r.has("ckn_centers")) {
        CknOptions co;
        co.eps_threshold = r.require_double("eps_threshold");
        if (!(co.eps_threshold > 0.0)) throw ConfigError("eps_threshold", "must be positive");
        co.min_radius_cells = static_cast<int>(r.get_int("ckn_min_radius_cells", co.min_radius_cells));
        const double t0 = r.get_double("ckn_t0", slab.t_end());
        const auto radii = r.get_list("ckn_radii");
        if (radii.empty()) throw ConfigError("ckn_radii", "required with ckn_centers");
        int flagged = 0;
        for (const auto& c : r.get_groups("ckn_centers")) {
            const auto res = ckn_scan(slab, as_vec3("ckn_centers", c), t0, radii, co);
            flagged += res.flagged ? 1 : 0;
            rep["ckn"].push_back(Json{{"center", vec(res.center)},
                                      {"t0", res.t0},
                                      {"radii", array(res.radii)},
                                      {"values", array(res.values)},
                                      {"fitted_slope", opt(res.fitted_slope)},
                                      {"eps_threshold", res.eps_threshold},
                                      {"flagged", res.flagged}});
        }
        rep["summary"]["flagged"] = flagged;
    }

    if (r.has("energy_functions")) {
        auto ts = r.get_list("energy_t");
        if (ts.empty()) ts.push_back(slab.t_end());
        int id = 0;
        for (const auto& f : r.get_groups("energy_functions")) {
            if (f.size() != 8) throw ConfigError("energy_functions", "expected x y z rho t_on tau k amplitude");
            BumpTestFunction phi;
            phi.id = "bump_" + std::to_string(id++);
            phi.center = as_vec3("energy_functions", f);
            phi.rho = f[3];
            phi.t_on = f[4];
            phi.tau = f[5];
            phi.k = static_cast<int>(f[6]);
            phi.amplitude = f[7];
            for (double t : ts) {
                const auto e = energy_residual(slab, phi, t);
                rep["energy"].push_back(Json{{"test_function", e.test_function_id},
                                             {"t", e.t},
                                             {"lhs", e.lhs},
                                             {"rhs", e.rhs},
                                             {"residual", e.residual}});
            }
        }
    }

    if (r.has("split_domain")) rep["pressure_split"] = split_section(slab, r);
    validate_report(rep);
    return rep;
}

Json split_pressure(const fs::path& manifest_path, const fs::path& config_path)
{
    const auto cfg = io::read_config(config_path);
    const io::ConfigReader r(cfg, split_keys);
    return split_section(io::load_series(manifest_path), r);
}

ZoomOutcome zoom(const fs::path& manifest_path, const fs::path& config_path, const fs::path& out_dir)
{
    const auto cfg = io::read_config(config_path);
    const io::ConfigReader r(cfg, {"R", "T", "target_n", "target_box_length", "mode", "zero_outside", "times",
                                   "scaling_a", "harmonic_a", "harmonic_R", "write"});
    const ZoomParams zp{r.require_double("R"), r.require_double("T")};
    validate(zp);

    // Parameter checks before any heavy work.
    const auto harmonic_R = r.get_list("harmonic_R");
    const auto harmonic_a = r.get_optional("harmonic_a");
    if (harmonic_a)
        for (double R : harmonic_R.empty() ? std::vector<double>{zp.R_k} : harmonic_R)
            if (*harmonic_a * R >= 2.0 / 3.0)
                throw GeometryError("harmonic_a: a R_k = " + std::to_string(*harmonic_a * R) +
                                    " violates a R_k < 2/3 required by the harmonic-part estimate");

    const auto slab = io::load_series(manifest_path);
    const Grid& src = slab.grid();
    const Grid target(static_cast<int>(r.get_int("target_n", src.n())),
                      r.get_double("target_box_length", src.box_length() / zp.R_k));
    ZoomOptions zo;
    const auto mode = r.get_string("mode", "trilinear");
    if (mode == "trilinear")
        zo.mode = SampleMode::trilinear;
    else if (mode == "spectral")
        zo.mode = SampleMode::spectral;
    else
        throw ConfigError("mode", "expected trilinear or spectral");
    zo.zero_outside = r.get_bool("zero_outside", true);
    if (r.has("times")) zo.times = r.get_list("times");

    ZoomOutcome out;
    Json section{{"R_k", zp.R_k},
                 {"T", zp.T},
                 {"t_k", zp.t_k()},
                 {"target", Json{{"n", target.n()}, {"box_length", target.box_length()}}},
                 {"mode", mode},
                 {"manifest", nullptr},
                 {"scaling", nullptr},
                 {"harmonic", nullptr}};
    if (r.get_bool("write", true)) {
        out.manifest = io::write_series(nsrl::zoom(slab, zp, target, zo), out_dir);
        section["manifest"] = out.manifest->string();
    }
    if (const auto a = r.get_optional("scaling_a")) {
        ScalingOptions so;
        so.zoom = zo;
        const auto rep = scaling_identity_check(slab, zp, *a, target, so);
        section["scaling"] = Json{{"a", rep.a},
                                  {"window_average", sides_json(rep.window_average)},
                                  {"cylinder", sides_json(rep.cylinder)}};
    }
    if (harmonic_a) {
        const auto Rs = harmonic_R.empty() ? std::vector<double>{zp.R_k} : harmonic_R;
        const auto series = harmonic_part_vanishing(slab, Rs, zp.T, *harmonic_a, target, zo);
        section["harmonic"] = Json{{"a", series.a},
                                   {"T", series.T},
                                   {"R", array(series.R)},
                                   {"values", array(series.values)},
                                   {"fitted_exponent", opt(series.fitted_exponent)},
                                   {"decreasing", series.decreasing}};
    }
    out.rescale = section;
    return out;
}

void append_to_report(const fs::path& path, const std::string& key, const Json& entries, const fs::path& manifest_path)
{
    Json rep;
    if (fs::exists(path)) {
        try {
            rep = Json::parse(io::read_file(path));
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(std::string("report: ") + e.what());
        }
    } else {
        rep = report_header(manifest_path, io::Config{});
    }
    auto& list = rep[key];
    if (!list.is_array()) list = Json::array();
    if (entries.is_array())
        for (const auto& e : entries) list.push_back(e);
    else
        list.push_back(entries);
    validate_report(rep);
    write_report(path, rep);
}

void validate_report(const Json& rep)
{
    auto need = [&](const char* key, auto check, const char* what) {
        if (!rep.contains(key) || !check(rep[key])) throw FormatError(std::string("report: '") + key + "' must be " + what);
    };
    auto is_obj = [](const Json& j) { return j.is_object(); };
    auto is_arr = [](const Json& j) { return j.is_array(); };
    auto obj_or_null = [](const Json& j) { return j.is_object() || j.is_null(); };
    if (!rep.is_object()) throw FormatError("report: not an object");
    need("tool", is_obj, "an object");
    need("manifest", is_obj, "an object");
    need("grid", is_obj, "an object");
    need("config", is_obj, "an object");
    need("criterion", obj_or_null, "an object or null");
    need("good_slices", is_arr, "an array");
    need("fatou", obj_or_null, "an object or null");
    need("ckn", is_arr, "an array");
    need("energy", is_arr, "an array");
    need("pressure_split", is_arr, "an array");
    need("rescale", is_arr, "an array");
    need("summary", is_obj, "an object");
    const auto& s = rep["summary"];
    for (const char* k : {"m_proxy", "M_proxy"})
        if (!s.contains(k) || !(s[k].is_number() || s[k].is_null()))
            throw FormatError(std::string("report: summary.") + k + " must be a number or null");
    if (!s.contains("flagged") || !s["flagged"].is_number_integer())
        throw FormatError("report: summary.flagged must be an integer");
    for (const char* k : {"digest", "path"})
        if (!rep["manifest"].contains(k) || !rep["manifest"][k].is_string())
            throw FormatError(std::string("report: manifest.") + k + " must be a string");
    require_finite(rep, "");
}

std::string summary_line(const Json& rep)
{
    const auto& s = rep.at("summary");
    auto num = [](const Json& j) {
        if (j.is_null()) return std::string("-");
        std::ostringstream os;
        os.precision(10);
        os << j.get<double>();
        return os.str();
    };
    return num(s.at("m_proxy")) + " " + num(s.at("M_proxy")) + " " + std::to_string(s.at("flagged").get<long>());
}

void write_report(const fs::path& path, const Json& rep)
{
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    io::write_file_atomic(path, rep.dump(2) + "\n");
}

} // namespace nsrl::cli
