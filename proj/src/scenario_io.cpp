#include "finelab/scenario_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "finelab/errors.hpp"
#include "finelab/rng.hpp"
#include "finelab/sampling.hpp"

namespace finelab::scenario {

using geom::cpoint;
using nlohmann::json;

// ---- parsing -------------------------------------------------------------------

scenario_file parse_scenario_text(const std::string& text, const std::string& name) {
    scenario_file file;
    file.path = name;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto ltrim = line.find_first_not_of(" \t\r\n");
        if (ltrim == std::string::npos) continue;
        auto rtrim = line.find_last_not_of(" \t\r\n");
        line = line.substr(ltrim, rtrim - ltrim + 1);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw parse_error("unterminated section header", lineno, line);
            section = line.substr(1, line.size() - 2);
            if (section.empty()) throw parse_error("empty section name", lineno, line);
            file.sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw parse_error("expected 'key = value'", lineno, line);
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        key = trim(key);
        value = trim(value);
        if (key.empty()) throw parse_error("empty key", lineno, line);
        if (section.empty()) throw parse_error("key outside any [section]", lineno, key);
        if (file.sections[section].count(key))
            throw parse_error("duplicate key", lineno, section + "." + key);
        file.sections[section][key] = {value, lineno};
    }
    return file;
}

scenario_file parse_scenario_path(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open scenario file '" + path + "'", 0, path);
    std::stringstream buf;
    buf << in.rdbuf();
    auto file = parse_scenario_text(buf.str(), path);
    file.path = path;
    return file;
}

const scenario_file::entry& scenario_file::require(const std::string& section,
                                                   const std::string& key) const {
    auto sit = sections.find(section);
    if (sit == sections.end())
        throw parse_error("missing section", 0, "[" + section + "]");
    auto kit = sit->second.find(key);
    if (kit == sit->second.end())
        throw parse_error("missing required field", 0, section + "." + key);
    return kit->second;
}

bool scenario_file::has(const std::string& section, const std::string& key) const {
    auto sit = sections.find(section);
    return sit != sections.end() && sit->second.count(key) > 0;
}

std::string scenario_file::get_string(const std::string& section, const std::string& key) const {
    return require(section, key).value;
}

std::string scenario_file::get_string_or(const std::string& section, const std::string& key,
                                         const std::string& fallback) const {
    return has(section, key) ? get_string(section, key) : fallback;
}

double scenario_file::get_double(const std::string& section, const std::string& key) const {
    const entry& e = require(section, key);
    try {
        std::size_t used = 0;
        const double v = std::stod(e.value, &used);
        if (used != e.value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw parse_error("expected a number, got '" + e.value + "'", e.line, section + "." + key);
    }
}

double scenario_file::get_double_or(const std::string& section, const std::string& key,
                                    double fallback) const {
    return has(section, key) ? get_double(section, key) : fallback;
}

long scenario_file::get_long(const std::string& section, const std::string& key) const {
    const entry& e = require(section, key);
    try {
        std::size_t used = 0;
        const long v = std::stol(e.value, &used);
        if (used != e.value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw parse_error("expected an integer, got '" + e.value + "'", e.line,
                          section + "." + key);
    }
}

long scenario_file::get_long_or(const std::string& section, const std::string& key,
                                long fallback) const {
    return has(section, key) ? get_long(section, key) : fallback;
}

std::vector<std::vector<double>> scenario_file::get_tuples(const std::string& section,
                                                           const std::string& key) const {
    const entry& e = require(section, key);
    std::vector<std::vector<double>> out;
    std::stringstream groups(e.value);
    std::string group;
    while (std::getline(groups, group, ';')) {
        std::stringstream fields(group);
        std::vector<double> tuple;
        std::string tok;
        while (fields >> tok) {
            try {
                std::size_t used = 0;
                tuple.push_back(std::stod(tok, &used));
                if (used != tok.size()) throw std::invalid_argument("trailing characters");
            } catch (const std::exception&) {
                throw parse_error("expected a number in tuple, got '" + tok + "'", e.line,
                                  section + "." + key);
            }
        }
        if (!tuple.empty()) out.push_back(std::move(tuple));
    }
    if (out.empty())
        throw parse_error("expected at least one tuple", e.line, section + "." + key);
    return out;
}

// ---- scenario building ------------------------------------------------------------

namespace {

cpoint parse_point(const scenario_file& f, const std::string& section, const std::string& key) {
    auto tuples = f.get_tuples(section, key);
    if (tuples.size() != 1 || tuples[0].size() != 2)
        throw parse_error("expected 're im'", 0, section + "." + key);
    return {tuples[0][0], tuples[0][1]};
}

std::vector<cpoint> spiral_points(const scenario_file& f) {
    const long count = f.get_long("geometry", "spiral_count");
    const double gap0 = f.get_double("geometry", "spiral_start_gap");
    const double decay = f.get_double("geometry", "spiral_gap_decay");
    const double step = f.get_double_or("geometry", "spiral_angle_step", 2.399963229728653);
    if (count < 1) throw parse_error("spiral_count must be positive", 0, "geometry.spiral_count");
    if (!(gap0 > 0) || !(decay > 0) || decay >= 1)
        throw parse_error("spiral gap parameters out of range", 0, "geometry.spiral_start_gap");
    std::vector<cpoint> pts;
    for (long n = 0; n < count; ++n) {
        const double gap = gap0 * std::pow(decay, static_cast<double>(n));
        pts.push_back((1.0 + gap) * std::polar(1.0, step * static_cast<double>(n)));
    }
    return pts;
}

harmonic::exhaustion exhaustion_from_union(const geom::disk_union& u, int stages) {
    std::vector<std::vector<geom::obstacle>> lists;
    for (int m = 1; m <= stages; ++m) {
        const double shrink = 1.0 - std::ldexp(1.0, -m);
        std::vector<geom::obstacle> obs;
        for (const auto& d : u.disks) {
            const double r = d.radius * shrink;
            if (r > 0) obs.emplace_back(geom::disk(d.center, r));
        }
        lists.push_back(std::move(obs));
    }
    // nested by construction; the checked() pass still validates the sampling
    return harmonic::exhaustion::checked(std::move(lists), 16);
}

}  // namespace

scenario_def build_scenario(const scenario_file& f, const run_overrides& overrides) {
    scenario_def s;
    s.name = f.get_string_or("run", "name", "scenario");
    s.pipeline = f.get_string("run", "pipeline");
    const bool needs_geometry = s.pipeline != "sheets" && s.pipeline != "hm-study";

    // tolerances first (they scale the sample budget)
    s.tol = tolerance_profile::named(
        overrides.tolerance_profile.value_or(f.get_string_or("tolerances", "profile", "default")));
    s.tol.convergence_tol = f.get_double_or("tolerances", "convergence_tol", s.tol.convergence_tol);
    s.tol.decay_threshold = f.get_double_or("tolerances", "decay_threshold", s.tol.decay_threshold);
    s.tol.quarter_sample_points = static_cast<int>(
        f.get_long_or("tolerances", "quarter_sample_points", s.tol.quarter_sample_points));
    s.tol.sublevel_resolution = static_cast<int>(
        f.get_long_or("tolerances", "sublevel_resolution", s.tol.sublevel_resolution));
    s.tol.convergence_stages = static_cast<int>(
        f.get_long_or("tolerances", "convergence_stages", s.tol.convergence_stages));
    if (overrides.resolution) s.tol.sublevel_resolution = *overrides.resolution;

    // [wos] — the seed is mandatory evidence
    s.wos.seed = overrides.seed.value_or(static_cast<std::uint64_t>(f.get_long("wos", "seed")));
    long samples = overrides.samples.value_or(f.get_long("wos", "samples"));
    samples = static_cast<long>(std::llround(samples * s.tol.sample_multiplier()));
    s.wos.samples = std::max<long>(samples, 1000);
    s.wos.max_steps = static_cast<int>(f.get_long_or("wos", "max_steps", 100000));
    s.wos.workers = static_cast<int>(f.get_long_or("wos", "workers", 1));
    s.extras["shell_eps_rel"] = f.get_double_or("wos", "shell_eps_rel", 1e-4);
    s.wos.shell_eps = s.extras["shell_eps_rel"];  // made absolute per domain by the pipelines
    if (f.get_long("wos", "samples") < 1000)
        throw parameter_error("scenario: wos samples below the CI minimum of 1000");

    // [geometry]
    if (needs_geometry) {
        s.target = parse_point(f, "geometry", "target");
        s.nbhd.radius = f.get_double_or("geometry", "fine_radius", 0.45);
        const int stages = static_cast<int>(f.get_long_or("geometry", "exhaustion_stages", 3));

        if (f.has("geometry", "u_disks")) {
            for (const auto& t : f.get_tuples("geometry", "u_disks")) {
                if (t.size() != 3)
                    throw parse_error("u_disks entries need 'x y r'", 0, "geometry.u_disks");
                s.nbhd.set.disks.emplace_back(cpoint(t[0], t[1]), t[2]);
            }
            s.nbhd.ambient_radius = f.get_double_or("geometry", "ambient_radius", 1.0);
            if (f.has("geometry", "certificate_atoms")) {
                for (const auto& t : f.get_tuples("geometry", "certificate_atoms")) {
                    if (t.size() != 4)
                        throw parse_error("certificate_atoms entries need 'x y weight scale'", 0,
                                          "geometry.certificate_atoms");
                    s.nbhd.certificate.atoms.push_back({cpoint(t[0], t[1]), t[2], t[3]});
                }
                s.nbhd.certificate.additive_offset =
                    f.get_double_or("geometry", "certificate_offset", 0.0);
                s.nbhd.certificate.positive_scale =
                    f.get_double_or("geometry", "certificate_scale", 1.0);
            }
        } else if (f.has("geometry", "spiral_count")) {
            const auto points = spiral_points(f);
            const auto spec = potential::build_thin_union(points, s.target);
            s.nbhd.set = spec.set;
            s.nbhd.certificate = spec.certificate;
            s.nbhd.ambient_radius = spec.ambient_radius;
        } else {
            // no union at all: trivially thin, constant certificate
            s.nbhd.ambient_radius = f.get_double_or("geometry", "ambient_radius", 1.0);
            s.nbhd.certificate.additive_offset =
                f.get_double_or("geometry", "certificate_offset", -1.0 / 24.0);
        }
        if (!s.nbhd.set.disks.empty() && stages > 0)
            s.stages = exhaustion_from_union(s.nbhd.set, stages);
    }

    // [function]
    const std::string type = f.get_string_or("function", "type", "borel");
    if (type == "borel") {
        std::vector<finefun::borel_term> terms;
        if (f.has("function", "terms")) {
            for (const auto& t : f.get_tuples("function", "terms")) {
                if (t.size() != 5)
                    throw parse_error("borel terms need 'a_re a_im rho c_re c_im'", 0,
                                      "function.terms");
                terms.push_back({cpoint(t[0], t[1]), t[2], cpoint(t[3], t[4])});
            }
        } else {
            const double scale = f.get_double_or("function", "coeff_scale", 1.0);
            if (!(scale > 0) || scale > 1.0)
                throw parse_error("coeff_scale must be in (0, 1]", 0, "function.coeff_scale");
            for (std::size_t i = 0; i < s.nbhd.set.disks.size(); ++i) {
                const auto& d = s.nbhd.set.disks[i];
                const double n = static_cast<double>(i + 1);
                terms.push_back({d.center, d.radius, scale * d.radius / (n * n)});
            }
        }
        s.function = borel_function_spec{finefun::borel_series_fn::checked(std::move(terms))};
    } else if (type == "cauchy") {
        if (s.nbhd.set.disks.empty())
            throw parse_error("cauchy scenarios need a nonempty union", 0, "geometry.u_disks");
        const double amp = f.get_double_or("function", "density_amplitude", 1.0);
        int res = static_cast<int>(f.get_long_or("function", "resolution", 256));
        if (overrides.resolution) res = *overrides.resolution;
        auto fn = finefun::cauchy_transform_fn::sample(
            s.nbhd.set, res, [amp](cpoint) { return cpoint(amp, 0.0); }, amp > 0);
        cauchy_function_spec spec{std::move(fn),
                                  static_cast<int>(f.get_long_or("function", "stages", 4))};
        s.function = std::move(spec);
    } else if (type == "sqrt_sum") {
        std::vector<finefun::sqrt_branch_sum_fn::term> terms;
        for (const auto& t : f.get_tuples("function", "segments")) {
            if (t.size() != 6 && t.size() != 7)
                throw parse_error("segments need 'a_re a_im b_re b_im c_re c_im [sign]'", 0,
                                  "function.segments");
            finefun::sqrt_branch_sum_fn::term term;
            term.a = cpoint(t[0], t[1]);
            term.b = cpoint(t[2], t[3]);
            term.coeff = cpoint(t[4], t[5]);
            term.sign = t.size() == 7 ? static_cast<int>(t[6]) : 1;
            terms.push_back(term);
        }
        sqrt_sum_function_spec spec{finefun::sqrt_branch_sum_fn::checked(std::move(terms)),
                                    static_cast<int>(f.get_long_or("function", "max_flips", 1))};
        s.function = std::move(spec);
    } else {
        throw parse_error("unknown function type '" + type + "'", 0, "function.type");
    }

    // [study] knobs pass through as numbers
    if (auto sit = f.sections.find("study"); sit != f.sections.end())
        for (const auto& [key, e] : sit->second) s.extras["study." + key] = f.get_double("study", key);

    if (needs_geometry) s.validate();
    return s;
}

// ---- CSV ----------------------------------------------------------------------------

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw error("cannot write '" + path + "'");
    for (std::size_t i = 0; i < header.size(); ++i)
        out << (i ? "," : "") << header[i];
    out << "\n";
    char buf[40];
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", row[i]);
            out << (i ? "," : "") << buf;
        }
        out << "\n";
    }
}

// ---- certificate JSON -----------------------------------------------------------------

namespace {

json point_json(cpoint z) { return json::array({z.real(), z.imag()}); }
cpoint point_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

json estimate_json(const harmonic::hm_estimate& e) {
    json j;
    j["value"] = e.value;
    j["std_error"] = e.std_error;
    j["samples_used"] = e.samples_used;
    j["lost_to_max_steps"] = e.lost_to_max_steps;
    j["unreliable"] = e.unreliable;
    j["killed_on"] = e.killed_on;
    return j;
}

harmonic::hm_estimate estimate_from(const json& j) {
    harmonic::hm_estimate e;
    e.value = j.at("value").get<double>();
    e.std_error = j.at("std_error").get<double>();
    e.samples_used = j.at("samples_used").get<long>();
    e.lost_to_max_steps = j.at("lost_to_max_steps").get<long>();
    e.unreliable = j.at("unreliable").get<bool>();
    e.killed_on = j.at("killed_on").get<std::map<std::string, long>>();
    return e;
}

}  // namespace

std::string certificate_to_json(const hull_certificate& cert) {
    json j;
    j["format"] = "finelab-certificate/1";
    j["verdict"] = cert.verdict;
    j["failed_step"] = cert.failed_step;
    j["detail"] = cert.detail;
    j["target"] = point_json(cert.target);
    j["rho"] = cert.rho;
    if (cert.arc_j) {
        j["arc_j"] = {{"center", point_json(cert.arc_j->circle_center)},
                      {"radius", cert.arc_j->circle_radius},
                      {"start", cert.arc_j->start_angle},
                      {"sweep", cert.arc_j->sweep}};
    }
    j["r1"] = cert.r1;
    j["sublevel"] = json::array();
    for (const auto& d : cert.sublevel.disks)
        j["sublevel"].push_back({{"center", point_json(d.center)}, {"radius", d.radius}});
    json atoms = json::array();
    for (const auto& a : cert.normalized_cert.atoms)
        atoms.push_back({{"location", point_json(a.location)}, {"weight", a.weight},
                         {"scale", a.scale}});
    j["normalized_certificate"] = {{"atoms", atoms},
                                   {"additive_offset", cert.normalized_cert.additive_offset},
                                   {"positive_scale", cert.normalized_cert.positive_scale}};
    j["thinness"] = {{"thin_certified", cert.thinness.thin_certified},
                     {"value_at_target", cert.thinness.value_at_target},
                     {"worst_set_sample", cert.thinness.worst_set_sample},
                     {"samples_checked", cert.thinness.samples_checked},
                     {"detail", cert.thinness.detail}};
    json stage_minima = json::array();
    for (const auto& sm : cert.quarter.stage_minima)
        stage_minima.push_back({{"stage", sm.stage},
                                {"min_value", sm.min_value},
                                {"std_error_at_min", sm.std_error_at_min},
                                {"pass", sm.pass}});
    json sample_points = json::array();
    for (cpoint z : cert.quarter.sample_points) sample_points.push_back(point_json(z));
    json estimates = json::array();
    for (const auto& row : cert.quarter.estimates) {
        json r = json::array();
        for (const auto& e : row) r.push_back(estimate_json(e));
        estimates.push_back(std::move(r));
    }
    j["quarter"] = {{"stage_minima", stage_minima},
                    {"sample_points", sample_points},
                    {"estimates", estimates},
                    {"pass", cert.quarter.pass},
                    {"unreliable", cert.quarter.unreliable}};
    json conv = json::array();
    for (const auto& row : cert.convergence.rows)
        conv.push_back({{"stage", row.stage}, {"sup_gap", row.sup_gap},
                        {"sup_norm", row.sup_norm}});
    j["convergence"] = {{"rows", conv},
                        {"tolerance", cert.convergence.tolerance},
                        {"bound_ok", cert.convergence.bound_ok},
                        {"pass", cert.convergence.pass}};
    json prop = json::array();
    for (const auto& [n, v] : cert.propagation) prop.push_back({{"N", n}, {"bound", v}});
    j["propagation"] = prop;
    j["base_seed"] = std::to_string(cert.base_seed);
    j["samples"] = cert.samples;
    j["shell_eps"] = cert.shell_eps;
    j["max_steps"] = cert.max_steps;
    json stages = json::array();
    for (const auto& st : cert.stage_disks) {
        json stage = json::array();
        for (const auto& d : st)
            stage.push_back({{"center", point_json(d.center)}, {"radius", d.radius}});
        stages.push_back(std::move(stage));
    }
    j["stage_disks"] = stages;
    return j.dump(2);
}

hull_certificate certificate_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw parse_error(std::string("invalid certificate JSON: ") + e.what(), 0, "certificate");
    }
    if (j.value("format", "") != "finelab-certificate/1")
        throw parse_error("unknown certificate format", 0, "format");

    hull_certificate cert;
    cert.verdict = j.at("verdict").get<std::string>();
    cert.failed_step = j.at("failed_step").get<std::string>();
    cert.detail = j.at("detail").get<std::string>();
    cert.target = point_from(j.at("target"));
    cert.rho = j.at("rho").get<double>();
    if (j.contains("arc_j")) {
        const auto& a = j.at("arc_j");
        cert.arc_j = geom::circ_arc::from_sweep(point_from(a.at("center")),
                                                a.at("radius").get<double>(),
                                                a.at("start").get<double>(),
                                                a.at("sweep").get<double>());
    }
    cert.r1 = j.at("r1").get<double>();
    for (const auto& d : j.at("sublevel"))
        cert.sublevel.disks.emplace_back(point_from(d.at("center")), d.at("radius").get<double>());
    const auto& nc = j.at("normalized_certificate");
    for (const auto& a : nc.at("atoms"))
        cert.normalized_cert.atoms.push_back({point_from(a.at("location")),
                                              a.at("weight").get<double>(),
                                              a.at("scale").get<double>()});
    cert.normalized_cert.additive_offset = nc.at("additive_offset").get<double>();
    cert.normalized_cert.positive_scale = nc.at("positive_scale").get<double>();
    const auto& th = j.at("thinness");
    cert.thinness.thin_certified = th.at("thin_certified").get<bool>();
    cert.thinness.value_at_target = th.at("value_at_target").get<double>();
    cert.thinness.worst_set_sample = th.at("worst_set_sample").get<double>();
    cert.thinness.samples_checked = th.at("samples_checked").get<int>();
    cert.thinness.detail = th.at("detail").get<std::string>();
    const auto& q = j.at("quarter");
    cert.quarter.r1 = cert.r1;
    cert.quarter.sublevel = cert.sublevel;
    for (const auto& sm : q.at("stage_minima"))
        cert.quarter.stage_minima.push_back({sm.at("stage").get<std::size_t>(),
                                             sm.at("min_value").get<double>(),
                                             sm.at("std_error_at_min").get<double>(),
                                             sm.at("pass").get<bool>()});
    for (const auto& z : q.at("sample_points"))
        cert.quarter.sample_points.push_back(point_from(z));
    for (const auto& row : q.at("estimates")) {
        std::vector<harmonic::hm_estimate> r;
        for (const auto& e : row) r.push_back(estimate_from(e));
        cert.quarter.estimates.push_back(std::move(r));
    }
    cert.quarter.pass = q.at("pass").get<bool>();
    cert.quarter.unreliable = q.at("unreliable").get<bool>();
    const auto& cv = j.at("convergence");
    for (const auto& row : cv.at("rows"))
        cert.convergence.rows.push_back({row.at("stage").get<int>(),
                                         row.at("sup_gap").get<double>(),
                                         row.at("sup_norm").get<double>()});
    cert.convergence.tolerance = cv.at("tolerance").get<double>();
    cert.convergence.bound_ok = cv.at("bound_ok").get<bool>();
    cert.convergence.pass = cv.at("pass").get<bool>();
    for (const auto& p : j.at("propagation"))
        cert.propagation.emplace_back(p.at("N").get<double>(), p.at("bound").get<double>());
    cert.base_seed = std::stoull(j.at("base_seed").get<std::string>());
    cert.samples = j.at("samples").get<long>();
    cert.shell_eps = j.at("shell_eps").get<double>();
    cert.max_steps = j.at("max_steps").get<int>();
    for (const auto& st : j.at("stage_disks")) {
        std::vector<geom::disk> disks;
        for (const auto& d : st)
            disks.emplace_back(point_from(d.at("center")), d.at("radius").get<double>());
        cert.stage_disks.push_back(std::move(disks));
    }
    return cert;
}

// ---- pipeline runner --------------------------------------------------------------------

namespace {

namespace fs = std::filesystem;

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

run_result run_certify(const scenario_def& s0, const run_overrides& overrides) {
    scenario_def s = s0;
    run_result out;

    hull_certificate cert = certify_fine_continuation(s);

    const std::string cert_path = join(overrides.out_dir, "certificate.json");
    {
        std::ofstream f(cert_path);
        f << certificate_to_json(cert) << "\n";
    }
    out.artifacts.push_back(cert_path);

    std::vector<std::vector<double>> minima_rows;
    for (const auto& sm : cert.quarter.stage_minima)
        minima_rows.push_back({static_cast<double>(sm.stage), sm.min_value, sm.std_error_at_min,
                               sm.min_value - (0.25 - 3.0 * sm.std_error_at_min)});
    write_csv(join(overrides.out_dir, "omega_minima.csv"),
              {"stage", "min_omega", "std_error", "margin"}, minima_rows);
    out.artifacts.push_back(join(overrides.out_dir, "omega_minima.csv"));

    std::vector<std::vector<double>> point_rows;
    for (std::size_t stage = 0; stage < cert.quarter.estimates.size(); ++stage)
        for (std::size_t k = 0; k < cert.quarter.estimates[stage].size(); ++k) {
            const auto& e = cert.quarter.estimates[stage][k];
            const cpoint z = cert.quarter.sample_points[k];
            point_rows.push_back({static_cast<double>(stage), z.real(), z.imag(), e.value,
                                  e.std_error});
        }
    write_csv(join(overrides.out_dir, "quarter_points.csv"),
              {"stage", "z_re", "z_im", "omega", "std_error"}, point_rows);
    out.artifacts.push_back(join(overrides.out_dir, "quarter_points.csv"));

    std::vector<std::vector<double>> conv_rows;
    for (const auto& row : cert.convergence.rows)
        conv_rows.push_back({static_cast<double>(row.stage), row.sup_gap, row.sup_norm});
    write_csv(join(overrides.out_dir, "convergence.csv"), {"stage", "sup_gap", "sup_norm"},
              conv_rows);
    out.artifacts.push_back(join(overrides.out_dir, "convergence.csv"));

    std::vector<std::vector<double>> prop_rows;
    for (const auto& [n, v] : cert.propagation) prop_rows.push_back({n, v});
    write_csv(join(overrides.out_dir, "propagation.csv"), {"N", "bound"}, prop_rows);
    out.artifacts.push_back(join(overrides.out_dir, "propagation.csv"));

    std::ostringstream os;
    os << "verdict " << cert.verdict;
    if (!cert.certified()) {
        os << " at step '" << cert.failed_step << "': " << cert.detail;
        out.exit_code = 1;
    } else {
        // prove the certificate replays from its own stored data
        std::ifstream f(cert_path);
        std::stringstream buf;
        buf << f.rdbuf();
        const verify_result v = verify_certificate(certificate_from_json(buf.str()));
        os << "; re-verify: " << (v.ok ? "bitwise OK" : v.detail) << " ("
           << v.estimates_checked << " estimates)";
        if (!v.ok)
            out.exit_code = 1;
        else if (cert.quarter.unreliable)
            out.exit_code = 3;
    }
    out.summary = os.str();
    return out;
}

run_result run_components(const scenario_def& s, const run_overrides& overrides) {
    run_result out;

    potential::thin_set_spec thin{s.target, s.nbhd.set, s.nbhd.certificate, s.nbhd.ambient_radius};
    const auto verdict = potential::thinness_report(thin);
    if (!verdict.thin_certified) {
        out.exit_code = 1;
        out.summary = "thinness certificate inconclusive; component analysis refused";
        return out;
    }

    double rho = s.nbhd.ambient_radius * 0.5;
    if (auto it = s.extras.find("study.component_rho"); it != s.extras.end()) rho = it->second;
    rho = std::min(rho, 0.9 * s.nbhd.radius);
    int resolution = 512;
    if (auto it = s.extras.find("study.resolution"); it != s.extras.end())
        resolution = static_cast<int>(it->second);
    if (overrides.resolution) resolution = *overrides.resolution;

    const component_report rep = unique_component_finder(s, rho, resolution);

    std::vector<std::vector<double>> rows;
    for (const auto& c : rep.components)
        rows.push_back({static_cast<double>(c.id), static_cast<double>(c.cells),
                        c.hits_half_circle ? 1.0 : 0.0});
    write_csv(join(overrides.out_dir, "components.csv"), {"id", "cells", "hits_half_circle"},
              rows);
    out.artifacts.push_back(join(overrides.out_dir, "components.csv"));

    json rj;
    rj["unique_nonthin"] = rep.unique_nonthin;
    rj["detail"] = rep.detail;
    rj["resolution"] = rep.resolution;
    rj["rho"] = rho;
    {
        std::ofstream f(join(overrides.out_dir, "components.json"));
        f << rj.dump(2) << "\n";
    }
    out.artifacts.push_back(join(overrides.out_dir, "components.json"));

    out.exit_code = rep.unique_nonthin >= 0 ? 0 : 1;
    out.summary = rep.detail;
    return out;
}

run_result run_sheets(const scenario_def& s, const run_overrides& overrides) {
    run_result out;
    const auto* spec = std::get_if<sqrt_sum_function_spec>(&s.function);
    if (!spec) throw parameter_error("sheets pipeline needs a sqrt_sum function");

    const sheet_atlas atlas = branched_cover_enumerate(spec->fn, spec->max_flips);

    // sheet identity at random points on every sheet
    rng_stream rng(s.wos.seed, 0xabcd);
    double worst_identity = 0.0;
    const int points = 200;
    for (std::size_t sheet = 0; sheet < atlas.sheets.size(); ++sheet) {
        for (int it = 0; it < points; ++it) {
            const cpoint z = std::polar(2.5 + 2.0 * rng.next_double(),
                                        geom::two_pi * rng.next_double());
            bool near_cut = false;
            for (const auto& t : spec->fn.terms)
                if (geom::point_segment_distance(z, geom::segment(t.a, t.b)) < 1e-6)
                    near_cut = true;
            if (near_cut) continue;
            for (std::size_t n = 0; n < spec->fn.terms.size(); ++n) {
                const std::size_t other = atlas.flipped_neighbor(sheet, n);
                if (other == SIZE_MAX) continue;
                cpoint rest = 0.0;
                for (std::size_t l = 0; l < spec->fn.terms.size(); ++l) {
                    if (l == n) continue;
                    const auto& t = spec->fn.terms[l];
                    rest += static_cast<double>(atlas.sheets[sheet].signs[l]) * t.coeff *
                            finefun::eval_sqrt_branch(t.a, t.b, z);
                }
                const auto& tn = spec->fn.terms[n];
                const cpoint w = atlas.eval(other, z);
                const cpoint lhs = (w - rest) * (w - rest);
                const cpoint rhs = tn.coeff * tn.coeff * (z - tn.a) * (z - tn.b);
                const double rel = std::abs(lhs - rhs) /
                                   std::max({std::abs(lhs), std::abs(rhs), 1e-30});
                worst_identity = std::max(worst_identity, rel);
            }
        }
    }

    // monodromy around the first branch point lands on the flipped sheet
    double worst_monodromy = 0.0;
    bool monodromy_ok = true;
    for (std::size_t n = 0; n < spec->fn.terms.size(); ++n) {
        const auto& t = spec->fn.terms[n];
        double clearance = std::abs(t.b - t.a);
        for (std::size_t l = 0; l < spec->fn.terms.size(); ++l) {
            if (l == n) continue;
            clearance = std::min(clearance,
                                 geom::point_segment_distance(
                                     t.a, geom::segment(spec->fn.terms[l].a, spec->fn.terms[l].b)));
        }
        const monodromy_result m = continue_around(spec->fn, t.a, 0.25 * clearance);
        for (std::size_t l = 0; l < m.landed_signs.size(); ++l)
            if (m.landed_signs[l] != (l == n ? -1 : 1)) monodromy_ok = false;
        worst_monodromy = std::max(worst_monodromy, m.match_error);
    }

    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < atlas.sheets.size(); ++i) {
        std::vector<double> row{static_cast<double>(i),
                                static_cast<double>(atlas.sheets[i].flips_from_base)};
        for (int sign : atlas.sheets[i].signs) row.push_back(sign);
        rows.push_back(std::move(row));
    }
    std::vector<std::string> header{"sheet", "flips"};
    for (std::size_t n = 0; n < spec->fn.terms.size(); ++n)
        header.push_back("sign_" + std::to_string(n));
    write_csv(join(overrides.out_dir, "sheets.csv"), header, rows);
    out.artifacts.push_back(join(overrides.out_dir, "sheets.csv"));

    json rj;
    rj["sheets"] = atlas.sheets.size();
    rj["worst_identity_rel"] = worst_identity;
    rj["worst_monodromy"] = worst_monodromy;
    rj["monodromy_lands_on_flipped_sheet"] = monodromy_ok;
    {
        std::ofstream f(join(overrides.out_dir, "sheets.json"));
        f << rj.dump(2) << "\n";
    }
    out.artifacts.push_back(join(overrides.out_dir, "sheets.json"));

    const bool pass = worst_identity <= 1e-10 && monodromy_ok && worst_monodromy <= 1e-8;
    out.exit_code = pass ? 0 : 1;
    std::ostringstream os;
    os << atlas.sheets.size() << " sheets; identity rel " << worst_identity << "; monodromy "
       << (monodromy_ok ? "ok" : "WRONG") << " err " << worst_monodromy;
    out.summary = os.str();
    return out;
}

run_result run_hm_study(const scenario_def& s, const run_overrides& overrides) {
    run_result out;
    const long cases = static_cast<long>(s.extras.count("study.cases")
                                             ? s.extras.at("study.cases")
                                             : 20);
    rng_stream rng(s.wos.seed, 0x57d);
    std::vector<std::vector<double>> rows;
    bool all_ok = true;
    bool any_unreliable = false;
    for (long c = 0; c < cases; ++c) {
        const cpoint center(rng.uniform(-1, 1), rng.uniform(-1, 1));
        const double radius = rng.uniform(0.5, 2.0);
        const double start = rng.uniform(0, geom::two_pi);
        const double sweep = rng.uniform(0.3, 5.5);
        const auto arc = geom::circ_arc::from_sweep(center, radius, start, sweep);
        const cpoint z = center + rng.uniform(0.0, 0.8) * radius *
                                      std::polar(1.0, rng.uniform(0, geom::two_pi));
        const geom::disk d(center, radius);
        const double exact = harmonic::hm_disk_arc_exact(d, arc, z);
        harmonic::wos_config cfg = s.wos;
        cfg.shell_eps = s.extras.at("shell_eps_rel") * radius;
        cfg.seed = mix64(s.wos.seed ^ mix64(static_cast<std::uint64_t>(c)));
        const harmonic::slit_domain dom(d, {});
        const auto est = harmonic::hm_wos(dom, harmonic::arc_target{arc}, z, cfg);
        const double diff = std::abs(est.value - exact);
        const bool ok = diff <= 3.0 * est.std_error;
        all_ok = all_ok && ok;
        any_unreliable = any_unreliable || est.unreliable;
        rows.push_back({static_cast<double>(c), z.real(), z.imag(), exact, est.value,
                        est.std_error, diff, ok ? 1.0 : 0.0});
    }
    write_csv(join(overrides.out_dir, "hm_study.csv"),
              {"case", "z_re", "z_im", "exact", "wos", "std_error", "abs_diff", "pass"}, rows);
    out.artifacts.push_back(join(overrides.out_dir, "hm_study.csv"));
    out.exit_code = all_ok ? (any_unreliable ? 3 : 0) : 1;
    std::ostringstream os;
    os << cases << " randomized disk/arc cases, " << (all_ok ? "all" : "NOT all")
       << " within 3 standard errors";
    out.summary = os.str();
    return out;
}

run_result run_decay_study(const scenario_def& s, const run_overrides& overrides) {
    run_result out;
    auto extra = [&](const std::string& key, double fallback) {
        auto it = s.extras.find("study." + key);
        return it != s.extras.end() ? it->second : fallback;
    };
    const geom::disk k(cpoint(extra("k_re", 0.0), extra("k_im", 0.0)), extra("k_radius", 0.3));
    const cpoint p(extra("p_re", 2.0), extra("p_im", 0.0));
    const int stages = static_cast<int>(extra("stages", 6));
    const double chain_len = extra("chain_length", 0.8);
    const double width = extra("chain_width", 0.02);
    const double gap0 = extra("gap0", 0.4);
    const double gap_decay = extra("gap_decay", 1.0 / 3.0);

    // fattened segment marching toward p along the ray away from K; stages
    // share one grid of disk positions so they nest exactly
    const cpoint dir = (p - k.center) / std::abs(p - k.center);
    std::vector<std::vector<geom::obstacle>> lists;
    for (int n = 1; n <= stages; ++n) {
        const double gap = gap0 * std::pow(gap_decay, n);
        std::vector<geom::obstacle> obs;
        for (double t = chain_len; t >= gap + width; t -= width)
            obs.emplace_back(geom::disk(p + t * dir, width));
        lists.push_back(std::move(obs));
    }
    harmonic::exhaustion ex;
    ex.stages = std::move(lists);  // nested by construction

    harmonic::wos_config cfg = s.wos;
    cfg.shell_eps = s.extras.at("shell_eps_rel") / k.radius;  // w-plane outer radius is 1/k.radius

    const auto seq = harmonic::exterior_hm_decay(k, ex, p, cfg, s.tol.decay_threshold);

    std::vector<std::vector<double>> rows;
    for (const auto& e : seq.values)
        rows.push_back({static_cast<double>(e.stage), e.value, e.std_error});
    write_csv(join(overrides.out_dir, "decay.csv"), {"stage", "h_n", "std_error"}, rows);
    out.artifacts.push_back(join(overrides.out_dir, "decay.csv"));

    out.exit_code = (seq.monotone_pass && seq.decay_pass) ? 0 : 1;
    std::ostringstream os;
    os << "monotone " << (seq.monotone_pass ? "PASS" : "FAIL") << ", decay "
       << (seq.decay_pass ? "PASS" : "FAIL") << " (final h = "
       << (seq.values.empty() ? 1.0 : seq.values.back().value) << ")";
    out.summary = os.str();
    return out;
}

}  // namespace

run_result run_scenario_file(const std::string& path, const run_overrides& overrides) {
    run_result out;
    try {
        const scenario_file file = parse_scenario_path(path);
        const scenario_def s = build_scenario(file, overrides);
        fs::create_directories(overrides.out_dir);
        if (s.pipeline == "certify") return run_certify(s, overrides);
        if (s.pipeline == "components") return run_components(s, overrides);
        if (s.pipeline == "sheets") return run_sheets(s, overrides);
        if (s.pipeline == "hm-study") return run_hm_study(s, overrides);
        if (s.pipeline == "decay-study") return run_decay_study(s, overrides);
        throw parse_error("unknown pipeline '" + s.pipeline + "'", 0, "run.pipeline");
    } catch (const parse_error& e) {
        out.exit_code = 2;
        out.summary = std::string("input error: ") + e.what();
    } catch (const parameter_error& e) {
        out.exit_code = 2;
        out.summary = std::string("input error: ") + e.what();
    } catch (const error& e) {
        out.exit_code = 1;
        out.summary = std::string("pipeline error: ") + e.what();
    }
    return out;
}

}  // namespace finelab::scenario
