#include "finelab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include "finelab/errors.hpp"
#include "finelab/rng.hpp"
#include "finelab/sampling.hpp"

namespace finelab::scenario {

using geom::two_pi;

tolerance_profile tolerance_profile::named(const std::string& name) {
    tolerance_profile t;
    t.name = name;
    if (name == "strict") {
        t.convergence_tol = 1e-8;
    } else if (name == "fast") {
        t.convergence_tol = 1e-4;
        t.quarter_sample_points = 4;
        t.sublevel_resolution = 256;
    } else if (name != "default") {
        throw parameter_error("unknown tolerance profile '" + name + "'");
    }
    return t;
}

double tolerance_profile::sample_multiplier() const {
    if (name == "strict") return 4.0;
    if (name == "fast") return 0.25;
    return 1.0;
}

void scenario_def::validate() const {
    if (std::abs(std::abs(target) - 1.0) > 1e-9)
        throw parameter_error("scenario: target point must lie on the unit circle");
    for (const auto& d : nbhd.set.disks)
        if (std::abs(d.center) - d.radius <= 1.0)
            throw parameter_error("scenario: U must avoid the closed unit disk");
    if (!(nbhd.radius > 0)) throw parameter_error("scenario: fine radius must be positive");
    if (wos.samples < 1000)
        throw parameter_error("scenario: wos samples below the CI minimum of 1000");
    if (wos.seed == 0) throw parameter_error("scenario: a nonzero seed is required");
}

// ---- certification pipeline ----------------------------------------------------

std::uint64_t quarter_seed(std::uint64_t base, std::size_t stage, std::size_t point) {
    return harmonic::stage_point_seed(base, stage, point);
}

namespace {

// approximants for each function family; excluded sets are the stage compacts
finefun::approximant_seq make_approximants(const fine_function_spec& spec,
                                           std::function<cpoint(cpoint)>& limit_out,
                                           int& stages_out) {
    if (const auto* b = std::get_if<borel_function_spec>(&spec)) {
        const auto fn = b->fn;
        limit_out = [fn](cpoint z) { return finefun::eval_borel(fn, z); };
        stages_out = static_cast<int>(fn.terms.size());
        return finefun::borel_approximants(fn);
    }
    if (const auto* c = std::get_if<cauchy_function_spec>(&spec)) {
        const auto fn = c->fn;
        const auto masks = finefun::canonical_exhaustion(fn, c->stages);
        limit_out = [fn](cpoint z) { return finefun::eval_cauchy_transform(fn, z); };
        stages_out = c->stages;
        finefun::approximant_seq seq;
        // shared bound: the rearrangement estimate for the Cauchy kernel against
        // a bounded density of this total area
        const double area = fn.cell_area() * static_cast<double>(fn.nx) * fn.ny;
        seq.uniform_bound = fn.sup_density * 2.0 * std::sqrt(geom::pi * area) + 1e-9;
        seq.generator = [fn, masks](int n) {
            finefun::approximant_stage st;
            const auto mask = masks[std::min<std::size_t>(n - 1, masks.size() - 1)];
            st.eval = [fn, mask](cpoint z) { return finefun::cauchy_partial(fn, mask, z); };
            st.excluded = [fn, mask](cpoint z) {
                const int ix = static_cast<int>(std::floor((z.real() - fn.origin.real()) / fn.cell));
                const int iy = static_cast<int>(std::floor((z.imag() - fn.origin.imag()) / fn.cell));
                if (ix < 0 || iy < 0 || ix >= fn.nx || iy >= fn.ny) return false;
                return mask.covers(ix, iy) && fn.value_at(ix, iy) != cpoint(0.0);
            };
            return st;
        };
        return seq;
    }
    const auto& q = std::get<sqrt_sum_function_spec>(spec);
    const auto fn = q.fn;
    limit_out = [fn](cpoint z) { return finefun::eval_sqrt_sum(fn, z); };
    stages_out = static_cast<int>(fn.terms.size());
    finefun::approximant_seq seq;
    double bound = 0.0;
    for (const auto& t : fn.terms) {
        const double reach = 2.0;  // evaluation stays inside |z| <= 2 here
        bound += std::abs(t.coeff) *
                 std::sqrt((reach + std::abs(t.a)) * (reach + std::abs(t.b)));
    }
    seq.uniform_bound = bound + 1e-9;
    seq.generator = [fn](int n) {
        finefun::approximant_stage st;
        finefun::sqrt_branch_sum_fn partial;
        partial.terms.assign(fn.terms.begin(),
                             fn.terms.begin() + std::min<std::size_t>(n, fn.terms.size()));
        st.eval = [partial](cpoint z) { return finefun::eval_sqrt_sum(partial, z); };
        st.excluded = [partial](cpoint z) {
            for (const auto& t : partial.terms)
                if (geom::point_segment_distance(z, geom::segment(t.a, t.b)) < 1e-9) return true;
            return false;
        };
        return st;
    };
    return seq;
}

}  // namespace

hull_certificate certify_fine_continuation(const scenario_def& s) {
    s.validate();

    hull_certificate cert;
    cert.target = s.target;
    cert.base_seed = s.wos.seed;
    cert.samples = s.wos.samples;
    cert.shell_eps = s.wos.shell_eps;
    cert.max_steps = s.wos.max_steps;

    auto fail = [&](const std::string& step, const std::string& why) {
        cert.verdict = "FAILED";
        cert.failed_step = step;
        cert.detail = why;
        return cert;
    };

    // 1. thinness certificate for U at p
    potential::thin_set_spec thin{s.target, s.nbhd.set, s.nbhd.certificate, s.nbhd.ambient_radius};
    cert.thinness = potential::thinness_report(thin);
    if (!cert.thinness.thin_certified) return fail("thinness", cert.thinness.detail);

    // 2. normalization: rho with a clear circle and the -1/12 / -1 gaps
    potential::normalize_options nopts;
    nopts.seed = s.wos.seed;
    nopts.rho_max = 0.5;  // keeps a 5*pi/6 arc of the circle inside the unit disk
    potential::normalization_result norm;
    try {
        norm = potential::normalize_certificate(s.nbhd.certificate, s.target, s.nbhd.set, nopts);
    } catch (const error& e) {
        const std::string what = e.what();
        return fail(what.find("circle-selection") != std::string::npos ? "circle-selection"
                                                                       : "normalize",
                    what);
    }
    cert.rho = norm.rho;
    cert.normalized_cert = norm.certificate;

    // 3. the arc J: centered on the inward radial direction, length 5*pi*rho/6
    const double inward = std::arg(-s.target);
    const double sweep = 5.0 * geom::pi / 6.0;
    geom::circ_arc arc_j =
        geom::circ_arc::from_sweep(s.target, norm.rho, inward - 0.5 * sweep, sweep);
    for (int k = 0; k <= 64; ++k) {
        const cpoint q = arc_j.point_at(arc_j.start_angle + arc_j.sweep * k / 64.0);
        if (std::abs(q) >= 1.0)
            return fail("arc-selection", "the 5*pi*rho/6 arc does not fit inside the unit disk");
    }
    cert.arc_j = arc_j;

    // 4. exhaustion restricted to the certified disk (no stage disk crosses
    //    the rho circle, so the restriction is exact)
    cert.stage_disks.clear();
    for (const auto& st : s.stages.stages) {
        std::vector<geom::disk> kept;
        for (const auto& o : st) {
            const geom::disk* d = std::get_if<geom::disk>(&o);
            if (!d) return fail("quarter-bound", "exhaustion stages must consist of disks");
            if (std::abs(d->center - s.target) + d->radius < norm.rho) kept.push_back(*d);
        }
        cert.stage_disks.push_back(std::move(kept));
    }

    harmonic::exhaustion restricted;
    for (const auto& st : cert.stage_disks) {
        std::vector<geom::obstacle> obs;
        for (const auto& d : st) obs.emplace_back(d);
        restricted.stages.push_back(std::move(obs));
    }

    // 5. quarter bound over all stages; scenario files carry a relative shell
    harmonic::wos_config wos_run = s.wos;
    if (auto it = s.extras.find("shell_eps_rel"); it != s.extras.end())
        wos_run.shell_eps = it->second * norm.rho;
    cert.shell_eps = wos_run.shell_eps;

    harmonic::quarter_bound_options qopts;
    qopts.sample_points = s.tol.quarter_sample_points;
    qopts.sublevel.resolution = s.tol.sublevel_resolution;
    try {
        cert.quarter = harmonic::fine_quarter_bound(s.target, norm.rho, norm.certificate,
                                                    s.nbhd.set, restricted, arc_j, wos_run, qopts);
    } catch (const error& e) {
        return fail("quarter-bound", e.what());
    }
    cert.r1 = cert.quarter.r1;
    cert.sublevel = cert.quarter.sublevel;
    if (!cert.quarter.pass)
        return fail("quarter-bound", "a stage minimum fell below 1/4 - 3 sigma");

    // 6. uniform convergence of the approximants on sampled V
    std::function<cpoint(cpoint)> limit;
    int stages = 0;
    finefun::approximant_seq seq = make_approximants(s.function, limit, stages);
    if (s.tol.convergence_stages > 0) stages = std::min(stages, s.tol.convergence_stages);
    if (stages < 1) stages = 1;

    std::vector<cpoint> v_samples;
    for (cpoint z : disk_cloud(geom::disk(s.target, s.nbhd.radius), 512, s.wos.seed, 23)) {
        if (s.nbhd.set.contains_closed(z)) continue;
        bool on_cut = false;
        if (const auto* q = std::get_if<sqrt_sum_function_spec>(&s.function)) {
            for (const auto& t : q->fn.terms)
                if (geom::point_segment_distance(z, geom::segment(t.a, t.b)) < 1e-9) on_cut = true;
        }
        if (!on_cut) v_samples.push_back(z);
        if (v_samples.size() >= 256) break;
    }
    if (v_samples.empty()) return fail("convergence", "no admissible sample points on V");
    try {
        cert.convergence =
            finefun::uniform_convergence_check(seq, v_samples, stages, s.tol.convergence_tol, limit);
    } catch (const error& e) {
        return fail("convergence", e.what());
    }
    if (!cert.convergence.pass)
        return fail("convergence", "approximants do not reach the configured tolerance");

    // 7. propagation table at the certified omega >= 1/4
    cert.propagation.clear();
    for (double n : s.tol.propagation_ns)
        cert.propagation.emplace_back(n, harmonic::propagation_bound(n, 0.25));

    cert.verdict = "CERTIFIED";
    cert.detail = "all checks passed";
    return cert;
}

verify_result verify_certificate(const hull_certificate& cert) {
    verify_result out;
    if (!cert.certified()) {
        out.detail = "certificate is not CERTIFIED";
        return out;
    }
    if (!cert.arc_j) {
        out.detail = "certificate carries no arc";
        return out;
    }

    // replay every stored estimate with the stored seeds
    std::vector<std::vector<geom::obstacle>> all_stages;
    all_stages.emplace_back();
    for (const auto& st : cert.stage_disks) {
        std::vector<geom::obstacle> obs;
        for (const auto& d : st) obs.emplace_back(d);
        all_stages.push_back(std::move(obs));
    }
    if (cert.quarter.estimates.size() != all_stages.size()) {
        out.detail = "stage count mismatch between estimates and stored exhaustion";
        return out;
    }

    const geom::disk ambient(cert.target, cert.rho);
    for (std::size_t stage = 0; stage < all_stages.size(); ++stage) {
        const harmonic::slit_domain dom(ambient, all_stages[stage]);
        const auto& row = cert.quarter.estimates[stage];
        if (row.size() != cert.quarter.sample_points.size()) {
            out.detail = "sample point count mismatch";
            return out;
        }
        for (std::size_t k = 0; k < row.size(); ++k) {
            harmonic::wos_config cfg{cert.shell_eps, cert.max_steps, cert.samples,
                                     quarter_seed(cert.base_seed, stage, k), 1};
            const harmonic::hm_estimate replay = harmonic::hm_wos(
                dom, harmonic::arc_target{*cert.arc_j}, cert.quarter.sample_points[k], cfg);
            ++out.estimates_checked;
            if (replay.value != row[k].value || replay.std_error != row[k].std_error) {
                std::ostringstream os;
                os << "estimate mismatch at stage " << stage << ", point " << k << ": replay "
                   << replay.value << " vs stored " << row[k].value;
                out.detail = os.str();
                return out;
            }
        }
    }

    // arithmetic recheck of the stored pass flags
    for (const auto& sm : cert.quarter.stage_minima) {
        double min_value = 2.0, sigma = 0.0;
        for (const auto& est : cert.quarter.estimates[sm.stage])
            if (est.value < min_value) {
                min_value = est.value;
                sigma = est.std_error;
            }
        if (min_value != sm.min_value || (min_value >= 0.25 - 3.0 * sigma) != sm.pass) {
            out.detail = "stored stage minimum does not re-derive";
            return out;
        }
    }
    out.ok = true;
    out.detail = "all stored estimates reproduced bitwise";
    return out;
}

// ---- component analysis ------------------------------------------------------------

component_report unique_component_finder(const scenario_def& s, double rho, int resolution) {
    if (!(rho > 0) || rho >= s.nbhd.radius)
        throw parameter_error("unique_component_finder: rho must be in (0, fine radius)");

    component_report rep;
    rep.resolution = resolution;

    const cpoint p = s.target;
    const double r = s.nbhd.radius;
    const double h = 2.0 * r / resolution;
    const cpoint corner = p - cpoint(r, r);
    std::vector<int> label(static_cast<std::size_t>(resolution) * resolution, -2);  // -2 blocked
    auto cell_center = [&](int ix, int iy) {
        return corner + cpoint((ix + 0.5) * h, (iy + 0.5) * h);
    };
    auto index = [&](int ix, int iy) { return static_cast<std::size_t>(iy) * resolution + ix; };

    for (int iy = 0; iy < resolution; ++iy)
        for (int ix = 0; ix < resolution; ++ix) {
            const cpoint c = cell_center(ix, iy);
            if (std::abs(c - p) >= r - h) continue;
            if (std::abs(c) <= 1.0 + 0.5 * h) continue;  // stay clear of the closed unit disk
            bool blocked = false;
            for (const auto& d : s.nbhd.set.disks)
                if (std::abs(c - d.center) <= d.radius) {
                    blocked = true;
                    break;
                }
            if (!blocked) label[index(ix, iy)] = -1;  // free, unlabeled
        }

    int next_label = 0;
    for (int iy = 0; iy < resolution; ++iy)
        for (int ix = 0; ix < resolution; ++ix) {
            if (label[index(ix, iy)] != -1) continue;
            const int id = next_label++;
            long cells = 0;
            std::deque<std::pair<int, int>> queue{{ix, iy}};
            label[index(ix, iy)] = id;
            while (!queue.empty()) {
                auto [cx, cy] = queue.front();
                queue.pop_front();
                ++cells;
                const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
                for (int d = 0; d < 4; ++d) {
                    const int nx = cx + dx[d], ny = cy + dy[d];
                    if (nx < 0 || ny < 0 || nx >= resolution || ny >= resolution) continue;
                    if (label[index(nx, ny)] != -1) continue;
                    label[index(nx, ny)] = id;
                    queue.push_back({nx, ny});
                }
            }
            rep.components.push_back({id, cells, false});
        }

    // sample the exterior half circle |z - p| = rho, |z| > 1
    std::vector<int> hits;
    int outside_grid = 0;
    for (int k = 0; k < 1024; ++k) {
        const cpoint q = p + rho * std::polar(1.0, two_pi * k / 1024);
        if (std::abs(q) <= 1.0 + h) continue;  // not the exterior half
        const int ix = static_cast<int>(std::floor((q.real() - corner.real()) / h));
        const int iy = static_cast<int>(std::floor((q.imag() - corner.imag()) / h));
        if (ix < 0 || iy < 0 || ix >= resolution || iy >= resolution) {
            ++outside_grid;
            continue;
        }
        const int id = label[index(ix, iy)];
        if (id >= 0)
            hits.push_back(id);
        else
            ++outside_grid;
    }

    if (hits.empty()) {
        rep.unique_nonthin = -1;
        rep.detail = "no sampled exterior half-circle point lands in a free component";
        return rep;
    }
    const int first = hits.front();
    const bool all_same = std::all_of(hits.begin(), hits.end(), [&](int id) { return id == first; });
    for (auto& c : rep.components)
        c.hits_half_circle = std::any_of(hits.begin(), hits.end(),
                                         [&](int id) { return id == c.id; });
    if (!all_same) {
        rep.unique_nonthin = -1;
        rep.detail = "sampled half-circle points fall into several components";
        return rep;
    }
    rep.unique_nonthin = first;
    std::ostringstream os;
    os << "component " << first << " carries the exterior half-circle at rho = " << rho;
    rep.detail = os.str();
    return rep;
}

// ---- branched covering ---------------------------------------------------------------

sheet_atlas branched_cover_enumerate(const finefun::sqrt_branch_sum_fn& f, int flips) {
    const std::size_t k = f.terms.size();
    if (flips < 0 || static_cast<std::size_t>(flips) > k)
        throw parameter_error("branched_cover_enumerate: flips must be in [0, segment count]");

    sheet_atlas atlas;
    atlas.base = f;
    for (const auto& t : f.terms) atlas.branch_points.emplace_back(t.a, t.b);

    // enumerate sign vectors by increasing flip count, lexicographic inside
    std::vector<int> base_signs;
    for (const auto& t : f.terms) base_signs.push_back(t.sign);
    atlas.sheets.push_back({base_signs, 0});

    std::vector<std::size_t> idx;
    std::function<void(std::size_t, std::size_t)> emit = [&](std::size_t start,
                                                             std::size_t remaining) {
        if (remaining == 0) {
            auto signs = base_signs;
            for (std::size_t i : idx) signs[i] = -signs[i];
            atlas.sheets.push_back({signs, static_cast<int>(idx.size())});
            return;
        }
        for (std::size_t i = start; i + remaining <= k; ++i) {
            idx.push_back(i);
            emit(i + 1, remaining - 1);
            idx.pop_back();
        }
    };
    for (int c = 1; c <= flips; ++c) emit(0, static_cast<std::size_t>(c));
    return atlas;
}

cpoint sheet_atlas::eval(std::size_t sheet_index, cpoint z) const {
    if (sheet_index >= sheets.size()) throw parameter_error("sheet index out of range");
    finefun::sqrt_branch_sum_fn f = base;
    for (std::size_t i = 0; i < f.terms.size(); ++i) f.terms[i].sign = sheets[sheet_index].signs[i];
    return finefun::eval_sqrt_sum(f, z);
}

std::size_t sheet_atlas::flipped_neighbor(std::size_t sheet_index, std::size_t n) const {
    if (sheet_index >= sheets.size() || n >= base.terms.size())
        throw parameter_error("flipped_neighbor: index out of range");
    auto want = sheets[sheet_index].signs;
    want[n] = -want[n];
    for (std::size_t i = 0; i < sheets.size(); ++i)
        if (sheets[i].signs == want) return i;
    return SIZE_MAX;
}

monodromy_result continue_around(const finefun::sqrt_branch_sum_fn& f, cpoint center,
                                 double radius, int steps) {
    if (!(radius > 0)) throw parameter_error("continue_around: radius must be positive");
    if (steps < 16) throw parameter_error("continue_around: need at least 16 steps");

    const std::size_t k = f.terms.size();
    std::vector<cpoint> tracked(k);
    std::vector<cpoint> start(k);

    auto term_at = [&](std::size_t l, cpoint z) {
        return finefun::eval_sqrt_branch(f.terms[l].a, f.terms[l].b, z);
    };

    // nudge the start angle off any branch cut
    double theta0 = 0.0;
    for (int guard = 0; guard < 32; ++guard) {
        bool clean = true;
        const cpoint z0 = center + radius * std::polar(1.0, theta0);
        for (std::size_t l = 0; l < k; ++l)
            if (geom::point_segment_distance(z0, geom::segment(f.terms[l].a, f.terms[l].b)) < 1e-9)
                clean = false;
        if (clean) break;
        theta0 += 1e-3;
    }

    const cpoint z0 = center + radius * std::polar(1.0, theta0);
    for (std::size_t l = 0; l < k; ++l) tracked[l] = start[l] = term_at(l, z0);

    for (int step = 1; step <= steps; ++step) {
        double theta = theta0 + two_pi * step / steps;
        cpoint z = center + radius * std::polar(1.0, theta);
        bool on_cut = false;
        for (std::size_t l = 0; l < k; ++l)
            if (geom::point_segment_distance(z, geom::segment(f.terms[l].a, f.terms[l].b)) < 1e-9)
                on_cut = true;
        if (on_cut) {
            theta += 0.25 * two_pi / steps;
            z = center + radius * std::polar(1.0, theta);
        }
        for (std::size_t l = 0; l < k; ++l) {
            const cpoint w = term_at(l, z);
            tracked[l] = std::abs(w - tracked[l]) <= std::abs(-w - tracked[l]) ? w : -w;
        }
    }

    monodromy_result out;
    out.match_error = 0.0;
    for (std::size_t l = 0; l < k; ++l) {
        const bool flipped = std::abs(tracked[l] + start[l]) < std::abs(tracked[l] - start[l]);
        out.landed_signs.push_back(flipped ? -1 : 1);
        out.match_error =
            std::max(out.match_error,
                     std::abs(tracked[l] - (flipped ? -start[l] : start[l])));
    }
    return out;
}

}  // namespace finelab::scenario
