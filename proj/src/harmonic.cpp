#include "finelab/harmonic.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>
#include <thread>

#include "finelab/errors.hpp"
#include "finelab/rng.hpp"
#include "finelab/sampling.hpp"

namespace finelab::harmonic {

using geom::two_pi;
using geom::wrap_angle;

// ---- slit domain ------------------------------------------------------------

namespace {

bool obstacle_inside_disk(const obstacle& o, const disk& outer) {
    return std::visit(
        [&](const auto& s) -> bool {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, disk>)
                return std::abs(s.center - outer.center) + s.radius < outer.radius;
            else if constexpr (std::is_same_v<T, geom::segment>)
                return outer.contains(s.a) && outer.contains(s.b);
            else if constexpr (std::is_same_v<T, geom::rhomb>) {
                for (auto v : s.vertices())
                    if (!outer.contains(v)) return false;
                return true;
            } else {
                for (auto v : s.vertices)
                    if (!outer.contains(v)) return false;
                return true;
            }
        },
        o);
}

std::vector<cpoint> obstacle_probe_points(const obstacle& o, int n) {
    std::vector<cpoint> pts;
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, disk>) {
                for (int k = 0; k < n; ++k)
                    pts.push_back(s.center + s.radius * std::polar(1.0, two_pi * k / n));
                pts.push_back(s.center);
            } else if constexpr (std::is_same_v<T, geom::segment>) {
                for (int k = 0; k <= n; ++k)
                    pts.push_back(s.point_at(static_cast<double>(k) / n));
            } else if constexpr (std::is_same_v<T, geom::rhomb>) {
                auto v = s.vertices();
                for (int e = 0; e < 4; ++e)
                    for (int k = 0; k < n / 4 + 1; ++k)
                        pts.push_back(v[e] + (v[(e + 1) % 4] - v[e]) *
                                                 (static_cast<double>(k) / (n / 4 + 1)));
            } else {
                const std::size_t m = s.vertices.size();
                for (std::size_t e = 0; e < m; ++e)
                    for (int k = 0; k < n / static_cast<int>(m) + 1; ++k)
                        pts.push_back(s.vertices[e] +
                                      (s.vertices[(e + 1) % m] - s.vertices[e]) *
                                          (static_cast<double>(k) / (n / m + 1)));
            }
        },
        o);
    return pts;
}

}  // namespace

slit_domain::slit_domain(disk outer_, std::vector<obstacle> obstacles_, std::string label_,
                         int connectivity_grid, bool allow_overlap)
    : outer(outer_), obstacles(std::move(obstacles_)), label(std::move(label_)) {
    for (std::size_t i = 0; i < obstacles.size(); ++i)
        if (!obstacle_inside_disk(obstacles[i], outer))
            throw geometry_error("slit_domain: obstacle " + std::to_string(i) +
                                 " not contained in the outer disk");

    // pairwise disjointness: exact for disk pairs, probed otherwise
    for (std::size_t i = 0; !allow_overlap && i < obstacles.size(); ++i) {
        for (std::size_t j = i + 1; j < obstacles.size(); ++j) {
            const disk* di = std::get_if<disk>(&obstacles[i]);
            const disk* dj = std::get_if<disk>(&obstacles[j]);
            bool overlap = false;
            if (di && dj) {
                overlap = std::abs(di->center - dj->center) <= di->radius + dj->radius;
            } else {
                for (cpoint q : obstacle_probe_points(obstacles[i], 64))
                    if (geom::obstacle_contains(obstacles[j], q)) overlap = true;
                for (cpoint q : obstacle_probe_points(obstacles[j], 64))
                    if (geom::obstacle_contains(obstacles[i], q)) overlap = true;
            }
            if (overlap)
                throw geometry_error("slit_domain: obstacles " + std::to_string(i) + " and " +
                                     std::to_string(j) + " overlap");
        }
    }

    // complement connectivity by flood fill on cell centers
    const int n = connectivity_grid;
    if (n >= 8) {
        const double h = 2.0 * outer.radius / n;
        std::vector<char> free_cell(static_cast<std::size_t>(n) * n, 0);
        auto at = [&](int ix, int iy) -> char& {
            return free_cell[static_cast<std::size_t>(iy) * n + ix];
        };
        int first = -1;
        long free_count = 0;
        for (int iy = 0; iy < n; ++iy) {
            for (int ix = 0; ix < n; ++ix) {
                cpoint c = outer.center +
                           cpoint(-outer.radius + (ix + 0.5) * h, -outer.radius + (iy + 0.5) * h);
                if (std::abs(c - outer.center) >= outer.radius - h) continue;
                bool blocked = false;
                for (const auto& o : obstacles)
                    if (geom::obstacle_contains(o, c)) {
                        blocked = true;
                        break;
                    }
                if (!blocked) {
                    at(ix, iy) = 1;
                    ++free_count;
                    if (first < 0) first = iy * n + ix;
                }
            }
        }
        if (free_count == 0) throw geometry_error("slit_domain: no free interior cells");
        std::deque<int> queue{first};
        std::vector<char> seen(free_cell.size(), 0);
        seen[first] = 1;
        long reached = 1;
        while (!queue.empty()) {
            int cur = queue.front();
            queue.pop_front();
            int ix = cur % n, iy = cur / n;
            const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
            for (int d = 0; d < 4; ++d) {
                int jx = ix + dx[d], jy = iy + dy[d];
                if (jx < 0 || jy < 0 || jx >= n || jy >= n) continue;
                int idx = jy * n + jx;
                if (free_cell[idx] && !seen[idx]) {
                    seen[idx] = 1;
                    ++reached;
                    queue.push_back(idx);
                }
            }
        }
        if (reached != free_count)
            throw geometry_error("slit_domain: complement is not connected (flood fill)");
    }
}

bool slit_domain::interior_contains(cpoint z) const {
    if (!outer.contains(z)) return false;
    for (const auto& o : obstacles)
        if (geom::obstacle_contains(o, z)) return false;
    return true;
}

double slit_domain::boundary_distance(cpoint z) const {
    double best = outer.radius - std::abs(z - outer.center);
    for (const auto& o : obstacles)
        best = std::min(best, geom::obstacle_boundary_distance(o, z));
    return best;
}

exhaustion exhaustion::checked(std::vector<std::vector<obstacle>> stages,
                               int samples_per_obstacle) {
    for (std::size_t k = 0; k + 1 < stages.size(); ++k) {
        for (std::size_t i = 0; i < stages[k].size(); ++i) {
            for (cpoint q : obstacle_probe_points(stages[k][i], samples_per_obstacle)) {
                bool covered = false;
                for (const auto& o : stages[k + 1])
                    if (geom::obstacle_contains(o, q) ||
                        geom::obstacle_boundary_distance(o, q) < 1e-12) {
                        covered = true;
                        break;
                    }
                if (!covered)
                    throw geometry_error("exhaustion: stage " + std::to_string(k + 1) +
                                         " does not cover stage " + std::to_string(k) +
                                         " (obstacle " + std::to_string(i) + ")");
            }
        }
    }
    exhaustion e;
    e.stages = std::move(stages);
    return e;
}

void wos_config::validate(double outer_radius) const {
    if (!(shell_eps > 0)) throw parameter_error("wos: shell_eps must be positive");
    if (shell_eps > 0.05 * outer_radius)
        throw parameter_error("wos: shell_eps must be much smaller than the outer radius");
    if (samples < 1000) throw parameter_error("wos: samples must be at least 1000");
    if (max_steps < 1) throw parameter_error("wos: max_steps must be positive");
    if (workers < 1) throw parameter_error("wos: workers must be positive");
}

// ---- exact disk/arc harmonic measure ----------------------------------------

double hm_disk_arc_exact(const disk& d, const circ_arc& arc, cpoint z) {
    if (std::abs(arc.circle_center - d.center) > 1e-9 * std::max(1.0, d.radius) ||
        std::abs(arc.circle_radius - d.radius) > 1e-9 * std::max(1.0, d.radius))
        throw parameter_error("hm_disk_arc_exact: arc is not on the disk boundary");
    if (!d.contains(z)) throw domain_error("hm_disk_arc_exact: point not strictly inside");

    if (arc.sweep >= two_pi) return 1.0;
    if (z == d.center) return arc.sweep / two_pi;

    const cpoint zeta = (z - d.center) / d.radius;
    auto moebius = [&](double theta) {
        const cpoint w = std::polar(1.0, theta);
        return std::arg((w - zeta) / (1.0 - std::conj(zeta) * w));
    };
    const double a1 = moebius(arc.start_angle);
    const double a2 = moebius(arc.end_angle());
    return wrap_angle(a2 - a1) / two_pi;
}

// ---- walk on spheres ---------------------------------------------------------

namespace {

// flattened geometry for the hot loop
struct walk_geometry {
    cpoint center;
    double radius;
    std::vector<double> dx, dy, dr;  // disk obstacles
    std::vector<const obstacle*> general;
    std::vector<std::size_t> disk_index, general_index;

    explicit walk_geometry(const slit_domain& dom) : center(dom.outer.center), radius(dom.outer.radius) {
        for (std::size_t i = 0; i < dom.obstacles.size(); ++i) {
            if (const disk* d = std::get_if<disk>(&dom.obstacles[i])) {
                dx.push_back(d->center.real());
                dy.push_back(d->center.imag());
                dr.push_back(d->radius);
                disk_index.push_back(i);
            } else {
                general.push_back(&dom.obstacles[i]);
                general_index.push_back(i);
            }
        }
    }

    // signed distance to the domain boundary (negative once outside)
    double signed_distance(double x, double y) const {
        const double ox = x - center.real(), oy = y - center.imag();
        double best = radius - std::sqrt(ox * ox + oy * oy);
        for (std::size_t i = 0; i < dr.size(); ++i) {
            const double ux = x - dx[i], uy = y - dy[i];
            best = std::min(best, std::sqrt(ux * ux + uy * uy) - dr[i]);
        }
        const cpoint z(x, y);
        for (const obstacle* o : general) {
            double d = geom::obstacle_boundary_distance(*o, z);
            if (geom::obstacle_contains(*o, z)) d = -d;
            best = std::min(best, d);
        }
        return best;
    }

    // index of the nearest boundary feature at absorption:
    // size() (= #obstacles) encodes the outer circle
    std::size_t nearest_feature(cpoint z, std::size_t n_obstacles) const {
        double best = std::abs(radius - std::abs(z - center));
        std::size_t who = n_obstacles;
        for (std::size_t i = 0; i < dr.size(); ++i) {
            const double d = std::abs(std::abs(z - cpoint(dx[i], dy[i])) - dr[i]);
            if (d < best) {
                best = d;
                who = disk_index[i];
            }
        }
        for (std::size_t g = 0; g < general.size(); ++g) {
            const double d = geom::obstacle_boundary_distance(*general[g], z);
            if (d < best) {
                best = d;
                who = general_index[g];
            }
        }
        return who;
    }
};

struct tally {
    long hits = 0;
    long alive = 0;
    long outer_arc = 0;
    long outer_rest = 0;
    std::vector<long> per_obstacle;

    explicit tally(std::size_t n) : per_obstacle(n, 0) {}

    void merge(const tally& o) {
        hits += o.hits;
        alive += o.alive;
        outer_arc += o.outer_arc;
        outer_rest += o.outer_rest;
        for (std::size_t i = 0; i < per_obstacle.size(); ++i)
            per_obstacle[i] += o.per_obstacle[i];
    }
};

}  // namespace

hm_estimate hm_wos(const slit_domain& domain, const boundary_target& target, cpoint z,
                   const wos_config& cfg) {
    cfg.validate(domain.outer.radius);

    const circ_arc* ref_arc = nullptr;
    bool arc_is_target = false;
    std::size_t target_obstacle = domain.obstacles.size();
    if (const auto* t = std::get_if<arc_target>(&target)) {
        ref_arc = &t->arc;
        arc_is_target = true;
    } else if (const auto* t = std::get_if<outer_remainder_target>(&target)) {
        ref_arc = &t->arc;
    } else {
        target_obstacle = std::get<obstacle_target>(target).index;
        if (target_obstacle >= domain.obstacles.size())
            throw parameter_error("hm_wos: obstacle target index out of range");
    }
    if (ref_arc) {
        if (std::abs(ref_arc->circle_center - domain.outer.center) > 1e-9 ||
            std::abs(ref_arc->circle_radius - domain.outer.radius) > 1e-9)
            throw parameter_error("hm_wos: target arc is not on the outer circle");
    }

    if (!domain.interior_contains(z))
        throw precondition_error("hm_wos: start point not in the domain interior");
    if (domain.boundary_distance(z) <= cfg.shell_eps)
        throw precondition_error("hm_wos: start point within the absorption shell");

    const walk_geometry wg(domain);
    const std::size_t n_obs = domain.obstacles.size();

    auto run_chunk = [&](long begin, long end, tally& t) {
        for (long i = begin; i < end; ++i) {
            rng_stream rng(cfg.seed, static_cast<std::uint64_t>(i));
            double x = z.real(), y = z.imag();
            bool absorbed = false;
            for (int step = 0; step < cfg.max_steps; ++step) {
                const double d = wg.signed_distance(x, y);
                if (d < cfg.shell_eps) {
                    absorbed = true;
                    break;
                }
                const double phi = two_pi * rng.next_double();
                x += d * std::cos(phi);
                y += d * std::sin(phi);
            }
            if (!absorbed) {
                ++t.alive;
                continue;
            }
            const cpoint w(x, y);
            const std::size_t who = wg.nearest_feature(w, n_obs);
            bool hit = false;
            if (who == n_obs) {
                // outer circle; endpoint ties break toward the complement
                bool on_arc = false;
                if (ref_arc) on_arc = ref_arc->contains_angle(std::arg(w - domain.outer.center));
                if (on_arc)
                    ++t.outer_arc;
                else
                    ++t.outer_rest;
                hit = ref_arc && (arc_is_target ? on_arc : !on_arc);
            } else {
                ++t.per_obstacle[who];
                hit = (who == target_obstacle);
            }
            if (hit) ++t.hits;
        }
    };

    tally total(n_obs);
    if (cfg.workers <= 1) {
        run_chunk(0, cfg.samples, total);
    } else {
        std::vector<tally> parts(cfg.workers, tally(n_obs));
        std::vector<std::thread> threads;
        for (int w = 0; w < cfg.workers; ++w) {
            const long begin = cfg.samples * w / cfg.workers;
            const long end = cfg.samples * (w + 1) / cfg.workers;
            threads.emplace_back([&, w, begin, end] { run_chunk(begin, end, parts[w]); });
        }
        for (auto& th : threads) th.join();
        for (const auto& p : parts) total.merge(p);
    }

    hm_estimate est;
    est.samples_used = cfg.samples;
    est.lost_to_max_steps = total.alive;
    est.value = static_cast<double>(total.hits) / static_cast<double>(cfg.samples);
    est.std_error =
        std::sqrt(std::max(est.value * (1.0 - est.value), 1e-12) / static_cast<double>(cfg.samples));
    est.unreliable = total.alive * 100 > cfg.samples;
    if (ref_arc) {
        est.killed_on["outer:arc"] = total.outer_arc;
        est.killed_on["outer:rest"] = total.outer_rest;
    } else {
        est.killed_on["outer"] = total.outer_arc + total.outer_rest;
    }
    for (std::size_t i = 0; i < n_obs; ++i)
        est.killed_on["obstacle:" + std::to_string(i)] = total.per_obstacle[i];
    est.killed_on["alive"] = total.alive;
    return est;
}

// ---- hm2: slit measure dominates disk measure plus potential -----------------

lower_bound_report hm_lower_bound_check(const slit_domain& domain_stage, const circ_arc& arc_j,
                                        const potential::log_potential_certificate& cert,
                                        const std::vector<cpoint>& sample_points,
                                        const wos_config& cfg) {
    // spot-check normalization: certificate < 0 on the disk, < -1 on obstacles
    for (cpoint q : disk_cloud(domain_stage.outer, 256, cfg.seed, 7)) {
        if (eval_log_potential(cert, q) >= 0.0)
            throw precondition_error("hm_lower_bound_check: certificate not negative on the disk");
    }
    for (std::size_t i = 0; i < domain_stage.obstacles.size(); ++i)
        for (cpoint q : obstacle_probe_points(domain_stage.obstacles[i], 16))
            if (eval_log_potential(cert, q) >= -1.0)
                throw precondition_error(
                    "hm_lower_bound_check: certificate not below -1 on obstacle " +
                    std::to_string(i));

    lower_bound_report rep;
    bool ok = true;
    for (std::size_t k = 0; k < sample_points.size(); ++k) {
        const cpoint z = sample_points[k];
        wos_config local = cfg;
        local.seed = mix64(cfg.seed ^ mix64(0x6c6f77ull) ^ mix64(k));
        const hm_estimate est = hm_wos(domain_stage, arc_target{arc_j}, z, local);
        const double exact = hm_disk_arc_exact(domain_stage.outer, arc_j, z);
        const double pot = eval_log_potential(cert, z);
        const double margin = est.value - (exact + pot);
        rep.rows.push_back({z, est.value, est.std_error, exact, pot, margin});
        if (!(margin >= -3.0 * est.std_error)) ok = false;
    }
    rep.pass = ok && !rep.rows.empty();
    return rep;
}

// ---- quarter bound -----------------------------------------------------------

std::uint64_t stage_point_seed(std::uint64_t base, std::size_t stage, std::size_t point) {
    return mix64(base ^ mix64((static_cast<std::uint64_t>(stage) << 32) |
                              static_cast<std::uint64_t>(point)));
}

quarter_bound_result fine_quarter_bound(cpoint p, double rho,
                                        const potential::log_potential_certificate& cert,
                                        const disk_union& set, const exhaustion& stages,
                                        const circ_arc& arc_j, const wos_config& cfg,
                                        const quarter_bound_options& opts) {
    if (std::abs(arc_j.circle_center - p) > 1e-9 || std::abs(arc_j.circle_radius - rho) > 1e-9)
        throw precondition_error("fine_quarter_bound: J must be an arc of the circle |z-p| = rho");
    if (arc_j.length() < (5.0 * geom::pi * rho / 6.0) * (1.0 - 1e-12))
        throw precondition_error("fine_quarter_bound: J is shorter than 5*pi*rho/6");
    for (int k = 0; k <= 32; ++k) {
        const cpoint q = arc_j.point_at(arc_j.start_angle + arc_j.sweep * k / 32.0);
        if (std::abs(q) >= 1.0)
            throw precondition_error("fine_quarter_bound: J must stay inside the unit disk");
    }

    const disk ambient(p, rho);

    quarter_bound_result out;

    // r1 via the exact formula on a shrinking schedule; the harmonic measure
    // attains its minimum over the closed disk on the circle |z-p| = r1
    const double needed = 4.0 / 12.0 + opts.strict_gap;
    bool found = false;
    for (int k = 1; k <= opts.r1_schedule_length && !found; ++k) {
        const double r1 = rho * std::ldexp(1.0, -k);
        double min_omega = hm_disk_arc_exact(ambient, arc_j, p);
        for (cpoint q : circle_cloud(p, r1, opts.r1_circle_samples, cfg.seed, 11))
            min_omega = std::min(min_omega, hm_disk_arc_exact(ambient, arc_j, q));
        if (min_omega >= needed) {
            out.r1 = r1;
            found = true;
        }
    }
    if (!found)
        throw construction_error(
            "fine_quarter_bound: no r1 in the schedule reaches 4/12 on the inner disk");

    out.sublevel = potential::sublevel_set(cert, -1.0 / 12.0, ambient, opts.sublevel);

    // sample V1 = D(p, r1) minus U_1 (reject the cover and the exact sublevel)
    const auto& last_stage =
        stages.stages.empty() ? std::vector<obstacle>{} : stages.stages.back();
    auto candidates = disk_cloud(disk(p, 0.95 * out.r1), 64 * opts.sample_points, cfg.seed, 13);
    for (cpoint z : candidates) {
        if (static_cast<int>(out.sample_points.size()) >= opts.sample_points) break;
        if (out.sublevel.contains_closed(z)) continue;
        if (eval_log_potential(cert, z) < -1.0 / 12.0) continue;
        if (set.contains_closed(z)) continue;
        bool blocked = false;
        for (const auto& o : last_stage)
            if (geom::obstacle_contains(o, z) ||
                geom::obstacle_boundary_distance(o, z) <= 2.0 * cfg.shell_eps)
                blocked = true;
        if (!blocked) out.sample_points.push_back(z);
    }
    if (static_cast<int>(out.sample_points.size()) < opts.sample_points)
        throw construction_error("fine_quarter_bound: could not place enough sample points in V1");

    // stage 0 is the bare disk, then the exhaustion stages
    std::vector<std::vector<obstacle>> all_stages;
    all_stages.emplace_back();
    for (const auto& st : stages.stages) all_stages.push_back(st);

    bool ok = true;
    for (std::size_t s = 0; s < all_stages.size(); ++s) {
        const slit_domain dom(ambient, all_stages[s], "stage " + std::to_string(s));
        std::vector<hm_estimate> row;
        double min_value = 2.0;
        double sigma_at_min = 0.0;
        for (std::size_t k = 0; k < out.sample_points.size(); ++k) {
            wos_config local = cfg;
            local.seed = stage_point_seed(cfg.seed, s, k);
            hm_estimate est = hm_wos(dom, arc_target{arc_j}, out.sample_points[k], local);
            if (est.unreliable) out.unreliable = true;
            if (est.value < min_value) {
                min_value = est.value;
                sigma_at_min = est.std_error;
            }
            row.push_back(std::move(est));
        }
        const bool pass = min_value >= 0.25 - 3.0 * sigma_at_min;
        out.stage_minima.push_back({s, min_value, sigma_at_min, pass});
        out.estimates.push_back(std::move(row));
        if (!pass) ok = false;
    }
    out.pass = ok;
    return out;
}

// ---- closed-form bounds -------------------------------------------------------

double two_constant_bound(double eps_n, double big_c, double omega_lb) {
    if (!(eps_n > 0) || eps_n > 1.0)
        throw parameter_error("two_constant_bound: eps must be in (0, 1]");
    if (!(big_c >= 1.0)) throw parameter_error("two_constant_bound: C must be at least 1");
    if (!(omega_lb > 0) || omega_lb > 1.0)
        throw parameter_error("two_constant_bound: omega must be in (0, 1]");
    return omega_lb * std::log(eps_n) + (1.0 - omega_lb) * std::log(big_c);
}

double propagation_bound(double big_n, double omega_lb) {
    if (!(big_n >= 0)) throw parameter_error("propagation_bound: N must be nonnegative");
    if (!(omega_lb > 0) || omega_lb > 1.0)
        throw parameter_error("propagation_bound: omega must be in (0, 1]");
    return -big_n * omega_lb;
}

// ---- exterior decay ------------------------------------------------------------

disk invert_disk(const disk& d, cpoint z0) {
    const cpoint u = d.center - z0;
    const double k = std::norm(u) - d.radius * d.radius;
    if (!(k > 0)) throw geometry_error("invert_disk: inversion center inside the closed disk");
    return disk(std::conj(u) / k, d.radius / k);
}

decay_sequence exterior_hm_decay(const disk& k, const exhaustion& stages, cpoint p,
                                 const wos_config& cfg, double decay_threshold) {
    if (std::abs(p - k.center) <= k.radius)
        throw geometry_error("exterior_hm_decay: p must be outside K");
    for (const auto& st : stages.stages)
        for (const auto& o : st) {
            const disk* d = std::get_if<disk>(&o);
            if (!d)
                throw parameter_error(
                    "exterior_hm_decay: stage obstacles must be disks (exact inversion)");
            if (std::abs(d->center - k.center) <= d->radius + k.radius)
                throw geometry_error("exterior_hm_decay: stage obstacle overlaps K");
            if (std::abs(p - d->center) <= d->radius)
                throw geometry_error("exterior_hm_decay: p lies inside a stage obstacle");
        }

    const cpoint z0 = k.center;
    const disk outer_w(0.0, 1.0 / k.radius);
    const cpoint p_w = 1.0 / (p - z0);
    const circ_arc full_circle = circ_arc::from_sweep(outer_w.center, outer_w.radius, 0.0, two_pi);

    decay_sequence seq;
    const std::size_t n_stages = std::max<std::size_t>(stages.size(), 1);
    for (std::size_t s = 0; s < n_stages; ++s) {
        std::vector<obstacle> obs_w;
        if (s < stages.size())
            for (const auto& o : stages.stages[s]) obs_w.emplace_back(invert_disk(std::get<disk>(o), z0));
        // chain obstacles may overlap on purpose (one connected compact)
        const slit_domain dom(outer_w, std::move(obs_w), "decay stage " + std::to_string(s), 128,
                              true);
        wos_config local = cfg;
        local.seed = mix64(cfg.seed ^ mix64(0xdecau) ^ mix64(s));
        const hm_estimate est = hm_wos(dom, arc_target{full_circle}, p_w, local);
        seq.values.push_back({s, est.value, est.std_error});
    }

    seq.monotone_pass = true;
    for (std::size_t s = 0; s + 1 < seq.values.size(); ++s) {
        const double combined = 3.0 * std::sqrt(seq.values[s].std_error * seq.values[s].std_error +
                                                seq.values[s + 1].std_error * seq.values[s + 1].std_error);
        if (seq.values[s + 1].value > seq.values[s].value + combined) seq.monotone_pass = false;
    }
    seq.decay_pass = !seq.values.empty() && seq.values.back().value < decay_threshold;
    return seq;
}

}  // namespace finelab::harmonic
