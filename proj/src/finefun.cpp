#include "finelab/finefun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "finelab/errors.hpp"
#include "finelab/sampling.hpp"

namespace finelab::finefun {

using geom::pi;
using geom::two_pi;

// ---- Borel series -------------------------------------------------------------

borel_series_fn borel_series_fn::checked(std::vector<borel_term> terms) {
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const auto& t = terms[i];
        const double n = static_cast<double>(i + 1);
        if (!(std::abs(t.pole) > 1.0))
            throw parameter_error("borel term " + std::to_string(i + 1) +
                                  ": pole must lie outside the closed unit disk");
        if (!(t.radius > 0))
            throw parameter_error("borel term " + std::to_string(i + 1) +
                                  ": radius must be positive");
        if (std::abs(t.pole) - t.radius <= 1.0)
            throw parameter_error("borel term " + std::to_string(i + 1) +
                                  ": disk meets the closed unit disk");
        if (std::abs(t.coeff) > t.radius / (n * n) * (1.0 + 1e-12))
            throw parameter_error("borel term " + std::to_string(i + 1) +
                                  ": |c_n| exceeds rho_n / n^2");
    }
    for (std::size_t i = 0; i < terms.size(); ++i)
        for (std::size_t j = i + 1; j < terms.size(); ++j)
            if (std::abs(terms[i].pole - terms[j].pole) <= terms[i].radius + terms[j].radius)
                throw parameter_error("borel term disks " + std::to_string(i + 1) + " and " +
                                      std::to_string(j + 1) + " overlap");
    borel_series_fn f;
    f.terms = std::move(terms);
    return f;
}

disk_union borel_series_fn::excluded_disks(std::size_t first_n) const {
    disk_union u;
    const std::size_t n = std::min(first_n, terms.size());
    for (std::size_t i = 0; i < n; ++i) u.disks.emplace_back(terms[i].pole, terms[i].radius);
    return u;
}

cpoint eval_borel_partial(const borel_series_fn& f, std::size_t n, cpoint z) {
    for (std::size_t i = 0; i < f.terms.size(); ++i)
        if (std::abs(z - f.terms[i].pole) < f.terms[i].radius)
            throw domain_error("eval_borel: point inside excluded disk " + std::to_string(i + 1));
    cpoint sum = 0.0;
    const std::size_t m = std::min(n, f.terms.size());
    for (std::size_t i = 0; i < m; ++i) sum += f.terms[i].coeff / (z - f.terms[i].pole);
    return sum;
}

cpoint eval_borel(const borel_series_fn& f, cpoint z) {
    return eval_borel_partial(f, f.terms.size(), z);
}

double borel_tail_bound(const borel_series_fn& f, std::size_t n) {
    double bound = 0.0;
    for (std::size_t i = n; i < f.terms.size(); ++i) {
        const double k = static_cast<double>(i + 1);
        bound += 1.0 / (k * k);
    }
    return bound;
}

// ---- Cauchy transforms -----------------------------------------------------------

cauchy_transform_fn cauchy_transform_fn::sample(const disk_union& support, int resolution,
                                                const std::function<cpoint(cpoint)>& density,
                                                bool nonneg_flag) {
    if (resolution < 2) throw parameter_error("cauchy_transform_fn: resolution must be >= 2");
    if (support.disks.empty()) throw parameter_error("cauchy_transform_fn: empty support");

    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& d : support.disks) {
        x0 = std::min(x0, d.center.real() - d.radius);
        x1 = std::max(x1, d.center.real() + d.radius);
        y0 = std::min(y0, d.center.imag() - d.radius);
        y1 = std::max(y1, d.center.imag() + d.radius);
    }
    const double side = std::max(x1 - x0, y1 - y0) * 1.0000001;

    cauchy_transform_fn f;
    f.support = support;
    f.resolution = resolution;
    f.cell = side / resolution;
    f.nx = resolution;
    f.ny = resolution;
    f.origin = cpoint(0.5 * (x0 + x1) - 0.5 * side, 0.5 * (y0 + y1) - 0.5 * side);
    f.values.assign(std::size_t(f.nx) * f.ny, cpoint(0.0));
    f.nonneg = nonneg_flag;

    for (int iy = 0; iy < f.ny; ++iy) {
        for (int ix = 0; ix < f.nx; ++ix) {
            const cpoint c = f.cell_center(ix, iy);
            if (!support.contains(c)) continue;
            cpoint g = density(c);
            if (nonneg_flag && (g.imag() != 0.0 || g.real() < 0.0))
                throw parameter_error("cauchy_transform_fn: density flagged nonneg is not");
            f.values[std::size_t(iy) * f.nx + ix] = g;
            f.sup_density = std::max(f.sup_density, std::abs(g));
        }
    }
    return f;
}

cpoint cauchy_transform_fn::total_mass() const {
    cpoint m = 0.0;
    for (const cpoint& v : values) m += v;
    return m * cell_area();
}

namespace {

// -(1/pi) * integral over the masked cells with the singular cell replaced by
// the exact constant-density integral over the equal-area disk
cpoint cauchy_sum(const cauchy_transform_fn& f, const cell_mask* mask, cpoint z) {
    const double h2 = f.cell_area();
    const double r_eq = f.cell / std::sqrt(pi);
    const double r_eq2 = r_eq * r_eq;

    const int zx = static_cast<int>(std::floor((z.real() - f.origin.real()) / f.cell));
    const int zy = static_cast<int>(std::floor((z.imag() - f.origin.imag()) / f.cell));

    cpoint acc = 0.0;
    for (int iy = 0; iy < f.ny; ++iy) {
        for (int ix = 0; ix < f.nx; ++ix) {
            const cpoint g = f.values[std::size_t(iy) * f.nx + ix];
            if (g == cpoint(0.0)) continue;
            if (mask && !mask->covers(ix, iy)) continue;
            const cpoint c = f.cell_center(ix, iy);
            if (ix == zx && iy == zy) {
                const cpoint u = z - c;
                if (std::abs(u) < r_eq)
                    acc += g * std::conj(u);
                else
                    acc += g * r_eq2 / u;
            } else {
                acc += g * (h2 / pi) / (z - c);
            }
        }
    }
    return acc;
}

}  // namespace

cpoint eval_cauchy_transform(const cauchy_transform_fn& f, cpoint z) {
    return cauchy_sum(f, nullptr, z);
}

cauchy_eval_result eval_cauchy_transform_with_error(const cauchy_transform_fn& f, cpoint z) {
    const cpoint fine = eval_cauchy_transform(f, z);
    // 2x2 block average at half resolution
    cauchy_transform_fn coarse;
    coarse.support = f.support;
    coarse.resolution = f.resolution / 2;
    coarse.cell = 2.0 * f.cell;
    coarse.nx = f.nx / 2;
    coarse.ny = f.ny / 2;
    coarse.origin = f.origin;
    coarse.nonneg = f.nonneg;
    coarse.values.assign(std::size_t(coarse.nx) * coarse.ny, cpoint(0.0));
    for (int iy = 0; iy < coarse.ny; ++iy)
        for (int ix = 0; ix < coarse.nx; ++ix) {
            cpoint s = f.values[std::size_t(2 * iy) * f.nx + 2 * ix] +
                       f.values[std::size_t(2 * iy) * f.nx + 2 * ix + 1] +
                       f.values[std::size_t(2 * iy + 1) * f.nx + 2 * ix] +
                       f.values[std::size_t(2 * iy + 1) * f.nx + 2 * ix + 1];
            coarse.values[std::size_t(iy) * coarse.nx + ix] = 0.25 * s;
        }
    const cpoint rough = eval_cauchy_transform(coarse, z);
    return {fine, std::abs(fine - rough)};
}

long cell_mask::count() const {
    long c = 0;
    for (char v : on) c += v != 0;
    return c;
}

std::vector<cell_mask> canonical_exhaustion(const cauchy_transform_fn& f, int stages) {
    if (stages < 1) throw parameter_error("canonical_exhaustion: need at least one stage");

    // depth of each support cell inside the union
    std::vector<double> depth(f.values.size(), -1.0);
    double max_depth = 0.0;
    for (int iy = 0; iy < f.ny; ++iy)
        for (int ix = 0; ix < f.nx; ++ix) {
            if (f.values[std::size_t(iy) * f.nx + ix] == cpoint(0.0)) continue;
            const cpoint c = f.cell_center(ix, iy);
            double d = 0.0;
            for (const auto& dd : f.support.disks)
                d = std::max(d, dd.radius - std::abs(c - dd.center));
            depth[std::size_t(iy) * f.nx + ix] = d;
            max_depth = std::max(max_depth, d);
        }

    std::vector<cell_mask> masks;
    for (int s = 1; s <= stages; ++s) {
        cell_mask m;
        m.nx = f.nx;
        m.ny = f.ny;
        m.on.assign(f.values.size(), 0);
        const double cut = s == stages ? -0.5 : max_depth * std::ldexp(1.0, -s);
        for (std::size_t i = 0; i < depth.size(); ++i)
            if (depth[i] >= cut && f.values[i] != cpoint(0.0)) m.on[i] = 1;
        masks.push_back(std::move(m));
    }
    return masks;
}

cpoint cauchy_partial(const cauchy_transform_fn& f, const cell_mask& stage, cpoint z) {
    if (stage.nx != f.nx || stage.ny != f.ny)
        throw parameter_error("cauchy_partial: mask does not match the grid");
    const int zx = static_cast<int>(std::floor((z.real() - f.origin.real()) / f.cell));
    const int zy = static_cast<int>(std::floor((z.imag() - f.origin.imag()) / f.cell));
    if (zx >= 0 && zy >= 0 && zx < f.nx && zy < f.ny && stage.covers(zx, zy) &&
        f.values[std::size_t(zy) * f.nx + zx] != cpoint(0.0))
        throw domain_error("cauchy_partial: point inside the stage compact");
    return cauchy_sum(f, &stage, z);
}

double cauchy_partial_tail_bound(const cauchy_transform_fn& f, const cell_mask& stage, cpoint z) {
    const double half_diag = 0.5 * f.cell * std::sqrt(2.0);
    long missing = 0;
    double dist = std::numeric_limits<double>::infinity();
    for (int iy = 0; iy < f.ny; ++iy)
        for (int ix = 0; ix < f.nx; ++ix) {
            if (f.values[std::size_t(iy) * f.nx + ix] == cpoint(0.0)) continue;
            if (stage.covers(ix, iy)) continue;
            ++missing;
            dist = std::min(dist, std::abs(z - f.cell_center(ix, iy)) - half_diag);
        }
    if (missing == 0) return 0.0;
    if (!(dist > 0)) return std::numeric_limits<double>::infinity();
    const double area = static_cast<double>(missing) * f.cell_area();
    return f.sup_density * area / (pi * dist);
}

nonextendibility_result nonextendibility_test(const cauchy_transform_fn& f, cpoint p, double rho,
                                              double agree_rel_tol) {
    if (!(rho > 0)) throw parameter_error("nonextendibility_test: rho must be positive");
    // the circle must stay clear of the support by at least one cell
    for (const auto& d : f.support.disks)
        if (std::abs(std::abs(d.center - p) - rho) <= d.radius + f.cell)
            throw geometry_error("nonextendibility_test: circle meets the support");

    const auto circle = geom::contour::circle(geom::disk(p, rho), 4, 64);
    const auto quad = geom::contour_integral(
        circle, [&](cpoint xi) { return eval_cauchy_transform(f, xi); });

    cpoint inside_mass = 0.0;
    for (int iy = 0; iy < f.ny; ++iy)
        for (int ix = 0; ix < f.nx; ++ix) {
            const cpoint g = f.values[std::size_t(iy) * f.nx + ix];
            if (g == cpoint(0.0)) continue;
            if (std::abs(f.cell_center(ix, iy) - p) < rho) inside_mass += g;
        }
    inside_mass *= f.cell_area();

    nonextendibility_result res;
    res.contour_value = quad.value;
    res.area_value = cpoint(0.0, 2.0) * inside_mass;
    res.quadrature_error = quad.error_estimate;

    const double scale = std::max(std::abs(res.contour_value), std::abs(res.area_value));
    const bool agree = std::abs(res.contour_value - res.area_value) <=
                       agree_rel_tol * std::max(scale, 1e-300);
    const double floor = std::max(100.0 * res.quadrature_error, 1e-10);
    const bool away = std::min(std::abs(res.contour_value), std::abs(res.area_value)) > floor;
    res.verdict = (agree && away) ? extension_verdict::obstructed
                                  : extension_verdict::not_obstructed;
    return res;
}

// ---- square-root branches ----------------------------------------------------------

cpoint eval_sqrt_branch(cpoint a, cpoint b, cpoint z) {
    if (a == b) throw parameter_error("eval_sqrt_branch: branch points coincide");
    if (geom::point_segment_distance(z, geom::segment(a, b)) < 1e-12)
        throw domain_error("eval_sqrt_branch: point on the branch cut");
    const cpoint m = 0.5 * (a + b);
    const cpoint d = 0.5 * (b - a);
    const cpoint zeta = (z - m) / d;
    // principal square roots: the cuts of the two factors cancel off [-1, 1]
    return d * std::sqrt(zeta - 1.0) * std::sqrt(zeta + 1.0);
}

sqrt_branch_sum_fn sqrt_branch_sum_fn::checked(std::vector<term> terms) {
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (terms[i].sign != 1 && terms[i].sign != -1)
            throw parameter_error("sqrt term " + std::to_string(i) + ": sign must be +1 or -1");
        const geom::segment si(terms[i].a, terms[i].b);
        // segments clear of the closed unit disk
        const int probes = 32;
        for (int k = 0; k <= probes; ++k)
            if (std::abs(si.point_at(static_cast<double>(k) / probes)) <= 1.0)
                throw parameter_error("sqrt term " + std::to_string(i) +
                                      ": segment meets the closed unit disk");
        for (std::size_t j = i + 1; j < terms.size(); ++j) {
            const geom::segment sj(terms[j].a, terms[j].b);
            double gap = std::numeric_limits<double>::infinity();
            for (int k = 0; k <= probes; ++k) {
                gap = std::min(gap, geom::point_segment_distance(
                                        si.point_at(static_cast<double>(k) / probes), sj));
                gap = std::min(gap, geom::point_segment_distance(
                                        sj.point_at(static_cast<double>(k) / probes), si));
            }
            if (gap <= 0.0)
                throw parameter_error("sqrt terms " + std::to_string(i) + " and " +
                                      std::to_string(j) + ": segments intersect");
        }
    }
    sqrt_branch_sum_fn f;
    f.terms = std::move(terms);
    return f;
}

sqrt_branch_sum_fn sqrt_branch_sum_fn::with_sign_flipped(std::size_t n) const {
    if (n >= terms.size()) throw parameter_error("with_sign_flipped: index out of range");
    sqrt_branch_sum_fn g = *this;
    g.terms[n].sign = -g.terms[n].sign;
    return g;
}

cpoint eval_sqrt_sum(const sqrt_branch_sum_fn& f, cpoint z) {
    cpoint sum = 0.0;
    for (const auto& t : f.terms)
        sum += static_cast<double>(t.sign) * t.coeff * eval_sqrt_branch(t.a, t.b, z);
    return sum;
}

// ---- saw geometry --------------------------------------------------------------------

saw_geometry saw_geometry::checked(std::vector<geom::rhomb> rhombs, double ring_radius,
                                   double cone_angle, cpoint center) {
    if (!(ring_radius > 0)) throw parameter_error("saw_geometry: ring radius must be positive");
    if (!(cone_angle > 0) || cone_angle >= pi / 2)
        throw parameter_error("saw_geometry: cone angle must be in (0, pi/2)");
    const geom::disk ring(center, ring_radius);
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < rhombs.size(); ++l) {
        const auto& rh = rhombs[l];
        if (std::abs(std::abs(rh.corner_a) - 1.0) > 1e-9 ||
            std::abs(std::abs(rh.corner_b) - 1.0) > 1e-9)
            throw geometry_error("saw_geometry: rhomb corners must lie on the unit circle");
        for (cpoint v : rh.vertices())
            if (!ring.contains(v))
                throw geometry_error("saw_geometry: rhomb " + std::to_string(l) +
                                     " not inside the decomposition circle");
        const double chord = std::abs(rh.corner_b - rh.corner_a);
        if (chord > prev * (1.0 + 1e-9))
            throw precondition_error("saw_geometry: rhombs must be ordered by decreasing size");
        prev = chord;
    }
    // pairwise disjoint closures (probed)
    for (std::size_t i = 0; i < rhombs.size(); ++i)
        for (std::size_t j = i + 1; j < rhombs.size(); ++j) {
            const auto pi_ = rhombs[i].as_polygon();
            const auto pj = rhombs[j].as_polygon();
            for (int e = 0; e < 4; ++e)
                for (int k = 0; k <= 16; ++k) {
                    auto vi = rhombs[i].vertices();
                    cpoint q = vi[e] + (vi[(e + 1) % 4] - vi[e]) * (k / 16.0);
                    if (pj.contains(q))
                        throw geometry_error("saw_geometry: rhombs " + std::to_string(i) +
                                             " and " + std::to_string(j) + " overlap");
                }
        }
    saw_geometry g;
    g.rhombs = std::move(rhombs);
    g.ring_radius = ring_radius;
    g.cone_angle = cone_angle;
    g.center = center;
    return g;
}

double saw_geometry::arc_angle(std::size_t l) const {
    const double chord = std::abs(rhombs[l].corner_b - rhombs[l].corner_a);
    return 2.0 * std::asin(std::min(1.0, 0.5 * chord));
}

saw_decomposition saw_cauchy_decomposition(const saw_geometry& g,
                                           const std::function<cpoint(cpoint)>& f, cpoint z) {
    if (std::abs(z - g.center) >= g.ring_radius)
        throw domain_error("saw_cauchy_decomposition: point outside the decomposition circle");
    for (std::size_t l = 0; l < g.rhombs.size(); ++l)
        if (g.rhombs[l].contains(z) || g.rhombs[l].boundary_distance(z) < 1e-12)
            throw domain_error("saw_cauchy_decomposition: point inside rhomb " +
                               std::to_string(l));

    const cpoint i_unit(0.0, 1.0);
    auto cauchy = [&](const geom::contour& c) {
        auto q = geom::contour_integral(
            c, [&](cpoint xi) { return f(xi) / (xi - z); });
        return std::make_pair(q.value / (two_pi * i_unit), q.error_estimate / two_pi);
    };

    saw_decomposition out;
    double err = 0.0;
    auto [jv, je] = cauchy(geom::contour::circle(geom::disk(g.center, g.ring_radius), 4, 48));
    out.j_value = jv;
    err += je;
    cpoint total = jv;
    for (const auto& rh : g.rhombs) {
        auto [lv, le] = cauchy(geom::contour::of_rhomb(rh, 48));
        out.j_l_values.push_back(lv);
        total -= lv;
        err += le;
    }
    out.reconstruction = total;
    out.quadrature_error = err;
    return out;
}

saw_constants measure_saw_constants(const saw_geometry& g, int samples) {
    auto dec = geom::radial_graph_decompose(g.rhombs, std::max(16, samples / 4));

    saw_constants k;
    k.graph_lipschitz = dec.lipschitz_upper;

    // sampled lower bound for |xi - z| >= const |xi' - z'| with xi on the rhomb
    // boundaries and z in the saw domain
    std::vector<cpoint> xis;
    for (const auto& grp : {dec.outer, dec.inner})
        for (cpoint q : grp.points()) xis.push_back(q);
    std::size_t stride = std::max<std::size_t>(1, xis.size() / static_cast<std::size_t>(samples));

    std::vector<cpoint> zs;
    for (int j = 0; j < samples; ++j) {
        // radial probes through the annulus around the circle, off the rhombs
        const double phi = std::arg(g.center) + (j - samples / 2) * (g.ring_radius / samples);
        for (double r : {0.75, 0.9, 1.1, 1.25}) {
            const cpoint z = r * std::polar(1.0, phi);
            if (std::abs(z - g.center) >= g.ring_radius) continue;
            bool blocked = false;
            for (const auto& rh : g.rhombs)
                if (rh.contains(z) || rh.boundary_distance(z) < 1e-9) blocked = true;
            if (!blocked) zs.push_back(z);
        }
    }

    double lower = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < xis.size(); i += stride) {
        const cpoint xi = xis[i];
        const cpoint xi_p = xi / std::abs(xi);
        for (const cpoint& z : zs) {
            const cpoint z_p = z / std::abs(z);
            const double proj = std::abs(xi_p - z_p);
            if (proj < 1e-9) continue;
            lower = std::min(lower, std::abs(xi - z) / proj);
        }
    }
    if (!std::isfinite(lower)) lower = 1.0;
    k.projection_lower = lower;
    return k;
}

namespace {

// I(x, alpha) = integral over (0, x) of (2 sin(phi/2))^(alpha-1) dphi,
// computed after t = phi^alpha which removes the endpoint singularity
double edge_singular_integral(double x, double alpha) {
    if (x <= 0) return 0.0;
    if (alpha == 1.0) return x;
    const auto& rule = geom::gauss_legendre(64);
    const double tmax = std::pow(x, alpha);
    double acc = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const double t = 0.5 * tmax * (rule.nodes[k] + 1.0);
        const double phi = std::pow(t, 1.0 / alpha);
        // ((2 sin(phi/2)) / phi)^(alpha-1) / alpha, bounded as t -> 0
        const double ratio = phi > 0 ? 2.0 * std::sin(0.5 * phi) / phi : 1.0;
        acc += rule.weights[k] * std::pow(ratio, alpha - 1.0) / alpha;
    }
    return acc * 0.5 * tmax;
}

}  // namespace

double hoelder_tail_estimate(const saw_geometry& g, const saw_constants& k, double alpha,
                             double c_h, std::size_t n) {
    if (!(alpha > 0) || alpha > 1.0)
        throw parameter_error("hoelder_tail_estimate: alpha must be in (0, 1]");
    if (!(c_h > 0)) throw parameter_error("hoelder_tail_estimate: Hoelder constant must be positive");
    if (n >= g.rhombs.size()) return 0.0;

    double arc_length = 0.0;
    for (std::size_t l = n; l < g.rhombs.size(); ++l) arc_length += g.arc_angle(l);

    const double c_safe = 0.5 * k.projection_lower;  // measured min, halved for safety
    const double factor =
        (2.0 * c_h * k.graph_lipschitz * std::pow(c_safe, alpha - 1.0)) / pi;
    return factor * edge_singular_integral(0.5 * arc_length, alpha);
}

double hoelder_tail_estimate(const saw_geometry& g, double alpha, double c_h, std::size_t n) {
    return hoelder_tail_estimate(g, measure_saw_constants(g), alpha, c_h, n);
}

// ---- uniform convergence --------------------------------------------------------------

convergence_table uniform_convergence_check(const approximant_seq& seq,
                                            const std::vector<cpoint>& v_samples, int stages,
                                            double tolerance,
                                            const std::function<cpoint(cpoint)>& limit) {
    if (stages < 1) throw parameter_error("uniform_convergence_check: need at least one stage");
    if (v_samples.empty())
        throw parameter_error("uniform_convergence_check: no sample points given");

    std::vector<approximant_stage> st;
    st.reserve(stages);
    for (int n = 1; n <= stages; ++n) st.push_back(seq.generator(n));

    for (int n = 0; n < stages; ++n)
        for (const cpoint& z : v_samples)
            if (st[n].excluded && st[n].excluded(z))
                throw domain_error("uniform_convergence_check: sample inside the stage-" +
                                   std::to_string(n + 1) + " compact");

    const std::function<cpoint(cpoint)> lim = limit ? limit : st.back().eval;

    convergence_table table;
    table.tolerance = tolerance;
    table.bound_ok = true;
    for (int n = 0; n < stages; ++n) {
        convergence_row row{n + 1, 0.0, 0.0};
        for (const cpoint& z : v_samples) {
            const cpoint fn = st[n].eval(z);
            row.sup_gap = std::max(row.sup_gap, std::abs(fn - lim(z)));
            row.sup_norm = std::max(row.sup_norm, std::abs(fn));
        }
        if (row.sup_norm > seq.uniform_bound * (1.0 + 1e-12)) table.bound_ok = false;
        table.rows.push_back(row);
    }
    table.pass = table.bound_ok && table.rows.back().sup_gap <= tolerance;
    return table;
}

approximant_seq borel_approximants(const borel_series_fn& f) {
    approximant_seq seq;
    double bound = 0.0;
    for (std::size_t i = 0; i < f.terms.size(); ++i) {
        const double k = static_cast<double>(i + 1);
        bound += std::min(std::abs(f.terms[i].coeff) / f.terms[i].radius, 1.0 / (k * k));
    }
    seq.uniform_bound = bound + 1e-12;
    seq.generator = [f](int n) {
        approximant_stage st;
        st.eval = [f, n](cpoint z) { return eval_borel_partial(f, static_cast<std::size_t>(n), z); };
        const disk_union k_n = f.excluded_disks(static_cast<std::size_t>(n));
        st.excluded = [k_n](cpoint z) { return k_n.contains_closed(z); };
        return st;
    };
    return seq;
}

}  // namespace finelab::finefun
