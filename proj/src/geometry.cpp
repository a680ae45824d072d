#include "finelab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "finelab/errors.hpp"

namespace finelab::geom {

bool is_finite(cpoint z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

double wrap_angle(double theta) {
    double t = std::fmod(theta, two_pi);
    if (t < 0) t += two_pi;
    return t;
}

static void require_finite(cpoint z, const char* what) {
    if (!is_finite(z)) throw parameter_error(std::string(what) + ": coordinates must be finite");
}

disk::disk(cpoint c, double r) : center(c), radius(r) {
    require_finite(c, "disk center");
    if (!(r > 0) || !std::isfinite(r)) throw parameter_error("disk radius must be positive");
}

circ_arc::circ_arc(cpoint c, double R, double start, double end) {
    require_finite(c, "arc center");
    if (!(R > 0) || !std::isfinite(R)) throw parameter_error("arc radius must be positive");
    if (!(end > start)) throw parameter_error("arc requires end_angle > start_angle");
    if (end - start > two_pi * (1 + 1e-12))
        throw parameter_error("arc sweep exceeds a full turn");
    circle_center = c;
    circle_radius = R;
    start_angle = start;
    sweep = std::min(end - start, two_pi);
}

circ_arc circ_arc::from_sweep(cpoint c, double R, double start, double sweep) {
    return circ_arc(c, R, start, start + sweep);
}

bool circ_arc::contains_angle(double theta) const {
    if (sweep >= two_pi) return true;
    double rel = wrap_angle(theta - start_angle);
    return rel > 0 && rel < sweep;
}

segment::segment(cpoint a_, cpoint b_) : a(a_), b(b_) {
    require_finite(a_, "segment endpoint");
    require_finite(b_, "segment endpoint");
    if (a_ == b_) throw parameter_error("segment endpoints must be distinct");
}

double point_segment_distance(cpoint z, const segment& s) {
    const cpoint d = s.b - s.a;
    const double len2 = std::norm(d);
    double t = ((z - s.a).real() * d.real() + (z - s.a).imag() * d.imag()) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return std::abs(z - (s.a + t * d));
}

bool polygon::contains(cpoint z) const {
    // ray casting toward +x
    const std::size_t n = vertices.size();
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const cpoint& a = vertices[i];
        const cpoint& b = vertices[j];
        if ((a.imag() > z.imag()) != (b.imag() > z.imag())) {
            double x = a.real() + (z.imag() - a.imag()) / (b.imag() - a.imag()) * (b.real() - a.real());
            if (z.real() < x) inside = !inside;
        }
    }
    return inside;
}

double polygon::boundary_distance(cpoint z) const {
    const std::size_t n = vertices.size();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++)
        best = std::min(best, point_segment_distance(z, segment(vertices[j], vertices[i])));
    return best;
}

rhomb::rhomb(cpoint a, cpoint b, double asp) : corner_a(a), corner_b(b), aspect(asp) {
    require_finite(a, "rhomb corner");
    require_finite(b, "rhomb corner");
    if (a == b) throw parameter_error("rhomb corners must be distinct");
    if (!(asp > 0) || !std::isfinite(asp)) throw parameter_error("rhomb aspect must be positive");
}

std::array<cpoint, 4> rhomb::vertices() const {
    const cpoint m = 0.5 * (corner_a + corner_b);
    const cpoint d = 0.5 * (corner_b - corner_a);
    const cpoint t = cpoint(0, 1) * d * aspect;
    return {corner_a, m - t, corner_b, m + t};
}

polygon rhomb::as_polygon() const {
    auto v = vertices();
    return polygon{{v.begin(), v.end()}};
}

bool rhomb::contains(cpoint z) const { return as_polygon().contains(z); }

double rhomb::boundary_distance(cpoint z) const { return as_polygon().boundary_distance(z); }

bool obstacle_contains(const obstacle& o, cpoint z) {
    return std::visit(
        [&](const auto& s) -> bool {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, disk>)
                return s.contains(z);
            else if constexpr (std::is_same_v<T, segment>)
                return false;  // a slit has no interior
            else
                return s.contains(z);
        },
        o);
}

double obstacle_boundary_distance(const obstacle& o, cpoint z) {
    return std::visit(
        [&](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, disk>)
                return s.boundary_distance(z);
            else if constexpr (std::is_same_v<T, segment>)
                return point_segment_distance(z, s);
            else
                return s.boundary_distance(z);
        },
        o);
}

bool disk_union::contains(cpoint z) const {
    for (const auto& d : disks)
        if (d.contains(z)) return true;
    return false;
}

bool disk_union::contains_closed(cpoint z) const {
    for (const auto& d : disks)
        if (d.contains_closed(z)) return true;
    return false;
}

bool disk_union::pairwise_disjoint() const {
    for (std::size_t i = 0; i < disks.size(); ++i)
        for (std::size_t j = i + 1; j < disks.size(); ++j)
            if (std::abs(disks[i].center - disks[j].center) <= disks[i].radius + disks[j].radius)
                return false;
    return true;
}

double distance_to_set(cpoint z, const std::vector<obstacle>& obstacles, const disk& outer) {
    const double from_center = std::abs(z - outer.center);
    if (from_center >= outer.radius)
        throw domain_error("distance_to_set: point not inside the outer disk");
    double best = outer.radius - from_center;
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
        if (obstacle_contains(obstacles[i], z))
            throw domain_error("distance_to_set: point inside obstacle " + std::to_string(i));
        best = std::min(best, obstacle_boundary_distance(obstacles[i], z));
    }
    return best;
}

// ---- rhombs over arcs -------------------------------------------------------

static void require_unit_circle(const circ_arc& arc) {
    if (std::abs(arc.circle_center) > 1e-12 || std::abs(arc.circle_radius - 1.0) > 1e-12)
        throw geometry_error("arc must lie on the unit circle");
}

std::vector<rhomb_over_arc> rhombs_from_arcs(const std::vector<circ_arc>& arcs, double aspect) {
    if (!(aspect > 0)) throw parameter_error("aspect must be positive");
    for (const auto& a : arcs) {
        require_unit_circle(a);
        if (a.sweep >= pi) throw geometry_error("arc angular length must be below pi");
    }
    // pairwise disjoint on the circle
    for (std::size_t i = 0; i < arcs.size(); ++i) {
        for (std::size_t j = i + 1; j < arcs.size(); ++j) {
            const double si = wrap_angle(arcs[i].start_angle);
            const double sj = wrap_angle(arcs[j].start_angle);
            const double rel = wrap_angle(sj - si);
            const bool j_in_i = rel < arcs[i].sweep;
            const bool i_in_j = wrap_angle(si - sj) < arcs[j].sweep;
            if (j_in_i || i_in_j) throw geometry_error("arcs overlap");
        }
    }
    std::vector<rhomb_over_arc> out;
    out.reserve(arcs.size());
    for (const auto& a : arcs) {
        rhomb r(a.start_point(), a.end_point(), aspect);
        polygon poly = r.as_polygon();
        bool covered = true;
        const int probes = 65;
        for (int k = 1; k < probes && covered; ++k) {
            cpoint q = a.point_at(a.start_angle + a.sweep * k / probes);
            if (!poly.contains(q) && poly.boundary_distance(q) > 1e-9) covered = false;
        }
        out.push_back({r, covered});
    }
    return out;
}

// ---- radial decomposition ---------------------------------------------------

std::vector<cpoint> radial_graph::points() const {
    std::vector<cpoint> pts;
    for (const auto& grp : per_arc)
        for (const auto& [phi, r] : grp) pts.push_back(r * std::polar(1.0, phi));
    return pts;
}

radial_decomposition radial_graph_decompose(const std::vector<rhomb>& rhombs,
                                            int samples_per_edge) {
    radial_decomposition out;
    out.lipschitz_upper = 0.0;
    out.expansion_lower = std::numeric_limits<double>::infinity();

    struct sample {
        double phi, r;
    };
    std::vector<std::vector<sample>> outer_groups, inner_groups;

    for (const auto& rh : rhombs) {
        if (std::abs(std::abs(rh.corner_a) - 1.0) > 1e-9 ||
            std::abs(std::abs(rh.corner_b) - 1.0) > 1e-9)
            throw geometry_error("rhomb corners must lie on the unit circle");
        auto v = rh.vertices();  // a, p_minus, b, p_plus
        const cpoint p_minus = v[1];
        const cpoint p_plus = v[3];
        const cpoint p_out = std::abs(p_plus) >= std::abs(p_minus) ? p_plus : p_minus;
        const cpoint p_in = std::abs(p_plus) >= std::abs(p_minus) ? p_minus : p_plus;

        auto trace = [&](cpoint mid) {
            std::vector<sample> grp;
            auto push_edge = [&](cpoint from, cpoint to) {
                for (int k = 0; k < samples_per_edge; ++k) {
                    double t = static_cast<double>(k) / (samples_per_edge - 1);
                    cpoint z = from + t * (to - from);
                    grp.push_back({std::arg(z), std::abs(z)});
                }
            };
            push_edge(rh.corner_a, mid);
            push_edge(mid, rh.corner_b);
            return grp;
        };
        outer_groups.push_back(trace(p_out));
        inner_groups.push_back(trace(p_in));
    }

    auto measure = [&](const std::vector<std::vector<sample>>& groups) {
        // gather all samples; stride cross-group pairs to keep pair counts sane
        std::vector<sample> all;
        for (const auto& g : groups) all.insert(all.end(), g.begin(), g.end());
        const std::size_t n = all.size();
        if (n < 2) return;
        std::size_t stride = 1;
        while ((n / stride) * (n / stride) > 4'000'000) ++stride;
        for (std::size_t i = 0; i < n; i += stride) {
            for (std::size_t j = i + stride; j < n; j += stride) {
                const cpoint z1 = std::polar(1.0, all[i].phi);
                const cpoint z2 = std::polar(1.0, all[j].phi);
                const double dz = std::abs(z1 - z2);
                if (dz < 1e-12) continue;
                const cpoint t1 = all[i].r * z1;
                const cpoint t2 = all[j].r * z2;
                const double dt = std::abs(t1 - t2);
                out.lipschitz_upper = std::max(out.lipschitz_upper, dt / dz);
                out.expansion_lower = std::min(out.expansion_lower, dt / dz);
            }
        }
    };
    measure(outer_groups);
    measure(inner_groups);

    auto to_graph = [](const std::vector<std::vector<sample>>& groups) {
        radial_graph g;
        for (const auto& grp : groups) {
            std::vector<std::pair<double, double>> rows;
            rows.reserve(grp.size());
            for (const auto& s : grp) rows.emplace_back(s.phi, s.r);
            std::sort(rows.begin(), rows.end());
            g.per_arc.push_back(std::move(rows));
        }
        return g;
    };
    out.outer = to_graph(outer_groups);
    out.inner = to_graph(inner_groups);
    return out;
}

// ---- Gauss-Legendre ---------------------------------------------------------

static gauss_rule make_gauss_legendre(int n) {
    gauss_rule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        // Newton from the Chebyshev-like initial guess
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    }
    return rule;
}

const gauss_rule& gauss_legendre(int n) {
    if (n < 1) throw parameter_error("gauss_legendre: order must be positive");
    static std::map<int, gauss_rule> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_gauss_legendre(n)).first;
    return it->second;
}

// ---- contours ---------------------------------------------------------------

static cpoint piece_start(const contour_piece& p) {
    return std::visit(
        [](const auto& g) -> cpoint {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, circ_arc>)
                return g.start_point();
            else
                return g.a;
        },
        p.geometry);
}

static cpoint piece_end(const contour_piece& p) {
    return std::visit(
        [](const auto& g) -> cpoint {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, circ_arc>)
                return g.end_point();
            else
                return g.b;
        },
        p.geometry);
}

contour::contour(std::vector<contour_piece> ps, bool closed_, double connect_tol)
    : pieces(std::move(ps)), closed(closed_) {
    if (pieces.empty()) throw geometry_error("contour needs at least one piece");
    for (const auto& p : pieces)
        if (p.nodes < 8) throw geometry_error("contour pieces need at least 8 nodes");
    for (std::size_t i = 0; i + 1 < pieces.size(); ++i)
        if (std::abs(piece_end(pieces[i]) - piece_start(pieces[i + 1])) > connect_tol)
            throw geometry_error("contour pieces do not connect end-to-start");
    if (closed && std::abs(piece_end(pieces.back()) - piece_start(pieces.front())) > connect_tol)
        throw geometry_error("closed contour does not return to its start");
}

contour contour::circle(const disk& d, int arcs, int nodes_per_piece) {
    std::vector<contour_piece> ps;
    for (int k = 0; k < arcs; ++k) {
        double a0 = two_pi * k / arcs;
        double a1 = two_pi * (k + 1) / arcs;
        ps.push_back({circ_arc(d.center, d.radius, a0, a1), nodes_per_piece});
    }
    return contour(std::move(ps), true);
}

contour contour::of_polygon(const polygon& p, int nodes_per_edge) {
    std::vector<contour_piece> ps;
    const std::size_t n = p.vertices.size();
    for (std::size_t i = 0; i < n; ++i)
        ps.push_back({segment(p.vertices[i], p.vertices[(i + 1) % n]), nodes_per_edge});
    return contour(std::move(ps), true);
}

contour contour::of_rhomb(const rhomb& r, int nodes_per_edge) {
    return of_polygon(r.as_polygon(), nodes_per_edge);
}

namespace {

// integral over one piece at the given node count
cpoint piece_integral(const contour_piece& p, int nodes, const std::function<cpoint(cpoint)>& f) {
    const gauss_rule& rule = gauss_legendre(nodes);
    cpoint acc = 0.0;
    auto visit_nodes = [&](auto position, auto derivative) {
        for (int k = 0; k < nodes; ++k) {
            const double t = rule.nodes[k];
            const cpoint z = position(t);
            const cpoint fz = f(z);
            if (!is_finite(fz)) {
                std::ostringstream os;
                os << "contour_integral: integrand not finite at node (" << z.real() << ", "
                   << z.imag() << ")";
                throw singular_node_error(os.str());
            }
            acc += rule.weights[k] * fz * derivative(t);
        }
    };
    std::visit(
        [&](const auto& g) {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, circ_arc>) {
                const double half = 0.5 * g.sweep;
                const double mid = g.start_angle + half;
                visit_nodes(
                    [&](double t) { return g.point_at(mid + half * t); },
                    [&](double t) {
                        return cpoint(0, 1) * g.circle_radius * std::polar(1.0, mid + half * t) *
                               half;
                    });
            } else {
                const cpoint d = 0.5 * (g.b - g.a);
                const cpoint m = 0.5 * (g.a + g.b);
                visit_nodes([&](double t) { return m + d * t; }, [&](double) { return d; });
            }
        },
        p.geometry);
    return acc;
}

}  // namespace

quadrature_result contour_integral(const contour& c, const std::function<cpoint(cpoint)>& f) {
    cpoint coarse = 0.0, fine = 0.0;
    for (const auto& p : c.pieces) {
        coarse += piece_integral(p, p.nodes, f);
        fine += piece_integral(p, 2 * p.nodes, f);
    }
    return {fine, std::abs(fine - coarse)};
}

}  // namespace finelab::geom
