#pragma once

#include <array>
#include <complex>
#include <functional>
#include <utility>
#include <variant>
#include <vector>

namespace finelab::geom {

using cpoint = std::complex<double>;

constexpr double pi = 3.141592653589793238462643383279502884;
constexpr double two_pi = 2.0 * pi;

bool is_finite(cpoint z);

// angle folded into [0, 2*pi)
double wrap_angle(double theta);

struct disk {
    cpoint center;
    double radius;

    disk(cpoint c, double r);

    bool contains(cpoint z) const { return std::abs(z - center) < radius; }
    bool contains_closed(cpoint z) const { return std::abs(z - center) <= radius; }
    // distance from z to the boundary circle (works inside and outside)
    double boundary_distance(cpoint z) const { return std::abs(std::abs(z - center) - radius); }
};

// Counterclockwise circle arc.  Stored as (start, sweep) so a sweep of 2*pi is
// representable without wraparound ambiguity.
struct circ_arc {
    cpoint circle_center;
    double circle_radius;
    double start_angle;
    double sweep;  // in (0, 2*pi]

    circ_arc(cpoint c, double R, double start, double end);
    static circ_arc from_sweep(cpoint c, double R, double start, double sweep);

    double end_angle() const { return start_angle + sweep; }
    double length() const { return circle_radius * sweep; }
    cpoint point_at(double theta) const {
        return circle_center + circle_radius * std::polar(1.0, theta);
    }
    cpoint start_point() const { return point_at(start_angle); }
    cpoint end_point() const { return point_at(end_angle()); }
    // is the direction theta strictly inside the arc (mod 2*pi)?
    bool contains_angle(double theta) const;

  private:
    circ_arc() = default;
};

struct segment {
    cpoint a, b;

    segment(cpoint a, cpoint b);

    double length() const { return std::abs(b - a); }
    cpoint point_at(double t) const { return a + t * (b - a); }
};

double point_segment_distance(cpoint z, const segment& s);

struct polygon {
    std::vector<cpoint> vertices;  // implicit closing edge last->first

    bool contains(cpoint z) const;            // strict interior (crossing parity)
    double boundary_distance(cpoint z) const;  // min distance over edges
};

// Rhomb given by two opposite corners plus the ratio of the perpendicular
// diagonal to the corner diagonal.  aspect = 1 puts 45 degrees between a side
// and the corner diagonal.
struct rhomb {
    cpoint corner_a, corner_b;
    double aspect;

    rhomb(cpoint a, cpoint b, double aspect);

    // order: corner_a, M - i*d*aspect, corner_b, M + i*d*aspect  (d = (b-a)/2)
    std::array<cpoint, 4> vertices() const;
    polygon as_polygon() const;
    bool contains(cpoint z) const;
    double boundary_distance(cpoint z) const;
};

using obstacle = std::variant<disk, rhomb, segment, polygon>;

bool obstacle_contains(const obstacle& o, cpoint z);
double obstacle_boundary_distance(const obstacle& o, cpoint z);

struct disk_union {
    std::vector<disk> disks;

    bool empty() const { return disks.empty(); }
    bool contains(cpoint z) const;
    bool contains_closed(cpoint z) const;
    bool pairwise_disjoint() const;
};

// Distance from z to the boundary of (outer minus obstacles); z must be
// strictly inside outer and strictly outside every obstacle.
double distance_to_set(cpoint z, const std::vector<obstacle>& obstacles, const disk& outer);

struct rhomb_over_arc {
    rhomb shape;
    bool contains_arc;  // false when the aspect cannot cover the arc's sagitta
};

// One similar rhomb per arc, first diagonal joining the arc endpoints.
// Arcs must live on the unit circle, be pairwise disjoint and shorter than pi.
std::vector<rhomb_over_arc> rhombs_from_arcs(const std::vector<circ_arc>& arcs, double aspect);

struct radial_graph {
    // (phi, r) samples grouped per generating rhomb, phi ascending per group
    std::vector<std::vector<std::pair<double, double>>> per_arc;

    std::vector<cpoint> points() const;
};

struct radial_decomposition {
    radial_graph outer;       // part of the rhomb boundaries outside the unit disk
    radial_graph inner;       // part inside or on the closed unit disk
    double lipschitz_upper;   // C: max over sampled pairs of |T z1 - T z2| / |z1 - z2|
    double expansion_lower;   // c: min over sampled pairs of the same ratio
};

// Splits rhomb boundaries (rhombs over unit-circle arcs) into the r(phi)
// graphs above/below the circle and measures the bi-Lipschitz constants of
// T(e^{i phi}) = r(phi) e^{i phi} by pair sampling.
radial_decomposition radial_graph_decompose(const std::vector<rhomb>& rhombs,
                                            int samples_per_edge = 1000);

// ---- quadrature ------------------------------------------------------------

struct gauss_rule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

const gauss_rule& gauss_legendre(int n);

struct contour_piece {
    std::variant<circ_arc, segment> geometry;
    int nodes;  // >= 8
};

// Oriented chain of smooth pieces; pieces must connect end-to-start.
struct contour {
    std::vector<contour_piece> pieces;
    bool closed;

    contour(std::vector<contour_piece> pieces, bool closed, double connect_tol = 1e-9);

    static contour circle(const disk& d, int arcs = 4, int nodes_per_piece = 48);
    static contour of_polygon(const polygon& p, int nodes_per_edge = 48);
    static contour of_rhomb(const rhomb& r, int nodes_per_edge = 48);
};

struct quadrature_result {
    cpoint value;
    double error_estimate;  // |value - value at half the nodes| (Richardson-style)
};

// Composite Gauss-Legendre along the contour; throws singular_node_error when
// the integrand is not finite at a node.
quadrature_result contour_integral(const contour& c, const std::function<cpoint(cpoint)>& f);

}  // namespace finelab::geom
