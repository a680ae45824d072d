#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "finelab/geometry.hpp"

namespace finelab::finefun {

using geom::cpoint;
using geom::disk;
using geom::disk_union;

// ---- Borel series -------------------------------------------------------------

struct borel_term {
    cpoint pole;    // |pole| > 1
    double radius;  // disk radius around the pole
    cpoint coeff;   // |coeff| <= radius / n^2 (n = 1-based index)
};

struct borel_series_fn {
    std::vector<borel_term> terms;

    // validates the term bounds, pairwise disjointness and clearance of the
    // closed unit disk
    static borel_series_fn checked(std::vector<borel_term> terms);

    disk_union excluded_disks(std::size_t first_n = SIZE_MAX) const;
};

// full sum; throws domain_error naming the offending disk
cpoint eval_borel(const borel_series_fn& f, cpoint z);
// partial sum of the first n terms (same admissible domain)
cpoint eval_borel_partial(const borel_series_fn& f, std::size_t n, cpoint z);
// sup-norm bound for |f - partial_n| off the disks: sum of 1/k^2 over k > n
double borel_tail_bound(const borel_series_fn& f, std::size_t n);

// ---- Cauchy transforms ----------------------------------------------------------

// Grid-sampled density on a disk union; cell-constant, zero off the union.
struct cauchy_transform_fn {
    disk_union support;
    int resolution = 0;  // cells along each side of the bounding square
    cpoint origin;       // lower-left corner of the grid
    double cell = 0.0;   // cell side
    int nx = 0, ny = 0;
    std::vector<cpoint> values;  // row-major cell values
    double sup_density = 0.0;
    bool nonneg = false;

    static cauchy_transform_fn sample(const disk_union& support, int resolution,
                                      const std::function<cpoint(cpoint)>& density,
                                      bool nonneg_flag = false);

    cpoint cell_center(int ix, int iy) const {
        return origin + cpoint((ix + 0.5) * cell, (iy + 0.5) * cell);
    }
    const cpoint& value_at(int ix, int iy) const { return values[std::size_t(iy) * nx + ix]; }
    double cell_area() const { return cell * cell; }
    cpoint total_mass() const;  // integral of the density
};

// -(1/pi) * double integral of g(xi)/(xi - z); the cell containing z uses the
// exact constant-density integral over the equal-area disk.
cpoint eval_cauchy_transform(const cauchy_transform_fn& f, cpoint z);

struct cauchy_eval_result {
    cpoint value;
    double error_estimate;  // |value - value at half resolution|
};
cauchy_eval_result eval_cauchy_transform_with_error(const cauchy_transform_fn& f, cpoint z);

// stage of an exhaustion of the support by grid cells
struct cell_mask {
    int nx = 0, ny = 0;
    std::vector<char> on;

    bool covers(int ix, int iy) const { return on[std::size_t(iy) * nx + ix] != 0; }
    long count() const;
};

// increasing masks shrinking toward the full support (the last stage is all of it)
std::vector<cell_mask> canonical_exhaustion(const cauchy_transform_fn& f, int stages);

// transform restricted to the masked cells; z must lie outside the stage compact
cpoint cauchy_partial(const cauchy_transform_fn& f, const cell_mask& stage, cpoint z);

// triangle-inequality bound |C_n(z) - C(z)| <= sup|g| area(U \ kappa_n) / (pi dist)
double cauchy_partial_tail_bound(const cauchy_transform_fn& f, const cell_mask& stage, cpoint z);

enum class extension_verdict { obstructed, not_obstructed };

struct nonextendibility_result {
    cpoint contour_value;  // contour integral of the transform over |z-p| = rho
    cpoint area_value;     // 2i * mass of g inside the circle
    double quadrature_error;
    extension_verdict verdict;
};

// Example-2 witness: both routes agree and are bounded away from zero exactly
// when mass sits inside the circle, obstructing analytic extension across p.
nonextendibility_result nonextendibility_test(const cauchy_transform_fn& f, cpoint p, double rho,
                                              double agree_rel_tol = 0.05);

// ---- square-root branch sums ------------------------------------------------------

// branch of sqrt((z-a)(z-b)) with cut on [a,b], equal to z + O(1) near infinity
cpoint eval_sqrt_branch(cpoint a, cpoint b, cpoint z);

struct sqrt_branch_sum_fn {
    struct term {
        cpoint a, b;   // segment endpoints
        cpoint coeff;
        int sign = 1;  // +1 or -1
    };
    std::vector<term> terms;

    static sqrt_branch_sum_fn checked(std::vector<term> terms);
    sqrt_branch_sum_fn with_sign_flipped(std::size_t n) const;
};

cpoint eval_sqrt_sum(const sqrt_branch_sum_fn& f, cpoint z);

// ---- saw geometry and the Cauchy decomposition -----------------------------------

struct saw_geometry {
    std::vector<geom::rhomb> rhombs;  // over unit-circle arcs, decreasing size
    double ring_radius;               // radius of the decomposition circle around `center`
    double cone_angle;                // half-angle of the non-tangential cones
    cpoint center = 1.0;              // boundary point the saw focuses on

    static saw_geometry checked(std::vector<geom::rhomb> rhombs, double ring_radius,
                                double cone_angle, cpoint center = 1.0);

    // angular length of the arc generating rhomb l
    double arc_angle(std::size_t l) const;
};

struct saw_decomposition {
    cpoint j_value;                  // Cauchy integral over the ring circle
    std::vector<cpoint> j_l_values;  // Cauchy integrals over the rhomb boundaries
    cpoint reconstruction;           // j_value - sum of j_l_values
    double quadrature_error;
};

saw_decomposition saw_cauchy_decomposition(const saw_geometry& g,
                                           const std::function<cpoint(cpoint)>& f, cpoint z);

// measured geometry constants feeding the Hoelder tail bound
struct saw_constants {
    double graph_lipschitz;    // arclength vs projected arclength factor
    double projection_lower;   // min |xi - z| / |xi' - z'| over sampled pairs
};

saw_constants measure_saw_constants(const saw_geometry& g, int samples = 400);

// upper bound for the Cauchy-tail sum over rhombs with index >= n given a
// Hoelder-alpha modulus with constant c_h; monotone to zero in n
double hoelder_tail_estimate(const saw_geometry& g, const saw_constants& k, double alpha,
                             double c_h, std::size_t n);
double hoelder_tail_estimate(const saw_geometry& g, double alpha, double c_h, std::size_t n);

// ---- approximant sequences ---------------------------------------------------------

struct approximant_stage {
    std::function<cpoint(cpoint)> eval;
    std::function<bool(cpoint)> excluded;  // stage compact K_n membership
};

struct approximant_seq {
    std::function<approximant_stage(int)> generator;  // stages are 1-based
    double uniform_bound;                             // shared sup bound C
};

struct convergence_row {
    int stage;
    double sup_gap;   // sup over samples of |F_n - F_limit|
    double sup_norm;  // sup over samples of |F_n|
};

struct convergence_table {
    std::vector<convergence_row> rows;
    double tolerance;
    bool bound_ok;  // every sup_norm within the shared bound
    bool pass;      // final gap below tolerance and bound_ok
};

// limit == nullptr means "use the final stage as the limit"
convergence_table uniform_convergence_check(const approximant_seq& seq,
                                            const std::vector<cpoint>& v_samples, int stages,
                                            double tolerance,
                                            const std::function<cpoint(cpoint)>& limit = nullptr);

// partial sums of a Borel series as an approximant sequence
approximant_seq borel_approximants(const borel_series_fn& f);

}  // namespace finelab::finefun
