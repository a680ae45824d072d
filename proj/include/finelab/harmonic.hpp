#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "finelab/geometry.hpp"
#include "finelab/potential.hpp"

namespace finelab::harmonic {

using geom::circ_arc;
using geom::cpoint;
using geom::disk;
using geom::disk_union;
using geom::obstacle;

// Disk minus a finite union of pairwise disjoint compacta.  A connected
// compact may also be represented as an overlapping disk chain; pass
// allow_overlap for that case.
struct slit_domain {
    disk outer;
    std::vector<obstacle> obstacles;
    std::string label;

    // Validates disjointness/containment and that the complement stays
    // connected (grid flood fill).
    slit_domain(disk outer, std::vector<obstacle> obstacles, std::string label = {},
                int connectivity_grid = 192, bool allow_overlap = false);

    bool interior_contains(cpoint z) const;
    double boundary_distance(cpoint z) const;
};

// Increasing obstacle stages K_1 subset K_2 subset ...; containment is
// verified on boundary/interior samples.
struct exhaustion {
    std::vector<std::vector<obstacle>> stages;

    static exhaustion checked(std::vector<std::vector<obstacle>> stages,
                              int samples_per_obstacle = 64);
    std::size_t size() const { return stages.size(); }
};

struct wos_config {
    double shell_eps;      // absorption shell, absolute length
    int max_steps = 100000;
    long samples = 100000;  // >= 1000 for a meaningful CI
    std::uint64_t seed = 1;
    int workers = 1;  // result is bitwise identical for any worker count

    void validate(double outer_radius) const;
};

// Which part of the boundary scores a hit.
struct arc_target {
    circ_arc arc;  // subarc of the outer circle
};
struct outer_remainder_target {
    circ_arc arc;  // complement of this subarc on the outer circle
};
struct obstacle_target {
    std::size_t index;
};
using boundary_target = std::variant<arc_target, outer_remainder_target, obstacle_target>;

struct hm_estimate {
    double value = 0.0;      // in [0, 1]
    double std_error = 0.0;  // binomial standard error
    long samples_used = 0;
    long lost_to_max_steps = 0;
    bool unreliable = false;  // > 1% of paths hit max_steps
    // absorption counts: "outer:arc", "outer:rest", "obstacle:<i>", "alive"
    std::map<std::string, long> killed_on;
};

// Exact harmonic measure of a boundary arc of a disk, via the Moebius move
// z -> 0 and the angular length of the image arc.  At the center this reduces
// to sweep / (2 pi) exactly.
double hm_disk_arc_exact(const disk& d, const circ_arc& arc, cpoint z);

// Walk-on-spheres estimate of the harmonic measure of the target from z.
// Deterministic for fixed (seed, samples) no matter how many workers run.
hm_estimate hm_wos(const slit_domain& domain, const boundary_target& target, cpoint z,
                   const wos_config& cfg);

// Margin report for  omega_slit(z) >= omega_disk(z) + U(z)  at sample points.
struct lower_bound_report {
    struct row {
        cpoint z;
        double omega_slit;
        double std_error;
        double omega_disk;
        double potential;
        double margin;  // omega_slit - (omega_disk + potential)
    };
    std::vector<row> rows;
    bool pass = false;  // every margin >= -3 sigma
};

lower_bound_report hm_lower_bound_check(const slit_domain& domain_stage, const circ_arc& arc_j,
                                        const potential::log_potential_certificate& cert,
                                        const std::vector<cpoint>& sample_points,
                                        const wos_config& cfg);

struct quarter_bound_result {
    double r1 = 0.0;
    disk_union sublevel;  // U_1, the -1/12 sublevel cover
    struct stage_minimum {
        std::size_t stage;      // 0 = bare disk
        double min_value;       // min over sampled V_1 of the WoS estimate
        double std_error_at_min;
        bool pass;              // min_value >= 1/4 - 3 sigma
    };
    std::vector<stage_minimum> stage_minima;
    std::vector<cpoint> sample_points;  // the sampled V_1 = D(p, r1) minus U_1
    // per-stage, per-point raw estimates in sample_points order
    std::vector<std::vector<hm_estimate>> estimates;
    bool pass = false;
    bool unreliable = false;
};

struct quarter_bound_options {
    int sample_points = 10;
    int r1_schedule_length = 40;
    int r1_circle_samples = 4096;
    double strict_gap = 1e-6;  // realizes the strict "> 4/12"
    potential::sublevel_options sublevel = {};
};

// The Eq.-(1) pipeline: find r1 with the exact measure above 4/12 on
// D(p, r1), cover the -1/12 sublevel, then verify the quarter bound by WoS on
// every exhaustion stage (stage 0 is the bare disk).
quarter_bound_result fine_quarter_bound(cpoint p, double rho,
                                        const potential::log_potential_certificate& cert,
                                        const disk_union& set, const exhaustion& stages,
                                        const circ_arc& arc_j, const wos_config& cfg,
                                        const quarter_bound_options& opts = {});

// seed for the (stage, point) Monte Carlo stream inside fine_quarter_bound;
// certificates replay estimates through the same derivation
std::uint64_t stage_point_seed(std::uint64_t base, std::size_t stage, std::size_t point);

// log(eps_n) * omega + log(C) * (1 - omega): the two-constant bound.
double two_constant_bound(double eps_n, double big_c, double omega_lb);

// -N * omega: the propagation value certified by the quarter bound.
double propagation_bound(double big_n, double omega_lb);

struct decay_sequence {
    struct entry {
        std::size_t stage;
        double value;
        double std_error;
    };
    std::vector<entry> values;
    bool monotone_pass = false;  // h_{n+1} <= h_n + 3 * combined sigma
    bool decay_pass = false;     // final value below the threshold
};

// omega(p, boundary of K, extended plane minus (K union K_n)) for each stage,
// computed after the inversion w = 1/(z - center of K); stage obstacles must
// be disks so the inversion maps them to disks exactly.
decay_sequence exterior_hm_decay(const disk& k, const exhaustion& stages, cpoint p,
                                 const wos_config& cfg, double decay_threshold = 0.1);

// Moebius image of a disk under w = 1/(z - z0); the disk must not contain z0.
disk invert_disk(const disk& d, cpoint z0);

}  // namespace finelab::harmonic
