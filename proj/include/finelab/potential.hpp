#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "finelab/geometry.hpp"

namespace finelab::potential {

using geom::cpoint;
using geom::disk;
using geom::disk_union;

// One logarithmic atom: weight * log(|z - location| / scale).
struct log_atom {
    cpoint location;
    double weight;  // > 0
    double scale;   // > 0
};

// U(z) = positive_scale * sum_n a_n log(|z - p_n| / rho_n) + additive_offset.
// Finite positive atom sums are subharmonic by construction, so any value of
// the fields is a valid certificate; only the two affine knobs may be adjusted
// afterwards without losing that property.
struct log_potential_certificate {
    std::vector<log_atom> atoms;
    double additive_offset = 0.0;
    double positive_scale = 1.0;
};

// evaluates to -infinity exactly at atom locations
double eval_log_potential(const log_potential_certificate& cert, cpoint z);

// Thinness witness: U together with a certificate that is finite at p and
// below -1 on U near p.
struct thin_set_spec {
    cpoint target;
    disk_union set;
    log_potential_certificate certificate;
    double ambient_radius;
};

struct thinness_verdict {
    bool thin_certified = false;
    double value_at_target = 0.0;
    double worst_set_sample = 0.0;  // sup of the certificate over sampled U points
    int samples_checked = 0;
    std::string detail;
};

// Checks the normalized Brelot-style gap on dyadic annuli shrinking to the
// target: certificate(p) > -1/12 and certificate < -1 at every sampled point
// of U within the ambient radius.  Never claims "not thin".
thinness_verdict thinness_report(const thin_set_spec& spec, int depth = 24,
                                 int samples_per_annulus = 256, std::uint64_t seed = 1);

struct thin_union_options {
    int depth = 24;          // verification depth for the built spec
    double margin = 0.05;    // extra drop below -1 on the union
    std::uint64_t seed = 1;  // sampling seed for the verification pass
};

// Example-2-style recipe: given accumulation points outside the closed unit
// disk, pick disjoint base disks, weights that keep the sum non-negative off
// the base disks, then shrink radii until the potential is below -1 on the
// union.  Throws construction_error when the recipe cannot reach -1.
thin_set_spec build_thin_union(const std::vector<cpoint>& accumulation_points, cpoint target,
                               const thin_union_options& opts = {});

struct normalization_result {
    log_potential_certificate certificate;
    double rho;
    bool changed;
};

struct normalize_options {
    double rho_start = 0.1;
    int schedule_length = 40;     // rho halves each step
    int disk_samples = 4096;      // sup sampling over the closed disk
    int set_samples_per_disk = 64;
    std::uint64_t seed = 1;
    std::optional<double> rho_max;  // extra cap, e.g. to keep an arc inside the unit disk
};

// Affine renormalization (add a constant, multiply by a positive constant)
// plus a radius search so that on the closed disk D(p, rho):
//   (i) U' < 0, (ii) U'(p) > -1/12, (iii) U' < -1 on U cap D(p, rho),
//   (iv) the circle |z - p| = rho misses U.
// Returns the input unchanged when it already satisfies all four at the first
// admissible rho.
normalization_result normalize_certificate(const log_potential_certificate& cert, cpoint target,
                                           const disk_union& set,
                                           const normalize_options& opts = {});

struct sublevel_options {
    int resolution = 512;     // grid cells per side over the region's bounding square
    double tolerance = 0.05;  // admissible overshoot above the threshold
};

// Conservative disk cover of {U < threshold} within the region, built from
// grid cells whose interval bound certifies the inequality.  The cover is
// contained in {U < threshold + tolerance}.
disk_union sublevel_set(const log_potential_certificate& cert, double threshold,
                        const disk& region, const sublevel_options& opts = {});

struct discrete_measure {
    struct atom {
        cpoint location;
        double mass;  // > 0
    };
    std::vector<atom> atoms;

    double total_mass() const;
};

// V(z) = sum_i m_i log|xi_i - z|
double eval_measure_potential(const discrete_measure& mu, cpoint z);

struct lipschitz_push_report {
    discrete_measure pushed;
    // margin of V1(Tz) <= V(z) + log(C) * |mu| at each test point (>= 0 passes)
    std::vector<double> upper_margins;
    // margin of V1(origin) >= V(origin) + log(c) * |mu|
    double lower_margin = 0.0;
    bool pass = false;
};

// Pushforward inequality check for a Lipschitz map T with T(origin) = origin,
// |Tz1 - Tz2| <= C |z1 - z2| and |Tz - origin| >= c |z - origin|.  The claimed
// constants are spot-checked on the test points and atoms first.
lipschitz_push_report lipschitz_push(const discrete_measure& mu,
                                     const std::function<cpoint(cpoint)>& map, double lip_upper,
                                     double lip_lower, const std::vector<cpoint>& test_points,
                                     cpoint origin);

}  // namespace finelab::potential
