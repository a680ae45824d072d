#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "finelab/finefun.hpp"
#include "finelab/geometry.hpp"
#include "finelab/harmonic.hpp"
#include "finelab/potential.hpp"

namespace finelab::scenario {

using geom::cpoint;

struct tolerance_profile {
    std::string name = "default";  // strict | default | fast
    double convergence_tol = 1e-6;
    double decay_threshold = 0.1;
    int quarter_sample_points = 10;
    int sublevel_resolution = 512;
    int convergence_stages = 0;  // 0 = one stage per term
    std::vector<double> propagation_ns = {1.0, 10.0, 100.0, 1000.0};

    static tolerance_profile named(const std::string& name);
    // scale applied to configured sample counts (strict 4x, fast 1/4)
    double sample_multiplier() const;
};

struct fine_neighborhood {
    double radius = 0.5;  // r of V = closed D(p, r) minus U
    geom::disk_union set;
    potential::log_potential_certificate certificate;
    double ambient_radius = 1.0;
};

struct borel_function_spec {
    finefun::borel_series_fn fn;
};
struct cauchy_function_spec {
    finefun::cauchy_transform_fn fn;
    int stages = 4;
};
struct sqrt_sum_function_spec {
    finefun::sqrt_branch_sum_fn fn;
    int max_flips = 1;
};
using fine_function_spec =
    std::variant<borel_function_spec, cauchy_function_spec, sqrt_sum_function_spec>;

struct scenario_def {
    std::string name;
    std::string pipeline;  // certify | components | sheets | hm-study | decay-study
    fine_function_spec function;
    cpoint target{1.0, 0.0};
    fine_neighborhood nbhd;
    harmonic::exhaustion stages;
    harmonic::wos_config wos{1e-4, 100000, 100000, 1, 1};
    tolerance_profile tol;
    std::map<std::string, double> extras;  // study-specific knobs

    void validate() const;
};

// ---- hull certificate ---------------------------------------------------------

struct hull_certificate {
    std::string verdict;      // CERTIFIED or FAILED
    std::string failed_step;  // first failing step when FAILED
    std::string detail;

    cpoint target{};
    double rho = 0.0;
    std::optional<geom::circ_arc> arc_j;
    double r1 = 0.0;
    geom::disk_union sublevel;  // U_1
    potential::log_potential_certificate normalized_cert;
    potential::thinness_verdict thinness;
    harmonic::quarter_bound_result quarter;
    finefun::convergence_table convergence;
    std::vector<std::pair<double, double>> propagation;  // (N, -N/4)

    // everything needed to replay the Monte Carlo runs bit for bit
    std::uint64_t base_seed = 0;
    long samples = 0;
    double shell_eps = 0.0;
    int max_steps = 0;
    std::vector<std::vector<geom::disk>> stage_disks;  // exhaustion actually used

    bool certified() const { return verdict == "CERTIFIED"; }
};

// seed derivation shared by the pipeline and the re-verification
std::uint64_t quarter_seed(std::uint64_t base, std::size_t stage, std::size_t point);

// Runs thinness -> normalization -> arc choice -> quarter bound ->
// uniform convergence -> propagation table.  Sub-operation failures become
// FAILED(step) verdicts instead of exceptions.
hull_certificate certify_fine_continuation(const scenario_def& s);

struct verify_result {
    bool ok = false;
    long estimates_checked = 0;
    std::string detail;
};

// Replays every stored Monte Carlo estimate from the certificate's own data
// and demands bitwise equality.
verify_result verify_certificate(const hull_certificate& cert);

// ---- component analysis ---------------------------------------------------------

struct component_report {
    struct component {
        int id;
        long cells;
        bool hits_half_circle;
    };
    std::vector<component> components;
    int unique_nonthin = -1;  // component id, or -1 for NONE
    int resolution = 0;
    std::string detail;
};

// Flood fill of {|z - p| < r, |z| > 1} minus the closed union; the component
// carrying the exterior half-circle of radius rho is the non-thin one.
component_report unique_component_finder(const scenario_def& s, double rho, int resolution = 512);

// ---- branched covering ------------------------------------------------------------

struct sheet_atlas {
    struct sheet {
        std::vector<int> signs;
        int flips_from_base;
    };
    finefun::sqrt_branch_sum_fn base;
    std::vector<sheet> sheets;  // base sheet first
    std::vector<std::pair<cpoint, cpoint>> branch_points;

    cpoint eval(std::size_t sheet_index, cpoint z) const;
    // index of the sheet equal to `sheet_index` with sign n flipped (SIZE_MAX
    // when outside the enumerated flip budget)
    std::size_t flipped_neighbor(std::size_t sheet_index, std::size_t n) const;
};

sheet_atlas branched_cover_enumerate(const finefun::sqrt_branch_sum_fn& f, int flips);

struct monodromy_result {
    std::vector<int> landed_signs;  // +1 kept, -1 flipped, per term
    double match_error;             // distance to the predicted sheet at the base point
};

// Continue the base sheet along the circle |z - center| = radius (one full
// counterclockwise turn) by stepwise branch tracking.
monodromy_result continue_around(const finefun::sqrt_branch_sum_fn& f, cpoint center,
                                 double radius, int steps = 512);

}  // namespace finelab::scenario
