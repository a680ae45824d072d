#include "finelab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "finelab/errors.hpp"
#include "finelab/sampling.hpp"

namespace finelab::potential {

static constexpr double kInf = std::numeric_limits<double>::infinity();

double eval_log_potential(const log_potential_certificate& cert, cpoint z) {
    double sum = 0.0;
    for (const auto& a : cert.atoms) {
        const double d = std::abs(z - a.location);
        if (d == 0.0) return -kInf;
        sum += a.weight * std::log(d / a.scale);
    }
    return cert.positive_scale * sum + cert.additive_offset;
}

double discrete_measure::total_mass() const {
    double m = 0.0;
    for (const auto& a : atoms) m += a.mass;
    return m;
}

double eval_measure_potential(const discrete_measure& mu, cpoint z) {
    double sum = 0.0;
    for (const auto& a : mu.atoms) {
        const double d = std::abs(a.location - z);
        if (d == 0.0) return -kInf;
        sum += a.mass * std::log(d);
    }
    return sum;
}

// ---- thinness ---------------------------------------------------------------

thinness_verdict thinness_report(const thin_set_spec& spec, int depth, int samples_per_annulus,
                                 std::uint64_t seed) {
    thinness_verdict v;
    v.value_at_target = eval_log_potential(spec.certificate, spec.target);
    v.worst_set_sample = -kInf;

    if (v.value_at_target <= -1.0 / 12.0) {
        v.detail = "certificate at the target point is not above -1/12";
        return v;
    }

    // dyadic annuli ambient*2^-k <= |z - p| <= ambient*2^-k+1 shrinking to p
    for (int k = 1; k <= depth; ++k) {
        const double r1 = spec.ambient_radius * std::ldexp(1.0, -k + 1);
        const double r0 = spec.ambient_radius * std::ldexp(1.0, -k);
        for (const auto& d : spec.set.disks) {
            const double dist = std::abs(d.center - spec.target);
            if (dist - d.radius > r1 || dist + d.radius < r0) continue;
            auto cloud = disk_cloud(d, samples_per_annulus, seed, static_cast<std::uint64_t>(k));
            for (cpoint z : cloud) {
                const double a = std::abs(z - spec.target);
                if (a < r0 || a > r1) continue;
                ++v.samples_checked;
                v.worst_set_sample = std::max(v.worst_set_sample,
                                              eval_log_potential(spec.certificate, z));
            }
        }
    }

    if (v.samples_checked == 0 || v.worst_set_sample < -1.0) {
        v.thin_certified = true;
        v.detail = v.samples_checked == 0 ? "no set points near the target; trivially certified"
                                          : "certificate gap verified on the sample cloud";
    } else {
        v.detail = "a sampled set point does not go below -1; certificate inconclusive";
    }
    return v;
}

// ---- Example-2 recipe -------------------------------------------------------

thin_set_spec build_thin_union(const std::vector<cpoint>& accumulation_points, cpoint target,
                               const thin_union_options& opts) {
    if (std::abs(std::abs(target) - 1.0) > 1e-9)
        throw parameter_error("build_thin_union: target must lie on the unit circle");
    for (std::size_t i = 0; i < accumulation_points.size(); ++i) {
        if (std::abs(accumulation_points[i]) <= 1.0)
            throw domain_error("build_thin_union: accumulation point " + std::to_string(i) +
                               " is not outside the closed unit disk");
        for (std::size_t j = i + 1; j < accumulation_points.size(); ++j)
            if (accumulation_points[i] == accumulation_points[j])
                throw domain_error("build_thin_union: accumulation points must be distinct");
    }

    thin_set_spec spec;
    spec.target = target;
    const std::size_t n = accumulation_points.size();
    if (n == 0) {
        spec.ambient_radius = 1.0;
        return spec;  // empty union, zero certificate: trivially thin
    }

    // base disks: stay clear of the unit disk and of each other
    std::vector<double> base(n);
    for (std::size_t i = 0; i < n; ++i) {
        double sep = std::abs(accumulation_points[i]) - 1.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) sep = std::min(sep, 0.5 * std::abs(accumulation_points[i] - accumulation_points[j]));
        base[i] = 0.5 * sep;
    }

    double ambient = 1.0;
    for (std::size_t i = 0; i < n; ++i)
        ambient = std::max(ambient, std::abs(accumulation_points[i] - target) + base[i]);
    spec.ambient_radius = ambient;

    // Weights: equal split tempered by the log span, so the sum stays O(1)
    // while every atom keeps enough strength to dig below -1 near itself.
    const double big_r = 2.0 * ambient;
    std::vector<double> weight(n);
    for (std::size_t i = 0; i < n; ++i)
        weight[i] = (1.0 / static_cast<double>(n)) / std::max(1.0, std::log(big_r / base[i]));

    // Radii: force  a_i log(r_i/rho_i) + cross_i < -(1 + margin)  where cross_i
    // bounds the other atoms' contribution on the shrunk disk.
    std::vector<double> radius(n);
    for (std::size_t i = 0; i < n; ++i) {
        double cross = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double d = std::abs(accumulation_points[i] - accumulation_points[j]);
            cross += weight[j] * std::log((d + base[i]) / base[j]);
        }
        const double need = (1.0 + opts.margin + std::max(cross, 0.0)) / weight[i];
        radius[i] = base[i] * std::exp(-need);
        if (!(radius[i] > 0.0))
            throw construction_error(
                "build_thin_union: required radius underflows at atom " + std::to_string(i) +
                " (need exp(-" + std::to_string(need) + "))");
    }

    for (std::size_t i = 0; i < n; ++i) {
        spec.certificate.atoms.push_back({accumulation_points[i], weight[i], base[i]});
        spec.set.disks.emplace_back(accumulation_points[i], radius[i]);
    }

    // verification pass: nonnegative at target, below -1 on sampled union
    const double at_target = eval_log_potential(spec.certificate, target);
    if (!(at_target >= 0.0))
        throw construction_error("build_thin_union: certificate negative at the target point");
    double worst = -kInf;
    for (std::size_t i = 0; i < n; ++i) {
        auto cloud = disk_cloud(spec.set.disks[i], 128, opts.seed, i);
        for (cpoint z : cloud)
            worst = std::max(worst, eval_log_potential(spec.certificate, z));
    }
    if (!(worst < -1.0)) {
        std::ostringstream os;
        os << "build_thin_union: potential reaches " << worst << " on the union";
        throw construction_error(os.str());
    }
    return spec;
}

// ---- normalization ----------------------------------------------------------

namespace {

struct disk_stats {
    double sup_disk;    // sup of U over the closed disk (sampled)
    double at_target;   // U(p)
    double sup_on_set;  // sup over U cap closed disk (sampled); -inf when empty
};

disk_stats measure(const log_potential_certificate& cert, cpoint p, double rho,
                   const disk_union& set, const normalize_options& opts) {
    disk_stats st;
    st.at_target = eval_log_potential(cert, p);
    st.sup_disk = st.at_target;
    auto cloud = disk_cloud(geom::disk(p, rho), opts.disk_samples, opts.seed, 101);
    for (cpoint z : cloud) st.sup_disk = std::max(st.sup_disk, eval_log_potential(cert, z));
    // boundary circle too: the sup of a subharmonic function sits there
    for (cpoint z : circle_cloud(p, rho, 512, opts.seed, 102))
        st.sup_disk = std::max(st.sup_disk, eval_log_potential(cert, z));

    st.sup_on_set = -kInf;
    for (const auto& d : set.disks) {
        const double dist = std::abs(d.center - p);
        if (dist - d.radius > rho) continue;
        for (cpoint z : disk_cloud(d, opts.set_samples_per_disk, opts.seed, 103))
            if (std::abs(z - p) <= rho)
                st.sup_on_set = std::max(st.sup_on_set, eval_log_potential(cert, z));
    }
    return st;
}

bool circle_clear_of(const disk_union& set, cpoint p, double rho) {
    for (const auto& d : set.disks)
        if (std::abs(std::abs(d.center - p) - rho) <= d.radius) return false;
    return true;
}

bool satisfies(const disk_stats& st) {
    return st.sup_disk < 0.0 && st.at_target > -1.0 / 12.0 &&
           (st.sup_on_set == -kInf || st.sup_on_set < -1.0);
}

}  // namespace

normalization_result normalize_certificate(const log_potential_certificate& cert, cpoint target,
                                           const disk_union& set, const normalize_options& opts) {
    if (eval_log_potential(cert, target) == -kInf)
        throw precondition_error("normalize_certificate: certificate is -infinity at the target");

    double rho0 = opts.rho_start;
    if (opts.rho_max) rho0 = std::min(rho0, *opts.rho_max);

    bool found_clear_circle = false;
    for (int k = 0; k < opts.schedule_length; ++k) {
        const double rho = rho0 * std::ldexp(1.0, -k);
        if (!circle_clear_of(set, target, rho)) continue;
        found_clear_circle = true;

        disk_stats st = measure(cert, target, rho, set, opts);
        if (satisfies(st)) return {cert, rho, false};

        // affine solve: U' = t * U + beta with
        //   t*sup_disk + beta <= -eps0
        //   t*at_target + beta >= -1/12 + eps1
        //   t*sup_on_set + beta <= -1 - eps2
        const double eps0 = 1e-6, eps1 = 1.0 / 48.0, eps2 = 0.05;
        const double m = st.sup_disk, up = st.at_target, s = st.sup_on_set;

        double t_min = 0.0;
        if (s > -kInf) {
            const double gap = up - s;
            if (gap <= 11.0 / 12.0 + eps1 + eps2) continue;  // too little contrast at this rho
            t_min = (11.0 / 12.0 + eps1 + eps2) / gap;
        }
        double t_max = kInf;
        if (m > up) t_max = (1.0 / 12.0 - eps1 - eps0) / (m - up);
        if (t_min > t_max) continue;

        double t = s > -kInf ? std::min(1.25 * t_min, 0.5 * (t_min + std::min(t_max, 4.0 * t_min)))
                             : std::min(1.0, 0.5 * t_max);
        if (!(t > 0.0) || !std::isfinite(t)) t = t_min > 0 ? t_min : 1.0;
        const double beta = -1.0 / 12.0 + eps1 - t * up;

        log_potential_certificate adjusted = cert;
        adjusted.positive_scale *= t;
        adjusted.additive_offset = t * cert.additive_offset + beta;

        disk_stats check = measure(adjusted, target, rho, set, opts);
        if (satisfies(check)) return {adjusted, rho, true};
    }

    if (!found_clear_circle)
        throw construction_error(
            "normalize_certificate: no circle in the schedule avoids the union "
            "(circle-selection)");
    throw construction_error(
        "normalize_certificate: affine adjustment failed at every admissible radius");
}

// ---- sublevel cover ---------------------------------------------------------

disk_union sublevel_set(const log_potential_certificate& cert, double threshold,
                        const disk& region, const sublevel_options& opts) {
    disk_union cover;
    if (threshold == -kInf) return cover;
    if (!std::isfinite(threshold)) throw parameter_error("sublevel_set: threshold must be finite");

    const int n = opts.resolution;
    const double side = 2.0 * region.radius;
    const double h = side / n;
    const double cell_circumradius = h * 0.5 * std::sqrt(2.0);
    const cpoint corner = region.center - cpoint(region.radius, region.radius);

    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const cpoint c = corner + cpoint((ix + 0.5) * h, (iy + 0.5) * h);
            if (std::abs(c - region.center) > region.radius + cell_circumradius) continue;
            // upper bound of U over the circumscribed disk: every log term is
            // increasing in |z - p_n|
            double bound = 0.0;
            for (const auto& a : cert.atoms)
                bound += a.weight *
                         std::log((std::abs(c - a.location) + cell_circumradius) / a.scale);
            bound = cert.positive_scale * bound + cert.additive_offset;
            if (bound < threshold + opts.tolerance)
                cover.disks.emplace_back(c, cell_circumradius);
        }
    }
    return cover;
}

// ---- pushforward inequality -------------------------------------------------

lipschitz_push_report lipschitz_push(const discrete_measure& mu,
                                     const std::function<cpoint(cpoint)>& map, double lip_upper,
                                     double lip_lower, const std::vector<cpoint>& test_points,
                                     cpoint origin) {
    if (mu.atoms.empty()) throw parameter_error("lipschitz_push: measure has no atoms");
    if (!(lip_upper > 0) || !(lip_lower > 0))
        throw parameter_error("lipschitz_push: constants must be positive");

    const double slack = 1e-10;
    if (std::abs(map(origin) - origin) > slack)
        throw precondition_error("lipschitz_push: map does not fix the origin");

    // spot checks of the claimed constants over every available point pair
    std::vector<cpoint> probes = test_points;
    for (const auto& a : mu.atoms) probes.push_back(a.location);
    probes.push_back(origin);
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const cpoint ti = map(probes[i]);
        const double from_origin = std::abs(probes[i] - origin);
        if (from_origin > 0 && std::abs(ti - origin) < lip_lower * from_origin * (1.0 - 1e-9)) {
            std::ostringstream os;
            os << "lipschitz_push: expansion constant violated at (" << probes[i].real() << ", "
               << probes[i].imag() << ")";
            throw precondition_error(os.str());
        }
        for (std::size_t j = i + 1; j < probes.size(); ++j) {
            const double dz = std::abs(probes[i] - probes[j]);
            if (dz == 0) continue;
            if (std::abs(ti - map(probes[j])) > lip_upper * dz * (1.0 + 1e-9)) {
                std::ostringstream os;
                os << "lipschitz_push: Lipschitz constant violated on the pair ("
                   << probes[i].real() << ", " << probes[i].imag() << ") / (" << probes[j].real()
                   << ", " << probes[j].imag() << ")";
                throw precondition_error(os.str());
            }
        }
    }

    lipschitz_push_report rep;
    for (const auto& a : mu.atoms) rep.pushed.atoms.push_back({map(a.location), a.mass});

    const double mass = mu.total_mass();
    // both sides -inf (z at an atom) counts as a held inequality
    auto margin_of = [](double lhs, double rhs) {
        if (lhs == -kInf && rhs == -kInf) return 0.0;
        return rhs - lhs;
    };
    rep.upper_margins.reserve(test_points.size());
    bool ok = true;
    for (cpoint z : test_points) {
        const double lhs = eval_measure_potential(rep.pushed, map(z));
        const double rhs = eval_measure_potential(mu, z) + std::log(lip_upper) * mass;
        const double margin = margin_of(lhs, rhs);
        rep.upper_margins.push_back(margin);
        if (!(margin >= -slack)) ok = false;
    }
    rep.lower_margin = margin_of(eval_measure_potential(mu, origin) + std::log(lip_lower) * mass,
                                 eval_measure_potential(rep.pushed, origin));
    if (!(rep.lower_margin >= -slack)) ok = false;
    rep.pass = ok;
    return rep;
}

}  // namespace finelab::potential
