#pragma once

#include <json.hpp>

namespace quadrics::baseline {

/// Prefactor of the average real-root count: sqrt(2) e^{1/2} / sqrt(pi).
inline constexpr double kCountPrefactor = 1.3154892469589141;

/// Average number of real solutions of a Gaussian quadric system:
/// n^{-1/2} 2^{(n+1)/2} e^{1/2} / sqrt(pi). Requires n >= 2.
double expected_root_count(int n);

/// Exact E|det(P X)| for X Gaussian n x (n-1) and P the projector
/// orthogonal to the all-ones vector: 2^{(n-1)/2} Gamma(n/2) / sqrt(pi).
/// Requires n >= 2.
double expected_absdet_projected(int n);

/// log of int_0^inf u^{n^2-n} e^{-n u^2 / 2} du
///   = log( 2^{(n^2-n-1)/2} n^{-(n^2-n+1)/2} Gamma((n^2-n+1)/2) ).
/// Returned in log-space; the raw value overflows doubles near n = 20.
double log_gaussian_tail_moment(int n);

/// Surface area of the unit sphere S^{n-1}. The default is the standard
/// 2 pi^{n/2} / Gamma(n/2); shifted_exponent selects the variant with
/// pi^{(n-1)/2} in the numerator.
double sphere_area(int n, bool shifted_exponent = false);

struct BaselineReport {
    int n = 0;
    double expected_count = 0.0;
    double absdet_projected = 0.0;
    double sphere_area = 0.0;
    double log_gaussian_tail_moment = 0.0;
};

BaselineReport make_report(int n);
nlohmann::json to_json(const BaselineReport& report);

} // namespace quadrics::baseline
