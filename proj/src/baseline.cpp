#include "quadrics/baseline.hpp"

#include <cmath>

#include "quadrics/errors.hpp"

namespace quadrics::baseline {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kLn2 = 0.6931471805599453;

void require_n(int n, int lo) {
    if (n < lo) throw ValidationError("baseline formula requires n >= " + std::to_string(lo));
}
} // namespace

double expected_root_count(int n) {
    require_n(n, 2);
    // log-space: n^2-ish exponents appear elsewhere; keep the idiom uniform
    const double lg = 0.5 * (n + 1) * kLn2 + 0.5 - 0.5 * std::log(kPi) - 0.5 * std::log(double(n));
    return std::exp(lg);
}

double expected_absdet_projected(int n) {
    require_n(n, 2);
    const double lg = 0.5 * (n - 1) * kLn2 + std::lgamma(0.5 * n) - 0.5 * std::log(kPi);
    return std::exp(lg);
}

double log_gaussian_tail_moment(int n) {
    require_n(n, 2);
    const double m = double(n) * n - n; // n^2 - n
    return 0.5 * (m - 1.0) * kLn2 - 0.5 * (m + 1.0) * std::log(double(n)) + std::lgamma(0.5 * (m + 1.0));
}

double sphere_area(int n, bool shifted_exponent) {
    require_n(n, 1);
    const double expo = shifted_exponent ? 0.5 * (n - 1) : 0.5 * n;
    return std::exp(kLn2 + expo * std::log(kPi) - std::lgamma(0.5 * n));
}

BaselineReport make_report(int n) {
    BaselineReport r;
    r.n = n;
    r.expected_count = expected_root_count(n);
    r.absdet_projected = expected_absdet_projected(n);
    r.sphere_area = sphere_area(n);
    r.log_gaussian_tail_moment = log_gaussian_tail_moment(n);
    return r;
}

nlohmann::json to_json(const BaselineReport& report) {
    return nlohmann::json{{"n", report.n},
                          {"expected_count", report.expected_count},
                          {"absdet_projected", report.absdet_projected},
                          {"sphere_area", report.sphere_area},
                          {"log_gaussian_tail_moment", report.log_gaussian_tail_moment}};
}

} // namespace quadrics::baseline
