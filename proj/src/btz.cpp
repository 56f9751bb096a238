#include "qpwalk/btz.hpp"

#include "qpwalk/error.hpp"
#include "qpwalk/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace qpwalk::btz {

namespace {

constexpr double kPi = std::numbers::pi;

bool relative_close(double a, double b, double tolerance) {
    return std::abs(a - b) <= tolerance * std::max(std::abs(a), std::abs(b));
}

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw DomainError(std::string(name) + " must be positive and finite");
    }
}

} // namespace

BTZParams::BTZParams(double r_plus, double l_ads, double newton_g) : r_plus_(r_plus), l_ads_(l_ads), g_(newton_g) {
    require_positive(r_plus, "r_plus");
    require_positive(l_ads, "l_ads");
    require_positive(newton_g, "G");
}

double BTZParams::temperature() const { return r_plus_ / (2.0 * kPi * l_ads_ * l_ads_); }

double BTZParams::beta() const { return 1.0 / temperature(); }

double BTZParams::mass() const { return r_plus_ * r_plus_ / (8.0 * g_ * l_ads_ * l_ads_); }

double BTZParams::horizon_area() const { return 2.0 * kPi * r_plus_; }

bool BTZParams::eight_g_is_one() const { return relative_close(8.0 * g_, 1.0, 1e-12); }

double euclidean_action(const BTZParams& params) {
    return params.beta() * params.mass() - params.horizon_area() / (4.0 * params.newton_g());
}

double log_partition_function(double temperature, double l_ads, double newton_g) {
    require_positive(temperature, "T");
    require_positive(l_ads, "l_ads");
    require_positive(newton_g, "G");
    const double pl = kPi * l_ads;
    return pl * pl * temperature / (2.0 * newton_g);
}

double energy(double temperature, double l_ads, double newton_g) {
    require_positive(temperature, "T");
    require_positive(l_ads, "l_ads");
    require_positive(newton_g, "G");
    const double beta = 1.0 / temperature;
    return kPi * kPi * l_ads * l_ads / (2.0 * newton_g * beta * beta);
}

double entropy(const BTZParams& params) {
    const double t = params.temperature();
    const double s = params.beta() * energy(t, params.l_ads(), params.newton_g()) +
                     log_partition_function(t, params.l_ads(), params.newton_g());
    const double area_law = params.horizon_area() / (4.0 * params.newton_g());
    if (!relative_close(s, area_law, 1e-10)) {
        std::ostringstream os;
        os.precision(17);
        os << "BTZ entropy beta E + ln Z = " << s << " departs from A/4G = " << area_law;
        throw NumericalError(os.str());
    }
    return s;
}

bool BTZReport::all_identities_hold() const {
    return entropy_equals_area && energy_equals_mass && energy_matches_finite_difference &&
           entropy_equals_mass_term_minus_action && first_law_holds &&
           (entropy_equals_four_pi_r_plus == eight_g_is_one);
}

BTZReport analyse(const BTZParams& params) {
    BTZReport r;
    const double l = params.l_ads();
    const double g = params.newton_g();
    r.temperature = params.temperature();
    r.beta = params.beta();
    r.mass = params.mass();
    r.area = params.horizon_area();
    r.euclidean_action = euclidean_action(params);
    r.log_z = log_partition_function(r.temperature, l, g);
    r.energy = energy(r.temperature, l, g);
    r.entropy = entropy(params);
    r.area_entropy = r.area / (4.0 * g);
    r.four_pi_r_plus = 4.0 * kPi * params.r_plus();
    r.eight_g_is_one = params.eight_g_is_one();

    // -d ln Z / d beta with ln Z written as a function of beta.
    auto log_z_of_beta = [&](double beta) { return log_partition_function(1.0 / beta, l, g); };
    r.energy_finite_difference = -numerics::central_difference(log_z_of_beta, r.beta);

    // dS/dM along the one-parameter family r+ -> (M(r+), S(r+)).
    const double h = std::min(numerics::default_step(params.r_plus()), 0.5 * params.r_plus());
    const BTZParams up(params.r_plus() + h, l, g);
    const BTZParams down(params.r_plus() - h, l, g);
    r.first_law_ratio = (entropy(up) - entropy(down)) / (up.mass() - down.mass());

    r.entropy_equals_area = relative_close(r.entropy, r.area_entropy, 1e-10);
    r.entropy_equals_four_pi_r_plus = relative_close(r.entropy, r.four_pi_r_plus, 1e-10);
    r.energy_equals_mass = relative_close(r.energy, r.mass, 1e-10);
    r.energy_matches_finite_difference = relative_close(r.energy_finite_difference, r.energy, 1e-6);
    r.entropy_equals_mass_term_minus_action =
        relative_close(r.entropy, r.beta * r.mass - r.euclidean_action, 1e-10);
    r.first_law_holds = relative_close(r.first_law_ratio, r.beta, 1e-6);
    return r;
}

} // namespace qpwalk::btz
