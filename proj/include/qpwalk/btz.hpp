#pragma once

namespace qpwalk::btz {

/// Non-rotating BTZ black hole. Derived quantities are recomputed on access:
///   T = r+ / (2 pi l^2),  beta = 1 / T,  M = r+^2 / (8 G l^2),  A = 2 pi r+.
class BTZParams {
public:
    BTZParams(double r_plus, double l_ads, double newton_g);

    double r_plus() const { return r_plus_; }
    double l_ads() const { return l_ads_; }
    double newton_g() const { return g_; }

    double temperature() const;
    double beta() const;
    double mass() const;
    double horizon_area() const;

    /// True when 8G = 1 (relative 1e-12), the convention under which S = 4 pi r+.
    bool eight_g_is_one() const;

private:
    double r_plus_;
    double l_ads_;
    double g_;
};

/// I_E = beta M - A / (4G).
double euclidean_action(const BTZParams& params);

/// ln Z_BTZ(T) = (pi l)^2 T / (2G).
double log_partition_function(double temperature, double l_ads, double newton_g);

/// E = -d ln Z / d beta = pi^2 l^2 / (2 G beta^2).
double energy(double temperature, double l_ads, double newton_g);

/// S = beta E + ln Z. Throws NumericalError if it departs from A/(4G) by more
/// than 1e-10 relative.
double entropy(const BTZParams& params);

struct BTZReport {
    double temperature = 0.0;
    double beta = 0.0;
    double mass = 0.0;
    double area = 0.0;
    double euclidean_action = 0.0;
    double log_z = 0.0;
    double energy = 0.0;
    double energy_finite_difference = 0.0;
    double entropy = 0.0;
    double area_entropy = 0.0;
    double four_pi_r_plus = 0.0;
    /// dS/dM along r+ by central differences.
    double first_law_ratio = 0.0;

    bool eight_g_is_one = false;
    bool entropy_equals_area = false;
    bool entropy_equals_four_pi_r_plus = false;
    bool energy_equals_mass = false;
    bool energy_matches_finite_difference = false;
    bool entropy_equals_mass_term_minus_action = false;
    bool first_law_holds = false;

    bool all_identities_hold() const;
};

/// Evaluates every quantity and identity check at one parameter point.
BTZReport analyse(const BTZParams& params);

} // namespace qpwalk::btz
