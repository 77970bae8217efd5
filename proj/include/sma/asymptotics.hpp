#pragma once

#include "sma/constitutive.hpp"
#include "sma/quasistatic.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace sma {

// Parameter sequences along one limit passage.  A sequence of length 1 is
// held constant.  n is the number of subdivisions per side (h ~ 1/n).
// The target is the limit point; tau_star = 0 or n_star = 0 mean that the
// discretization parameter goes to zero.
struct LimitSchedule {
    std::string label;
    std::vector<double> rho{0.1};
    std::vector<double> nu{0.0};
    std::vector<double> tau{0.125};
    std::vector<int> n{2};
    double rho_star = 0.1, nu_star = 0.0, tau_star = 0.125;
    int n_star = 2;

    int size() const;
    double rho_at(int k) const;
    double nu_at(int k) const;
    double tau_at(int k) const;
    int n_at(int k) const;
    // Targets equal to the terminal members.
    void target_terminal();
    // Sequences non-increasing (n non-decreasing), consistent lengths.
    std::vector<std::string> violations() const;
    void validate() const;
};

struct GammaRow {
    double rho = 0.0;
    double max_gap_inside = 0.0;   // max over |a| <= c3 of F0(a) - F_rho(a)
    double min_outside = 0.0;      // min over |a| > c3 of F_rho(a)
    bool monotone_from_previous = true;
};

// Pointwise facts that make the family Gamma-converge: F_rho(a) is
// non-decreasing as rho decreases, tends to F0(a) where F0 is finite and
// diverges where it is not.
struct GammaReport {
    std::string condition = "monotone pointwise convergence of convex functions";
    std::vector<GammaRow> rows;
    bool monotone = true;
    bool zero_at_origin = true;
    int samples_inside = 0, samples_outside = 0;
};

// Deterministic sample set: magnitudes spread over [0, 1.5 c3] along varied directions.
std::vector<DevTensor3> gamma_sample_grid(const MaterialParams& p, int count = 50);
GammaReport gamma_check_F(const MaterialParams& p, const std::vector<double>& rhos,
                          const std::vector<DevTensor3>& samples);

struct LimitRow {
    int k = 0;
    double rho = 0.0, nu = 0.0, tau = 0.0, h = 0.0;
    double state_diff = 0.0, energy_diff = 0.0, diss_diff = 0.0;
};

struct LimitTable {
    std::string label;
    std::string reference;  // description of what the differences are taken against
    std::vector<LimitRow> rows;
    bool decreasing = true;     // state differences strictly decreasing (or all zero)
    double energy_ratio = 0.0;  // max energy_diff / state_diff
    // evolutions only: a priori bound W + Diss <= C0 + K M on every member run
    bool apriori_holds = true;
    double apriori_ratio = 0.0;  // max observed / bound
};

struct LimitOptions {
    // false: differences to a reference run at the target (discretization
    // parameters tending to zero are replaced by a finer one).
    // true: differences between consecutive members; the last row is the end.
    bool inter_level = false;
    int threads = 1;
};

LimitTable limit_constitutive(const MaterialParams& p, const DissipationDensity& d, const StressPath& path,
                              const LimitSchedule& s, const LimitOptions& opt = {});

// Single incremental problem from z = 0 at load time t, over (rho, nu, h).
LimitTable limit_minproblem(const BvpProblem& problem, double t, const LimitSchedule& s,
                            const LimitOptions& opt = {});

// Evolutions over (rho, tau, h) with nu taken from the schedule.
LimitTable limit_evolution(const BvpProblem& problem, const LimitSchedule& s, const LimitOptions& opt = {});

// Columns: k, rho, nu, tau, h, state_diff, energy_diff, diss_diff.
void write_limit_csv(std::ostream& os, const LimitTable& t);

} // namespace sma
