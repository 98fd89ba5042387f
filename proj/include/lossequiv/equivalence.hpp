#pragma once

#include "lossequiv/assumptions.hpp"
#include "lossequiv/loss.hpp"
#include "lossequiv/series.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace lossequiv {

/// Level/share equivalence diagnostics for one dataset and one loss.
///
/// K is the plug-in constant built from sample means mu_hat = S / n.
/// The two ratio orientations are reported separately; each is nullopt when
/// its denominator mean is exactly zero (X == Y gives 0/0 for both).
struct EquivalenceReport {
    std::size_t n = 0;
    double c_n = 0.0;
    double mu_x_hat = 0.0;
    double mu_y_hat = 0.0;
    double k = 0.0;
    double mean_level = 0.0;
    double mean_share = 0.0;
    double difference = 0.0;  ///< mean_level - k * mean_share
    std::optional<double> ratio_share_over_level;
    std::optional<double> ratio_level_over_share;
    double keydiff = 0.0;
    double per_unit_diff_max = 0.0;
    double sparse_fraction = 0.0;
};

/// c_n = S_x / S_y. Throws ZeroTotal if S_y = 0.
double c_ratio(const PairedSeries& series);

struct Lemma1Sides {
    double lhs = 0.0;  ///< |x_i - y_i|^p on shares
    double rhs = 0.0;  ///< |X_i - c_n Y_i|^p / S_x^p on levels
};

/// Both sides of the level/share difference identity for unit `index` (0-based).
Lemma1Sides lemma1_check(const PairedSeries& series, std::size_t index, double p);

/// Equivalence constant for a loss:
///   q = 0                      -> mu_x^p
///   p = 1, q = -1, target      -> 1
///   q < 0, target (otherwise)  -> mu_y
///   q < 0, realized            -> mu_x
double k_constant(const LossSpec& spec, const PairedSeries& series);

/// mean level loss - K * mean share loss.
double equivalence_difference(const LossSpec& spec, const PairedSeries& series);

struct EquivalenceRatios {
    std::optional<double> share_over_level;
    std::optional<double> level_over_share;
};

EquivalenceRatios equivalence_ratio(const LossSpec& spec, const PairedSeries& series);

/// (1/n) sum w(s_i) (|X_i - Y_i|^p - |X_i - c_n Y_i|^p), with s_i the share on
/// the weight side. Exactly 0 when c_n == 1.
double keydiff(const LossSpec& spec, const PairedSeries& series);

/// L_i - K * l_i per unit. Units skipped by the zero-weight policy are NaN.
std::vector<double> per_unit_diffs(const LossSpec& spec, const PairedSeries& series);

EquivalenceReport full_report(const LossSpec& spec, const PairedSeries& series,
                              const EpsilonSchedule& eps = {});

}  // namespace lossequiv
