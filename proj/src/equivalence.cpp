#include "lossequiv/equivalence.hpp"

#include "lossequiv/error.hpp"
#include "lossequiv/summation.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace lossequiv {

namespace {

double power(double v, double p) {
    return p == 1.0 ? v : p == 2.0 ? v * v : std::pow(v, p);
}

void require_totals(const PairedSeries& series) {
    if (!(series.realized_total() > 0.0) || !(series.target_total() > 0.0)) {
        throw Error(Errc::ZeroTotal, "both totals must be positive");
    }
}

}  // namespace

double c_ratio(const PairedSeries& series) {
    if (!(series.target_total() > 0.0)) throw Error(Errc::ZeroTotal, "target total is zero");
    return series.realized_total() / series.target_total();
}

Lemma1Sides lemma1_check(const PairedSeries& series, std::size_t index, double p) {
    if (index >= series.size()) {
        throw Error(Errc::IndexOutOfRange, "unit index " + std::to_string(index) + " outside [0, " +
                                               std::to_string(series.size()) + ")");
    }
    if (!(p > 0.0)) throw Error(Errc::InvalidParameters, "p must be positive");
    require_totals(series);
    // Both sides subtract nearly equal numbers when a unit's shares almost
    // coincide, so they are evaluated in extended precision.
    const long double sx = series.realized_total();
    const long double sy = series.target_total();
    const long double xi = series.realized()[index];
    const long double yi = series.target()[index];
    const long double c = sx / sy;
    const long double lp = p;
    return {static_cast<double>(std::pow(std::fabs(xi / sx - yi / sy), lp)),
            static_cast<double>(std::pow(std::fabs(xi - c * yi), lp) / std::pow(sx, lp))};
}

double k_constant(const LossSpec& spec, const PairedSeries& series) {
    spec.validate();
    require_totals(series);
    const auto n = static_cast<double>(series.size());
    const double mu_x = series.realized_total() / n;
    const double mu_y = series.target_total() / n;
    if (spec.q == 0.0) return power(mu_x, spec.p);
    if (spec.weight_side == WeightSide::Target) {
        return spec.p == 1.0 && spec.q == -1.0 ? 1.0 : mu_y;
    }
    return mu_x;
}

double equivalence_difference(const LossSpec& spec, const PairedSeries& series) {
    const double k = k_constant(spec, series);
    return level_loss(spec, series).value - k * share_loss(spec, series).value;
}

EquivalenceRatios equivalence_ratio(const LossSpec& spec, const PairedSeries& series) {
    const double level = level_loss(spec, series).value;
    const double share = share_loss(spec, series).value;
    EquivalenceRatios r;
    if (level != 0.0) r.share_over_level = share / level;
    if (share != 0.0) r.level_over_share = level / share;
    return r;
}

double keydiff(const LossSpec& spec, const PairedSeries& series) {
    spec.validate();
    const double c = c_ratio(series);
    const auto shares = shares_of(series);
    const auto& weight_args =
        spec.weight_side == WeightSide::Realized ? shares.realized.shares : shares.target.shares;
    const auto x = series.realized();
    const auto y = series.target();
    std::vector<double> terms;
    terms.reserve(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto w = weight(weight_args[i], spec.q);
        if (!w) {
            if (spec.zero_weight_policy == ZeroWeightPolicy::Error) {
                throw Error(Errc::ZeroWeightBase, "unit " + std::to_string(i + 1) +
                                                      " has a zero weight base under q < 0");
            }
            continue;
        }
        terms.push_back(*w * (power(std::abs(x[i] - y[i]), spec.p) -
                              power(std::abs(x[i] - c * y[i]), spec.p)));
    }
    if (terms.empty()) throw Error(Errc::EmptyAfterSkip, "every unit was skipped");
    return pairwise_mean(terms);
}

std::vector<double> per_unit_diffs(const LossSpec& spec, const PairedSeries& series) {
    const double k = k_constant(spec, series);
    const auto shares = shares_of(series);
    const auto level = unit_losses(spec, series.realized(), series.target());
    const auto share = unit_losses(spec, shares.realized.shares, shares.target.shares);
    std::vector<double> out(series.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (level[i] && share[i]) out[i] = *level[i] - k * *share[i];
    }
    return out;
}

EquivalenceReport full_report(const LossSpec& spec, const PairedSeries& series,
                              const EpsilonSchedule& eps) {
    require_totals(series);
    EquivalenceReport r;
    r.n = series.size();
    const auto n = static_cast<double>(r.n);
    r.mu_x_hat = series.realized_total() / n;
    r.mu_y_hat = series.target_total() / n;
    r.c_n = c_ratio(series);
    r.k = k_constant(spec, series);
    r.mean_level = level_loss(spec, series).value;
    r.mean_share = share_loss(spec, series).value;
    r.difference = r.mean_level - r.k * r.mean_share;
    if (r.mean_level != 0.0) r.ratio_share_over_level = r.mean_share / r.mean_level;
    if (r.mean_share != 0.0) r.ratio_level_over_share = r.mean_level / r.mean_share;
    r.keydiff = keydiff(spec, series);
    for (double d : per_unit_diffs(spec, series)) {
        if (!std::isnan(d)) r.per_unit_diff_max = std::max(r.per_unit_diff_max, std::abs(d));
    }
    r.sparse_fraction = static_cast<double>(sparse_set(series, eps, r.n).size()) / n;
    return r;
}

}  // namespace lossequiv
