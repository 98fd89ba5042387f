#include "lossequiv/simulate.hpp"

#include "lossequiv/error.hpp"
#include "lossequiv/measures.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <thread>

namespace lossequiv {

namespace {

constexpr double sqrt3 = 1.7320508075688772;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

/// E[max(sigma * zeta, -1)] for zeta ~ U(-sqrt 3, sqrt 3).
double clipped_noise_mean(double sigma) {
    if (sigma * sqrt3 <= 1.0) return 0.0;
    const double cut = -1.0 / sigma;
    return (-(cut + sqrt3) + sigma * (3.0 - cut * cut) / 2.0) / (2.0 * sqrt3);
}

void require(bool ok, const std::string& what) {
    if (!ok) throw Error(Errc::InvalidParameters, what);
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 == 1 ? v[mid] : (v[mid - 1] + v[mid]) / 2.0;
}

}  // namespace

double NoiseModel::sigma(std::size_t n) const {
    return s0 == 0.0 ? 0.0 : s0 * std::pow(static_cast<double>(n), -gamma);
}

double DeviationInjection::fraction(std::size_t n) const {
    if (b == 0.0) return 0.0;
    return std::min(1.0, b * std::pow(static_cast<double>(n), -beta));
}

std::size_t DeviationInjection::count(std::size_t n) const {
    return static_cast<std::size_t>(std::llround(fraction(n) * static_cast<double>(n)));
}

void GeneratorSpec::validate() const {
    std::visit(overloaded{
                   [](const UniformPositive& u) {
                       require(std::isfinite(u.lo) && std::isfinite(u.hi) && u.lo >= 0.0 && u.hi > u.lo,
                               "UniformPositive needs 0 <= lo < hi");
                   },
                   [](const SkewedHeavy& s) {
                       require(std::isfinite(s.shape) && std::isfinite(s.scale) && s.shape > 0.0 &&
                                   s.scale > 0.0,
                               "SkewedHeavy needs shape > 0 and scale > 0");
                   },
                   [](const ConstantPlusNoise& c) {
                       require(std::isfinite(c.level) && std::isfinite(c.spread) && c.level >= 0.0 &&
                                   c.spread >= 0.0 && c.level + c.spread > 0.0,
                               "ConstantPlusNoise needs level >= 0, spread >= 0, not both 0");
                   },
               },
               base);
    if (mixing) {
        require(mixing->low > 0.0 && mixing->high > 0.0 && std::isfinite(mixing->low) &&
                    std::isfinite(mixing->high),
                "mixing scales must be positive");
        require(mixing->prob_high >= 0.0 && mixing->prob_high <= 1.0, "mixing probability must lie in [0, 1]");
    }
    require(std::isfinite(noise.s0) && noise.s0 >= 0.0, "noise s0 must be nonnegative");
    require(std::isfinite(noise.gamma) && noise.gamma >= 0.0, "noise gamma must be nonnegative");
    require(std::isfinite(injection.b) && injection.b >= 0.0, "injection b must be nonnegative");
    require(std::isfinite(injection.beta) && injection.beta >= 0.0, "injection beta must be nonnegative");
    require(injection.shock_lo >= 0.0 && injection.shock_hi >= injection.shock_lo &&
                std::isfinite(injection.shock_hi),
            "shocks need 0 <= shock_lo <= shock_hi");
}

double GeneratorSpec::base_mean() const {
    return std::visit(overloaded{
                          [](const UniformPositive& u) { return (u.lo + u.hi) / 2.0; },
                          [](const SkewedHeavy& s) { return s.scale * std::exp(s.shape * s.shape / 2.0); },
                          [](const ConstantPlusNoise& c) {
                              if (c.spread <= c.level) return c.level;
                              return (c.level + c.spread) * (c.level + c.spread) / (4.0 * c.spread);
                          },
                      },
                      base);
}

double GeneratorSpec::base_stddev() const {
    return std::visit(overloaded{
                          [](const UniformPositive& u) { return (u.hi - u.lo) / std::sqrt(12.0); },
                          [](const SkewedHeavy& s) {
                              const double v = s.shape * s.shape;
                              return s.scale * std::sqrt((std::exp(v) - 1.0) * std::exp(v));
                          },
                          [this](const ConstantPlusNoise& c) {
                              if (c.spread <= c.level) return c.spread / std::sqrt(3.0);
                              const double top = c.level + c.spread;
                              const double second = top * top * top / (6.0 * c.spread);
                              const double m = base_mean();
                              return std::sqrt(std::max(0.0, second - m * m));
                          },
                      },
                      base);
}

double GeneratorSpec::limit_ratio() const {
    const double f = injection.beta == 0.0 ? std::min(injection.b, 1.0) : 0.0;
    const double noise_mean = noise.gamma == 0.0 ? 1.0 + clipped_noise_mean(noise.s0) : 1.0;
    const double shock_mean = (injection.shock_lo + injection.shock_hi) / 2.0;
    return 1.0 / ((1.0 - f) * noise_mean + f * shock_mean);
}

PairedSeries generate(const GeneratorSpec& gen, std::size_t n) {
    gen.validate();
    require(n >= 1, "series length must be at least 1");
    std::mt19937_64 rng(gen.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    double theta = 1.0;
    if (gen.mixing) theta = unit(rng) < gen.mixing->prob_high ? gen.mixing->high : gen.mixing->low;

    std::vector<double> x(n);
    std::visit(overloaded{
                   [&](const UniformPositive& u) {
                       std::uniform_real_distribution<double> d(u.lo, u.hi);
                       for (auto& v : x) v = d(rng);
                   },
                   [&](const SkewedHeavy& s) {
                       std::normal_distribution<double> z(0.0, 1.0);
                       for (auto& v : x) v = s.scale * std::exp(s.shape * z(rng));
                   },
                   [&](const ConstantPlusNoise& c) {
                       std::uniform_real_distribution<double> d(-1.0, 1.0);
                       for (auto& v : x) v = std::max(0.0, c.level + c.spread * d(rng));
                   },
               },
               gen.base);
    for (auto& v : x) v *= theta;

    const double sigma = gen.noise.sigma(n);
    std::uniform_real_distribution<double> zeta(-sqrt3, sqrt3);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double rel = sigma == 0.0 ? 0.0 : std::max(sigma * zeta(rng), -1.0);
        y[i] = x[i] * (1.0 + rel);
    }

    const std::size_t deviants = gen.injection.count(n);
    if (deviants > 0) {
        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), std::size_t{0});
        std::vector<std::size_t> chosen;
        chosen.reserve(deviants);
        std::sample(all.begin(), all.end(), std::back_inserter(chosen), deviants, rng);
        std::uniform_real_distribution<double> shock(gen.injection.shock_lo, gen.injection.shock_hi);
        for (std::size_t i : chosen) y[i] = x[i] * shock(rng);
    }
    return PairedSeries(std::move(x), std::move(y));
}

std::uint64_t cell_seed(std::uint64_t master, std::size_t n, std::size_t replicate) {
    std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                      static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(std::uint64_t{n} >> 32),
                      static_cast<std::uint32_t>(replicate),
                      static_cast<std::uint32_t>(std::uint64_t{replicate} >> 32)};
    std::array<std::uint32_t, 2> words{};
    seq.generate(words.begin(), words.end());
    return (std::uint64_t{words[0]} << 32) | words[1];
}

RatePoints run_convergence(const GeneratorSpec& gen, const LossSpec& spec,
                           std::span<const std::size_t> n_grid, std::size_t replicates,
                           const EpsilonSchedule& eps, std::size_t threads) {
    gen.validate();
    spec.validate();
    eps.validate();
    require(!n_grid.empty(), "n grid is empty");
    require(replicates >= 1, "need at least one replicate");
    for (std::size_t k = 0; k < n_grid.size(); ++k) {
        require(n_grid[k] >= 1, "grid sizes must be positive");
        require(k == 0 || n_grid[k] > n_grid[k - 1], "n grid must be strictly increasing");
    }

    const double limit = gen.limit_ratio();
    const std::size_t cells = n_grid.size() * replicates;
    RatePoints out;
    out.points.resize(cells);
    std::vector<std::exception_ptr> failures(cells);

    auto run_cell = [&](std::size_t cell) {
        RatePoint& row = out.points[cell];
        row.n = n_grid[cell / replicates];
        row.replicate = cell % replicates;
        row.seed = cell_seed(gen.seed, row.n, row.replicate);
        try {
            GeneratorSpec g = gen;
            g.seed = row.seed;
            const auto series = generate(g, row.n);
            row.c_error = std::abs(c_ratio(series) - limit);
            row.diff = equivalence_difference(spec, series);
            row.keydiff = keydiff(spec, series);
            row.sparse_fraction =
                static_cast<double>(sparse_set(series, eps, row.n).size()) / static_cast<double>(row.n);
            row.injected_fraction =
                static_cast<double>(g.injection.count(row.n)) / static_cast<double>(row.n);
        } catch (const Error& e) {
            failures[cell] = std::make_exception_ptr(
                Error(e.code(), std::string(e.what()) + " [n=" + std::to_string(row.n) +
                                    ", replicate=" + std::to_string(row.replicate) +
                                    ", seed=" + std::to_string(row.seed) + "]"));
        } catch (...) {
            failures[cell] = std::current_exception();
        }
    };

    threads = std::clamp<std::size_t>(threads, 1, cells);
    if (threads == 1) {
        for (std::size_t cell = 0; cell < cells; ++cell) run_cell(cell);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> workers;
        workers.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) {
            workers.emplace_back([&] {
                for (std::size_t cell = next++; cell < cells; cell = next++) run_cell(cell);
            });
        }
    }
    for (const auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }
    return out;
}

std::string_view to_string(RateField f) noexcept {
    switch (f) {
        case RateField::CError: return "c_error";
        case RateField::Diff: return "diff";
        case RateField::KeyDiff: return "keydiff";
    }
    return "unknown";
}

RateField parse_rate_field(std::string_view text) {
    if (text == "c_error") return RateField::CError;
    if (text == "diff") return RateField::Diff;
    if (text == "keydiff") return RateField::KeyDiff;
    throw Error(Errc::InvalidParameters, "field must be c_error, diff or keydiff, got '" +
                                             std::string(text) + "'");
}

std::vector<std::pair<std::size_t, double>> median_by_n(const RatePoints& points, RateField field) {
    std::map<std::size_t, std::vector<double>> groups;
    for (const auto& p : points.points) {
        const double v = field == RateField::CError ? p.c_error
                         : field == RateField::Diff ? p.diff
                                                    : p.keydiff;
        groups[p.n].push_back(std::abs(v));
    }
    std::vector<std::pair<std::size_t, double>> out;
    out.reserve(groups.size());
    for (auto& [n, values] : groups) out.emplace_back(n, median(std::move(values)));
    return out;
}

RateFit fit_rate(const RatePoints& points, RateField field) {
    const auto medians = median_by_n(points, field);
    if (medians.size() < 3) {
        throw Error(Errc::DegenerateInput, "rate fit needs at least 3 distinct n values, got " +
                                               std::to_string(medians.size()));
    }
    std::vector<double> lx, ly;
    for (const auto& [n, m] : medians) {
        if (!(m > 0.0) || !std::isfinite(m)) {
            throw Error(Errc::DegenerateInput, "median " + std::string(to_string(field)) + " at n=" +
                                                   std::to_string(n) + " is not positive");
        }
        lx.push_back(std::log(static_cast<double>(n)));
        ly.push_back(std::log(m));
    }
    const auto k = static_cast<double>(lx.size());
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / k;
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / k;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
        rss += r * r;
    }
    fit.slope_stderr = std::sqrt(rss / (k - 2.0) / sxx);
    return fit;
}

SmallSampleDemo small_sample_demo() {
    const std::vector<std::string> ids{"Unit 1", "Unit 2"};
    const std::vector<double> target{10.0, 990.0};
    PairedSeries set1(ids, {11.0, 999.0}, target);
    PairedSeries set2(ids, {15.0, 995.0}, target);
    const LossSpec absolute{.p = 1.0, .q = 0.0};
    SmallSampleDemo demo{
        .set1 = set1,
        .set2 = set2,
        .report1 = full_report(absolute, set1),
        .report2 = full_report(absolute, set2),
        .tad1 = named_measure(MeasureName::TotalAbsoluteDifference, set1),
        .tad2 = named_measure(MeasureName::TotalAbsoluteDifference, set2),
        .id1 = named_measure(MeasureName::IndexOfDissimilarity, set1),
        .id2 = named_measure(MeasureName::IndexOfDissimilarity, set2),
    };
    return demo;
}

}  // namespace lossequiv
