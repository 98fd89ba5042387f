#include "lossequiv/measures.hpp"

#include "lossequiv/error.hpp"

#include <array>
#include <charconv>
#include <sstream>

namespace lossequiv {

namespace {

double parse_param(std::string_view text, std::string_view key) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        throw Error(Errc::UnknownMeasure, "bad Cobb-Douglas parameter in '" + std::string(key) + "'");
    }
    return value;
}

}  // namespace

Measure Measure::parse(std::string_view key) {
    struct Entry {
        std::string_view key;
        MeasureName name;
    };
    static constexpr std::array<Entry, 14> table{{
        {"tad", MeasureName::TotalAbsoluteDifference},
        {"total-absolute-difference", MeasureName::TotalAbsoluteDifference},
        {"mad", MeasureName::MeanAbsoluteDifference},
        {"mean-absolute-difference", MeasureName::MeanAbsoluteDifference},
        {"id", MeasureName::IndexOfDissimilarity},
        {"index-of-dissimilarity", MeasureName::IndexOfDissimilarity},
        {"taes", MeasureName::TotalAbsoluteErrorOfShares},
        {"total-absolute-error-of-shares", MeasureName::TotalAbsoluteErrorOfShares},
        {"chi2", MeasureName::ChiSquare},
        {"chi-square", MeasureName::ChiSquare},
        {"pearson", MeasureName::PearsonChiSquareDivergence},
        {"pearson-chi-square-divergence", MeasureName::PearsonChiSquareDivergence},
        {"hh", MeasureName::HuntingtonHill},
        {"huntington-hill", MeasureName::HuntingtonHill},
    }};
    for (const auto& e : table) {
        if (e.key == key) return Measure{.name = e.name};
    }

    constexpr std::string_view cd_prefix = "cobb-douglas:";
    if (key.starts_with(cd_prefix)) {
        std::string_view rest = key.substr(cd_prefix.size());
        std::array<std::string_view, 3> parts{};
        std::size_t count = 0;
        while (count < parts.size()) {
            const auto comma = rest.find(',');
            parts[count++] = rest.substr(0, comma);
            if (comma == std::string_view::npos) {
                rest = {};
                break;
            }
            rest = rest.substr(comma + 1);
        }
        if (count < 2 || !rest.empty()) {
            throw Error(Errc::UnknownMeasure, "expected cobb-douglas:p,q[,level|share], got '" +
                                                  std::string(key) + "'");
        }
        Measure m{.name = MeasureName::CobbDouglas};
        m.cobb_douglas_p = parse_param(parts[0], key);
        m.cobb_douglas_q = parse_param(parts[1], key);
        if (count == 3) {
            if (parts[2] == "level") {
                m.cobb_douglas_arguments = Arguments::Level;
            } else if (parts[2] == "share") {
                m.cobb_douglas_arguments = Arguments::Share;
            } else {
                throw Error(Errc::UnknownMeasure, "argument mode must be level or share in '" +
                                                      std::string(key) + "'");
            }
        }
        if (!(m.cobb_douglas_p > 0.0) || !(m.cobb_douglas_q < 0.0)) {
            throw Error(Errc::UnknownMeasure, "Cobb-Douglas needs p > 0 and q < 0 in '" +
                                                  std::string(key) + "'");
        }
        return m;
    }
    throw Error(Errc::UnknownMeasure, "unknown measure '" + std::string(key) + "'");
}

std::string Measure::display_name() const {
    switch (name) {
        case MeasureName::TotalAbsoluteDifference: return "Total Absolute Difference";
        case MeasureName::MeanAbsoluteDifference: return "Mean Absolute Difference";
        case MeasureName::IndexOfDissimilarity:
            return id_normalization == IdNormalization::PerUnit ? "Index of Dissimilarity"
                                                              : "Index of Dissimilarity (1/2 sum)";
        case MeasureName::TotalAbsoluteErrorOfShares: return "Total Absolute Error of Shares";
        case MeasureName::ChiSquare: return "Chi-Square";
        case MeasureName::PearsonChiSquareDivergence: return "Pearson's Chi-Square Divergence";
        case MeasureName::HuntingtonHill: return "Huntington-Hill";
        case MeasureName::CobbDouglas: {
            std::ostringstream os;
            os << "Cobb-Douglas (p=" << cobb_douglas_p << ", q=" << cobb_douglas_q << ", "
               << (cobb_douglas_arguments == Arguments::Level ? "level" : "share") << ")";
            return os.str();
        }
    }
    return "Unknown";
}

MeasureDefinition definition(const Measure& m) {
    const LossSpec absolute{.p = 1.0, .q = 0.0};
    const LossSpec webster{.p = 2.0, .q = -1.0, .weight_side = WeightSide::Target};
    switch (m.name) {
        case MeasureName::TotalAbsoluteDifference:
            return {absolute, Arguments::Level, Normalization::Total};
        case MeasureName::MeanAbsoluteDifference:
            return {absolute, Arguments::Level, Normalization::Mean};
        case MeasureName::IndexOfDissimilarity:
            return {absolute, Arguments::Share,
                    m.id_normalization == IdNormalization::PerUnit ? Normalization::HalfMean
                                                                 : Normalization::HalfTotal};
        case MeasureName::TotalAbsoluteErrorOfShares:
            return {absolute, Arguments::Share, Normalization::Total};
        case MeasureName::ChiSquare:
            return {webster, Arguments::Level, Normalization::Total};
        case MeasureName::PearsonChiSquareDivergence:
            return {webster, Arguments::Share, Normalization::Total};
        case MeasureName::HuntingtonHill:
            return {{.p = 2.0, .q = -1.0, .weight_side = WeightSide::Realized},
                    Arguments::Level,
                    Normalization::Total};
        case MeasureName::CobbDouglas:
            return {{.p = m.cobb_douglas_p, .q = m.cobb_douglas_q, .weight_side = WeightSide::Target},
                    m.cobb_douglas_arguments,
                    Normalization::Total};
    }
    throw Error(Errc::UnknownMeasure, "unhandled measure");
}

MeasureValue named_measure(const Measure& measure, const PairedSeries& series) {
    const auto def = definition(measure);
    return def.arguments == Arguments::Level ? level_loss(def.spec, series, def.normalization)
                                             : share_loss(def.spec, series, def.normalization);
}

std::span<const MeasureName> comparison_measures() noexcept {
    static constexpr std::array<MeasureName, 4> names{
        MeasureName::TotalAbsoluteDifference,
        MeasureName::IndexOfDissimilarity,
        MeasureName::ChiSquare,
        MeasureName::PearsonChiSquareDivergence,
    };
    return names;
}

}  // namespace lossequiv
