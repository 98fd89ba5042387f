#pragma once

#include "lossequiv/loss.hpp"

#include <span>
#include <string>
#include <string_view>

namespace lossequiv {

enum class MeasureName {
    TotalAbsoluteDifference,
    MeanAbsoluteDifference,
    IndexOfDissimilarity,
    TotalAbsoluteErrorOfShares,
    ChiSquare,
    PearsonChiSquareDivergence,
    HuntingtonHill,
    CobbDouglas,
};

enum class Arguments { Level, Share };

/// Index of dissimilarity normalization: 1/(2n) sum |x - y| (PerUnit) or the
/// conventional 1/2 sum |x - y| (Conventional).
enum class IdNormalization { PerUnit, Conventional };

/// A named accuracy measure. Only CobbDouglas reads the p/q/arguments fields.
struct Measure {
    MeasureName name = MeasureName::TotalAbsoluteDifference;
    double cobb_douglas_p = 1.0;
    double cobb_douglas_q = -1.0;
    Arguments cobb_douglas_arguments = Arguments::Level;
    IdNormalization id_normalization = IdNormalization::PerUnit;

    /// Accepts short keys (tad, mad, id, taes, chi2, pearson, hh) and
    /// `cobb-douglas:p,q[,level|share]`. Throws UnknownMeasure.
    static Measure parse(std::string_view key);

    [[nodiscard]] std::string display_name() const;
};

/// The loss family member, argument mode and normalization a measure uses.
struct MeasureDefinition {
    LossSpec spec;
    Arguments arguments = Arguments::Level;
    Normalization normalization = Normalization::Total;
};

MeasureDefinition definition(const Measure& measure);

MeasureValue named_measure(const Measure& measure, const PairedSeries& series);

inline MeasureValue named_measure(MeasureName name, const PairedSeries& series) {
    return named_measure(Measure{.name = name}, series);
}

/// The four measures compared side by side in the county estimate example.
std::span<const MeasureName> comparison_measures() noexcept;

}  // namespace lossequiv
