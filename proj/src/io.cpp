#include "lossequiv/io.hpp"

#include "lossequiv/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

namespace lossequiv {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string_view::npos) return out;
        start = pos + 1;
    }
}

template <class T>
std::optional<T> parse_number(std::string_view text) {
    text = trim(text);
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(value)) return std::nullopt;
    }
    return value;
}

std::string strip_line(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::Io, "cannot open '" + path.string() + "' for reading");
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(Errc::Io, "cannot open '" + path.string() + "' for writing");
    return out;
}

}  // namespace

PairedSeries read_dataset(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error(Errc::ParseError, "missing header row");
    line = strip_line(line);
    if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (line != dataset_header) {
        throw Error(Errc::ParseError, "header must be '" + std::string(dataset_header) + "', got '" + line + "'");
    }
    std::vector<std::string> ids;
    std::vector<double> realized, target;
    std::unordered_set<std::string> seen;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        line = strip_line(line);
        if (trim(line).empty()) continue;
        ++row;
        const auto where = "row " + std::to_string(row);
        const auto cells = split(line, ',');
        if (cells.size() != 3) {
            throw Error(Errc::ParseError, where + ": expected 3 cells, got " + std::to_string(cells.size()));
        }
        const std::string id(trim(cells[0]));
        if (id.empty()) throw Error(Errc::ParseError, where + ": empty id");
        const auto t = parse_number<double>(cells[1]);
        const auto r = parse_number<double>(cells[2]);
        if (!t) throw Error(Errc::ParseError, where + ": target '" + std::string(trim(cells[1])) + "' is not a number");
        if (!r) throw Error(Errc::ParseError, where + ": realized '" + std::string(trim(cells[2])) + "' is not a number");
        if (*t < 0.0 || *r < 0.0) throw Error(Errc::NegativeValue, where + ": negative value");
        if (!seen.insert(id).second) throw Error(Errc::DuplicateId, where + ": duplicate id '" + id + "'");
        ids.push_back(id);
        target.push_back(*t);
        realized.push_back(*r);
    }
    if (ids.empty()) throw Error(Errc::ParseError, "no data rows");
    return PairedSeries(std::move(ids), std::move(realized), std::move(target));
}

PairedSeries read_dataset(const std::filesystem::path& path) {
    auto in = open_in(path);
    try {
        return read_dataset(in);
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

void write_dataset(std::ostream& out, const PairedSeries& series) {
    out << dataset_header << '\n';
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << fmt::format("{},{},{}\n", series.ids()[i], series.target()[i], series.realized()[i]);
    }
}

void write_dataset(const std::filesystem::path& path, const PairedSeries& series) {
    auto out = open_out(path);
    write_dataset(out, series);
}

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

namespace {

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
    if (!obj.is_object()) throw Error(Errc::InvalidConfig, where + " must be an object");
    for (const auto& item : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
            throw Error(Errc::InvalidConfig, "unknown key '" + item.key() + "' in " + where);
        }
    }
}

template <class T>
void read_key(const json& obj, const char* key, T& target, const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        target = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error(Errc::InvalidConfig, std::string("bad value for '") + key + "' in " + where);
    }
}

BaseDistribution parse_base(const json& obj) {
    std::string family = "skewed_heavy";
    if (obj.contains("family")) {
        if (!obj.at("family").is_string()) throw Error(Errc::InvalidConfig, "base.family must be a string");
        family = obj.at("family").get<std::string>();
    }
    if (family == "uniform_positive") {
        check_keys(obj, {"family", "lo", "hi"}, "generator.base");
        UniformPositive u;
        read_key(obj, "lo", u.lo, "generator.base");
        read_key(obj, "hi", u.hi, "generator.base");
        return u;
    }
    if (family == "skewed_heavy") {
        check_keys(obj, {"family", "shape", "scale"}, "generator.base");
        SkewedHeavy s;
        read_key(obj, "shape", s.shape, "generator.base");
        read_key(obj, "scale", s.scale, "generator.base");
        return s;
    }
    if (family == "constant_plus_noise") {
        check_keys(obj, {"family", "level", "spread"}, "generator.base");
        ConstantPlusNoise c;
        read_key(obj, "level", c.level, "generator.base");
        read_key(obj, "spread", c.spread, "generator.base");
        return c;
    }
    throw Error(Errc::InvalidConfig, "unknown base family '" + family + "'");
}

json base_to_json(const BaseDistribution& base) {
    if (const auto* u = std::get_if<UniformPositive>(&base)) {
        return {{"family", "uniform_positive"}, {"lo", u->lo}, {"hi", u->hi}};
    }
    if (const auto* s = std::get_if<SkewedHeavy>(&base)) {
        return {{"family", "skewed_heavy"}, {"shape", s->shape}, {"scale", s->scale}};
    }
    const auto& c = std::get<ConstantPlusNoise>(base);
    return {{"family", "constant_plus_noise"}, {"level", c.level}, {"spread", c.spread}};
}

}  // namespace

void ExperimentConfig::validate() const {
    generator.validate();
    if (n_grid.empty()) throw Error(Errc::InvalidConfig, "n_grid is empty");
    for (std::size_t k = 0; k < n_grid.size(); ++k) {
        if (n_grid[k] == 0 || (k > 0 && n_grid[k] <= n_grid[k - 1])) {
            throw Error(Errc::InvalidConfig, "n_grid must be positive and strictly ascending");
        }
    }
    if (replicates == 0) throw Error(Errc::InvalidConfig, "replicates must be at least 1");
    if (specs.empty()) throw Error(Errc::InvalidConfig, "specs is empty");
    for (const auto& s : specs) s.validate();
    epsilon.validate();
    thresholds.validate();
    if (threads == 0) throw Error(Errc::InvalidConfig, "threads must be at least 1");
    if (points_file.empty() || summary_file.empty()) throw Error(Errc::InvalidConfig, "output names must be nonempty");
}

ExperimentConfig parse_config(const json& doc) {
    ExperimentConfig c;
    check_keys(doc, {"generator", "n_grid", "replicates", "seed", "specs", "epsilon", "thresholds", "threads", "output"},
               "config");
    if (doc.contains("generator")) {
        const auto& g = doc.at("generator");
        check_keys(g, {"base", "mixing", "noise", "injection"}, "generator");
        if (g.contains("base")) c.generator.base = parse_base(g.at("base"));
        if (g.contains("mixing") && !g.at("mixing").is_null()) {
            const auto& m = g.at("mixing");
            check_keys(m, {"low", "high", "prob_high"}, "generator.mixing");
            TwoPointMixing mix;
            read_key(m, "low", mix.low, "generator.mixing");
            read_key(m, "high", mix.high, "generator.mixing");
            read_key(m, "prob_high", mix.prob_high, "generator.mixing");
            c.generator.mixing = mix;
        }
        if (g.contains("noise")) {
            const auto& n = g.at("noise");
            check_keys(n, {"s0", "gamma"}, "generator.noise");
            read_key(n, "s0", c.generator.noise.s0, "generator.noise");
            read_key(n, "gamma", c.generator.noise.gamma, "generator.noise");
        }
        if (g.contains("injection")) {
            const auto& inj = g.at("injection");
            check_keys(inj, {"b", "beta", "shock_lo", "shock_hi"}, "generator.injection");
            read_key(inj, "b", c.generator.injection.b, "generator.injection");
            read_key(inj, "beta", c.generator.injection.beta, "generator.injection");
            read_key(inj, "shock_lo", c.generator.injection.shock_lo, "generator.injection");
            read_key(inj, "shock_hi", c.generator.injection.shock_hi, "generator.injection");
        }
    }
    read_key(doc, "n_grid", c.n_grid, "config");
    read_key(doc, "replicates", c.replicates, "config");
    read_key(doc, "seed", c.generator.seed, "config");
    read_key(doc, "threads", c.threads, "config");
    if (doc.contains("specs")) {
        std::vector<std::string> labels;
        read_key(doc, "specs", labels, "config");
        c.specs.clear();
        for (const auto& l : labels) {
            try {
                c.specs.push_back(LossSpec::parse(l));
            } catch (const Error& e) {
                throw Error(Errc::InvalidConfig, e.what());
            }
        }
    }
    if (doc.contains("epsilon")) {
        const auto& e = doc.at("epsilon");
        check_keys(e, {"eps0", "alpha"}, "epsilon");
        read_key(e, "eps0", c.epsilon.eps0, "epsilon");
        read_key(e, "alpha", c.epsilon.alpha, "epsilon");
    }
    if (doc.contains("thresholds")) {
        const auto& t = doc.at("thresholds");
        check_keys(t,
                   {"grid_points", "tail_fraction", "moment_max_range", "subset_delta", "subset_probes",
                    "subset_multiple", "seed", "mean_max_oscillation", "weight_max_drift", "sparse_pass_fraction"},
                   "thresholds");
        auto& a = c.thresholds;
        read_key(t, "grid_points", a.grid_points, "thresholds");
        read_key(t, "tail_fraction", a.tail_fraction, "thresholds");
        read_key(t, "moment_max_range", a.moment_max_range, "thresholds");
        read_key(t, "subset_delta", a.subset_delta, "thresholds");
        read_key(t, "subset_probes", a.subset_probes, "thresholds");
        read_key(t, "subset_multiple", a.subset_multiple, "thresholds");
        read_key(t, "seed", a.seed, "thresholds");
        read_key(t, "mean_max_oscillation", a.mean_max_oscillation, "thresholds");
        read_key(t, "weight_max_drift", a.weight_max_drift, "thresholds");
        read_key(t, "sparse_pass_fraction", a.sparse_pass_fraction, "thresholds");
    }
    if (doc.contains("output")) {
        const auto& o = doc.at("output");
        check_keys(o, {"points", "summary"}, "output");
        read_key(o, "points", c.points_file, "output");
        read_key(o, "summary", c.summary_file, "output");
    }
    try {
        c.validate();
    } catch (const Error& e) {
        throw Error(Errc::InvalidConfig, e.what());
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    auto in = open_in(path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(Errc::InvalidConfig, path.string() + ": " + e.what());
    }
    return parse_config(doc);
}

json to_json(const AssumptionConfig& t) {
    return {{"grid_points", t.grid_points},
            {"tail_fraction", t.tail_fraction},
            {"moment_max_range", t.moment_max_range},
            {"subset_delta", t.subset_delta},
            {"subset_probes", t.subset_probes},
            {"subset_multiple", t.subset_multiple},
            {"seed", t.seed},
            {"mean_max_oscillation", t.mean_max_oscillation},
            {"weight_max_drift", t.weight_max_drift},
            {"sparse_pass_fraction", t.sparse_pass_fraction}};
}

json to_json(const ExperimentConfig& c) {
    json specs = json::array();
    for (const auto& s : c.specs) specs.push_back(s.label());
    return {
        {"generator",
         {{"base", base_to_json(c.generator.base)},
          {"mixing", c.generator.mixing ? json{{"low", c.generator.mixing->low},
                                               {"high", c.generator.mixing->high},
                                               {"prob_high", c.generator.mixing->prob_high}}
                                        : json(nullptr)},
          {"noise", {{"s0", c.generator.noise.s0}, {"gamma", c.generator.noise.gamma}}},
          {"injection",
           {{"b", c.generator.injection.b},
            {"beta", c.generator.injection.beta},
            {"shock_lo", c.generator.injection.shock_lo},
            {"shock_hi", c.generator.injection.shock_hi}}}}},
        {"n_grid", c.n_grid},
        {"replicates", c.replicates},
        {"seed", c.generator.seed},
        {"specs", specs},
        {"epsilon", to_json(c.epsilon)},
        {"thresholds", to_json(c.thresholds)},
        {"threads", c.threads},
        {"output", {{"points", c.points_file}, {"summary", c.summary_file}}},
    };
}

// ---------------------------------------------------------------------------
// Rate points
// ---------------------------------------------------------------------------

std::string spec_key(const LossSpec& spec) {
    return fmt::format("{};{};{}", spec.p, spec.q, to_string(spec.weight_side));
}

void write_points(std::ostream& out, const LossSpec& spec, const RatePoints& points, bool with_header) {
    if (with_header) out << points_header << '\n';
    const auto key = spec_key(spec);
    for (const auto& p : points.points) {
        out << fmt::format("{},{},{},{},{},{},{},{},{}\n", key, p.n, p.replicate, p.seed, p.c_error, p.diff,
                           p.keydiff, p.sparse_fraction, p.injected_fraction);
    }
}

RatePoints read_points(std::istream& in, const std::optional<LossSpec>& spec) {
    std::string line;
    if (!std::getline(in, line) || strip_line(line) != points_header) {
        throw Error(Errc::ParseError, "points header must be '" + std::string(points_header) + "'");
    }
    const std::optional<std::string> wanted = spec ? std::optional(spec_key(*spec)) : std::nullopt;
    std::set<std::string> keys;
    RatePoints out;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        line = strip_line(line);
        if (trim(line).empty()) continue;
        ++row;
        const auto where = "points row " + std::to_string(row);
        const auto cells = split(line, ',');
        if (cells.size() != 9) throw Error(Errc::ParseError, where + ": expected 9 cells");
        const std::string key(trim(cells[0]));
        keys.insert(key);
        if (wanted && key != *wanted) continue;
        RatePoint p;
        const auto n = parse_number<std::size_t>(cells[1]);
        const auto rep = parse_number<std::size_t>(cells[2]);
        const auto seed = parse_number<std::uint64_t>(cells[3]);
        std::array<std::optional<double>, 5> reals{parse_number<double>(cells[4]), parse_number<double>(cells[5]),
                                                   parse_number<double>(cells[6]), parse_number<double>(cells[7]),
                                                   parse_number<double>(cells[8])};
        if (!n || !rep || !seed || std::any_of(reals.begin(), reals.end(), [](const auto& v) { return !v; })) {
            throw Error(Errc::ParseError, where + ": malformed number");
        }
        p.n = *n;
        p.replicate = *rep;
        p.seed = *seed;
        p.c_error = *reals[0];
        p.diff = *reals[1];
        p.keydiff = *reals[2];
        p.sparse_fraction = *reals[3];
        p.injected_fraction = *reals[4];
        out.points.push_back(p);
    }
    if (!wanted && keys.size() > 1) {
        throw Error(Errc::InvalidConfig, "points file holds " + std::to_string(keys.size()) +
                                             " loss specs; select one with --spec");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Report documents
// ---------------------------------------------------------------------------

namespace {

json optional_number(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

/// Non-finite values (e.g. an infinite relative range) have no JSON number form.
json finite_or_null(double v) {
    return std::isfinite(v) ? json(v) : json(nullptr);
}

}  // namespace

json to_json(const LossSpec& spec) {
    return {{"p", spec.p},
            {"q", spec.q},
            {"weight_side", to_string(spec.weight_side)},
            {"zero_weight_policy", spec.zero_weight_policy == ZeroWeightPolicy::Error ? "error" : "skip_unit"}};
}

json to_json(const EpsilonSchedule& eps) {
    return {{"eps0", eps.eps0}, {"alpha", eps.alpha}};
}

json to_json(const EquivalenceReport& r) {
    return {
        {"n", r.n},
        {"c_n", r.c_n},
        {"mu_x_hat", r.mu_x_hat},
        {"mu_y_hat", r.mu_y_hat},
        {"K", r.k},
        {"mean_level", r.mean_level},
        {"mean_share", r.mean_share},
        {"difference", r.difference},
        {"ratio_share_over_level", optional_number(r.ratio_share_over_level)},
        {"ratio_level_over_share", optional_number(r.ratio_level_over_share)},
        {"keydiff", r.keydiff},
        {"per_unit_diff_max", r.per_unit_diff_max},
        {"sparse_fraction", r.sparse_fraction},
    };
}

json to_json(const AssumptionReport& r) {
    json a1 = json::array(), a2 = json::array(), a3 = json::array(), a4 = json::array(), a5 = json::array();
    for (const auto& p : r.a1.trajectory) a1.push_back({{"n", p.n}, {"realized", p.realized}, {"target", p.target}});
    for (const auto& p : r.a2.trajectory) {
        a2.push_back({{"n", p.n},
                      {"weight_average", p.weight_average},
                      {"weighted_moment_average", p.weighted_moment_average}});
    }
    for (const auto& p : r.a3.trajectory) a3.push_back({{"n", p.n}, {"realized", p.realized}, {"target", p.target}});
    for (const auto& p : r.a4.trajectory) a4.push_back({{"n", p.n}, {"realized", p.realized}, {"target", p.target}});
    for (const auto& p : r.a5.trajectory) a5.push_back({{"n", p.n}, {"count", p.count}, {"fraction", p.fraction}});
    return {
        {"grid", r.grid},
        {"a1_moment_trajectory", a1},
        {"a1_tail_range",
         {{"realized", finite_or_null(r.a1.realized_tail_range)}, {"target", finite_or_null(r.a1.target_tail_range)}}},
        {"a2_weight_avg_trajectory", a2},
        {"a2_full_average", r.a2.full_average},
        {"a2_subset_probe",
         {{"worst_subset_average", r.a2.worst_subset_average}, {"smallest_subset", r.a2.smallest_subset}}},
        {"a3_mean_trajectory", a3},
        {"a3_oscillation", finite_or_null(r.a3.oscillation)},
        {"a4_weight_trajectory", a4},
        {"a4_weight_limits",
         {{"realized", r.a4.realized_limit}, {"target", r.a4.target_limit}, {"drift", finite_or_null(r.a4.drift)}}},
        {"a5_sparse_trajectory", a5},
        {"verdicts",
         {{"a1", to_string(r.a1.verdict)},
          {"a2", to_string(r.a2.verdict)},
          {"a3", to_string(r.a3.verdict)},
          {"a4", to_string(r.a4.verdict)},
          {"a5", to_string(r.a5.verdict)}}},
    };
}

// ---------------------------------------------------------------------------
// Display tables
// ---------------------------------------------------------------------------

std::string format_display(double value) {
    return fmt::format("{:.4f}", value);
}

std::string comparison_table(std::span<const Measure> measures, std::span<const ComparisonColumn> inputs) {
    if (inputs.empty()) throw Error(Errc::InvalidParameters, "comparison needs at least one input");
    std::vector<std::string> header{"Measure"};
    for (const auto& in : inputs) header.push_back(in.label);
    const bool with_ratio = inputs.size() == 2;
    if (with_ratio) header.push_back(inputs[0].label + "/" + inputs[1].label);

    std::vector<std::vector<std::string>> rows{header};
    for (const auto& m : measures) {
        std::vector<std::string> row{m.display_name()};
        std::vector<double> values;
        for (const auto& in : inputs) {
            values.push_back(named_measure(m, in.series).value);
            row.push_back(format_display(values.back()));
        }
        if (with_ratio) row.push_back(values[1] != 0.0 ? format_display(values[0] / values[1]) : "NA");
        rows.push_back(std::move(row));
    }

    std::vector<std::size_t> width(header.size(), 0);
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    }
    std::string out;
    for (const auto& row : rows) {
        std::string line = fmt::format("{:<{}}", row[0], width[0]);
        for (std::size_t c = 1; c < row.size(); ++c) line += fmt::format("  {:>{}}", row[c], width[c]);
        out += line + '\n';
    }
    return out;
}

}  // namespace lossequiv
