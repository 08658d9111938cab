#pragma once

// Precision, recall and F1 over thresholded cosine scores.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "irmatch/encoder.hpp"

namespace irmatch::eval {

struct LabeledScore {
    std::string query_id;
    std::string candidate_id;
    double score;
    bool is_clone;
};

/// P is null when nothing is predicted positive, R when there is no true
/// clone, F1 when either is null.
struct Metrics {
    long long tp = 0, fp = 0, fn = 0, tn = 0;
    std::optional<double> precision, recall, f1;

    long long predicted_positive() const { return tp + fp; }
};

/// A pair counts as predicted positive when score >= threshold. Throws EmptyInput.
Metrics precision_recall_f1(std::span<const LabeledScore> items, double threshold);

struct SweepPoint {
    double threshold;
    Metrics metrics;
};

struct Sweep {
    std::vector<SweepPoint> points;
    std::optional<double> best_threshold;  // first threshold with the highest defined F1
};

/// Throws EmptyInput, or irmatch::Error when the grid is empty or not ascending.
Sweep threshold_sweep(std::span<const LabeledScore> items, std::span<const double> grid);

/// "lo:hi:step", inclusive of hi up to rounding. Throws FormatError.
std::vector<double> parse_grid(std::string_view text);

/// Each query is scored against its true counterpart and `negatives`
/// candidates drawn without replacement from other groups.
struct Protocol {
    int negatives = 9;
    std::uint64_t seed = 0;

    std::string describe() const;
};

struct Query {
    std::string binary_id;
    std::string source_id;
    std::string group_id;
};

/// `embeddings` maps doc ids to vectors; `sources` lists candidate source
/// ids with their groups. Throws irmatch::Error when fewer than `negatives`
/// foreign candidates exist or an id has no embedding.
std::vector<LabeledScore> score_protocol(std::span<const Query> queries,
                                         const std::vector<std::pair<std::string, std::string>>& sources,
                                         const std::map<std::string, nn::Vector>& embeddings, const Protocol& protocol);

std::string write_scores(std::span<const LabeledScore> items);
std::vector<LabeledScore> read_scores(std::string_view text);

/// JSON {protocol, threshold, P, R, F1, counts, sweep, best_threshold}.
std::string report_json(const Metrics& at_threshold, double threshold, const Sweep& sweep, std::string_view protocol);
/// threshold,tp,fp,fn,tn,precision,recall,f1 with empty cells for nulls.
std::string sweep_csv(const Sweep& sweep);

}  // namespace irmatch::eval
