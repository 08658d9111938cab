#include "irmatch/eval.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <set>

#include "irmatch/error.hpp"
#include "irmatch/keyvalue.hpp"
#include "irmatch/matcher.hpp"
#include "irmatch/random.hpp"

namespace irmatch::eval {

using nlohmann::json;

namespace {

json nullable(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json metrics_json(const Metrics& m) {
    return {{"P", nullable(m.precision)},
            {"R", nullable(m.recall)},
            {"F1", nullable(m.f1)},
            {"counts", {{"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn}, {"tn", m.tn}}}};
}

std::string cell(const std::optional<double>& v) {
    if (!v) return {};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", *v);
    return buf;
}

}  // namespace

Metrics precision_recall_f1(std::span<const LabeledScore> items, double threshold) {
    if (items.empty()) throw EmptyInput("no labeled scores to evaluate");
    Metrics m;
    for (const auto& it : items) {
        const bool predicted = it.score >= threshold;
        if (predicted && it.is_clone) ++m.tp;
        else if (predicted) ++m.fp;
        else if (it.is_clone) ++m.fn;
        else ++m.tn;
    }
    if (m.tp + m.fp > 0) m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
    if (m.tp + m.fn > 0) m.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
    if (m.precision && m.recall) {
        m.f1 = 2.0 * static_cast<double>(m.tp) / static_cast<double>(2 * m.tp + m.fp + m.fn);
    }
    return m;
}

Sweep threshold_sweep(std::span<const LabeledScore> items, std::span<const double> grid) {
    if (items.empty()) throw EmptyInput("no labeled scores to evaluate");
    if (grid.empty()) throw Error("threshold grid is empty");
    if (!std::is_sorted(grid.begin(), grid.end())) throw Error("threshold grid must be ascending");
    Sweep sweep;
    std::optional<double> best_f1;
    for (double t : grid) {
        auto m = precision_recall_f1(items, t);
        if (m.f1 && (!best_f1 || *m.f1 > *best_f1)) {
            best_f1 = m.f1;
            sweep.best_threshold = t;
        }
        sweep.points.push_back({t, std::move(m)});
    }
    return sweep;
}

std::vector<double> parse_grid(std::string_view text) {
    std::vector<std::string> fields;
    std::string current;
    for (char c : text) {
        if (c == ':') {
            fields.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    fields.push_back(current);
    if (fields.size() != 3) throw FormatError("threshold grid must look like lo:hi:step");
    const double lo = parse_real_value("sweep", fields[0]);
    const double hi = parse_real_value("sweep", fields[1]);
    const double step = parse_real_value("sweep", fields[2]);
    if (!(step > 0.0) || hi < lo) throw FormatError("threshold grid needs lo <= hi and step > 0");
    std::vector<double> grid;
    const auto n = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
    for (long long i = 0; i <= n; ++i) grid.push_back(std::round((lo + static_cast<double>(i) * step) * 1e9) / 1e9);
    return grid;
}

std::string Protocol::describe() const {
    return "1-positive-" + std::to_string(negatives) + "-negatives, negatives drawn uniformly without replacement "
           "from sources of other groups, seed " + std::to_string(seed);
}

std::vector<LabeledScore> score_protocol(std::span<const Query> queries,
                                         const std::vector<std::pair<std::string, std::string>>& sources,
                                         const std::map<std::string, nn::Vector>& embeddings, const Protocol& protocol) {
    auto vec = [&](const std::string& id) -> const nn::Vector& {
        const auto it = embeddings.find(id);
        if (it == embeddings.end()) throw Error("no embedding for document '" + id + "'");
        return it->second;
    };
    std::vector<LabeledScore> out;
    for (std::size_t q = 0; q < queries.size(); ++q) {
        const auto& query = queries[q];
        const auto& b = vec(query.binary_id);
        out.push_back({query.binary_id, query.source_id, match::cosine(b, vec(query.source_id)), true});

        std::vector<std::size_t> foreign;
        for (std::size_t i = 0; i < sources.size(); ++i) {
            if (sources[i].second != query.group_id) foreign.push_back(i);
        }
        if (foreign.size() < static_cast<std::size_t>(protocol.negatives)) {
            throw Error("query '" + query.binary_id + "' has only " + std::to_string(foreign.size()) +
                        " candidate negatives");
        }
        Rng rng = Rng::derive(protocol.seed, q);
        for (std::size_t k = 0; k < static_cast<std::size_t>(protocol.negatives); ++k) {
            std::swap(foreign[k], foreign[k + rng.below(foreign.size() - k)]);
            const auto& id = sources[foreign[k]].first;
            out.push_back({query.binary_id, id, match::cosine(b, vec(id)), false});
        }
    }
    return out;
}

std::string write_scores(std::span<const LabeledScore> items) {
    std::string out;
    for (const auto& it : items) {
        out += json{{"query_id", it.query_id}, {"candidate_id", it.candidate_id}, {"score", it.score}, {"is_clone", it.is_clone}}
                   .dump();
        out += '\n';
    }
    return out;
}

std::vector<LabeledScore> read_scores(std::string_view text) {
    std::vector<LabeledScore> out;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        const auto line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        try {
            const auto j = json::parse(line);
            LabeledScore s{j.at("query_id").get<std::string>(), j.at("candidate_id").get<std::string>(),
                           j.at("score").get<double>(), j.at("is_clone").get<bool>()};
            if (!(s.score >= -1.0 && s.score <= 1.0)) throw FormatError("score outside [-1, 1]");
            out.push_back(std::move(s));
        } catch (const json::exception& e) {
            throw FormatError("scores line " + std::to_string(line_no) + ": " + e.what());
        } catch (const FormatError& e) {
            throw FormatError("scores line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::string report_json(const Metrics& at_threshold, double threshold, const Sweep& sweep, std::string_view protocol) {
    json j = metrics_json(at_threshold);
    j["protocol"] = protocol;
    j["threshold"] = threshold;
    json points = json::array();
    for (const auto& p : sweep.points) {
        json e = metrics_json(p.metrics);
        e["threshold"] = p.threshold;
        points.push_back(std::move(e));
    }
    j["sweep"] = std::move(points);
    j["best_threshold"] = nullable(sweep.best_threshold);
    return j.dump(2) + "\n";
}

std::string sweep_csv(const Sweep& sweep) {
    std::string out = "threshold,tp,fp,fn,tn,precision,recall,f1\n";
    for (const auto& p : sweep.points) {
        const auto& m = p.metrics;
        out += cell(p.threshold) + "," + std::to_string(m.tp) + "," + std::to_string(m.fp) + "," + std::to_string(m.fn) +
               "," + std::to_string(m.tn) + "," + cell(m.precision) + "," + cell(m.recall) + "," + cell(m.f1) + "\n";
    }
    return out;
}

}  // namespace irmatch::eval
