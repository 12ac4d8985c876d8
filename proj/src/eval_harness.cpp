#include "facectl/eval_harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "facectl/error.hpp"
#include "facectl/image_io.hpp"
#include "facectl/numeric.hpp"
#include "facectl/parallel.hpp"
#include "facectl/random.hpp"

namespace facectl {

std::pair<double, double> confidence_interval(double mae, double sem, double z) {
    return {mae - z * sem, mae + z * sem};
}

ErrorSummary summarize_errors(std::span<const double> abs_errors, double z) {
    if (abs_errors.empty()) throw EmptyInputError("no errors to summarize");
    ErrorSummary s;
    s.n = abs_errors.size();
    const double n = static_cast<double>(s.n);
    s.mae = pairwise_sum(abs_errors) / n;
    if (s.n > 1) {
        std::vector<double> sq(abs_errors.size());
        std::transform(abs_errors.begin(), abs_errors.end(), sq.begin(),
                       [&](double e) { return (e - s.mae) * (e - s.mae); });
        s.sd = std::sqrt(pairwise_sum(sq) / (n - 1.0));
    }
    s.sem = s.sd / std::sqrt(n);
    std::tie(s.ci_lo, s.ci_hi) = confidence_interval(s.mae, s.sem, z);
    return s;
}

namespace {

std::vector<const DatasetRecord*> sorted_by_id(std::span<const DatasetRecord> records) {
    std::vector<const DatasetRecord*> out;
    for (const auto& r : records) out.push_back(&r);
    std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->id < b->id; });
    return out;
}

}  // namespace

EvalReport score(const Predictor& predictor, std::span<const DatasetRecord> test, const std::filesystem::path& root,
                 const ControlRegistry& registry, const ScoreOptions& options) {
    if (test.empty()) throw EmptyInputError("test split is empty");
    predictor.prepare(test);
    const auto ordered = sorted_by_id(test);
    const std::size_t channels = registry.size();
    std::vector<double> errors(ordered.size() * channels);
    const bool with_image = predictor.needs_image();
    const Frame blank;

    parallel_for(ordered.size(), options.threads, [&](std::size_t i) {
        const auto& rec = *ordered[i];
        Frame image;
        if (with_image) image = read_png(root / rec.image_path);
        const Query query{with_image ? image : blank, rec.id, fnv1a64(rec.id)};
        auto pred = predictor.predict(query);
        if (pred.size() != channels) {
            throw ContractError("predictor " + predictor.name() + " returned " + std::to_string(pred.size()) +
                                " values for " + rec.id + ", expected " + std::to_string(channels));
        }
        for (std::size_t c = 0; c < channels; ++c) {
            double p = pred[c];
            if (options.clamp) p = std::clamp(p, registry[c].range_min, registry[c].range_max);
            errors[i * channels + c] = std::abs(p - rec.vector[c]);
        }
    });
    return {predictor.name(), summarize_errors(errors)};
}

std::vector<EvalReport> compare(std::span<const Predictor* const> predictors, std::span<const DatasetRecord> test,
                                const std::filesystem::path& root, const ControlRegistry& registry,
                                const ScoreOptions& options) {
    std::vector<EvalReport> out;
    for (const auto* p : predictors) out.push_back(score(*p, test, root, registry, options));
    return out;
}

std::string reports_to_table(const std::vector<EvalReport>& reports) {
    std::size_t width = 9;
    for (const auto& r : reports) width = std::max(width, r.predictor.size());
    std::ostringstream os;
    char line[256];
    std::snprintf(line, sizeof line, "%-*s %10s %10s %10s %10s %23s\n", static_cast<int>(width), "predictor", "n",
                  "MAE", "SD", "SEM", "95% CI");
    os << line;
    for (const auto& r : reports) {
        const auto& e = r.errors;
        std::snprintf(line, sizeof line, "%-*s %10zu %10.4f %10.4f %10.4f  [%9.4f, %9.4f]\n", static_cast<int>(width),
                      r.predictor.c_str(), e.n, e.mae, e.sd, e.sem, e.ci_lo, e.ci_hi);
        os << line;
    }
    return os.str();
}

std::string reports_to_csv(const std::vector<EvalReport>& reports) {
    std::ostringstream os;
    os.precision(17);
    os << "predictor,n,mae,sd,sem,ci_lo,ci_hi\n";
    for (const auto& r : reports) {
        const auto& e = r.errors;
        os << r.predictor << ',' << e.n << ',' << e.mae << ',' << e.sd << ',' << e.sem << ',' << e.ci_lo << ','
           << e.ci_hi << '\n';
    }
    return os.str();
}

nlohmann::json reports_to_json(const std::vector<EvalReport>& reports) {
    auto doc = nlohmann::json::array();
    for (const auto& r : reports) {
        const auto& e = r.errors;
        doc.push_back({{"predictor", r.predictor}, {"n", e.n}, {"mae", e.mae}, {"sd", e.sd}, {"sem", e.sem},
                       {"ci95", {e.ci_lo, e.ci_hi}}});
    }
    return doc;
}

// ---------------------------------------------------------------------------
// Reference predictors

RcPredictor::RcPredictor(const ControlRegistry& registry, std::uint64_t seed) : registry_(registry), seed_(seed) {}

std::vector<double> RcPredictor::predict(const Query& query) const {
    Rng rng = derived_rng(seed_, query.key);
    std::vector<double> out(registry_.size());
    for (std::size_t c = 0; c < out.size(); ++c) out[c] = uniform(rng, registry_[c].range_min, registry_[c].range_max);
    return out;
}

RtPredictor::RtPredictor(std::span<const DatasetRecord> train, std::uint64_t seed) : seed_(seed) {
    if (train.empty()) throw EmptyInputError("RT predictor needs a non-empty training set");
    for (const auto* r : sorted_by_id(train)) vectors_.push_back(r->vector);
}

std::vector<double> RtPredictor::predict(const Query& query) const {
    Rng rng = derived_rng(seed_, query.key);
    const auto& v = vectors_[uniform_index(rng, vectors_.size())];
    return {v.values().begin(), v.values().end()};
}

NnPredictor::NnPredictor(std::span<const DatasetRecord> train, const std::filesystem::path& root,
                         std::size_t threads) {
    if (train.empty()) throw EmptyInputError("NN predictor needs a non-empty training set");
    const auto ordered = sorted_by_id(train);
    entries_.resize(ordered.size());
    parallel_for(ordered.size(), threads, [&](std::size_t i) {
        entries_[i] = {ordered[i]->id, ordered[i]->vector, read_png(root / ordered[i]->image_path)};
    });
}

std::vector<double> NnPredictor::predict(const Query& query) const {
    const auto& q = query.image.pixels;
    const std::size_t n = q.size();
    constexpr std::size_t kBlock = 4096;
    std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
    const Entry* winner = nullptr;
    for (const auto& e : entries_) {
        if (e.image.width != query.image.width || e.image.height != query.image.height) {
            throw DimensionError("NN query " + std::string(query.id) + " does not match training image " + e.id);
        }
        const auto* t = e.image.pixels.data();
        std::uint64_t dist = 0;
        // Abandon a candidate once it can no longer beat the best so far.
        for (std::size_t start = 0; start < n && dist < best; start += kBlock) {
            const std::size_t end = std::min(n, start + kBlock);
            std::uint32_t partial = 0;
            for (std::size_t j = start; j < end; ++j) {
                const int d = static_cast<int>(q[j]) - static_cast<int>(t[j]);
                partial += static_cast<std::uint32_t>(d * d);
            }
            dist += partial;
        }
        if (dist < best) {
            best = dist;
            winner = &e;
        }
    }
    return {winner->vector.values().begin(), winner->vector.values().end()};
}

PerfectPredictor::PerfectPredictor(std::span<const DatasetRecord> truth) {
    for (const auto& r : truth) truth_.emplace(r.id, r.vector);
}

std::vector<double> PerfectPredictor::predict(const Query& query) const {
    const auto it = truth_.find(query.id);
    if (it == truth_.end()) throw ContractError("no ground truth for record " + std::string(query.id));
    return {it->second.values().begin(), it->second.values().end()};
}

ExternalPredictor::ExternalPredictor(const std::filesystem::path& path, std::string name) : name_(std::move(name)) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open predictions " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto where = path.string() + ":" + std::to_string(line_no);
        try {
            const auto doc = nlohmann::json::parse(line);
            auto id = doc.at("id").get<std::string>();
            auto values = doc.at("values").get<std::vector<double>>();
            if (!values_.emplace(id, std::move(values)).second) throw ParseError(where + ": duplicate id " + id);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(where + ": " + e.what());
        }
    }
}

void ExternalPredictor::prepare(std::span<const DatasetRecord> test) const {
    std::vector<std::string> missing, unexpected;
    std::map<std::string_view, bool> wanted;
    for (const auto& r : test) {
        wanted.emplace(r.id, true);
        if (!values_.count(r.id)) missing.push_back(r.id);
    }
    for (const auto& [id, _] : values_) {
        if (!wanted.count(id)) unexpected.push_back(id);
    }
    if (missing.empty() && unexpected.empty()) return;
    auto list = [](const std::vector<std::string>& ids) {
        std::string s;
        for (std::size_t i = 0; i < ids.size() && i < 20; ++i) s += (i ? "," : "") + ids[i];
        if (ids.size() > 20) s += ",...";
        return s;
    };
    throw ContractError("prediction ids do not match the test split: " + std::to_string(missing.size()) +
                        " missing [" + list(missing) + "], " + std::to_string(unexpected.size()) +
                        " unexpected [" + list(unexpected) + "]");
}

std::vector<double> ExternalPredictor::predict(const Query& query) const {
    const auto it = values_.find(query.id);
    if (it == values_.end()) throw ContractError("no prediction for record " + std::string(query.id));
    return it->second;
}

}  // namespace facectl
