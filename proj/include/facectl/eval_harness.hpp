#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "facectl/control_space.hpp"
#include "facectl/dataset_builder.hpp"
#include "facectl/face_render.hpp"

namespace facectl {

inline constexpr double kCiZ95 = 1.96;

// What a predictor sees for one test record. `image` is empty for
// predictors that do not ask for pixels. `key` is a stable hash of the id,
// so seeded predictors give the same answer whatever the scoring order.
struct Query {
    const Frame& image;
    std::string_view id;
    std::uint64_t key;
};

class Predictor {
public:
    virtual ~Predictor() = default;
    virtual std::string name() const = 0;
    virtual bool needs_image() const { return false; }
    // Called once with the full test set before any predict call.
    virtual void prepare(std::span<const DatasetRecord> /*test*/) const {}
    // Must be safe to call concurrently.
    virtual std::vector<double> predict(const Query& query) const = 0;
};

struct ErrorSummary {
    std::size_t n = 0;
    double mae = 0;
    double sd = 0;  // sample (n - 1)
    double sem = 0;
    double ci_lo = 0;
    double ci_hi = 0;
};

// SEM = sd / sqrt(n) and CI = mae -/+ z * sem. Throws EmptyInputError.
ErrorSummary summarize_errors(std::span<const double> abs_errors, double z = kCiZ95);
std::pair<double, double> confidence_interval(double mae, double sem, double z = kCiZ95);

struct EvalReport {
    std::string predictor;
    ErrorSummary errors;
};

struct ScoreOptions {
    // Clamp predictions to the registry before scoring.
    bool clamp = true;
    std::size_t threads = 0;
};

// Pools the per-channel absolute errors of every test record. Image paths
// are resolved against `root`. Throws EmptyInputError for an empty test set
// and ContractError when a prediction is not 30-dimensional.
EvalReport score(const Predictor& predictor, std::span<const DatasetRecord> test, const std::filesystem::path& root,
                 const ControlRegistry& registry = registry_default(), const ScoreOptions& options = {});

std::vector<EvalReport> compare(std::span<const Predictor* const> predictors, std::span<const DatasetRecord> test,
                                const std::filesystem::path& root,
                                const ControlRegistry& registry = registry_default(),
                                const ScoreOptions& options = {});

std::string reports_to_table(const std::vector<EvalReport>& reports);
std::string reports_to_csv(const std::vector<EvalReport>& reports);
nlohmann::json reports_to_json(const std::vector<EvalReport>& reports);

// Uniform draw inside every channel's range.
class RcPredictor : public Predictor {
public:
    explicit RcPredictor(const ControlRegistry& registry = registry_default(), std::uint64_t seed = 0);
    std::string name() const override { return "RC"; }
    std::vector<double> predict(const Query& query) const override;

private:
    ControlRegistry registry_;
    std::uint64_t seed_;
};

// A uniformly chosen training vector. Throws EmptyInputError for an empty
// training set.
class RtPredictor : public Predictor {
public:
    RtPredictor(std::span<const DatasetRecord> train, std::uint64_t seed = 0);
    std::string name() const override { return "RT"; }
    std::vector<double> predict(const Query& query) const override;

private:
    std::vector<ControlVector> vectors_;
    std::uint64_t seed_;
};

// Vector of the training image nearest in pixel L2 distance; ties go to the
// lowest record id. Throws EmptyInputError for an empty training set.
class NnPredictor : public Predictor {
public:
    NnPredictor(std::span<const DatasetRecord> train, const std::filesystem::path& root, std::size_t threads = 0);
    std::string name() const override { return "NN"; }
    bool needs_image() const override { return true; }
    std::vector<double> predict(const Query& query) const override;

private:
    struct Entry {
        std::string id;
        ControlVector vector;
        Frame image;
    };
    std::vector<Entry> entries_;
};

// Returns the ground truth it was built from. Reference for a zero score.
class PerfectPredictor : public Predictor {
public:
    explicit PerfectPredictor(std::span<const DatasetRecord> truth);
    std::string name() const override { return "perfect"; }
    std::vector<double> predict(const Query& query) const override;

private:
    std::map<std::string, ControlVector, std::less<>> truth_;
};

// Predictions read from a JSONL file of {"id": ..., "values": [30 reals]}.
class ExternalPredictor : public Predictor {
public:
    // Throws IoError / ParseError.
    ExternalPredictor(const std::filesystem::path& path, std::string name = "external");
    std::string name() const override { return name_; }
    // Throws ContractError listing missing and unexpected ids.
    void prepare(std::span<const DatasetRecord> test) const override;
    std::vector<double> predict(const Query& query) const override;

private:
    std::string name_;
    std::map<std::string, std::vector<double>, std::less<>> values_;
};

}  // namespace facectl
