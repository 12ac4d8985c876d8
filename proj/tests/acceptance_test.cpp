// Acceptance gate: one PASS/FAIL line per criterion, exit code 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <sys/wait.h>

#include "facectl/animation.hpp"
#include "facectl/curve_engine.hpp"
#include "facectl/dataset_builder.hpp"
#include "facectl/eval_harness.hpp"
#include "facectl/similarity.hpp"
#include "oracles.hpp"

using namespace facectl;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void check(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "[failed: " << what << "] ";
        }
    }
};

struct Cmd {
    int code = -1;
    std::string out;
};

Cmd cli(const std::string& args) {
    Cmd r;
    const std::string cmd = std::string(FACECTL_CLI_PATH) + " " + args;
    std::FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

BezierSegment random_segment(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> start(0.0, 10.0), span(0.02, 5.0), val(-2.5, 2.5), frac(0.0, 1.0);
    const double t0 = start(rng), t1 = t0 + span(rng);
    return {{t0, val(rng)},
            {t0 + frac(rng) * (t1 - t0), val(rng)},
            {t0 + frac(rng) * (t1 - t0), val(rng)},
            {t1, val(rng)}};
}

Frame random_frame(std::mt19937_64& rng, int w, int h) {
    Frame f(w, h);
    for (auto& p : f.pixels) p = static_cast<std::uint8_t>(rng() & 0xff);
    return f;
}

DatasetRecord record(std::string id, const ControlVector& v) {
    DatasetRecord r;
    r.id = std::move(id);
    r.clip_name = "fixture";
    r.vector = v;
    return r;
}

DatasetManifest manifest_of(std::vector<DatasetRecord> recs) {
    DatasetManifest m;
    m.records = std::move(recs);
    return m;
}

// Every regular file under `a` must exist under `b` with identical bytes.
std::size_t compare_trees(const fs::path& a, const fs::path& b, Outcome& o) {
    std::size_t files = 0, mismatched = 0;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (!e.is_regular_file()) continue;
        const auto rel = fs::relative(e.path(), a);
        ++files;
        if (oracle::read_file(e.path()) != oracle::read_file(b / rel)) ++mismatched;
    }
    std::size_t files_b = 0;
    for (const auto& e : fs::recursive_directory_iterator(b)) files_b += e.is_regular_file();
    o.check(files == files_b, "file counts " + std::to_string(files) + " vs " + std::to_string(files_b));
    o.check(mismatched == 0, std::to_string(mismatched) + " files differ");
    return files;
}

// 1. Curve kernels.
void kernels(Outcome& o) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> frac(0.0, 1.0);
    double worst_mid = 0, worst_residual = 0, worst_linear = 0, worst_step = 0;
    bool endpoints = true;
    for (int i = 0; i < 1000; ++i) {
        const auto s = random_segment(rng);
        endpoints &= eval_bezier_param(s, 0.0) == s.p0 && eval_bezier_param(s, 1.0) == s.p3;
        const auto m = eval_bezier_param(s, 0.5);
        worst_mid = std::max({worst_mid, std::abs(m.time - (s.p0.time + 3 * s.p1.time + 3 * s.p2.time + s.p3.time) / 8),
                              std::abs(m.value - (s.p0.value + 3 * s.p1.value + 3 * s.p2.value + s.p3.value) / 8)});
        const double t = s.p0.time + frac(rng) * (s.p3.time - s.p0.time);
        worst_residual = std::max(worst_residual, std::abs(eval_bezier_param(s, solve_bezier_time(s, t)).time - t));
    }
    for (int i = 0; i < 1000; ++i) {
        const double t0 = 10 * frac(rng), t1 = t0 + 0.02 + 5 * frac(rng);
        const oracle::Pt p0{t0, -3 + 6 * frac(rng)}, p1{t1, -3 + 6 * frac(rng)};
        const double t = t0 + frac(rng) * (t1 - t0);
        worst_linear = std::max(worst_linear, std::abs(eval_linear({p0.t, p0.v}, {p1.t, p1.v}, t) - oracle::dense_linear(p0, p1, t)));
        if (i % 5 == 0) {
            worst_step = std::max(worst_step, std::abs(eval_step({p0.t, p0.v}, {p1.t, p1.v}, t) - oracle::dense_step(p0, p1, t)));
        }
    }
    o.check(endpoints, "endpoint identity");
    o.check(worst_mid <= 1e-12, "midpoint identity");
    o.check(worst_residual <= 1e-9, "inversion residual");
    o.check(worst_linear <= 1e-9, "linear vs oracle");
    o.check(worst_step <= 1e-9, "step vs oracle");
    o.detail << "midpoint " << worst_mid << " residual " << worst_residual << " linear " << worst_linear << " step "
             << worst_step;
}

// 2. SSIM.
void ssim_suite(Outcome& o) {
    const SsimParams def;
    o.check(def.k1 == 0.01 && def.k2 == 0.03 && def.dynamic_range == 255.0, "constants");
    SsimParams global;
    global.window = GlobalWindow{};
    std::mt19937_64 rng(7);
    double worst_self = 0, worst_sym = 0;
    for (int i = 0; i < 20; ++i) {
        const auto x = random_frame(rng, 128, 128);
        worst_self = std::max({worst_self, std::abs(ssim(x, x) - 1.0), std::abs(ssim(x, x, global) - 1.0)});
    }
    for (int i = 0; i < 100; ++i) {
        const auto x = random_frame(rng, 96, 96), y = random_frame(rng, 96, 96);
        worst_sym = std::max(worst_sym, std::abs(ssim(x, y) - ssim(y, x)));
    }
    const double c1 = (0.01 * 255) * (0.01 * 255);
    const double analytic = c1 / (255.0 * 255.0 + c1);
    const Frame black(64, 64, 0), white(64, 64, 255);
    const double constant_err =
        std::max(std::abs(ssim(black, white) - analytic), std::abs(ssim(black, white, global) - analytic));
    o.check(worst_self <= 1e-12, "reflexivity");
    o.check(worst_sym <= 1e-12, "symmetry");
    o.check(constant_err <= 1e-9, "constant images");
    o.detail << "self " << worst_self << " symmetry " << worst_sym << " constant " << analytic << " err "
             << constant_err;
}

// 3. Alignment audit of a 50-clip build.
void alignment(Outcome& o) {
    oracle::TempDir dir("accept_align");
    const auto root = dir.path() / "ds";
    const auto b = cli("build --synthetic 50 --seed 2026 --timestep 0.02 --theta 0.99 --resolution 512 --out " +
                       root.string());
    o.check(b.code == 0, "build exit " + std::to_string(b.code));
    const auto v = cli("verify --manifest " + root.string());
    o.check(v.code == 0, "verify exit " + std::to_string(v.code));
    o.check(v.out.find(" alignment_violations 0 ") != std::string::npos, "alignment violations");
    o.check(v.out.find(" image_violations 0 ") != std::string::npos, "image violations");
    auto line = v.out.substr(0, v.out.find('\n'));
    o.detail << line;
}

// 4. Count law and split sizes.
void count_and_split(Outcome& o) {
    const AnimationClip clip("two_seconds", 2.0, {});
    const auto seq = sample_clip(clip, 0.02, registry_default());
    o.check(sample_count(2.0, 0.02) == 101 && seq.samples.size() == 101, "101 samples");
    std::vector<DatasetRecord> recs;
    for (int i = 0; i < 100; ++i) recs.push_back(record("r" + std::to_string(i), neutral_vector(registry_default())));
    assign_splits(recs, 0.8, 1);
    const auto m = manifest_of(recs);
    o.check(m.count(Split::Train) == 80 && m.count(Split::Test) == 20, "80/20");
    o.detail << "samples " << seq.samples.size() << " train " << m.count(Split::Train) << " test "
             << m.count(Split::Test);
}

// 5. Dataset statistics.
void statistics(Outcome& o) {
    const auto& reg = registry_default();
    std::vector<DatasetRecord> recs;
    const double jp[] = {0.0, 0.25, 0.5, 0.75, 1.0};
    for (int i = 0; i < 5; ++i) {
        auto v = neutral_vector(reg);
        v[0] = jp[i];
        recs.push_back(record("f" + std::to_string(i), v));
    }
    const auto s = channel_stats(manifest_of(recs));
    o.check(s[0].mean == 0.5 && s[0].min == 0.0 && s[0].max == 1.0 && s[0].sd == std::sqrt(0.125), "fixture");
    bool others = true;
    for (std::size_t c = 1; c < kNumControls; ++c) others &= s[c].mean == reg[c].neutral && s[c].sd == 0.0;
    o.check(others, "untouched channels");

    std::vector<DatasetRecord> neutral;
    for (int i = 0; i < 10; ++i) neutral.push_back(record("n" + std::to_string(i), neutral_vector(reg)));
    const auto n = channel_stats(manifest_of(neutral));
    bool all = true;
    for (std::size_t c = 0; c < kNumControls; ++c) all &= n[c].mean == reg[c].neutral && n[c].sd == 0.0;
    o.check(all, "all-neutral");
    o.detail << "JP mean " << s[0].mean << " sd " << s[0].sd << " range [" << s[0].min << ", " << s[0].max << "]";
}

// 6. Evaluation arithmetic.
void evaluation(Outcome& o) {
    const std::vector<double> e{0.0, 0.0, 0.0, 0.4};
    const auto s = summarize_errors(e);
    const auto near = [](double a, double b) { return std::abs(a - b) <= 1e-12; };
    o.check(near(s.mae, 0.1) && near(s.sd, 0.2) && near(s.sem, 0.1), "MAE/SD/SEM");
    o.check(near(s.ci_lo, -0.096) && near(s.ci_hi, 0.296), "CI");
    const auto [lo, hi] = confidence_interval(0.0114, 0.0005);
    o.check(std::abs(lo - 0.0105) <= 5e-4 && std::abs(hi - 0.0123) <= 5e-4, "reference interval");
    o.detail << "MAE " << s.mae << " SD " << s.sd << " SEM " << s.sem << " CI [" << s.ci_lo << ", " << s.ci_hi
             << "]; reference row -> [" << lo << ", " << hi << "]";
}

// 7. Baseline ordering on 500 records.
void baselines(Outcome& o) {
    oracle::TempDir dir("accept_base");
    BuildConfig cfg;
    cfg.output_root = dir.path();
    cfg.seed = 500;
    auto result = build_dataset(make_synthetic_clips(5, 500, registry_default()), cfg);
    auto& recs = result.manifest.records;
    o.check(recs.size() >= 500, "dataset has " + std::to_string(recs.size()) + " records");
    if (recs.size() > 500) recs.resize(500);
    assign_splits(recs, cfg.split_fraction, cfg.seed);
    const auto train = result.manifest.subset(Split::Train), test = result.manifest.subset(Split::Test);
    const RcPredictor rc(registry_default(), cfg.seed);
    const RtPredictor rt(train, cfg.seed);
    const NnPredictor nn(train, dir.path());
    const PerfectPredictor perfect(test);
    const std::vector<const Predictor*> ps{&rc, &rt, &nn, &perfect};
    const auto reports = compare(ps, test, dir.path());
    const double m_rc = reports[0].errors.mae, m_rt = reports[1].errors.mae, m_nn = reports[2].errors.mae;
    o.check(m_nn < m_rt, "NN < RT");
    o.check(m_nn < m_rc, "NN < RC");
    o.check(reports[3].errors.mae == 0.0, "perfect = 0");
    o.detail << "records " << recs.size() << " test " << test.size() << " RC " << m_rc << " RT " << m_rt << " NN "
             << m_nn << " perfect " << reports[3].errors.mae;
}

// 8. Determinism across thread counts.
void determinism(Outcome& o) {
    oracle::TempDir dir("accept_det");
    const auto a = dir.path() / "a", b = dir.path() / "b";
    const std::string common = "build --synthetic 6 --seed 8 --resolution 512 ";
    o.check(cli(common + "--threads 1 --out " + a.string()).code == 0, "build 1");
    o.check(cli(common + "--threads 4 --out " + b.string()).code == 0, "build 2");
    o.check(oracle::read_file(a / kManifestFile) == oracle::read_file(b / kManifestFile), "manifest bytes");
    const auto files = compare_trees(a, b, o);
    o.detail << files << " files compared";
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        std::function<void(Outcome&)> run;
    };
    const std::vector<Criterion> criteria{
        {1, "interpolation kernels", 10, kernels},
        {2, "ssim", 10, ssim_suite},
        {3, "alignment audit", 300, alignment},
        {4, "count law and split", 0, count_and_split},
        {5, "statistics", 0, statistics},
        {6, "evaluation arithmetic", 0, evaluation},
        {7, "baseline ordering", 120, baselines},
        {8, "determinism", 0, determinism},
    };
    std::cout.precision(6);
    bool all = true;
    for (const auto& c : criteria) {
        Outcome o;
        o.detail.precision(6);
        const auto start = std::chrono::steady_clock::now();
        try {
            c.run(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "exception: " << e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.budget_s > 0 && secs > c.budget_s) {
            o.pass = false;
            o.detail << " [over budget " << c.budget_s << " s]";
        }
        all &= o.pass;
        std::printf("criterion %d %s (%.1f s) %s: %s\n", c.id, o.pass ? "PASS" : "FAIL", secs, c.name,
                    o.detail.str().c_str());
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}
