#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include "facectl/dataset_builder.hpp"
#include "facectl/error.hpp"
#include "facectl/image_io.hpp"
#include "oracles.hpp"

using namespace facectl;
namespace fs = std::filesystem;

namespace {

const ControlRegistry& reg() { return registry_default(); }

DatasetRecord record(std::string id, const ControlVector& v, std::string clip = "c") {
    DatasetRecord r;
    r.id = std::move(id);
    r.clip_name = std::move(clip);
    r.image_path = "images/" + r.clip_name + "/" + r.id + ".png";
    r.vector = v;
    return r;
}

DatasetManifest manifest_of(std::vector<DatasetRecord> records) {
    DatasetManifest m;
    m.build_config = {{"timestep", 0.02}};
    m.records = std::move(records);
    return m;
}

BuildConfig small_config(const fs::path& root) {
    BuildConfig cfg;
    cfg.output_root = root;
    cfg.resolution = 64;
    cfg.seed = 5;
    return cfg;
}

Keyframe key(double t, double v) {
    Keyframe k;
    k.time = t;
    k.value = v;
    return k;
}

}  // namespace

TEST(Splits, EightyTwentyOfHundred) {
    std::vector<DatasetRecord> recs;
    for (int i = 0; i < 100; ++i) recs.push_back(record("r" + std::to_string(i), neutral_vector(reg())));
    assign_splits(recs, 0.8, 42);
    const auto m = manifest_of(recs);
    EXPECT_EQ(m.count(Split::Train), 80u);
    EXPECT_EQ(m.count(Split::Test), 20u);
    auto again = recs;
    assign_splits(again, 0.8, 42);
    EXPECT_EQ(again, recs);
    auto other = recs;
    assign_splits(other, 0.8, 43);
    EXPECT_NE(other, recs);
}

TEST(Splits, ClipModeKeepsClipsTogether) {
    std::vector<DatasetRecord> recs;
    for (int c = 0; c < 10; ++c) {
        for (int i = 0; i < 7; ++i) {
            recs.push_back(record("c" + std::to_string(c) + "_" + std::to_string(i), neutral_vector(reg()),
                                  "c" + std::to_string(c)));
        }
    }
    assign_splits(recs, 0.8, 1, SplitMode::Clip);
    std::map<std::string, std::set<Split>> per_clip;
    for (const auto& r : recs) per_clip[r.clip_name].insert(r.split);
    int train_clips = 0;
    for (const auto& [clip, splits] : per_clip) {
        EXPECT_EQ(splits.size(), 1u) << clip;
        train_clips += splits.count(Split::Train);
    }
    EXPECT_EQ(train_clips, 8);
    EXPECT_THROW(assign_splits(recs, 1.2, 1), ParameterError);
}

TEST(Stats, HandFixture) {
    std::vector<DatasetRecord> recs;
    const double jp[] = {0.0, 0.25, 0.5, 0.75, 1.0};
    for (int i = 0; i < 5; ++i) {
        auto v = neutral_vector(reg());
        v[0] = jp[i];
        recs.push_back(record("r" + std::to_string(i), v));
    }
    const auto stats = channel_stats(manifest_of(recs));
    ASSERT_EQ(stats.size(), kNumControls);
    EXPECT_EQ(stats[0].abbrev, "JP");
    EXPECT_EQ(stats[0].mean, 0.5);
    EXPECT_EQ(stats[0].min, 0.0);
    EXPECT_EQ(stats[0].max, 1.0);
    EXPECT_EQ(stats[0].neutral, 1.0);
    // Squared deviations 0.25, 0.0625, 0, 0.0625, 0.25 sum to 0.625; / 5.
    EXPECT_EQ(stats[0].sd, std::sqrt(0.125));
}

TEST(Stats, MatchesStreamingOracle) {
    std::mt19937_64 rng(6);
    std::vector<DatasetRecord> recs;
    for (int i = 0; i < 3000; ++i) {
        ControlVector v;
        for (std::size_t c = 0; c < kNumControls; ++c) {
            std::uniform_real_distribution<double> d(reg()[c].range_min, reg()[c].range_max);
            v[c] = d(rng);
        }
        recs.push_back(record("r" + std::to_string(i), v));
    }
    const auto m = manifest_of(recs);
    const auto stats = channel_stats(m);
    for (std::size_t c = 0; c < kNumControls; ++c) {
        oracle::Welford w;
        for (const auto& r : recs) w.push(r.vector[c]);
        EXPECT_NEAR(stats[c].mean, w.mean, 1e-12);
        EXPECT_NEAR(stats[c].sd, std::sqrt(w.population_var()), 1e-12);
        EXPECT_LE(stats[c].min, stats[c].mean);
        EXPECT_LE(stats[c].mean, stats[c].max);
        EXPECT_GE(stats[c].min, reg()[c].range_min);
        EXPECT_LE(stats[c].max, reg()[c].range_max);
    }
    const auto again = channel_stats(m);
    EXPECT_EQ(stats_to_csv(again), stats_to_csv(stats));
}

TEST(Stats, AllNeutral) {
    std::vector<DatasetRecord> recs;
    for (int i = 0; i < 37; ++i) recs.push_back(record("r" + std::to_string(i), neutral_vector(reg())));
    const auto stats = channel_stats(manifest_of(recs));
    for (std::size_t c = 0; c < kNumControls; ++c) {
        EXPECT_EQ(stats[c].mean, reg()[c].neutral) << stats[c].abbrev;
        EXPECT_EQ(stats[c].sd, 0.0) << stats[c].abbrev;
    }
}

TEST(Stats, EmptyManifestRejected) {
    EXPECT_THROW(channel_stats(manifest_of({})), EmptyInputError);
}

TEST(Stats, CsvAndJsonShape) {
    const auto stats = channel_stats(manifest_of({record("a", neutral_vector(reg()))}));
    const auto csv = stats_to_csv(stats);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 31);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "channel,mean,sd,max,min,neutral");
    EXPECT_EQ(stats_to_json(stats).size(), kNumControls);
}

TEST(Histograms, ConservationAndPointMass) {
    std::vector<DatasetRecord> recs;
    for (int i = 0; i < 50; ++i) recs.push_back(record("r" + std::to_string(i), neutral_vector(reg())));
    const auto hs = histograms(manifest_of(recs), 10);
    ASSERT_EQ(hs.size(), kNumControls);
    for (const auto& h : hs) {
        std::uint64_t total = 0;
        int nonzero = 0;
        for (auto c : h.counts) {
            total += c;
            nonzero += c > 0;
        }
        EXPECT_EQ(total, 50u) << h.abbrev;
        EXPECT_EQ(nonzero, 1) << h.abbrev;
    }
    EXPECT_THROW(histograms(manifest_of(recs), 1), ParameterError);
}

TEST(Histograms, UniformJawPitchIsFlat) {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<DatasetRecord> recs;
    recs.reserve(100000);
    for (int i = 0; i < 100000; ++i) {
        auto v = neutral_vector(reg());
        v[0] = u(rng);
        recs.push_back(record("r" + std::to_string(i), v));
    }
    const auto hs = histograms(manifest_of(std::move(recs)), 10);
    for (auto c : hs[0].counts) {
        EXPECT_NEAR(static_cast<double>(c), 10000.0, 500.0);
    }
}

TEST(Histograms, Outputs) {
    const auto hs = histograms(manifest_of({record("a", neutral_vector(reg()))}), 4);
    const auto csv = histograms_to_csv(hs);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 30 * 4);
    const auto svg = histograms_to_svg(hs);
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    EXPECT_NE(svg.find(">GTP ["), std::string::npos);
    EXPECT_EQ(histograms_to_json(hs)[0]["counts"].size(), 4u);
}

TEST(Manifest, WriteReadRoundTrip) {
    oracle::TempDir dir("manifest");
    std::mt19937_64 rng(9);
    std::vector<DatasetRecord> recs;
    for (int i = 0; i < 20; ++i) {
        auto v = neutral_vector(reg());
        v[3] = std::uniform_real_distribution<double>(0, 1)(rng);
        auto r = record("r" + std::to_string(i), v);
        r.timestamp = i * 0.02;
        recs.push_back(r);
    }
    assign_splits(recs, 0.5, 3);
    auto m = manifest_of(recs);
    m.build_config = build_config_to_json(small_config(dir.path()), default_geometry());
    write_manifest(m, dir.path() / "manifest.jsonl");
    const auto back = read_manifest(dir.path() / "manifest.jsonl");
    EXPECT_EQ(back.records, m.records);
    EXPECT_EQ(back.registry, m.registry);
    EXPECT_EQ(back.build_config, m.build_config);
    EXPECT_EQ(back.root, dir.path());
    EXPECT_EQ(back.timestep(), 0.02);
}

TEST(Manifest, ReadErrors) {
    oracle::TempDir dir("manifest_err");
    EXPECT_THROW(read_manifest(dir.path() / "none.jsonl"), IoError);
    std::ofstream(dir.path() / "a.jsonl") << "{\"kind\":\"record\"}\n";
    EXPECT_THROW(read_manifest(dir.path() / "a.jsonl"), ParseError);
    auto m = manifest_of({record("x", neutral_vector(reg()))});
    write_manifest(m, dir.path() / "b.jsonl");
    std::ofstream(dir.path() / "b.jsonl", std::ios::app) << "{broken\n";
    try {
        read_manifest(dir.path() / "b.jsonl");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
    }
}

TEST(Config, JsonLayering) {
    BuildConfig base;
    const auto cfg = build_config_from_json({{"theta", 0.95}, {"ssim_window", "global"}, {"seed", 12}}, base);
    EXPECT_EQ(cfg.theta, 0.95);
    EXPECT_EQ(cfg.window, SsimWindow{GlobalWindow{}});
    EXPECT_EQ(cfg.seed, 12u);
    EXPECT_EQ(cfg.timestep, 0.02);
    EXPECT_EQ(cfg.split_fraction, 0.8);
    EXPECT_EQ(cfg.resolution, 512);
    EXPECT_THROW(build_config_from_json({{"theta", "high"}}), ParseError);
    BuildConfig bad;
    bad.theta = 0.0;
    EXPECT_THROW(bad.validate(), ParameterError);
    const auto doc = build_config_to_json(BuildConfig{}, default_geometry());
    EXPECT_EQ(doc["timestep"], 0.02);
    EXPECT_EQ(doc["theta"], 0.99);
    EXPECT_EQ(doc["geometry_version"], default_geometry().version);
    EXPECT_FALSE(doc.contains("output_root"));
}

TEST(Build, TwoSecondClipWithoutRemovalGives101Records) {
    oracle::TempDir dir("build101");
    auto cfg = small_config(dir.path());
    cfg.theta = 1.0;
    const AnimationClip clip("ramp", 2.0, {Track(reg().index_of("Gaze Target Phi"), {key(0.0, -2.0), key(2.0, 2.0)})});
    const auto result = build_dataset({clip}, cfg);
    EXPECT_EQ(result.summary.samples, 101u);
    ASSERT_EQ(result.manifest.records.size(), 101u);
    for (std::size_t k = 0; k < 101; ++k) {
        const auto& r = result.manifest.records[k];
        EXPECT_EQ(r.timestamp, sample_timestamp(k, 0.02));
        EXPECT_TRUE(fs::exists(dir.path() / r.image_path));
    }
    EXPECT_TRUE(fs::exists(dir.path() / "clips" / "ramp.json"));
    EXPECT_TRUE(fs::exists(dir.path() / "dedup" / "ramp.json"));
    EXPECT_TRUE(fs::exists(dir.path() / "registry.json"));
    EXPECT_TRUE(fs::exists(dir.path() / "geometry.json"));
}

TEST(Build, StaticClipCollapsesToOneRecord) {
    oracle::TempDir dir("static");
    const AnimationClip still("still", 1.0, {});
    const auto result = build_dataset({still}, small_config(dir.path()));
    EXPECT_EQ(result.manifest.records.size(), 1u);
    EXPECT_EQ(result.summary.removed_duplicates, 50u);
}

TEST(Build, DuplicateClipNamesAbort) {
    oracle::TempDir dir("dups");
    const AnimationClip a("same", 1.0, {}), b("same", 2.0, {});
    EXPECT_THROW(build_dataset({a, b}, small_config(dir.path())), StructuralError);
}

TEST(Build, DeterministicAcrossThreadCountsAndRoots) {
    oracle::TempDir d1("det1"), d2("det2");
    const auto clips = make_synthetic_clips(4, 3, reg());
    auto c1 = small_config(d1.path());
    c1.threads = 1;
    auto c2 = small_config(d2.path());
    c2.threads = 3;
    build_dataset(clips, c1);
    build_dataset({clips.rbegin(), clips.rend()}, c2);
    EXPECT_EQ(oracle::read_file(d1.path() / "manifest.jsonl"), oracle::read_file(d2.path() / "manifest.jsonl"));
    std::size_t images = 0;
    for (const auto& e : fs::recursive_directory_iterator(d1.path() / "images")) {
        if (!e.is_regular_file()) continue;
        const auto rel = fs::relative(e.path(), d1.path());
        EXPECT_EQ(oracle::read_file(e.path()), oracle::read_file(d2.path() / rel)) << rel;
        ++images;
    }
    EXPECT_GT(images, 0u);
}

TEST(Build, SplitDisjointAndCovering) {
    oracle::TempDir dir("cover");
    const auto result = build_dataset(make_synthetic_clips(3, 8, reg()), small_config(dir.path()));
    const auto& m = result.manifest;
    EXPECT_EQ(m.count(Split::Train) + m.count(Split::Test), m.records.size());
    std::set<std::string> ids;
    for (const auto& r : m.records) EXPECT_TRUE(ids.insert(r.id).second);
    const double want = 0.8 * static_cast<double>(m.records.size());
    EXPECT_LE(std::abs(static_cast<double>(m.count(Split::Train)) - want), 1.0);
}

TEST(Verify, CleanBuildHasNoViolations) {
    oracle::TempDir dir("verify");
    build_dataset(make_synthetic_clips(3, 4, reg()), small_config(dir.path()));
    const auto m = read_manifest(dir.path() / kManifestFile);
    const auto report = verify_dataset(m, 2);
    EXPECT_EQ(report.records_checked, m.records.size());
    EXPECT_EQ(report.total_violations(), 0u);
    for (const auto& msg : report.messages) ADD_FAILURE() << msg;
}

TEST(Verify, DetectsTampering) {
    oracle::TempDir dir("tamper");
    build_dataset(make_synthetic_clips(2, 4, reg()), small_config(dir.path()));
    auto m = read_manifest(dir.path() / kManifestFile);
    ASSERT_GE(m.records.size(), 3u);

    auto moved = m;
    moved.records[0].vector[0] = moved.records[0].vector[0] > 0.5 ? 0.1 : 0.9;
    EXPECT_GE(verify_dataset(moved).alignment_violations, 1u);

    auto shifted = m;
    shifted.records[1].timestamp += 0.001;
    EXPECT_GE(verify_dataset(shifted).alignment_violations, 1u);

    Frame wrong(64, 64, 7);
    write_png(dir.path() / m.records[2].image_path, wrong);
    EXPECT_GE(verify_dataset(m).image_violations, 1u);

    fs::remove(dir.path() / m.records[2].image_path);
    EXPECT_GE(verify_dataset(m).image_violations, 1u);

    auto dup = m;
    dup.records[1].id = dup.records[0].id;
    EXPECT_GE(verify_dataset(dup).structural_violations, 1u);
}
