// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Thresholds are fixed; see the README for the list.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "../gradient_oracle.hpp"
#include "../test_util.hpp"
#include "../tfidf_oracle.hpp"
#include "adfuse/pipeline.hpp"

namespace {

using namespace adfuse;
using adfuse::testing::fixture;
using adfuse::testing::max_abs_diff;
using adfuse::testing::random_vector;
using adfuse::testing::slurp;
using adfuse::testing::TempDir;
using Json = nlohmann::ordered_json;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c, d);
  return buf;
}

Outcome tensor_sketch_identity() {
  SplitMix64 rng(20240601);
  const std::size_t dims[] = {8, 16, 64};
  double worst = 0.0;
  for (int c = 0; c < 200; ++c) {
    const std::size_t n1 = 1 + rng.below(32);
    const std::size_t n2 = 1 + rng.below(32);
    const std::size_t d = dims[rng.below(3)];
    const std::uint64_t seed_x = rng.next();
    const std::uint64_t seed_y = seed_x + 1 + rng.below(1000);
    const auto px = make_sketch_params(n1, d, seed_x);
    const auto py = make_sketch_params(n2, d, seed_y);
    const auto x = random_vector(static_cast<Eigen::Index>(n1), rng);
    const auto y = random_vector(static_cast<Eigen::Index>(n2), rng);
    worst = std::max(worst, max_abs_diff(mcb_fuse(x, y, px, py, false),
                                         outer_sketch_oracle(x, y, px, py)));
  }
  return {worst < 1e-9, fmt("200 cases, max |diff| = %.3g", worst)};
}

Outcome fft_vs_naive() {
  SplitMix64 rng(77);
  double worst = 0.0;
  for (int c = 0; c < 100; ++c) {
    // Power-of-two lengths 1..64: the lengths that take the FFT route.
    const auto d = Eigen::Index{1} << rng.below(7);
    const auto a = random_vector(d, rng, 10.0);
    const auto b = random_vector(d, rng, 10.0);
    worst = std::max(worst, max_abs_diff(circular_convolve_fft(a, b), circular_convolve_naive(a, b)));
  }
  return {worst < 1e-9, fmt("100 pairs, max |diff| = %.3g", worst)};
}

Outcome unbiasedness() {
  constexpr std::size_t n = 16;
  constexpr std::size_t d = 16;
  constexpr int M = 10000;
  SplitMix64 rng(4242);
  const auto x = random_vector(n, rng);
  const auto y = random_vector(n, rng);
  const double truth = x.dot(y);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int m = 0; m < M; ++m) {
    const auto p = make_sketch_params(n, d, static_cast<std::uint64_t>(m));
    const double est = count_sketch(x, p).dot(count_sketch(y, p));
    sum += est;
    sum_sq += est * est;
  }
  const double mean = sum / M;
  const double var = (sum_sq - M * mean * mean) / (M - 1);
  const double se = std::sqrt(var / M);
  const double dev = std::abs(mean - truth);
  return {truth != 0.0 && dev < 3.0 * se,
          fmt("<x,y> = %.6f, mean = %.6f, |dev| = %.3g, 3 SE = %.3g", truth, mean, dev, 3.0 * se)};
}

Outcome gradient_check_instances() {
  SplitMix64 rng(99);
  double worst = 0.0;
  constexpr int instances = 25;
  for (int t = 0; t < instances; ++t) {
    const std::size_t classes = 2 + rng.below(6);
    const std::size_t dim = 1 + rng.below(12);
    const std::size_t batch = 1 + rng.below(16);
    std::vector<std::string> names;
    for (std::size_t c = 0; c < classes; ++c) names.push_back("c" + std::to_string(c));
    auto model = init_model<double>(dim, names, rng.next());
    // Move away from the near-uniform init so the softmax is not trivial.
    for (Eigen::Index i = 0; i < model.weights.size(); ++i) model.weights.data()[i] = rng.uniform(-1.0, 1.0);
    for (Eigen::Index i = 0; i < model.bias.size(); ++i) model.bias[i] = rng.uniform(-1.0, 1.0);
    Matrix<double> features(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(batch));
    for (Eigen::Index i = 0; i < features.size(); ++i) features.data()[i] = rng.uniform(-2.0, 2.0);
    std::vector<std::size_t> labels(batch);
    for (auto& l : labels) l = rng.below(classes);
    const double l2 = t % 2 == 0 ? 0.0 : 0.05;
    worst = std::max(worst, adfuse::testing::gradient_check(model, features, labels, l2, 1e-5));
  }
  return {worst < 1e-5, fmt("%.0f instances, max relative error = %.3g", instances, worst)};
}

Outcome tfidf_oracle() {
  const auto raw = read_transcriptions(fixture("transcriptions.jsonl"));
  std::vector<TranscriptionRecord> corpus;
  for (const auto& r : clean_corpus(raw).records) corpus.push_back(normalize_record(r));
  const auto model = fit_tfidf(corpus);
  std::size_t compared = 0;
  std::size_t mismatched = 0;
  for (const std::size_t k : {1, 3, 5}) {
    for (const auto& record : corpus) {
      ++compared;
      if (select_top_k(record, model, k) != adfuse::testing::brute_force_top_k(record, corpus, k)) {
        ++mismatched;
      }
    }
  }
  return {mismatched == 0, fmt("%.0f lists compared, %.0f mismatched", static_cast<double>(compared),
                               static_cast<double>(mismatched))};
}

Outcome synthetic_ordering() {
  SynthConfig cfg;  // 8 classes, 32/32 dims, sigma 0.1, 4000/1000, multiplicative
  const auto data = make_synthetic(cfg);
  std::vector<std::string> names;
  for (std::size_t c = 0; c < cfg.n_classes; ++c) names.push_back("class_" + std::to_string(c));

  auto accuracy = [&](const std::function<FeatureVector(const SynthSplit&, std::size_t)>& feature) {
    std::vector<FeatureVector> train_rows;
    std::vector<FeatureVector> test_rows;
    for (std::size_t i = 0; i < data.train.labels.size(); ++i) train_rows.push_back(feature(data.train, i));
    for (std::size_t i = 0; i < data.test.labels.size(); ++i) test_rows.push_back(feature(data.test, i));
    const auto train_set = LabeledSet<double>::from_rows(train_rows, data.train.labels);
    const auto test_set = LabeledSet<double>::from_rows(test_rows, data.test.labels);
    const TrainConfig tc;
    auto model = init_model<double>(static_cast<std::size_t>(train_rows.front().size()), names, tc.seed);
    return evaluate(train(std::move(model), train_set, tc).model, test_set).accuracy;
  };

  FusionSpec mcb_spec;
  mcb_spec.sketch_dim = 256;
  const Fuser mcb(mcb_spec, cfg.dim_a, cfg.dim_b);
  const Fuser concat(FusionSpec{FusionScheme::concat}, cfg.dim_a, cfg.dim_b);

  const double acc_a = accuracy([](const SynthSplit& s, std::size_t i) { return s.modality_a[i]; });
  const double acc_b = accuracy([](const SynthSplit& s, std::size_t i) { return s.modality_b[i]; });
  const double acc_concat = accuracy(
      [&](const SynthSplit& s, std::size_t i) { return concat(s.modality_a[i], s.modality_b[i]); });
  const double acc_mcb = accuracy(
      [&](const SynthSplit& s, std::size_t i) { return mcb(s.modality_a[i], s.modality_b[i]); });

  const double chance = 1.0 / static_cast<double>(cfg.n_classes);
  const double best_single = std::max(acc_a, acc_b);
  const bool pass = acc_mcb > acc_concat && acc_concat > best_single &&
                    std::abs(acc_a - chance) <= 0.10 && std::abs(acc_b - chance) <= 0.10 &&
                    acc_mcb >= 0.60;
  return {pass, fmt("MCB %.3f, concat %.3f, A %.3f, B %.3f", acc_mcb, acc_concat, acc_a, acc_b)};
}

Outcome determinism() {
  TempDir dir;
  std::ostringstream human;
  std::size_t runs = 0;
  std::vector<std::string> failures;

  // Each run is replayed from its manifest; the replay must rewrite the same
  // bytes and report the same metrics.
  auto check = [&](const std::string& command, const Json& config,
                   const std::vector<std::string>& outputs) {
    const auto first = run_command(command, config, human);
    std::vector<std::string> bytes;
    for (const auto& f : outputs) bytes.push_back(slurp(dir / f));
    const auto second = replay(first, human);
    ++runs;
    if (second["metrics"] != first["metrics"] || second["config"] != first["config"]) {
      failures.push_back(command + " metrics");
    }
    for (std::size_t i = 0; i < outputs.size(); ++i) {
      if (bytes[i].empty() || slurp(dir / outputs[i]) != bytes[i]) {
        failures.push_back(command + " " + outputs[i]);
      }
    }
  };

  check("synth", {{"n_train", 400}, {"n_test", 100}, {"seed", 3}, {"out", dir.path().string()}},
        {"modality_a.txt", "modality_b.txt", "manifest.tsv"});
  check("featurize-text",
        {{"transcriptions", fixture("transcriptions.jsonl").string()},
         {"embeddings", fixture("embeddings.txt").string()},
         {"manifest", fixture("manifest.tsv").string()},
         {"cleaning_report", (dir / "cleaning.json").string()},
         {"out", (dir / "text.txt").string()}},
        {"text.txt", "cleaning.json"});
  check("fuse",
        {{"features_a", (dir / "modality_a.txt").string()},
         {"features_b", (dir / "modality_b.txt").string()},
         {"sketch_dim", 256},
         {"seed", 11},
         {"out", (dir / "fused.txt").string()}},
        {"fused.txt"});
  check("train-eval",
        {{"features", (dir / "fused.txt").string()},
         {"manifest", (dir / "manifest.tsv").string()},
         {"epochs", 5},
         {"seed", 5},
         {"model_out", (dir / "model.txt").string()}},
        {"model.txt"});
  check("train-eval",
        {{"manifest", fixture("manifest.tsv").string()},
         {"image_features", fixture("image_features.txt").string()},
         {"transcriptions", fixture("transcriptions.jsonl").string()},
         {"embeddings", fixture("embeddings.txt").string()},
         {"sketch_dim", 16},
         {"epochs", 5}},
        {});
  check("vqa",
        {{"questions", fixture("vqa.jsonl").string()},
         {"embeddings", fixture("embeddings.txt").string()},
         {"image_features", fixture("image_features.txt").string()},
         {"text_features", (dir / "text.txt").string()},
         {"epochs", 5}},
        {});

  std::string detail = std::to_string(runs) + " manifests replayed";
  for (const auto& f : failures) detail += "; differs: " + f;
  return {failures.empty(), detail};
}

Outcome format_round_trip() {
  std::vector<std::string> failures;
  std::size_t checked = 0;
  auto expect = [&](bool equal, const std::string& what) {
    ++checked;
    if (!equal) failures.push_back(what);
  };

  const auto embeddings = read_embeddings(fixture("embeddings.txt"));
  {
    std::stringstream ss;
    write_embeddings(ss, embeddings);
    expect(read_embeddings(ss) == embeddings, "embeddings");
  }
  const auto transcriptions = read_transcriptions(fixture("transcriptions.jsonl"));
  {
    std::stringstream ss;
    write_transcriptions(ss, transcriptions);
    expect(read_transcriptions(ss) == transcriptions, "transcriptions");
  }
  const auto image = read_features(fixture("image_features.txt"));
  {
    std::stringstream ss;
    write_features(ss, image);
    expect(read_features(ss) == image, "features");
  }
  const auto text = featurize_text(transcriptions, embeddings, {}).features;
  FeatureTable image_subset(image.dim());
  for (const auto& id : text.ids()) image_subset.add(id, image.at(id));
  const auto fused = fuse_tables(image_subset, text, FusionSpec{FusionScheme::mcb, 64, 1, 2, true});
  for (const auto* table : {&text, &fused}) {
    std::stringstream ss;
    write_features(ss, *table);
    expect(read_features(ss) == *table, "derived features");
  }
  const auto manifest = load_manifest(fixture("manifest.tsv"));
  {
    std::stringstream ss;
    write_manifest(ss, manifest);
    expect(read_manifest(ss) == manifest, "manifest");
  }
  const auto vqa = load_vqa(fixture("vqa.jsonl"));
  {
    std::stringstream ss;
    write_vqa(ss, vqa);
    expect(read_vqa(ss) == vqa, "vqa");
  }
  {
    TrainConfig cfg;
    cfg.epochs = 5;
    const auto model = train_eval(image, manifest, cfg, 0).model;
    std::stringstream ss;
    write_model(ss, model);
    expect(read_model(ss) == model, "model");
  }

  std::string detail = std::to_string(checked) + " round trips";
  for (const auto& f : failures) detail += "; differs: " + f;
  return {failures.empty(), detail};
}

struct Criterion {
  const char* name;
  Outcome (*run)();
  double time_limit_s;  // <= 0: untimed
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {"tensor-sketch identity", tensor_sketch_identity, 5.0},
      {"fft vs naive convolution", fft_vs_naive, 0.0},
      {"sketch unbiasedness", unbiasedness, 10.0},
      {"gradient check", gradient_check_instances, 0.0},
      {"tf-idf oracle", tfidf_oracle, 0.0},
      {"synthetic multiplicative ordering", synthetic_ordering, 60.0},
      {"determinism", determinism, 0.0},
      {"format round-trip", format_round_trip, 0.0},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool pass = outcome.pass;
    std::string timing = fmt("%.2f s", secs);
    if (c.time_limit_s > 0) {
      timing += fmt(" (limit %.0f s)", c.time_limit_s);
      pass = pass && secs < c.time_limit_s;
    }
    std::printf("%s  %-34s %s [%s]\n", pass ? "PASS" : "FAIL", c.name, outcome.detail.c_str(),
                timing.c_str());
    failed += pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed,
              std::size(criteria));
  return failed == 0 ? 0 : 1;
}
