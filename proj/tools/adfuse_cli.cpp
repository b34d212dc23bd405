// adfuse: scene-text + image feature fusion and classification harness.

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "adfuse/io_util.hpp"
#include "adfuse/pipeline.hpp"

namespace {

using Json = nlohmann::ordered_json;

/// Collects the options a subcommand was given into a JSON config; options
/// left unset are omitted so the pipeline applies (and records) its defaults.
class ConfigBuilder {
public:
  explicit ConfigBuilder(CLI::App* app) : app_(app) {}

  template <typename T>
  void option(const std::string& flag, const std::string& key, const std::string& help,
              bool required = false) {
    auto value = std::make_shared<T>();
    auto* opt = app_->add_option(flag, *value, help);
    if (required) opt->required();
    setters_.push_back([opt, value, key](Json& cfg) {
      if (opt->count() > 0) cfg[key] = *value;
    });
  }

  void flag(const std::string& flag, const std::string& key, const std::string& help) {
    auto value = std::make_shared<bool>(false);
    auto* opt = app_->add_flag(flag, *value, help);
    setters_.push_back([opt, value, key](Json& cfg) {
      if (opt->count() > 0) cfg[key] = *value;
    });
  }

  Json build() const {
    Json cfg = Json::object();
    for (const auto& set : setters_) set(cfg);
    return cfg;
  }

private:
  CLI::App* app_;
  std::vector<std::function<void(Json&)>> setters_;
};

void add_training(ConfigBuilder& b) {
  b.option<double>("--lr", "learning_rate", "SGD learning rate (default 0.1)");
  b.option<std::size_t>("--epochs", "epochs", "training epochs (default 50)");
  b.option<std::size_t>("--batch", "batch_size", "mini-batch size (default 64)");
  b.option<double>("--l2", "l2", "L2 weight penalty (default 0)");
}

void add_fusion(ConfigBuilder& b, const std::string& default_scheme) {
  b.option<std::string>("--scheme", "scheme",
                        "fusion scheme: concat, average or mcb (default " + default_scheme + ")");
  b.option<std::size_t>("-d,--sketch-dim", "sketch_dim", "MCB sketch dimension (default 1024)");
  b.option<std::uint64_t>("--seed-a", "seed_a", "MCB sketch seed, first input (default 2*seed+1)");
  b.option<std::uint64_t>("--seed-b", "seed_b", "MCB sketch seed, second input (default 2*seed+2)");
  b.option<bool>("--normalize", "normalize",
                 "signed sqrt + L2 normalization after MCB (default true)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scene-text and image feature fusion for ad classification and VQA"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(adfuse::kToolVersion));

  std::uint64_t seed = 0;
  std::string out;
  std::string report_json;
  auto* seed_opt = app.add_option("--seed", seed, "global seed (default 0)");
  auto* out_opt = app.add_option("--out", out, "output file, or directory for synth");
  app.add_option("--report-json", report_json, "write the run manifest (config + metrics) here");

  struct Sub {
    CLI::App* app;
    ConfigBuilder config;
  };
  std::vector<Sub> subs;

  {
    auto* sub = app.add_subcommand("featurize-text", "tf-idf top-k + embedding-sum text features");
    ConfigBuilder b(sub);
    b.option<std::string>("--transcriptions", "transcriptions", "OCR transcriptions (JSON lines)", true);
    b.option<std::string>("--embeddings", "embeddings", "embedding table (text)", true);
    b.option<std::string>("--manifest", "manifest", "emit one row per manifest id");
    b.option<std::size_t>("-k,--k", "k", "words kept per image (default 5)");
    b.option<double>("--threshold", "threshold", "OCR confidence threshold (default 0.70)");
    b.flag("--drop-empty", "drop_empty", "drop images left without words after cleaning");
    b.option<std::string>("--cleaning-report", "cleaning_report", "write the cleaning report JSON");
    subs.push_back({sub, std::move(b)});
  }
  {
    auto* sub = app.add_subcommand("fuse", "fuse two aligned feature files");
    ConfigBuilder b(sub);
    b.option<std::string>("--a", "features_a", "first feature file (e.g. image)", true);
    b.option<std::string>("--b", "features_b", "second feature file (e.g. text)", true);
    add_fusion(b, "mcb");
    subs.push_back({sub, std::move(b)});
  }
  {
    auto* sub = app.add_subcommand(
        "train-eval",
        "train a softmax classifier on one feature file, or run the image/text/fusion grid");
    ConfigBuilder b(sub);
    b.option<std::string>("--manifest", "manifest", "manifest TSV (image_id, label, split)", true);
    b.option<std::string>("--features", "features", "single feature file mode");
    b.option<std::string>("--model-out", "model_out", "write the trained model (single mode)");
    b.option<std::string>("--image-features", "image_features", "grid mode: image features");
    b.option<std::string>("--transcriptions", "transcriptions", "grid mode: OCR transcriptions");
    b.option<std::string>("--embeddings", "embeddings", "grid mode: embedding table");
    b.option<std::vector<std::size_t>>("--ks", "ks", "grid mode: k values (default 5 35 100)");
    b.option<std::vector<std::string>>("--schemes", "schemes", "grid mode: fusion schemes (default concat mcb)");
    b.option<double>("--threshold", "threshold", "grid mode: OCR confidence threshold (default 0.70)");
    b.option<bool>("--drop-empty", "drop_empty", "grid mode: drop images without legible text (default true)");
    add_fusion(b, "mcb");
    add_training(b);
    subs.push_back({sub, std::move(b)});
  }
  {
    auto* sub = app.add_subcommand("vqa", "answer classification from question, image and text features");
    ConfigBuilder b(sub);
    b.option<std::string>("--questions", "questions", "VQA records (JSON lines)", true);
    b.option<std::string>("--embeddings", "embeddings", "embedding table for questions", true);
    b.option<std::string>("--image-features", "image_features", "image feature file");
    b.option<std::string>("--text-features", "text_features", "text feature file");
    b.option<std::vector<std::string>>(
        "--configs", "configs",
        "question, question_image, question_image_text (default all three)");
    b.option<std::size_t>("--answers", "answer_vocab", "answer vocabulary size (default 1000)");
    b.option<double>("--test-fraction", "test_fraction",
                     "test share for records without a split (default 0.2)");
    add_fusion(b, "concat");
    add_training(b);
    subs.push_back({sub, std::move(b)});
  }
  {
    auto* sub = app.add_subcommand("synth", "write a synthetic two-modality dataset");
    ConfigBuilder b(sub);
    b.option<std::size_t>("--n-train", "n_train", "training examples (default 4000)");
    b.option<std::size_t>("--n-test", "n_test", "test examples (default 1000)");
    b.option<std::size_t>("--dim-a", "dim_a", "modality A dim (default 32)");
    b.option<std::size_t>("--dim-b", "dim_b", "modality B dim (default 32)");
    b.option<std::size_t>("--classes", "n_classes", "number of classes (default 8)");
    b.option<std::string>("--interaction", "interaction", "additive or multiplicative (default multiplicative)");
    b.option<double>("--sigma", "noise_sigma", "noise standard deviation (default 0.1)");
    subs.push_back({sub, std::move(b)});
  }
  {
    auto* sub = app.add_subcommand("formats-check", "parse files and verify they round-trip");
    ConfigBuilder b(sub);
    b.option<std::string>("--embeddings", "embeddings", "embedding table");
    b.option<std::string>("--transcriptions", "transcriptions", "transcriptions (JSON lines)");
    b.option<std::string>("--features", "features", "feature file");
    b.option<std::string>("--manifest", "manifest", "manifest TSV");
    b.option<std::string>("--vqa", "vqa", "VQA records (JSON lines)");
    b.option<std::string>("--model", "model", "classifier model");
    subs.push_back({sub, std::move(b)});
  }
  auto* replay_cmd = app.add_subcommand("replay", "re-run a saved run manifest");
  std::string replay_path;
  replay_cmd->add_option("manifest", replay_path, "run manifest JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    Json manifest;
    if (replay_cmd->parsed()) {
      auto in = adfuse::open_input(replay_path);
      manifest = adfuse::replay(Json::parse(in), std::cout);
    } else {
      for (const auto& sub : subs) {
        if (!sub.app->parsed()) continue;
        Json cfg = sub.config.build();
        if (seed_opt->count() > 0) cfg["seed"] = seed;
        if (out_opt->count() > 0) cfg["out"] = out;
        manifest = adfuse::run_command(sub.app->get_name(), cfg, std::cout);
      }
    }
    if (!report_json.empty()) {
      auto file = adfuse::open_output(report_json);
      file << manifest.dump(2) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
