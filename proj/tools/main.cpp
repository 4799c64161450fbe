/* Copyright 2026 The iterdraw Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <torch/torch.h>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "iterdraw/codraw.hpp"
#include "iterdraw/dataset_io.hpp"
#include "iterdraw/detector.hpp"
#include "iterdraw/evaluate.hpp"
#include "iterdraw/iclevr.hpp"
#include "iterdraw/image_io.hpp"
#include "iterdraw/metrics.hpp"
#include "iterdraw/service.hpp"
#include "iterdraw/session.hpp"
#include "iterdraw/tokenize.hpp"
#include "iterdraw/trainer.hpp"

namespace fs = std::filesystem;
using namespace iterdraw;

namespace {

std::vector<SceneSequence> split_of(const Dataset& dataset, const std::string& split, std::size_t limit) {
  std::vector<SceneSequence> out;
  for (const auto& sequence : dataset.sequences) {
    if (split == "all" || sequence.split == split) out.push_back(sequence);
    if (limit > 0 && out.size() >= limit) break;
  }
  if (out.empty()) throw std::runtime_error("no sequences in split '" + split + "'");
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

HttpServer* g_server = nullptr;

void handle_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iterative text-conditioned image generation"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "intra-op threads (0 keeps the default)");

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "render a synthetic iterative CLEVR-style dataset");
  fs::path gen_out;
  iclevr::GenConfig gen_config;
  gen->add_option("--out", gen_out, "output dataset directory")->required();
  gen->add_option("--seed", gen_config.seed, "random seed");
  gen->add_option("--scale", gen_config.scale, "fraction of the 6000/2000/2000 split sizes");
  gen->add_option("--canvas", gen_config.canvas_side, "canvas side in pixels");
  gen->add_option("--min-dist", gen_config.min_distance, "minimum centroid distance in pixels");

  // ingest-codraw
  auto* ingest = app.add_subcommand("ingest-codraw", "convert a clip-art dialogue dump into the dataset layout");
  codraw::IngestOptions ingest_options;
  fs::path ingest_out;
  ingest->add_option("--raw", ingest_options.raw_json, "dialogue JSON")->required()->check(CLI::ExistingFile);
  ingest->add_option("--images", ingest_options.images_dir, "per-turn image directory")->required();
  ingest->add_option("--out", ingest_out, "output dataset directory")->required();
  ingest->add_option("--side", ingest_options.image_side, "image side after resizing");

  // train
  auto* train_cmd = app.add_subcommand("train", "train the drawer");
  fs::path train_data, train_config_path, train_out;
  std::string ablation = "d-subtract";
  std::string train_split = "train";
  std::size_t train_limit = 0;
  double ca_kl = -1;
  train_cmd->add_option("--data", train_data, "dataset directory")->required();
  train_cmd->add_option("--config", train_config_path, "key = value config file")->check(CLI::ExistingFile);
  train_cmd->add_option("--ablation", ablation, "configuration name")
      ->check(CLI::IsMember(AblationConfig::names()));
  train_cmd->add_option("--out", train_out, "output directory")->required();
  train_cmd->add_option("--split", train_split, "dataset split");
  train_cmd->add_option("--max-sequences", train_limit, "use at most this many sequences");
  train_cmd->add_option("--ca-kl", ca_kl, "KL weight on the conditioning augmentation");

  // train-detector
  auto* det_cmd = app.add_subcommand("train-detector", "train the object detector on ground-truth renders");
  fs::path det_data, det_out;
  DetectorConfig det_config;
  std::size_t det_limit = 0;
  det_cmd->add_option("--data", det_data, "dataset directory")->required();
  det_cmd->add_option("--out", det_out, "detector file")->required();
  det_cmd->add_option("--epochs", det_config.epochs, "training epochs");
  det_cmd->add_option("--seed", det_config.seed, "random seed");
  det_cmd->add_option("--width", det_config.width, "first-layer channels");
  det_cmd->add_option("--lr", det_config.learning_rate, "learning rate");
  det_cmd->add_option("--max-sequences", det_limit, "use at most this many training sequences");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "score a checkpoint with a detector");
  fs::path eval_checkpoint, eval_data, eval_detector, eval_out = "report.json";
  std::string eval_split = "test";
  std::uint64_t eval_seed = 0;
  std::size_t eval_limit = 0;
  eval_cmd->add_option("--checkpoint", eval_checkpoint, "model checkpoint")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--data", eval_data, "dataset directory")->required();
  eval_cmd->add_option("--detector", eval_detector, "detector file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", eval_out, "report path");
  eval_cmd->add_option("--split", eval_split, "dataset split");
  eval_cmd->add_option("--seed", eval_seed, "noise seed");
  eval_cmd->add_option("--max-sequences", eval_limit, "use at most this many sequences");

  // sample
  auto* sample_cmd = app.add_subcommand("sample", "draw images for a list of instructions");
  fs::path sample_checkpoint, sample_out, sample_initial;
  std::vector<std::string> sample_instructions;
  std::uint64_t sample_seed = 0;
  sample_cmd->add_option("--checkpoint", sample_checkpoint, "model checkpoint")->required()->check(CLI::ExistingFile);
  sample_cmd->add_option("--instruction,-i", sample_instructions, "one instruction per turn")->required();
  sample_cmd->add_option("--out", sample_out, "output directory")->required();
  sample_cmd->add_option("--initial", sample_initial, "initial canvas PNG")->check(CLI::ExistingFile);
  sample_cmd->add_option("--seed", sample_seed, "noise seed");

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "run the interactive session service");
  std::vector<fs::path> serve_checkpoints;
  std::string serve_host = "127.0.0.1";
  int serve_port = 8080;
  fs::path serve_snapshot;
  serve_cmd->add_option("--checkpoint", serve_checkpoints, "model checkpoint (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  serve_cmd->add_option("--port", serve_port, "TCP port");
  serve_cmd->add_option("--host", serve_host, "bind address");
  serve_cmd->add_option("--snapshot", serve_snapshot, "session snapshot restored at start and written at exit");

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) torch::set_num_threads(threads);

  try {
    if (*gen) {
      const auto summary = iclevr::generate_dataset(gen_config, gen_out);
      std::cout << "wrote " << summary.num_sequences << " sequences, " << summary.num_turn_images
                << " turn images to " << gen_out << "\n";
    } else if (*ingest) {
      const auto result = codraw::ingest(ingest_options);
      for (const auto& warning : result.warnings) std::cerr << "warning: " << warning << "\n";
      const auto summary = write_dataset(result.dataset, ingest_out);
      std::cout << "wrote " << summary.num_sequences << " sequences (" << result.skipped_scenes << " skipped) to "
                << ingest_out << "\n";
    } else if (*train_cmd) {
      auto config = train_config_path.empty() ? TrainConfig{} : TrainConfig::from_file(train_config_path);
      if (ca_kl >= 0) config.ca_kl_weight = ca_kl;
      config.validate();
      const auto dataset = read_dataset(train_data);
      const auto sequences = split_of(dataset, train_split, train_limit);
      const auto vocabulary = config.embeddings_path.empty()
                                  ? EmbeddingTable::random_for_vocabulary(dataset_vocabulary(dataset.sequences),
                                                                          EmbeddingTable::kDefaultDim, config.seed)
                                  : load_embeddings(config.embeddings_path);
      const auto num_classes = static_cast<std::int64_t>(dataset.catalog.entries.size());
      const auto dims = config.model_preset == "desk" ? ModelDims::desk(num_classes) : [&] {
        ModelDims full;
        full.num_classes = num_classes;
        return full;
      }();
      DrawerModel model(dims, AblationConfig::named(ablation), vocabulary, sequences.front().background, config.seed);
      TrainRunOptions options;
      options.out_dir = train_out;
      options.on_step = [](std::int64_t step, const StepMetrics& m) {
        if (step % 50 == 0) {
          std::cerr << "step " << step << " d_loss " << m.d_loss << " g_loss " << m.g_loss << " gp "
                    << m.gradient_penalty << "\n";
        }
      };
      train(model, sequences, config, options);
      std::cout << "checkpoint written to " << (train_out / "checkpoint.pt") << "\n";
    } else if (*det_cmd) {
      const auto dataset = read_dataset(det_data);
      const auto train_sequences = split_of(dataset, "train", det_limit);
      det_config.on_epoch = [](int epoch, double loss) {
        std::cerr << "epoch " << epoch << " loss " << loss << "\n";
      };
      const auto num_classes = static_cast<int>(dataset.catalog.entries.size());
      auto detector = train_detector(detector_examples(train_sequences), num_classes, det_config);
      detector->save(det_out);
      std::vector<SceneSequence> held_out;
      for (const auto& sequence : dataset.sequences) {
        if (sequence.split == "valid") held_out.push_back(sequence);
      }
      if (!held_out.empty()) {
        const auto score = score_detector([&](const ImageGrid& image) { return detector->detect(image); },
                                          detector_examples(held_out, false));
        std::cout << "held-out f1 " << score.f1 << " nrmse " << score.nrmse.value_or(-1.0) << " over "
                  << score.num_images << " images\n";
      }
      std::cout << "detector written to " << det_out << "\n";
    } else if (*eval_cmd) {
      auto model = load_checkpoint(eval_checkpoint);
      auto detector = Detector::load(eval_detector);
      const auto dataset = read_dataset(eval_data);
      const auto report = evaluate_model(*model, split_of(dataset, eval_split, eval_limit), *detector, eval_seed);
      write_text(eval_out, report.to_json());
      std::cout << "precision " << report.precision << " recall " << report.recall << " f1 " << report.f1
                << " rel_sim " << report.rel_sim << "\n";
    } else if (*sample_cmd) {
      auto model = load_checkpoint(sample_checkpoint);
      model->train(false);
      const auto initial = sample_initial.empty() ? model->background() : read_png(sample_initial);
      const auto state = replay_session(*model, initial, sample_seed, sample_instructions);
      fs::create_directories(sample_out);
      int turn = 0;
      for (const auto& entry : state.history) {
        const auto path = sample_out / ("turn" + std::to_string(++turn) + ".png");
        write_png(entry.image, path);
        std::cout << path.string() << "\t" << entry.instruction << "\n";
      }
    } else if (*serve_cmd) {
      SessionManager sessions;
      for (const auto& path : serve_checkpoints) {
        sessions.add_checkpoint(path.filename().string(), std::shared_ptr<DrawerModel>(load_checkpoint(path)));
      }
      if (!serve_snapshot.empty() && fs::exists(serve_snapshot)) {
        std::ifstream in(serve_snapshot);
        std::stringstream buffer;
        buffer << in.rdbuf();
        sessions.restore_json(buffer.str());
      }
      SessionService service(sessions);
      HttpServer server(service);
      g_server = &server;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      std::cerr << "serving on " << serve_host << ":" << serve_port << "\n";
      server.listen(serve_host, serve_port);
      g_server = nullptr;
      if (!serve_snapshot.empty()) write_text(serve_snapshot, sessions.snapshot_json());
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
