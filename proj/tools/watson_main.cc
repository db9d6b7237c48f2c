// Copyright 2026 The Watson Perceptual Loss Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: compare, train-2afc, eval-2afc, gradcheck,
// make-synthetic and bench.

#include <sys/resource.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "watson/errors.h"
#include "watson/grad.h"
#include "watson/gradcheck.h"
#include "watson/loss.h"
#include "watson/metric.h"
#include "watson/params.h"
#include "watson/png_io.h"
#include "watson/transforms.h"
#include "watson/twoafc.h"

namespace watson {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

// Metric selection shared by every subcommand.
struct MetricOptions {
  std::string name = "watson-dft";
  std::string channels;  // empty: follow the input images
  std::string params;    // optional Watson parameter file
};

void AddMetricOptions(CLI::App* cmd, MetricOptions& opt) {
  cmd->add_option("--metric", opt.name,
                  "watson-dct, watson-dft, ssim, l1 or l2")
      ->capture_default_str();
  cmd->add_option("--channels", opt.channels,
                  "grey or color (Watson only; default follows the images)");
  cmd->add_option("--params", opt.params,
                  "Watson parameter JSON; relative names are also looked up "
                  "in $WATSON_PARAMS_DIR");
}

fs::path ResolveParamsPath(const std::string& name) {
  if (fs::exists(name)) return name;
  std::string searched = name;
  if (const char* dir = std::getenv("WATSON_PARAMS_DIR");
      dir && *dir && fs::path(name).is_relative()) {
    for (const fs::path& candidate :
         {fs::path(dir) / name, fs::path(dir) / (name + ".json")}) {
      if (fs::exists(candidate)) return candidate;
      searched += ", " + candidate.string();
    }
  }
  throw InputError("parameter file not found (searched " + searched + ")");
}

WatsonChannels ParseChannels(const std::string& s) {
  if (s == "grey" || s == "gray") return WatsonChannels::kGrey;
  if (s == "color" || s == "colour" || s == "ycbcr") return WatsonChannels::kYCbCr;
  throw InputError("unknown channels '" + s + "' (grey or color)");
}

Metric BuildMetric(const MetricOptions& opt, bool colour_inputs) {
  if (opt.name == "ssim" || opt.name == "l1" || opt.name == "l2") {
    if (!opt.params.empty()) {
      throw InputError("--params only applies to Watson metrics");
    }
    if (opt.name == "ssim") return Metric::Ssim();
    return Metric::Lp(opt.name == "l1" ? 1.0 : 2.0);
  }
  WatsonVariant variant;
  if (opt.name == "watson-dct") {
    variant = WatsonVariant::kDct;
  } else if (opt.name == "watson-dft") {
    variant = WatsonVariant::kDft;
  } else {
    throw InputError("unknown metric '" + opt.name +
                     "' (watson-dct, watson-dft, ssim, l1, l2)");
  }
  if (!opt.params.empty()) {
    WatsonParams params = LoadParams(ResolveParamsPath(opt.params));
    if (params.variant != variant) {
      throw InputError("parameter file is for " + VariantName(params.variant) +
                       " but --metric is " + opt.name);
    }
    if (!opt.channels.empty() && ParseChannels(opt.channels) != params.channels) {
      throw InputError("parameter file channels are " +
                       ChannelsName(params.channels) + ", not " + opt.channels);
    }
    return Metric::Watson(std::move(params));
  }
  const WatsonChannels channels =
      opt.channels.empty()
          ? (colour_inputs ? WatsonChannels::kYCbCr : WatsonChannels::kGrey)
          : ParseChannels(opt.channels);
  return Metric::Watson(DefaultWatsonParams(variant, channels));
}

// Usage checks that need no input files, so they win over data errors.
void CheckMetricOptions(const MetricOptions& opt) {
  static const char* kNames[] = {"watson-dct", "watson-dft", "ssim", "l1", "l2"};
  if (std::find(std::begin(kNames), std::end(kNames), opt.name) ==
      std::end(kNames)) {
    throw InputError("unknown metric '" + opt.name +
                     "' (watson-dct, watson-dft, ssim, l1, l2)");
  }
  if (!opt.channels.empty()) ParseChannels(opt.channels);
  if (!opt.params.empty()) ResolveParamsPath(opt.params);
}

bool IsColour(const Image& img) { return img.space() != ColorSpace::kGrey; }

void WriteText(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw DataError("cannot write " + path.string());
}

std::string Fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

json EvalToJson(const EvalReport& r, const Metric& m) {
  json groups = json::array();
  for (const auto& g : r.groups) {
    groups.push_back({{"group", g.group},
                      {"records", g.records},
                      {"agreement", g.agreement},
                      {"human_ceiling", g.human_ceiling}});
  }
  return {{"metric", m.Name()},
          {"records", r.records},
          {"agreement", r.agreement},
          {"human_ceiling", r.human_ceiling},
          {"groups", groups}};
}

std::vector<TwoAfcRecord> LoadRecords(const std::string& path, bool skip) {
  std::vector<std::string> warnings;
  auto records = LoadDataset(path, {.skip_invalid = skip}, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: skipped " << w << "\n";
  if (records.empty()) throw DataError("no usable records in " + path);
  return records;
}

// ---------------------------------------------------------------------------

struct CompareArgs {
  MetricOptions metric;
  std::string a, b;
  std::vector<int> offset;
  std::optional<uint64_t> seed;
  bool json = false;
};

int RunCompare(const CompareArgs& args) {
  CheckMetricOptions(args.metric);
  const Image x = ReadPng(args.a);
  const Image x2 = ReadPng(args.b);
  if (!SameShape(x, x2)) {
    throw DataError("image shapes differ: " + args.a + " is " + x.ShapeString() +
                    ", " + args.b + " is " + x2.ShapeString());
  }
  const Metric metric = BuildMetric(args.metric, IsColour(x));
  BlockGrid grid;
  if (!args.offset.empty()) {
    grid.dy = args.offset[0];
    grid.dx = args.offset[1];
  } else if (args.seed) {
    std::mt19937_64 rng(*args.seed);
    std::tie(grid.dy, grid.dx) = SampleGridOffset(rng);
  }
  grid.Validate();
  const double value = Distance(metric, x, x2, grid);
  if (!args.json) {
    std::cout << Fmt(value) << "\n";
    return 0;
  }
  json out = {{"metric", metric.Name()},
              {"value", value},
              {"offset", {grid.dy, grid.dx}}};
  if (metric.is_watson()) {
    const WatsonResult r = WatsonDistance(x, x2, metric.watson, grid);
    static const char* kNames[][3] = {{"Y", "", ""}, {"Y", "Cb", "Cr"}};
    const bool colour = metric.watson.channels == WatsonChannels::kYCbCr;
    json channels = json::array();
    for (size_t c = 0; c < r.channel_values.size(); ++c) {
      json ch = {{"channel", kNames[colour][c]},
                 {"value", r.channel_values[c]},
                 {"lambda", metric.watson.lambda[c]}};
      if (!r.amplitude_terms.empty()) {
        ch["amplitude"] = r.amplitude_terms[c];
        ch["phase"] = r.phase_terms[c];
      }
      channels.push_back(ch);
    }
    out["channels"] = channels;
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  MetricOptions metric;
  std::string train, test, out, report, optimizer = "adam";
  TrainerConfig config;
  bool no_grid = false;
  bool skip_invalid = false;
  bool json = false;
};

int RunTrain(TrainArgs args) {
  const auto started = std::chrono::steady_clock::now();
  if (args.optimizer == "adam") {
    args.config.optimizer = Optimizer::kAdam;
  } else if (args.optimizer == "sgd") {
    args.config.optimizer = Optimizer::kSgd;
  } else {
    throw InputError("unknown optimizer '" + args.optimizer + "' (adam or sgd)");
  }
  CheckMetricOptions(args.metric);
  args.config.grid_randomization = !args.no_grid;
  args.config.Validate();
  const auto train = LoadRecords(args.train, args.skip_invalid);
  const Metric initial = BuildMetric(args.metric, IsColour(train[0].reference));
  if (!initial.is_watson()) {
    throw InputError("train-2afc fits Watson parameters; use watson-dct or "
                     "watson-dft");
  }
  const TrainResult result = TrainMetric(
      initial, RankingHead{initial.watson.gamma}, train, args.config);
  SaveParams(args.out, result.metric.watson);

  const auto& c = args.config;
  json report = {
      {"config",
       {{"metric", initial.Name()},
        {"train", args.train},
        {"test", args.test},
        {"learning_rate", c.learning_rate},
        {"epochs", c.epochs},
        {"batch_size", c.batch_size},
        {"seed", c.seed},
        {"optimizer", args.optimizer},
        {"beta1", c.beta1},
        {"beta2", c.beta2},
        {"adam_epsilon", c.adam_epsilon},
        {"grid_randomization", c.grid_randomization},
        {"freeze_metric", c.freeze_metric},
        {"threads", c.threads}}},
      {"params_file", args.out},
      {"train_records", train.size()},
      {"initial_loss", result.initial_loss},
      {"final_loss", result.final_loss},
      {"loss_curve", result.loss_curve},
      {"gamma", result.head.gamma}};
  if (!args.test.empty()) {
    const auto test = LoadRecords(args.test, args.skip_invalid);
    report["initial_evaluation"] =
        EvalToJson(EvaluateMetric(initial, test, c.threads), initial);
    report["evaluation"] =
        EvalToJson(EvaluateMetric(result.metric, test, c.threads), result.metric);
  } else {
    report["evaluation"] = EvalToJson(
        EvaluateMetric(result.metric, train, c.threads), result.metric);
  }
  report["elapsed_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  const std::string text = report.dump(2) + "\n";
  if (!args.report.empty()) WriteText(args.report, text);
  if (args.json) {
    std::cout << text;
  } else {
    std::cout << "initial_loss " << Fmt(result.initial_loss) << "\n"
              << "final_loss " << Fmt(result.final_loss) << "\n"
              << "agreement " << Fmt(report["evaluation"]["agreement"]) << "\n"
              << "params " << args.out << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  MetricOptions metric;
  std::string data;
  int threads = 1;
  bool skip_invalid = false;
  bool json = false;
};

int RunEval(const EvalArgs& args) {
  CheckMetricOptions(args.metric);
  const auto records = LoadRecords(args.data, args.skip_invalid);
  const Metric metric = BuildMetric(args.metric, IsColour(records[0].reference));
  if (args.threads <= 0) throw InputError("--threads must be positive");
  const EvalReport r = EvaluateMetric(metric, records, args.threads);
  if (args.json) {
    std::cout << EvalToJson(r, metric).dump(2) << "\n";
    return 0;
  }
  std::cout << "metric " << metric.Name() << "\n"
            << "records " << r.records << "\n"
            << "agreement " << Fmt(r.agreement) << "\n"
            << "human_ceiling " << Fmt(r.human_ceiling) << "\n";
  for (const auto& g : r.groups) {
    std::printf("  %-24s %6zu  %.4f  (ceiling %.4f)\n", g.group.c_str(),
                g.records, g.agreement, g.human_ceiling);
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct GradcheckArgs {
  std::vector<std::string> metrics;
  std::vector<std::string> targets;
  GradSuiteConfig suite;
  bool json = false;
};

int RunGradcheck(GradcheckArgs args) {
  if (!args.metrics.empty()) {
    args.suite.metrics.clear();
    for (const auto& name : args.metrics) {
      // "watson-dft" checks both channel layouts, "watson-dft-grey" one.
      MetricOptions opt;
      opt.name = name.substr(0, std::min<size_t>(name.size(), 10));
      std::vector<std::string> layouts = {""};
      if (opt.name == "watson-dct" || opt.name == "watson-dft") {
        layouts = name.size() > 11 ? std::vector<std::string>{name.substr(11)}
                                   : std::vector<std::string>{"grey", "color"};
      } else {
        opt.name = name;
      }
      for (const auto& layout : layouts) {
        opt.channels = layout;
        args.suite.metrics.push_back(BuildMetric(opt, true));
      }
    }
  }
  if (!args.targets.empty()) {
    args.suite.targets.clear();
    for (const auto& t : args.targets) {
      if (t == "params") {
        args.suite.targets.push_back(GradTarget::kParams);
      } else if (t == "first") {
        args.suite.targets.push_back(GradTarget::kFirstInput);
      } else if (t == "second") {
        args.suite.targets.push_back(GradTarget::kSecondInput);
      } else {
        throw InputError("unknown target '" + t + "' (params, first, second)");
      }
    }
  }
  const auto entries = RunGradientSuite(args.suite);
  bool passed = true;
  json rows = json::array();
  for (const auto& e : entries) {
    passed = passed && e.passed;
    rows.push_back({{"loss", e.loss},
                    {"target", GradTargetName(e.target)},
                    {"seeds", e.runs},
                    {"max_rel_err", e.max_rel_err},
                    {"worst_seed", e.worst_seed},
                    {"checked", e.checked},
                    {"excluded", e.excluded},
                    {"below_resolution", e.below_resolution},
                    {"passed", e.passed}});
    if (!args.json) {
      std::printf("%-18s %-7s max_rel_err %.3e  checked %zu  excluded %zu  %s\n",
                  e.loss.c_str(), GradTargetName(e.target).c_str(),
                  e.max_rel_err, e.checked, e.excluded,
                  e.passed ? "ok" : "FAIL");
    }
  }
  if (args.json) {
    json out = {{"step", args.suite.step},
                {"rtol", args.suite.rtol},
                {"size", args.suite.size},
                {"passed", passed},
                {"results", rows}};
    std::cout << out.dump(2) << "\n";
  }
  return passed ? 0 : kExitNumerical;
}

// ---------------------------------------------------------------------------

struct SyntheticArgs {
  std::string out;
  SyntheticConfig config;
  std::vector<std::string> bases;
  bool json = false;
};

int RunMakeSynthetic(SyntheticArgs args) {
  for (const auto& b : args.bases) args.config.base_images.emplace_back(b);
  const fs::path manifest = GenerateSyntheticDataset(args.out, args.config);
  if (args.json) {
    json out = {{"manifest", manifest.string()},
                {"directory", (fs::path(args.out) / args.config.split).string()},
                {"records", args.config.records},
                {"patch_size", args.config.patch_size},
                {"seed", args.config.seed}};
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << manifest.string() << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
  MetricOptions metric;
  int batch = 128;
  int size = 64;
  uint64_t seed = 0;
  int threads = 1;
  bool json = false;
};

long PeakRssKib() {
  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  return usage.ru_maxrss;
}

int RunBench(const BenchArgs& args) {
  if (args.batch <= 0 || args.size < 8 || args.threads <= 0) {
    throw InputError("bench needs --batch > 0, --size >= 8, --threads > 0");
  }
  const bool colour = args.metric.channels.empty() ||
                      ParseChannels(args.metric.channels) == WatsonChannels::kYCbCr;
  const Metric metric = BuildMetric(args.metric, colour);
  const ColorSpace space = colour ? ColorSpace::kRgb : ColorSpace::kGrey;
  const long rss_before = PeakRssKib();
  std::mt19937_64 rng(args.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Image> xs, ys;
  for (int i = 0; i < args.batch; ++i) {
    Image x(args.size, args.size, space), y(args.size, args.size, space);
    for (double& v : x.pixels()) v = u(rng);
    for (size_t k = 0; k < y.size(); ++k) {
      y.pixels()[k] = std::clamp(x.pixels()[k] + 0.1 * (u(rng) - 0.5), 0.0, 1.0);
    }
    xs.push_back(std::move(x));
    ys.push_back(std::move(y));
  }
  std::vector<double> values(args.batch);
  using Clock = std::chrono::steady_clock;
  auto t0 = Clock::now();
  ParallelFor(values.size(), args.threads,
              [&](size_t i) { values[i] = Distance(metric, xs[i], ys[i]); });
  const double forward_ms =
      std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  t0 = Clock::now();
  ParallelFor(values.size(), args.threads, [&](size_t i) {
    values[i] = ValueAndGrad({GradTarget::kSecondInput, {}}, metric, xs[i], ys[i])
                    .value;
  });
  const double backward_ms =
      std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  const long rss_delta = PeakRssKib() - rss_before;
  if (args.json) {
    json out = {{"metric", metric.Name()},
                {"batch", args.batch},
                {"height", args.size},
                {"width", args.size},
                {"channels", colour ? 3 : 1},
                {"threads", args.threads},
                {"forward_ms", forward_ms},
                {"forward_backward_ms", backward_ms},
                {"peak_rss_delta_kib", rss_delta}};
    std::cout << out.dump(2) << "\n";
  } else {
    std::printf("metric %s batch %d x %dx%dx%d\n", metric.Name().c_str(),
                args.batch, colour ? 3 : 1, args.size, args.size);
    std::printf("forward_ms %.1f\nforward_backward_ms %.1f\n"
                "peak_rss_delta_kib %ld\n",
                forward_ms, backward_ms, rss_delta);
  }
  return 0;
}

int Main(int argc, char** argv) {
  CLI::App app{"Perceptual image distances and 2AFC metric fitting."};
  app.require_subcommand(1);

  CompareArgs compare;
  auto* cmp = app.add_subcommand("compare", "Distance between two PNG images");
  AddMetricOptions(cmp, compare.metric);
  cmp->add_option("image_a", compare.a, "Reference PNG")->required();
  cmp->add_option("image_b", compare.b, "Distorted PNG")->required();
  cmp->add_option("--offset", compare.offset, "Block grid offset DY DX")
      ->expected(2);
  cmp->add_option("--seed", compare.seed, "Draw a random grid offset");
  cmp->add_flag("--json", compare.json, "JSON output with channel breakdown");

  TrainArgs train;
  auto* tr = app.add_subcommand("train-2afc", "Fit Watson parameters to 2AFC data");
  AddMetricOptions(tr, train.metric);
  tr->add_option("--train", train.train, "Training manifest or BAPPS directory")
      ->required();
  tr->add_option("--test", train.test, "Held-out manifest for the report");
  tr->add_option("--out", train.out, "Output parameter JSON")->required();
  tr->add_option("--report", train.report, "Output report JSON");
  tr->add_option("--epochs", train.config.epochs)->capture_default_str();
  tr->add_option("--lr", train.config.learning_rate)->capture_default_str();
  tr->add_option("--batch-size", train.config.batch_size)->capture_default_str();
  tr->add_option("--optimizer", train.optimizer, "adam or sgd")
      ->capture_default_str();
  tr->add_option("--seed", train.config.seed)->capture_default_str();
  tr->add_option("--threads", train.config.threads)->capture_default_str();
  tr->add_flag("--no-grid-randomization", train.no_grid,
               "Train at grid offset (0, 0) only");
  tr->add_flag("--freeze-metric", train.config.freeze_metric,
               "Fit the ranking head slope only");
  tr->add_flag("--skip-invalid", train.skip_invalid,
               "Warn about and drop bad records");
  tr->add_flag("--json", train.json, "Print the report JSON");

  EvalArgs eval;
  auto* ev = app.add_subcommand("eval-2afc", "2AFC agreement of a metric");
  AddMetricOptions(ev, eval.metric);
  ev->add_option("--data", eval.data, "Manifest or BAPPS directory")->required();
  ev->add_option("--threads", eval.threads)->capture_default_str();
  ev->add_flag("--skip-invalid", eval.skip_invalid,
               "Warn about and drop bad records");
  ev->add_flag("--json", eval.json, "JSON output");

  GradcheckArgs grad;
  auto* gc = app.add_subcommand("gradcheck",
                                "Analytic gradients vs central differences");
  gc->add_option("--metric", grad.metrics,
                 "Metrics to check (default: all); watson-dft-grey etc. "
                 "select one channel layout");
  gc->add_option("--target", grad.targets, "params, first or second");
  gc->add_option("--seeds", grad.suite.seeds)->capture_default_str();
  gc->add_option("--size", grad.suite.size)->capture_default_str();
  gc->add_option("--step", grad.suite.step)->capture_default_str();
  gc->add_option("--rtol", grad.suite.rtol)->capture_default_str();
  gc->add_flag("--json", grad.json, "JSON output");

  SyntheticArgs syn;
  auto* ms = app.add_subcommand("make-synthetic",
                                "Write a seeded synthetic 2AFC dataset");
  ms->add_option("--out", syn.out, "Output directory")->required();
  ms->add_option("--records", syn.config.records)->capture_default_str();
  ms->add_option("--patch-size", syn.config.patch_size)->capture_default_str();
  ms->add_option("--seed", syn.config.seed)->capture_default_str();
  ms->add_option("--split", syn.config.split)->capture_default_str();
  ms->add_option("--base", syn.bases, "PNG images to crop patches from");
  ms->add_flag("--json", syn.json, "JSON output");

  BenchArgs bench;
  auto* be = app.add_subcommand("bench", "Time forward and forward+gradient");
  AddMetricOptions(be, bench.metric);
  be->add_option("--batch", bench.batch)->capture_default_str();
  be->add_option("--size", bench.size)->capture_default_str();
  be->add_option("--seed", bench.seed)->capture_default_str();
  be->add_option("--threads", bench.threads)->capture_default_str();
  be->add_flag("--json", bench.json, "JSON output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*cmp) return RunCompare(compare);
    if (*tr) return RunTrain(train);
    if (*ev) return RunEval(eval);
    if (*gc) return RunGradcheck(grad);
    if (*ms) return RunMakeSynthetic(syn);
    if (*be) return RunBench(bench);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace
}  // namespace watson

int main(int argc, char** argv) { return watson::Main(argc, argv); }
