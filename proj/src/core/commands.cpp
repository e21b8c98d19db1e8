/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 advstyle contributors
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "core/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "core/analysis.hpp"
#include "core/augment.hpp"
#include "core/bench.hpp"
#include "core/gradcheck.hpp"
#include "core/tensor_io.hpp"

namespace advstyle {

namespace {

constexpr std::uint64_t kDataStream = 0x64617461ull;  // "data"
constexpr std::uint64_t kAugStream = 0x61756773ull;   // "augs"

void prepare_out_dir(const Options& opts, const std::string& out_dir, const std::string& tool) {
  if (out_dir.empty()) throw std::invalid_argument(tool + ": output directory required");
  std::filesystem::create_directories(out_dir);
  opts.write_manifest(out_dir + "/run_manifest.cfg", tool);
}

std::vector<std::string> list_stems(const std::string& dir) {
  std::vector<std::string> stems;
  if (!std::filesystem::is_directory(dir))
    throw std::invalid_argument("not a directory: " + dir);
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.path().extension() == ".ppm") stems.push_back(entry.path().stem().string());
  std::sort(stems.begin(), stems.end());
  if (stems.empty()) throw std::invalid_argument("no PPM images in " + dir);
  return stems;
}

LabeledImage load_pair(const std::string& dir, const std::string& stem) {
  LabeledImage item;
  item.image = read_ppm(dir + "/" + stem + ".ppm");
  const std::string pgm = dir + "/" + stem + ".pgm";
  if (std::filesystem::exists(pgm))
    item.label = read_pgm(pgm);
  else
    item.label = IntTensor({item.image.dim(1), item.image.dim(2)});
  return item;
}

void write_prov_header(std::ofstream& os) {
  os << "id,strategy,mu_r_before,mu_g_before,mu_b_before,sd_r_before,sd_g_before,sd_b_before,"
        "mu_r_after,mu_g_after,mu_b_after,sd_r_after,sd_g_after,sd_b_after\n";
}

void write_prov_rows(std::ofstream& os, const std::string& id, const AugProvenance& prov) {
  // the patch variant carries one 6-dim record per cell
  const std::size_t cells = prov.mu_before.size() / 3;
  for (std::size_t cell = 0; cell < cells; ++cell) {
    os << id;
    if (cells > 1) os << ":cell" << cell;
    os << ',' << prov.strategy;
    for (std::size_t c = 0; c < 3; ++c) os << ',' << format_double(prov.mu_before[cell * 3 + c]);
    for (std::size_t c = 0; c < 3; ++c) os << ',' << format_double(prov.sd_before[cell * 3 + c]);
    for (std::size_t c = 0; c < 3; ++c) os << ',' << format_double(prov.mu_after[cell * 3 + c]);
    for (std::size_t c = 0; c < 3; ++c) os << ',' << format_double(prov.sd_after[cell * 3 + c]);
    os << '\n';
  }
}

}  // namespace

void cmd_train(const Options& opts, const std::string& out_dir) {
  prepare_out_dir(opts, out_dir, "train");
  TrainConfig cfg = opts.train_config();
  const Dataset data = make_domain(opts.domain_spec("source"), opts.get_size("data.num_train"),
                                   mix_seed(cfg.seed, kDataStream, 0));
  train(cfg, data, out_dir);
}

void cmd_bench(const Options& opts, const std::string& out_dir) {
  prepare_out_dir(opts, out_dir, "bench");
  BenchProtocol protocol;
  protocol.base = opts.train_config();
  protocol.source = opts.domain_spec("source");
  protocol.target = opts.domain_spec("target");
  protocol.num_train = opts.get_size("data.num_train");
  protocol.num_eval = opts.get_size("data.num_eval");
  protocol.repeats = opts.get_size("bench.repeats");
  protocol.seed = opts.get_u64("seed");
  protocol.out_dir = out_dir;
  const auto tasks = default_bench_tasks();
  const auto runs = run_bench_tasks(protocol, tasks);

  {
    std::ofstream os(out_dir + "/runs.csv", std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write runs.csv");
    os << "method,repeat,seed,source_miou,target_miou\n";
    for (const auto& r : runs)
      os << r.name << ',' << r.repeat << ',' << r.run_seed << ',' << format_double(r.source_miou)
         << ',' << format_double(r.target_miou) << '\n';
  }
  {
    std::ofstream os(out_dir + "/results.csv", std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write results.csv");
    os << "method,source_miou,target_miou,mean_miou\n";
    for (const auto& a : aggregate_bench(tasks, runs))
      os << a.name << ',' << format_double(a.source_miou) << ',' << format_double(a.target_miou)
         << ',' << format_double(a.mean_miou) << '\n';
  }
}

void cmd_generate(const Options& opts, const std::string& which, const std::string& out_dir) {
  prepare_out_dir(opts, out_dir, "generate");
  const DomainSpec spec = opts.domain_spec(which);
  const std::uint64_t seed = opts.get_u64("seed");
  const Dataset data = make_domain(spec, opts.get_size("data.num_train"), seed);
  save_dataset(out_dir, data, &spec, seed);
}

void cmd_augment(const Options& opts, const std::string& strategy, const std::string& input_dir,
                 const std::string& out_dir) {
  const Policy policy = parse_policy(strategy);
  if (policy == Policy::kNone || policy == Policy::kRandomAdvCombo)
    throw std::invalid_argument("augment: strategy must be one of advstyle, advpixel, "
                                "randstyle, mixstyle, crossstyle");
  const std::vector<std::string> stems = list_stems(input_dir);
  prepare_out_dir(opts, out_dir, "augment");

  ModelState<float> model;
  const bool needs_model = policy == Policy::kAdvStyle || policy == Policy::kAdvPixel;
  if (needs_model) {
    const std::string ckpt = opts.get("augment.checkpoint");
    if (ckpt.empty())
      throw std::invalid_argument("augment: adversarial strategies require augment.checkpoint");
    model = load_checkpoint(ckpt);
  }

  std::vector<LabeledImage> items;
  items.reserve(stems.size());
  for (const auto& stem : stems) items.push_back(load_pair(input_dir, stem));

  TrainConfig cfg = opts.train_config();
  const std::uint64_t seed = cfg.seed;
  const std::size_t n = items.size();
  std::vector<LabeledImage> outputs(n);
  std::vector<AugProvenance> prov(n);

  switch (policy) {
    case Policy::kAdvStyle:
      for (std::size_t i = 0; i < n; ++i)
        outputs[i] = adv_style_augment(model, items[i], cfg.adv, &prov[i], cfg.ignore_index);
      break;
    case Policy::kAdvPixel:
      for (std::size_t i = 0; i < n; ++i)
        outputs[i] =
            adv_pixel(model, items[i], cfg.pixel_lr, cfg.pixel_steps, &prov[i], cfg.ignore_index);
      break;
    case Policy::kRandStyle:
      for (std::size_t i = 0; i < n; ++i)
        outputs[i] =
            rand_style(items[i], cfg.rand_noise_std, mix_seed(seed, kAugStream, i), &prov[i]);
      break;
    case Policy::kMixStyle:
      for (std::size_t i = 0; i < n; ++i) {
        Rng rng(mix_seed(seed, kAugStream, i));
        const double lambda = cfg.mix_lambda >= 0 ? cfg.mix_lambda : rng.beta(0.1, 0.1);
        outputs[i] = mix_style(items[i], items[(i + 1) % n], lambda, &prov[i]);
      }
      break;
    case Policy::kCrossStyle:
      for (std::size_t i = 0; i + 1 < n; i += 2) {
        auto [a, b] = cross_style(items[i], items[i + 1], &prov[i], &prov[i + 1]);
        outputs[i] = a;
        outputs[i + 1] = b;
      }
      if (n % 2 == 1)
        outputs[n - 1] = cross_style(items[n - 1], items[0], &prov[n - 1], nullptr).first;
      break;
    default:
      break;
  }

  std::ofstream prov_os(out_dir + "/provenance.csv", std::ios::trunc);
  if (!prov_os) throw std::runtime_error("cannot write provenance.csv");
  write_prov_header(prov_os);
  for (std::size_t i = 0; i < n; ++i) {
    write_ppm(out_dir + "/" + stems[i] + ".ppm", outputs[i].image);
    write_pgm(out_dir + "/" + stems[i] + ".pgm", outputs[i].label);
    write_prov_rows(prov_os, stems[i], prov[i]);
  }
}

void cmd_analyze(const Options& opts, const std::vector<std::string>& input_dirs,
                 const std::string& out_dir) {
  if (input_dirs.empty()) throw std::invalid_argument("analyze: need at least one input dir");
  prepare_out_dir(opts, out_dir, "analyze");
  const std::size_t bins = opts.get_size("analyze.bins");
  const double smoothing = opts.get_double("analyze.smoothing");

  std::vector<StyleHistogram> hists;
  std::ofstream hist_os(out_dir + "/histograms.csv", std::ios::trunc);
  if (!hist_os) throw std::runtime_error("cannot write histograms.csv");
  hist_os << "dir";
  for (std::size_t i = 0; i < 3 * bins; ++i) hist_os << ",f" << i;
  hist_os << '\n';
  for (std::size_t d = 0; d < input_dirs.size(); ++d) {
    const Dataset data = load_dataset(input_dirs[d]);
    const std::string base = std::filesystem::path(input_dirs[d]).filename().string();
    write_style_table_csv(out_dir + "/style_" + std::to_string(d) + "_" + base + ".csv",
                          extract_style_features(data));
    StyleHistogram h = histogram_feature(data, bins);
    hist_os << input_dirs[d];
    for (double v : h.feature) hist_os << ',' << format_double(v);
    hist_os << '\n';
    hists.push_back(std::move(h));
  }

  std::ofstream kl_os(out_dir + "/kl.csv", std::ios::trunc);
  if (!kl_os) throw std::runtime_error("cannot write kl.csv");
  kl_os << "source,target,kl\n";
  for (std::size_t i = 0; i < hists.size(); ++i)
    for (std::size_t j = 0; j < hists.size(); ++j)
      kl_os << input_dirs[i] << ',' << input_dirs[j] << ','
            << format_double(kl_distance(hists[i], hists[j], smoothing)) << '\n';
}

GradcheckOutcome cmd_gradcheck(bool inject_fault) {
  const GradCheckSuiteResult result = run_gradcheck_suite(inject_fault);
  return {format_gradcheck_report(result), result.all_pass};
}

}  // namespace advstyle
