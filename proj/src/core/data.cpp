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

#include "core/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "core/common.hpp"
#include "core/tape.hpp"

namespace advstyle {

namespace {

constexpr std::uint64_t kGeometryStream = 0x67656f6dull;  // "geom"
constexpr std::uint64_t kStyleStream = 0x7374796cull;     // "styl"

/// Distinct grayscale level per class; background (0) sits at mid-gray and
/// the shape classes alternate below/above it.
double class_gray(std::size_t cls) {
  if (cls == 0) return 0.5;
  const std::size_t pair = (cls - 1) / 2;
  double offset = 0.35 - 0.15 * static_cast<double>(pair);
  if (offset < 0.05) offset = 0.05;
  return (cls % 2 == 1) ? 0.5 - offset : 0.5 + offset;
}

}  // namespace

void DomainSpec::validate() const {
  for (double s : base_std)
    if (s <= 0) throw std::invalid_argument("domain: base_std must be positive");
  if (num_classes < 2) throw std::invalid_argument("domain: need at least 2 classes");
  if (height < 4 || width < 4) throw std::invalid_argument("domain: image too small");
  if (shapes_max < shapes_min)
    throw std::invalid_argument("domain: shapes_max below shapes_min");
}

LabeledImage generate_scene(const DomainSpec& spec, std::uint64_t seed) {
  spec.validate();
  const std::size_t h = spec.height, w = spec.width;
  Rng geom(mix_seed(seed, kGeometryStream));
  Rng style(mix_seed(seed, kStyleStream));

  IntTensor label({h, w});
  const std::size_t nshapes =
      spec.shapes_min + geom.index(spec.shapes_max - spec.shapes_min + 1);
  const double m = static_cast<double>(std::min(h, w));
  for (std::size_t s = 0; s < nshapes; ++s) {
    const std::int32_t cls = 1 + static_cast<std::int32_t>(geom.index(spec.num_classes - 1));
    const bool disk = geom.index(2) == 1;
    const long cy = static_cast<long>(geom.index(h));
    const long cx = static_cast<long>(geom.index(w));
    if (disk) {
      const double r = geom.uniform(std::max(2.0, m / 10.0), m / 3.0);
      const long ri = static_cast<long>(std::ceil(r));
      for (long y = std::max(0L, cy - ri); y <= std::min<long>(h - 1, cy + ri); ++y)
        for (long x = std::max(0L, cx - ri); x <= std::min<long>(w - 1, cx + ri); ++x)
          if (double(y - cy) * (y - cy) + double(x - cx) * (x - cx) <= r * r)
            label[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)] = cls;
    } else {
      const long hh = static_cast<long>(geom.uniform(std::max(2.0, m / 10.0), m / 3.0));
      const long ww = static_cast<long>(geom.uniform(std::max(2.0, m / 10.0), m / 3.0));
      for (long y = std::max(0L, cy - hh); y <= std::min<long>(h - 1, cy + hh); ++y)
        for (long x = std::max(0L, cx - ww); x <= std::min<long>(w - 1, cx + ww); ++x)
          label[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)] = cls;
    }
  }

  // content texture: class gray plus pixel noise, shared by every style
  std::vector<double> texture(h * w);
  for (std::size_t i = 0; i < h * w; ++i)
    texture[i] = class_gray(static_cast<std::size_t>(label[i])) + geom.uniform(-0.06, 0.06);

  LabeledImage out;
  out.image = Tensor<float>({3, h, w});
  out.label = label;
  for (std::size_t c = 0; c < 3; ++c) {
    const double mean_c = spec.base_mean[c] + style.normal(0.0, spec.jitter_mean);
    double scale_c = spec.base_std[c] + style.normal(0.0, spec.jitter_std);
    if (scale_c < 0.01) scale_c = 0.01;
    float* plane = out.image.data() + c * h * w;
    for (std::size_t i = 0; i < h * w; ++i) {
      double v = mean_c + scale_c * (texture[i] - 0.5);
      if (v < 0.0) v = 0.0;
      if (v > 1.0) v = 1.0;
      plane[i] = static_cast<float>(v);
    }
  }
  return out;
}

Dataset make_domain(const DomainSpec& spec, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("make_domain: need at least one scene");
  Dataset data;
  data.items.resize(n);
  parallel_for(0, n, 4, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) data.items[i] = generate_scene(spec, seed + i);
  });
  return data;
}

void accumulate_confusion(const IntTensor& pred, const IntTensor& truth, std::size_t k,
                          int ignore_index, std::vector<std::int64_t>& confusion) {
  if (pred.size() != truth.size())
    throw std::invalid_argument("confusion: prediction and truth sizes differ");
  if (confusion.size() != k * k) confusion.assign(k * k, 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const std::int32_t t = truth[i];
    if (t == ignore_index) continue;
    const std::int32_t p = pred[i];
    if (t < 0 || static_cast<std::size_t>(t) >= k || p < 0 || static_cast<std::size_t>(p) >= k)
      throw std::invalid_argument("confusion: class index out of range");
    ++confusion[static_cast<std::size_t>(t) * k + static_cast<std::size_t>(p)];
  }
}

IoUReport iou_from_confusion(std::vector<std::int64_t> confusion, std::size_t k) {
  if (confusion.size() != k * k)
    throw std::invalid_argument("iou: confusion matrix must be KxK");
  IoUReport report;
  report.num_classes = k;
  report.confusion = std::move(confusion);
  report.iou.assign(k, std::numeric_limits<double>::quiet_NaN());
  double sum = 0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < k; ++c) {
    std::int64_t tp = report.confusion[c * k + c];
    std::int64_t row = 0, col = 0;
    for (std::size_t j = 0; j < k; ++j) {
      row += report.confusion[c * k + j];
      col += report.confusion[j * k + c];
    }
    const std::int64_t uni = row + col - tp;
    if (uni == 0) continue;
    report.iou[c] = static_cast<double>(tp) / static_cast<double>(uni);
    sum += report.iou[c];
    ++present;
  }
  report.miou = present > 0 ? sum / static_cast<double>(present) : 0.0;
  return report;
}

IoUReport evaluate_miou(const ModelState<float>& model, const Dataset& data,
                        std::size_t batch_size, int ignore_index) {
  if (data.empty()) throw std::invalid_argument("evaluate_miou: empty dataset");
  const std::size_t k = model.config.num_classes;
  std::vector<std::int64_t> confusion(k * k, 0);
  for (std::size_t start = 0; start < data.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, data.size() - start);
    std::vector<Tensor<float>> images;
    images.reserve(n);
    for (std::size_t i = 0; i < n; ++i) images.push_back(data[start + i].image);
    Tape<float> tape;
    Tensor<float> logits =
        model_forward(tape, model, tape.stack(std::span<const Tensor<float>>(images)),
                      /*frozen=*/true);
    const std::size_t hw = logits.dim(2) * logits.dim(3);
    for (std::size_t i = 0; i < n; ++i) {
      const float* lp = logits.data() + i * k * hw;
      IntTensor pred({logits.dim(2), logits.dim(3)});
      for (std::size_t px = 0; px < hw; ++px) {
        std::size_t best = 0;
        float bv = lp[px];
        for (std::size_t c = 1; c < k; ++c) {
          const float v = lp[c * hw + px];
          if (v > bv) {
            bv = v;
            best = c;
          }
        }
        pred[px] = static_cast<std::int32_t>(best);
      }
      accumulate_confusion(pred, data[start + i].label, k, ignore_index, confusion);
    }
  }
  return iou_from_confusion(std::move(confusion), k);
}

// --- netpbm ------------------------------------------------------------------

namespace {

int pnm_read_token(std::istream& is, const std::string& path) {
  int c = is.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = is.get();
    } else if (std::isspace(c)) {
      c = is.get();
    } else {
      break;
    }
  }
  if (c == EOF || !std::isdigit(c)) throw std::runtime_error("malformed netpbm header: " + path);
  int value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    c = is.get();
  }
  return value;
}

unsigned char quantize01(float v) {
  double x = v;
  if (x < 0.0) x = 0.0;
  if (x > 1.0) x = 1.0;
  // nearbyint rounds half to even under the default FP environment
  return static_cast<unsigned char>(std::nearbyint(x * 255.0));
}

}  // namespace

void write_ppm(const std::string& path, const Tensor<float>& image) {
  if (image.rank() != 3 || image.dim(0) != 3)
    throw std::invalid_argument("write_ppm: expected [3,H,W], got " + shape_str(image.shape()));
  const std::size_t h = image.dim(1), w = image.dim(2), hw = h * w;
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << "P6\n" << w << " " << h << "\n255\n";
  std::vector<unsigned char> row(3 * w);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < 3; ++c)
        row[3 * x + c] = quantize01(image[c * hw + y * w + x]);
    os.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

Tensor<float> read_ppm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  char m0 = 0, m1 = 0;
  is.get(m0);
  is.get(m1);
  if (m0 != 'P' || m1 != '6') throw std::runtime_error("not a binary PPM (P6): " + path);
  const std::size_t w = static_cast<std::size_t>(pnm_read_token(is, path));
  const std::size_t h = static_cast<std::size_t>(pnm_read_token(is, path));
  const int maxval = pnm_read_token(is, path);
  if (maxval <= 0 || maxval > 255) throw std::runtime_error("unsupported PPM maxval: " + path);
  // single whitespace byte separates header from payload
  std::vector<unsigned char> buf(3 * w * h);
  if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
    throw std::runtime_error("PPM payload truncated: " + path);
  Tensor<float> image({3, h, w});
  const std::size_t hw = h * w;
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < 3; ++c)
        image[c * hw + y * w + x] =
            static_cast<float>(buf[(y * w + x) * 3 + c]) / static_cast<float>(maxval);
  return image;
}

void write_pgm(const std::string& path, const IntTensor& label) {
  if (label.rank() != 2)
    throw std::invalid_argument("write_pgm: expected [H,W], got " + shape_str(label.shape()));
  const std::size_t h = label.dim(0), w = label.dim(1);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << "P5\n" << w << " " << h << "\n255\n";
  std::vector<unsigned char> row(w);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::int32_t v = label[y * w + x];
      if (v < 0 || v > 255)
        throw std::invalid_argument("write_pgm: class index " + std::to_string(v) +
                                    " does not fit 8 bits");
      row[x] = static_cast<unsigned char>(v);
    }
    os.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

IntTensor read_pgm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  char m0 = 0, m1 = 0;
  is.get(m0);
  is.get(m1);
  if (m0 != 'P' || m1 != '5') throw std::runtime_error("not a binary PGM (P5): " + path);
  const std::size_t w = static_cast<std::size_t>(pnm_read_token(is, path));
  const std::size_t h = static_cast<std::size_t>(pnm_read_token(is, path));
  const int maxval = pnm_read_token(is, path);
  if (maxval <= 0 || maxval > 255) throw std::runtime_error("unsupported PGM maxval: " + path);
  std::vector<unsigned char> buf(w * h);
  if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
    throw std::runtime_error("PGM payload truncated: " + path);
  IntTensor label({h, w});
  for (std::size_t i = 0; i < w * h; ++i) label[i] = buf[i];
  return label;
}

namespace {

std::string frame_name(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%05zu", i);
  return buf;
}

std::string triplet(const std::array<double, 3>& v) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g", v[0], v[1], v[2]);
  return buf;
}

}  // namespace

void save_dataset(const std::string& dir, const Dataset& data, const DomainSpec* spec,
                  std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < data.size(); ++i) {
    write_ppm(dir + "/" + frame_name(i) + ".ppm", data[i].image);
    write_pgm(dir + "/" + frame_name(i) + ".pgm", data[i].label);
  }
  std::ofstream os(dir + "/manifest.txt", std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write dataset manifest in " + dir);
  os << "# advstyle dataset\n";
  os << "count = " << data.size() << "\n";
  os << "seed = " << seed << "\n";
  if (spec) {
    os << "height = " << spec->height << "\n";
    os << "width = " << spec->width << "\n";
    os << "num_classes = " << spec->num_classes << "\n";
    os << "shapes_min = " << spec->shapes_min << "\n";
    os << "shapes_max = " << spec->shapes_max << "\n";
    os << "base_mean = " << triplet(spec->base_mean) << "\n";
    os << "base_std = " << triplet(spec->base_std) << "\n";
    os << "jitter_mean = " << spec->jitter_mean << "\n";
    os << "jitter_std = " << spec->jitter_std << "\n";
  }
}

Dataset load_dataset(const std::string& dir) {
  std::vector<std::string> stems;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.path().extension() == ".ppm") stems.push_back(entry.path().stem().string());
  std::sort(stems.begin(), stems.end());
  if (stems.empty()) throw std::runtime_error("no PPM images found in " + dir);
  Dataset data;
  for (const auto& stem : stems) {
    LabeledImage item;
    item.image = read_ppm(dir + "/" + stem + ".ppm");
    const std::string pgm = dir + "/" + stem + ".pgm";
    if (std::filesystem::exists(pgm)) {
      item.label = read_pgm(pgm);
    } else {
      item.label = IntTensor({item.image.dim(1), item.image.dim(2)});
    }
    if (item.label.dim(0) != item.image.dim(1) || item.label.dim(1) != item.image.dim(2))
      throw std::runtime_error("label extent does not match image for " + stem + " in " + dir);
    data.items.push_back(std::move(item));
  }
  return data;
}

}  // namespace advstyle
