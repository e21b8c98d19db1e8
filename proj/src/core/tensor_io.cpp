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

#include "core/tensor_io.hpp"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace advstyle {

namespace {

constexpr char kMagic[4] = {'A', 'T', 'S', 'R'};

void put_u32le(std::ostream& os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                              static_cast<unsigned char>((v >> 8) & 0xff),
                              static_cast<unsigned char>((v >> 16) & 0xff),
                              static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32le(std::istream& is, const std::string& path) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4))
    throw std::runtime_error("tensor file truncated: " + path);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_tensor_file(const std::string& path, const Tensor<float>& t) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os.write(kMagic, 4);
  put_u32le(os, static_cast<std::uint32_t>(t.rank()));
  for (std::size_t d : t.shape()) put_u32le(os, static_cast<std::uint32_t>(d));
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::uint32_t bits;
    float v = t[i];
    std::memcpy(&bits, &v, 4);
    put_u32le(os, bits);
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

Tensor<float> read_tensor_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("not an ATSR tensor file: " + path);
  const std::uint32_t rank = get_u32le(is, path);
  if (rank > 8) throw std::runtime_error("implausible tensor rank in " + path);
  std::vector<std::size_t> shape(rank);
  for (auto& d : shape) d = get_u32le(is, path);
  Tensor<float> t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const std::uint32_t bits = get_u32le(is, path);
    float v;
    std::memcpy(&v, &bits, 4);
    t[i] = v;
  }
  return t;
}

namespace {

std::string size_list(const std::vector<std::size_t>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    os << v[i];
  }
  return os.str();
}

std::vector<std::size_t> parse_size_list(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(static_cast<std::size_t>(std::stoull(item)));
  }
  return out;
}

struct NamedParam {
  std::string name;
  Tensor<float> tensor;
};

std::vector<NamedParam> named_params(const ModelState<float>& model) {
  std::vector<NamedParam> out;
  for (std::size_t i = 0; i < model.stages.size(); ++i) {
    out.push_back({"stage" + std::to_string(i) + ".weight", model.stages[i].weight});
    out.push_back({"stage" + std::to_string(i) + ".bias", model.stages[i].bias});
  }
  out.push_back({"head.weight", model.head.weight});
  out.push_back({"head.bias", model.head.bias});
  return out;
}

}  // namespace

void save_checkpoint(const std::string& dir, const ModelState<float>& model) {
  std::filesystem::create_directories(dir);
  std::ostringstream manifest;
  manifest << "# advstyle checkpoint\n";
  manifest << "in_channels = " << model.config.in_channels << "\n";
  manifest << "num_classes = " << model.config.num_classes << "\n";
  manifest << "widths = " << size_list(model.config.widths) << "\n";
  manifest << "kernel = " << model.config.kernel << "\n";
  manifest << "injection_position = " << model.config.injection_position << "\n";
  for (const auto& p : named_params(model)) {
    const std::string file = p.name + ".atsr";
    write_tensor_file(dir + "/" + file, p.tensor);
    manifest << "tensor " << p.name << " " << shape_str(p.tensor.shape()) << " " << file << "\n";
  }
  std::ofstream os(dir + "/manifest.txt", std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write checkpoint manifest in " + dir);
  os << manifest.str();
}

ModelState<float> load_checkpoint(const std::string& dir) {
  std::ifstream is(dir + "/manifest.txt");
  if (!is) throw std::runtime_error("no checkpoint manifest in " + dir);
  ModelConfig cfg;
  cfg.widths.clear();
  std::vector<std::pair<std::string, std::string>> tensors;  // name -> file
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string first;
    ls >> first;
    if (first == "tensor") {
      std::string name, shape, file;
      ls >> name >> shape >> file;
      tensors.emplace_back(name, file);
      continue;
    }
    std::string eq, value;
    ls >> eq >> value;
    if (eq != "=") throw std::runtime_error("malformed checkpoint manifest line: " + line);
    if (first == "in_channels") cfg.in_channels = std::stoull(value);
    else if (first == "num_classes") cfg.num_classes = std::stoull(value);
    else if (first == "widths") cfg.widths = parse_size_list(value);
    else if (first == "kernel") cfg.kernel = std::stoull(value);
    else if (first == "injection_position") cfg.injection_position = std::stoull(value);
    else throw std::runtime_error("unknown checkpoint manifest key: " + first);
  }
  ModelState<float> model = build_model<float>(cfg, 0);
  auto params = named_params(model);
  if (params.size() != tensors.size())
    throw std::runtime_error("checkpoint lists " + std::to_string(tensors.size()) +
                             " tensors, model expects " + std::to_string(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].name != tensors[i].first)
      throw std::runtime_error("checkpoint tensor order mismatch at " + tensors[i].first);
    Tensor<float> loaded = read_tensor_file(dir + "/" + tensors[i].second);
    if (loaded.shape() != params[i].tensor.shape())
      throw std::runtime_error("checkpoint tensor " + tensors[i].first + " has shape " +
                               shape_str(loaded.shape()) + ", expected " +
                               shape_str(params[i].tensor.shape()));
    std::copy(loaded.data(), loaded.data() + loaded.size(), params[i].tensor.data());
  }
  return model;
}

}  // namespace advstyle
