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

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "core/gradcheck.hpp"
#include "core/model.hpp"
#include "core/tape.hpp"
#include "core/tensor.hpp"
#include "core/tensor_io.hpp"

using namespace advstyle;

namespace {

template <typename Fn>
std::string thrown_message(Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

Tensor<float> random_f32(std::vector<std::size_t> shape, std::uint64_t seed, double lo = 0.0,
                         double hi = 1.0) {
  Rng rng(seed);
  Tensor<float> t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<float>(rng.uniform(lo, hi));
  return t;
}

}  // namespace

TEST_CASE("elementwise add/sub/mul basics") {
  Tape<float> tape;
  Tensor<float> a({2}, {1, 2});
  Tensor<float> b({2}, {3, 4});
  Tensor<float> sum = tape.add(a, b);
  CHECK(sum[0] == 4.f);
  CHECK(sum[1] == 6.f);

  Tensor<float> x = random_f32({3, 2, 2}, 7);
  x.set_requires_grad(true);
  Tensor<float> zeroed = tape.scale(x, 0.f);
  for (std::size_t i = 0; i < zeroed.size(); ++i) CHECK(zeroed[i] == 0.f);
  tape.backward(tape.sum(zeroed));
  for (float g : x.grad()) CHECK(g == 0.f);
}

TEST_CASE("elementwise shape mismatch names both shapes") {
  Tape<float> tape;
  Tensor<float> a({3, 2, 2});
  Tensor<float> b({4});
  const std::string msg = thrown_message([&] { tape.add(a, b); });
  CHECK(msg.find("[3,2,2]") != std::string::npos);
  CHECK(msg.find("[4]") != std::string::npos);
}

TEST_CASE("channel-broadcast divide matches 64-bit recomputation") {
  Tensor<float> x = random_f32({3, 2, 2}, 11, -1.0, 1.0);
  Tensor<float> sigma = random_f32({3}, 12, 0.3, 1.2);
  Tape<float> tape;
  Tensor<float> y = tape.div(x, sigma);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const std::size_t c = i / 4;
    const double expected = static_cast<double>(x[i]) / static_cast<double>(sigma[c]);
    CHECK(std::fabs(y[i] - expected) <= 1e-6 * std::max(1.0, std::fabs(expected)));
  }
}

TEST_CASE("conv2d constant and identity kernels") {
  Tape<float> tape;
  Tensor<float> ones = Tensor<float>::full({1, 1, 3, 3}, 1.f);
  Tensor<float> w({1, 1, 1, 1}, {2.f});
  Tensor<float> b({1});
  Tensor<float> out = tape.conv2d(ones, w, b, 1, 0);
  CHECK(out.shape() == std::vector<std::size_t>{1, 1, 3, 3});
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == 2.f);

  // identity 3x3 kernel with padding reproduces the input bit for bit
  Tensor<float> x = random_f32({1, 1, 5, 5}, 13);
  Tensor<float> idw({1, 1, 3, 3});
  idw[4] = 1.f;
  Tensor<float> idout = tape.conv2d(x, idw, b, 1, 1);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(idout[i] == x[i]);
}

TEST_CASE("conv2d rejects non-integral output size") {
  Tape<float> tape;
  Tensor<float> x({1, 1, 6, 6});
  Tensor<float> w({1, 1, 3, 3});
  Tensor<float> b({1});
  CHECK_THROWS_AS(tape.conv2d(x, w, b, 2, 0), std::invalid_argument);
}

TEST_CASE("conv2d gradients match finite differences") {
  Rng rng(21);
  std::vector<Tensor<double>> inputs;
  inputs.emplace_back(std::vector<std::size_t>{1, 2, 5, 5});
  inputs.emplace_back(std::vector<std::size_t>{3, 2, 3, 3});
  inputs.emplace_back(std::vector<std::size_t>{3});
  for (auto& t : inputs)
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-1.0, 1.0);
  GraphFn fn = [](Tape<double>& t, std::vector<Tensor<double>>& in) {
    Tensor<double> out = t.conv2d(in[0], in[1], in[2], 1, 1);
    Tensor<double> w(out.shape());
    Rng wr(99);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = wr.uniform(-1.0, 1.0);
    return t.sum(t.mul(out, w));
  };
  GradCheckResult r = grad_check(fn, inputs, 1e-5);
  CHECK(r.max_rel_err < 1e-4);
}

TEST_CASE("relu forward and subgradient") {
  Tape<float> tape;
  Tensor<float> x({3}, {-1.f, 0.f, 2.f});
  Tensor<float> y = tape.relu(x);
  CHECK(y[0] == 0.f);
  CHECK(y[1] == 0.f);
  CHECK(y[2] == 2.f);

  Tensor<float> x2({2}, {-1.f, 2.f});
  x2.set_requires_grad(true);
  Tape<float> t2;
  t2.backward(t2.sum(t2.relu(x2)));
  CHECK(x2.grad()[0] == 0.f);
  CHECK(x2.grad()[1] == 1.f);
}

TEST_CASE("channel_moments trivial and high-precision cases") {
  Tape<float> tape;
  Tensor<float> constant = Tensor<float>::full({1, 2, 2}, 0.5f);
  auto [m0, s0] = tape.channel_moments(constant);
  CHECK(m0[0] == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(s0[0] == doctest::Approx(0.0).epsilon(1e-7));

  Tensor<float> half({1, 2, 2}, {0.f, 1.f, 0.f, 1.f});
  auto [m1, s1] = tape.channel_moments(half);
  CHECK(m1[0] == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(s1[0] == doctest::Approx(0.5).epsilon(1e-7));  // population formula

  Tensor<float> x = random_f32({3, 4, 4}, 31);
  auto [m, s] = tape.channel_moments(x);
  for (std::size_t c = 0; c < 3; ++c) {
    double mean = 0;
    for (std::size_t i = 0; i < 16; ++i) mean += x[c * 16 + i];
    mean /= 16.0;
    double var = 0;
    for (std::size_t i = 0; i < 16; ++i) {
      const double d = x[c * 16 + i] - mean;
      var += d * d;
    }
    var /= 16.0;
    CHECK(m[c] == doctest::Approx(mean).epsilon(1e-6));
    CHECK(s[c] == doctest::Approx(std::sqrt(var)).epsilon(1e-6));
  }
}

TEST_CASE("channel_affine identity, moments, and shift gradient") {
  Tape<float> tape;
  Tensor<float> x = random_f32({2, 3, 3}, 41);
  Tensor<float> one = Tensor<float>::full({2}, 1.f);
  Tensor<float> zero({2});
  Tensor<float> same = tape.channel_affine(x, one, zero);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(same[i] == x[i]);

  // d loss / d shift_c equals the spatial sum of the upstream gradient
  Tensor<float> up = random_f32({2, 3, 3}, 42, -1.0, 1.0);
  Tensor<float> scale = random_f32({2}, 43, 0.5, 1.5);
  Tensor<float> shift = random_f32({2}, 44, -0.5, 0.5);
  shift.set_requires_grad(true);
  Tape<float> t2;
  t2.backward(t2.sum(t2.mul(t2.channel_affine(x, scale, shift), up)));
  for (std::size_t c = 0; c < 2; ++c) {
    double expect = 0;
    for (std::size_t i = 0; i < 9; ++i) expect += up[c * 9 + i];
    CHECK(shift.grad()[c] == doctest::Approx(expect).epsilon(1e-5));
  }

  CHECK_THROWS_AS(tape.channel_affine(x, Tensor<float>({3}), zero), std::invalid_argument);
}

TEST_CASE("cross entropy values and errors") {
  Tape<float> tape;
  Tensor<float> uniform({1, 4, 2, 2});
  IntTensor labels({1, 2, 2}, {0, 1, 2, 3});
  Tensor<float> loss = tape.pixelwise_cross_entropy(uniform, labels, -1);
  CHECK(loss[0] == doctest::Approx(std::log(4.0)).epsilon(1e-6));

  // near-one-hot logits drive the loss to ~0
  Tensor<float> hot({1, 4, 1, 1});
  IntTensor l2({1, 1, 1}, {2});
  hot[2] = 100.f;
  Tape<float> t2;
  CHECK(t2.pixelwise_cross_entropy(hot, l2, -1)[0] <= 1e-8);

  IntTensor bad({1, 2, 2}, {0, 1, 4, 0});
  CHECK_THROWS_AS(tape.pixelwise_cross_entropy(uniform, bad, -1), std::invalid_argument);

  // ignored pixels drop out of the mean
  Tensor<float> two({1, 2, 1, 2}, {0.f, 5.f, 0.f, 0.f});
  IntTensor li({1, 1, 2}, {0, 255});
  Tape<float> t3;
  Tensor<float> li_loss = t3.pixelwise_cross_entropy(two, li, 255);
  const double expect = std::log(1.0 + std::exp(0.0 - 0.0));  // only the first pixel counts
  CHECK(li_loss[0] == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("backward populates leaf gradients") {
  Tensor<float> x = random_f32({2, 3}, 51);
  x.set_requires_grad(true);
  Tape<float> tape;
  tape.backward(tape.sum(x));
  for (float g : x.grad()) CHECK(g == 1.f);

  Tensor<float> y({2}, {1.f, 2.f});
  y.set_requires_grad(true);
  Tape<float> t2;
  t2.backward(t2.sum(t2.mul(y, y)));
  CHECK(y.grad()[0] == doctest::Approx(2.0));
  CHECK(y.grad()[1] == doctest::Approx(4.0));
}

TEST_CASE("backward errors on non-scalar loss and reentry") {
  Tensor<float> x = random_f32({2, 2}, 61);
  x.set_requires_grad(true);
  Tape<float> tape;
  Tensor<float> y = tape.scale(x, 2.f);
  CHECK_THROWS_AS(tape.backward(y), std::invalid_argument);
  Tensor<float> loss = tape.sum(y);
  tape.backward(loss);
  CHECK_THROWS_AS(tape.backward(loss), std::runtime_error);
  const Tensor<float> untouched({2});
  CHECK_THROWS_AS(untouched.grad(), std::runtime_error);
}

TEST_CASE("backward of a sum of losses equals the sum of backwards") {
  Tensor<float> x = random_f32({3, 3}, 71, -1.0, 1.0);
  Tensor<float> combined_grad, separate_grad;
  {
    Tensor<float> lx = x.clone();
    lx.set_requires_grad(true);
    Tape<float> t;
    Tensor<float> l1 = t.sum(t.mul(lx, lx));
    Tensor<float> l2 = t.sum(t.scale(lx, 3.f));
    t.backward(t.add(l1, l2));
    combined_grad = Tensor<float>({9}, std::vector<float>(lx.grad()));
  }
  {
    Tensor<float> lx = x.clone();
    lx.set_requires_grad(true);
    Tape<float> ta;
    ta.backward(ta.sum(ta.mul(lx, lx)));
    Tape<float> tb;
    tb.backward(tb.sum(tb.scale(lx, 3.f)));
    separate_grad = Tensor<float>({9}, std::vector<float>(lx.grad()));
  }
  for (std::size_t i = 0; i < 9; ++i)
    CHECK(combined_grad[i] == doctest::Approx(separate_grad[i]).epsilon(1e-6));
}

TEST_CASE("grad_check on linear and affine-chain functions") {
  // identity-sum: effectively exact
  GraphFn ident = [](Tape<double>& t, std::vector<Tensor<double>>& in) { return t.sum(in[0]); };
  Rng rng(81);
  Tensor<double> x({4, 4});
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(-1.0, 1.0);
  CHECK(grad_check(ident, {x}, 1e-5).max_rel_err < 1e-9);

  GraphFn chain = [](Tape<double>& t, std::vector<Tensor<double>>& in) {
    Tensor<double> y = t.channel_affine(in[0], in[1], in[2]);
    Tensor<double> z = t.channel_affine(y, in[2], in[1]);
    return t.sum(z);
  };
  Tensor<double> img({2, 3, 3}), sc({2}), sh({2});
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = rng.uniform(-1.0, 1.0);
  for (std::size_t i = 0; i < 2; ++i) {
    sc[i] = rng.uniform(0.5, 1.5);
    sh[i] = rng.uniform(-0.5, 0.5);
  }
  CHECK(grad_check(chain, {img, sc, sh}, 1e-5).max_rel_err < 1e-6);
}

TEST_CASE("gradcheck suite passes and reports every op once") {
  GradCheckSuiteResult suite = run_gradcheck_suite(false);
  CHECK(suite.all_pass);
  for (const auto& c : suite.checks) {
    INFO(c.name);
    CHECK(c.max_rel_err < 1e-4);
  }
  // one line per op plus the summary
  const std::string report = format_gradcheck_report(suite);
  std::size_t lines = 0;
  for (char ch : report)
    if (ch == '\n') ++lines;
  CHECK(lines == suite.checks.size() + 1);

  GradCheckSuiteResult faulty = run_gradcheck_suite(true);
  CHECK_FALSE(faulty.all_pass);
}

TEST_CASE("32-bit and 64-bit forward agree on unit-scale inputs") {
  ModelConfig cfg;
  cfg.widths = {6, 8};
  cfg.num_classes = 3;
  ModelState<float> mf = build_model<float>(cfg, 123);
  ModelState<double> md = build_model<double>(cfg, 123);
  // same parameter values, different arithmetic width
  {
    auto pf = mf.parameters();
    auto pd = md.parameters();
    for (std::size_t i = 0; i < pf.size(); ++i)
      for (std::size_t j = 0; j < pf[i].size(); ++j) pd[i][j] = pf[i][j];
  }
  Tensor<float> img = random_f32({1, 3, 8, 8}, 321);
  Tensor<double> imgd = img.cast<double>();
  Tape<float> tf;
  Tape<double> td;
  Tensor<float> of = model_forward(tf, mf, img, true);
  Tensor<double> od = model_forward(td, md, imgd, true);
  for (std::size_t i = 0; i < of.size(); ++i) {
    const double denom = std::max(1.0, std::fabs(od[i]));
    CHECK(std::fabs(of[i] - od[i]) / denom < 1e-4);
  }
}

TEST_CASE("tensor file format is pinned byte for byte") {
  const std::string dir = std::filesystem::temp_directory_path().string() + "/advstyle_atsr";
  std::filesystem::create_directories(dir);
  const std::string path = dir + "/t.atsr";
  Tensor<float> t({2, 2}, {1.0f, 0.5f, -2.0f, 3.25f});
  write_tensor_file(path, t);

  std::ifstream is(path, std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)),
                                   std::istreambuf_iterator<char>());
  const unsigned char expected[] = {
      'A',  'T',  'S',  'R',              // magic
      2,    0,    0,    0,                // rank
      2,    0,    0,    0,    2, 0, 0, 0, // dims
      0x00, 0x00, 0x80, 0x3f,             // 1.0f
      0x00, 0x00, 0x00, 0x3f,             // 0.5f
      0x00, 0x00, 0x00, 0xc0,             // -2.0f
      0x00, 0x00, 0x50, 0x40,             // 3.25f
  };
  REQUIRE(bytes.size() == sizeof(expected));
  CHECK(std::memcmp(bytes.data(), expected, sizeof(expected)) == 0);

  Tensor<float> back = read_tensor_file(path);
  CHECK(back.shape() == t.shape());
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(back[i] == t[i]);
}

TEST_CASE("checkpoint round trip preserves the model") {
  ModelConfig cfg;
  cfg.widths = {4, 6};
  ModelState<float> model = build_model<float>(cfg, 99);
  const std::string dir =
      std::filesystem::temp_directory_path().string() + "/advstyle_ckpt_test";
  std::filesystem::remove_all(dir);
  save_checkpoint(dir, model);
  ModelState<float> loaded = load_checkpoint(dir);
  auto pa = model.parameters();
  auto pb = loaded.parameters();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    REQUIRE(pa[i].shape() == pb[i].shape());
    for (std::size_t j = 0; j < pa[i].size(); ++j) CHECK(pa[i][j] == pb[i][j]);
  }
}
