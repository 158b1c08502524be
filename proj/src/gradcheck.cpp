// Copyright 2026 The lineread Authors
// SPDX-License-Identifier: Apache-2.0

#include "lineread/gradcheck.hpp"

#include <cmath>
#include <sstream>

#include "lineread/ops.hpp"

namespace lineread {

GradCheckReport finite_diff_check(
    const std::vector<std::pair<std::string, Tensor<double>>>& leaves,
    const std::function<Tensor<double>()>& build, double step, double rel_floor) {
  // Analytic pass.
  for (auto& [name, leaf] : leaves) const_cast<Tensor<double>&>(leaf).zero_grad();
  build().backward();
  std::vector<std::vector<double>> analytic;
  analytic.reserve(leaves.size());
  for (const auto& [name, leaf] : leaves) analytic.push_back(leaf.grad());

  GradCheckReport report;
  for (size_t li = 0; li < leaves.size(); ++li) {
    auto& leaf = const_cast<Tensor<double>&>(leaves[li].second);
    for (size_t i = 0; i < leaf.numel(); ++i) {
      const double saved = leaf.values()[i];
      double lp, lm;
      {
        NoGradGuard ng;
        leaf.values()[i] = saved + step;
        lp = build().item();
        leaf.values()[i] = saved - step;
        lm = build().item();
      }
      leaf.values()[i] = saved;
      const double numeric = (lp - lm) / (2.0 * step);
      const double a = analytic[li][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), rel_floor});
      const double rel = std::abs(a - numeric) / denom;
      ++report.elements;
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        std::ostringstream os;
        os << leaves[li].first << '[' << i << "]: analytic " << a << " vs numeric "
           << numeric;
        report.worst = os.str();
      }
    }
  }
  return report;
}

namespace {

using DT = Tensor<double>;

DT leafu(Shape s, Rng& rng, double lo, double hi) {
  auto t = DT::uniform(std::move(s), rng, lo, hi);
  t.set_requires_grad(true);
  return t;
}

// Uniform values bounded away from zero, for kinked ops like relu.
DT leafu_margin(Shape s, Rng& rng, double margin) {
  auto t = DT::uniform(std::move(s), rng, -1.0, 1.0);
  for (double& v : t.values()) v += v >= 0 ? margin : -margin;
  t.set_requires_grad(true);
  return t;
}

// Weighted readout with weights derived from a fixed seed, so rebuilding the
// forward pass during finite differencing sees identical weights. Makes the
// output gradient non-uniform.
DT readout(const DT& x, uint64_t wseed) {
  Rng r(wseed);
  auto w = DT::uniform(x.shape(), r, -1.0, 1.0);
  return sum(mul(x, w));
}

struct Trial {
  const char* name;
  std::function<GradCheckReport(Rng&)> run;
};

}  // namespace

std::vector<std::string> run_op_gradcheck_suite(int trials, uint64_t seed, double tol) {
  std::vector<Trial> cases;

  cases.push_back({"add/sub/mul", [](Rng& rng) {
    Shape s{2 + rng.uniform_u64(3), 2 + rng.uniform_u64(4)};
    auto a = leafu(s, rng, -2, 2), b = leafu(s, rng, -2, 2);
    const uint64_t ws = rng.next_u64();
    return finite_diff_check({{"a", a}, {"b", b}},
                             [&, ws] { return readout(mul(add(a, b), sub(a, b)), ws); });
  }});
  cases.push_back({"scalar_mul+sum", [](Rng& rng) {
    auto a = leafu({3, 2}, rng, -2, 2);
    return finite_diff_check({{"a", a}}, [&] { return sum(scalar_mul(a, 1.7)); });
  }});
  cases.push_back({"add_row_bias", [](Rng& rng) {
    auto m = leafu({4, 3}, rng, -1, 1);
    auto b = leafu({3}, rng, -1, 1);
    const uint64_t ws = rng.next_u64();
    return finite_diff_check({{"m", m}, {"b", b}},
                             [&, ws] { return readout(add_row_bias(m, b), ws); });
  }});
  cases.push_back({"matmul", [](Rng& rng) {
    const size_t m = 1 + rng.uniform_u64(4), k = 1 + rng.uniform_u64(4),
                 n = 1 + rng.uniform_u64(4);
    auto a = leafu({m, k}, rng, -1, 1), b = leafu({k, n}, rng, -1, 1);
    const uint64_t ws = rng.next_u64();
    return finite_diff_check({{"a", a}, {"b", b}},
                             [&, ws] { return readout(matmul(a, b), ws); });
  }});
  cases.push_back({"matmul_nt", [](Rng& rng) {
    auto a = leafu({3, 4}, rng, -1, 1), b = leafu({2, 4}, rng, -1, 1);
    const uint64_t ws = rng.next_u64();
    return finite_diff_check({{"a", a}, {"b", b}},
                             [&, ws] { return readout(matmul_nt(a, b), ws); });
  }});
  cases.push_back({"matmul_tn", [](Rng& rng) {
    auto a = leafu({4, 3}, rng, -1, 1), b = leafu({4, 2}, rng, -1, 1);
    const uint64_t ws = rng.next_u64();
    return finite_diff_check({{"a", a}, {"b", b}},
                             [&, ws] { return readout(matmul_tn(a, b), ws); });
  }});
  cases.push_back({"transpose+reshape", [](Rng& rng) {
    auto a = leafu({3, 4}, rng, -1, 1);
    const uint64_t ws = rng.next_u64();
    return finite_diff_check(
        {{"a", a}}, [&, ws] { return readout(reshape(transpose(a), {2, 6}), ws); });
  }});
  cases.push_back({"slice/concat rows", [](Rng& rng) {
    auto a = leafu({5, 3}, rng, -1, 1);
    const uint64_t ws = rng.next_u64();
    return finite_diff_check({{"a", a}}, [&, ws] {
      auto top = slice_rows(a, 0, 2);
      auto bottom = slice_rows(a, 2, 5);
      return readout(concat_rows({bottom, top}), ws);
    });
  }});
  cases.push_back({"slice/concat cols", [](Rng& rng) {
    auto a = leafu({3, 6}, rng, -1, 1);
    const uint64_t ws = rng.next_u64();
    return finite_diff_check({{"a", a}}, [&, ws] {
      auto left = slice_cols(a, 0, 2);
      auto right = slice_cols(a, 2, 6);
      return readout(concat_cols({right, left}), ws);
    });
  }});
  cases.push_back({"relu", [](Rng& rng) {
    auto a = leafu_margin({4, 4}, rng, 0.05);
    const uint64_t ws = rng.next_u64();
    return finite_diff_check({{"a", a}}, [&, ws] { return readout(relu(a), ws); });
  }});
  cases.push_back({"gelu", [](Rng& rng) {
    auto a = leafu({4, 4}, rng, -2, 2);
    const uint64_t ws = rng.next_u64();
    return finite_diff_check({{"a", a}}, [&, ws] { return readout(gelu(a), ws); });
  }});
  cases.push_back({"dropout(fixed mask)", [](Rng& rng) {
    auto a = leafu({4, 5}, rng, -1, 1);
    const uint64_t mask_seed = rng.next_u64();
    const uint64_t ws = rng.next_u64();
    return finite_diff_check({{"a", a}}, [&, mask_seed, ws] {
      Rng mask_rng(mask_seed);
      return readout(dropout(a, 0.4, true, mask_rng), ws);
    });
  }});
  cases.push_back({"softmax axis1", [](Rng& rng) {
    auto a = leafu({3, 5}, rng, -3, 3);
    const uint64_t ws = rng.next_u64();
    return finite_diff_check({{"a", a}}, [&, ws] { return readout(softmax(a, 1), ws); });
  }});
  cases.push_back({"softmax axis0", [](Rng& rng) {
    auto a = leafu({4, 3}, rng, -3, 3);
    const uint64_t ws = rng.next_u64();
    return finite_diff_check({{"a", a}}, [&, ws] { return readout(softmax(a, 0), ws); });
  }});
  cases.push_back({"layer_norm", [](Rng& rng) {
    auto x = leafu({3, 6}, rng, -2, 2);
    auto g = leafu({6}, rng, 0.5, 1.5);
    auto b = leafu({6}, rng, -0.5, 0.5);
    const uint64_t ws = rng.next_u64();
    return finite_diff_check({{"x", x}, {"g", g}, {"b", b}},
                             [&, ws] { return readout(layer_norm(x, g, b, 1e-5), ws); },
                             1e-6, 1e-2);
  }});
  cases.push_back({"embedding", [](Rng& rng) {
    auto table = leafu({5, 3}, rng, -1, 1);
    std::vector<int> ids{0, 3, 3, 1, 4};
    const uint64_t ws = rng.next_u64();
    return finite_diff_check({{"table", table}},
                             [&, ws, ids] { return readout(embedding(table, ids), ws); });
  }});
  cases.push_back({"conv2d", [](Rng& rng) {
    const size_t ci = 1 + rng.uniform_u64(2), co = 1 + rng.uniform_u64(2);
    const size_t kh = 1 + rng.uniform_u64(3), kw = 1 + rng.uniform_u64(3);
    const size_t sh = 1 + rng.uniform_u64(2), sw = 1 + rng.uniform_u64(2);
    auto x = leafu({ci, 4 + rng.uniform_u64(3), 4 + rng.uniform_u64(3)}, rng, -1, 1);
    auto w = leafu({co, ci, kh, kw}, rng, -1, 1);
    auto b = leafu({co}, rng, -1, 1);
    const uint64_t ws = rng.next_u64();
    return finite_diff_check({{"x", x}, {"w", w}, {"b", b}},
                             [&, ws] { return readout(conv2d(x, w, b, sh, sw), ws); });
  }});
  cases.push_back({"cross_entropy(softmax probs)", [](Rng& rng) {
    auto logits = leafu({4, 6}, rng, -2, 2);
    std::vector<int> ids{1, 5, 0, 3};
    auto targets = smooth_targets(one_hot_rows<double>(ids, 6), 0.4);
    std::vector<uint8_t> mask{1, 1, 1, 0};
    return finite_diff_check({{"logits", logits}}, [&, targets, mask] {
      return masked_cross_entropy(softmax(logits, 1), targets, mask);
    });
  }});
  cases.push_back({"tensor consumed twice", [](Rng& rng) {
    auto a = leafu({3, 3}, rng, -1, 1);
    auto w = leafu({3, 3}, rng, -1, 1);
    return finite_diff_check({{"a", a}, {"w", w}}, [&] {
      // a feeds both branches; gradients must accumulate from both.
      return sum(add(matmul(a, w), mul(a, a)));
    });
  }});

  std::vector<std::string> failures;
  Rng rng(seed);
  for (int t = 0; t < trials; ++t) {
    const auto& c = cases[static_cast<size_t>(t) % cases.size()];
    const auto report = c.run(rng);
    if (!report.passed(tol)) {
      std::ostringstream os;
      os << c.name << " trial " << t << ": max rel err " << report.max_rel_err << " ("
         << report.worst << ")";
      failures.push_back(os.str());
    }
  }
  return failures;
}

}  // namespace lineread
