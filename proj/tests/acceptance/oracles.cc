#include "acceptance/oracles.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <regex>
#include <string>

namespace tvt::oracle {

Tensor NaiveMatMul(const Tensor& a, const Tensor& b) {
  const int64_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out({m, n});
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (int64_t p = 0; p < k; ++p) s += static_cast<double>(a.at({i, p})) * b.at({p, j});
      out[i * n + j] = static_cast<float>(s);
    }
  }
  return out;
}

Tensor NaiveConv2d(const Tensor& x, const Tensor& w, int stride, int pad, int groups) {
  const int64_t h = x.dim(1), wd = x.dim(2);
  const int64_t co = w.dim(0), cg = w.dim(1), kh = w.dim(2), kw = w.dim(3);
  const int64_t per_group = co / groups;
  const int64_t oh = (h + 2 * pad - kh) / stride + 1, ow = (wd + 2 * pad - kw) / stride + 1;
  Tensor out({co, oh, ow});
  for (int64_t o = 0; o < co; ++o) {
    const int64_t first = (o / per_group) * cg;
    for (int64_t y = 0; y < oh; ++y) {
      for (int64_t z = 0; z < ow; ++z) {
        double s = 0.0;
        for (int64_t c = 0; c < cg; ++c) {
          for (int64_t u = 0; u < kh; ++u) {
            for (int64_t v = 0; v < kw; ++v) {
              const int64_t iy = y * stride - pad + u, iz = z * stride - pad + v;
              if (iy < 0 || iy >= h || iz < 0 || iz >= wd) continue;
              s += static_cast<double>(x.at({first + c, iy, iz})) * w.at({o, c, u, v});
            }
          }
        }
        out[(o * oh + y) * ow + z] = static_cast<float>(s);
      }
    }
  }
  return out;
}

Tensor NaiveBilinear(const Tensor& x, int64_t out_h, int64_t out_w) {
  const int64_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  Tensor out({c, out_h, out_w});
  auto source = [](int64_t i, int64_t in, int64_t outn) {
    const double s = (static_cast<double>(i) + 0.5) * static_cast<double>(in) / outn - 0.5;
    return s < 0.0 ? 0.0 : s;
  };
  for (int64_t ch = 0; ch < c; ++ch) {
    for (int64_t i = 0; i < out_h; ++i) {
      for (int64_t j = 0; j < out_w; ++j) {
        const double sy = source(i, h, out_h), sx = source(j, w, out_w);
        const int64_t y0 = std::min<int64_t>(static_cast<int64_t>(sy), h - 1);
        const int64_t x0 = std::min<int64_t>(static_cast<int64_t>(sx), w - 1);
        const int64_t y1 = std::min(y0 + 1, h - 1), x1 = std::min(x0 + 1, w - 1);
        const double ly = sy - y0, lx = sx - x0;
        const double v = (1 - ly) * ((1 - lx) * x.at({ch, y0, x0}) + lx * x.at({ch, y0, x1})) +
                         ly * ((1 - lx) * x.at({ch, y1, x0}) + lx * x.at({ch, y1, x1}));
        out[(ch * out_h + i) * out_w + j] = static_cast<float>(v);
      }
    }
  }
  return out;
}

double FlattenedGroupNorm(const StudentModel& m) {
  static const std::regex kRole(
      R"(^(patch_embed|head|blocks\.\d+|pools\.\d+)\.(?:attn\.qkv\.|attn\.proj\.|mlp\.fc1\.|mlp\.fc2\.|conv\.|fc\.)?weight$)");
  std::map<std::string, std::vector<double>> groups;
  for (const auto& [name, t] : m.weights.entries()) {
    std::smatch match;
    if (!std::regex_match(name, match, kRole)) continue;
    auto& flat = groups[match[1].str()];
    for (float v : t.data()) flat.push_back(v);
  }
  double total = 0.0;
  for (const auto& [key, flat] : groups) {
    double s = 0.0;
    for (double v : flat) s += v * v;
    total += std::sqrt(s);
  }
  return total;
}

double PairCountingTau(const std::vector<double>& x, const std::vector<double>& y) {
  const int64_t n = static_cast<int64_t>(x.size());
  int64_t concordant = 0, discordant = 0, only_x_tied = 0, only_y_tied = 0;
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t j = i + 1; j < n; ++j) {
      const bool tx = x[i] == x[j], ty = y[i] == y[j];
      if (tx && ty) continue;
      if (tx) {
        ++only_x_tied;
      } else if (ty) {
        ++only_y_tied;
      } else if ((x[i] < x[j]) == (y[i] < y[j])) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const int64_t untied_x = concordant + discordant + only_y_tied;
  const int64_t untied_y = concordant + discordant + only_x_tied;
  return static_cast<double>(concordant - discordant) /
         std::sqrt(static_cast<double>(untied_x) * static_cast<double>(untied_y));
}

}  // namespace tvt::oracle
