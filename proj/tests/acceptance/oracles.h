#pragma once

#include <cstdint>
#include <vector>

#include "tvt/student.h"
#include "tvt/tensor.h"

namespace tvt::oracle {

// Direct triple loop, double accumulation.
Tensor NaiveMatMul(const Tensor& a, const Tensor& b);

// Direct sliding-window cross-correlation of [C x H x W] with zero padding.
Tensor NaiveConv2d(const Tensor& x, const Tensor& w, int stride, int pad, int groups);

// Half-pixel bilinear interpolation of [C x H x W], evaluated per output pixel.
Tensor NaiveBilinear(const Tensor& x, int64_t out_h, int64_t out_w);

// Sum over weight groups of the L2 norm of all group entries flattened into
// one vector. Groups are found from an explicit list of layer roles.
double FlattenedGroupNorm(const StudentModel& m);

// Tau-b by explicit enumeration of every pair.
double PairCountingTau(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace tvt::oracle
