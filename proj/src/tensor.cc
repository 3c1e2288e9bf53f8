// Copyright 2026 The tvtnas Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tvt/tensor.h"

#include <algorithm>
#include <sstream>

#include "tvt/error.h"

namespace tvt {

const char* ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDimension: return "dimension";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kInfeasibleBudget: return "infeasible_budget";
    case ErrorKind::kMissingTensor: return "missing_tensor";
    case ErrorKind::kOracleMiss: return "oracle_miss";
    case ErrorKind::kDegenerate: return "degenerate";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

int64_t NumElements(const Shape& shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

std::string ShapeString(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

void CheckShape(const Shape& shape) {
  for (int64_t d : shape) {
    if (d < 1) {
      throw Error(ErrorKind::kDimension,
                  "tensor dimensions must be positive, got " + ShapeString(shape));
    }
  }
}

}  // namespace

Tensor::Tensor(Shape shape, float fill) : shape_(std::move(shape)) {
  CheckShape(shape_);
  data_.assign(static_cast<size_t>(NumElements(shape_)), fill);
}

Tensor::Tensor(Shape shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  CheckShape(shape_);
  if (NumElements(shape_) != static_cast<int64_t>(data_.size())) {
    throw Error(ErrorKind::kDimension,
                "shape " + ShapeString(shape_) + " does not match " +
                    std::to_string(data_.size()) + " elements");
  }
}

Tensor Tensor::FromRows(std::initializer_list<std::initializer_list<float>> rows) {
  const int64_t r = static_cast<int64_t>(rows.size());
  const int64_t c = r ? static_cast<int64_t>(rows.begin()->size()) : 0;
  std::vector<float> data;
  data.reserve(static_cast<size_t>(r * c));
  for (const auto& row : rows) {
    if (static_cast<int64_t>(row.size()) != c) {
      throw Error(ErrorKind::kDimension, "ragged rows in FromRows");
    }
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(data));
}

int64_t Tensor::dim(int axis) const {
  if (axis < 0) axis += rank();
  if (axis < 0 || axis >= rank()) {
    throw Error(ErrorKind::kDimension, "axis out of range for shape " + ShapeString(shape_));
  }
  return shape_[static_cast<size_t>(axis)];
}

float Tensor::at(std::initializer_list<int64_t> index) const {
  if (static_cast<int>(index.size()) != rank()) {
    throw Error(ErrorKind::kDimension, "index rank mismatch for shape " + ShapeString(shape_));
  }
  int64_t flat = 0;
  size_t axis = 0;
  for (int64_t i : index) {
    flat = flat * shape_[axis] + i;
    ++axis;
  }
  return data_[static_cast<size_t>(flat)];
}

Tensor Tensor::Reshape(Shape shape) const {
  if (NumElements(shape) != size()) {
    throw Error(ErrorKind::kDimension,
                "cannot reshape " + ShapeString(shape_) + " to " + ShapeString(shape));
  }
  return Tensor(std::move(shape), data_);
}

Tensor Tensor::Slice(int64_t i) const {
  if (rank() < 2 || i < 0 || i >= shape_[0]) {
    throw Error(ErrorKind::kDimension, "bad slice of " + ShapeString(shape_));
  }
  Shape inner(shape_.begin() + 1, shape_.end());
  const int64_t n = NumElements(inner);
  auto first = data_.begin() + i * n;
  return Tensor(std::move(inner), std::vector<float>(first, first + n));
}

Tensor Stack(const std::vector<Tensor>& items) {
  if (items.empty()) throw Error(ErrorKind::kDimension, "cannot stack zero tensors");
  const Shape& inner = items.front().shape();
  Shape shape{static_cast<int64_t>(items.size())};
  shape.insert(shape.end(), inner.begin(), inner.end());
  std::vector<float> data;
  data.reserve(static_cast<size_t>(NumElements(shape)));
  for (const Tensor& t : items) {
    if (t.shape() != inner) {
      throw Error(ErrorKind::kDimension, "stack shape mismatch: " + ShapeString(inner) +
                                             " vs " + ShapeString(t.shape()));
    }
    data.insert(data.end(), t.values().begin(), t.values().end());
  }
  return Tensor(std::move(shape), std::move(data));
}

}  // namespace tvt
