// Copyright 2026 The tripseg Authors.
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

#ifndef TRIPSEG_MASK_H_
#define TRIPSEG_MASK_H_

#include <cstdint>
#include <vector>

namespace tripseg {

// Uncompressed run-length encoded binary mask. Runs scan the image in
// column-major order and alternate background/foreground, starting with a
// (possibly empty) background run. Canonical form: sum(counts) ==
// height * width, no zero run except the first, no trailing zero.
struct RleMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint32_t> counts;

  std::uint64_t PixelCount() const {
    return static_cast<std::uint64_t>(height) * static_cast<std::uint64_t>(width);
  }
  // Number of foreground pixels (sum of odd-indexed runs).
  std::uint64_t Area() const;
  bool Empty() const { return Area() == 0; }

  friend bool operator==(const RleMask&, const RleMask&) = default;
};

// Throws Error(kValidation) naming the broken invariant.
void ValidateRle(const RleMask& mask);

// Dense binary image stored column-major, matching the RLE scan order.
class Bitmap {
 public:
  Bitmap() = default;
  Bitmap(int height, int width)
      : height_(height),
        width_(width),
        data_(static_cast<std::size_t>(height) * width, 0) {}

  int height() const { return height_; }
  int width() const { return width_; }
  bool at(int row, int col) const { return data_[Index(row, col)] != 0; }
  void set(int row, int col, bool value) { data_[Index(row, col)] = value ? 1 : 0; }
  const std::vector<std::uint8_t>& data() const { return data_; }

  friend bool operator==(const Bitmap&, const Bitmap&) = default;

 private:
  std::size_t Index(int row, int col) const {
    return static_cast<std::size_t>(col) * height_ + row;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> data_;
};

Bitmap RleDecode(const RleMask& mask);
// Always returns canonical form. Throws Error(kInvalidArgument) on an empty
// (0-pixel) bitmap.
RleMask RleEncode(const Bitmap& bitmap);

// Exact pixel counts of a pairwise comparison.
struct MaskOverlap {
  std::uint64_t intersection = 0;
  std::uint64_t union_area = 0;
};

// Merges the two run lists directly; never decodes. Throws
// Error(kInvalidArgument) when the sizes differ.
MaskOverlap ComputeOverlap(const RleMask& a, const RleMask& b);

// |a ∩ b| / |a ∪ b|. One empty operand gives 0.0; two empty operands throw
// Error(kValidation) because ground-truth instances are never empty.
double MaskIou(const RleMask& a, const RleMask& b);

// Axis-aligned box in pixels, top-left origin.
struct BBox {
  double x = 0;
  double y = 0;
  double w = 0;
  double h = 0;

  double Area() const { return w * h; }
  friend bool operator==(const BBox&, const BBox&) = default;
};

// Tight box around the foreground. Throws Error(kInvalidArgument) for an
// empty mask.
BBox MaskToBbox(const RleMask& mask);

double BoxIou(const BBox& a, const BBox& b);

}  // namespace tripseg

#endif  // TRIPSEG_MASK_H_
