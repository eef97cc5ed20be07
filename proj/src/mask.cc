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

#include "tripseg/mask.h"

#include <algorithm>
#include <string>

#include "tripseg/error.h"

namespace tripseg {

std::uint64_t RleMask::Area() const {
  std::uint64_t area = 0;
  for (std::size_t i = 1; i < counts.size(); i += 2) area += counts[i];
  return area;
}

void ValidateRle(const RleMask& mask) {
  if (mask.height <= 0 || mask.width <= 0) {
    Fail(ErrorKind::kValidation,
         "RLE size must be positive, got [" + std::to_string(mask.height) +
             "," + std::to_string(mask.width) + "]");
  }
  if (mask.counts.empty()) Fail(ErrorKind::kValidation, "RLE has no runs");
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < mask.counts.size(); ++i) {
    if (i > 0 && mask.counts[i] == 0) {
      Fail(ErrorKind::kValidation,
           "RLE is not canonical: zero-length run at index " + std::to_string(i));
    }
    total += mask.counts[i];
  }
  if (total != mask.PixelCount()) {
    Fail(ErrorKind::kValidation,
         "RLE run sum " + std::to_string(total) + " != height*width " +
             std::to_string(mask.PixelCount()));
  }
}

Bitmap RleDecode(const RleMask& mask) {
  ValidateRle(mask);
  Bitmap bitmap(mask.height, mask.width);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < mask.counts.size(); ++i) {
    const std::size_t run = mask.counts[i];
    if (i % 2 == 1) {
      for (std::size_t p = pos; p < pos + run; ++p) {
        bitmap.set(static_cast<int>(p % mask.height),
                   static_cast<int>(p / mask.height), true);
      }
    }
    pos += run;
  }
  return bitmap;
}

RleMask RleEncode(const Bitmap& bitmap) {
  if (bitmap.height() <= 0 || bitmap.width() <= 0) {
    Fail(ErrorKind::kInvalidArgument, "cannot encode an empty bitmap");
  }
  RleMask mask{bitmap.height(), bitmap.width(), {}};
  std::uint8_t current = 0;
  std::uint32_t run = 0;
  for (std::uint8_t v : bitmap.data()) {
    const std::uint8_t bit = v != 0 ? 1 : 0;
    if (bit != current) {
      mask.counts.push_back(run);
      run = 0;
      current = bit;
    }
    ++run;
  }
  mask.counts.push_back(run);
  return mask;
}

MaskOverlap ComputeOverlap(const RleMask& a, const RleMask& b) {
  if (a.height != b.height || a.width != b.width) {
    Fail(ErrorKind::kInvalidArgument,
         "mask size mismatch: [" + std::to_string(a.height) + "," +
             std::to_string(a.width) + "] vs [" + std::to_string(b.height) +
             "," + std::to_string(b.width) + "]");
  }
  MaskOverlap overlap;
  const std::uint64_t area_a = a.Area();
  const std::uint64_t area_b = b.Area();
  if (area_a != 0 && area_b != 0) {
    // Walk both run lists in lockstep; each step consumes the shorter of the
    // two current runs.
    std::size_t i = 0, j = 0;
    std::uint64_t left_a = a.counts[0], left_b = b.counts[0];
    while (i < a.counts.size() && j < b.counts.size()) {
      const std::uint64_t step = std::min(left_a, left_b);
      if ((i & 1) && (j & 1)) overlap.intersection += step;
      left_a -= step;
      left_b -= step;
      while (left_a == 0 && ++i < a.counts.size()) left_a = a.counts[i];
      while (left_b == 0 && ++j < b.counts.size()) left_b = b.counts[j];
    }
  }
  overlap.union_area = area_a + area_b - overlap.intersection;
  return overlap;
}

double MaskIou(const RleMask& a, const RleMask& b) {
  const MaskOverlap overlap = ComputeOverlap(a, b);
  if (overlap.union_area == 0) {
    Fail(ErrorKind::kValidation, "IoU of two empty masks is undefined");
  }
  return static_cast<double>(overlap.intersection) /
         static_cast<double>(overlap.union_area);
}

BBox MaskToBbox(const RleMask& mask) {
  const std::uint64_t h = static_cast<std::uint64_t>(mask.height);
  std::uint64_t min_row = h, max_row = 0;
  std::uint64_t min_col = static_cast<std::uint64_t>(mask.width), max_col = 0;
  bool any = false;
  std::uint64_t pos = 0;
  for (std::size_t i = 0; i < mask.counts.size(); ++i) {
    const std::uint64_t run = mask.counts[i];
    if ((i & 1) && run > 0) {
      const std::uint64_t last = pos + run - 1;
      const std::uint64_t c0 = pos / h, c1 = last / h;
      std::uint64_t r0 = pos % h, r1 = last % h;
      if (c1 > c0) {
        // The run wraps a column boundary, so it touches both the bottom
        // and the top row.
        r0 = 0;
        r1 = h - 1;
      }
      min_row = std::min(min_row, r0);
      max_row = std::max(max_row, r1);
      min_col = std::min(min_col, c0);
      max_col = std::max(max_col, c1);
      any = true;
    }
    pos += run;
  }
  if (!any) Fail(ErrorKind::kInvalidArgument, "cannot take the box of an empty mask");
  return BBox{static_cast<double>(min_col), static_cast<double>(min_row),
              static_cast<double>(max_col - min_col + 1),
              static_cast<double>(max_row - min_row + 1)};
}

double BoxIou(const BBox& a, const BBox& b) {
  const double iw = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
  const double ih = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.Area() + b.Area() - inter;
  return uni > 0 ? inter / uni : 0.0;
}

}  // namespace tripseg
