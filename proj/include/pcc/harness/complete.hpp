#pragma once

#include <filesystem>

#include "pcc/model/network.hpp"

namespace pcc::harness {

struct CompleteOptions {
  std::size_t min_points = 256;
};

// Normalizes with the input's own parameters, fits the input to the
// network size (FPS down, or repetition up), runs the network and maps the
// completed cloud back to the input frame. The partial rows of the output
// are the original input points, bit for bit. Throws TooFewPoints.
PointCloud complete_cloud(const model::CompletionNet<float>& net,
                          const PointCloud& input,
                          const CompleteOptions& opts = {});

void complete_file(const std::filesystem::path& ckpt,
                   const std::filesystem::path& in,
                   const std::filesystem::path& out,
                   const CompleteOptions& opts = {});

}  // namespace pcc::harness
