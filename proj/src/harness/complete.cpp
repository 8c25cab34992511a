#include "pcc/harness/complete.hpp"

#include "pcc/data/cloud_io.hpp"
#include "pcc/error.hpp"
#include "pcc/harness/train.hpp"

namespace pcc::harness {

PointCloud complete_cloud(const model::CompletionNet<float>& net,
                          const PointCloud& input, const CompleteOptions& opts) {
  const std::size_t n = net.config().input_points;
  const std::size_t min_points = std::max<std::size_t>(opts.min_points, 1);
  if (input.size() < min_points)
    fail(ErrorKind::TooFewPoints, "input has " + std::to_string(input.size()) +
                                      " points, need at least " +
                                      std::to_string(min_points));
  const NormParams np = compute_norm_params(input);
  const PointCloud normalized = normalize(input, np);

  std::vector<std::uint32_t> pick(n);
  if (input.size() > n) {
    pick = fps(normalized, n);
  } else {
    for (std::size_t i = 0; i < n; ++i)
      pick[i] = static_cast<std::uint32_t>(i % input.size());
  }

  diff::Tape<float> tape(diff::Mode::Eval, false);
  const auto r = net.forward(tape, normalized.select(pick));
  const PointCloud missing = denormalize(model::to_cloud(r.out[0].missing.value()), np);

  std::vector<Vec3> out;
  out.reserve(n + missing.size());
  for (const auto i : pick) out.push_back(input[i]);
  for (const auto& p : missing.points()) out.push_back(p);
  return PointCloud(std::move(out));
}

void complete_file(const std::filesystem::path& ckpt, const std::filesystem::path& in,
                   const std::filesystem::path& out, const CompleteOptions& opts) {
  const auto net = load_network(diff::read_checkpoint(ckpt));
  data::write_cloud(out, complete_cloud(*net, data::read_cloud(in), opts));
}

}  // namespace pcc::harness
