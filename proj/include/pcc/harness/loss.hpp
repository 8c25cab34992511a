#pragma once

#include "pcc/diff/tensor.hpp"
#include "pcc/geom/point_cloud.hpp"

namespace pcc::harness {

// CD(PS, PGT) + CD(PC, PGT), unweighted. Throws EmptyCloud.
template <class T>
diff::Var<T> completion_loss(diff::Var<T> ps, diff::Var<T> pc,
                             diff::Var<T> pgt);

double completion_loss(const PointCloud& ps, const PointCloud& pc,
                       const PointCloud& pgt);

}  // namespace pcc::harness
