#include "pcc/harness/loss.hpp"

#include "pcc/diff/ops.hpp"
#include "pcc/error.hpp"

namespace pcc::harness {

template <class T>
diff::Var<T> completion_loss(diff::Var<T> ps, diff::Var<T> pc,
                             diff::Var<T> pgt) {
  if (ps.size() == 0 || pc.size() == 0 || pgt.size() == 0)
    fail(ErrorKind::EmptyCloud, "loss needs non-empty clouds");
  return diff::add(diff::chamfer_l2(ps, pgt), diff::chamfer_l2(pc, pgt));
}

double completion_loss(const PointCloud& ps, const PointCloud& pc,
                       const PointCloud& pgt) {
  return chamfer_l2(ps, pgt) + chamfer_l2(pc, pgt);
}

template diff::Var<float> completion_loss(diff::Var<float>, diff::Var<float>,
                                          diff::Var<float>);
template diff::Var<double> completion_loss(diff::Var<double>, diff::Var<double>,
                                           diff::Var<double>);

}  // namespace pcc::harness
