#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mimic/post/postprocess.hpp"

namespace mimic::post {

namespace {

// minimal KD-tree over row vectors with radius queries
class KdTree {
 public:
  explicit KdTree(const Eigen::MatrixXd& pts) : pts_(pts) {
    index_.resize(static_cast<std::size_t>(pts.rows()));
    std::iota(index_.begin(), index_.end(), 0);
    root_ = build(0, static_cast<int>(index_.size()), 0);
  }

  // indices of points within radius of pts.row(query)
  void radius_search(Eigen::Index query, double radius,
                     std::vector<Eigen::Index>& out) const {
    out.clear();
    search(root_, pts_.row(query), radius, out);
  }

 private:
  struct Node {
    int index = -1;  // into index_
    int left = -1, right = -1;
    int axis = 0;
  };

  int build(int lo, int hi, int depth) {
    if (lo >= hi) return -1;
    const int axis = depth % static_cast<int>(pts_.cols());
    const int mid = (lo + hi) / 2;
    std::nth_element(index_.begin() + lo, index_.begin() + mid,
                     index_.begin() + hi, [&](Eigen::Index a, Eigen::Index b) {
                       return pts_(a, axis) < pts_(b, axis);
                     });
    Node n;
    n.index = mid;
    n.axis = axis;
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(n);
    nodes_[static_cast<std::size_t>(id)].left = build(lo, mid, depth + 1);
    nodes_[static_cast<std::size_t>(id)].right = build(mid + 1, hi, depth + 1);
    return id;
  }

  void search(int node, const Eigen::RowVectorXd& q, double radius,
              std::vector<Eigen::Index>& out) const {
    if (node < 0) return;
    const Node& n = nodes_[static_cast<std::size_t>(node)];
    const Eigen::Index p = index_[static_cast<std::size_t>(n.index)];
    if ((pts_.row(p) - q).norm() <= radius) out.push_back(p);
    const double diff = q(n.axis) - pts_(p, n.axis);
    search(diff <= 0 ? n.left : n.right, q, radius, out);
    if (std::abs(diff) <= radius)
      search(diff <= 0 ? n.right : n.left, q, radius, out);
  }

  const Eigen::MatrixXd& pts_;
  std::vector<Eigen::Index> index_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace

std::optional<std::pair<int, int>> extract_cycle(const Eigen::MatrixXd& joints,
                                                 double eps) {
  if (eps <= 0.0) throw std::invalid_argument("extract_cycle: eps must be > 0");
  const Eigen::Index n = joints.rows();
  if (n < 5) throw std::invalid_argument("extract_cycle: need at least 5 frames");
  const double min_gap = 0.2 * static_cast<double>(n);

  KdTree tree(joints);
  // distances to the start frame allow cheap triangle-inequality pruning
  Eigen::VectorXd d0(n);
  for (Eigen::Index i = 0; i < n; ++i) d0(i) = (joints.row(i) - joints.row(0)).norm();

  std::vector<Eigen::Index> hits;
  for (Eigen::Index i = 0; i < n; ++i) {
    tree.radius_search(i, eps, hits);
    Eigen::Index best_j = -1;
    for (Eigen::Index j : hits) {
      if (static_cast<double>(j - i) < min_gap) continue;
      if (std::abs(d0(j) - d0(i)) > eps) continue;  // pruned (redundant, cheap)
      if (best_j < 0 || j < best_j) best_j = j;
    }
    if (best_j >= 0)
      return std::make_pair(static_cast<int>(i), static_cast<int>(best_j));
  }
  return std::nullopt;
}

}  // namespace mimic::post
