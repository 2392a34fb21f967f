#include "flagdyn/point_index.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace flagdyn {

namespace {
constexpr int32_t kLeafSize = 8;
}

PointIndex::PointIndex(int dim, std::vector<double> coords, std::vector<int32_t> owners)
    : dim_(dim), coords_(std::move(coords)), owners_(std::move(owners)) {
    if (dim_ <= 0 || coords_.size() != owners_.size() * static_cast<size_t>(dim_)) {
        throw std::invalid_argument("point index: coordinate array does not match owners");
    }
    order_.resize(owners_.size());
    std::iota(order_.begin(), order_.end(), 0);
    if (!order_.empty()) {
        nodes_.reserve(2 * order_.size() / kLeafSize + 2);
        build(0, static_cast<int32_t>(order_.size()));
    }
}

int32_t PointIndex::build(int32_t begin, int32_t end) {
    const auto id = static_cast<int32_t>(nodes_.size());
    nodes_.push_back(Node{begin, end, -1, -1, 0, 0.0});
    if (end - begin <= kLeafSize) {
        return id;
    }
    int32_t axis = 0;
    double widest = -1.0;
    for (int a = 0; a < dim_; ++a) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (int32_t i = begin; i < end; ++i) {
            const double v = coords_[static_cast<size_t>(order_[static_cast<size_t>(i)]) * dim_ + a];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi - lo > widest) {
            widest = hi - lo;
            axis = a;
        }
    }
    const int32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int32_t x, int32_t y) {
                         const double vx = coords_[static_cast<size_t>(x) * dim_ + axis];
                         const double vy = coords_[static_cast<size_t>(y) * dim_ + axis];
                         return vx < vy || (vx == vy && x < y);
                     });
    const double split = coords_[static_cast<size_t>(order_[static_cast<size_t>(mid)]) * dim_ + axis];
    const int32_t left = build(begin, mid);
    const int32_t right = build(mid, end);
    Node& node = nodes_[static_cast<size_t>(id)];
    node.left = left;
    node.right = right;
    node.axis = axis;
    node.split = split;
    return id;
}

void PointIndex::search(int32_t node_id, const double* q, int32_t exclude, Hit& best) const {
    const Node& node = nodes_[static_cast<size_t>(node_id)];
    if (node.left < 0) {
        for (int32_t i = node.begin; i < node.end; ++i) {
            const int32_t slot = order_[static_cast<size_t>(i)];
            if (exclude >= 0 && owners_[static_cast<size_t>(slot)] == exclude) {
                continue;
            }
            const double* p = &coords_[static_cast<size_t>(slot) * dim_];
            double d2 = 0.0;
            for (int a = 0; a < dim_ && d2 <= best.dist2; ++a) {
                const double t = p[a] - q[a];
                d2 += t * t;
            }
            // ties go to the lower slot so results do not depend on tree shape
            if (d2 < best.dist2 || (d2 == best.dist2 && slot < best.slot)) {
                best.dist2 = d2;
                best.slot = slot;
            }
        }
        return;
    }
    const double diff = q[node.axis] - node.split;
    const int32_t near = diff < 0.0 ? node.left : node.right;
    const int32_t far = diff < 0.0 ? node.right : node.left;
    search(near, q, exclude, best);
    if (diff * diff <= best.dist2) {
        search(far, q, exclude, best);
    }
}

PointIndex::Hit PointIndex::nearest(const double* query, int32_t exclude_owner) const {
    Hit best{-1, std::numeric_limits<double>::infinity()};
    if (!nodes_.empty()) {
        search(0, query, exclude_owner, best);
    }
    return best;
}

}  // namespace flagdyn
