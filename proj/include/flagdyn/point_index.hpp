#pragma once

// Static kd-tree over points in R^d for nearest-neighbour queries. Each
// stored point carries an owner id so that several embeddings of one sample
// (e.g. +-q for a quaternion) can share a label.

#include <cstdint>
#include <vector>

namespace flagdyn {

class PointIndex {
public:
    PointIndex() = default;
    /// coords holds owners.size() points of dimension dim, packed row by row.
    PointIndex(int dim, std::vector<double> coords, std::vector<int32_t> owners);

    struct Hit {
        int32_t slot = -1;  ///< index of the stored point
        double dist2 = 0.0;
    };

    /// Nearest stored point whose owner differs from exclude_owner (pass -1 to
    /// allow all). slot is -1 when the index is empty.
    [[nodiscard]] Hit nearest(const double* query, int32_t exclude_owner = -1) const;

    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] size_t size() const noexcept { return owners_.size(); }
    [[nodiscard]] int32_t owner(int32_t slot) const { return owners_[static_cast<size_t>(slot)]; }
    [[nodiscard]] const double* point(int32_t slot) const { return &coords_[static_cast<size_t>(slot) * dim_]; }

private:
    struct Node {
        int32_t begin, end;      // range in order_
        int32_t left, right;     // children, -1 for leaves
        int32_t axis;
        double split;
    };

    int32_t build(int32_t begin, int32_t end);
    void search(int32_t node, const double* q, int32_t exclude, Hit& best) const;

    int dim_ = 0;
    std::vector<double> coords_;
    std::vector<int32_t> owners_;
    std::vector<int32_t> order_;
    std::vector<Node> nodes_;
};

}  // namespace flagdyn
