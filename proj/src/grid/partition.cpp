#include "scratchsim/grid/partition.hpp"

#include <algorithm>
#include <cmath>

#include "scratchsim/simd/kernels.hpp"

namespace scratchsim::grid {

bool Box::contains(const Vec& q, int dim) const {
    for (int a = 0; a < dim; ++a)
        if (q[a] < lo[a] || q[a] > hi[a]) return false;
    return true;
}

double Box::depth(const Vec& q, int dim) const {
    double d = std::numeric_limits<double>::infinity();
    for (int a = 0; a < dim; ++a) d = std::min({d, q[a] - lo[a], hi[a] - q[a]});
    return d;
}

bool Region::contains(const Vec& q, int dim) const {
    return std::any_of(boxes.begin(), boxes.end(), [&](const Box& b) { return b.contains(q, dim); });
}

RegionPartition::RegionPartition(int dim, Space space, std::vector<Region> regions)
    : dim_(dim), space_(space), regions_(std::move(regions)) {
    if (dim != 2 && dim != 3) throw DomainError("partition dimension must be 2 or 3");
    if (regions_.size() < 2) throw DomainError("a partition needs at least two regions");
    for (const auto& r : regions_)
        if (r.boxes.empty()) throw DomainError("every region needs at least one box");
}

RegionPartition RegionPartition::half_spaces(int dim, Space space, int axis, double at) {
    if (axis < 0 || axis >= dim) throw DomainError("half-space axis out of range");
    Box below, above;
    below.hi[axis] = at;
    above.lo[axis] = at;
    return RegionPartition(dim, space, {Region{{below}}, Region{{above}}});
}

RegionPartition RegionPartition::orthants(int dim, Space space, const Vec& center) {
    std::vector<Region> regions;
    for (int bits = 0; bits < (1 << dim); ++bits) {
        Box b;
        for (int a = 0; a < dim; ++a) {
            const bool upper = (bits >> (dim - 1 - a)) & 1;
            if (upper)
                b.lo[a] = center[a];
            else
                b.hi[a] = center[a];
        }
        regions.push_back(Region{{b}});
    }
    return RegionPartition(dim, space, std::move(regions));
}

const Region& RegionPartition::region(int label) const {
    if (label < 1 || label > count()) throw DomainError("unknown region label " + std::to_string(label));
    return regions_[label - 1];
}

int RegionPartition::label_of(const Vec& q) const {
    for (int k = 0; k < count(); ++k)
        if (regions_[k].contains(q, dim_)) return k + 1;
    return 0;
}

std::vector<std::int32_t> RegionPartition::label_grid(const SpatialGrid& grid) const {
    if (grid.dim() != dim_) throw DomainError("partition and grid dimensions differ");
    if (grid.space() != space_) throw DomainError("partition and grid live in different spaces");
    std::vector<std::int32_t> labels(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) labels[i] = label_of(grid.point(i)) - 1;
    return labels;
}

void RegionPartition::validate(const SpatialGrid& grid) const {
    const auto labels = label_grid(grid);
    if (std::any_of(labels.begin(), labels.end(), [](std::int32_t l) { return l < 0; }))
        throw DomainError("partition does not cover every grid point");
    for (int k = 0; k < count(); ++k) {
        bool interior = false;
        for (std::size_t i = 0; i < grid.size() && !interior; ++i) {
            if (labels[i] != k) continue;
            const Vec q = grid.point(i);
            for (const auto& b : regions_[k].boxes)
                if (b.depth(q, dim_) > 0.0) interior = true;
        }
        if (!interior)
            throw DomainError("region " + std::to_string(k + 1) + " has no interior grid point");
    }
}

std::vector<double> integrate_regions(const ScalarField& field, const RegionPartition& partition) {
    const auto labels = partition.label_grid(field.grid());
    std::vector<double> sums(partition.count(), 0.0);
    simd::label_sums(field.values(), labels, sums);
    const double vol = field.grid().cell_volume();
    for (auto& s : sums) s *= vol;
    return sums;
}

double integrate_region(const ScalarField& field, const RegionPartition& partition, int label) {
    if (label < 1 || label > partition.count())
        throw DomainError("unknown region label " + std::to_string(label));
    return integrate_regions(field, partition)[label - 1];
}

}  // namespace scratchsim::grid
