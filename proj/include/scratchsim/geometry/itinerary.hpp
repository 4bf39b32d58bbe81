#pragma once

#include <vector>

namespace scratchsim::geometry {

/// region[l][j]: 1-based region label of particle l at checkpoint j.
struct Assignment {
    int particles = 0;
    int checkpoints = 0;
    std::vector<std::vector<int>> region;
};

/// counts[j][k] is the number of particles in region k + 1 at checkpoint j.
/// Greedy: a particle keeps its previous region while that region still has
/// room, the rest fill the remaining slots in label order.
Assignment assign_itineraries(const std::vector<std::vector<int>>& counts, int N);

/// Per-checkpoint histogram of an assignment, same layout as the counts.
std::vector<std::vector<int>> recount(const Assignment& a, int regions);

}  // namespace scratchsim::geometry
