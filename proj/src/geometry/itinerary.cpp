#include "scratchsim/geometry/itinerary.hpp"

#include <numeric>
#include <string>

#include "scratchsim/error.hpp"

namespace scratchsim::geometry {

Assignment assign_itineraries(const std::vector<std::vector<int>>& counts, int N) {
    if (N <= 0) throw DomainError("particle count must be positive");
    if (counts.empty()) throw DomainError("itinerary needs at least one checkpoint");
    const std::size_t n = counts.front().size();
    for (std::size_t j = 0; j < counts.size(); ++j) {
        if (counts[j].size() != n || n == 0) throw DomainError("every checkpoint needs the same number of regions");
        int total = 0;
        for (int c : counts[j]) {
            if (c < 0) throw DomainError("region counts must be non-negative");
            total += c;
        }
        if (total != N)
            throw DomainError("counts at checkpoint " + std::to_string(j) + " sum to " + std::to_string(total) +
                              ", expected " + std::to_string(N));
    }

    Assignment a;
    a.particles = N;
    a.checkpoints = static_cast<int>(counts.size());
    a.region.assign(N, std::vector<int>(counts.size(), 0));
    for (std::size_t j = 0; j < counts.size(); ++j) {
        std::vector<int> room = counts[j];
        if (j > 0)
            for (int l = 0; l < N; ++l) {
                const int prev = a.region[l][j - 1] - 1;
                if (room[prev] > 0) {
                    a.region[l][j] = prev + 1;
                    --room[prev];
                }
            }
        std::size_t k = 0;
        for (int l = 0; l < N; ++l) {
            if (a.region[l][j] != 0) continue;
            while (room[k] == 0) ++k;
            a.region[l][j] = static_cast<int>(k) + 1;
            --room[k];
        }
    }
    return a;
}

std::vector<std::vector<int>> recount(const Assignment& a, int regions) {
    std::vector<std::vector<int>> h(a.checkpoints, std::vector<int>(regions, 0));
    for (const auto& row : a.region)
        for (int j = 0; j < a.checkpoints; ++j) {
            const int k = row[j];
            if (k < 1 || k > regions) throw DomainError("assignment label out of range");
            ++h[j][k - 1];
        }
    return h;
}

}  // namespace scratchsim::geometry
