// Regenerates the shipped diffusion observation set (seed 0, sigma_obs 0.1).
// Usage: gen_diffusion_observations [cpp|csv]
#include <cstdio>
#include <cstring>

#include "gsvgd/model.hpp"

int main(int argc, char** argv) {
  const bool csv = argc > 1 && std::strcmp(argv[1], "csv") == 0;
  gsvgd::Rng rng(0);
  const auto y = gsvgd::model::diffusion_generate_observations(rng, 0.1).second;
  if (csv) {
    std::printf("index,grid_index,time,y\n");
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const auto g = gsvgd::model::ConditionedDiffusionModel::observation_grid_index(i + 1);
      std::printf("%ld,%ld,%.2f,%.17g\n", static_cast<long>(i + 1), static_cast<long>(g), 0.01 * g, y(i));
    }
    return 0;
  }
  for (Eigen::Index i = 0; i < y.size(); ++i) std::printf("    %.17g,\n", y(i));
  return 0;
}
