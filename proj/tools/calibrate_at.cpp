// Draws random throttle/brake profiles for the transmission model and prints
// the 60th percentiles of the peak speed and peak engine speed as JSON. The
// output is committed as tests/data/at_thresholds.json.
#include "stlgp/models.hpp"
#include "stlgp/parameterization.hpp"
#include "stlgp/rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <iostream>

using namespace stlgp;

int main() {
  constexpr int kSamples = 1000;
  constexpr double kQuantile = 0.6;
  constexpr std::uint64_t kSeed = 20240601;
  const Counts n{3, 3};

  TransmissionSimulator at;
  const InputSpec spec = at.default_input_spec();
  const double T = spec.horizon, h = at.default_step();
  const TimeGrid grid = TimeGrid::uniform(T, h);
  const std::size_t dim = dimension(spec, ParamMode::Fixed, n);

  Rng rng(kSeed);
  std::vector<double> vmax, wmax;
  for (int s = 0; s < kSamples; ++s) {
    std::vector<double> x(dim);
    for (double& c : x) c = uniform01(rng);
    const DecodedInput in = decode(spec, ParamMode::Fixed, n, x, grid);
    const Trace tr = at.simulate(in.x0, in.input, T, h);
    double v = 0.0, w = 0.0;
    for (std::size_t i = 0; i < tr.grid().size(); ++i) {
      v = std::max(v, tr.value(0, i));
      w = std::max(w, tr.value(1, i));
    }
    vmax.push_back(v);
    wmax.push_back(w);
  }
  auto quantile = [&](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[static_cast<std::size_t>(kQuantile * (v.size() - 1))];
  };
  nlohmann::json out = {{"samples", kSamples},
                        {"quantile", kQuantile},
                        {"seed", kSeed},
                        {"parameterization", "fixed"},
                        {"counts", n},
                        {"vbar", quantile(vmax)},
                        {"wbar", quantile(wmax)}};
  std::cout << out.dump(2) << "\n";
}
