// Sweeps the q-plate retardation and prints how the entanglement of the two
// OPO beams is shared among the four output modes.

#include <cmath>
#include <cstdio>
#include <numbers>

#include "cvq/cvq.hpp"

int main() {
  using namespace cvq;
  const auto source = quarter_waveplate_relabel(opo_source(0.4, 0.9));
  const auto embedded = reorder(embed_with_vacua(source, reference::vacuum_partners()), {0, 2, 1, 3});

  std::printf("delta/pi   a1-b1    a1-b2    a1-a2    (witness of the two-mode marginal)\n");
  for (int k = 0; k <= 8; ++k) {
    const double delta = k * std::numbers::pi / 8.0;
    const auto out = apply(qplate_transform({0.5, delta}, embedded.modes()), embedded);
    const auto report = pairwise_entanglement_map(out);
    auto cell = [&](std::size_t i, std::size_t j) {
      const auto& v = *report.pairwise[i][j];
      return format_sig4(*v.witness) + (v.status == Status::Entangled ? "E" : "S");
    };
    std::printf("%-9.3f  %-8s %-8s %-8s\n", delta / std::numbers::pi, cell(0, 2).c_str(), cell(0, 3).c_str(),
                cell(0, 1).c_str());
  }
}
