// Inverts the joint heat/work quasi-probability at the default parameters,
// writes it as CSV and prints a few of its features.
#include <cstdio>
#include <fstream>
#include <sstream>

#include "heatwork/heatwork.hpp"

using namespace heatwork;

int main(int argc, char** argv) {
    const char* path = argc > 1 ? argv[1] : "joint_distribution.csv";
    const EngineParams p;
    const double t = 150.0;
    const AnalyticProvider provider(p);

    InversionOptions opt;
    opt.resolution = 0.05;
    const JointQPD j = joint(provider, t, -10, 160, UniformGrid::span(-20.0, 150.0, 0.05), opt);
    std::ofstream(path) << [&] {
        std::ostringstream os;
        write_csv(os, j, "");
        return os.str();
    }();

    std::printf("total mass          %.10f\n", total_mass(j));
    std::printf("most negative value %.6e\n", j.values.min());
    std::printf("mass off w = q      %.6e\n", off_diagonal_mass(j));
    std::printf("plateau atom rows   %zu\n", j.tail_atom.size());

    // the Poisson law only describes the weak-coupling regime
    EngineParams weak = p;
    weak.g = 0.05;
    const double tw = 12000.0;
    const QDistribution pq = marginal_q(AnalyticProvider(weak), tw, -20, 140);
    const auto rates = poisson_rates(weak);
    std::printf("\ng = 0.05, t = %.0f\n  q    P(q)          Poisson\n", tw);
    for (long q : {20L, 40L, 50L, 60L, 80L})
        std::printf("%4ld  %.6e  %.6e\n", q, pq.at(q), bidirectional_poisson(q, rates, tw));
    std::printf("\nwrote %s\n", path);
}
