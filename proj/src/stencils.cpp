#include "prekopa/stencils.hpp"

#include <stdexcept>

namespace prekopa {

std::vector<std::vector<double>> fornberg_weights(double z, const std::vector<double>& nodes,
                                                  int max_order) {
    const int nd = static_cast<int>(nodes.size()) - 1;
    if (nd < max_order)
        throw std::invalid_argument("fornberg_weights: need more nodes than derivative order");
    std::vector<std::vector<double>> c(nodes.size(), std::vector<double>(max_order + 1, 0.0));
    double c1 = 1.0;
    double c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for (int i = 1; i <= nd; ++i) {
        int mn = i < max_order ? i : max_order;
        double c2 = 1.0;
        double c5 = c4;
        c4 = nodes[i] - z;
        for (int j = 0; j <= i - 1; ++j) {
            double c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    // Transpose to weights[order][node].
    std::vector<std::vector<double>> w(max_order + 1, std::vector<double>(nodes.size()));
    for (std::size_t j = 0; j < nodes.size(); ++j)
        for (int k = 0; k <= max_order; ++k) w[k][j] = c[j][k];
    return w;
}

std::vector<double> midpoint_corrected_weights(double a, double b, int m) {
    if (m < 1) throw std::invalid_argument("midpoint_corrected_weights: m must be positive");
    const double h = (b - a) / m;
    std::vector<double> w(m, h);
    if (m >= 8) {
        // Correction (h^2/24)[g'(b) - g'(a)] with g' from 4-point one-sided
        // differences on the half-offset nodes; exact for cubic integrands.
        static const double e[4] = {-71.0 / 24.0, 141.0 / 24.0, -93.0 / 24.0, 23.0 / 24.0};
        for (int k = 0; k < 4; ++k) {
            w[k] -= (h / 24.0) * e[k];
            w[m - 1 - k] += (h / 24.0) * (-e[k]);
        }
    }
    return w;
}

}  // namespace prekopa
