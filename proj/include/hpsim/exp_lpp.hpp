#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hpsim/coupling.hpp"
#include "hpsim/rng.hpp"

namespace hpsim {

// Weights w(i, j) for 0 <= i <= i_max, 0 <= j <= j_max. Row j = 0 is
// Exp(1 - alpha), column i = 0 is Exp(alpha), the rest Exp(1), w(0,0) = 0.
struct ExpLppGrid {
    double alpha = 0.5;
    int i_max = 0;
    int j_max = 0;
    std::vector<double> w;

    double weight(int i, int j) const { return w[index(i, j)]; }
    double& weight(int i, int j) { return w[index(i, j)]; }
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(i_max + 1) + static_cast<std::size_t>(i);
    }
};

// One uniform per cell, transformed by -log(U)/rate. Grids sampled from the
// same stream at two alphas are therefore monotonically coupled.
ExpLppGrid sample_grid(RandomStream& s, double alpha, int i_max, int j_max);

std::string dump_grid(const ExpLppGrid& g);
ExpLppGrid load_grid(const std::string& json_text);

struct GField {
    int i_max = 0;
    int j_max = 0;
    std::vector<double> g;

    double at(int i, int j) const;
};

GField lpp_times(const ExpLppGrid& grid);
// Only the values of the top row j = j_max, two-row storage.
std::vector<double> lpp_top_row(const ExpLppGrid& grid);

// W_n((k, l]) = G(l, n) - G(k, n)
double increments(const GField& g, int n, int k, int l);

enum class Axis { I, J };

struct ExpExitRecord {
    Axis axis = Axis::I;
    int index = 0;
    int signed_value = 0;  // +index on the i-axis, -index on the j-axis
};

ExpExitRecord exp_exit_point(const ExpLppGrid& grid, int k, int n);
ExpExitRecord exp_exit_point(const ExpLppGrid& grid, const GField& g, int k, int n);

// G((n+x)/2, (n-x)/2 + 1) - G((n+x)/2 + 1, (n-x)/2)
double derivative_field(const GField& g, int x, int n);

double characteristic_beta(double alpha);

// Function of the increments W_n((lo, hi]) for rows n in [t_lo, t_hi];
// same kinds and directions as the particle version.
DecouplingReport decoupling_check_exp(const MonotoneFunctionSpec& f1, const MonotoneFunctionSpec& f2,
                                      const SpaceTimeBox& b1, const SpaceTimeBox& b2, double alpha,
                                      double alpha_prime, std::size_t reps, const RunOptions& opt);

double evaluate_increment_function(const MonotoneFunctionSpec& f, const GField& g);

}  // namespace hpsim
