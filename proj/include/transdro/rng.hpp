#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace transdro {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// splitmix64; used to derive independent stream seeds from (seed, index).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic generator: all distributions are implemented on top of the
// raw mt19937_64 output, so identical seeds give identical draws regardless
// of the standard library in use.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    static Rng stream(std::uint64_t seed, std::uint64_t index) {
        return Rng(mix_seed(seed, index));
    }

    std::uint64_t next_u64() { return gen_(); }

    // Uniform on (0,1); never returns 0, so log() below is safe.
    double uniform() {
        return (static_cast<double>(gen_() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    }

    // Box-Muller, cosine branch only (keeps the draw count per call fixed).
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    double exponential(double rate = 1.0) { return -std::log(uniform()) / rate; }

    Vector normal_vector(Eigen::Index n) {
        Vector v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
        return v;
    }

    // Fisher-Yates; deterministic given the generator state.
    std::vector<Eigen::Index> permutation(Eigen::Index n) {
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), Eigen::Index{0});
        for (Eigen::Index i = n - 1; i > 0; --i) {
            const auto j = static_cast<Eigen::Index>(next_u64() % static_cast<std::uint64_t>(i + 1));
            std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
        }
        return idx;
    }

    // Dirichlet(1,...,1): normalized unit exponentials.
    Vector dirichlet_uniform(int k) {
        Vector g(k);
        for (int i = 0; i < k; ++i) g[i] = exponential(1.0);
        return g / g.sum();
    }

  private:
    std::mt19937_64 gen_;
};

// Rows are drawn one at a time: x_i = mean + chol_lower * z_i.
inline Matrix mvnormal_rows(Eigen::Index n, const Vector& mean, const Matrix& chol_lower, Rng& rng) {
    const Eigen::Index p = mean.size();
    Matrix x(n, p);
    Vector z(p);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) z[j] = rng.normal();
        x.row(i) = (mean + chol_lower * z).transpose();
    }
    return x;
}

} // namespace transdro
