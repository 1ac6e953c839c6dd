#include "hpsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>

#include "hpsim/error.hpp"

namespace hpsim {

bool McEstimate::has_flag(const std::string& f) const {
    return std::find(flags.begin(), flags.end(), f) != flags.end();
}

void McEstimate::add_flag(const std::string& f) {
    if (!has_flag(f)) flags.push_back(f);
}

double pairwise_sum(std::span<const double> xs) {
    if (xs.size() <= 8) {
        double s = 0.0;
        for (double v : xs) s += v;
        return s;
    }
    std::size_t half = xs.size() / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

McEstimate mc_estimate(std::span<const double> samples) {
    if (samples.size() < 2) throw InvalidParameter("mc_estimate: need at least 2 samples");
    const double n = static_cast<double>(samples.size());
    McEstimate e;
    e.reps = samples.size();
    e.mean = pairwise_sum(samples) / n;
    std::vector<double> sq(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double d = samples[i] - e.mean;
        sq[i] = d * d;
    }
    double var = pairwise_sum(sq) / n;
    e.std_error = std::sqrt(var / n);
    e.ci_lo = e.mean - 1.96 * e.std_error;
    e.ci_hi = e.mean + 1.96 * e.std_error;
    return e;
}

double kolmogorov_survival(double lambda) {
    if (lambda <= 0.0) return 1.0;
    if (lambda < 1.18) {
        // P[K <= l] = sqrt(2 pi)/l * sum exp(-(2k-1)^2 pi^2 / (8 l^2))
        const double pi2 = std::numbers::pi * std::numbers::pi;
        double s = 0.0;
        for (int k = 1; k <= 20; ++k) {
            double j = 2.0 * k - 1.0;
            s += std::exp(-j * j * pi2 / (8.0 * lambda * lambda));
        }
        return 1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * s;
    }
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        double term = std::exp(-2.0 * k * k * lambda * lambda);
        s += (k % 2 == 1) ? term : -term;
        if (term < 1e-18) break;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

double ks_exact_cdf(int n, double d) {
    if (n <= 0) throw InvalidParameter("ks_exact_cdf: n must be positive");
    if (d <= 0.0) return 0.0;
    if (d >= 1.0) return 1.0;
    const int k = static_cast<int>(std::floor(n * d)) + 1;
    const int m = 2 * k - 1;
    const double h = k - n * d;
    using Mat = std::vector<double>;
    auto at = [m](Mat& a, int i, int j) -> double& { return a[static_cast<std::size_t>(i) * m + j]; };
    Mat H(static_cast<std::size_t>(m) * m, 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (i - j + 1 >= 0) at(H, i, j) = 1.0;
    for (int i = 0; i < m; ++i) {
        at(H, i, 0) -= std::pow(h, i + 1);
        at(H, m - 1, i) -= std::pow(h, m - i);
    }
    if (2.0 * h - 1.0 > 0.0) at(H, m - 1, 0) += std::pow(2.0 * h - 1.0, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (i - j + 1 > 0)
                for (int g = 1; g <= i - j + 1; ++g) at(H, i, j) /= g;

    auto mul = [&](Mat& a, Mat& b) {
        Mat c(a.size(), 0.0);
        for (int i = 0; i < m; ++i)
            for (int l = 0; l < m; ++l) {
                double v = at(a, i, l);
                if (v == 0.0) continue;
                for (int j = 0; j < m; ++j) at(c, i, j) += v * at(b, l, j);
            }
        return c;
    };
    // Exponent bookkeeping keeps entries in range for moderate n.
    Mat result(H.size(), 0.0);
    for (int i = 0; i < m; ++i) at(result, i, i) = 1.0;
    int e_result = 0, e_base = 0;
    Mat base = H;
    int p = n;
    auto renorm = [&](Mat& a, int& e) {
        double mx = 0.0;
        for (double v : a) mx = std::max(mx, std::fabs(v));
        if (mx > 1e140) {
            for (double& v : a) v *= 1e-140;
            e += 140;
        }
    };
    while (p > 0) {
        if (p & 1) {
            result = mul(result, base);
            e_result += e_base;
            renorm(result, e_result);
        }
        p >>= 1;
        if (p > 0) {
            base = mul(base, base);
            e_base *= 2;
            renorm(base, e_base);
        }
    }
    double s = at(result, k - 1, k - 1);
    int es = e_result;
    for (int i = 1; i <= n; ++i) {
        s = s * i / n;
        if (s < 1e-140) {
            s *= 1e140;
            es -= 140;
        }
    }
    return std::clamp(s * std::pow(10.0, es), 0.0, 1.0);
}

TestResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw InvalidParameter("ks_test: empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double f = cdf(samples[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    TestResult r;
    r.statistic = d;
    if (samples.size() < 35) {
        r.p_value = std::clamp(1.0 - ks_exact_cdf(static_cast<int>(samples.size()), d), 0.0, 1.0);
    } else {
        double sn = std::sqrt(n);
        r.p_value = kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d);
    }
    return r;
}

TestResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw InvalidParameter("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::fabs(i / na - j / nb));
    }
    TestResult r;
    r.statistic = d;
    double ne = std::sqrt(na * nb / (na + nb));
    r.p_value = kolmogorov_survival((ne + 0.12 + 0.11 / ne) * d);
    return r;
}

double poisson_pmf(std::uint64_t k, double mean) {
    if (!(mean > 0.0)) return k == 0 ? 1.0 : 0.0;
    double kd = static_cast<double>(k);
    return std::exp(kd * std::log(mean) - mean - std::lgamma(kd + 1.0));
}

TestResult chi_square_poisson(std::span<const std::uint64_t> counts, double mean, double min_expected) {
    if (counts.empty()) throw InvalidParameter("chi_square_poisson: no counts");
    if (!(mean > 0.0)) throw InvalidParameter("chi_square_poisson: mean must be positive");
    const double n = static_cast<double>(counts.size());
    std::uint64_t kmax = *std::max_element(counts.begin(), counts.end());
    kmax = std::max<std::uint64_t>(kmax, static_cast<std::uint64_t>(mean + 12.0 * std::sqrt(mean) + 12.0));
    std::vector<double> observed(kmax + 1, 0.0);
    for (auto c : counts) observed[c] += 1.0;

    struct Cell { double obs = 0.0, exp = 0.0; };
    std::vector<Cell> cells;
    Cell cur;
    double cdf = 0.0;
    for (std::uint64_t k = 0; k <= kmax; ++k) {
        double p = poisson_pmf(k, mean);
        cdf += p;
        cur.obs += observed[k];
        cur.exp += n * p;
        if (cur.exp >= min_expected) {
            cells.push_back(cur);
            cur = Cell{};
        }
    }
    // Remaining probability mass beyond kmax goes to the last cell.
    cur.exp += n * std::max(0.0, 1.0 - cdf);
    if (!cells.empty()) {
        cells.back().obs += cur.obs;
        cells.back().exp += cur.exp;
    } else {
        cells.push_back(cur);
    }
    TestResult r;
    for (const auto& c : cells) {
        double diff = c.obs - c.exp;
        r.statistic += diff * diff / c.exp;
    }
    r.dof = static_cast<int>(cells.size()) - 1;
    r.p_value = r.dof > 0 ? boost::math::gamma_q(r.dof / 2.0, r.statistic / 2.0) : 1.0;
    return r;
}

namespace {

void check_tail_args(double lambda, double x, const char* who) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidParameter(std::string(who) + ": lambda must be > 0");
    if (!(x > 0.0) || !std::isfinite(x)) throw InvalidParameter(std::string(who) + ": x must be > 0");
}

}  // namespace

double poisson_tail_exact(double lambda, double x, TailSide side) {
    check_tail_args(lambda, x, "poisson_tail_exact");
    if (side == TailSide::Upper) {
        double start = std::ceil(lambda + x);
        auto k = static_cast<std::uint64_t>(start);
        double term = poisson_pmf(k, lambda);
        double sum = 0.0, comp = 0.0;
        while (term > 0.0) {
            double y = term - comp;
            double t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            ++k;
            term *= lambda / static_cast<double>(k);
            if (term < sum * 1e-18) break;
        }
        return sum;
    }
    double stop = std::floor(lambda - x);
    if (stop < 0.0) return 0.0;
    auto k = static_cast<std::uint64_t>(stop);
    double term = poisson_pmf(k, lambda);
    double sum = 0.0, comp = 0.0;
    for (;;) {
        double y = term - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if (k == 0) break;
        term *= static_cast<double>(k) / lambda;
        --k;
        if (term < sum * 1e-18) break;
    }
    return sum;
}

double poisson_tail_bound(double lambda, double x) {
    check_tail_args(lambda, x, "poisson_tail_bound");
    return std::exp(-x * x / (2.0 * (x + lambda)));
}

double chernoff_h(double x) {
    if (!(x >= -1.0) || std::isnan(x)) throw InvalidParameter("chernoff_h: x must be >= -1");
    if (x == -1.0) return 2.0;
    if (std::fabs(x) < 1e-4) return 1.0 - x / 3.0 + x * x / 6.0 - x * x * x / 10.0;
    return 2.0 * ((1.0 + x) * std::log1p(x) - x) / (x * x);
}

double chernoff_g(double x) {
    return (1.0 + x) * chernoff_h(x);
}

double chernoff_exponent(double lambda, double x, TailSide side) {
    check_tail_args(lambda, x, "chernoff_exponent");
    if (side == TailSide::Lower) {
        if (!(x < lambda)) throw InvalidParameter("chernoff_exponent: lower side needs x < lambda");
        return x * x / (2.0 * lambda) * chernoff_h(-x / lambda);
    }
    return x * x / (2.0 * lambda) * chernoff_h(x / lambda);
}

}  // namespace hpsim
