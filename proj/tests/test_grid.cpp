#include "jdlv/errors.hpp"
#include "jdlv/grid.hpp"

#include <doctest.h>

#include <cmath>

using namespace jdlv;

TEST_CASE("payoff values") {
    CHECK(payoff(0.0) == 0.0);
    CHECK(payoff(-5.0) == doctest::Approx(0.993262).epsilon(1e-6));
    CHECK(payoff(2.0) == 0.0);
}

TEST_CASE("payoff is bounded, nonincreasing in y and convex in strike") {
    double prev = 2.0;
    for (double y = -6.0; y <= 6.0; y += 0.01) {
        const double p = payoff(y);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        CHECK(p <= prev);
        prev = p;
    }
    for (double k = 0.1; k < 3.0; k += 0.05) {
        const double h = 0.01;
        const double c = payoff(std::log(k - h)) - 2.0 * payoff(std::log(k)) + payoff(std::log(k + h));
        CHECK(c >= -1e-14);
    }
}

TEST_CASE("grid construction and lattice bookkeeping") {
    const Grid g(1.0, 0.005, -5.0, 5.0, 0.025);
    CHECK(g.steps() == 200);
    CHECK(g.j_lo() == -200);
    CHECK(g.j_hi() == 200);
    CHECK(g.nodes() == 401);
    CHECK(g.levels() == 201);
    CHECK(g.beta() == doctest::Approx(0.2));
    CHECK(g.eta() == doctest::Approx(8.0));
    CHECK(g.zero_col() == 200);
    CHECK(g.j_of(0.05) == 2);
    CHECK(g.i_of(0.1) == 20);
    CHECK(std::abs(g.tau_max() - 1.0) < 1e-15);
    CHECK(std::abs(g.y_max() - 5.0) < 1e-15);
    CHECK_THROWS_AS(g.j_of(0.0123), ConfigError);
    CHECK_THROWS_AS(Grid(1.0, 0.003, -5.0, 5.0, 0.025), ConfigError);
    CHECK_THROWS_AS(Grid(1.0, -0.005, -5.0, 5.0, 0.025), ConfigError);
    CHECK_THROWS_AS(Grid(1.0, 0.005, 1.0, 5.0, 0.025), ConfigError);
}

TEST_CASE("extend_index passes interior values and falls back to the payoff") {
    const Grid g = Grid::symmetric(1.0, 10, 1.0, 20);
    std::vector<double> row(g.nodes());
    for (int c = 0; c < g.nodes(); ++c) row[c] = 0.1 * c + 0.5;
    CHECK(extend_index(row, g, 0) == row[g.zero_col()]);
    for (int j = g.j_lo(); j <= g.j_hi(); ++j) CHECK(extend_index(row, g, j) == row[g.col(j)]);
    CHECK(extend_index(row, g, g.j_lo() - 3) == payoff((g.j_lo() - 3) * g.dy()));
    CHECK(extend_index(row, g, g.j_hi() + 1) == 0.0);
}

TEST_CASE("moneyness transform") {
    CHECK(log_moneyness(1.0, 1.0) == 0.0);
    CHECK(log_moneyness(12814.79 * std::exp(0.05), 12814.79) == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(log_moneyness(std::exp(1.0), 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    for (double y = -5.0; y <= 5.0; y += 0.37) {
        const double k = strike_from_log_moneyness(y, 3.5);
        CHECK(std::abs(strike_from_log_moneyness(log_moneyness(k, 3.5), 3.5) - k) <= 1e-12 * k);
    }
    CHECK_THROWS_AS(log_moneyness(-1.0, 1.0), DomainError);
    CHECK_THROWS_AS(log_moneyness(1.0, 0.0), DomainError);
    CHECK_THROWS_AS(MarketParams(0.0, -1.0), DomainError);
}
