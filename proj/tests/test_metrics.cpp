#include "doctest.h"
#include "oracles.hpp"
#include "revloc/metrics.hpp"

using namespace revloc;
using P = Position<double>;

TEST_CASE("localization error: worked cases") {
  CHECK(localization_error<double>({P(0, 0, 0)}, {P(3, 4, 0)}).le_m == 5.0);

  const auto r = localization_error<double>({P(0, 0, 0), P(10, 0, 0)}, {P(10, 1, 0), P(0, 1, 0)});
  CHECK(r.le_m == doctest::Approx(1.0));
  CHECK(r.matched_pairs[0] == std::pair<std::size_t, std::size_t>{0, 1});
  CHECK(r.matched_pairs[1] == std::pair<std::size_t, std::size_t>{1, 0});
  CHECK(!r.support_exact);

  const std::vector<P> t{P(1, 2, 3), P(4, 5, 6), P(0, 0, 1)};
  const auto same = localization_error<double>(t, {t[2], t[0], t[1]});
  CHECK(same.le_m == 0.0);
  CHECK(same.support_exact);
}

TEST_CASE("localization error: properties against brute force") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-5, 5);
  auto cloud = [&](std::size_t n) {
    std::vector<P> v;
    for (std::size_t i = 0; i < n; ++i) v.emplace_back(u(rng), u(rng), u(rng));
    return v;
  };
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + static_cast<std::size_t>(t % 6);
    auto truth = cloud(n), est = cloud(n);
    const auto r = localization_error(truth, est);

    CHECK(r.le_m == doctest::Approx(oracle::brute_force_le(truth, est)).epsilon(1e-12));

    double mean = 0, naive = 0;
    for (double e : r.per_source_errors) mean += e;
    for (std::size_t i = 0; i < n; ++i) naive += (truth[i] - est[i]).norm();
    CHECK(r.le_m == doctest::Approx(mean / double(n)).epsilon(1e-14));
    CHECK(r.le_m <= naive / double(n) + 1e-12);

    std::vector<bool> hit(n, false);
    for (const auto& [i, j] : r.matched_pairs) {
      CHECK(!hit[j]);
      hit[j] = true;
    }

    std::shuffle(truth.begin(), truth.end(), rng);
    std::shuffle(est.begin(), est.end(), rng);
    CHECK(localization_error(truth, est).le_m == doctest::Approx(r.le_m).epsilon(1e-12));

    const P shift(u(rng), u(rng), u(rng));
    for (auto& p : truth) p += shift;
    for (auto& p : est) p += shift;
    CHECK(localization_error(truth, est).le_m == doctest::Approx(r.le_m).epsilon(1e-10));
  }
}

TEST_CASE("assignment solver") {
  Eigen::Matrix3d c;
  c << 4, 1, 3,
       2, 0, 5,
       3, 2, 2;
  const auto a = min_cost_assignment(c);
  double total = 0;
  for (int i = 0; i < 3; ++i) total += c(i, a[static_cast<std::size_t>(i)]);
  CHECK(total == 5.0);

  CHECK_THROWS_AS(min_cost_assignment(Eigen::MatrixXd(2, 3)), ContractError);
}

TEST_CASE("localization error: contract") {
  CHECK_THROWS_AS(localization_error(std::vector<P>{P(0, 0, 0)}, std::vector<P>{}), ContractError);
  CHECK_THROWS_AS(localization_error(std::vector<P>{}, std::vector<P>{}), ContractError);

  LocalizationResult<double> res;
  res.estimated_positions = {P(1, 1, 1)};
  res.diagnostics.beta_energy_fraction = 0.25;
  const auto rep = score(res, {P(1, 1, 2)});
  CHECK(res.localization_error_m == 1.0);
  CHECK(rep.beta_energy_fraction == 0.25);
}
