#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "depagg/rng.hpp"
#include "depagg/votes.hpp"

using namespace depagg;

namespace {

VoteMatrix random_matrix(int n, int K, std::uint64_t seed, bool gold) {
  Rng rng(seed);
  VoteMatrix::Storage s(n, K);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < K; ++j) s(i, j) = rng.bernoulli(0.5) ? 1 : 0;
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) ids.push_back("item" + std::to_string(i));
  std::optional<std::vector<int>> g;
  if (gold) {
    g.emplace();
    for (int i = 0; i < n; ++i) g->push_back(rng.bernoulli(0.3) ? 1 : 0);
  }
  return VoteMatrix(std::move(s), std::move(ids), {}, std::move(g));
}

VoteMatrix parse(const std::string& text) {
  std::istringstream in(text);
  return read_votes(in);
}

}  // namespace

TEST_CASE("single-row CSV parse") {
  const auto v = parse("item,j1,j2,label\na,1,0,1\n");
  CHECK(v.n() == 1);
  CHECK(v.K() == 2);
  CHECK(v(0, 0) == 1);
  CHECK(v(0, 1) == 0);
  REQUIRE(v.has_gold());
  CHECK(v.gold() == std::vector<int>{1});
  CHECK(v.item_ids() == std::vector<std::string>{"a"});
  CHECK(v.judge_names() == std::vector<std::string>{"j1", "j2"});
}

TEST_CASE("CSV without label column and with CRLF line endings") {
  const auto v = parse("item,x,y,z\r\n1,0,1,1\r\n2,1,1,0\r\n");
  CHECK(v.n() == 2);
  CHECK(v.K() == 3);
  CHECK_FALSE(v.has_gold());
  CHECK_THROWS_AS((void)v.gold(), std::logic_error);
}

TEST_CASE("parse errors name the offending cell") {
  SUBCASE("non-binary vote") {
    try {
      (void)parse("item,j1,j2\na,1,0\nb,2,1\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.row() == 3);
      CHECK(e.column() == 2);
    }
  }
  SUBCASE("missing vote is rejected") { CHECK_THROWS_AS((void)parse("item,j1,j2\na,1,\n"), ParseError); }
  SUBCASE("ragged row") { CHECK_THROWS_AS((void)parse("item,j1,j2\na,1\n"), ParseError); }
  SUBCASE("empty input") { CHECK_THROWS_AS((void)parse(""), ParseError); }
  SUBCASE("header only") { CHECK_THROWS_AS((void)parse("item,j1\n"), ParseError); }
  SUBCASE("bad gold label") { CHECK_THROWS_AS((void)parse("item,j1,label\na,1,3\n"), ParseError); }
}

TEST_CASE("save then load is the identity on 100 random matrices") {
  for (int t = 0; t < 100; ++t) {
    Rng shape(derive_seed(7, {static_cast<std::uint64_t>(t)}));
    const int n = 1 + static_cast<int>(shape.below(40));
    const int K = 1 + static_cast<int>(shape.below(9));
    const auto v = random_matrix(n, K, static_cast<std::uint64_t>(t), t % 2 == 0);
    std::ostringstream out;
    write_votes(out, v);
    const auto back = parse(out.str());
    REQUIRE(back == v);
    std::ostringstream again;
    write_votes(again, back);
    CHECK(again.str() == out.str());
  }
}

TEST_CASE("VoteMatrix constructor enforces invariants") {
  VoteMatrix::Storage bad(1, 1);
  bad(0, 0) = 2;
  CHECK_THROWS_AS(VoteMatrix{bad}, std::invalid_argument);
  CHECK_THROWS_AS(VoteMatrix(VoteMatrix::Storage(0, 3)), std::invalid_argument);
  VoteMatrix::Storage ok(2, 1);
  ok << 1, 0;
  CHECK_THROWS_AS(VoteMatrix(ok, {}, {}, std::vector<int>{1}), std::invalid_argument);
}

TEST_CASE("flipped inverts votes and gold") {
  const auto v = random_matrix(20, 4, 3, true);
  const auto f = v.flipped();
  for (int i = 0; i < v.n(); ++i) {
    for (int j = 0; j < v.K(); ++j) CHECK(f(i, j) == 1 - v(i, j));
    CHECK(f.gold()[static_cast<std::size_t>(i)] == 1 - v.gold()[static_cast<std::size_t>(i)]);
  }
  CHECK(f.flipped() == v);
}

TEST_CASE("split is a deterministic partition") {
  const auto v = random_matrix(10, 3, 11, true);
  const SplitSpec spec{0.5, 7};
  const auto [train, test] = split(v, spec);
  CHECK(train.n() == 5);
  CHECK(test.n() == 5);
  std::set<std::string> seen;
  for (const auto& id : train.item_ids()) seen.insert(id);
  for (const auto& id : test.item_ids()) CHECK(seen.insert(id).second);
  CHECK(seen.size() == 10u);

  const auto [train2, test2] = split(v, spec);
  CHECK(train2 == train);
  CHECK(test2 == test);
}

TEST_CASE("train size is floor(f n) but never zero") {
  CHECK(train_size(5, 0.2) == 1);
  CHECK(train_size(10, 0.15) == 1);
  CHECK(train_size(100, 0.15) == 15);
  CHECK(train_size(3, 0.1) == 1);
  const auto v = random_matrix(5, 2, 1, false);
  const auto [train, test] = split(v, SplitSpec{0.2, 3});
  CHECK(train.n() == 1);
  CHECK(test.n() == 4);
}

TEST_CASE("split partitions for many seeds") {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto [tr, te] = split_indices(37, SplitSpec{0.3, s});
    std::vector<int> all(tr);
    all.insert(all.end(), te.begin(), te.end());
    std::sort(all.begin(), all.end());
    for (int i = 0; i < 37; ++i) CHECK(all[static_cast<std::size_t>(i)] == i);
    CHECK(std::is_sorted(tr.begin(), tr.end()));
  }
}

TEST_CASE("accuracy") {
  CHECK(accuracy(std::vector<int>{1, 0, 1}, std::vector<int>{1, 0, 1}) == 1.0);
  CHECK(accuracy(std::vector<int>{1, 1}, std::vector<int>{0, 0}) == 0.0);
  CHECK_THROWS_AS((void)accuracy(std::vector<int>{1}, std::vector<int>{1, 0}), std::invalid_argument);

  Rng rng(99);
  std::vector<int> p(1000), g(1000), q(1000);
  int agree = 0;
  for (int i = 0; i < 1000; ++i) {
    p[static_cast<std::size_t>(i)] = rng.bernoulli(0.5);
    g[static_cast<std::size_t>(i)] = rng.bernoulli(0.5);
    q[static_cast<std::size_t>(i)] = 1 - p[static_cast<std::size_t>(i)];
    agree += p[static_cast<std::size_t>(i)] == g[static_cast<std::size_t>(i)];
  }
  CHECK(accuracy(p, g) == doctest::Approx(agree / 1000.0));
  CHECK(accuracy(p, g) + accuracy(q, g) == doctest::Approx(1.0));
}

TEST_CASE("posterior tie maps to label 1") {
  const auto post = PosteriorVector::from_gamma({0.5, 0.4999999, 0.9, 0.0});
  CHECK(post.hard_labels == std::vector<int>{1, 0, 1, 0});
}

TEST_CASE("rng streams are reproducible and distinct") {
  Rng a(5), b(5), c(6);
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
  }
  CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
  CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
  Rng parent(9);
  const auto first = Rng(9)();
  (void)parent.split(4);
  CHECK(parent() == first);

  Rng u(123);
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double z = u.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / 1e5) < 0.02);
  CHECK(std::abs(sq / 1e5 - 1.0) < 0.02);
}
