#include <gtest/gtest.h>

#include <map>
#include <set>

#include "cdmm/benchmark.hpp"
#include "cdmm/encode.hpp"
#include "cdmm/plan.hpp"
#include "cdmm/roster.hpp"
#include "cdmm/serialize.hpp"
#include "oracles.hpp"

using namespace cdmm;

namespace {

using Supports = std::vector<std::vector<std::size_t>>;

Supports supports(const CodingPlan& p) {
  Supports s;
  for (const auto& spec : p.specs) s.push_back(spec.support);
  return s;
}

ClientRoster single_type(std::vector<std::size_t> active, std::vector<std::size_t> passive) {
  auto r = ClientRoster::from_multipliers(active, passive);
  for (auto& c : r.clients) c.type = 0;
  return r;
}

ClientRoster example2() { return ClientRoster::from_multipliers({2, 2, 1, 1, 1}, {1, 1}); }

// Collapsed physical raw transfers derived from the worker-to-client map:
// worker i needs blocks i+1..i+s from whoever generated them.
std::set<std::tuple<std::size_t, std::size_t, std::size_t>> expected_raw(const std::vector<std::size_t>& owner,
                                                                         std::size_t k, std::size_t s) {
  std::set<std::tuple<std::size_t, std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t d = 1; d <= s; ++d) {
      const std::size_t b = (i + d) % k;
      if (owner[b] != owner[i]) out.insert({owner[b], owner[i], b});
    }
  return out;
}

}  // namespace

TEST(Roster, ValidationNamesConstraint) {
  EXPECT_NO_THROW(ClientRoster::homogeneous(10, 2).validate());
  EXPECT_THROW(ClientRoster::homogeneous(3, 3).validate(), InvalidRoster);
  EXPECT_THROW(ClientRoster::from_multipliers({1, 2}, {}).validate(), InvalidRoster);
  auto r = ClientRoster::from_multipliers({1, 1}, {1});
  r.clients[1].multiplier = 0;
  EXPECT_THROW(r.validate(), InvalidRoster);
  // Per type: one type-0 active, one type-0 passive.
  EXPECT_THROW(ClientRoster::from_multipliers({2, 1}, {1}).validate(), InvalidRoster);
  try {
    ClientRoster::homogeneous(2, 2).validate();
    FAIL();
  } catch (const InvalidRoster& e) {
    EXPECT_NE(std::string(e.what()).find("smaller than active"), std::string::npos);
  }
}

TEST(Roster, TypesFromMultiplierRank) {
  const auto r = example2();
  EXPECT_EQ(r.clients[0].type, 1u);
  EXPECT_EQ(r.clients[2].type, 0u);
  EXPECT_EQ(r.clients[6].type, 0u);
  EXPECT_EQ(r.clients[6].role, Role::kPassive);
}

TEST(Expansion, Example2) {
  const auto e = expand_heterogeneous(example2());
  EXPECT_EQ(e.k_bar, 7u);
  EXPECT_EQ(e.s_bar, 2u);
  EXPECT_EQ(e.client_workers[0], (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(e.client_workers[4], (std::vector<std::size_t>{6}));
  EXPECT_EQ(e.client_workers[5], (std::vector<std::size_t>{7}));
}

TEST(Expansion, IdentityAndPrefixSums) {
  const auto e = expand_heterogeneous(ClientRoster::homogeneous(5, 2));
  for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(e.worker_owner[i], i);
  const auto f = expand_heterogeneous(single_type({3, 1}, {1}));
  EXPECT_EQ(f.k_bar, 4u);
  EXPECT_EQ(f.s_bar, 1u);
  EXPECT_EQ(f.client_workers[0], (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Plan, Figure1Supports) {
  const auto p = build_homogeneous_plan(10, 2, 1);
  ASSERT_EQ(p.worker_count(), 12u);
  EXPECT_EQ(p.specs[0].support, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(p.specs[9].support, (std::vector<std::size_t>{9, 0, 1}));
  EXPECT_EQ(p.specs[10].support, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(p.specs[11].support, (std::vector<std::size_t>{1, 2, 3}));
  EXPECT_EQ(p.specs[11].role, Role::kPassive);
}

TEST(Plan, SupportShapeAndTransferBound) {
  for (std::size_t k = 2; k <= 9; ++k) {
    for (std::size_t s = 0; s < k; ++s) {
      const auto p = build_homogeneous_plan(k, s, 7 + k);
      ASSERT_EQ(p.worker_count(), k + s);
      std::map<std::size_t, std::set<std::size_t>> receivers;
      for (const auto& spec : p.specs) {
        ASSERT_EQ(spec.support.size(), s + 1);
        const std::size_t first = spec.worker < k ? spec.worker : spec.worker - k;
        for (std::size_t j = 0; j <= s; ++j) EXPECT_EQ(spec.support[j], (first + j) % k);
        for (double c : spec.coeffs) EXPECT_GE(std::abs(c), kCoefficientExclusion);
      }
      for (const auto& t : p.transfers) {
        if (t.payload == Payload::kRawBlock) receivers[t.index].insert(t.to_client);
      }
      for (const auto& [block, to] : receivers) EXPECT_LE(to.size(), s);
      EXPECT_EQ(p.raw_transfer_count(), k * s);
      EXPECT_EQ(p.coded_transfer_count(), s);
    }
  }
}

TEST(Plan, IdentityWhenNoPassive) {
  const auto p = build_homogeneous_plan(4, 0, 3);
  EXPECT_TRUE(p.transfers.empty());
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(p.specs[i].support, (std::vector<std::size_t>{i}));
  EXPECT_THROW(build_homogeneous_plan(3, 3, 1), InvalidRoster);
}

TEST(Plan, PassivePairingUsesFreshCoefficients) {
  const auto p = build_homogeneous_plan(10, 2, 5);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(p.specs[10 + i].support, p.specs[i].support);
    EXPECT_NE(p.specs[10 + i].coeffs, p.specs[i].coeffs);
  }
}

TEST(Plan, SeedDeterminism) {
  EXPECT_EQ(build_homogeneous_plan(10, 2, 42), build_homogeneous_plan(10, 2, 42));
  EXPECT_NE(build_homogeneous_plan(10, 2, 42).specs[0].coeffs, build_homogeneous_plan(10, 2, 43).specs[0].coeffs);
}

TEST(Plan, Example2Allocation) {
  const auto p = build_heterogeneous_plan(example2(), 1);
  const Supports want{{0, 1, 2}, {1, 2, 3}, {2, 3, 4}, {3, 4, 5}, {4, 5, 6},
                      {5, 6, 0}, {6, 0, 1}, {0, 1, 2}, {1, 2, 3}};
  EXPECT_EQ(supports(p), want);
  EXPECT_EQ(p.specs[4].owner_client, 2u);
  EXPECT_EQ(p.specs[0].owner_client, 0u);
  EXPECT_EQ(p.specs[1].owner_client, 0u);
  EXPECT_EQ(p.specs[7].owner_client, 5u);
  EXPECT_EQ(p.specs[8].owner_client, 6u);
}

TEST(Plan, HeterogeneousTransfersMatchOracle) {
  for (const auto& r : {example2(), single_type({2, 1}, {1}), single_type({3, 1}, {1}),
                        ClientRoster::from_multipliers({3, 3, 2, 1, 1, 1}, {1, 1})}) {
    const auto e = expand_heterogeneous(r);
    const auto p = build_heterogeneous_plan(r, 3);
    std::set<std::tuple<std::size_t, std::size_t, std::size_t>> raw;
    std::size_t coded = 0;
    for (const auto& t : p.transfers) {
      if (t.payload == Payload::kRawBlock) {
        raw.insert({t.from_client, t.to_client, t.index});
      } else {
        ++coded;
        EXPECT_EQ(t.from_client, e.worker_owner[t.index - e.k_bar]);
        EXPECT_EQ(t.to_client, e.worker_owner[t.index]);
      }
    }
    EXPECT_EQ(raw, expected_raw(e.worker_owner, e.k_bar, e.s_bar));
    EXPECT_EQ(coded, e.s_bar);
    EXPECT_EQ(p.virtual_raw_transfers, e.k_bar * e.s_bar);
  }
}

TEST(Plan, SmallHeterogeneousByHand) {
  const auto p = build_heterogeneous_plan(single_type({2, 1}, {1}), 1);
  EXPECT_EQ(p.k_bar, 3u);
  EXPECT_EQ(p.s_bar, 1u);
  EXPECT_EQ(p.weight(), 2u);
  const Supports want{{0, 1}, {1, 2}, {2, 0}, {0, 1}};
  EXPECT_EQ(supports(p), want);
}

TEST(Plan, HomogeneousRosterReducesToHomogeneousPlan) {
  EXPECT_EQ(build_heterogeneous_plan(ClientRoster::homogeneous(6, 2), 9), build_homogeneous_plan(6, 2, 9));
}

TEST(Plan, PolynomialRowsAndDuplicatePoints) {
  const auto p = build_polynomial_plan(ClientRoster::homogeneous(2, 1), std::vector<double>{0, 1, 2});
  const auto g = p.coefficient_matrix();
  EXPECT_EQ(g.entries(), (std::vector<double>{1, 0, 1, 1, 1, 2}));
  EXPECT_THROW(build_polynomial_plan(ClientRoster::homogeneous(2, 1), std::vector<double>{1, 1, 2}), PlanError);
  const auto one = build_polynomial_plan(ClientRoster::homogeneous(1, 0), std::vector<double>{3.5});
  EXPECT_EQ(one.coefficient_matrix().entries(), (std::vector<double>{1}));
}

TEST(Plan, DenseBaselineBroadcasts) {
  const auto p = build_dense_plan(ClientRoster::homogeneous(18, 2), 1);
  EXPECT_EQ(p.transfers.size(), 18u * 19u);
  for (const auto& spec : p.specs) EXPECT_EQ(spec.support.size(), 18u);
}

TEST(Plan, ValidateRejectsBrokenPlans) {
  auto p = build_homogeneous_plan(4, 1, 1);
  p.specs[2].support.push_back(9);
  p.specs[2].coeffs.push_back(1.0);
  EXPECT_THROW(validate_plan(p), PlanError);
  auto q = build_homogeneous_plan(4, 1, 1);
  q.specs[1].coeffs.pop_back();
  EXPECT_THROW(validate_plan(q), PlanError);
}

TEST(Encode, ConsistentWithGenerator) {
  const auto a = random_dense(6, 20, 2);
  const auto parts = partition_equal(a, 5);
  const auto plan = build_homogeneous_plan(5, 2, 4);
  const auto enc = encode(parts, plan);
  ASSERT_EQ(enc.worker_count(), 7u);
  for (std::size_t i = 0; i < 7; ++i) {
    for (std::size_t r = 0; r < 6; ++r)
      for (std::size_t c = 0; c < 4; ++c) {
        long double want = 0;
        for (std::size_t q = 0; q < 5; ++q) want += enc.generator(i, q) * static_cast<long double>(parts.block(q)(r, c));
        EXPECT_NEAR(enc.coded[i](r, c), static_cast<double>(want), 1e-13);
      }
  }
  EXPECT_EQ(encode(parts, plan).generator.entries(), enc.generator.entries());
}

TEST(Encode, IdentityAndToy) {
  const auto a = random_dense(3, 8, 5);
  const auto parts = partition_equal(a, 4);
  const auto enc = encode(parts, build_homogeneous_plan(4, 0, 1, CoefficientMode::kOnes));
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(enc.coded[i].entries(), parts.block(i).entries());

  // A_0, A_1, A_0 + A_1.
  CodingPlan toy;
  toy.scheme = Scheme::kCustom;
  toy.k_bar = 2;
  toy.s_bar = 1;
  toy.specs = {{0, 0, Role::kActive, {0}, {1.0}, ""},
               {1, 1, Role::kActive, {1}, {1.0}, ""},
               {2, 2, Role::kPassive, {0, 1}, {1.0, 1.0}, ""}};
  const auto p2 = partition_equal(a, 2);
  const auto t = encode(p2, toy);
  for (std::size_t e = 0; e < t.coded[2].entries().size(); ++e) {
    EXPECT_EQ(t.coded[2].entries()[e], p2.block(0).entries()[e] + p2.block(1).entries()[e]);
  }
}

TEST(Encode, SparsityContainment) {
  const auto a = random_sparse(60, 40, 0.9, 3);
  const auto parts = partition_equal(a, 8);
  const auto plan = build_homogeneous_plan(8, 2, 2);
  const auto enc = encode(parts, plan);
  for (const auto& spec : plan.specs) {
    std::size_t bound = 0;
    std::vector<DenseMatrix> blocks;
    for (auto q : spec.support) {
      bound += parts.block(q).nnz();
      blocks.push_back(parts.block(q).to_dense());
    }
    EXPECT_LE(enc.coded[spec.worker].nnz(), bound);
    EXPECT_EQ(enc.coded[spec.worker].nnz(), oracle::union_nnz(blocks));
  }
}

TEST(Encode, DenseBaselinePatternIsUnionOfAllBlocks) {
  const auto a = random_sparse(40, 30, 0.9, 6);
  const auto parts = partition_equal(a, 5);
  const auto enc = encode_baseline_dense(parts, 7, 1);
  std::vector<DenseMatrix> blocks;
  for (const auto& b : parts.blocks()) blocks.push_back(b.to_dense());
  for (const auto& c : enc.coded) EXPECT_EQ(c.nnz(), oracle::union_nnz(blocks));
  EXPECT_EQ(oracle::rank(oracle::to_rows(enc.generator)), 5u);

  const auto single = partition_equal(random_dense(3, 2, 1), 1);
  const auto s = encode_baseline_dense(single, 1, 4);
  const double c = s.generator(0, 0);
  for (std::size_t e = 0; e < 6; ++e) EXPECT_EQ(s.coded[0].entries()[e], c * single.block(0).entries()[e]);
}

TEST(Encode, PolynomialBaselineAnyKRowsIndependent) {
  const auto parts = partition_equal(random_dense(4, 6, 1), 2);
  const auto enc = encode_baseline_polynomial(parts, {0.0, 1.0, 2.0});
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i + 1; j < 3; ++j) {
      oracle::Rows r{{enc.generator(i, 0), enc.generator(i, 1)}, {enc.generator(j, 0), enc.generator(j, 1)}};
      EXPECT_EQ(oracle::rank(r), 2u);
    }
  EXPECT_THROW(encode_baseline_polynomial(parts, {1.0, 1.0}), PlanError);
}

TEST(Encode, RejectsBlockCountMismatch) {
  const auto parts = partition_equal(random_dense(4, 6, 1), 3);
  EXPECT_THROW(encode(parts, build_homogeneous_plan(2, 1, 1)), DimensionError);
}

TEST(Serialize, PlanJsonRoundTrip) {
  for (const auto& plan : {build_homogeneous_plan(10, 2, 3), build_heterogeneous_plan(example2(), 8),
                           build_dense_plan(ClientRoster::homogeneous(4, 1), 2),
                           build_polynomial_plan(ClientRoster::homogeneous(3, 1))}) {
    const auto text = plan_to_json(plan).dump();
    EXPECT_EQ(plan_from_json(Json::parse(text)), plan);
  }
}

TEST(Serialize, PlanJsonErrors) {
  EXPECT_THROW(plan_from_json(Json::parse(R"({"format":"other"})")), ParseError);
  auto j = plan_to_json(build_homogeneous_plan(4, 1, 1));
  j["workers"][0].erase("coeffs");
  EXPECT_THROW(plan_from_json(j), ParseError);
  auto k = plan_to_json(build_homogeneous_plan(4, 1, 1));
  k["transfers"][0]["payload"] = "carrier-pigeon";
  EXPECT_THROW(plan_from_json(k), ParseError);
}

TEST(Serialize, AllocationTableListsPassiveWorkers) {
  const auto table = allocation_table(build_homogeneous_plan(10, 2, 1));
  EXPECT_NE(table.find("W10 (passive, type 0, c=1): {A0,A1,A2}"), std::string::npos);
  EXPECT_NE(table.find("W11 (passive, type 0, c=1): {A1,A2,A3}"), std::string::npos);
  const auto uncoded = allocation_table(build_uncoded_plan(ClientRoster::homogeneous(3, 1)));
  EXPECT_NE(uncoded.find("W3 (passive, type 0, c=1): idle"), std::string::npos);
}
