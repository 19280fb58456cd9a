#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "aiq/pipeline.hpp"

using namespace aiq;

namespace {

PipelineOptions quick() {
  PipelineOptions o;
  o.samples = 40;
  return o;
}

bool all_ok(const std::vector<VerifyCheck>& cs) {
  for (const auto& c : cs)
    if (!c.ok) return false;
  return true;
}

}  // namespace

TEST(Io, MatrixRoundTripIsExact) {
  Rng rng(1);
  Mat m = random_gaussian(3, 4, rng);
  json j = json::parse(to_json(m).dump());
  EXPECT_EQ(mat_from_json(j), m);
  // row-major: the first row holds m(0, ·)
  EXPECT_EQ(j[0][1][0].get<double>(), m(0, 1).real());
  EXPECT_EQ(j[0][1][1].get<double>(), m(0, 1).imag());
}

TEST(Io, ChannelRoundTrip) {
  Channel ch = gen_random_ucp(3, 2, 4);
  json doc = json::parse(channel_to_json(ch).dump(2));
  EXPECT_EQ(doc["format"], kChannelFormat);
  Channel back = channel_from_json(doc);
  EXPECT_LE(operator_norm(back.superop - ch.superop), 1e-14);
}

TEST(Io, RejectsMalformedDocuments) {
  json doc = channel_to_json(identity_channel(2));
  for (auto edit : {+[](json& d) { d["format"] = "aiq-channel/0"; }, +[](json& d) { d["dim_in"] = 3; },
                    +[](json& d) { d["choi"][0][0] = 1.0; }, +[](json& d) { d.erase("picture"); }}) {
    json bad = doc;
    edit(bad);
    try {
      channel_from_json(bad);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::ParseError);
    }
  }
}

TEST(Io, ParsesBlockSpecs) {
  EXPECT_EQ(parse_pairs("(2,2),(1,3)"), (std::vector<std::pair<int, int>>{{2, 2}, {1, 3}}));
  EXPECT_EQ(parse_pairs(" ( 1 , 1 ) "), (std::vector<std::pair<int, int>>{{1, 1}}));
  EXPECT_EQ(parse_sizes("3,2,1"), (std::vector<int>{3, 2, 1}));
  EXPECT_EQ(parse_sizes("(4)"), (std::vector<int>{4}));
  for (const char* bad : {"(2,2", "2,2", "(0,1)", "(a,b)"}) EXPECT_THROW(parse_pairs(bad), Error);
  for (const char* bad : {"", "3,,2", "3,0", "x"}) EXPECT_THROW(parse_sizes(bad), Error);
}

TEST(Io, AtomicWriteLeavesNoTemporary) {
  auto path = std::filesystem::temp_directory_path() / "aiq_atomic_test.json";
  write_json_atomic(path.string(), json{{"a", 1}});
  EXPECT_EQ(read_json(path.string())["a"], 1);
  EXPECT_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  std::filesystem::remove(path);
}

TEST(Io, DigestSeesEveryByte) {
  json doc = channel_to_json(identity_channel(2));
  std::string d = digest(doc);
  EXPECT_EQ(d.size(), 16u);
  doc["choi"][0][0][0] = 1.0 + 1e-15;
  EXPECT_NE(digest(doc), d);
}

TEST(Generate, SeedsReproduceDocuments) {
  GenRequest r{"idempotent", 0, "(2,2),(1,3)", 7, 0, 3};
  EXPECT_EQ(generate_channel(r).dump(), generate_channel(r).dump());
  GenRequest other = r;
  other.seed = 4;
  EXPECT_NE(generate_channel(r).dump(), generate_channel(other).dump());
  EXPECT_THROW(generate_channel({"idempotent", 0, "(2,2),(1,3)", 6, 0, 3}), Error);
  EXPECT_THROW(generate_channel({"nonsense", 0, "", 2, 0, 1}), Error);
}

TEST(Generate, ZeroPerturbationIsIdentical) {
  json doc = generate_channel({"example", 0.04, "", 0, 0, 0});
  EXPECT_EQ(perturb_channel(doc, 0.0, 9).dump(2), doc.dump(2));
  EXPECT_NE(perturb_channel(doc, 1e-3, 9).dump(2), doc.dump(2));
}

TEST(Pipeline, IdentityChannelAnalysis) {
  auto r = run_pipeline(generate_channel({"identity", 0, "", 2, 0, 0}), Stage::analyze, quick());
  EXPECT_LE(r.report["analysis"]["eta"]["upper"].get<double>(), 1e-9);
  EXPECT_TRUE(r.bounds_hold);
}

TEST(Pipeline, ExampleEtaMatchesOracle) {
  // cvxpy value of the diamond norm of the trace-side map, frozen
  auto r = run_pipeline(generate_channel({"example", 0.04, "", 0, 0, 0}), Stage::analyze, quick());
  EXPECT_NEAR(r.report["analysis"]["eta"]["value"].get<double>(), 0.0783836718, 1e-8);
}

TEST(Pipeline, FarFromIdempotentWarnsAndStops) {
  json doc = generate_channel({"random-ucp", 0, "", 3, 3, 2});
  auto r = run_pipeline(doc, Stage::analyze, quick());
  EXPECT_GT(r.report["analysis"]["eta"]["value"].get<double>(), 0.25);
  EXPECT_EQ(r.report["analysis"]["warnings"].size(), 1u);
  try {
    run_pipeline(doc, Stage::reconstruct, quick());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EtaTooLarge);
    EXPECT_NE(std::string(e.what()).find("idempotentize stage"), std::string::npos);
  }
}

TEST(Pipeline, RejectsNonUcpInput) {
  Channel ch = 2.0 * identity_channel(2);
  try {
    run_pipeline(channel_to_json(ch), Stage::analyze, quick());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotUCP);
  }
}

TEST(Pipeline, SchrodingerInputIsDualized) {
  Channel dep = dual(depolarizing_channel(2));
  auto r = run_pipeline(channel_to_json(dep), Stage::reconstruct, quick());
  EXPECT_EQ(r.report["analysis"]["picture_in"], "schrodinger");
  EXPECT_EQ(r.report["reconstruction"]["spec"], json::array({1}));
}

TEST(Pipeline, ReconstructsPinching) {
  auto r = run_pipeline(generate_channel({"pinching", 0, "3,2,1", 0, 0, 0}), Stage::reconstruct, quick());
  EXPECT_EQ(r.report["reconstruction"]["spec"], json::array({3, 2, 1}));
  EXPECT_TRUE(r.bounds_hold);
}

TEST(Pipeline, FactorizesIdentity) {
  auto r = run_pipeline(generate_channel({"identity", 0, "", 3, 0, 0}), Stage::factorize, quick());
  const json& f = r.report["factorization"];
  EXPECT_LE(f["residual_factor"]["upper"].get<double>(), 1e-6);
  EXPECT_LE(f["residual_retract"]["upper"].get<double>(), 1e-6);
  EXPECT_TRUE(r.bounds_hold);
}

TEST(Pipeline, DeterministicReports) {
  json doc = perturb_channel(generate_channel({"pinching", 0, "2,1", 0, 0, 0}), 1e-2, 2);
  auto a = run_pipeline(doc, Stage::factorize, quick()), b = run_pipeline(doc, Stage::factorize, quick());
  EXPECT_EQ(a.report.dump(), b.report.dump());
  EXPECT_FALSE(a.report.contains("timings"));
}

TEST(Verify, AcceptsAndRejects) {
  json doc = perturb_channel(generate_channel({"pinching", 0, "2,1", 0, 0, 0}), 1e-2, 2);
  json rep = run_pipeline(doc, Stage::factorize, quick()).report;
  EXPECT_TRUE(all_ok(verify_report(rep)));

  json t1 = rep;
  t1["factorization"]["upsilon"]["choi"][1][1][0] = t1["factorization"]["upsilon"]["choi"][1][1][0].get<double>() + 1e-3;
  EXPECT_FALSE(all_ok(verify_report(t1)));
  json t2 = rep;
  t2["input"]["channel"]["choi"][0][0][0] = 0.999;
  EXPECT_FALSE(all_ok(verify_report(t2)));
  json t3 = rep;
  t3["reconstruction"]["coeffs"][0][0][0] = t3["reconstruction"]["coeffs"][0][0][0].get<double>() + 1e-4;
  EXPECT_FALSE(all_ok(verify_report(t3)));
  json t4 = rep;
  t4["analysis"]["eta"]["value"] = 1e-3;
  EXPECT_FALSE(all_ok(verify_report(t4)));
}
