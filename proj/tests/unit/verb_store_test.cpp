#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include "oracles.hpp"
#include "raid/base64.hpp"
#include "raid/error.hpp"
#include "raid/verb_store.hpp"

using namespace raid;
using namespace raid::verbs;
using raid::testing::TestRng;

namespace {

descriptor::Descriptor random_descriptor(TestRng& g) {
  descriptor::Descriptor d;
  d.values.resize(256);
  for (auto& v : d.values) v = g.uniform() / 128.0;
  d.r_max = g.range(1, 100);
  return d;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Io;
}

std::vector<std::uint8_t> bytes(std::string_view s) { return {s.begin(), s.end()}; }

class TempDir {
 public:
  TempDir() : path_(std::filesystem::temp_directory_path() / ("raid_verbs_" + std::to_string(::getpid()))) {
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace

TEST(Base64, Rfc4648Vectors) {
  const std::vector<std::pair<std::string, std::string>> cases{
      {"", ""},         {"f", "Zg=="},         {"fo", "Zm8="},         {"foo", "Zm9v"},
      {"foob", "Zm9vYg=="}, {"fooba", "Zm9vYmE="}, {"foobar", "Zm9vYmFy"}};
  for (const auto& [plain, enc] : cases) {
    EXPECT_EQ(base64::encode(bytes(plain)), enc);
    EXPECT_EQ(base64::decode(enc), bytes(plain));
  }
}

TEST(Base64, RejectsMalformed) {
  for (const char* bad : {"Zg=", "Z", "Zm9v!", "Zg==Zg==", "=Zg="}) {
    EXPECT_EQ(code_of([&] { base64::decode(bad); }), ErrorCode::Parse) << bad;
  }
}

TEST(Base64, AllByteValues) {
  std::vector<std::uint8_t> all(256);
  for (int i = 0; i < 256; ++i) all[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i);
  EXPECT_EQ(base64::decode(base64::encode(all)), all);
}

TEST(VerbStore, SaveThenLookupIsBitExact) {
  TestRng g(81);
  VerbStore store;
  const auto d = random_descriptor(g);
  store.save("riding", d, "image 3 region 1");
  const auto e = store.lookup("riding");
  EXPECT_EQ(e.verb, "riding");
  EXPECT_EQ(e.descriptor.values, d.values);
  EXPECT_EQ(e.descriptor.r_max, d.r_max);
  EXPECT_EQ(e.created_from, "image 3 region 1");
}

TEST(VerbStore, PersistsAcrossInstances) {
  TempDir dir;
  const auto path = dir.path() / "verbs.json";
  TestRng g(82);
  const auto d1 = random_descriptor(g);
  auto d2 = random_descriptor(g);
  d2.kind = descriptor::DescriptorKind::ShapeContext;
  d2.shape = {8, 2, 1, 1};
  d2.values.resize(16);
  {
    VerbStore store(path);
    store.save("riding", d1);
    store.save("under", d2, "sketch");
  }
  VerbStore again(path);
  EXPECT_EQ(again.size(), 2u);
  EXPECT_EQ(again.lookup("riding").descriptor.values, d1.values);
  EXPECT_EQ(again.lookup("under").descriptor.kind, descriptor::DescriptorKind::ShapeContext);
  EXPECT_EQ(again.lookup("under").descriptor.values, d2.values);
  EXPECT_FALSE(std::filesystem::exists(dir.path() / "verbs.json.tmp"));
}

TEST(VerbStore, Errors) {
  TestRng g(83);
  VerbStore store;
  EXPECT_EQ(code_of([&] { store.lookup("flying"); }), ErrorCode::NotFound);
  store.save("riding", random_descriptor(g));
  EXPECT_EQ(code_of([&] { store.save("riding", random_descriptor(g)); }), ErrorCode::Conflict);
  EXPECT_EQ(code_of([&] { store.save("", random_descriptor(g)); }), ErrorCode::BadRequest);
  EXPECT_EQ(code_of([&] { store.save("x", descriptor::Descriptor{}); }), ErrorCode::BadRequest);
  EXPECT_EQ(store.size(), 1u);
}

TEST(VerbStore, FormatIsReadableJson) {
  TestRng g(84);
  VerbEntry e{"riding", random_descriptor(g), "note"};
  const auto text = VerbStore::format({e});
  EXPECT_NE(text.find("\"raid-verbs-1\""), std::string::npos);
  EXPECT_NE(text.find("\"riding\""), std::string::npos);
  const auto back = VerbStore::parse(text);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].descriptor.values, e.descriptor.values);
  EXPECT_EQ(code_of([] { VerbStore::parse("{\"format\": \"other\"}"); }), ErrorCode::Parse);
}

TEST(VerbStore, ConcurrentReadersAndWriters) {
  TestRng g(85);
  VerbStore store;
  const auto d = random_descriptor(g);
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 25; ++i) {
        store.save("v" + std::to_string(t) + "_" + std::to_string(i), d);
        (void)store.list();
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(store.size(), 100u);
}
