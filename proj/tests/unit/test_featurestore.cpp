#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <set>

#include <nlohmann/json.hpp>

#include "gevk/csv.hpp"
#include "gevk/embedding.hpp"
#include "gevk/manifest.hpp"
#include "gevk/preprocess.hpp"
#include "gevk/train_config.hpp"
#include "oracles/bilinear.hpp"
#include "oracles/reference_reader.hpp"
#include "support.hpp"

using namespace gevk;

namespace {

FormatErrc decode_error(const std::vector<std::byte>& bytes) {
  try {
    decode_embeddings(bytes);
  } catch (const FormatError& e) {
    return e.code();
  }
  FAIL("decode succeeded");
  return FormatErrc::io_failure;
}

DatasetManifest manifest_of(std::size_t n, std::uint64_t seed = 7) {
  DatasetManifest m;
  m.seed = seed;
  for (std::size_t i = 0; i < n; ++i) {
    ImageRecord r;
    r.id = "img" + std::to_string(1000 + i);
    r.source_uri = "https://example.org/" + r.id + ".jpg";
    r.prompt = "open shelving";
    m.records.push_back(r);
  }
  return m;
}

}  // namespace

TEST_SUITE("embedding format") {
  TEST_CASE("1x1 matrix is header, one id and four payload bytes") {
    testing::TempDir dir("emb");
    const EmbeddingMatrix m(1, 1, {0.5f}, {"a"});
    write_embeddings(m, dir / "one.gevk");
    CHECK(std::filesystem::file_size(dir / "one.gevk") == embedding_format::kHeaderSize + 4 + 1 + 4);
    CHECK(read_embeddings(dir / "one.gevk") == m);
  }

  TEST_CASE("2x3 matrix keeps row order and bits") {
    const EmbeddingMatrix m(2, 3, {1.0f, -2.5f, 3.25f, 1e-30f, -0.0f, 7.0f}, {"second", "first"});
    const auto back = decode_embeddings(encode_embeddings(m));
    REQUIRE(back.row_ids() == m.row_ids());
    for (std::size_t i = 0; i < 6; ++i) {
      CHECK(std::bit_cast<std::uint32_t>(back.values()[i]) == std::bit_cast<std::uint32_t>(m.values()[i]));
    }
  }

  TEST_CASE("100x512 random matrix matches the reference reader") {
    testing::TempDir dir("emb");
    const auto m = testing::random_matrix(100, 512, 42);
    write_embeddings(m, dir / "big.gevk");
    const auto raw = oracle::read_gevk((dir / "big.gevk").string());
    REQUIRE(raw.rows == 100);
    REQUIRE(raw.cols == 512);
    CHECK(raw.ids == m.row_ids());
    bool same = raw.bits.size() == m.values().size();
    for (std::size_t i = 0; same && i < raw.bits.size(); ++i) {
      same = raw.bits[i] == std::bit_cast<std::uint32_t>(m.values()[i]);
    }
    CHECK(same);
    CHECK(read_embeddings(dir / "big.gevk") == m);
  }

  TEST_CASE("header fields are little-endian at fixed offsets") {
    const EmbeddingMatrix m(2, 3, std::vector<float>(6, 1.0f), {"x", "y"});
    const auto b = encode_embeddings(m);
    CHECK(std::memcmp(b.data(), "GEVK", 4) == 0);
    CHECK(std::to_integer<int>(b[4]) == 1);
    CHECK(std::to_integer<int>(b[8]) == 2);
    CHECK(std::to_integer<int>(b[16]) == 3);
    CHECK(std::to_integer<int>(b[24]) == 0x01);
  }

  TEST_CASE("corruptions map to their error classes") {
    const auto good = encode_embeddings(testing::random_matrix(4, 5, 1));

    auto bad_magic = good;
    bad_magic[0] = std::byte{'X'};
    CHECK(decode_error(bad_magic) == FormatErrc::bad_magic);

    auto bad_version = good;
    bad_version[4] = std::byte{2};
    CHECK(decode_error(bad_version) == FormatErrc::version_mismatch);

    auto bad_dtype = good;
    bad_dtype[24] = std::byte{0x02};
    CHECK(decode_error(bad_dtype) == FormatErrc::unsupported_dtype);

    auto truncated = good;
    truncated.resize(good.size() - 6);
    CHECK(decode_error(truncated) == FormatErrc::truncated_payload);

    auto trailing = good;
    trailing.push_back(std::byte{0});
    CHECK(decode_error(trailing) == FormatErrc::size_mismatch);

    auto huge_rows = good;
    huge_rows[15] = std::byte{0x7f};
    CHECK(decode_error(huge_rows) == FormatErrc::size_mismatch);

    std::vector<std::byte> short_header(good.begin(), good.begin() + 10);
    CHECK(decode_error(short_header) == FormatErrc::size_mismatch);

    auto nan_payload = good;
    const std::uint32_t nan_bits = 0x7fc00000u;
    std::memcpy(nan_payload.data() + nan_payload.size() - 4, &nan_bits, 4);
    CHECK(decode_error(nan_payload) == FormatErrc::invalid_contents);
  }

  TEST_CASE("error messages name the class") {
    auto b = encode_embeddings(testing::random_matrix(2, 2, 3));
    b[1] = std::byte{'Z'};
    CHECK_THROWS_WITH_AS(decode_embeddings(b), doctest::Contains("bad magic"), FormatError);
    b = encode_embeddings(testing::random_matrix(2, 2, 3));
    b.resize(b.size() - 1);
    CHECK_THROWS_WITH_AS(decode_embeddings(b), doctest::Contains("truncated payload"), FormatError);
  }

  TEST_CASE("missing file is an I/O failure") {
    try {
      read_embeddings("/nonexistent/dir/x.gevk");
      FAIL("expected an error");
    } catch (const FormatError& e) {
      CHECK(e.code() == FormatErrc::io_failure);
    }
  }

  TEST_CASE("matrix invariants") {
    CHECK_THROWS_AS(EmbeddingMatrix(0, 1, {}, {}), InputError);
    CHECK_THROWS_AS(EmbeddingMatrix(1, 2, {1.0f}, {"a"}), InputError);
    CHECK_THROWS_AS(EmbeddingMatrix(1, 1, {NAN}, {"a"}), InputError);
    CHECK_THROWS_AS(EmbeddingMatrix(2, 1, {1.0f, 2.0f}, {"a", "a"}), InputError);
    const EmbeddingMatrix m(2, 1, {1.0f, 2.0f}, {"a", "b"});
    CHECK(m.find("b") == 1);
    CHECK(m.find("c") == 2);
  }
}

TEST_SUITE("split") {
  TEST_CASE("100 records split 80/10/10") {
    const auto out = split_dataset(manifest_of(100));
    CHECK(out.counts.train == 80);
    CHECK(out.counts.val == 10);
    CHECK(out.counts.test == 10);
    CHECK(out.warnings.empty());
  }

  TEST_CASE("multiples of ten split exactly") {
    for (std::size_t n : {10u, 20u, 30u, 50u, 70u, 200u}) {
      const auto c = split_dataset(manifest_of(n)).counts;
      CHECK(c.train == 8 * n / 10);
      CHECK(c.val == n / 10);
      CHECK(c.test == n / 10);
    }
  }

  TEST_CASE("7 records give 7/0/0 with warnings") {
    const auto out = split_dataset(manifest_of(7));
    CHECK(out.counts.train == 7);
    CHECK(out.counts.val == 0);
    CHECK(out.counts.test == 0);
    CHECK(out.warnings.size() == 2);
  }

  TEST_CASE("fewer than 3 records is an error") {
    CHECK_THROWS_WITH_AS(split_dataset(manifest_of(2)), doctest::Contains("fewer than 3 records"), InputError);
  }

  TEST_CASE("same seed, same assignment; reapplying changes nothing") {
    const auto a = split_dataset(manifest_of(100, 11)).manifest;
    const auto b = split_dataset(manifest_of(100, 11)).manifest;
    CHECK(dump_manifest(a) == dump_manifest(b));
    CHECK(dump_manifest(split_dataset(a).manifest) == dump_manifest(a));
    const auto c = split_dataset(manifest_of(100, 12)).manifest;
    CHECK(dump_manifest(a) != dump_manifest(c));
  }

  TEST_CASE("assignment ignores input order") {
    auto m = manifest_of(40, 5);
    const auto forward = split_dataset(m).manifest;
    std::reverse(m.records.begin(), m.records.end());
    const auto reversed = split_dataset(m).manifest;
    std::map<std::string, Split> fa, ra;
    for (const auto& r : forward.records) fa[r.id] = *r.split;
    for (const auto& r : reversed.records) ra[r.id] = *r.split;
    CHECK(fa == ra);
  }

  TEST_CASE("every record lands in exactly one split") {
    const auto out = split_dataset(manifest_of(53)).manifest;
    std::set<std::string> ids;
    for (const auto& r : out.records) {
      CHECK(r.split.has_value());
      ids.insert(r.id);
    }
    CHECK(ids.size() == 53);
    const auto c = count_splits(out);
    CHECK(c.train + c.val + c.test == 53);
  }

  TEST_CASE("ratios are validated") {
    auto m = manifest_of(10);
    m.split_ratios = {0.7, 0.2, 0.2};
    CHECK_THROWS_AS(split_dataset(m), InputError);
    m.split_ratios = {0.6, 0.2, 0.2};
    const auto c = split_dataset(m).counts;
    CHECK(c.val == 2);
    CHECK(c.test == 2);
    CHECK(c.train == 6);
  }
}

TEST_SUITE("manifest") {
  TEST_CASE("JSON round trip keeps every field") {
    auto m = manifest_of(3);
    m.records[0].negative_prompts = {"clutter", "dark"};
    m.records[0].variant = ModelVariantId(VariantLabel::M2);
    m.records[1].metadata = {{"author", "someone"}, {"license", "Unsplash"}};
    m.feature_source = "clip-vit-b32";
    m = split_dataset(m).manifest;
    const auto text = dump_manifest(m);
    CHECK(parse_manifest(text) == m);
    CHECK(text.back() == '\n');
  }

  TEST_CASE("duplicate ids are rejected") {
    auto m = manifest_of(3);
    m.records[2].id = m.records[0].id;
    CHECK_THROWS_AS(parse_manifest(dump_manifest(m)), InputError);
  }

  TEST_CASE("malformed JSON is an input error") {
    CHECK_THROWS_AS(parse_manifest("{not json"), InputError);
    CHECK_THROWS_AS(parse_manifest("{\"records\": [{\"id\": 3}]}"), InputError);
  }

  TEST_CASE("HDG vocabulary") {
    const auto vocab = default_hdg_vocabulary();
    REQUIRE(vocab.size() == 4);
    CHECK(vocab[0] == "open shelving");
    CHECK(vocab[1] == "transparent cabinetry");
    CHECK(load_hdg_vocabulary(GEVK_DATA_DIR "/hdg_prompts.txt") == vocab);

    ImageRecord r;
    annotate_prompt(r, {"open shelving", "under-cabinet lighting"}, vocab);
    CHECK(r.prompt == "open shelving, under-cabinet lighting");
    CHECK_THROWS_AS(annotate_prompt(r, {"gold taps"}, vocab), InputError);
  }
}

TEST_SUITE("preprocess") {
  TEST_CASE("constant white image maps to 1.0 everywhere") {
    const std::vector<std::uint8_t> px(512 * 512 * 3, 255);
    const auto out = resize_normalize(px, 512, 512);
    REQUIRE(out.size() == 512u * 512u * 3u);
    CHECK(std::all_of(out.begin(), out.end(), [](float v) { return v == 1.0f; }));
  }

  TEST_CASE("512x512 input is an identity resample") {
    std::mt19937 rng(3);
    std::vector<std::uint8_t> px(512 * 512 * 3);
    for (auto& p : px) p = static_cast<std::uint8_t>(rng() & 0xff);
    const auto out = resize_normalize(px, 512, 512);
    bool same = true;
    for (std::size_t i = 0; same && i < px.size(); ++i) same = out[i] == static_cast<float>(px[i] / 255.0);
    CHECK(same);
  }

  TEST_CASE("1024 checkerboard halves to 0.5 and matches the tent-kernel oracle") {
    std::vector<std::uint8_t> px(1024 * 1024 * 3);
    for (std::size_t y = 0; y < 1024; ++y)
      for (std::size_t x = 0; x < 1024; ++x)
        for (int c = 0; c < 3; ++c) px[(y * 1024 + x) * 3 + c] = ((x + y) % 2) ? 255 : 0;
    const auto out = resize_normalize(px, 1024, 1024);
    for (std::size_t y = 1; y < 511; y += 37)
      for (std::size_t x = 1; x < 511; x += 41) CHECK(out[(y * 512 + x) * 3] == doctest::Approx(0.5).epsilon(1e-6));
    const auto ref = oracle::bilinear_resize(px, 1024, 1024, 512, 512, 250, 250, 4, 4);
    std::size_t k = 0;
    for (std::size_t y = 250; y < 254; ++y)
      for (std::size_t x = 250; x < 254; ++x)
        for (int c = 0; c < 3; ++c) CHECK(out[(y * 512 + x) * 3 + c] == doctest::Approx(ref[k++]).epsilon(1e-6));
  }

  TEST_CASE("small random images match the oracle, including edges") {
    for (auto [w, h] : {std::pair<std::size_t, std::size_t>{7, 5}, {3, 11}, {1, 1}, {2, 9}}) {
      std::mt19937 rng(static_cast<unsigned>(w * 31 + h));
      std::vector<std::uint8_t> px(w * h * 3);
      for (auto& p : px) p = static_cast<std::uint8_t>(rng() & 0xff);
      const auto out = resize_normalize(px, w, h, 13, 17);
      const auto ref = oracle::bilinear_resize(px, w, h, 13, 17);
      REQUIRE(out.size() == ref.size());
      double worst = 0.0;
      for (std::size_t i = 0; i < out.size(); ++i) worst = std::max(worst, std::abs(out[i] - ref[i]));
      CHECK(worst < 1e-6);
      CHECK(std::all_of(out.begin(), out.end(), [](float v) { return v >= 0.0f && v <= 1.0f; }));
    }
  }

  TEST_CASE("bad buffers") {
    CHECK_THROWS_WITH_AS(resize_normalize({}, 2, 2), "empty pixel buffer", InputError);
    const std::vector<std::uint8_t> px(10, 0);
    CHECK_THROWS_AS(resize_normalize(px, 2, 2), InputError);
    CHECK_THROWS_AS(resize_normalize(px, 0, 2), InputError);
  }

  TEST_CASE("PPM decoding feeds the resampler") {
    std::string file = "P6\n# comment\n2 1\n255\n";
    file += std::string("\xff\x00\x00\x00\x00\xff", 6);
    const std::vector<std::uint8_t> bytes(file.begin(), file.end());
    PpmDecoder dec;
    REQUIRE(dec.accepts(bytes));
    const auto img = dec.decode(bytes);
    CHECK(img.width == 2);
    CHECK(img.height == 1);
    CHECK(img.pixels == std::vector<std::uint8_t>{255, 0, 0, 0, 0, 255});
    const std::vector<std::uint8_t> cut(bytes.begin(), bytes.end() - 1);
    CHECK_THROWS_AS(dec.decode(cut), InputError);
    const std::vector<std::uint8_t> png{0x89, 'P', 'N', 'G'};
    CHECK_FALSE(dec.accepts(png));
  }
}

TEST_SUITE("train config") {
  TEST_CASE("defaults carry the published hyperparameters") {
    testing::TempDir dir("cfg");
    const TrainConfig c;
    emit_train_config(c, dir / "train.json");
    const auto text = testing::slurp(dir / "train.json");
    CHECK(text.find("0.0001") != std::string::npos);
    CHECK(text.find("\"batch_size\": 4") != std::string::npos);
    CHECK(text.find("0.5") != std::string::npos);
    CHECK(text.find("\"clutter\"") != std::string::npos);
    CHECK(text.find("\"dark\"") != std::string::npos);
    CHECK(load_train_config(dir / "train.json") == c);
  }

  TEST_CASE("dropout 0 is written as 0") {
    TrainConfig c;
    c.prompt_dropout = 0.0;
    const auto j = nlohmann::json::parse(dump_train_config(c));
    REQUIRE(j.contains("prompt_dropout"));
    CHECK(j["prompt_dropout"].get<double>() == 0.0);
    CHECK(parse_train_config(j.dump()).prompt_dropout == 0.0);
  }

  TEST_CASE("round trip with 20000 steps and conditioning") {
    TrainConfig c;
    c.steps = 20000;
    c.conditioning = {Conditioning::canny_edge, Conditioning::depth};
    CHECK(parse_train_config(dump_train_config(c)) == c);
  }

  TEST_CASE("invariants") {
    TrainConfig c;
    c.learning_rate = 0;
    CHECK_THROWS_AS(c.validate(), InputError);
    c = {};
    c.prompt_dropout = 1.5;
    CHECK_THROWS_AS(c.validate(), InputError);
    c = {};
    c.steps = 0;
    CHECK_THROWS_AS(c.validate(), InputError);
  }
}

TEST_CASE("csv quoting") {
  CHECK(csv::escape("plain") == "plain");
  CHECK(csv::escape("a,b") == "\"a,b\"");
  CHECK(csv::escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv::split("a,\"b,c\",\"d\"\"e\",") == std::vector<std::string>{"a", "b,c", "d\"e", ""});
  CHECK_FALSE(csv::split("a,\"open").has_value());
}
