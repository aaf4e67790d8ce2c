#include <doctest.h>

#include "leadsheet/dataset.hpp"
#include "leadsheet/image.hpp"
#include "leadsheet/kern.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace leadsheet;

namespace {

std::vector<dataset::PieceRecord> singles(int n, const std::string& prefix = "piece") {
    std::vector<dataset::PieceRecord> out;
    for (int i = 0; i < n; ++i) {
        std::string id = prefix + "_" + std::to_string(i);
        out.push_back({id, {id + "_s1"}, {}});
    }
    return out;
}

kern::KernDocument two_region_doc() {
    return kern::parse_kern("**kern\t**harte\n"
                            "*clefG2\t*\n"
                            "*M4/4\t*\n"
                            "4c\tC:maj\n"
                            "4d\t.\n"
                            "4e\t.\n"
                            "4f\t.\n"
                            "!!linebreak:original\n"
                            "=2\t=\n"
                            "4g\tG:7\n"
                            "4a\t.\n"
                            "2g\t.\n"
                            "==\t==\n"
                            "*-\t*-\n");
}

} // namespace

TEST_CASE("splits deal floor(val), floor(test), remainder to train") {
    auto pieces = singles(20);
    auto manifest = dataset::make_split(pieces, {}, 7);
    CHECK(manifest.count(dataset::Subset::Val) == 2);   // floor(0.1 * 20)
    CHECK(manifest.count(dataset::Subset::Test) == 4);  // floor(0.2 * 20)
    CHECK(manifest.count(dataset::Subset::Train) == 14);
    CHECK(manifest.assignment.size() == 20);
    CHECK(manifest.forced_train.empty());
    CHECK(manifest.seed == 7);

    // Every piece appears exactly once.
    std::set<std::string> seen;
    for (const auto& [id, subset] : manifest.assignment) seen.insert(id);
    CHECK(seen.size() == pieces.size());

    // Ratios that do not divide evenly still leave nothing behind.
    auto odd = dataset::make_split(singles(7), {}, 3);
    CHECK(odd.count(dataset::Subset::Val) == 0);  // floor(0.7)
    CHECK(odd.count(dataset::Subset::Test) == 1); // floor(1.4)
    CHECK(odd.count(dataset::Subset::Train) == 6);
}

TEST_CASE("pieces with multiple handwritten copies always train") {
    auto pieces = singles(30);
    pieces.push_back({"shared_a", {"shared_a_s1", "shared_a_s2"}, {}});
    pieces.push_back({"shared_b", {"shared_b_s1", "shared_b_s2", "shared_b_s3"}, {"shared_b_synth"}});

    for (std::uint64_t seed : {0ull, 1ull, 17ull, 999ull, 123456789ull}) {
        CAPTURE(seed);
        auto manifest = dataset::make_split(pieces, {}, seed);
        CHECK(manifest.assignment.at("shared_a") == dataset::Subset::Train);
        CHECK(manifest.assignment.at("shared_b") == dataset::Subset::Train);
        CHECK(manifest.forced_train == std::set<std::string>{"shared_a", "shared_b"});
        CHECK(manifest.count(dataset::Subset::Val) == 3);  // floor(0.1 * 32)
        CHECK(manifest.count(dataset::Subset::Test) == 6); // floor(0.2 * 32)
    }
}

TEST_CASE("splits are deterministic in the seed") {
    auto pieces = singles(40);
    auto a = dataset::make_split(pieces, {}, 42);
    auto b = dataset::make_split(pieces, {}, 42);
    CHECK(a == b);

    // Input order must not matter: the shuffle runs over sorted ids.
    auto shuffled = pieces;
    std::reverse(shuffled.begin(), shuffled.end());
    CHECK(dataset::make_split(shuffled, {}, 42) == a);

    // At least one other seed should produce a different deal.
    bool differs = false;
    for (std::uint64_t seed = 43; seed < 48 && !differs; ++seed)
        differs = !(dataset::make_split(pieces, {}, seed) == a);
    CHECK(differs);
}

TEST_CASE("infeasible ratios and manifest defects are rejected") {
    auto pieces = singles(10);
    CHECK_THROWS_AS(dataset::make_split(pieces, {0.5, 0.2, 0.2}, 1), dataset::InfeasibleRatiosError);
    CHECK_THROWS_AS(dataset::make_split(pieces, {-0.1, 0.6, 0.5}, 1), dataset::InfeasibleRatiosError);

    auto dup = singles(3);
    dup.push_back(dup.front());
    CHECK_THROWS_AS(dataset::make_split(dup, {}, 1), dataset::ManifestError);

    auto anon = singles(3);
    anon.push_back({"", {"s"}, {}});
    CHECK_THROWS_AS(dataset::make_split(anon, {}, 1), dataset::ManifestError);

    auto hollow = singles(3);
    hollow.push_back({"empty_piece", {}, {}});
    CHECK_THROWS_AS(dataset::make_split(hollow, {}, 1), dataset::ManifestError);
}

TEST_CASE("forced-train overflow warns by default and throws in strict mode") {
    // 6 of 8 pieces are multi-copy; train quota is 8 - 0 - 4 = 4 with
    // ratios (0.4, 0.1, 0.5), so the forced set cannot fit.
    std::vector<dataset::PieceRecord> pieces;
    for (int i = 0; i < 6; ++i) {
        std::string id = "multi_" + std::to_string(i);
        pieces.push_back({id, {id + "_s1", id + "_s2"}, {}});
    }
    for (int i = 0; i < 2; ++i) {
        std::string id = "single_" + std::to_string(i);
        pieces.push_back({id, {id + "_s1"}, {}});
    }

    std::vector<std::string> warnings;
    auto manifest = dataset::make_split(pieces, {0.4, 0.1, 0.5}, 5, {}, &warnings);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings.front().find("exceed the train quota") != std::string::npos);
    // All multi-copy pieces still train; the singles absorb the shrinkage.
    for (int i = 0; i < 6; ++i)
        CHECK(manifest.assignment.at("multi_" + std::to_string(i)) == dataset::Subset::Train);

    dataset::MakeSplitOptions strict;
    strict.strict = true;
    CHECK_THROWS_AS(dataset::make_split(pieces, {0.4, 0.1, 0.5}, 5, strict), dataset::InfeasibleRatiosError);

    CHECK_NOTHROW(dataset::make_split({}, {}, 1));
    CHECK_THROWS_AS(dataset::make_split({}, {}, 1, strict), dataset::InfeasibleRatiosError);
}

TEST_CASE("split manifests serialize byte-stably and round-trip") {
    auto pieces = singles(12);
    pieces.push_back({"dup_piece", {"a", "b"}, {}});
    auto manifest = dataset::make_split(pieces, {}, 99);

    std::string once = manifest.to_json();
    std::string twice = manifest.to_json();
    CHECK(once == twice);
    CHECK(once.back() == '\n');

    auto reparsed = dataset::SplitManifest::from_json(once);
    CHECK(reparsed == manifest);

    auto path = std::filesystem::temp_directory_path() / "leadsheet_split_test.json";
    manifest.save(path);
    CHECK(dataset::SplitManifest::load(path) == manifest);
    std::filesystem::remove(path);

    CHECK_THROWS_AS(dataset::SplitManifest::from_json("not json"), dataset::ManifestError);
    CHECK_THROWS_AS(dataset::SplitManifest::from_json("{\"assignment\": 3}"), dataset::ManifestError);
}

TEST_CASE("subset names round-trip") {
    using dataset::Subset;
    CHECK(dataset::subset_name(Subset::Train) == std::string("train"));
    CHECK(dataset::subset_name(Subset::Val) == std::string("val"));
    CHECK(dataset::subset_name(Subset::Test) == std::string("test"));
    CHECK(dataset::subset_from_name("train") == Subset::Train);
    CHECK(dataset::subset_from_name("val") == Subset::Val);
    CHECK(dataset::subset_from_name("test") == Subset::Test);
    CHECK_THROWS_AS(dataset::subset_from_name("dev"), dataset::ManifestError);
}

TEST_CASE("piece manifests accept both the bare array and wrapped forms") {
    std::string bare = R"([
      {"piece_id": "tune_a", "copies": ["tune_a_s1"], "synthetic": ["tune_a_synth"]},
      {"piece_id": "tune_b", "copies": ["tune_b_s1", "tune_b_s2"]}
    ])";
    auto pieces = dataset::pieces_from_json(bare);
    REQUIRE(pieces.size() == 2);
    CHECK(pieces[0].piece_id == "tune_a");
    CHECK(pieces[0].synthetic == std::vector<std::string>{"tune_a_synth"});
    CHECK(pieces[1].copies.size() == 2);
    CHECK(pieces[1].synthetic.empty());

    std::string wrapped = std::string("{\"pieces\": ") + bare + "}";
    CHECK(dataset::pieces_from_json(wrapped) == pieces);

    // to_json -> from_json is the identity.
    CHECK(dataset::pieces_from_json(dataset::pieces_to_json(pieces)) == pieces);

    CHECK_THROWS_AS(dataset::pieces_from_json("{}"), dataset::ManifestError);
    CHECK_THROWS_AS(dataset::pieces_from_json("[{\"copies\": []}]"), dataset::ManifestError);
}

TEST_CASE("region records pair sorted boxes with kern regions") {
    auto doc = two_region_doc();
    // Boxes arrive unsorted; the second staff sits lower on the page.
    std::vector<dataset::BoundingBox> boxes = {
        {40, 300, 900, 120},
        {50, 80, 880, 130},
    };
    auto records = dataset::build_region_records(doc, boxes, "tune_x", 1000, 600);
    REQUIRE(records.size() == 2);
    CHECK(records[0].image == "tune_x_r00.png");
    CHECK(records[1].image == "tune_x_r01.png");
    CHECK(records[0].box == dataset::BoundingBox{50, 80, 880, 130});
    CHECK(records[1].box == dataset::BoundingBox{40, 300, 900, 120});
    CHECK(records[0].staff_index == 0);
    CHECK(records[1].staff_index == 1);
    CHECK(records[0].score_id == "tune_x");

    // Each record's ground truth is a standalone parsable document, and the
    // second region carries its barline and context.
    auto first = kern::parse_kern(records[0].kern);
    auto second = kern::parse_kern(records[1].kern);
    CHECK(records[0].kern.find("4c\tC:maj") != std::string::npos);
    CHECK(records[1].kern.find("4g\tG:7") != std::string::npos);
    CHECK(records[1].kern.find("*clefG2") != std::string::npos);
    CHECK(first.lines.front().melody == "**kern");
    CHECK(second.lines.back().melody == "*-");
}

TEST_CASE("region record defects are rejected with precise messages") {
    auto doc = two_region_doc();
    std::vector<dataset::BoundingBox> one = {{0, 0, 100, 50}};
    try {
        dataset::build_region_records(doc, one, "tune_x");
        FAIL("expected CountMismatchError");
    } catch (const dataset::CountMismatchError& e) {
        std::string msg = e.what();
        CHECK(msg.find("1 bounding box") != std::string::npos);
        CHECK(msg.find("2 kern regions") != std::string::npos);
    }

    std::vector<dataset::BoundingBox> degenerate = {{0, 0, 100, 50}, {0, 60, 0, 50}};
    CHECK_THROWS_AS(dataset::build_region_records(doc, degenerate, "tune_x"), dataset::ManifestError);

    std::vector<dataset::BoundingBox> negative = {{-5, 0, 100, 50}, {0, 60, 100, 50}};
    CHECK_THROWS_AS(dataset::build_region_records(doc, negative, "tune_x"), dataset::ManifestError);

    std::vector<dataset::BoundingBox> oversize = {{0, 0, 100, 50}, {20, 60, 990, 50}};
    CHECK_THROWS_AS(dataset::build_region_records(doc, oversize, "tune_x", 1000, 600), dataset::ManifestError);
    // Page bounds of zero mean "unknown": the same boxes pass.
    CHECK_NOTHROW(dataset::build_region_records(doc, oversize, "tune_x"));
}

TEST_CASE("region and box JSON round-trips") {
    std::string text = R"([{"x": 3, "y": 9, "width": 80, "height": 40},
                           {"x": 1, "y": 2, "width": 10, "height": 20}])";
    auto boxes = dataset::boxes_from_json(text);
    REQUIRE(boxes.size() == 2);
    CHECK(boxes[0] == dataset::BoundingBox{3, 9, 80, 40});

    std::string wrapped = std::string("{\"boxes\": ") + text + "}";
    CHECK(dataset::boxes_from_json(wrapped) == boxes);

    CHECK_THROWS_AS(dataset::boxes_from_json("[]{"), dataset::ManifestError);
    CHECK_THROWS_AS(dataset::boxes_from_json("[{\"x\": 1}]"), dataset::ManifestError);

    auto doc = two_region_doc();
    std::vector<dataset::BoundingBox> page = {{0, 0, 500, 100}, {0, 120, 500, 100}};
    auto records = dataset::build_region_records(doc, page, "tune_y");
    std::string out = dataset::regions_to_json(records);
    CHECK(out.find("\"tune_y_r00.png\"") != std::string::npos);
    CHECK(out.find("\"staff_index\": 1") != std::string::npos);
    CHECK(out.back() == '\n');
}

TEST_CASE("normalized images always have the model geometry") {
    std::mt19937 rng(20260825);
    std::uniform_int_distribution<int> rows_d(8, 900);
    std::uniform_int_distribution<int> cols_d(8, 2400);
    for (int trial = 0; trial < 30; ++trial) {
        int rows = rows_d(rng);
        int cols = cols_d(rng);
        CAPTURE(rows);
        CAPTURE(cols);
        cv::Mat input(rows, cols, CV_8UC1);
        cv::randu(input, 0, 256);
        auto img = image::preprocess_image(input);
        CHECK(img.channels == 1);
        CHECK(img.height == 128);
        CHECK(img.width == 1000);
        CHECK(img.pixels.size() == 128u * 1000u);
        CHECK(img.content_width >= 1);
        CHECK(img.content_width <= 1000);
        CHECK(img.content_height >= 1);
        CHECK(img.content_height <= 128);

        // Aspect ratio preserved to within one pixel of rounding.
        double expect_w = static_cast<double>(cols) * 128.0 / rows;
        if (expect_w <= 1000.0) {
            CHECK(img.content_height == 128);
            CHECK(std::abs(img.content_width - expect_w) <= 1.0);
        } else {
            CHECK(img.content_width == 1000);
            double expect_h = static_cast<double>(rows) * 1000.0 / cols;
            CHECK(std::abs(img.content_height - expect_h) <= 1.0);
        }

        for (float v : img.pixels) {
            CHECK(v >= 0.0f);
            CHECK(v <= 1.0f);
        }
    }
}

TEST_CASE("padding is white and sits outside the content box") {
    cv::Mat dark(64, 64, CV_8UC1, cv::Scalar(0));
    auto img = image::preprocess_image(dark);
    CHECK(img.content_width == 128);
    CHECK(img.content_height == 128);
    CHECK(img.at(0, 0) == doctest::Approx(0.0f));
    CHECK(img.at(64, 100) == doctest::Approx(0.0f));
    CHECK(img.at(0, 128) == doctest::Approx(1.0f)); // first padded column
    CHECK(img.at(127, 999) == doctest::Approx(1.0f));

    // Over-wide content is fitted to the width and padded below.
    cv::Mat wide(10, 2000, CV_8UC1, cv::Scalar(0));
    auto w = image::preprocess_image(wide);
    CHECK(w.content_width == 1000);
    CHECK(w.content_height == 5);
    CHECK(w.at(0, 999) == doctest::Approx(0.0f));
    CHECK(w.at(5, 0) == doctest::Approx(1.0f)); // first padded row
    CHECK(w.at(127, 500) == doctest::Approx(1.0f));
}

TEST_CASE("binarization leaves only black and white") {
    cv::Mat grad(100, 400, CV_8UC1);
    for (int r = 0; r < grad.rows; ++r)
        for (int c = 0; c < grad.cols; ++c) grad.at<uchar>(r, c) = static_cast<uchar>((r + c) % 256);
    image::PreprocessOptions opt;
    opt.binarize = true;
    auto img = image::preprocess_image(grad, opt);
    int black = 0, white = 0;
    for (int r = 0; r < img.content_height; ++r) {
        for (int c = 0; c < img.content_width; ++c) {
            float v = img.at(r, c);
            bool is_black = v == doctest::Approx(0.0f);
            bool is_white = v == doctest::Approx(1.0f);
            CHECK((is_black || is_white));
            if (is_black) ++black;
            if (is_white) ++white;
        }
    }
    CHECK(black > 0);
    CHECK(white > 0);
}

TEST_CASE("color and high-depth inputs are converted, defects rejected") {
    cv::Mat color(60, 90, CV_8UC3, cv::Scalar(255, 255, 255));
    auto img = image::preprocess_image(color);
    CHECK(img.at(0, 0) == doctest::Approx(1.0f));

    cv::Mat deep(60, 90, CV_16UC1, cv::Scalar(65535));
    auto img16 = image::preprocess_image(deep);
    CHECK(img16.at(0, 0) == doctest::Approx(1.0f));

    cv::Mat deep_black(60, 90, CV_16UC1, cv::Scalar(0));
    CHECK(image::preprocess_image(deep_black).at(0, 0) == doctest::Approx(0.0f));

    CHECK_THROWS_AS(image::preprocess_image(cv::Mat()), image::DegenerateImageError);
    cv::Mat two_channel(10, 10, CV_8UC2);
    CHECK_THROWS_AS(image::preprocess_image(two_channel), image::UndecodableImageError);

    CHECK_THROWS_AS(image::preprocess_image(std::filesystem::path("/nonexistent/score.png")),
                    image::UndecodableImageError);
    auto garbage = std::filesystem::temp_directory_path() / "leadsheet_not_an_image.png";
    {
        std::ofstream out(garbage, std::ios::binary);
        out << "definitely not a PNG";
    }
    CHECK_THROWS_AS(image::preprocess_image(garbage), image::UndecodableImageError);
    std::filesystem::remove(garbage);
}

TEST_CASE("decode -> normalize round-trips through a real PNG") {
    cv::Mat art(37, 210, CV_8UC1);
    for (int r = 0; r < art.rows; ++r)
        for (int c = 0; c < art.cols; ++c) art.at<uchar>(r, c) = static_cast<uchar>((3 * r + 7 * c) % 256);
    auto path = std::filesystem::temp_directory_path() / "leadsheet_roundtrip.png";
    REQUIRE(cv::imwrite(path.string(), art));
    auto from_file = image::preprocess_image(path);
    auto from_mat = image::preprocess_image(art);
    CHECK(from_file.pixels == from_mat.pixels);
    std::filesystem::remove(path);
}

TEST_CASE("npy files carry the exact header numpy expects") {
    cv::Mat input(50, 300, CV_8UC1, cv::Scalar(128));
    auto img = image::preprocess_image(input);
    auto path = std::filesystem::temp_directory_path() / "leadsheet_tensor.npy";
    image::save_npy(img, path);

    std::ifstream in(path, std::ios::binary);
    REQUIRE(static_cast<bool>(in));
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string bytes = std::move(buf).str();

    REQUIRE(bytes.size() > 10);
    CHECK(bytes.compare(0, 6, "\x93NUMPY") == 0);
    CHECK(bytes[6] == '\x01'); // format 1.0
    CHECK(bytes[7] == '\x00');
    std::uint16_t header_len = static_cast<std::uint8_t>(bytes[8]) |
                               (static_cast<std::uint16_t>(static_cast<std::uint8_t>(bytes[9])) << 8);
    std::string header = bytes.substr(10, header_len);
    CHECK(header.find("'descr': '<f4'") != std::string::npos);
    CHECK(header.find("'fortran_order': False") != std::string::npos);
    CHECK(header.find("'shape': (1, 128, 1000)") != std::string::npos);
    CHECK((10 + header_len) % 64 == 0);
    CHECK(header.back() == '\n');

    // Payload is exactly the float32 tensor.
    CHECK(bytes.size() - 10 - header_len == 128u * 1000u * sizeof(float));
    float first;
    std::memcpy(&first, bytes.data() + 10 + header_len, sizeof(float));
    CHECK(first == doctest::Approx(img.pixels.front()));
    std::filesystem::remove(path);
}
