#pragma once

#include "leadsheet/error.hpp"
#include "leadsheet/kern.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace leadsheet::dataset {

class InfeasibleRatiosError : public Error {
public:
    using Error::Error;
};
class CountMismatchError : public Error {
public:
    using Error::Error;
};
class ManifestError : public Error {
public:
    using Error::Error;
};

/// One composition and the score ids that realize it. Multiple copies of
/// the same piece share ground truth, so they must never straddle splits.
struct PieceRecord {
    std::string piece_id;
    std::vector<std::string> copies;    // handwritten score ids
    std::vector<std::string> synthetic; // synthetic score ids

    bool operator==(const PieceRecord&) const = default;
};

enum class Subset { Train, Val, Test };

const char* subset_name(Subset s);
Subset subset_from_name(const std::string& name);

struct SplitRatios {
    double train = 0.7;
    double val = 0.1;
    double test = 0.2;

    bool operator==(const SplitRatios&) const = default;
};

struct SplitManifest {
    std::map<std::string, Subset> assignment; // piece_id -> subset, sorted
    std::uint64_t seed = 0;
    SplitRatios ratios;
    std::set<std::string> forced_train;

    size_t count(Subset s) const;
    std::string to_json() const; // stable key order, byte-reproducible
    static SplitManifest from_json(const std::string& text);
    void save(const std::filesystem::path& path) const;
    static SplitManifest load(const std::filesystem::path& path);

    bool operator==(const SplitManifest&) const = default;
};

struct MakeSplitOptions {
    bool strict = false; // fail instead of warn when forced-train spills over the train quota
};

/// Seeded split over unique pieces. Pieces with more than one handwritten
/// copy always land in train; the rest are shuffled deterministically and
/// dealt to val (floor(val_ratio*N)), test (floor(test_ratio*N)), then
/// train takes the remainder.
SplitManifest make_split(const std::vector<PieceRecord>& pieces, const SplitRatios& ratios, std::uint64_t seed,
                         const MakeSplitOptions& options = {}, std::vector<std::string>* warnings = nullptr);

std::vector<PieceRecord> pieces_from_json(const std::string& text);
std::string pieces_to_json(const std::vector<PieceRecord>& pieces);
std::vector<PieceRecord> load_pieces(const std::filesystem::path& path);

struct BoundingBox {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;

    bool operator==(const BoundingBox&) const = default;
};

/// One staff region: its page location, its slice of the ground truth, and
/// a derived image name.
struct RegionRecord {
    std::string image; // derived region image name
    BoundingBox box;
    std::string kern; // region ground truth, serialized
    std::string score_id;
    int staff_index = 0;

    bool operator==(const RegionRecord&) const = default;
};

/// Pairs the i-th top-to-bottom box with the i-th region of the score.
/// Boxes are sorted by (y, x) first; page_width/height of 0 skip the
/// bounds check.
std::vector<RegionRecord> build_region_records(const kern::KernDocument& score,
                                               const std::vector<BoundingBox>& boxes,
                                               const std::string& score_id, int page_width = 0,
                                               int page_height = 0);

std::vector<BoundingBox> boxes_from_json(const std::string& text);
std::string regions_to_json(const std::vector<RegionRecord>& records);

} // namespace leadsheet::dataset
