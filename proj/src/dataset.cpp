#include "leadsheet/dataset.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

using nlohmann::json;
using nlohmann::ordered_json;

namespace leadsheet::dataset {

const char* subset_name(Subset s) {
    switch (s) {
    case Subset::Train: return "train";
    case Subset::Val: return "val";
    case Subset::Test: return "test";
    }
    return "?";
}

Subset subset_from_name(const std::string& name) {
    if (name == "train") return Subset::Train;
    if (name == "val") return Subset::Val;
    if (name == "test") return Subset::Test;
    throw ManifestError("unknown subset name '" + name + "'");
}

size_t SplitManifest::count(Subset s) const {
    size_t n = 0;
    for (const auto& [id, subset] : assignment)
        if (subset == s) ++n;
    return n;
}

std::string SplitManifest::to_json() const {
    ordered_json j;
    j["seed"] = seed;
    j["ratios"] = {{"train", ratios.train}, {"val", ratios.val}, {"test", ratios.test}};
    j["forced_train"] = forced_train; // std::set iterates sorted
    ordered_json a = ordered_json::object();
    for (const auto& [id, subset] : assignment) a[id] = subset_name(subset); // std::map iterates sorted
    j["assignment"] = std::move(a);
    return j.dump(2) + "\n";
}

SplitManifest SplitManifest::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ManifestError(std::string("bad split manifest: ") + e.what());
    }
    SplitManifest m;
    try {
        m.seed = j.at("seed").get<std::uint64_t>();
        m.ratios.train = j.at("ratios").at("train").get<double>();
        m.ratios.val = j.at("ratios").at("val").get<double>();
        m.ratios.test = j.at("ratios").at("test").get<double>();
        for (const auto& id : j.at("forced_train")) m.forced_train.insert(id.get<std::string>());
        for (const auto& [id, subset] : j.at("assignment").items())
            m.assignment[id] = subset_from_name(subset.get<std::string>());
    } catch (const json::exception& e) {
        throw ManifestError(std::string("bad split manifest: ") + e.what());
    }
    return m;
}

void SplitManifest::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << to_json();
}

SplitManifest SplitManifest::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

SplitManifest make_split(const std::vector<PieceRecord>& pieces, const SplitRatios& ratios, std::uint64_t seed,
                         const MakeSplitOptions& options, std::vector<std::string>* warnings) {
    auto warn = [&](const std::string& msg) {
        if (warnings) warnings->push_back(msg);
    };

    if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0 ||
        std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
        throw InfeasibleRatiosError("split ratios must be non-negative and sum to 1");
    }

    SplitManifest manifest;
    manifest.seed = seed;
    manifest.ratios = ratios;

    if (pieces.empty()) {
        if (options.strict) throw InfeasibleRatiosError("no pieces to split");
        warn("no pieces to split; manifest is empty");
        return manifest;
    }

    std::vector<std::string> free_ids;
    std::set<std::string> seen_ids;
    for (const PieceRecord& p : pieces) {
        if (p.piece_id.empty()) throw ManifestError("piece with empty id");
        if (p.copies.empty()) throw ManifestError("piece '" + p.piece_id + "' has no copies");
        if (!seen_ids.insert(p.piece_id).second)
            throw ManifestError("duplicate piece id '" + p.piece_id + "'");
        if (p.copies.size() > 1) {
            manifest.forced_train.insert(p.piece_id);
            manifest.assignment[p.piece_id] = Subset::Train;
        } else {
            free_ids.push_back(p.piece_id);
        }
    }

    const size_t n = pieces.size();
    size_t val_n = static_cast<size_t>(std::floor(ratios.val * static_cast<double>(n)));
    size_t test_n = static_cast<size_t>(std::floor(ratios.test * static_cast<double>(n)));
    const size_t train_n = n - val_n - test_n;

    if (manifest.forced_train.size() > train_n) {
        std::string msg = "forced-train pieces (" + std::to_string(manifest.forced_train.size()) +
                          ") exceed the train quota (" + std::to_string(train_n) + ")";
        if (options.strict) throw InfeasibleRatiosError(msg);
        warn(msg + "; val/test shrink accordingly");
    }

    // Deterministic order: sort, then a hand-rolled Fisher-Yates over the
    // standardized mt19937_64 stream (std::shuffle output is not pinned
    // across standard libraries).
    std::sort(free_ids.begin(), free_ids.end());
    std::mt19937_64 gen(seed);
    for (size_t i = free_ids.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(gen() % i);
        std::swap(free_ids[i - 1], free_ids[j]);
    }

    val_n = std::min(val_n, free_ids.size());
    test_n = std::min(test_n, free_ids.size() - val_n);
    for (size_t i = 0; i < free_ids.size(); ++i) {
        Subset s = i < val_n ? Subset::Val : i < val_n + test_n ? Subset::Test : Subset::Train;
        manifest.assignment[free_ids[i]] = s;
    }
    return manifest;
}

std::vector<PieceRecord> pieces_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ManifestError(std::string("bad pieces manifest: ") + e.what());
    }
    if (j.is_object() && j.contains("pieces")) j = j["pieces"];
    if (!j.is_array()) throw ManifestError("pieces manifest must be an array of records");
    std::vector<PieceRecord> out;
    for (const auto& item : j) {
        PieceRecord p;
        try {
            p.piece_id = item.at("piece_id").get<std::string>();
            for (const auto& c : item.at("copies")) p.copies.push_back(c.get<std::string>());
            if (item.contains("synthetic"))
                for (const auto& s : item["synthetic"]) p.synthetic.push_back(s.get<std::string>());
        } catch (const json::exception& e) {
            throw ManifestError(std::string("bad piece record: ") + e.what());
        }
        out.push_back(std::move(p));
    }
    return out;
}

std::string pieces_to_json(const std::vector<PieceRecord>& pieces) {
    ordered_json arr = ordered_json::array();
    for (const PieceRecord& p : pieces) {
        ordered_json j;
        j["piece_id"] = p.piece_id;
        j["copies"] = p.copies;
        j["synthetic"] = p.synthetic;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

std::vector<PieceRecord> load_pieces(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return pieces_from_json(buf.str());
}

std::vector<RegionRecord> build_region_records(const kern::KernDocument& score,
                                               const std::vector<BoundingBox>& boxes,
                                               const std::string& score_id, int page_width, int page_height) {
    auto regions = kern::split_regions(score, /*include_context=*/true);
    if (regions.size() != boxes.size()) {
        throw CountMismatchError("score '" + score_id + "': " + std::to_string(boxes.size()) +
                                 " bounding boxes but " + std::to_string(regions.size()) + " kern regions");
    }

    std::vector<BoundingBox> ordered = boxes;
    std::stable_sort(ordered.begin(), ordered.end(), [](const BoundingBox& a, const BoundingBox& b) {
        return a.y != b.y ? a.y < b.y : a.x < b.x;
    });

    std::vector<RegionRecord> out;
    for (size_t i = 0; i < ordered.size(); ++i) {
        const BoundingBox& b = ordered[i];
        if (b.width <= 0 || b.height <= 0)
            throw ManifestError("score '" + score_id + "': degenerate box at staff " + std::to_string(i));
        if (b.x < 0 || b.y < 0)
            throw ManifestError("score '" + score_id + "': box at staff " + std::to_string(i) +
                                " has negative origin");
        if ((page_width > 0 && b.x + b.width > page_width) ||
            (page_height > 0 && b.y + b.height > page_height)) {
            throw ManifestError("score '" + score_id + "': box at staff " + std::to_string(i) +
                                " exceeds the page bounds");
        }
        RegionRecord r;
        std::string index = std::to_string(i);
        if (index.size() < 2) index.insert(0, "0");
        r.image = score_id + "_r" + index + ".png";
        r.box = b;
        r.kern = kern::serialize_kern(regions[i]);
        r.score_id = score_id;
        r.staff_index = static_cast<int>(i);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<BoundingBox> boxes_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ManifestError(std::string("bad box manifest: ") + e.what());
    }
    if (j.is_object() && j.contains("boxes")) j = j["boxes"];
    if (!j.is_array()) throw ManifestError("box manifest must be an array of {x,y,width,height}");
    std::vector<BoundingBox> out;
    for (const auto& item : j) {
        try {
            out.push_back({item.at("x").get<int>(), item.at("y").get<int>(), item.at("width").get<int>(),
                           item.at("height").get<int>()});
        } catch (const json::exception& e) {
            throw ManifestError(std::string("bad bounding box: ") + e.what());
        }
    }
    return out;
}

std::string regions_to_json(const std::vector<RegionRecord>& records) {
    ordered_json arr = ordered_json::array();
    for (const RegionRecord& r : records) {
        ordered_json j;
        j["image"] = r.image;
        j["box"] = {{"x", r.box.x}, {"y", r.box.y}, {"width", r.box.width}, {"height", r.box.height}};
        j["kern"] = r.kern;
        j["score_id"] = r.score_id;
        j["staff_index"] = r.staff_index;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

} // namespace leadsheet::dataset
