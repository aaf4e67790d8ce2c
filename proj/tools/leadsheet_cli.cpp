// leadsheet — command line front end for the lead sheet toolkit.
//
// Machine-readable results go to stdout as JSON; kern documents go to
// stdout as kern text so commands can be piped into each other. Warnings
// and per-item failures go to stderr. Exit codes: 0 success, 1 operation
// failed, 2 usage error.

#include "leadsheet/dataset.hpp"
#include "leadsheet/harte.hpp"
#include "leadsheet/image.hpp"
#include "leadsheet/kern.hpp"
#include "leadsheet/metrics.hpp"
#include "leadsheet/musicxml.hpp"
#include "leadsheet/tokenize.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <opencv2/imgcodecs.hpp>

#include <fnmatch.h>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace leadsheet;

namespace {

// ---------------------------------------------------------------- helpers

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string read_stdin() {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
}

// "" and "-" mean stdin.
std::string read_input(const std::string& arg) {
    if (arg.empty() || arg == "-") return read_stdin();
    return read_file(arg);
}

void write_file(const fs::path& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path.string());
    out << data;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

// Single argument -> bare object, several -> array, for scan-friendly output.
void emit_one_or_many(json&& records) {
    if (records.size() == 1)
        emit(records.front());
    else
        emit(records);
}

bool has_wildcard(const std::string& s) { return s.find_first_of("*?[") != std::string::npos; }

bool extension_matches(const fs::path& p, const std::vector<std::string>& exts) {
    if (exts.empty()) return true;
    std::string e = p.extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
    return std::find(exts.begin(), exts.end(), e) != exts.end();
}

// Expands a mix of files, directories (recursive, filtered by extension)
// and glob patterns into a sorted, de-duplicated path list.
std::vector<fs::path> expand_inputs(const std::vector<std::string>& args,
                                    const std::vector<std::string>& exts) {
    std::vector<fs::path> out;
    for (const std::string& arg : args) {
        if (has_wildcard(arg)) {
            fs::path base;
            for (const fs::path& part : fs::path(arg)) {
                if (has_wildcard(part.string())) break;
                base /= part;
            }
            if (base.empty()) base = ".";
            if (!base.has_filename() && base.has_parent_path()) base = base.parent_path();
            if (!fs::is_directory(base))
                throw std::runtime_error("pattern base is not a directory: " + base.string());
            bool any = false;
            for (const auto& entry : fs::recursive_directory_iterator(base)) {
                if (!entry.is_regular_file()) continue;
                if (fnmatch(arg.c_str(), entry.path().string().c_str(), 0) != 0) continue;
                out.push_back(entry.path());
                any = true;
            }
            if (!any) throw std::runtime_error("pattern matched no files: " + arg);
        } else if (fs::is_directory(arg)) {
            for (const auto& entry : fs::recursive_directory_iterator(arg))
                if (entry.is_regular_file() && extension_matches(entry.path(), exts))
                    out.push_back(entry.path());
        } else if (fs::exists(arg)) {
            out.push_back(arg);
        } else {
            throw std::runtime_error("no such file or directory: " + arg);
        }
    }
    std::sort(out.begin(), out.end(),
              [](const fs::path& a, const fs::path& b) { return a.string() < b.string(); });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Output paths derived from input stems must not collide within one batch.
void check_output_collisions(const std::vector<fs::path>& inputs, const fs::path& out_dir,
                             const std::string& ext) {
    std::map<std::string, fs::path> seen;
    for (const fs::path& p : inputs) {
        std::string name = p.stem().string() + ext;
        auto [it, inserted] = seen.emplace(name, p);
        if (!inserted)
            throw std::runtime_error("output name collision in " + out_dir.string() + ": " +
                                     it->second.string() + " and " + p.string() + " both map to " +
                                     name);
    }
}

template <typename Fn>
void parallel_for(size_t n, unsigned jobs, Fn&& fn) {
    jobs = std::max<unsigned>(1, std::min<size_t>(jobs, n));
    if (jobs <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (unsigned t = 0; t < jobs; ++t)
        workers.emplace_back([&] {
            for (size_t i; (i = next.fetch_add(1)) < n;) fn(i);
        });
    for (std::thread& w : workers) w.join();
}

unsigned default_jobs() {
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? hc : 1;
}

// ----------------------------------------------------------- config tables

struct Tables {
    harte::DegreeTable degrees = harte::DegreeTable::builtin();
    harte::AliasTable aliases = harte::AliasTable::builtin();
    musicxml::KindTable kinds = musicxml::KindTable::builtin();
};

// A config dir may override any of degrees.tsv / aliases.tsv / kinds.tsv.
Tables load_tables(const std::string& dir) {
    Tables t;
    if (dir.empty()) return t;
    fs::path base(dir);
    if (!fs::is_directory(base)) throw std::runtime_error("config dir does not exist: " + dir);
    if (fs::exists(base / "degrees.tsv")) t.degrees = harte::DegreeTable::load((base / "degrees.tsv").string());
    if (fs::exists(base / "aliases.tsv")) t.aliases = harte::AliasTable::load((base / "aliases.tsv").string());
    if (fs::exists(base / "kinds.tsv")) t.kinds = musicxml::KindTable::load((base / "kinds.tsv").string());
    return t;
}

// ------------------------------------------------------------- json views

const char* violation_name(harte::ViolationKind k) {
    switch (k) {
        case harte::ViolationKind::BadRoot: return "bad-root";
        case harte::ViolationKind::UnknownShorthand: return "unknown-shorthand";
        case harte::ViolationKind::DegreeOutOfRange: return "degree-out-of-range";
        case harte::ViolationKind::DuplicateExtension: return "duplicate-extension";
        case harte::ViolationKind::ShorthandExpressible: return "shorthand-expressible";
        case harte::ViolationKind::BadBass: return "bad-bass";
        case harte::ViolationKind::DoubleAccidentalRoot: return "double-accidental-root";
        case harte::ViolationKind::RemovesAbsentDegree: return "removes-absent-degree";
    }
    return "unknown";
}

const char* diagnostic_name(kern::DiagnosticKind k) {
    switch (k) {
        case kern::DiagnosticKind::BadChordToken: return "bad-chord-token";
        case kern::DiagnosticKind::ChordViolation: return "chord-violation";
        case kern::DiagnosticKind::BadMelodyToken: return "bad-melody-token";
        case kern::DiagnosticKind::PolyphonicMelody: return "polyphonic-melody";
        case kern::DiagnosticKind::MeasureDurationMismatch: return "measure-duration-mismatch";
        case kern::DiagnosticKind::UnbalancedTie: return "unbalanced-tie";
        case kern::DiagnosticKind::UnbalancedSlur: return "unbalanced-slur";
        case kern::DiagnosticKind::MissingTerminator: return "missing-terminator";
    }
    return "unknown";
}

const char* line_kind_name(kern::LineKind k) {
    switch (k) {
        case kern::LineKind::ExclusiveInterpretation: return "exclusive";
        case kern::LineKind::Interpretation: return "interpretation";
        case kern::LineKind::Barline: return "barline";
        case kern::LineKind::Data: return "data";
        case kern::LineKind::Comment: return "comment";
        case kern::LineKind::LinebreakMarker: return "linebreak";
    }
    return "unknown";
}

// Best-effort mapping of a parse exception to a violation kind name.
const char* parse_error_kind(const Error& e) {
    if (dynamic_cast<const harte::UnknownShorthandError*>(&e)) return "unknown-shorthand";
    if (dynamic_cast<const harte::DuplicateExtensionError*>(&e)) return "duplicate-extension";
    if (dynamic_cast<const harte::ShorthandExpressibleError*>(&e)) return "shorthand-expressible";
    if (dynamic_cast<const harte::UnknownSurfaceSymbolError*>(&e)) return "unknown-surface-symbol";
    return "syntax";
}

json chord_to_json(const harte::HarteChord& c, const harte::DegreeTable& table) {
    json exts = json::array();
    for (const harte::Extension& e : c.extensions) exts.push_back(e.text());
    json j;
    j["text"] = harte::serialize_chord(c, table);
    j["root"] = c.root;
    j["shorthand"] = c.shorthand;
    j["extensions"] = std::move(exts);
    j["bass"] = c.bass ? json(*c.bass) : json(nullptr);
    return j;
}

json doc_to_json(const kern::KernDocument& doc) {
    json lines = json::array();
    for (const kern::KernLine& l : doc.lines) {
        json rec;
        rec["kind"] = line_kind_name(l.kind);
        if (l.single_field) {
            rec["text"] = l.melody;
        } else {
            rec["melody"] = l.melody;
            rec["chord"] = l.chord;
        }
        lines.push_back(std::move(rec));
    }
    json refs = json::array();
    for (const auto& [key, value] : doc.reference_records())
        refs.push_back(json{{"key", key}, {"value", value}});
    json j;
    j["reference_records"] = std::move(refs);
    j["lines"] = std::move(lines);
    return j;
}

json rates_json(const metrics::PairReport& r) {
    json j;
    j["cer"] = r.cer.rate;
    j["wer"] = r.wer.rate;
    j["ler"] = r.ler.rate;
    return j;
}

json counts_json(const metrics::MetricResult& m) {
    json j;
    j["distance"] = m.counts.distance;
    j["insertions"] = m.counts.insertions;
    j["deletions"] = m.counts.deletions;
    j["substitutions"] = m.counts.substitutions;
    j["ref_length"] = m.ref_length;
    return j;
}

// ------------------------------------------------------------ subcommands

int run_chord_parse(const std::vector<std::string>& texts, const Tables& t) {
    json out = json::array();
    bool failed = false;
    for (const std::string& s : texts) {
        try {
            out.push_back(chord_to_json(harte::parse_chord(s, t.degrees), t.degrees));
        } catch (const Error& e) {
            failed = true;
            std::cerr << "leadsheet: " << s << ": " << e.what() << "\n";
        }
    }
    if (!out.empty()) emit_one_or_many(std::move(out));
    return failed ? 1 : 0;
}

int run_chord_validate(const std::vector<std::string>& texts, const Tables& t) {
    json out = json::array();
    bool any_bad = false;
    for (const std::string& s : texts) {
        json rec;
        rec["text"] = s;
        json violations = json::array();
        bool ok = true;
        try {
            harte::ValidationResult res = harte::validate_chord(harte::parse_chord(s, t.degrees), t.degrees);
            ok = res.ok();
            for (const harte::Violation& v : res.violations)
                violations.push_back(json{{"kind", violation_name(v.kind)},
                                          {"severity", v.warning ? "warning" : "error"},
                                          {"message", v.message}});
        } catch (const Error& e) {
            ok = false;
            violations.push_back(json{{"kind", parse_error_kind(e)}, {"severity", "error"}, {"message", e.what()}});
        }
        rec["ok"] = ok;
        rec["violations"] = std::move(violations);
        any_bad = any_bad || !ok;
        out.push_back(std::move(rec));
    }
    emit_one_or_many(std::move(out));
    return any_bad ? 1 : 0;
}

int run_chord_normalize(const std::vector<std::string>& surfaces, const std::string& root, const Tables& t) {
    json out = json::array();
    bool failed = false;
    for (const std::string& s : surfaces) {
        try {
            harte::HarteChord c = harte::normalize_surface({s}, root, t.aliases, t.degrees);
            json rec;
            rec["surface"] = s;
            rec["root"] = root;
            rec["chord"] = harte::serialize_chord(c, t.degrees);
            out.push_back(std::move(rec));
        } catch (const Error& e) {
            failed = true;
            std::cerr << "leadsheet: " << s << ": " << e.what() << "\n";
        }
    }
    if (!out.empty()) emit_one_or_many(std::move(out));
    return failed ? 1 : 0;
}

int run_kern_parse(const std::string& file, bool as_json, bool lenient) {
    kern::KernDocument doc = kern::parse_kern(read_input(file), {.strict = !lenient});
    if (as_json)
        emit(doc_to_json(doc));
    else
        std::cout << kern::serialize_kern(doc);
    return 0;
}

int run_kern_validate(const std::vector<std::string>& inputs, const Tables& t) {
    std::vector<fs::path> paths = expand_inputs(inputs, {".krn"});
    if (paths.empty()) throw std::runtime_error("no input files");
    json out = json::array();
    bool any_bad = false;
    for (const fs::path& p : paths) {
        json rec;
        rec["file"] = p.string();
        try {
            kern::KernDocument doc = kern::parse_kern(read_file(p), {.strict = false});
            std::vector<kern::Diagnostic> diags = kern::validate_document(doc, t.degrees);
            bool ok = std::none_of(diags.begin(), diags.end(),
                                   [](const kern::Diagnostic& d) { return !d.warning; });
            json list = json::array();
            for (const kern::Diagnostic& d : diags)
                list.push_back(json{{"kind", diagnostic_name(d.kind)},
                                    {"severity", d.warning ? "warning" : "error"},
                                    {"line", d.line},
                                    {"message", d.message}});
            rec["ok"] = ok;
            rec["diagnostics"] = std::move(list);
            any_bad = any_bad || !ok;
        } catch (const Error& e) {
            rec["ok"] = false;
            rec["error"] = e.what();
            any_bad = true;
        }
        out.push_back(std::move(rec));
    }
    emit_one_or_many(std::move(out));
    return any_bad ? 1 : 0;
}

int run_kern_regions(const std::string& file, bool verbatim, const std::string& out_dir) {
    kern::KernDocument doc = kern::parse_kern(read_input(file));
    std::vector<kern::KernDocument> regions = kern::split_regions(doc, !verbatim);
    if (out_dir.empty()) {
        json out = json::array();
        for (size_t i = 0; i < regions.size(); ++i)
            out.push_back(json{{"index", i}, {"kern", kern::serialize_kern(regions[i])}});
        emit(out);
        return 0;
    }
    fs::create_directories(out_dir);
    std::string stem = (file.empty() || file == "-") ? "region" : fs::path(file).stem().string();
    json out = json::array();
    for (size_t i = 0; i < regions.size(); ++i) {
        std::string index = std::to_string(i);
        if (index.size() < 2) index.insert(0, "0");
        fs::path path = fs::path(out_dir) / (stem + "_r" + index + ".krn");
        write_file(path, kern::serialize_kern(regions[i]));
        out.push_back(json{{"index", i}, {"path", path.string()}, {"lines", regions[i].lines.size()}});
    }
    emit(out);
    return 0;
}

int run_kern_strip(const std::string& file, bool drop_linebreaks) {
    kern::KernDocument doc = kern::parse_kern(read_input(file));
    std::cout << kern::serialize_kern(
        kern::strip_annotations(doc, {.keep_linebreak_markers = !drop_linebreaks}));
    return 0;
}

int run_tok_encode(const std::string& file, const std::string& strategy, const std::string& vocab_path,
                   bool bos_eos, bool unk) {
    std::optional<tok::Vocabulary> vocab;
    if (!vocab_path.empty()) vocab = tok::Vocabulary::load(vocab_path);
    tok::Strategy strat = tok::Strategy::Word;
    if (!strategy.empty())
        strat = tok::strategy_from_name(strategy);
    else if (vocab)
        strat = vocab->strategy();
    if (vocab && vocab->strategy() != strat)
        throw std::runtime_error("vocabulary was built with strategy '" +
                                 tok::strategy_name(vocab->strategy()) + "', not '" +
                                 tok::strategy_name(strat) + "'");
    tok::TokenStream stream = tok::tokenize(read_input(file), strat);
    json j;
    j["strategy"] = tok::strategy_name(strat);
    j["tokens"] = stream.tokens;
    if (vocab)
        j["ids"] = tok::encode(stream, *vocab, {.add_bos_eos = bos_eos, .substitute_unknown = unk});
    emit(j);
    return 0;
}

int run_tok_decode(const std::string& file, const std::string& vocab_path) {
    json j = json::parse(read_input(file));
    tok::TokenStream stream;
    if (j.contains("tokens")) {
        stream.strategy = tok::strategy_from_name(j.at("strategy").get<std::string>());
        stream.tokens = j.at("tokens").get<std::vector<std::string>>();
    } else if (j.contains("ids")) {
        if (vocab_path.empty())
            throw std::runtime_error("input has only ids; pass --vocab to decode them");
        tok::Vocabulary vocab = tok::Vocabulary::load(vocab_path);
        std::vector<int32_t> ids = j.at("ids").get<std::vector<int32_t>>();
        stream = tok::decode(ids, vocab);
    } else {
        throw std::runtime_error("input JSON has neither 'tokens' nor 'ids'");
    }
    std::cout << tok::detokenize(stream);
    return 0;
}

int run_tok_vocab(const std::vector<std::string>& inputs, const std::string& strategy,
                  const std::string& out_path) {
    std::vector<fs::path> paths = expand_inputs(inputs, {".krn"});
    if (paths.empty()) throw std::runtime_error("no input files");
    std::vector<std::string> corpus, names;
    corpus.reserve(paths.size());
    names.reserve(paths.size());
    for (const fs::path& p : paths) {
        corpus.push_back(read_file(p));
        names.push_back(p.string());
    }
    tok::Vocabulary vocab = tok::build_vocabulary(corpus, tok::strategy_from_name(strategy), names);
    if (out_path.empty()) {
        std::string text = vocab.to_json();
        if (text.empty() || text.back() != '\n') text += '\n';
        std::cout << text;
    } else {
        vocab.save(out_path);
        json j;
        j["strategy"] = tok::strategy_name(vocab.strategy());
        j["size"] = vocab.size();
        j["documents"] = paths.size();
        j["path"] = out_path;
        emit(j);
    }
    return 0;
}

int run_score(const std::string& ref_arg, const std::string& hyp_arg, bool per_pair) {
    fs::path ref(ref_arg), hyp(hyp_arg);
    std::vector<std::pair<std::string, std::string>> pairs;
    std::vector<std::string> names;
    if (fs::is_directory(ref)) {
        if (!fs::is_directory(hyp))
            throw std::runtime_error("--ref is a directory, so --hyp must be one too");
        std::vector<fs::path> rels;
        for (const auto& entry : fs::recursive_directory_iterator(ref))
            if (entry.is_regular_file()) rels.push_back(fs::relative(entry.path(), ref));
        std::sort(rels.begin(), rels.end(),
                  [](const fs::path& a, const fs::path& b) { return a.string() < b.string(); });
        if (rels.empty()) throw std::runtime_error("reference directory is empty: " + ref.string());
        for (const fs::path& rel : rels) {
            fs::path other = hyp / rel;
            if (!fs::exists(other))
                throw std::runtime_error("hypothesis file missing for " + rel.string() + ": " +
                                         other.string());
            pairs.emplace_back(read_file(ref / rel), read_file(other));
            names.push_back(rel.string());
        }
    } else {
        pairs.emplace_back(read_file(ref), read_file(hyp));
        names.push_back(ref.string());
    }
    metrics::CorpusReport report = metrics::corpus_report(pairs);
    json j = rates_json(report.micro);
    j["macro"] = rates_json(report.macro_mean);
    json counts;
    counts["cer"] = counts_json(report.micro.cer);
    counts["wer"] = counts_json(report.micro.wer);
    counts["ler"] = counts_json(report.micro.ler);
    j["counts"] = std::move(counts);
    if (per_pair) {
        json list = json::array();
        for (size_t i = 0; i < report.pairs.size(); ++i) {
            json rec = rates_json(report.pairs[i]);
            rec.insert(rec.begin(), {"file", names[i]});
            list.push_back(std::move(rec));
        }
        j["pairs"] = std::move(list);
    }
    emit(j);
    return 0;
}

int run_convert(const std::vector<std::string>& inputs, const std::string& out_dir,
                const musicxml::ConvertOptions& copts, unsigned jobs) {
    if (inputs.empty()) {
        std::vector<std::string> warnings;
        kern::KernDocument doc = musicxml::convert_score(read_stdin(), copts, &warnings);
        for (const std::string& w : warnings) std::cerr << "leadsheet: warning: " << w << "\n";
        std::cout << kern::serialize_kern(doc);
        return 0;
    }
    std::vector<fs::path> paths = expand_inputs(inputs, {".xml", ".musicxml", ".mxl"});
    if (paths.empty()) throw std::runtime_error("no input files");
    if (paths.size() == 1 && out_dir.empty()) {
        std::vector<std::string> warnings;
        kern::KernDocument doc = musicxml::convert_file(paths.front(), copts, &warnings);
        for (const std::string& w : warnings) std::cerr << "leadsheet: warning: " << w << "\n";
        std::cout << kern::serialize_kern(doc);
        return 0;
    }
    if (out_dir.empty()) throw std::runtime_error("--out is required for batch conversion");
    check_output_collisions(paths, out_dir, ".krn");
    fs::create_directories(out_dir);
    std::vector<json> results(paths.size());
    std::atomic<size_t> failures{0};
    parallel_for(paths.size(), jobs, [&](size_t i) {
        json rec;
        rec["input"] = paths[i].string();
        try {
            std::vector<std::string> warnings;
            kern::KernDocument doc = musicxml::convert_file(paths[i], copts, &warnings);
            fs::path out_path = fs::path(out_dir) / (paths[i].stem().string() + ".krn");
            write_file(out_path, kern::serialize_kern(doc));
            rec["ok"] = true;
            rec["output"] = out_path.string();
            rec["warnings"] = warnings;
        } catch (const std::exception& e) {
            rec["ok"] = false;
            rec["error"] = e.what();
            failures.fetch_add(1);
        }
        results[i] = std::move(rec);
    });
    json j;
    j["converted"] = paths.size() - failures.load();
    j["failed"] = failures.load();
    j["results"] = json(std::move(results));
    emit(j);
    return failures.load() ? 1 : 0;
}

int run_split(const std::string& pieces_path, const std::string& ratios_arg, std::uint64_t seed,
              bool strict, const std::string& out_path) {
    dataset::SplitRatios ratios;
    if (!ratios_arg.empty()) {
        std::istringstream ss(ratios_arg);
        char c1 = 0, c2 = 0;
        if (!(ss >> ratios.train >> c1 >> ratios.val >> c2 >> ratios.test) || c1 != ',' || c2 != ',' ||
            !(ss >> std::ws).eof())
            throw std::runtime_error("--ratios expects three comma-separated numbers, e.g. 0.7,0.1,0.2");
    }
    std::vector<dataset::PieceRecord> pieces = dataset::load_pieces(pieces_path);
    std::vector<std::string> warnings;
    dataset::SplitManifest manifest = dataset::make_split(pieces, ratios, seed, {.strict = strict}, &warnings);
    for (const std::string& w : warnings) std::cerr << "leadsheet: warning: " << w << "\n";
    if (out_path.empty()) {
        std::cout << manifest.to_json();
        return 0;
    }
    manifest.save(out_path);
    json j;
    j["pieces"] = manifest.assignment.size();
    j["train"] = manifest.count(dataset::Subset::Train);
    j["val"] = manifest.count(dataset::Subset::Val);
    j["test"] = manifest.count(dataset::Subset::Test);
    j["forced_train"] = manifest.forced_train.size();
    j["path"] = out_path;
    emit(j);
    return 0;
}

int run_regions(const std::string& score_path, const std::string& boxes_path, std::string score_id,
                int page_width, int page_height, const std::string& out_path) {
    kern::KernDocument doc = kern::parse_kern(read_file(score_path));
    std::vector<dataset::BoundingBox> boxes = dataset::boxes_from_json(read_file(boxes_path));
    if (score_id.empty()) score_id = fs::path(score_path).stem().string();
    std::vector<dataset::RegionRecord> records =
        dataset::build_region_records(doc, boxes, score_id, page_width, page_height);
    std::string text = dataset::regions_to_json(records);
    if (text.empty() || text.back() != '\n') text += '\n';
    if (out_path.empty()) {
        std::cout << text;
        return 0;
    }
    write_file(out_path, text);
    json j;
    j["regions"] = records.size();
    j["score_id"] = score_id;
    j["path"] = out_path;
    emit(j);
    return 0;
}

int run_preprocess(const std::vector<std::string>& inputs, const std::string& out_dir,
                   const std::string& format, bool binarize, unsigned jobs) {
    std::vector<fs::path> paths =
        expand_inputs(inputs, {".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff"});
    if (paths.empty()) throw std::runtime_error("no input files");
    if (!out_dir.empty()) {
        check_output_collisions(paths, out_dir, format == "png" ? ".png" : ".npy");
        fs::create_directories(out_dir);
    }
    image::PreprocessOptions opts{.binarize = binarize};
    std::vector<json> results(paths.size());
    std::atomic<size_t> failures{0};
    parallel_for(paths.size(), jobs, [&](size_t i) {
        json rec;
        rec["input"] = paths[i].string();
        try {
            image::NormalizedImage img = image::preprocess_image(paths[i], opts);
            rec["height"] = img.height;
            rec["width"] = img.width;
            rec["content_height"] = img.content_height;
            rec["content_width"] = img.content_width;
            if (!out_dir.empty()) {
                std::string stem = paths[i].stem().string();
                json outputs = json::array();
                if (format == "npy" || format == "both") {
                    fs::path p = fs::path(out_dir) / (stem + ".npy");
                    image::save_npy(img, p);
                    outputs.push_back(p.string());
                }
                if (format == "png" || format == "both") {
                    fs::path p = fs::path(out_dir) / (stem + ".png");
                    if (!cv::imwrite(p.string(), image::to_mat(img)))
                        throw std::runtime_error("cannot write image: " + p.string());
                    outputs.push_back(p.string());
                }
                rec["outputs"] = std::move(outputs);
            }
            rec["ok"] = true;
        } catch (const std::exception& e) {
            rec["ok"] = false;
            rec["error"] = e.what();
            failures.fetch_add(1);
        }
        results[i] = std::move(rec);
    });
    if (paths.size() == 1) {
        emit(results.front());
    } else {
        json j;
        j["processed"] = paths.size() - failures.load();
        j["failed"] = failures.load();
        j["results"] = json(std::move(results));
        emit(j);
    }
    return failures.load() ? 1 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tools for two-spine kern lead sheets: Harte chords, tokenization,\n"
                 "recognition metrics, MusicXML conversion, dataset preparation."};
    app.set_version_flag("--version", "leadsheet 0.1.0");
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Print help for all subcommands");

    std::string config_dir;
    app.add_option("--config-dir", config_dir,
                   "Directory with table overrides (degrees.tsv, aliases.tsv, kinds.tsv)")
        ->envname("LEADSHEET_CONFIG_DIR");

    const std::vector<std::string> strategies = {"word", "char", "medium"};

    // chord ---------------------------------------------------------------
    CLI::App* chord = app.add_subcommand("chord", "Harte chord grammar operations");
    chord->require_subcommand(1);

    std::vector<std::string> chord_texts;
    CLI::App* chord_parse = chord->add_subcommand("parse", "Parse chords and print their structure");
    chord_parse->add_option("chord", chord_texts, "Chord text, e.g. C:7(b9)")->required();

    std::vector<std::string> chord_val_texts;
    CLI::App* chord_validate = chord->add_subcommand("validate", "Validate chords against the grammar");
    chord_validate->add_option("chord", chord_val_texts, "Chord text")->required();

    std::vector<std::string> chord_surfaces;
    std::string chord_root;
    CLI::App* chord_normalize =
        chord->add_subcommand("normalize", "Resolve score spellings to canonical chords");
    chord_normalize->add_option("surface", chord_surfaces, "Quality spelling, e.g. Δ7 or -7")->required();
    chord_normalize->add_option("--root", chord_root, "Chord root, e.g. Bb")->required();

    // kern ----------------------------------------------------------------
    CLI::App* kern_cmd = app.add_subcommand("kern", "Two-spine kern document operations");
    kern_cmd->require_subcommand(1);

    std::string kp_file = "-";
    bool kp_json = false, kp_lenient = false;
    CLI::App* kern_parse = kern_cmd->add_subcommand("parse", "Parse and reprint a document, normalized");
    kern_parse->add_option("file", kp_file, "Input file, - for stdin");
    kern_parse->add_flag("--json", kp_json, "Print the parsed structure as JSON");
    kern_parse->add_flag("--lenient", kp_lenient, "Keep malformed fields instead of failing");

    std::vector<std::string> kv_inputs;
    CLI::App* kern_validate = kern_cmd->add_subcommand("validate", "Run document diagnostics");
    kern_validate->add_option("input", kv_inputs, "Files, directories or globs")->required();

    std::string kr_file = "-", kr_out;
    bool kr_verbatim = false;
    CLI::App* kern_regions = kern_cmd->add_subcommand("regions", "Split a document at line breaks");
    kern_regions->add_option("file", kr_file, "Input file, - for stdin");
    kern_regions->add_flag("--verbatim", kr_verbatim, "Plain slices without carried context");
    kern_regions->add_option("--out", kr_out, "Write one .krn per region into this directory");

    std::string ks_file = "-";
    bool ks_drop = false;
    CLI::App* kern_strip = kern_cmd->add_subcommand("strip", "Drop comments and measure numbers");
    kern_strip->add_option("file", ks_file, "Input file, - for stdin");
    kern_strip->add_flag("--drop-linebreaks", ks_drop, "Also drop line-break markers");

    // tok -----------------------------------------------------------------
    CLI::App* tok_cmd = app.add_subcommand("tok", "Tokenization for sequence models");
    tok_cmd->require_subcommand(1);

    std::string te_file = "-", te_strategy, te_vocab;
    bool te_bos = false, te_unk = false;
    CLI::App* tok_encode = tok_cmd->add_subcommand("encode", "Kern text to tokens (and ids with --vocab)");
    tok_encode->add_option("file", te_file, "Input file, - for stdin");
    tok_encode->add_option("--strategy", te_strategy, "word, char or medium")
        ->check(CLI::IsMember(strategies));
    tok_encode->add_option("--vocab", te_vocab, "Vocabulary JSON for id encoding");
    tok_encode->add_flag("--bos-eos", te_bos, "Frame the id sequence with <bos>/<eos>");
    tok_encode->add_flag("--unk", te_unk, "Map out-of-vocabulary tokens to <unk>");

    std::string td_file = "-", td_vocab;
    CLI::App* tok_decode = tok_cmd->add_subcommand("decode", "Token/id JSON back to kern text");
    tok_decode->add_option("file", td_file, "Input JSON file, - for stdin");
    tok_decode->add_option("--vocab", td_vocab, "Vocabulary JSON, required for id input");

    std::vector<std::string> tv_inputs;
    std::string tv_strategy = "word", tv_out;
    CLI::App* tok_vocab = tok_cmd->add_subcommand("vocab", "Build a vocabulary from a corpus");
    tok_vocab->add_option("input", tv_inputs, "Files, directories or globs (.krn)")->required();
    tok_vocab->add_option("--strategy", tv_strategy, "word, char or medium")
        ->check(CLI::IsMember(strategies));
    tok_vocab->add_option("--out", tv_out, "Write the vocabulary JSON here");

    // score ---------------------------------------------------------------
    std::string sc_ref, sc_hyp;
    bool sc_pairs = false;
    CLI::App* score = app.add_subcommand("score", "CER/WER/LER between reference and hypothesis");
    score->add_option("--ref", sc_ref, "Reference file or directory")->required();
    score->add_option("--hyp", sc_hyp, "Hypothesis file or directory")->required();
    score->add_flag("--pairs", sc_pairs, "Include per-pair rates");

    // convert -------------------------------------------------------------
    std::vector<std::string> cv_inputs;
    std::string cv_out;
    bool cv_top = false, cv_strict = false, cv_lyrics = false;
    unsigned cv_jobs = default_jobs();
    CLI::App* convert = app.add_subcommand("convert", "MusicXML (.xml/.musicxml/.mxl) to kern");
    convert->add_option("input", cv_inputs, "Files, directories or globs; none reads XML from stdin");
    convert->add_option("--out", cv_out, "Output directory for batch conversion");
    convert->add_flag("--top-voice", cv_top, "Keep the top voice instead of failing on polyphony");
    convert->add_flag("--strict-harmony", cv_strict, "Treat harmony warnings as errors");
    convert->add_flag("--keep-lyrics", cv_lyrics, "Accepted for compatibility; lyrics are dropped");
    convert->add_option("--jobs", cv_jobs, "Worker threads for batch conversion")
        ->check(CLI::Range(1u, 256u));

    // split ---------------------------------------------------------------
    std::string sp_pieces, sp_ratios, sp_out;
    std::uint64_t sp_seed = 0;
    bool sp_strict = false;
    CLI::App* split = app.add_subcommand("split", "Deterministic train/val/test split over pieces");
    split->add_option("pieces", sp_pieces, "Piece list JSON")->required()->check(CLI::ExistingFile);
    split->add_option("--seed", sp_seed, "Shuffle seed")->required();
    split->add_option("--ratios", sp_ratios, "train,val,test (default 0.7,0.1,0.2)");
    split->add_flag("--strict", sp_strict, "Fail if forced-train pieces exceed the train quota");
    split->add_option("--out", sp_out, "Write the manifest here instead of stdout");

    // regions -------------------------------------------------------------
    std::string rg_score, rg_boxes, rg_id, rg_out;
    int rg_w = 0, rg_h = 0;
    CLI::App* regions = app.add_subcommand("regions", "Pair staff bounding boxes with kern regions");
    regions->add_option("--score", rg_score, "Full-score kern file")->required()->check(CLI::ExistingFile);
    regions->add_option("--boxes", rg_boxes, "Bounding-box JSON")->required()->check(CLI::ExistingFile);
    regions->add_option("--score-id", rg_id, "Score id (default: score file stem)");
    regions->add_option("--page-width", rg_w, "Page width for bounds checking");
    regions->add_option("--page-height", rg_h, "Page height for bounds checking");
    regions->add_option("--out", rg_out, "Write the region JSON here instead of stdout");

    // preprocess ----------------------------------------------------------
    std::vector<std::string> pp_inputs;
    std::string pp_out, pp_format = "npy";
    bool pp_binarize = false;
    unsigned pp_jobs = default_jobs();
    CLI::App* preprocess = app.add_subcommand("preprocess", "Normalize staff images to 1x128x1000");
    preprocess->add_option("input", pp_inputs, "Image files, directories or globs")->required();
    preprocess->add_option("--out", pp_out, "Output directory");
    preprocess->add_option("--format", pp_format, "npy, png or both")
        ->check(CLI::IsMember({"npy", "png", "both"}));
    preprocess->add_flag("--binarize", pp_binarize, "Otsu-binarize the content region");
    preprocess->add_option("--jobs", pp_jobs, "Worker threads")->check(CLI::Range(1u, 256u));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        Tables tables = load_tables(config_dir);
        if (chord_parse->parsed()) return run_chord_parse(chord_texts, tables);
        if (chord_validate->parsed()) return run_chord_validate(chord_val_texts, tables);
        if (chord_normalize->parsed()) return run_chord_normalize(chord_surfaces, chord_root, tables);
        if (kern_parse->parsed()) return run_kern_parse(kp_file, kp_json, kp_lenient);
        if (kern_validate->parsed()) return run_kern_validate(kv_inputs, tables);
        if (kern_regions->parsed()) return run_kern_regions(kr_file, kr_verbatim, kr_out);
        if (kern_strip->parsed()) return run_kern_strip(ks_file, ks_drop);
        if (tok_encode->parsed()) return run_tok_encode(te_file, te_strategy, te_vocab, te_bos, te_unk);
        if (tok_decode->parsed()) return run_tok_decode(td_file, td_vocab);
        if (tok_vocab->parsed()) return run_tok_vocab(tv_inputs, tv_strategy, tv_out);
        if (score->parsed()) return run_score(sc_ref, sc_hyp, sc_pairs);
        if (convert->parsed()) {
            musicxml::ConvertOptions copts;
            copts.top_voice = cv_top;
            copts.strict_harmony = cv_strict;
            copts.keep_lyrics = cv_lyrics;
            copts.kinds = &tables.kinds;
            copts.degrees = &tables.degrees;
            return run_convert(cv_inputs, cv_out, copts, cv_jobs);
        }
        if (split->parsed()) return run_split(sp_pieces, sp_ratios, sp_seed, sp_strict, sp_out);
        if (regions->parsed()) return run_regions(rg_score, rg_boxes, rg_id, rg_w, rg_h, rg_out);
        if (preprocess->parsed()) return run_preprocess(pp_inputs, pp_out, pp_format, pp_binarize, pp_jobs);
    } catch (const std::exception& e) {
        std::cerr << "leadsheet: error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
