#include "leadsheet/harte.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace leadsheet::harte {

namespace {

const std::vector<std::string> kShorthands = {
    "aug", "aug7", "dim", "dim7", "hdim7", "maj", "maj11", "maj13",
    "maj6", "maj7", "maj9", "min", "min11", "min13", "min6", "min7",
    "min9", "minmaj7", "sus2", "sus4", "11", "13", "7", "9",
};

bool is_accidental(char c) { return c == '#' || c == 'b'; }

// "b9" -> {accidentals "b", degree 9}; returns false on malformed input.
bool split_degree(const std::string& s, std::string& acc, int& degree) {
    size_t i = 0;
    while (i < s.size() && is_accidental(s[i])) ++i;
    if (i > 0 && s[0] == '#' && s.find('b') != std::string::npos) return false;
    if (i > 0 && s[0] == 'b' && s.find('#') != std::string::npos) return false;
    if (i == s.size()) return false;
    for (size_t j = i; j < s.size(); ++j) {
        if (!std::isdigit(static_cast<unsigned char>(s[j]))) return false;
    }
    acc = s.substr(0, i);
    degree = std::stoi(s.substr(i));
    return true;
}

std::set<std::string> expand(const std::string& shorthand, const std::vector<Extension>& extensions,
                             const DegreeTable& table) {
    std::set<std::string> degrees;
    degrees.insert("1");
    for (const auto& d : table.degrees(shorthand)) degrees.insert(d);
    for (const auto& e : extensions) {
        if (!e.removal) degrees.insert(e.accidentals + std::to_string(e.degree));
    }
    for (const auto& e : extensions) {
        if (e.removal) degrees.erase(e.accidentals + std::to_string(e.degree));
    }
    return degrees;
}

// The grammar forbids an encoding whose degrees could be folded into a
// single shorthand: C:maj(7) must be written C:maj7, and C:maj(7,b9)
// must be written C:maj7(b9).
std::optional<std::string> expressible_as(const HarteChord& chord, const DegreeTable& table) {
    if (chord.extensions.empty()) return std::nullopt;

    const auto full = expand(chord.shorthand, chord.extensions, table);
    for (const auto& [name, degs] : table.entries()) {
        std::set<std::string> s(degs.begin(), degs.end());
        s.insert("1");
        if (s == full) return name;
    }

    // Any subset of the added degrees that completes another shorthand
    // means that shorthand should have been used instead.
    std::vector<std::string> added;
    for (const auto& e : chord.extensions) {
        if (!e.removal) added.push_back(e.accidentals + std::to_string(e.degree));
    }
    std::sort(added.begin(), added.end());
    added.erase(std::unique(added.begin(), added.end()), added.end());
    if (added.empty() || added.size() > 16) return std::nullopt;

    std::set<std::string> base(table.degrees(chord.shorthand).begin(), table.degrees(chord.shorthand).end());
    base.insert("1");
    for (unsigned mask = 1; mask < (1u << added.size()); ++mask) {
        std::set<std::string> combined = base;
        for (size_t i = 0; i < added.size(); ++i) {
            if (mask & (1u << i)) combined.insert(added[i]);
        }
        for (const auto& [name, degs] : table.entries()) {
            if (name == chord.shorthand) continue;
            std::set<std::string> s(degs.begin(), degs.end());
            s.insert("1");
            if (s == combined) return name;
        }
    }
    return std::nullopt;
}

std::vector<std::string> parse_degree_list(const std::string& csv) {
    std::vector<std::string> out;
    std::string item;
    std::stringstream ss(csv);
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// Key/value config lines: "key<TAB>value", '#' starts a comment.
std::vector<std::pair<std::string, std::string>> read_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file: " + path);
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw Error(path + ":" + std::to_string(lineno) + ": expected key<TAB>value");
        }
        out.emplace_back(line.substr(0, tab), line.substr(tab + 1));
    }
    return out;
}

} // namespace

std::string Extension::text() const {
    std::string s;
    if (removal) s += "no";
    s += accidentals;
    s += std::to_string(degree);
    return s;
}

const std::vector<std::string>& shorthand_list() { return kShorthands; }

bool is_valid_root(const std::string& root) {
    if (root.empty()) return false;
    if (root[0] < 'A' || root[0] > 'G') return false;
    for (size_t i = 1; i < root.size(); ++i) {
        if (!is_accidental(root[i])) return false;
    }
    // mixed #/b spellings are nonsense
    if (root.find('#') != std::string::npos && root.find('b') != std::string::npos) return false;
    return true;
}

bool is_valid_degree_string(const std::string& degree) {
    std::string acc;
    int value = 0;
    return split_degree(degree, acc, value) && value >= 1 && value <= 13;
}

const DegreeTable& DegreeTable::builtin() {
    static const DegreeTable t = [] {
        DegreeTable t;
        t.table_ = {
            {"maj", {"3", "5"}},
            {"min", {"b3", "5"}},
            {"dim", {"b3", "b5"}},
            {"aug", {"3", "#5"}},
            {"maj7", {"3", "5", "7"}},
            {"min7", {"b3", "5", "b7"}},
            {"7", {"3", "5", "b7"}},
            {"dim7", {"b3", "b5", "bb7"}},
            {"hdim7", {"b3", "b5", "b7"}},
            {"minmaj7", {"b3", "5", "7"}},
            {"aug7", {"3", "#5", "b7"}},
            {"maj6", {"3", "5", "6"}},
            {"min6", {"b3", "5", "6"}},
            {"9", {"3", "5", "b7", "9"}},
            {"maj9", {"3", "5", "7", "9"}},
            {"min9", {"b3", "5", "b7", "9"}},
            {"11", {"3", "5", "b7", "9", "11"}},
            {"maj11", {"3", "5", "7", "9", "11"}},
            {"min11", {"b3", "5", "b7", "9", "11"}},
            {"13", {"3", "5", "b7", "9", "11", "13"}},
            {"maj13", {"3", "5", "7", "9", "11", "13"}},
            {"min13", {"b3", "5", "b7", "9", "11", "13"}},
            {"sus2", {"2", "5"}},
            {"sus4", {"4", "5"}},
        };
        return t;
    }();
    return t;
}

DegreeTable DegreeTable::load(const std::string& path) {
    DegreeTable t = builtin();
    for (const auto& [key, value] : read_kv_file(path)) {
        auto degrees = parse_degree_list(value);
        for (const auto& d : degrees) {
            if (!is_valid_degree_string(d)) {
                throw Error(path + ": bad degree '" + d + "' for shorthand '" + key + "'");
            }
        }
        t.table_[key] = degrees;
    }
    return t;
}

bool DegreeTable::contains(const std::string& shorthand) const {
    return table_.count(shorthand) > 0;
}

const std::vector<std::string>& DegreeTable::degrees(const std::string& shorthand) const {
    auto it = table_.find(shorthand);
    if (it == table_.end()) throw UnknownShorthandError("unknown shorthand: " + shorthand);
    return it->second;
}

const AliasTable& AliasTable::builtin() {
    static const AliasTable t = [] {
        AliasTable t;
        t.table_ = {
            {"Δ", "maj7"},   {"Δ7", "maj7"},  {"M7", "maj7"},
            {"-", "min"},    {"m", "min"},    {"mi", "min"},
            {"-7", "min7"},  {"m7", "min7"},  {"mi7", "min7"},
            {"ø", "hdim7"},  {"ø7", "hdim7"}, {"m7b5", "hdim7"},
            {"°", "dim"},    {"o", "dim"},
            {"°7", "dim7"},  {"o7", "dim7"},
            {"+", "aug"},    {"+7", "aug7"},
            {"M", "maj"},    {"M6", "maj6"},  {"6", "maj6"},
            {"m6", "min6"},  {"-6", "min6"},
            {"M9", "maj9"},  {"m9", "min9"},  {"-9", "min9"},
            {"mM7", "minmaj7"}, {"-Δ7", "minmaj7"},
        };
        // canonical labels map to themselves
        for (const auto& s : kShorthands) t.table_[s] = s;
        return t;
    }();
    return t;
}

AliasTable AliasTable::load(const std::string& path) {
    AliasTable t = builtin();
    for (const auto& [key, value] : read_kv_file(path)) t.table_[key] = value;
    return t;
}

bool AliasTable::contains(const std::string& surface) const { return table_.count(surface) > 0; }

const std::string& AliasTable::quality(const std::string& surface) const {
    auto it = table_.find(surface);
    if (it == table_.end()) throw UnknownSurfaceSymbolError("unknown surface symbol: " + surface);
    return it->second;
}

bool ValidationResult::ok() const {
    return std::none_of(violations.begin(), violations.end(),
                        [](const Violation& v) { return !v.warning; });
}

bool ValidationResult::has(ViolationKind k) const {
    return std::any_of(violations.begin(), violations.end(),
                       [k](const Violation& v) { return v.kind == k; });
}

HarteChord parse_chord(const std::string& text, const DegreeTable& table) {
    if (text.empty()) throw SyntaxError("empty chord string");
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            throw SyntaxError("chord string contains whitespace: '" + text + "'");
        }
    }

    HarteChord chord;
    size_t pos = 0;

    if (text[pos] < 'A' || text[pos] > 'G') {
        throw SyntaxError("expected root letter A-G in '" + text + "'");
    }
    size_t root_end = pos + 1;
    while (root_end < text.size() && is_accidental(text[root_end])) ++root_end;
    chord.root = text.substr(pos, root_end - pos);
    if (!is_valid_root(chord.root)) throw SyntaxError("bad root spelling in '" + text + "'");
    pos = root_end;

    if (pos >= text.size() || text[pos] != ':') {
        throw SyntaxError("expected ':' after root in '" + text + "'");
    }
    ++pos;

    size_t sh_end = pos;
    while (sh_end < text.size() && text[sh_end] != '(' && text[sh_end] != '/') ++sh_end;
    chord.shorthand = text.substr(pos, sh_end - pos);
    if (!table.contains(chord.shorthand)) {
        throw UnknownShorthandError("unknown shorthand '" + chord.shorthand + "' in '" + text + "'");
    }
    pos = sh_end;

    if (pos < text.size() && text[pos] == '(') {
        auto close = text.find(')', pos);
        if (close == std::string::npos) throw SyntaxError("unterminated extension list in '" + text + "'");
        std::string body = text.substr(pos + 1, close - pos - 1);
        if (body.empty()) throw SyntaxError("empty extension list in '" + text + "'");
        for (const auto& item : parse_degree_list(body)) {
            Extension e;
            std::string deg = item;
            if (deg.rfind("no", 0) == 0) {
                e.removal = true;
                deg = deg.substr(2);
            }
            int value = 0;
            if (!split_degree(deg, e.accidentals, value) || value < 1 || value > 13) {
                throw SyntaxError("bad extension '" + item + "' in '" + text + "'");
            }
            e.degree = value;
            chord.extensions.push_back(e);
        }
        if (std::count(body.begin(), body.end(), ',') + 1 != static_cast<long>(chord.extensions.size())) {
            throw SyntaxError("malformed extension list in '" + text + "'");
        }
        pos = close + 1;
    }

    if (pos < text.size() && text[pos] == '/') {
        std::string bass = text.substr(pos + 1);
        if (!is_valid_degree_string(bass)) throw SyntaxError("bad bass degree in '" + text + "'");
        chord.bass = bass;
        pos = text.size();
    }

    if (pos != text.size()) throw SyntaxError("trailing characters in '" + text + "'");

    for (size_t i = 0; i < chord.extensions.size(); ++i) {
        for (size_t j = i + 1; j < chord.extensions.size(); ++j) {
            if (chord.extensions[i] == chord.extensions[j]) {
                throw DuplicateExtensionError("duplicate extension '" + chord.extensions[i].text() +
                                              "' in '" + text + "'");
            }
        }
    }

    if (auto better = expressible_as(chord, table)) {
        throw ShorthandExpressibleError("'" + text + "' is expressible with shorthand '" + *better + "'");
    }

    return chord;
}

std::string serialize_chord(const HarteChord& chord, const DegreeTable& table) {
    auto check = validate_chord(chord, table);
    if (!check.ok()) {
        throw InvalidChordError("cannot serialize invalid chord: " + check.violations.front().message);
    }
    std::string out = chord.root + ":" + chord.shorthand;
    if (!chord.extensions.empty()) {
        out += "(";
        for (size_t i = 0; i < chord.extensions.size(); ++i) {
            if (i > 0) out += ",";
            out += chord.extensions[i].text();
        }
        out += ")";
    }
    if (chord.bass) out += "/" + *chord.bass;
    return out;
}

ValidationResult validate_chord(const HarteChord& chord, const DegreeTable& table) {
    ValidationResult res;

    if (!is_valid_root(chord.root)) {
        res.violations.push_back({ViolationKind::BadRoot, false, "bad root spelling '" + chord.root + "'"});
    } else if (chord.root.size() > 2) {
        res.violations.push_back({ViolationKind::DoubleAccidentalRoot, true,
                                  "root '" + chord.root + "' uses multiple accidentals"});
    }

    if (!table.contains(chord.shorthand)) {
        res.violations.push_back(
            {ViolationKind::UnknownShorthand, false, "unknown shorthand '" + chord.shorthand + "'"});
        return res; // degree checks below need the shorthand
    }

    for (const auto& e : chord.extensions) {
        if (e.degree < 1 || e.degree > 13) {
            res.violations.push_back({ViolationKind::DegreeOutOfRange, false,
                                      "extension degree " + std::to_string(e.degree) + " out of range 1-13"});
        }
        if (!e.accidentals.empty() && e.accidentals.find('#') != std::string::npos &&
            e.accidentals.find('b') != std::string::npos) {
            res.violations.push_back({ViolationKind::DegreeOutOfRange, false,
                                      "extension '" + e.text() + "' mixes sharps and flats"});
        }
    }

    for (size_t i = 0; i < chord.extensions.size(); ++i) {
        for (size_t j = i + 1; j < chord.extensions.size(); ++j) {
            if (chord.extensions[i] == chord.extensions[j]) {
                res.violations.push_back({ViolationKind::DuplicateExtension, false,
                                          "duplicate extension '" + chord.extensions[i].text() + "'"});
            }
        }
    }

    if (chord.bass && !is_valid_degree_string(*chord.bass)) {
        res.violations.push_back({ViolationKind::BadBass, false, "bad bass degree '" + *chord.bass + "'"});
    }

    bool degrees_ok = std::all_of(chord.extensions.begin(), chord.extensions.end(),
                                  [](const Extension& e) { return e.degree >= 1 && e.degree <= 13; });
    if (degrees_ok) {
        if (auto better = expressible_as(chord, table)) {
            res.violations.push_back({ViolationKind::ShorthandExpressible, false,
                                      "degrees fold into shorthand '" + *better + "'"});
        }
        // a removal that targets nothing is suspicious but harmless
        auto base = expand(chord.shorthand, {}, table);
        std::set<std::string> added;
        for (const auto& e : chord.extensions) {
            if (!e.removal) added.insert(e.accidentals + std::to_string(e.degree));
        }
        for (const auto& e : chord.extensions) {
            if (!e.removal) continue;
            std::string target = e.accidentals + std::to_string(e.degree);
            if (!base.count(target) && !added.count(target)) {
                res.violations.push_back({ViolationKind::RemovesAbsentDegree, true,
                                          "'" + e.text() + "' removes a degree the chord does not contain"});
            }
        }
    }

    return res;
}

HarteChord normalize_surface(const SurfaceSymbol& symbol, const std::string& root,
                             const AliasTable& aliases, const DegreeTable& table) {
    if (symbol.text.empty()) throw UnknownSurfaceSymbolError("empty surface symbol");
    if (!is_valid_root(root)) throw SyntaxError("bad root spelling '" + root + "'");
    const std::string& quality = aliases.quality(symbol.text);
    return parse_chord(root + ":" + quality, table);
}

std::set<std::string> degree_set(const HarteChord& chord, const DegreeTable& table) {
    return expand(chord.shorthand, chord.extensions, table);
}

bool chords_equivalent(const HarteChord& a, const HarteChord& b, const DegreeTable& table) {
    if (a.root != b.root) return false;
    if (a.bass != b.bass) return false;
    return degree_set(a, table) == degree_set(b, table);
}

} // namespace leadsheet::harte
