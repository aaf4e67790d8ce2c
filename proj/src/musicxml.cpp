#include "leadsheet/musicxml.hpp"

#include "leadsheet/rational.hpp"
#include "leadsheet/zip.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <algorithm>
#include <cctype>
#include <climits>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace pt = boost::property_tree;

namespace leadsheet::musicxml {

namespace {

// Tie-break order when several shorthands sit at the same distance from a
// degree set: prefer the everyday qualities.
const std::vector<std::string> kPreference = {
    "maj", "min", "7",     "maj7",  "min7",  "maj6",  "min6",    "9",
    "maj9", "min9", "11",  "13",    "maj11", "maj13", "min11",   "min13",
    "sus4", "sus2", "dim", "dim7",  "hdim7", "minmaj7", "aug",   "aug7",
};

size_t preference_rank(const std::string& shorthand) {
    auto it = std::find(kPreference.begin(), kPreference.end(), shorthand);
    return it == kPreference.end() ? kPreference.size() : static_cast<size_t>(it - kPreference.begin());
}

// Shorthand -> canonical MusicXML kind, used to suggest fixes for the
// legacy harmony/@text encodings.
const std::map<std::string, std::string>& shorthand_to_kind() {
    static const std::map<std::string, std::string> m = {
        {"maj", "major"},
        {"min", "minor"},
        {"aug", "augmented"},
        {"dim", "diminished"},
        {"7", "dominant"},
        {"maj7", "major-seventh"},
        {"min7", "minor-seventh"},
        {"dim7", "diminished-seventh"},
        {"aug7", "augmented-seventh"},
        {"hdim7", "half-diminished"},
        {"minmaj7", "major-minor"},
        {"maj6", "major-sixth"},
        {"min6", "minor-sixth"},
        {"9", "dominant-ninth"},
        {"maj9", "major-ninth"},
        {"min9", "minor-ninth"},
        {"11", "dominant-11th"},
        {"maj11", "major-11th"},
        {"min11", "minor-11th"},
        {"13", "dominant-13th"},
        {"maj13", "major-13th"},
        {"min13", "minor-13th"},
        {"sus2", "suspended-second"},
        {"sus4", "suspended-fourth"},
    };
    return m;
}

std::string accidental_run(int alter, char sharp, char flat) {
    if (alter > 0) return std::string(static_cast<size_t>(alter), sharp);
    if (alter < 0) return std::string(static_cast<size_t>(-alter), flat);
    return {};
}

// "b9" -> (-1, 9); assumes well-formed input built by this module.
std::pair<int, int> degree_parts(const std::string& s) {
    int alter = 0;
    size_t i = 0;
    for (; i < s.size() && (s[i] == '#' || s[i] == 'b'); ++i) alter += s[i] == '#' ? 1 : -1;
    return {alter, std::stoi(s.substr(i))};
}

bool erase_degree_value(std::set<std::string>& degrees, int value) {
    bool erased = false;
    for (auto it = degrees.begin(); it != degrees.end();) {
        if (*it != "1" && degree_parts(*it).second == value) {
            it = degrees.erase(it);
            erased = true;
        } else {
            ++it;
        }
    }
    return erased;
}

int integral_or_throw(double v, const std::string& what) {
    double r = std::round(v);
    if (std::abs(v - r) > 1e-6) throw ConversionError(what + " must be an integer, got " + std::to_string(v));
    return static_cast<int>(r);
}

} // namespace

const KindTable& KindTable::builtin() {
    static const KindTable t = [] {
        KindTable t;
        t.table_ = {
            {"augmented", {"3", "#5"}},
            {"augmented-seventh", {"3", "#5", "b7"}},
            {"diminished", {"b3", "b5"}},
            {"diminished-seventh", {"b3", "b5", "bb7"}},
            {"dominant", {"3", "5", "b7"}},
            {"dominant-11th", {"3", "5", "b7", "9", "11"}},
            {"dominant-13th", {"3", "5", "b7", "9", "11", "13"}},
            {"dominant-ninth", {"3", "5", "b7", "9"}},
            {"French", {"3", "#4", "#6"}},
            {"German", {"3", "5", "#6"}},
            {"half-diminished", {"b3", "b5", "b7"}},
            {"Italian", {"3", "#6"}},
            {"major", {"3", "5"}},
            {"major-11th", {"3", "5", "7", "9", "11"}},
            {"major-13th", {"3", "5", "7", "9", "11", "13"}},
            {"major-minor", {"b3", "5", "7"}},
            {"major-ninth", {"3", "5", "7", "9"}},
            {"major-seventh", {"3", "5", "7"}},
            {"major-sixth", {"3", "5", "6"}},
            {"minor", {"b3", "5"}},
            {"minor-11th", {"b3", "5", "b7", "9", "11"}},
            {"minor-13th", {"b3", "5", "b7", "9", "11", "13"}},
            {"minor-ninth", {"b3", "5", "b7", "9"}},
            {"minor-seventh", {"b3", "5", "b7"}},
            {"minor-sixth", {"b3", "5", "6"}},
            {"Neapolitan", {"3", "5"}},
            {"pedal", {}},
            {"power", {"5"}},
            {"suspended-fourth", {"4", "5"}},
            {"suspended-second", {"2", "5"}},
            {"Tristan", {"#4", "#6", "#9"}},
        };
        return t;
    }();
    return t;
}

KindTable KindTable::load(const std::string& path) {
    KindTable t = builtin();
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) throw Error(path + ":" + std::to_string(lineno) + ": expected kind<TAB>degrees");
        std::string kind = line.substr(0, tab);
        std::vector<std::string> degrees;
        std::stringstream ss(line.substr(tab + 1));
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item.empty()) continue;
            if (!harte::is_valid_degree_string(item))
                throw Error(path + ":" + std::to_string(lineno) + ": bad degree '" + item + "'");
            degrees.push_back(item);
        }
        t.table_[kind] = degrees;
    }
    return t;
}

bool KindTable::contains(const std::string& kind) const { return table_.count(kind) > 0; }

const std::vector<std::string>& KindTable::degrees(const std::string& kind) const {
    auto it = table_.find(kind);
    if (it == table_.end()) throw UnknownKindError("unrecognized MusicXML kind '" + kind + "'");
    return it->second;
}

harte::HarteChord convert_harmony(const HarmonyElement& h, const KindTable& kinds,
                                  const harte::DegreeTable& table) {
    // The legacy encoding stores the real quality in kind/@text while the
    // kind value says something else; these files need a manual fix.
    if (!h.kind_text.empty()) {
        const auto& aliases = harte::AliasTable::builtin();
        if (aliases.contains(h.kind_text)) {
            const std::string& quality = aliases.quality(h.kind_text);
            auto it = shorthand_to_kind().find(quality);
            if (it != shorthand_to_kind().end() && it->second != h.kind) {
                throw LegacyHarmonyTextError("harmony text '" + h.kind_text + "' conflicts with kind '" +
                                             h.kind + "'; suggested kind: " + it->second);
            }
        }
    }

    if (h.kind.empty()) throw UnknownKindError("harmony element without a kind");
    if (h.kind == "none") throw UnknownKindError("kind 'none' marks the absence of a chord");
    if (h.kind == "other") throw UnknownKindError("kind 'other' carries no chord structure");
    if (!kinds.contains(h.kind)) throw UnknownKindError("unrecognized MusicXML kind '" + h.kind + "'");

    if (h.root_step.size() != 1 || h.root_step[0] < 'A' || h.root_step[0] > 'G')
        throw ConversionError("bad harmony root step '" + h.root_step + "'");

    std::set<std::string> degrees;
    degrees.insert("1");
    for (const auto& d : kinds.degrees(h.kind)) degrees.insert(d);

    for (const HarmonyDegree& g : h.degrees) {
        if (g.value < 1 || g.value > 13)
            throw UnmappableDegreeError("degree value " + std::to_string(g.value) + " out of range 1-13");
        std::string spelled = accidental_run(g.alter, '#', 'b') + std::to_string(g.value);
        switch (g.type) {
        case DegreeType::Add:
            degrees.insert(spelled);
            break;
        case DegreeType::Alter:
            erase_degree_value(degrees, g.value);
            degrees.insert(spelled);
            break;
        case DegreeType::Subtract:
            if (degrees.count(spelled)) {
                degrees.erase(spelled);
            } else {
                erase_degree_value(degrees, g.value);
            }
            break;
        }
    }

    // Re-express the final degree set with the closest shorthand: smallest
    // symmetric difference, everyday qualities first on ties. Leftovers
    // become plain extensions, shorthand degrees missing from the set
    // become "no" removals. Minimality guarantees the result never folds
    // back into another shorthand.
    const std::string* best = nullptr;
    size_t best_delta = SIZE_MAX;
    size_t best_rank = SIZE_MAX;
    for (const std::string& name : harte::shorthand_list()) {
        if (!table.contains(name)) continue;
        std::set<std::string> s(table.degrees(name).begin(), table.degrees(name).end());
        s.insert("1");
        size_t delta = 0;
        for (const auto& d : s)
            if (!degrees.count(d)) ++delta;
        for (const auto& d : degrees)
            if (!s.count(d)) ++delta;
        size_t rank = preference_rank(name);
        if (delta < best_delta || (delta == best_delta && rank < best_rank)) {
            best = &name;
            best_delta = delta;
            best_rank = rank;
        }
    }
    if (!best) throw ConversionError("degree table is empty");

    std::set<std::string> base(table.degrees(*best).begin(), table.degrees(*best).end());
    base.insert("1");
    std::vector<harte::Extension> extensions;
    for (const auto& d : base) {
        if (!degrees.count(d)) {
            auto [alt, value] = degree_parts(d);
            extensions.push_back({true, accidental_run(alt, '#', 'b'), value});
        }
    }
    for (const auto& d : degrees) {
        if (!base.count(d)) {
            auto [alt, value] = degree_parts(d);
            extensions.push_back({false, accidental_run(alt, '#', 'b'), value});
        }
    }
    std::sort(extensions.begin(), extensions.end(), [](const harte::Extension& a, const harte::Extension& b) {
        if (a.degree != b.degree) return a.degree < b.degree;
        if (a.removal != b.removal) return a.removal;
        auto offset = [](const harte::Extension& e) {
            return e.accidentals.empty() ? 0
                                         : (e.accidentals[0] == '#' ? 1 : -1) * static_cast<int>(e.accidentals.size());
        };
        return offset(a) < offset(b);
    });

    harte::HarteChord chord;
    chord.root = h.root_step + accidental_run(h.root_alter, '#', 'b');
    chord.shorthand = *best;
    chord.extensions = std::move(extensions);
    if (h.bass) chord.bass = bass_degree(h.root_step, h.root_alter, h.bass->first, h.bass->second);

    auto check = harte::validate_chord(chord, table);
    if (!check.ok())
        throw ConversionError("harmony conversion produced an invalid chord: " + check.violations.front().message);
    return chord;
}

std::string pitch_to_kern(const std::string& step, int alter, int octave) {
    if (step.size() != 1 || step[0] < 'A' || step[0] > 'G')
        throw ConversionError("bad pitch step '" + step + "'");
    if (octave < 0 || octave > 9)
        throw OctaveOutOfRangeError("octave " + std::to_string(octave) + " out of range 0-9");
    std::string out;
    if (octave >= 4) {
        out.assign(static_cast<size_t>(octave - 3), static_cast<char>(std::tolower(step[0])));
    } else {
        out.assign(static_cast<size_t>(4 - octave), step[0]);
    }
    out += accidental_run(alter, '#', '-');
    return out;
}

std::string duration_to_recip(long long duration, long long divisions_per_quarter, int dots) {
    if (duration <= 0 || divisions_per_quarter <= 0 || dots < 0)
        throw NonRepresentableDurationError("duration and divisions must be positive");
    Rational total{duration, divisions_per_quarter * 4};
    Rational base = total * Rational{1LL << dots, (2LL << dots) - 1};
    std::string dot_suffix(static_cast<size_t>(dots), '.');
    if (base == Rational{2, 1}) return "0" + dot_suffix; // breve
    if (base.num == 1 && base.den <= 64) return std::to_string(base.den) + dot_suffix;
    throw NonRepresentableDurationError("duration " + std::to_string(duration) + " (divisions " +
                                        std::to_string(divisions_per_quarter) + "/quarter, " +
                                        std::to_string(dots) + " dots) is not a supported note value");
}

std::string kern_note_token(const MelodyNote& note, long long divisions_per_quarter) {
    std::string t;
    if (note.slur_start) t += "(";
    if (note.tie_start && !note.tie_stop) t += "[";
    t += duration_to_recip(note.duration, divisions_per_quarter, note.dots);
    if (note.rest) {
        t += "r";
    } else {
        t += pitch_to_kern(note.step, note.alter, note.octave);
    }
    if (note.tie_start && note.tie_stop) {
        t += "_";
    } else if (note.tie_stop) {
        t += "]";
    }
    if (note.slur_stop) t += ")";
    if (note.beam == MelodyNote::Beam::Begin) t += "L";
    if (note.beam == MelodyNote::Beam::End) t += "J";
    return t;
}

std::string key_signature_interp(int fifths) {
    static const char* sharps[] = {"f#", "c#", "g#", "d#", "a#", "e#", "b#"};
    static const char* flats[] = {"b-", "e-", "a-", "d-", "g-", "c-", "f-"};
    if (fifths < -7 || fifths > 7)
        throw ConversionError("key signature fifths " + std::to_string(fifths) + " out of range -7..7");
    std::string out = "*k[";
    for (int i = 0; i < std::abs(fifths); ++i) out += fifths > 0 ? sharps[i] : flats[i];
    out += "]";
    return out;
}

std::string bass_degree(const std::string& root_step, int root_alter, const std::string& bass_step,
                        int bass_alter) {
    const std::string letters = "CDEFGAB";
    static const int pcs[] = {0, 2, 4, 5, 7, 9, 11};
    static const int major_semis[] = {0, 2, 4, 5, 7, 9, 11};
    auto idx = [&](const std::string& s) {
        if (s.size() != 1) throw ConversionError("bad pitch step '" + s + "'");
        auto p = letters.find(s[0]);
        if (p == std::string::npos) throw ConversionError("bad pitch step '" + s + "'");
        return static_cast<int>(p);
    };
    int ri = idx(root_step);
    int bi = idx(bass_step);
    int degree = (bi - ri + 7) % 7; // 0-based
    int semis = ((pcs[bi] + bass_alter) - (pcs[ri] + root_alter)) % 12;
    if (semis < 0) semis += 12;
    int alter = semis - major_semis[degree];
    while (alter > 6) alter -= 12;
    while (alter < -6) alter += 12;
    return accidental_run(alter, '#', 'b') + std::to_string(degree + 1);
}

namespace {

struct DataLine {
    std::string melody;
    Rational onset;
    std::optional<harte::HarteChord> chord;
};

struct Item {
    bool is_data = false;
    std::string raw;    // when !is_data
    size_t data_index = 0;
};

struct PendingHarmony {
    Rational pos;
    harte::HarteChord chord;
    std::string text;
    std::string measure;
};

bool all_digits(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::string sanitize_meta(std::string s) {
    for (char& c : s)
        if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    return s;
}

} // namespace

kern::KernDocument convert_score(const std::string& xml, const ConvertOptions& options,
                                 std::vector<std::string>* warnings_out) {
    std::vector<std::string> local_warnings;
    std::vector<std::string>& warnings = warnings_out ? *warnings_out : local_warnings;
    const KindTable& kinds = options.kinds ? *options.kinds : KindTable::builtin();
    const harte::DegreeTable& degrees =
        options.degrees ? *options.degrees : harte::DegreeTable::builtin();

    pt::ptree tree;
    {
        std::istringstream ss(xml);
        try {
            pt::read_xml(ss, tree, pt::xml_parser::trim_whitespace | pt::xml_parser::no_comments);
        } catch (const pt::xml_parser_error& e) {
            throw ConversionError(std::string("malformed MusicXML: ") + e.what());
        }
    }

    auto score = tree.get_child_optional("score-partwise");
    if (!score) {
        if (tree.get_child_optional("score-timewise"))
            throw ConversionError("timewise MusicXML is not supported; export a partwise score");
        throw ConversionError("not a MusicXML score: missing <score-partwise>");
    }

    std::vector<const pt::ptree*> parts;
    for (const auto& kv : *score)
        if (kv.first == "part") parts.push_back(&kv.second);
    if (parts.empty()) throw ConversionError("score contains no parts");
    if (parts.size() > 1)
        throw MultiPartUnsupportedError("score has " + std::to_string(parts.size()) +
                                        " parts; only single-part lead sheets are supported");

    std::vector<std::string> refs;
    if (auto ident = score->get_child_optional("identification")) {
        for (const auto& kv : *ident) {
            if (kv.first == "creator" &&
                kv.second.get<std::string>("<xmlattr>.type", "") == "composer") {
                std::string composer = kv.second.get_value<std::string>();
                if (!composer.empty()) refs.push_back("!!!COM: " + sanitize_meta(composer));
            }
        }
    }
    std::string title = score->get<std::string>("work.work-title", "");
    if (title.empty()) title = score->get<std::string>("movement-title", "");
    if (!title.empty()) refs.push_back("!!!OTL: " + sanitize_meta(title));

    std::vector<Item> items;
    std::vector<DataLine> data;
    std::vector<PendingHarmony> harmonies;

    long long divisions = 0;
    Rational cursor{0, 1};
    std::string first_voice;
    std::optional<int> first_staff;
    bool need_barline = false;
    std::string barline_label;
    bool last_double = false;
    bool lyric_warned = false;
    size_t measure_count = 0;

    auto push_raw = [&](const std::string& line) { items.push_back({false, line, 0}); };
    auto flush_barline = [&] {
        if (need_barline) {
            need_barline = false;
            push_raw("=" + barline_label + "\t=" + barline_label);
        }
    };

    for (const auto& mkv : *parts[0]) {
        if (mkv.first != "measure") continue;
        const pt::ptree& measure = mkv.second;
        ++measure_count;
        std::string label = measure.get<std::string>("<xmlattr>.number", "");
        if (!all_digits(label)) label = std::to_string(measure_count);
        const std::string mloc = "measure " + label;
        if (measure_count > 1) {
            need_barline = true;
            barline_label = label;
        }
        last_double = false;

        for (const auto& kv : measure) {
            const std::string& tag = kv.first;
            const pt::ptree& el = kv.second;
            if (!tag.empty() && tag[0] == '<') continue; // attributes/comments of <measure>

            try {
                if (tag == "attributes") {
                    flush_barline();
                    if (auto d = el.get_optional<long long>("divisions")) {
                        if (*d <= 0) throw ConversionError(mloc + ": divisions must be positive");
                        divisions = *d;
                    }
                    if (auto clef = el.get_child_optional("clef")) {
                        std::string sign = clef->get<std::string>("sign", "");
                        std::string line = clef->get<std::string>("line", "");
                        int oct = clef->get<int>("clef-octave-change", 0);
                        if (sign == "G" || sign == "F" || sign == "C") {
                            std::string t = "*clef" + sign + (oct < 0 ? "v" : oct > 0 ? "^" : "") + line;
                            push_raw(t + "\t" + t);
                        } else if (!sign.empty()) {
                            warnings.push_back(mloc + ": unsupported clef sign '" + sign + "' skipped");
                        }
                    }
                    if (auto key = el.get_child_optional("key")) {
                        if (auto fifths = key->get_optional<int>("fifths")) {
                            std::string t = key_signature_interp(*fifths);
                            push_raw(t + "\t" + t);
                        }
                    }
                    if (auto time = el.get_child_optional("time")) {
                        if (time->get_child_optional("senza-misura")) {
                            warnings.push_back(mloc + ": senza-misura time signature skipped");
                        } else {
                            std::string beats = time->get<std::string>("beats", "");
                            std::string unit = time->get<std::string>("beat-type", "");
                            if (!beats.empty() && !unit.empty()) {
                                std::string t = "*M" + beats + "/" + unit;
                                push_raw(t + "\t" + t);
                            }
                        }
                    }
                    int staves = el.get<int>("staves", 1);
                    if (staves > 1 && !options.top_voice)
                        throw PolyphonyError(mloc + ": part has " + std::to_string(staves) +
                                             " staves; enable the top-voice option to keep the first");
                } else if (tag == "note") {
                    if (el.get_child_optional("grace")) {
                        warnings.push_back(mloc + ": grace note skipped");
                        continue;
                    }
                    double dur_d = el.get("duration", -1.0);
                    long long dur = integral_or_throw(dur_d, mloc + ": note duration");
                    if (dur <= 0) throw ConversionError(mloc + ": note without a positive duration");
                    if (divisions <= 0) throw ConversionError(mloc + ": note appears before any divisions declaration");
                    Rational advance{dur, divisions * 4};

                    if (el.get_child_optional("chord")) {
                        if (!options.top_voice)
                            throw PolyphonyError(mloc + ": simultaneous notes in the melody; enable the "
                                                        "top-voice option to keep the first note of each chord");
                        continue; // cluster head already advanced the cursor
                    }

                    std::string voice = el.get<std::string>("voice", "");
                    int staff = el.get<int>("staff", 1);
                    if (first_voice.empty()) first_voice = voice;
                    if (!first_staff) first_staff = staff;
                    if (voice != first_voice || staff != *first_staff) {
                        if (!options.top_voice)
                            throw PolyphonyError(mloc + ": second voice present; enable the top-voice "
                                                        "option to keep the first voice");
                        cursor += advance;
                        continue;
                    }
                    if (el.get_child_optional("cue")) {
                        warnings.push_back(mloc + ": cue note skipped");
                        cursor += advance;
                        continue;
                    }
                    if (el.get_child_optional("lyric") && options.keep_lyrics && !lyric_warned) {
                        warnings.push_back("lyrics are not preserved; skipping them");
                        lyric_warned = true;
                    }

                    MelodyNote n;
                    n.duration = dur;
                    n.voice = voice;
                    n.staff = staff;
                    for (const auto& c : el)
                        if (c.first == "dot") ++n.dots;
                    if (el.get_child_optional("rest")) {
                        n.rest = true;
                    } else if (auto pitch = el.get_child_optional("pitch")) {
                        n.step = pitch->get<std::string>("step");
                        n.alter = integral_or_throw(pitch->get("alter", 0.0), mloc + ": pitch alter");
                        n.octave = pitch->get<int>("octave");
                    } else {
                        throw ConversionError(mloc + ": unpitched notes are not supported");
                    }
                    bool saw_tie = false;
                    for (const auto& c : el) {
                        if (c.first != "tie") continue;
                        saw_tie = true;
                        std::string type = c.second.get<std::string>("<xmlattr>.type", "");
                        if (type == "start") n.tie_start = true;
                        if (type == "stop") n.tie_stop = true;
                    }
                    if (auto notations = el.get_child_optional("notations")) {
                        for (const auto& c : *notations) {
                            if (c.first == "slur") {
                                std::string type = c.second.get<std::string>("<xmlattr>.type", "");
                                if (type == "start") n.slur_start = true;
                                if (type == "stop") n.slur_stop = true;
                            } else if (c.first == "tied" && !saw_tie) {
                                std::string type = c.second.get<std::string>("<xmlattr>.type", "");
                                if (type == "start") n.tie_start = true;
                                if (type == "stop") n.tie_stop = true;
                            }
                        }
                    }
                    for (const auto& c : el) {
                        if (c.first != "beam") continue;
                        if (c.second.get<int>("<xmlattr>.number", 1) != 1) continue;
                        std::string v = c.second.get_value<std::string>();
                        if (v == "begin") n.beam = MelodyNote::Beam::Begin;
                        if (v == "end") n.beam = MelodyNote::Beam::End;
                    }

                    flush_barline();
                    items.push_back({true, {}, data.size()});
                    data.push_back({kern_note_token(n, divisions), cursor, std::nullopt});
                    cursor += advance;
                } else if (tag == "backup" || tag == "forward") {
                    long long dur = integral_or_throw(el.get("duration", 0.0), mloc + ": " + tag + " duration");
                    if (divisions <= 0) throw ConversionError(mloc + ": " + tag + " before any divisions declaration");
                    Rational step{dur, divisions * 4};
                    if (tag == "backup")
                        cursor -= step;
                    else
                        cursor += step;
                } else if (tag == "harmony") {
                    HarmonyElement h;
                    h.root_step = el.get<std::string>("root.root-step", "");
                    h.root_alter = integral_or_throw(el.get("root.root-alter", 0.0), mloc + ": root alter");
                    if (auto kind = el.get_child_optional("kind")) {
                        h.kind = kind->get_value<std::string>();
                        h.kind_text = kind->get<std::string>("<xmlattr>.text", "");
                    }
                    if (h.kind == "none") {
                        std::string msg = mloc + ": 'none' harmony (no chord) skipped";
                        if (options.strict_harmony) throw ConversionError(msg);
                        warnings.push_back(msg);
                        continue;
                    }
                    if (h.root_step.empty()) throw ConversionError(mloc + ": harmony without a root");
                    for (const auto& c : el) {
                        if (c.first != "degree") continue;
                        HarmonyDegree g;
                        g.value = c.second.get<int>("degree-value");
                        g.alter = integral_or_throw(c.second.get("degree-alter", 0.0), mloc + ": degree alter");
                        std::string type = c.second.get<std::string>("degree-type", "add");
                        if (type == "add")
                            g.type = DegreeType::Add;
                        else if (type == "alter")
                            g.type = DegreeType::Alter;
                        else if (type == "subtract")
                            g.type = DegreeType::Subtract;
                        else
                            throw ConversionError(mloc + ": unknown degree type '" + type + "'");
                        h.degrees.push_back(g);
                    }
                    if (auto bass = el.get_child_optional("bass")) {
                        h.bass = {bass->get<std::string>("bass-step", ""),
                                  integral_or_throw(bass->get("bass-alter", 0.0), mloc + ": bass alter")};
                    }
                    long long offset = integral_or_throw(el.get("offset", 0.0), mloc + ": harmony offset");
                    if (offset != 0 && divisions <= 0)
                        throw ConversionError(mloc + ": harmony offset before any divisions declaration");
                    Rational pos = cursor;
                    if (offset != 0) pos += Rational{offset, divisions * 4};

                    harte::HarteChord chord;
                    try {
                        chord = convert_harmony(h, kinds, degrees);
                    } catch (const LegacyHarmonyTextError& e) {
                        throw LegacyHarmonyTextError(mloc + ": " + e.what());
                    } catch (const UnknownKindError& e) {
                        throw UnknownKindError(mloc + ": " + e.what());
                    } catch (const UnmappableDegreeError& e) {
                        throw UnmappableDegreeError(mloc + ": " + e.what());
                    }
                    harmonies.push_back({pos, chord, harte::serialize_chord(chord, degrees), label});
                } else if (tag == "print") {
                    if (el.get<std::string>("<xmlattr>.new-system", "") == "yes") {
                        // placed before a pending barline so each region
                        // opens with the barline of its first measure
                        push_raw(kern::kLinebreakMarker);
                    }
                } else if (tag == "barline") {
                    if (el.get<std::string>("bar-style", "") == "light-heavy") last_double = true;
                }
                // direction, sound, figured-bass etc. are out of scope
            } catch (const ConversionError&) {
                throw;
            } catch (const pt::ptree_error& e) {
                throw ConversionError(mloc + ": " + e.what());
            }
        }
    }

    // chords attach to the note sounding at their offset; if that line is
    // taken or no note starts there, they move to the next free note
    for (const PendingHarmony& h : harmonies) {
        size_t i = 0;
        while (i < data.size() && (data[i].onset < h.pos || data[i].chord)) ++i;
        if (i == data.size())
            throw ConversionError("measure " + h.measure + ": no note available to carry chord " + h.text);
        if (!(data[i].onset == h.pos)) {
            std::string msg = "measure " + h.measure + ": chord " + h.text +
                              " does not fall on a note onset; attached to the next note";
            if (options.strict_harmony) throw ConversionError(msg);
            warnings.push_back(msg);
        }
        data[i].chord = h.chord;
    }

    std::string out;
    for (const auto& r : refs) out += r + "\n";
    out += std::string(kern::kMelodySpine) + "\t" + kern::kChordSpine + "\n";
    for (const Item& item : items) {
        if (item.is_data) {
            const DataLine& dl = data[item.data_index];
            out += dl.melody + "\t" + (dl.chord ? harte::serialize_chord(*dl.chord, degrees) : ".") + "\n";
        } else {
            out += item.raw + "\n";
        }
    }
    if (last_double) out += "==\t==\n";
    out += "*-\t*-\n";
    return kern::parse_kern(out);
}

std::string extract_musicxml(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConversionError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string bytes = std::move(buf).str();
    if (!zip::ZipReader::looks_like_zip(bytes)) return bytes;

    zip::ZipReader archive(std::move(bytes));
    if (archive.contains("META-INF/container.xml")) {
        pt::ptree container;
        std::istringstream ss(archive.read("META-INF/container.xml"));
        try {
            pt::read_xml(ss, container, pt::xml_parser::trim_whitespace | pt::xml_parser::no_comments);
            std::string rootfile =
                container.get<std::string>("container.rootfiles.rootfile.<xmlattr>.full-path", "");
            if (!rootfile.empty() && archive.contains(rootfile)) return archive.read(rootfile);
        } catch (const pt::ptree_error&) {
            // fall through to the extension scan
        }
    }
    for (const std::string& name : archive.names()) {
        if (name.rfind("META-INF/", 0) == 0) continue;
        if (name.size() >= 4 && name.compare(name.size() - 4, 4, ".xml") == 0) return archive.read(name);
        if (name.size() >= 9 && name.compare(name.size() - 9, 9, ".musicxml") == 0) return archive.read(name);
    }
    throw ConversionError("no MusicXML rootfile found in container " + path.string());
}

kern::KernDocument convert_file(const std::filesystem::path& path, const ConvertOptions& options,
                                std::vector<std::string>* warnings) {
    return convert_score(extract_musicxml(path), options, warnings);
}

} // namespace leadsheet::musicxml
