#include "leadsheet/kern.hpp"

#include "leadsheet/rational.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <sstream>

namespace leadsheet::kern {

namespace {

std::string normalize_endings(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\r') {
            if (i + 1 < text.size() && text[i + 1] == '\n') continue;
            out += '\n';
        } else {
            out += text[i];
        }
    }
    return out;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string current;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    if (!current.empty()) lines.push_back(current);
    return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    for (char c : line) {
        if (c == '\t') {
            fields.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    fields.push_back(current);
    return fields;
}

std::vector<std::string> split_subtokens(const std::string& field) {
    std::vector<std::string> out;
    std::string current;
    for (char c : field) {
        if (c == ' ') {
            out.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    out.push_back(current);
    return out;
}

bool is_terminator(const KernLine& line) {
    return line.kind == LineKind::Interpretation && line.melody == "*-" && line.chord == "*-";
}

using Fraction = ::leadsheet::Rational;

std::optional<Fraction> meter_fraction(const std::string& interp) {
    // *M4/4, *M6/8, ...
    if (interp.rfind("*M", 0) != 0) return std::nullopt;
    size_t slash = interp.find('/');
    if (slash == std::string::npos) return std::nullopt;
    std::string beats = interp.substr(2, slash - 2);
    std::string unit = interp.substr(slash + 1);
    if (beats.empty() || unit.empty()) return std::nullopt;
    for (char c : beats)
        if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    for (char c : unit)
        if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    if (unit == "0") return std::nullopt;
    return Fraction{std::stoll(beats), std::stoll(unit)};
}

KernLine classify(const std::string& raw, int lineno) {
    KernLine line;
    if (raw == kLinebreakMarker) {
        line.kind = LineKind::LinebreakMarker;
        line.melody = raw;
        line.single_field = true;
        return line;
    }
    if (raw.rfind("!!", 0) == 0) {
        line.kind = LineKind::Comment;
        line.melody = raw;
        line.single_field = true;
        return line;
    }

    auto fields = split_fields(raw);
    if (fields.size() != 2) {
        throw SpineCountError("line " + std::to_string(lineno) + ": expected 2 spine fields, found " +
                              std::to_string(fields.size()));
    }
    line.melody = fields[0];
    line.chord = fields[1];

    if (raw[0] == '!') {
        line.kind = LineKind::Comment;
    } else if (raw.rfind("**", 0) == 0) {
        line.kind = LineKind::ExclusiveInterpretation;
    } else if (raw[0] == '*') {
        line.kind = LineKind::Interpretation;
    } else if (raw[0] == '=') {
        line.kind = LineKind::Barline;
    } else {
        line.kind = LineKind::Data;
    }

    // both spines must agree on the record type
    auto leading = [](const std::string& f) { return f.empty() ? '\0' : f[0]; };
    switch (line.kind) {
        case LineKind::Comment:
            if (leading(line.chord) != '!')
                throw InvalidDocumentError("line " + std::to_string(lineno) + ": mixed comment record");
            break;
        case LineKind::ExclusiveInterpretation:
        case LineKind::Interpretation:
            if (leading(line.chord) != '*')
                throw InvalidDocumentError("line " + std::to_string(lineno) + ": mixed interpretation record");
            break;
        case LineKind::Barline:
            if (leading(line.chord) != '=')
                throw InvalidDocumentError("line " + std::to_string(lineno) + ": mixed barline record");
            break;
        case LineKind::Data:
            if (line.melody.empty() || line.chord.empty())
                throw InvalidDocumentError("line " + std::to_string(lineno) + ": empty data field");
            if (leading(line.chord) == '*' || leading(line.chord) == '=' || leading(line.chord) == '!')
                throw InvalidDocumentError("line " + std::to_string(lineno) + ": mixed data record");
            break;
        default:
            break;
    }
    return line;
}

void check_data_fields(const KernLine& line, int lineno) {
    if (line.melody != ".") {
        for (const auto& sub : split_subtokens(line.melody)) {
            scan_melody_token(sub); // throws BadMelodyTokenError
        }
    }
    if (line.chord != ".") {
        try {
            harte::parse_chord(line.chord);
        } catch (const Error& e) {
            throw BadChordTokenError("line " + std::to_string(lineno) + ": bad chord token '" + line.chord +
                                     "': " + e.what());
        }
    }
}

} // namespace

std::string MelodyToken::text() const {
    std::string out = pre + recip;
    out.append(static_cast<size_t>(dots), '.');
    out += pitch + accidentals + post;
    return out;
}

std::pair<long long, long long> MelodyToken::whole_note_fraction() const {
    long long value = std::stoll(recip);
    long long num = 1, den = 1;
    if (value == 0) {
        num = 2; // breve
    } else {
        den = value;
    }
    // each dot extends by half the previous value
    num *= (2LL << dots) - 1;
    den *= 1LL << dots;
    long long g = std::gcd(num, den);
    return {num / g, den / g};
}

MelodyToken scan_melody_token(const std::string& token) {
    if (token.empty()) throw BadMelodyTokenError("empty melody token");

    MelodyToken t;
    size_t i = 0;
    while (i < token.size() && (token[i] == '[' || token[i] == '(')) t.pre += token[i++];

    size_t digits_start = i;
    while (i < token.size() && std::isdigit(static_cast<unsigned char>(token[i]))) ++i;
    if (i == digits_start) throw BadMelodyTokenError("missing duration in token '" + token + "'");
    t.recip = token.substr(digits_start, i - digits_start);
    long long recip_value = std::stoll(t.recip);
    if (recip_value != 0 && (recip_value < 1 || recip_value > 64)) {
        throw BadMelodyTokenError("unsupported duration '" + t.recip + "' in token '" + token + "'");
    }

    while (i < token.size() && token[i] == '.') {
        ++t.dots;
        ++i;
    }

    if (i >= token.size()) throw BadMelodyTokenError("missing pitch in token '" + token + "'");
    char p = token[i];
    if (p == 'r') {
        t.pitch = "r";
        ++i;
    } else if (p >= 'a' && p <= 'g') {
        while (i < token.size() && token[i] == p) t.pitch += token[i++];
    } else if (p >= 'A' && p <= 'G') {
        while (i < token.size() && token[i] == p) t.pitch += token[i++];
    } else {
        throw BadMelodyTokenError("bad pitch character '" + std::string(1, p) + "' in token '" + token + "'");
    }

    if (i < token.size() && (token[i] == '#' || token[i] == '-')) {
        char acc = token[i];
        while (i < token.size() && token[i] == acc) t.accidentals += token[i++];
    }
    if (i < token.size() && token[i] == 'n') t.accidentals += token[i++];
    if (t.is_rest() && !t.accidentals.empty()) {
        throw BadMelodyTokenError("rest with accidentals in token '" + token + "'");
    }

    while (i < token.size()) {
        char c = token[i];
        if (c == ']' || c == ')' || c == '_' || c == 'L' || c == 'J') {
            t.post += c;
            ++i;
        } else {
            throw BadMelodyTokenError("unexpected character '" + std::string(1, c) + "' in token '" + token +
                                      "'");
        }
    }
    return t;
}

std::vector<std::pair<std::string, std::string>> KernDocument::reference_records() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& line : lines) {
        if (line.kind != LineKind::Comment || !line.single_field) continue;
        if (line.melody.rfind("!!!", 0) != 0) continue;
        auto colon = line.melody.find(':');
        if (colon == std::string::npos) continue;
        std::string key = line.melody.substr(3, colon - 3);
        std::string value = line.melody.substr(colon + 1);
        while (!value.empty() && value.front() == ' ') value.erase(value.begin());
        out.emplace_back(key, value);
    }
    return out;
}

KernDocument parse_kern(const std::string& text, const ParseOptions& options) {
    auto raw_lines = split_lines(normalize_endings(text));
    if (raw_lines.empty()) throw MissingTerminatorError("empty document");

    KernDocument doc;
    doc.lines.reserve(raw_lines.size());
    for (size_t i = 0; i < raw_lines.size(); ++i) {
        int lineno = static_cast<int>(i) + 1;
        if (raw_lines[i].empty()) {
            throw InvalidDocumentError("line " + std::to_string(lineno) + ": blank line");
        }
        doc.lines.push_back(classify(raw_lines[i], lineno));
    }

    // header: first non-comment line declares the two spines
    auto first = std::find_if(doc.lines.begin(), doc.lines.end(),
                              [](const KernLine& l) { return l.kind != LineKind::Comment; });
    if (first == doc.lines.end() || first->kind != LineKind::ExclusiveInterpretation) {
        throw BadHeaderError("document does not start with an exclusive interpretation");
    }
    if (first->melody != kMelodySpine) {
        throw BadHeaderError("melody spine must be " + std::string(kMelodySpine) + ", found " + first->melody);
    }
    if (first->chord == kLegacyChordSpine) {
        first->chord = kChordSpine;
    } else if (first->chord != kChordSpine) {
        throw BadHeaderError("chord spine must be " + std::string(kChordSpine) + " or " +
                             std::string(kLegacyChordSpine) + ", found " + first->chord);
    }

    auto last = std::find_if(doc.lines.rbegin(), doc.lines.rend(), [](const KernLine& l) {
        return l.kind != LineKind::Comment && l.kind != LineKind::LinebreakMarker;
    });
    if (last == doc.lines.rend() || !is_terminator(*last)) {
        throw MissingTerminatorError("document does not end with spine terminators");
    }

    if (options.strict) {
        for (size_t i = 0; i < doc.lines.size(); ++i) {
            if (doc.lines[i].kind == LineKind::Data) {
                try {
                    check_data_fields(doc.lines[i], static_cast<int>(i) + 1);
                } catch (const BadChordTokenError&) {
                    throw;
                } catch (const BadMelodyTokenError& e) {
                    throw BadMelodyTokenError("line " + std::to_string(i + 1) + ": " + e.what());
                }
            }
        }
    }
    return doc;
}

std::string serialize_kern(const KernDocument& doc) {
    if (doc.lines.empty()) throw InvalidDocumentError("cannot serialize an empty document");
    std::string out;
    for (const auto& line : doc.lines) {
        out += line.text();
        out += '\n';
    }
    return out;
}

std::vector<KernDocument> split_regions(const KernDocument& doc, bool include_context) {
    std::vector<std::vector<KernLine>> slices(1);
    struct Context {
        std::optional<KernLine> clef, keysig, meter;
    };
    Context active;
    std::optional<std::string> first_meter;
    std::vector<Context> snapshots; // state at each marker

    for (const auto& line : doc.lines) {
        if (line.kind == LineKind::LinebreakMarker) {
            snapshots.push_back(active);
            slices.emplace_back();
            continue;
        }
        if (line.kind == LineKind::Interpretation) {
            if (line.melody.rfind("*clef", 0) == 0) active.clef = line;
            if (line.melody.rfind("*k[", 0) == 0) active.keysig = line;
            if (line.melody.rfind("*M", 0) == 0 && meter_fraction(line.melody)) {
                active.meter = line;
                if (!first_meter) first_meter = line.melody;
            }
        }
        slices.back().push_back(line);
    }

    const KernLine header{LineKind::ExclusiveInterpretation, kMelodySpine, kChordSpine, false};
    const KernLine terminator{LineKind::Interpretation, "*-", "*-", false};

    std::vector<KernDocument> regions;
    regions.reserve(slices.size());
    for (size_t i = 0; i < slices.size(); ++i) {
        KernDocument region;
        if (!include_context || i == 0) {
            region.lines = slices[i];
        } else {
            const Context& ctx = snapshots[i - 1];
            // skip context lines the slice already re-declares before its
            // first barline or data record
            bool has_clef = false, has_key = false, has_meter = false;
            for (const auto& l : slices[i]) {
                if (l.kind == LineKind::Barline || l.kind == LineKind::Data) break;
                if (l.kind != LineKind::Interpretation) continue;
                if (l.melody.rfind("*clef", 0) == 0) has_clef = true;
                if (l.melody.rfind("*k[", 0) == 0) has_key = true;
                if (l.melody.rfind("*M", 0) == 0) has_meter = true;
            }
            region.lines.push_back(header);
            if (ctx.clef && !has_clef) region.lines.push_back(*ctx.clef);
            if (ctx.keysig && !has_key) region.lines.push_back(*ctx.keysig);
            if (ctx.meter && !has_meter && first_meter && ctx.meter->melody != *first_meter) {
                region.lines.push_back(*ctx.meter);
            }
            region.lines.insert(region.lines.end(), slices[i].begin(), slices[i].end());
        }
        if (include_context) {
            bool terminated = std::any_of(region.lines.begin(), region.lines.end(), is_terminator);
            if (!terminated) region.lines.push_back(terminator);
        }
        regions.push_back(std::move(region));
    }
    return regions;
}

KernDocument strip_annotations(const KernDocument& doc, const StripOptions& options) {
    auto strip_barline = [](const std::string& field) {
        size_t i = 0;
        while (i < field.size() && field[i] == '=') ++i;
        size_t j = i;
        while (j < field.size() && std::isdigit(static_cast<unsigned char>(field[j]))) ++j;
        return field.substr(0, i) + field.substr(j);
    };

    KernDocument out;
    for (const auto& line : doc.lines) {
        if (line.kind == LineKind::Comment) continue;
        if (line.kind == LineKind::LinebreakMarker && !options.keep_linebreak_markers) continue;
        if (line.kind == LineKind::Barline) {
            KernLine stripped = line;
            stripped.melody = strip_barline(line.melody);
            stripped.chord = strip_barline(line.chord);
            out.lines.push_back(stripped);
        } else {
            out.lines.push_back(line);
        }
    }
    return out;
}

std::vector<Diagnostic> validate_document(const KernDocument& doc, const harte::DegreeTable& table) {
    std::vector<Diagnostic> diags;

    auto last = std::find_if(doc.lines.rbegin(), doc.lines.rend(), [](const KernLine& l) {
        return l.kind != LineKind::Comment && l.kind != LineKind::LinebreakMarker;
    });
    if (last == doc.lines.rend() || !is_terminator(*last)) {
        diags.push_back({DiagnosticKind::MissingTerminator, false, 0, "missing spine terminator record"});
    }

    std::optional<Fraction> meter;
    std::optional<Fraction> segment_sum;
    bool segment_clean = true;
    int segment_start_line = 0;
    int tie_depth = 0, slur_depth = 0;

    auto flush_segment = [&](int barline_lineno) {
        if (meter && segment_sum && segment_clean && !(*segment_sum == *meter)) {
            std::ostringstream msg;
            msg << "measure durations sum to " << segment_sum->num << "/" << segment_sum->den
                << " of a whole note, expected " << meter->num << "/" << meter->den;
            diags.push_back({DiagnosticKind::MeasureDurationMismatch, true, segment_start_line, msg.str()});
        }
        segment_sum.reset();
        segment_clean = true;
        segment_start_line = barline_lineno + 1;
    };

    bool seen_barline = false;
    for (size_t i = 0; i < doc.lines.size(); ++i) {
        const KernLine& line = doc.lines[i];
        int lineno = static_cast<int>(i) + 1;

        if (line.kind == LineKind::Interpretation) {
            if (auto m = meter_fraction(line.melody)) {
                meter = m;
            }
            continue;
        }
        if (line.kind == LineKind::Barline) {
            if (seen_barline) flush_segment(lineno);
            segment_sum = Fraction{0, 1};
            segment_clean = true;
            segment_start_line = lineno;
            seen_barline = true;
            continue;
        }
        if (line.kind != LineKind::Data) continue;

        if (line.chord != ".") {
            try {
                auto chord = harte::parse_chord(line.chord, table);
                auto check = harte::validate_chord(chord, table);
                for (const auto& v : check.violations) {
                    diags.push_back({v.warning ? DiagnosticKind::ChordViolation : DiagnosticKind::BadChordToken,
                                     v.warning, lineno, "chord '" + line.chord + "': " + v.message});
                }
            } catch (const Error& e) {
                diags.push_back({DiagnosticKind::BadChordToken, false, lineno,
                                 "chord '" + line.chord + "': " + e.what()});
            }
        }

        if (line.melody == ".") continue;
        auto subs = split_subtokens(line.melody);
        if (subs.size() > 1) {
            diags.push_back({DiagnosticKind::PolyphonicMelody, true, lineno,
                             "polyphonic melody field ('" + line.melody + "')"});
        }
        bool first = true;
        for (const auto& sub : subs) {
            try {
                MelodyToken tok = scan_melody_token(sub);
                for (char c : tok.pre) {
                    if (c == '[') ++tie_depth;
                    if (c == '(') ++slur_depth;
                }
                for (char c : tok.post) {
                    if (c == ']') {
                        if (tie_depth == 0)
                            diags.push_back({DiagnosticKind::UnbalancedTie, true, lineno, "tie close without open"});
                        else
                            --tie_depth;
                    }
                    if (c == '_' && tie_depth == 0) {
                        diags.push_back({DiagnosticKind::UnbalancedTie, true, lineno, "tie continuation without open"});
                    }
                    if (c == ')') {
                        if (slur_depth == 0)
                            diags.push_back({DiagnosticKind::UnbalancedSlur, true, lineno, "slur close without open"});
                        else
                            --slur_depth;
                    }
                }
                if (first && segment_sum) {
                    auto [num, den] = tok.whole_note_fraction();
                    segment_sum = *segment_sum + Fraction{num, den};
                }
            } catch (const Error& e) {
                diags.push_back({DiagnosticKind::BadMelodyToken, false, lineno, e.what()});
                segment_clean = false;
            }
            first = false;
        }
    }

    if (tie_depth > 0) diags.push_back({DiagnosticKind::UnbalancedTie, true, 0, "unterminated tie"});
    if (slur_depth > 0) diags.push_back({DiagnosticKind::UnbalancedSlur, true, 0, "unterminated slur"});

    return diags;
}

} // namespace leadsheet::kern
