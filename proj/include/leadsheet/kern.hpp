#pragma once

#include "leadsheet/error.hpp"
#include "leadsheet/harte.hpp"

#include <optional>
#include <string>
#include <vector>

namespace leadsheet::kern {

class SpineCountError : public Error {
public:
    using Error::Error;
};
class BadMelodyTokenError : public Error {
public:
    using Error::Error;
};
class BadChordTokenError : public Error {
public:
    using Error::Error;
};
class MissingTerminatorError : public Error {
public:
    using Error::Error;
};
class BadHeaderError : public Error {
public:
    using Error::Error;
};
class InvalidDocumentError : public Error {
public:
    using Error::Error;
};

inline constexpr const char* kLinebreakMarker = "!!linebreak:original";
inline constexpr const char* kMelodySpine = "**kern";
inline constexpr const char* kChordSpine = "**harte";
inline constexpr const char* kLegacyChordSpine = "**mxhm";

enum class LineKind {
    ExclusiveInterpretation,
    Interpretation,
    Barline,
    Data,
    Comment,
    LinebreakMarker,
};

/// One record of a two-spine document. Global comments and linebreak
/// markers occupy the whole line (single_field); every other kind carries
/// a melody field and a chord field.
struct KernLine {
    LineKind kind;
    std::string melody;
    std::string chord;
    bool single_field = false;

    std::string text() const { return single_field ? melody : melody + "\t" + chord; }
    bool operator==(const KernLine&) const = default;
};

struct KernDocument {
    std::vector<KernLine> lines;

    bool operator==(const KernDocument&) const = default;

    /// "!!!key: value" reference records, in document order.
    std::vector<std::pair<std::string, std::string>> reference_records() const;
};

/// One melodic note split into its written parts. text() reconstructs the
/// original spelling byte for byte.
struct MelodyToken {
    std::string pre;         // '[' tie open, '(' slur open
    std::string recip;       // duration digits, "0" = breve
    int dots = 0;
    std::string pitch;       // run of a-g, run of A-G, or "r"
    std::string accidentals; // '#' run or '-' run, optional trailing 'n'
    std::string post;        // ']' ')' '_' 'L' 'J'

    std::string text() const;
    bool is_rest() const { return pitch == "r"; }

    /// Duration as a fraction of a whole note: {numerator, denominator}.
    std::pair<long long, long long> whole_note_fraction() const;
};

MelodyToken scan_melody_token(const std::string& token);

struct ParseOptions {
    // With strict off, malformed melody/chord fields are kept verbatim and
    // reported by validate_document instead of failing the parse.
    bool strict = true;
};

KernDocument parse_kern(const std::string& text, const ParseOptions& options = {});
std::string serialize_kern(const KernDocument& doc);

/// Cuts the document at each linebreak marker. With include_context, every
/// region becomes a standalone document carrying the exclusive
/// interpretations, the active clef and key signature, and the meter when
/// it differs from the document's opening meter. Without it, regions are
/// verbatim line slices whose concatenation (markers re-inserted)
/// reproduces the input.
std::vector<KernDocument> split_regions(const KernDocument& doc, bool include_context = true);

struct StripOptions {
    bool keep_linebreak_markers = true;
};

/// Drops comments and measure numbers ("=12" -> "=").
KernDocument strip_annotations(const KernDocument& doc, const StripOptions& options = {});

enum class DiagnosticKind {
    BadChordToken,
    ChordViolation,
    BadMelodyToken,
    PolyphonicMelody,
    MeasureDurationMismatch,
    UnbalancedTie,
    UnbalancedSlur,
    MissingTerminator,
};

struct Diagnostic {
    DiagnosticKind kind;
    bool warning = true;
    int line = 0; // 1-based, 0 if document-level
    std::string message;
};

std::vector<Diagnostic> validate_document(const KernDocument& doc,
                                          const harte::DegreeTable& table = harte::DegreeTable::builtin());

} // namespace leadsheet::kern
