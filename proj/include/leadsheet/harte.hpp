#pragma once

#include "leadsheet/error.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace leadsheet::harte {

// Errors thrown by parse_chord / serialize_chord.
class SyntaxError : public Error {
public:
    using Error::Error;
};
class UnknownShorthandError : public Error {
public:
    using Error::Error;
};
class ShorthandExpressibleError : public Error {
public:
    using Error::Error;
};
class DuplicateExtensionError : public Error {
public:
    using Error::Error;
};
class UnknownSurfaceSymbolError : public Error {
public:
    using Error::Error;
};
class InvalidChordError : public Error {
public:
    using Error::Error;
};

/// One chord extension: an added/altered degree ("b9", "#11") or a removed
/// one ("no5"). Accidentals are a run of '#' or a run of 'b'.
struct Extension {
    bool removal = false;
    std::string accidentals;
    int degree = 0;

    std::string text() const;
    bool operator==(const Extension&) const = default;
};

/// A chord in the restricted grammar root:shorthand(ext,...)/bass.
struct HarteChord {
    std::string root;                  // "C", "F#", "Bb", ...
    std::string shorthand;             // one of the 24 recognized shorthands
    std::vector<Extension> extensions; // parse order preserved
    std::optional<std::string> bass;   // scale degree, e.g. "3", "b7"

    bool operator==(const HarteChord&) const = default;
};

/// A chord-quality spelling as it appears on a score ("Δ7", "-", "mi").
struct SurfaceSymbol {
    std::string text;
};

/// Maps each shorthand to the scale degrees it implies (root excluded).
/// Degrees are spelled strings such as "3", "b7", "#5".
class DegreeTable {
public:
    static const DegreeTable& builtin();
    static DegreeTable load(const std::string& path);

    bool contains(const std::string& shorthand) const;
    const std::vector<std::string>& degrees(const std::string& shorthand) const;
    const std::map<std::string, std::vector<std::string>>& entries() const { return table_; }

private:
    std::map<std::string, std::vector<std::string>> table_;
};

/// Maps surface chord-quality spellings to canonical quality strings
/// (shorthand plus optional extension list, no root).
class AliasTable {
public:
    static const AliasTable& builtin();
    static AliasTable load(const std::string& path);

    bool contains(const std::string& surface) const;
    const std::string& quality(const std::string& surface) const;
    const std::map<std::string, std::string>& entries() const { return table_; }

private:
    std::map<std::string, std::string> table_;
};

enum class ViolationKind {
    BadRoot,
    UnknownShorthand,
    DegreeOutOfRange,
    DuplicateExtension,
    ShorthandExpressible,
    BadBass,
    DoubleAccidentalRoot,   // warning
    RemovesAbsentDegree,    // warning
};

struct Violation {
    ViolationKind kind;
    bool warning = false;
    std::string message;
};

struct ValidationResult {
    std::vector<Violation> violations;

    bool ok() const;            // no error-severity violations
    bool has(ViolationKind k) const;
};

HarteChord parse_chord(const std::string& text, const DegreeTable& table = DegreeTable::builtin());
std::string serialize_chord(const HarteChord& chord, const DegreeTable& table = DegreeTable::builtin());
ValidationResult validate_chord(const HarteChord& chord, const DegreeTable& table = DegreeTable::builtin());

/// Resolves a surface spelling against the alias table and returns the
/// canonical chord on the given root.
HarteChord normalize_surface(const SurfaceSymbol& symbol, const std::string& root,
                             const AliasTable& aliases = AliasTable::builtin(),
                             const DegreeTable& table = DegreeTable::builtin());

/// True iff both chords name the same root, bass and implied degree set.
bool chords_equivalent(const HarteChord& a, const HarteChord& b,
                       const DegreeTable& table = DegreeTable::builtin());

/// Full degree set implied by the chord, including the implicit root "1".
std::set<std::string> degree_set(const HarteChord& chord, const DegreeTable& table = DegreeTable::builtin());

/// The 24 shorthands of the restricted grammar, in canonical order.
const std::vector<std::string>& shorthand_list();

bool is_valid_root(const std::string& root);
bool is_valid_degree_string(const std::string& degree);

} // namespace leadsheet::harte
