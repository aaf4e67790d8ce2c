#pragma once

#include "leadsheet/error.hpp"
#include "leadsheet/harte.hpp"
#include "leadsheet/kern.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace leadsheet::musicxml {

/// Base class for everything the converter can throw.
class ConversionError : public Error {
public:
    using Error::Error;
};
class UnknownKindError : public ConversionError {
public:
    using ConversionError::ConversionError;
};
class UnmappableDegreeError : public ConversionError {
public:
    using ConversionError::ConversionError;
};
class OctaveOutOfRangeError : public ConversionError {
public:
    using ConversionError::ConversionError;
};
class NonRepresentableDurationError : public ConversionError {
public:
    using ConversionError::ConversionError;
};
class MultiPartUnsupportedError : public ConversionError {
public:
    using ConversionError::ConversionError;
};
class PolyphonyError : public ConversionError {
public:
    using ConversionError::ConversionError;
};
/// Raised for the legacy encoding where harmony/kind@text carries the real
/// quality (e.g. text "6" on kind "major"). These need a manual fix in the
/// source file; the error message suggests the intended kind.
class LegacyHarmonyTextError : public ConversionError {
public:
    using ConversionError::ConversionError;
};

enum class DegreeType { Add, Alter, Subtract };

struct HarmonyDegree {
    int value = 0;
    int alter = 0;
    DegreeType type = DegreeType::Add;
};

/// A MusicXML <harmony> element reduced to the parts the converter needs.
struct HarmonyElement {
    std::string root_step;  // "A".."G"
    int root_alter = 0;
    std::string kind;       // MusicXML kind value, e.g. "dominant"
    std::string kind_text;  // kind/@text if present
    std::vector<HarmonyDegree> degrees;
    std::optional<std::pair<std::string, int>> bass; // step, alter
};

/// A MusicXML <note> reduced to what the melody spine encodes.
struct MelodyNote {
    std::string step; // empty for rests
    int alter = 0;
    int octave = 4;
    long long duration = 0; // in divisions
    int dots = 0;
    bool rest = false;
    bool tie_start = false;
    bool tie_stop = false;
    bool slur_start = false;
    bool slur_stop = false;
    enum class Beam { None, Begin, End } beam = Beam::None;
    std::string voice = "1";
    int staff = 1;
};

/// Maps each MusicXML harmony kind to its template degrees (root excluded),
/// e.g. "dominant" -> {3, 5, b7}. Shipped as data so exotic kinds can be
/// remapped without a rebuild.
class KindTable {
public:
    static const KindTable& builtin();
    static KindTable load(const std::string& path);

    bool contains(const std::string& kind) const;
    const std::vector<std::string>& degrees(const std::string& kind) const;
    const std::map<std::string, std::vector<std::string>>& entries() const { return table_; }

private:
    std::map<std::string, std::vector<std::string>> table_;
};

/// Converts one harmony element to a chord in the restricted grammar.
/// The output is always valid: the quality is re-expressed with the
/// shorthand whose degree set is closest to the element's final degree set,
/// and the leftover degrees become plain or "no"-prefixed extensions.
harte::HarteChord convert_harmony(const HarmonyElement& h,
                                  const KindTable& kinds = KindTable::builtin(),
                                  const harte::DegreeTable& table = harte::DegreeTable::builtin());

/// Kern spelling of a pitch: octave 4 = "c", 5 = "cc", 3 = "C", 2 = "CC";
/// alter becomes a run of '#' or '-'.
std::string pitch_to_kern(const std::string& step, int alter, int octave);

/// Kern recip (duration) string, dots included, via exact rational
/// arithmetic. Breve = "0"; tuplet bases such as 1/12 render as "12".
std::string duration_to_recip(long long duration, long long divisions_per_quarter, int dots);

/// Full kern melody token for one note, e.g. "[8dd#L".
std::string kern_note_token(const MelodyNote& note, long long divisions_per_quarter);

/// "*k[f#c#]"-style interpretation from a circle-of-fifths count.
std::string key_signature_interp(int fifths);

/// Scale degree of the bass pitch relative to the root, e.g. (C, Bb) -> "b7".
std::string bass_degree(const std::string& root_step, int root_alter,
                        const std::string& bass_step, int bass_alter);

struct ConvertOptions {
    bool top_voice = false;      // keep first voice/staff instead of failing on polyphony
    bool strict_harmony = false; // promote harmony warnings to errors
    bool keep_lyrics = false;    // lyrics are never preserved; true only adds a warning
    const KindTable* kinds = nullptr;            // nullptr = builtin
    const harte::DegreeTable* degrees = nullptr; // nullptr = builtin
};

/// Converts a MusicXML partwise score (XML text) to a two-spine kern
/// document. Warnings, when requested, describe skipped or adjusted content.
kern::KernDocument convert_score(const std::string& xml, const ConvertOptions& options = {},
                                 std::vector<std::string>* warnings = nullptr);

/// Reads .xml/.musicxml directly or extracts the rootfile from a compressed
/// .mxl container, then converts.
kern::KernDocument convert_file(const std::filesystem::path& path, const ConvertOptions& options = {},
                                std::vector<std::string>* warnings = nullptr);

/// The raw MusicXML text behind a path (identity for plain XML files,
/// container extraction for .mxl).
std::string extract_musicxml(const std::filesystem::path& path);

} // namespace leadsheet::musicxml
