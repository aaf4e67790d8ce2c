#pragma once

#include "leadsheet/error.hpp"
#include "leadsheet/kern.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace leadsheet::tok {

class TokenizeError : public Error {
public:
    using Error::Error;
};
class MalformedStreamError : public Error {
public:
    using Error::Error;
};
class OutOfVocabularyError : public Error {
public:
    using Error::Error;
};
class OutOfRangeIdError : public Error {
public:
    using Error::Error;
};

enum class Strategy { Word, Char, Medium };

std::string strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);

// Special tokens. TAB and NEWLINE stand for the structural separators and
// appear inside token streams; BOS/EOS/PAD/UNK only surround or replace.
inline constexpr const char* kBos = "<bos>";
inline constexpr const char* kEos = "<eos>";
inline constexpr const char* kPad = "<pad>";
inline constexpr const char* kTab = "<tab>";
inline constexpr const char* kNewline = "<newline>";
inline constexpr const char* kUnk = "<unk>";

struct TokenStream {
    Strategy strategy = Strategy::Word;
    std::vector<std::string> tokens;

    bool operator==(const TokenStream&) const = default;
};

class Vocabulary {
public:
    Vocabulary() = default;
    Vocabulary(Strategy strategy, std::vector<std::string> tokens_in_id_order);

    Strategy strategy() const { return strategy_; }
    size_t size() const { return tokens_.size(); }
    const std::vector<std::string>& tokens() const { return tokens_; }

    bool contains(const std::string& token) const;
    int32_t id_of(const std::string& token) const; // throws OutOfVocabularyError
    const std::string& token_of(int32_t id) const; // throws OutOfRangeIdError

    int32_t bos_id() const { return id_of(kBos); }
    int32_t eos_id() const { return id_of(kEos); }
    int32_t pad_id() const { return id_of(kPad); }
    int32_t unk_id() const { return id_of(kUnk); }

    std::string to_json() const;
    static Vocabulary from_json(const std::string& json_text);
    void save(const std::string& path) const;
    static Vocabulary load(const std::string& path);

private:
    Strategy strategy_ = Strategy::Word;
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int32_t> ids_;
};

/// Turns kern text into a token sequence. The text must parse as a valid
/// document; spine boundaries become <tab> tokens and line boundaries
/// <newline> tokens under every strategy.
TokenStream tokenize(const std::string& text, Strategy strategy);

/// Reconstructs kern text from a token sequence; exact inverse of tokenize.
std::string detokenize(const TokenStream& stream);

/// Deterministic vocabulary over the union of corpus token sets: specials
/// first, then the remaining tokens sorted bytewise.
Vocabulary build_vocabulary(std::span<const std::string> corpus, Strategy strategy,
                            std::span<const std::string> names = {});

struct EncodeOptions {
    bool add_bos_eos = false;
    bool substitute_unknown = false; // map unknown tokens to <unk> instead of failing
};

std::vector<int32_t> encode(const TokenStream& stream, const Vocabulary& vocab,
                            const EncodeOptions& options = {});

struct DecodeOptions {
    bool strip_framing = true; // drop leading <bos> / trailing <eos>
};

TokenStream decode(std::span<const int32_t> ids, const Vocabulary& vocab, const DecodeOptions& options = {});

} // namespace leadsheet::tok
