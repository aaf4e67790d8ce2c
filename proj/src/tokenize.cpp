#include "leadsheet/tokenize.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace leadsheet::tok {

namespace {

const std::vector<std::string> kSpecials = {kBos, kEos, kPad, kTab, kNewline, kUnk};

bool is_special(const std::string& token) {
    return std::find(kSpecials.begin(), kSpecials.end(), token) != kSpecials.end();
}

std::vector<std::string> split_utf8(const std::string& text) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < text.size()) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        size_t len = 1;
        if (c >= 0xF0)
            len = 4;
        else if (c >= 0xE0)
            len = 3;
        else if (c >= 0xC0)
            len = 2;
        if (i + len > text.size()) len = 1;
        out.push_back(text.substr(i, len));
        i += len;
    }
    return out;
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

void emit_medium_note(const std::string& token, std::vector<std::string>& out) {
    kern::MelodyToken t = kern::scan_melody_token(token);
    for (char c : t.pre) out.emplace_back(1, c);
    out.push_back(t.recip);
    for (int i = 0; i < t.dots; ++i) out.emplace_back(".");
    out.push_back(t.pitch);
    for (char c : t.accidentals) out.emplace_back(1, c);
    for (char c : t.post) out.emplace_back(1, c);
}

void emit_medium_chord(const std::string& field, std::vector<std::string>& out) {
    harte::HarteChord chord = harte::parse_chord(field);
    out.push_back(chord.root);
    out.emplace_back(":");
    out.push_back(chord.shorthand);
    if (!chord.extensions.empty()) {
        out.emplace_back("(");
        for (size_t i = 0; i < chord.extensions.size(); ++i) {
            if (i > 0) out.emplace_back(",");
            out.push_back(chord.extensions[i].text());
        }
        out.emplace_back(")");
    }
    if (chord.bass) {
        out.emplace_back("/");
        out.push_back(*chord.bass);
    }
}

void emit_field(const kern::KernLine& line, bool melody_field, Strategy strategy,
                std::vector<std::string>& out) {
    const std::string& field = melody_field ? line.melody : line.chord;

    if (strategy == Strategy::Char) {
        for (auto& c : split_utf8(field)) out.push_back(std::move(c));
        return;
    }
    if (strategy == Strategy::Word || line.kind != kern::LineKind::Data || field == ".") {
        out.push_back(field);
        return;
    }
    // medium level, data field
    if (melody_field) {
        auto subs = split_subtokens(field);
        for (size_t i = 0; i < subs.size(); ++i) {
            if (i > 0) out.emplace_back(" ");
            emit_medium_note(subs[i], out);
        }
    } else {
        emit_medium_chord(field, out);
    }
}

} // namespace

std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::Word: return "word";
        case Strategy::Char: return "char";
        case Strategy::Medium: return "medium";
    }
    return "word";
}

Strategy strategy_from_name(const std::string& name) {
    if (name == "word") return Strategy::Word;
    if (name == "char") return Strategy::Char;
    if (name == "medium") return Strategy::Medium;
    throw Error("unknown tokenisation strategy: " + name);
}

TokenStream tokenize(const std::string& text, Strategy strategy) {
    kern::KernDocument doc;
    try {
        doc = kern::parse_kern(text);
    } catch (const Error& e) {
        throw TokenizeError(std::string("input is not a valid kern document: ") + e.what());
    }

    TokenStream stream;
    stream.strategy = strategy;
    try {
        for (const auto& line : doc.lines) {
            emit_field(line, true, strategy, stream.tokens);
            if (!line.single_field) {
                stream.tokens.emplace_back(kTab);
                emit_field(line, false, strategy, stream.tokens);
            }
            stream.tokens.emplace_back(kNewline);
        }
    } catch (const Error& e) {
        throw TokenizeError(e.what());
    }
    return stream;
}

std::string detokenize(const TokenStream& stream) {
    std::string out;
    int tabs_on_line = 0;
    bool previous_was_tab = false;
    for (size_t i = 0; i < stream.tokens.size(); ++i) {
        const std::string& token = stream.tokens[i];
        if (token == kPad) {
            throw MalformedStreamError("<pad> token at position " + std::to_string(i));
        }
        if (token == kBos) {
            if (i != 0) throw MalformedStreamError("<bos> token inside the stream");
            continue;
        }
        if (token == kEos) {
            if (i + 1 != stream.tokens.size())
                throw MalformedStreamError("<eos> token before end of stream");
            continue;
        }
        if (token == kTab) {
            if (previous_was_tab) {
                throw MalformedStreamError("consecutive <tab> tokens at position " + std::to_string(i));
            }
            if (++tabs_on_line > 1) {
                throw MalformedStreamError("more than two spine fields on one line (position " +
                                           std::to_string(i) + ")");
            }
            out += '\t';
            previous_was_tab = true;
            continue;
        }
        previous_was_tab = false;
        if (token == kNewline) {
            out += '\n';
            tabs_on_line = 0;
        } else {
            out += token;
        }
    }
    return out;
}

Vocabulary::Vocabulary(Strategy strategy, std::vector<std::string> tokens_in_id_order)
    : strategy_(strategy), tokens_(std::move(tokens_in_id_order)) {
    for (size_t i = 0; i < tokens_.size(); ++i) {
        auto [it, inserted] = ids_.emplace(tokens_[i], static_cast<int32_t>(i));
        if (!inserted) throw Error("duplicate token in vocabulary: " + tokens_[i]);
    }
    for (const auto& s : kSpecials) {
        if (!ids_.count(s)) throw Error("vocabulary is missing special token " + s);
    }
}

bool Vocabulary::contains(const std::string& token) const { return ids_.count(token) > 0; }

int32_t Vocabulary::id_of(const std::string& token) const {
    auto it = ids_.find(token);
    if (it == ids_.end()) throw OutOfVocabularyError("token not in vocabulary: '" + token + "'");
    return it->second;
}

const std::string& Vocabulary::token_of(int32_t id) const {
    if (id < 0 || static_cast<size_t>(id) >= tokens_.size()) {
        throw OutOfRangeIdError("id " + std::to_string(id) + " outside vocabulary of size " +
                                std::to_string(tokens_.size()));
    }
    return tokens_[static_cast<size_t>(id)];
}

std::string Vocabulary::to_json() const {
    nlohmann::ordered_json j;
    j["strategy"] = strategy_name(strategy_);
    j["specials"] = kSpecials;
    j["tokens"] = tokens_;
    return j.dump(2) + "\n";
}

Vocabulary Vocabulary::from_json(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    Strategy strategy = strategy_from_name(j.at("strategy").get<std::string>());
    auto tokens = j.at("tokens").get<std::vector<std::string>>();
    return Vocabulary(strategy, std::move(tokens));
}

void Vocabulary::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot write vocabulary file: " + path);
    out << to_json();
}

Vocabulary Vocabulary::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read vocabulary file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

Vocabulary build_vocabulary(std::span<const std::string> corpus, Strategy strategy,
                            std::span<const std::string> names) {
    std::set<std::string> seen;
    for (size_t i = 0; i < corpus.size(); ++i) {
        try {
            TokenStream stream = tokenize(corpus[i], strategy);
            seen.insert(stream.tokens.begin(), stream.tokens.end());
        } catch (const Error& e) {
            std::string where = i < names.size() ? names[i] : "document " + std::to_string(i);
            throw TokenizeError(where + ": " + e.what());
        }
    }
    std::vector<std::string> tokens = kSpecials;
    for (const auto& t : seen) {
        if (!is_special(t)) tokens.push_back(t);
    }
    return Vocabulary(strategy, std::move(tokens));
}

std::vector<int32_t> encode(const TokenStream& stream, const Vocabulary& vocab,
                            const EncodeOptions& options) {
    std::vector<int32_t> ids;
    ids.reserve(stream.tokens.size() + 2);
    if (options.add_bos_eos) ids.push_back(vocab.bos_id());
    for (size_t i = 0; i < stream.tokens.size(); ++i) {
        const std::string& token = stream.tokens[i];
        if (vocab.contains(token)) {
            ids.push_back(vocab.id_of(token));
        } else if (options.substitute_unknown) {
            ids.push_back(vocab.unk_id());
        } else {
            throw OutOfVocabularyError("token '" + token + "' at position " + std::to_string(i) +
                                       " not in vocabulary");
        }
    }
    if (options.add_bos_eos) ids.push_back(vocab.eos_id());
    return ids;
}

TokenStream decode(std::span<const int32_t> ids, const Vocabulary& vocab, const DecodeOptions& options) {
    TokenStream stream;
    stream.strategy = vocab.strategy();
    stream.tokens.reserve(ids.size());
    for (int32_t id : ids) stream.tokens.push_back(vocab.token_of(id));
    if (options.strip_framing) {
        if (!stream.tokens.empty() && stream.tokens.front() == kBos) {
            stream.tokens.erase(stream.tokens.begin());
        }
        if (!stream.tokens.empty() && stream.tokens.back() == kEos) {
            stream.tokens.pop_back();
        }
    }
    return stream;
}

} // namespace leadsheet::tok
