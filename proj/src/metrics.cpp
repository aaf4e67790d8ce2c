#include "leadsheet/metrics.hpp"

#include <algorithm>
#include <cstdint>

namespace leadsheet::metrics {

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

uint32_t decode_codepoint(const std::string& text, size_t& i) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    size_t len = 1;
    uint32_t cp = c;
    if (c >= 0xF0)
        len = 4, cp = c & 0x07;
    else if (c >= 0xE0)
        len = 3, cp = c & 0x0F;
    else if (c >= 0xC0)
        len = 2, cp = c & 0x1F;
    if (i + len > text.size()) len = 1;
    for (size_t k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(text[i + k]) & 0x3F);
    i += len;
    return len == 1 ? c : cp;
}

bool is_combining_mark(uint32_t cp) {
    return (cp >= 0x0300 && cp <= 0x036F) || (cp >= 0x1AB0 && cp <= 0x1AFF) ||
           (cp >= 0x20D0 && cp <= 0x20FF) || (cp >= 0xFE20 && cp <= 0xFE2F);
}

bool is_metric_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\v' || c == '\f'; }

MetricResult make_result(const EditCounts& counts, long long ref_length) {
    MetricResult r;
    r.counts = counts;
    r.ref_length = ref_length;
    r.rate = static_cast<double>(counts.distance) / static_cast<double>(ref_length);
    return r;
}

PairReport micro_average(std::span<const PairReport> pairs) {
    PairReport total;
    for (const auto& p : pairs) {
        auto add = [](MetricResult& into, const MetricResult& from) {
            into.counts.distance += from.counts.distance;
            into.counts.insertions += from.counts.insertions;
            into.counts.deletions += from.counts.deletions;
            into.counts.substitutions += from.counts.substitutions;
            into.ref_length += from.ref_length;
        };
        add(total.cer, p.cer);
        add(total.wer, p.wer);
        add(total.ler, p.ler);
    }
    auto finish = [](MetricResult& m) {
        m.rate = m.ref_length > 0 ? static_cast<double>(m.counts.distance) / static_cast<double>(m.ref_length)
                                  : 0.0;
    };
    finish(total.cer);
    finish(total.wer);
    finish(total.ler);
    return total;
}

} // namespace

EditCounts edit_distance(std::span<const std::string> ref, std::span<const std::string> hyp) {
    const size_t m = ref.size();
    const size_t n = hyp.size();

    // rolling rows; each cell carries the op counts of one optimal path
    struct Cell {
        long long dist, ins, del, sub;
    };
    constexpr size_t kStackRow = 64;
    Cell stack_prev[kStackRow + 1], stack_cur[kStackRow + 1];
    std::vector<Cell> heap_prev, heap_cur;
    Cell* prev = stack_prev;
    Cell* cur = stack_cur;
    if (n > kStackRow) {
        heap_prev.resize(n + 1);
        heap_cur.resize(n + 1);
        prev = heap_prev.data();
        cur = heap_cur.data();
    }
    for (size_t j = 0; j <= n; ++j) prev[j] = {static_cast<long long>(j), static_cast<long long>(j), 0, 0};

    for (size_t i = 1; i <= m; ++i) {
        cur[0] = {static_cast<long long>(i), 0, static_cast<long long>(i), 0};
        for (size_t j = 1; j <= n; ++j) {
            if (ref[i - 1] == hyp[j - 1]) {
                cur[j] = prev[j - 1];
                continue;
            }
            const Cell& sub = prev[j - 1];
            const Cell& del = prev[j];
            const Cell& ins = cur[j - 1];
            // tie-break: substitution, then deletion, then insertion
            if (sub.dist <= del.dist && sub.dist <= ins.dist) {
                cur[j] = {sub.dist + 1, sub.ins, sub.del, sub.sub + 1};
            } else if (del.dist <= ins.dist) {
                cur[j] = {del.dist + 1, del.ins, del.del + 1, del.sub};
            } else {
                cur[j] = {ins.dist + 1, ins.ins + 1, ins.del, ins.sub};
            }
        }
        std::swap(prev, cur);
    }
    const Cell& final_cell = prev[n];
    return {final_cell.dist, final_cell.ins, final_cell.del, final_cell.sub};
}

std::vector<AlignmentOp> edit_alignment(std::span<const std::string> ref,
                                        std::span<const std::string> hyp) {
    const size_t m = ref.size();
    const size_t n = hyp.size();
    std::vector<uint32_t> dp((m + 1) * (n + 1));
    auto at = [&](size_t i, size_t j) -> uint32_t& { return dp[i * (n + 1) + j]; };

    for (size_t i = 0; i <= m; ++i) at(i, 0) = static_cast<uint32_t>(i);
    for (size_t j = 0; j <= n; ++j) at(0, j) = static_cast<uint32_t>(j);
    for (size_t i = 1; i <= m; ++i) {
        for (size_t j = 1; j <= n; ++j) {
            if (ref[i - 1] == hyp[j - 1]) {
                at(i, j) = at(i - 1, j - 1);
            } else {
                at(i, j) = 1 + std::min({at(i - 1, j - 1), at(i - 1, j), at(i, j - 1)});
            }
        }
    }

    std::vector<AlignmentOp> ops;
    size_t i = m, j = n;
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0 && ref[i - 1] == hyp[j - 1] && at(i, j) == at(i - 1, j - 1)) {
            ops.push_back({OpKind::Match, i - 1, j - 1});
            --i, --j;
        } else if (i > 0 && j > 0 && at(i, j) == at(i - 1, j - 1) + 1) {
            ops.push_back({OpKind::Substitute, i - 1, j - 1});
            --i, --j;
        } else if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
            ops.push_back({OpKind::Delete, i - 1, j});
            --i;
        } else {
            ops.push_back({OpKind::Insert, i, j - 1});
            --j;
        }
    }
    std::reverse(ops.begin(), ops.end());
    return ops;
}

std::vector<std::string> graphemes(const std::string& text) {
    std::string norm = normalize_endings(text);
    std::vector<std::string> out;
    size_t i = 0;
    while (i < norm.size()) {
        size_t start = i;
        decode_codepoint(norm, i);
        std::string cluster = norm.substr(start, i - start);
        // attach combining marks to the preceding cluster
        while (i < norm.size()) {
            size_t next = i;
            uint32_t cp = decode_codepoint(norm, next);
            if (!is_combining_mark(cp)) break;
            cluster += norm.substr(i, next - i);
            i = next;
        }
        out.push_back(std::move(cluster));
    }
    return out;
}

std::vector<std::string> words(const std::string& text) {
    std::string norm = normalize_endings(text);
    std::vector<std::string> out;
    std::string current;
    for (char c : norm) {
        if (is_metric_space(c)) {
            if (!current.empty()) out.push_back(std::move(current));
            current.clear();
        } else {
            current += c;
        }
    }
    if (!current.empty()) out.push_back(std::move(current));
    return out;
}

std::vector<std::string> lines(const std::string& text) {
    std::string norm = normalize_endings(text);
    std::vector<std::string> out;
    std::string current;
    for (char c : norm) {
        if (c == '\n') {
            out.push_back(std::move(current));
            current.clear();
        } else {
            current += c;
        }
    }
    if (!current.empty()) out.push_back(std::move(current));
    return out;
}

MetricResult cer(const std::string& ref, const std::string& hyp) {
    auto r = graphemes(ref);
    if (r.empty()) throw EmptyReferenceError("reference has no characters");
    auto h = graphemes(hyp);
    return make_result(edit_distance(r, h), static_cast<long long>(r.size()));
}

MetricResult wer(const std::string& ref, const std::string& hyp) {
    auto r = words(ref);
    if (r.empty()) throw EmptyReferenceError("reference has no words");
    auto h = words(hyp);
    return make_result(edit_distance(r, h), static_cast<long long>(r.size()));
}

MetricResult ler(const std::string& ref, const std::string& hyp) {
    auto r = lines(ref);
    if (r.empty()) throw EmptyReferenceError("reference has no lines");
    auto h = lines(hyp);
    return make_result(edit_distance(r, h), static_cast<long long>(r.size()));
}

PairReport score_pair(const std::string& ref, const std::string& hyp) {
    return {cer(ref, hyp), wer(ref, hyp), ler(ref, hyp)};
}

CorpusReport corpus_report(std::span<const std::pair<std::string, std::string>> pairs) {
    CorpusReport report;
    report.pairs.reserve(pairs.size());
    for (size_t i = 0; i < pairs.size(); ++i) {
        try {
            report.pairs.push_back(score_pair(pairs[i].first, pairs[i].second));
        } catch (const EmptyReferenceError& e) {
            throw EmptyReferenceError("pair " + std::to_string(i) + ": " + e.what());
        }
    }
    report.micro = micro_average(report.pairs);

    PairReport macro;
    for (const auto& p : report.pairs) {
        macro.cer.rate += p.cer.rate;
        macro.wer.rate += p.wer.rate;
        macro.ler.rate += p.ler.rate;
    }
    if (!report.pairs.empty()) {
        double n = static_cast<double>(report.pairs.size());
        macro.cer.rate /= n;
        macro.wer.rate /= n;
        macro.ler.rate /= n;
    }
    report.macro_mean = macro;
    return report;
}

} // namespace leadsheet::metrics
