#include <algorithm>
#include <cctype>
#include <set>

#include "ptmchain/cards.hpp"
#include "ptmchain/strings.hpp"

namespace ptmchain::card {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::size_t word_count(const std::string& text, std::size_t begin, std::size_t end) {
    std::size_t count = 0;
    bool in_word = false;
    for (std::size_t i = begin; i < end; ++i) {
        if (is_space(text[i])) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++count;
        }
    }
    return count;
}

struct Line {
    std::size_t begin = 0;
    std::size_t end = 0;  // includes the trailing newline if present
    bool blank = true;
    bool header = false;
    int header_level = 0;
    std::string header_title;
};

std::vector<Line> split_lines(const std::string& text) {
    std::vector<Line> lines;
    std::size_t pos = 0;
    bool in_fence = false;
    while (pos < text.size()) {
        Line line;
        line.begin = pos;
        std::size_t nl = text.find('\n', pos);
        std::size_t content_end = nl == std::string::npos ? text.size() : nl;
        line.end = nl == std::string::npos ? text.size() : nl + 1;

        std::size_t i = pos;
        while (i < content_end && is_space(text[i])) ++i;
        line.blank = i == content_end;

        bool fence_line = !line.blank && content_end - i >= 3 &&
                          (text.compare(i, 3, "```") == 0 || text.compare(i, 3, "~~~") == 0);
        if (fence_line) in_fence = !in_fence;

        if (!in_fence && !fence_line && i == pos && i < content_end && text[i] == '#') {
            std::size_t hashes = 0;
            while (i + hashes < content_end && text[i + hashes] == '#') ++hashes;
            if (hashes <= 6 && i + hashes < content_end &&
                (text[i + hashes] == ' ' || text[i + hashes] == '\t')) {
                line.header = true;
                line.header_level = static_cast<int>(hashes);
                line.header_title =
                    trim(text.substr(i + hashes, content_end - i - hashes));
            }
        }
        std::size_t next = line.end > pos ? line.end : pos + 1;
        lines.push_back(std::move(line));
        pos = next;
    }
    return lines;
}

// Cuts [begin, end) into pieces of at most max_words words, breaking right
// after the last word that fits.
void split_by_words(const std::string& text, std::size_t begin, std::size_t end,
                    std::size_t max_words, const std::string& header_path,
                    std::vector<Chunk>& out) {
    std::size_t piece_start = begin;
    std::size_t words = 0;
    std::size_t i = begin;
    while (i < end) {
        while (i < end && is_space(text[i])) ++i;
        if (i >= end) break;
        std::size_t word_end = i;
        while (word_end < end && !is_space(text[word_end])) ++word_end;
        ++words;
        if (words == max_words) {
            out.push_back({piece_start, word_end, header_path});
            piece_start = word_end;
            words = 0;
        }
        i = word_end;
    }
    if (piece_start < end) out.push_back({piece_start, end, header_path});
}

void split_section(const std::string& text, const std::vector<Line>& lines,
                   std::size_t first_line, std::size_t last_line, std::size_t max_words,
                   const std::string& header_path, std::vector<Chunk>& out) {
    std::size_t begin = lines[first_line].begin;
    std::size_t end = lines[last_line].end;
    if (begin >= end) return;
    if (word_count(text, begin, end) <= max_words) {
        out.push_back({begin, end, header_path});
        return;
    }

    // Paragraphs: runs of non-blank lines; trailing blank lines ride along.
    std::size_t i = first_line;
    while (i <= last_line) {
        std::size_t para_first = i;
        while (i <= last_line && !lines[i].blank) ++i;
        while (i <= last_line && lines[i].blank) ++i;
        std::size_t para_last = i - 1;
        std::size_t pb = lines[para_first].begin;
        std::size_t pe = lines[para_last].end;
        if (word_count(text, pb, pe) <= max_words) {
            out.push_back({pb, pe, header_path});
            continue;
        }

        // Line groups within one oversized paragraph.
        std::size_t g_first = para_first;
        std::size_t g_words = 0;
        for (std::size_t k = para_first; k <= para_last; ++k) {
            std::size_t lw = word_count(text, lines[k].begin, lines[k].end);
            if (lw > max_words) {
                if (g_first < k) {
                    out.push_back({lines[g_first].begin, lines[k - 1].end, header_path});
                }
                split_by_words(text, lines[k].begin, lines[k].end, max_words,
                               header_path, out);
                g_first = k + 1;
                g_words = 0;
                continue;
            }
            if (g_words + lw > max_words && g_first < k) {
                out.push_back({lines[g_first].begin, lines[k - 1].end, header_path});
                g_first = k;
                g_words = 0;
            }
            g_words += lw;
        }
        if (g_first <= para_last) {
            out.push_back({lines[g_first].begin, lines[para_last].end, header_path});
        }
    }
}

}  // namespace

std::vector<Chunk> split_markdown(const std::string& text, std::size_t max_words) {
    std::vector<Chunk> chunks;
    if (text.empty() || max_words == 0) return chunks;

    std::vector<Line> lines = split_lines(text);
    std::vector<std::string> stack;  // header titles by level

    std::size_t section_first = 0;
    std::string section_path;
    bool have_section = false;

    auto flush = [&](std::size_t last_line) {
        if (!have_section) return;
        split_section(text, lines, section_first, last_line, max_words, section_path,
                      chunks);
        have_section = false;
    };

    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].header) {
            if (have_section) flush(i - 1);
            stack.resize(static_cast<std::size_t>(lines[i].header_level) - 1);
            stack.push_back(lines[i].header_title);
            section_path = join(stack, " > ");
            section_first = i;
            have_section = true;
        } else if (!have_section) {
            section_first = i;
            have_section = true;
        }
    }
    flush(lines.size() - 1);
    return chunks;
}

std::size_t token_estimate(const std::string& text) {
    std::size_t words = word_count(text, 0, text.size());
    return (words * 4 + 2) / 3;
}

std::vector<const Chunk*> retrieve(const std::vector<Chunk>& chunks,
                                   const std::string& source, const std::string& query,
                                   std::size_t k) {
    std::vector<std::string> query_words = split_words(to_lower(query));
    std::set<std::string> query_set(query_words.begin(), query_words.end());

    struct Scored {
        double score = 0.0;
        std::size_t index = 0;
    };
    std::vector<Scored> scored;
    scored.reserve(chunks.size());
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        std::set<std::string> chunk_words;
        for (const auto& w : split_words(to_lower(chunks[i].text_of(source)))) {
            chunk_words.insert(w);
        }
        std::size_t hit = 0;
        for (const auto& q : query_set) {
            if (chunk_words.count(q)) ++hit;
        }
        double score = query_set.empty()
                           ? 0.0
                           : static_cast<double>(hit) / static_cast<double>(query_set.size());
        scored.push_back({score, i});
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const Scored& a, const Scored& b) { return a.score > b.score; });

    std::vector<const Chunk*> out;
    for (std::size_t i = 0; i < scored.size() && out.size() < k; ++i) {
        out.push_back(&chunks[scored[i].index]);
    }
    return out;
}

}  // namespace ptmchain::card
