#include "metarag/llm/mock_provider.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "metarag/error.hpp"
#include "metarag/text.hpp"

namespace metarag::llm {

namespace {

using prompts::PromptId;

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::vector<double> hashed_unit(std::string_view key) {
    std::mt19937_64 rng(fnv1a(key));
    std::vector<double> v(MockProvider::kDimension);
    double norm = 0.0;
    for (auto& x : v) {
        x = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
        norm += x * x;
    }
    norm = std::sqrt(norm);
    for (auto& x : v) {
        x /= norm;
    }
    return v;
}

std::vector<std::string> lines_of(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    std::string line;
    while (std::getline(in, line)) {
        auto t = text::trim(line);
        if (!t.empty()) {
            out.push_back(std::move(t));
        }
    }
    return out;
}

bool is_heading(std::string_view line) {
    return !line.empty() && line.front() == '#';
}

std::string heading_text(std::string_view line) {
    std::size_t i = 0;
    while (i < line.size() && line[i] == '#') {
        ++i;
    }
    std::string t = text::trim(line.substr(i));
    while (!t.empty() && t.back() == '#') {
        t.pop_back();
    }
    t.erase(std::remove(t.begin(), t.end(), '*'), t.end());
    return text::trim(t);
}

std::size_t heading_level(std::string_view line) {
    std::size_t i = 0;
    while (i < line.size() && line[i] == '#') {
        ++i;
    }
    return i;
}

bool is_prose(std::string_view line) {
    return !line.empty() && !is_heading(line) && line.front() != '|' && line.front() != '[' &&
           line.rfind("---", 0) != 0;
}

std::set<std::string> token_set(std::string_view s) {
    auto t = text::analyze(s);
    return {t.begin(), t.end()};
}

std::size_t overlap(const std::vector<std::string>& needles, const std::set<std::string>& hay) {
    std::set<std::string> unique(needles.begin(), needles.end());
    return static_cast<std::size_t>(
        std::count_if(unique.begin(), unique.end(), [&](const std::string& t) { return hay.contains(t); }));
}

std::string first_words(std::string_view sentence, std::size_t n) {
    std::vector<std::string> words;
    for (const auto& span : text::whitespace_tokens(sentence)) {
        if (words.size() == n) {
            break;
        }
        words.emplace_back(sentence.substr(span.begin, span.size()));
    }
    std::string out = text::join(words, " ");
    while (!out.empty() && (out.back() == '.' || out.back() == ',' || out.back() == ':' || out.back() == ';')) {
        out.pop_back();
    }
    return out;
}

// Capitalized runs ("General Mills", "Bertha") and alphanumeric identifiers ("3M").
std::vector<std::string> extract_entities(std::string_view chunk) {
    static const std::set<std::string> common = {
        "the", "a", "an", "in", "on", "our", "we", "this", "these", "that", "it", "its", "for", "as", "at", "by",
        "of", "and", "or", "to", "total", "net", "during", "fiscal", "year", "approximately", "such", "other",
        "each", "all", "no", "not", "if", "when", "while", "however", "with", "from", "into", "also", "both",
        "q1", "q2", "q3", "q4", "summary", "note", "table", "item", "part", "see"};
    std::vector<std::string> entities;
    std::set<std::string> seen;
    auto flush = [&](std::vector<std::string>& run) {
        while (!run.empty() && common.contains(text::normalize_label(run.front()))) {
            run.erase(run.begin());
        }
        if (!run.empty()) {
            std::string e = text::join(run, " ");
            const auto key = text::normalize_label(e);
            if (!common.contains(key) && e.size() > 1 && seen.insert(key).second) {
                entities.push_back(std::move(e));
            }
        }
        run.clear();
    };

    std::vector<std::string> run;
    for (const auto& span : text::whitespace_tokens(chunk)) {
        std::string word(chunk.substr(span.begin, span.size()));
        const bool boundary_after = !word.empty() && std::string_view(",.;:!?)").find(word.back()) != std::string_view::npos;
        while (!word.empty() && !std::isalnum(static_cast<unsigned char>(word.back()))) {
            word.pop_back();
        }
        while (!word.empty() && !std::isalnum(static_cast<unsigned char>(word.front()))) {
            word.erase(word.begin());
        }
        if (word.size() >= 2 && word.size() > 2 && word.substr(word.size() - 2) == "'s") {
            word.resize(word.size() - 2);
        }
        const bool has_digit = std::any_of(word.begin(), word.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
        const bool has_alpha = std::any_of(word.begin(), word.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)); });
        const bool capitalized = !word.empty() && std::isupper(static_cast<unsigned char>(word.front()));
        if (!word.empty() && has_alpha && (capitalized || (has_digit && std::isupper(static_cast<unsigned char>(word.back()))))) {
            run.push_back(word);
        } else {
            flush(run);
        }
        if (boundary_after) {
            flush(run);
        }
        if (entities.size() >= 10) {
            break;
        }
    }
    flush(run);
    if (entities.size() > 10) {
        entities.resize(10);
    }
    return entities;
}

std::string doc_metadata(const std::string& user) {
    const std::string document = prompts::section(user, "document");
    const std::string file_name = prompts::section(user, "file_name");
    const auto lines = lines_of(document);

    std::string title;
    std::vector<std::string> clusters;
    std::vector<std::string> top_level;
    std::set<std::string> seen;
    std::vector<std::string> prose;
    for (const auto& line : lines) {
        if (is_heading(line)) {
            const std::string h = heading_text(line);
            if (h.empty()) {
                continue;
            }
            if (heading_level(line) == 1) {
                if (title.empty()) {
                    title = h;
                }
                top_level.push_back(h);
            } else if (seen.insert(text::normalize_label(h)).second) {
                clusters.push_back(h);
            }
        } else if (is_prose(line)) {
            prose.push_back(line);
        }
    }
    static const std::vector<std::string> fallback = {"Financial Performance & Results", "Risk Factors & Disclosures",
                                                      "Business Overview", "Liquidity & Capital Resources",
                                                      "Corporate Governance"};
    for (const auto* pool : std::array<const std::vector<std::string>*, 2>{&top_level, &fallback}) {
        for (const auto& c : *pool) {
            if (clusters.size() >= 5) {
                break;
            }
            if (seen.insert(text::normalize_label(c)).second) {
                clusters.push_back(c);
            }
        }
    }
    if (clusters.size() > 20) {
        clusters.resize(20);
    }

    std::vector<std::string> sentences;
    for (const auto& p : prose) {
        for (auto& s : split_sentences(p)) {
            sentences.push_back(std::move(s));
        }
    }
    if (title.empty()) {
        title = file_name.empty() ? std::string("Untitled document") : file_name;
    }
    std::string one_liner = sentences.empty() ? title : sentences.front();
    std::replace(one_liner.begin(), one_liner.end(), '\n', ' ');

    std::vector<std::string> brief(sentences.begin(), sentences.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(3, sentences.size())));
    std::string summary = brief.empty() ? title : title + ": " + text::join(brief, " ");

    return nlohmann::json{{"one_liner", one_liner}, {"summary", summary}, {"clusters", clusters}}.dump();
}

std::string chunk_metadata(const std::string& user) {
    const auto clusters = lines_of(prompts::section(user, "document_clusters"));
    const std::string chunk = prompts::section(user, "chunk");
    const auto chunk_tokens = token_set(chunk);

    std::vector<std::pair<std::size_t, std::size_t>> scored;  // (score, position)
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        scored.emplace_back(overlap(content_tokens(clusters[i]), chunk_tokens), i);
    }
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<std::string> parents;
    if (!scored.empty()) {
        parents.push_back(clusters[scored[0].second]);
        if (scored.size() > 1 && scored[1].first > 0 && scored[1].first * 2 >= scored[0].first) {
            parents.push_back(clusters[scored[1].second]);
        }
    }

    const auto entities = extract_entities(chunk);

    std::vector<std::string> questions;
    std::set<std::string> seen;
    auto ask = [&](std::string q) {
        if (questions.size() < 10 && seen.insert(text::normalize_label(q)).second) {
            questions.push_back(std::move(q));
        }
    };
    for (std::size_t i = 0; i < entities.size() && i < 3; ++i) {
        ask("What does the filing report about " + entities[i] + "?");
    }
    for (const auto& s : split_sentences(chunk)) {
        if (is_prose(s) && std::any_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
            ask("What figure is reported for " + first_words(s, 6) + "?");
            if (questions.size() >= 6) {
                break;
            }
        }
    }
    for (const auto& p : parents) {
        ask("What does the filing disclose about " + p + "?");
    }
    ask("What is discussed in this section of the filing?");
    ask("Which details in this section matter for an investor?");
    ask("How does this section relate to the rest of the filing?");

    std::vector<std::string> nuggets;
    const std::string topic = parents.empty() ? std::string("the filing") : parents.front();
    if (entities.size() >= 2) {
        nuggets.push_back("Connects " + entities[0] + " with " + entities[1] + " in the context of " + topic + ".");
    } else if (entities.size() == 1) {
        nuggets.push_back("Links " + entities[0] + " to " + topic + ".");
    } else {
        nuggets.push_back("Provides supporting detail for " + topic + ".");
    }

    return nlohmann::json{{"parent_clusters", parents},
                          {"chunk_entities", entities},
                          {"answered_questions", questions},
                          {"retrieval_nuggets", nuggets}}
        .dump();
}

std::string file_filter(const std::string& user) {
    const auto query = content_tokens(prompts::section(user, "question"));
    std::vector<std::pair<std::string, std::size_t>> scored;
    std::size_t best = 0;
    for (const auto& line : lines_of(prompts::section(user, "files"))) {
        const auto colon = line.find(':');
        const std::string id = text::trim(line.substr(0, colon));
        const auto hay = token_set(line);
        const std::size_t s = overlap(query, hay);
        best = std::max(best, s);
        scored.emplace_back(id, s);
    }
    std::vector<std::string> files;
    if (best > 0) {
        for (const auto& [id, s] : scored) {
            if (s == best) {
                files.push_back(id);
            }
        }
    }
    return nlohmann::json{{"files", files}}.dump();
}

std::string query_rewrite(const std::string& user) {
    const std::string query = prompts::section(user, "question");
    const auto qtokens = content_tokens(query);
    const std::set<std::string> qset(qtokens.begin(), qtokens.end());
    std::vector<std::string> labels;
    std::vector<std::string> all_labels;
    for (const auto& line : lines_of(prompts::section(user, "selected_documents"))) {
        if (line.rfind("Clusters:", 0) != 0) {
            continue;
        }
        std::string rest = line.substr(9);
        std::size_t start = 0;
        while (start <= rest.size()) {
            auto end = rest.find(';', start);
            if (end == std::string::npos) {
                end = rest.size();
            }
            const std::string label = text::trim(rest.substr(start, end - start));
            if (!label.empty()) {
                all_labels.push_back(label);
                if (overlap(content_tokens(label), qset) > 0 &&
                    std::find(labels.begin(), labels.end(), label) == labels.end()) {
                    labels.push_back(label);
                }
            }
            start = end + 1;
        }
    }
    if (labels.empty() && !all_labels.empty()) {
        labels.push_back(all_labels.front());
    }
    std::string rewritten = query;
    for (const auto& l : labels) {
        rewritten += " " + l;
    }
    std::replace(rewritten.begin(), rewritten.end(), '\n', ' ');
    return rewritten;
}

std::string answer(const std::string& user) {
    const std::string context = prompts::section(user, "context");
    const auto question = content_tokens(prompts::section(user, "question"));

    struct Candidate {
        std::string sentence;
        std::string chunk_id;
        std::size_t score;
        std::size_t order;
    };
    std::vector<Candidate> candidates;
    std::string current_id;
    for (const auto& line : lines_of(context)) {
        if (line.size() > 2 && line.front() == '[' && line.back() == ']') {
            current_id = line.substr(1, line.size() - 2);
            continue;
        }
        if (!is_prose(line)) {
            continue;
        }
        for (auto& s : split_sentences(line)) {
            const std::size_t score = overlap(question, token_set(s));
            if (score > 0) {
                candidates.push_back({std::move(s), current_id, score, candidates.size()});
            }
        }
    }
    if (candidates.empty()) {
        return "The provided context does not contain the answer.";
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
    std::vector<std::string> parts;
    std::set<std::string> used;
    for (const auto& c : candidates) {
        if (parts.size() == 2) {
            break;
        }
        if (!used.insert(c.sentence).second) {
            continue;
        }
        std::string s = c.sentence;
        if (s.back() != '.' && s.back() != '!' && s.back() != '?') {
            s.push_back('.');
        }
        parts.push_back(s + " [" + c.chunk_id + "]");
    }
    return text::join(parts, " ");
}

std::string strip_citations(std::string_view s) {
    std::string out;
    int depth = 0;
    for (char c : s) {
        if (c == '[') {
            ++depth;
        } else if (c == ']' && depth > 0) {
            --depth;
        } else if (depth == 0) {
            out.push_back(c);
        }
    }
    return out;
}

std::string claims(const std::string& user) {
    static const std::vector<std::string> markers = {
        "however", "additionally", "also", "moreover", "furthermore", "in addition", "overall", "therefore",
        "thus", "so", "in summary", "in conclusion", "notably", "specifically", "finally", "first", "second",
        "third", "then"};
    const std::string body = strip_citations(prompts::section(user, "text"));
    std::vector<std::string> out;
    for (auto s : split_sentences(body)) {
        bool stripped = true;
        while (stripped) {
            stripped = false;
            const std::string lower = text::normalize_label(s);
            for (const auto& m : markers) {
                if (lower.size() > m.size() && lower.rfind(m, 0) == 0 &&
                    (lower[m.size()] == ',' || lower[m.size()] == ' ')) {
                    std::size_t cut = m.size();
                    while (cut < s.size() && (s[cut] == ',' || text::is_space(s[cut]))) {
                        ++cut;
                    }
                    s = s.substr(cut);
                    stripped = true;
                    break;
                }
            }
        }
        while (!s.empty() && (s.back() == '.' || s.back() == '!' || s.back() == '?' || text::is_space(s.back()))) {
            s.pop_back();
        }
        s = text::trim(s);
        if (!s.empty()) {
            out.push_back(std::move(s));
        }
    }
    return nlohmann::json{{"claims", out}}.dump();
}

std::string entailment(const std::string& user) {
    const auto premise = token_set(prompts::section(user, "premise"));
    const auto claim = content_tokens(prompts::section(user, "claim"));
    const bool entailed =
        std::all_of(claim.begin(), claim.end(), [&](const std::string& t) { return premise.contains(t); });
    return nlohmann::json{{"entailed", entailed}}.dump();
}

} // namespace

const std::set<std::string>& mock_stopwords() {
    static const std::set<std::string> words = {
        "a",     "about", "above", "after", "all",   "also",  "am",    "an",    "and",   "any",   "are",  "as",
        "at",    "be",    "been",  "being", "but",   "by",    "can",   "could", "did",   "do",    "does", "for",
        "from",  "had",   "has",   "have",  "how",   "i",     "if",    "in",    "into",  "is",    "it",   "its",
        "many",  "may",   "me",    "more",  "most",  "much",  "my",    "no",    "not",   "of",    "on",   "or",
        "our",   "over",  "s",     "should", "so",   "such",  "than",  "that",  "the",   "their", "them", "then",
        "there", "these", "they",  "this",  "those", "to",    "under", "up",    "very",  "was",   "we",   "were",
        "what",  "when",  "where", "which", "while", "who",   "why",   "will",  "with",  "would", "you",  "your"};
    return words;
}

std::vector<std::string> content_tokens(std::string_view s) {
    auto tokens = text::analyze(s);
    const auto& stop = mock_stopwords();
    std::erase_if(tokens, [&](const std::string& t) { return stop.contains(t); });
    return tokens;
}

std::vector<float> mock_embedding(std::string_view text_in) {
    std::vector<double> v = hashed_unit(text_in);
    for (auto& x : v) {
        x *= 0.3;
    }
    const auto tokens = content_tokens(text_in);
    if (!tokens.empty()) {
        std::vector<double> bag(MockProvider::kDimension, 0.0);
        for (const auto& t : tokens) {
            const auto u = hashed_unit("token:" + t);
            for (std::size_t i = 0; i < bag.size(); ++i) {
                bag[i] += u[i];
            }
        }
        double norm = 0.0;
        for (double x : bag) {
            norm += x * x;
        }
        norm = std::sqrt(norm);
        if (norm > 0.0) {
            for (std::size_t i = 0; i < bag.size(); ++i) {
                v[i] += bag[i] / norm;
            }
        }
    }
    double norm = 0.0;
    for (double x : v) {
        norm += x * x;
    }
    norm = std::sqrt(norm);
    std::vector<float> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = static_cast<float>(v[i] / norm);
    }
    return out;
}

std::vector<std::string> split_sentences(std::string_view s) {
    std::vector<std::string> out;
    std::string current;
    auto flush = [&] {
        auto t = text::trim(current);
        if (!t.empty()) {
            out.push_back(std::move(t));
        }
        current.clear();
    };
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (c == '\n') {
            flush();
            continue;
        }
        current.push_back(c);
        if ((c == '.' || c == '!' || c == '?') && (i + 1 == s.size() || text::is_space(s[i + 1]))) {
            flush();
        }
    }
    flush();
    return out;
}

void MockProvider::respond(std::optional<prompts::PromptId> task, std::string user_contains, std::string response) {
    add_rule({task, std::move(user_contains), std::move(response), false});
}

void MockProvider::fail(std::optional<prompts::PromptId> task, std::string user_contains) {
    add_rule({task, std::move(user_contains), {}, true});
}

std::string MockProvider::chat(const std::string&, const std::string& system_prompt, const std::string& user_prompt) {
    const auto task = prompts::identify(system_prompt);
    for (const auto& rule : rules_) {
        if (rule.task && rule.task != task) {
            continue;
        }
        if (!rule.user_contains.empty() && user_prompt.find(rule.user_contains) == std::string::npos) {
            continue;
        }
        if (rule.fail) {
            throw TransportError("mock: injected failure");
        }
        return rule.response;
    }
    if (!task) {
        return user_prompt;
    }
    switch (*task) {
    case PromptId::DocumentMetadata: return doc_metadata(user_prompt);
    case PromptId::ChunkMetadata: return chunk_metadata(user_prompt);
    case PromptId::FileFilter: return file_filter(user_prompt);
    case PromptId::QueryRewrite: return query_rewrite(user_prompt);
    case PromptId::Answer: return answer(user_prompt);
    case PromptId::ClaimExtraction: return claims(user_prompt);
    case PromptId::Entailment: return entailment(user_prompt);
    }
    return user_prompt;
}

std::vector<std::vector<float>> MockProvider::embed(const std::string&, std::span<const std::string> texts) {
    std::vector<std::vector<float>> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        out.push_back(mock_embedding(t));
    }
    return out;
}

std::vector<RerankHit> MockProvider::rerank(const std::string&, const std::string& query,
                                            std::span<const std::string> documents, std::size_t top_n) {
    const auto q = content_tokens(query);
    const std::set<std::string> qset(q.begin(), q.end());
    std::vector<RerankHit> hits;
    hits.reserve(documents.size());
    for (std::size_t i = 0; i < documents.size(); ++i) {
        double relevance = 0.0;
        if (!qset.empty()) {
            const auto d = token_set(documents[i]);
            const auto shared = std::count_if(qset.begin(), qset.end(), [&](const std::string& t) { return d.contains(t); });
            relevance = static_cast<double>(shared) / static_cast<double>(qset.size());
        }
        hits.push_back({i, relevance});
    }
    std::stable_sort(hits.begin(), hits.end(), [](const RerankHit& a, const RerankHit& b) { return a.relevance > b.relevance; });
    hits.resize(std::min(top_n, hits.size()));
    return hits;
}

} // namespace metarag::llm
