#include "metarag/prompts.hpp"

#include <array>

#include "metarag/error.hpp"
#include "metarag/text.hpp"

namespace metarag::prompts {

namespace {

constexpr std::string_view kDocSystem =
    "You are a senior financial analyst who indexes corporate filings for a retrieval system. "
    "You read a whole filing and describe it precisely and without speculation.";

constexpr std::string_view kDocUser = R"(Produce document-level metadata for the filing below.

one_liner: one impactful sentence that states the document's core purpose, like an executive headline.
summary: a dense analytical brief in the third person that connects the key financial figures to the strategic narrative.
clusters: between 5 and 20 high-level thematic labels (for example "Financial Performance & Results", "Risk Factors & Disclosures") naming the primary topics of the document. They will be used to categorize every chunk of the document.

<file_name>{{file_name}}</file_name>
<document>
{{document}}
</document>)";

constexpr std::string_view kChunkSystem =
    "You annotate one chunk of a corporate filing with retrieval metadata. "
    "Only use information that is present in the chunk or in the supplied document context.";

constexpr std::string_view kChunkUser = R"(Annotate the chunk using the document context.

parent_clusters: the one or two document clusters that best describe the chunk. Copy them exactly from the list.
chunk_entities: key entities mentioned in the chunk itself (companies, products, segments, people, places).
answered_questions: 3 to 10 specific, high-value questions that the chunk answers wholly or in part.
retrieval_nuggets: non-obvious insights or connections a retrieval system could use.

<document_summary>
{{summary}}
</document_summary>
<document_clusters>
{{clusters}}
</document_clusters>
<chunk>
{{chunk}}
</chunk>)";

constexpr std::string_view kFilterSystem =
    "You route questions about corporate filings to the documents that can answer them.";

constexpr std::string_view kFilterUser = R"(Select the files that are most relevant to the question. Use the exact file identifiers shown before each colon. Select only files that are likely to contain the answer.

<question>{{query}}</question>
<files>
{{files}}
</files>)";

constexpr std::string_view kRewriteSystem =
    "You rewrite search queries over corporate filings so that a hybrid keyword and vector search finds the right passages.";

constexpr std::string_view kRewriteUser = R"(Rewrite the question into a single search query. Keep every entity, period and figure from the question and add the specific keywords and concepts from the selected documents that the answer is likely to use. Reply with the query only, on one line.

<question>{{query}}</question>
<selected_documents>
{{documents}}
</selected_documents>)";

constexpr std::string_view kAnswerSystem =
    "You answer questions about corporate filings using only the supplied context. "
    "Be concise and extractive, quote figures exactly, and cite the chunk identifier in square brackets after each statement. "
    "If the context does not contain the answer, say so.";

constexpr std::string_view kAnswerUser = R"(<context>
{{context}}
</context>
<question>{{question}}</question>)";

constexpr std::string_view kClaimSystem =
    "You decompose text into atomic, independently verifiable factual claims.";

constexpr std::string_view kClaimUser = R"(Split the text into atomic claims. Each claim must be a short standalone statement. Drop citations and discourse markers.

<text>
{{text}}
</text>)";

constexpr std::string_view kEntailSystem =
    "You are a strict fact checker. You decide whether a premise entails a claim.";

constexpr std::string_view kEntailUser = R"(Does the premise fully support the claim? Answer with entailed = true only if every part of the claim follows from the premise.

<premise>
{{premise}}
</premise>
<claim>
{{claim}}
</claim>)";

const std::array<Prompt, 7>& catalog() {
    static const std::array<Prompt, 7> prompts{{
        {PromptId::DocumentMetadata, "doc-metadata", "1", kDocSystem, kDocUser},
        {PromptId::ChunkMetadata, "chunk-metadata", "1", kChunkSystem, kChunkUser},
        {PromptId::FileFilter, "file-filter", "1", kFilterSystem, kFilterUser},
        {PromptId::QueryRewrite, "query-rewrite", "1", kRewriteSystem, kRewriteUser},
        {PromptId::Answer, "answer", "1", kAnswerSystem, kAnswerUser},
        {PromptId::ClaimExtraction, "claim-extraction", "1", kClaimSystem, kClaimUser},
        {PromptId::Entailment, "entailment", "1", kEntailSystem, kEntailUser},
    }};
    return prompts;
}

} // namespace

const Prompt& get(PromptId id) {
    for (const auto& p : catalog()) {
        if (p.id == id) {
            return p;
        }
    }
    throw InputError("unknown prompt id");
}

std::string render(std::string_view tmpl, const std::map<std::string, std::string>& vars) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        const auto open = tmpl.find("{{", pos);
        if (open == std::string_view::npos) {
            out.append(tmpl.substr(pos));
            break;
        }
        const auto close = tmpl.find("}}", open + 2);
        if (close == std::string_view::npos) {
            out.append(tmpl.substr(pos));
            break;
        }
        out.append(tmpl.substr(pos, open - pos));
        const std::string name(tmpl.substr(open + 2, close - open - 2));
        auto it = vars.find(name);
        if (it == vars.end()) {
            throw InputError("prompt placeholder without value: " + name);
        }
        out.append(it->second);
        pos = close + 2;
    }
    return out;
}

std::map<std::string, std::string> versions() {
    std::map<std::string, std::string> v;
    for (const auto& p : catalog()) {
        v.emplace(std::string(p.name), std::string(p.version));
    }
    return v;
}

std::optional<PromptId> identify(std::string_view system_prompt) {
    for (const auto& p : catalog()) {
        if (p.system == system_prompt) {
            return p.id;
        }
    }
    return std::nullopt;
}

std::string section(std::string_view text, std::string_view tag) {
    const std::string open = "<" + std::string(tag) + ">";
    const std::string close = "</" + std::string(tag) + ">";
    const auto b = text.find(open);
    if (b == std::string_view::npos) {
        return {};
    }
    const auto start = b + open.size();
    const auto e = text.find(close, start);
    if (e == std::string_view::npos) {
        return {};
    }
    return text::trim(text.substr(start, e - start));
}

} // namespace metarag::prompts
