#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "scia11y/diagnostics.hpp"
#include "scia11y/document.hpp"
#include "scia11y/errors.hpp"
#include "scia11y/extraction.hpp"
#include "scia11y/strings.hpp"

namespace scia11y {

// ---------------------------------------------------------------------------
// Anchors. Stable across runs so renders can be diffed.
// Scheme: sec-<index>, bib-<key>, cite-<key>-<section>-<n>, obj-<kind>-<number>.
// ---------------------------------------------------------------------------

inline std::string sanitize_id(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '-' || c == '_';
        out.push_back(ok ? c : '-');
    }
    if (out.empty()) out = "x";
    return out;
}

inline std::string section_token(int section_index) {
    return section_index < 0 ? "abs" : std::to_string(section_index);
}

inline std::string section_anchor(int index) { return "sec-" + std::to_string(index); }

inline std::string paragraph_anchor(int section_index, int paragraph_index) {
    return "p-" + section_token(section_index) + "-" + std::to_string(paragraph_index);
}

inline std::string bib_anchor(std::string_view key) { return "bib-" + sanitize_id(key); }

inline std::string citation_anchor(std::string_view key, int section_index, int ordinal) {
    return "cite-" + sanitize_id(key) + "-" + section_token(section_index) + "-" +
           std::to_string(ordinal);
}

inline std::string object_anchor(const Handle& h) {
    return std::string("obj-") + (h.kind == ObjectKind::Figure ? "figure" : "table") + "-" +
           std::to_string(h.number);
}

inline std::string unnumbered_object_anchor(ObjectKind kind, int ordinal) {
    return std::string("obj-") + (kind == ObjectKind::Figure ? "figure" : "table") + "-x" +
           std::to_string(ordinal);
}

inline std::string equation_anchor(int ordinal) { return "eq-" + std::to_string(ordinal); }

inline std::string object_ref_anchor(int section_index, int paragraph_index, int ref_index) {
    return "ref-" + section_token(section_index) + "-" + std::to_string(paragraph_index) + "-" +
           std::to_string(ref_index);
}

inline constexpr const char* kNotExtractedSentence =
    "Not extracted; please refer to original document.";

inline std::string object_placeholder_text(const Handle& h) {
    return render_handle(h) + ". " + kNotExtractedSentence;
}

inline std::string equation_placeholder_text() {
    return std::string("Equation. ") + kNotExtractedSentence;
}

// Bare section label used for return links ("§2", "§2.1", "Abstract").
inline std::string section_label(int section_index, std::string_view numbering) {
    if (section_index < 0) return "Abstract";
    if (!numbering.empty()) return "\xC2\xA7" + std::string(numbering);
    return "\xC2\xA7" + std::to_string(section_index + 1);
}

// ---------------------------------------------------------------------------
// Render tree
// ---------------------------------------------------------------------------

// Paragraph position in reading order; section -1 denotes the abstract.
struct ParagraphPos {
    int section = -1;
    int paragraph = 0;

    friend bool operator==(const ParagraphPos&, const ParagraphPos&) = default;
    friend auto operator<=>(const ParagraphPos&, const ParagraphPos&) = default;
};

struct HeadingBlock {
    int section_index = 0;
    std::string text;
    std::string numbering;
    int depth = 1;

    friend bool operator==(const HeadingBlock&, const HeadingBlock&) = default;
};

struct ParagraphBlock {
    int section_index = 0;
    int paragraph_index = 0;
    Paragraph content;

    friend bool operator==(const ParagraphBlock&, const ParagraphBlock&) = default;
};

struct ObjectBlock {
    ExtractedObject object;
    std::string anchor;

    friend bool operator==(const ObjectBlock&, const ObjectBlock&) = default;
};

struct PlaceholderBlock {
    bool is_equation = false;
    std::optional<Handle> handle; // set for object placeholders
    std::string text;
    std::string anchor;

    friend bool operator==(const PlaceholderBlock&, const PlaceholderBlock&) = default;
};

using RenderBlock = std::variant<HeadingBlock, ParagraphBlock, ObjectBlock, PlaceholderBlock>;

struct TocChild {
    std::string anchor;
    std::string label;

    friend bool operator==(const TocChild&, const TocChild&) = default;
};

struct TocEntry {
    std::string anchor;
    std::string label;
    int depth = 1;
    std::vector<TocChild> children;

    friend bool operator==(const TocEntry&, const TocEntry&) = default;
};

struct TocTree {
    std::vector<TocEntry> entries;

    friend bool operator==(const TocTree&, const TocTree&) = default;
};

struct CitationLink {
    std::string span_anchor;
    std::string bib_key;

    friend bool operator==(const CitationLink&, const CitationLink&) = default;
};

struct ReturnLink {
    int section_index = 0; // -1 = abstract
    std::string anchor;    // anchor of the first mention in that section
    std::string label;     // bare section label, e.g. "§2"

    friend bool operator==(const ReturnLink&, const ReturnLink&) = default;
};

struct ObjectLink {
    std::string ref_anchor;
    std::string object_anchor;

    friend bool operator==(const ObjectLink&, const ObjectLink&) = default;
};

struct LinkGraph {
    std::vector<CitationLink> citation_links;
    // Keyed by bib key, in bibliography order. Each key lists sections at most
    // once, in section order, pointing at the first mention in that section.
    std::vector<std::pair<std::string, std::vector<ReturnLink>>> return_links;
    std::vector<ObjectLink> object_links;

    const std::vector<ReturnLink>* returns_for(std::string_view key) const {
        for (const auto& [k, links] : return_links) {
            if (k == key) return &links;
        }
        return nullptr;
    }

    friend bool operator==(const LinkGraph&, const LinkGraph&) = default;
};

struct RenderMetadata {
    std::string paper_id;
    std::string title;
    std::string lang = "en";
    std::vector<AuthorName> authors;
    std::vector<Paragraph> abstract;

    friend bool operator==(const RenderMetadata&, const RenderMetadata&) = default;
};

struct RenderTree {
    RenderMetadata metadata;
    std::vector<RenderBlock> body;
    TocTree toc;
    LinkGraph link_graph;
    std::vector<BibEntry> bibliography;

    friend bool operator==(const RenderTree&, const RenderTree&) = default;
};

// ---------------------------------------------------------------------------
// Object placement
// ---------------------------------------------------------------------------

struct PlannedBlock {
    enum class What { ManifestObject, MissingObject, Equation };
    What what = What::ManifestObject;
    int manifest_index = -1;              // valid for ManifestObject
    ObjectKind kind = ObjectKind::Figure; // valid for object entries
    std::optional<int> number;            // nullopt = unnumbered
    int unnumbered_ordinal = 0;           // 1-based among unnumbered of that kind
    int equation_ordinal = 0;             // 1-based, document order
    std::string equation_label;
    bool trailing = false;
    ParagraphPos after{}; // valid when !trailing

    std::optional<Handle> handle() const {
        if (!number) return std::nullopt;
        return Handle{kind, *number};
    }

    std::string anchor() const {
        if (what == What::Equation) return equation_anchor(equation_ordinal);
        if (number) return object_anchor(Handle{kind, *number});
        return unnumbered_object_anchor(kind, unnumbered_ordinal);
    }

    friend bool operator==(const PlannedBlock&, const PlannedBlock&) = default;
};

using PlacementPlan = std::vector<PlannedBlock>;

struct Mention {
    ParagraphPos pos;
    Handle handle;
};

namespace detail {

// Scans plain paragraph text for object handles; used only when the extractor
// provided no ref spans anywhere in the document.
inline std::vector<ObjectRef> scan_handles(const std::string& text) {
    std::vector<ObjectRef> refs;
    const std::size_t n = text.size();
    std::size_t i = 0;
    auto is_alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); };
    auto is_alnum = [&](char c) { return is_alpha(c) || (c >= '0' && c <= '9'); };
    while (i < n) {
        if (!is_alpha(text[i])) {
            ++i;
            continue;
        }
        if (i > 0 && is_alnum(text[i - 1])) {
            while (i < n && is_alnum(text[i])) ++i;
            continue;
        }
        std::size_t start = i;
        std::string word;
        while (i < n && is_alpha(text[i])) {
            word.push_back(strings::ascii_lower(text[i]));
            ++i;
        }
        bool abbreviated = (word == "fig" || word == "tab");
        bool keyword = abbreviated || word == "figure" || word == "table";
        if (!keyword) continue;
        std::size_t j = i;
        if (abbreviated && j < n && text[j] == '.') ++j;
        while (j < n && (text[j] == ' ' || text[j] == '\t')) ++j;
        std::size_t digit_start = j;
        while (j < n && text[j] >= '0' && text[j] <= '9') ++j;
        if (j == digit_start || j - digit_start > 6) continue;
        if (j < n && is_alnum(text[j])) continue; // e.g. "Figure 2a"
        ObjectRef ref;
        ref.start = start;
        ref.end = j;
        ref.text = text.substr(start, j - start);
        ref.handle = normalize_handle(ref.text);
        if (ref.handle) {
            refs.push_back(std::move(ref));
            i = j;
        }
    }
    return refs;
}

inline bool overlaps_any_citation(const Paragraph& para, const ObjectRef& ref) {
    for (const auto& c : para.citation_spans) {
        if (ref.start < c.end && c.start < ref.end) return true;
    }
    return false;
}

struct ParagraphView {
    ParagraphPos pos;
    const Paragraph* para;
};

inline std::vector<ParagraphView> paragraph_stream(const ExtractedDocument& doc) {
    std::vector<ParagraphView> out;
    for (std::size_t i = 0; i < doc.abstract.size(); ++i) {
        out.push_back({ParagraphPos{-1, static_cast<int>(i)}, &doc.abstract[i]});
    }
    for (const auto& sec : doc.sections) {
        for (std::size_t i = 0; i < sec.paragraphs.size(); ++i) {
            out.push_back({ParagraphPos{sec.index, static_cast<int>(i)}, &sec.paragraphs[i]});
        }
    }
    return out;
}

inline std::vector<Mention> collect_mentions(const ExtractedDocument& doc) {
    std::vector<Mention> mentions;
    for (const auto& view : paragraph_stream(doc)) {
        for (const auto& ref : view.para->object_refs) {
            if (ref.handle) mentions.push_back({view.pos, *ref.handle});
        }
    }
    return mentions;
}

inline bool document_has_object_refs(const ExtractedDocument& doc) {
    for (const auto& view : paragraph_stream(doc)) {
        if (!view.para->object_refs.empty()) return true;
    }
    return false;
}

// Reading-order key: at the same anchor paragraph, figures come before
// tables, numbered objects before unnumbered, then equation placeholders.
inline auto plan_order_key(const PlannedBlock& p) {
    const int max_int = std::numeric_limits<int>::max();
    int sec = p.trailing ? max_int : p.after.section;
    int par = p.trailing ? max_int : p.after.paragraph;
    int is_equation = p.what == PlannedBlock::What::Equation ? 1 : 0;
    int kind = (!is_equation && p.kind == ObjectKind::Table) ? 1 : 0;
    int numbered = (!is_equation && !p.number) ? 1 : 0;
    int number = is_equation ? 0 : (p.number ? *p.number : p.unnumbered_ordinal);
    return std::make_tuple(sec, par, is_equation, kind, numbered, number, p.equation_ordinal);
}

inline void sort_plan(PlacementPlan& plan) {
    std::stable_sort(plan.begin(), plan.end(), [](const PlannedBlock& a, const PlannedBlock& b) {
        return plan_order_key(a) < plan_order_key(b);
    });
}

// Monotone-queue placement over an arbitrary set of numbered/unnumbered
// entries. The first mention of number k places that object after the
// mentioning paragraph and flushes every unplaced object of the kind with a
// smaller number; flushed stragglers group with the kind's previous
// placement anchor so they sit directly after their predecessor (mention of
// Figure 3 leaves an unmentioned Figure 2 beside Figure 1, not at the Figure
// 3 paragraph). Objects never flushed are appended after the final body
// paragraph in number order, unnumbered ones last.
inline void place_core(const std::vector<Mention>& mentions, PlacementPlan& entries) {
    std::map<int, std::vector<PlannedBlock*>> queues[2]; // by kind, number -> entries
    std::vector<PlannedBlock*> unnumbered[2];
    for (auto& e : entries) {
        int k = e.kind == ObjectKind::Table ? 1 : 0;
        if (e.number) {
            queues[k][*e.number].push_back(&e);
        } else {
            unnumbered[k].push_back(&e);
        }
    }
    std::optional<ParagraphPos> anchor[2]; // last placement position per kind
    for (const auto& m : mentions) {
        int k = m.handle.kind == ObjectKind::Table ? 1 : 0;
        auto& queue = queues[k];
        bool placed_any = false;
        auto it = queue.begin();
        while (it != queue.end() && it->first <= m.handle.number) {
            ParagraphPos target =
                (it->first == m.handle.number || !anchor[k]) ? m.pos : *anchor[k];
            for (PlannedBlock* e : it->second) {
                e->trailing = false;
                e->after = target;
            }
            placed_any = true;
            it = queue.erase(it);
        }
        if (placed_any) anchor[k] = m.pos;
    }
    for (int k = 0; k < 2; ++k) {
        for (auto& [number, blocks] : queues[k]) {
            for (PlannedBlock* e : blocks) e->trailing = true;
        }
        for (PlannedBlock* e : unnumbered[k]) e->trailing = true;
    }
}

} // namespace detail

// Placement plan for the manifest objects only (no placeholders).
inline PlacementPlan place_objects(const ExtractedDocument& doc, const FigureManifest& figs) {
    PlacementPlan entries;
    int unnumbered_ordinal[2] = {0, 0};
    for (std::size_t i = 0; i < figs.objects.size(); ++i) {
        const auto& obj = figs.objects[i];
        PlannedBlock e;
        e.what = PlannedBlock::What::ManifestObject;
        e.manifest_index = static_cast<int>(i);
        e.kind = obj.kind;
        e.number = obj.number;
        if (!obj.number) {
            int k = obj.kind == ObjectKind::Table ? 1 : 0;
            e.unnumbered_ordinal = ++unnumbered_ordinal[k];
        }
        entries.push_back(std::move(e));
    }
    detail::place_core(detail::collect_mentions(doc), entries);
    detail::sort_plan(entries);
    return entries;
}

// Extends a placement plan with placeholders for inferred-but-missing objects
// (mentioned handles without a manifest entry, or integers strictly between
// two extracted numbers of the same kind) and for every equation slot.
inline PlacementPlan insert_placeholders(const ExtractedDocument& doc, const FigureManifest& figs,
                                         const PlacementPlan& plan) {
    std::set<std::pair<int, int>> manifest_numbers; // (kind, number)
    std::map<int, std::vector<int>> extracted_numbers_by_kind;
    for (const auto& obj : figs.objects) {
        if (obj.number) {
            int k = obj.kind == ObjectKind::Table ? 1 : 0;
            manifest_numbers.insert({k, *obj.number});
            extracted_numbers_by_kind[k].push_back(*obj.number);
        }
    }

    std::set<std::pair<int, int>> missing; // (kind, number)
    for (const auto& m : detail::collect_mentions(doc)) {
        int k = m.handle.kind == ObjectKind::Table ? 1 : 0;
        if (manifest_numbers.count({k, m.handle.number}) == 0) {
            missing.insert({k, m.handle.number});
        }
    }
    // Interior gaps: strictly between the min and max extracted number of the
    // kind, never extrapolated beyond either end.
    for (auto& [k, numbers] : extracted_numbers_by_kind) {
        std::sort(numbers.begin(), numbers.end());
        for (std::size_t i = 1; i < numbers.size(); ++i) {
            for (int n = numbers[i - 1] + 1; n < numbers[i]; ++n) {
                missing.insert({k, n});
            }
        }
    }

    PlacementPlan combined = plan;
    bool have_inferred = false;
    for (const auto& [k, number] : missing) {
        PlannedBlock e;
        e.what = PlannedBlock::What::MissingObject;
        e.kind = k == 1 ? ObjectKind::Table : ObjectKind::Figure;
        e.number = number;
        have_inferred = true;
        combined.push_back(std::move(e));
    }

    // Re-place the union: inferred objects land where the placement rule
    // assigns them, and manifest objects group consistently with them (an
    // unmentioned real object still follows its placeholder predecessor).
    if (have_inferred) {
        detail::place_core(detail::collect_mentions(doc), combined);
    }

    int equation_ordinal = 0;
    for (const auto& slot : doc.equation_slots) {
        PlannedBlock e;
        e.what = PlannedBlock::What::Equation;
        e.equation_ordinal = ++equation_ordinal;
        e.equation_label = slot.label;
        e.trailing = false;
        e.after = ParagraphPos{slot.section_index, slot.after_paragraph};
        combined.push_back(std::move(e));
    }

    detail::sort_plan(combined);
    return combined;
}

// ---------------------------------------------------------------------------
// Citation link graph
// ---------------------------------------------------------------------------

// Assigns the stable anchor of each resolved citation span. The emitter uses
// the same assignment, keeping graph and render consistent by construction.
class CitationAnchorAssigner {
public:
    std::string next(std::string_view bib_key, int section_index) {
        int& n = counters_[{std::string(bib_key), section_index}];
        ++n;
        return citation_anchor(bib_key, section_index, n);
    }

private:
    std::map<std::pair<std::string, int>, int> counters_;
};

inline LinkGraph build_links(const ExtractedDocument& doc) {
    LinkGraph graph;
    CitationAnchorAssigner anchors;
    std::map<std::string, std::map<int, ReturnLink>> first_mentions; // key -> section -> link
    std::map<int, std::string> section_numbering;
    for (const auto& sec : doc.sections) section_numbering[sec.index] = sec.numbering;

    for (const auto& view : detail::paragraph_stream(doc)) {
        for (const auto& span : view.para->citation_spans) {
            if (!span.resolved) continue;
            std::string anchor = anchors.next(span.bib_key, view.pos.section);
            graph.citation_links.push_back({anchor, span.bib_key});
            auto& per_section = first_mentions[span.bib_key];
            if (per_section.find(view.pos.section) == per_section.end()) {
                ReturnLink link;
                link.section_index = view.pos.section;
                link.anchor = anchor;
                link.label = section_label(view.pos.section,
                                           view.pos.section < 0 ? "" : section_numbering[view.pos.section]);
                per_section.emplace(view.pos.section, std::move(link));
            }
        }
        int ref_index = 0;
        for (const auto& ref : view.para->object_refs) {
            if (ref.handle) {
                graph.object_links.push_back(
                    {object_ref_anchor(view.pos.section, view.pos.paragraph, ref_index),
                     object_anchor(*ref.handle)});
            }
            ++ref_index;
        }
    }

    for (const auto& entry : doc.bibliography) {
        auto it = first_mentions.find(entry.key);
        if (it == first_mentions.end()) continue;
        std::vector<ReturnLink> links;
        for (auto& [section, link] : it->second) links.push_back(link); // map iterates in section order
        graph.return_links.emplace_back(entry.key, std::move(links));
    }
    return graph;
}

// ---------------------------------------------------------------------------
// Bibliography URL repair
// ---------------------------------------------------------------------------

namespace detail {

inline bool is_url_char(char c) {
    unsigned char u = static_cast<unsigned char>(c);
    if (u <= 0x20 || u == 0x7F) return false;
    switch (c) {
    case '"':
    case '<':
    case '>':
    case '\'':
    case '`':
    case '|':
    case '\\':
        return false;
    default:
        return true;
    }
}

inline std::string strip_trailing_punctuation(std::string url) {
    while (!url.empty()) {
        char c = url.back();
        if (c == '.' || c == ',' || c == ';' || c == ':' || c == ')' || c == ']' || c == '}' ||
            c == '!' || c == '?') {
            url.pop_back();
        } else {
            break;
        }
    }
    return url;
}

// Consumes a URL token starting at `pos`, healing line-wrap artifacts: a
// hyphen followed by whitespace inside the token is removed and the scan
// continues with the next chunk.
inline std::string consume_url_token(std::string_view text, std::size_t pos) {
    std::string token;
    std::size_t i = pos;
    while (i < text.size()) {
        if (is_url_char(text[i])) {
            token.push_back(text[i]);
            ++i;
            continue;
        }
        // Possible wrap point: "...long-" + whitespace + "path..."
        if (!token.empty() && token.back() == '-' && strings::is_space(text[i])) {
            std::size_t j = i;
            while (j < text.size() && strings::is_space(text[j])) ++j;
            if (j < text.size() && is_url_char(text[j])) {
                token.pop_back(); // drop the hyphen introduced by the line break
                i = j;
                continue;
            }
        }
        break;
    }
    return token;
}

} // namespace detail

inline bool is_valid_absolute_url(std::string_view url) {
    std::string lower = strings::to_lower(url.substr(0, 8));
    std::size_t scheme_len = 0;
    if (lower.rfind("https://", 0) == 0) {
        scheme_len = 8;
    } else if (lower.rfind("http://", 0) == 0) {
        scheme_len = 7;
    } else {
        return false;
    }
    std::string_view rest = url.substr(scheme_len);
    std::size_t host_end = rest.find_first_of("/?#");
    std::string_view authority = host_end == std::string_view::npos ? rest : rest.substr(0, host_end);
    std::size_t at = authority.rfind('@');
    std::string_view hostport = at == std::string_view::npos ? authority : authority.substr(at + 1);
    std::size_t colon = hostport.find(':');
    std::string_view host = colon == std::string_view::npos ? hostport : hostport.substr(0, colon);
    if (colon != std::string_view::npos) {
        std::string_view port = hostport.substr(colon + 1);
        if (port.empty()) return false;
        for (char c : port) {
            if (c < '0' || c > '9') return false;
        }
    }
    if (host.empty() || host.front() == '.' || host.front() == '-' || host.back() == '.' ||
        host.back() == '-') {
        return false;
    }
    bool has_dot = false;
    bool prev_dot = false;
    for (char c : host) {
        if (c == '.') {
            if (prev_dot) return false;
            has_dot = true;
            prev_dot = true;
            continue;
        }
        prev_dot = false;
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '-';
        if (!ok) return false;
    }
    if (!has_dot && !strings::iequals(host, "localhost")) return false;
    for (char c : url.substr(scheme_len)) {
        if (!detail::is_url_char(c)) return false;
    }
    return true;
}

// Recovers a bibliography URL: an already valid url field is kept unchanged;
// otherwise raw_text is scanned for http(s) and DOI patterns, line-wrap
// hyphenation is healed, and the field stays empty unless the candidate
// validates as an absolute URL.
inline BibEntry repair_urls(BibEntry entry) {
    if (!entry.url.empty()) {
        if (is_valid_absolute_url(entry.url)) return entry;
        std::string healed;
        for (std::size_t i = 0; i < entry.url.size(); ++i) {
            if (entry.url[i] == '-' && i + 1 < entry.url.size() &&
                strings::is_space(entry.url[i + 1])) {
                while (i + 1 < entry.url.size() && strings::is_space(entry.url[i + 1])) ++i;
                continue;
            }
            if (strings::is_space(entry.url[i])) continue;
            healed.push_back(entry.url[i]);
        }
        healed = detail::strip_trailing_punctuation(healed);
        if (is_valid_absolute_url(healed)) {
            entry.url = healed;
            return entry;
        }
        entry.url.clear(); // fall through to the raw_text scan
    }

    const std::string& text = entry.raw_text;
    std::string lower = strings::to_lower(text);
    // Direct http(s) URL.
    for (std::size_t pos = 0; pos < lower.size();) {
        std::size_t hit = lower.find("http", pos);
        if (hit == std::string::npos) break;
        std::string token = detail::consume_url_token(text, hit);
        token = detail::strip_trailing_punctuation(token);
        if (is_valid_absolute_url(token)) {
            entry.url = token;
            return entry;
        }
        pos = hit + 4;
    }
    // DOI marker followed by a 10.x/y identifier.
    for (std::size_t pos = 0; pos < lower.size();) {
        std::size_t hit = lower.find("doi", pos);
        if (hit == std::string::npos) break;
        std::size_t i = hit + 3;
        while (i < text.size() && (text[i] == ':' || text[i] == '.' || strings::is_space(text[i]))) {
            // allow "doi:", "doi ", "doi.org/" style markers
            if (text[i] == '.' && lower.compare(i, 4, ".org") == 0) {
                i += 4;
                if (i < text.size() && text[i] == '/') ++i;
                break;
            }
            ++i;
        }
        if (i + 3 < text.size() && text.compare(i, 3, "10.") == 0) {
            std::string token = detail::consume_url_token(text, i);
            token = detail::strip_trailing_punctuation(token);
            std::size_t slash = token.find('/');
            if (slash != std::string::npos && slash > 3 && slash + 1 < token.size()) {
                std::string candidate = "https://doi.org/" + token;
                if (is_valid_absolute_url(candidate)) {
                    entry.url = candidate;
                    return entry;
                }
            }
        }
        pos = hit + 3;
    }
    return entry;
}

// ---------------------------------------------------------------------------
// Table of contents
// ---------------------------------------------------------------------------

inline int numbering_depth(std::string_view numbering) {
    if (numbering.empty()) return 1;
    int depth = 1;
    for (char c : numbering) {
        if (c == '.') ++depth;
    }
    return depth;
}

inline std::string heading_display_text(std::string_view heading, std::string_view numbering) {
    std::string text = heading.empty() ? std::string("Untitled section") : std::string(heading);
    if (!numbering.empty()) return std::string(numbering) + " " + text;
    return text;
}

inline std::string toc_object_label(const ObjectKind kind, const std::optional<Handle>& handle) {
    if (handle) return render_handle(*handle);
    return std::string(kind_word(kind)) + " (unnumbered)";
}

// One entry per section in body order; placed figures/tables (including
// object placeholders) nest under the section in which they appear.
inline TocTree build_toc(const RenderTree& tree) {
    TocTree toc;
    TocEntry* current = nullptr;
    for (const auto& block : tree.body) {
        if (const auto* h = std::get_if<HeadingBlock>(&block)) {
            TocEntry entry;
            entry.anchor = section_anchor(h->section_index);
            entry.label = heading_display_text(h->text, h->numbering);
            entry.depth = h->depth;
            toc.entries.push_back(std::move(entry));
            current = &toc.entries.back();
        } else if (const auto* o = std::get_if<ObjectBlock>(&block)) {
            if (current != nullptr) {
                std::optional<Handle> handle;
                if (o->object.number) handle = Handle{o->object.kind, *o->object.number};
                current->children.push_back({o->anchor, toc_object_label(o->object.kind, handle)});
            }
        } else if (const auto* p = std::get_if<PlaceholderBlock>(&block)) {
            if (!p->is_equation && current != nullptr && p->handle) {
                current->children.push_back({p->anchor, toc_object_label(p->handle->kind, p->handle)});
            }
        }
    }
    return toc;
}

// ---------------------------------------------------------------------------
// Merge
// ---------------------------------------------------------------------------

struct MergeOptions {
    bool allow_paper_id_mismatch = false;
    std::string lang = "en";
};

inline RenderTree merge(const ExtractedDocument& input_doc, const FigureManifest& figs,
                        Diagnostics& diag, const MergeOptions& options = {}) {
    if (!input_doc.paper_id.empty() && !figs.paper_id.empty() &&
        input_doc.paper_id != figs.paper_id) {
        if (!options.allow_paper_id_mismatch) {
            throw PaperIdMismatchError("full text is for paper \"" + input_doc.paper_id +
                                       "\" but figure manifest is for \"" + figs.paper_id + "\"");
        }
        diag.warn_here("paper_id_mismatch", "merging despite mismatched paper ids (" +
                                                input_doc.paper_id + " vs " + figs.paper_id + ")");
    }

    // Fall back to a text scan when the extractor provided no ref spans at all.
    ExtractedDocument doc = input_doc;
    if (!detail::document_has_object_refs(doc)) {
        std::size_t found = 0;
        auto scan_into = [&found](Paragraph& para) {
            std::vector<ObjectRef> refs = detail::scan_handles(para.text);
            for (auto& ref : refs) {
                if (!detail::overlaps_any_citation(para, ref)) {
                    para.object_refs.push_back(std::move(ref));
                    ++found;
                }
            }
        };
        for (auto& p : doc.abstract) scan_into(p);
        for (auto& sec : doc.sections) {
            for (auto& p : sec.paragraphs) scan_into(p);
        }
        if (found > 0) {
            diag.warn_here("handles_from_text_scan",
                           std::to_string(found) +
                               " object mention(s) recovered by text scan (no extractor ref spans)");
        }
    }

    RenderTree tree;
    tree.metadata.paper_id = doc.paper_id;
    tree.metadata.title = doc.title;
    tree.metadata.lang = options.lang.empty() ? "en" : options.lang;
    tree.metadata.authors = doc.authors;
    tree.metadata.abstract = doc.abstract;

    for (const auto& entry : doc.bibliography) {
        BibEntry repaired = repair_urls(entry);
        if (repaired.url != entry.url) {
            if (repaired.url.empty()) {
                diag.warn_here("url_cleared", "bibliography entry " + entry.key +
                                                  " had an unparseable url; field cleared");
            } else {
                diag.warn_here("url_repaired",
                               "bibliography entry " + entry.key + " url recovered: " + repaired.url);
            }
        }
        tree.bibliography.push_back(std::move(repaired));
    }

    PlacementPlan plan = insert_placeholders(doc, figs, place_objects(doc, figs));

    auto make_block = [&figs](const PlannedBlock& p) -> RenderBlock {
        if (p.what == PlannedBlock::What::Equation) {
            PlaceholderBlock block;
            block.is_equation = true;
            block.text = equation_placeholder_text();
            block.anchor = p.anchor();
            return block;
        }
        if (p.what == PlannedBlock::What::MissingObject ||
            (p.manifest_index >= 0 &&
             !figs.objects[static_cast<std::size_t>(p.manifest_index)].extracted)) {
            PlaceholderBlock block;
            block.is_equation = false;
            block.handle = p.handle();
            block.text = p.handle() ? object_placeholder_text(*p.handle())
                                    : std::string(kind_word(p.kind)) + ". " + kNotExtractedSentence;
            block.anchor = p.anchor();
            return block;
        }
        ObjectBlock block;
        block.object = figs.objects[static_cast<std::size_t>(p.manifest_index)];
        block.anchor = p.anchor();
        return block;
    };

    // Entries anchored to abstract paragraphs render at the head of the body,
    // before the first section heading.
    std::size_t plan_cursor = 0;
    for (; plan_cursor < plan.size(); ++plan_cursor) {
        const auto& p = plan[plan_cursor];
        if (p.trailing || p.after.section >= 0) break;
        if (p.what != PlannedBlock::What::Equation) {
            diag.warn_here("object_before_sections",
                           "object mentioned in the abstract placed before the first section: " +
                               p.anchor());
        }
        tree.body.push_back(make_block(p));
    }

    for (const auto& sec : doc.sections) {
        HeadingBlock heading;
        heading.section_index = sec.index;
        heading.text = sec.heading_text;
        heading.numbering = sec.numbering;
        heading.depth = numbering_depth(sec.numbering);
        tree.body.push_back(heading);
        for (std::size_t pi = 0; pi < sec.paragraphs.size(); ++pi) {
            ParagraphBlock para;
            para.section_index = sec.index;
            para.paragraph_index = static_cast<int>(pi);
            para.content = sec.paragraphs[pi];
            tree.body.push_back(std::move(para));
            while (plan_cursor < plan.size() && !plan[plan_cursor].trailing &&
                   plan[plan_cursor].after == ParagraphPos{sec.index, static_cast<int>(pi)}) {
                tree.body.push_back(make_block(plan[plan_cursor]));
                ++plan_cursor;
            }
        }
    }
    for (; plan_cursor < plan.size(); ++plan_cursor) {
        tree.body.push_back(make_block(plan[plan_cursor]));
    }

    tree.link_graph = build_links(doc);
    tree.toc = build_toc(tree);
    return tree;
}

// ---------------------------------------------------------------------------
// Versioned intermediate serialization (.render.json)
// ---------------------------------------------------------------------------

inline constexpr const char* kRenderSchemaName = "scia11y.render";
inline constexpr int kRenderSchemaVersion = 1;

inline json render_tree_to_json(const RenderTree& tree) {
    json j;
    j["schema"] = kRenderSchemaName;
    j["schema_version"] = kRenderSchemaVersion;
    json meta;
    meta["paper_id"] = tree.metadata.paper_id;
    meta["title"] = tree.metadata.title;
    meta["lang"] = tree.metadata.lang;
    meta["authors"] = json::array();
    for (const auto& a : tree.metadata.authors) meta["authors"].push_back(author_to_json(a));
    meta["abstract"] = json::array();
    for (const auto& p : tree.metadata.abstract) meta["abstract"].push_back(paragraph_to_json(p));
    j["metadata"] = std::move(meta);

    j["body"] = json::array();
    for (const auto& block : tree.body) {
        json jb;
        if (const auto* h = std::get_if<HeadingBlock>(&block)) {
            jb["type"] = "heading";
            jb["section"] = h->section_index;
            jb["text"] = h->text;
            jb["numbering"] = h->numbering;
            jb["depth"] = h->depth;
        } else if (const auto* p = std::get_if<ParagraphBlock>(&block)) {
            jb["type"] = "paragraph";
            jb["section"] = p->section_index;
            jb["paragraph"] = p->paragraph_index;
            jb["content"] = paragraph_to_json(p->content);
        } else if (const auto* o = std::get_if<ObjectBlock>(&block)) {
            jb["type"] = "object";
            jb["anchor"] = o->anchor;
            jb["kind"] = o->object.kind == ObjectKind::Figure ? "figure" : "table";
            if (o->object.number) {
                jb["number"] = *o->object.number;
            } else {
                jb["number"] = nullptr;
            }
            jb["caption"] = o->object.caption;
            jb["image_path"] = o->object.image_path;
        } else if (const auto* ph = std::get_if<PlaceholderBlock>(&block)) {
            jb["type"] = "placeholder";
            jb["anchor"] = ph->anchor;
            jb["equation"] = ph->is_equation;
            if (ph->handle) {
                jb["kind"] = ph->handle->kind == ObjectKind::Figure ? "figure" : "table";
                jb["number"] = ph->handle->number;
            }
            jb["text"] = ph->text;
        }
        j["body"].push_back(std::move(jb));
    }

    j["toc"] = json::array();
    for (const auto& entry : tree.toc.entries) {
        json je{{"anchor", entry.anchor}, {"label", entry.label}, {"depth", entry.depth}};
        je["children"] = json::array();
        for (const auto& child : entry.children) {
            je["children"].push_back(json{{"anchor", child.anchor}, {"label", child.label}});
        }
        j["toc"].push_back(std::move(je));
    }

    json links;
    links["citations"] = json::array();
    for (const auto& c : tree.link_graph.citation_links) {
        links["citations"].push_back(json{{"anchor", c.span_anchor}, {"bib_key", c.bib_key}});
    }
    links["returns"] = json::array();
    for (const auto& [key, rls] : tree.link_graph.return_links) {
        json jr{{"bib_key", key}};
        jr["links"] = json::array();
        for (const auto& rl : rls) {
            jr["links"].push_back(
                json{{"section", rl.section_index}, {"anchor", rl.anchor}, {"label", rl.label}});
        }
        links["returns"].push_back(std::move(jr));
    }
    links["objects"] = json::array();
    for (const auto& o : tree.link_graph.object_links) {
        links["objects"].push_back(json{{"ref", o.ref_anchor}, {"object", o.object_anchor}});
    }
    j["links"] = std::move(links);

    j["bibliography"] = json::array();
    for (const auto& e : tree.bibliography) j["bibliography"].push_back(bib_entry_to_json(e));
    return j;
}

inline RenderTree render_tree_from_json(const json& j) {
    if (!j.is_object() || j.value("schema", "") != kRenderSchemaName) {
        throw MalformedInputError("not a scia11y.render document");
    }
    if (j.value("schema_version", 0) != kRenderSchemaVersion) {
        throw MalformedInputError("unsupported render schema version");
    }
    RenderTree tree;
    const auto& meta = j.at("metadata");
    tree.metadata.paper_id = meta.value("paper_id", "");
    tree.metadata.title = meta.value("title", "");
    tree.metadata.lang = meta.value("lang", "en");
    if (meta.contains("authors")) {
        for (const auto& a : meta["authors"]) tree.metadata.authors.push_back(author_from_json(a));
    }
    if (meta.contains("abstract")) {
        for (const auto& p : meta["abstract"]) {
            tree.metadata.abstract.push_back(paragraph_from_json(p));
        }
    }
    for (const auto& jb : j.at("body")) {
        std::string type = jb.value("type", "");
        if (type == "heading") {
            HeadingBlock h;
            h.section_index = jb.value("section", 0);
            h.text = jb.value("text", "");
            h.numbering = jb.value("numbering", "");
            h.depth = jb.value("depth", 1);
            tree.body.emplace_back(std::move(h));
        } else if (type == "paragraph") {
            ParagraphBlock p;
            p.section_index = jb.value("section", 0);
            p.paragraph_index = jb.value("paragraph", 0);
            p.content = paragraph_from_json(jb.at("content"));
            tree.body.emplace_back(std::move(p));
        } else if (type == "object") {
            ObjectBlock o;
            o.anchor = jb.value("anchor", "");
            o.object.kind = jb.value("kind", "figure") == "table" ? ObjectKind::Table
                                                                  : ObjectKind::Figure;
            if (jb.contains("number") && !jb["number"].is_null()) {
                o.object.number = jb["number"].get<int>();
            }
            o.object.caption = jb.value("caption", "");
            o.object.image_path = jb.value("image_path", "");
            o.object.extracted = true;
            tree.body.emplace_back(std::move(o));
        } else if (type == "placeholder") {
            PlaceholderBlock ph;
            ph.anchor = jb.value("anchor", "");
            ph.is_equation = jb.value("equation", false);
            if (jb.contains("kind")) {
                Handle h;
                h.kind = jb["kind"].get<std::string>() == "table" ? ObjectKind::Table
                                                                  : ObjectKind::Figure;
                h.number = jb.value("number", 0);
                ph.handle = h;
            }
            ph.text = jb.value("text", "");
            tree.body.emplace_back(std::move(ph));
        } else {
            throw MalformedInputError("unknown body block type \"" + type + "\"");
        }
    }
    if (j.contains("toc")) {
        for (const auto& je : j["toc"]) {
            TocEntry entry;
            entry.anchor = je.value("anchor", "");
            entry.label = je.value("label", "");
            entry.depth = je.value("depth", 1);
            if (je.contains("children")) {
                for (const auto& jc : je["children"]) {
                    entry.children.push_back({jc.value("anchor", ""), jc.value("label", "")});
                }
            }
            tree.toc.entries.push_back(std::move(entry));
        }
    }
    if (j.contains("links")) {
        const auto& links = j["links"];
        if (links.contains("citations")) {
            for (const auto& c : links["citations"]) {
                tree.link_graph.citation_links.push_back(
                    {c.value("anchor", ""), c.value("bib_key", "")});
            }
        }
        if (links.contains("returns")) {
            for (const auto& jr : links["returns"]) {
                std::vector<ReturnLink> rls;
                if (jr.contains("links")) {
                    for (const auto& rl : jr["links"]) {
                        rls.push_back({rl.value("section", 0), rl.value("anchor", ""),
                                       rl.value("label", "")});
                    }
                }
                tree.link_graph.return_links.emplace_back(jr.value("bib_key", ""), std::move(rls));
            }
        }
        if (links.contains("objects")) {
            for (const auto& o : links["objects"]) {
                tree.link_graph.object_links.push_back({o.value("ref", ""), o.value("object", "")});
            }
        }
    }
    if (j.contains("bibliography")) {
        for (const auto& e : j["bibliography"]) {
            tree.bibliography.push_back(bib_entry_from_json(e));
        }
    }
    return tree;
}

} // namespace scia11y
