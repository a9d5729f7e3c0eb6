#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scia11y/strings.hpp"

namespace scia11y {

enum class ObjectKind { Figure, Table };

inline const char* kind_word(ObjectKind k) {
    return k == ObjectKind::Figure ? "Figure" : "Table";
}

// Normalized textual reference to an in-paper object ("Fig. 1" -> Figure 1).
struct Handle {
    ObjectKind kind = ObjectKind::Figure;
    int number = 0; // always > 0 for a valid handle

    friend bool operator==(const Handle&, const Handle&) = default;
    friend auto operator<=>(const Handle&, const Handle&) = default;
};

inline std::string render_handle(const Handle& h) {
    return std::string(kind_word(h.kind)) + " " + std::to_string(h.number);
}

// Total function: recognizes {figure, fig, fig.} and {table, tab, tab.}
// case-insensitively, followed by a positive integer. Anything else is
// unparseable (including appendix-style numbers such as "Figure A2").
inline std::optional<Handle> normalize_handle(std::string_view raw) {
    std::string_view s = strings::trim(raw);
    std::size_t i = 0;
    std::string word;
    while (i < s.size() && ((s[i] >= 'a' && s[i] <= 'z') || (s[i] >= 'A' && s[i] <= 'Z'))) {
        word.push_back(strings::ascii_lower(s[i]));
        ++i;
    }
    ObjectKind kind;
    bool abbreviated = false;
    if (word == "figure") {
        kind = ObjectKind::Figure;
    } else if (word == "fig") {
        kind = ObjectKind::Figure;
        abbreviated = true;
    } else if (word == "table") {
        kind = ObjectKind::Table;
    } else if (word == "tab") {
        kind = ObjectKind::Table;
        abbreviated = true;
    } else {
        return std::nullopt;
    }
    if (abbreviated && i < s.size() && s[i] == '.') ++i;
    while (i < s.size() && strings::is_space(s[i])) ++i;
    if (i >= s.size() || s[i] < '0' || s[i] > '9') return std::nullopt;
    long number = 0;
    std::size_t digits = 0;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
        number = number * 10 + (s[i] - '0');
        ++i;
        ++digits;
        if (digits > 6) return std::nullopt;
    }
    if (i != s.size()) return std::nullopt; // trailing garbage
    if (number <= 0) return std::nullopt;
    return Handle{kind, static_cast<int>(number)};
}

struct CitationSpan {
    std::size_t start = 0;
    std::size_t end = 0;
    std::string text;    // surface text of the span
    std::string bib_key; // empty when unresolved
    bool resolved = false;

    friend bool operator==(const CitationSpan&, const CitationSpan&) = default;
};

struct ObjectRef {
    std::size_t start = 0;
    std::size_t end = 0;
    std::string text;
    std::optional<Handle> handle; // nullopt = unparseable

    friend bool operator==(const ObjectRef&, const ObjectRef&) = default;
};

struct Paragraph {
    std::string text;
    std::vector<CitationSpan> citation_spans; // sorted by start, non-overlapping
    std::vector<ObjectRef> object_refs;       // sorted by start, non-overlapping

    friend bool operator==(const Paragraph&, const Paragraph&) = default;
};

struct Section {
    int index = 0;
    std::string heading_text;
    std::string numbering; // dotted label like "2.1"; empty when absent
    std::vector<Paragraph> paragraphs;

    friend bool operator==(const Section&, const Section&) = default;
};

struct AuthorName {
    std::string first;
    std::vector<std::string> middle;
    std::string last;
    std::string suffix;

    std::string display() const {
        std::string out;
        auto append = [&out](const std::string& part) {
            if (part.empty()) return;
            if (!out.empty()) out.push_back(' ');
            out += part;
        };
        append(first);
        for (const auto& m : middle) append(m);
        append(last);
        append(suffix);
        return out;
    }

    friend bool operator==(const AuthorName&, const AuthorName&) = default;
};

struct BibStructured {
    std::vector<std::string> authors;
    std::string title;
    std::string venue;
    std::string year;
    std::string doi;

    friend bool operator==(const BibStructured&, const BibStructured&) = default;
};

struct BibEntry {
    std::string key; // unique within a document
    std::string raw_text;
    std::string url; // empty when unknown; absolute URL after repair
    std::optional<BibStructured> structured;

    friend bool operator==(const BibEntry&, const BibEntry&) = default;
};

// Position marker for a display equation that was detected but not extracted.
struct EquationSlot {
    int section_index = 0;   // -1 refers to the abstract
    int after_paragraph = 0; // paragraph index within that section
    std::string label;

    friend bool operator==(const EquationSlot&, const EquationSlot&) = default;
};

struct ExtractedDocument {
    std::string paper_id;
    std::string title;
    std::vector<AuthorName> authors;
    std::vector<Paragraph> abstract;
    std::vector<Section> sections;
    std::vector<BibEntry> bibliography;
    std::vector<EquationSlot> equation_slots;
    std::string source_hash;

    bool has_bib_key(std::string_view key) const {
        for (const auto& e : bibliography) {
            if (e.key == key) return true;
        }
        return false;
    }

    friend bool operator==(const ExtractedDocument&, const ExtractedDocument&) = default;
};

struct ExtractedObject {
    ObjectKind kind = ObjectKind::Figure;
    std::optional<int> number; // nullopt = unnumbered
    std::string caption;
    std::string image_path; // empty when no asset
    bool extracted = false;

    friend bool operator==(const ExtractedObject&, const ExtractedObject&) = default;
};

struct FigureManifest {
    std::string paper_id;
    std::vector<ExtractedObject> objects;

    friend bool operator==(const FigureManifest&, const FigureManifest&) = default;
};

} // namespace scia11y
