#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "scia11y/diagnostics.hpp"
#include "scia11y/document.hpp"
#include "scia11y/errors.hpp"
#include "scia11y/strings.hpp"

namespace scia11y {

using json = nlohmann::ordered_json;

namespace detail {

inline std::string json_to_string(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
    if (v.is_number_float()) return std::to_string(v.get<double>());
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return {};
}

inline bool valid_numbering(std::string_view s) {
    if (s.empty()) return false;
    bool digit_seen = false;
    bool prev_dot = true; // a leading dot is invalid
    for (char c : s) {
        if (c >= '0' && c <= '9') {
            digit_seen = true;
            prev_dot = false;
        } else if (c == '.') {
            if (prev_dot) return false;
            prev_dot = true;
        } else {
            return false;
        }
    }
    return digit_seen && !prev_dot;
}

// Drops out-of-bounds spans, resolves overlaps (longer span wins, earlier
// start breaks ties) and returns the survivors sorted by start offset.
template <typename Span>
inline std::vector<Span> resolve_spans(std::vector<Span> spans, std::size_t text_len,
                                       Diagnostics& diag, const char* what) {
    std::vector<Span> bounded;
    bounded.reserve(spans.size());
    for (auto& s : spans) {
        if (s.start >= s.end || s.end > text_len) {
            diag.warn_here("span_out_of_bounds",
                           std::string(what) + " span [" + std::to_string(s.start) + "," +
                               std::to_string(s.end) + ") outside paragraph bounds; dropped");
            continue;
        }
        bounded.push_back(std::move(s));
    }
    std::stable_sort(bounded.begin(), bounded.end(), [](const Span& a, const Span& b) {
        std::size_t la = a.end - a.start;
        std::size_t lb = b.end - b.start;
        if (la != lb) return la > lb;
        return a.start < b.start;
    });
    std::vector<Span> accepted;
    for (auto& s : bounded) {
        bool overlaps = false;
        for (const auto& a : accepted) {
            if (s.start < a.end && a.start < s.end) {
                overlaps = true;
                break;
            }
        }
        if (overlaps) {
            diag.warn_here("span_overlap",
                           std::string(what) + " span \"" + s.text + "\" overlaps a longer span; dropped");
            continue;
        }
        accepted.push_back(std::move(s));
    }
    std::sort(accepted.begin(), accepted.end(),
              [](const Span& a, const Span& b) { return a.start < b.start; });
    return accepted;
}

// Cross-list pass: an object ref overlapping a citation span loses unless it
// is strictly longer (same longer-wins rule as within a list).
inline void resolve_cross_overlaps(Paragraph& para, Diagnostics& diag) {
    std::vector<ObjectRef> kept;
    for (auto& r : para.object_refs) {
        bool drop_ref = false;
        for (auto it = para.citation_spans.begin(); it != para.citation_spans.end();) {
            if (r.start < it->end && it->start < r.end) {
                std::size_t ref_len = r.end - r.start;
                std::size_t cite_len = it->end - it->start;
                if (ref_len > cite_len) {
                    diag.warn_here("span_overlap", "citation span \"" + it->text +
                                                       "\" overlaps a longer object reference; dropped");
                    it = para.citation_spans.erase(it);
                    continue;
                }
                diag.warn_here("span_overlap", "object reference \"" + r.text +
                                                   "\" overlaps a citation span; dropped");
                drop_ref = true;
                break;
            }
            ++it;
        }
        if (!drop_ref) kept.push_back(std::move(r));
    }
    para.object_refs = std::move(kept);
}

inline Paragraph parse_paragraph(const json& entry, const std::set<std::string>& bib_keys,
                                 Diagnostics& diag) {
    Paragraph para;
    if (entry.contains("text") && entry["text"].is_string()) {
        para.text = entry["text"].get<std::string>();
    }
    const std::size_t len = para.text.size();
    if (entry.contains("cite_spans") && entry["cite_spans"].is_array()) {
        std::vector<CitationSpan> spans;
        for (const auto& s : entry["cite_spans"]) {
            if (!s.is_object()) continue;
            CitationSpan cs;
            cs.start = s.value("start", std::size_t{0});
            cs.end = s.value("end", std::size_t{0});
            cs.text = s.contains("text") && s["text"].is_string() ? s["text"].get<std::string>()
                                                                  : std::string{};
            if (s.contains("ref_id") && s["ref_id"].is_string()) {
                cs.bib_key = s["ref_id"].get<std::string>();
            }
            if (!cs.bib_key.empty() && bib_keys.count(cs.bib_key) > 0) {
                cs.resolved = true;
            } else {
                if (!cs.bib_key.empty()) {
                    diag.warn_here("unresolved_citation",
                                   "citation \"" + cs.text + "\" references missing bibliography key " +
                                       cs.bib_key);
                }
                cs.resolved = false;
                cs.bib_key.clear();
            }
            spans.push_back(std::move(cs));
        }
        para.citation_spans = resolve_spans(std::move(spans), len, diag, "citation");
    }
    if (entry.contains("ref_spans") && entry["ref_spans"].is_array()) {
        std::vector<ObjectRef> refs;
        for (const auto& s : entry["ref_spans"]) {
            if (!s.is_object()) continue;
            ObjectRef ref;
            ref.start = s.value("start", std::size_t{0});
            ref.end = s.value("end", std::size_t{0});
            ref.text = s.contains("text") && s["text"].is_string() ? s["text"].get<std::string>()
                                                                   : std::string{};
            ref.handle = normalize_handle(ref.text);
            if (!ref.handle) {
                diag.warn_here("unparseable_handle",
                               "object reference \"" + ref.text + "\" has no recognizable handle");
            }
            refs.push_back(std::move(ref));
        }
        para.object_refs = resolve_spans(std::move(refs), len, diag, "object reference");
    }
    resolve_cross_overlaps(para, diag);
    return para;
}

inline AuthorName parse_author(const json& a) {
    AuthorName name;
    if (a.is_string()) {
        name.last = a.get<std::string>();
        return name;
    }
    if (!a.is_object()) return name;
    name.first = a.contains("first") && a["first"].is_string() ? a["first"].get<std::string>() : "";
    if (a.contains("middle") && a["middle"].is_array()) {
        for (const auto& m : a["middle"]) {
            if (m.is_string() && !m.get<std::string>().empty()) {
                name.middle.push_back(m.get<std::string>());
            }
        }
    }
    name.last = a.contains("last") && a["last"].is_string() ? a["last"].get<std::string>() : "";
    name.suffix = a.contains("suffix") && a["suffix"].is_string() ? a["suffix"].get<std::string>() : "";
    return name;
}

inline BibEntry parse_bib_entry(const std::string& key, const json& e) {
    BibEntry entry;
    entry.key = key;
    if (!e.is_object()) {
        entry.raw_text = json_to_string(e);
        return entry;
    }
    BibStructured structured;
    if (e.contains("authors") && e["authors"].is_array()) {
        for (const auto& a : e["authors"]) {
            AuthorName name = parse_author(a);
            std::string display = name.display();
            if (!display.empty()) structured.authors.push_back(display);
        }
    }
    if (e.contains("title")) structured.title = json_to_string(e["title"]);
    if (e.contains("venue")) structured.venue = json_to_string(e["venue"]);
    if (e.contains("year")) structured.year = json_to_string(e["year"]);
    if (e.contains("other_ids") && e["other_ids"].is_object()) {
        const auto& ids = e["other_ids"];
        if (ids.contains("DOI") && ids["DOI"].is_array() && !ids["DOI"].empty()) {
            structured.doi = json_to_string(ids["DOI"][0]);
        }
    }
    if (e.contains("raw_text") && e["raw_text"].is_string()) {
        entry.raw_text = e["raw_text"].get<std::string>();
    } else {
        // Synthesize a display string from the structured fields.
        std::string text;
        for (std::size_t i = 0; i < structured.authors.size(); ++i) {
            if (i > 0) text += ", ";
            text += structured.authors[i];
        }
        auto append_part = [&text](const std::string& part) {
            if (part.empty()) return;
            if (!text.empty()) text += ". ";
            text += part;
        };
        append_part(structured.title);
        append_part(structured.venue);
        append_part(structured.year);
        if (!text.empty()) text += ".";
        entry.raw_text = text;
    }
    if (e.contains("urls") && e["urls"].is_array() && !e["urls"].empty() &&
        e["urls"][0].is_string()) {
        entry.url = e["urls"][0].get<std::string>();
    } else if (e.contains("url") && e["url"].is_string()) {
        entry.url = e["url"].get<std::string>();
    }
    if (!structured.authors.empty() || !structured.title.empty() || !structured.venue.empty() ||
        !structured.year.empty() || !structured.doi.empty()) {
        entry.structured = std::move(structured);
    }
    return entry;
}

} // namespace detail

// Parses full-text extraction JSON (S2ORC-shaped, see docs/formats.md) into a
// validated document. Unresolvable citations are retained and flagged, never
// dropped; invalid UTF-8 is replaced and counted.
inline ExtractedDocument parse_extraction(std::string_view raw, Diagnostics& diag) {
    std::string sanitized(raw);
    std::string source_hash = strings::fnv1a64_hex(raw);
    std::size_t replaced = strings::sanitize_utf8(sanitized);
    if (replaced > 0) {
        diag.warn_here("invalid_utf8",
                       std::to_string(replaced) + " invalid UTF-8 sequence(s) replaced with U+FFFD");
    }
    json root = json::parse(sanitized, nullptr, false);
    if (root.is_discarded() || !root.is_object()) {
        throw MalformedInputError("full-text input is not a JSON object");
    }

    ExtractedDocument doc;
    doc.source_hash = source_hash;
    if (root.contains("paper_id")) doc.paper_id = detail::json_to_string(root["paper_id"]);
    if (doc.paper_id.empty()) {
        diag.warn_here("missing_paper_id", "full-text input has no paper_id");
    }
    if (root.contains("title") && root["title"].is_string()) {
        doc.title = root["title"].get<std::string>();
    }
    if (root.contains("authors") && root["authors"].is_array()) {
        for (const auto& a : root["authors"]) {
            doc.authors.push_back(detail::parse_author(a));
        }
    }

    std::set<std::string> bib_keys;
    if (root.contains("bib_entries") && root["bib_entries"].is_object()) {
        for (const auto& [key, value] : root["bib_entries"].items()) {
            doc.bibliography.push_back(detail::parse_bib_entry(key, value));
            bib_keys.insert(key);
        }
    }

    if (root.contains("abstract")) {
        const auto& abs = root["abstract"];
        if (abs.is_array()) {
            for (const auto& entry : abs) {
                doc.abstract.push_back(detail::parse_paragraph(entry, bib_keys, diag));
            }
        } else if (abs.is_string() && !abs.get<std::string>().empty()) {
            Paragraph p;
            p.text = abs.get<std::string>();
            doc.abstract.push_back(std::move(p));
        }
    }

    if (root.contains("body_text") && root["body_text"].is_array()) {
        std::string cur_heading;
        std::string cur_numbering;
        bool have_section = false;
        for (const auto& entry : root["body_text"]) {
            if (!entry.is_object()) continue;
            std::string heading =
                entry.contains("section") ? detail::json_to_string(entry["section"]) : std::string{};
            std::string numbering =
                entry.contains("sec_num") ? detail::json_to_string(entry["sec_num"]) : std::string{};
            while (!numbering.empty() && numbering.back() == '.') numbering.pop_back();
            if (!numbering.empty() && !detail::valid_numbering(numbering)) {
                diag.warn_here("invalid_numbering",
                               "section numbering \"" + numbering + "\" is not a dotted digit label");
                numbering.clear();
            }
            if (!have_section || heading != cur_heading || numbering != cur_numbering) {
                Section sec;
                sec.index = static_cast<int>(doc.sections.size());
                sec.heading_text = heading;
                sec.numbering = numbering;
                doc.sections.push_back(std::move(sec));
                cur_heading = heading;
                cur_numbering = numbering;
                have_section = true;
            }
            Section& sec = doc.sections.back();
            sec.paragraphs.push_back(detail::parse_paragraph(entry, bib_keys, diag));
            if (entry.contains("display_equations") && entry["display_equations"].is_array()) {
                for (const auto& eq : entry["display_equations"]) {
                    EquationSlot slot;
                    slot.section_index = sec.index;
                    slot.after_paragraph = static_cast<int>(sec.paragraphs.size()) - 1;
                    if (eq.is_string()) {
                        slot.label = eq.get<std::string>();
                    } else if (eq.is_object() && eq.contains("label")) {
                        slot.label = detail::json_to_string(eq["label"]);
                    }
                    doc.equation_slots.push_back(std::move(slot));
                }
            }
        }
    }

    bool no_abstract_text = true;
    for (const auto& p : doc.abstract) {
        if (!p.text.empty()) no_abstract_text = false;
    }
    if (doc.title.empty() && doc.sections.empty() && no_abstract_text) {
        throw EmptyDocumentError("document has no title, no sections and no abstract");
    }
    return doc;
}

// Parses a figure-manifest JSON (docs/formats.md). Numbered duplicates keep
// the first occurrence and warn.
inline FigureManifest parse_figures(std::string_view raw, Diagnostics& diag) {
    std::string sanitized(raw);
    std::size_t replaced = strings::sanitize_utf8(sanitized);
    if (replaced > 0) {
        diag.warn_here("invalid_utf8",
                       std::to_string(replaced) + " invalid UTF-8 sequence(s) replaced with U+FFFD");
    }
    json root = json::parse(sanitized, nullptr, false);
    if (root.is_discarded() || !root.is_object()) {
        throw MalformedInputError("figure manifest is not a JSON object");
    }
    FigureManifest manifest;
    if (root.contains("paper_id")) manifest.paper_id = detail::json_to_string(root["paper_id"]);
    if (!root.contains("objects")) return manifest;
    if (!root["objects"].is_array()) {
        throw MalformedInputError("figure manifest \"objects\" is not an array");
    }
    std::set<std::pair<int, int>> seen; // (kind, number)
    int entry_no = 0;
    for (const auto& o : root["objects"]) {
        ++entry_no;
        if (!o.is_object()) {
            diag.warn_here("bad_manifest_entry",
                           "manifest entry #" + std::to_string(entry_no) + " is not an object; dropped");
            continue;
        }
        ExtractedObject obj;
        std::string kind = strings::to_lower(o.contains("kind") ? detail::json_to_string(o["kind"])
                                                                : std::string{});
        if (kind == "figure" || kind == "fig") {
            obj.kind = ObjectKind::Figure;
        } else if (kind == "table" || kind == "tab") {
            obj.kind = ObjectKind::Table;
        } else {
            diag.warn_here("bad_manifest_entry", "manifest entry #" + std::to_string(entry_no) +
                                                     " has unknown kind \"" + kind + "\"; dropped");
            continue;
        }
        if (o.contains("number") && !o["number"].is_null()) {
            if (o["number"].is_number_integer()) {
                long long n = o["number"].get<long long>();
                if (n > 0 && n <= 999999) obj.number = static_cast<int>(n);
            } else if (o["number"].is_string()) {
                const std::string& s = o["number"].get<std::string>();
                bool all_digits = !s.empty();
                for (char c : s) {
                    if (c < '0' || c > '9') all_digits = false;
                }
                if (all_digits && s.size() <= 6) {
                    int n = std::stoi(s);
                    if (n > 0) obj.number = n;
                }
            }
            if (!obj.number) {
                diag.warn_here("unnumbered_object", "manifest entry #" + std::to_string(entry_no) +
                                                        " has a non-integer number; kept unnumbered");
            }
        }
        if (o.contains("caption") && o["caption"].is_string()) {
            obj.caption = o["caption"].get<std::string>();
        }
        if (o.contains("image_path") && o["image_path"].is_string()) {
            obj.image_path = o["image_path"].get<std::string>();
        }
        obj.extracted = o.contains("extracted") && o["extracted"].is_boolean()
                            ? o["extracted"].get<bool>()
                            : !obj.image_path.empty();
        if (!obj.extracted && !obj.image_path.empty()) {
            diag.warn_here("inconsistent_manifest_entry",
                           "entry #" + std::to_string(entry_no) +
                               " marked not extracted but carries an image path; path dropped");
            obj.image_path.clear();
        }
        if (obj.number) {
            auto key = std::make_pair(static_cast<int>(obj.kind), *obj.number);
            if (!seen.insert(key).second) {
                diag.warn_here("duplicate_object",
                               "duplicate " + render_handle(Handle{obj.kind, *obj.number}) +
                                   " in manifest; first occurrence kept");
                continue;
            }
        }
        manifest.objects.push_back(std::move(obj));
    }
    return manifest;
}

// ---------------------------------------------------------------------------
// Canonical document JSON: a loss-free serialization of ExtractedDocument.
// Used for round-trip checks and embedded in .render.json files.
// ---------------------------------------------------------------------------

inline json author_to_json(const AuthorName& a) {
    json j;
    j["first"] = a.first;
    j["middle"] = a.middle;
    j["last"] = a.last;
    j["suffix"] = a.suffix;
    return j;
}

inline AuthorName author_from_json(const json& j) {
    AuthorName a;
    a.first = j.value("first", "");
    if (j.contains("middle") && j["middle"].is_array()) {
        for (const auto& m : j["middle"]) a.middle.push_back(m.get<std::string>());
    }
    a.last = j.value("last", "");
    a.suffix = j.value("suffix", "");
    return a;
}

inline json paragraph_to_json(const Paragraph& p) {
    json j;
    j["text"] = p.text;
    j["cite_spans"] = json::array();
    for (const auto& s : p.citation_spans) {
        json js{{"start", s.start}, {"end", s.end}, {"text", s.text}, {"resolved", s.resolved}};
        if (s.resolved) js["bib_key"] = s.bib_key;
        j["cite_spans"].push_back(std::move(js));
    }
    j["ref_spans"] = json::array();
    for (const auto& r : p.object_refs) {
        json jr{{"start", r.start}, {"end", r.end}, {"text", r.text}};
        if (r.handle) {
            jr["kind"] = r.handle->kind == ObjectKind::Figure ? "figure" : "table";
            jr["number"] = r.handle->number;
        }
        j["ref_spans"].push_back(std::move(jr));
    }
    return j;
}

inline Paragraph paragraph_from_json(const json& j) {
    Paragraph p;
    p.text = j.value("text", "");
    if (j.contains("cite_spans")) {
        for (const auto& js : j["cite_spans"]) {
            CitationSpan s;
            s.start = js.value("start", std::size_t{0});
            s.end = js.value("end", std::size_t{0});
            s.text = js.value("text", "");
            s.resolved = js.value("resolved", false);
            if (s.resolved) s.bib_key = js.value("bib_key", "");
            p.citation_spans.push_back(std::move(s));
        }
    }
    if (j.contains("ref_spans")) {
        for (const auto& jr : j["ref_spans"]) {
            ObjectRef r;
            r.start = jr.value("start", std::size_t{0});
            r.end = jr.value("end", std::size_t{0});
            r.text = jr.value("text", "");
            if (jr.contains("kind")) {
                Handle h;
                h.kind = jr["kind"].get<std::string>() == "table" ? ObjectKind::Table
                                                                  : ObjectKind::Figure;
                h.number = jr.value("number", 0);
                r.handle = h;
            }
            p.object_refs.push_back(std::move(r));
        }
    }
    return p;
}

inline json bib_entry_to_json(const BibEntry& e) {
    json j;
    j["key"] = e.key;
    j["raw_text"] = e.raw_text;
    j["url"] = e.url;
    if (e.structured) {
        json s;
        s["authors"] = e.structured->authors;
        s["title"] = e.structured->title;
        s["venue"] = e.structured->venue;
        s["year"] = e.structured->year;
        s["doi"] = e.structured->doi;
        j["structured"] = std::move(s);
    }
    return j;
}

inline BibEntry bib_entry_from_json(const json& j) {
    BibEntry e;
    e.key = j.value("key", "");
    e.raw_text = j.value("raw_text", "");
    e.url = j.value("url", "");
    if (j.contains("structured")) {
        BibStructured s;
        const auto& js = j["structured"];
        if (js.contains("authors")) {
            for (const auto& a : js["authors"]) s.authors.push_back(a.get<std::string>());
        }
        s.title = js.value("title", "");
        s.venue = js.value("venue", "");
        s.year = js.value("year", "");
        s.doi = js.value("doi", "");
        e.structured = std::move(s);
    }
    return e;
}

inline json document_to_json(const ExtractedDocument& doc) {
    json j;
    j["paper_id"] = doc.paper_id;
    j["title"] = doc.title;
    j["authors"] = json::array();
    for (const auto& a : doc.authors) j["authors"].push_back(author_to_json(a));
    j["abstract"] = json::array();
    for (const auto& p : doc.abstract) j["abstract"].push_back(paragraph_to_json(p));
    j["sections"] = json::array();
    for (const auto& s : doc.sections) {
        json js;
        js["index"] = s.index;
        js["heading"] = s.heading_text;
        js["numbering"] = s.numbering;
        js["paragraphs"] = json::array();
        for (const auto& p : s.paragraphs) js["paragraphs"].push_back(paragraph_to_json(p));
        j["sections"].push_back(std::move(js));
    }
    j["bibliography"] = json::array();
    for (const auto& e : doc.bibliography) j["bibliography"].push_back(bib_entry_to_json(e));
    j["equation_slots"] = json::array();
    for (const auto& q : doc.equation_slots) {
        j["equation_slots"].push_back(
            json{{"section", q.section_index}, {"after_paragraph", q.after_paragraph}, {"label", q.label}});
    }
    j["source_hash"] = doc.source_hash;
    return j;
}

inline ExtractedDocument document_from_json(const json& j) {
    ExtractedDocument doc;
    doc.paper_id = j.value("paper_id", "");
    doc.title = j.value("title", "");
    if (j.contains("authors")) {
        for (const auto& a : j["authors"]) doc.authors.push_back(author_from_json(a));
    }
    if (j.contains("abstract")) {
        for (const auto& p : j["abstract"]) doc.abstract.push_back(paragraph_from_json(p));
    }
    if (j.contains("sections")) {
        for (const auto& js : j["sections"]) {
            Section s;
            s.index = js.value("index", 0);
            s.heading_text = js.value("heading", "");
            s.numbering = js.value("numbering", "");
            if (js.contains("paragraphs")) {
                for (const auto& p : js["paragraphs"]) s.paragraphs.push_back(paragraph_from_json(p));
            }
            doc.sections.push_back(std::move(s));
        }
    }
    if (j.contains("bibliography")) {
        for (const auto& e : j["bibliography"]) doc.bibliography.push_back(bib_entry_from_json(e));
    }
    if (j.contains("equation_slots")) {
        for (const auto& q : j["equation_slots"]) {
            EquationSlot slot;
            slot.section_index = q.value("section", 0);
            slot.after_paragraph = q.value("after_paragraph", 0);
            slot.label = q.value("label", "");
            doc.equation_slots.push_back(std::move(slot));
        }
    }
    doc.source_hash = j.value("source_hash", "");
    return doc;
}

inline json manifest_to_json(const FigureManifest& m) {
    json j;
    j["paper_id"] = m.paper_id;
    j["objects"] = json::array();
    for (const auto& o : m.objects) {
        json jo;
        jo["kind"] = o.kind == ObjectKind::Figure ? "figure" : "table";
        if (o.number) {
            jo["number"] = *o.number;
        } else {
            jo["number"] = nullptr;
        }
        jo["caption"] = o.caption;
        jo["image_path"] = o.image_path;
        jo["extracted"] = o.extracted;
        j["objects"].push_back(std::move(jo));
    }
    return j;
}

inline FigureManifest manifest_from_json(const json& j) {
    FigureManifest m;
    m.paper_id = j.value("paper_id", "");
    if (j.contains("objects")) {
        for (const auto& jo : j["objects"]) {
            ExtractedObject o;
            o.kind = jo.value("kind", "figure") == "table" ? ObjectKind::Table : ObjectKind::Figure;
            if (jo.contains("number") && !jo["number"].is_null()) o.number = jo["number"].get<int>();
            o.caption = jo.value("caption", "");
            o.image_path = jo.value("image_path", "");
            o.extracted = jo.value("extracted", false);
            m.objects.push_back(std::move(o));
        }
    }
    return m;
}

} // namespace scia11y
