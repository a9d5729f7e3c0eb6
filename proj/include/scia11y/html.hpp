#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "scia11y/diagnostics.hpp"
#include "scia11y/stitcher.hpp"
#include "scia11y/strings.hpp"

namespace scia11y {

inline std::string escape_html_text(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        default: out.push_back(c); break;
        }
    }
    return out;
}

inline std::string escape_html_attr(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&#39;"; break;
        default: out.push_back(c); break;
        }
    }
    return out;
}

struct EmitOptions {
    std::string lang;              // overrides the tree's language tag when nonempty
    bool inline_images = false;    // embed assets as data: URIs
    std::string assets_href = "assets"; // href prefix for image sources
    std::string asset_source_root;      // directory image_path is resolved against
};

struct HtmlRender {
    std::string bytes;
    std::map<std::string, std::string> anchor_index; // id -> element kind
};

namespace detail {

inline std::string image_mime_type(const std::string& path) {
    auto dot = path.find_last_of('.');
    std::string ext = dot == std::string::npos ? "" : strings::to_lower(path.substr(dot + 1));
    if (ext == "jpg" || ext == "jpeg") return "image/jpeg";
    if (ext == "gif") return "image/gif";
    if (ext == "svg") return "image/svg+xml";
    if (ext == "webp") return "image/webp";
    return "image/png";
}

inline std::optional<std::string> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    if (!in.good() && !in.eof()) return std::nullopt;
    return ss.str();
}

class HtmlWriter {
public:
    explicit HtmlWriter(HtmlRender& render) : render_(render) {}

    void line(std::string_view text) {
        render_.bytes.append(text);
        render_.bytes.push_back('\n');
    }

    void raw(std::string_view text) { render_.bytes.append(text); }

    void register_anchor(const std::string& id, const std::string& kind) {
        render_.anchor_index.emplace(id, kind);
    }

private:
    HtmlRender& render_;
};

// Renders paragraph text with citation and object-reference anchors. The
// citation anchor assignment mirrors build_links exactly.
inline std::string render_paragraph_body(const Paragraph& para, int section_index,
                                         int paragraph_index, CitationAnchorAssigner& citations,
                                         HtmlRender& render) {
    struct Run {
        std::size_t start, end;
        const CitationSpan* cite = nullptr;
        const ObjectRef* ref = nullptr;
        int ref_index = 0;
    };
    std::vector<Run> runs;
    for (const auto& s : para.citation_spans) runs.push_back({s.start, s.end, &s, nullptr, 0});
    int ref_index = 0;
    for (const auto& r : para.object_refs) {
        runs.push_back({r.start, r.end, nullptr, &r, ref_index});
        ++ref_index;
    }
    std::sort(runs.begin(), runs.end(), [](const Run& a, const Run& b) { return a.start < b.start; });

    std::string out;
    std::size_t cursor = 0;
    for (const auto& run : runs) {
        if (run.start > para.text.size() || run.end > para.text.size() || run.start < cursor) {
            continue; // defensive only; parser guarantees sanity
        }
        out += escape_html_text(std::string_view(para.text).substr(cursor, run.start - cursor));
        std::string_view surface = std::string_view(para.text).substr(run.start, run.end - run.start);
        if (run.cite != nullptr) {
            if (run.cite->resolved) {
                std::string id = citations.next(run.cite->bib_key, section_index);
                render.anchor_index.emplace(id, "a");
                out += "<a id=\"" + id + "\" class=\"citation\" href=\"#" +
                       bib_anchor(run.cite->bib_key) + "\">" + escape_html_text(surface) + "</a>";
            } else {
                out += escape_html_text(surface);
            }
        } else {
            if (run.ref->handle) {
                std::string id = object_ref_anchor(section_index, paragraph_index, run.ref_index);
                render.anchor_index.emplace(id, "a");
                out += "<a id=\"" + id + "\" class=\"objref\" href=\"#" +
                       object_anchor(*run.ref->handle) + "\">" + escape_html_text(surface) + "</a>";
            } else {
                out += escape_html_text(surface);
            }
        }
        cursor = run.end;
    }
    if (cursor < para.text.size()) {
        out += escape_html_text(std::string_view(para.text).substr(cursor));
    }
    return out;
}

inline const char* kStylesheet =
    "body{font-family:Georgia,'Times New Roman',serif;line-height:1.6;max-width:46em;"
    "margin:0 auto;padding:0 1em;color:#111}\n"
    "figure{margin:1.5em 0;padding:.75em;border:1px solid #888}\n"
    "figure.placeholder{border-style:dashed;color:#444}\n"
    "img{max-width:100%;height:auto}\n"
    "nav.toc ol{list-style:none;padding-left:1em}\n"
    ".about{border:1px solid #888;padding:.5em;font-size:.9em}\n"
    ".backlinks a{margin-right:.5em}\n";

} // namespace detail

// Serializes a render tree into one self-contained accessible HTML document.
// Output is deterministic: identical tree and options give identical bytes.
// Unreadable image assets downgrade the object to a placeholder with a
// warning; emission never aborts for a missing asset.
inline HtmlRender emit_html(const RenderTree& tree, const EmitOptions& opts, Diagnostics& diag) {
    HtmlRender render;
    detail::HtmlWriter w(render);
    CitationAnchorAssigner citations;
    const std::string lang = !opts.lang.empty() ? opts.lang
                             : tree.metadata.lang.empty() ? std::string("en")
                                                          : tree.metadata.lang;
    const std::string title =
        tree.metadata.title.empty() ? std::string("Untitled document") : tree.metadata.title;

    int last_heading_level = 1;
    auto heading_level_for = [&last_heading_level](int depth) {
        int level = depth + 1;
        if (level < 2) level = 2;
        if (level > 6) level = 6;
        if (level > last_heading_level + 1) level = last_heading_level + 1;
        last_heading_level = level;
        return level;
    };

    w.line("<!DOCTYPE html>");
    w.line("<html lang=\"" + escape_html_attr(lang) + "\">");
    w.line("<head>");
    w.line("<meta charset=\"utf-8\">");
    w.line("<meta name=\"viewport\" content=\"width=device-width, initial-scale=1\">");
    w.line("<title>" + escape_html_text(title) + "</title>");
    w.line("<style>");
    w.raw(detail::kStylesheet);
    w.line("</style>");
    w.line("</head>");
    w.line("<body>");

    // Provenance banner; precedes the title so users hear it first.
    w.line("<section class=\"about\" role=\"note\" aria-label=\"About this document\">");
    w.line("<p>Automatically generated accessible HTML render. Content that could not be "
           "extracted is indicated in place; please refer to the original document where "
           "noted.</p>");
    w.line("</section>");

    w.register_anchor("title", "h1");
    w.line("<h1 id=\"title\">" + escape_html_text(title) + "</h1>");

    if (!tree.metadata.authors.empty()) {
        w.register_anchor("authors", "section");
        w.register_anchor("authors-heading", "h2");
        w.line("<section id=\"authors\" aria-labelledby=\"authors-heading\">");
        w.line("<h2 id=\"authors-heading\">Authors</h2>");
        last_heading_level = 2;
        w.line("<ul class=\"authors\">");
        for (const auto& a : tree.metadata.authors) {
            w.line("<li>" + escape_html_text(a.display()) + "</li>");
        }
        w.line("</ul>");
        w.line("</section>");
    }

    if (!tree.metadata.abstract.empty()) {
        w.register_anchor("abstract", "section");
        w.register_anchor("abstract-heading", "h2");
        w.line("<section id=\"abstract\" aria-labelledby=\"abstract-heading\">");
        w.line("<h2 id=\"abstract-heading\">Abstract</h2>");
        last_heading_level = 2;
        for (std::size_t i = 0; i < tree.metadata.abstract.size(); ++i) {
            std::string id = paragraph_anchor(-1, static_cast<int>(i));
            w.register_anchor(id, "p");
            w.line("<p id=\"" + id + "\">" +
                   detail::render_paragraph_body(tree.metadata.abstract[i], -1, static_cast<int>(i),
                                                 citations, render) +
                   "</p>");
        }
        w.line("</section>");
    }

    if (!tree.toc.entries.empty()) {
        w.register_anchor("toc", "nav");
        w.register_anchor("toc-heading", "h2");
        w.line("<nav id=\"toc\" class=\"toc\" aria-labelledby=\"toc-heading\">");
        w.line("<h2 id=\"toc-heading\">Contents</h2>");
        last_heading_level = 2;
        w.line("<ol>");
        for (const auto& entry : tree.toc.entries) {
            std::string li = "<li class=\"toc-depth-" + std::to_string(entry.depth) + "\"><a href=\"#" +
                             entry.anchor + "\">" + escape_html_text(entry.label) + "</a>";
            if (entry.children.empty()) {
                w.line(li + "</li>");
            } else {
                w.line(li);
                w.line("<ol>");
                for (const auto& child : entry.children) {
                    w.line("<li><a href=\"#" + child.anchor + "\">" + escape_html_text(child.label) +
                           "</a></li>");
                }
                w.line("</ol>");
                w.line("</li>");
            }
        }
        w.line("</ol>");
        w.line("</nav>");
    }

    auto emit_object = [&](const ObjectBlock& block) {
        const ExtractedObject& obj = block.object;
        std::optional<Handle> handle;
        if (obj.number) handle = Handle{obj.kind, *obj.number};
        std::string caption = obj.caption;
        if (caption.empty()) {
            caption = handle ? render_handle(*handle)
                             : std::string(kind_word(obj.kind)) + " (unnumbered)";
        }

        std::string src;
        bool downgrade = false;
        if (!obj.image_path.empty()) {
            std::filesystem::path source = opts.asset_source_root.empty()
                                               ? std::filesystem::path(obj.image_path)
                                               : std::filesystem::path(opts.asset_source_root) /
                                                     obj.image_path;
            if (opts.inline_images) {
                auto bytes = detail::read_file_bytes(source);
                if (bytes) {
                    src = "data:" + detail::image_mime_type(obj.image_path) + ";base64," +
                          strings::base64_encode(*bytes);
                } else {
                    downgrade = true;
                }
            } else {
                std::error_code ec;
                if (std::filesystem::exists(source, ec) &&
                    std::filesystem::is_regular_file(source, ec)) {
                    src = opts.assets_href + "/" +
                          std::filesystem::path(obj.image_path).filename().string();
                } else {
                    downgrade = true;
                }
            }
        } else {
            downgrade = true;
        }

        if (downgrade) {
            if (!obj.image_path.empty()) {
                diag.warn_here("asset_missing", "image for " + block.anchor + " unreadable (" +
                                                    obj.image_path + "); placeholder emitted");
            }
            std::string text = handle ? object_placeholder_text(*handle)
                                      : std::string(kind_word(obj.kind)) + ". " + kNotExtractedSentence;
            w.register_anchor(block.anchor, "figure");
            w.line("<figure id=\"" + block.anchor + "\" class=\"placeholder\">");
            w.line("<figcaption>" + escape_html_text(text) + "</figcaption>");
            w.line("</figure>");
            return;
        }

        w.register_anchor(block.anchor, "figure");
        w.line("<figure id=\"" + block.anchor + "\">");
        w.line("<img src=\"" + escape_html_attr(src) + "\" alt=\"" + escape_html_attr(caption) +
               "\">");
        w.line("<figcaption>" + escape_html_text(caption) + "</figcaption>");
        w.line("</figure>");
    };

    w.register_anchor("body", "main");
    w.line("<main id=\"body\">");
    for (const auto& block : tree.body) {
        if (const auto* h = std::get_if<HeadingBlock>(&block)) {
            int level = heading_level_for(h->depth);
            std::string id = section_anchor(h->section_index);
            w.register_anchor(id, "h" + std::to_string(level));
            w.line("<h" + std::to_string(level) + " id=\"" + id + "\">" +
                   escape_html_text(heading_display_text(h->text, h->numbering)) + "</h" +
                   std::to_string(level) + ">");
        } else if (const auto* p = std::get_if<ParagraphBlock>(&block)) {
            std::string id = paragraph_anchor(p->section_index, p->paragraph_index);
            w.register_anchor(id, "p");
            w.line("<p id=\"" + id + "\">" +
                   detail::render_paragraph_body(p->content, p->section_index, p->paragraph_index,
                                                 citations, render) +
                   "</p>");
        } else if (const auto* o = std::get_if<ObjectBlock>(&block)) {
            emit_object(*o);
        } else if (const auto* ph = std::get_if<PlaceholderBlock>(&block)) {
            w.register_anchor(ph->anchor, "figure");
            std::string cls = ph->is_equation ? "placeholder equation" : "placeholder";
            w.line("<figure id=\"" + ph->anchor + "\" class=\"" + cls + "\">");
            w.line("<figcaption>" + escape_html_text(ph->text) + "</figcaption>");
            w.line("</figure>");
        }
    }
    w.line("</main>");

    if (!tree.bibliography.empty()) {
        w.register_anchor("references", "section");
        w.register_anchor("references-heading", "h2");
        w.line("<section id=\"references\" aria-labelledby=\"references-heading\">");
        w.line("<h2 id=\"references-heading\">References</h2>");
        last_heading_level = 2;
        w.line("<ul class=\"bibliography\">");
        for (std::size_t i = 0; i < tree.bibliography.size(); ++i) {
            const BibEntry& entry = tree.bibliography[i];
            std::string id = bib_anchor(entry.key);
            w.register_anchor(id, "li");
            std::string li = "<li id=\"" + id + "\"><span class=\"bib-label\">[" +
                             std::to_string(i + 1) + "]</span> " + escape_html_text(entry.raw_text);
            if (!entry.url.empty()) {
                li += " <a class=\"bib-url\" href=\"" + escape_html_attr(entry.url) + "\">" +
                      escape_html_text(entry.url) + "</a>";
            }
            if (const auto* returns = tree.link_graph.returns_for(entry.key)) {
                li += " <span class=\"backlinks\">";
                for (std::size_t r = 0; r < returns->size(); ++r) {
                    if (r > 0) li += " ";
                    li += "<a href=\"#" + (*returns)[r].anchor + "\">" +
                          escape_html_text((*returns)[r].label) + "</a>";
                }
                li += "</span>";
            }
            li += "</li>";
            w.line(li);
        }
        w.line("</ul>");
        w.line("</section>");
    }

    w.line("</body>");
    w.line("</html>");
    return render;
}

} // namespace scia11y
