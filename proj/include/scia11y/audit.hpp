#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "scia11y/strings.hpp"

namespace scia11y {

// ---------------------------------------------------------------------------
// Minimal HTML scanner. Only has to cope with documents this toolkit emits
// (plus hand-corrupted variants of them in tests), not arbitrary web HTML.
// ---------------------------------------------------------------------------

struct HtmlTag {
    std::string name; // lowercase
    std::map<std::string, std::string> attrs;
    bool closing = false;
    bool self_closing = false;
    std::size_t offset = 0;
};

struct HtmlText {
    std::string text; // entity-decoded
    std::size_t offset = 0;
};

using HtmlNode = std::variant<HtmlTag, HtmlText>;

inline std::string decode_entities(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '&') {
            out.push_back(s[i]);
            ++i;
            continue;
        }
        std::size_t semi = s.find(';', i);
        if (semi == std::string_view::npos || semi - i > 10) {
            out.push_back(s[i]);
            ++i;
            continue;
        }
        std::string_view entity = s.substr(i + 1, semi - i - 1);
        if (entity == "amp") {
            out.push_back('&');
        } else if (entity == "lt") {
            out.push_back('<');
        } else if (entity == "gt") {
            out.push_back('>');
        } else if (entity == "quot") {
            out.push_back('"');
        } else if (entity == "apos") {
            out.push_back('\'');
        } else if (!entity.empty() && entity[0] == '#') {
            long code = 0;
            bool ok = true;
            if (entity.size() > 1 && (entity[1] == 'x' || entity[1] == 'X')) {
                for (std::size_t k = 2; k < entity.size(); ++k) {
                    char c = strings::ascii_lower(entity[k]);
                    if (c >= '0' && c <= '9') {
                        code = code * 16 + (c - '0');
                    } else if (c >= 'a' && c <= 'f') {
                        code = code * 16 + (c - 'a' + 10);
                    } else {
                        ok = false;
                        break;
                    }
                }
            } else {
                for (std::size_t k = 1; k < entity.size(); ++k) {
                    if (entity[k] < '0' || entity[k] > '9') {
                        ok = false;
                        break;
                    }
                    code = code * 10 + (entity[k] - '0');
                }
            }
            if (ok && code > 0 && code < 0x110000) {
                // encode code point as UTF-8
                char buf[4];
                int len = 0;
                if (code < 0x80) {
                    buf[0] = static_cast<char>(code);
                    len = 1;
                } else if (code < 0x800) {
                    buf[0] = static_cast<char>(0xC0 | (code >> 6));
                    buf[1] = static_cast<char>(0x80 | (code & 0x3F));
                    len = 2;
                } else if (code < 0x10000) {
                    buf[0] = static_cast<char>(0xE0 | (code >> 12));
                    buf[1] = static_cast<char>(0x80 | ((code >> 6) & 0x3F));
                    buf[2] = static_cast<char>(0x80 | (code & 0x3F));
                    len = 3;
                } else {
                    buf[0] = static_cast<char>(0xF0 | (code >> 18));
                    buf[1] = static_cast<char>(0x80 | ((code >> 12) & 0x3F));
                    buf[2] = static_cast<char>(0x80 | ((code >> 6) & 0x3F));
                    buf[3] = static_cast<char>(0x80 | (code & 0x3F));
                    len = 4;
                }
                out.append(buf, static_cast<std::size_t>(len));
            } else {
                out.append(s.substr(i, semi - i + 1));
            }
        } else {
            out.append(s.substr(i, semi - i + 1));
            i = semi + 1;
            continue;
        }
        i = semi + 1;
    }
    return out;
}

inline std::vector<HtmlNode> scan_html(std::string_view html) {
    std::vector<HtmlNode> nodes;
    std::size_t i = 0;
    const std::size_t n = html.size();
    auto is_name_char = [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
               c == '-' || c == '_';
    };
    while (i < n) {
        std::size_t lt = html.find('<', i);
        if (lt == std::string_view::npos) {
            if (i < n) nodes.push_back(HtmlText{decode_entities(html.substr(i)), i});
            break;
        }
        if (lt > i) {
            nodes.push_back(HtmlText{decode_entities(html.substr(i, lt - i)), i});
        }
        if (html.compare(lt, 4, "<!--") == 0) {
            std::size_t end = html.find("-->", lt + 4);
            i = end == std::string_view::npos ? n : end + 3;
            continue;
        }
        if (lt + 1 < n && html[lt + 1] == '!') {
            std::size_t end = html.find('>', lt);
            i = end == std::string_view::npos ? n : end + 1;
            continue;
        }
        HtmlTag tag;
        tag.offset = lt;
        std::size_t j = lt + 1;
        if (j < n && html[j] == '/') {
            tag.closing = true;
            ++j;
        }
        std::string name;
        while (j < n && is_name_char(html[j])) {
            name.push_back(strings::ascii_lower(html[j]));
            ++j;
        }
        if (name.empty()) {
            nodes.push_back(HtmlText{"<", lt});
            i = lt + 1;
            continue;
        }
        tag.name = name;
        // attributes
        while (j < n && html[j] != '>') {
            while (j < n && strings::is_space(html[j])) ++j;
            if (j < n && html[j] == '/') {
                tag.self_closing = true;
                ++j;
                continue;
            }
            if (j >= n || html[j] == '>') break;
            std::string attr_name;
            while (j < n && (is_name_char(html[j]) || html[j] == ':')) {
                attr_name.push_back(strings::ascii_lower(html[j]));
                ++j;
            }
            if (attr_name.empty()) {
                ++j;
                continue;
            }
            while (j < n && strings::is_space(html[j])) ++j;
            std::string value;
            if (j < n && html[j] == '=') {
                ++j;
                while (j < n && strings::is_space(html[j])) ++j;
                if (j < n && (html[j] == '"' || html[j] == '\'')) {
                    char quote = html[j];
                    ++j;
                    std::size_t end = html.find(quote, j);
                    if (end == std::string_view::npos) end = n;
                    value = decode_entities(html.substr(j, end - j));
                    j = end < n ? end + 1 : n;
                } else {
                    std::size_t start = j;
                    while (j < n && !strings::is_space(html[j]) && html[j] != '>') ++j;
                    value = decode_entities(html.substr(start, j - start));
                }
            }
            tag.attrs.emplace(std::move(attr_name), std::move(value));
        }
        i = j < n ? j + 1 : n;
        nodes.push_back(std::move(tag));
    }
    return nodes;
}

// Concatenated decoded text inside <p> elements, in document order, one
// paragraph per line.
inline std::string paragraph_visible_text(const std::vector<HtmlNode>& nodes) {
    std::string out;
    int p_depth = 0;
    for (const auto& node : nodes) {
        if (const auto* tag = std::get_if<HtmlTag>(&node)) {
            if (tag->name == "p") {
                if (tag->closing) {
                    if (p_depth > 0) --p_depth;
                    if (p_depth == 0) out.push_back('\n');
                } else if (!tag->self_closing) {
                    ++p_depth;
                }
            }
        } else if (const auto* text = std::get_if<HtmlText>(&node)) {
            if (p_depth > 0) out += text->text;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Self audit: HTML analogues of the tracked accessibility criteria.
// ---------------------------------------------------------------------------

struct AuditCheck {
    std::string criterion;
    bool passed = true;
    std::vector<std::string> offenders;
};

struct AuditReport {
    std::vector<AuditCheck> checks;

    bool all_passed() const {
        return std::all_of(checks.begin(), checks.end(),
                           [](const AuditCheck& c) { return c.passed; });
    }

    const AuditCheck* find(std::string_view criterion) const {
        for (const auto& c : checks) {
            if (c.criterion == criterion) return &c;
        }
        return nullptr;
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["pass"] = all_passed();
        j["checks"] = nlohmann::ordered_json::array();
        for (const auto& c : checks) {
            j["checks"].push_back(nlohmann::ordered_json{
                {"criterion", c.criterion}, {"pass", c.passed}, {"offenders", c.offenders}});
        }
        return j;
    }
};

inline constexpr const char* kAuditDefaultLanguage = "default-language";
inline constexpr const char* kAuditHeadingStructure = "heading-structure";
inline constexpr const char* kAuditTaggedFigures = "tagged-figures";
inline constexpr const char* kAuditReadingOrder = "reading-order";
inline constexpr const char* kAuditAnchorResolution = "anchor-resolution";

// Audits an emitted render (or any HTML document) against the criterion
// analogues: language declared, heading hierarchy sound, figures tagged with
// captions and image alternate text, linear reading order, and no dangling
// in-page links. emit_html output must pass every check for every valid tree.
inline AuditReport self_audit(std::string_view html) {
    std::vector<HtmlNode> nodes = scan_html(html);
    AuditReport report;

    // default-language: the root element declares a reading language.
    {
        AuditCheck check{kAuditDefaultLanguage, true, {}};
        bool found = false;
        for (const auto& node : nodes) {
            const auto* tag = std::get_if<HtmlTag>(&node);
            if (tag == nullptr || tag->closing || tag->name != "html") continue;
            auto it = tag->attrs.find("lang");
            found = it != tag->attrs.end() && !strings::trim(it->second).empty();
            break;
        }
        if (!found) {
            check.passed = false;
            check.offenders.push_back("html");
        }
        report.checks.push_back(std::move(check));
    }

    // heading-structure: exactly one h1, first heading is the h1, and no
    // heading is more than one level deeper than its predecessor.
    {
        AuditCheck check{kAuditHeadingStructure, true, {}};
        int h1_count = 0;
        int prev_level = 0;
        for (const auto& node : nodes) {
            const auto* tag = std::get_if<HtmlTag>(&node);
            if (tag == nullptr || tag->closing) continue;
            if (tag->name.size() == 2 && tag->name[0] == 'h' && tag->name[1] >= '1' &&
                tag->name[1] <= '6') {
                int level = tag->name[1] - '0';
                if (level == 1) ++h1_count;
                if (prev_level == 0 && level != 1) {
                    check.passed = false;
                    check.offenders.push_back("first heading is h" + std::to_string(level));
                }
                if (prev_level > 0 && level > prev_level + 1) {
                    check.passed = false;
                    check.offenders.push_back("h" + std::to_string(prev_level) + " followed by h" +
                                              std::to_string(level));
                }
                prev_level = level;
            }
        }
        if (h1_count != 1) {
            check.passed = false;
            check.offenders.push_back("document has " + std::to_string(h1_count) +
                                      " h1 headings (expected 1)");
        }
        report.checks.push_back(std::move(check));
    }

    // tagged-figures: every figure carries a non-empty figcaption; every image
    // carries non-empty alternate text.
    {
        AuditCheck check{kAuditTaggedFigures, true, {}};
        struct FigureState {
            std::string id;
            bool has_caption = false;
            std::string caption_text;
            bool in_caption = false;
        };
        std::vector<FigureState> stack;
        for (const auto& node : nodes) {
            if (const auto* tag = std::get_if<HtmlTag>(&node)) {
                if (tag->name == "figure") {
                    if (tag->closing) {
                        if (!stack.empty()) {
                            FigureState state = stack.back();
                            stack.pop_back();
                            if (!state.has_caption ||
                                strings::trim(state.caption_text).empty()) {
                                check.passed = false;
                                check.offenders.push_back(state.id.empty() ? "figure" : state.id);
                            }
                        }
                    } else {
                        FigureState state;
                        auto it = tag->attrs.find("id");
                        if (it != tag->attrs.end()) state.id = it->second;
                        stack.push_back(std::move(state));
                    }
                } else if (tag->name == "figcaption" && !stack.empty()) {
                    if (tag->closing) {
                        stack.back().in_caption = false;
                    } else {
                        stack.back().has_caption = true;
                        stack.back().in_caption = true;
                    }
                } else if (tag->name == "img" && !tag->closing) {
                    auto it = tag->attrs.find("alt");
                    if (it == tag->attrs.end() || strings::trim(it->second).empty()) {
                        check.passed = false;
                        std::string id = stack.empty() ? "img" : stack.back().id;
                        check.offenders.push_back(id + " (image without alternate text)");
                    }
                }
            } else if (const auto* text = std::get_if<HtmlText>(&node)) {
                if (!stack.empty() && stack.back().in_caption) {
                    stack.back().caption_text += text->text;
                }
            }
        }
        report.checks.push_back(std::move(check));
    }

    // Collect ids once for the remaining checks.
    std::map<std::string, std::size_t> id_offsets;
    for (const auto& node : nodes) {
        const auto* tag = std::get_if<HtmlTag>(&node);
        if (tag == nullptr || tag->closing) continue;
        auto it = tag->attrs.find("id");
        if (it != tag->attrs.end() && !it->second.empty()) {
            id_offsets.emplace(it->second, tag->offset);
        }
    }

    // reading-order: title, authors, abstract, contents, sections in index
    // order, references — for the landmarks that are present.
    {
        AuditCheck check{kAuditReadingOrder, true, {}};
        std::vector<std::pair<std::string, std::size_t>> landmarks;
        auto push_if_present = [&](const std::string& id) {
            auto it = id_offsets.find(id);
            if (it != id_offsets.end()) landmarks.emplace_back(id, it->second);
        };
        push_if_present("title");
        push_if_present("authors");
        push_if_present("abstract");
        push_if_present("toc");
        std::vector<std::pair<int, std::size_t>> sections;
        for (const auto& [id, offset] : id_offsets) {
            if (id.rfind("sec-", 0) == 0) {
                bool numeric = id.size() > 4;
                int value = 0;
                for (std::size_t k = 4; k < id.size(); ++k) {
                    if (id[k] < '0' || id[k] > '9') {
                        numeric = false;
                        break;
                    }
                    value = value * 10 + (id[k] - '0');
                }
                if (numeric) sections.emplace_back(value, offset);
            }
        }
        std::sort(sections.begin(), sections.end());
        for (const auto& [index, offset] : sections) {
            landmarks.emplace_back("sec-" + std::to_string(index), offset);
        }
        push_if_present("references");
        for (std::size_t k = 1; k < landmarks.size(); ++k) {
            if (landmarks[k].second <= landmarks[k - 1].second) {
                check.passed = false;
                check.offenders.push_back(landmarks[k - 1].first + " appears after " +
                                          landmarks[k].first);
            }
        }
        report.checks.push_back(std::move(check));
    }

    // anchor-resolution: every in-page href resolves to an id.
    {
        AuditCheck check{kAuditAnchorResolution, true, {}};
        for (const auto& node : nodes) {
            const auto* tag = std::get_if<HtmlTag>(&node);
            if (tag == nullptr || tag->closing) continue;
            auto it = tag->attrs.find("href");
            if (it == tag->attrs.end() || it->second.empty() || it->second[0] != '#') continue;
            std::string target = it->second.substr(1);
            if (id_offsets.find(target) == id_offsets.end()) {
                check.passed = false;
                check.offenders.push_back("#" + target);
            }
        }
        report.checks.push_back(std::move(check));
    }

    return report;
}

} // namespace scia11y
