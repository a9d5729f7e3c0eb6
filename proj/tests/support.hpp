#pragma once

// Shared test helpers: fixture paths, random document generation, the
// independent brute-force placement oracle, and corpus builders for the
// published-table fixtures.

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "scia11y/compliance.hpp"
#include "scia11y/document.hpp"
#include "scia11y/evaluation.hpp"
#include "scia11y/stitcher.hpp"

namespace testsupport {

inline std::filesystem::path fixture_path(const std::string& name) {
    return std::filesystem::path(SCIA11Y_FIXTURES_DIR) / name;
}

inline std::string read_fixture(const std::string& name) {
    std::ifstream in(fixture_path(name), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// Paragraph builder: keeps span offsets honest while composing text.
// ---------------------------------------------------------------------------

class ParagraphBuilder {
public:
    ParagraphBuilder& text(const std::string& s) {
        para_.text += s;
        return *this;
    }

    ParagraphBuilder& mention(scia11y::Handle handle, int style = 0) {
        static const char* fig_styles[] = {"Figure ", "Fig. ", "fig "};
        static const char* tab_styles[] = {"Table ", "Tab. ", "tab "};
        const char* prefix = handle.kind == scia11y::ObjectKind::Figure
                                 ? fig_styles[style % 3]
                                 : tab_styles[style % 3];
        std::string surface = std::string(prefix) + std::to_string(handle.number);
        scia11y::ObjectRef ref;
        ref.start = para_.text.size();
        ref.end = ref.start + surface.size();
        ref.text = surface;
        ref.handle = handle;
        para_.text += surface;
        para_.object_refs.push_back(std::move(ref));
        return *this;
    }

    ParagraphBuilder& cite(const std::string& key, bool resolved = true) {
        std::string surface = "[" + key + "]";
        scia11y::CitationSpan span;
        span.start = para_.text.size();
        span.end = span.start + surface.size();
        span.text = surface;
        span.resolved = resolved;
        if (resolved) span.bib_key = key;
        para_.text += surface;
        para_.citation_spans.push_back(std::move(span));
        return *this;
    }

    scia11y::Paragraph build() { return para_; }

private:
    scia11y::Paragraph para_;
};

// ---------------------------------------------------------------------------
// Random documents for the placement and link property suites
// ---------------------------------------------------------------------------

struct RandomDocument {
    scia11y::ExtractedDocument doc;
    scia11y::FigureManifest figs;
};

inline RandomDocument make_random_document(std::mt19937& rng, int max_objects = 8,
                                           int max_paragraphs = 20) {
    RandomDocument out;
    out.doc.paper_id = "random-doc";
    out.figs.paper_id = "random-doc";
    out.doc.title = "Random document";

    std::uniform_int_distribution<int> kind_dist(0, 1);
    std::uniform_int_distribution<int> style_dist(0, 2);

    // Manifest: unique numbers per kind, a few unnumbered stragglers.
    std::uniform_int_distribution<int> object_count_dist(0, max_objects);
    int n_objects = object_count_dist(rng);
    std::vector<int> available_numbers[2];
    for (int k = 0; k < 2; ++k) {
        for (int n = 1; n <= max_objects; ++n) available_numbers[k].push_back(n);
        std::shuffle(available_numbers[k].begin(), available_numbers[k].end(), rng);
    }
    for (int i = 0; i < n_objects; ++i) {
        scia11y::ExtractedObject obj;
        int k = kind_dist(rng);
        obj.kind = k == 0 ? scia11y::ObjectKind::Figure : scia11y::ObjectKind::Table;
        if (std::uniform_int_distribution<int>(0, 9)(rng) == 0) {
            obj.number = std::nullopt; // unnumbered
        } else {
            obj.number = available_numbers[k].back();
            available_numbers[k].pop_back();
        }
        obj.caption = "Caption " + std::to_string(i);
        obj.extracted = false;
        out.figs.objects.push_back(std::move(obj));
    }

    // Bibliography.
    std::uniform_int_distribution<int> bib_dist(0, 6);
    int n_bib = bib_dist(rng);
    for (int i = 0; i < n_bib; ++i) {
        scia11y::BibEntry entry;
        entry.key = "BIBREF" + std::to_string(i);
        entry.raw_text = "Author " + std::to_string(i) + ". Title " + std::to_string(i) + ". 2020.";
        out.doc.bibliography.push_back(std::move(entry));
    }

    // Sections and paragraphs with sprinkled mentions/citations.
    std::uniform_int_distribution<int> section_dist(1, 4);
    std::uniform_int_distribution<int> para_dist(1, max_paragraphs);
    int n_sections = section_dist(rng);
    int n_paragraphs = para_dist(rng);
    std::uniform_int_distribution<int> mention_dist(0, 2);
    std::uniform_int_distribution<int> number_dist(1, max_objects);
    std::uniform_int_distribution<int> cite_dist(0, 2);

    // occasionally an abstract paragraph with a mention
    if (std::uniform_int_distribution<int>(0, 4)(rng) == 0) {
        ParagraphBuilder b;
        b.text("Abstract text. ");
        if (n_objects > 0 && std::uniform_int_distribution<int>(0, 1)(rng) == 0) {
            b.mention({kind_dist(rng) == 0 ? scia11y::ObjectKind::Figure
                                           : scia11y::ObjectKind::Table,
                       number_dist(rng)},
                      style_dist(rng));
        }
        out.doc.abstract.push_back(b.build());
    }

    int paragraphs_left = n_paragraphs;
    for (int s = 0; s < n_sections; ++s) {
        scia11y::Section sec;
        sec.index = s;
        sec.heading_text = "Section " + std::to_string(s + 1);
        if (s % 2 == 0) sec.numbering = std::to_string(s + 1);
        int in_this = s == n_sections - 1 ? paragraphs_left
                                          : std::max(1, paragraphs_left / (n_sections - s));
        paragraphs_left -= in_this;
        for (int p = 0; p < in_this; ++p) {
            ParagraphBuilder b;
            b.text("Paragraph " + std::to_string(s) + "." + std::to_string(p) + " ");
            int mentions = mention_dist(rng);
            for (int m = 0; m < mentions; ++m) {
                b.text("see ");
                b.mention({kind_dist(rng) == 0 ? scia11y::ObjectKind::Figure
                                               : scia11y::ObjectKind::Table,
                           number_dist(rng)},
                          style_dist(rng));
                b.text(" ");
            }
            if (n_bib > 0) {
                int cites = cite_dist(rng);
                for (int c = 0; c < cites; ++c) {
                    b.text("and ");
                    b.cite("BIBREF" + std::to_string(std::uniform_int_distribution<int>(
                                          0, n_bib - 1)(rng)));
                    b.text(" ");
                }
            }
            b.text("ends here.");
            sec.paragraphs.push_back(b.build());
        }
        out.doc.sections.push_back(std::move(sec));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Brute-force placement oracle, independent of the queue implementation:
// repeatedly re-scans the unplaced list at every mention.
// ---------------------------------------------------------------------------

struct OraclePlacement {
    bool trailing = false;
    scia11y::ParagraphPos after{};
};

inline std::vector<OraclePlacement> oracle_place(const scia11y::ExtractedDocument& doc,
                                                 const scia11y::FigureManifest& figs) {
    std::vector<OraclePlacement> result(figs.objects.size());
    std::vector<bool> placed(figs.objects.size(), false);

    struct Para {
        scia11y::ParagraphPos pos;
        const scia11y::Paragraph* para;
    };
    std::vector<Para> stream;
    for (std::size_t i = 0; i < doc.abstract.size(); ++i) {
        stream.push_back({{-1, static_cast<int>(i)}, &doc.abstract[i]});
    }
    for (const auto& sec : doc.sections) {
        for (std::size_t i = 0; i < sec.paragraphs.size(); ++i) {
            stream.push_back({{sec.index, static_cast<int>(i)}, &sec.paragraphs[i]});
        }
    }

    bool have_anchor[2] = {false, false};
    scia11y::ParagraphPos anchor[2];
    for (const auto& view : stream) {
        for (const auto& ref : view.para->object_refs) {
            if (!ref.handle) continue;
            int k = ref.handle->kind == scia11y::ObjectKind::Table ? 1 : 0;
            // the mentioned number goes after this paragraph; smaller unplaced
            // numbers group with the kind's previous placement (or here when
            // there is none)
            bool placed_any = false;
            for (std::size_t i = 0; i < figs.objects.size(); ++i) {
                const auto& obj = figs.objects[i];
                if (placed[i] || !obj.number) continue;
                if (obj.kind != ref.handle->kind || *obj.number > ref.handle->number) continue;
                placed[i] = true;
                placed_any = true;
                result[i].trailing = false;
                if (*obj.number == ref.handle->number || !have_anchor[k]) {
                    result[i].after = view.pos;
                } else {
                    result[i].after = anchor[k];
                }
            }
            if (placed_any) {
                anchor[k] = view.pos;
                have_anchor[k] = true;
            }
        }
    }
    for (std::size_t i = 0; i < figs.objects.size(); ++i) {
        if (!placed[i]) result[i].trailing = true;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Published-count fixtures
// ---------------------------------------------------------------------------

// Synthetic corpus matching the published Total Compliance histogram:
// 8519 papers at 0; 1010 at 1 of which 793 meet only Default language;
// 494 at 4 of which 396 miss only Alt-text; 275 at 5; the remaining 1099
// filled at totals 2 and 3.
inline std::vector<scia11y::ComplianceRecord> make_histogram_fixture() {
    using scia11y::ComplianceRecord;
    using scia11y::Criterion;
    using scia11y::CriterionStatus;
    std::vector<ComplianceRecord> records;
    records.reserve(11397);
    int id = 0;
    auto push = [&records, &id](std::initializer_list<Criterion> passed) {
        ComplianceRecord r;
        r.paper_id = "p" + std::to_string(id++);
        for (Criterion c : passed) {
            r.criteria[static_cast<std::size_t>(c)] = CriterionStatus::Passed;
        }
        for (std::size_t i = 0; i < r.criteria.size(); ++i) {
            if (r.criteria[i] != CriterionStatus::Passed) {
                r.criteria[i] = CriterionStatus::Failed;
            }
        }
        records.push_back(std::move(r));
    };

    for (int i = 0; i < 8519; ++i) push({});
    for (int i = 0; i < 793; ++i) push({Criterion::DefaultLanguage});
    const Criterion other_singles[4] = {Criterion::AltText, Criterion::TableHeaders,
                                        Criterion::TaggedPDF, Criterion::TabOrder};
    for (int i = 0; i < 217; ++i) push({other_singles[i % 4]});
    for (int i = 0; i < 550; ++i) push({Criterion::DefaultLanguage, Criterion::TaggedPDF});
    for (int i = 0; i < 549; ++i) {
        push({Criterion::DefaultLanguage, Criterion::TaggedPDF, Criterion::TableHeaders});
    }
    for (int i = 0; i < 396; ++i) {
        push({Criterion::TableHeaders, Criterion::TaggedPDF, Criterion::DefaultLanguage,
              Criterion::TabOrder});
    }
    const Criterion other_missing[4] = {Criterion::TableHeaders, Criterion::TaggedPDF,
                                        Criterion::DefaultLanguage, Criterion::TabOrder};
    for (int i = 0; i < 98; ++i) {
        Criterion missing = other_missing[i % 4];
        std::vector<Criterion> passed;
        for (Criterion c : scia11y::kAllCriteria) {
            if (c != missing) passed.push_back(c);
        }
        scia11y::ComplianceRecord r;
        r.paper_id = "p" + std::to_string(id++);
        for (Criterion c : passed) r.criteria[static_cast<std::size_t>(c)] = CriterionStatus::Passed;
        for (std::size_t k = 0; k < r.criteria.size(); ++k) {
            if (r.criteria[k] != CriterionStatus::Passed) r.criteria[k] = CriterionStatus::Failed;
        }
        records.push_back(std::move(r));
    }
    for (int i = 0; i < 275; ++i) {
        push({Criterion::AltText, Criterion::TableHeaders, Criterion::TaggedPDF,
              Criterion::DefaultLanguage, Criterion::TabOrder});
    }
    return records;
}

// 385 evaluation records engineered so every aggregation row reproduces the
// published element-table counts, with a field map matching the published
// per-field readability split.
struct PublishedEvalFixture {
    std::vector<scia11y::EvaluationRecord> records;
    std::map<std::string, std::string> field_map;
};

inline PublishedEvalFixture make_published_eval_fixture() {
    using scia11y::BibliographyGrade;
    using scia11y::CitationGrade;
    using scia11y::EvaluationRecord;
    using scia11y::Readability;
    using scia11y::TriState;

    const int n = 385;
    std::vector<EvaluationRecord> records(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto& r = records[static_cast<std::size_t>(i)];
        char buf[16];
        std::snprintf(buf, sizeof(buf), "paper-%03d", i);
        r.paper_id = buf;
        r.annotator_id = "a1";
        r.has_equations = false;
    }

    auto spread = [n](int i, std::initializer_list<std::pair<int, int>> ranges) -> int {
        (void)n;
        int start = 0;
        for (const auto& [count, value] : ranges) {
            if (i < start + count) return value;
            start += count;
        }
        return -1;
    };

    // Title 337/16/32, Authors 307/64/14, Abstract 308/22/55.
    auto tri_of = [](int v) {
        return v == 0 ? TriState::Yes : v == 1 ? TriState::Partially : TriState::No;
    };
    for (int i = 0; i < n; ++i) {
        records[i].title_ok = tri_of(spread(i, {{337, 0}, {16, 1}, {32, 2}}));
        records[i].authors_ok = tri_of(spread(i, {{307, 0}, {64, 1}, {14, 2}}));
        records[i].abstract_ok = tri_of(spread(i, {{308, 0}, {22, 1}, {55, 2}}));
    }

    // Figures: extraction skipped 6 / no-figures 94 / 201 / 45 / 39;
    // captions skipped 0 / 94 / 174 / 55 / 62 (the no-figures sets coincide).
    for (int i = 0; i < n; ++i) {
        auto& f = records[i].figures;
        if (i < 6) {
            f.present = 1;
            f.correct = std::nullopt; // extraction question skipped
            f.captions_correct = 1;   // caption errors = 0, lands in the 174
            f.captions_mixed = 0;
            continue;
        }
        if (i < 100) {
            f.present = 0;
            f.correct = 0;
            f.captions_correct = 0;
            f.captions_mixed = 0;
            continue;
        }
        int j = i - 100; // 285 remaining records
        int ext_errors = spread(j, {{201, 0}, {45, 1}, {39, 2}});
        int cap_errors = spread(j, {{168, 0}, {55, 1}, {62, 2}});
        int present = std::max({ext_errors, cap_errors, 1});
        f.present = present;
        f.correct = present - ext_errors;
        f.captions_correct = present - cap_errors;
        f.captions_mixed = 0;
    }

    // Tables: extraction skipped 2 / no-tables 166 / 165 / 32 / 20;
    // captions skipped 2 / 166 / 190 / 23 / 4.
    for (int i = 0; i < n; ++i) {
        auto& t = records[i].tables;
        if (i < 2) {
            t.present = 1;
            t.correct = std::nullopt;
            t.captions_correct = std::nullopt;
            t.captions_mixed = 0;
            t.content_mixed = 0;
            continue;
        }
        if (i < 168) {
            t.present = 0;
            t.correct = 0;
            t.captions_correct = 0;
            t.captions_mixed = 0;
            t.content_mixed = 0;
            continue;
        }
        int j = i - 168; // 217 remaining records
        int ext_errors = spread(j, {{165, 0}, {32, 1}, {20, 2}});
        int cap_errors = spread(j, {{190, 0}, {23, 1}, {4, 2}});
        int present = std::max({ext_errors, cap_errors, 1});
        t.present = present;
        t.correct = present - ext_errors;
        t.captions_correct = present - cap_errors;
        t.captions_mixed = 0;
        t.content_mixed = 0;
    }

    // Text elements: header 3/170/172/40; heading 2/88/258/37; body 1/226/128/30.
    for (int i = 0; i < n; ++i) {
        int h = spread(i, {{3, -1}, {170, 0}, {172, 2}, {40, 6}});
        records[i].header_footer_errors = h < 0 ? std::nullopt : std::optional<int>(h);
        int s = spread(i, {{2, -1}, {88, 0}, {258, 3}, {37, 6}});
        records[i].section_heading_errors = s < 0 ? std::nullopt : std::optional<int>(s);
        int b = spread(i, {{1, -1}, {226, 0}, {128, 1}, {30, 7}});
        records[i].missing_paragraphs = b < 0 ? std::nullopt : std::optional<int>(b);
    }

    // Bibliography 7/15/313/3/47; inline citations 39/10/290/20/26.
    for (int i = 0; i < n; ++i) {
        int b = spread(i, {{7, 0}, {15, 1}, {313, 2}, {3, 3}, {47, 4}});
        switch (b) {
        case 0: records[i].bibliography_grade = std::nullopt; break;
        case 1: records[i].bibliography_grade = BibliographyGrade::NoBibliography; break;
        case 2: records[i].bibliography_grade = BibliographyGrade::AllCorrect; break;
        case 3: records[i].bibliography_grade = BibliographyGrade::HalfCorrect; break;
        default: records[i].bibliography_grade = BibliographyGrade::MostlyIncorrect; break;
        }
        int c = spread(i, {{39, 0}, {10, 1}, {290, 2}, {20, 3}, {26, 4}});
        switch (c) {
        case 0: records[i].inline_citation_grade = std::nullopt; break;
        case 1: records[i].inline_citation_grade = CitationGrade::NoBibliography; break;
        case 2: records[i].inline_citation_grade = CitationGrade::AllLinked; break;
        case 3: records[i].inline_citation_grade = CitationGrade::HalfLinked; break;
        default: records[i].inline_citation_grade = CitationGrade::MostUnlinked; break;
        }
    }

    // Readability per field (published per-field split; sums to 210/122/53).
    struct FieldRow {
        const char* field;
        int good, okay, bad;
    };
    static const FieldRow field_rows[] = {
        {"Art", 6, 1, 6},
        {"Biology", 12, 7, 4},
        {"Business", 6, 2, 6},
        {"Chemistry", 12, 5, 2},
        {"Computer science", 10, 7, 4},
        {"Economics", 6, 8, 6},
        {"Engineering", 15, 7, 1},
        {"Environmental science", 7, 8, 3},
        {"Geography", 9, 6, 2},
        {"Geology", 12, 8, 1},
        {"History", 5, 1, 1},
        {"Materials science", 15, 8, 1},
        {"Mathematics", 13, 8, 4},
        {"Medicine", 14, 12, 0},
        {"Other", 6, 2, 0},
        {"Philosophy", 7, 5, 0},
        {"Physics", 25, 10, 4},
        {"Political science", 6, 6, 1},
        {"Psychology", 11, 7, 4},
        {"Sociology", 13, 4, 3},
    };
    PublishedEvalFixture fixture;
    int index = 0;
    for (const auto& row : field_rows) {
        for (int g = 0; g < row.good + row.okay + row.bad; ++g) {
            auto& r = records[static_cast<std::size_t>(index)];
            r.readability = g < row.good                ? Readability::NoMajorProblems
                            : g < row.good + row.okay   ? Readability::SomeProblems
                                                        : Readability::LotsOfProblems;
            fixture.field_map[r.paper_id] = row.field;
            ++index;
        }
    }
    fixture.records = std::move(records);
    return fixture;
}

// ---------------------------------------------------------------------------
// Deterministic 10-document corpus (S2ORC-shaped JSON) used by the golden
// render tests and the batch determinism suite.
// ---------------------------------------------------------------------------

inline std::string corpus_paper_id(int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "corpus-%03d", i);
    return buf;
}

// Full-text side. Every document parses; features vary per index.
inline std::string make_corpus_fulltext(int i) {
    using json = nlohmann::ordered_json;
    json j;
    j["paper_id"] = corpus_paper_id(i);
    json body = json::array();
    json bib = json::object();
    auto para = [](const std::string& text, const std::string& section,
                   const std::string& sec_num = "") {
        json p;
        p["text"] = text;
        p["cite_spans"] = json::array();
        p["ref_spans"] = json::array();
        p["section"] = section;
        if (!sec_num.empty()) p["sec_num"] = sec_num;
        return p;
    };
    auto add_ref = [](json& p, std::size_t start, const std::string& text) {
        p["ref_spans"].push_back(json{{"start", start},
                                      {"end", start + text.size()},
                                      {"text", text},
                                      {"ref_id", nullptr}});
    };
    auto add_cite = [](json& p, std::size_t start, const std::string& text,
                       const std::string& key) {
        p["cite_spans"].push_back(
            json{{"start", start}, {"end", start + text.size()}, {"text", text}, {"ref_id", key}});
    };

    switch (i) {
    case 0: {
        j["title"] = "A minimal working paper";
        j["authors"] = json::array({json{{"first", "Ada"}, {"last", "Lovelace"}}});
        j["abstract"] = json::array({para("We present a very small document.", "Abstract")});
        body.push_back(para("The entire body is one paragraph.", "Introduction", "1"));
        break;
    }
    case 1: {
        j["title"] = "Mesh refinement for coastal flood models";
        j["authors"] = json::array({json{{"first", "Grace"}, {"last", "Hopper"}},
                                    json{{"first", "Alan"}, {"last", "Turing"}}});
        j["abstract"] = json::array({para("We study placement of figures.", "Abstract")});
        json p1 = para("In Figure 1, we show the mesh construction process.", "Overview", "1");
        add_ref(p1, 3, "Figure 1");
        json p2 = para("Results appear in Fig. 3 for all basins.", "Overview", "1");
        add_ref(p2, 18, "Fig. 3");
        body.push_back(p1);
        body.push_back(p2);
        body.push_back(para("We close with a discussion.", "Discussion", "2"));
        break;
    }
    case 2: {
        j["title"] = "Citation linking under missing bibliography entries";
        j["authors"] = json::array({json{{"first", "Edsger"}, {"last", "Dijkstra"}}});
        j["abstract"] = json::array({para("Citations may dangle.", "Abstract")});
        json p1 = para("Prior work [1] established the baseline.", "Related work", "1");
        add_cite(p1, 11, "[1]", "BIBREF0");
        json p2 = para("A dangling citation [9] stays plain text. See [1] again.", "Methods", "2");
        add_cite(p2, 20, "[9]", "BIBREF9");
        add_cite(p2, 46, "[1]", "BIBREF0");
        json p3 = para("And [1] cited once more here.", "Methods", "2");
        add_cite(p3, 4, "[1]", "BIBREF0");
        body.push_back(p1);
        body.push_back(p2);
        body.push_back(p3);
        bib["BIBREF0"] = json{{"title", "A baseline method"},
                              {"authors", json::array({json{{"first", "A"}, {"last", "Baseline"}}})},
                              {"year", 2018},
                              {"venue", "Journal of Baselines"}};
        break;
    }
    case 3: {
        j["title"] = "Display equations become placeholders";
        j["authors"] = json::array({json{{"first", "Emmy"}, {"last", "Noether"}}});
        j["abstract"] = json::array({para("Equations are not extracted.", "Abstract")});
        json p1 = para("The governing equation follows.", "Theory", "1");
        p1["display_equations"] = json::array({json{{"label", "1"}}});
        json p2 = para("A second equation concludes the section.", "Theory", "1");
        p2["display_equations"] = json::array({json{{"label", "2"}}});
        body.push_back(p1);
        body.push_back(p2);
        break;
    }
    case 4: {
        j["title"] = "Tables and unnumbered objects";
        j["authors"] = json::array({json{{"first", "Katherine"}, {"last", "Johnson"}}});
        j["abstract"] = json::array({para("We enumerate tables.", "Abstract")});
        json p1 = para("Results are summarized in Table 1 below.", "Results", "1");
        add_ref(p1, 25, "Table 1");
        body.push_back(p1);
        body.push_back(para("Closing remarks.", "Conclusion", "2"));
        break;
    }
    case 5: {
        j["title"] = "Placeholders for missing figures";
        j["authors"] = json::array({json{{"first", "Radia"}, {"last", "Perlman"}}});
        j["abstract"] = json::array({para("Gaps are made explicit.", "Abstract")});
        json p1 = para("As Figure 2 shows, the gap is inferred.", "Body", "1");
        add_ref(p1, 3, "Figure 2");
        body.push_back(p1);
        bib["BIBREF0"] =
            json{{"raw_text", "N. Wirth. Program development. https://example.org/long- paper"
                              " 1971."}};
        break;
    }
    case 6: {
        j["title"] = "Deeply nested numbering";
        j["authors"] = json::array({json{{"first", "Barbara"}, {"last", "Liskov"}}});
        j["abstract"] = json::array({para("Headings nest.", "Abstract")});
        json p1 = para("Top level introduction. See [1].", "Introduction", "1");
        add_cite(p1, 28, "[1]", "BIBREF0");
        body.push_back(p1);
        body.push_back(para("First nested part.", "Data", "1.1"));
        body.push_back(para("Second nested part. See [1].", "Sampling", "1.1.1"));
        json p4 = para("Back to the top level. [2] agrees.", "Conclusion", "2");
        add_cite(p4, 23, "[2]", "BIBREF1");
        body.push_back(p4);
        // fix the citation span inside the nested paragraph
        body[2]["cite_spans"].push_back(
            json{{"start", 24}, {"end", 27}, {"text", "[1]"}, {"ref_id", "BIBREF0"}});
        bib["BIBREF0"] = json{{"title", "Nested headings"}, {"year", 2015}};
        bib["BIBREF1"] = json{{"title", "Numbering schemes"},
                              {"year", 2017},
                              {"urls", json::array({"https://example.org/numbering"})}};
        break;
    }
    case 7: {
        j["title"] = "Unicode: flambé, naïveté, and 数学";
        j["authors"] = json::array({json{{"first", "José"}, {"last", "Álvarez"}}});
        json abs = para("Résumé of the approach [1].", "Abstract");
        abs["cite_spans"].push_back(
            json{{"start", 25}, {"end", 28}, {"text", "[1]"}, {"ref_id", "BIBREF0"}});
        j["abstract"] = json::array({abs});
        body.push_back(para("日本語のテキストが含まれます。", "序論", "1"));
        bib["BIBREF0"] = json{{"title", "Théorie générale"}, {"year", 1999}};
        break;
    }
    case 8: {
        j["title"] = "Abstract-only document";
        j["authors"] = json::array();
        j["abstract"] =
            json::array({para("This document has no body sections at all.", "Abstract")});
        break;
    }
    case 9: {
        j["title"] = "Objects mentioned in the abstract";
        j["authors"] = json::array({json{{"first", "Annie"}, {"last", "Easley"}}});
        json abs = para("Figure 1 summarizes the pipeline.", "Abstract");
        abs["ref_spans"].push_back(
            json{{"start", 0}, {"end", 8}, {"text", "Figure 1"}, {"ref_id", nullptr}});
        j["abstract"] = json::array({abs});
        body.push_back(para("Details follow the overview.", "Details", "1"));
        break;
    }
    default: break;
    }
    j["body_text"] = std::move(body);
    j["bib_entries"] = std::move(bib);
    j["ref_entries"] = json::object();
    return j.dump(2);
}

// Figure-manifest side; std::nullopt means no manifest file exists.
inline std::optional<std::string> make_corpus_figures(int i) {
    using json = nlohmann::ordered_json;
    json j;
    j["schema_version"] = 1;
    j["paper_id"] = corpus_paper_id(i);
    json objects = json::array();
    auto obj = [](const char* kind, std::optional<int> number, const std::string& caption) {
        json o;
        o["kind"] = kind;
        if (number) {
            o["number"] = *number;
        } else {
            o["number"] = nullptr;
        }
        o["caption"] = caption;
        o["extracted"] = false;
        return o;
    };
    switch (i) {
    case 0: return std::nullopt; // no manifest at all
    case 1:
        objects.push_back(obj("figure", 1, "Figure 1: Mesh construction."));
        objects.push_back(obj("figure", 2, "Figure 2: Refinement steps."));
        objects.push_back(obj("figure", 3, "Figure 3: Basin results."));
        break;
    case 2: break; // empty manifest
    case 3: break;
    case 4:
        objects.push_back(obj("table", 1, "Table 1: Summary of results."));
        objects.push_back(obj("figure", std::nullopt, "An unnumbered diagram."));
        break;
    case 5:
        objects.push_back(obj("figure", 1, "Figure 1: Before."));
        objects.push_back(obj("figure", 3, "Figure 3: After."));
        break;
    case 6: break;
    case 7: break;
    case 8:
        objects.push_back(obj("table", 2, "Table 2: Never mentioned."));
        break;
    case 9:
        objects.push_back(obj("figure", 1, "Figure 1: The pipeline."));
        objects.push_back(obj("figure", 2, "Figure 2: Stage detail."));
        break;
    default: break;
    }
    j["objects"] = std::move(objects);
    return j.dump(2);
}

// Writes the corpus into <dir>/fulltext and <dir>/figures.
inline void write_corpus(const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "fulltext");
    std::filesystem::create_directories(dir / "figures");
    for (int i = 0; i < 10; ++i) {
        std::string id = corpus_paper_id(i);
        {
            std::ofstream out(dir / "fulltext" / (id + ".json"), std::ios::binary);
            out << make_corpus_fulltext(i);
        }
        auto figures = make_corpus_figures(i);
        if (figures) {
            std::ofstream out(dir / "figures" / (id + ".figures.json"), std::ios::binary);
            out << *figures;
        }
    }
}

} // namespace testsupport
