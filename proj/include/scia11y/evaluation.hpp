#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "scia11y/csv.hpp"
#include "scia11y/errors.hpp"
#include "scia11y/strings.hpp"

namespace scia11y {

// ---------------------------------------------------------------------------
// Rubric record schema
// ---------------------------------------------------------------------------

enum class TriState { Yes, Partially, No };

enum class BibliographyGrade {
    AllCorrect,
    MostlyCorrect,
    HalfCorrect,
    MostlyIncorrect,
    Incorrect,
    NoBibliography
};

enum class CitationGrade {
    AllLinked,
    MajorityLinked,
    HalfLinked,
    MostUnlinked,
    NoneLinked,
    NoBibliography
};

enum class Readability { NoMajorProblems, SomeProblems, LotsOfProblems };

struct FigureCounts {
    std::optional<int> present;          // figures in the PDF
    std::optional<int> correct;          // correctly extracted
    std::optional<int> captions_correct; // captions correctly extracted
    std::optional<int> captions_mixed;   // captions mixed into body text
};

struct TableCounts {
    std::optional<int> present;
    std::optional<int> correct;
    std::optional<int> captions_correct;
    std::optional<int> captions_mixed;
    std::optional<int> content_mixed; // table content mixed into body text
};

// One annotator's rubric answers for one paper. A skipped record carries no
// grades; an unskipped record may leave individual numeric questions blank.
struct EvaluationRecord {
    std::string paper_id;
    std::string annotator_id;
    std::optional<std::string> skip_reason;

    TriState title_ok = TriState::Yes;
    TriState authors_ok = TriState::Yes;
    TriState abstract_ok = TriState::Yes;
    bool has_equations = false;
    FigureCounts figures;
    TableCounts tables;
    std::optional<int> header_footer_errors;
    std::optional<int> section_heading_errors;
    std::optional<int> missing_paragraphs;
    std::optional<BibliographyGrade> bibliography_grade;  // nullopt = question skipped
    std::optional<CitationGrade> inline_citation_grade;   // nullopt = question skipped
    Readability readability = Readability::NoMajorProblems;
    std::string comments;

    bool skipped() const { return skip_reason.has_value(); }
};

// --- enum <-> string -------------------------------------------------------

namespace detail {

inline const char* tri_state_str(TriState v) {
    switch (v) {
    case TriState::Yes: return "yes";
    case TriState::Partially: return "partially";
    case TriState::No: return "no";
    }
    return "";
}

inline std::optional<TriState> tri_state_parse(std::string_view s) {
    std::string v = strings::to_lower(strings::trim(s));
    if (v == "yes" || v == "y") return TriState::Yes;
    if (v == "partially" || v == "p") return TriState::Partially;
    if (v == "no" || v == "n") return TriState::No;
    return std::nullopt;
}

inline const char* bibliography_grade_str(BibliographyGrade v) {
    switch (v) {
    case BibliographyGrade::AllCorrect: return "all_correct";
    case BibliographyGrade::MostlyCorrect: return "mostly_correct";
    case BibliographyGrade::HalfCorrect: return "half_correct";
    case BibliographyGrade::MostlyIncorrect: return "mostly_incorrect";
    case BibliographyGrade::Incorrect: return "incorrect";
    case BibliographyGrade::NoBibliography: return "no_bibliography";
    }
    return "";
}

inline std::optional<BibliographyGrade> bibliography_grade_parse(std::string_view s) {
    std::string v = strings::to_lower(strings::trim(s));
    if (v == "all_correct") return BibliographyGrade::AllCorrect;
    if (v == "mostly_correct") return BibliographyGrade::MostlyCorrect;
    if (v == "half_correct") return BibliographyGrade::HalfCorrect;
    if (v == "mostly_incorrect") return BibliographyGrade::MostlyIncorrect;
    if (v == "incorrect") return BibliographyGrade::Incorrect;
    if (v == "no_bibliography") return BibliographyGrade::NoBibliography;
    return std::nullopt;
}

inline const char* citation_grade_str(CitationGrade v) {
    switch (v) {
    case CitationGrade::AllLinked: return "all_linked";
    case CitationGrade::MajorityLinked: return "majority_linked";
    case CitationGrade::HalfLinked: return "half_linked";
    case CitationGrade::MostUnlinked: return "most_unlinked";
    case CitationGrade::NoneLinked: return "none_linked";
    case CitationGrade::NoBibliography: return "no_bibliography";
    }
    return "";
}

inline std::optional<CitationGrade> citation_grade_parse(std::string_view s) {
    std::string v = strings::to_lower(strings::trim(s));
    if (v == "all_linked") return CitationGrade::AllLinked;
    if (v == "majority_linked") return CitationGrade::MajorityLinked;
    if (v == "half_linked") return CitationGrade::HalfLinked;
    if (v == "most_unlinked") return CitationGrade::MostUnlinked;
    if (v == "none_linked") return CitationGrade::NoneLinked;
    if (v == "no_bibliography") return CitationGrade::NoBibliography;
    return std::nullopt;
}

inline const char* readability_str(Readability v) {
    switch (v) {
    case Readability::NoMajorProblems: return "no_major_problems";
    case Readability::SomeProblems: return "some_problems";
    case Readability::LotsOfProblems: return "lots_of_problems";
    }
    return "";
}

inline std::optional<Readability> readability_parse(std::string_view s) {
    std::string v = strings::to_lower(strings::trim(s));
    if (v == "no_major_problems") return Readability::NoMajorProblems;
    if (v == "some_problems") return Readability::SomeProblems;
    if (v == "lots_of_problems") return Readability::LotsOfProblems;
    return std::nullopt;
}

} // namespace detail

inline constexpr int kEvaluationSchemaVersion = 1;

// Validates one record JSON; violations are rejected with field-level
// messages joined into the error text.
inline EvaluationRecord validate_record(const nlohmann::ordered_json& j) {
    std::vector<std::string> problems;
    EvaluationRecord record;
    if (!j.is_object()) throw InvalidRecordError("record is not a JSON object");

    if (j.contains("schema_version") && j["schema_version"].is_number_integer() &&
        j["schema_version"].get<int>() != kEvaluationSchemaVersion) {
        problems.push_back("schema_version: unsupported version");
    }

    auto get_string = [&](const char* key) -> std::string {
        if (!j.contains(key) || !j[key].is_string()) return {};
        return j[key].get<std::string>();
    };
    record.paper_id = get_string("paper_id");
    record.annotator_id = get_string("annotator_id");
    if (record.paper_id.empty()) problems.push_back("paper_id: required");
    if (record.annotator_id.empty()) problems.push_back("annotator_id: required");

    const bool skipped = j.contains("skipped") && !j["skipped"].is_null();
    if (skipped) {
        if (j["skipped"].is_string() && !j["skipped"].get<std::string>().empty()) {
            record.skip_reason = j["skipped"].get<std::string>();
        } else {
            problems.push_back("skipped: must be a nonempty reason string");
        }
        static const char* kGradeKeys[] = {
            "title_ok",  "authors_ok",          "abstract_ok",           "has_equations",
            "figures",   "tables",              "header_footer_errors",  "section_heading_errors",
            "missing_paragraphs", "bibliography_grade", "inline_citation_grade", "readability"};
        for (const char* key : kGradeKeys) {
            if (j.contains(key) && !j[key].is_null()) {
                problems.push_back(std::string(key) + ": not allowed on a skipped record");
            }
        }
        record.comments = get_string("comments");
        if (!problems.empty()) {
            std::string msg;
            for (const auto& p : problems) {
                if (!msg.empty()) msg += "; ";
                msg += p;
            }
            throw InvalidRecordError(msg);
        }
        return record;
    }

    auto require_enum = [&](const char* key, auto parse_fn, auto& target) {
        if (!j.contains(key) || !j[key].is_string()) {
            problems.push_back(std::string(key) + ": required");
            return;
        }
        auto parsed = parse_fn(j[key].get<std::string>());
        if (!parsed) {
            problems.push_back(std::string(key) + ": unrecognized value \"" +
                               j[key].get<std::string>() + "\"");
            return;
        }
        target = *parsed;
    };
    require_enum("title_ok", detail::tri_state_parse, record.title_ok);
    require_enum("authors_ok", detail::tri_state_parse, record.authors_ok);
    require_enum("abstract_ok", detail::tri_state_parse, record.abstract_ok);
    require_enum("readability", detail::readability_parse, record.readability);

    if (j.contains("has_equations")) {
        if (j["has_equations"].is_boolean()) {
            record.has_equations = j["has_equations"].get<bool>();
        } else {
            problems.push_back("has_equations: must be a boolean");
        }
    } else {
        problems.push_back("has_equations: required");
    }

    auto optional_count = [&](const nlohmann::ordered_json& parent, const char* key,
                              const std::string& path) -> std::optional<int> {
        if (!parent.contains(key) || parent[key].is_null()) return std::nullopt;
        if (!parent[key].is_number_integer()) {
            problems.push_back(path + ": must be an integer or null");
            return std::nullopt;
        }
        long long v = parent[key].get<long long>();
        if (v < 0) {
            problems.push_back(path + ": must be >= 0");
            return std::nullopt;
        }
        if (v > 1000000) {
            problems.push_back(path + ": implausibly large");
            return std::nullopt;
        }
        return static_cast<int>(v);
    };

    if (j.contains("figures") && j["figures"].is_object()) {
        const auto& f = j["figures"];
        record.figures.present = optional_count(f, "present", "figures.present");
        record.figures.correct = optional_count(f, "correct", "figures.correct");
        record.figures.captions_correct = optional_count(f, "captions_correct", "figures.captions_correct");
        record.figures.captions_mixed = optional_count(f, "captions_mixed", "figures.captions_mixed");
    }
    if (j.contains("tables") && j["tables"].is_object()) {
        const auto& t = j["tables"];
        record.tables.present = optional_count(t, "present", "tables.present");
        record.tables.correct = optional_count(t, "correct", "tables.correct");
        record.tables.captions_correct = optional_count(t, "captions_correct", "tables.captions_correct");
        record.tables.captions_mixed = optional_count(t, "captions_mixed", "tables.captions_mixed");
        record.tables.content_mixed = optional_count(t, "content_mixed", "tables.content_mixed");
    }
    record.header_footer_errors = optional_count(j, "header_footer_errors", "header_footer_errors");
    record.section_heading_errors =
        optional_count(j, "section_heading_errors", "section_heading_errors");
    record.missing_paragraphs = optional_count(j, "missing_paragraphs", "missing_paragraphs");

    if (j.contains("bibliography_grade") && !j["bibliography_grade"].is_null()) {
        if (j["bibliography_grade"].is_string()) {
            record.bibliography_grade =
                detail::bibliography_grade_parse(j["bibliography_grade"].get<std::string>());
            if (!record.bibliography_grade) {
                problems.push_back("bibliography_grade: unrecognized value");
            }
        } else {
            problems.push_back("bibliography_grade: must be a string or null");
        }
    }
    if (j.contains("inline_citation_grade") && !j["inline_citation_grade"].is_null()) {
        if (j["inline_citation_grade"].is_string()) {
            record.inline_citation_grade =
                detail::citation_grade_parse(j["inline_citation_grade"].get<std::string>());
            if (!record.inline_citation_grade) {
                problems.push_back("inline_citation_grade: unrecognized value");
            }
        } else {
            problems.push_back("inline_citation_grade: must be a string or null");
        }
    }
    record.comments = get_string("comments");

    // Cross-field invariants.
    auto check_bound = [&](const std::optional<int>& part, const std::optional<int>& whole,
                           const char* part_name, const char* whole_name) {
        if (part && !whole) {
            problems.push_back(std::string(part_name) + ": requires " + whole_name);
        } else if (part && whole && *part > *whole) {
            problems.push_back(std::string(part_name) + ": exceeds " + whole_name + " (" +
                               std::to_string(*part) + " > " + std::to_string(*whole) + ")");
        }
    };
    check_bound(record.figures.correct, record.figures.present, "figures.correct", "figures.present");
    check_bound(record.figures.captions_correct, record.figures.present, "figures.captions_correct",
                "figures.present");
    check_bound(record.tables.correct, record.tables.present, "tables.correct", "tables.present");
    check_bound(record.tables.captions_correct, record.tables.present, "tables.captions_correct",
                "tables.present");

    if (!problems.empty()) {
        std::string msg;
        for (const auto& p : problems) {
            if (!msg.empty()) msg += "; ";
            msg += p;
        }
        throw InvalidRecordError(msg);
    }
    return record;
}

inline EvaluationRecord parse_record(std::string_view raw) {
    auto j = nlohmann::ordered_json::parse(raw, nullptr, false);
    if (j.is_discarded()) throw InvalidRecordError("record is not valid JSON");
    return validate_record(j);
}

inline nlohmann::ordered_json record_to_json(const EvaluationRecord& r) {
    nlohmann::ordered_json j;
    j["schema_version"] = kEvaluationSchemaVersion;
    j["paper_id"] = r.paper_id;
    j["annotator_id"] = r.annotator_id;
    if (r.skipped()) {
        j["skipped"] = *r.skip_reason;
        if (!r.comments.empty()) j["comments"] = r.comments;
        return j;
    }
    j["title_ok"] = detail::tri_state_str(r.title_ok);
    j["authors_ok"] = detail::tri_state_str(r.authors_ok);
    j["abstract_ok"] = detail::tri_state_str(r.abstract_ok);
    j["has_equations"] = r.has_equations;
    auto put_count = [](nlohmann::ordered_json& parent, const char* key,
                        const std::optional<int>& v) {
        if (v) {
            parent[key] = *v;
        } else {
            parent[key] = nullptr;
        }
    };
    nlohmann::ordered_json figures;
    put_count(figures, "present", r.figures.present);
    put_count(figures, "correct", r.figures.correct);
    put_count(figures, "captions_correct", r.figures.captions_correct);
    put_count(figures, "captions_mixed", r.figures.captions_mixed);
    j["figures"] = std::move(figures);
    nlohmann::ordered_json tables;
    put_count(tables, "present", r.tables.present);
    put_count(tables, "correct", r.tables.correct);
    put_count(tables, "captions_correct", r.tables.captions_correct);
    put_count(tables, "captions_mixed", r.tables.captions_mixed);
    put_count(tables, "content_mixed", r.tables.content_mixed);
    j["tables"] = std::move(tables);
    put_count(j, "header_footer_errors", r.header_footer_errors);
    put_count(j, "section_heading_errors", r.section_heading_errors);
    put_count(j, "missing_paragraphs", r.missing_paragraphs);
    if (r.bibliography_grade) {
        j["bibliography_grade"] = detail::bibliography_grade_str(*r.bibliography_grade);
    } else {
        j["bibliography_grade"] = nullptr;
    }
    if (r.inline_citation_grade) {
        j["inline_citation_grade"] = detail::citation_grade_str(*r.inline_citation_grade);
    } else {
        j["inline_citation_grade"] = nullptr;
    }
    j["readability"] = detail::readability_str(r.readability);
    if (!r.comments.empty()) j["comments"] = r.comments;
    return j;
}

// ---------------------------------------------------------------------------
// Reconciliation: one record per paper
// ---------------------------------------------------------------------------

struct ReconcilePolicy {
    enum class Kind { FirstAnnotator, RandomWithSeed };
    Kind kind = Kind::FirstAnnotator;
    std::uint64_t seed = 0;
};

// Selects one non-skipped record per paper. FirstAnnotator picks the smallest
// annotator_id; RandomWithSeed draws deterministically per paper.
inline std::vector<EvaluationRecord> reconcile_records(const std::vector<EvaluationRecord>& records,
                                                       const ReconcilePolicy& policy = {}) {
    std::map<std::string, std::vector<const EvaluationRecord*>> by_paper;
    for (const auto& r : records) {
        if (r.skipped()) continue;
        by_paper[r.paper_id].push_back(&r);
    }
    std::vector<EvaluationRecord> out;
    for (auto& [paper_id, candidates] : by_paper) {
        std::sort(candidates.begin(), candidates.end(),
                  [](const EvaluationRecord* a, const EvaluationRecord* b) {
                      return a->annotator_id < b->annotator_id;
                  });
        const EvaluationRecord* chosen = candidates.front();
        if (policy.kind == ReconcilePolicy::Kind::RandomWithSeed && candidates.size() > 1) {
            std::mt19937_64 rng(policy.seed ^ strings::fnv1a64(paper_id));
            std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
            chosen = candidates[pick(rng)];
        }
        out.push_back(*chosen);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Error-category aggregation (Table 11 layout)
// ---------------------------------------------------------------------------

struct BucketRow {
    std::string element;
    std::vector<std::pair<std::string, std::size_t>> buckets; // (bucket name, count)

    std::size_t count_of(std::string_view bucket) const {
        for (const auto& [name, count] : buckets) {
            if (name == bucket) return count;
        }
        return 0;
    }
};

struct ElementTable {
    std::size_t n_papers = 0;
    std::vector<BucketRow> rows;

    const BucketRow* row(std::string_view element) const {
        for (const auto& r : rows) {
            if (r.element == element) return &r;
        }
        return nullptr;
    }
};

namespace detail {

inline BucketRow tri_state_row(const std::string& element,
                               const std::vector<EvaluationRecord>& records,
                               TriState EvaluationRecord::* field) {
    BucketRow row{element, {{"yes", 0}, {"partially", 0}, {"no", 0}}};
    for (const auto& r : records) {
        switch (r.*field) {
        case TriState::Yes: ++row.buckets[0].second; break;
        case TriState::Partially: ++row.buckets[1].second; break;
        case TriState::No: ++row.buckets[2].second; break;
        }
    }
    return row;
}

template <typename GetPresent, typename GetAnswer>
inline BucketRow object_error_row(const std::string& element, const std::string& none_bucket,
                                  const std::vector<EvaluationRecord>& records,
                                  GetPresent get_present, GetAnswer get_answer) {
    BucketRow row{element,
                  {{"skipped", 0}, {none_bucket, 0}, {"no_errors", 0}, {"one_error", 0},
                   {"more_than_one_error", 0}}};
    for (const auto& r : records) {
        std::optional<int> present = get_present(r);
        std::optional<int> answer = get_answer(r);
        if (!present || !answer) {
            ++row.buckets[0].second;
        } else if (*present == 0) {
            ++row.buckets[1].second;
        } else {
            int errors = *present - *answer;
            if (errors <= 0) {
                ++row.buckets[2].second;
            } else if (errors == 1) {
                ++row.buckets[3].second;
            } else {
                ++row.buckets[4].second;
            }
        }
    }
    return row;
}

inline BucketRow text_error_row(const std::string& element,
                                const std::vector<EvaluationRecord>& records,
                                std::optional<int> EvaluationRecord::* field) {
    BucketRow row{element,
                  {{"skipped", 0}, {"no_errors", 0}, {"one_to_five_errors", 0},
                   {"more_than_five_errors", 0}}};
    for (const auto& r : records) {
        const std::optional<int>& v = r.*field;
        if (!v) {
            ++row.buckets[0].second;
        } else if (*v == 0) {
            ++row.buckets[1].second;
        } else if (*v <= 5) {
            ++row.buckets[2].second;
        } else {
            ++row.buckets[3].second;
        }
    }
    return row;
}

} // namespace detail

// Buckets every error category the way the published element table does:
// metadata elements as yes/partially/no; figure and table elements as
// skipped / none present / no errors / 1 error / >1 error; text elements as
// skipped / no errors / 1-5 / >5; bibliography elements coarsened to five
// buckets; readability as good/okay/bad.
inline ElementTable aggregate_errors(const std::vector<EvaluationRecord>& input,
                                     const ReconcilePolicy& policy = {}) {
    std::vector<EvaluationRecord> records = reconcile_records(input, policy);
    if (records.empty()) throw EmptyInputError("no non-skipped evaluation records");

    ElementTable table;
    table.n_papers = records.size();

    table.rows.push_back(detail::tri_state_row("title", records, &EvaluationRecord::title_ok));
    table.rows.push_back(detail::tri_state_row("authors", records, &EvaluationRecord::authors_ok));
    table.rows.push_back(detail::tri_state_row("abstract", records, &EvaluationRecord::abstract_ok));

    table.rows.push_back(detail::object_error_row(
        "figure_extraction_errors", "no_figures", records,
        [](const EvaluationRecord& r) { return r.figures.present; },
        [](const EvaluationRecord& r) { return r.figures.correct; }));
    table.rows.push_back(detail::object_error_row(
        "figure_caption_errors", "no_figures", records,
        [](const EvaluationRecord& r) { return r.figures.present; },
        [](const EvaluationRecord& r) { return r.figures.captions_correct; }));
    table.rows.push_back(detail::object_error_row(
        "table_extraction_errors", "no_tables", records,
        [](const EvaluationRecord& r) { return r.tables.present; },
        [](const EvaluationRecord& r) { return r.tables.correct; }));
    table.rows.push_back(detail::object_error_row(
        "table_caption_errors", "no_tables", records,
        [](const EvaluationRecord& r) { return r.tables.present; },
        [](const EvaluationRecord& r) { return r.tables.captions_correct; }));

    table.rows.push_back(detail::text_error_row("header_footer_errors", records,
                                                &EvaluationRecord::header_footer_errors));
    table.rows.push_back(detail::text_error_row("section_heading_errors", records,
                                                &EvaluationRecord::section_heading_errors));
    table.rows.push_back(detail::text_error_row("body_paragraph_errors", records,
                                                &EvaluationRecord::missing_paragraphs));

    {
        BucketRow row{"bibliography_extraction",
                      {{"skipped_or_poor", 0}, {"no_bibliography", 0}, {"all_or_most_correct", 0},
                       {"half_correct", 0}, {"mostly_incorrect", 0}}};
        for (const auto& r : records) {
            if (!r.bibliography_grade) {
                ++row.buckets[0].second;
                continue;
            }
            switch (*r.bibliography_grade) {
            case BibliographyGrade::NoBibliography: ++row.buckets[1].second; break;
            case BibliographyGrade::AllCorrect:
            case BibliographyGrade::MostlyCorrect: ++row.buckets[2].second; break;
            case BibliographyGrade::HalfCorrect: ++row.buckets[3].second; break;
            case BibliographyGrade::MostlyIncorrect:
            case BibliographyGrade::Incorrect: ++row.buckets[4].second; break;
            }
        }
        table.rows.push_back(std::move(row));
    }
    {
        BucketRow row{"inline_citation_linking",
                      {{"skipped_or_poor", 0}, {"no_bibliography", 0}, {"all_or_most_correct", 0},
                       {"half_correct", 0}, {"mostly_incorrect", 0}}};
        for (const auto& r : records) {
            if (!r.inline_citation_grade) {
                ++row.buckets[0].second;
                continue;
            }
            switch (*r.inline_citation_grade) {
            case CitationGrade::NoBibliography: ++row.buckets[1].second; break;
            case CitationGrade::AllLinked:
            case CitationGrade::MajorityLinked: ++row.buckets[2].second; break;
            case CitationGrade::HalfLinked: ++row.buckets[3].second; break;
            case CitationGrade::MostUnlinked:
            case CitationGrade::NoneLinked: ++row.buckets[4].second; break;
            }
        }
        table.rows.push_back(std::move(row));
    }
    {
        BucketRow row{"overall_readability", {{"good", 0}, {"okay", 0}, {"bad", 0}}};
        for (const auto& r : records) {
            switch (r.readability) {
            case Readability::NoMajorProblems: ++row.buckets[0].second; break;
            case Readability::SomeProblems: ++row.buckets[1].second; break;
            case Readability::LotsOfProblems: ++row.buckets[2].second; break;
            }
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

// ---------------------------------------------------------------------------
// Readability by field of study (Table 12 layout)
// ---------------------------------------------------------------------------

struct ReadabilityRow {
    std::string field;
    std::size_t n = 0;
    std::size_t good = 0;
    std::size_t okay = 0;
    std::size_t bad = 0;
};

// Papers whose id is missing from the field map land in "Other". The first
// row aggregates all papers; fields follow alphabetically.
inline std::vector<ReadabilityRow> readability_by_field(
    const std::vector<EvaluationRecord>& input, const std::map<std::string, std::string>& field_map,
    const ReconcilePolicy& policy = {}) {
    std::vector<EvaluationRecord> records = reconcile_records(input, policy);
    if (records.empty()) throw EmptyInputError("no non-skipped evaluation records");

    std::map<std::string, ReadabilityRow> by_field;
    ReadabilityRow all;
    all.field = "All papers";
    for (const auto& r : records) {
        auto it = field_map.find(r.paper_id);
        std::string field = it == field_map.end() ? std::string("Other") : it->second;
        ReadabilityRow& row = by_field[field];
        row.field = field;
        ++row.n;
        ++all.n;
        switch (r.readability) {
        case Readability::NoMajorProblems:
            ++row.good;
            ++all.good;
            break;
        case Readability::SomeProblems:
            ++row.okay;
            ++all.okay;
            break;
        case Readability::LotsOfProblems:
            ++row.bad;
            ++all.bad;
            break;
        }
    }
    std::vector<ReadabilityRow> rows;
    rows.push_back(all);
    for (const auto& [field, row] : by_field) rows.push_back(row);
    return rows;
}

// ---------------------------------------------------------------------------
// Agreement suite (Table 5)
// ---------------------------------------------------------------------------

enum class AgreementMetric { PercentAgreement, CohensKappa, ICC, MeanDifference };

inline const char* agreement_metric_name(AgreementMetric m) {
    switch (m) {
    case AgreementMetric::PercentAgreement: return "percent_agreement";
    case AgreementMetric::CohensKappa: return "cohens_kappa";
    case AgreementMetric::ICC: return "icc";
    case AgreementMetric::MeanDifference: return "mean_difference";
    }
    return "unknown";
}

struct AgreementResult {
    AgreementMetric metric = AgreementMetric::PercentAgreement;
    double value = 0.0;
    std::optional<double> sd; // only for MeanDifference
    std::size_t n_items = 0;
    bool degenerate = false;
    std::string note;
};

template <typename T>
inline AgreementResult percent_agreement(const std::vector<T>& a, const std::vector<T>& b) {
    if (a.size() != b.size()) {
        throw LengthMismatchError("percent_agreement inputs differ in length");
    }
    if (a.empty()) throw DegenerateInputError("percent_agreement requires at least 1 item");
    std::size_t matches = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == b[i]) ++matches;
    }
    AgreementResult result;
    result.metric = AgreementMetric::PercentAgreement;
    result.value = static_cast<double>(matches) / static_cast<double>(a.size());
    result.n_items = a.size();
    return result;
}

// kappa = (p_o - p_e) / (1 - p_e) with expected agreement from the two
// raters' marginals. With p_e = 1 the statistic is undefined; the result is
// marked degenerate and carries the raw agreement instead.
inline AgreementResult cohens_kappa(const std::vector<std::string>& a,
                                    const std::vector<std::string>& b) {
    if (a.size() != b.size()) throw LengthMismatchError("cohens_kappa inputs differ in length");
    if (a.empty()) throw DegenerateInputError("cohens_kappa requires at least 1 item");
    const double n = static_cast<double>(a.size());
    std::map<std::string, std::size_t> marg_a, marg_b;
    std::size_t observed = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++marg_a[a[i]];
        ++marg_b[b[i]];
        if (a[i] == b[i]) ++observed;
    }
    double p_o = static_cast<double>(observed) / n;
    double p_e = 0.0;
    for (const auto& [label, count_a] : marg_a) {
        auto it = marg_b.find(label);
        if (it != marg_b.end()) {
            p_e += (static_cast<double>(count_a) / n) * (static_cast<double>(it->second) / n);
        }
    }
    AgreementResult result;
    result.metric = AgreementMetric::CohensKappa;
    result.n_items = a.size();
    if (p_e >= 1.0) {
        result.degenerate = true;
        result.value = p_o;
        result.note = "expected agreement is 1; reporting raw agreement";
        return result;
    }
    result.value = (p_o - p_e) / (1.0 - p_e);
    return result;
}

// Two-way random effects, absolute agreement, single rater: ICC(A,1).
// With n items, k = 2 raters and the usual mean squares from the two-way
// decomposition (MSR rows/items, MSC columns/raters, MSE residual):
//
//   ICC(A,1) = (MSR - MSE) / (MSR + (k-1) MSE + (k/n) (MSC - MSE))
//
// where SSR = k * sum_i (rowmean_i - grand)^2, SSC = n * sum_j (colmean_j -
// grand)^2, SSE = SST - SSR - SSC, MSR = SSR/(n-1), MSC = SSC/(k-1), and
// MSE = SSE/((n-1)(k-1)). Absolute agreement charges rater offsets to the
// denominator via the MSC term.
inline AgreementResult icc(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw LengthMismatchError("icc inputs differ in length");
    const std::size_t n = a.size();
    if (n < 2) throw DegenerateInputError("icc requires at least 2 items");
    const double k = 2.0;
    const double nd = static_cast<double>(n);
    double grand = 0.0;
    for (std::size_t i = 0; i < n; ++i) grand += a[i] + b[i];
    grand /= (nd * k);
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_a += a[i];
        mean_b += b[i];
    }
    mean_a /= nd;
    mean_b /= nd;

    double ss_total = 0.0, ss_rows = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row_mean = (a[i] + b[i]) / 2.0;
        ss_rows += (row_mean - grand) * (row_mean - grand);
        ss_total += (a[i] - grand) * (a[i] - grand) + (b[i] - grand) * (b[i] - grand);
    }
    ss_rows *= k;
    double ss_cols = nd * ((mean_a - grand) * (mean_a - grand) + (mean_b - grand) * (mean_b - grand));
    double ss_error = ss_total - ss_rows - ss_cols;
    if (ss_error < 0.0 && ss_error > -1e-12) ss_error = 0.0;

    if (ss_total == 0.0) throw DegenerateInputError("icc input has zero total variance");

    double ms_rows = ss_rows / (nd - 1.0);
    double ms_cols = ss_cols / (k - 1.0);
    double ms_error = ss_error / ((nd - 1.0) * (k - 1.0));

    double denominator = ms_rows + (k - 1.0) * ms_error + (k / nd) * (ms_cols - ms_error);
    AgreementResult result;
    result.metric = AgreementMetric::ICC;
    result.n_items = n;
    if (denominator == 0.0) {
        result.degenerate = true;
        result.note = "zero denominator in mean-squares decomposition";
        return result;
    }
    result.value = (ms_rows - ms_error) / denominator;
    return result;
}

// Mean and sample standard deviation of |a_i - b_i|.
inline AgreementResult mean_difference(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw LengthMismatchError("mean_difference inputs differ in length");
    if (a.empty()) throw DegenerateInputError("mean_difference requires at least 1 item");
    const std::size_t n = a.size();
    std::vector<double> diffs(n);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        diffs[i] = std::fabs(a[i] - b[i]);
        mean += diffs[i];
    }
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double d : diffs) ss += (d - mean) * (d - mean);
    AgreementResult result;
    result.metric = AgreementMetric::MeanDifference;
    result.value = mean;
    result.sd = n > 1 ? std::sqrt(ss / (static_cast<double>(n) - 1.0)) : 0.0;
    result.n_items = n;
    return result;
}

// ---------------------------------------------------------------------------
// Full inter-rater table over two record sets (Table 5 layout)
// ---------------------------------------------------------------------------

struct AgreementRow {
    std::string question;
    bool numeric = false;
    std::size_t n = 0;         // overlap items answered by both raters
    double agreement = 0.0;    // exact-match proportion
    std::optional<double> kappa;
    std::optional<double> icc_value;
    std::optional<double> mean_diff;
    std::optional<double> mean_diff_sd;
    std::string note;
};

namespace detail {

inline std::optional<int> derived_errors(const std::optional<int>& present,
                                         const std::optional<int>& correct) {
    if (!present || !correct) return std::nullopt;
    return *present - *correct;
}

} // namespace detail

// Computes the agreement suite over the papers annotated by both raters.
// Categorical questions get percent agreement and Cohen's kappa; numeric
// questions get exact-match agreement, ICC(A,1) and the mean absolute
// difference. Throws EmptyInput when the two sets share no papers.
inline std::vector<AgreementRow> agreement_table(const std::vector<EvaluationRecord>& rater_a,
                                                 const std::vector<EvaluationRecord>& rater_b) {
    std::map<std::string, const EvaluationRecord*> by_paper_a;
    for (const auto& r : rater_a) {
        if (!r.skipped()) by_paper_a.emplace(r.paper_id, &r);
    }
    std::vector<std::pair<const EvaluationRecord*, const EvaluationRecord*>> pairs;
    for (const auto& r : rater_b) {
        if (r.skipped()) continue;
        auto it = by_paper_a.find(r.paper_id);
        if (it != by_paper_a.end()) pairs.emplace_back(it->second, &r);
    }
    if (pairs.empty()) {
        throw EmptyInputError("the two record sets have no overlapping papers");
    }

    std::vector<AgreementRow> rows;

    auto categorical = [&rows, &pairs](const std::string& question, auto extract) {
        std::vector<std::string> a, b;
        for (const auto& [ra, rb] : pairs) {
            auto va = extract(*ra);
            auto vb = extract(*rb);
            if (!va || !vb) continue;
            a.push_back(*va);
            b.push_back(*vb);
        }
        AgreementRow row;
        row.question = question;
        row.numeric = false;
        row.n = a.size();
        if (a.empty()) {
            row.note = "no items answered by both raters";
            rows.push_back(std::move(row));
            return;
        }
        row.agreement = percent_agreement(a, b).value;
        AgreementResult k = cohens_kappa(a, b);
        if (k.degenerate) {
            row.note = k.note;
        } else {
            row.kappa = k.value;
        }
        rows.push_back(std::move(row));
    };

    auto numeric = [&rows, &pairs](const std::string& question, auto extract) {
        std::vector<double> a, b;
        for (const auto& [ra, rb] : pairs) {
            std::optional<int> va = extract(*ra);
            std::optional<int> vb = extract(*rb);
            if (!va || !vb) continue;
            a.push_back(static_cast<double>(*va));
            b.push_back(static_cast<double>(*vb));
        }
        AgreementRow row;
        row.question = question;
        row.numeric = true;
        row.n = a.size();
        if (a.empty()) {
            row.note = "no items answered by both raters";
            rows.push_back(std::move(row));
            return;
        }
        row.agreement = percent_agreement(a, b).value;
        try {
            AgreementResult i = icc(a, b);
            if (i.degenerate) {
                row.note = i.note;
            } else {
                row.icc_value = i.value;
            }
        } catch (const DegenerateInputError& e) {
            row.note = e.what();
        }
        AgreementResult md = mean_difference(a, b);
        row.mean_diff = md.value;
        row.mean_diff_sd = md.sd;
        rows.push_back(std::move(row));
    };

    auto tri = [](TriState EvaluationRecord::* field) {
        return [field](const EvaluationRecord& r) -> std::optional<std::string> {
            return std::string(detail::tri_state_str(r.*field));
        };
    };
    categorical("title", tri(&EvaluationRecord::title_ok));
    categorical("authors", tri(&EvaluationRecord::authors_ok));
    categorical("abstract", tri(&EvaluationRecord::abstract_ok));

    numeric("number_of_figures", [](const EvaluationRecord& r) { return r.figures.present; });
    numeric("figure_extraction_errors", [](const EvaluationRecord& r) {
        return detail::derived_errors(r.figures.present, r.figures.correct);
    });
    numeric("figure_caption_errors", [](const EvaluationRecord& r) {
        return detail::derived_errors(r.figures.present, r.figures.captions_correct);
    });
    numeric("number_of_tables", [](const EvaluationRecord& r) { return r.tables.present; });
    numeric("table_extraction_errors", [](const EvaluationRecord& r) {
        return detail::derived_errors(r.tables.present, r.tables.correct);
    });
    numeric("table_caption_errors", [](const EvaluationRecord& r) {
        return detail::derived_errors(r.tables.present, r.tables.captions_correct);
    });
    numeric("header_footer_errors",
            [](const EvaluationRecord& r) { return r.header_footer_errors; });
    numeric("section_heading_errors",
            [](const EvaluationRecord& r) { return r.section_heading_errors; });
    numeric("body_paragraph_errors",
            [](const EvaluationRecord& r) { return r.missing_paragraphs; });

    categorical("bibliography_extraction",
                [](const EvaluationRecord& r) -> std::optional<std::string> {
                    if (!r.bibliography_grade) return std::nullopt;
                    return std::string(detail::bibliography_grade_str(*r.bibliography_grade));
                });
    categorical("inline_citation_linking",
                [](const EvaluationRecord& r) -> std::optional<std::string> {
                    if (!r.inline_citation_grade) return std::nullopt;
                    return std::string(detail::citation_grade_str(*r.inline_citation_grade));
                });
    categorical("overall_score", [](const EvaluationRecord& r) -> std::optional<std::string> {
        return std::string(detail::readability_str(r.readability));
    });

    return rows;
}

// ---------------------------------------------------------------------------
// CSV import/export (mirrors the original spreadsheet workflow)
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& record_csv_header() {
    static const std::vector<std::string> header = {
        "paper_id",
        "annotator_id",
        "skipped",
        "title_ok",
        "authors_ok",
        "abstract_ok",
        "has_equations",
        "figures_present",
        "figures_correct",
        "figure_captions_correct",
        "figure_captions_mixed",
        "tables_present",
        "tables_correct",
        "table_captions_correct",
        "table_captions_mixed",
        "table_content_mixed",
        "header_footer_errors",
        "section_heading_errors",
        "missing_paragraphs",
        "bibliography_grade",
        "inline_citation_grade",
        "readability",
        "comments"};
    return header;
}

inline std::string records_to_csv(const std::vector<EvaluationRecord>& records) {
    std::ostringstream out;
    csv::write_row(out, record_csv_header());
    auto count_cell = [](const std::optional<int>& v) {
        return v ? std::to_string(*v) : std::string{};
    };
    for (const auto& r : records) {
        std::vector<std::string> row;
        row.push_back(r.paper_id);
        row.push_back(r.annotator_id);
        row.push_back(r.skip_reason.value_or(""));
        if (r.skipped()) {
            row.insert(row.end(), 19, std::string{});
            row.push_back(r.comments);
            csv::write_row(out, row);
            continue;
        }
        row.push_back(detail::tri_state_str(r.title_ok));
        row.push_back(detail::tri_state_str(r.authors_ok));
        row.push_back(detail::tri_state_str(r.abstract_ok));
        row.push_back(r.has_equations ? "true" : "false");
        row.push_back(count_cell(r.figures.present));
        row.push_back(count_cell(r.figures.correct));
        row.push_back(count_cell(r.figures.captions_correct));
        row.push_back(count_cell(r.figures.captions_mixed));
        row.push_back(count_cell(r.tables.present));
        row.push_back(count_cell(r.tables.correct));
        row.push_back(count_cell(r.tables.captions_correct));
        row.push_back(count_cell(r.tables.captions_mixed));
        row.push_back(count_cell(r.tables.content_mixed));
        row.push_back(count_cell(r.header_footer_errors));
        row.push_back(count_cell(r.section_heading_errors));
        row.push_back(count_cell(r.missing_paragraphs));
        row.push_back(r.bibliography_grade ? detail::bibliography_grade_str(*r.bibliography_grade)
                                           : "");
        row.push_back(r.inline_citation_grade
                          ? detail::citation_grade_str(*r.inline_citation_grade)
                          : "");
        row.push_back(detail::readability_str(r.readability));
        row.push_back(r.comments);
        csv::write_row(out, row);
    }
    return out.str();
}

// Imports records from the spreadsheet CSV; every row is validated through
// the same rules as the JSON form.
inline std::vector<EvaluationRecord> records_from_csv(std::string_view text) {
    auto rows = csv::parse(text);
    if (rows.empty()) throw InvalidRecordError("records CSV is empty");
    const auto& header = rows.front();
    std::map<std::string, std::size_t> columns;
    for (std::size_t i = 0; i < header.size(); ++i) {
        columns[strings::to_lower(strings::trim(header[i]))] = i;
    }
    auto cell = [&columns](const std::vector<std::string>& row,
                           const char* name) -> std::string {
        auto it = columns.find(name);
        if (it == columns.end() || it->second >= row.size()) return {};
        return row[it->second];
    };

    std::vector<EvaluationRecord> records;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        nlohmann::ordered_json j;
        j["paper_id"] = cell(row, "paper_id");
        j["annotator_id"] = cell(row, "annotator_id");
        std::string skipped = cell(row, "skipped");
        std::string comments = cell(row, "comments");
        if (!comments.empty()) j["comments"] = comments;
        if (!skipped.empty()) {
            j["skipped"] = skipped;
        } else {
            j["title_ok"] = cell(row, "title_ok");
            j["authors_ok"] = cell(row, "authors_ok");
            j["abstract_ok"] = cell(row, "abstract_ok");
            j["has_equations"] = strings::iequals(strings::trim(cell(row, "has_equations")), "true");
            auto put_count = [&](nlohmann::ordered_json& parent, const char* key,
                                 const char* column) {
                std::string v = std::string(strings::trim(cell(row, column)));
                if (v.empty()) {
                    parent[key] = nullptr;
                    return;
                }
                try {
                    parent[key] = std::stoll(v);
                } catch (...) {
                    throw InvalidRecordError("row " + std::to_string(r + 1) + ": " + column +
                                             " is not an integer");
                }
            };
            nlohmann::ordered_json figures;
            put_count(figures, "present", "figures_present");
            put_count(figures, "correct", "figures_correct");
            put_count(figures, "captions_correct", "figure_captions_correct");
            put_count(figures, "captions_mixed", "figure_captions_mixed");
            j["figures"] = std::move(figures);
            nlohmann::ordered_json tables;
            put_count(tables, "present", "tables_present");
            put_count(tables, "correct", "tables_correct");
            put_count(tables, "captions_correct", "table_captions_correct");
            put_count(tables, "captions_mixed", "table_captions_mixed");
            put_count(tables, "content_mixed", "table_content_mixed");
            j["tables"] = std::move(tables);
            put_count(j, "header_footer_errors", "header_footer_errors");
            put_count(j, "section_heading_errors", "section_heading_errors");
            put_count(j, "missing_paragraphs", "missing_paragraphs");
            std::string bib = std::string(strings::trim(cell(row, "bibliography_grade")));
            j["bibliography_grade"] = bib.empty() ? nlohmann::ordered_json(nullptr)
                                                  : nlohmann::ordered_json(bib);
            std::string cite = std::string(strings::trim(cell(row, "inline_citation_grade")));
            j["inline_citation_grade"] = cite.empty() ? nlohmann::ordered_json(nullptr)
                                                      : nlohmann::ordered_json(cite);
            j["readability"] = cell(row, "readability");
        }
        try {
            records.push_back(validate_record(j));
        } catch (const InvalidRecordError& e) {
            throw InvalidRecordError("row " + std::to_string(r + 1) + ": " + e.what());
        }
    }
    return records;
}

} // namespace scia11y
