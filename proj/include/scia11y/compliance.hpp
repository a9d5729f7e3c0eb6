#pragma once

#include <array>
#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "scia11y/audit.hpp"
#include "scia11y/csv.hpp"
#include "scia11y/errors.hpp"
#include "scia11y/strings.hpp"

namespace scia11y {

// The five tracked accessibility criteria.
enum class Criterion { AltText, TableHeaders, TaggedPDF, DefaultLanguage, TabOrder };

inline constexpr std::array<Criterion, 5> kAllCriteria = {
    Criterion::AltText, Criterion::TableHeaders, Criterion::TaggedPDF, Criterion::DefaultLanguage,
    Criterion::TabOrder};

inline const char* criterion_name(Criterion c) {
    switch (c) {
    case Criterion::AltText: return "Alt-text";
    case Criterion::TableHeaders: return "Table headers";
    case Criterion::TaggedPDF: return "Tagged PDF";
    case Criterion::DefaultLanguage: return "Default language";
    case Criterion::TabOrder: return "Tab order";
    }
    return "unknown";
}

enum class CriterionStatus { Passed, Failed, NeedsManualCheck };

struct ComplianceRecord {
    std::string paper_id;
    int year = 0;
    std::string field_of_study;
    std::array<CriterionStatus, 5> criteria = {
        CriterionStatus::NeedsManualCheck, CriterionStatus::NeedsManualCheck,
        CriterionStatus::NeedsManualCheck, CriterionStatus::NeedsManualCheck,
        CriterionStatus::NeedsManualCheck};
    std::vector<std::string> creator_raw; // [xmp creator-tool, docinfo creator-tool, producer]
    std::string software_cluster;

    CriterionStatus status(Criterion c) const { return criteria[static_cast<std::size_t>(c)]; }
    bool passed(Criterion c) const { return status(c) == CriterionStatus::Passed; }
};

struct ComplianceScore {
    int total = 0;         // 0-5 criteria met
    double normalized = 0; // total / 5
    bool adobe5 = false;   // all five met
};

// "Needs manual check" never counts as passed.
inline ComplianceScore score(const ComplianceRecord& record) {
    ComplianceScore s;
    for (Criterion c : kAllCriteria) {
        if (record.passed(c)) ++s.total;
    }
    s.normalized = static_cast<double>(s.total) / 5.0;
    s.adobe5 = (s.total == 5);
    return s;
}

// ---------------------------------------------------------------------------
// Checker-report ingestion
// ---------------------------------------------------------------------------

namespace detail {

inline std::optional<Criterion> criterion_for_rule_name(std::string_view raw) {
    std::string name = strings::to_lower(strings::trim(raw));
    if (name == "figures alternate text" || name == "alt-text" || name == "alt text" ||
        name == "figures require alternate text") {
        return Criterion::AltText;
    }
    if (name == "headers" || name == "table headers" || name == "tables should have headers") {
        return Criterion::TableHeaders;
    }
    if (name == "tagged pdf" || name == "document is tagged pdf") return Criterion::TaggedPDF;
    if (name == "primary language" || name == "default language" ||
        name == "text language is specified") {
        return Criterion::DefaultLanguage;
    }
    if (name == "tab order" || name == "tab order is consistent with structure order") {
        return Criterion::TabOrder;
    }
    return std::nullopt;
}

inline std::optional<CriterionStatus> parse_rule_status(std::string_view raw) {
    std::string status = strings::to_lower(strings::trim(raw));
    if (status == "passed" || status == "passed manually") return CriterionStatus::Passed;
    if (status == "failed" || status == "failed manually") return CriterionStatus::Failed;
    if (status == "needs manual check" || status == "skipped") {
        return CriterionStatus::NeedsManualCheck;
    }
    return std::nullopt;
}

inline bool looks_password_protected(std::string_view text) {
    return strings::icontains(text, "password") &&
           (strings::icontains(text, "protect") || strings::icontains(text, "encrypt"));
}

} // namespace detail

// Extracts the five tracked criteria from a checker report, either the
// normalized JSON format or checker-report HTML with rule names in table
// rows. The remaining rules of the 32-rule report are ignored. Corrupt or
// password-protected reports throw ReportUnreadable.
inline ComplianceRecord parse_report(std::string_view raw) {
    ComplianceRecord record;
    std::array<bool, 5> seen = {false, false, false, false, false};

    std::string_view trimmed = strings::trim(raw);
    if (trimmed.empty()) throw ReportUnreadableError("report is empty");

    if (trimmed.front() == '{') {
        auto root = nlohmann::json::parse(trimmed, nullptr, false);
        if (root.is_discarded() || !root.is_object()) {
            throw ReportUnreadableError("report is not valid JSON");
        }
        if (root.contains("error")) {
            throw ReportUnreadableError("report carries an error marker: " +
                                        root["error"].dump());
        }
        if (root.contains("paper_id") && root["paper_id"].is_string()) {
            record.paper_id = root["paper_id"].get<std::string>();
        }
        if (!root.contains("rules") || !root["rules"].is_array()) {
            throw ReportUnreadableError("report has no rules array");
        }
        for (const auto& rule : root["rules"]) {
            if (!rule.is_object() || !rule.contains("name") || !rule.contains("status")) continue;
            auto criterion = detail::criterion_for_rule_name(rule["name"].get<std::string>());
            if (!criterion) continue; // untracked rule
            auto status = detail::parse_rule_status(rule["status"].get<std::string>());
            if (!status) {
                throw ReportUnreadableError("unrecognized status for rule " +
                                            rule["name"].get<std::string>());
            }
            std::size_t idx = static_cast<std::size_t>(*criterion);
            if (!seen[idx]) {
                record.criteria[idx] = *status;
                seen[idx] = true;
            }
        }
    } else if (trimmed.front() == '<') {
        if (detail::looks_password_protected(trimmed)) {
            throw ReportUnreadableError("report marks the PDF as password protected");
        }
        // Walk table rows; a cell naming a tracked rule is followed by its
        // status in a later cell of the same row.
        std::vector<HtmlNode> nodes = scan_html(trimmed);
        bool in_cell = false;
        std::string cell_text;
        std::vector<std::string> row_cells;
        auto flush_row = [&]() {
            bool have_pending = false;
            Criterion pending = Criterion::AltText;
            for (const auto& cell : row_cells) {
                if (!have_pending) {
                    auto criterion = detail::criterion_for_rule_name(cell);
                    if (criterion) {
                        pending = *criterion;
                        have_pending = true;
                    }
                    continue;
                }
                auto status = detail::parse_rule_status(cell);
                if (status) {
                    std::size_t idx = static_cast<std::size_t>(pending);
                    if (!seen[idx]) {
                        record.criteria[idx] = *status;
                        seen[idx] = true;
                    }
                    have_pending = false;
                }
            }
            row_cells.clear();
        };
        for (const auto& node : nodes) {
            if (const auto* tag = std::get_if<HtmlTag>(&node)) {
                if (tag->name == "td" || tag->name == "th") {
                    if (tag->closing) {
                        row_cells.push_back(cell_text);
                        cell_text.clear();
                        in_cell = false;
                    } else {
                        in_cell = true;
                        cell_text.clear();
                    }
                } else if (tag->name == "tr" && tag->closing) {
                    flush_row();
                }
            } else if (const auto* text = std::get_if<HtmlText>(&node)) {
                if (in_cell) cell_text += text->text;
            }
        }
        flush_row();
    } else {
        throw ReportUnreadableError("report is neither JSON nor HTML");
    }

    for (std::size_t i = 0; i < seen.size(); ++i) {
        if (!seen[i]) {
            throw ReportUnreadableError(std::string("tracked rule missing from report: ") +
                                        criterion_name(static_cast<Criterion>(i)));
        }
    }
    return record;
}

// ---------------------------------------------------------------------------
// Typesetting-software canonicalization
// ---------------------------------------------------------------------------

struct ClusterRule {
    std::string cluster;
    std::vector<std::string> substrings;
};

using ClusterTable = std::vector<ClusterRule>;

// Seeded with the published word lists for LaTeX and Microsoft Word; the
// remaining clusters use obvious brand substrings. Order matters: Arbortext
// and the Quartz/printer strings must precede LaTeX because "arbortext" and
// "pdfcontext" both contain "tex".
inline const ClusterTable& default_cluster_table() {
    static const ClusterTable table = {
        {"Adobe InDesign", {"indesign"}},
        {"Arbortext APP", {"arbortext", "advanced print publisher"}},
        {"Printer", {"quartz", "print to pdf"}},
        {"LaTeX", {"latex", "pdftex", "tex live", "tex", "vtex pdf", "xetex"}},
        {"Microsoft Word", {"microsoft", "for word", "word"}},
    };
    return table;
}

inline const char* kOtherCluster = "Other";

inline const std::vector<std::string>& named_clusters() {
    static const std::vector<std::string> clusters = {"Adobe InDesign", "Arbortext APP", "LaTeX",
                                                      "Microsoft Word", "Printer"};
    return clusters;
}

inline ClusterTable cluster_table_from_json(const nlohmann::json& j) {
    ClusterTable table;
    if (!j.is_array()) throw MalformedInputError("cluster table must be a JSON array");
    for (const auto& rule : j) {
        if (!rule.is_object() || !rule.contains("cluster") || !rule.contains("substrings")) {
            throw MalformedInputError("cluster rule needs \"cluster\" and \"substrings\"");
        }
        ClusterRule r;
        r.cluster = rule["cluster"].get<std::string>();
        for (const auto& s : rule["substrings"]) r.substrings.push_back(s.get<std::string>());
        table.push_back(std::move(r));
    }
    return table;
}

// Case-insensitive substring matching; the first match across the metadata
// fields in priority order (xmp creator-tool, docinfo creator-tool, producer)
// wins. No match maps to Other.
inline std::string canonicalize_creator(const std::vector<std::string>& values,
                                        const ClusterTable& table = default_cluster_table()) {
    for (const auto& value : values) {
        if (strings::trim(value).empty()) continue;
        for (const auto& rule : table) {
            for (const auto& needle : rule.substrings) {
                if (strings::icontains(value, needle)) return rule.cluster;
            }
        }
    }
    return kOtherCluster;
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

enum class GroupBy { Year, FieldOfStudy, SoftwareCluster };

struct AggregateRow {
    std::string group;
    std::size_t n = 0;
    std::array<double, 5> criterion_rates = {0, 0, 0, 0, 0};
    double mean_normalized = 0.0;
    double adobe5_rate = 0.0;
};

namespace detail {

inline AggregateRow fold_rows(const std::string& label,
                              const std::vector<const ComplianceRecord*>& records) {
    AggregateRow row;
    row.group = label;
    row.n = records.size();
    std::array<std::size_t, 5> passed = {0, 0, 0, 0, 0};
    double total_normalized = 0.0;
    std::size_t adobe5 = 0;
    for (const auto* r : records) {
        ComplianceScore s = score(*r);
        total_normalized += s.normalized;
        if (s.adobe5) ++adobe5;
        for (std::size_t i = 0; i < 5; ++i) {
            if (r->criteria[i] == CriterionStatus::Passed) ++passed[i];
        }
    }
    if (!records.empty()) {
        double n = static_cast<double>(records.size());
        for (std::size_t i = 0; i < 5; ++i) {
            row.criterion_rates[i] = static_cast<double>(passed[i]) / n;
        }
        row.mean_normalized = total_normalized / n;
        row.adobe5_rate = static_cast<double>(adobe5) / n;
    }
    return row;
}

} // namespace detail

// Whole-dataset aggregate (Table 2 style: per-criterion rates plus the
// Adobe-5 rate).
inline AggregateRow aggregate_overall(const std::vector<ComplianceRecord>& records) {
    if (records.empty()) throw EmptyInputError("no compliance records to aggregate");
    std::vector<const ComplianceRecord*> all;
    all.reserve(records.size());
    for (const auto& r : records) all.push_back(&r);
    return detail::fold_rows("All", all);
}

inline std::vector<AggregateRow> aggregate(const std::vector<ComplianceRecord>& records,
                                           GroupBy group_by) {
    if (records.empty()) throw EmptyInputError("no compliance records to aggregate");
    std::map<std::string, std::vector<const ComplianceRecord*>> groups;
    for (const auto& r : records) {
        std::string key;
        switch (group_by) {
        case GroupBy::Year: key = std::to_string(r.year); break;
        case GroupBy::FieldOfStudy: key = r.field_of_study; break;
        case GroupBy::SoftwareCluster: key = r.software_cluster; break;
        }
        groups[key].push_back(&r);
    }
    std::vector<AggregateRow> rows;
    if (group_by == GroupBy::Year) {
        std::vector<std::pair<int, const std::vector<const ComplianceRecord*>*>> ordered;
        for (const auto& [key, recs] : groups) ordered.emplace_back(std::stoi(key), &recs);
        std::sort(ordered.begin(), ordered.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [year, recs] : ordered) {
            rows.push_back(detail::fold_rows(std::to_string(year), *recs));
        }
    } else {
        for (const auto& [key, recs] : groups) {
            rows.push_back(detail::fold_rows(key, recs)); // map iterates sorted
        }
    }
    return rows;
}

// Histogram of Total Compliance (0..5), Figure-2 style.
inline std::array<std::size_t, 6> compliance_histogram(const std::vector<ComplianceRecord>& records) {
    std::array<std::size_t, 6> buckets = {0, 0, 0, 0, 0, 0};
    for (const auto& r : records) {
        buckets[static_cast<std::size_t>(score(r).total)]++;
    }
    return buckets;
}

// Total Compliance measurements grouped by software cluster, the input shape
// for the ANOVA and Kruskal-Wallis comparisons. Defaults to the five named
// clusters; include_other adds the Other cluster as a sixth group.
inline std::vector<std::vector<double>> compliance_by_cluster(
    const std::vector<ComplianceRecord>& records, bool include_other = false) {
    std::vector<std::string> clusters = named_clusters();
    if (include_other) clusters.push_back(kOtherCluster);
    std::vector<std::vector<double>> groups(clusters.size());
    for (const auto& r : records) {
        for (std::size_t i = 0; i < clusters.size(); ++i) {
            if (r.software_cluster == clusters[i]) {
                groups[i].push_back(static_cast<double>(score(r).total));
                break;
            }
        }
    }
    return groups;
}

// Per-field (proportion Microsoft Word, mean normalized compliance) pairs,
// the Figure-5 correlation input. Fields ordered alphabetically.
struct FieldWordShare {
    std::string field;
    double word_share = 0.0;
    double mean_normalized = 0.0;
    std::size_t n = 0;
};

inline std::vector<FieldWordShare> word_share_by_field(
    const std::vector<ComplianceRecord>& records) {
    std::map<std::string, std::pair<std::size_t, std::pair<std::size_t, double>>> acc;
    for (const auto& r : records) {
        auto& [n, rest] = acc[r.field_of_study];
        ++n;
        if (r.software_cluster == "Microsoft Word") ++rest.first;
        rest.second += score(r).normalized;
    }
    std::vector<FieldWordShare> out;
    for (const auto& [field, data] : acc) {
        FieldWordShare row;
        row.field = field;
        row.n = data.first;
        row.word_share = static_cast<double>(data.second.first) / static_cast<double>(data.first);
        row.mean_normalized = data.second.second / static_cast<double>(data.first);
        out.push_back(std::move(row));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Metadata CSV (paper_id, year, field_of_study, creator fields)
// ---------------------------------------------------------------------------

struct PaperMetadata {
    int year = 0;
    std::string field_of_study;
    std::vector<std::string> creator_raw; // priority order
};

inline std::map<std::string, PaperMetadata> parse_metadata_csv(std::string_view text) {
    auto rows = csv::parse(text);
    if (rows.empty()) throw MalformedInputError("metadata CSV is empty");
    const auto& header = rows.front();
    auto column = [&header](std::string_view name) -> int {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (strings::iequals(strings::trim(header[i]), name)) return static_cast<int>(i);
        }
        return -1;
    };
    int col_id = column("paper_id");
    int col_year = column("year");
    int col_field = column("field_of_study");
    int col_xmp = column("xmp_creator_tool");
    int col_docinfo = column("docinfo_creator_tool");
    int col_producer = column("producer");
    if (col_id < 0) throw MalformedInputError("metadata CSV lacks a paper_id column");

    std::map<std::string, PaperMetadata> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        auto cell = [&row](int idx) -> std::string {
            if (idx < 0 || static_cast<std::size_t>(idx) >= row.size()) return {};
            return row[static_cast<std::size_t>(idx)];
        };
        std::string id = cell(col_id);
        if (id.empty()) continue;
        PaperMetadata meta;
        std::string year = cell(col_year);
        if (!year.empty()) {
            try {
                meta.year = std::stoi(year);
            } catch (...) {
                meta.year = 0;
            }
        }
        meta.field_of_study = cell(col_field);
        meta.creator_raw = {cell(col_xmp), cell(col_docinfo), cell(col_producer)};
        out.emplace(std::move(id), std::move(meta));
    }
    return out;
}

inline void attach_metadata(ComplianceRecord& record, const PaperMetadata& meta,
                            const ClusterTable& table = default_cluster_table()) {
    record.year = meta.year;
    record.field_of_study = meta.field_of_study;
    record.creator_raw = meta.creator_raw;
    record.software_cluster = canonicalize_creator(meta.creator_raw, table);
}

} // namespace scia11y
