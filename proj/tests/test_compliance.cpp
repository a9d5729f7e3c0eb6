#include <catch2/catch_amalgamated.hpp>

#include "scia11y/compliance.hpp"

#include "support.hpp"

using namespace scia11y;
using Catch::Matchers::WithinAbs;

namespace {

ComplianceRecord record_with(std::initializer_list<Criterion> passed) {
    ComplianceRecord r;
    for (std::size_t i = 0; i < r.criteria.size(); ++i) r.criteria[i] = CriterionStatus::Failed;
    for (Criterion c : passed) r.criteria[static_cast<std::size_t>(c)] = CriterionStatus::Passed;
    return r;
}

} // namespace

TEST_CASE("score: 3 of 5 passed gives total 3, normalized 0.6, not adobe5") {
    auto r = record_with({Criterion::TaggedPDF, Criterion::DefaultLanguage, Criterion::TabOrder});
    auto s = score(r);
    CHECK(s.total == 3);
    CHECK_THAT(s.normalized, WithinAbs(0.6, 1e-15));
    CHECK_FALSE(s.adobe5);
}

TEST_CASE("score: all failed and all passed") {
    auto zero = score(record_with({}));
    CHECK(zero.total == 0);
    CHECK(zero.normalized == 0.0);
    CHECK_FALSE(zero.adobe5);
    auto five = score(record_with({Criterion::AltText, Criterion::TableHeaders,
                                   Criterion::TaggedPDF, Criterion::DefaultLanguage,
                                   Criterion::TabOrder}));
    CHECK(five.total == 5);
    CHECK(five.normalized == 1.0);
    CHECK(five.adobe5);
}

TEST_CASE("adobe5 iff total==5, exhaustively over all 3^5 assignments") {
    const CriterionStatus statuses[3] = {CriterionStatus::Passed, CriterionStatus::Failed,
                                         CriterionStatus::NeedsManualCheck};
    for (int mask = 0; mask < 243; ++mask) {
        ComplianceRecord r;
        int m = mask;
        int expected_total = 0;
        for (std::size_t i = 0; i < 5; ++i) {
            r.criteria[i] = statuses[m % 3];
            if (r.criteria[i] == CriterionStatus::Passed) ++expected_total;
            m /= 3;
        }
        auto s = score(r);
        CHECK(s.total == expected_total);
        CHECK(s.adobe5 == (s.total == 5));
        CHECK_THAT(s.normalized, WithinAbs(expected_total / 5.0, 1e-15));
    }
}

TEST_CASE("score monotonicity: flipping Failed to Passed raises total by exactly 1") {
    for (std::size_t flip = 0; flip < 5; ++flip) {
        auto r = record_with({Criterion::TaggedPDF});
        if (r.criteria[flip] == CriterionStatus::Passed) continue;
        int before = score(r).total;
        r.criteria[flip] = CriterionStatus::Passed;
        CHECK(score(r).total == before + 1);
    }
}

TEST_CASE("NeedsManualCheck never counts as passed") {
    ComplianceRecord r;
    for (auto& c : r.criteria) c = CriterionStatus::NeedsManualCheck;
    CHECK(score(r).total == 0);
}

TEST_CASE("parse_report reads the normalized JSON format") {
    auto record = parse_report(testsupport::read_fixture("report_pass5.json"));
    CHECK(record.paper_id == "pass-all");
    CHECK(score(record).total == 5);
    CHECK(score(record).adobe5);

    auto language_only = parse_report(testsupport::read_fixture("report_language_only.json"));
    CHECK(score(language_only).total == 1);
    CHECK(language_only.passed(Criterion::DefaultLanguage));
}

TEST_CASE("parse_report extracts the five tracked rules from checker HTML") {
    auto record = parse_report(testsupport::read_fixture("report_adobe.html"));
    CHECK(record.passed(Criterion::TaggedPDF));
    CHECK(record.passed(Criterion::DefaultLanguage));
    CHECK(record.passed(Criterion::TableHeaders));
    CHECK(record.status(Criterion::AltText) == CriterionStatus::Failed);
    CHECK(record.status(Criterion::TabOrder) == CriterionStatus::Failed);
    CHECK(score(record).total == 3);
}

TEST_CASE("parse_report failure modes") {
    CHECK_THROWS_AS(parse_report(""), ReportUnreadableError);
    CHECK_THROWS_AS(parse_report("garbage bytes"), ReportUnreadableError);
    CHECK_THROWS_AS(parse_report("{\"rules\": []}"), ReportUnreadableError); // missing tracked rules
    CHECK_THROWS_AS(parse_report("{\"error\": \"password-protected\"}"), ReportUnreadableError);
    CHECK_THROWS_AS(parse_report(testsupport::read_fixture("report_protected.html")),
                    ReportUnreadableError);
    // an HTML report lacking one of the five rules is unreadable too
    CHECK_THROWS_AS(parse_report("<html><table><tr><td>Tagged PDF</td><td>Passed</td></tr>"
                                 "</table></html>"),
                    ReportUnreadableError);
}

TEST_CASE("canonicalize_creator maps the published word lists") {
    CHECK(canonicalize_creator({"pdfTeX-1.40.21"}) == "LaTeX");
    CHECK(canonicalize_creator({"XeTeX 0.99998"}) == "LaTeX");
    CHECK(canonicalize_creator({"TeX Live 2019"}) == "LaTeX");
    CHECK(canonicalize_creator({"Microsoft® Word 2016"}) == "Microsoft Word");
    CHECK(canonicalize_creator({"Word for Mac"}) == "Microsoft Word");
    CHECK(canonicalize_creator({"Adobe InDesign CC 2015 (Macintosh)"}) == "Adobe InDesign");
    CHECK(canonicalize_creator({"Arbortext Advanced Print Publisher 9.1"}) == "Arbortext APP");
    CHECK(canonicalize_creator({"Mac OS X 10.10 Quartz PDFContext"}) == "Printer");
    CHECK(canonicalize_creator({""}) == "Other");
    CHECK(canonicalize_creator({}) == "Other");
    CHECK(canonicalize_creator({"Scribus 1.5"}) == "Other");
}

TEST_CASE("canonicalize_creator honors field priority order") {
    // first field wins even when later fields would match a different cluster
    CHECK(canonicalize_creator({"Microsoft Word", "pdfTeX"}) == "Microsoft Word");
    CHECK(canonicalize_creator({"", "pdfTeX", "Microsoft Word"}) == "LaTeX");
    // Arbortext contains "tex" but must not fall into the LaTeX cluster
    CHECK(canonicalize_creator({"Arbortext APP 11"}) == "Arbortext APP");
}

TEST_CASE("cluster table round-trips through JSON and is editable") {
    nlohmann::json j = nlohmann::json::array();
    j.push_back({{"cluster", "MyTool"}, {"substrings", {"mytool", "my tool"}}});
    auto table = cluster_table_from_json(j);
    CHECK(canonicalize_creator({"MyTool v2"}, table) == "MyTool");
    CHECK(canonicalize_creator({"pdfTeX"}, table) == "Other"); // not in the custom table
    CHECK_THROWS_AS(cluster_table_from_json(nlohmann::json::object()), MalformedInputError);
}

TEST_CASE("aggregate produces rates and sorted groups") {
    std::vector<ComplianceRecord> records;
    for (int year : {2012, 2010, 2012}) {
        auto r = record_with(year == 2010 ? std::initializer_list<Criterion>{}
                                          : std::initializer_list<Criterion>{
                                                Criterion::DefaultLanguage});
        r.year = year;
        r.field_of_study = year == 2010 ? "Physics" : "Biology";
        r.software_cluster = "LaTeX";
        records.push_back(std::move(r));
    }
    auto rows = aggregate(records, GroupBy::Year);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].group == "2010");
    CHECK(rows[1].group == "2012");
    CHECK(rows[0].n == 1);
    CHECK(rows[1].n == 2);
    CHECK_THAT(rows[1].criterion_rates[static_cast<std::size_t>(Criterion::DefaultLanguage)],
               WithinAbs(1.0, 1e-15));
    CHECK_THAT(rows[1].mean_normalized, WithinAbs(0.2, 1e-15));

    CHECK_THROWS_AS(aggregate({}, GroupBy::Year), EmptyInputError);
}

TEST_CASE("all-identical records give rates of exactly 0 or 1") {
    std::vector<ComplianceRecord> records(7, record_with({Criterion::TaggedPDF}));
    auto rows = aggregate(records, GroupBy::SoftwareCluster);
    REQUIRE(rows.size() == 1);
    for (double rate : rows[0].criterion_rates) {
        CHECK((rate == 0.0 || rate == 1.0));
    }
}

TEST_CASE("adobe5 rate is bounded by every per-criterion rate") {
    auto records = testsupport::make_histogram_fixture();
    auto overall = aggregate_overall(records);
    for (double rate : overall.criterion_rates) {
        CHECK(overall.adobe5_rate <= rate + 1e-12);
    }
}

TEST_CASE("published histogram fixture reproduces bucket counts and the 2.4% rate") {
    auto records = testsupport::make_histogram_fixture();
    REQUIRE(records.size() == 11397);
    auto histogram = compliance_histogram(records);
    CHECK(histogram[0] == 8519);
    CHECK(histogram[1] == 1010);
    CHECK(histogram[2] == 550);
    CHECK(histogram[3] == 549);
    CHECK(histogram[4] == 494);
    CHECK(histogram[5] == 275);

    auto overall = aggregate_overall(records);
    CHECK_THAT(overall.adobe5_rate * 100.0, WithinAbs(2.4, 0.05));

    // the engineered within-bucket splits
    std::size_t one_language_only = 0;
    std::size_t four_missing_alt = 0;
    for (const auto& r : records) {
        auto s = score(r);
        if (s.total == 1 && r.passed(Criterion::DefaultLanguage)) ++one_language_only;
        if (s.total == 4 && !r.passed(Criterion::AltText)) ++four_missing_alt;
    }
    CHECK(one_language_only == 793);
    CHECK(four_missing_alt == 396);
}

TEST_CASE("aggregate group sizes sum to the record count") {
    auto records = testsupport::make_histogram_fixture();
    for (auto& r : records) {
        r.software_cluster = (score(r).total % 2 == 0) ? "LaTeX" : "Microsoft Word";
    }
    auto rows = aggregate(records, GroupBy::SoftwareCluster);
    std::size_t total = 0;
    for (const auto& row : rows) total += row.n;
    CHECK(total == records.size());
}

TEST_CASE("metadata CSV parses and attaches, including software canonicalization") {
    auto metadata = parse_metadata_csv(testsupport::read_fixture("metadata_sample.csv"));
    REQUIRE(metadata.size() == 3);
    auto record = parse_report(testsupport::read_fixture("report_pass5.json"));
    attach_metadata(record, metadata.at("pass-all"));
    CHECK(record.year == 2018);
    CHECK(record.field_of_study == "Computer science");
    CHECK(record.software_cluster == "Microsoft Word");
    auto latex = metadata.at("language-only");
    CHECK(canonicalize_creator(latex.creator_raw) == "LaTeX"); // docinfo beats empty xmp
}

TEST_CASE("compliance_by_cluster groups totals for the five named clusters") {
    std::vector<ComplianceRecord> records;
    const char* clusters[] = {"Adobe InDesign", "Arbortext APP", "LaTeX", "Microsoft Word",
                              "Printer", "Other"};
    for (int i = 0; i < 6; ++i) {
        auto r = record_with({Criterion::TaggedPDF});
        r.software_cluster = clusters[i];
        records.push_back(r);
    }
    auto five = compliance_by_cluster(records, false);
    REQUIRE(five.size() == 5);
    for (const auto& g : five) CHECK(g.size() == 1);
    auto six = compliance_by_cluster(records, true);
    REQUIRE(six.size() == 6);
    CHECK(six[5].size() == 1);
}

TEST_CASE("word_share_by_field computes the correlation inputs") {
    std::vector<ComplianceRecord> records;
    for (int i = 0; i < 4; ++i) {
        auto r = record_with(i % 2 == 0 ? std::initializer_list<Criterion>{Criterion::TaggedPDF}
                                        : std::initializer_list<Criterion>{});
        r.field_of_study = i < 2 ? "Physics" : "Biology";
        r.software_cluster = i % 2 == 0 ? "Microsoft Word" : "LaTeX";
        records.push_back(r);
    }
    auto rows = word_share_by_field(records);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].field == "Biology");
    CHECK_THAT(rows[0].word_share, WithinAbs(0.5, 1e-15));
    CHECK_THAT(rows[0].mean_normalized, WithinAbs(0.1, 1e-15));
}
