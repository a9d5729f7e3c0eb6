#include <catch2/catch_amalgamated.hpp>

#include "scia11y/evaluation.hpp"

#include <random>

#include "support.hpp"

using namespace scia11y;
using Catch::Matchers::WithinAbs;

namespace {

nlohmann::ordered_json full_record_json() {
    return nlohmann::ordered_json::parse(R"({
        "schema_version": 1,
        "paper_id": "p1",
        "annotator_id": "a1",
        "title_ok": "yes",
        "authors_ok": "partially",
        "abstract_ok": "no",
        "has_equations": true,
        "figures": {"present": 3, "correct": 2, "captions_correct": 3, "captions_mixed": 1},
        "tables": {"present": 1, "correct": 1, "captions_correct": 0, "captions_mixed": 0,
                   "content_mixed": 1},
        "header_footer_errors": 2,
        "section_heading_errors": null,
        "missing_paragraphs": 0,
        "bibliography_grade": "mostly_correct",
        "inline_citation_grade": "majority_linked",
        "readability": "some_problems",
        "comments": "fine"
    })");
}

} // namespace

TEST_CASE("validate_record accepts a fully populated record and round-trips") {
    auto record = validate_record(full_record_json());
    CHECK(record.paper_id == "p1");
    CHECK(record.title_ok == TriState::Yes);
    CHECK(record.figures.present == 3);
    CHECK_FALSE(record.section_heading_errors.has_value());
    CHECK(record.bibliography_grade == BibliographyGrade::MostlyCorrect);
    auto round = validate_record(record_to_json(record));
    CHECK(record_to_json(round).dump() == record_to_json(record).dump());
}

TEST_CASE("validate_record rejects violated count invariants with field messages") {
    auto j = full_record_json();
    j["figures"]["present"] = 2;
    j["figures"]["correct"] = 3;
    try {
        validate_record(j);
        FAIL("expected InvalidRecordError");
    } catch (const InvalidRecordError& e) {
        CHECK(std::string(e.what()).find("figures.correct") != std::string::npos);
    }
}

TEST_CASE("validate_record rejects other malformed shapes") {
    SECTION("missing required enums") {
        auto j = full_record_json();
        j.erase("readability");
        CHECK_THROWS_AS(validate_record(j), InvalidRecordError);
    }
    SECTION("negative counts") {
        auto j = full_record_json();
        j["header_footer_errors"] = -1;
        CHECK_THROWS_AS(validate_record(j), InvalidRecordError);
    }
    SECTION("unknown enum value") {
        auto j = full_record_json();
        j["title_ok"] = "maybe";
        CHECK_THROWS_AS(validate_record(j), InvalidRecordError);
    }
    SECTION("correct given without present") {
        auto j = full_record_json();
        j["figures"]["present"] = nullptr;
        CHECK_THROWS_AS(validate_record(j), InvalidRecordError);
    }
    SECTION("missing ids") {
        auto j = full_record_json();
        j["paper_id"] = "";
        CHECK_THROWS_AS(validate_record(j), InvalidRecordError);
    }
}

TEST_CASE("skip records carry a reason and no grades") {
    auto skip = validate_record(nlohmann::ordered_json::parse(R"({
        "paper_id": "p2", "annotator_id": "a1", "skipped": "not in English"
    })"));
    CHECK(skip.skipped());
    CHECK(*skip.skip_reason == "not in English");

    CHECK_THROWS_AS(validate_record(nlohmann::ordered_json::parse(R"({
        "paper_id": "p2", "annotator_id": "a1", "skipped": "too long", "title_ok": "yes"
    })")),
                    InvalidRecordError);
}

TEST_CASE("skipped records are excluded from aggregates") {
    auto fixture = testsupport::make_published_eval_fixture();
    EvaluationRecord skip;
    skip.paper_id = "skipped-paper";
    skip.annotator_id = "a1";
    skip.skip_reason = "not a paper";
    fixture.records.push_back(skip);
    auto table = aggregate_errors(fixture.records);
    CHECK(table.n_papers == 385);
}

TEST_CASE("aggregate_errors reproduces the published element table exactly") {
    auto fixture = testsupport::make_published_eval_fixture();
    auto table = aggregate_errors(fixture.records);
    REQUIRE(table.n_papers == 385);

    auto expect_row = [&table](const char* element, std::vector<std::size_t> counts) {
        const auto* row = table.row(element);
        REQUIRE(row != nullptr);
        REQUIRE(row->buckets.size() == counts.size());
        for (std::size_t i = 0; i < counts.size(); ++i) {
            INFO(element << " bucket " << row->buckets[i].first);
            CHECK(row->buckets[i].second == counts[i]);
        }
    };
    expect_row("title", {337, 16, 32});
    expect_row("authors", {307, 64, 14});
    expect_row("abstract", {308, 22, 55});
    expect_row("figure_extraction_errors", {6, 94, 201, 45, 39});
    expect_row("figure_caption_errors", {0, 94, 174, 55, 62});
    expect_row("table_extraction_errors", {2, 166, 165, 32, 20});
    expect_row("table_caption_errors", {2, 166, 190, 23, 4});
    expect_row("header_footer_errors", {3, 170, 172, 40});
    expect_row("section_heading_errors", {2, 88, 258, 37});
    expect_row("body_paragraph_errors", {1, 226, 128, 30});
    expect_row("bibliography_extraction", {7, 15, 313, 3, 47});
    expect_row("inline_citation_linking", {39, 10, 290, 20, 26});
    expect_row("overall_readability", {210, 122, 53});
}

TEST_CASE("aggregate_errors conservation: buckets sum to the paper count") {
    auto fixture = testsupport::make_published_eval_fixture();
    auto table = aggregate_errors(fixture.records);
    for (const auto& row : table.rows) {
        std::size_t sum = 0;
        for (const auto& [name, count] : row.buckets) sum += count;
        INFO(row.element);
        CHECK(sum == table.n_papers);
    }
}

TEST_CASE("all-zero-error records land in the no-errors buckets") {
    std::vector<EvaluationRecord> records;
    for (int i = 0; i < 5; ++i) {
        EvaluationRecord r;
        r.paper_id = "p" + std::to_string(i);
        r.annotator_id = "a1";
        r.figures = {2, 2, 2, 0};
        r.tables = {1, 1, 1, 0, 0};
        r.header_footer_errors = 0;
        r.section_heading_errors = 0;
        r.missing_paragraphs = 0;
        r.bibliography_grade = BibliographyGrade::AllCorrect;
        r.inline_citation_grade = CitationGrade::AllLinked;
        records.push_back(r);
    }
    auto table = aggregate_errors(records);
    CHECK(table.row("figure_extraction_errors")->count_of("no_errors") == 5);
    CHECK(table.row("table_caption_errors")->count_of("no_errors") == 5);
    CHECK(table.row("header_footer_errors")->count_of("no_errors") == 5);
    CHECK(table.row("overall_readability")->count_of("good") == 5);
}

TEST_CASE("aggregate_errors requires at least one usable record") {
    CHECK_THROWS_AS(aggregate_errors({}), EmptyInputError);
    EvaluationRecord skip;
    skip.paper_id = "p";
    skip.annotator_id = "a";
    skip.skip_reason = "book";
    CHECK_THROWS_AS(aggregate_errors({skip}), EmptyInputError);
}

TEST_CASE("multi-annotator papers use the declared primary annotator") {
    EvaluationRecord first;
    first.paper_id = "p";
    first.annotator_id = "a1";
    first.readability = Readability::NoMajorProblems;
    EvaluationRecord second = first;
    second.annotator_id = "a2";
    second.readability = Readability::LotsOfProblems;
    auto table = aggregate_errors({second, first}); // order in the input must not matter
    CHECK(table.n_papers == 1);
    CHECK(table.row("overall_readability")->count_of("good") == 1);

    // random-with-seed reconciliation is deterministic for a fixed seed
    ReconcilePolicy policy;
    policy.kind = ReconcilePolicy::Kind::RandomWithSeed;
    policy.seed = 7;
    auto t1 = aggregate_errors({second, first}, policy);
    auto t2 = aggregate_errors({first, second}, policy);
    CHECK(t1.row("overall_readability")->buckets == t2.row("overall_readability")->buckets);
}

TEST_CASE("readability_by_field reproduces the published per-field split") {
    auto fixture = testsupport::make_published_eval_fixture();
    auto rows = readability_by_field(fixture.records, fixture.field_map);
    REQUIRE_FALSE(rows.empty());
    CHECK(rows[0].field == "All papers");
    CHECK(rows[0].n == 385);
    CHECK(rows[0].good == 210);
    CHECK(rows[0].okay == 122);
    CHECK(rows[0].bad == 53);
    bool physics_found = false;
    std::size_t sum_n = 0, sum_good = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        sum_n += rows[i].n;
        sum_good += rows[i].good;
        if (rows[i].field == "Physics") {
            physics_found = true;
            CHECK(rows[i].n == 39);
            CHECK(rows[i].good == 25);
            CHECK(rows[i].okay == 10);
            CHECK(rows[i].bad == 4);
        }
    }
    CHECK(physics_found);
    CHECK(sum_n == rows[0].n); // conservation across the partition
    CHECK(sum_good == rows[0].good);
}

TEST_CASE("single-field input equals the global distribution") {
    auto fixture = testsupport::make_published_eval_fixture();
    std::map<std::string, std::string> all_physics;
    for (const auto& r : fixture.records) all_physics[r.paper_id] = "Physics";
    auto rows = readability_by_field(fixture.records, all_physics);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].n == rows[0].n);
    CHECK(rows[1].good == rows[0].good);
}

TEST_CASE("cohens_kappa on identical vectors with multiple classes is 1") {
    std::vector<std::string> labels = {"yes", "no", "partially", "yes", "no", "yes"};
    auto k = cohens_kappa(labels, labels);
    CHECK_FALSE(k.degenerate);
    CHECK_THAT(k.value, WithinAbs(1.0, 1e-15));
}

TEST_CASE("cohens_kappa textbook 2x2 example is exact") {
    // 45 yes/yes, 15 no/no, 25 yes(no by B), 15 no(yes by B):
    // p_o = 0.60, p_e = 0.7*0.6 + 0.3*0.4 = 0.54, kappa = 0.06/0.46 = 3/23
    std::vector<std::string> a, b;
    for (int i = 0; i < 45; ++i) { a.push_back("yes"); b.push_back("yes"); }
    for (int i = 0; i < 15; ++i) { a.push_back("no"); b.push_back("no"); }
    for (int i = 0; i < 25; ++i) { a.push_back("yes"); b.push_back("no"); }
    for (int i = 0; i < 15; ++i) { a.push_back("no"); b.push_back("yes"); }
    auto k = cohens_kappa(a, b);
    CHECK_THAT(k.value, WithinAbs(3.0 / 23.0, 1e-15));
    auto agreement = percent_agreement(a, b);
    CHECK_THAT(agreement.value, WithinAbs(0.60, 1e-15));
    CHECK(k.value <= agreement.value); // kappa <= p_o whenever p_e >= 0
}

TEST_CASE("cohens_kappa near zero for independent labels (seeded)") {
    std::mt19937 rng(123456);
    std::uniform_int_distribution<int> label(0, 2);
    std::vector<std::string> a, b;
    for (int i = 0; i < 10000; ++i) {
        a.push_back(std::to_string(label(rng)));
        b.push_back(std::to_string(label(rng)));
    }
    auto k = cohens_kappa(a, b);
    CHECK(std::fabs(k.value) < 0.05);
}

TEST_CASE("cohens_kappa degenerate when expected agreement is 1") {
    std::vector<std::string> constant(5, "yes");
    auto k = cohens_kappa(constant, constant);
    CHECK(k.degenerate);
    CHECK_THAT(k.value, WithinAbs(1.0, 1e-15)); // carries the raw agreement
}

TEST_CASE("cohens_kappa invariant under relabeling applied to both raters") {
    std::mt19937 rng(77);
    std::uniform_int_distribution<int> label(0, 3);
    std::vector<std::string> a, b;
    for (int i = 0; i < 500; ++i) {
        a.push_back(std::to_string(label(rng)));
        b.push_back(std::to_string((label(rng) + label(rng)) % 4));
    }
    auto base = cohens_kappa(a, b);
    auto relabel = [](const std::string& s) { return "class-" + s + "-renamed"; };
    std::vector<std::string> ra, rb;
    for (const auto& s : a) ra.push_back(relabel(s));
    for (const auto& s : b) rb.push_back(relabel(s));
    auto renamed = cohens_kappa(ra, rb);
    CHECK_THAT(renamed.value, WithinAbs(base.value, 1e-15));
}

TEST_CASE("cohens_kappa errors") {
    CHECK_THROWS_AS(cohens_kappa({"a"}, {"a", "b"}), LengthMismatchError);
    CHECK_THROWS_AS(cohens_kappa({}, {}), DegenerateInputError);
}

TEST_CASE("icc is 1 for identical non-constant vectors") {
    std::vector<double> a = {1, 2, 3, 5, 8};
    auto result = icc(a, a);
    CHECK_FALSE(result.degenerate);
    CHECK_THAT(result.value, WithinAbs(1.0, 1e-12));
}

TEST_CASE("icc penalizes a constant offset (absolute agreement)") {
    std::vector<double> a = {1, 2, 3, 4, 5};
    std::vector<double> b = {101, 102, 103, 104, 105};
    auto result = icc(a, b);
    CHECK(result.value < 0.5);

    // mean-squares oracle for the same input, written out longhand
    const double n = 5, k = 2;
    double grand = 0;
    for (double v : a) grand += v;
    for (double v : b) grand += v;
    grand /= (n * k);
    double ss_rows = 0, ss_total = 0;
    for (std::size_t i = 0; i < 5; ++i) {
        double row_mean = (a[i] + b[i]) / 2;
        ss_rows += k * (row_mean - grand) * (row_mean - grand);
        ss_total += (a[i] - grand) * (a[i] - grand) + (b[i] - grand) * (b[i] - grand);
    }
    double mean_a = 3, mean_b = 103;
    double ss_cols = n * ((mean_a - grand) * (mean_a - grand) + (mean_b - grand) * (mean_b - grand));
    double ss_err = ss_total - ss_rows - ss_cols;
    double msr = ss_rows / (n - 1), msc = ss_cols / (k - 1), mse = ss_err / ((n - 1) * (k - 1));
    double expected = (msr - mse) / (msr + (k - 1) * mse + (k / n) * (msc - mse));
    CHECK_THAT(result.value, WithinAbs(expected, 1e-12));
}

TEST_CASE("icc throws on constant input") {
    std::vector<double> constant(4, 2.0);
    CHECK_THROWS_AS(icc(constant, constant), DegenerateInputError);
    CHECK_THROWS_AS(icc({1.0}, {1.0}), DegenerateInputError);
    CHECK_THROWS_AS(icc({1, 2}, {1, 2, 3}), LengthMismatchError);
}

TEST_CASE("icc(a,a) equals 1 for random non-constant vectors") {
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> value(0, 20);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a;
        for (int i = 0; i < 10; ++i) a.push_back(std::round(value(rng)));
        bool constant = true;
        for (double v : a) {
            if (v != a[0]) constant = false;
        }
        if (constant) continue;
        CHECK_THAT(icc(a, a).value, WithinAbs(1.0, 1e-12));
    }
}

TEST_CASE("mean_difference identical vectors give 0.00 +/- 0.00") {
    std::vector<double> a = {3, 1, 4, 1, 5};
    auto result = mean_difference(a, a);
    CHECK_THAT(result.value, WithinAbs(0.0, 1e-15));
    REQUIRE(result.sd.has_value());
    CHECK_THAT(*result.sd, WithinAbs(0.0, 1e-15));
}

TEST_CASE("mean_difference constant offset gives offset +/- 0") {
    std::vector<double> a = {1, 2, 3};
    std::vector<double> b = {3, 4, 5};
    auto result = mean_difference(a, b);
    CHECK_THAT(result.value, WithinAbs(2.0, 1e-15));
    CHECK_THAT(*result.sd, WithinAbs(0.0, 1e-15));
}

TEST_CASE("mean_difference fixture engineered for the published 1.88 +/- 2.12 row") {
    // |a-b| = {6,6,4,4,3,3,2,2,1,1,0,0,0,0,0,0,0}: mean 32/17, sample sd
    // rounds to exactly the published pair
    std::vector<double> diffs = {6, 6, 4, 4, 3, 3, 2, 2, 1, 1, 0, 0, 0, 0, 0, 0, 0};
    std::vector<double> a(17, 1.0), b;
    for (std::size_t i = 0; i < diffs.size(); ++i) {
        b.push_back(i % 2 == 0 ? 1.0 + diffs[i] : 1.0 - diffs[i]);
    }
    auto result = mean_difference(a, b);
    CHECK_THAT(result.value, WithinAbs(32.0 / 17.0, 1e-12));
    char mean_buf[16], sd_buf[16];
    std::snprintf(mean_buf, sizeof(mean_buf), "%.2f", result.value);
    std::snprintf(sd_buf, sizeof(sd_buf), "%.2f", *result.sd);
    CHECK(std::string(mean_buf) == "1.88");
    CHECK(std::string(sd_buf) == "2.12");
}

TEST_CASE("mean_difference is symmetric") {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> value(-50, 50);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a, b;
        for (int i = 0; i < 12; ++i) {
            a.push_back(value(rng));
            b.push_back(value(rng));
        }
        auto ab = mean_difference(a, b);
        auto ba = mean_difference(b, a);
        CHECK_THAT(ab.value, WithinAbs(ba.value, 1e-12));
        CHECK_THAT(*ab.sd, WithinAbs(*ba.sd, 1e-12));
    }
}

TEST_CASE("agreement_table over identical annotation sets gives kappa and ICC of 1") {
    auto fixture = testsupport::make_published_eval_fixture();
    std::vector<EvaluationRecord> rater_a(fixture.records.begin(), fixture.records.begin() + 120);
    std::vector<EvaluationRecord> rater_b = rater_a;
    for (auto& r : rater_b) r.annotator_id = "a2";
    auto rows = agreement_table(rater_a, rater_b);
    REQUIRE_FALSE(rows.empty());
    for (const auto& row : rows) {
        INFO(row.question);
        if (row.n == 0) continue;
        CHECK_THAT(row.agreement, WithinAbs(1.0, 1e-15));
        if (row.kappa) CHECK_THAT(*row.kappa, WithinAbs(1.0, 1e-12));
        if (row.icc_value) CHECK_THAT(*row.icc_value, WithinAbs(1.0, 1e-12));
        if (row.mean_diff) CHECK_THAT(*row.mean_diff, WithinAbs(0.0, 1e-15));
    }
}

TEST_CASE("agreement_table throws when the sets share no papers") {
    EvaluationRecord a;
    a.paper_id = "left";
    a.annotator_id = "a1";
    EvaluationRecord b;
    b.paper_id = "right";
    b.annotator_id = "a2";
    CHECK_THROWS_AS(agreement_table({a}, {b}), EmptyInputError);
}

TEST_CASE("records CSV export/import round-trips") {
    auto fixture = testsupport::make_published_eval_fixture();
    std::vector<EvaluationRecord> subset(fixture.records.begin(), fixture.records.begin() + 25);
    EvaluationRecord skip;
    skip.paper_id = "skipped-1";
    skip.annotator_id = "a1";
    skip.skip_reason = "not in English";
    subset.push_back(skip);
    std::string csv_text = records_to_csv(subset);
    auto imported = records_from_csv(csv_text);
    REQUIRE(imported.size() == subset.size());
    for (std::size_t i = 0; i < subset.size(); ++i) {
        CHECK(record_to_json(imported[i]).dump() == record_to_json(subset[i]).dump());
    }
}

TEST_CASE("records CSV import validates rows") {
    std::string bad = "paper_id,annotator_id,skipped,title_ok,authors_ok,abstract_ok,"
                      "has_equations,figures_present,figures_correct,figure_captions_correct,"
                      "figure_captions_mixed,tables_present,tables_correct,"
                      "table_captions_correct,table_captions_mixed,table_content_mixed,"
                      "header_footer_errors,section_heading_errors,missing_paragraphs,"
                      "bibliography_grade,inline_citation_grade,readability,comments\n"
                      "p1,a1,,yes,yes,yes,false,2,5,2,0,0,0,0,0,0,0,0,0,all_correct,"
                      "all_linked,no_major_problems,\n";
    CHECK_THROWS_AS(records_from_csv(bad), InvalidRecordError); // correct > present
}
