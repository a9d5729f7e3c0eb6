// scia11y command line: render single papers, process corpora into a
// browsable static bundle, run compliance audits, compute statistics, and
// manage evaluation records. See docs/formats.md for file formats and the
// exit-code contract.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "scia11y/batch.hpp"
#include "scia11y/compliance.hpp"
#include "scia11y/evaluation.hpp"
#include "scia11y/stats.hpp"
#include "scia11y/version.hpp"

namespace fs = std::filesystem;
using scia11y::Diagnostics;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInput = 2;
constexpr int kExitAudit = 3;

std::optional<std::string> env_str(const char* name) {
    const char* v = std::getenv(name);
    if (v == nullptr || *v == '\0') return std::nullopt;
    return std::string(v);
}

bool env_bool(const char* name, bool fallback) {
    auto v = env_str(name);
    if (!v) return fallback;
    std::string s = scia11y::strings::to_lower(*v);
    return s == "1" || s == "true" || s == "yes" || s == "on";
}

std::string fmt_rate(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

nlohmann::ordered_json stat_to_json(const scia11y::stats::StatResult& s) {
    nlohmann::ordered_json j;
    j["statistic"] = scia11y::stats::stat_kind_name(s.kind);
    if (std::isfinite(s.value)) {
        j["value"] = s.value;
    } else {
        j["value"] = nullptr;
        j["value_note"] = std::isinf(s.value) ? "infinite" : "undefined";
    }
    if (std::isfinite(s.p_value)) {
        j["p_value"] = s.p_value;
    } else {
        j["p_value"] = nullptr;
    }
    j["group_sizes"] = s.group_sizes;
    j["degenerate"] = s.degenerate;
    if (!s.note.empty()) j["note"] = s.note;
    return j;
}

scia11y::ClusterTable load_cluster_table(const std::string& path, Diagnostics& diag) {
    std::string resolved = path;
    if (resolved.empty()) {
        if (auto env = env_str("SCIA11Y_CLUSTERS")) resolved = *env;
    }
    if (resolved.empty()) return scia11y::default_cluster_table();
    try {
        auto j = nlohmann::json::parse(scia11y::read_file(resolved));
        return scia11y::cluster_table_from_json(j);
    } catch (const std::exception& e) {
        diag.warn("cluster_table_unreadable",
                  std::string("falling back to the built-in cluster table: ") + e.what(), resolved);
        return scia11y::default_cluster_table();
    }
}

struct ComplianceData {
    std::vector<scia11y::ComplianceRecord> records;
    std::size_t total_files = 0;
    std::size_t unreadable = 0;
};

ComplianceData load_compliance(const std::string& reports_dir, const std::string& metadata_csv,
                               const scia11y::ClusterTable& clusters, Diagnostics& diag) {
    ComplianceData data;
    std::map<std::string, scia11y::PaperMetadata> metadata;
    if (!metadata_csv.empty()) {
        metadata = scia11y::parse_metadata_csv(scia11y::read_file(metadata_csv));
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(reports_dir)) {
        if (!entry.is_regular_file()) continue;
        auto ext = entry.path().extension().string();
        if (ext == ".json" || ext == ".html" || ext == ".htm") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    data.total_files = files.size();
    for (const auto& path : files) {
        try {
            scia11y::ComplianceRecord record = scia11y::parse_report(scia11y::read_file(path));
            if (record.paper_id.empty()) record.paper_id = path.stem().string();
            auto it = metadata.find(record.paper_id);
            if (it != metadata.end()) {
                scia11y::attach_metadata(record, it->second, clusters);
            } else {
                record.software_cluster = scia11y::kOtherCluster;
                diag.warn("metadata_missing", "no metadata row for this paper", record.paper_id);
            }
            data.records.push_back(std::move(record));
        } catch (const scia11y::ReportUnreadableError& e) {
            ++data.unreadable;
            diag.warn("report_unreadable", e.what(), path.string());
        }
    }
    return data;
}

void write_aggregate_csv(const fs::path& path, const std::vector<scia11y::AggregateRow>& rows) {
    std::ostringstream out;
    scia11y::csv::write_row(out, {"group", "n", "alt_text_rate", "table_headers_rate",
                                  "tagged_pdf_rate", "default_language_rate", "tab_order_rate",
                                  "mean_normalized", "adobe5_rate"});
    for (const auto& row : rows) {
        scia11y::csv::write_row(
            out, {row.group, std::to_string(row.n), fmt_rate(row.criterion_rates[0]),
                  fmt_rate(row.criterion_rates[1]), fmt_rate(row.criterion_rates[2]),
                  fmt_rate(row.criterion_rates[3]), fmt_rate(row.criterion_rates[4]),
                  fmt_rate(row.mean_normalized), fmt_rate(row.adobe5_rate)});
    }
    scia11y::atomic_write_file(path, out.str());
}

nlohmann::ordered_json aggregate_rows_to_json(const std::vector<scia11y::AggregateRow>& rows) {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
        nlohmann::ordered_json r;
        r["group"] = row.group;
        r["n"] = row.n;
        for (std::size_t i = 0; i < scia11y::kAllCriteria.size(); ++i) {
            r[scia11y::criterion_name(scia11y::kAllCriteria[i])] = row.criterion_rates[i];
        }
        r["mean_normalized"] = row.mean_normalized;
        r["adobe5_rate"] = row.adobe5_rate;
        j.push_back(std::move(r));
    }
    return j;
}

std::vector<scia11y::EvaluationRecord> load_evaluation_records(const std::string& source,
                                                               std::vector<std::string>& offenders) {
    std::vector<scia11y::EvaluationRecord> records;
    fs::path path(source);
    if (fs::is_regular_file(path) && path.extension() == ".csv") {
        records = scia11y::records_from_csv(scia11y::read_file(path));
        return records;
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(source)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
        try {
            records.push_back(scia11y::parse_record(scia11y::read_file(file)));
        } catch (const scia11y::InvalidRecordError& e) {
            offenders.push_back(file.string() + ": " + e.what());
        }
    }
    return records;
}

std::map<std::string, std::string> load_field_map(const std::string& path) {
    std::map<std::string, std::string> out;
    if (path.empty()) return out;
    auto rows = scia11y::csv::parse(scia11y::read_file(path));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() < 2) continue;
        if (i == 0 && scia11y::strings::iequals(scia11y::strings::trim(row[0]), "paper_id")) {
            continue; // header
        }
        out[row[0]] = row[1];
    }
    return out;
}

void write_element_table_csv(const fs::path& path, const scia11y::ElementTable& table) {
    std::ostringstream out;
    scia11y::csv::write_row(out, {"element", "bucket", "count"});
    for (const auto& row : table.rows) {
        for (const auto& [bucket, count] : row.buckets) {
            scia11y::csv::write_row(out, {row.element, bucket, std::to_string(count)});
        }
    }
    scia11y::atomic_write_file(path, out.str());
}

nlohmann::ordered_json element_table_to_json(const scia11y::ElementTable& table) {
    nlohmann::ordered_json j;
    j["n_papers"] = table.n_papers;
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
        nlohmann::ordered_json r;
        r["element"] = row.element;
        r["buckets"] = nlohmann::ordered_json::object();
        for (const auto& [bucket, count] : row.buckets) r["buckets"][bucket] = count;
        j["rows"].push_back(std::move(r));
    }
    return j;
}

void write_readability_csv(const fs::path& path,
                           const std::vector<scia11y::ReadabilityRow>& rows) {
    std::ostringstream out;
    scia11y::csv::write_row(out, {"field", "n", "good", "okay", "bad"});
    for (const auto& row : rows) {
        scia11y::csv::write_row(out, {row.field, std::to_string(row.n), std::to_string(row.good),
                                      std::to_string(row.okay), std::to_string(row.bad)});
    }
    scia11y::atomic_write_file(path, out.str());
}

void write_agreement_csv(const fs::path& path, const std::vector<scia11y::AgreementRow>& rows) {
    std::ostringstream out;
    scia11y::csv::write_row(out, {"question", "type", "n", "agreement", "kappa", "icc",
                                  "mean_difference", "sd", "note"});
    for (const auto& row : rows) {
        scia11y::csv::write_row(
            out, {row.question, row.numeric ? "numeric" : "categorical", std::to_string(row.n),
                  row.n > 0 ? fmt_rate(row.agreement) : std::string{},
                  row.kappa ? fmt_rate(*row.kappa) : std::string{},
                  row.icc_value ? fmt_rate(*row.icc_value) : std::string{},
                  row.mean_diff ? fmt_rate(*row.mean_diff) : std::string{},
                  row.mean_diff_sd ? fmt_rate(*row.mean_diff_sd) : std::string{}, row.note});
    }
    scia11y::atomic_write_file(path, out.str());
}

nlohmann::ordered_json agreement_rows_to_json(const std::vector<scia11y::AgreementRow>& rows) {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
        nlohmann::ordered_json r;
        r["question"] = row.question;
        r["type"] = row.numeric ? "numeric" : "categorical";
        r["n"] = row.n;
        r["agreement"] = row.agreement;
        if (row.kappa) r["kappa"] = *row.kappa;
        if (row.icc_value) r["icc"] = *row.icc_value;
        if (row.mean_diff) r["mean_difference"] = *row.mean_diff;
        if (row.mean_diff_sd) r["sd"] = *row.mean_diff_sd;
        if (!row.note.empty()) r["note"] = row.note;
        j.push_back(std::move(r));
    }
    return j;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"scia11y: accessible HTML renders of scientific-PDF extractions, "
                 "plus accessibility-compliance analytics and render evaluation"};
    app.set_version_flag("--version", scia11y::kVersion);
    app.require_subcommand(1);

    // --- render ---
    std::string render_fulltext, render_figures, render_out, render_lang, render_assets_root;
    bool render_inline = false, render_allow_mismatch = false;
    auto* cmd_render = app.add_subcommand("render", "Render one paper to accessible HTML");
    cmd_render->add_option("fulltext", render_fulltext, "Full-text extraction JSON")->required();
    cmd_render->add_option("figures", render_figures, "Figure manifest JSON (optional)");
    cmd_render->add_option("-o,--out", render_out, "Output directory")->required();
    auto* render_lang_opt = cmd_render->add_option("--lang", render_lang, "Document language tag");
    cmd_render->add_flag("--inline-images", render_inline, "Embed images as data: URIs");
    cmd_render->add_option("--assets-dir", render_assets_root,
                           "Directory image paths are resolved against");
    cmd_render->add_flag("--allow-id-mismatch", render_allow_mismatch,
                         "Merge even when paper ids differ");

    // --- batch ---
    std::string batch_manifest, batch_out;
    int batch_parallelism = 0;
    auto* cmd_batch = app.add_subcommand("batch", "Render a corpus with a resumable ledger");
    cmd_batch->add_option("manifest", batch_manifest, "Job manifest JSON")->required();
    auto* batch_par_opt =
        cmd_batch->add_option("--parallelism", batch_parallelism, "Worker thread count");
    auto* batch_out_opt = cmd_batch->add_option("--output-dir", batch_out, "Override output dir");

    // --- audit ---
    std::string audit_reports, audit_metadata, audit_out, audit_clusters;
    auto* cmd_audit = app.add_subcommand("audit", "Score accessibility-checker reports");
    cmd_audit->add_option("--reports", audit_reports, "Directory of checker reports")->required();
    cmd_audit->add_option("--metadata", audit_metadata, "Metadata CSV (paper_id,year,field,...)");
    cmd_audit->add_option("-o,--out", audit_out, "Output directory")->required();
    cmd_audit->add_option("--clusters", audit_clusters, "Software cluster table JSON");

    // --- stats ---
    std::string stats_reports, stats_metadata, stats_out, stats_clusters;
    bool stats_include_other = false;
    auto* cmd_stats = app.add_subcommand("stats", "Compute compliance statistics with p-values");
    cmd_stats->add_option("--reports", stats_reports, "Directory of checker reports")->required();
    cmd_stats->add_option("--metadata", stats_metadata, "Metadata CSV")->required();
    cmd_stats->add_option("-o,--out", stats_out, "Output directory (stats.json also on stdout)");
    cmd_stats->add_option("--clusters", stats_clusters, "Software cluster table JSON");
    cmd_stats->add_flag("--include-other", stats_include_other,
                        "Include the Other cluster in the group comparison");

    // --- evaluate ---
    std::string eval_records, eval_out, eval_field_map, eval_reconcile = "first";
    std::uint64_t eval_seed = 0;
    auto* cmd_evaluate = app.add_subcommand("evaluate", "Aggregate rubric evaluation records");
    cmd_evaluate->add_option("--records", eval_records, "Record directory or CSV file")->required();
    cmd_evaluate->add_option("-o,--out", eval_out, "Output directory")->required();
    cmd_evaluate->add_option("--field-map", eval_field_map, "CSV mapping paper_id to field");
    cmd_evaluate->add_option("--reconcile", eval_reconcile,
                             "Multi-annotator reconciliation: first|random");
    cmd_evaluate->add_option("--seed", eval_seed, "Seed for random reconciliation");

    // --- agreement ---
    std::string agree_a, agree_b, agree_out;
    auto* cmd_agreement =
        app.add_subcommand("agreement", "Inter-rater agreement over overlapping papers");
    cmd_agreement->add_option("--a", agree_a, "First rater's records (dir or CSV)")->required();
    cmd_agreement->add_option("--b", agree_b, "Second rater's records (dir or CSV)")->required();
    cmd_agreement->add_option("-o,--out", agree_out, "Output directory");

    // --- self-audit ---
    std::string selfaudit_file;
    auto* cmd_selfaudit = app.add_subcommand("self-audit", "Audit an HTML render");
    cmd_selfaudit->add_option("file", selfaudit_file, "HTML file")->required();

    CLI11_PARSE(app, argc, argv);

    Diagnostics diag;
    try {
        if (*cmd_render) {
            std::string lang = render_lang_opt->count() > 0 ? render_lang
                               : env_str("SCIA11Y_LANG") ? *env_str("SCIA11Y_LANG")
                                                         : std::string("en");
            scia11y::RenderOptions options;
            options.lang = lang;
            options.inline_images = render_inline || env_bool("SCIA11Y_INLINE_IMAGES", false);
            options.allow_paper_id_mismatch = render_allow_mismatch;
            options.asset_source_root = render_assets_root;
            std::optional<fs::path> figures;
            if (!render_figures.empty()) figures = fs::path(render_figures);
            scia11y::RenderResult result;
            try {
                result = scia11y::render_document(render_fulltext, figures, render_out, options, diag);
            } catch (const scia11y::Error& e) {
                diag.write_json_lines(std::cerr);
                std::cerr << "error (" << e.code() << "): " << e.what() << "\n";
                return kExitInput;
            }
            diag.write_json_lines(std::cerr);
            std::cout << nlohmann::ordered_json{{"paper_id", result.paper_id},
                                                {"audit_pass", result.audit_pass},
                                                {"warnings", result.warning_count},
                                                {"files", result.files_written}}
                             .dump(2)
                      << "\n";
            return result.audit_pass ? kExitOk : kExitAudit;
        }

        if (*cmd_batch) {
            auto manifest_json = nlohmann::json::parse(scia11y::read_file(batch_manifest));
            scia11y::JobManifest manifest = scia11y::job_manifest_from_json(manifest_json);
            // Precedence: flags > environment > manifest > defaults.
            if (auto env = env_str("SCIA11Y_PARALLELISM")) manifest.parallelism = std::stoi(*env);
            if (batch_par_opt->count() > 0) manifest.parallelism = batch_parallelism;
            if (auto env = env_str("SCIA11Y_LANG")) manifest.lang = *env;
            manifest.continue_on_error =
                env_bool("SCIA11Y_CONTINUE_ON_ERROR", manifest.continue_on_error);
            if (batch_out_opt->count() > 0) manifest.output_dir = batch_out;
            if (manifest.parallelism < 1) manifest.parallelism = 1;
            scia11y::BatchSummary summary = scia11y::run_batch(manifest, &std::cerr);
            std::cout << summary.to_json().dump(2) << "\n";
            if (summary.failed > 0 && !manifest.continue_on_error) return kExitFailure;
            return kExitOk;
        }

        if (*cmd_audit) {
            scia11y::ClusterTable clusters = load_cluster_table(audit_clusters, diag);
            ComplianceData data = load_compliance(audit_reports, audit_metadata, clusters, diag);
            diag.write_json_lines(std::cerr);
            if (data.total_files == 0) {
                std::cerr << "error: no checker reports found in " << audit_reports << "\n";
                return kExitInput;
            }
            if (data.unreadable * 2 > data.total_files) {
                std::cerr << "error: " << data.unreadable << " of " << data.total_files
                          << " reports unreadable\n";
                return kExitInput;
            }
            fs::create_directories(audit_out);
            fs::path out(audit_out);

            nlohmann::ordered_json records_json = nlohmann::ordered_json::array();
            for (const auto& r : data.records) {
                nlohmann::ordered_json rj;
                rj["paper_id"] = r.paper_id;
                rj["year"] = r.year;
                rj["field_of_study"] = r.field_of_study;
                for (auto c : scia11y::kAllCriteria) {
                    rj[scia11y::criterion_name(c)] =
                        r.status(c) == scia11y::CriterionStatus::Passed   ? "passed"
                        : r.status(c) == scia11y::CriterionStatus::Failed ? "failed"
                                                                          : "needs_manual_check";
                }
                auto s = scia11y::score(r);
                rj["total_compliance"] = s.total;
                rj["normalized_compliance"] = s.normalized;
                rj["adobe5"] = s.adobe5;
                rj["software_cluster"] = r.software_cluster;
                records_json.push_back(std::move(rj));
            }
            scia11y::atomic_write_file(out / "records.json", records_json.dump(2) + "\n");

            scia11y::AggregateRow overall = scia11y::aggregate_overall(data.records);
            {
                std::ostringstream os;
                scia11y::csv::write_row(os, {"criterion", "rate"});
                for (std::size_t i = 0; i < scia11y::kAllCriteria.size(); ++i) {
                    scia11y::csv::write_row(os, {scia11y::criterion_name(scia11y::kAllCriteria[i]),
                                                 fmt_rate(overall.criterion_rates[i])});
                }
                scia11y::csv::write_row(os, {"Adobe-5", fmt_rate(overall.adobe5_rate)});
                scia11y::atomic_write_file(out / "criterion_rates.csv", os.str());
            }
            {
                auto histogram = scia11y::compliance_histogram(data.records);
                std::ostringstream os;
                scia11y::csv::write_row(os, {"total_compliance", "count"});
                for (std::size_t i = 0; i < histogram.size(); ++i) {
                    scia11y::csv::write_row(os, {std::to_string(i), std::to_string(histogram[i])});
                }
                scia11y::atomic_write_file(out / "histogram.csv", os.str());
                nlohmann::ordered_json hj;
                hj["buckets"] = histogram;
                hj["excluded_unreadable"] = data.unreadable;
                scia11y::atomic_write_file(out / "histogram.json", hj.dump(2) + "\n");
            }
            write_aggregate_csv(out / "by_year.csv",
                                scia11y::aggregate(data.records, scia11y::GroupBy::Year));
            write_aggregate_csv(out / "by_field.csv",
                                scia11y::aggregate(data.records, scia11y::GroupBy::FieldOfStudy));
            write_aggregate_csv(out / "by_software.csv",
                                scia11y::aggregate(data.records, scia11y::GroupBy::SoftwareCluster));
            nlohmann::ordered_json tables;
            tables["overall"] = aggregate_rows_to_json({overall});
            tables["by_year"] =
                aggregate_rows_to_json(scia11y::aggregate(data.records, scia11y::GroupBy::Year));
            tables["by_field"] = aggregate_rows_to_json(
                scia11y::aggregate(data.records, scia11y::GroupBy::FieldOfStudy));
            tables["by_software"] = aggregate_rows_to_json(
                scia11y::aggregate(data.records, scia11y::GroupBy::SoftwareCluster));
            tables["excluded_unreadable"] = data.unreadable;
            scia11y::atomic_write_file(out / "tables.json", tables.dump(2) + "\n");
            std::cout << "audited " << data.records.size() << " reports (" << data.unreadable
                      << " unreadable) -> " << audit_out << "\n";
            return kExitOk;
        }

        if (*cmd_stats) {
            scia11y::ClusterTable clusters = load_cluster_table(stats_clusters, diag);
            ComplianceData data = load_compliance(stats_reports, stats_metadata, clusters, diag);
            diag.write_json_lines(std::cerr);
            if (data.total_files == 0 || data.unreadable * 2 > data.total_files) {
                std::cerr << "error: reports missing or mostly unreadable\n";
                return kExitInput;
            }
            nlohmann::ordered_json j;
            auto groups = scia11y::compliance_by_cluster(data.records, stats_include_other);
            std::vector<std::string> group_names = scia11y::named_clusters();
            if (stats_include_other) group_names.push_back(scia11y::kOtherCluster);
            j["groups"] = group_names;
            try {
                j["anova"] = stat_to_json(scia11y::stats::anova_f(groups));
            } catch (const scia11y::Error& e) {
                j["anova"] = nlohmann::ordered_json{{"error", e.what()}};
            }
            try {
                j["kruskal_wallis"] = stat_to_json(scia11y::stats::kruskal_wallis_h(groups));
            } catch (const scia11y::Error& e) {
                j["kruskal_wallis"] = nlohmann::ordered_json{{"error", e.what()}};
            }
            auto by_field = scia11y::word_share_by_field(data.records);
            std::vector<double> word_share, mean_norm;
            for (const auto& row : by_field) {
                word_share.push_back(row.word_share);
                mean_norm.push_back(row.mean_normalized);
            }
            try {
                j["pearson_word_share_vs_compliance"] =
                    stat_to_json(scia11y::stats::pearson_r(word_share, mean_norm));
            } catch (const scia11y::Error& e) {
                j["pearson_word_share_vs_compliance"] = nlohmann::ordered_json{{"error", e.what()}};
            }
            std::string payload = j.dump(2) + "\n";
            std::cout << payload;
            if (!stats_out.empty()) {
                fs::create_directories(stats_out);
                scia11y::atomic_write_file(fs::path(stats_out) / "stats.json", payload);
            }
            return kExitOk;
        }

        if (*cmd_evaluate) {
            std::vector<std::string> offenders;
            std::vector<scia11y::EvaluationRecord> records;
            try {
                records = load_evaluation_records(eval_records, offenders);
            } catch (const scia11y::Error& e) {
                std::cerr << "error (" << e.code() << "): " << e.what() << "\n";
                return kExitInput;
            }
            if (!offenders.empty()) {
                std::cerr << "invalid records:\n";
                for (const auto& o : offenders) std::cerr << "  " << o << "\n";
                return kExitInput;
            }
            scia11y::ReconcilePolicy policy;
            if (eval_reconcile == "random") {
                policy.kind = scia11y::ReconcilePolicy::Kind::RandomWithSeed;
                policy.seed = eval_seed;
            } else if (eval_reconcile != "first") {
                std::cerr << "error: --reconcile must be first or random\n";
                return kExitInput;
            }
            fs::create_directories(eval_out);
            fs::path out(eval_out);
            scia11y::ElementTable table;
            try {
                table = scia11y::aggregate_errors(records, policy);
            } catch (const scia11y::EmptyInputError& e) {
                std::cerr << "error: " << e.what() << "\n";
                return kExitInput;
            }
            write_element_table_csv(out / "element_table.csv", table);
            scia11y::atomic_write_file(out / "element_table.json",
                                       element_table_to_json(table).dump(2) + "\n");
            auto field_map = load_field_map(eval_field_map);
            auto readability = scia11y::readability_by_field(records, field_map, policy);
            write_readability_csv(out / "readability_by_field.csv", readability);
            {
                nlohmann::ordered_json rj = nlohmann::ordered_json::array();
                for (const auto& row : readability) {
                    rj.push_back(nlohmann::ordered_json{{"field", row.field},
                                                        {"n", row.n},
                                                        {"good", row.good},
                                                        {"okay", row.okay},
                                                        {"bad", row.bad}});
                }
                scia11y::atomic_write_file(out / "readability_by_field.json", rj.dump(2) + "\n");
            }
            scia11y::atomic_write_file(out / "records.csv", scia11y::records_to_csv(records));
            std::cout << "aggregated " << table.n_papers << " papers -> " << eval_out << "\n";
            return kExitOk;
        }

        if (*cmd_agreement) {
            std::vector<std::string> offenders;
            std::vector<scia11y::EvaluationRecord> a = load_evaluation_records(agree_a, offenders);
            std::vector<scia11y::EvaluationRecord> b = load_evaluation_records(agree_b, offenders);
            if (!offenders.empty()) {
                std::cerr << "invalid records:\n";
                for (const auto& o : offenders) std::cerr << "  " << o << "\n";
                return kExitInput;
            }
            std::vector<scia11y::AgreementRow> rows;
            try {
                rows = scia11y::agreement_table(a, b);
            } catch (const scia11y::EmptyInputError& e) {
                std::cerr << "error: " << e.what() << "\n";
                return kExitInput;
            }
            std::string payload = agreement_rows_to_json(rows).dump(2) + "\n";
            std::cout << payload;
            if (!agree_out.empty()) {
                fs::create_directories(agree_out);
                write_agreement_csv(fs::path(agree_out) / "agreement.csv", rows);
                scia11y::atomic_write_file(fs::path(agree_out) / "agreement.json", payload);
            }
            return kExitOk;
        }

        if (*cmd_selfaudit) {
            scia11y::AuditReport report = scia11y::self_audit(scia11y::read_file(selfaudit_file));
            std::cout << report.to_json().dump(2) << "\n";
            return report.all_passed() ? kExitOk : kExitAudit;
        }
    } catch (const scia11y::Error& e) {
        std::cerr << "error (" << e.code() << "): " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitOk;
}
