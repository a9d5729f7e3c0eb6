#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "scia11y/audit.hpp"
#include "scia11y/diagnostics.hpp"
#include "scia11y/errors.hpp"
#include "scia11y/extraction.hpp"
#include "scia11y/html.hpp"
#include "scia11y/stitcher.hpp"

namespace scia11y {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// File helpers. All outputs are written to a temp file and renamed into
// place, so no command leaves a partially written file behind on failure.
// ---------------------------------------------------------------------------

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void atomic_write_file(const fs::path& path, std::string_view content) {
    static std::atomic<unsigned> counter{0};
    fs::path tmp = path;
    tmp += ".tmp" + std::to_string(counter.fetch_add(1));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw IoError("failed writing " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("failed to move " + tmp.string() + " into place");
    }
}

// ---------------------------------------------------------------------------
// Single-document pipeline
// ---------------------------------------------------------------------------

struct RenderOptions {
    std::string lang = "en";
    bool inline_images = false;
    bool allow_paper_id_mismatch = false;
    std::string asset_source_root; // defaults to the figure manifest's directory
};

struct RenderResult {
    std::string paper_id;
    bool audit_pass = false;
    std::size_t warning_count = 0;
    std::vector<std::string> files_written; // relative to out_dir
};

// Parses, merges, emits and audits one document, then writes
// <paper_id>.html, <paper_id>.render.json and <paper_id>.audit.json plus any
// referenced assets. Everything is built in memory first; parse failures
// leave no partial output.
inline RenderResult render_document(const fs::path& fulltext_path,
                                    const std::optional<fs::path>& figures_path,
                                    const fs::path& out_dir, const RenderOptions& options,
                                    Diagnostics& diag) {
    diag.set_default_context(fulltext_path.stem().string());
    std::string fulltext_raw = read_file(fulltext_path);
    ExtractedDocument doc = parse_extraction(fulltext_raw, diag);
    if (doc.paper_id.empty()) {
        doc.paper_id = fulltext_path.stem().string();
    }
    diag.set_default_context(doc.paper_id);

    FigureManifest figures;
    std::string asset_root = options.asset_source_root;
    if (figures_path && fs::exists(*figures_path)) {
        figures = parse_figures(read_file(*figures_path), diag);
        if (asset_root.empty()) asset_root = figures_path->parent_path().string();
    } else {
        diag.warn_here("figure_manifest_missing",
                       "no figure manifest; mentioned objects become placeholders");
    }

    MergeOptions merge_options;
    merge_options.allow_paper_id_mismatch = options.allow_paper_id_mismatch;
    merge_options.lang = options.lang;
    RenderTree tree = merge(doc, figures, diag, merge_options);

    EmitOptions emit_options;
    emit_options.inline_images = options.inline_images;
    emit_options.asset_source_root = asset_root;
    // per-document asset namespace so same-named images from different papers
    // cannot collide in a batch output tree
    emit_options.assets_href = "assets/" + doc.paper_id;
    HtmlRender render = emit_html(tree, emit_options, diag);
    AuditReport report = self_audit(render.bytes);

    fs::create_directories(out_dir);
    RenderResult result;
    result.paper_id = doc.paper_id;
    result.audit_pass = report.all_passed();

    std::string html_name = doc.paper_id + ".html";
    std::string tree_name = doc.paper_id + ".render.json";
    std::string audit_name = doc.paper_id + ".audit.json";
    atomic_write_file(out_dir / html_name, render.bytes);
    atomic_write_file(out_dir / tree_name, render_tree_to_json(tree).dump(2) + "\n");
    atomic_write_file(out_dir / audit_name, report.to_json().dump(2) + "\n");
    result.files_written = {html_name, tree_name, audit_name};

    if (!options.inline_images) {
        bool made_assets_dir = false;
        for (const auto& block : tree.body) {
            const auto* obj = std::get_if<ObjectBlock>(&block);
            if (obj == nullptr || obj->object.image_path.empty()) continue;
            fs::path source = asset_root.empty() ? fs::path(obj->object.image_path)
                                                 : fs::path(asset_root) / obj->object.image_path;
            std::error_code ec;
            if (!fs::exists(source, ec) || !fs::is_regular_file(source, ec)) continue;
            fs::path rel = fs::path("assets") / doc.paper_id / source.filename();
            if (!made_assets_dir) {
                fs::create_directories(out_dir / "assets" / doc.paper_id);
                made_assets_dir = true;
            }
            atomic_write_file(out_dir / rel, read_file(source));
            result.files_written.push_back(rel.string());
        }
    }

    result.warning_count = diag.count();
    return result;
}

// ---------------------------------------------------------------------------
// Batch processing with a resumable status ledger
// ---------------------------------------------------------------------------

struct JobManifest {
    std::string fulltext_dir;
    std::string figures_dir;
    std::string assets_dir; // optional override for image resolution
    std::string output_dir;
    int parallelism = 1;
    bool continue_on_error = true;
    std::string lang = "en";
    bool inline_images = false;
};

inline JobManifest job_manifest_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw MalformedInputError("job manifest must be a JSON object");
    JobManifest m;
    m.fulltext_dir = j.value("fulltext_dir", "");
    m.figures_dir = j.value("figures_dir", "");
    m.assets_dir = j.value("assets_dir", "");
    m.output_dir = j.value("output_dir", "");
    m.parallelism = j.value("parallelism", 1);
    m.continue_on_error = j.value("continue_on_error", true);
    m.lang = j.value("lang", "en");
    m.inline_images = j.value("inline_images", false);
    if (m.fulltext_dir.empty()) throw MalformedInputError("job manifest needs fulltext_dir");
    if (m.output_dir.empty()) throw MalformedInputError("job manifest needs output_dir");
    if (m.parallelism < 1) throw MalformedInputError("parallelism must be >= 1");
    return m;
}

enum class DocStatus { Done, Failed, Skipped };

inline const char* doc_status_name(DocStatus s) {
    switch (s) {
    case DocStatus::Done: return "done";
    case DocStatus::Failed: return "failed";
    case DocStatus::Skipped: return "skipped";
    }
    return "unknown";
}

struct LedgerEntry {
    std::string paper_id;
    DocStatus status = DocStatus::Done;
    std::string reason;
    long long duration_ms = 0;
    std::size_t warnings = 0;
    bool audit_pass = false;
};

inline nlohmann::ordered_json ledger_entry_to_json(const LedgerEntry& e) {
    nlohmann::ordered_json j;
    j["paper_id"] = e.paper_id;
    j["status"] = doc_status_name(e.status);
    if (!e.reason.empty()) j["reason"] = e.reason;
    j["duration_ms"] = e.duration_ms;
    j["warnings"] = e.warnings;
    j["audit_pass"] = e.audit_pass;
    return j;
}

struct BatchSummary {
    std::size_t total = 0;
    std::size_t rendered = 0;
    std::size_t failed = 0;
    std::size_t skipped = 0;
    std::size_t resumed = 0; // already done in a previous run

    nlohmann::ordered_json to_json() const {
        return nlohmann::ordered_json{{"total", total},
                                      {"rendered", rendered},
                                      {"failed", failed},
                                      {"skipped", skipped},
                                      {"resumed", resumed}};
    }
};

namespace detail {

struct BatchDoc {
    fs::path fulltext;
    std::optional<fs::path> figures;
    std::string paper_id;
};

inline std::vector<BatchDoc> discover_documents(const JobManifest& manifest,
                                                std::vector<LedgerEntry>& pre_failures) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(manifest.fulltext_dir)) {
        if (!entry.is_regular_file()) continue;
        fs::path p = entry.path();
        if (p.extension() == ".json") files.push_back(p);
    }
    std::sort(files.begin(), files.end());

    std::vector<BatchDoc> docs;
    std::set<std::string> seen_ids;
    for (const auto& path : files) {
        BatchDoc doc;
        doc.fulltext = path;
        doc.paper_id = path.stem().string();
        try {
            auto j = nlohmann::json::parse(read_file(path), nullptr, false);
            if (j.is_object() && j.contains("paper_id") && j["paper_id"].is_string() &&
                !j["paper_id"].get<std::string>().empty()) {
                doc.paper_id = j["paper_id"].get<std::string>();
            }
        } catch (...) {
            // render_document reports the real parse failure later
        }
        if (!seen_ids.insert(doc.paper_id).second) {
            LedgerEntry entry;
            entry.paper_id = path.filename().string();
            entry.status = DocStatus::Failed;
            entry.reason = "duplicate paper_id " + doc.paper_id + "; first occurrence kept";
            pre_failures.push_back(std::move(entry));
            continue;
        }
        if (!manifest.figures_dir.empty()) {
            fs::path fig = fs::path(manifest.figures_dir) / (path.stem().string() + ".figures.json");
            if (fs::exists(fig)) doc.figures = fig;
        }
        docs.push_back(std::move(doc));
    }
    return docs;
}

inline std::map<std::string, LedgerEntry> read_ledger(const fs::path& ledger_path) {
    std::map<std::string, LedgerEntry> entries;
    if (!fs::exists(ledger_path)) return entries;
    std::ifstream in(ledger_path);
    std::string line;
    while (std::getline(in, line)) {
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) continue;
        LedgerEntry e;
        e.paper_id = j.value("paper_id", "");
        std::string status = j.value("status", "");
        if (status == "done") {
            e.status = DocStatus::Done;
        } else if (status == "failed") {
            e.status = DocStatus::Failed;
        } else if (status == "skipped") {
            e.status = DocStatus::Skipped;
        } else {
            continue;
        }
        e.reason = j.value("reason", "");
        e.duration_ms = j.value("duration_ms", 0LL);
        e.warnings = j.value("warnings", std::size_t{0});
        e.audit_pass = j.value("audit_pass", false);
        if (!e.paper_id.empty()) entries[e.paper_id] = e;
    }
    return entries;
}

inline std::string build_index_html(const std::map<std::string, LedgerEntry>& ledger,
                                    const std::string& lang) {
    std::string html;
    html += "<!DOCTYPE html>\n<html lang=\"" + escape_html_attr(lang) + "\">\n<head>\n";
    html += "<meta charset=\"utf-8\">\n<title>Rendered documents</title>\n</head>\n<body>\n";
    html += "<h1>Rendered documents</h1>\n<ul>\n";
    for (const auto& [paper_id, entry] : ledger) {
        if (entry.status != DocStatus::Done) continue;
        std::string name = escape_html_text(paper_id);
        html += "<li><a href=\"" + escape_html_attr(paper_id + ".html") + "\">" + name + "</a>";
        if (!entry.audit_pass) html += " (audit failed)";
        html += "</li>\n";
    }
    html += "</ul>\n</body>\n</html>\n";
    return html;
}

} // namespace detail

// Runs the batch described by the manifest. The ledger at
// <output_dir>/ledger.jsonl is append-only; reruns skip documents already
// recorded as done. Per-document failures never abort the run when
// continue_on_error is set. Outputs are independent of the parallelism
// degree (the ledger records completion order, which is not).
inline BatchSummary run_batch(const JobManifest& manifest, std::ostream* log = nullptr) {
    fs::create_directories(manifest.output_dir);
    fs::path ledger_path = fs::path(manifest.output_dir) / "ledger.jsonl";
    std::map<std::string, LedgerEntry> ledger = detail::read_ledger(ledger_path);

    std::vector<LedgerEntry> pre_failures;
    std::vector<detail::BatchDoc> docs = detail::discover_documents(manifest, pre_failures);

    BatchSummary summary;
    summary.total = docs.size() + pre_failures.size();

    std::vector<detail::BatchDoc> pending;
    for (auto& doc : docs) {
        auto it = ledger.find(doc.paper_id);
        if (it != ledger.end() && it->second.status == DocStatus::Done) {
            ++summary.resumed;
            ++summary.rendered;
        } else {
            pending.push_back(std::move(doc));
        }
    }

    std::ofstream ledger_out(ledger_path, std::ios::app);
    if (!ledger_out) throw IoError("cannot open ledger " + ledger_path.string());
    std::mutex ledger_mutex;
    std::atomic<bool> stop{false};
    std::atomic<std::size_t> next{0};

    auto record = [&](LedgerEntry entry) {
        std::lock_guard<std::mutex> lock(ledger_mutex);
        ledger_out << ledger_entry_to_json(entry).dump() << '\n';
        ledger_out.flush();
        if (log != nullptr) *log << ledger_entry_to_json(entry).dump() << '\n';
        switch (entry.status) {
        case DocStatus::Done: ++summary.rendered; break;
        case DocStatus::Failed: ++summary.failed; break;
        case DocStatus::Skipped: ++summary.skipped; break;
        }
        ledger[entry.paper_id] = std::move(entry);
    };

    for (auto& entry : pre_failures) {
        record(entry);
        if (!manifest.continue_on_error) stop = true;
    }

    auto worker = [&]() {
        while (!stop.load()) {
            std::size_t index = next.fetch_add(1);
            if (index >= pending.size()) break;
            const detail::BatchDoc& doc = pending[index];
            LedgerEntry entry;
            entry.paper_id = doc.paper_id;
            auto started = std::chrono::steady_clock::now();
            Diagnostics diag;
            diag.set_default_context(doc.paper_id);
            try {
                RenderOptions options;
                options.lang = manifest.lang;
                options.inline_images = manifest.inline_images;
                options.asset_source_root = manifest.assets_dir;
                RenderResult result =
                    render_document(doc.fulltext, doc.figures, manifest.output_dir, options, diag);
                entry.status = DocStatus::Done;
                entry.warnings = result.warning_count;
                entry.audit_pass = result.audit_pass;
            } catch (const Error& e) {
                entry.status = DocStatus::Failed;
                entry.reason = std::string(e.code()) + ": " + e.what();
                if (!manifest.continue_on_error) stop = true;
            } catch (const std::exception& e) {
                entry.status = DocStatus::Failed;
                entry.reason = e.what();
                if (!manifest.continue_on_error) stop = true;
            }
            entry.duration_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                    std::chrono::steady_clock::now() - started)
                                    .count();
            record(std::move(entry));
        }
    };

    int workers = std::min<int>(manifest.parallelism, static_cast<int>(pending.size()));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(static_cast<std::size_t>(workers));
        for (int i = 0; i < workers; ++i) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }

    atomic_write_file(fs::path(manifest.output_dir) / "index.html",
                      detail::build_index_html(ledger, manifest.lang));
    atomic_write_file(fs::path(manifest.output_dir) / "summary.json",
                      summary.to_json().dump(2) + "\n");
    return summary;
}

} // namespace scia11y
