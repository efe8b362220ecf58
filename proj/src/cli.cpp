#include "selfscore/cli.hpp"

#include "selfscore/config.hpp"
#include "selfscore/error.hpp"
#include "selfscore/ingest.hpp"
#include "selfscore/mock_gateway.hpp"
#include "selfscore/rag_index.hpp"
#include "selfscore/record_store.hpp"
#include "selfscore/report.hpp"
#include "selfscore/stats.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

namespace selfscore {
namespace {

namespace fs = std::filesystem;

// Flags given on the command line win; otherwise the config file value, if
// any, is used.
struct ConfigOverlay {
    Json doc = Json::object();

    void load(const std::string& path) {
        if (path.empty()) return;
        doc = Json::parse(read_text_file(path), nullptr, false);
        if (doc.is_discarded() || !doc.is_object()) throw ConfigError(path + " is not a JSON object");
        base = fs::path(path).parent_path();
    }
    template <typename T>
    void fill(const CLI::Option* opt, const char* key, T& target) const {
        if (opt->count() > 0 || !doc.contains(key)) return;
        try {
            target = doc[key].get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(std::string("config key \"") + key + "\" has the wrong type");
        }
    }
    std::string path_of(const std::string& p) const {
        return p.empty() || fs::path(p).is_absolute() || base.empty() ? p : (base / p).string();
    }

    fs::path base;
};

WeightVector parse_weights(const std::string& text) {
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            parts.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("invalid weight '" + item + "'");
        }
    }
    if (parts.size() != 3) throw ConfigError("--weights needs three comma-separated numbers");
    WeightVector w{parts[0], parts[1], parts[2]};
    w.validate();
    return w;
}

std::string utc_now_iso() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::vector<BenchmarkEntry> load_corpus_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open corpus " + path.string());
    return read_corpus(in);
}

// Mock scripts are either one array shared by every role or an object with
// per-role arrays under agent / user_proxy / judge / complexity_judge.
struct MockBackends {
    std::vector<std::unique_ptr<MockGateway>> owned;
    Backends backends;
};

MockBackends mock_backends(const fs::path& script_path, const RunConfig& config) {
    const std::string text = read_text_file(script_path);
    const auto doc = Json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw ConfigError(script_path.string() + " is not valid JSON");
    MockBackends m;
    if (doc.is_array()) {
        m.owned.push_back(make_mock(parse_mock_script(text), config.judge.gateway.model_id));
        Gateway* g = m.owned.back().get();
        m.backends = {g, g, g, g, nullptr};
        return m;
    }
    if (!doc.is_object()) throw ConfigError("mock script must be an array or an object of arrays");
    auto role = [&](const char* key, const std::string& model) -> Gateway* {
        if (!doc.contains(key)) return nullptr;
        m.owned.push_back(make_mock(parse_mock_script(doc[key].dump()), model));
        return m.owned.back().get();
    };
    for (const auto& [key, _] : doc.items()) {
        if (key != "agent" && key != "user_proxy" && key != "judge" && key != "complexity_judge") {
            throw ConfigError("mock script: unknown role \"" + key + "\"");
        }
    }
    m.backends.agent = role("agent", config.agent.gateway.model_id);
    m.backends.user_proxy = role("user_proxy", config.user_proxy.model_id);
    m.backends.judge = role("judge", config.judge.gateway.model_id);
    m.backends.complexity_judge = role("complexity_judge", config.complexity_judge.gateway.model_id);
    if (m.backends.complexity_judge == nullptr) m.backends.complexity_judge = m.backends.judge;
    return m;
}

struct HttpBackends {
    std::vector<std::unique_ptr<HttpGateway>> owned;
    Backends backends;
};

HttpBackends http_backends(const RunConfig& config) {
    HttpBackends h;
    std::uint64_t jitter = config.seed;
    auto make = [&](const GatewayConfig& g) {
        h.owned.push_back(std::make_unique<HttpGateway>(g, default_http_transport(), default_sleeper(), jitter++));
        return h.owned.back().get();
    };
    h.backends.judge = make(config.judge.gateway);
    h.backends.complexity_judge = make(config.complexity_judge.gateway);
    if (config.proxy_mode == UserProxyMode::llm_simulated) {
        h.backends.agent = make(config.agent.gateway);
        h.backends.user_proxy = make(config.user_proxy);
    }
    return h;
}

std::vector<InteractionResult> load_all(const std::vector<std::string>& paths, std::ostream& err) {
    if (paths.empty()) throw ConfigError("no record files given (--records)");
    std::vector<InteractionResult> all;
    for (const auto& p : paths) {
        auto loaded = load_records(p, &err);
        all.insert(all.end(), std::make_move_iterator(loaded.records.begin()),
                   std::make_move_iterator(loaded.records.end()));
    }
    return all;
}

std::string file_safe(std::string_view label) {
    std::string s(label);
    for (char& c : s) {
        if (c == '/' || c == '\\' || c == ':' || c == ' ') c = '-';
    }
    return s;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// ---- ingest ---------------------------------------------------------------

struct IngestArgs {
    std::string config;
    std::string posts;
    std::string out;
    std::int64_t min_upvotes = 100;
    std::int64_t rag_min_upvotes = -1;
    std::uint64_t seed = 0;
    int parallelism = 4;
    bool no_extract = false;
    std::string mock_script;
};

int cmd_ingest(const IngestArgs& a, const CLI::App& sub, std::ostream& out, std::ostream& err) {
    IngestFile f;
    if (!a.config.empty()) f = load_ingest_file(a.config);
    if (sub.count("--posts") > 0) f.posts = a.posts;
    if (sub.count("--out") > 0) f.out_dir = a.out;
    if (sub.count("--min-upvotes") > 0) f.min_upvotes = a.min_upvotes;
    if (sub.count("--rag-min-upvotes") > 0) f.rag_min_upvotes = a.rag_min_upvotes;
    if (sub.count("--seed") > 0) f.seed = a.seed;
    if (sub.count("--parallelism") > 0) f.parallelism = a.parallelism;
    if (a.no_extract) f.extract = false;
    if (f.posts.empty()) throw ConfigError("ingest: --posts is required");
    const std::int64_t rag_min = f.rag_min_upvotes.value_or(f.min_upvotes);
    if (rag_min > f.min_upvotes) throw ConfigError("ingest: --rag-min-upvotes must not exceed --min-upvotes");

    std::ifstream in(f.posts, std::ios::binary);
    if (!in) throw IoError("cannot open " + f.posts.string());
    PostsReader reader(in);
    EntrySelector selector(rag_min);
    while (auto post = reader.next()) selector.add(*post);
    Selection sel = selector.finish();
    err << "ingest: " << reader.rows_read() << " rows, " << reader.skipped_rows() << " skipped, "
        << sel.stats.questions << " questions, " << sel.entries.size() << " selected at >= " << rag_min << " upvotes ("
        << sel.stats.without_accepted_answer << " without accepted answer, " << sel.stats.missing_accepted_answer
        << " with missing accepted answer, " << sel.stats.below_threshold << " below threshold)\n";

    std::vector<BenchmarkEntry> entries = std::move(sel.entries);
    if (f.extract && !entries.empty()) {
        std::unique_ptr<Gateway> judge;
        ExtractionPolicy policy;
        if (!a.mock_script.empty()) {
            judge = make_mock(parse_mock_script(read_text_file(a.mock_script)), "mock");
            policy.sleep = [](std::chrono::milliseconds) {};
        } else {
            if (f.judge.model_id.empty()) throw ConfigError("ingest: extraction needs a \"judge\" gateway in --config");
            judge = std::make_unique<HttpGateway>(f.judge, default_http_transport(), default_sleeper(), f.seed);
        }
        auto report = extract_all(entries, *judge, f.parallelism, policy);
        std::erase_if(report.entries, [](const BenchmarkEntry& e) { return !e.extracted(); });
        entries = std::move(report.entries);
        err << "ingest: " << report.unextracted << " entries dropped after failed extraction\n";
    }

    fs::create_directories(f.out_dir);
    const fs::path corpus_path = f.out_dir / "corpus.jsonl";
    {
        std::ofstream corpus(corpus_path, std::ios::binary | std::ios::trunc);
        if (!corpus) throw IoError("cannot write " + corpus_path.string());
        write_corpus(corpus, entries);
    }
    out << corpus_path.string() << '\n';
    if (!entries.empty()) {
        const auto split = split_pool(entries, f.seed);
        const fs::path split_path = f.out_dir / "split.json";
        write_text_file(split_path, split_to_json(split, f.min_upvotes, rag_min));
        out << split_path.string() << '\n';
    }
    return 0;
}

// ---- run ------------------------------------------------------------------

struct RunArgs {
    std::string config;
    std::string mock_script;
    std::string out;
    int max_turns = 0;
    int parallel = 0;
    std::size_t limit = 0;
};

int cmd_run(const RunArgs& a, const CLI::App& sub, std::ostream& out, std::ostream& err) {
    RunFile f = load_run_file(a.config);
    if (sub.count("--max-turns") > 0) f.run.max_turns = a.max_turns;
    if (sub.count("--parallel") > 0) f.run.parallel_interactions = a.parallel;
    if (sub.count("--limit") > 0) f.limit = a.limit;
    if (sub.count("--out") > 0) f.runs_dir = a.out;
    f.run.validate();

    const auto corpus = load_corpus_file(f.corpus);
    std::vector<BenchmarkEntry> pool;
    std::optional<RagIndex> rag;
    if (f.split) {
        const auto split = apply_split(corpus, split_ids_from_json(read_text_file(*f.split)));
        pool = split.eval_pool;
        if (f.run.agent.use_rag) rag = RagIndex::build(split.rag_pool);
    } else {
        pool = corpus;
    }
    if (f.min_upvotes) {
        std::erase_if(pool, [&](const BenchmarkEntry& e) { return e.answer_upvotes < *f.min_upvotes; });
    }
    const auto before = pool.size();
    std::erase_if(pool, [](const BenchmarkEntry& e) { return !e.extracted(); });
    if (pool.size() != before) err << "run: skipping " << before - pool.size() << " unextracted entries\n";
    if (f.limit && pool.size() > *f.limit) pool.resize(*f.limit);
    if (pool.empty()) throw ConfigError("run: evaluation pool is empty");

    MockBackends mocks;
    HttpBackends live;
    Backends backends;
    if (!a.mock_script.empty()) {
        mocks = mock_backends(a.mock_script, f.run);
        backends = mocks.backends;
    } else {
        live = http_backends(f.run);
        backends = live.backends;
    }
    backends.rag = rag ? &*rag : nullptr;

    const std::string label = make_run_label(f.run);
    const auto now = std::chrono::system_clock::now();
    const fs::path record_path = record_file_path(f.runs_dir, label, now);
    RecordStore store(record_path);
    err << "run " << label << ": " << pool.size() << " interaction(s), records in " << record_path.string() << '\n';
    const auto results = run_benchmark(f.run, backends, pool,
                                       [&](const InteractionResult& r) { persist_result(r, store); }, &err);

    Json manifest{{"config", to_json(f)},
                  {"run_label", label},
                  {"corpus_path", f.corpus.string()},
                  {"record_paths", Json::array({record_path.string()})},
                  {"created_at", utc_now_iso()}};
    fs::path manifest_path = record_path;
    manifest_path.replace_extension(".manifest.json");
    write_text_file(manifest_path, manifest.dump(2) + "\n");

    std::size_t failed = 0;
    for (const auto& r : results) failed += r.terminated_by == Termination::failed ? 1 : 0;
    out << record_path.string() << '\n';
    if (failed > 0) {
        err << "run: " << failed << " interaction(s) failed\n";
        return 1;
    }
    return 0;
}

// ---- recalc ---------------------------------------------------------------

struct RecalcArgs {
    std::string config;
    std::string records;
    std::string weights;
    std::string cost;
    bool clamp = false;
    bool no_clamp = false;
    std::string out;
};

int cmd_recalc(RecalcArgs a, const CLI::App& sub, std::ostream& out, std::ostream& err) {
    ConfigOverlay cfg;
    cfg.load(a.config);
    cfg.fill(sub.get_option("--records"), "records", a.records);
    cfg.fill(sub.get_option("--weights"), "weights", a.weights);
    cfg.fill(sub.get_option("--cost"), "cost", a.cost);
    cfg.fill(sub.get_option("--out"), "out", a.out);
    if (sub.count("--records") == 0) a.records = cfg.path_of(a.records);
    if (a.records.empty()) throw ConfigError("recalc: --records is required");

    RecalcOverrides ov;
    if (!a.weights.empty()) ov.weights = parse_weights(a.weights);
    if (!a.cost.empty()) ov.cost_model = parse_cost_model(a.cost);
    if (a.clamp) ov.clamp_quality = true;
    if (a.no_clamp) ov.clamp_quality = false;

    const auto loaded = load_records(a.records, &err);
    const auto updated = recalculate(loaded.records, ov);
    fs::path target = a.out;
    if (target.empty()) {
        target = a.records;
        target.replace_extension(".recalc.jsonl");
    }
    std::error_code ec;
    fs::remove(target, ec);
    {
        RecordStore store(target);
        for (const auto& r : updated) store.append(r);
    }
    out << target.string() << '\n';
    return 0;
}

// ---- stats ----------------------------------------------------------------

struct StatsArgs {
    std::string config;
    std::vector<std::string> records;
    std::string test = "describe";
    double alpha = 0.05;
    std::string out;
};

int cmd_stats(StatsArgs a, const CLI::App& sub, std::ostream& out, std::ostream& err) {
    ConfigOverlay cfg;
    cfg.load(a.config);
    cfg.fill(sub.get_option("--records"), "records", a.records);
    cfg.fill(sub.get_option("--test"), "test", a.test);
    cfg.fill(sub.get_option("--alpha"), "alpha", a.alpha);
    cfg.fill(sub.get_option("--out"), "out", a.out);
    if (sub.count("--records") == 0) {
        for (auto& r : a.records) r = cfg.path_of(r);
    }
    const auto results = load_all(a.records, err);
    const auto cohorts = cohorts_by_label(results);
    if (cohorts.empty()) throw ConfigError("stats: no scored interactions in the given records");

    std::string text;
    if (a.test == "describe") {
        text = "label,count,mean,median,stddev,min,max\n";
        for (const auto& c : cohorts) {
            const auto d = stats::describe(c.values);
            text += c.label + "," + std::to_string(d.count) + "," + fmt(d.mean) + "," + fmt(d.median) + "," +
                    fmt(d.stddev) + "," + fmt(d.min) + "," + fmt(d.max) + "\n";
        }
    } else if (a.test == "anova") {
        const auto r = stats::one_way_anova(cohorts);
        text = "f_statistic,p_value,df_between,df_within\n" + fmt(r.f_statistic) + "," + fmt(r.p_value) + "," +
               std::to_string(r.df_between) + "," + std::to_string(r.df_within) + "\n";
    } else if (a.test == "tukey") {
        text = stats::tukey_csv(stats::tukey_hsd(cohorts, a.alpha));
    } else if (a.test == "mannwhitney") {
        if (cohorts.size() != 2) throw ConfigError("stats: mannwhitney needs exactly two cohorts");
        const auto r = stats::mann_whitney_u(cohorts[0].values, cohorts[1].values);
        text = "group1,group2,u_statistic,p_value,n1,n2,degenerate\n" + cohorts[0].label + "," + cohorts[1].label +
               "," + fmt(r.u_statistic) + "," + fmt(r.p_value) + "," + std::to_string(r.n1) + "," +
               std::to_string(r.n2) + "," + (r.degenerate ? "True" : "False") + "\n";
    } else {
        throw ConfigError("stats: unknown test '" + a.test + "'");
    }
    if (a.out.empty()) {
        out << text;
    } else {
        write_text_file(a.out, text);
        out << a.out << '\n';
    }
    return 0;
}

// ---- report ---------------------------------------------------------------

struct ReportArgs {
    std::string config;
    std::vector<std::string> records;
    std::string out = "report";
    double alpha = 0.05;
};

int cmd_report(ReportArgs a, const CLI::App& sub, std::ostream& out, std::ostream& err) {
    ConfigOverlay cfg;
    cfg.load(a.config);
    cfg.fill(sub.get_option("--records"), "records", a.records);
    cfg.fill(sub.get_option("--out"), "out", a.out);
    cfg.fill(sub.get_option("--alpha"), "alpha", a.alpha);
    if (sub.count("--records") == 0) {
        for (auto& r : a.records) r = cfg.path_of(r);
    }
    const auto results = load_all(a.records, err);
    const auto cohorts = cohorts_by_label(results);
    if (cohorts.empty()) throw ConfigError("report: no scored interactions in the given records");
    const fs::path dir = a.out;

    const auto rows = summary_table(cohorts);
    write_text_file(dir / "summary.csv", summary_csv(rows));
    out << (dir / "summary.csv").string() << '\n';
    for (const auto& c : cohorts) {
        std::vector<InteractionResult> mine;
        for (const auto& r : results) {
            if (r.run_label == c.label) mine.push_back(r);
        }
        const fs::path svg = dir / (file_safe(c.label) + ".svg");
        write_text_file(svg, cohort_report_svg(c.label, mine));
        out << svg.string() << '\n';
    }
    if (cohorts.size() >= 2) {
        try {
            write_text_file(dir / "tukey.csv", stats::tukey_csv(stats::tukey_hsd(cohorts, a.alpha)));
            out << (dir / "tukey.csv").string() << '\n';
        } catch (const PreconditionError& e) {
            err << "report: tukey.csv not written: " << e.what() << '\n';
        } catch (const DegenerateDataError& e) {
            err << "report: tukey.csv not written: " << e.what() << '\n';
        }
    }
    return 0;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Benchmark harness for LLM help-desk agents", "selfscore"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    IngestArgs ia;
    auto* ingest = app.add_subcommand("ingest", "Parse a Posts.xml dump into corpus.jsonl and split.json");
    ingest->add_option("--config", ia.config, "Ingest config JSON file")->check(CLI::ExistingFile);
    ingest->add_option("--posts", ia.posts, "Posts.xml dump");
    ingest->add_option("--out", ia.out, "Output directory");
    ingest->add_option("--min-upvotes", ia.min_upvotes, "Minimum accepted-answer score for the evaluation pool");
    ingest->add_option("--rag-min-upvotes", ia.rag_min_upvotes,
                       "Lower threshold used to build the corpus that is split into RAG and evaluation pools");
    ingest->add_option("--seed", ia.seed, "Split seed");
    ingest->add_option("--parallelism", ia.parallelism, "Concurrent extraction requests")->check(CLI::PositiveNumber);
    ingest->add_flag("--no-extract", ia.no_extract, "Skip LLM summary extraction");
    ingest->add_option("--mock-script", ia.mock_script, "Serve extraction from a scripted mock instead of HTTP")
        ->check(CLI::ExistingFile);

    RunArgs ra;
    auto* run = app.add_subcommand("run", "Run the benchmark over the evaluation pool");
    run->add_option("--config", ra.config, "Run config JSON file")->required()->check(CLI::ExistingFile);
    run->add_option("--mock-script", ra.mock_script,
                    "Scripted replies: one array for every role, or an object keyed by agent, user_proxy, judge, "
                    "complexity_judge")
        ->check(CLI::ExistingFile);
    run->add_option("--max-turns", ra.max_turns, "Override max_turns")->check(CLI::PositiveNumber);
    run->add_option("--parallel", ra.parallel, "Override parallel_interactions")->check(CLI::PositiveNumber);
    run->add_option("--limit", ra.limit, "Evaluate at most this many entries");
    run->add_option("--out", ra.out, "Directory for record files (default runs/)");

    RecalcArgs rc;
    auto* recalc = app.add_subcommand("recalc", "Recompute scores from stored records without model calls");
    recalc->add_option("--config", rc.config, "JSON file with records, weights, cost, out keys")
        ->check(CLI::ExistingFile);
    recalc->add_option("--records", rc.records, "Record file to recompute");
    recalc->add_option("--weights", rc.weights, "Complexity weights critical,error,topic (e.g. 0.5,0.4,0.1)");
    recalc->add_option("--cost", rc.cost, "Cost model: uniform:P, split:IN,OUT or per_turn:FLAT");
    auto* clamp = recalc->add_flag("--clamp-quality", rc.clamp, "Cap quality at 10");
    recalc->add_flag("--no-clamp-quality", rc.no_clamp, "Leave quality unclamped")->excludes(clamp);
    recalc->add_option("--out", rc.out, "Output record file (default <records>.recalc.jsonl)");

    StatsArgs sa;
    auto* stat = app.add_subcommand("stats", "Compare cohorts of final scores");
    stat->add_option("--config", sa.config, "JSON file with records, test, alpha, out keys")
        ->check(CLI::ExistingFile);
    stat->add_option("--records", sa.records, "Record files; cohorts are formed by run label");
    stat->add_option("--test", sa.test, "anova, tukey, mannwhitney or describe")
        ->check(CLI::IsMember({"anova", "tukey", "mannwhitney", "describe"}));
    stat->add_option("--alpha", sa.alpha, "Significance level for tukey")->check(CLI::Range(0.0, 1.0));
    stat->add_option("--out", sa.out, "Write the CSV here instead of standard output");

    ReportArgs rp;
    auto* report = app.add_subcommand("report", "Write summary.csv, tukey.csv and one SVG per cohort");
    report->add_option("--config", rp.config, "JSON file with records, out, alpha keys")->check(CLI::ExistingFile);
    report->add_option("--records", rp.records, "Record files");
    report->add_option("--out", rp.out, "Output directory (default report/)");
    report->add_option("--alpha", rp.alpha, "Significance level for tukey.csv")->check(CLI::Range(0.0, 1.0));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*ingest) return cmd_ingest(ia, *ingest, out, err);
        if (*run) return cmd_run(ra, *run, out, err);
        if (*recalc) return cmd_recalc(rc, *recalc, out, err);
        if (*stat) return cmd_stats(sa, *stat, out, err);
        if (*report) return cmd_report(rp, *report, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

} // namespace selfscore
