#include "morphorank/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

namespace morphorank {

namespace fs = std::filesystem;

std::filesystem::path PipelineContext::resolve(const std::string& p) const {
    fs::path path(p);
    if (path.is_absolute()) return path;
    return data_root / path;
}

uint64_t PipelineContext::seed() const { return static_cast<uint64_t>(config.get_long("seed", 0)); }

PipelineContext make_context(const std::filesystem::path& config_path,
                             const std::vector<std::string>& overrides) {
    PipelineContext ctx;
    ctx.config = load_config(config_path);
    for (const auto& o : overrides) apply_override(ctx.config, o);
    if (const char* env = std::getenv("MORPHORANK_DATA"))
        ctx.data_root = env;
    else
        ctx.data_root = fs::absolute(config_path).parent_path();
    fs::path out_dir = ctx.config.require("out_dir");
    if (out_dir.is_relative()) out_dir = ctx.data_root / out_dir;
    ctx.run_dir = out_dir / hex64(ctx.config.digest());
    return ctx;
}

namespace {

void append_log(const PipelineContext& ctx, const std::string& what) {
    fs::create_directories(ctx.run_dir);
    std::ofstream log(ctx.run_dir / "run.log", std::ios::app);
    auto now = std::chrono::system_clock::now().time_since_epoch();
    log << std::chrono::duration_cast<std::chrono::seconds>(now).count() << '\t' << what << '\n';
}

void write_report(const PipelineContext& ctx, const std::string& name, const SkipReport& report,
                  const std::vector<std::string>& summary) {
    std::ostringstream out;
    for (const auto& s : summary) out << "# " << s << '\n';
    for (const auto& e : report.entries) out << e << '\n';
    fs::create_directories(ctx.reports_dir());
    write_file_text(ctx.reports_dir() / name, out.str());
}

void load_ingested(const PipelineContext& ctx, TimeIndexedLexicon& lex, Dataset& ds) {
    if (!fs::exists(ctx.bundle_path()))
        throw ConfigError("no lexicon bundle at " + ctx.bundle_path().string() + "; run `ingest` first");
    load_bundle(ctx.bundle_path(), lex, ds);
}

YearTables load_year_tables(const PipelineContext& ctx) {
    YearTables tables;
    for (const auto& [key, value] : ctx.config.values) {
        if (key.rfind("year_embeddings.", 0) != 0) continue;
        auto year = parse_long(key.substr(16));
        if (!year) throw ConfigError("bad year in config key: " + key);
        tables.tables.emplace(static_cast<int>(*year), load_embeddings(ctx.resolve(value)));
    }
    return tables;
}

std::filesystem::path pool_path(const PipelineContext& ctx, const std::string& word) {
    return ctx.pools_dir() / (word + ".pool");
}

std::string candidate_label(const Candidate& c, const TimeIndexedLexicon& lex) {
    std::string s;
    for (int i = 0; i < c.len; ++i) {
        if (i) s += '+';
        s += lex.morpheme(c.ids[static_cast<size_t>(i)]).surface;
    }
    return s;
}

}  // namespace

std::unique_ptr<EmbeddingProvider> make_provider(const PipelineContext& ctx) {
    std::string kind = ctx.config.get("embeddings.provider", "pseudo");
    if (kind == "pseudo") {
        size_t dim = static_cast<size_t>(ctx.config.get_long("embeddings.dim", 32));
        uint64_t seed = static_cast<uint64_t>(ctx.config.get_long("embeddings.seed", 1));
        return std::make_unique<PseudoProvider>(dim, seed);
    }
    if (kind == "file") {
        auto path = ctx.resolve(ctx.config.require("embeddings.path"));
        if (!fs::exists(path)) throw ConfigError("embeddings file missing: " + path.string());
        return std::make_unique<FileProvider>(load_embeddings(path));
    }
    throw ConfigError("embeddings.provider must be pseudo|file, got: " + kind);
}

GateConfig gate_config(const PipelineContext& ctx) {
    GateConfig g;
    g.gate_k = static_cast<size_t>(ctx.config.get_long("gate_k", 200));
    g.max_len = static_cast<int>(ctx.config.get_long("max_len", 3));
    g.per_concept_cap = static_cast<size_t>(ctx.config.get_long("per_concept_cap", 4096));
    g.max_surface_len = static_cast<size_t>(ctx.config.get_long("max_surface_len", 20));
    if (g.max_len < 1 || g.max_len > 3) throw ConfigError("max_len must be 1..3");
    return g;
}

TrainConfig train_config(const PipelineContext& ctx) {
    TrainConfig t;
    t.epochs = static_cast<int>(ctx.config.get_long("train.epochs", 60));
    t.patience = static_cast<int>(ctx.config.get_long("train.patience", 10));
    t.lr = ctx.config.get_double("train.lr", 1e-3);
    t.clip_norm = ctx.config.get_double("train.clip_norm", 1.0);
    t.curriculum.negatives = static_cast<int>(ctx.config.get_long("train.negatives", 16));
    t.curriculum.hard_fraction_max = ctx.config.get_double("train.hard_fraction_max", 0.8);
    t.curriculum.ramp_epochs = static_cast<int>(ctx.config.get_long("train.ramp_epochs", 0));
    t.curriculum.overlap_boost = ctx.config.get_double("train.overlap_boost", 2.0);
    t.seed = ctx.seed();
    return t;
}

SplitSpec split_spec(const PipelineContext& ctx) {
    SplitSpec s;
    s.test_fraction = ctx.config.get_double("split.test_fraction", 0.2);
    s.n_folds = static_cast<int>(ctx.config.get_long("split.folds", 5));
    s.fold_index = static_cast<int>(ctx.config.get_long("split.fold", 0));
    s.seed = ctx.seed();
    return s;
}

void cmd_ingest(const PipelineContext& ctx) {
    SkipReport report;
    auto inventory_path = ctx.resolve(ctx.config.require("inventory"));
    if (!fs::exists(inventory_path)) throw ConfigError("inventory file missing: " + inventory_path.string());
    TimeIndexedLexicon lex = load_inventory(inventory_path);

    // frequency sources: freq.<name>.path + freq.<name>.resolution
    std::set<std::string> freq_names;
    for (const auto& [key, value] : ctx.config.values) {
        if (key.rfind("freq.", 0) == 0 && key.size() > 5) {
            size_t dot = key.find('.', 5);
            if (dot != std::string::npos) freq_names.insert(key.substr(5, dot - 5));
        }
    }
    for (const auto& name : freq_names) {
        auto path = ctx.resolve(ctx.config.require("freq." + name + ".path"));
        if (!fs::exists(path)) throw ConfigError("frequency file missing: " + path.string());
        std::string res = ctx.config.require("freq." + name + ".resolution");
        if (res != "decade" && res != "year")
            throw ConfigError("freq." + name + ".resolution must be decade|year");
        lex = attach_frequencies(std::move(lex), path,
                                 res == "decade" ? Resolution::decade : Resolution::year, report);
    }

    if (ctx.config.has("pronunciations")) {
        auto path = ctx.resolve(ctx.config.get("pronunciations"));
        if (!fs::exists(path)) throw ConfigError("pronunciations file missing: " + path.string());
        lex = attach_pronunciations(std::move(lex), path, report);
    }

    auto dataset_path = ctx.resolve(ctx.config.require("dataset"));
    if (!fs::exists(dataset_path)) throw ConfigError("dataset file missing: " + dataset_path.string());
    Dataset ds = load_dataset(dataset_path, lex, report);

    fs::create_directories(ctx.run_dir);
    save_bundle(ctx.bundle_path(), lex, ds);
    write_report(ctx, "ingest_report.tsv", report,
                 {"inventory_size\t" + std::to_string(lex.size()),
                  "dataset_items\t" + std::to_string(ds.items.size()),
                  "skipped_rows\t" + std::to_string(report.entries.size())});
    append_log(ctx, "ingest");
    write_manifest(ctx);
}

void cmd_pools(const PipelineContext& ctx) {
    TimeIndexedLexicon lex;
    Dataset ds;
    load_ingested(ctx, lex, ds);
    auto provider = make_provider(ctx);
    GateConfig gc = gate_config(ctx);
    SeedFile seeds = load_seed_file(ctx.resolve(ctx.config.require("seeds")));
    YearTables year_tables = load_year_tables(ctx);
    FeatureContext fc(lex, *provider);
    NeighborIndex index = build_morpheme_index(lex, *provider);

    SkipReport report;
    size_t gated_out = 0, built = 0;
    fs::create_directories(ctx.pools_dir());
    for (const auto& item : ds.items) {
        auto concept_vec = provider->embed(item.gloss);
        if (!concept_vec) {
            report.add("no embedding for gloss of '" + item.word + "', skipped");
            continue;
        }
        SeedSet seed_set = build_seed_set(item, lex, seeds, year_tables, gc.gate_k, report);
        if (seed_set.morpheme_ids.empty()) {
            report.add("empty seed set for '" + item.word + "', pool skipped");
            continue;
        }
        std::set<int> knn_ids;
        for (const auto& nb : index.knn(*concept_vec, gc.gate_k)) {
            if (auto id = lex.find(nb.key)) knn_ids.insert(*id);
        }
        std::map<int, double> sim_by_id;
        auto ensure_sim = [&](int id) {
            if (!sim_by_id.count(id)) sim_by_id[id] = cosine(fc.morpheme_vec(id), *concept_vec);
        };
        for (int id : seed_set.morpheme_ids) ensure_sim(id);
        for (int id : item.gold) ensure_sim(id);

        CandidatePool pool = enumerate_candidates(seed_set, item, gc, knn_ids, lex, sim_by_id);
        if (pool.gold_gated_out) ++gated_out;
        save_pool(pool_path(ctx, item.word), pool, lex);
        ++built;
    }
    write_report(ctx, "pools_report.tsv", report,
                 {"pools_built\t" + std::to_string(built), "gold_gated_out\t" + std::to_string(gated_out),
                  "gate_k\t" + std::to_string(gc.gate_k)});
    append_log(ctx, "pools");
    write_manifest(ctx);
}

std::vector<RankItem> build_rank_items(const PipelineContext& ctx, const TimeIndexedLexicon& lex,
                                       const Dataset& ds, const std::vector<size_t>& indices,
                                       const FeatureContext& fc, SkipReport& report) {
    std::vector<RankItem> out;
    for (size_t idx : indices) {
        const ConceptItem& item = ds.items[idx];
        auto path = pool_path(ctx, item.word);
        if (!fs::exists(path)) {
            report.add("no pool for '" + item.word + "', item skipped");
            continue;
        }
        auto concept_vec = fc.provider().embed(item.gloss);
        if (!concept_vec) {
            report.add("no embedding for gloss of '" + item.word + "', item skipped");
            continue;
        }
        CandidatePool pool = load_pool(path, lex);
        RankItem ri;
        ri.word = item.word;
        ri.year = item.emergence_year;
        ri.gold_gated_out = pool.gold_gated_out;
        ri.batch = fc.assemble_batch(pool.candidates, pool.gold_index, *concept_vec, item.emergence_year);
        std::set<int> gold_ids(item.gold.begin(), item.gold.end());
        ri.overlaps_gold.resize(pool.candidates.size(), 0);
        ri.labels.reserve(pool.candidates.size());
        for (size_t i = 0; i < pool.candidates.size(); ++i) {
            const Candidate& c = pool.candidates[i];
            for (int p = 0; p < c.len; ++p)
                if (gold_ids.count(c.ids[static_cast<size_t>(p)])) ri.overlaps_gold[i] = 1;
            ri.labels.push_back(candidate_label(c, lex));
        }
        out.push_back(std::move(ri));
    }
    return out;
}

namespace {

struct LoadedData {
    TimeIndexedLexicon lex;
    Dataset ds;
    Split split;
};

struct ItemSets {
    std::vector<RankItem> train, val, test;
};

ItemSets build_item_sets(const PipelineContext& ctx, const LoadedData& data, const FeatureContext& fc,
                         SkipReport& report) {
    ItemSets sets;
    sets.train = build_rank_items(ctx, data.lex, data.ds, data.split.train, fc, report);
    sets.val = build_rank_items(ctx, data.lex, data.ds, data.split.val, fc, report);
    sets.test = build_rank_items(ctx, data.lex, data.ds, data.split.test, fc, report);
    return sets;
}

LoadedData load_split_data(const PipelineContext& ctx) {
    LoadedData data;
    load_ingested(ctx, data.lex, data.ds);
    data.split = year_stratified_split(data.ds, split_spec(ctx));
    return data;
}

std::filesystem::path ckpt_path(const PipelineContext& ctx, Family f, int repeat) {
    std::string name = family_name(f);
    if (repeat >= 0) name += ".r" + std::to_string(repeat);
    return ctx.ckpt_dir() / (name + ".ckpt");
}

double mean_of(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double mu = mean_of(v);
    double s = 0;
    for (double x : v) s += (x - mu) * (x - mu);
    return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

void cmd_train(const PipelineContext& ctx, const std::string& family_or_all) {
    std::vector<Family> families;
    if (family_or_all == "all") {
        // frozen-base dependency order: bases first, then S1; discriminative independent
        families = {Family::cost_only, Family::semantic_only, Family::discriminative, Family::s1_linear,
                    Family::s1_nonlinear};
    } else {
        auto f = parse_family(family_or_all);
        if (!f) {
            std::string valid = "all";
            for (Family fam : all_families()) valid += std::string(", ") + family_name(fam);
            throw ConfigError("unknown family '" + family_or_all + "'; valid: " + valid);
        }
        families = {*f};
    }

    LoadedData data = load_split_data(ctx);
    auto provider = make_provider(ctx);
    FeatureContext fc(data.lex, *provider);
    SkipReport report;
    ItemSets sets = build_item_sets(ctx, data, fc, report);

    TrainConfig base_cfg = train_config(ctx);
    int repeats = static_cast<int>(ctx.config.get_long("train.repeats", 3));
    if (repeats < 1) throw ConfigError("train.repeats must be >= 1");

    fs::create_directories(ctx.ckpt_dir());
    fs::create_directories(ctx.reports_dir());

    std::ostringstream summary;
    summary << "family\trepeats\tbest_val_mrr_mean\tbest_val_mrr_std\n";

    // bases per repeat, for S1 training within the same run
    std::map<int, std::shared_ptr<const Model>> base_cost_by_rep, base_sem_by_rep;

    auto load_base = [&](Family f, int rep) -> std::shared_ptr<const Model> {
        auto path = ckpt_path(ctx, f, -1);
        if (!fs::exists(path))
            throw ConfigError(std::string("missing base checkpoint for ") + family_name(f) + ": " +
                              path.string() + " (train `cost` and `semantic` first, or use `all`)");
        (void)rep;
        return std::shared_ptr<const Model>(model_from_checkpoint(load_checkpoint(path)));
    };

    for (Family family : families) {
        bool is_s1 = family == Family::s1_linear || family == Family::s1_nonlinear;
        std::vector<double> best_mrrs;
        for (int rep = 0; rep < repeats; ++rep) {
            TrainConfig cfg = base_cfg;
            cfg.seed = base_cfg.seed + static_cast<uint64_t>(rep);
            std::shared_ptr<const Model> bc, bs;
            if (is_s1) {
                auto itc = base_cost_by_rep.find(rep);
                auto its = base_sem_by_rep.find(rep);
                bc = itc != base_cost_by_rep.end() ? itc->second : load_base(Family::cost_only, rep);
                bs = its != base_sem_by_rep.end() ? its->second : load_base(Family::semantic_only, rep);
            }
            TrainResult result = train_family(family, sets.train, sets.val, cfg, bc, bs);
            best_mrrs.push_back(result.report.best_val_mrr);
            save_checkpoint(ckpt_path(ctx, family, rep), result.checkpoint);
            if (rep == 0) save_checkpoint(ckpt_path(ctx, family, -1), result.checkpoint);
            write_file_text(ctx.reports_dir() /
                                ("train_" + std::string(family_name(family)) + ".r" + std::to_string(rep) +
                                 ".tsv"),
                            train_report_tsv(result.report));
            if (family == Family::cost_only)
                base_cost_by_rep[rep] = std::shared_ptr<const Model>(std::move(result.model));
            else if (family == Family::semantic_only)
                base_sem_by_rep[rep] = std::shared_ptr<const Model>(std::move(result.model));
        }
        summary << family_name(family) << '\t' << repeats << '\t' << format_double(mean_of(best_mrrs))
                << '\t' << format_double(std_of(best_mrrs)) << '\n';
    }
    write_file_text(ctx.reports_dir() / "train_summary.tsv", summary.str());
    write_report(ctx, "train_items_report.tsv", report,
                 {"train_items\t" + std::to_string(sets.train.size()),
                  "val_items\t" + std::to_string(sets.val.size()),
                  "test_items\t" + std::to_string(sets.test.size())});
    append_log(ctx, "train " + family_or_all);
    write_manifest(ctx);
}

void cmd_eval(const PipelineContext& ctx) {
    LoadedData data = load_split_data(ctx);
    auto provider = make_provider(ctx);
    FeatureContext fc(data.lex, *provider);
    SkipReport report;
    auto test_items = build_rank_items(ctx, data.lex, data.ds, data.split.test, fc, report);

    size_t n_max = static_cast<size_t>(ctx.config.get_long("eval_n_max", 1024));
    bool dump_scores = ctx.config.get_bool("eval.dump_scores", false);

    std::shared_ptr<const Model> base_cost, base_sem;
    auto load_if = [&](Family f) -> std::unique_ptr<Model> {
        auto path = ckpt_path(ctx, f, -1);
        if (!fs::exists(path)) return nullptr;
        auto ckpt = load_checkpoint(path);
        if (f == Family::s1_linear || f == Family::s1_nonlinear) {
            if (!base_cost || !base_sem)
                throw ConfigError("S1 checkpoint present but base checkpoints missing");
            return model_from_checkpoint(ckpt, base_cost, base_sem);
        }
        return model_from_checkpoint(ckpt);
    };

    fs::create_directories(ctx.reports_dir());
    std::ostringstream summary;
    summary << "family\tseed\titems\tmrr";
    for (size_t k : kAccGrid) summary << "\tacc_at_" << k;
    summary << "\tgated_out\tgated_out_mrr\n";

    size_t evaluated = 0;
    for (Family f : all_families()) {
        auto model = load_if(f);
        if (!model) continue;
        if (f == Family::cost_only) base_cost = std::shared_ptr<const Model>(model_from_checkpoint(
                                        load_checkpoint(ckpt_path(ctx, f, -1))));
        if (f == Family::semantic_only) base_sem = std::shared_ptr<const Model>(model_from_checkpoint(
                                            load_checkpoint(ckpt_path(ctx, f, -1))));
        EvalResult result = evaluate(*model, test_items, n_max, ctx.seed());
        ++evaluated;
        summary << result.report.family << '\t' << result.report.seed << '\t' << result.report.item_count
                << '\t' << format_double(result.report.mrr);
        for (const auto& [k, acc] : result.report.acc_at_k) summary << '\t' << format_double(acc);
        if (result.report.acc_at_k.empty())
            for (size_t i = 0; i < kAccGrid.size(); ++i) summary << "\t0";
        summary << '\t' << result.report.gated_out_count << '\t'
                << format_double(result.report.gated_out_mrr) << '\n';
        write_file_text(ctx.reports_dir() / ("records_" + std::string(family_name(f)) + ".tsv"),
                        records_to_tsv(result.records));
        if (dump_scores) {
            std::ostringstream dump;
            dump << "word\tscores\n";
            for (const auto& rec : result.records) {
                dump << rec.word << '\t';
                for (size_t i = 0; i < rec.raw_scores.size(); ++i) {
                    if (i) dump << ' ';
                    dump << format_double(rec.raw_scores[i]);
                }
                dump << '\n';
            }
            write_file_text(ctx.reports_dir() / ("scores_" + std::string(family_name(f)) + ".tsv"),
                            dump.str());
        }
    }
    if (evaluated == 0)
        throw ConfigError("no checkpoints found in " + ctx.ckpt_dir().string() + "; run `train` first");
    write_file_text(ctx.reports_dir() / "eval_summary.tsv", summary.str());
    append_log(ctx, "eval");
    write_manifest(ctx);
}

void cmd_temporal(const PipelineContext& ctx) {
    LoadedData data = load_split_data(ctx);
    auto provider = make_provider(ctx);
    FeatureContext fc(data.lex, *provider);
    SkipReport report;
    ItemSets sets = build_item_sets(ctx, data, fc, report);

    std::vector<int> end_years;
    std::string spec = ctx.config.get("temporal.end_years", "1830,1840,1850,1860,1870,1880,1890,1900,1910");
    for (const auto& part : split(spec, ',')) {
        auto y = parse_long(trim(part));
        if (!y) throw ConfigError("bad temporal.end_years entry: " + part);
        end_years.push_back(static_cast<int>(*y));
    }

    size_t n_max = static_cast<size_t>(ctx.config.get_long("eval_n_max", 1024));
    auto windows = temporal_window_runs(sets.train, sets.val, sets.test, end_years, train_config(ctx), n_max);

    std::ostringstream out;
    out << "end_year\tfamily\tmrr\tacc_at_10\ttrain_items\tskipped\n";
    for (const auto& win : windows) {
        if (win.skipped) {
            out << win.end_year << "\t-\t0\t0\t" << win.train_items << "\t1\n";
            continue;
        }
        for (const auto& [family, rep] : win.reports) {
            double acc10 = 0;
            for (const auto& [k, acc] : rep.acc_at_k)
                if (k == 10) acc10 = acc;
            out << win.end_year << '\t' << family << '\t' << format_double(rep.mrr) << '\t'
                << format_double(acc10) << '\t' << win.train_items << "\t0\n";
        }
    }
    fs::create_directories(ctx.reports_dir());
    write_file_text(ctx.reports_dir() / "temporal_results.tsv", out.str());
    append_log(ctx, "temporal");
    write_manifest(ctx);
}

void cmd_report(const PipelineContext& ctx) {
    std::vector<MetricsReport> reports;
    std::map<std::string, std::vector<RankingRecord>> by_family;
    for (Family f : all_families()) {
        auto path = ctx.reports_dir() / ("records_" + std::string(family_name(f)) + ".tsv");
        if (!fs::exists(path)) continue;
        auto records = records_from_tsv(path);
        std::vector<RankingRecord> scored;
        double gated_rr = 0;
        size_t gated = 0;
        for (const auto& r : records) {
            if (r.gold_gated_out) {
                ++gated;
                gated_rr += 1.0 / static_cast<double>(r.gold_rank);
            } else {
                scored.push_back(r);
            }
        }
        MetricsReport rep;
        rep.family = family_name(f);
        rep.seed = ctx.seed();
        rep.item_count = scored.size();
        if (!scored.empty()) {
            rep.mrr = mrr(scored);
            for (size_t k : kAccGrid) rep.acc_at_k.emplace_back(k, acc_at_k(scored, k));
        }
        rep.gated_out_count = gated;
        if (gated) rep.gated_out_mrr = gated_rr / static_cast<double>(gated);
        reports.push_back(std::move(rep));
        by_family[family_name(f)] = std::move(records);
    }
    if (reports.empty())
        throw ConfigError("no evaluation records in " + ctx.reports_dir().string() + "; run `eval` first");

    std::vector<TemporalRow> temporal;
    auto tpath = ctx.reports_dir() / "temporal_results.tsv";
    if (fs::exists(tpath)) {
        auto lines = read_lines(tpath);
        for (size_t i = 1; i < lines.size(); ++i) {
            if (lines[i].empty()) continue;
            auto f = split(lines[i], '\t');
            if (f.size() != 6) continue;
            TemporalRow row;
            row.end_year = static_cast<int>(parse_long(f[0]).value_or(0));
            row.family = f[1];
            row.mrr = parse_double(f[2]).value_or(0);
            row.acc10 = parse_double(f[3]).value_or(0);
            row.train_items = static_cast<size_t>(parse_long(f[4]).value_or(0));
            row.skipped = f[5] == "1";
            temporal.push_back(row);
        }
    }
    report_tables(reports, by_family, temporal, ctx.reports_dir() / "tables");
    append_log(ctx, "report");
    write_manifest(ctx);
}

void write_manifest(const PipelineContext& ctx) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(ctx.run_dir)) {
        if (!entry.is_regular_file()) continue;
        fs::path rel = fs::relative(entry.path(), ctx.run_dir);
        std::string name = rel.generic_string();
        if (name == "manifest.tsv" || name == "run.log") continue;
        files.push_back(rel);
    }
    std::sort(files.begin(), files.end());
    std::ostringstream out;
    out << "# tool\t" << kToolVersion << '\n';
    out << "# config_digest\t" << hex64(ctx.config.digest()) << '\n';
    out << "# seed\t" << ctx.seed() << '\n';
    for (const auto& rel : files)
        out << rel.generic_string() << '\t' << hex64(hash_file(ctx.run_dir / rel)) << '\n';
    write_file_text(ctx.run_dir / "manifest.tsv", out.str());
}

// ---------------------------------------------------------------------------
// Record (de)serialization

std::string records_to_tsv(const std::vector<RankingRecord>& records) {
    std::ostringstream out;
    out << "word\tyear\tpool_size\tgold_rank\tgated_out\tgold\ttop_lengths\ttop_labels\ttop_scores\n";
    for (const auto& r : records) {
        out << r.word << '\t' << r.year << '\t' << r.pool_size << '\t' << r.gold_rank << '\t'
            << (r.gold_gated_out ? 1 : 0) << '\t' << r.gold_label << '\t';
        for (size_t i = 0; i < r.top_lengths.size(); ++i) {
            if (i) out << ',';
            out << r.top_lengths[i];
        }
        out << '\t';
        for (size_t i = 0; i < r.top_labels.size(); ++i) {
            if (i) out << '|';
            out << r.top_labels[i];
        }
        out << '\t';
        for (size_t i = 0; i < r.top_scores.size(); ++i) {
            if (i) out << ',';
            out << format_double(r.top_scores[i]);
        }
        out << '\n';
    }
    return out.str();
}

std::vector<RankingRecord> records_from_tsv(const std::filesystem::path& path) {
    std::vector<RankingRecord> out;
    auto lines = read_lines(path);
    for (size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto f = split(lines[i], '\t');
        if (f.size() != 9) throw LoadError(path.string() + ":" + std::to_string(i + 1) + ": bad record row");
        RankingRecord r;
        r.word = f[0];
        r.year = static_cast<int>(parse_long(f[1]).value_or(0));
        r.pool_size = static_cast<size_t>(parse_long(f[2]).value_or(0));
        r.gold_rank = static_cast<size_t>(parse_long(f[3]).value_or(0));
        r.gold_gated_out = f[4] == "1";
        r.gold_label = f[5];
        if (!f[6].empty())
            for (const auto& s : split(f[6], ','))
                r.top_lengths.push_back(static_cast<int>(parse_long(s).value_or(0)));
        if (!f[7].empty())
            for (const auto& s : split(f[7], '|')) r.top_labels.push_back(s);
        if (!f[8].empty())
            for (const auto& s : split(f[8], ',')) r.top_scores.push_back(parse_double(s).value_or(0));
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace morphorank
