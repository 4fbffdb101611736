#pragma once
// Command implementations behind the CLI: ingest, pools, train, eval,
// temporal, report. Run directories are content-addressed by the config
// digest; every command refreshes the run manifest.

#include "morphorank/candidates.hpp"
#include "morphorank/config.hpp"
#include "morphorank/training.hpp"

namespace morphorank {

constexpr const char* kToolVersion = "morphorank 0.1.0";

struct PipelineContext {
    KeyValueConfig config;
    std::filesystem::path data_root;  // base for relative input paths
    std::filesystem::path run_dir;    // out_dir / <config digest>

    std::filesystem::path resolve(const std::string& p) const;
    std::filesystem::path bundle_path() const { return run_dir / "lexicon.bundle"; }
    std::filesystem::path pools_dir() const { return run_dir / "pools"; }
    std::filesystem::path ckpt_dir() const { return run_dir / "checkpoints"; }
    std::filesystem::path reports_dir() const { return run_dir / "reports"; }
    uint64_t seed() const;
};

// data_root: $MORPHORANK_DATA if set, else the config file's directory.
PipelineContext make_context(const std::filesystem::path& config_path,
                             const std::vector<std::string>& overrides);

void cmd_ingest(const PipelineContext& ctx);
void cmd_pools(const PipelineContext& ctx);
void cmd_train(const PipelineContext& ctx, const std::string& family_or_all);
void cmd_eval(const PipelineContext& ctx);
void cmd_temporal(const PipelineContext& ctx);
void cmd_report(const PipelineContext& ctx);

// Manifest of every artifact in the run directory with content digests.
void write_manifest(const PipelineContext& ctx);

// ---------------------------------------------------------------------------
// Pieces shared with tests

std::unique_ptr<EmbeddingProvider> make_provider(const PipelineContext& ctx);
GateConfig gate_config(const PipelineContext& ctx);
TrainConfig train_config(const PipelineContext& ctx);
SplitSpec split_spec(const PipelineContext& ctx);

// RankItems for the given dataset indices; items without a pool file or an
// embeddable gloss are skipped and reported.
std::vector<RankItem> build_rank_items(const PipelineContext& ctx, const TimeIndexedLexicon& lex,
                                       const Dataset& ds, const std::vector<size_t>& indices,
                                       const FeatureContext& fc, SkipReport& report);

std::string records_to_tsv(const std::vector<RankingRecord>& records);
std::vector<RankingRecord> records_from_tsv(const std::filesystem::path& path);

}  // namespace morphorank
