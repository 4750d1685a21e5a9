#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spanseq/clustering.hpp"
#include "spanseq/distance.hpp"
#include "spanseq/error.hpp"
#include "spanseq/partition.hpp"
#include "spanseq/sequence_io.hpp"
#include "spanseq/sketch.hpp"
#include "spanseq/sketch_io.hpp"

namespace spanseq {

enum class EmitKind : std::uint8_t { PartitionsTsv, ClustersTsv, EdgesTsv, SketchFile, SketchTsv, PartitionFasta };

inline std::optional<EmitKind> parse_emit(std::string_view name) {
    if (name == "partitions") return EmitKind::PartitionsTsv;
    if (name == "clusters") return EmitKind::ClustersTsv;
    if (name == "edges") return EmitKind::EdgesTsv;
    if (name == "sketch") return EmitKind::SketchFile;
    if (name == "sketch-tsv") return EmitKind::SketchTsv;
    if (name == "fasta") return EmitKind::PartitionFasta;
    return std::nullopt;
}

// Output file names inside the output directory.
inline constexpr std::string_view kPartitionsFile = "partitions.tsv";
inline constexpr std::string_view kClustersFile = "clusters.tsv";
inline constexpr std::string_view kEdgesFile = "edges.tsv";
inline constexpr std::string_view kSketchFile = "sketches.sskc";
inline constexpr std::string_view kSketchTsvFile = "sketches.tsv";

struct PipelineConfig {
    std::vector<std::string> inputs;
    AlphabetPolicy alphabet = AlphabetPolicy::Auto;
    SketchScheme scheme;
    DistanceMeasure measure = DistanceMeasure::Mash;
    double epsilon = 0.05;
    std::size_t partitions = 5;
    BalanceCriterion criterion = BalanceCriterion::Size;
    std::optional<std::string> labels_path;
    std::optional<double> hobohm_threshold;
    HobohmOrder hobohm_order = HobohmOrder::LongestFirst;
    unsigned threads = 1;
    std::string output_dir = ".";
    std::set<EmitKind> emit{EmitKind::PartitionsTsv, EmitKind::ClustersTsv};
    bool invert_distances = false;

    void validate() const {
        if (!(epsilon > 0.0 && epsilon <= 1.0)) throw Error(ErrorKind::Config, "epsilon must be in (0, 1]");
        if (partitions < 2) throw Error(ErrorKind::Config, "need at least 2 partitions");
        if (threads < 1) throw Error(ErrorKind::Config, "threads must be >= 1");
        if (hobohm_threshold && !(*hobohm_threshold > 0.0 && *hobohm_threshold <= 1.0)) {
            throw Error(ErrorKind::Config, "Hobohm threshold must be in (0, 1]");
        }
        if (criterion == BalanceCriterion::LabelBalance && !labels_path) {
            throw Error(ErrorKind::MissingLabel, "the labels criterion needs --labels");
        }
    }
};

// Named parameter sets for typical data types.
struct Preset {
    std::string_view name;
    DistanceMeasure measure;
    SketchKind kind;
    std::uint32_t k;
    std::uint32_t param;
};

inline constexpr std::array<Preset, 5> kPresets{{
    {"protein-mash", DistanceMeasure::Mash, SketchKind::MinHashBottomS, 6, 1048},
    {"gene-mash", DistanceMeasure::Mash, SketchKind::MinHashBottomS, 8, 1048},
    {"gene-cosine", DistanceMeasure::Cosine, SketchKind::Minimizer, 8, 5},
    {"genome-mash", DistanceMeasure::Mash, SketchKind::MinHashBottomS, 19, 4096},
    {"genome-minimizer", DistanceMeasure::Cosine, SketchKind::Minimizer, 18, 16},
}};

inline const Preset& preset(std::string_view name) {
    for (const auto& p : kPresets) {
        if (p.name == name) return p;
    }
    throw Error(ErrorKind::UnknownPreset, std::string(name));
}

inline void apply_preset(PipelineConfig& config, const Preset& p) {
    config.measure = p.measure;
    config.scheme.kind = p.kind;
    config.scheme.k = p.k;
    config.scheme.param = p.param;
}

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct Warning {
    std::string kind;
    std::string message;
};

struct PipelineReport {
    std::size_t records = 0;
    std::size_t clusters = 0;
    std::size_t partitions = 0;
    std::size_t edges = 0;
    std::size_t empty_sketches = 0;
    std::optional<std::size_t> representatives;
    Objective initial_objective;
    Objective objective;
    std::vector<std::size_t> partition_records;
    std::vector<double> partition_loads;
    std::vector<std::size_t> partition_clusters;
    std::vector<StageTiming> timings;
    std::vector<Warning> warnings;
    std::vector<std::string> written;
};

class StageClock {
public:
    explicit StageClock(PipelineReport& report) : report_(report), start_(std::chrono::steady_clock::now()) {}

    void lap(std::string stage) {
        const auto now = std::chrono::steady_clock::now();
        report_.timings.push_back({std::move(stage), std::chrono::duration<double>(now - start_).count()});
        start_ = now;
    }

private:
    PipelineReport& report_;
    std::chrono::steady_clock::time_point start_;
};

// Single alphabet for the whole dataset: amino acid as soon as any record is.
inline Alphabet unify_alphabet(std::vector<SequenceRecord>& records) {
    Alphabet alphabet = Alphabet::Nucleotide;
    for (const auto& r : records) {
        if (r.alphabet == Alphabet::AminoAcid) alphabet = Alphabet::AminoAcid;
    }
    for (auto& r : records) r.alphabet = alphabet;
    return alphabet;
}

// Scheme actually used for a dataset: canonical k-mers only apply to nucleotides.
inline SketchScheme effective_scheme(SketchScheme scheme, Alphabet alphabet) {
    if (alphabet == Alphabet::AminoAcid) scheme.canonical = false;
    scheme.validate(alphabet);
    return scheme;
}

inline std::vector<std::string> record_ids(std::span<const SequenceRecord> records) {
    std::vector<std::string> ids;
    ids.reserve(records.size());
    for (const auto& r : records) ids.push_back(r.id);
    return ids;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
    return out;
}

inline void close_output(std::ofstream& out, const std::filesystem::path& path) {
    out.close();
    if (!out) throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

inline void emit_partitions(const PartitionPlan& plan, std::span<const Cluster> clusters, std::span<const std::string> ids,
                            const std::filesystem::path& path) {
    auto out = open_output(path);
    write_partitions_tsv(out, plan, clusters, ids);
    close_output(out, path);
}

inline void emit_partition_fasta(const PartitionPlan& plan, std::span<const Cluster> clusters,
                                 std::span<const SequenceRecord> records, const std::filesystem::path& dir,
                                 std::vector<std::string>* written = nullptr) {
    const auto part = record_partitions(plan, clusters, records.size());
    for (std::size_t q = 0; q < plan.p; ++q) {
        std::vector<SequenceRecord> subset;
        for (std::size_t r = 0; r < records.size(); ++r) {
            if (part[r] == q) subset.push_back(records[r]);
        }
        const auto path = dir / ("part_" + std::to_string(q) + ".fasta");
        auto out = open_output(path);
        write_fasta(out, subset);
        close_output(out, path);
        if (written) written->push_back(path.string());
    }
}

// Warnings about the plan that the separation constraint makes unavoidable.
inline void check_forced_imbalance(const PartitionPlan& plan, PipelineReport& report) {
    double total = 0.0, largest = 0.0;
    for (auto w : plan.weights) {
        total += w;
        largest = std::max(largest, w);
    }
    if (plan.cluster_count() < plan.p) {
        report.warnings.push_back({"ForcedImbalance", std::to_string(plan.cluster_count()) + " clusters for " +
                                                          std::to_string(plan.p) + " partitions; some partitions stay empty"});
    } else if (largest > total / static_cast<double>(plan.p) + 1e-9) {
        report.warnings.push_back({"ForcedImbalance", "largest cluster exceeds an even share; partitions cannot be balanced"});
    }
}

inline void fill_plan_summary(const PartitionPlan& plan, std::span<const Cluster> clusters, PipelineReport& report) {
    report.partitions = plan.p;
    report.partition_loads = plan.loads;
    report.partition_clusters = plan.counts;
    report.partition_records.assign(plan.p, 0);
    for (std::size_t c = 0; c < clusters.size(); ++c) report.partition_records[plan.assignment[c]] += clusters[c].members.size();
}

// parse -> sketch -> edges -> clusters -> partitions, then writes the requested outputs.
inline PipelineReport run_pipeline(const PipelineConfig& config) {
    config.validate();
    if (config.inputs.empty()) throw Error(ErrorKind::Usage, "no input files");
    PipelineReport report;
    StageClock clock(report);

    auto records = read_fasta_files(config.inputs, config.alphabet);
    if (records.empty()) throw Error(ErrorKind::EmptySequence, "inputs contain no records");
    const Alphabet alphabet = unify_alphabet(records);
    const SketchScheme scheme = effective_scheme(config.scheme, alphabet);
    check_measure(config.measure, scheme, alphabet);
    const auto ids = record_ids(records);
    std::vector<std::string> labels;
    if (config.labels_path) labels = resolve_labels(ids, parse_labels(std::string_view(read_file(*config.labels_path))));
    report.records = records.size();
    clock.lap("parse");

    const auto sketches = sketch_all(records, scheme, config.threads);
    for (const auto& s : sketches) report.empty_sketches += s.empty() ? 1 : 0;
    if (report.empty_sketches) {
        report.warnings.push_back({"EmptySketch", std::to_string(report.empty_sketches) +
                                                      " records have no valid k-mer and stay singletons"});
    }
    clock.lap("sketch");

    ClusteringParams params;
    params.epsilon = config.epsilon;
    params.hobohm_threshold = config.hobohm_threshold;
    params.hobohm_order = config.hobohm_order;
    EdgeOptions edge_options{config.threads, config.invert_distances};
    auto clustering = clusters_from_pipeline(sketches, config.measure, scheme, params, labels, edge_options);
    report.edges = clustering.edges.size();
    report.clusters = clustering.clusters.size();
    if (clustering.hobohm) {
        report.representatives = clustering.hobohm->representatives.size();
        report.warnings.push_back({"HobohmSeparation", "records collapsed by Hobohm 1 are not compared pairwise; "
                                                       "similar sequences may end up in different partitions"});
        if (*config.hobohm_threshold >= config.epsilon) {
            report.warnings.push_back({"HobohmAsMainClustering",
                                       "Hobohm threshold >= epsilon: Hobohm 1 acts as the main clustering"});
        }
    }
    if (config.invert_distances) {
        report.warnings.push_back({"InvertedDistances", "clustering on 1 - d; partitions are deliberately leaky"});
    }
    clock.lap("cluster");

    const auto initial = lpt_initial(clustering.clusters, config.partitions, config.criterion);
    report.initial_objective = objective(initial);
    const auto plan = tabu_search(initial);
    report.objective = objective(plan);
    check_forced_imbalance(plan, report);
    fill_plan_summary(plan, clustering.clusters, report);
    clock.lap("partition");

    const std::filesystem::path dir(config.output_dir);
    std::filesystem::create_directories(dir);
    auto wants = [&](EmitKind k) { return config.emit.contains(k); };
    if (wants(EmitKind::PartitionsTsv)) {
        emit_partitions(plan, clustering.clusters, ids, dir / kPartitionsFile);
        report.written.push_back((dir / kPartitionsFile).string());
    }
    if (wants(EmitKind::ClustersTsv)) {
        const auto path = dir / kClustersFile;
        auto out = open_output(path);
        write_clusters_tsv(out, clustering.clusters, ids);
        close_output(out, path);
        report.written.push_back(path.string());
    }
    if (wants(EmitKind::EdgesTsv)) {
        const auto path = dir / kEdgesFile;
        auto out = open_output(path);
        write_edges_tsv(out, clustering.edges, ids);
        close_output(out, path);
        report.written.push_back(path.string());
    }
    if (wants(EmitKind::SketchFile) || wants(EmitKind::SketchTsv)) {
        SketchSet set{scheme, ids, sketches};
        if (wants(EmitKind::SketchFile)) {
            const auto path = dir / kSketchFile;
            auto out = open_output(path);
            write_sketches(out, set);
            close_output(out, path);
            report.written.push_back(path.string());
        }
        if (wants(EmitKind::SketchTsv)) {
            const auto path = dir / kSketchTsvFile;
            auto out = open_output(path);
            write_sketches_tsv(out, set);
            close_output(out, path);
            report.written.push_back(path.string());
        }
    }
    if (wants(EmitKind::PartitionFasta)) emit_partition_fasta(plan, clustering.clusters, records, dir, &report.written);
    clock.lap("write");
    return report;
}

}  // namespace spanseq
