#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "spanseq/spanseq.hpp"

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;
using namespace spanseq;

struct Options {
    std::vector<std::string> inputs;
    std::string output_dir = ".";
    std::optional<std::uint32_t> k, sketch_size, minimizer, prefix;
    std::optional<std::string> distance, criterion, labels, preset_name, edges_path, clusters_path;
    std::optional<double> epsilon, hobohm;
    std::optional<std::size_t> partitions;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    std::vector<std::string> emit;
    bool no_canonical = false;
    bool invert_distances = false;
    std::string alphabet = "auto";
};

json objective_json(const Objective& o) {
    json v = json::array();
    for (std::size_t i = 0; i < o.arity; ++i) v.push_back(o.value[i]);
    return v;
}

json report_json(const PipelineReport& r) {
    json j;
    j["records"] = r.records;
    j["clusters"] = r.clusters;
    j["partitions"] = r.partitions;
    j["edges"] = r.edges;
    j["empty_sketches"] = r.empty_sketches;
    if (r.representatives) j["representatives"] = *r.representatives;
    j["initial_objective"] = objective_json(r.initial_objective);
    j["objective"] = objective_json(r.objective);
    j["partition_records"] = r.partition_records;
    j["partition_clusters"] = r.partition_clusters;
    j["partition_loads"] = r.partition_loads;
    json timings = json::object();
    for (const auto& t : r.timings) timings[t.stage] = t.seconds;
    j["timings"] = timings;
    json warnings = json::array();
    for (const auto& w : r.warnings) warnings.push_back({{"kind", w.kind}, {"message", w.message}});
    j["warnings"] = warnings;
    j["written"] = r.written;
    return j;
}

AlphabetPolicy alphabet_policy(const std::string& name) {
    if (name == "auto") return AlphabetPolicy::Auto;
    if (name == "nucleotide" || name == "dna") return AlphabetPolicy::Nucleotide;
    if (name == "protein" || name == "amino") return AlphabetPolicy::AminoAcid;
    throw Error(ErrorKind::Usage, "unknown alphabet '" + name + "'");
}

// Preset first, then explicit flags on top.
PipelineConfig build_config(const Options& o) {
    PipelineConfig c;
    if (o.preset_name) apply_preset(c, preset(*o.preset_name));
    c.inputs = o.inputs;
    c.output_dir = o.output_dir;
    c.alphabet = alphabet_policy(o.alphabet);

    const int scheme_flags = (o.sketch_size ? 1 : 0) + (o.minimizer ? 1 : 0) + (o.prefix ? 1 : 0);
    if (scheme_flags > 1) throw Error(ErrorKind::Usage, "choose one of --sketch-size, --minimizer, --prefix");
    if (o.sketch_size) c.scheme = {SketchKind::MinHashBottomS, c.scheme.k, *o.sketch_size, c.scheme.canonical, c.scheme.seed};
    if (o.minimizer) c.scheme = {SketchKind::Minimizer, c.scheme.k, *o.minimizer, c.scheme.canonical, c.scheme.seed};
    if (o.prefix) c.scheme = {SketchKind::Prefix, c.scheme.k, *o.prefix, c.scheme.canonical, c.scheme.seed};
    if (o.k) c.scheme.k = *o.k;
    if (o.seed) c.scheme.seed = *o.seed;
    if (o.no_canonical) c.scheme.canonical = false;

    if (o.distance) {
        auto m = parse_measure(*o.distance);
        if (!m) throw Error(ErrorKind::Usage, "unknown distance '" + *o.distance + "'");
        c.measure = *m;
    }
    if (o.criterion) {
        auto cr = parse_criterion(*o.criterion);
        if (!cr) throw Error(ErrorKind::Usage, "unknown criterion '" + *o.criterion + "'");
        c.criterion = *cr;
    }
    if (o.epsilon) c.epsilon = *o.epsilon;
    if (o.partitions) c.partitions = *o.partitions;
    c.labels_path = o.labels;
    c.hobohm_threshold = o.hobohm;
    c.threads = o.threads;
    c.invert_distances = o.invert_distances;
    if (!o.emit.empty()) {
        c.emit.clear();
        for (const auto& name : o.emit) {
            auto e = parse_emit(name);
            if (!e) throw Error(ErrorKind::Usage, "unknown output kind '" + name + "'");
            c.emit.insert(*e);
        }
    }
    return c;
}

std::vector<std::string> one_input(const Options& o, const char* what) {
    if (o.inputs.size() != 1) throw Error(ErrorKind::Usage, std::string("expects exactly one ") + what + " via --input");
    return o.inputs;
}

// Binary sketch files start with the magic bytes; anything else is read as sketch TSV.
SketchSet load_sketches(const std::string& path) {
    const std::string data = read_file(path);
    if (data.size() >= kSketchMagic.size() && std::equal(kSketchMagic.begin(), kSketchMagic.end(), data.begin())) {
        return read_sketches(std::string_view(data));
    }
    std::istringstream in(data);
    return read_sketches_tsv(in);
}

template <class Writer>
std::string write_output(const fs::path& dir, std::string_view name, Writer&& writer) {
    fs::create_directories(dir);
    const auto path = dir / name;
    auto out = open_output(path);
    writer(out);
    close_output(out, path);
    return path.string();
}

std::vector<std::string> labels_for(const std::optional<std::string>& path, std::span<const std::string> ids) {
    if (!path) return {};
    return resolve_labels(ids, parse_labels(std::string_view(read_file(*path))));
}

json run_sketch(const Options& o) {
    auto c = build_config(o);
    c.validate();
    if (c.inputs.empty()) throw Error(ErrorKind::Usage, "no input files");
    auto records = read_fasta_files(c.inputs, c.alphabet);
    if (records.empty()) throw Error(ErrorKind::EmptySequence, "inputs contain no records");
    const auto scheme = effective_scheme(c.scheme, unify_alphabet(records));
    scheme.validate(records.front().alphabet);
    const SketchSet set{scheme, record_ids(records), sketch_all(records, scheme, c.threads)};

    const bool tsv = o.emit.size() == 1 && o.emit.front() == "sketch-tsv";
    if (!o.emit.empty() && !tsv && !(o.emit.size() == 1 && o.emit.front() == "sketch")) {
        throw Error(ErrorKind::Usage, "sketch emits 'sketch' or 'sketch-tsv'");
    }
    const fs::path dir(c.output_dir);
    const auto written = tsv ? write_output(dir, kSketchTsvFile, [&](std::ostream& out) { write_sketches_tsv(out, set); })
                             : write_output(dir, kSketchFile, [&](std::ostream& out) { write_sketches(out, set); });
    std::size_t empty = 0;
    for (const auto& s : set.sketches) empty += s.empty() ? 1 : 0;
    return {{"records", set.ids.size()}, {"empty_sketches", empty}, {"written", {written}}};
}

json run_dist(const Options& o) {
    auto c = build_config(o);
    c.validate();
    const auto set = load_sketches(one_input(o, "sketch file").front());
    check_measure(c.measure, set.scheme, Alphabet::Nucleotide);
    const auto edges = all_pairs_edges(set.sketches, c.measure, set.scheme, c.epsilon, {c.threads, c.invert_distances});
    const auto written = write_output(fs::path(c.output_dir), kEdgesFile,
                                      [&](std::ostream& out) { write_edges_tsv(out, edges, set.ids); });
    return {{"records", set.ids.size()}, {"edges", edges.size()}, {"written", {written}}};
}

json run_cluster(const Options& o) {
    auto c = build_config(o);
    c.validate();
    const auto set = load_sketches(one_input(o, "sketch file").front());
    const auto labels = labels_for(c.labels_path, set.ids);
    ClusteringResult result;
    if (o.edges_path) {
        if (c.hobohm_threshold) throw Error(ErrorKind::Usage, "--hobohm needs sketches, not an edge file");
        result.edges = read_edges_tsv(read_file(*o.edges_path), set.ids);
        result.clusters = threshold_components(set.ids.size(), result.edges);
        tally_labels(result.clusters, labels);
    } else {
        check_measure(c.measure, set.scheme, Alphabet::Nucleotide);
        ClusteringParams params;
        params.epsilon = c.epsilon;
        params.hobohm_threshold = c.hobohm_threshold;
        result = clusters_from_pipeline(set.sketches, c.measure, set.scheme, params, labels, {c.threads, c.invert_distances});
    }
    const fs::path dir(c.output_dir);
    json written = json::array();
    written.push_back(write_output(dir, kClustersFile, [&](std::ostream& out) { write_clusters_tsv(out, result.clusters, set.ids); }));
    if (c.emit.contains(EmitKind::EdgesTsv)) {
        written.push_back(write_output(dir, kEdgesFile, [&](std::ostream& out) { write_edges_tsv(out, result.edges, set.ids); }));
    }
    json j{{"records", set.ids.size()}, {"clusters", result.clusters.size()}, {"edges", result.edges.size()}};
    if (result.hobohm) j["representatives"] = result.hobohm->representatives.size();
    j["written"] = written;
    return j;
}

json run_split(const Options& o) {
    auto c = build_config(o);
    c.validate();
    if (!o.clusters_path) throw Error(ErrorKind::Usage, "split needs --clusters");
    const std::string text = read_file(*o.clusters_path);
    std::vector<std::string> ids;
    {
        std::istringstream rows(text);
        std::string line;
        while (std::getline(rows, line)) {
            if (line.empty() || line.front() == '#') continue;
            ids.push_back(line.substr(0, line.find('\t')));
        }
    }
    auto clusters = read_clusters_tsv(text, ids);
    tally_labels(clusters, labels_for(c.labels_path, ids));

    PipelineReport report;
    report.records = ids.size();
    report.clusters = clusters.size();
    StageClock clock(report);
    const auto initial = lpt_initial(clusters, c.partitions, c.criterion);
    report.initial_objective = objective(initial);
    const auto plan = tabu_search(initial);
    report.objective = objective(plan);
    check_forced_imbalance(plan, report);
    fill_plan_summary(plan, clusters, report);
    clock.lap("partition");

    const fs::path dir(c.output_dir);
    fs::create_directories(dir);
    if (c.emit.contains(EmitKind::PartitionsTsv)) {
        emit_partitions(plan, clusters, ids, dir / kPartitionsFile);
        report.written.push_back((dir / kPartitionsFile).string());
    }
    if (c.emit.contains(EmitKind::PartitionFasta)) {
        if (c.inputs.empty()) throw Error(ErrorKind::Usage, "the fasta output needs the sequences via --input");
        const auto records = read_fasta_files(c.inputs, c.alphabet);
        if (record_ids(records) != ids) throw Error(ErrorKind::Format, "sequence files do not match the cluster file");
        emit_partition_fasta(plan, clusters, records, dir, &report.written);
    }
    clock.lap("write");
    return report_json(report);
}

std::string one_line(std::string s) {
    for (auto& ch : s) {
        if (ch == '\n' || ch == '\r' || ch == '\t') ch = ' ';
    }
    return s;
}

int fail(std::string_view kind, const std::string& message, int code) {
    std::cerr << "ERROR\t" << kind << '\t' << one_line(message) << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Split sequence datasets into partitions with no close pairs across partitions"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Flat key=value file; command-line flags take precedence");
    app.set_help_all_flag("--help-all");

    Options o;
    app.add_option("-i,--input", o.inputs, "Input file (repeatable, or comma separated)")->delimiter(',');
    app.add_option("-o,--output-dir", o.output_dir, "Output directory");
    app.add_option("-k", o.k, "k-mer length");
    app.add_option("-s,--sketch-size", o.sketch_size, "MinHash bottom-s sketch size");
    app.add_option("-w,--minimizer", o.minimizer, "Minimizer window length (k-mers)");
    app.add_option("--prefix", o.prefix, "Keep k-mers starting with this many 'A'");
    app.add_option("-d,--distance", o.distance, "mash, jaccard, cosine, overlap or invcov");
    app.add_option("-e,--epsilon", o.epsilon, "Distance threshold; closer pairs share a partition");
    app.add_option("-p,--partitions", o.partitions, "Number of partitions");
    app.add_option("-c,--criterion", o.criterion, "size, log, squared, clusters or labels");
    app.add_option("--labels", o.labels, "Label file: sequence id <TAB> label");
    app.add_option("--hobohm", o.hobohm, "Hobohm 1 pre-clustering threshold");
    app.add_option("--preset", o.preset_name, "protein-mash, gene-mash, gene-cosine, genome-mash, genome-minimizer");
    app.add_option("--seed", o.seed, "Hash seed");
    app.add_option("--threads", o.threads, "Worker threads");
    app.add_option("--emit", o.emit, "Outputs: partitions, clusters, edges, sketch, sketch-tsv, fasta")->delimiter(',');
    app.add_flag("--no-canonical", o.no_canonical, "Do not merge k-mers with their reverse complements");
    app.add_option("--alphabet", o.alphabet, "auto, nucleotide or protein");
    app.add_option("--edges", o.edges_path, "cluster: edge file from 'dist' instead of recomputing");
    app.add_option("--clusters", o.clusters_path, "split: cluster file from 'cluster'");
    app.add_flag("--invert-distances", o.invert_distances)->group("");

    auto* partition = app.add_subcommand("partition", "Full pipeline: sketch, cluster and split")->fallthrough();
    auto* sketch = app.add_subcommand("sketch", "Sketch FASTA input into a sketch file")->fallthrough();
    auto* dist = app.add_subcommand("dist", "Edges closer than epsilon from a sketch file")->fallthrough();
    auto* cluster = app.add_subcommand("cluster", "Clusters from a sketch file, optionally via an edge file")->fallthrough();
    auto* split = app.add_subcommand("split", "Partitions from a cluster file")->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("Usage", e.what(), 1);
    }

    try {
        json out;
        if (*partition) {
            out = report_json(run_pipeline(build_config(o)));
        } else if (*sketch) {
            out = run_sketch(o);
        } else if (*dist) {
            out = run_dist(o);
        } else if (*cluster) {
            out = run_cluster(o);
        } else if (*split) {
            out = run_split(o);
        }
        std::cout << out.dump(2) << '\n';
        return 0;
    } catch (const Error& e) {
        return fail(to_string(e.kind()), e.detail(), exit_code(e.kind()));
    } catch (const fs::filesystem_error& e) {
        return fail("Io", e.what(), 2);
    } catch (const std::exception& e) {
        return fail("Internal", e.what(), 3);
    }
}
