// Splits a FASTA file into similarity-separated folds without touching the disk beyond
// reading the input. Usage: split_in_memory <fasta> [partitions] [epsilon]
#include <cstdlib>
#include <iostream>

#include "spanseq/spanseq.hpp"

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: split_in_memory <fasta> [partitions] [epsilon]\n";
        return 1;
    }
    const std::size_t partitions = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 5;
    const double epsilon = argc > 3 ? std::strtod(argv[3], nullptr) : 0.05;
    try {
        auto records = spanseq::parse_fasta(std::string_view(spanseq::read_file(argv[1])));
        const auto alphabet = spanseq::unify_alphabet(records);
        const auto scheme = spanseq::effective_scheme(spanseq::SketchScheme{}, alphabet);

        const auto sketches = spanseq::sketch_all(records, scheme);
        spanseq::ClusteringParams params;
        params.epsilon = epsilon;
        const auto clustering = spanseq::clusters_from_pipeline(sketches, spanseq::DistanceMeasure::Mash, scheme, params);
        const auto plan = spanseq::make_partitions(clustering.clusters, partitions, spanseq::BalanceCriterion::Size);

        std::cout << records.size() << " records, " << clustering.clusters.size() << " clusters, objective "
                  << spanseq::objective(plan).str() << '\n';
        spanseq::write_partitions_tsv(std::cout, plan, clustering.clusters, spanseq::record_ids(records));
    } catch (const spanseq::Error& e) {
        std::cerr << e.what() << '\n';
        return spanseq::exit_code(e.kind());
    }
    return 0;
}
