#pragma once

// Similarity-aware dataset partitioning: k-mer sketches, threshold single-linkage
// clustering and balanced assignment of clusters to cross-validation partitions.

#include "spanseq/error.hpp"
#include "spanseq/sequence_io.hpp"
#include "spanseq/hash.hpp"
#include "spanseq/sketch.hpp"
#include "spanseq/sketch_io.hpp"
#include "spanseq/distance.hpp"
#include "spanseq/union_find.hpp"
#include "spanseq/clustering.hpp"
#include "spanseq/partition.hpp"
#include "spanseq/pipeline.hpp"
