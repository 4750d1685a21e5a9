#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spanseq/clustering.hpp"
#include "spanseq/error.hpp"

namespace spanseq {

enum class BalanceCriterion : std::uint8_t { Size, LogSize, SquaredSize, ClusterCountThenSize, LabelBalance };

constexpr std::string_view to_string(BalanceCriterion c) noexcept {
    switch (c) {
        case BalanceCriterion::Size: return "size";
        case BalanceCriterion::LogSize: return "log";
        case BalanceCriterion::SquaredSize: return "squared";
        case BalanceCriterion::ClusterCountThenSize: return "clusters";
        case BalanceCriterion::LabelBalance: return "labels";
    }
    return "size";
}

inline std::optional<BalanceCriterion> parse_criterion(std::string_view name) {
    if (name == "size") return BalanceCriterion::Size;
    if (name == "log") return BalanceCriterion::LogSize;
    if (name == "squared") return BalanceCriterion::SquaredSize;
    if (name == "clusters") return BalanceCriterion::ClusterCountThenSize;
    if (name == "labels") return BalanceCriterion::LabelBalance;
    return std::nullopt;
}

// Weight of a cluster under a criterion: size, ln(1 + size) or size^2.
inline double cluster_weight(BalanceCriterion criterion, std::uint64_t size) {
    const auto s = static_cast<double>(size);
    switch (criterion) {
        case BalanceCriterion::LogSize: return std::log1p(s);
        case BalanceCriterion::SquaredSize: return s * s;
        default: return s;
    }
}

// Lexicographic objective, smaller is better. Size-family criteria use one component.
struct Objective {
    std::array<double, 2> value{};
    std::size_t arity = 1;

    std::string str() const {
        std::string s = "(";
        for (std::size_t i = 0; i < arity; ++i) {
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.6g", value[i]);
            s += (i ? ", " : "");
            s += buf;
        }
        return s + ")";
    }
};

// Three-way comparison with a relative tolerance, so floating-point noise in log weights
// never counts as an improvement.
inline int compare(const Objective& a, const Objective& b) noexcept {
    for (std::size_t i = 0; i < std::min(a.arity, b.arity); ++i) {
        const double x = a.value[i], y = b.value[i];
        const double tol = 1e-9 * std::max({1.0, std::fabs(x), std::fabs(y)});
        if (x < y - tol) return -1;
        if (x > y + tol) return 1;
    }
    return 0;
}

struct PartitionPlan {
    std::size_t p = 0;
    BalanceCriterion criterion = BalanceCriterion::Size;

    // Per cluster, indexed by position in the cluster list the plan was built from.
    std::vector<std::uint32_t> cluster_ids;
    std::vector<std::uint64_t> sizes;
    std::vector<double> weights;
    std::vector<std::vector<std::uint64_t>> cluster_labels;  // [cluster][label]
    std::vector<std::string> label_names;

    std::vector<std::size_t> assignment;                     // cluster -> partition
    std::vector<double> loads;
    std::vector<std::size_t> counts;
    std::vector<std::vector<std::uint64_t>> label_tallies;   // [partition][label]
    std::vector<std::vector<std::size_t>> members;           // per partition, by (weight, id)

    std::size_t cluster_count() const noexcept { return assignment.size(); }
};

// A swap of from_a (in qa) against from_b (in qb); a missing side is a one-way transfer.
struct Exchange {
    std::size_t qa = 0;
    std::size_t qb = 0;
    std::optional<std::size_t> from_a;
    std::optional<std::size_t> from_b;

    bool operator==(const Exchange&) const = default;
};

struct ExchangeCandidate {
    Exchange move;
    Objective pair_objective;  // objective restricted to {qa, qb} after the move
};

namespace detail {

inline bool weight_order(const PartitionPlan& plan, std::size_t x, std::size_t y) {
    if (plan.weights[x] != plan.weights[y]) return plan.weights[x] < plan.weights[y];
    return plan.cluster_ids[x] < plan.cluster_ids[y];
}

inline void recompute_load(PartitionPlan& plan, std::size_t q) {
    double load = 0.0;
    for (auto c : plan.members[q]) load += plan.weights[c];
    plan.loads[q] = load;
}

template <class T>
T range_of(std::span<const T> v) {
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
}

inline std::size_t count_range(const PartitionPlan& plan) {
    return range_of<std::size_t>(plan.counts);
}

inline double label_range_sum(const PartitionPlan& plan) {
    double total = 0.0;
    for (std::size_t l = 0; l < plan.label_names.size(); ++l) {
        std::uint64_t lo = std::numeric_limits<std::uint64_t>::max(), hi = 0;
        for (std::size_t q = 0; q < plan.p; ++q) {
            lo = std::min(lo, plan.label_tallies[q][l]);
            hi = std::max(hi, plan.label_tallies[q][l]);
        }
        total += static_cast<double>(hi - lo);
    }
    return total;
}

inline Objective make_objective(BalanceCriterion criterion, double load_range, double count_range, double label_range) {
    switch (criterion) {
        case BalanceCriterion::ClusterCountThenSize: return Objective{{count_range, load_range}, 2};
        case BalanceCriterion::LabelBalance: return Objective{{label_range, load_range}, 2};
        default: return Objective{{load_range, 0.0}, 1};
    }
}

inline PartitionPlan empty_plan(std::span<const Cluster> clusters, std::size_t p, BalanceCriterion criterion) {
    if (p < 2) throw Error(ErrorKind::Config, "need at least 2 partitions");
    if (clusters.empty()) throw Error(ErrorKind::Config, "nothing to partition");
    PartitionPlan plan;
    plan.p = p;
    plan.criterion = criterion;

    std::map<std::string, std::size_t> label_index;
    for (const auto& c : clusters) {
        for (const auto& [label, n] : c.label_counts) label_index.emplace(label, 0);
    }
    if (criterion == BalanceCriterion::LabelBalance && label_index.empty()) {
        throw Error(ErrorKind::MissingLabel, "label balance needs labels");
    }
    std::size_t next = 0;
    for (auto& [label, idx] : label_index) {
        idx = next++;
        plan.label_names.push_back(label);
    }

    for (const auto& c : clusters) {
        if (c.size == 0) throw Error(ErrorKind::Config, "cluster " + std::to_string(c.cluster_id) + " is empty");
        plan.cluster_ids.push_back(c.cluster_id);
        plan.sizes.push_back(c.size);
        plan.weights.push_back(cluster_weight(criterion, c.size));
        std::vector<std::uint64_t> row(plan.label_names.size(), 0);
        std::uint64_t labelled = 0;
        for (const auto& [label, n] : c.label_counts) {
            row[label_index.at(label)] = n;
            labelled += n;
        }
        if (!plan.label_names.empty() && labelled != c.size) {
            throw Error(ErrorKind::MissingLabel, "cluster " + std::to_string(c.cluster_id) + " has unlabelled members");
        }
        plan.cluster_labels.push_back(std::move(row));
    }
    plan.assignment.assign(clusters.size(), 0);
    plan.loads.assign(p, 0.0);
    plan.counts.assign(p, 0);
    plan.label_tallies.assign(p, std::vector<std::uint64_t>(plan.label_names.size(), 0));
    plan.members.assign(p, {});
    return plan;
}

inline void insert_member(PartitionPlan& plan, std::size_t q, std::size_t c) {
    auto& m = plan.members[q];
    m.insert(std::upper_bound(m.begin(), m.end(), c, [&](std::size_t x, std::size_t y) { return weight_order(plan, x, y); }), c);
    plan.assignment[c] = q;
    ++plan.counts[q];
    for (std::size_t l = 0; l < plan.label_names.size(); ++l) plan.label_tallies[q][l] += plan.cluster_labels[c][l];
}

inline void erase_member(PartitionPlan& plan, std::size_t q, std::size_t c) {
    auto& m = plan.members[q];
    m.erase(std::find(m.begin(), m.end(), c));
    --plan.counts[q];
    for (std::size_t l = 0; l < plan.label_names.size(); ++l) plan.label_tallies[q][l] -= plan.cluster_labels[c][l];
}

// Unordered cluster-id pair of a move; a missing side is UINT32_MAX.
inline std::pair<std::uint32_t, std::uint32_t> move_key(const PartitionPlan& plan, const Exchange& m) {
    const std::uint32_t a = m.from_a ? plan.cluster_ids[*m.from_a] : UINT32_MAX;
    const std::uint32_t b = m.from_b ? plan.cluster_ids[*m.from_b] : UINT32_MAX;
    return {std::min(a, b), std::max(a, b)};
}

}  // namespace detail

inline Objective objective(const PartitionPlan& plan) {
    return detail::make_objective(plan.criterion, detail::range_of<double>(plan.loads),
                                  static_cast<double>(detail::count_range(plan)), detail::label_range_sum(plan));
}

// Objective restricted to the two partitions qa and qb.
inline Objective pair_objective(const PartitionPlan& plan, std::size_t qa, std::size_t qb) {
    double labels = 0.0;
    for (std::size_t l = 0; l < plan.label_names.size(); ++l) {
        const auto x = plan.label_tallies[qa][l], y = plan.label_tallies[qb][l];
        labels += static_cast<double>(x > y ? x - y : y - x);
    }
    const double counts = std::fabs(static_cast<double>(plan.counts[qa]) - static_cast<double>(plan.counts[qb]));
    return detail::make_objective(plan.criterion, std::fabs(plan.loads[qa] - plan.loads[qb]), counts, labels);
}

inline void apply_exchange(PartitionPlan& plan, const Exchange& m) {
    if (m.from_a) {
        detail::erase_member(plan, m.qa, *m.from_a);
        detail::insert_member(plan, m.qb, *m.from_a);
    }
    if (m.from_b) {
        detail::erase_member(plan, m.qb, *m.from_b);
        detail::insert_member(plan, m.qa, *m.from_b);
    }
    detail::recompute_load(plan, m.qa);
    detail::recompute_load(plan, m.qb);
}

// Objective restricted to {qa, qb} as it would be after applying m.
inline Objective pair_objective_after(const PartitionPlan& plan, const Exchange& m) {
    const double wa = m.from_a ? plan.weights[*m.from_a] : 0.0;
    const double wb = m.from_b ? plan.weights[*m.from_b] : 0.0;
    const double la = plan.loads[m.qa] - wa + wb;
    const double lb = plan.loads[m.qb] + wa - wb;
    const auto na = static_cast<double>(plan.counts[m.qa]) - (m.from_a ? 1 : 0) + (m.from_b ? 1 : 0);
    const auto nb = static_cast<double>(plan.counts[m.qb]) + (m.from_a ? 1 : 0) - (m.from_b ? 1 : 0);
    double labels = 0.0;
    for (std::size_t l = 0; l < plan.label_names.size(); ++l) {
        const auto xa = m.from_a ? static_cast<double>(plan.cluster_labels[*m.from_a][l]) : 0.0;
        const auto xb = m.from_b ? static_cast<double>(plan.cluster_labels[*m.from_b][l]) : 0.0;
        const double ta = static_cast<double>(plan.label_tallies[m.qa][l]) - xa + xb;
        const double tb = static_cast<double>(plan.label_tallies[m.qb][l]) + xa - xb;
        labels += std::fabs(ta - tb);
    }
    return detail::make_objective(plan.criterion, std::fabs(la - lb), std::fabs(na - nb), labels);
}

// Whole-plan objective and cluster-count range after applying m, without mutating plan.
inline std::pair<Objective, std::size_t> objective_after(const PartitionPlan& plan, const Exchange& m) {
    const double wa = m.from_a ? plan.weights[*m.from_a] : 0.0;
    const double wb = m.from_b ? plan.weights[*m.from_b] : 0.0;
    std::vector<double> loads = plan.loads;
    std::vector<std::size_t> counts = plan.counts;
    loads[m.qa] += wb - wa;
    loads[m.qb] += wa - wb;
    if (m.from_a) {
        --counts[m.qa];
        ++counts[m.qb];
    }
    if (m.from_b) {
        ++counts[m.qa];
        --counts[m.qb];
    }
    double labels = 0.0;
    for (std::size_t l = 0; l < plan.label_names.size(); ++l) {
        std::uint64_t lo = std::numeric_limits<std::uint64_t>::max(), hi = 0;
        for (std::size_t q = 0; q < plan.p; ++q) {
            std::uint64_t t = plan.label_tallies[q][l];
            if (q == m.qa) {
                if (m.from_a) t -= plan.cluster_labels[*m.from_a][l];
                if (m.from_b) t += plan.cluster_labels[*m.from_b][l];
            } else if (q == m.qb) {
                if (m.from_a) t += plan.cluster_labels[*m.from_a][l];
                if (m.from_b) t -= plan.cluster_labels[*m.from_b][l];
            }
            lo = std::min(lo, t);
            hi = std::max(hi, t);
        }
        labels += static_cast<double>(hi - lo);
    }
    const std::size_t crange = detail::range_of<std::size_t>(counts);
    return {detail::make_objective(plan.criterion, detail::range_of<double>(loads), static_cast<double>(crange), labels),
            crange};
}

// Longest-processing-time start: clusters by descending weight (ties by cluster id), each to
// the currently lightest partition (ties to the lowest index).
inline PartitionPlan lpt_initial(std::span<const Cluster> clusters, std::size_t p, BalanceCriterion criterion) {
    PartitionPlan plan = detail::empty_plan(clusters, p, criterion);
    std::vector<std::size_t> order(clusters.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        if (plan.weights[x] != plan.weights[y]) return plan.weights[x] > plan.weights[y];
        return plan.cluster_ids[x] < plan.cluster_ids[y];
    });
    for (auto c : order) {
        const auto q = static_cast<std::size_t>(std::min_element(plan.loads.begin(), plan.loads.end()) - plan.loads.begin());
        detail::insert_member(plan, q, c);
        plan.loads[q] += plan.weights[c];
    }
    for (std::size_t q = 0; q < p; ++q) detail::recompute_load(plan, q);
    return plan;
}

namespace detail {

// Best (x, y) with x from xs and y from ys (both ascending by weight) for a load difference
// delta = load_a - load_b: minimizes |delta - 2 (w(x) - w(y))| in a single two-pointer pass.
// A nullopt entry stands for "nothing moves" on that side.
inline std::optional<std::pair<std::optional<std::size_t>, std::optional<std::size_t>>> closest_exchange(
    const PartitionPlan& plan, std::span<const std::optional<std::size_t>> xs,
    std::span<const std::optional<std::size_t>> ys, double delta) {
    if (xs.empty() || ys.empty()) return std::nullopt;
    auto w = [&](const std::optional<std::size_t>& c) { return c ? plan.weights[*c] : 0.0; };
    std::size_t j = 0;
    double best = std::numeric_limits<double>::max();
    std::pair<std::optional<std::size_t>, std::optional<std::size_t>> pick;
    for (const auto& x : xs) {
        const double target = w(x) - delta / 2.0;
        while (j + 1 < ys.size() && w(ys[j + 1]) <= target) ++j;
        for (std::size_t t = j; t < std::min(j + 2, ys.size()); ++t) {
            const double diff = std::fabs(delta - 2.0 * (w(x) - w(ys[t])));
            if (diff < best - 1e-12 * std::max(1.0, best)) {
                best = diff;
                pick = {x, ys[t]};
            }
        }
    }
    return pick;
}

inline bool candidate_less(const PartitionPlan& plan, const ExchangeCandidate& x, const ExchangeCandidate& y) {
    const int c = compare(x.pair_objective, y.pair_objective);
    if (c != 0) return c < 0;
    // Prefer moves that even out cluster counts between the two partitions.
    auto count_gap = [&](const Exchange& m) {
        const long na = static_cast<long>(plan.counts[m.qa]) - (m.from_a ? 1 : 0) + (m.from_b ? 1 : 0);
        const long nb = static_cast<long>(plan.counts[m.qb]) + (m.from_a ? 1 : 0) - (m.from_b ? 1 : 0);
        return std::labs(na - nb);
    };
    const long gx = count_gap(x.move), gy = count_gap(y.move);
    if (gx != gy) return gx < gy;
    return detail::move_key(plan, x.move) < detail::move_key(plan, y.move);
}

}  // namespace detail

// The best swap or one-way transfer between qa and qb under the objective restricted to
// those two partitions. Returns nothing unless the best move improves or ties the current
// restricted objective. Size-family and cluster-count criteria use one two-pointer pass per
// move class over the weight-sorted member lists; label balance enumerates all pairs.
inline std::optional<ExchangeCandidate> best_exchange_between(const PartitionPlan& plan, std::size_t qa, std::size_t qb) {
    if (qa == qb || qa >= plan.p || qb >= plan.p) throw Error(ErrorKind::Internal, "invalid partition pair");
    const Objective current = pair_objective(plan, qa, qb);
    std::optional<ExchangeCandidate> best;
    auto consider = [&](const Exchange& m) {
        ExchangeCandidate cand{m, pair_objective_after(plan, m)};
        if (!best || detail::candidate_less(plan, cand, *best)) best = cand;
    };

    std::vector<std::optional<std::size_t>> xa(plan.members[qa].begin(), plan.members[qa].end());
    std::vector<std::optional<std::size_t>> xb(plan.members[qb].begin(), plan.members[qb].end());

    if (plan.criterion == BalanceCriterion::LabelBalance) {
        xa.insert(xa.begin(), std::nullopt);
        xb.insert(xb.begin(), std::nullopt);
        for (const auto& x : xa) {
            for (const auto& y : xb) {
                if (!x && !y) continue;
                consider(Exchange{qa, qb, x, y});
            }
        }
    } else {
        const double delta = plan.loads[qa] - plan.loads[qb];
        const std::array<std::optional<std::size_t>, 1> none{std::nullopt};
        if (auto s = detail::closest_exchange(plan, xa, xb, delta)) consider(Exchange{qa, qb, s->first, s->second});
        if (auto s = detail::closest_exchange(plan, xa, none, delta)) consider(Exchange{qa, qb, s->first, s->second});
        if (auto s = detail::closest_exchange(plan, none, xb, delta)) consider(Exchange{qa, qb, s->first, s->second});
    }
    if (!best || compare(best->pair_objective, current) > 0) return std::nullopt;
    return best;
}

struct TabuStats {
    std::size_t improving_moves = 0;
    std::size_t sideways_moves = 0;
};

// Descent over pairwise exchanges. Each round takes the best exchange of every partition
// pair and applies the overall best one if it strictly improves the objective. A move that
// only ties is accepted when it strictly narrows the cluster-count range and its cluster
// pair is not among the last P moves; at most C such moves in a row.
inline PartitionPlan tabu_search(PartitionPlan plan, TabuStats* stats = nullptr) {
    const std::size_t tabu_length = plan.p;
    const std::size_t sideways_cap = plan.cluster_count();
    std::deque<std::pair<std::uint32_t, std::uint32_t>> tabu;
    std::size_t sideways = 0;

    while (true) {
        const Objective current = objective(plan);
        const std::size_t current_counts = detail::count_range(plan);

        struct Scored {
            Exchange move;
            Objective global;
            std::size_t count_range;
        };
        std::optional<Scored> improving, sideways_best;
        auto better = [&](const Scored& x, const std::optional<Scored>& y) {
            if (!y) return true;
            const int c = compare(x.global, y->global);
            if (c != 0) return c < 0;
            if (x.count_range != y->count_range) return x.count_range < y->count_range;
            return std::pair(x.move.qa, x.move.qb) < std::pair(y->move.qa, y->move.qb);
        };

        for (std::size_t qa = 0; qa < plan.p; ++qa) {
            for (std::size_t qb = qa + 1; qb < plan.p; ++qb) {
                auto cand = best_exchange_between(plan, qa, qb);
                if (!cand) continue;
                auto [global, crange] = objective_after(plan, cand->move);
                Scored s{cand->move, global, crange};
                const int c = compare(global, current);
                if (c < 0) {
                    if (better(s, improving)) improving = s;
                } else if (c == 0 && crange < current_counts) {
                    const auto key = detail::move_key(plan, s.move);
                    if (std::find(tabu.begin(), tabu.end(), key) == tabu.end() && better(s, sideways_best)) sideways_best = s;
                }
            }
        }

        const Scored* chosen = nullptr;
        if (improving) {
            chosen = &*improving;
            sideways = 0;
            if (stats) ++stats->improving_moves;
        } else if (sideways_best && sideways < sideways_cap) {
            chosen = &*sideways_best;
            ++sideways;
            if (stats) ++stats->sideways_moves;
        } else {
            break;
        }
        tabu.push_back(detail::move_key(plan, chosen->move));
        if (tabu.size() > tabu_length) tabu.pop_front();
        apply_exchange(plan, chosen->move);
    }
    return plan;
}

inline PartitionPlan make_partitions(std::span<const Cluster> clusters, std::size_t p, BalanceCriterion criterion,
                                     TabuStats* stats = nullptr) {
    return tabu_search(lpt_initial(clusters, p, criterion), stats);
}

// Partition of every record, via its cluster.
inline std::vector<std::size_t> record_partitions(const PartitionPlan& plan, std::span<const Cluster> clusters,
                                                  std::size_t record_count) {
    std::vector<std::size_t> of(record_count, SIZE_MAX);
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        for (auto m : clusters[c].members) {
            if (m >= record_count) throw Error(ErrorKind::IndexOutOfRange, "cluster member outside record range");
            of[m] = plan.assignment[c];
        }
    }
    return of;
}

// "#sequence<TAB>cluster<TAB>partition" header, then one row per record in input order.
inline void write_partitions_tsv(std::ostream& out, const PartitionPlan& plan, std::span<const Cluster> clusters,
                                 std::span<const std::string> ids) {
    if (clusters.size() != plan.cluster_count()) throw Error(ErrorKind::Internal, "plan/cluster mismatch");
    std::vector<std::uint32_t> cluster_of(ids.size(), UINT32_MAX);
    for (const auto& c : clusters) {
        for (auto m : c.members) cluster_of[m] = c.cluster_id;
    }
    const auto part = record_partitions(plan, clusters, ids.size());
    out << "#sequence\tcluster\tpartition\n";
    for (std::size_t r = 0; r < ids.size(); ++r) {
        if (part[r] == SIZE_MAX) throw Error(ErrorKind::Internal, "record '" + ids[r] + "' is unassigned");
        out << ids[r] << '\t' << cluster_of[r] << '\t' << part[r] << '\n';
    }
}

}  // namespace spanseq
