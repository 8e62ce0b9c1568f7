#include "viphash/workload.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstring>
#include <fstream>

namespace viphash {

void WorkloadConfig::validate() const {
    if (zipf < 0.0) throw std::invalid_argument("zipf must be >= 0");
    if (initial_size < 1) throw std::invalid_argument("initialSize must be >= 1");
    auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!in_unit(fetch_proportion) || !in_unit(insert_proportion) || !in_unit(delete_proportion))
        throw std::invalid_argument("proportions must lie in [0, 1]");
    double sum = fetch_proportion + insert_proportion + delete_proportion;
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("proportions must sum to 1");
    if (dist_shift_prct < 0.0 || dist_shift_prct > 100.0)
        throw std::invalid_argument("distShiftPrct must lie in [0, 100]");
    if (dist_shift_freq > 0 && dist_shift_prct <= 0.0)
        throw std::invalid_argument("distShiftFreq set but distShiftPrct is 0");
}

namespace detail {

std::uint32_t OrderStatTree::new_node(Key key) {
    std::uint32_t idx;
    if (free_ != npos) {
        idx = free_;
        free_ = arena_[idx].left;
    } else {
        arena_.push_back({});
        idx = static_cast<std::uint32_t>(arena_.size() - 1);
    }
    arena_[idx] = {key, splitmix64(prio_state_), npos, npos, 1};
    return idx;
}

void OrderStatTree::update(std::uint32_t t) {
    TNode& n = arena_[t];
    n.size = 1;
    if (n.left != npos) n.size += arena_[n.left].size;
    if (n.right != npos) n.size += arena_[n.right].size;
}

void OrderStatTree::build(const std::vector<Key>& keys) {
    arena_.clear();
    arena_.reserve(keys.size());
    root_ = npos;
    free_ = npos;
    // Cartesian-tree construction over the rank sequence: O(n) with a
    // rightmost-spine stack, max-heap on priorities.
    std::vector<std::uint32_t> spine;
    for (Key k : keys) {
        std::uint32_t node = new_node(k);
        std::uint32_t last_popped = npos;
        while (!spine.empty() && arena_[spine.back()].prio < arena_[node].prio) {
            last_popped = spine.back();
            spine.pop_back();
        }
        arena_[node].left = last_popped;
        if (spine.empty())
            root_ = node;
        else
            arena_[spine.back()].right = node;
        spine.push_back(node);
    }
    // sizes bottom-up along the spine, then fix all via recursion-free pass:
    // every node's subtree is finalized once its spine descendants are.
    // Simplest correct pass: recompute sizes with an explicit stack.
    if (root_ != npos) {
        std::vector<std::uint32_t> stack{root_};
        std::vector<std::uint32_t> order;
        order.reserve(arena_.size());
        while (!stack.empty()) {
            std::uint32_t t = stack.back();
            stack.pop_back();
            order.push_back(t);
            if (arena_[t].left != npos) stack.push_back(arena_[t].left);
            if (arena_[t].right != npos) stack.push_back(arena_[t].right);
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it) update(*it);
    }
}

Key OrderStatTree::at(std::uint64_t pos) const {
    std::uint32_t t = root_;
    for (;;) {
        const TNode& n = arena_[t];
        std::uint64_t left_size = n.left == npos ? 0 : arena_[n.left].size;
        if (pos < left_size) {
            t = n.left;
        } else if (pos == left_size) {
            return n.key;
        } else {
            pos -= left_size + 1;
            t = n.right;
        }
    }
}

void OrderStatTree::set_at(std::uint64_t pos, Key key) {
    std::uint32_t t = root_;
    for (;;) {
        TNode& n = arena_[t];
        std::uint64_t left_size = n.left == npos ? 0 : arena_[n.left].size;
        if (pos < left_size) {
            t = n.left;
        } else if (pos == left_size) {
            n.key = key;
            return;
        } else {
            pos -= left_size + 1;
            t = n.right;
        }
    }
}

std::uint32_t OrderStatTree::merge(std::uint32_t a, std::uint32_t b) {
    if (a == npos) return b;
    if (b == npos) return a;
    if (arena_[a].prio >= arena_[b].prio) {
        arena_[a].right = merge(arena_[a].right, b);
        update(a);
        return a;
    }
    arena_[b].left = merge(a, arena_[b].left);
    update(b);
    return b;
}

void OrderStatTree::split(std::uint32_t t, std::uint64_t count, std::uint32_t& left,
                          std::uint32_t& right) {
    if (t == npos) {
        left = right = npos;
        return;
    }
    std::uint64_t left_size = arena_[t].left == npos ? 0 : arena_[arena_[t].left].size;
    if (count <= left_size) {
        split(arena_[t].left, count, left, arena_[t].left);
        right = t;
    } else {
        split(arena_[t].right, count - left_size - 1, arena_[t].right, right);
        left = t;
    }
    update(t);
}

void OrderStatTree::insert_at(std::uint64_t pos, Key key) {
    std::uint32_t left, right;
    split(root_, pos, left, right);
    root_ = merge(merge(left, new_node(key)), right);
}

Key OrderStatTree::erase_at(std::uint64_t pos) {
    std::uint32_t left, mid, right;
    split(root_, pos, left, right);
    split(right, 1, mid, right);
    Key key = arena_[mid].key;
    arena_[mid].left = free_;
    free_ = mid;
    root_ = merge(left, right);
    return key;
}

}  // namespace detail

PopularityModel::PopularityModel(double exponent, std::vector<Key> keys_in_rank_order)
    : s_(exponent), population_(keys_in_rank_order.size()), rank_to_key_(std::move(keys_in_rank_order)) {
    assert(population_ >= 1);
    present_.reserve(population_ * 2);
    for (Key k : rank_to_key_) present_.insert(k);
    if (present_.size() != population_)
        throw std::invalid_argument("duplicate keys in rank order");
    ensure_weights(population_);
    rebuild_lut();
}

void PopularityModel::ensure_weights(std::uint64_t n) {
    std::uint64_t from = cum_.size();
    if (n <= from) return;
    cum_.resize(n);
    double acc = from == 0 ? 0.0 : cum_[from - 1];
    if (s_ == 0.0) {
        for (std::uint64_t i = from; i < n; ++i) cum_[i] = static_cast<double>(i + 1);
    } else {
        for (std::uint64_t i = from; i < n; ++i) {
            acc += std::pow(static_cast<double>(i + 1), -s_);
            cum_[i] = acc;
        }
    }
}

void PopularityModel::rebuild_lut() {
    constexpr std::uint64_t kLutSize = 1u << 16;
    if (tree_built_) {
        lut_.clear();  // dynamic population: plain binary search
        return;
    }
    lut_.assign(kLutSize + 1, 0);
    const double total = total_weight();
    auto begin = cum_.begin();
    auto end = cum_.begin() + static_cast<std::ptrdiff_t>(population_);
    for (std::uint64_t q = 0; q < kLutSize; ++q) {
        double threshold = total * (static_cast<double>(q) / static_cast<double>(kLutSize));
        lut_[q] = static_cast<std::uint32_t>(std::upper_bound(begin, end, threshold) - begin);
    }
    lut_[kLutSize] = static_cast<std::uint32_t>(population_);
}

std::uint64_t PopularityModel::sample_rank(Xoshiro256& rng) const {
    const double total = total_weight();
    const double u = rng.next_double() * total;
    const auto begin = cum_.begin();
    const auto full_end = begin + static_cast<std::ptrdiff_t>(population_);
    std::uint64_t idx;
    if (!lut_.empty()) {
        const std::uint64_t lut_n = lut_.size() - 1;
        std::uint64_t bucket =
            std::min<std::uint64_t>(lut_n - 1, static_cast<std::uint64_t>(u / total * static_cast<double>(lut_n)));
        const auto lo = begin + lut_[bucket];
        const auto hi = begin + std::min<std::uint64_t>(population_, std::uint64_t{lut_[bucket + 1]} + 1);
        idx = static_cast<std::uint64_t>(std::upper_bound(lo, hi, u) - begin);
        // The quantile bracket is a pure accelerator; if floating-point
        // bucketing missed, redo the search over the full range.
        const bool bracketed = idx < population_ && u < cum_[idx] && (idx == 0 || cum_[idx - 1] <= u);
        if (!bracketed) idx = static_cast<std::uint64_t>(std::upper_bound(begin, full_end, u) - begin);
    } else {
        idx = static_cast<std::uint64_t>(std::upper_bound(begin, full_end, u) - begin);
    }
    if (idx >= population_) idx = population_ - 1;
    return idx + 1;
}

Key PopularityModel::key_of_rank(std::uint64_t rank) const {
    assert(rank >= 1 && rank <= population_);
    return tree_built_ ? tree_.at(rank - 1) : rank_to_key_[rank - 1];
}

double PopularityModel::probability_of_rank(std::uint64_t rank) const {
    assert(rank >= 1 && rank <= population_);
    double prev = rank == 1 ? 0.0 : cum_[rank - 2];
    return (cum_[rank - 1] - prev) / total_weight();
}

std::uint64_t PopularityModel::churn_prefix_size(double fraction) const {
    assert(fraction > 0.0 && fraction <= 1.0);
    const double threshold = fraction * total_weight();
    auto begin = cum_.begin();
    auto end = cum_.begin() + static_cast<std::ptrdiff_t>(population_);
    auto it = std::lower_bound(begin, end, threshold);
    if (it == end) --it;  // fraction == 1 with rounding
    return static_cast<std::uint64_t>(it - begin) + 1;
}

std::uint64_t PopularityModel::apply_churn(Xoshiro256& rng, double shift_prct) {
    assert(shift_prct > 0.0 && shift_prct <= 100.0);
    const std::uint64_t m = churn_prefix_size(shift_prct / 100.0);
    const std::uint64_t tail = population_ - m;
    const std::uint64_t pairs = std::min(m, tail);
    std::unordered_set<std::uint64_t> used;
    used.reserve(pairs * 2);
    for (std::uint64_t i = 1; i <= pairs; ++i) {
        std::uint64_t target;
        do {
            target = m + 1 + rng.next_below(tail);
        } while (used.count(target));
        used.insert(target);
        if (tree_built_) {
            Key a = tree_.at(i - 1);
            Key b = tree_.at(target - 1);
            tree_.set_at(i - 1, b);
            tree_.set_at(target - 1, a);
        } else {
            std::swap(rank_to_key_[i - 1], rank_to_key_[target - 1]);
        }
    }
    return m;
}

void PopularityModel::materialize_tree() {
    if (tree_built_) return;
    tree_.build(rank_to_key_);
    rank_to_key_.clear();
    rank_to_key_.shrink_to_fit();
    tree_built_ = true;
    lut_.clear();
}

void PopularityModel::insert_key_at_random_rank(Key key, Xoshiro256& rng) {
    assert(!contains(key));
    materialize_tree();
    std::uint64_t pos = rng.next_below(population_ + 1);
    tree_.insert_at(pos, key);
    present_.insert(key);
    ++population_;
    ensure_weights(population_);
}

Key PopularityModel::erase_uniform_key(Xoshiro256& rng) {
    assert(population_ >= 1);
    materialize_tree();
    std::uint64_t pos = rng.next_below(population_);
    Key key = tree_.erase_at(pos);
    present_.erase(key);
    --population_;
    return key;
}

Key PopularityModel::fresh_key(Xoshiro256& rng) const {
    for (;;) {
        Key k = rng.next();
        if (!present_.count(k)) return k;
    }
}

WorkloadStream::WorkloadStream(const WorkloadConfig& config)
    : config_(config),
      rng_(config.random_seed),
      model_(config.zipf, [&]() {
          config.validate();
          const std::uint64_t n = config.initial_size;
          std::vector<Key> keys;
          keys.reserve(n);
          if (config.key_pattern == KeyPattern::Sequential) {
              for (std::uint64_t i = 1; i <= n; ++i) keys.push_back(i);
          } else {
              std::unordered_set<Key> seen;
              seen.reserve(n * 2);
              while (keys.size() < n) {
                  Key k = rng_.next();
                  if (seen.insert(k).second) keys.push_back(k);
              }
          }
          // keys now hold the generation (= insertion) order; rank assignment:
          // Sorted inserts in increasing popularity, so rank 1 is the last key
          // generated; Random applies a seeded permutation.
          std::vector<Key> rank_order(keys.rbegin(), keys.rend());
          if (config.key_order == KeyOrder::Random) {
              for (std::uint64_t i = rank_order.size() - 1; i > 0; --i) {
                  std::uint64_t j = rng_.next_below(i + 1);
                  std::swap(rank_order[i], rank_order[j]);
              }
          }
          preload_.reserve(n);
          for (Key k : keys) preload_.emplace_back(k, k);
          return rank_order;
      }()) {}

bool WorkloadStream::next(Operation& out) {
    if (emitted_ >= config_.operation_count) return false;
    if (config_.dist_shift_freq > 0 && emitted_ > 0 && emitted_ % config_.dist_shift_freq == 0)
        model_.apply_churn(rng_, config_.dist_shift_prct);

    const double kind_draw = rng_.next_double();
    if (kind_draw < config_.fetch_proportion) {
        out = {Operation::Kind::Fetch, model_.sample_key(rng_), 0};
    } else if (kind_draw < config_.fetch_proportion + config_.insert_proportion) {
        Key k = model_.fresh_key(rng_);
        model_.insert_key_at_random_rank(k, rng_);
        out = {Operation::Kind::Insert, k, k};
    } else if (model_.population() > 0) {
        out = {Operation::Kind::Delete, model_.erase_uniform_key(rng_), 0};
    } else {
        // nothing left to delete: degrade to a probe of an absent key
        out = {Operation::Kind::Fetch, model_.fresh_key(rng_), 0};
    }
    ++emitted_;
    return true;
}

namespace {

void put_bytes(std::ofstream& os, const void* p, std::size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}
void put_u8(std::ofstream& os, std::uint8_t v) { put_bytes(os, &v, 1); }
void put_u32(std::ofstream& os, std::uint32_t v) {
    std::uint8_t b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    put_bytes(os, b, 4);
}
void put_u64(std::ofstream& os, std::uint64_t v) {
    std::uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    put_bytes(os, b, 8);
}
void put_f64(std::ofstream& os, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(os, bits);
}

struct Reader {
    std::ifstream is;
    explicit Reader(const std::filesystem::path& p) : is(p, std::ios::binary) {
        if (!is) throw CorruptWorkload("cannot open workload file");
    }
    void bytes(void* p, std::size_t n) {
        is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(is.gcount()) != n)
            throw CorruptWorkload("unexpected end of workload file");
    }
    std::uint8_t u8() {
        std::uint8_t v;
        bytes(&v, 1);
        return v;
    }
    std::uint32_t u32() {
        std::uint8_t b[4];
        bytes(b, 4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        std::uint8_t b[8];
        bytes(b, 8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        return v;
    }
    double f64() {
        std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    bool at_eof() {
        is.peek();
        return is.eof();
    }
};

constexpr char kMagic[4] = {'W', 'S', 'C', '1'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void write_workload(const WorkloadConfig& config, const std::filesystem::path& path) {
    config.validate();
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw CorruptWorkload("cannot open output file");

    put_bytes(os, kMagic, 4);
    put_u32(os, kVersion);
    put_f64(os, config.zipf);
    put_u64(os, config.initial_size);
    put_u64(os, config.operation_count);
    put_f64(os, config.fetch_proportion);
    put_f64(os, config.insert_proportion);
    put_f64(os, config.delete_proportion);
    put_u64(os, config.dist_shift_freq);
    put_f64(os, config.dist_shift_prct);
    put_u8(os, static_cast<std::uint8_t>(config.key_pattern));
    put_u8(os, static_cast<std::uint8_t>(config.key_order));
    put_u64(os, config.random_seed);

    WorkloadStream stream(config);
    put_u64(os, stream.preload().size());
    for (auto [k, v] : stream.preload()) {
        put_u64(os, k);
        put_u64(os, v);
    }
    Operation op;
    while (stream.next(op)) {
        put_u8(os, static_cast<std::uint8_t>(op.kind));
        put_u64(os, op.key);
        if (op.kind == Operation::Kind::Insert) put_u64(os, op.value);
    }
    if (!os) throw CorruptWorkload("write failure");
}

ReplayableWorkload read_workload(const std::filesystem::path& path) {
    Reader r(path);
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) throw BadMagic{};
    if (r.u32() != kVersion) throw CorruptWorkload("unsupported workload version");

    ReplayableWorkload out;
    WorkloadConfig& c = out.config;
    c.zipf = r.f64();
    c.initial_size = r.u64();
    c.operation_count = r.u64();
    c.fetch_proportion = r.f64();
    c.insert_proportion = r.f64();
    c.delete_proportion = r.f64();
    c.dist_shift_freq = r.u64();
    c.dist_shift_prct = r.f64();
    c.key_pattern = static_cast<KeyPattern>(r.u8());
    c.key_order = static_cast<KeyOrder>(r.u8());
    c.random_seed = r.u64();

    std::uint64_t preload_count = r.u64();
    out.preload.reserve(preload_count);
    for (std::uint64_t i = 0; i < preload_count; ++i) {
        Key k = r.u64();
        Value v = r.u64();
        out.preload.emplace_back(k, v);
    }
    out.operations.reserve(c.operation_count);
    for (std::uint64_t i = 0; i < c.operation_count; ++i) {
        auto kind = static_cast<Operation::Kind>(r.u8());
        if (kind != Operation::Kind::Fetch && kind != Operation::Kind::Insert &&
            kind != Operation::Kind::Delete)
            throw CorruptWorkload("invalid opcode");
        Key k = r.u64();
        Value v = kind == Operation::Kind::Insert ? r.u64() : 0;
        out.operations.push_back({kind, k, v});
    }
    if (!r.at_eof()) throw CorruptWorkload("trailing bytes after operations");
    return out;
}

std::vector<Operation> generate_operations(const WorkloadConfig& config) {
    WorkloadStream stream(config);
    std::vector<Operation> ops;
    ops.reserve(config.operation_count);
    Operation op;
    while (stream.next(op)) ops.push_back(op);
    return ops;
}

}  // namespace viphash
