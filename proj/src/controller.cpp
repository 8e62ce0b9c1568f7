#include "viphash/controller.hpp"

namespace viphash {

const char* mode_name(Mode mode) {
    switch (mode) {
        case Mode::LearnAdapt: return "learn";
        case Mode::Sense: return "sense";
        case Mode::Default: return "default";
    }
    return "?";
}

VipEngine::VipEngine(CoreTable table, const ControllerParams& params, CacheReclaimHook reclaim)
    : table_(std::move(table)),
      params_(params),
      reclaim_(std::move(reclaim)),
      n_learn_(learn_budget(table_.bucket_count())),
      n_default_(params.default_to_learn_ratio * n_learn_),
      remaining_(n_learn_),
      acc_(params.confidence),
      counters_(RequestCounters(table_)),
      rehash_seen_(table_.rehash_count()) {}

EngineOpResult VipEngine::step(const Operation& op) {
    EngineOpResult r;
    r.mode = mode_;
    switch (op.kind) {
        case Operation::Kind::Fetch: {
            r.is_fetch = true;
            FetchResult f;
            if (mode_ == Mode::LearnAdapt) {
                f = fetch_adaptive(table_, *counters_, op.key);
            } else {
                f = table_.fetch(op.key);
                if (mode_ == Mode::Sense && f.found) acc_.record(f.displacement);
            }
            r.found = f.found;
            r.value = f.value;
            r.displacement = f.displacement;
            break;
        }
        case Operation::Kind::Insert:
            if (mode_ == Mode::LearnAdapt)
                r.found = insert_during_learn(table_, *counters_, op.key, op.value);
            else
                r.found = table_.insert(op.key, op.value);
            break;
        case Operation::Kind::Delete:
            if (mode_ == Mode::LearnAdapt)
                r.found = erase_during_learn(table_, *counters_, op.key);
            else
                r.found = table_.erase(op.key);
            break;
    }

    ++mode_ops_[static_cast<int>(mode_)];
    ++op_index_;
    if (table_.rehash_count() != rehash_seen_) on_rehash();
    if (--remaining_ == 0) advance_mode();
    return r;
}

void VipEngine::on_rehash() {
    rehash_seen_ = table_.rehash_count();
    n_learn_ = learn_budget(table_.bucket_count());
    n_default_ = params_.default_to_learn_ratio * n_learn_;
    // the running countdown is deliberately left alone
}

void VipEngine::emit(Mode to, const SenseStats* gamma_baseline, const SenseStats* gamma_current) {
    TriggerEvent e;
    e.op_index = op_index_;
    e.from = mode_;
    e.to = to;
    if (gamma_baseline && gamma_current) {
        e.has_gammas = true;
        e.baseline = *gamma_baseline;
        e.current = *gamma_current;
    }
    events_.push_back(e);
}

void VipEngine::enter_sense(bool establishes_baseline) {
    emit(Mode::Sense, nullptr, nullptr);
    mode_ = Mode::Sense;
    sense_establishes_baseline_ = establishes_baseline;
    sense_extensions_ = 0;
    acc_.reset();
    remaining_ = params_.sense_span;
}

void VipEngine::enter_default() {
    mode_ = Mode::Default;
    remaining_ = n_default_;
}

void VipEngine::enter_learn() {
    mode_ = Mode::LearnAdapt;
    counters_.emplace(table_);
    remaining_ = n_learn_;
}

void VipEngine::advance_mode() {
    switch (mode_) {
        case Mode::LearnAdapt: {
            end_learn(std::move(*counters_), reclaim_);
            counters_.reset();
            // the first window after learning characterizes the adapted layout
            enter_sense(/*establishes_baseline=*/true);
            break;
        }
        case Mode::Sense: {
            if (!acc_.can_finalize()) {
                if (sense_extensions_ < params_.max_sense_extensions) {
                    ++sense_extensions_;
                    remaining_ = params_.sense_span;
                    return;  // window extension, not a transition
                }
                emit(Mode::Default, nullptr, nullptr);  // abandoned window
                enter_default();
                return;
            }
            const SenseStats stats = acc_.finalize();
            if (sense_establishes_baseline_ || !baseline_) {
                baseline_ = stats;
                emit(Mode::Default, nullptr, nullptr);
                enter_default();
                return;
            }
            if (has_distribution_changed(*baseline_, stats)) {
                emit(Mode::LearnAdapt, &*baseline_, &stats);
                enter_learn();
            } else {
                emit(Mode::Default, &*baseline_, &stats);
                enter_default();  // baseline retained
            }
            break;
        }
        case Mode::Default:
            enter_sense(/*establishes_baseline=*/false);
            break;
    }
}

}  // namespace viphash
