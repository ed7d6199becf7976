#include "synthloop/corpus.hpp"

#include <algorithm>
#include <cmath>

#include "synthloop/error.hpp"
#include "synthloop/random.hpp"

namespace synthloop {

void CorpusSpec::validate() const {
    const std::size_t d = schema.size();
    if (benign_mean.size() != d || attack_mean.size() != d || stddev.size() != d) {
        throw ValidationError("corpus spec: mean and stddev vectors must match the schema width");
    }
    if (!schema.has_attack(attack_name)) throw ValidationError("corpus spec: unknown attack \"" + attack_name + "\"");
    if (n_per_class < 1) throw ValidationError("corpus spec: n_per_class must be >= 1");
    if (!(class_overlap >= 0.0)) throw ValidationError("corpus spec: class_overlap must be >= 0");
    const auto attack = effective_attack_mean();
    for (std::size_t i = 0; i < d; ++i) {
        const auto& f = schema[i];
        if (!(stddev[i] >= 0.0)) throw ValidationError("corpus spec: stddev of \"" + f.name + "\" must be >= 0");
        for (double m : {benign_mean[i], attack[i]}) {
            if (m < f.min || m > f.max) {
                throw ValidationError("corpus spec: class mean of \"" + f.name + "\" lies outside the schema range");
            }
        }
    }
}

std::vector<double> CorpusSpec::effective_attack_mean() const {
    std::vector<double> m(benign_mean.size());
    for (std::size_t i = 0; i < m.size() && i < attack_mean.size(); ++i) {
        m[i] = benign_mean[i] + class_overlap * (attack_mean[i] - benign_mean[i]);
    }
    return m;
}

namespace {

double draw_feature(Rng& rng, const FeatureSpec& f, double mean, double sd) {
    double v = mean;
    bool inside = false;
    for (int attempt = 0; attempt < kTruncationAttempts && !inside; ++attempt) {
        v = rng.normal(mean, sd);
        inside = v >= f.min && v <= f.max;
    }
    v = std::clamp(v, f.min, f.max);
    switch (f.kind) {
        case FeatureKind::count: v = std::clamp(std::round(v), std::ceil(f.min), std::floor(f.max)); break;
        case FeatureKind::flag: v = v >= 0.5 ? 1.0 : 0.0; break;
        case FeatureKind::continuous: break;
    }
    return v;
}

}  // namespace

Dataset generate_corpus(const CorpusSpec& spec) {
    spec.validate();
    const auto attack_mean = spec.effective_attack_mean();
    Rng rng(spec.seed);
    std::vector<TrafficRecord> records;
    records.reserve(2 * static_cast<std::size_t>(spec.n_per_class));
    for (int i = 0; i < spec.n_per_class; ++i) {
        for (bool attack : {false, true}) {
            const auto& mean = attack ? attack_mean : spec.benign_mean;
            TrafficRecord r;
            r.values.reserve(spec.schema.size());
            for (std::size_t f = 0; f < spec.schema.size(); ++f) {
                r.values.push_back(draw_feature(rng, spec.schema[f], mean[f], spec.stddev[f]));
            }
            r.label = attack ? Label::attack(spec.attack_name) : Label::benign();
            records.push_back(std::move(r));
        }
    }
    return Dataset(spec.schema, std::move(records));
}

CorpusSpec desk_corpus_spec(const std::string& attack_name, double class_overlap, int n_per_class, std::uint64_t seed) {
    // packet_count, byte_count, mean_inter_arrival_ms, syn, ack, fin ratios
    CorpusSpec spec{desk_schema(), attack_name, {}, {}, {}, class_overlap, n_per_class, seed};
    spec.benign_mean = {900, 700000, 60, 0.12, 0.55, 0.10};
    spec.stddev = {500, 350000, 35, 0.08, 0.20, 0.08};
    if (attack_name == "tcp_ack_flood") {
        spec.attack_mean = {1500, 560000, 35, 0.06, 0.85, 0.06};
    } else if (attack_name == "tcp_fin_flood") {
        spec.attack_mean = {1350, 420000, 40, 0.05, 0.45, 0.40};
    } else {
        throw ValidationError("desk corpus has no class model for attack \"" + attack_name + "\"");
    }
    return spec;
}

DeskCorpus make_desk_corpus(const DeskCorpusOptions& options) {
    const auto train_spec = desk_corpus_spec(options.attack_name, options.class_overlap, options.n_train_per_class,
                                             derive_seed(options.seed, {1}));
    const auto test_spec = desk_corpus_spec(options.attack_name, options.class_overlap, options.n_test_per_class,
                                            derive_seed(options.seed, {2}));
    return {generate_corpus(train_spec), generate_corpus(test_spec)};
}

}  // namespace synthloop
