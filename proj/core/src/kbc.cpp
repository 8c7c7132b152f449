// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#include "cbrikb/kbc.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cbrikb/binary.hpp"
#include "cbrikb/error.hpp"
#include "cbrikb/rng.hpp"
#include "cbrikb/text.hpp"

namespace cbr {

namespace {

constexpr std::string_view kMagic = "CBRK";
constexpr std::uint32_t kVersion = 1;

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) { return x > 30 ? x : std::log1p(std::exp(x)); }

struct Indexed {
  std::uint32_t s, r, o;
  friend auto operator<=>(const Indexed&, const Indexed&) = default;
};

std::vector<ScoredEntity> top_m(const ComplExModel& model, std::vector<std::pair<double, std::uint32_t>> scored,
                                int m, double threshold) {
  std::vector<ScoredEntity> out;
  for (auto& [p, idx] : scored) {
    if (p > threshold) out.emplace_back(model.entity_names()[idx], p);
  }
  std::sort(out.begin(), out.end(), [](const ScoredEntity& a, const ScoredEntity& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (m >= 0 && out.size() > static_cast<std::size_t>(m)) out.resize(static_cast<std::size_t>(m));
  return out;
}

}  // namespace

ComplExModel::ComplExModel(int dim, std::vector<std::string> entities,
                           std::vector<std::string> relations)
    : dim_(dim), entity_names_(std::move(entities)), relation_names_(std::move(relations)) {
  require(dim >= 1, "ComplExModel: dim must be positive");
  for (std::uint32_t i = 0; i < entity_names_.size(); ++i) {
    require(entity_index_.emplace(entity_names_[i], i).second, "duplicate entity " + entity_names_[i]);
  }
  for (std::uint32_t i = 0; i < relation_names_.size(); ++i) {
    require(relation_index_.emplace(relation_names_[i], i).second,
            "duplicate relation " + relation_names_[i]);
  }
  const std::size_t d = static_cast<std::size_t>(dim);
  entity_re.assign(entity_names_.size() * d, 0.0);
  entity_im.assign(entity_names_.size() * d, 0.0);
  relation_re.assign(relation_names_.size() * d, 0.0);
  relation_im.assign(relation_names_.size() * d, 0.0);
}

std::optional<std::uint32_t> ComplExModel::entity_index(std::string_view name) const {
  auto it = entity_index_.find(std::string(name));
  if (it == entity_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::uint32_t> ComplExModel::relation_index(std::string_view name) const {
  auto it = relation_index_.find(std::string(name));
  if (it == relation_index_.end()) return std::nullopt;
  return it->second;
}

double ComplExModel::score(std::uint32_t s, std::uint32_t r, std::uint32_t o) const {
  const std::size_t d = static_cast<std::size_t>(dim_);
  const double* sr = &entity_re[s * d];
  const double* si = &entity_im[s * d];
  const double* wr = &relation_re[r * d];
  const double* wi = &relation_im[r * d];
  const double* orr = &entity_re[o * d];
  const double* oi = &entity_im[o * d];
  double total = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    total += sr[k] * wr[k] * orr[k] + si[k] * wr[k] * oi[k] + sr[k] * wi[k] * oi[k] -
             si[k] * wi[k] * orr[k];
  }
  return total;
}

double ComplExModel::probability(double raw_score) const { return sigmoid(scale * raw_score + bias); }

bool ComplExModel::all_finite() const {
  for (const auto* block : {&entity_re, &entity_im, &relation_re, &relation_im}) {
    for (double v : *block) {
      if (!std::isfinite(v)) return false;
    }
  }
  return std::isfinite(scale) && std::isfinite(bias);
}

namespace {

std::uint32_t need_entity(const ComplExModel& m, std::string_view name) {
  auto i = m.entity_index(name);
  if (!i) throw_error(ErrorKind::kNotFound, "KBC model has no entity '" + std::string(name) + "'");
  return *i;
}

std::uint32_t need_relation(const ComplExModel& m, std::string_view name) {
  auto i = m.relation_index(name);
  if (!i) throw_error(ErrorKind::kNotFound, "KBC model has no relation '" + std::string(name) + "'");
  return *i;
}

}  // namespace

double complex_score(const ComplExModel& model, std::string_view s, std::string_view r,
                     std::string_view o) {
  return model.score(need_entity(model, s), need_relation(model, r), need_entity(model, o));
}

double kbc_prob(const ComplExModel& model, std::string_view s, std::string_view r, std::string_view o) {
  return model.probability(complex_score(model, s, r, o));
}

double example_loss(const ComplExModel& model, std::uint32_t s, std::uint32_t r, std::uint32_t o,
                    bool positive, double l2_weight) {
  const double x = model.score(s, r, o);
  double loss = positive ? softplus(-x) : softplus(x);
  const std::size_t d = static_cast<std::size_t>(model.dim());
  double sq = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    sq += model.entity_re[s * d + k] * model.entity_re[s * d + k] +
          model.entity_im[s * d + k] * model.entity_im[s * d + k] +
          model.relation_re[r * d + k] * model.relation_re[r * d + k] +
          model.relation_im[r * d + k] * model.relation_im[r * d + k] +
          model.entity_re[o * d + k] * model.entity_re[o * d + k] +
          model.entity_im[o * d + k] * model.entity_im[o * d + k];
  }
  return loss + 0.5 * l2_weight * sq;
}

double example_loss_and_gradient(const ComplExModel& model, std::uint32_t s, std::uint32_t r,
                                 std::uint32_t o, bool positive, double l2_weight,
                                 ExampleGradient& g) {
  const std::size_t d = static_cast<std::size_t>(model.dim());
  const double x = model.score(s, r, o);
  const double dx = sigmoid(x) - (positive ? 1.0 : 0.0);
  for (auto* v : {&g.s_re, &g.s_im, &g.r_re, &g.r_im, &g.o_re, &g.o_im}) v->assign(d, 0.0);
  const double* sr = &model.entity_re[s * d];
  const double* si = &model.entity_im[s * d];
  const double* wr = &model.relation_re[r * d];
  const double* wi = &model.relation_im[r * d];
  const double* orr = &model.entity_re[o * d];
  const double* oi = &model.entity_im[o * d];
  for (std::size_t k = 0; k < d; ++k) {
    g.s_re[k] = dx * (wr[k] * orr[k] + wi[k] * oi[k]) + l2_weight * sr[k];
    g.s_im[k] = dx * (wr[k] * oi[k] - wi[k] * orr[k]) + l2_weight * si[k];
    g.r_re[k] = dx * (sr[k] * orr[k] + si[k] * oi[k]) + l2_weight * wr[k];
    g.r_im[k] = dx * (sr[k] * oi[k] - si[k] * orr[k]) + l2_weight * wi[k];
    g.o_re[k] = dx * (sr[k] * wr[k] - si[k] * wi[k]) + l2_weight * orr[k];
    g.o_im[k] = dx * (si[k] * wr[k] + sr[k] * wi[k]) + l2_weight * oi[k];
  }
  return example_loss(model, s, r, o, positive, l2_weight);
}

std::pair<double, double> fit_platt(std::span<const double> scores, std::span<const int> labels) {
  require(scores.size() == labels.size() && !scores.empty(), "fit_platt: bad input");
  double n_pos = 0, n_neg = 0;
  for (int y : labels) (y ? n_pos : n_neg) += 1;
  // Platt's smoothed targets keep the optimum finite on separable data.
  const double t_pos = (n_pos + 1.0) / (n_pos + 2.0);
  const double t_neg = 1.0 / (n_neg + 2.0);
  auto target = [&](std::size_t i) { return labels[i] ? t_pos : t_neg; };
  auto objective = [&](double a, double b) {
    double f = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const double z = a * scores[i] + b;
      f += target(i) * softplus(-z) + (1.0 - target(i)) * softplus(z);
    }
    return f;
  };
  // Damped Newton with backtracking (Lin, Lin and Weng's variant of Platt scaling).
  double a = 0.0, b = std::log((n_pos + 1.0) / (n_neg + 1.0));
  double value = objective(a, b);
  for (int iter = 0; iter < 100; ++iter) {
    double ga = 0, gb = 0, haa = 1e-12, hab = 0, hbb = 1e-12;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const double p = sigmoid(a * scores[i] + b);
      const double w = p * (1 - p);
      ga += (p - target(i)) * scores[i];
      gb += (p - target(i));
      haa += w * scores[i] * scores[i];
      hab += w * scores[i];
      hbb += w;
    }
    if (std::abs(ga) < 1e-9 && std::abs(gb) < 1e-9) break;
    const double det = haa * hbb - hab * hab;
    if (!(det > 0.0)) break;
    const double da = -(hbb * ga - hab * gb) / det;
    const double db = -(haa * gb - hab * ga) / det;
    const double slope = ga * da + gb * db;
    double step = 1.0;
    for (; step >= 1e-10; step /= 2) {
      const double next = objective(a + step * da, b + step * db);
      if (next < value + 1e-4 * step * slope) {
        a += step * da;
        b += step * db;
        value = next;
        break;
      }
    }
    if (step < 1e-10) break;
  }
  if (!std::isfinite(a) || !std::isfinite(b) || a <= 0.0) return {1.0, 0.0};
  return {a, b};
}

ComplExModel train_complex(const KnowledgeGraph& kg, const KbcTrainConfig& config,
                           KbcTrainReport* report) {
  require(config.dim >= 1 && config.epochs >= 1 && config.learning_rate > 0 &&
              config.negatives_per_positive >= 1 && config.l2_weight >= 0 && config.init_scale > 0,
          "train_complex: invalid configuration");
  std::set<std::string> entity_set;
  std::vector<const Triple*> symbolic;
  for (const auto& t : kg.triples()) {
    if (t.relation.kind != RelationKind::kSymbolic) continue;
    symbolic.push_back(&t);
    entity_set.insert(kg.entity_name(t.subject));
    entity_set.insert(kg.entity_name(t.object));
  }
  if (symbolic.empty()) throw_error(ErrorKind::kTraining, "no symbolic triples to train on");

  ComplExModel model(config.dim, std::vector<std::string>(entity_set.begin(), entity_set.end()),
                     kg.relation_names());
  std::vector<Indexed> positives;
  positives.reserve(symbolic.size());
  for (const Triple* t : symbolic) {
    positives.push_back(Indexed{*model.entity_index(kg.entity_name(t->subject)),
                                *model.relation_index(kg.relation_name(t->relation.id)),
                                *model.entity_index(kg.entity_name(t->object))});
  }
  std::sort(positives.begin(), positives.end());
  const std::set<Indexed> known(positives.begin(), positives.end());

  SplitMix64 rng(config.seed);
  for (auto* block : {&model.entity_re, &model.entity_im, &model.relation_re, &model.relation_im}) {
    for (double& v : *block) v = rng.uniform(-config.init_scale, config.init_scale);
  }

  std::vector<Indexed> calibration;
  {
    std::vector<Indexed> shuffled = positives;
    rng.shuffle(shuffled);
    const auto n_cal = static_cast<std::size_t>(config.calibration_fraction * shuffled.size());
    if (shuffled.size() >= 20 && n_cal >= 1) {
      calibration.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_cal));
      positives.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(n_cal), shuffled.end());
      std::sort(positives.begin(), positives.end());
    } else {
      calibration = positives;
    }
  }

  const std::size_t d = static_cast<std::size_t>(config.dim);
  const auto n_entities = static_cast<std::uint64_t>(model.entity_count());
  std::vector<double> acc_ere(model.entity_re.size(), 0.0), acc_eim(model.entity_im.size(), 0.0);
  std::vector<double> acc_rre(model.relation_re.size(), 0.0), acc_rim(model.relation_im.size(), 0.0);
  constexpr double kEps = 1e-10;
  ExampleGradient g;
  auto apply = [&](std::vector<double>& param, std::vector<double>& acc, std::size_t row,
                   const std::vector<double>& grad) {
    for (std::size_t k = 0; k < d; ++k) {
      const double gk = grad[k];
      acc[row * d + k] += gk * gk;
      param[row * d + k] -= config.learning_rate * gk / (std::sqrt(acc[row * d + k]) + kEps);
    }
  };
  auto step = [&](const Indexed& t, bool positive) {
    const double loss = example_loss_and_gradient(model, t.s, t.r, t.o, positive, config.l2_weight, g);
    apply(model.entity_re, acc_ere, t.s, g.s_re);
    apply(model.entity_im, acc_eim, t.s, g.s_im);
    apply(model.relation_re, acc_rre, t.r, g.r_re);
    apply(model.relation_im, acc_rim, t.r, g.r_im);
    apply(model.entity_re, acc_ere, t.o, g.o_re);
    apply(model.entity_im, acc_eim, t.o, g.o_im);
    return loss;
  };

  if (report) {
    report->training_triples = positives.size();
    report->calibration_triples = calibration.size();
    report->epoch_loss.clear();
  }
  std::vector<std::size_t> order(positives.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double total = 0.0;
    std::size_t examples = 0;
    for (std::size_t i : order) {
      const Indexed& pos = positives[i];
      total += step(pos, true);
      ++examples;
      for (int n = 0; n < config.negatives_per_positive; ++n) {
        Indexed neg = pos;
        const bool corrupt_subject = (rng.next_u64() >> 63) != 0;
        const auto e = static_cast<std::uint32_t>(rng.below(n_entities));
        (corrupt_subject ? neg.s : neg.o) = e;
        total += step(neg, false);
        ++examples;
      }
    }
    if (!model.all_finite()) {
      throw_error(ErrorKind::kTraining, "non-finite parameters after epoch " + std::to_string(epoch + 1));
    }
    if (report) report->epoch_loss.push_back(total / static_cast<double>(examples));
  }

  std::vector<double> scores;
  std::vector<int> labels;
  for (const auto& t : calibration) {
    scores.push_back(model.score(t.s, t.r, t.o));
    labels.push_back(1);
    int made = 0;
    for (int attempt = 0; attempt < 64 && made < 4; ++attempt) {
      Indexed neg = t;
      const bool corrupt_subject = (rng.next_u64() >> 63) != 0;
      (corrupt_subject ? neg.s : neg.o) = static_cast<std::uint32_t>(rng.below(n_entities));
      if (known.contains(neg)) continue;
      scores.push_back(model.score(neg.s, neg.r, neg.o));
      labels.push_back(0);
      ++made;
    }
  }
  std::tie(model.scale, model.bias) = fit_platt(scores, labels);
  return model;
}

std::vector<ScoredEntity> predict_objects(const ComplExModel& model, std::string_view s,
                                          std::string_view r, int m, double threshold) {
  const std::uint32_t si = need_entity(model, s);
  const std::uint32_t ri = need_relation(model, r);
  std::vector<std::pair<double, std::uint32_t>> scored;
  scored.reserve(model.entity_count());
  for (std::uint32_t o = 0; o < model.entity_count(); ++o) scored.emplace_back(model.prob(si, ri, o), o);
  return top_m(model, std::move(scored), m, threshold);
}

std::vector<ScoredEntity> predict_subjects(const ComplExModel& model, std::string_view o,
                                           std::string_view r, int m, double threshold) {
  const std::uint32_t oi = need_entity(model, o);
  const std::uint32_t ri = need_relation(model, r);
  std::vector<std::pair<double, std::uint32_t>> scored;
  scored.reserve(model.entity_count());
  for (std::uint32_t s = 0; s < model.entity_count(); ++s) scored.emplace_back(model.prob(s, ri, oi), s);
  return top_m(model, std::move(scored), m, threshold);
}

KbcMetrics evaluate_kbc(const ComplExModel& model, std::span<const NamedTriple> held_out,
                        const KnowledgeGraph& kg) {
  require(!held_out.empty(), "evaluate_kbc: empty held-out set");
  std::set<Indexed> known;
  for (const auto& t : kg.triples()) {
    if (t.relation.kind != RelationKind::kSymbolic) continue;
    auto s = model.entity_index(kg.entity_name(t.subject));
    auto r = model.relation_index(kg.relation_name(t.relation.id));
    auto o = model.entity_index(kg.entity_name(t.object));
    if (s && r && o) known.insert(Indexed{*s, *r, *o});
  }
  std::vector<Indexed> test;
  for (const auto& t : held_out) {
    test.push_back(Indexed{need_entity(model, t.subject), need_relation(model, t.relation),
                           need_entity(model, t.object)});
    known.insert(test.back());
  }
  KbcMetrics m;
  auto record = [&](std::size_t rank) {
    m.mrr += 1.0 / static_cast<double>(rank);
    if (rank <= 1) m.hits_at_1 += 1;
    if (rank <= 3) m.hits_at_3 += 1;
    if (rank <= 10) m.hits_at_10 += 1;
    ++m.queries;
  };
  const auto n = static_cast<std::uint32_t>(model.entity_count());
  for (const auto& t : test) {
    const double truth = model.score(t.s, t.r, t.o);
    std::size_t better_o = 0, better_s = 0;
    for (std::uint32_t e = 0; e < n; ++e) {
      if (e != t.o && !known.contains(Indexed{t.s, t.r, e}) && model.score(t.s, t.r, e) > truth) ++better_o;
      if (e != t.s && !known.contains(Indexed{e, t.r, t.o}) && model.score(e, t.r, t.o) > truth) ++better_s;
    }
    record(better_o + 1);
    record(better_s + 1);
  }
  const double q = static_cast<double>(m.queries);
  m.mrr /= q;
  m.hits_at_1 /= q;
  m.hits_at_3 /= q;
  m.hits_at_10 /= q;
  return m;
}

std::string encode_model(const ComplExModel& model) {
  ByteWriter w;
  w.bytes(kMagic);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(model.dim()));
  w.u32(static_cast<std::uint32_t>(model.entity_count()));
  w.u32(static_cast<std::uint32_t>(model.relation_count()));
  w.u64(std::bit_cast<std::uint64_t>(model.scale));
  w.u64(std::bit_cast<std::uint64_t>(model.bias));
  for (const auto& names : {&model.entity_names(), &model.relation_names()}) {
    for (const auto& n : *names) {
      w.u32(static_cast<std::uint32_t>(n.size()));
      w.bytes(n);
    }
  }
  for (const auto* block : {&model.entity_re, &model.entity_im, &model.relation_re, &model.relation_im}) {
    for (double v : *block) w.f32(static_cast<float>(v));
  }
  return w.take();
}

ComplExModel decode_model(std::string_view bytes) {
  ByteReader r(bytes, "CBRK");
  if (bytes.size() < 4 || r.bytes(4) != kMagic) throw_error(ErrorKind::kFormat, "CBRK: bad magic");
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw_error(ErrorKind::kFormat, "CBRK: unsupported version " + std::to_string(version));
  }
  const std::uint32_t dim = r.u32();
  const std::uint32_t n_ent = r.u32();
  const std::uint32_t n_rel = r.u32();
  const double scale = std::bit_cast<double>(r.u64());
  const double bias = std::bit_cast<double>(r.u64());
  auto read_names = [&](std::uint32_t n) {
    std::vector<std::string> names;
    for (std::uint32_t i = 0; i < n; ++i) names.emplace_back(r.bytes(r.u32()));
    return names;
  };
  auto entities = read_names(n_ent);
  auto relations = read_names(n_rel);
  if (dim == 0) throw_error(ErrorKind::kFormat, "CBRK: zero dimension");
  ComplExModel model(static_cast<int>(dim), std::move(entities), std::move(relations));
  model.scale = scale;
  model.bias = bias;
  for (auto* block : {&model.entity_re, &model.entity_im, &model.relation_re, &model.relation_im}) {
    for (double& v : *block) v = r.f32();
  }
  if (r.remaining() != 0) throw_error(ErrorKind::kFormat, "CBRK: trailing bytes");
  if (!model.all_finite()) throw_error(ErrorKind::kFormat, "CBRK: non-finite parameters");
  return model;
}

void store_model(const std::filesystem::path& path, const ComplExModel& model) {
  write_file(path, encode_model(model));
}

ComplExModel load_model(const std::filesystem::path& path) { return decode_model(read_file(path)); }

}  // namespace cbr
