// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#include "cbrikb/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <memory>
#include <sstream>

#include "cbrikb/casebase.hpp"
#include "cbrikb/error.hpp"
#include "cbrikb/qa.hpp"
#include "cbrikb/realign.hpp"
#include "cbrikb/synthetic.hpp"
#include "cbrikb/text.hpp"

namespace cbr {

namespace {

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw_error(ErrorKind::kConfig, "'" + std::string(key) + "' expects a boolean, got '" + std::string(v) + "'");
}

template <typename T>
T parse_number(std::string_view key, std::string_view v) {
  try {
    std::size_t used = 0;
    T out;
    if constexpr (std::is_floating_point_v<T>) out = static_cast<T>(std::stod(std::string(v), &used));
    else out = static_cast<T>(std::stoll(std::string(v), &used));
    if (used != v.size()) throw std::invalid_argument("trailing");
    return out;
  } catch (const std::exception&) {
    throw_error(ErrorKind::kConfig, "'" + std::string(key) + "' expects a number, got '" + std::string(v) + "'");
  }
}

std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string_view mask_name(MaskMode m) {
  switch (m) {
    case MaskMode::kPerToken: return "per-token";
    case MaskMode::kCollapse: return "collapse";
    case MaskMode::kOff: return "off";
  }
  return "per-token";
}

template <typename F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("stage ") + name + ": " + e.what());
  }
}

struct Variant {
  std::string name;
  bool use_text, use_kbc, use_kb, revise, mine_text;
};

std::vector<Variant> variants_for(const ExperimentConfig& c) {
  const Variant full{"full", c.beam.use_text, c.beam.use_kbc, c.beam.use_kb, c.revise, c.mining.include_text};
  if (!c.ablations) return {full};
  return {
      full,
      {"no-text", false, c.beam.use_kbc, true, c.revise, false},
      {"no-kbc", c.beam.use_text, false, true, c.revise, c.mining.include_text},
      {"no-revise", c.beam.use_text, c.beam.use_kbc, true, false, c.mining.include_text},
      {"text-only", true, false, false, c.revise, c.mining.include_text},
      {"kb-only", false, false, true, c.revise, false},
  };
}

}  // namespace

std::vector<std::string> ablation_variants() {
  return {"full", "no-text", "no-kbc", "no-revise", "text-only", "kb-only"};
}

ExperimentConfig parse_experiment_config(std::string_view text, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  c.base_dir = base_dir;
  auto path = [&](std::string_view v) {
    std::filesystem::path p{std::string(v)};
    if (p.empty()) return p;
    return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  };
  using Setter = std::function<void(std::string_view key, std::string_view value)>;
  const std::map<std::string, Setter, std::less<>> setters = {
      {"kg", [&](auto, auto v) { c.kg = path(v); }},
      {"documents", [&](auto, auto v) { c.documents = path(v); }},
      {"mentions", [&](auto, auto v) { c.mentions = path(v); }},
      {"proxies", [&](auto, auto v) { c.proxies = path(v); }},
      {"train", [&](auto, auto v) { c.train = path(v); }},
      {"dev", [&](auto, auto v) { c.dev = path(v); }},
      {"test", [&](auto, auto v) { c.test = path(v); }},
      {"kbc_model", [&](auto, auto v) { c.kbc_model = path(v); }},
      {"output_dir", [&](auto, auto v) { c.output_dir = path(v); }},
      {"embedder", [&](auto, auto v) { c.embedder = std::string(v); }},
      {"mask_mode", [&](auto, auto v) { c.mask_mode = parse_mask_mode(v); }},
      {"re_command", [&](auto, auto v) { c.re_command = std::string(v); }},
      {"k", [&](auto k, auto v) { c.k = parse_number<int>(k, v); }},
      {"beam", [&](auto k, auto v) { c.beam.beam_width = parse_number<int>(k, v); }},
      {"kbc_threshold", [&](auto k, auto v) { c.beam.kbc_threshold = parse_number<double>(k, v); }},
      {"kbc_topm", [&](auto k, auto v) { c.beam.kbc_topm = parse_number<int>(k, v); }},
      {"max_results", [&](auto k, auto v) { c.beam.max_results = parse_number<int>(k, v); }},
      {"subkb_hops", [&](auto k, auto v) { c.beam.subkb_hops = parse_number<int>(k, v); }},
      {"use_text", [&](auto k, auto v) { c.beam.use_text = parse_bool(k, v); }},
      {"use_kbc", [&](auto k, auto v) { c.beam.use_kbc = parse_bool(k, v); }},
      {"use_kb", [&](auto k, auto v) { c.beam.use_kb = parse_bool(k, v); }},
      {"revise", [&](auto k, auto v) { c.revise = parse_bool(k, v); }},
      {"revise_threshold", [&](auto k, auto v) { c.revise_config.discard_threshold = parse_number<double>(k, v); }},
      {"revise_threshold_on",
       [&](auto k, auto v) {
         if (v == "local") c.revise_config.threshold_on = ThresholdOn::kLocal;
         else if (v == "global") c.revise_config.threshold_on = ThresholdOn::kGlobal;
         else throw_error(ErrorKind::kConfig, "'" + std::string(k) + "' expects local or global");
       }},
      {"max_chains", [&](auto k, auto v) { c.revise_config.max_chains_per_case = parse_number<int>(k, v); }},
      {"revise_k", [&](auto k, auto v) { c.revise_config.neighbor_k = parse_number<int>(k, v); }},
      {"mine_with_text", [&](auto k, auto v) { c.mining.include_text = parse_bool(k, v); }},
      {"max_len", [&](auto k, auto v) { c.mining.max_len = parse_number<int>(k, v); }},
      {"kbc_dim", [&](auto k, auto v) { c.kbc.dim = parse_number<int>(k, v); }},
      {"kbc_epochs", [&](auto k, auto v) { c.kbc.epochs = parse_number<int>(k, v); }},
      {"kbc_lr", [&](auto k, auto v) { c.kbc.learning_rate = parse_number<double>(k, v); }},
      {"kbc_negatives", [&](auto k, auto v) { c.kbc.negatives_per_positive = parse_number<int>(k, v); }},
      {"kbc_l2", [&](auto k, auto v) { c.kbc.l2_weight = parse_number<double>(k, v); }},
      {"kbc_seed", [&](auto k, auto v) { c.kbc.seed = parse_number<std::uint64_t>(k, v); }},
      {"drop",
       [&](auto k, auto v) {
         if (v != "none" && v != "global" && v != "per_question" && v != "both") {
           throw_error(ErrorKind::kConfig, "'" + std::string(k) + "' expects none, global, per_question or both");
         }
         c.drop = std::string(v);
       }},
      {"drop_fraction", [&](auto k, auto v) { c.drop_fraction = parse_number<double>(k, v); }},
      {"drop_p", [&](auto k, auto v) { c.drop_p = parse_number<double>(k, v); }},
      {"drop_seed", [&](auto k, auto v) { c.drop_seed = parse_number<std::uint64_t>(k, v); }},
      {"synthetic_support", [&](auto k, auto v) { c.synthetic_support = parse_bool(k, v); }},
      {"ablations", [&](auto k, auto v) { c.ablations = parse_bool(k, v); }},
      {"workers", [&](auto k, auto v) { c.workers = parse_number<unsigned>(k, v); }},
      {"explain", [&](auto k, auto v) { c.explain = parse_bool(k, v); }},
  };
  std::size_t line_no = 0;
  for (std::string_view line : lines_of(text)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "config line " + std::to_string(line_no);
    if (eq == std::string_view::npos) throw_error(ErrorKind::kConfig, where + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    auto it = setters.find(key);
    if (it == setters.end()) throw_error(ErrorKind::kConfig, where + ": unknown key '" + std::string(key) + "'");
    try {
      it->second(key, value);
    } catch (const Error& e) {
      throw_error(ErrorKind::kConfig, where + ": " + e.what());
    }
  }
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  return parse_experiment_config(text, path.parent_path());
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream o;
  auto b = [](bool v) { return v ? "true" : "false"; };
  o << "kg = " << kg.string() << "\ndocuments = " << documents.string() << "\nmentions = " << mentions.string()
    << "\nproxies = " << proxies.string() << "\ntrain = " << train.string() << "\ndev = " << dev.string()
    << "\ntest = " << test.string() << "\nkbc_model = " << kbc_model.string() << "\nembedder = " << embedder
    << "\nmask_mode = " << mask_name(mask_mode) << "\nre_command = " << re_command << "\nk = " << k
    << "\nbeam = " << beam.beam_width << "\nkbc_threshold = " << real(beam.kbc_threshold)
    << "\nkbc_topm = " << beam.kbc_topm << "\nmax_results = " << beam.max_results
    << "\nsubkb_hops = " << beam.subkb_hops << "\nuse_text = " << b(beam.use_text)
    << "\nuse_kbc = " << b(beam.use_kbc) << "\nuse_kb = " << b(beam.use_kb) << "\nrevise = " << b(revise)
    << "\nrevise_threshold = " << real(revise_config.discard_threshold) << "\nrevise_threshold_on = "
    << (revise_config.threshold_on == ThresholdOn::kLocal ? "local" : "global")
    << "\nmax_chains = " << revise_config.max_chains_per_case << "\nrevise_k = " << revise_config.neighbor_k
    << "\nmine_with_text = " << b(mining.include_text) << "\nmax_len = " << mining.max_len
    << "\nkbc_dim = " << kbc.dim << "\nkbc_epochs = " << kbc.epochs << "\nkbc_lr = " << real(kbc.learning_rate)
    << "\nkbc_negatives = " << kbc.negatives_per_positive << "\nkbc_l2 = " << real(kbc.l2_weight)
    << "\nkbc_seed = " << kbc.seed << "\ndrop = " << drop << "\ndrop_fraction = " << real(drop_fraction)
    << "\ndrop_p = " << real(drop_p) << "\ndrop_seed = " << drop_seed
    << "\nsynthetic_support = " << b(synthetic_support) << "\nablations = " << b(ablations)
    << "\nexplain = " << b(explain) << '\n';
  return o.str();
}

std::string fingerprint(const ExperimentConfig& config) {
  std::uint64_t h = fnv1a64(config.canonical());
  for (const auto* p : {&config.kg, &config.documents, &config.mentions, &config.proxies, &config.train,
                        &config.dev, &config.test, &config.kbc_model}) {
    if (p->empty()) continue;
    std::error_code ec;
    if (!std::filesystem::exists(*p, ec)) continue;
    h = fnv1a64(read_file(*p), h);
  }
  if (config.embedder.starts_with("file:")) {
    std::filesystem::path p = config.embedder.substr(5);
    if (p.is_relative() && !config.base_dir.empty()) p = config.base_dir / p;
    std::error_code ec;
    if (std::filesystem::exists(p, ec)) h = fnv1a64(read_file(p), h);
  }
  return hex64(h);
}

std::string ExperimentResult::summary() const {
  std::ostringstream o;
  o << "fingerprint\t" << fingerprint << '\n';
  char buf[96];
  for (const auto& v : variants) {
    std::snprintf(buf, sizeof buf, "%.6f", v.report.hits_at_1);
    o << v.name << '\t' << buf << '\t' << v.report.records.size() << '\t' << v.cases << '\t' << v.chains;
    std::snprintf(buf, sizeof buf, "%.3f", v.seconds);
    o << '\t' << buf << '\n';
  }
  return o.str();
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  using Clock = std::chrono::steady_clock;
  if (config.kg.empty() || config.train.empty() || config.test.empty()) {
    throw_error(ErrorKind::kConfig, "experiment needs kg, train and test");
  }
  if (config.k < 1) throw_error(ErrorKind::kConfig, "k must be >= 1");
  const auto variants = variants_for(config);
  bool need_text = false, need_kbc = false, need_dev = false;
  for (const auto& v : variants) {
    need_text |= v.use_text || v.mine_text;
    need_kbc |= v.use_kbc;
    need_dev |= v.revise;
  }

  ExperimentResult result;
  result.fingerprint = fingerprint(config);

  KnowledgeGraph kg = stage("ingest", [&] {
    auto r = ingest_kb_file(config.kg);
    if (!config.documents.empty()) {
      if (config.mentions.empty()) throw_error(ErrorKind::kConfig, "documents given without mentions");
      r.graph.add_documents(parse_documents(read_file(config.documents), read_file(config.mentions)));
    }
    return std::move(r.graph);
  });
  const auto train = stage("ingest", [&] { return parse_qa_file(config.train); });
  const auto test = stage("ingest", [&] { return parse_qa_file(config.test); });
  std::vector<QaExample> dev;
  if (need_dev) {
    if (config.dev.empty()) throw_error(ErrorKind::kConfig, "revise needs a dev set");
    dev = stage("ingest", [&] { return parse_qa_file(config.dev); });
  }

  stage("drop", [&] {
    std::vector<NamedTriple> dropped;
    if (config.drop == "per_question" || config.drop == "both") {
      auto r = drop_per_question(kg, test, config.drop_p, config.drop_seed);
      dropped.insert(dropped.end(), r.plan.dropped.begin(), r.plan.dropped.end());
      result.per_question_plan = std::move(r.plan);
      kg = std::move(r.reduced);
    }
    if (config.drop == "global" || config.drop == "both") {
      auto r = drop_global(kg, config.drop_fraction, config.drop_seed, test);
      dropped.insert(dropped.end(), r.plan.dropped.begin(), r.plan.dropped.end());
      result.global_plan = std::move(r.plan);
      kg = std::move(r.reduced);
    }
    if (config.synthetic_support && !dropped.empty()) {
      std::sort(dropped.begin(), dropped.end());
      kg.add_documents(support_documents(dropped, "support_"));
    }
    return 0;
  });

  const auto embedder = stage("models", [&] { return make_embedder(config.embedder); });
  std::unique_ptr<ReAligner> aligner;
  std::optional<ComplExModel> kbc;
  stage("models", [&] {
    if (need_text && std::any_of(variants.begin(), variants.end(), [](const Variant& v) { return v.use_text; })) {
      if (config.proxies.empty()) throw_error(ErrorKind::kConfig, "text branch needs a proxies file");
      auto proxies = load_proxy_texts(config.proxies, kg.relation_names());
      std::shared_ptr<const RelationScorer> scorer;
      if (config.re_command.empty()) {
        scorer = std::make_shared<LexicalScorer>(proxies);
      } else {
        std::vector<std::string> argv;
        for (auto part : split(config.re_command, ' ')) {
          if (!part.empty()) argv.emplace_back(part);
        }
        scorer = std::make_shared<SubprocessScorer>(argv);
      }
      aligner = std::make_unique<ReAligner>(scorer, std::move(proxies));
    }
    if (need_kbc) {
      kbc = config.kbc_model.empty() ? train_complex(kg, config.kbc) : load_model(config.kbc_model);
    }
    return 0;
  });

  std::map<bool, BuildResult> built;  // keyed by mine_text
  std::map<std::pair<bool, bool>, CaseBase> finals;
  std::optional<DevSet> dev_set;
  for (const auto& v : variants) {
    const auto started = Clock::now();
    const CaseBase& cb = stage("build", [&]() -> const CaseBase& {
      auto key = std::make_pair(v.mine_text, v.revise);
      if (auto it = finals.find(key); it != finals.end()) return it->second;
      if (!built.contains(v.mine_text)) {
        BuildConfig bc;
        bc.case_options.mining = config.mining;
        bc.case_options.mining.include_text = v.mine_text;
        bc.case_options.mask_mode = config.mask_mode;
        bc.workers = config.workers;
        built.emplace(v.mine_text, build_casebase(train, kg, *embedder, bc));
      }
      CaseBase out = built.at(v.mine_text).casebase;
      if (v.revise) {
        if (!dev_set) dev_set = make_dev_set(dev, *embedder, config.mask_mode);
        ReviseConfig rc = config.revise_config;
        rc.workers = config.workers;
        out = revise_and_retain(out, *dev_set, kg, rc).casebase;
      }
      return finals.emplace(key, std::move(out)).first->second;
    });

    VariantResult vr = stage("evaluate", [&] {
      BeamConfig bc = config.beam;
      bc.use_text = v.use_text;
      bc.use_kbc = v.use_kbc;
      bc.use_kb = v.use_kb;
      ReasoningModels models{kbc ? &*kbc : nullptr, aligner.get()};
      Reasoner reasoner(kg, bc, models);
      PredictSettings ps;
      ps.retrieval.k = config.k;
      ps.mask_mode = config.mask_mode;
      ps.workers = config.workers;
      ps.explain = config.explain;
      const auto predictions = predict_all(test, cb, *embedder, reasoner, ps);
      VariantResult r;
      r.name = v.name;
      r.report = hits_at_1(predictions, test);
      r.report.fingerprint = result.fingerprint;
      r.cases = cb.size();
      for (const auto& c : cb.cases()) r.chains += c.chains.size();
      if (!config.output_dir.empty()) {
        std::filesystem::create_directories(config.output_dir);
        write_file(config.output_dir / ("report_" + v.name + ".tsv"), r.report.to_text());
        if (config.explain) {
          std::string all;
          for (const auto& p : predictions) all += "# " + p.id + "\n" + p.explanation;
          write_file(config.output_dir / ("explanations_" + v.name + ".txt"), all);
        }
      }
      return r;
    });
    vr.seconds = std::chrono::duration<double>(Clock::now() - started).count();
    result.variants.push_back(std::move(vr));
  }

  if (!config.output_dir.empty()) {
    std::filesystem::create_directories(config.output_dir);
    write_file(config.output_dir / "summary.tsv", result.summary());
    if (result.per_question_plan) {
      write_file(config.output_dir / "drop_per_question.txt", result.per_question_plan->to_text());
    }
    if (result.global_plan) write_file(config.output_dir / "drop_global.txt", result.global_plan->to_text());
  }
  return result;
}

}  // namespace cbr
