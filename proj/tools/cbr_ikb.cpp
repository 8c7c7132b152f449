// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "cbrikb/casebase.hpp"
#include "cbrikb/drop.hpp"
#include "cbrikb/embed.hpp"
#include "cbrikb/error.hpp"
#include "cbrikb/evaluate.hpp"
#include "cbrikb/experiment.hpp"
#include "cbrikb/kbc.hpp"
#include "cbrikb/kg.hpp"
#include "cbrikb/qa.hpp"
#include "cbrikb/realign.hpp"
#include "cbrikb/reason.hpp"
#include "cbrikb/retrieve.hpp"
#include "cbrikb/revise.hpp"
#include "cbrikb/synthetic.hpp"
#include "cbrikb/text.hpp"

namespace {

using namespace cbr;

struct GraphArgs {
  std::string kb, documents, mentions;
  char delimiter = '\t';

  void attach(CLI::App* app, const char* kb_flag) {
    app->add_option(kb_flag, kb, "Triples file (subject<TAB>relation<TAB>object)")->required();
    app->add_option("--documents", documents, "Documents file (doc_id<TAB>text)");
    app->add_option("--mentions", mentions, "Mentions file (doc_id<TAB>entity<TAB>begin<TAB>end)");
  }

  KnowledgeGraph load(IngestReport* report = nullptr) const {
    auto r = ingest_kb_file(kb, delimiter);
    if (!documents.empty() || !mentions.empty()) {
      if (documents.empty() || mentions.empty()) {
        throw_error(ErrorKind::kConfig, "--documents and --mentions go together");
      }
      r.graph.add_documents(parse_documents(read_file(documents), read_file(mentions)));
    }
    if (report) *report = r.report;
    return std::move(r.graph);
  }
};

struct ReuseArgs {
  std::string embedder = "hash";
  std::string mask_mode = "per-token";
  std::string proxies, kbc_model, re_command;
  int k = 5;
  BeamConfig beam;
  bool no_text = false, no_kbc = false;

  void attach(CLI::App* app) {
    app->add_option("--embedder", embedder, "hash[:dim[:seed]] or file:<CBRE path>");
    app->add_option("--mask-mode", mask_mode, "per-token, collapse or off");
    app->add_option("--k", k, "Neighbors to retrieve (ties included)");
    app->add_option("--beam", beam.beam_width, "Beam width");
    app->add_option("--kbc-threshold", beam.kbc_threshold, "Minimum KBC probability for proposals");
    app->add_option("--kbc-topm", beam.kbc_topm, "KBC proposals per step");
    app->add_option("--max-results", beam.max_results, "Answers kept in the ranking");
    app->add_option("--proxies", proxies, "Proxy texts (relation<TAB>text)");
    app->add_option("--kbc-model", kbc_model, "Trained ComplEx model");
    app->add_option("--re-command", re_command, "External relation extractor command line");
    app->add_flag("--no-text", no_text, "Disable the text branch");
    app->add_flag("--no-kbc", no_kbc, "Disable the KBC branch");
  }
};

struct LoadedModels {
  std::unique_ptr<ReAligner> aligner;
  std::optional<ComplExModel> kbc;
  BeamConfig beam;
};

LoadedModels load_models(const ReuseArgs& a, const KnowledgeGraph& kg) {
  LoadedModels m;
  m.beam = a.beam;
  m.beam.use_text = !a.no_text;
  m.beam.use_kbc = !a.no_kbc;
  if (m.beam.use_text) {
    if (a.proxies.empty()) throw_error(ErrorKind::kConfig, "the text branch needs --proxies (or pass --no-text)");
    auto table = load_proxy_texts(a.proxies, kg.relation_names());
    std::shared_ptr<const RelationScorer> scorer;
    if (a.re_command.empty()) {
      scorer = std::make_shared<LexicalScorer>(table);
    } else {
      std::vector<std::string> argv;
      for (auto part : split(a.re_command, ' ')) {
        if (!part.empty()) argv.emplace_back(part);
      }
      scorer = std::make_shared<SubprocessScorer>(argv);
    }
    if (table.duplicates) std::cerr << "warning: " << table.duplicates << " duplicate proxy lines (last wins)\n";
    m.aligner = std::make_unique<ReAligner>(scorer, std::move(table));
  }
  if (m.beam.use_kbc) {
    if (a.kbc_model.empty()) throw_error(ErrorKind::kConfig, "the KBC branch needs --kbc-model (or pass --no-kbc)");
    m.kbc = load_model(a.kbc_model);
  }
  return m;
}

std::string fmt(double v, const char* f = "%.6f") {
  char buf[48];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cbr-ikb: case-based question answering over incomplete knowledge bases"};
  app.require_subcommand(1);

  // ingest
  GraphArgs ingest_graph;
  auto* ingest = app.add_subcommand("ingest", "Load a triples file and report counts");
  ingest_graph.attach(ingest, "--kb");
  std::string ingest_delim = "\t";
  ingest->add_option("--delimiter", ingest_delim, "Field delimiter (one character)");

  // build
  GraphArgs build_graph;
  std::string build_train, build_out, build_embedder = "hash", build_mask = "per-token";
  int build_max_len = 4;
  bool build_text = false;
  unsigned build_workers = 1;
  auto* build = app.add_subcommand("build", "Build a case base from training questions");
  build_graph.attach(build, "--kb");
  build->add_option("--train", build_train, "Training QA file")->required();
  build->add_option("--out", build_out, "Output case base (CBRB)")->required();
  build->add_option("--embedder", build_embedder, "hash[:dim[:seed]] or file:<CBRE path>");
  build->add_option("--mask-mode", build_mask, "per-token, collapse or off");
  build->add_option("--max-len", build_max_len, "Longest chain to mine");
  build->add_flag("--mine-with-text", build_text, "Allow document edges in mined chains");
  build->add_option("--workers", build_workers, "Worker threads");

  // neighbors
  std::string nb_casebase, nb_question, nb_embedder = "hash";
  int nb_k = 5;
  bool nb_unmasked = false;
  auto* neighbors = app.add_subcommand("neighbors", "List the retrieved cases for a question");
  neighbors->add_option("--casebase", nb_casebase, "Case base (CBRB)")->required();
  neighbors->add_option("--question", nb_question, "Question with [bracketed] mentions")->required();
  neighbors->add_option("--k", nb_k, "Neighbors (ties included)");
  neighbors->add_option("--embedder", nb_embedder, "Embedder used to build the case base");
  neighbors->add_flag("--unmasked", nb_unmasked, "Keep mention tokens on both sides");

  // answer
  GraphArgs ans_graph;
  ReuseArgs ans_reuse;
  std::string ans_casebase, ans_question;
  bool ans_explain = false;
  auto* answer_cmd = app.add_subcommand("answer", "Answer one question");
  ans_graph.attach(answer_cmd, "--kg");
  ans_reuse.attach(answer_cmd);
  answer_cmd->add_option("--casebase", ans_casebase, "Case base (CBRB)")->required();
  answer_cmd->add_option("--question", ans_question, "Question with [bracketed] mentions")->required();
  answer_cmd->add_flag("--explain", ans_explain, "Print neighbors, chains and provenance");

  // evaluate
  GraphArgs ev_graph;
  ReuseArgs ev_reuse;
  std::string ev_casebase, ev_test, ev_report;
  unsigned ev_workers = 1;
  auto* evaluate = app.add_subcommand("evaluate", "Hits@1 over a QA file");
  ev_graph.attach(evaluate, "--kg");
  ev_reuse.attach(evaluate);
  evaluate->add_option("--casebase", ev_casebase, "Case base (CBRB)")->required();
  evaluate->add_option("--test", ev_test, "QA file to answer")->required();
  evaluate->add_option("--report", ev_report, "Per-question report output");
  evaluate->add_option("--workers", ev_workers, "Worker threads");

  // drop
  std::string drop_kb, drop_scheme, drop_qa, drop_plan_out, drop_kb_out;
  double drop_param = 0.5;
  std::uint64_t drop_seed = 1;
  auto* drop = app.add_subcommand("drop", "Make an incomplete KB");
  drop->add_option("--kb", drop_kb, "Triples file")->required();
  drop->add_option("--scheme", drop_scheme, "global or per_question")->required();
  drop->add_option("--fraction,--p", drop_param, "Global fraction or per-question probability");
  drop->add_option("--seed", drop_seed, "RNG seed");
  drop->add_option("--qa", drop_qa, "QA file with gold chains");
  drop->add_option("--plan", drop_plan_out, "Write the drop plan here");
  drop->add_option("--out", drop_kb_out, "Write the reduced triples here");

  // train-kbc
  std::string tk_kb, tk_out, tk_held;
  KbcTrainConfig tk;
  auto* train_kbc = app.add_subcommand("train-kbc", "Train a ComplEx completion model");
  train_kbc->add_option("--kb", tk_kb, "Triples file")->required();
  train_kbc->add_option("--out", tk_out, "Model output")->required();
  train_kbc->add_option("--dim", tk.dim, "Complex dimension");
  train_kbc->add_option("--epochs", tk.epochs, "Epochs");
  train_kbc->add_option("--seed", tk.seed, "RNG seed");
  train_kbc->add_option("--lr", tk.learning_rate, "Adagrad learning rate");
  train_kbc->add_option("--negatives", tk.negatives_per_positive, "Negatives per positive");
  train_kbc->add_option("--l2", tk.l2_weight, "L2 weight");
  train_kbc->add_option("--held-out", tk_held, "Held-out triples to evaluate (filtered MRR)");

  // revise
  GraphArgs rv_graph;
  std::string rv_casebase, rv_dev, rv_out, rv_report, rv_embedder = "hash", rv_on = "local";
  ReviseConfig rv;
  auto* revise = app.add_subcommand("revise", "Rank chains by F1 and drop spurious ones");
  rv_graph.attach(revise, "--kg");
  revise->add_option("--casebase", rv_casebase, "Case base (CBRB)")->required();
  revise->add_option("--dev", rv_dev, "Dev QA file")->required();
  revise->add_option("--out", rv_out, "Revised case base")->required();
  revise->add_option("--report", rv_report, "One line per chain verdict");
  revise->add_option("--threshold", rv.discard_threshold, "Discard chains scoring below this");
  revise->add_option("--on", rv_on, "Threshold local or global F1");
  revise->add_option("--max-chains", rv.max_chains_per_case, "Chains kept per case");
  revise->add_option("--k", rv.neighbor_k, "Dev neighbors for global F1");
  revise->add_option("--embedder", rv_embedder, "Embedder used to build the case base");
  revise->add_option("--workers", rv.workers, "Worker threads");

  // experiment
  std::string ex_config;
  bool ex_ablations = false;
  auto* experiment = app.add_subcommand("experiment", "Run a configured end-to-end experiment");
  experiment->add_option("--config", ex_config, "key = value config file")->required();
  experiment->add_flag("--ablations", ex_ablations, "Run the full ablation matrix");

  // synth
  std::string sy_out;
  SyntheticConfig sy;
  auto* synth = app.add_subcommand("synth", "Write the synthetic movie benchmark");
  synth->add_option("--out", sy_out, "Output directory")->required();
  synth->add_option("--seed", sy.seed, "Generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*ingest) {
      if (ingest_delim.size() != 1) throw_error(ErrorKind::kConfig, "--delimiter must be one character");
      ingest_graph.delimiter = ingest_delim[0];
      IngestReport r;
      const auto kg = ingest_graph.load(&r);
      std::cout << "entities\t" << kg.entity_count() << "\nrelations\t" << kg.relation_count() << "\ntriples\t"
                << r.triples << "\nduplicates\t" << r.duplicates << "\ndocuments\t" << kg.document_count()
                << "\ntext_triples\t" << kg.triple_count() - kg.symbolic_triple_count() << '\n';
    } else if (*build) {
      const auto kg = build_graph.load();
      const auto embedder = make_embedder(build_embedder);
      BuildConfig bc;
      bc.case_options.mask_mode = parse_mask_mode(build_mask);
      bc.case_options.mining.max_len = build_max_len;
      bc.case_options.mining.include_text = build_text;
      bc.workers = build_workers;
      const auto r = build_casebase(std::filesystem::path(build_train), kg, *embedder, bc);
      store_casebase(build_out, r.casebase);
      std::cout << "cases\t" << r.report.cases << "\nchainless\t" << r.report.chainless << "\nskipped\t"
                << r.report.skipped << "\nunminable\t" << r.report.unminable << "\nmean_chains\t"
                << fmt(r.report.mean_chains, "%.3f") << '\n';
    } else if (*neighbors) {
      const auto cb = load_casebase(nb_casebase);
      const auto embedder = make_embedder(nb_embedder);
      RetrievalConfig rc;
      rc.k = nb_k;
      std::cout << inspect_neighbors(cb, nb_question, *embedder, rc, !nb_unmasked).to_text();
    } else if (*answer_cmd) {
      const auto kg = ans_graph.load();
      const auto cb = load_casebase(ans_casebase);
      const auto embedder = make_embedder(ans_reuse.embedder);
      auto models = load_models(ans_reuse, kg);
      Reasoner reasoner(kg, models.beam, {models.kbc ? &*models.kbc : nullptr, models.aligner.get()});
      RetrievalConfig rc;
      rc.k = ans_reuse.k;
      const auto r = answer(ans_question, cb, *embedder, rc, reasoner, parse_mask_mode(ans_reuse.mask_mode));
      if (ans_explain) {
        std::cout << r.explanation.to_text(r.answers, r.answers.ranking.size());
      } else if (r.answers.abstained()) {
        std::cout << "abstain\n";
      } else {
        for (const auto& name : r.answers.ranking) {
          std::cout << name << '\t' << fmt(r.answers.score_of(name)) << '\n';
        }
      }
    } else if (*evaluate) {
      const auto kg = ev_graph.load();
      const auto cb = load_casebase(ev_casebase);
      const auto embedder = make_embedder(ev_reuse.embedder);
      const auto test = parse_qa_file(ev_test);
      auto models = load_models(ev_reuse, kg);
      Reasoner reasoner(kg, models.beam, {models.kbc ? &*models.kbc : nullptr, models.aligner.get()});
      PredictSettings ps;
      ps.retrieval.k = ev_reuse.k;
      ps.mask_mode = parse_mask_mode(ev_reuse.mask_mode);
      ps.workers = ev_workers;
      const auto report = hits_at_1(predict_all(test, cb, *embedder, reasoner, ps), test);
      if (!ev_report.empty()) write_file(ev_report, report.to_text());
      std::cout << "hits_at_1\t" << fmt(report.hits_at_1) << "\tquestions\t" << report.records.size() << '\n';
    } else if (*drop) {
      const auto kg = ingest_kb_file(drop_kb).graph;
      std::vector<QaExample> qa;
      if (!drop_qa.empty()) qa = parse_qa_file(drop_qa);
      DropResult r = [&] {
        if (drop_scheme == "global") return drop_global(kg, drop_param, drop_seed, qa);
        if (drop_scheme == "per_question") {
          if (drop_qa.empty()) throw_error(ErrorKind::kConfig, "per_question dropping needs --qa");
          return drop_per_question(kg, qa, drop_param, drop_seed);
        }
        throw_error(ErrorKind::kConfig, "--scheme must be global or per_question");
      }();
      if (r.plan.skipped) std::cerr << "warning: " << r.plan.skipped << " examples without a gold chain\n";
      if (!drop_plan_out.empty()) write_file(drop_plan_out, r.plan.to_text());
      if (!drop_kb_out.empty()) {
        std::string out;
        for (const auto& t : r.reduced.triples()) {
          if (t.relation.kind != RelationKind::kSymbolic) continue;
          out += r.reduced.entity_name(t.subject) + "\t" + r.reduced.label_name(t.relation) + "\t" +
                 r.reduced.entity_name(t.object) + "\n";
        }
        write_file(drop_kb_out, out);
      }
      std::cout << "dropped\t" << r.plan.dropped.size() << "\naffected\t" << r.plan.affected.size() << "\nremaining\t"
                << r.reduced.symbolic_triple_count() << '\n';
    } else if (*train_kbc) {
      const auto kg = ingest_kb_file(tk_kb).graph;
      KbcTrainReport report;
      const auto model = train_complex(kg, tk, &report);
      store_model(tk_out, model);
      std::cout << "training_triples\t" << report.training_triples << "\ncalibration_triples\t"
                << report.calibration_triples << "\nfinal_loss\t"
                << fmt(report.epoch_loss.empty() ? 0.0 : report.epoch_loss.back()) << "\nscale\t"
                << fmt(model.scale) << "\nbias\t" << fmt(model.bias) << '\n';
      if (!tk_held.empty()) {
        std::vector<NamedTriple> held;
        const auto hk = ingest_kb_file(tk_held).graph;
        for (const auto& t : hk.triples()) {
          held.push_back({hk.entity_name(t.subject), hk.label_name(t.relation), hk.entity_name(t.object)});
        }
        const auto m = evaluate_kbc(model, held, kg);
        std::cout << "mrr\t" << fmt(m.mrr) << "\nhits_at_1\t" << fmt(m.hits_at_1) << "\nhits_at_3\t"
                  << fmt(m.hits_at_3) << "\nhits_at_10\t" << fmt(m.hits_at_10) << '\n';
      }
    } else if (*revise) {
      const auto kg = rv_graph.load();
      const auto cb = load_casebase(rv_casebase);
      const auto embedder = make_embedder(rv_embedder);
      if (rv_on == "local") rv.threshold_on = ThresholdOn::kLocal;
      else if (rv_on == "global") rv.threshold_on = ThresholdOn::kGlobal;
      else throw_error(ErrorKind::kConfig, "--on must be local or global");
      const auto dev_examples = parse_qa_file(rv_dev);
      const auto dev = make_dev_set(dev_examples, *embedder);
      const auto r = revise_and_retain(cb, dev, kg, rv);
      store_casebase(rv_out, r.casebase);
      if (!rv_report.empty()) write_file(rv_report, r.report.to_text());
      std::cout << "chains_before\t" << r.report.chains_before << "\nchains_discarded\t" << r.report.chains_discarded
                << "\ncases_discarded\t" << r.report.cases_discarded << "\ncases_after\t" << r.casebase.size()
                << '\n';
    } else if (*experiment) {
      auto config = load_experiment_config(ex_config);
      if (ex_ablations) config.ablations = true;
      std::cout << run_experiment(config).summary();
    } else if (*synth) {
      write_benchmark(make_movie_benchmark(sy), sy_out);
      std::cout << "wrote\t" << sy_out << '\n';
    }
  } catch (const Error& e) {
    std::cerr << "cbr-ikb: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "cbr-ikb: internal error: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
