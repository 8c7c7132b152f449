// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#include "cbrikb/realign.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>

#include "cbrikb/error.hpp"
#include "cbrikb/text.hpp"

namespace cbr {

namespace {

constexpr char kUnitSeparator = '\x1f';

std::string span_text(TextSpan s) { return std::to_string(s.begin) + ":" + std::to_string(s.end); }

/// Tokens of `text` outside the subject and object spans.
std::vector<std::string> context_tokens(const ReInput& input) {
  std::string masked = input.text;
  for (TextSpan s : {input.subject, input.object}) {
    const std::size_t end = std::min(s.end, masked.size());
    for (std::size_t i = std::min(s.begin, end); i < end; ++i) masked[i] = ' ';
  }
  return tokenize(masked);
}

}  // namespace

std::vector<std::string> ProxyTextTable::relations() const {
  std::vector<std::string> out;
  for (const auto& [r, t] : texts) out.push_back(r);
  return out;
}

ProxyTextTable parse_proxy_texts(std::string_view text, std::span<const std::string> relations) {
  ProxyTextTable table;
  std::size_t line_no = 0;
  for (std::string_view line : lines_of(text)) {
    ++line_no;
    if (trim(line).empty() || line.front() == '#') continue;
    const std::size_t tab = line.find('\t');
    const std::string where = "proxy line " + std::to_string(line_no);
    if (tab == std::string_view::npos || tab == 0) {
      throw_error(ErrorKind::kParse, where + ": expected relation<TAB>text");
    }
    std::string relation(line.substr(0, tab));
    std::string body(trim(line.substr(tab + 1)));
    if (body.empty()) throw_error(ErrorKind::kValidation, where + ": empty proxy text");
    if (body.find(kSubjectPlaceholder) == std::string::npos ||
        body.find(kObjectPlaceholder) == std::string::npos) {
      throw_error(ErrorKind::kValidation,
                  where + ": proxy text for " + relation + " needs both <SUBJ> and <OBJ>");
    }
    if (table.texts.contains(relation)) ++table.duplicates;
    table.texts[relation] = std::move(body);
  }
  std::vector<std::string> missing, extra;
  const std::set<std::string> wanted(relations.begin(), relations.end());
  for (const auto& r : wanted) {
    if (!table.texts.contains(r)) missing.push_back(r);
  }
  for (const auto& [r, t] : table.texts) {
    if (!wanted.contains(r)) extra.push_back(r);
  }
  if (!missing.empty() || !extra.empty()) {
    std::string msg = "proxy texts do not match the relation set;";
    if (!missing.empty()) msg += " missing: " + join(missing, ", ") + ";";
    if (!extra.empty()) msg += " extra: " + join(extra, ", ") + ";";
    throw_error(ErrorKind::kValidation, msg);
  }
  return table;
}

ProxyTextTable load_proxy_texts(const std::filesystem::path& path,
                                std::span<const std::string> relations) {
  return parse_proxy_texts(read_file(path), relations);
}

ReInput proxy_input(std::string_view proxy_text) {
  ReInput in;
  in.text = std::string(proxy_text);
  const auto s = in.text.find(kSubjectPlaceholder);
  const auto o = in.text.find(kObjectPlaceholder);
  require(s != std::string::npos && o != std::string::npos, "proxy text lacks <SUBJ>/<OBJ>");
  in.subject = TextSpan{s, s + kSubjectPlaceholder.size()};
  in.object = TextSpan{o, o + kObjectPlaceholder.size()};
  return in;
}

ReInput document_input(const Document& doc, std::string_view subject, std::string_view object) {
  const Mention* s = doc.mention_of(subject);
  const Mention* o = doc.mention_of(object);
  require(s != nullptr, "entity '" + std::string(subject) + "' has no mention in document " + doc.doc_id);
  require(o != nullptr, "entity '" + std::string(object) + "' has no mention in document " + doc.doc_id);
  return ReInput{doc.text, TextSpan{s->begin, s->end}, TextSpan{o->begin, o->end}};
}

std::string LabelDistribution::argmax() const {
  std::string best;
  double best_p = -1.0;
  for (const auto& [label, p] : probs) {
    if (p > best_p) {
      best = label;
      best_p = p;
    }
  }
  return best;
}

bool LabelDistribution::valid(double tolerance) const {
  double sum = 0.0;
  for (const auto& [label, p] : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) return false;
    sum += p;
  }
  return !probs.empty() && std::abs(sum - 1.0) <= tolerance;
}

double agreement(const LabelDistribution& p, const LabelDistribution& q) {
  require(p.probs.size() == q.probs.size(), "agreement: label sets differ");
  double sum = 0.0;
  auto it = q.probs.begin();
  for (const auto& [label, pv] : p.probs) {
    require(it->first == label, "agreement: label sets differ ('" + label + "' vs '" + it->first + "')");
    sum += pv * it->second;
    ++it;
  }
  return std::clamp(sum, 0.0, 1.0);
}

LexicalScorer::LexicalScorer(const ProxyTextTable& proxies, double temperature)
    : temperature_(temperature) {
  require(temperature > 0.0, "LexicalScorer: temperature must be positive");
  require(!proxies.texts.empty(), "LexicalScorer: no proxy texts");
  std::vector<std::vector<std::string>> docs;
  for (const auto& [relation, text] : proxies.texts) {
    labels_.push_back(relation);
    docs.push_back(context_tokens(proxy_input(text)));
  }
  std::vector<std::size_t> df;
  for (const auto& tokens : docs) {
    const std::set<std::string> uniq(tokens.begin(), tokens.end());
    for (const auto& t : uniq) {
      auto [it, inserted] = vocab_.emplace(t, df.size());
      if (inserted) df.push_back(0);
      ++df[it->second];
    }
  }
  const double n = static_cast<double>(docs.size());
  idf_.resize(df.size());
  for (std::size_t i = 0; i < df.size(); ++i) {
    idf_[i] = std::log((1.0 + n) / (1.0 + static_cast<double>(df[i])));
  }
  for (const auto& [relation, text] : proxies.texts) {
    proxy_vectors_.push_back(vectorize(proxy_input(text)));
  }
}

std::vector<double> LexicalScorer::vectorize(const ReInput& input) const {
  std::vector<double> v(idf_.size(), 0.0);
  for (const auto& t : context_tokens(input)) {
    if (auto it = vocab_.find(t); it != vocab_.end()) v[it->second] += 1.0;
  }
  double norm = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] *= idf_[i];
    norm += v[i] * v[i];
  }
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }
  return v;
}

std::vector<double> LexicalScorer::similarities(const ReInput& input) const {
  const auto v = vectorize(input);
  std::vector<double> sims;
  sims.reserve(proxy_vectors_.size());
  for (const auto& p : proxy_vectors_) {
    double dot = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) dot += v[i] * p[i];
    sims.push_back(dot);
  }
  return sims;
}

LabelDistribution LexicalScorer::distribution(const ReInput& input) const {
  const auto sims = similarities(input);
  const double top = *std::max_element(sims.begin(), sims.end());
  std::vector<double> w(sims.size());
  double z = 0.0;
  for (std::size_t i = 0; i < sims.size(); ++i) {
    w[i] = std::exp((sims[i] - top) / temperature_);
    z += w[i];
  }
  LabelDistribution d;
  for (std::size_t i = 0; i < sims.size(); ++i) d.probs.emplace(labels_[i], w[i] / z);
  return d;
}

SubprocessScorer::SubprocessScorer(std::vector<std::string> argv) {
  require(!argv.empty(), "SubprocessScorer: empty command");
  int in_pipe[2], out_pipe[2];
  if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0) {
    throw_error(ErrorKind::kIo, std::string("pipe: ") + std::strerror(errno));
  }
  const pid_t pid = fork();
  if (pid < 0) throw_error(ErrorKind::kIo, std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    std::vector<char*> args;
    for (auto& a : argv) args.push_back(a.data());
    args.push_back(nullptr);
    execvp(args[0], args.data());
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  pid_ = pid;
  signal(SIGPIPE, SIG_IGN);
}

SubprocessScorer::~SubprocessScorer() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  if (pid_ > 0) {
    int status = 0;
    waitpid(pid_, &status, 0);
  }
}

std::string SubprocessScorer::encode_request(const ReInput& input) {
  std::string text = input.text;
  for (char& c : text) {
    if (c == '\n' || c == '\r' || c == kUnitSeparator) c = ' ';
  }
  return text + kUnitSeparator + span_text(input.subject) + kUnitSeparator + span_text(input.object) +
         "\n";
}

LabelDistribution SubprocessScorer::decode_response(std::string_view line) {
  LabelDistribution d;
  for (std::string_view item : split(trim(line), ',')) {
    const std::size_t colon = item.rfind(':');
    if (colon == std::string_view::npos || colon == 0) {
      throw_error(ErrorKind::kParse, "RE response item '" + std::string(item) + "'");
    }
    double p = 0.0;
    try {
      p = std::stod(std::string(item.substr(colon + 1)));
    } catch (const std::exception&) {
      throw_error(ErrorKind::kParse, "RE response probability in '" + std::string(item) + "'");
    }
    d.probs[std::string(item.substr(0, colon))] += p;
  }
  double sum = 0.0;
  for (const auto& [l, p] : d.probs) {
    if (!(p >= 0.0)) throw_error(ErrorKind::kValidation, "RE response has a negative probability");
    sum += p;
  }
  if (!(sum > 0.0) || std::abs(sum - 1.0) > 1e-3) {
    throw_error(ErrorKind::kValidation, "RE response probabilities sum to " + std::to_string(sum));
  }
  for (auto& [l, p] : d.probs) p /= sum;
  return d;
}

LabelDistribution SubprocessScorer::distribution(const ReInput& input) const {
  std::lock_guard lock(mu_);
  const std::string request = encode_request(input);
  std::size_t written = 0;
  while (written < request.size()) {
    const ssize_t n = ::write(to_child_, request.data() + written, request.size() - written);
    if (n <= 0) throw_error(ErrorKind::kIo, "RE subprocess: write failed");
    written += static_cast<std::size_t>(n);
  }
  while (true) {
    const std::size_t nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      const std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return decode_response(line);
    }
    char chunk[4096];
    const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n <= 0) throw_error(ErrorKind::kIo, "RE subprocess: closed its output");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

ReAligner::ReAligner(std::shared_ptr<const RelationScorer> scorer, ProxyTextTable proxies)
    : scorer_(std::move(scorer)), proxies_(std::move(proxies)) {
  require(scorer_ != nullptr, "ReAligner: no scorer");
  if (proxies_.texts.empty()) throw_error(ErrorKind::kConfig, "ReAligner: no proxy texts loaded");
  for (const auto& [relation, text] : proxies_.texts) {
    proxy_dists_.emplace(relation, scorer_->distribution(proxy_input(text)));
  }
}

const LabelDistribution& ReAligner::proxy_distribution(std::string_view relation) const {
  auto it = proxy_dists_.find(relation);
  if (it == proxy_dists_.end()) {
    throw_error(ErrorKind::kNotFound, "no proxy text for relation '" + std::string(relation) + "'");
  }
  return it->second;
}

const LabelDistribution& ReAligner::document_distribution(const Document& doc,
                                                          std::string_view subject,
                                                          std::string_view object) const {
  std::string key = doc.doc_id;
  key += '\x1f';
  key += subject;
  key += '\x1f';
  key += object;
  {
    std::lock_guard lock(mu_);
    if (auto it = doc_cache_.find(key); it != doc_cache_.end()) return it->second;
  }
  LabelDistribution d = scorer_->distribution(document_input(doc, subject, object));
  std::lock_guard lock(mu_);
  return doc_cache_.emplace(std::move(key), std::move(d)).first->second;
}

double ReAligner::support(const Document& doc, std::string_view subject, std::string_view object,
                          std::string_view relation) const {
  return agreement(proxy_distribution(relation), document_distribution(doc, subject, object));
}

Alignment ReAligner::align(const Document& doc) const {
  {
    std::lock_guard lock(mu_);
    if (auto it = align_cache_.find(doc.doc_id); it != align_cache_.end()) return it->second;
  }
  std::vector<std::string> mentioned;
  for (const auto& m : doc.mentions) {
    if (std::find(mentioned.begin(), mentioned.end(), m.entity) == mentioned.end()) {
      mentioned.push_back(m.entity);
    }
  }
  require(mentioned.size() >= 2, "align: document " + doc.doc_id + " mentions fewer than two entities");
  const LabelDistribution& d = document_distribution(doc, mentioned[0], mentioned[1]);
  Alignment best;
  best.probability = -1.0;
  for (const auto& [relation, proxy] : proxy_dists_) {
    const double p = agreement(d, proxy);
    if (p > best.probability) {
      best = Alignment{relation, p, false};
    } else if (p == best.probability) {
      best.tied = true;
    }
  }
  std::lock_guard lock(mu_);
  return align_cache_.emplace(doc.doc_id, best).first->second;
}

}  // namespace cbr
