// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#include "cbrikb/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include "cbrikb/chain.hpp"
#include "cbrikb/error.hpp"
#include "cbrikb/rng.hpp"
#include "cbrikb/text.hpp"

namespace cbr {

namespace {

const std::vector<std::string> kRelations = {
    "directed_by", "written_by",  "starred_actors", "release_year",
    "in_language", "has_genre",   "has_tags",       "has_imdb_rating",
};

const std::vector<std::string> kAdjectives = {
    "Silent", "Crimson", "Hidden", "Broken", "Golden", "Lonely", "Frozen", "Wild",
    "Distant", "Burning", "Hollow", "Velvet", "Iron", "Pale", "Restless", "Electric",
};
const std::vector<std::string> kNouns = {
    "Harbor", "Garden", "Mirror", "Empire", "Winter", "Horizon", "Orchard", "Signal",
    "Canyon", "Lantern", "Frontier", "Tide", "Meadow", "Station", "Voyage", "Citadel",
};
const std::vector<std::string> kFirst = {
    "Ada", "Bruno", "Carla", "Dmitri", "Elena", "Farid", "Greta", "Hugo", "Ines", "Jonas",
    "Kira", "Lorenzo", "Mara", "Nils", "Olga", "Pavel", "Quinn", "Rosa", "Sven", "Tara",
};
const std::vector<std::string> kLast = {
    "Moreno", "Lindqvist", "Okafor", "Brandt", "Castillo", "Novak", "Haddad", "Ferreira",
    "Kowalski", "Ishikawa", "Duval", "Petrov", "Almeida", "Fischer", "Romano", "Varga",
    "Nakamura", "Olsen", "Mendez", "Kovacs",
};
const std::vector<std::string> kLanguages = {
    "English", "French", "German", "Spanish", "Italian", "Japanese",
    "Korean", "Swedish", "Hindi", "Portuguese", "Polish", "Turkish",
};
const std::vector<std::string> kGenres = {
    "Drama", "Comedy", "Thriller", "Western", "Horror", "Romance",
    "Documentary", "Animation", "Fantasy", "Mystery", "Musical", "War",
};
const std::vector<std::string> kTags = {
    "heist", "revenge", "friendship", "betrayal", "survival", "family", "ocean", "space",
    "war", "music", "sports", "politics", "school", "robots", "monsters", "detective",
    "wedding", "journey", "prison", "magic", "desert", "island", "winter", "train",
    "hospital", "circus", "pirates", "vampires", "aliens", "cooking", "chess", "dance",
    "memory", "dreams", "poverty", "fame", "art", "jazz", "mountains", "farm",
};

struct Template {
  int hop;
  const char* text;  // {} marks the topic mention
  const char* chain;
  int topic;  // index into the role table below
};

enum Role { kMovie, kDirector, kWriter, kActor, kYear, kLanguage, kGenre };

const std::vector<Template> kTemplates = {
    {1, "who directed {}", "directed_by", kMovie},
    {1, "who wrote the screenplay of {}", "written_by", kMovie},
    {1, "which actors appear in {}", "starred_actors", kMovie},
    {1, "when was {} released", "release_year", kMovie},
    {1, "what language is {} in", "in_language", kMovie},
    {1, "what genre is the film {}", "has_genre", kMovie},
    {1, "what topics is {} about", "has_tags", kMovie},
    {1, "how is {} rated", "has_imdb_rating", kMovie},
    {1, "which movies did {} direct", "directed_by^-1", kDirector},
    {1, "which films did {} write", "written_by^-1", kWriter},
    {1, "what movies did {} act in", "starred_actors^-1", kActor},
    {1, "which films came out in {}", "release_year^-1", kYear},
    {2, "which movies share the director of {}", "directed_by,directed_by^-1", kMovie},
    {2, "which films have the same screenwriter as {}", "written_by,written_by^-1", kMovie},
    {2, "which movies share actors with {}", "starred_actors,starred_actors^-1", kMovie},
    {2, "what genres are the films directed by {}", "directed_by^-1,has_genre", kDirector},
    {2, "when were the movies written by {} released", "written_by^-1,release_year", kWriter},
    {2, "which languages are the films starring {} in", "starred_actors^-1,in_language", kActor},
    {2, "who directed the films starring {}", "starred_actors^-1,directed_by", kActor},
    {2, "who wrote the movies directed by {}", "directed_by^-1,written_by", kDirector},
    {3, "who starred in films made by the director of {}",
     "directed_by,directed_by^-1,starred_actors", kMovie},
    {3, "who acted in the movies by the screenwriter of {}",
     "written_by,written_by^-1,starred_actors", kMovie},
    {3, "who directed the films written by the screenwriter of {}",
     "written_by,written_by^-1,directed_by", kMovie},
    {3, "who directed the movies that share actors with {}",
     "starred_actors,starred_actors^-1,directed_by", kMovie},
    {3, "when were the films by the director of {} released",
     "directed_by,directed_by^-1,release_year", kMovie},
    {3, "who wrote the films that share a director with {}",
     "directed_by,directed_by^-1,written_by", kMovie},
};

struct Phrase {
  const char* proxy;
  const char* document;
};

const std::map<std::string, Phrase> kPhrases = {
    {"directed_by", {"<SUBJ> was directed by <OBJ>", "{s} is a film directed by {o} ."}},
    {"written_by", {"<SUBJ> was written by <OBJ>", "{s} has a screenplay written by {o} ."}},
    {"starred_actors", {"<SUBJ> starred <OBJ> in a leading role", "{s} starred {o} in one of the leading roles ."}},
    {"release_year", {"<SUBJ> was released in <OBJ>", "{s} was first released in theaters in {o} ."}},
    {"in_language", {"<SUBJ> is spoken in the <OBJ> language", "{s} was filmed in the {o} language ."}},
    {"has_genre", {"<SUBJ> belongs to the <OBJ> genre", "{s} is usually filed under the {o} genre ."}},
    {"has_tags", {"<SUBJ> is tagged with the keyword <OBJ>", "{s} is often tagged with the keyword {o} ."}},
    {"has_imdb_rating", {"<SUBJ> has an imdb rating of <OBJ>", "{s} holds an imdb rating of {o} ."}},
};

std::vector<std::string> pick_names(const std::vector<std::string>& a, const std::vector<std::string>& b,
                                    int n, SplitMix64& rng, std::set<std::string>& used) {
  std::vector<std::string> combos;
  for (const auto& x : a) {
    for (const auto& y : b) combos.push_back(x + "_" + y);
  }
  rng.shuffle(combos);
  std::vector<std::string> out;
  for (const auto& c : combos) {
    if (static_cast<int>(out.size()) == n) break;
    if (used.insert(c).second) out.push_back(c);
  }
  if (static_cast<int>(out.size()) < n) throw_error(ErrorKind::kConfig, "synthetic: name pool exhausted");
  return out;
}

std::vector<std::string> take(const std::vector<std::string>& pool, int n, const char* what) {
  if (n < 1 || n > static_cast<int>(pool.size())) {
    throw_error(ErrorKind::kConfig, std::string("synthetic: ") + what + " count out of range");
  }
  return {pool.begin(), pool.begin() + n};
}

std::string format_rating(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%d.%d", 5 + i / 5, (i % 5) * 2);
  return buf;
}

std::string fill(const char* pattern, std::string_view value) {
  std::string out = pattern;
  const auto pos = out.find("{}");
  out.replace(pos, 2, "[" + std::string(value) + "]");
  return out;
}

}  // namespace

KnowledgeGraph SyntheticBenchmark::graph() const {
  KnowledgeGraph kg;
  for (const auto& r : relations) kg.declare_relation(r);
  for (const auto& t : triples) kg.add_triple(t.subject, t.relation, t.object);
  return kg;
}

std::string movie_proxy_texts() {
  std::string out;
  for (const auto& r : kRelations) out += r + "\t" + kPhrases.at(r).proxy + "\n";
  return out;
}

std::vector<Document> support_documents(std::span<const NamedTriple> facts, std::string_view prefix) {
  std::vector<Document> docs;
  docs.reserve(facts.size());
  for (std::size_t i = 0; i < facts.size(); ++i) {
    const auto& f = facts[i];
    auto it = kPhrases.find(f.relation);
    if (it == kPhrases.end()) {
      throw_error(ErrorKind::kValidation, "no document phrasing for relation '" + f.relation + "'");
    }
    std::string text = it->second.document;
    Document d;
    char id[32];
    std::snprintf(id, sizeof id, "%05zu", i);
    d.doc_id = std::string(prefix) + id;
    const auto s = text.find("{s}");
    text.replace(s, 3, f.subject);
    const auto o = text.find("{o}");
    text.replace(o, 3, f.object);
    d.mentions.push_back({f.subject, s, s + f.subject.size()});
    d.mentions.push_back({f.object, o, o + f.object.size()});
    d.text = std::move(text);
    docs.push_back(std::move(d));
  }
  return docs;
}

SyntheticBenchmark make_movie_benchmark(const SyntheticConfig& config) {
  SplitMix64 rng(config.seed);
  std::set<std::string> used;
  std::array<std::vector<std::string>, 7> roles;
  roles[kMovie] = pick_names(kAdjectives, kNouns, config.movies, rng, used);
  roles[kDirector] = pick_names(kFirst, kLast, config.directors, rng, used);
  roles[kWriter] = pick_names(kFirst, kLast, config.writers, rng, used);
  roles[kActor] = pick_names(kFirst, kLast, config.actors, rng, used);
  for (int i = 0; i < config.years; ++i) roles[kYear].push_back(std::to_string(1960 + 2 * i));
  roles[kLanguage] = take(kLanguages, config.languages, "language");
  roles[kGenre] = take(kGenres, config.genres, "genre");
  const auto tags = take(kTags, config.tags, "tag");
  std::vector<std::string> ratings;
  for (int i = 0; i < config.ratings; ++i) ratings.push_back(format_rating(i));
  require(config.actors_per_movie >= 1 && config.actors_per_movie <= config.actors,
          "synthetic: actors per movie out of range");

  SyntheticBenchmark bench;
  bench.relations = kRelations;
  bench.proxy_texts = movie_proxy_texts();
  auto pick = [&](const std::vector<std::string>& pool) -> const std::string& {
    return pool[static_cast<std::size_t>(rng.below(pool.size()))];
  };
  for (const auto& m : roles[kMovie]) {
    bench.triples.push_back({m, "directed_by", pick(roles[kDirector])});
    bench.triples.push_back({m, "written_by", pick(roles[kWriter])});
    std::vector<std::string> cast = roles[kActor];
    rng.shuffle(cast);
    for (int a = 0; a < config.actors_per_movie; ++a) bench.triples.push_back({m, "starred_actors", cast[a]});
    bench.triples.push_back({m, "release_year", pick(roles[kYear])});
    bench.triples.push_back({m, "in_language", pick(roles[kLanguage])});
    bench.triples.push_back({m, "has_genre", pick(roles[kGenre])});
    bench.triples.push_back({m, "has_tags", pick(tags)});
    bench.triples.push_back({m, "has_imdb_rating", pick(ratings)});
  }

  const KnowledgeGraph kg = bench.graph();
  for (int hop = 1; hop <= 3; ++hop) {
    // Per template, every topic with a non-empty answer set, shuffled.
    std::vector<std::vector<QaExample>> pools;
    for (const auto& t : kTemplates) {
      if (t.hop != hop) continue;
      const InferentialChain chain = InferentialChain::parse(t.chain);
      std::vector<QaExample> pool;
      for (const auto& topic : roles[static_cast<std::size_t>(t.topic)]) {
        const auto id = kg.find_entity(topic);
        if (!id) continue;
        const EntityId src[] = {*id};
        QaExample ex;
        for (EntityId e : execute_exact(kg, src, chain)) {
          if (e != *id) ex.answers.push_back(kg.entity_name(e));
        }
        if (ex.answers.empty()) continue;
        std::sort(ex.answers.begin(), ex.answers.end());
        ex.raw_question = fill(t.text, topic);
        ex.gold_chain = chain;
        pool.push_back(std::move(ex));
      }
      rng.shuffle(pool);
      pools.push_back(std::move(pool));
    }
    // Round-robin over templates keeps every split template-balanced.
    std::vector<QaExample> order;
    for (std::size_t i = 0;; ++i) {
      bool any = false;
      for (auto& pool : pools) {
        if (i < pool.size()) {
          order.push_back(pool[i]);
          any = true;
        }
      }
      if (!any) break;
    }
    const std::size_t need =
        static_cast<std::size_t>(config.train_per_hop + config.dev_per_hop + config.test_per_hop);
    if (order.size() < need) {
      throw_error(ErrorKind::kConfig, "synthetic: only " + std::to_string(order.size()) + " distinct " +
                                          std::to_string(hop) + "-hop questions, need " + std::to_string(need));
    }
    // Interleave the splits over the round-robin order.
    QaSplits& s = bench.hops[static_cast<std::size_t>(hop - 1)];
    const double total = static_cast<double>(need);
    double tr = 0, dv = 0, te = 0;
    for (std::size_t i = 0; i < need; ++i) {
      const double want_tr = config.train_per_hop * (i + 1) / total - tr;
      const double want_dv = config.dev_per_hop * (i + 1) / total - dv;
      const double want_te = config.test_per_hop * (i + 1) / total - te;
      std::vector<QaExample>* dst;
      if (want_tr >= want_dv && want_tr >= want_te && tr < config.train_per_hop) {
        dst = &s.train;
        ++tr;
      } else if (want_dv >= want_te && dv < config.dev_per_hop) {
        dst = &s.dev;
        ++dv;
      } else if (te < config.test_per_hop) {
        dst = &s.test;
        ++te;
      } else if (tr < config.train_per_hop) {
        dst = &s.train;
        ++tr;
      } else {
        dst = &s.dev;
        ++dv;
      }
      dst->push_back(order[i]);
    }
    for (auto* split : {&s.train, &s.dev, &s.test}) {
      for (std::size_t i = 0; i < split->size(); ++i) (*split)[i].id = format_example_id(i + 1);
    }
  }
  return bench;
}

void write_benchmark(const SyntheticBenchmark& bench, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::string kb;
  for (const auto& t : bench.triples) kb += t.subject + "\t" + t.relation + "\t" + t.object + "\n";
  write_file(dir / "kb.tsv", kb);
  write_file(dir / "proxies.tsv", bench.proxy_texts);
  for (int hop = 1; hop <= 3; ++hop) {
    const auto& s = bench.hops[static_cast<std::size_t>(hop - 1)];
    const std::string stem = std::to_string(hop) + "hop_";
    write_file(dir / (stem + "train.tsv"), serialize_qa(s.train));
    write_file(dir / (stem + "dev.tsv"), serialize_qa(s.dev));
    write_file(dir / (stem + "test.tsv"), serialize_qa(s.test));
  }
}

KbcBenchmark make_kbc_benchmark(std::uint64_t seed, int entities, double held_out_fraction) {
  require(entities >= 4 && entities % 2 == 0, "kbc benchmark: entity count must be even and >= 4");
  require(held_out_fraction > 0.0 && held_out_fraction < 1.0, "kbc benchmark: bad held-out fraction");
  SplitMix64 rng(seed);
  std::vector<std::string> names;
  for (int i = 0; i < entities; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "n%03d", i);
    names.emplace_back(buf);
  }
  auto permutation = [&] {
    std::vector<std::size_t> p(names.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = i;
    rng.shuffle(p);
    return p;
  };
  std::vector<NamedTriple> all;
  // r0/r1 and r3/r4 are mutual inverses of random bijections; r2/r5 are
  // symmetric perfect matchings.
  for (int pair = 0; pair < 2; ++pair) {
    const auto p = permutation();
    const std::string fwd = pair == 0 ? "r0" : "r3";
    const std::string inv = pair == 0 ? "r1" : "r4";
    for (std::size_t i = 0; i < names.size(); ++i) {
      all.push_back({names[i], fwd, names[p[i]]});
      all.push_back({names[p[i]], inv, names[i]});
    }
  }
  for (const char* rel : {"r2", "r5"}) {
    const auto p = permutation();
    for (std::size_t i = 0; i + 1 < p.size(); i += 2) {
      all.push_back({names[p[i]], rel, names[p[i + 1]]});
      all.push_back({names[p[i + 1]], rel, names[p[i]]});
    }
  }
  std::sort(all.begin(), all.end());
  rng.shuffle(all);
  const auto n_held = static_cast<std::size_t>(held_out_fraction * static_cast<double>(all.size()));
  KbcBenchmark out;
  for (const char* r : {"r0", "r1", "r2", "r3", "r4", "r5"}) out.train.declare_relation(r);
  out.held_out.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_held));
  std::sort(out.held_out.begin(), out.held_out.end());
  for (std::size_t i = n_held; i < all.size(); ++i) out.train.add_triple(all[i].subject, all[i].relation, all[i].object);
  return out;
}

}  // namespace cbr
