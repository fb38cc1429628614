#include "misinfo/mock.hpp"

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "misinfo/seed.hpp"
#include "misinfo/utf8.hpp"

namespace misinfo {

namespace {

struct Piece {
  std::string_view text;
  bool slot = false;
  EntityType type = EntityType::PERSON;
};

using Template = std::vector<Piece>;

Piece lit(std::string_view t) { return {t, false, EntityType::PERSON}; }
Piece slot(EntityType t) { return {{}, true, t}; }

const std::vector<Template>& templates() {
  using E = EntityType;
  static const std::vector<Template> kTemplates = {
      {slot(E::PERSON), lit(" visited "), slot(E::GPE), lit(" on "), slot(E::DATE), lit(".")},
      {slot(E::PERSON), lit(" and "), slot(E::PERSON), lit(" met "), slot(E::ORG),
       lit(" officials in "), slot(E::GPE), lit(".")},
      {lit("Fans at the "), slot(E::EVENT), lit(" cheered as "), slot(E::PERSON),
       lit(" arrived.")},
      {slot(E::NORP), lit(" protesters gathered outside "), slot(E::FAC), lit(" at "),
       slot(E::TIME), lit(".")},
      {lit("Flooding hit "), slot(E::LOC), lit(" during "), slot(E::DATE), lit(", "),
       slot(E::ORG), lit(" said.")},
      {slot(E::PERSON), lit(" speaks to reporters.")},
      {lit("A view of "), slot(E::FAC), lit(" in "), slot(E::GPE), lit(" before the "),
       slot(E::EVENT), lit(".")},
      {lit("A quiet morning at the harbour.")},
      {lit("Crowds watch the parade from the bridge.")},
  };
  return kTemplates;
}

const std::vector<std::string_view>& vocabulary(EntityType type) {
  static const std::array<std::vector<std::string_view>, 9> kVocab = {{
      // PERSON
      {"Alice Martin", "Bob Chen", "José Álvarez", "Chloé Dubois", "David Okafor",
       "Emma Schultz", "Farid Haddad", "Grace Kim", "Hiro Tanaka", "Ingrid Berg",
       "Jamal Wright", "Katarzyna Nowak", "Liam O'Brien", "Mía Fernández", "Nikolai Petrov",
       "Olu Adeyemi", "Priya Nair", "Quentin Roy", "Rosa Lindqvist", "Søren Madsen"},
      // GPE
      {"Paris", "Berlin", "Zürich", "São Paulo", "Lagos", "Tokyo", "Kraków", "Montréal",
       "Nairobi", "Lima", "Seoul", "Reykjavík", "Cairo", "Oslo", "Québec", "Hanoi"},
      // LOC
      {"the Alps", "the Nile", "the Sahara", "the Baltic Sea", "the Andes", "Lake Victoria",
       "the Rhine", "the Gobi", "the Danube", "the Pacific"},
      // ORG
      {"the United Nations", "Reuters", "the Red Cross", "UEFA", "NASA", "the WHO",
       "Greenpeace", "the IMF", "Médecins Sans Frontières", "the BBC", "Interpol", "FIFA"},
      // DATE
      {"Monday", "Tuesday", "2019", "2020", "March 3", "last week", "1999", "June 2021",
       "New Year's Day", "Friday"},
      // TIME
      {"noon", "dawn", "midnight", "9 a.m.", "dusk", "3 p.m."},
      // EVENT
      {"World Cup", "Olympic Games", "Tour de France", "Eurovision", "Cannes Film Festival",
       "G20 summit", "Wimbledon", "Fête de la Musique"},
      // NORP
      {"French", "German", "Brazilian", "Nigerian", "Japanese", "Polish", "Kenyan",
       "Icelandic"},
      // FAC
      {"the Eiffel Tower", "Wembley Stadium", "the Brandenburg Gate", "Heathrow Airport",
       "the Louvre", "the Golden Gate Bridge", "Tōkyō Station", "the Colosseum"},
  }};
  return kVocab[static_cast<std::size_t>(type)];
}

// Each topic draws names from a window of the vocabulary so that pools
// differ across topics but overlap with neighbours.
std::string_view pick_entity(EntityType type, std::size_t topic, SplitMix64& rng) {
  const auto& vocab = vocabulary(type);
  const std::size_t window = std::min<std::size_t>(6, vocab.size());
  const std::size_t offset = (topic * 3) % vocab.size();
  const std::size_t k = uniform_below(rng, window);
  return vocab[(offset + k) % vocab.size()];
}

}  // namespace

MockCorpus make_mock_corpus(const MockCorpusOptions& options) {
  SplitMix64 rng(mix_seed(options.seed, 0, 0x4D4F434BULL));
  const std::size_t topics = options.topics == 0 ? 1 : options.topics;
  const auto& tmpl = templates();
  static constexpr std::array<std::string_view, 4> kSources = {"washington_post", "usa_today",
                                                               "guardian", "bbc"};

  std::vector<NewsRecord> records;
  std::vector<AnnotatedCaption> annotations;
  std::vector<std::vector<std::size_t>> by_topic(topics);
  records.reserve(options.records);
  annotations.reserve(options.records);

  const auto threshold = [](double p) {
    return static_cast<std::uint64_t>(p * 18446744073709551616.0);
  };
  const std::uint64_t dup_cut = threshold(options.duplicate_rate);
  const std::uint64_t val_cut = threshold(options.val_fraction);

  for (std::size_t i = 0; i < options.records; ++i) {
    NewsRecord r;
    // Sparse ids so nothing can confuse ids with positions.
    r.id = 1000 + 3 * static_cast<RecordId>(i);
    const std::size_t topic = uniform_below(rng, topics);
    r.topic = fmt::format("topic-{:03}", topic);
    r.source = std::string(kSources[uniform_below(rng, kSources.size())]);
    r.image_ref = "images/" + std::to_string(r.id) + ".jpg";
    r.split = rng() < val_cut ? Split::Val : Split::Train;

    AnnotatedCaption ann;
    ann.record_id = r.id;
    auto& peers = by_topic[topic];
    if (!peers.empty() && rng() < dup_cut) {
      const std::size_t donor = peers[uniform_below(rng, peers.size())];
      r.caption = records[donor].caption;
      ann.entities = annotations[donor].entities;
    } else {
      const Template& t = tmpl[uniform_below(rng, tmpl.size())];
      std::size_t scalars = 0;
      for (const Piece& p : t) {
        const std::string_view text = p.slot ? pick_entity(p.type, topic, rng) : p.text;
        const std::size_t len = utf8::scalar_length(text);
        if (p.slot) ann.entities.push_back({p.type, scalars, scalars + len, std::string(text)});
        r.caption += text;
        scalars += len;
      }
    }
    peers.push_back(records.size());
    records.push_back(std::move(r));
    annotations.push_back(std::move(ann));
  }

  Corpus corpus(std::move(records));
  Annotations ann(corpus, std::move(annotations));
  return {std::move(corpus), std::move(ann)};
}

}  // namespace misinfo
