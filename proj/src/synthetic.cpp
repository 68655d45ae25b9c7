#include "hgmem/synthetic.hpp"

#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

namespace hgmem::synthetic {

using harness::Category;
using harness::DialogueCorpus;
using harness::QaItem;
using harness::Turn;

const std::vector<Theme>& themes() {
  static const std::vector<Theme> kThemes{
      {"pets", "puppy", {"shelter", "leash", "vet", "kibble", "fetch", "collar", "kennel", "treats", "paws", "grooming"}},
      {"job", "interview", {"resume", "recruiter", "salary", "manager", "offer", "hiring", "portfolio", "startup", "commute", "promotion"}},
      {"cooking", "recipe", {"oven", "garlic", "pasta", "skillet", "basil", "dough", "simmer", "spices", "flour", "dinner"}},
      {"travel", "flight", {"airport", "passport", "luggage", "hotel", "itinerary", "beach", "layover", "visa", "boarding", "suitcase"}},
      {"fitness", "marathon", {"running", "sneakers", "stretching", "pace", "training", "hydration", "miles", "coach", "injury", "gym"}},
      {"music", "guitar", {"chords", "concert", "band", "amplifier", "melody", "rehearsal", "drummer", "lyrics", "strings", "album"}},
      {"garden", "tomatoes", {"compost", "seedlings", "soil", "watering", "greenhouse", "mulch", "harvest", "weeds", "trellis", "shovel"}},
      {"books", "novel", {"chapter", "author", "library", "paperback", "plot", "bookclub", "poetry", "mystery", "bookmark", "sequel"}},
      {"movies", "film", {"cinema", "director", "trailer", "popcorn", "screenplay", "actor", "documentary", "premiere", "subtitles", "festival"}},
      {"finance", "budget", {"savings", "mortgage", "taxes", "invoice", "pension", "stocks", "spreadsheet", "expenses", "loan", "accountant"}},
      {"home", "apartment", {"landlord", "lease", "furniture", "roommate", "couch", "rent", "plumber", "balcony", "neighbors", "curtains"}},
      {"health", "doctor", {"appointment", "allergy", "prescription", "clinic", "vitamins", "headache", "therapy", "checkup", "dentist", "insomnia"}},
      {"tech", "laptop", {"keyboard", "software", "battery", "charger", "monitor", "update", "router", "printer", "backup", "wifi"}},
      {"art", "painting", {"canvas", "watercolor", "easel", "brushes", "gallery", "sketch", "portrait", "palette", "museum", "pottery"}},
  };
  return kThemes;
}

const std::vector<std::string>& templates() {
  static const std::vector<std::string> kTemplates{
      "I have been going on about the {a} and the {b} lately",
      "Yeah the {a} was really great and the {b} too",
      "What about the {a}? Do you like the {b}?",
      "I think the {a} is a good way to get more {b}",
      "Oh nice, so the {a} and the {b} are going well?",
      "We went to see the {a} and got some {b}",
      "Sounds cool, tell me more about the {a}",
      "My {a} has been so good with the {b}",
      "Glad to hear that, the {a} feels like a new thing for you",
      "I hope the {a} will be great, maybe with some {b}",
      "Have you ever had a {a} with {b} before?",
      "That {a} sounds really nice, and the {b} too",
  };
  return kTemplates;
}

namespace {

const Theme& theme(const std::string& name) {
  for (const auto& t : themes()) {
    if (t.name == name) return t;
  }
  throw std::logic_error("unknown theme " + name);
}

std::string fill(const std::string& tmpl, const std::string& a, const std::string& b) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl.compare(i, 3, "{a}") == 0) {
      out += a;
      i += 2;
    } else if (tmpl.compare(i, 3, "{b}") == 0) {
      out += b;
      i += 2;
    } else {
      out += tmpl[i];
    }
  }
  return out;
}

std::string stamp(int day_of_year, int minute) {
  // 2023 is not a leap year.
  static constexpr int kMonthDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  int month = 0;
  int day = day_of_year;
  while (day >= kMonthDays[month]) day -= kMonthDays[month++];
  char buf[64];
  std::snprintf(buf, sizeof buf, "2023-%02d-%02dT%02d:%02d:00Z", month + 1, day + 1, 10 + minute / 60, minute % 60);
  return buf;
}

struct Planted {
  std::size_t position;
  std::string speaker;
  std::string text;
  std::string key;
};

struct SegmentPlan {
  std::string theme;
  std::size_t length;
  std::vector<Planted> planted;
};

struct SessionPlan {
  std::string id;
  int day;
  std::string first_speaker;
  std::string second_speaker;
  std::vector<SegmentPlan> segments;
};

/// Appends the sessions to `fx`, recording planted turn ids by key.
void build(Fixture& fx, const std::vector<SessionPlan>& sessions, std::mt19937_64& rng,
           std::map<std::string, std::string>& planted_ids) {
  for (const auto& s : sessions) {
    std::uint64_t turn = 0;
    for (const auto& seg : s.segments) {
      const auto& th = theme(seg.theme);
      for (std::size_t i = 0; i < seg.length; ++i) {
        Turn t;
        t.session_id = s.id;
        t.turn_index = turn;
        t.speaker = turn % 2 == 0 ? s.first_speaker : s.second_speaker;
        t.timestamp = stamp(s.day, static_cast<int>(turn));
        const Planted* p = nullptr;
        for (const auto& candidate : seg.planted) {
          if (candidate.position == i) p = &candidate;
        }
        const auto tmpl = rng() % templates().size();
        const auto word = rng() % th.words.size();
        if (p) {
          t.text = p->text;
          if (!p->speaker.empty()) t.speaker = p->speaker;
          planted_ids[p->key] = harness::turn_id(t.session_id, t.turn_index);
        } else {
          t.text = fill(templates()[tmpl], th.anchor, th.words[word]);
        }
        fx.corpus.turns.push_back(std::move(t));
        ++turn;
      }
      fx.shifts.push_back(fx.corpus.turns.size() - 1);
    }
  }
  fx.shifts.pop_back();
}

QaItem qa(std::string question, std::string answer, Category c, std::vector<std::string> evidence) {
  return QaItem{std::move(question), std::move(answer), c, std::move(evidence)};
}

}  // namespace

Fixture smoke() {
  Fixture fx;
  std::mt19937_64 rng(7);
  std::map<std::string, std::string> ids;
  build(fx,
        {{"smoke", 120, "Alice", "Bob",
          {{"pets", 6, {{2, "", "We adopted a puppy named Biscuit from the shelter", "biscuit"}}},
           {"job", 6, {{3, "", "My interview at the Lumen startup is on Friday at 10:30", "lumen"}}}}}},
        rng, ids);
  fx.corpus.qa = {
      qa("What is the name of the puppy adopted from the shelter?", "Biscuit", Category::single_hop, {ids["biscuit"]}),
      qa("When is the interview at the Lumen startup?", "Friday at 10:30", Category::temporal, {ids["lumen"]}),
  };
  return fx;
}

Fixture golden() {
  Fixture fx;
  std::mt19937_64 rng(11);
  std::map<std::string, std::string> ids;
  build(fx,
        {{"s1", 121, "Alice", "Bob",
          {{"pets", 6, {{2, "", "We adopted a puppy named Biscuit from the shelter", "biscuit"}}},
           {"job", 6, {{3, "", "My interview at the Lumen startup is on Friday at 10:30", "lumen"}}},
           {"cooking", 6, {{2, "", "The recipe for grandma's lasagna needs ricotta cheese", "ricotta"}}},
           {"travel", 6, {{3, "", "Our flight to Lisbon leaves in June", "lisbon"}}}}},
         {"s2", 128, "Alice", "Carol",
          {{"fitness", 6, {}},
           {"pets", 6, {{2, "", "Biscuit the puppy learned to catch a frisbee", "frisbee"}}},
           {"music", 6, {{2, "Carol", "I bought a vintage guitar at a pawnshop downtown", "pawnshop"}}},
           {"finance", 6, {{3, "", "The budget for the Lisbon flight is 900 euros", "euros"}}}}},
         {"s3", 135, "Bob", "Dave",
          {{"job", 6, {{2, "Bob", "I accepted the offer from Lumen after the interview", "accepted"}}},
           {"garden", 6, {{3, "", "The tomatoes should be ready to harvest in August", "august"}}},
           {"travel", 6, {}},
           {"health", 6, {{2, "", "The doctor said vitamins would help with my insomnia", "vitamins"}}}}}},
        rng, ids);
  fx.corpus.qa = {
      qa("What is the name of the puppy adopted from the shelter?", "Biscuit", Category::single_hop, {ids["biscuit"]}),
      qa("When is the interview at the Lumen startup?", "Friday at 10:30", Category::temporal, {ids["lumen"]}),
      qa("What cheese does the recipe for grandma's lasagna need?", "ricotta", Category::single_hop, {ids["ricotta"]}),
      qa("When does the flight to Lisbon leave?", "June", Category::temporal, {ids["lisbon"]}),
      qa("What did the puppy named Biscuit from the shelter learn to catch?", "a frisbee", Category::multi_hop,
         {ids["biscuit"], ids["frisbee"]}),
      qa("Where did Carol buy the vintage guitar?", "a pawnshop downtown", Category::single_hop, {ids["pawnshop"]}),
      qa("What is the budget for the flight to Lisbon in June?", "900 euros", Category::multi_hop,
         {ids["lisbon"], ids["euros"]}),
      qa("Which startup made the offer Bob accepted after the interview on Friday?", "Lumen", Category::multi_hop,
         {ids["lumen"], ids["accepted"]}),
      qa("When will the tomatoes be ready to harvest?", "August", Category::temporal, {ids["august"]}),
      qa("What did the doctor say would help with insomnia?", "vitamins", Category::open_domain, {ids["vitamins"]}),
  };
  return fx;
}

Fixture scaling(std::uint64_t seed) {
  static const std::vector<std::string> kNames{"Alice", "Bob", "Carol", "Dave", "Erin", "Frank", "Grace", "Heidi"};
  static const std::vector<std::string> kSyllables{"ka", "vo", "mi", "ru", "te", "zan", "lo", "pe",
                                                   "shi", "dra", "no", "qui", "bel", "tor", "xu", "fen"};
  std::mt19937_64 rng(seed);
  std::vector<SessionPlan> plans;
  std::set<std::string> codes;
  std::vector<std::pair<std::string, std::string>> facts;  // key -> anchor
  std::size_t previous = themes().size();
  for (int s = 0; s < 27; ++s) {
    SessionPlan plan;
    plan.id = "session_" + std::to_string(s + 1);
    plan.day = 3 * s;
    const auto a = rng() % kNames.size();
    auto b = rng() % (kNames.size() - 1);
    if (b >= a) ++b;
    plan.first_speaker = kNames[a];
    plan.second_speaker = kNames[b];
    const auto fact_segment = rng() % 3;
    for (std::size_t k = 0; k < 3; ++k) {
      std::size_t th = rng() % (themes().size() - 1);
      if (th >= previous) ++th;
      previous = th;
      SegmentPlan seg{themes()[th].name, 7 + static_cast<std::size_t>(rng() % 3), {}};
      if (k == fact_segment) {
        std::string code;
        do {
          code.clear();
          for (int i = 0; i < 3; ++i) code += kSyllables[rng() % kSyllables.size()];
        } while (!codes.insert(code).second);
        const auto key = plan.id;
        seg.planted.push_back({3, "", "The " + themes()[th].anchor + " password hint is " + code, key});
        facts.emplace_back(key, code);
      }
      plan.segments.push_back(std::move(seg));
    }
    plans.push_back(std::move(plan));
  }
  Fixture fx;
  std::map<std::string, std::string> ids;
  build(fx, plans, rng, ids);
  for (std::size_t i = 0; i < plans.size(); ++i) {
    const auto& [key, code] = facts[i];
    std::string anchor;
    for (const auto& seg : plans[i].segments) {
      if (!seg.planted.empty()) anchor = theme(seg.theme).anchor;
    }
    fx.corpus.qa.push_back(qa("What is the " + anchor + " password hint " + plans[i].first_speaker + " and " +
                                  plans[i].second_speaker + " talked about?",
                              code, Category::single_hop, {ids[key]}));
  }
  return fx;
}

}  // namespace hgmem::synthetic
