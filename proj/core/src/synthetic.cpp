#include "fednlp/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <string>

#include "fednlp/errors.hpp"
#include "fednlp/random.hpp"

namespace fednlp {

namespace {

constexpr std::string_view kFiller[] = {
    "committee", "members",     "participants", "economy",    "economic",   "activity",    "labor",
    "market",    "markets",     "conditions",   "inflation",  "prices",     "wages",       "employment",
    "federal",   "funds",       "rate",         "target",     "range",      "policy",      "monetary",
    "outlook",   "data",        "indicators",   "household",  "spending",   "business",    "investment",
    "housing",   "sector",      "energy",       "consumer",   "survey",     "staff",       "projection",
    "balance",   "sheet",       "securities",   "treasury",   "mortgage",   "agency",      "holdings",
    "meeting",   "statement",   "discussion",   "review",     "framework",  "longer",      "run",
    "goals",     "maximum",     "mandate",      "percent",    "quarter",    "year",        "month",
    "recent",    "information", "received",     "since",      "previous",   "developments", "global",
    "foreign",   "trade",       "exports",      "imports",    "dollar",     "exchange",    "yields",
    "bond",      "equity",      "credit",       "lending",    "banks",      "deposits",    "reserves",
    "supply",    "demand",      "productivity", "output",     "gap",        "measures",    "expectations",
    "survey",    "regional",    "district",     "reports",    "contacts",   "noted",       "indicated",
    "judged",    "assessed",    "continued",    "remained",   "moved",      "pace",        "level",
    "path",      "appropriate", "stance",       "operations", "desk",       "open",        "account",
};

constexpr std::string_view kAuthors[] = {"Powell", "Yellen", "Bernanke", "Brainard", "Williams", "FOMC"};

constexpr Category kCategories[] = {Category::speech, Category::minutes, Category::transcript,
                                    Category::press_release};

std::string capitalize(std::string_view w) {
  std::string s(w);
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

int pick_class(Rng& rng, const std::array<double, kNumClasses>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double u = rng.uniform() * total;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    if (u < weights[k]) return static_cast<int>(k);
    u -= weights[k];
  }
  return static_cast<int>(kNumClasses - 1);
}

Date date_from_days(long days) {
  return Date{std::chrono::sys_days{std::chrono::days{days}}};
}

}  // namespace

const std::array<std::vector<std::string_view>, kNumClasses>& planted_cues() {
  static const std::array<std::vector<std::string_view>, kNumClasses> cues = {{
      {"dovish-token", "easing", "accommodation", "stimulus", "lowering", "cushion"},
      {"steady-token", "patient", "unchanged", "hold", "pause", "wait"},
      {"hawkish-token", "tightening", "hike", "restrictive", "firming", "raising"},
  }};
  return cues;
}

SyntheticCorpus make_synthetic(const SyntheticSpec& spec) {
  if (!(spec.cue_noise >= 0.0 && spec.cue_noise <= 1.0)) throw InvalidArgument("cue_noise must lie in [0, 1]");
  if (!(spec.label_flip >= 0.0 && spec.label_flip <= 1.0)) throw InvalidArgument("label_flip must lie in [0, 1]");
  Rng rng(derive_seed(spec.seed, 0x5EED));
  const auto& cues = planted_cues();
  constexpr std::size_t n_filler = std::size(kFiller);

  const long first_day = std::chrono::sys_days{Date{std::chrono::year{2000}, std::chrono::January, std::chrono::day{1}}}
                             .time_since_epoch()
                             .count();
  const long span_days = 20 * 365;

  SyntheticCorpus out;
  out.docs.reserve(spec.n_docs);
  for (std::size_t i = 0; i < spec.n_docs; ++i) {
    const int cls = pick_class(rng, spec.class_weights);
    const std::size_t n_sentences = 6 + rng.below(7);
    std::vector<std::vector<std::string>> sentences(n_sentences);
    for (auto& s : sentences) {
      const std::size_t len = 8 + rng.below(9);
      for (std::size_t w = 0; w < len; ++w) s.emplace_back(kFiller[rng.below(n_filler)]);
    }
    auto plant = [&](int k, std::size_t count) {
      const auto& pool = cues[static_cast<std::size_t>(k)];
      for (std::size_t c = 0; c < count; ++c) {
        auto& s = sentences[rng.below(n_sentences)];
        const auto pos = rng.below(s.size() + 1);
        s.insert(s.begin() + static_cast<std::ptrdiff_t>(pos), std::string(pool[rng.below(pool.size())]));
      }
    };
    const bool noisy = rng.uniform() < spec.cue_noise;
    std::size_t true_cues = 3 + rng.below(4);
    if (noisy) {
      const int other = static_cast<int>((static_cast<std::size_t>(cls) + 1 + rng.below(kNumClasses - 1)) % kNumClasses);
      const std::size_t distractors = 1 + rng.below(2);
      true_cues = std::max(true_cues, distractors + 2);
      plant(other, distractors);
    }
    plant(cls, true_cues);

    std::string body;
    for (const auto& s : sentences) {
      if (!body.empty()) body += ' ';
      for (std::size_t w = 0; w < s.size(); ++w) {
        if (w > 0) body += ' ';
        body += w == 0 ? capitalize(s[w]) : s[w];
      }
      body += '.';
    }

    int label = cls;
    if (rng.uniform() < spec.label_flip) {
      label = static_cast<int>((static_cast<std::size_t>(cls) + 1 + rng.below(kNumClasses - 1)) % kNumClasses);
    }

    char id[32];
    std::snprintf(id, sizeof id, "syn-%04zu", i);
    Document d;
    d.id = id;
    d.category = kCategories[rng.below(std::size(kCategories))];
    d.author = std::string(kAuthors[rng.below(std::size(kAuthors))]);
    d.title = "Synthetic " + std::string(to_string(d.category)) + " " + std::to_string(i);
    d.date = date_from_days(first_day + static_cast<long>(rng.below(static_cast<std::uint64_t>(span_days))));
    d.source_url = "synthetic://doc/" + d.id;
    d.body = std::move(body);
    d.label = decision_from_index(label);
    out.docs.push_back(std::move(d));
  }

  double rate = 5.0;
  for (int month = 0; month < 240; ++month) {
    const int cls = pick_class(rng, spec.class_weights);
    if (cls == class_index(RateDecision::Lower)) rate = std::max(0.0, rate - 0.25);
    if (cls == class_index(RateDecision::Raise)) rate = std::min(25.0, rate + 0.25);
    const Date date{std::chrono::year{2000 + month / 12}, std::chrono::month{static_cast<unsigned>(month % 12 + 1)},
                    std::chrono::day{1}};
    out.ffr.points.push_back({date, rate, decision_from_index(cls)});
  }
  return out;
}

}  // namespace fednlp
