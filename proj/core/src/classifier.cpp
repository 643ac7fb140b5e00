#include "fednlp/classifier.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "fednlp/errors.hpp"
#include "fednlp/random.hpp"
#include "fednlp/text.hpp"

namespace fednlp {

using nlohmann::json;

Prediction make_prediction(const ClassScores& probs) noexcept {
  Prediction p;
  p.probs = probs;
  std::size_t best = 0;
  for (std::size_t k = 1; k < kNumClasses; ++k) {
    if (probs[k] > probs[best]) best = k;
  }
  p.label = static_cast<RateDecision>(best);
  return p;
}

Prediction GbdtModel::predict_vector(const SparseVector& x) const {
  return make_prediction(ensemble_.predict_proba(x));
}

Prediction GbdtModel::predict_tokens(std::span<const std::string> tokens) const {
  if (tokens.empty()) throw EmptyDocument();
  return predict_vector(tfidf_.transform(tokens));
}

Prediction GbdtModel::predict_proba(const Document& doc) const { return predict_tokens(tokenize(doc.body)); }

GbdtModel train(std::span<const Document> docs, const GbdtConfig& cfg, const TfidfParams& tfidf_params,
                TrainReport* report) {
  cfg.validate();
  std::vector<const Document*> ordered;
  ordered.reserve(docs.size());
  std::set<int> classes;
  for (const auto& d : docs) {
    if (!d.label) throw InsufficientLabels("document \"" + d.id + "\" has no label");
    classes.insert(class_index(*d.label));
    ordered.push_back(&d);
  }
  if (classes.size() < 2) throw InsufficientLabels("training needs at least two distinct labels");
  std::sort(ordered.begin(), ordered.end(), [](const Document* a, const Document* b) { return a->id < b->id; });

  std::vector<std::vector<std::string>> tokens;
  tokens.reserve(ordered.size());
  for (const auto* d : ordered) tokens.push_back(tokenize(d->body));

  TfidfModel tfidf = TfidfModel::fit(tokens, tfidf_params);
  if (tfidf.size() == 0) throw DegenerateCorpus("vocabulary is empty after min_df filtering");

  FeatureMatrix x;
  x.n_features = tfidf.size();
  x.rows.reserve(tokens.size());
  for (const auto& t : tokens) x.rows.push_back(tfidf.transform(t));
  std::vector<int> labels;
  labels.reserve(ordered.size());
  for (const auto* d : ordered) labels.push_back(class_index(*d->label));

  BoostedEnsemble ensemble = fit_ensemble(x, labels, cfg, report);
  return GbdtModel(cfg, std::move(tfidf), std::move(ensemble));
}

EvalReport evaluate_predictions(std::span<const RateDecision> truth, std::span<const RateDecision> predicted) {
  if (truth.size() != predicted.size()) throw InvalidArgument("truth and predictions differ in length");
  EvalReport r;
  r.total = truth.size();
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++r.confusion[static_cast<std::size_t>(class_index(truth[i]))][static_cast<std::size_t>(class_index(predicted[i]))];
  }
  std::size_t correct = 0;
  for (std::size_t k = 0; k < kNumClasses; ++k) correct += r.confusion[k][k];
  r.accuracy = r.total ? static_cast<double>(correct) / static_cast<double>(r.total) : 0.0;

  double weighted = 0.0;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    std::size_t support = 0, predicted_k = 0;
    for (std::size_t j = 0; j < kNumClasses; ++j) {
      support += r.confusion[k][j];
      predicted_k += r.confusion[j][k];
    }
    const auto tp = static_cast<double>(r.confusion[k][k]);
    auto& m = r.per_class[k];
    m.support = support;
    m.precision = predicted_k ? tp / static_cast<double>(predicted_k) : 0.0;
    m.recall = support ? tp / static_cast<double>(support) : 0.0;
    m.f1 = (m.precision + m.recall) > 0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    weighted += m.f1 * static_cast<double>(support);
  }
  r.weighted_f1 = r.total ? weighted / static_cast<double>(r.total) : 0.0;
  return r;
}

EvalReport evaluate(const GbdtModel& model, std::span<const Document> docs) {
  std::vector<RateDecision> truth, predicted;
  for (const auto& d : docs) {
    if (!d.label) throw InvalidArgument("document \"" + d.id + "\" has no label");
    truth.push_back(*d.label);
    predicted.push_back(model.predict_proba(d).label);
  }
  return evaluate_predictions(truth, predicted);
}

namespace {

double round4(double v) { return std::round(v * 1e4) / 1e4; }

}  // namespace

void to_json(json& j, const Prediction& p) {
  j = {{"label", std::string(to_string(p.label))},
       {"probs",
        {{"lower", p.probs[0]}, {"maintain", p.probs[1]}, {"raise", p.probs[2]}}}};
}

void to_json(json& j, const EvalReport& r) {
  json per_class = json::object();
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    const auto& m = r.per_class[k];
    per_class[std::string(to_string(static_cast<RateDecision>(k)))] = {
        {"precision", round4(m.precision)}, {"recall", round4(m.recall)}, {"f1", round4(m.f1)}, {"support", m.support}};
  }
  json confusion = json::array();
  for (const auto& row : r.confusion) confusion.push_back(row);
  j = {{"accuracy", round4(r.accuracy)},
       {"weighted_f1", round4(r.weighted_f1)},
       {"per_class", per_class},
       {"confusion", confusion},
       {"total", r.total}};
}

std::string format_eval_table(const EvalReport& r) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %10s %10s %10s %8s\n", "class", "precision", "recall", "f1", "support");
  out += line;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    const auto& m = r.per_class[k];
    std::snprintf(line, sizeof line, "%-10s %10.4f %10.4f %10.4f %8zu\n",
                  std::string(to_string(static_cast<RateDecision>(k))).c_str(), round4(m.precision), round4(m.recall),
                  round4(m.f1), m.support);
    out += line;
  }
  std::snprintf(line, sizeof line, "%-10s %10.4f\n", "accuracy", round4(r.accuracy));
  out += line;
  std::snprintf(line, sizeof line, "%-10s %10.4f\n", "weighted", round4(r.weighted_f1));
  out += line;
  std::snprintf(line, sizeof line, "%-10s %10zu\n", "total", r.total);
  out += line;
  return out;
}

void to_json(json& j, const GbdtConfig& c) {
  j = {{"n_rounds", c.n_rounds},
       {"learning_rate", c.learning_rate},
       {"max_depth", c.max_depth},
       {"min_leaf_samples", c.min_leaf_samples},
       {"l2_leaf_reg", c.l2_leaf_reg},
       {"feature_subsample", c.feature_subsample},
       {"seed", c.seed}};
}

void from_json(const json& j, GbdtConfig& c) {
  c.n_rounds = j.value("n_rounds", c.n_rounds);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.max_depth = j.value("max_depth", c.max_depth);
  c.min_leaf_samples = j.value("min_leaf_samples", c.min_leaf_samples);
  c.l2_leaf_reg = j.value("l2_leaf_reg", c.l2_leaf_reg);
  c.feature_subsample = j.value("feature_subsample", c.feature_subsample);
  c.seed = j.value("seed", c.seed);
}

// ---------------------------------------------------------------------------
// Binary artifact

namespace {

constexpr char kMagic[8] = {'F', 'E', 'D', 'N', 'L', 'P', 'G', 'B'};
constexpr std::size_t kHeaderSize = 4 + sizeof kMagic + 8;

class Writer {
 public:
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf_.append(s);
  }
  std::string& bytes() { return buf_; }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const auto n = u32();
    need(n);
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  bool at_end() const noexcept { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw IoError("corrupt model artifact: payload ends early");
  }
  std::uint64_t get(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

std::string encode_payload(const GbdtModel& model) {
  Writer w;
  const auto& c = model.config();
  w.u64(c.n_rounds);
  w.f64(c.learning_rate);
  w.u64(c.max_depth);
  w.u64(c.min_leaf_samples);
  w.f64(c.l2_leaf_reg);
  w.f64(c.feature_subsample);
  w.u64(c.seed);

  const auto& t = model.tfidf();
  w.u64(t.n_docs());
  w.u64(t.params().min_df);
  w.u32(t.params().max_features ? 1 : 0);
  w.u64(t.params().max_features.value_or(0));
  w.u64(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    w.str(t.terms()[i]);
    w.u64(t.doc_freq()[i]);
  }

  const auto& e = model.ensemble();
  for (double b : e.base_scores) w.f64(b);
  w.f64(e.learning_rate);
  w.u64(e.rounds.size());
  for (const auto& round : e.rounds) {
    for (const auto& tree : round) {
      w.u32(static_cast<std::uint32_t>(tree.nodes.size()));
      for (const auto& n : tree.nodes) {
        w.i32(n.feature);
        w.f64(n.threshold);
        w.i32(n.left);
        w.i32(n.right);
        w.f64(n.value);
      }
    }
  }
  return std::move(w.bytes());
}

void validate_tree(const RegressionTree& tree, std::size_t n_features) {
  if (tree.nodes.empty()) throw IoError("corrupt model artifact: empty tree");
  const auto n = static_cast<std::int32_t>(tree.nodes.size());
  for (std::int32_t i = 0; i < n; ++i) {
    const auto& node = tree.nodes[static_cast<std::size_t>(i)];
    if (node.is_leaf()) {
      if (!std::isfinite(node.value)) throw IoError("corrupt model artifact: non-finite leaf value");
      continue;
    }
    if (static_cast<std::size_t>(node.feature) >= n_features) {
      throw IoError("corrupt model artifact: split feature outside vocabulary");
    }
    // Children always follow their parent, which rules out cycles.
    if (node.left <= i || node.right <= i || node.left >= n || node.right >= n) {
      throw IoError("corrupt model artifact: bad child index");
    }
  }
}

GbdtModel decode_payload(std::string_view payload) {
  Reader r(payload);
  GbdtConfig c;
  c.n_rounds = r.u64();
  c.learning_rate = r.f64();
  c.max_depth = r.u64();
  c.min_leaf_samples = r.u64();
  c.l2_leaf_reg = r.f64();
  c.feature_subsample = r.f64();
  c.seed = r.u64();

  const auto n_docs = r.u64();
  TfidfParams params;
  params.min_df = r.u64();
  const bool has_max = r.u32() != 0;
  const auto max_features = r.u64();
  params.max_features = has_max ? std::optional<std::size_t>(max_features) : std::nullopt;
  const auto n_terms = r.u64();
  if (n_terms > payload.size()) throw IoError("corrupt model artifact: vocabulary size");
  std::vector<std::string> terms;
  std::vector<std::size_t> doc_freq;
  terms.reserve(n_terms);
  doc_freq.reserve(n_terms);
  for (std::uint64_t i = 0; i < n_terms; ++i) {
    terms.push_back(r.str());
    doc_freq.push_back(r.u64());
  }
  TfidfModel tfidf;
  try {
    tfidf = TfidfModel::from_parts(std::move(terms), std::move(doc_freq), n_docs, params);
  } catch (const InvalidArgument& e) {
    throw IoError(std::string("corrupt model artifact: ") + e.what());
  }

  BoostedEnsemble e;
  for (auto& b : e.base_scores) b = r.f64();
  e.learning_rate = r.f64();
  const auto n_rounds = r.u64();
  if (n_rounds > payload.size()) throw IoError("corrupt model artifact: round count");
  e.rounds.resize(n_rounds);
  for (auto& round : e.rounds) {
    for (auto& tree : round) {
      const auto n_nodes = r.u32();
      if (n_nodes > payload.size()) throw IoError("corrupt model artifact: node count");
      tree.nodes.resize(n_nodes);
      for (auto& n : tree.nodes) {
        n.feature = r.i32();
        n.threshold = r.f64();
        n.left = r.i32();
        n.right = r.i32();
        n.value = r.f64();
      }
      validate_tree(tree, tfidf.size());
    }
  }
  if (!r.at_end()) throw IoError("corrupt model artifact: trailing bytes");
  try {
    c.validate();
  } catch (const InvalidArgument& ex) {
    throw IoError(std::string("corrupt model artifact: ") + ex.what());
  }
  return GbdtModel(c, std::move(tfidf), std::move(e));
}

}  // namespace

std::string serialize_model(const GbdtModel& model) {
  const std::string payload = encode_payload(model);
  Writer w;
  w.u32(kModelFormatVersion);
  w.bytes().append(kMagic, sizeof kMagic);
  w.u64(payload.size());
  w.bytes().append(payload);
  w.u64(fnv1a64(payload));
  return std::move(w.bytes());
}

GbdtModel deserialize_model(std::string_view bytes) {
  if (bytes.size() < kHeaderSize) throw IoError("model artifact truncated: header incomplete");
  Reader header(bytes.substr(0, kHeaderSize));
  const auto version = header.u32();
  if (std::memcmp(bytes.data() + 4, kMagic, sizeof kMagic) != 0) throw IoError("not a fednlp model artifact");
  if (version != kModelFormatVersion) throw VersionError(version, kModelFormatVersion);
  Reader rest(bytes.substr(4 + sizeof kMagic, 8));
  const auto length = rest.u64();
  if (bytes.size() - kHeaderSize < 8 || bytes.size() - kHeaderSize - 8 < length) {
    throw IoError("model artifact truncated: payload incomplete");
  }
  if (bytes.size() - kHeaderSize - 8 != length) throw IoError("corrupt model artifact: trailing bytes");
  const auto payload = bytes.substr(kHeaderSize, length);
  Reader tail(bytes.substr(kHeaderSize + length, 8));
  if (tail.u64() != fnv1a64(payload)) throw IoError("corrupt model artifact: checksum mismatch");
  return decode_payload(payload);
}

void save_model(const GbdtModel& model, const std::filesystem::path& path) {
  write_file(path, serialize_model(model));
}

GbdtModel load_model(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  try {
    return deserialize_model(bytes);
  } catch (const VersionError&) {
    throw;
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::string model_version_tag(const GbdtModel& model) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%u-%016llx", kModelFormatVersion,
                static_cast<unsigned long long>(fnv1a64(encode_payload(model))));
  return buf;
}

}  // namespace fednlp
