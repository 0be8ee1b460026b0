#include "rankvec/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <concepts>
#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "rankvec/bench.hpp"
#include "rankvec/corpus.hpp"
#include "rankvec/encoder.hpp"
#include "rankvec/error.hpp"
#include "rankvec/evaluation.hpp"
#include "rankvec/parallel.hpp"
#include "rankvec/textio.hpp"
#include "rankvec/toy.hpp"
#include "rankvec/training.hpp"

namespace rankvec::cli {

namespace {

std::string env_name(const std::string& flag) {
  std::string out = "RANKVEC_";
  for (char c : flag)
    out.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return out;
}

std::string show(const std::string& v) { return v; }
std::string show(double v) { return format_real(v); }
template <std::integral T>
std::string show(T v) {
  return std::to_string(v);
}

// Options of one subcommand, remembered so the resolved values can be
// echoed before any work starts.
class Flags {
 public:
  explicit Flags(CLI::App* app) : app_(app) {}

  template <typename T>
  CLI::Option* add(const std::string& name, T& var, const std::string& desc) {
    auto* opt = app_->add_option("--" + name, var, desc);
    opt->envname(env_name(name));
    opt->capture_default_str();
    values_.emplace_back(name, [&var] { return show(var); });
    return opt;
  }

  CLI::App* app() const { return app_; }

  void print(std::ostream& err) const {
    for (const auto& [name, value] : values_)
      err << "# config " << app_->get_name() << "." << name << "=" << value() << '\n';
  }

 private:
  CLI::App* app_;
  std::vector<std::pair<std::string, std::function<std::string()>>> values_;
};

std::vector<double> parse_edges(const std::string& spec) {
  std::vector<double> edges;
  for (auto field : split(spec, ',')) edges.push_back(parse_real(field, "edge list"));
  return edges;
}

std::string optional_real(const std::optional<double>& v) {
  return v ? format_real(*v) : std::string("NA");
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

struct Options {
  std::size_t threads = std::max(1u, std::thread::hardware_concurrency());

  ToyConfig toy;
  std::string toy_corpus_out, toy_pairs_out;

  std::string corpus, encoder = "hash-ngram", model, model_out, out, index;
  std::size_t dim = kDefaultDim, features = kDefaultFeatures;
  std::uint64_t seed = 0;

  TrainConfig train;
  std::string base_model, loss_log;

  std::string dataset, pairs;
  double lambda_inf = kDefaultLambdaInf;
  double scale = kDefaultGoldScale;
  std::string edges = "0,0.3333333333333333,0.6666666666666666,1";
  std::string groups = "-1,0.2,0.4,0.6,0.8,1";
  std::size_t k = 100;
  double positive_threshold = 0.8;

  std::size_t bench_batch = 16, repeats = 5;
};

std::unique_ptr<Encoder> encoder_from_model(const std::string& path) {
  return std::make_unique<HashNgramEncoder>(load_model(path));
}

void check_index_matches(const CorpusIndex& index, const Encoder& enc,
                         const std::string& index_path) {
  try {
    require_same_encoder(index, enc);
  } catch (const DataError& e) {
    throw DataError(index_path + ": " + e.what());
  }
}

int cmd_gen_toy(const Options& o, std::ostream& out) {
  const auto data = generate_toy(o.toy);
  write_toy(data, o.toy_corpus_out, o.toy_pairs_out);
  out << "corpus_sentences," << data.corpus.size() << '\n'
      << "pairs," << data.pairs.size() << '\n';
  return kExitOk;
}

int cmd_index(const Options& o, std::ostream& out, std::ostream& err) {
  std::unique_ptr<Encoder> enc;
  const std::string precomputed = "precomputed:";
  if (o.encoder == "hash-ngram") {
    if (!o.model.empty()) {
      enc = encoder_from_model(o.model);
    } else {
      auto params = EncoderParams::initialize(o.dim, o.features, o.seed);
      if (!o.model_out.empty()) save_model(params, o.model_out);
      enc = std::make_unique<HashNgramEncoder>(std::move(params));
    }
  } else if (o.encoder.rfind(precomputed, 0) == 0) {
    if (!o.model.empty() || !o.model_out.empty())
      throw UsageError("--model/--model-out apply only to the hash-ngram encoder");
    enc = std::make_unique<PrecomputedEncoder>(
        load_precomputed(o.encoder.substr(precomputed.size())));
  } else {
    throw UsageError("unknown encoder \"" + o.encoder +
                     "\" (expected hash-ngram or precomputed:PATH)");
  }
  std::vector<std::string> warnings;
  const auto index = build_index(std::filesystem::path(o.corpus), *enc, &warnings);
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  save_index(index, o.out);
  out << "sentences," << index.size() << '\n'
      << "dim," << index.dim() << '\n'
      << "fingerprint," << index.fingerprint() << '\n';
  return kExitOk;
}

int cmd_train(const Options& o, std::ostream& out) {
  o.train.validate();
  const auto index = load_index(o.index);
  std::unique_ptr<Encoder> base;
  if (!o.base_model.empty()) base = encoder_from_model(o.base_model);
  else base = std::make_unique<IndexLookupEncoder>(index);
  check_index_matches(index, *base, o.index);
  const auto result = train(std::filesystem::path(o.corpus), index, *base, o.train);
  save_model(result.params, o.out);
  if (!o.loss_log.empty()) write_loss_log(result.trace, std::filesystem::path(o.loss_log));
  out << "steps," << result.trace.size() << '\n';
  if (!result.trace.empty()) {
    out << "initial_l_total," << format_real(result.trace.front().l_total) << '\n'
        << "final_l_total," << format_real(result.trace.back().l_total) << '\n';
  }
  out << "fingerprint," << result.params.fingerprint() << '\n';
  return kExitOk;
}

struct Loaded {
  std::unique_ptr<Encoder> encoder;
  CorpusIndex index;
};

Loaded load_model_and_index(const Options& o) {
  auto enc = encoder_from_model(o.model);
  auto index = load_index(o.index);
  check_index_matches(index, *enc, o.index);
  return {std::move(enc), std::move(index)};
}

int cmd_score(const Options& o, std::ostream& out) {
  InferenceConfig cfg{o.lambda_inf};
  cfg.validate();
  const auto pairs = load_pairs(o.pairs, o.scale, false);
  const auto loaded = load_model_and_index(o);
  const RankModel model(loaded.index, *loaded.encoder);
  const auto pred = predict(pairs, blended_scorer(model, cfg));
  out << "pair,predicted\n";
  for (std::size_t i = 0; i < pred.size(); ++i) out << i << ',' << format_real(pred[i]) << '\n';
  return kExitOk;
}

int cmd_eval(const Options& o, std::ostream& out) {
  InferenceConfig cfg{o.lambda_inf};
  cfg.validate();
  const auto data = load_pairs(o.dataset, o.scale);
  const auto loaded = load_model_and_index(o);
  const RankModel model(loaded.index, *loaded.encoder);
  const double rho = evaluate(data, blended_scorer(model, cfg));
  out << "pairs,spearman\n" << data.size() << ',' << format_real(rho) << '\n';
  return kExitOk;
}

int cmd_buckets(const Options& o, std::ostream& out) {
  InferenceConfig cfg{o.lambda_inf};
  cfg.validate();
  const auto edges = parse_edges(o.edges);
  const auto data = load_pairs(o.dataset, o.scale);
  const auto loaded = load_model_and_index(o);
  const RankModel model(loaded.index, *loaded.encoder);
  out << "lo,hi,count,spearman\n";
  for (const auto& b : bucket_evaluate(data, blended_scorer(model, cfg), edges))
    out << format_real(b.lo) << ',' << format_real(b.hi) << ',' << b.count << ','
        << optional_real(b.spearman) << '\n';
  return kExitOk;
}

int cmd_overlap(const Options& o, std::ostream& out) {
  const auto groups = parse_edges(o.groups);
  const auto data = load_pairs(o.dataset, o.scale);
  const auto loaded = load_model_and_index(o);
  const RankModel model(loaded.index, *loaded.encoder);
  const std::vector<PairScorer> scorers{cosine_scorer(*loaded.encoder), rank_scorer(model)};
  out << "lo,hi,count,mean_overlap,spearman_cosine,spearman_rank\n";
  for (const auto& g : overlap_analysis(data, loaded.index, *loaded.encoder, o.k, groups, scorers))
    out << format_real(g.lo) << ',' << format_real(g.hi) << ',' << g.count << ','
        << format_real(g.mean_overlap) << ',' << optional_real(g.spearman[0]) << ','
        << optional_real(g.spearman[1]) << '\n';
  return kExitOk;
}

int cmd_uniformity(const Options& o, std::ostream& out) {
  const auto data = load_pairs(o.dataset, o.scale);
  const auto loaded = load_model_and_index(o);
  const RankModel model(loaded.index, *loaded.encoder);

  std::map<std::string, std::size_t> slot;
  std::vector<Sentence> unique;
  auto intern = [&](const Sentence& s) {
    auto [it, inserted] = slot.emplace(s.text, unique.size());
    if (inserted) unique.push_back(s);
    return it->second;
  };
  std::vector<std::pair<std::size_t, std::size_t>> positives;
  for (const auto& p : data) {
    const std::size_t a = intern(p.s1);
    const std::size_t b = intern(p.s2);
    if (p.gold_normalized >= o.positive_threshold) positives.emplace_back(a, b);
  }
  std::vector<std::vector<double>> emb(unique.size()), rank(unique.size());
  parallel_for(unique.size(), [&](std::size_t i) {
    const auto e = loaded.encoder->encode(unique[i]);
    emb[i].assign(e.values().begin(), e.values().end());
    const auto u = rank_vector(loaded.index, e);
    rank[i].assign(u.values.values().begin(), u.values.values().end());
  });
  const auto base = uniformity_alignment(emb, positives);
  const auto ranked = uniformity_alignment(rank, positives);
  out << "representation,uniformity,alignment\n"
      << "embedding," << format_real(base.uniformity) << ',' << format_real(base.alignment) << '\n'
      << "rank_vector," << format_real(ranked.uniformity) << ','
      << format_real(ranked.alignment) << '\n';
  return kExitOk;
}

int cmd_bench(const Options& o, std::ostream& out) {
  const auto index = load_index(o.index);
  out << "stage,rows,cols,seconds\n";
  for (const auto& r : bench(index, o.bench_batch, o.repeats))
    out << r.stage << ',' << r.rows << ',' << r.cols << ',' << format_real(r.seconds) << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  Options o;
  CLI::App app{"rankvec: corpus-anchored sentence similarity with rank vectors", "rankvec"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.add_option("--threads", o.threads,
                 "worker threads for library fan-out (1 = reference serial path)")
      ->envname("RANKVEC_THREADS")
      ->capture_default_str();

  std::vector<Flags> flags;
  flags.reserve(16);

  auto* gen = app.add_subcommand("gen-toy", "write a synthetic clustered corpus and STS-style pairs");
  auto& fg = flags.emplace_back(gen);
  fg.add("seed", o.toy.seed, "generator seed");
  fg.add("clusters", o.toy.clusters, "number of clusters");
  fg.add("per-cluster", o.toy.per_cluster, "corpus sentences per cluster");
  fg.add("vocab", o.toy.vocab, "content words per cluster");
  fg.add("pairs", o.toy.pairs, "evaluation pairs");
  fg.add("content-words", o.toy.content_words, "content words per sentence");
  fg.add("neighbor-rate", o.toy.neighbor_rate,
         "probability a content word comes from a neighbouring cluster");
  fg.add("filler-words", o.toy.filler_words, "filler words per sentence");
  fg.add("filler-vocab", o.toy.filler_vocab, "size of the shared filler pool");
  fg.add("function-words", o.toy.function_words, "function words present in every sentence");
  fg.add("corpus-out", o.toy_corpus_out, "corpus output path")->required();
  fg.add("pairs-out", o.toy_pairs_out, "pairs TSV output path")->required();

  auto* idx = app.add_subcommand("index", "encode a corpus and persist the index");
  auto& fi = flags.emplace_back(idx);
  fi.add("corpus", o.corpus, "corpus file, one sentence per line")->required();
  fi.add("encoder", o.encoder, "hash-ngram or precomputed:PATH (.rkv/.tsv)");
  fi.add("model", o.model, "hash-ngram model file to encode with (default: fresh init)");
  fi.add("dim", o.dim, "embedding dimension for a fresh hash-ngram encoder");
  fi.add("features", o.features, "hashed trigram buckets for a fresh encoder");
  fi.add("seed", o.seed, "initialization seed for a fresh encoder");
  fi.add("model-out", o.model_out, "also write the fresh encoder's parameters here");
  fi.add("out", o.out, "index output path")->required();

  auto* tr = app.add_subcommand("train", "train a fresh encoder against rank-vector targets");
  auto& ft = flags.emplace_back(tr);
  ft.add("corpus", o.corpus, "training sentences, one per line")->required();
  ft.add("index", o.index, "index built by the base encoder")->required();
  ft.add("base-model", o.base_model,
         "base encoder model (default: look sentences up in the index)");
  ft.add("batch-size", o.train.batch_size, "sentences per batch");
  ft.add("tau", o.train.temperature, "contrastive temperature");
  ft.add("lambda-train", o.train.lambda_train, "rank loss weight in the hinge");
  ft.add("tau-l", o.train.tau_l, "lower rank-similarity filter threshold");
  ft.add("tau-u", o.train.tau_u, "upper rank-similarity filter threshold");
  ft.add("dropout", o.train.dropout_rate, "feature dropout for positives");
  ft.add("lr", o.train.learning_rate, "gradient descent step size");
  ft.add("epochs", o.train.epochs, "passes over the corpus");
  ft.add("seed", o.train.seed, "initialization, shuffling, and dropout seed");
  ft.add("dim", o.train.dim, "embedding dimension of the trained encoder");
  ft.add("features", o.train.features, "hashed trigram buckets");
  ft.add("out", o.out, "model output path")->required();
  ft.add("loss-log", o.loss_log, "per-step loss CSV output path");

  auto* sc = app.add_subcommand("score", "print the blended similarity of each pair");
  auto& fs = flags.emplace_back(sc);
  fs.add("model", o.model, "encoder model")->required();
  fs.add("index", o.index, "index built by the same model")->required();
  fs.add("pairs", o.pairs, "TSV of sentence1<TAB>sentence2[<TAB>gold]")->required();
  fs.add("lambda-inf", o.lambda_inf, "rank-similarity weight at inference");
  fs.add("scale", o.scale, "maximum gold score");

  auto* ev = app.add_subcommand("eval", "Spearman correlation of blended scores with gold");
  auto& fe = flags.emplace_back(ev);
  fe.add("dataset", o.dataset, "TSV of sentence1<TAB>sentence2<TAB>gold")->required();
  fe.add("model", o.model, "encoder model")->required();
  fe.add("index", o.index, "index built by the same model")->required();
  fe.add("lambda-inf", o.lambda_inf, "rank-similarity weight at inference");
  fe.add("scale", o.scale, "maximum gold score");

  auto* an = app.add_subcommand("analyze", "similarity-bucket, neighbor-overlap, and uniformity analyses");
  an->require_subcommand(1);
  auto* bu = an->add_subcommand("buckets", "per-gold-bucket Spearman (CSV: lo,hi,count,spearman)");
  auto& fb = flags.emplace_back(bu);
  fb.add("dataset", o.dataset, "STS TSV")->required();
  fb.add("model", o.model, "encoder model")->required();
  fb.add("index", o.index, "index built by the same model")->required();
  fb.add("lambda-inf", o.lambda_inf, "rank-similarity weight at inference");
  fb.add("scale", o.scale, "maximum gold score");
  fb.add("edges", o.edges, "comma-separated normalized gold bucket edges");

  auto* ov = an->add_subcommand(
      "overlap",
      "neighbor overlap by base-cosine group (CSV: lo,hi,count,mean_overlap,spearman_cosine,spearman_rank)");
  auto& fo = flags.emplace_back(ov);
  fo.add("dataset", o.dataset, "STS TSV")->required();
  fo.add("model", o.model, "base encoder model")->required();
  fo.add("index", o.index, "index built by the same model")->required();
  fo.add("k", o.k, "neighbors per sentence");
  fo.add("groups", o.groups, "comma-separated base-cosine group edges");
  fo.add("scale", o.scale, "maximum gold score");

  auto* un = an->add_subcommand(
      "uniformity", "uniformity and alignment of embeddings vs rank vectors (CSV: representation,uniformity,alignment)");
  auto& fu = flags.emplace_back(un);
  fu.add("dataset", o.dataset, "STS TSV (sentences and positive pairs)")->required();
  fu.add("model", o.model, "encoder model")->required();
  fu.add("index", o.index, "index built by the same model")->required();
  fu.add("scale", o.scale, "maximum gold score");
  fu.add("positive-threshold", o.positive_threshold,
         "normalized gold at or above which a pair is positive");

  auto* be = app.add_subcommand("bench", "time per-batch rank-vector and similarity-matrix stages");
  auto& fbe = flags.emplace_back(be);
  fbe.add("index", o.index, "index to benchmark")->required();
  fbe.add("batch-size", o.bench_batch, "queries per batch");
  fbe.add("repeats", o.repeats, "timed repetitions");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    // Top-level help expands every subcommand so all defaults are visible.
    if (app.get_subcommands().empty()) out << app.help("", CLI::AppFormatMode::All);
    else app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error[usage]: " << one_line(e.what()) << '\n';
    return kExitUsage;
  }

  try {
    if (o.threads == 0) throw UsageError("threads must be positive");
    set_thread_count(o.threads);
    err << "# config threads=" << o.threads << '\n';
    for (const auto& f : flags)
      if (f.app()->parsed()) f.print(err);

    if (gen->parsed()) return cmd_gen_toy(o, out);
    if (idx->parsed()) return cmd_index(o, out, err);
    if (tr->parsed()) return cmd_train(o, out);
    if (sc->parsed()) return cmd_score(o, out);
    if (ev->parsed()) return cmd_eval(o, out);
    if (bu->parsed()) return cmd_buckets(o, out);
    if (ov->parsed()) return cmd_overlap(o, out);
    if (un->parsed()) return cmd_uniformity(o, out);
    if (be->parsed()) return cmd_bench(o, out);
    throw UsageError("no subcommand");
  } catch (const UsageError& e) {
    err << "error[usage]: " << one_line(e.what()) << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error[domain]: " << one_line(e.what()) << '\n';
    return kExitData;
  } catch (const DataError& e) {
    err << "error[data]: " << one_line(e.what()) << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error[data]: " << one_line(e.what()) << '\n';
    return kExitData;
  }
}

}  // namespace rankvec::cli
