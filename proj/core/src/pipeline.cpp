#include "teamscope/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <utility>

#include "json.hpp"

#include "teamscope/digest.hpp"
#include "teamscope/disruption.hpp"
#include "teamscope/errors.hpp"
#include "teamscope/io.hpp"
#include "teamscope/log.hpp"
#include "teamscope/parallel.hpp"
#include "teamscope/percentile.hpp"
#include "teamscope/rng.hpp"
#include "teamscope/table.hpp"
#include "teamscope/vectors.hpp"

namespace teamscope {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

fs::path resolve_against(const fs::path& base, const fs::path& p) {
  return p.is_absolute() ? p : base / p;
}

std::optional<double> parse_opt_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ParseError("bad numeric field: '" + s + "'");
  return v;
}

std::string opt_str(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string{};
}

RegressionSpec parse_model(const json& j, const std::string& where) {
  RegressionSpec spec;
  try {
    spec.name = j.at("name").get<std::string>();
    if (j.contains("family")) spec.family = parse_family(j.at("family").get<std::string>());
    spec.dependent = j.at("dependent").get<std::string>();
    for (const auto& r : j.at("regressors")) spec.regressors.push_back(r.get<std::string>());
    if (j.contains("squared"))
      for (const auto& r : j.at("squared")) spec.squared.push_back(r.get<std::string>());
    if (j.contains("interactions"))
      for (const auto& pair : j.at("interactions")) {
        if (!pair.is_array() || pair.size() != 2)
          throw ConfigError(where + ": interactions must be [a, b] pairs");
        spec.interactions.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
      }
    if (j.contains("year_effects")) spec.year_effects = j.at("year_effects").get<bool>();
    if (j.contains("category_effects"))
      spec.category_effects = j.at("category_effects").get<bool>();
    if (j.contains("cluster")) spec.cluster = j.at("cluster").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(where + ": bad model entry: " + e.what());
  }
  if (spec.name.empty()) throw ConfigError(where + ": model name must not be empty");
  return spec;
}

ordered_json model_to_json(const RegressionSpec& spec) {
  ordered_json j;
  j["name"] = spec.name;
  j["family"] = family_name(spec.family);
  j["dependent"] = spec.dependent;
  j["regressors"] = spec.regressors;
  j["squared"] = spec.squared;
  ordered_json inter = ordered_json::array();
  for (const auto& [a, b] : spec.interactions) inter.push_back(ordered_json::array({a, b}));
  j["interactions"] = std::move(inter);
  j["year_effects"] = spec.year_effects;
  j["category_effects"] = spec.category_effects;
  j["cluster"] = spec.cluster;
  return j;
}

const std::vector<std::string> kIndicatorColumns = {
    "intra_fp", "inter_fp", "uzzi",   "lee",  "foster",  "wang",  "shibayama",
    "citation_count", "di1", "di5", "di1nok", "dein", "breadth", "depth"};

std::vector<RegressionSpec> default_models() {
  RegressionSpec novelty;
  novelty.name = "novelty_quadratic";
  novelty.dependent = "uzzi_fw";
  novelty.regressors = {"intra_fp_fw", "inter_fp_fw"};
  novelty.squared = {"intra_fp_fw", "inter_fp_fw"};
  novelty.interactions = {{"share_exploratory", "share_exploitative"}};

  RegressionSpec impact = novelty;
  impact.name = "impact_quadratic";
  impact.dependent = "di1_fw";
  return {novelty, impact};
}

}  // namespace

RunConfig load_run_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ParseError(path.string() + ": expected a JSON object");
  const fs::path base = path.parent_path();
  RunConfig c;
  try {
    c.corpus = resolve_against(base, j.at("corpus").get<std::string>());
    c.journals = resolve_against(base, j.at("journals").get<std::string>());
    if (j.contains("labels") && !j.at("labels").is_null())
      c.labels = resolve_against(base, j.at("labels").get<std::string>());
    if (j.contains("vectors") && !j.at("vectors").is_null())
      c.vectors = resolve_against(base, j.at("vectors").get<std::string>());
    if (j.contains("out")) c.out = resolve_against(base, j.at("out").get<std::string>());
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("jobs")) c.jobs = j.at("jobs").get<int>();

    if (j.contains("filter")) {
      const auto& f = j.at("filter");
      if (f.contains("min_refs")) c.filter.min_refs = f.at("min_refs").get<int>();
      if (f.contains("min_mesh")) c.filter.min_mesh = f.at("min_mesh").get<int>();
      if (f.contains("min_authors")) c.filter.min_authors = f.at("min_authors").get<int>();
      if (f.contains("require_issn")) c.filter.require_issn = f.at("require_issn").get<bool>();
      if (f.contains("year_min") && !f.at("year_min").is_null())
        c.filter.year_min = f.at("year_min").get<int>();
      if (f.contains("year_max") && !f.at("year_max").is_null())
        c.filter.year_max = f.at("year_max").get<int>();
    }
    if (j.contains("embed_dim")) c.embed_dim = j.at("embed_dim").get<int>();

    if (j.contains("cognitive")) {
      const auto& g = j.at("cognitive");
      if (g.contains("b")) c.cognitive.b = g.at("b").get<int>();
      if (g.contains("q")) c.cognitive.q = g.at("q").get<double>();
      if (g.contains("exclude_shared_doc_pairs"))
        c.cognitive.exclude_shared_doc_pairs = g.at("exclude_shared_doc_pairs").get<bool>();
      if (g.contains("exploratory_q")) c.exploratory_q = g.at("exploratory_q").get<double>();
      if (g.contains("exploitative_q")) c.exploitative_q = g.at("exploitative_q").get<double>();
      if (g.contains("min_scores"))
        c.min_threshold_scores = g.at("min_scores").get<std::size_t>();
    }

    if (j.contains("entity_kind"))
      c.entity_kind = parse_entity_kind(j.at("entity_kind").get<std::string>());
    if (j.contains("null_model")) {
      const auto& n = j.at("null_model");
      if (n.contains("resamples")) c.null_model.resamples = n.at("resamples").get<int>();
      if (n.contains("swap_factor")) c.null_model.swap_factor = n.at("swap_factor").get<int>();
    }
    if (j.contains("partition_resolution"))
      c.partition_resolution = j.at("partition_resolution").get<double>();

    if (j.contains("novelty")) {
      const auto& n = j.at("novelty");
      if (n.contains("uzzi_q")) c.uzzi_q = n.at("uzzi_q").get<double>();
      if (n.contains("uzzi_mean")) c.uzzi_mean = n.at("uzzi_mean").get<bool>();
      if (n.contains("lee_q")) c.lee_q = n.at("lee_q").get<double>();
      if (n.contains("wang")) {
        const auto& w = n.at("wang");
        if (w.contains("reuse_window")) c.wang.reuse_window = w.at("reuse_window").get<int>();
        if (w.contains("min_reuse")) c.wang.min_reuse = w.at("min_reuse").get<int>();
        if (w.contains("profile_window"))
          c.wang.profile_window = w.at("profile_window").get<int>();
      }
      if (n.contains("shibayama_mean")) c.shibayama_mean = n.at("shibayama_mean").get<bool>();
      if (n.contains("shibayama_q")) c.shibayama_q = n.at("shibayama_q").get<double>();
    }

    if (j.contains("horizon") && !j.at("horizon").is_null())
      c.horizon = j.at("horizon").get<int>();

    if (j.contains("fw_columns"))
      for (const auto& col : j.at("fw_columns")) c.fw_columns.push_back(col.get<std::string>());
    if (j.contains("bins")) c.bins = j.at("bins").get<int>();
    if (j.contains("models"))
      for (const auto& m : j.at("models")) c.models.push_back(parse_model(m, path.string()));
    if (j.contains("surfaces"))
      for (const auto& s : j.at("surfaces")) {
        if (!s.is_array() || s.size() != 3)
          throw ConfigError(path.string() + ": surfaces must be [x, y, z] triples");
        c.surfaces.push_back(
            {s[0].get<std::string>(), s[1].get<std::string>(), s[2].get<std::string>()});
      }
    if (j.contains("correlogram_columns"))
      for (const auto& col : j.at("correlogram_columns"))
        c.correlogram_columns.push_back(col.get<std::string>());
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return c;
}

std::string run_config_to_json(const RunConfig& c) {
  ordered_json j;
  j["corpus"] = c.corpus.string();
  j["journals"] = c.journals.string();
  j["labels"] = c.labels ? json(c.labels->string()) : json(nullptr);
  j["vectors"] = c.vectors ? json(c.vectors->string()) : json(nullptr);
  j["out"] = c.out.string();
  j["seed"] = c.seed;
  j["jobs"] = c.jobs;
  j["filter"] = {{"min_refs", c.filter.min_refs},
                 {"min_mesh", c.filter.min_mesh},
                 {"min_authors", c.filter.min_authors},
                 {"require_issn", c.filter.require_issn},
                 {"year_min", c.filter.year_min ? json(*c.filter.year_min) : json(nullptr)},
                 {"year_max", c.filter.year_max ? json(*c.filter.year_max) : json(nullptr)}};
  j["embed_dim"] = c.embed_dim;
  j["cognitive"] = {{"b", c.cognitive.b},
                    {"q", c.cognitive.q},
                    {"exclude_shared_doc_pairs", c.cognitive.exclude_shared_doc_pairs},
                    {"exploratory_q", c.exploratory_q},
                    {"exploitative_q", c.exploitative_q},
                    {"min_scores", c.min_threshold_scores}};
  j["entity_kind"] = entity_kind_name(c.entity_kind);
  j["null_model"] = {{"resamples", c.null_model.resamples},
                     {"swap_factor", c.null_model.swap_factor}};
  j["partition_resolution"] = c.partition_resolution;
  j["novelty"] = {{"uzzi_q", c.uzzi_q},
                  {"uzzi_mean", c.uzzi_mean},
                  {"lee_q", c.lee_q},
                  {"wang",
                   {{"reuse_window", c.wang.reuse_window},
                    {"min_reuse", c.wang.min_reuse},
                    {"profile_window", c.wang.profile_window}}},
                  {"shibayama_mean", c.shibayama_mean},
                  {"shibayama_q", c.shibayama_q}};
  j["horizon"] = c.horizon ? json(*c.horizon) : json(nullptr);
  j["fw_columns"] = c.fw_columns;
  j["bins"] = c.bins;
  ordered_json models = ordered_json::array();
  for (const auto& m : c.models.empty() ? default_models() : c.models)
    models.push_back(model_to_json(m));
  j["models"] = std::move(models);
  ordered_json surfaces = ordered_json::array();
  for (const auto& s : c.surfaces)
    surfaces.push_back(ordered_json::array({s[0], s[1], s[2]}));
  j["surfaces"] = std::move(surfaces);
  j["correlogram_columns"] = c.correlogram_columns;
  return j.dump(2) + "\n";
}

namespace {

struct StageOutcome {
  std::int64_t rows = 0;
  std::vector<fs::path> outputs;
};

class PipelineRunner {
 public:
  PipelineRunner(const RunConfig& config, bool force, std::string until)
      : cfg_(config),
        force_(force),
        until_(std::move(until)),
        out_(config.out),
        stamps_(config.out / ".stamps") {
    jobs_ = cfg_.jobs > 0 ? cfg_.jobs
                          : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    config_echo_ = run_config_to_json(cfg_);
    config_digest_ = sha256_hex(config_echo_);
  }

  RunResult run() {
    RunResult result;
    const std::vector<std::pair<std::string, void (PipelineRunner::*)()>> stages = {
        {"ingest", &PipelineRunner::stage_ingest},
        {"embed", &PipelineRunner::stage_embed},
        {"cooc", &PipelineRunner::stage_cooc},
        {"cognitive", &PipelineRunner::stage_cognitive},
        {"novelty", &PipelineRunner::stage_novelty},
        {"disruption", &PipelineRunner::stage_disruption},
        {"normalize", &PipelineRunner::stage_normalize},
        {"regress", &PipelineRunner::stage_regress},
        {"report", &PipelineRunner::stage_report}};
    try {
      if (!until_.empty()) {
        bool known = false;
        for (const auto& [name, fn] : stages) known = known || name == until_;
        if (!known) throw ConfigError("unknown stage: " + until_);
      }
      check_inputs();
      fs::create_directories(out_);
      fs::create_directories(stamps_);
      for (const auto& [name, fn] : stages) {
        (this->*fn)();
        if (name == until_) break;
      }
    } catch (const std::exception& e) {
      result.exit_code = 1;
      result.error = e.what();
      log_error("run failed: ", e.what());
    }
    result.stages = reports_;
    write_manifest(result);
    return result;
  }

 private:
  // ---- bookkeeping --------------------------------------------------------

  void check_inputs() const {
    auto require = [](const fs::path& p, const char* what) {
      if (!fs::exists(p))
        throw ConfigError(std::string(what) + " not found: " + p.string());
    };
    require(cfg_.corpus, "corpus");
    require(cfg_.journals, "journals");
    if (cfg_.labels) require(*cfg_.labels, "labels");
    if (cfg_.vectors) require(*cfg_.vectors, "vectors");
  }

  std::map<std::string, std::string> digest_inputs(const std::vector<fs::path>& inputs) const {
    std::map<std::string, std::string> d;
    d["<config>"] = config_digest_;
    for (const auto& p : inputs) d[p.string()] = sha256_file(p);
    return d;
  }

  fs::path stamp_path(const std::string& stage) const { return stamps_ / (stage + ".json"); }

  bool can_skip(const std::string& stage, const std::vector<std::string>& upstream,
                const std::map<std::string, std::string>& inputs, json* stamp_out) const {
    if (force_) return false;
    for (const auto& u : upstream) {
      auto it = reran_.find(u);
      if (it == reran_.end() || it->second) return false;
    }
    const fs::path sp = stamp_path(stage);
    if (!fs::exists(sp)) return false;
    json stamp;
    try {
      stamp = json::parse(read_text_file(sp));
    } catch (const std::exception&) {
      return false;
    }
    if (!stamp.contains("inputs") || !stamp.contains("outputs")) return false;
    json want(inputs);
    if (stamp.at("inputs") != want) return false;
    for (const auto& [path, digest] : stamp.at("outputs").items()) {
      if (!fs::exists(path)) return false;
      if (sha256_file(path) != digest.get<std::string>()) return false;
    }
    if (stamp_out) *stamp_out = std::move(stamp);
    return true;
  }

  void quarantine(const std::string& stage, const std::vector<fs::path>& declared) {
    const fs::path dir = out_ / "failed" / stage;
    std::error_code ec;
    fs::create_directories(dir, ec);
    for (const auto& p : declared) {
      if (!fs::exists(p)) continue;
      fs::path target = dir / p.filename();
      fs::remove_all(target, ec);
      fs::rename(p, target, ec);
      if (ec) log_warn("could not quarantine ", p.string(), ": ", ec.message());
    }
    fs::remove(stamp_path(stage), ec);
  }

  // Runs one stage with digest-based resume. `declared` lists the outputs
  // (files or directories) to pull into failed/<stage>/ if the body throws.
  void execute(const std::string& stage, const std::vector<std::string>& upstream,
               const std::vector<fs::path>& inputs, const std::vector<fs::path>& declared,
               const std::function<StageOutcome()>& body) {
    auto input_digests = digest_inputs(inputs);
    json stamp;
    if (can_skip(stage, upstream, input_digests, &stamp)) {
      StageReport r;
      r.name = stage;
      r.skipped = true;
      r.rows = stamp.value("rows", std::int64_t{0});
      reports_.push_back(r);
      reran_[stage] = false;
      log_info("stage ", stage, ": up to date, skipped");
      return;
    }

    log_info("stage ", stage, ": running");
    auto t0 = std::chrono::steady_clock::now();
    StageOutcome outcome;
    try {
      outcome = body();
    } catch (...) {
      quarantine(stage, declared);
      reran_[stage] = true;
      try {
        throw;
      } catch (const std::exception& e) {
        throw ComputeError("stage " + stage + " failed: " + e.what());
      }
    }
    auto t1 = std::chrono::steady_clock::now();

    ordered_json record;
    record["stage"] = stage;
    record["inputs"] = json(input_digests);
    ordered_json outs;
    for (const auto& p : outcome.outputs) outs[p.string()] = sha256_file(p);
    record["outputs"] = std::move(outs);
    record["rows"] = outcome.rows;
    atomic_write_file(stamp_path(stage), record.dump(2) + "\n");

    StageReport r;
    r.name = stage;
    r.rows = outcome.rows;
    r.seconds = std::chrono::duration<double>(t1 - t0).count();
    reports_.push_back(r);
    reran_[stage] = true;
  }

  // ---- shared paths -------------------------------------------------------

  fs::path index_dir() const { return out_ / "index"; }
  fs::path vectors_path() const { return out_ / "vectors.jsonl"; }
  fs::path vocab_path() const {
    return out_ / ("vocab_" + std::string(entity_kind_name(cfg_.entity_kind)) + ".txt");
  }
  fs::path tables_dir() const { return out_ / "tables"; }
  fs::path null_dir() const { return out_ / "null"; }
  fs::path partition_path() const { return out_ / "partition.json"; }
  fs::path table_path(int year) const {
    return tables_dir() / (std::string(entity_kind_name(cfg_.entity_kind)) + "_" +
                           std::to_string(year) + ".bin");
  }
  fs::path null_path(int year) const {
    return null_dir() / (std::string(entity_kind_name(cfg_.entity_kind)) + "_" +
                         std::to_string(year) + ".bin");
  }

  std::vector<fs::path> index_files() const {
    return {index_dir() / "corpus.jsonl", index_dir() / "journals.csv",
            index_dir() / "labels.jsonl", index_dir() / "index_meta.json"};
  }

  static std::vector<fs::path> list_files(const fs::path& dir) {
    std::vector<fs::path> out;
    if (!fs::exists(dir)) return out;
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.is_regular_file()) out.push_back(entry.path());
    std::sort(out.begin(), out.end());
    return out;
  }

  std::pair<int, int> year_range(const CorpusIndex& index) const {
    int lo = std::numeric_limits<int>::max(), hi = std::numeric_limits<int>::min();
    for (const auto& [id, d] : index.docs()) {
      lo = std::min(lo, d.year);
      hi = std::max(hi, d.year);
    }
    return {lo, hi};
  }

  // ---- stages -------------------------------------------------------------

  void stage_ingest() {
    std::vector<fs::path> inputs{cfg_.corpus, cfg_.journals};
    if (cfg_.labels) inputs.push_back(*cfg_.labels);
    execute("ingest", {}, inputs, {index_dir()}, [&] {
      IngestInputs in{cfg_.corpus, cfg_.journals, cfg_.labels};
      CorpusIndex index = ingest_corpus(in, cfg_.filter);
      export_index(index, index_dir());
      StageOutcome o;
      o.rows = static_cast<std::int64_t>(index.docs().size());
      o.outputs = index_files();
      return o;
    });
  }

  void stage_embed() {
    std::vector<fs::path> inputs{index_dir() / "corpus.jsonl"};
    if (cfg_.vectors) inputs.push_back(*cfg_.vectors);
    execute("embed", {"ingest"}, inputs, {vectors_path()}, [&] {
      VectorStore store;
      if (cfg_.vectors) {
        store = load_vectors(*cfg_.vectors);
      } else {
        CorpusIndex index = load_index(index_dir());
        store = VectorStore(cfg_.embed_dim);
        std::vector<const DocumentRecord*> docs;
        for (const auto& [id, d] : index.docs()) docs.push_back(&d);
        std::vector<std::vector<double>> vecs(docs.size());
        parallel_for_index(docs.size(), jobs_, [&](std::size_t i) {
          std::string text = docs[i]->title;
          if (!docs[i]->abstract.empty()) text += " " + docs[i]->abstract;
          try {
            vecs[i] = embed_fallback(text, cfg_.embed_dim, cfg_.seed);
          } catch (const ParseError&) {
            // tokenless text: leave the doc unembedded
          }
        });
        for (std::size_t i = 0; i < docs.size(); ++i)
          if (!vecs[i].empty()) store.insert(docs[i]->doc_id, std::move(vecs[i]));
      }
      write_vectors(store, vectors_path());
      StageOutcome o;
      o.rows = static_cast<std::int64_t>(store.size());
      o.outputs = {vectors_path()};
      return o;
    });
  }

  void stage_cooc() {
    execute("cooc", {"ingest"}, {index_dir() / "corpus.jsonl"},
            {vocab_path(), tables_dir(), null_dir(), partition_path()}, [&] {
              CorpusIndex index = load_index(index_dir());
              EntityVocabulary vocab = EntityVocabulary::build(index, cfg_.entity_kind);
              vocab.save(vocab_path());
              fs::create_directories(tables_dir());
              fs::create_directories(null_dir());

              auto [lo, hi] = year_range(index);
              StageOutcome o;
              o.outputs.push_back(vocab_path());
              const char* kind = entity_kind_name(cfg_.entity_kind);
              for (int y = lo; y <= hi; ++y) {
                PairCountTable table = build_counts(index, vocab, cfg_.entity_kind, y, jobs_);
                write_table(table, table_path(y));
                o.outputs.push_back(table_path(y));
                fs::path sidecar = table_path(y);
                sidecar += ".docs.bin";
                if (fs::exists(sidecar)) o.outputs.push_back(sidecar);

                std::uint64_t null_seed =
                    hash64("null:" + std::string(kind) + ":" + std::to_string(y), cfg_.seed);
                NullModelStats stats = null_resample(index, vocab, cfg_.entity_kind, y,
                                                     cfg_.null_model, null_seed, jobs_);
                write_null_stats(stats, null_path(y));
                o.outputs.push_back(null_path(y));
                ++o.rows;
              }

              std::uint64_t louvain_seed = hash64("louvain:" + std::string(kind), cfg_.seed);
              CommunityPartition part =
                  community_partition(index, vocab, cfg_.entity_kind, {lo, hi},
                                      cfg_.partition_resolution, louvain_seed);
              ordered_json pj;
              pj["kind"] = kind;
              pj["window"] = {part.window.first, part.window.last};
              pj["resolution"] = cfg_.partition_resolution;
              pj["seed"] = part.seed;
              pj["n_communities"] = part.n_communities;
              pj["modularity"] = part.modularity;
              pj["community"] = part.community;
              atomic_write_file(partition_path(), pj.dump() + "\n");
              o.outputs.push_back(partition_path());
              return o;
            });
  }

  CommunityPartition load_partition() const {
    json j;
    try {
      j = json::parse(read_text_file(partition_path()));
    } catch (const json::exception& e) {
      throw ParseError(partition_path().string() + ": " + e.what());
    }
    CommunityPartition part;
    part.window.first = j.at("window").at(0).get<int>();
    part.window.last = j.at("window").at(1).get<int>();
    part.seed = j.at("seed").get<std::uint64_t>();
    part.n_communities = j.at("n_communities").get<int>();
    part.modularity = j.at("modularity").get<double>();
    part.community = j.at("community").get<std::vector<std::int32_t>>();
    return part;
  }

  void stage_cognitive() {
    std::vector<fs::path> inputs{index_dir() / "corpus.jsonl", vectors_path()};
    const fs::path thresholds = out_ / "thresholds.json";
    const fs::path csv = out_ / "cognitive.csv";
    execute("cognitive", {"ingest", "embed"}, inputs, {thresholds, csv}, [&] {
      CorpusIndex index = load_index(index_dir());
      VectorStore store = load_vectors(vectors_path());
      std::vector<const DocumentRecord*> docs;
      for (const auto& [id, d] : index.docs()) docs.push_back(&d);

      std::vector<TeamScores> scores(docs.size());
      parallel_for_index(docs.size(), jobs_, [&](std::size_t i) {
        scores[i] = score_team(index, store, docs[i]->doc_id, cfg_.cognitive);
      });

      std::vector<double> pool;
      for (const auto& s : scores)
        for (const auto& a : s.authors)
          if (a.intra) pool.push_back(*a.intra);
      ProfileThresholds th = fit_thresholds(pool, cfg_.exploratory_q, cfg_.exploitative_q,
                                            cfg_.min_threshold_scores);

      ordered_json tj;
      tj["exploratory_q"] = cfg_.exploratory_q;
      tj["exploitative_q"] = cfg_.exploitative_q;
      tj["n_scores"] = pool.size();
      tj["exploratory_cutoff"] = th.exploratory_cutoff;
      tj["exploitative_cutoff"] = th.exploitative_cutoff;
      atomic_write_file(thresholds, tj.dump(2) + "\n");

      std::string csv_out =
          "doc_id,intra_fp,inter_fp,n_authors,n_scored,n_exploratory,n_exploitative,"
          "share_exploratory,share_exploitative,interaction,pool_size\n";
      for (const auto& s : scores) {
        TeamCognitiveMetrics m = team_composition(s, th);
        csv_out += csv_row({m.focal_doc_id, opt_str(m.intra_fp), opt_str(m.inter_fp),
                            std::to_string(m.n_authors), std::to_string(m.n_scored),
                            std::to_string(m.n_exploratory), std::to_string(m.n_exploitative),
                            format_double(m.share_exploratory),
                            format_double(m.share_exploitative), format_double(m.interaction),
                            std::to_string(s.pool_size)});
      }
      atomic_write_file(csv, csv_out);

      StageOutcome o;
      o.rows = static_cast<std::int64_t>(docs.size());
      o.outputs = {thresholds, csv};
      return o;
    });
  }

  void stage_novelty() {
    std::vector<fs::path> inputs{index_dir() / "corpus.jsonl", vectors_path(), vocab_path(),
                                 partition_path()};
    for (const auto& p : list_files(tables_dir())) inputs.push_back(p);
    for (const auto& p : list_files(null_dir())) inputs.push_back(p);
    const fs::path csv = out_ / "novelty.csv";
    execute("novelty", {"ingest", "embed", "cooc"}, inputs, {csv}, [&] {
      CorpusIndex index = load_index(index_dir());
      VectorStore store = load_vectors(vectors_path());
      EntityVocabulary vocab = EntityVocabulary::load(vocab_path(), cfg_.entity_kind);
      CommunityPartition part = load_partition();

      auto [lo, hi] = year_range(index);
      std::vector<PairCountTable> tables;
      std::map<int, NullModelStats> nulls;
      for (int y = lo; y <= hi; ++y) {
        tables.push_back(read_table(table_path(y), y, vocab.size()));
        nulls.emplace(y, read_null_stats(null_path(y), y));
      }
      auto table_of = [&](int y) -> const PairCountTable& {
        return tables[static_cast<std::size_t>(y - lo)];
      };

      std::vector<const DocumentRecord*> docs;
      for (const auto& [id, d] : index.docs()) docs.push_back(&d);
      std::vector<NoveltyScores> rows(docs.size());
      ShibayamaAgg shib{cfg_.shibayama_mean, cfg_.shibayama_q};

      parallel_for_index(docs.size(), jobs_, [&](std::size_t i) {
        const DocumentRecord& d = *docs[i];
        NoveltyScores& r = rows[i];
        r.doc_id = d.doc_id;
        r.kind = cfg_.entity_kind;
        r.uzzi = uzzi_score(d, cfg_.entity_kind, vocab, table_of(d.year), nulls.at(d.year),
                            cfg_.uzzi_q, cfg_.uzzi_mean, &r.uzzi_flag);
        r.lee = lee_score(d, cfg_.entity_kind, vocab, table_of(d.year), cfg_.lee_q,
                          &r.lee_flag);
        r.foster = foster_score(d, cfg_.entity_kind, vocab, part, &r.foster_flag);
        if (d.year + cfg_.wang.reuse_window > hi) {
          r.wang_flag = "no_future_window";
        } else {
          std::span<const PairCountTable> all(tables);
          auto history = all.subspan(0, static_cast<std::size_t>(d.year - lo));
          auto future = all.subspan(static_cast<std::size_t>(d.year - lo + 1),
                                    static_cast<std::size_t>(cfg_.wang.reuse_window));
          r.wang = wang_score(d, cfg_.entity_kind, vocab, history, future, cfg_.wang,
                              &r.wang_flag);
        }
        r.shibayama = shibayama_score(d, store, shib, &r.shibayama_flag);
      });

      std::string csv_out =
          "doc_id,uzzi,uzzi_flag,lee,lee_flag,foster,foster_flag,wang,wang_flag,"
          "shibayama,shibayama_flag\n";
      for (const auto& r : rows) {
        csv_out += csv_row({r.doc_id, opt_str(r.uzzi), r.uzzi_flag, opt_str(r.lee), r.lee_flag,
                            opt_str(r.foster), r.foster_flag, opt_str(r.wang), r.wang_flag,
                            opt_str(r.shibayama), r.shibayama_flag});
      }
      atomic_write_file(csv, csv_out);

      StageOutcome o;
      o.rows = static_cast<std::int64_t>(rows.size());
      o.outputs = {csv};
      return o;
    });
  }

  void stage_disruption() {
    const fs::path csv = out_ / "impact.csv";
    execute("disruption", {"ingest"}, {index_dir() / "corpus.jsonl"}, {csv}, [&] {
      CorpusIndex index = load_index(index_dir());
      std::vector<const DocumentRecord*> docs;
      for (const auto& [id, d] : index.docs()) docs.push_back(&d);
      std::vector<ImpactScores> rows(docs.size());
      parallel_for_index(docs.size(), jobs_, [&](std::size_t i) {
        rows[i] = impact_scores(index, docs[i]->doc_id, cfg_.horizon);
      });
      std::string csv_out =
          "doc_id,citation_count,di1,di5,di1nok,dein,breadth,depth\n";
      for (const auto& r : rows) {
        csv_out += csv_row({r.doc_id, std::to_string(r.citation_count), opt_str(r.di1),
                            opt_str(r.di5), opt_str(r.di1nok), opt_str(r.dein),
                            opt_str(r.breadth), opt_str(r.depth)});
      }
      atomic_write_file(csv, csv_out);
      StageOutcome o;
      o.rows = static_cast<std::int64_t>(rows.size());
      o.outputs = {csv};
      return o;
    });
  }

  // one artifact csv -> doc_id keyed field map
  static std::map<std::string, std::map<std::string, std::string>> read_keyed_csv(
      const fs::path& path) {
    CsvFile file = read_csv(path);
    std::map<std::string, std::map<std::string, std::string>> out;
    for (const auto& row : file.rows) {
      std::map<std::string, std::string> fields;
      for (std::size_t i = 1; i < file.header.size(); ++i) fields[file.header[i]] = row[i];
      out.emplace(row[0], std::move(fields));
    }
    return out;
  }

  void stage_normalize() {
    std::vector<fs::path> inputs{index_dir() / "corpus.jsonl", index_dir() / "journals.csv",
                                 out_ / "cognitive.csv", out_ / "novelty.csv",
                                 out_ / "impact.csv"};
    const fs::path csv = out_ / "variables.csv";
    execute("normalize", {"ingest", "cognitive", "novelty", "disruption"}, inputs, {csv}, [&] {
      CorpusIndex index = load_index(index_dir());
      auto cognitive = read_keyed_csv(out_ / "cognitive.csv");
      auto novelty = read_keyed_csv(out_ / "novelty.csv");
      auto impact = read_keyed_csv(out_ / "impact.csv");

      VariableTable table;
      std::vector<std::string> numeric_cols = {
          "sjr",      "team_size", "n_refs", "n_mesh",   "intra_fp", "inter_fp",
          "share_exploratory", "share_exploitative", "interaction",
          "uzzi",     "lee",       "foster", "wang",     "shibayama",
          "citation_count", "di1", "di5",    "di1nok",   "dein",     "breadth",
          "depth"};
      for (const auto& name : numeric_cols) table.add_column(name);

      auto put = [&](const std::map<std::string, std::string>& fields, const char* key,
                     const std::string& col, std::size_t row) {
        auto it = fields.find(key);
        if (it == fields.end())
          throw ParseError("normalize: artifact column missing: " + std::string(key));
        if (auto v = parse_opt_double(it->second)) table.set(col, row, *v);
      };

      std::size_t row = 0;
      for (const auto& [id, d] : index.docs()) {
        table.doc_id.push_back(id);
        table.year.push_back(d.year);
        table.journal.push_back(d.journal_issn);
        const JournalRecord* j = index.journal(d.journal_issn);
        table.category.push_back(j ? j->category : "");
        for (const auto& name : numeric_cols) table.add_column(name).resize(row + 1);

        if (j) table.set("sjr", row, j->sjr);
        table.set("team_size", row, static_cast<double>(d.author_ids.size()));
        table.set("n_refs", row, static_cast<double>(d.ref_doc_ids.size()));
        table.set("n_mesh", row, static_cast<double>(d.mesh_terms.size()));

        const auto& cog = cognitive.at(id);
        put(cog, "intra_fp", "intra_fp", row);
        put(cog, "inter_fp", "inter_fp", row);
        put(cog, "share_exploratory", "share_exploratory", row);
        put(cog, "share_exploitative", "share_exploitative", row);
        put(cog, "interaction", "interaction", row);

        const auto& nov = novelty.at(id);
        put(nov, "uzzi", "uzzi", row);
        put(nov, "lee", "lee", row);
        put(nov, "foster", "foster", row);
        put(nov, "wang", "wang", row);
        put(nov, "shibayama", "shibayama", row);

        const auto& imp = impact.at(id);
        put(imp, "citation_count", "citation_count", row);
        put(imp, "di1", "di1", row);
        put(imp, "di5", "di5", row);
        put(imp, "di1nok", "di1nok", row);
        put(imp, "dein", "dein", row);
        put(imp, "breadth", "breadth", row);
        put(imp, "depth", "depth", row);
        ++row;
      }
      for (const auto& name : numeric_cols) table.add_column(name).resize(table.n_rows());

      // field-weighting: percentile ranks within (category, year) groups
      std::vector<std::string> group(table.n_rows());
      for (std::size_t i = 0; i < table.n_rows(); ++i)
        group[i] = table.category[i].empty()
                       ? ""
                       : table.category[i] + "|" + std::to_string(table.year[i]);
      const std::vector<std::string>& fw =
          cfg_.fw_columns.empty() ? kIndicatorColumns : cfg_.fw_columns;
      for (const auto& name : fw) {
        if (!table.has_column(name))
          throw ConfigError("normalize: unknown fw column: " + name);
        auto ranks = percentile_rank_by_group(table.column(name), group);
        auto& col = table.add_column(name + "_fw");
        col = std::move(ranks);
      }

      write_variable_table(table, csv);
      StageOutcome o;
      o.rows = static_cast<std::int64_t>(table.n_rows());
      o.outputs = {csv};
      return o;
    });
  }

  std::vector<RegressionSpec> models() const {
    return cfg_.models.empty() ? default_models() : cfg_.models;
  }

  fs::path fit_path(const std::string& name) const { return out_ / ("fit_" + name + ".json"); }

  void stage_regress() {
    const auto specs = models();
    std::vector<fs::path> declared;
    for (const auto& m : specs) declared.push_back(fit_path(m.name));
    execute("regress", {"normalize"}, {out_ / "variables.csv"}, declared, [&] {
      VariableTable table = read_variable_table(out_ / "variables.csv");
      StageOutcome o;
      for (const auto& spec : specs) {
        RegressionFit f = fit(spec, table);
        atomic_write_file(fit_path(spec.name), fit_to_json(f));
        o.outputs.push_back(fit_path(spec.name));
        ++o.rows;
      }
      return o;
    });
  }

  void stage_report() {
    std::vector<fs::path> inputs{out_ / "variables.csv"};
    for (const auto& m : models()) inputs.push_back(fit_path(m.name));
    std::vector<fs::path> declared{out_ / "turning_points.csv", out_ / "summary.csv",
                                   out_ / "correlogram.csv"};
    const auto surfaces = cfg_.surfaces.empty()
                              ? std::vector<std::array<std::string, 3>>{
                                    {"intra_fp_fw", "inter_fp_fw", "uzzi_fw"}}
                              : cfg_.surfaces;
    for (const auto& s : surfaces)
      declared.push_back(out_ / ("surface_" + s[0] + "_" + s[1] + "_" + s[2] + ".csv"));
    execute("report", {"normalize", "regress"}, inputs, declared, [&] {
      VariableTable table = read_variable_table(out_ / "variables.csv");
      StageOutcome o;

      // turning points from every fitted quadratic term
      std::string tp_out =
          "model,regressor,coef,coef_sq,turning_point,mean_x,marginal_at_mean\n";
      for (const auto& spec : models()) {
        json f = json::parse(read_text_file(fit_path(spec.name)));
        std::map<std::string, double> coef;
        for (const auto& c : f.at("coefficients"))
          coef[c.at("name").get<std::string>()] = c.at("coef").get<double>();
        for (const auto& base : spec.squared) {
          auto b1 = coef.find(base);
          auto b2 = coef.find(base + "^2");
          if (b1 == coef.end() || b2 == coef.end() || b2->second == 0.0) continue;
          double tp = turning_point(b1->second, b2->second);
          SummaryRow s = summary_stats(table.column(base));
          std::string mean = s.mean ? format_double(*s.mean) : std::string{};
          std::string marginal =
              s.mean ? format_double(marginal_effect(b1->second, b2->second, *s.mean))
                     : std::string{};
          tp_out += csv_row({spec.name, base, format_double(b1->second),
                             format_double(b2->second), format_double(tp), mean, marginal});
        }
      }
      atomic_write_file(out_ / "turning_points.csv", tp_out);
      o.outputs.push_back(out_ / "turning_points.csv");
      ++o.rows;

      std::string sum_out = "column,n,min,p25,median,mean,p75,max,sd\n";
      for (const auto& name : table.numeric_names()) {
        SummaryRow s = summary_stats(table.column(name));
        sum_out += csv_row({name, std::to_string(s.n), opt_str(s.min), opt_str(s.p25),
                            opt_str(s.median), opt_str(s.mean), opt_str(s.p75), opt_str(s.max),
                            opt_str(s.sd)});
      }
      atomic_write_file(out_ / "summary.csv", sum_out);
      o.outputs.push_back(out_ / "summary.csv");
      ++o.rows;

      std::vector<std::string> corr_cols = cfg_.correlogram_columns;
      if (corr_cols.empty()) {
        for (const auto& name : table.numeric_names())
          if (name.size() > 3 && name.substr(name.size() - 3) == "_fw")
            corr_cols.push_back(name);
      }
      Correlogram corr = correlogram(table, corr_cols);
      // rows follow the clustered leaf order; skipped columns trail behind
      std::vector<std::string> order = corr.leaf_order;
      for (const auto& name : corr.columns)
        if (std::find(order.begin(), order.end(), name) == order.end()) order.push_back(name);
      std::map<std::string, std::size_t> col_index;
      for (std::size_t i = 0; i < corr.columns.size(); ++i) col_index[corr.columns[i]] = i;
      std::string corr_out = "a,b,rho\n";
      for (const auto& a : order)
        for (const auto& b : order) {
          const auto& cell = corr.rho[col_index.at(a)][col_index.at(b)];
          corr_out += csv_row({a, b, opt_str(cell)});
        }
      atomic_write_file(out_ / "correlogram.csv", corr_out);
      o.outputs.push_back(out_ / "correlogram.csv");
      ++o.rows;

      for (const auto& s : surfaces) {
        BinnedSurface surf = binned_surface(table, s[0], s[1], s[2], cfg_.bins);
        std::string out_csv = "x_bin,y_bin,x_lo,x_hi,y_lo,y_hi,count,mean_z\n";
        for (std::size_t xi = 0; xi + 1 < surf.x_edges.size(); ++xi)
          for (std::size_t yi = 0; yi + 1 < surf.y_edges.size(); ++yi) {
            std::int64_t n = surf.count[xi][yi];
            out_csv += csv_row({std::to_string(xi), std::to_string(yi),
                                format_double(surf.x_edges[xi]),
                                format_double(surf.x_edges[xi + 1]),
                                format_double(surf.y_edges[yi]),
                                format_double(surf.y_edges[yi + 1]), std::to_string(n),
                                n > 0 ? format_double(surf.mean_z[xi][yi]) : std::string{}});
          }
        fs::path sp = out_ / ("surface_" + s[0] + "_" + s[1] + "_" + s[2] + ".csv");
        atomic_write_file(sp, out_csv);
        o.outputs.push_back(sp);
        ++o.rows;
      }
      return o;
    });
  }

  void write_manifest(const RunResult& result) {
    ordered_json m;
    m["engine_version"] = kEngineVersion;
    m["config"] = json::parse(config_echo_);
    ordered_json inputs;
    inputs["<config>"] = config_digest_;
    auto add_input = [&](const fs::path& p) {
      if (fs::exists(p)) inputs[p.string()] = sha256_file(p);
    };
    add_input(cfg_.corpus);
    add_input(cfg_.journals);
    if (cfg_.labels) add_input(*cfg_.labels);
    if (cfg_.vectors) add_input(*cfg_.vectors);
    m["inputs"] = std::move(inputs);

    ordered_json stages = ordered_json::array();
    for (const auto& r : result.stages) {
      ordered_json s;
      s["name"] = r.name;
      s["skipped"] = r.skipped;
      s["rows"] = r.rows;
      s["seconds"] = r.seconds;
      stages.push_back(std::move(s));
    }
    m["stages"] = std::move(stages);

    ordered_json artifacts;
    for (const auto& r : result.stages) {
      json stamp;
      try {
        stamp = json::parse(read_text_file(stamp_path(r.name)));
      } catch (const std::exception&) {
        continue;
      }
      for (const auto& [path, digest] : stamp.at("outputs").items())
        artifacts[path] = digest.get<std::string>();
    }
    m["artifacts"] = std::move(artifacts);
    if (!result.error.empty()) m["error"] = result.error;

    std::error_code ec;
    fs::create_directories(out_, ec);
    atomic_write_file(out_ / "manifest.json", m.dump(2) + "\n");
  }

  RunConfig cfg_;
  bool force_ = false;
  std::string until_;
  fs::path out_, stamps_;
  int jobs_ = 1;
  std::string config_echo_, config_digest_;
  std::map<std::string, bool> reran_;
  std::vector<StageReport> reports_;
};

}  // namespace

RunResult run_pipeline(const RunConfig& config, bool force, const std::string& until) {
  PipelineRunner runner(config, force, until);
  return runner.run();
}

const std::vector<std::string>& pipeline_stages() {
  static const std::vector<std::string> names = {
      "ingest",    "embed",     "cooc",   "cognitive", "novelty",
      "disruption", "normalize", "regress", "report"};
  return names;
}

}  // namespace teamscope
