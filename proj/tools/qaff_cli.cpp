// Command-line front end for the qaff library.
//
// Subcommands:
//   eval        evaluate a word as an exact matrix on one weight space
//   reduce      rewrite a top-weight endomorphism word into loop normal form
//   suite       run a relation/identity suite described by a JSON config
//   bootstrap   search the convention space and report the survivor(s)
//   dump-basis  list the monomial basis of one weight space
//   replay      re-run a derivation script and check its declared result
//
// Exit codes (stable):
//   0  success / all checks passed
//   1  a check failed or an unexpected runtime error occurred
//   2  input could not be parsed (word, weight, config, or flags)
//   3  the requested weight/word names the zero object
//   4  the word is not an endomorphism of the top weight (reduce)
//   5  bootstrap: no convention satisfies the selection suite
//   6  bootstrap: several gauge-inequivalent conventions survive

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qaff/rewrite.hpp"
#include "qaff/suite.hpp"
#include "qaff/trees.hpp"

namespace {

using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Shared option bundle and helpers.
// ---------------------------------------------------------------------------

struct ModelOpts {
  std::string side = "skew";
  int n = 2;
  int m = 2;
  int N = 1;
  std::string k;          // weight text, e.g. "(0,2)"
  bool q1 = false;        // q = 1 integral specialization
  std::string conv_path;  // explicit convention ledger
  std::string out_path;   // JSON artifact destination
};

void add_model_flags(CLI::App* cmd, ModelOpts& o, bool need_k) {
  cmd->add_option("--side", o.side, "tensor factor kind: skew or symmetric")
      ->check(CLI::IsMember({"skew", "symmetric", "sym"}));
  cmd->add_option("-n", o.n, "number of tensor slots")->check(CLI::Range(2, 16));
  cmd->add_option("-m", o.m, "columns per slot")->check(CLI::Range(1, 16));
  cmd->add_option("-N", o.N, "total weight")->check(CLI::Range(0, 16));
  auto* kopt = cmd->add_option("-k", o.k, "weight, e.g. \"(0,2)\"");
  if (need_k) kopt->required();
  cmd->add_flag("--q1", o.q1, "work at q = 1 (integral classical model)");
  cmd->add_option("--convention", o.conv_path,
                  "convention ledger JSON (default: data/convention.json "
                  "when present, else the built-in default)");
  cmd->add_option("--out", o.out_path, "write a JSON artifact to this path");
}

// Resolve the convention: --q1 forces the integral classical model; otherwise
// an explicit ledger wins, then a data/convention.json next to the working
// directory, then the built-in default.
qaff::Convention resolve_convention(const ModelOpts& o) {
  if (o.q1) {
    qaff::Convention c;
    c.trivial = true;
    return c;
  }
  std::string path = o.conv_path;
  if (path.empty()) {
    std::ifstream probe("data/convention.json");
    if (probe.good()) path = "data/convention.json";
  }
  if (path.empty()) return qaff::Convention{};
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read convention file: " + path);
  nlohmann::json j;
  in >> j;
  if (j.contains("convention")) j = j.at("convention");
  return qaff::convention_from_json(j);
}

qaff::ModelConfig model_config(const ModelOpts& o) {
  qaff::ModelConfig cfg;
  cfg.side = qaff::side_from_string(o.side);
  cfg.n = o.n;
  cfg.m = o.m;
  cfg.N = o.N;
  cfg.relax_n_gt_N = true;  // the CLI exposes the full model range
  return cfg;
}

std::string entry_text(const qaff::Laurent& x, bool q1) {
  if (q1) return x.eval_q1().str();
  return x.to_string();
}

void print_operator(std::ostream& os, const qaff::Operator& op, bool q1) {
  os << "source: " << qaff::weight_to_string(op.source) << "\n";
  os << "target: " << qaff::weight_to_string(op.target) << "\n";
  os << "rows: " << op.mat.rows() << "\n";
  os << "cols: " << op.mat.cols() << "\n";
  for (int r = 0; r < op.mat.rows(); ++r) {
    os << "[";
    for (int c = 0; c < op.mat.cols(); ++c) {
      if (c) os << ", ";
      os << entry_text(op.mat.at(r, c), q1);
    }
    os << "]\n";
  }
}

ordered_json operator_to_json(const qaff::ModelConfig& cfg,
                              const qaff::Convention& conv,
                              const std::string& word_text,
                              const qaff::Operator& op, bool q1) {
  ordered_json j;
  j["word"] = word_text;
  j["side"] = qaff::to_string(cfg.side);
  j["n"] = cfg.n;
  j["m"] = cfg.m;
  j["N"] = cfg.N;
  j["convention"] = conv.key();
  j["q1"] = q1;
  j["source"] = qaff::weight_to_string(op.source);
  j["target"] = qaff::weight_to_string(op.target);
  j["zero_object"] = op.zero_object;
  j["rows"] = op.mat.rows();
  j["cols"] = op.mat.cols();
  ordered_json rows = ordered_json::array();
  for (int r = 0; r < op.mat.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (int c = 0; c < op.mat.cols(); ++c)
      row.push_back(entry_text(op.mat.at(r, c), q1));
    rows.push_back(std::move(row));
  }
  j["entries"] = std::move(rows);
  return j;
}

void write_json(const std::string& path, const ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << j.dump(2) << "\n";
}

qaff::Weight parse_weight_arg(const std::string& text, int n) {
  qaff::Weight k = qaff::parse_weight(text);
  if (static_cast<int>(k.size()) != n)
    throw qaff::SyntaxError("weight has " + std::to_string(k.size()) +
                                " entries, expected " + std::to_string(n),
                            0);
  return k;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

int cmd_eval(const ModelOpts& o, const std::string& word_text) {
  qaff::ModelConfig cfg = model_config(o);
  qaff::Convention conv = resolve_convention(o);
  qaff::Weight k;
  qaff::WordExpr w;
  try {
    k = parse_weight_arg(o.k, o.n);
    w = qaff::parse_word(word_text, o.n);
  } catch (const qaff::SyntaxError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  }
  qaff::Operator op = qaff::evaluate_full(cfg, conv, w, k);
  if (op.zero_object) {
    std::cout << "zero object\n";
    return 3;
  }
  print_operator(std::cout, op, o.q1);
  if (!o.out_path.empty())
    write_json(o.out_path, operator_to_json(cfg, conv, word_text, op, o.q1));
  return 0;
}

// ---------------------------------------------------------------------------
// reduce
// ---------------------------------------------------------------------------

ordered_json verification_block(const qaff::ReductionTrace& tr,
                                const qaff::ModelConfig& cfg,
                                const qaff::Convention& conv, bool* ok_out) {
  ordered_json v;
  v["model"] = {{"side", qaff::to_string(cfg.side)},
                {"n", cfg.n},
                {"m", cfg.m},
                {"N", cfg.N}};
  v["convention"] = conv.key();
  bool ok = true;
  try {
    v["exact_steps_checked"] = qaff::verify_trace(tr, cfg, conv);
    v["steps_ok"] = true;
  } catch (const std::exception& e) {
    v["exact_steps_checked"] = 0;
    v["steps_ok"] = false;
    v["steps_error"] = e.what();
    ok = false;
  }
  long ell_sum_max = 0;
  for (const auto& fe : tr.final_entries) {
    long s = 0;
    for (int l : fe.ells) s += l < 0 ? -l : l;
    if (s > ell_sum_max) ell_sum_max = s;
  }
  v["final_within_budget"] = tr.budget_ok;
  v["max_loop_exponent_sum"] = ell_sum_max;
  qaff::WordExpr w = qaff::parse_word(tr.input, tr.n);
  qaff::SpanCheck sp =
      qaff::loop_span_check(cfg, conv, w, tr.weight_budget);
  v["span"] = {{"member", sp.member},
               {"dim", sp.dim},
               {"budget", sp.budget},
               {"span_rank", sp.span_rank},
               {"closed", sp.closed}};
  if (!sp.member || !tr.budget_ok) ok = false;
  *ok_out = ok;
  return v;
}

int cmd_reduce(const ModelOpts& o, const std::string& word_text, bool verify,
               long corpus, long max_power, unsigned seed) {
  qaff::ReduceOptions ropt;
  ropt.side = qaff::side_from_string(o.side);

  // Corpus mode: sample seeded endomorphism words, reduce each, summarize.
  if (corpus > 0) {
    std::vector<qaff::WordExpr> words = qaff::random_eta_endomorphisms(
        o.n, o.N, static_cast<int>(corpus), max_power, seed);
    ordered_json j;
    j["mode"] = "corpus";
    j["n"] = o.n;
    j["N"] = o.N;
    j["side"] = qaff::to_string(ropt.side);
    j["seed"] = seed;
    j["max_power"] = max_power;
    j["count"] = words.size();
    ordered_json items = ordered_json::array();
    qaff::ModelConfig cfg = model_config(o);
    qaff::Convention conv = resolve_convention(o);
    bool all_ok = true;
    for (const auto& w : words) {
      ordered_json item;
      const std::string text = qaff::word_to_string(w);
      item["word"] = text;
      qaff::ReductionTrace tr = qaff::reduce_to_A(w, o.n, o.N, ropt);
      item["steps_used"] = tr.steps_used;
      item["final_count"] = tr.final_entries.size();
      item["budget_ok"] = tr.budget_ok;
      if (!tr.budget_ok) all_ok = false;
      if (verify) {
        bool ok = false;
        item["verification"] = verification_block(tr, cfg, conv, &ok);
        if (!ok) all_ok = false;
      }
      items.push_back(std::move(item));
    }
    j["items"] = std::move(items);
    j["all_ok"] = all_ok;
    if (!o.out_path.empty()) {
      write_json(o.out_path, j);
      std::cout << "corpus: " << words.size() << " words, "
                << (all_ok ? "all ok" : "FAILURES") << "; wrote "
                << o.out_path << "\n";
    } else {
      std::cout << j.dump(2) << "\n";
    }
    return all_ok ? 0 : 1;
  }

  qaff::WordExpr w;
  try {
    w = qaff::parse_word(word_text, o.n);
  } catch (const qaff::SyntaxError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  }
  qaff::ReductionTrace tr;
  try {
    tr = qaff::reduce_to_A(w, o.n, o.N, ropt);
  } catch (const qaff::NotEndomorphismOfEta& e) {
    std::cerr << "reduce: " << e.what() << "\n";
    return 4;
  } catch (const qaff::BudgetExceeded& e) {
    std::cerr << "reduce: " << e.what() << "\n";
    return 1;
  }
  ordered_json j = qaff::trace_to_json(tr);
  bool ok = true;
  if (verify) {
    qaff::ModelConfig cfg = model_config(o);
    qaff::Convention conv = resolve_convention(o);
    j["verification"] = verification_block(tr, cfg, conv, &ok);
  }
  if (!o.out_path.empty()) {
    write_json(o.out_path, j);
    std::cout << "reduced to " << tr.final_entries.size()
              << " loop product(s) in " << tr.steps_used
              << " step(s); wrote " << o.out_path << "\n";
    if (verify)
      std::cout << "verification: " << (ok ? "ok" : "FAILED") << "\n";
  } else {
    std::cout << j.dump(2) << "\n";
  }
  return ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// suite
// ---------------------------------------------------------------------------

int cmd_suite(const std::string& config_path, const ModelOpts& o) {
  qaff::SuiteConfig sc;
  try {
    std::ifstream in(config_path);
    if (!in) throw qaff::SuiteError("cannot read config: " + config_path);
    nlohmann::json j;
    in >> j;
    sc = qaff::SuiteConfig::from_json(j);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  if (o.q1) sc.q1 = true;
  if (!o.out_path.empty()) sc.out_path = o.out_path;

  qaff::Convention conv;
  try {
    if (sc.q1) {
      conv.trivial = true;
    } else {
      conv = resolve_convention(o);
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  qaff::SuiteReport rep;
  try {
    rep = qaff::run_suite(sc, conv);
  } catch (const qaff::SuiteError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  ordered_json j = qaff::report_to_json(sc, conv, rep);
  if (!sc.out_path.empty()) {
    write_json(sc.out_path, j);
    std::cout << "report: " << sc.out_path << "\n";
  } else {
    std::cout << j.dump(2) << "\n";
  }
  for (const auto& c : rep.cells)
    if (!c.pass)
      std::cout << "FAIL " << c.key() << ": " << c.detail << "\n";
  std::cout << "suite: " << rep.total << " cells, " << rep.passed
            << " passed, " << rep.failed << " failed\n";
  return rep.all_pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// bootstrap
// ---------------------------------------------------------------------------

int cmd_bootstrap(const ModelOpts& o, const std::string& relations_csv,
                  const std::string& extra_csv) {
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ','))
      if (!tok.empty()) out.push_back(tok);
    return out;
  };
  std::vector<std::string> rels = split(relations_csv);
  if (!extra_csv.empty()) {
    if (rels.empty()) rels = qaff::bootstrap_relations();
    for (auto& id : split(extra_csv)) rels.push_back(id);
  }
  qaff::BootstrapOutcome out;
  try {
    out = qaff::run_bootstrap(o.q1, rels);
  } catch (const qaff::SuiteError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  if (!o.out_path.empty()) write_json(o.out_path, out.ledger);
  if (out.status == 0) {
    std::cout << "selected convention: " << out.chosen->key() << "\n";
    std::cout << "survivors (one gauge class):";
    for (const auto& s : out.survivors) std::cout << " " << s;
    std::cout << "\n";
  } else if (out.status == 5) {
    std::cerr << "no convention satisfies the selection suite\n";
  } else {
    std::cerr << "ambiguous convention: " << out.survivors.size()
              << " survivors in " << out.classes.size() << " classes\n";
    for (const auto& cls : out.classes) {
      std::cerr << "  class:";
      for (const auto& s : cls) std::cerr << " " << s;
      std::cerr << "\n";
    }
  }
  if (!o.out_path.empty())
    std::cout << "ledger: " << o.out_path << "\n";
  return out.status;
}

// ---------------------------------------------------------------------------
// dump-basis
// ---------------------------------------------------------------------------

std::string basis_vector_text(const qaff::BasisVector& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += "|";
    s += "{";
    for (std::size_t j = 0; j < v[i].size(); ++j) {
      if (j) s += ",";
      s += std::to_string(v[i][j]);
    }
    s += "}";
  }
  return s;
}

int cmd_dump_basis(const ModelOpts& o) {
  qaff::ModelConfig cfg = model_config(o);
  qaff::Weight k;
  try {
    k = parse_weight_arg(o.k, o.n);
  } catch (const qaff::SyntaxError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  }
  if (!qaff::is_nonzero_object(k, o.N)) {
    std::cout << "zero object\n";
    return 3;
  }
  auto basis = qaff::enumerate_basis(cfg, k);
  std::cout << "side: " << qaff::to_string(cfg.side) << "\n";
  std::cout << "weight: " << qaff::weight_to_string(k) << "\n";
  std::cout << "dim: " << basis.size() << "\n";
  for (std::size_t i = 0; i < basis.size(); ++i)
    std::cout << i << ": " << basis_vector_text(basis[i]) << "\n";
  if (!o.out_path.empty()) {
    ordered_json j;
    j["side"] = qaff::to_string(cfg.side);
    j["n"] = cfg.n;
    j["m"] = cfg.m;
    j["N"] = cfg.N;
    j["k"] = qaff::weight_to_string(k);
    j["dim"] = basis.size();
    ordered_json vs = ordered_json::array();
    for (const auto& v : basis) vs.push_back(v);
    j["vectors"] = std::move(vs);
    write_json(o.out_path, j);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// replay
// ---------------------------------------------------------------------------

int cmd_replay(const std::string& script_path, const ModelOpts& o,
               bool verify) {
  std::ifstream in(script_path);
  if (!in) {
    std::cerr << "cannot read script: " << script_path << "\n";
    return 2;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  qaff::ProofScript script;
  try {
    script = qaff::parse_script(buf.str());
  } catch (const qaff::SyntaxError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  }
  qaff::ReplayReport rep = qaff::replay(script);
  std::cout << "script: "
            << (script.name.empty() ? script_path : script.name) << "\n";
  std::cout << "config: n=" << script.n << " N=" << script.N << "\n";
  std::cout << "steps run: " << rep.steps_run << "/" << script.steps.size()
            << "\n";
  std::cout << "all steps exact: " << (rep.all_exact ? "yes" : "no") << "\n";
  std::cout << "final entries:\n";
  for (const auto& e : rep.final.entries)
    std::cout << "  " << e.mult.to_string() << " * "
              << qaff::word_to_string(e.word) << "\n";

  ordered_json j;
  j["script"] = script_path;
  j["name"] = script.name;
  j["n"] = script.n;
  j["N"] = script.N;
  j["steps_run"] = rep.steps_run;
  j["all_exact"] = rep.all_exact;
  j["ok"] = rep.ok;
  if (!rep.ok) {
    j["error"] = rep.error;
    j["failed_line"] = rep.failed_line;
  }
  ordered_json fs = ordered_json::array();
  for (const auto& e : rep.final.entries)
    fs.push_back({{"mult", e.mult.to_string()},
                  {"word", qaff::word_to_string(e.word)}});
  j["final"] = std::move(fs);

  int rc = 0;
  if (!rep.ok) {
    std::cerr << "replay failed";
    if (rep.failed_line) std::cerr << " at line " << rep.failed_line;
    std::cerr << ": " << rep.error << "\n";
    rc = 1;
  } else if (verify) {
    // Model check: the start word must equal the final combination as a
    // matrix identity at every source weight of the chosen model.
    ModelOpts mo = o;
    mo.n = script.n;
    mo.N = script.N;
    qaff::ModelConfig cfg = model_config(mo);
    qaff::Convention conv = resolve_convention(mo);
    int weights = 0, nonzero = 0;
    std::string witness;
    for (const auto& k : qaff::enumerate_weights(script.n, script.N)) {
      qaff::Operator lhs = qaff::evaluate_full(cfg, conv, script.start, k);
      const int dim =
          static_cast<int>(qaff::enumerate_basis(cfg, k).size());
      qaff::Matrix acc;
      bool any = false;
      for (const auto& e : rep.final.entries) {
        qaff::Operator t = qaff::evaluate_full(cfg, conv, e.word, k);
        if (t.zero_object || t.mat.empty()) continue;
        qaff::Matrix sc = t.mat.scaled(e.mult);
        if (!any) {
          acc = sc;
          any = true;
        } else {
          acc = acc + sc;
        }
      }
      const bool lz = lhs.zero_object || lhs.mat.is_zero();
      bool equal;
      if (!any) {
        equal = lz;
      } else if (lz) {
        equal = acc.is_zero();
      } else {
        equal = acc == lhs.mat;
      }
      ++weights;
      if (dim > 0 && !lhs.zero_object) ++nonzero;
      if (!equal) {
        witness = qaff::weight_to_string(k);
        break;
      }
    }
    j["verification"] = {{"side", qaff::to_string(cfg.side)},
                         {"m", cfg.m},
                         {"convention", conv.key()},
                         {"weights_checked", weights},
                         {"nonzero_weights", nonzero},
                         {"ok", witness.empty()}};
    if (!witness.empty()) {
      j["verification"]["witness"] = witness;
      std::cerr << "verification failed at weight " << witness << "\n";
      rc = 1;
    } else {
      std::cout << "verified across " << weights << " weights ("
                << nonzero << " nonzero)\n";
    }
  }
  if (!o.out_path.empty()) write_json(o.out_path, j);
  std::cout << (rep.ok && rc == 0 ? "ok" : "FAILED") << "\n";
  return rc;
}

}  // namespace

// ---------------------------------------------------------------------------
// main
// ---------------------------------------------------------------------------

int main(int argc, char** argv) {
  CLI::App app{"exact matrix models, rewriting, and identity suites for the "
               "level-zero affine calculus"};
  app.require_subcommand(1);

  // eval
  ModelOpts eo;
  eo.N = 2;
  std::string eval_word;
  auto* eval = app.add_subcommand("eval", "evaluate a word on a weight space");
  add_model_flags(eval, eo, /*need_k=*/true);
  eval->add_option("word", eval_word, "the word, e.g. \"E1 F1 1_(0,2)\"")
      ->required();

  // reduce
  ModelOpts ro;
  ro.N = 2;
  std::string reduce_word;
  bool reduce_verify = false;
  long corpus = 0;
  long max_power = 8;
  unsigned seed = 20240811;
  auto* reduce =
      app.add_subcommand("reduce", "rewrite into loop normal form");
  add_model_flags(reduce, ro, /*need_k=*/false);
  reduce->add_option("word", reduce_word, "endomorphism word of the top weight");
  reduce->add_flag("--verify", reduce_verify,
                   "check exact steps and span membership in the model");
  reduce->add_option("--corpus", corpus,
                     "reduce a seeded corpus of this many random words");
  reduce->add_option("--max-power", max_power,
                     "total divided-power bound for corpus words");
  reduce->add_option("--seed", seed, "corpus RNG seed");

  // suite
  ModelOpts so;
  std::string suite_config;
  auto* suite = app.add_subcommand("suite", "run a suite from a JSON config");
  suite->add_option("config", suite_config, "suite config JSON")->required();
  suite->add_flag("--q1", so.q1, "force the q = 1 integral run");
  suite->add_option("--convention", so.conv_path, "convention ledger JSON");
  suite->add_option("--out", so.out_path, "report destination (overrides config)");

  // bootstrap
  ModelOpts bo;
  std::string boot_relations, boot_extra;
  auto* boot = app.add_subcommand(
      "bootstrap", "search the convention space against the selection suite");
  boot->add_flag("--q1", bo.q1, "run the selection suite at q = 1");
  boot->add_option("--relations", boot_relations,
                   "comma-separated relation ids (replaces the default set)");
  boot->add_option("--extra", boot_extra,
                   "comma-separated relation ids appended to the default set");
  boot->add_option("--out", bo.out_path, "ledger destination");

  // dump-basis
  ModelOpts dbo;
  auto* dbasis =
      app.add_subcommand("dump-basis", "list the basis of one weight space");
  add_model_flags(dbasis, dbo, /*need_k=*/true);

  // replay
  ModelOpts rpo;
  std::string script_path;
  bool replay_verify = false;
  auto* replay =
      app.add_subcommand("replay", "re-run a derivation script (.qps)");
  replay->add_option("script", script_path, "script path")->required();
  replay->add_flag("--verify", replay_verify,
                   "also check the identity in a matrix model");
  replay->add_option("--side", rpo.side, "model side for --verify")
      ->check(CLI::IsMember({"skew", "symmetric", "sym"}));
  replay->add_option("-m", rpo.m, "columns per slot for --verify");
  replay->add_flag("--q1", rpo.q1, "verify at q = 1");
  replay->add_option("--convention", rpo.conv_path, "convention ledger JSON");
  replay->add_option("--out", rpo.out_path, "write a JSON artifact");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (eval->parsed()) return cmd_eval(eo, eval_word);
    if (reduce->parsed()) {
      if (corpus <= 0 && reduce_word.empty()) {
        std::cerr << "reduce: need a word or --corpus\n";
        return 2;
      }
      return cmd_reduce(ro, reduce_word, reduce_verify, corpus, max_power,
                        seed);
    }
    if (suite->parsed()) return cmd_suite(suite_config, so);
    if (boot->parsed()) return cmd_bootstrap(bo, boot_relations, boot_extra);
    if (dbasis->parsed()) return cmd_dump_basis(dbo);
    if (replay->parsed()) return cmd_replay(script_path, rpo, replay_verify);
  } catch (const qaff::SyntaxError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
