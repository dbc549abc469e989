// vomc: variable-order Markov chain prediction and compression toolkit.
//
// Subcommands:
//   gen         sample context trees and source sequences to JSON files
//   eval        run a rate-curve experiment over a suite of predictors
//   compress    arithmetic-code a sequence file into a .vomc container
//   decompress  invert compress
//   verify      run the cross-module verification suites
//   compare     merge rate-curve CSV files into one comparison table

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "vomc/bench.hpp"
#include "vomc/coder.hpp"
#include "vomc/model.hpp"
#include "vomc/verify.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(data.data(), std::streamsize(data.size()));
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(csv);
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

vomc::PredictorConfig predictor_from_flags(const std::string& token, int alphabet, int depth,
                                           double lambda, double alpha) {
  vomc::ExperimentConfig cfg;
  cfg.alphabet = alphabet;
  cfg.depth = depth;
  cfg.lambda = lambda;
  cfg.alpha = alpha;
  return vomc::parse_predictor_token(token, cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"variable-order Markov chain prediction and compression toolkit"};
  app.require_subcommand(1);

  // ---- gen ----
  auto* gen = app.add_subcommand("gen", "sample trees and sequences");
  std::string gen_prior = "ctw", gen_out = ".";
  int gen_depth = 3, gen_alphabet = 3, gen_trees = 1;
  double gen_lambda = 0.15, gen_alpha = 0.5;
  std::size_t gen_len = 5120;
  std::uint64_t gen_seed = 1;
  gen->add_option("--prior", gen_prior, "ctw|nonctw")->check(CLI::IsMember({"ctw", "nonctw"}));
  gen->add_option("--depth", gen_depth, "max tree depth D");
  gen->add_option("--lambda", gen_lambda, "branch-stopping probability");
  gen->add_option("--alpha", gen_alpha, "symmetric Dirichlet parameter");
  gen->add_option("--alphabet", gen_alphabet, "alphabet size A");
  gen->add_option("--trees", gen_trees, "number of trees to sample");
  gen->add_option("--len", gen_len, "sequence length per tree");
  gen->add_option("--seed", gen_seed, "master seed");
  gen->add_option("--out", gen_out, "output directory");

  // ---- eval ----
  auto* eval = app.add_subcommand("eval", "run a rate-curve experiment");
  vomc::ExperimentConfig ecfg;
  std::string eval_prior = "ctw", eval_predictors = "ctw,blend,ppm,syntf,genie",
              eval_unit = "nats", eval_out = "eval-out";
  bool eval_serial = false;
  eval->add_option("--prior", eval_prior, "ctw|nonctw")->check(CLI::IsMember({"ctw", "nonctw"}));
  eval->add_option("--depth", ecfg.depth, "source max depth D");
  eval->add_option("--lambda", ecfg.lambda, "branch-stopping probability");
  eval->add_option("--alpha", ecfg.alpha, "symmetric Dirichlet parameter");
  eval->add_option("--alphabet", ecfg.alphabet, "alphabet size A");
  eval->add_option("--trees", ecfg.num_trees, "number of test trees K");
  eval->add_option("--len", ecfg.seq_len, "sequence length per tree N_k");
  eval->add_option("--window", ecfg.window, "context window N");
  eval->add_option("--predictors", eval_predictors,
                   "comma list: ctw|blend|ppm[:k]|syntf[:variant]|genie|uniform");
  eval->add_option("--seed", ecfg.seed, "master seed");
  eval->add_option("--unit", eval_unit, "nats|bits")->check(CLI::IsMember({"nats", "bits"}));
  eval->add_option("--threads", ecfg.threads, "worker threads (0 = default)");
  eval->add_flag("--serial", eval_serial, "run the serial reference path");
  eval->add_option("--out", eval_out, "output directory");

  // ---- compress / decompress ----
  auto* compress = app.add_subcommand("compress", "encode a sequence file");
  std::string c_in, c_out, c_pred = "ctw";
  int c_depth = 3;
  double c_lambda = 0.15, c_alpha = 0.5;
  compress->add_option("--in", c_in, "sequence JSON file")->required();
  compress->add_option("--out", c_out, "output .vomc container")->required();
  compress->add_option("--predictor", c_pred, "ctw|blend|ppm[:k]|syntf[:variant]|uniform");
  compress->add_option("--depth", c_depth, "predictor depth D");
  compress->add_option("--lambda", c_lambda, "prior lambda");
  compress->add_option("--alpha", c_alpha, "prior alpha");

  auto* decompress = app.add_subcommand("decompress", "decode a .vomc container");
  std::string d_in, d_out;
  decompress->add_option("--in", d_in, "input .vomc container")->required();
  decompress->add_option("--out", d_out, "output sequence JSON file")->required();

  // ---- verify ----
  auto* verify_cmd = app.add_subcommand("verify", "run verification suites");
  std::string v_level = "quick";
  verify_cmd->add_option("--level", v_level, "quick|full")
      ->check(CLI::IsMember({"quick", "full"}));

  // ---- compare ----
  auto* compare = app.add_subcommand("compare", "merge rate-curve CSV files");
  std::vector<std::string> cmp_files;
  compare->add_option("files", cmp_files, "curve CSV files")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      std::filesystem::create_directories(gen_out);
      for (int k = 0; k < gen_trees; ++k) {
        const std::uint64_t tree_seed = vomc::Rng::derive(gen_seed, std::uint64_t(k));
        vomc::Rng rng_depth(tree_seed, 0), rng_structure(tree_seed, 1), rng_leaves(tree_seed, 2),
            rng_init(tree_seed, 3), rng_body(tree_seed, 4);
        const int depth = gen_prior == "ctw"
                              ? gen_depth
                              : 1 + int(rng_depth.next_below(std::uint32_t(gen_depth)));
        vomc::CtwPrior prior = vomc::CtwPrior::jeffreys(gen_alphabet, depth, gen_lambda);
        prior.alpha.assign(std::size_t(gen_alphabet), gen_alpha);
        vomc::ContextTree tree = vomc::sample_tree_structure(prior, rng_structure);
        if (gen_prior == "ctw")
          vomc::sample_leaf_distributions(tree, prior.alpha, rng_leaves);
        else
          vomc::sample_nonctw_leaf_distributions(tree, rng_leaves);
        auto seq = vomc::generate_sequence(
            tree, gen_len, vomc::sample_uniform_context(gen_alphabet, gen_depth + 1, rng_init),
            rng_body);
        seq.tree_id = k;
        seq.seed = tree_seed;
        const auto base = std::filesystem::path(gen_out);
        write_file((base / ("tree_" + std::to_string(k) + ".json")).string(),
                   vomc::tree_to_json(tree, gen_lambda));
        write_file((base / ("seq_" + std::to_string(k) + ".json")).string(),
                   vomc::sequence_to_json(seq));
      }
      std::cout << "wrote " << gen_trees << " tree/sequence pairs to " << gen_out << "\n";
    } else if (*eval) {
      ecfg.prior_kind = eval_prior == "ctw" ? vomc::PriorKind::ctw : vomc::PriorKind::nonctw;
      ecfg.predictors = split_list(eval_predictors);
      ecfg.unit = eval_unit == "nats" ? vomc::RateUnit::nats : vomc::RateUnit::bits;
      ecfg.parallel = !eval_serial;
      const auto result = vomc::run_experiment(ecfg);
      std::filesystem::create_directories(eval_out);
      const auto base = std::filesystem::path(eval_out);
      for (const auto& curve : result.curves) {
        std::string name = curve.predictor;
        for (auto& ch : name)
          if (ch == ':') ch = '_';
        write_file((base / ("curve_" + name + ".csv")).string(), vomc::curve_csv(curve));
      }
      write_file((base / "summary.json").string(), vomc::summary_json(result));
      std::cout << vomc::comparison_table(result);
      std::cout << "curves and summary written to " << eval_out << "\n";
      if (!result.failures.empty()) {
        std::cerr << "partial results: " << result.failures.size() << " tree(s) failed\n";
        return 1;
      }
    } else if (*compress) {
      const auto seq = vomc::sequence_from_json(read_file(c_in));
      const auto config =
          predictor_from_flags(c_pred, seq.alphabet, c_depth, c_lambda, c_alpha);
      const auto stream = vomc::encode(seq, config);
      const auto bytes = vomc::stream_to_bytes(stream);
      write_file(c_out, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
      std::cout << "encoded " << seq.length() << " symbols into " << stream.payload_bits
                << " payload bits (quantized ideal "
                << stream.ideal_quantized_bits << ")\n";
    } else if (*decompress) {
      const std::string raw = read_file(d_in);
      const auto stream = vomc::stream_from_bytes(
          std::span(reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()));
      const auto seq = vomc::decode(stream);
      write_file(d_out, vomc::sequence_to_json(seq));
      std::cout << "decoded " << seq.length() << " symbols\n";
    } else if (*verify_cmd) {
      const auto results =
          vomc::verify::run(v_level == "quick" ? vomc::verify::Level::quick
                                               : vomc::verify::Level::full);
      std::cout << vomc::verify::format_report(results);
      if (!vomc::verify::all_passed(results)) return 1;
    } else if (*compare) {
      std::cout << "file                                     window-avg      early-10%       late-10%\n";
      for (const auto& path : cmp_files) {
        std::istringstream in(read_file(path));
        std::string line;
        std::getline(in, line);  // header
        std::vector<double> means;
        while (std::getline(in, line)) {
          const auto c1 = line.find(','), c2 = line.find(',', c1 + 1);
          if (c1 == std::string::npos || c2 == std::string::npos) continue;
          means.push_back(std::strtod(line.c_str() + c1 + 1, nullptr));
        }
        if (means.empty()) throw std::runtime_error("no rows in " + path);
        const std::size_t tenth = std::max<std::size_t>(1, means.size() / 10);
        double full = 0.0, early = 0.0, late = 0.0;
        for (double m : means) full += m;
        for (std::size_t t = 0; t < tenth; ++t) early += means[t];
        for (std::size_t t = means.size() - tenth; t < means.size(); ++t) late += means[t];
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-40s %-15.6f %-15.6f %-15.6f\n", path.c_str(),
                      full / double(means.size()), early / double(tenth), late / double(tenth));
        std::cout << buf;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
