// ltnet: command-line front end for linear-threshold network analysis.

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ltn/dynamics.hpp"
#include "ltn/ensemble.hpp"
#include "ltn/equilibria.hpp"
#include "ltn/errors.hpp"
#include "ltn/inhibition.hpp"
#include "ltn/io.hpp"
#include "ltn/matclass.hpp"
#include "ltn/parallel.hpp"
#include "ltn/rng.hpp"
#include "ltn/svg.hpp"
#include "ltn/wilsoncowan.hpp"

namespace {

using namespace ltn;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitLimit = 3;

struct Common {
  std::uint64_t seed = 1;
  unsigned threads = 0;
  double tol = kDefaultTolerance;
  std::string out;
  std::string format;
};

void emit(const Common& c, const std::string& text) {
  if (c.out.empty() || c.out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out);
  if (!f) throw ParseError("--out", "cannot write " + c.out);
  f << text;
}

void save_network(const std::string& path, const NetworkDocument& doc) {
  std::ofstream f(path);
  if (!f) throw ParseError("--save-network", "cannot write " + path);
  f << write_network(doc);
}

std::string format_or(const Common& c, const std::string& fallback,
                      std::initializer_list<std::string> allowed) {
  const std::string f = c.format.empty() ? fallback : c.format;
  for (const auto& a : allowed)
    if (a == f) return f;
  std::string list;
  for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
  throw ParseError("--format", "'" + f + "' not supported here (use " + list + ")");
}

Vector random_box_point(const NetworkSpec& net, double box, Philox4x32& g) {
  Vector x(net.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = uniform01(g) * (net.m.finite(i) ? net.m[i] : box);
  return x;
}

MatClassOptions class_options(const Common& c, std::size_t limit, std::size_t lyap_limit) {
  MatClassOptions o;
  o.tol = c.tol;
  o.exhaustive_limit = limit;
  o.lyapunov_limit = lyap_limit;
  return o;
}

EquilibriumOptions equilibrium_options(const Common& c) {
  EquilibriumOptions o;
  o.tol = c.tol;
  o.threads = c.threads;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Analysis of linear-threshold rate networks: stability classes, equilibria, "
               "simulation, selective inhibition and random ensembles."};
  app.require_subcommand(1, 1);
  app.fallthrough();
  Common c;
  app.add_option("--seed", c.seed, "Seed for every randomized step")->capture_default_str();
  app.add_option("--threads", c.threads, "Worker cap (0 = all cores)")->capture_default_str();
  app.add_option("--tol", c.tol, "Tolerance band for strict inequalities")->capture_default_str();
  app.add_option("-o,--out", c.out, "Output file (default stdout)");
  app.add_option("--format", c.format, "Output format: csv, svg or text")
      ->check(CLI::IsMember({"csv", "svg", "text"}));

  // certify
  auto* certify_cmd = app.add_subcommand("certify", "Matrix-class certificates of W (text)");
  std::string certify_file;
  std::size_t class_limit = 20, lyap_limit = 12;
  certify_cmd->add_option("network", certify_file, "Network file (JSON)")->required();
  certify_cmd->add_option("--limit", class_limit, "Largest n for the principal-submatrix sweeps")
      ->capture_default_str();
  certify_cmd->add_option("--lyapunov-limit", lyap_limit, "Largest n for the common-Lyapunov search")
      ->capture_default_str();

  // equilibria
  auto* eq_cmd = app.add_subcommand("equilibria", "Enumerate equilibria region by region (csv, text)");
  std::string eq_file;
  std::vector<double> eq_d;
  bool eq_all = false;
  eq_cmd->add_option("network", eq_file, "Network file (JSON)")->required();
  eq_cmd->add_option("--d", eq_d, "Constant input, comma separated (overrides the file)")->delimiter(',');
  eq_cmd->add_flag("--all", eq_all, "List every region's candidate, valid or not");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Integrate the network from one initial state (csv)");
  std::string sim_file;
  std::vector<double> sim_d, sim_x0;
  double sim_horizon = 10, sim_h = 0, sim_box = 5;
  std::size_t sim_every = 1;
  sim_cmd->add_option("network", sim_file, "Network file (JSON)")->required();
  sim_cmd->add_option("--d", sim_d, "Constant input (overrides the file)")->delimiter(',');
  sim_cmd->add_option("--x0", sim_x0, "Initial state (default: random in the box)")->delimiter(',');
  sim_cmd->add_option("--horizon", sim_horizon, "Final time")->capture_default_str();
  sim_cmd->add_option("--step", sim_h, "Step size (0 = automatic)")->capture_default_str();
  sim_cmd->add_option("--record-every", sim_every, "Keep every k-th step")->capture_default_str();
  sim_cmd->add_option("--box", sim_box, "Sampling range for unbounded nodes")->capture_default_str();

  // portrait
  auto* por_cmd = app.add_subcommand("portrait", "Phase portrait of a 2-node network (svg)");
  std::string por_file;
  std::vector<double> por_d;
  std::size_t por_count = 20;
  double por_horizon = 20, por_xmax = 5, por_ymax = 5;
  por_cmd->add_option("network", por_file, "Network file (JSON)")->required();
  por_cmd->add_option("--d", por_d, "Constant input (overrides the file)")->delimiter(',');
  por_cmd->add_option("--trajectories", por_count, "Number of random trajectories")->capture_default_str();
  por_cmd->add_option("--horizon", por_horizon, "Trajectory length")->capture_default_str();
  por_cmd->add_option("--xmax", por_xmax, "Plot range of x0")->capture_default_str();
  por_cmd->add_option("--ymax", por_ymax, "Plot range of x1")->capture_default_str();

  // inhibit
  auto* inh_cmd = app.add_subcommand("inhibit", "Selective-inhibition design for a bilayer network (text, csv)");
  std::string inh_file, inh_mode = "feedback";
  bool inh_rectified = false, inh_simulate = false;
  double inh_horizon = 20, inh_scale = 1;
  std::vector<double> inh_x0;
  inh_cmd->add_option("network", inh_file, "Network file with a partition block")->required();
  inh_cmd->add_option("--mode", inh_mode, "feedforward or feedback")
      ->check(CLI::IsMember({"feedforward", "feedback"}))
      ->capture_default_str();
  inh_cmd->add_flag("--rectified", inh_rectified, "Feedback input max(K x, 0)");
  inh_cmd->add_flag("--simulate", inh_simulate, "Run the closed loop (csv gives the trajectory)");
  inh_cmd->add_option("--horizon", inh_horizon, "Closed-loop simulation length")->capture_default_str();
  inh_cmd->add_option("--u-scale", inh_scale, "Feedforward input multiple of u_bar (>= 1)")->capture_default_str();
  inh_cmd->add_option("--x0", inh_x0, "Initial state (default: random)")->delimiter(',');

  // wc
  auto* wc_cmd = app.add_subcommand("wc", "Two-population excitatory/inhibitory model (text, svg)");
  WilsonCowanParams wc;
  std::vector<double> wc_effective;
  std::string wc_me = "inf", wc_mi = "inf";
  wc_cmd->add_option("--n", wc.n, "Total population size")->capture_default_str();
  wc_cmd->add_option("--alpha", wc.alpha, "Excitatory fraction")->capture_default_str();
  wc_cmd->add_option("--w-ee", wc.w_ee, "E to E synapse (>= 0)");
  wc_cmd->add_option("--w-ei", wc.w_ei, "I to E synapse (<= 0)");
  wc_cmd->add_option("--w-ie", wc.w_ie, "E to I synapse (>= 0)");
  wc_cmd->add_option("--w-ii", wc.w_ii, "I to I synapse (<= 0)");
  wc_cmd->add_option("--d-e", wc.d_e, "Drive of E");
  wc_cmd->add_option("--d-i", wc.d_i, "Drive of I");
  wc_cmd->add_option("--m-e", wc_me, "Cap of E (number or inf)")->capture_default_str();
  wc_cmd->add_option("--m-i", wc_mi, "Cap of I (number or inf)")->capture_default_str();
  wc_cmd->add_option("--tau", wc.tau, "Time constant")->capture_default_str();
  std::string wc_save;
  wc_cmd->add_option("--save-network", wc_save, "Also write the reduced network file (JSON)");
  wc_cmd->add_option("--effective", wc_effective,
                     "Reduced matrix a,b,c,d directly (replaces n, alpha and the synapses)")
      ->delimiter(',')
      ->expected(4);

  // ensemble
  auto* ens_cmd = app.add_subcommand("ensemble", "Random-network class statistics (csv, svg, text)");
  EnsembleConfig ens;
  std::vector<double> sweep;
  std::string sweep_target = "both", log_base = "e";
  std::size_t sweep_n = 10;
  std::vector<std::size_t> fit_n;
  ens_cmd->add_option("--n-values", ens.n_values, "Sizes for the class-probability curve")
      ->delimiter(',');
  ens_cmd->add_option("--samples", ens.samples, "Samples per configuration")->capture_default_str();
  ens_cmd->add_option("--mu", ens.mu, "Log-normal mu")->capture_default_str();
  ens_cmd->add_option("--sigma", ens.sigma, "Log-normal sigma")->capture_default_str();
  ens_cmd->add_option("--sparsity", ens.sparsity, "Probability that an entry is zero")->capture_default_str();
  ens_cmd->add_option("--excitatory", ens.excitatory, "Probability that a column is excitatory")
      ->capture_default_str();
  ens_cmd->add_option("--class-limit", ens.class_limit, "Largest n for the P and H tests")
      ->capture_default_str();
  ens_cmd->add_option("--sweep", sweep, "mu sweep lo,hi,count at fixed n instead of the size curve")
      ->delimiter(',')
      ->expected(3);
  ens_cmd->add_option("--sweep-n", sweep_n, "n used by --sweep")->capture_default_str();
  ens_cmd->add_option("--sweep-target", sweep_target, "both, excitatory or inhibitory")
      ->check(CLI::IsMember({"both", "excitatory", "inhibitory"}))
      ->capture_default_str();
  ens_cmd->add_option("--fit-n", fit_n, "Sizes for the spectral-radius scaling fit")->delimiter(',');
  std::string ens_save;
  std::size_t ens_save_n = 10;
  std::uint32_t ens_save_sample = 0;
  ens_cmd->add_option("--save-network", ens_save, "Also write one sampled network file (JSON)");
  ens_cmd->add_option("--save-n", ens_save_n, "Size of the saved sample")->capture_default_str();
  ens_cmd->add_option("--save-sample", ens_save_sample, "Sample index of the saved network")
      ->capture_default_str();
  ens_cmd->add_option("--log-base", log_base, "Base of the fit logarithms: e or 10")
      ->check(CLI::IsMember({"e", "10"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (c.threads) set_default_threads(c.threads);

    if (certify_cmd->parsed()) {
      format_or(c, "text", {"text"});
      const auto doc = read_network_file(certify_file);
      const std::size_t n = doc.net.size();
      // Refuse before any work so the message names the first exceeded limit.
      if (n > class_limit) throw LimitExceeded("certify", static_cast<int>(n), static_cast<int>(class_limit));
      const auto cert = certify(doc.net.w, class_options(c, class_limit, lyap_limit));
      emit(c, "n = " + std::to_string(n) + "\n" + certificate_text(cert));
    } else if (eq_cmd->parsed()) {
      const std::string f = format_or(c, "csv", {"csv", "text"});
      const auto doc = read_network_file(eq_file);
      const Vector d = eq_d.empty() ? document_input(doc) : document_input(NetworkDocument{doc.net, eq_d, {}});
      const auto opt = equilibrium_options(c);
      if (eq_all) {
        const RegionSolver solver(doc.net, opt);
        std::vector<Equilibrium> all;
        for (std::size_t k = 0; k < solver.region_count(); ++k)
          if (auto e = solver.solve(k, d)) all.push_back(std::move(*e));
        emit(c, equilibria_csv(all));
      } else {
        const auto set = enumerate_equilibria(doc.net, d, opt);
        emit(c, f == "csv" ? equilibria_csv(set.equilibria) : equilibria_text(set));
      }
    } else if (sim_cmd->parsed()) {
      format_or(c, "csv", {"csv"});
      const auto doc = read_network_file(sim_file);
      const Vector d = sim_d.empty() ? document_input(doc) : document_input(NetworkDocument{doc.net, sim_d, {}});
      Philox4x32 g(c.seed, 0, 0);
      const Vector x0 = sim_x0.empty() ? random_box_point(doc.net, sim_box, g) : sim_x0;
      if (x0.size() != doc.net.size()) throw ParseError("--x0", "expected " + std::to_string(doc.net.size()) + " entries");
      SimulationOptions so;
      so.horizon = sim_horizon;
      so.h = sim_h;
      so.record_every = sim_every;
      emit(c, trajectory_csv(simulate(doc.net, InputSignal::constant(d), x0, so)));
    } else if (por_cmd->parsed()) {
      format_or(c, "svg", {"svg"});
      const auto doc = read_network_file(por_file);
      if (doc.net.size() != 2) throw ParseError("W", "phase portraits need a 2-node network");
      const Vector d = por_d.empty() ? document_input(doc) : document_input(NetworkDocument{doc.net, por_d, {}});
      Philox4x32 g(c.seed, 0, 0);
      SimulationOptions so;
      so.horizon = por_horizon;
      std::vector<Trajectory> trajs;
      for (std::size_t k = 0; k < por_count; ++k) {
        Vector x0{uniform01(g) * std::min(por_xmax, doc.net.m[0]), uniform01(g) * std::min(por_ymax, doc.net.m[1])};
        trajs.push_back(simulate(doc.net, InputSignal::constant(d), x0, so));
      }
      const auto set = enumerate_equilibria(doc.net, d, equilibrium_options(c));
      PortraitOptions po;
      po.x_max = por_xmax;
      po.y_max = por_ymax;
      emit(c, phase_portrait_svg(doc.net, d, trajs, set.equilibria, po));
    } else if (inh_cmd->parsed()) {
      const std::string f = format_or(c, "text", {"text", "csv"});
      const auto doc = read_network_file(inh_file);
      const BilayerPartition part = document_partition(doc);
      InhibitionDesign design;
      std::optional<EquivalenceReport> eq;
      const MatClassOptions mo = class_options(c, 20, 12);
      if (inh_mode == "feedforward") {
        design = design_feedforward(doc.net, part, c.tol);
      } else {
        FeedbackOptions fo;
        fo.rectified = inh_rectified;
        fo.classes = mo;
        design = design_feedback_gain(doc.net, part, fo);
        if (part.r() < doc.net.size() && part.relevant.size() <= mo.lyapunov_limit)
          eq = verify_equivalences(doc.net, part, design, mo);
      }
      if (!inh_simulate) {
        if (f == "csv") throw ParseError("--format", "csv output needs --simulate");
        emit(c, inhibition_text(doc.net, part, design, eq ? &*eq : nullptr));
      } else {
        Philox4x32 g(c.seed, 0, 0);
        Vector x0 = inh_x0;
        if (x0.empty()) {
          // Feedforward decay is only guaranteed below the bound nu.
          const double box = 5.0;
          x0.resize(doc.net.size());
          for (std::size_t i = 0; i < x0.size(); ++i) {
            double hi = doc.net.m.finite(i) ? doc.net.m[i] : box;
            if (!design.nu.empty()) hi = std::min(hi, design.nu[i]);
            x0[i] = uniform01(g) * hi;
          }
        }
        if (x0.size() != doc.net.size()) throw ParseError("--x0", "expected " + std::to_string(doc.net.size()) + " entries");
        ClosedLoopOptions co;
        co.horizon = inh_horizon;
        co.u_scale = inh_scale;
        const auto res = closed_loop_simulate(doc.net, part, design, x0, co);
        if (f == "csv") {
          emit(c, trajectory_csv(res.trajectory));
        } else {
          std::ostringstream os;
          os << inhibition_text(doc.net, part, design, eq ? &*eq : nullptr);
          os << "closed loop from x0 = [";
          for (std::size_t i = 0; i < x0.size(); ++i) os << (i ? ", " : "") << format_number(x0[i]);
          os << "]\n  final ||x-|| = " << format_number(res.final_irrelevant_norm) << '\n';
          if (res.irrelevant_rate) os << "  fitted decay rate of ||x-|| = " << format_number(*res.irrelevant_rate) << '\n';
          os << "  max excess over ||x-(0)|| exp(-t/tau) = " << format_number(res.max_decay_excess) << '\n';
          if (res.isolated_equilibrium)
            os << "  gap to the isolated relevant equilibrium = " << format_number(res.relevant_gap) << '\n';
          emit(c, os.str());
        }
      }
    } else if (wc_cmd->parsed()) {
      const std::string f = format_or(c, "text", {"text", "svg"});
      auto cap = [](const std::string& s, const char* field) {
        if (s == "inf") return kInfiniteCap;
        try {
          return std::stod(s);
        } catch (const std::exception&) {
          throw ParseError(field, "expected a number or inf");
        }
      };
      WilsonCowanParams p = wc;
      if (!wc_effective.empty()) {
        p = WilsonCowanParams::from_effective(
            Matrix{{wc_effective[0], wc_effective[1]}, {wc_effective[2], wc_effective[3]}}, wc.d_e, wc.d_i);
        p.tau = wc.tau;
      }
      p.m_e = cap(wc_me, "--m-e");
      p.m_i = cap(wc_mi, "--m-i");
      p.validate();
      if (!wc_save.empty()) {
        const ReducedNetwork r = reduce(p);
        save_network(wc_save, NetworkDocument{r.net, r.d, {}});
      }
      if (f == "text") {
        emit(c, wilson_cowan_text(p, analytic_conditions(p)));
      } else {
        const ReducedNetwork r = reduce(p);
        Philox4x32 g(c.seed, 0, 0);
        SimulationOptions so;
        so.horizon = 20 * p.tau;
        std::vector<Trajectory> trajs;
        for (int k = 0; k < 20; ++k) {
          Vector x0{uniform01(g) * std::min(5.0, p.m_e), uniform01(g) * std::min(5.0, p.m_i)};
          trajs.push_back(simulate(r.net, InputSignal::constant(r.d), x0, so));
        }
        const auto set = enumerate_equilibria(r.net, r.d, equilibrium_options(c));
        emit(c, phase_portrait_svg(r.net, r.d, trajs, set.equilibria, {}));
      }
    } else if (ens_cmd->parsed()) {
      const std::string f = format_or(c, "csv", {"csv", "svg", "text"});
      ens.seed = c.seed;
      ens.threads = c.threads;
      if (!ens_save.empty()) save_network(ens_save, NetworkDocument{sample_network(ens, ens_save_n, ens_save_sample), {}, {}});
      EnsembleReport rep;
      const bool swept = !sweep.empty();
      if (swept) {
        if (sweep[2] < 1 || sweep[2] != std::floor(sweep[2])) throw ParseError("--sweep", "count must be a positive integer");
        const SweepTarget t = sweep_target == "both" ? SweepTarget::Both
                              : sweep_target == "excitatory" ? SweepTarget::Excitatory
                                                             : SweepTarget::Inhibitory;
        rep = mu_sweep(ens, sweep_n, linspace(sweep[0], sweep[1], static_cast<std::size_t>(sweep[2])), t);
      } else {
        rep = class_probability_curve(ens);
      }
      std::optional<ScalingFit> fit;
      if (!fit_n.empty())
        fit = spectral_scaling_fit(ens, fit_n, log_base == "10" ? 10.0 : std::numbers::e);
      if (f == "csv") {
        emit(c, ensemble_csv(rep));
      } else if (f == "svg") {
        emit(c, ensemble_svg(rep, fit ? &*fit : nullptr, swept));
      } else {
        std::ostringstream os;
        for (const auto& r : rep.rows) {
          os << (swept ? "mu = " + format_number(r.parameter) : "n = " + std::to_string(r.n)) << ":";
          if (r.p_matrix) os << "  P " << format_number(r.p_matrix->p) << " +/- " << format_number(r.p_matrix->sem);
          if (r.hurwitz) os << "  H " << format_number(r.hurwitz->p) << " +/- " << format_number(r.hurwitz->sem);
          os << "  rho(|W|)<1 " << format_number(r.abs_schur.p) << " +/- " << format_number(r.abs_schur.sem) << '\n';
        }
        if (fit) os << scaling_fit_text(*fit);
        emit(c, os.str());
      }
    }
  } catch (const LimitExceeded& e) {
    std::cerr << "ltnet: limit exceeded: " << e.what() << '\n';
    return kExitLimit;
  } catch (const ParseError& e) {
    std::cerr << "ltnet: invalid input: " << e.what() << '\n';
    return kExitInput;
  } catch (const Error& e) {
    std::cerr << "ltnet: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitOk;
}
