#include "lbsgb/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "lbsgb/format.hpp"
#include "lbsgb/objective.hpp"

namespace lbsgb {

namespace {

std::uint64_t parse_count(std::string_view key, std::string_view text) {
  const double v = parse_double(text);
  if (!(v >= 0.0) || v != std::floor(v) || v > 9.007199254740992e15)
    throw std::invalid_argument("config: '" + std::string(key) + "' must be a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw std::invalid_argument("config: '" + std::string(key) + "' must be a boolean");
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  while (true) {
    const auto comma = text.find(',');
    const auto item = trim(text.substr(0, comma));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

std::string format_eta(const Barrier& b) {
  return b.active() ? format_double(b.eta()) : std::string("inf");
}

}  // namespace

void ExperimentConfig::validate() const {
  if (name.empty() || name.find_first_of("/\\ \t") != std::string::npos)
    throw std::invalid_argument("config: name must be a non-empty token without slashes");
  if (K < 2) throw std::invalid_argument("config: K must be >= 2");
  if (!(r_max > 0.0) || !std::isfinite(r_max))
    throw std::invalid_argument("config: r_max must be positive");
  if (!(delta_star > 0.0) || !(delta_star < 2.0 * r_max))
    throw std::invalid_argument("config: delta_star must lie in (0, 2 r_max)");
  if (T < 1) throw std::invalid_argument("config: T must be >= 1");
  if (n_runs < 2) throw std::invalid_argument("config: n_runs must be >= 2");
  if (record_every < 1) throw std::invalid_argument("config: record_every must be >= 1");
  if ((T + record_every - 1) / record_every > kMaxRecordedPoints)
    throw std::invalid_argument("config: record_every too small, more than 1e5 recorded points");
  if (algorithms.empty()) throw std::invalid_argument("config: no algorithms");
  std::set<std::string_view> labels;
  for (const StepRule& rule : algorithms) {
    rule.validate();
    if (!labels.insert(rule.label()).second)
      throw std::invalid_argument("config: algorithm listed twice: " + std::string(rule.label()));
  }
}

ExperimentConfig parse_config(std::string_view text) {
  std::map<std::string, std::string, std::less<>> kv;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty() || value.empty())
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key or value");
    if (!kv.emplace(key, value).second)
      throw std::invalid_argument("config: duplicate key '" + key + "'");
  }

  std::set<std::string, std::less<>> used;
  auto get = [&](const std::string& key) -> const std::string* {
    auto it = kv.find(key);
    if (it == kv.end()) return nullptr;
    used.insert(key);
    return &it->second;
  };

  ExperimentConfig cfg;
  if (auto v = get("name")) cfg.name = *v;
  if (auto v = get("K")) cfg.K = static_cast<std::size_t>(parse_count("K", *v));
  if (auto v = get("r_max")) cfg.r_max = parse_double(*v);
  if (auto v = get("delta_star")) cfg.delta_star = parse_double(*v);
  if (auto v = get("noise")) cfg.noise = parse_noise_model(*v);
  if (auto v = get("T")) cfg.T = parse_count("T", *v);
  if (auto v = get("n_runs")) cfg.n_runs = static_cast<std::size_t>(parse_count("n_runs", *v));
  if (auto v = get("record_every")) cfg.record_every = parse_count("record_every", *v);
  if (auto v = get("base_seed")) cfg.base_seed = parse_uint(*v);
  if (auto v = get("check_astar_bound"))
    cfg.diagnostics.check_astar_bound = parse_bool("check_astar_bound", *v);
  if (auto v = get("track_inv_pi_sq"))
    cfg.diagnostics.track_inv_pi_sq = parse_bool("track_inv_pi_sq", *v);

  const std::string* algs = get("algorithms");
  if (!algs) throw std::invalid_argument("config: missing 'algorithms'");
  for (const std::string& name : split_list(*algs)) {
    const AlgorithmKind kind = parse_algorithm(name);
    const std::string label(to_string(kind));
    auto param = [&](const char* p, bool required) -> const std::string* {
      if (auto v = get(label + "." + p)) return v;
      if (auto v = get(p)) return v;
      if (required)
        throw std::invalid_argument("config: " + label + " needs '" + p + "'");
      return nullptr;
    };
    const double alpha = parse_double(*param("alpha", true));
    switch (kind) {
      case AlgorithmKind::SGB:
        cfg.algorithms.push_back(StepRule::sgb(alpha));
        break;
      case AlgorithmKind::NPG:
        cfg.algorithms.push_back(StepRule::npg(alpha));
        break;
      case AlgorithmKind::ENT:
        cfg.algorithms.push_back(StepRule::ent(alpha, parse_double(*param("tau", true))));
        break;
      case AlgorithmKind::LBSGB:
        cfg.algorithms.push_back(StepRule::lbsgb(alpha, parse_double(*param("eta", true))));
        break;
    }
  }

  for (const auto& [key, value] : kv) {
    if (used.count(key)) continue;
    // Shared hyperparameters may be present without an algorithm that uses them.
    if (key == "alpha" || key == "eta" || key == "tau") continue;
    throw std::invalid_argument("config: unknown or unused key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

std::string format_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "name = " << cfg.name << '\n'
      << "K = " << cfg.K << '\n'
      << "r_max = " << format_double(cfg.r_max) << '\n'
      << "delta_star = " << format_double(cfg.delta_star) << '\n'
      << "noise = " << to_string(cfg.noise) << '\n'
      << "T = " << cfg.T << '\n'
      << "n_runs = " << cfg.n_runs << '\n'
      << "record_every = " << cfg.record_every << '\n'
      << "base_seed = " << cfg.base_seed << '\n'
      << "check_astar_bound = " << (cfg.diagnostics.check_astar_bound ? "true" : "false") << '\n'
      << "track_inv_pi_sq = " << (cfg.diagnostics.track_inv_pi_sq ? "true" : "false") << '\n'
      << "algorithms = ";
  for (std::size_t i = 0; i < cfg.algorithms.size(); ++i)
    out << (i ? ", " : "") << cfg.algorithms[i].label();
  out << '\n';
  for (const StepRule& rule : cfg.algorithms) {
    const std::string label(rule.label());
    out << label << ".alpha = " << format_double(rule.alpha) << '\n';
    if (rule.kind == AlgorithmKind::LBSGB) out << label << ".eta = " << format_eta(rule.barrier) << '\n';
    if (rule.kind == AlgorithmKind::ENT) out << label << ".tau = " << format_double(rule.tau) << '\n';
  }
  return out.str();
}

SeriesTable to_table(const AggregateSeries& agg) {
  SeriesTable t;
  t.steps = agg.steps;
  t.mean = agg.mean;
  for (std::size_t i = 0; i < agg.mean.size(); ++i) {
    t.ci_lo.push_back(agg.mean[i] - agg.half_width[i]);
    t.ci_hi.push_back(agg.mean[i] + agg.half_width[i]);
  }
  return t;
}

const AlgorithmResult& ExperimentResult::find(std::string_view label) const {
  for (const AlgorithmResult& a : algorithms)
    if (a.algorithm == label) return a;
  throw std::out_of_range("no result for algorithm '" + std::string(label) + "'");
}

std::vector<std::uint64_t> record_grid(std::uint64_t T, std::uint64_t record_every) {
  if (record_every == 0) throw std::invalid_argument("record_every must be >= 1");
  std::vector<std::uint64_t> grid;
  for (std::uint64_t t = 0; t < T; t += record_every) grid.push_back(t);
  grid.push_back(T);
  return grid;
}

RngStream instance_stream(std::uint64_t base_seed, std::size_t run) {
  return RngStream(base_seed, mix64(hash_label("instance") ^ mix64(run)));
}

RngStream algorithm_stream(std::uint64_t base_seed, std::string_view label, std::size_t run) {
  return RngStream(base_seed, mix64(hash_label(label) ^ mix64(run)));
}

BanditInstance run_instance(const ExperimentConfig& cfg, std::size_t run) {
  RngStream rng = instance_stream(cfg.base_seed, run);
  return make_instance(cfg.K, cfg.r_max, cfg.delta_star, rng, cfg.noise);
}

RunSeries run_single(const ExperimentConfig& cfg, const StepRule& rule,
                     const BanditInstance& inst, std::size_t run) {
  RunSeries rs;
  rs.algorithm = std::string(rule.label());
  rs.run_id = run;
  const auto grid = record_grid(cfg.T, cfg.record_every);
  rs.steps.reserve(grid.size());
  rs.p_star.reserve(grid.size());
  rs.cum_regret.reserve(grid.size());
  rs.astar_worst_slack = std::numeric_limits<double>::infinity();

  const std::size_t opt = inst.opt_arm();
  const double best = inst.best_mean();
  const auto means = inst.means();
  const bool check_astar =
      cfg.diagnostics.check_astar_bound && rule.kind == AlgorithmKind::LBSGB;

  PolicyParams pol(inst.arms());
  RngStream rng = algorithm_stream(cfg.base_seed, rule.label(), run);
  std::vector<double> scratch(inst.arms());
  double cum = 0.0;

  rs.steps.push_back(0);
  rs.p_star.push_back(pol.prob(opt));
  rs.cum_regret.push_back(0.0);
  std::size_t next = 1;

  for (std::uint64_t t = 1; t <= cfg.T; ++t) {
    if (check_astar) {
      const BoundCheck c = astar_lower_bound(inst, pol, rule.barrier);
      rs.astar_worst_slack = std::min(rs.astar_worst_slack, c.slack());
      if (c.slack() < -1e-9) ++rs.astar_violations;
    }
    Pull pull;
    try {
      pull = step_inplace(rule, inst, pol, rng, scratch);
    } catch (const PolicyCollapse&) {
      rs.collapsed = true;
      rs.collapse_step = t;
      break;
    }
    cum += best - means[pull.action];
    if (t == grid[next]) {
      rs.steps.push_back(t);
      rs.p_star.push_back(pol.prob(opt));
      rs.cum_regret.push_back(cum);
      ++next;
    }
  }
  return rs;
}

namespace {

template <bool Parallel>
ExperimentResult run_impl(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<BanditInstance> instances;
  instances.reserve(cfg.n_runs);
  for (std::size_t r = 0; r < cfg.n_runs; ++r) instances.push_back(run_instance(cfg, r));

  const std::size_t n_alg = cfg.algorithms.size();
  const std::size_t jobs = n_alg * cfg.n_runs;
  std::vector<RunSeries> series(jobs);
  std::vector<std::exception_ptr> errors(jobs);
  const auto count = static_cast<std::ptrdiff_t>(jobs);

#pragma omp parallel for schedule(dynamic, 1) if (Parallel)
  for (std::ptrdiff_t j = 0; j < count; ++j) {
    const auto job = static_cast<std::size_t>(j);
    const std::size_t alg = job / cfg.n_runs;
    const std::size_t run = job % cfg.n_runs;
    try {
      series[job] = run_single(cfg, cfg.algorithms[alg], instances[run], run);
    } catch (...) {
      errors[job] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  ExperimentResult result;
  result.config = cfg;
  for (std::size_t a = 0; a < n_alg; ++a) {
    AlgorithmResult ar;
    ar.algorithm = std::string(cfg.algorithms[a].label());
    ar.runs.assign(std::make_move_iterator(series.begin() + static_cast<std::ptrdiff_t>(a * cfg.n_runs)),
                   std::make_move_iterator(series.begin() + static_cast<std::ptrdiff_t>((a + 1) * cfg.n_runs)));
    for (const RunSeries& rs : ar.runs) {
      ar.n_collapsed += rs.collapsed ? 1 : 0;
      ar.astar_violations += rs.astar_violations;
    }
    ar.p_star = aggregate(ar.runs, SeriesField::PStar);
    ar.regret = aggregate(ar.runs, SeriesField::CumRegret);
    if (cfg.diagnostics.track_inv_pi_sq) ar.max_mean_inv_pi_sq = max_mean_inv_pi_sq(ar.runs);
    result.algorithms.push_back(std::move(ar));
  }
  return result;
}

const std::vector<double>& field_of(const RunSeries& rs, SeriesField f) {
  return f == SeriesField::PStar ? rs.p_star : rs.cum_regret;
}

/// Longest step grid among the runs; every run must be a prefix of it, and
/// only collapsed runs may be shorter.
std::vector<std::uint64_t> common_grid(const std::vector<RunSeries>& series) {
  const RunSeries* longest = &series.front();
  for (const RunSeries& rs : series)
    if (rs.steps.size() > longest->steps.size()) longest = &rs;
  for (const RunSeries& rs : series) {
    if (rs.steps.empty()) throw std::invalid_argument("aggregate: empty series");
    if (rs.p_star.size() != rs.steps.size() || rs.cum_regret.size() != rs.steps.size())
      throw std::invalid_argument("aggregate: ragged series");
    if (!std::equal(rs.steps.begin(), rs.steps.end(), longest->steps.begin()))
      throw std::invalid_argument("aggregate: mismatched step grids");
    if (rs.steps.size() < longest->steps.size() && !rs.collapsed)
      throw std::invalid_argument("aggregate: truncated series that is not flagged collapsed");
  }
  return longest->steps;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) { return run_impl<true>(cfg); }

ExperimentResult run_experiment_serial(const ExperimentConfig& cfg) {
  return run_impl<false>(cfg);
}

double student_t_quantile(double p, double dof) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("t quantile: p must lie in (0, 1)");
  if (!(dof > 0.0)) throw std::invalid_argument("t quantile: dof must be > 0");
  return boost::math::quantile(boost::math::students_t_distribution<double>(dof), p);
}

AggregateSeries aggregate(std::vector<RunSeries> series, SeriesField field) {
  if (series.size() < 2) throw std::invalid_argument("aggregate: need at least 2 series");
  std::sort(series.begin(), series.end(),
            [](const RunSeries& a, const RunSeries& b) { return a.run_id < b.run_id; });
  AggregateSeries agg;
  agg.steps = common_grid(series);
  const std::size_t n = series.size();
  const double nd = static_cast<double>(n);
  const double tq = student_t_quantile(0.975, nd - 1.0);

  std::vector<double> x(n);
  for (std::size_t i = 0; i < agg.steps.size(); ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto& v = field_of(series[j], field);
      x[j] = v[std::min(i, v.size() - 1)];
    }
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    if (*lo == *hi) {
      agg.mean.push_back(*lo);
      agg.half_width.push_back(0.0);
      continue;
    }
    double sum = 0.0;
    for (double v : x) sum += v;
    const double mean = sum / nd;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double s = std::sqrt(ss / (nd - 1.0));
    agg.mean.push_back(mean);
    agg.half_width.push_back(tq * s / std::sqrt(nd));
  }
  return agg;
}

double max_mean_inv_pi_sq(const std::vector<RunSeries>& runs) {
  if (runs.empty()) return 0.0;
  std::size_t len = 0;
  for (const RunSeries& rs : runs) len = std::max(len, rs.p_star.size());
  double best = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    double sum = 0.0;
    for (const RunSeries& rs : runs) {
      const double p = rs.p_star[std::min(i, rs.p_star.size() - 1)];
      sum += 1.0 / (p * p);
    }
    best = std::max(best, sum / static_cast<double>(runs.size()));
  }
  return best;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw std::runtime_error("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string short_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace

std::string to_csv(const AggregateSeries& agg) {
  std::string out = "step,mean,ci_lo,ci_hi\n";
  const SeriesTable t = to_table(agg);
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    out += std::to_string(t.steps[i]);
    out += ',' + format_double(t.mean[i]);
    out += ',' + format_double(t.ci_lo[i]);
    out += ',' + format_double(t.ci_hi[i]);
    out += '\n';
  }
  return out;
}

void emit_csv(const AggregateSeries& agg, const std::filesystem::path& path) {
  if (agg.steps.empty()) throw std::invalid_argument("emit: refusing to write an empty series to " + path.string());
  if (agg.mean.size() != agg.steps.size() || agg.half_width.size() != agg.steps.size())
    throw std::invalid_argument("emit: ragged series");
  write_file(path, to_csv(agg));
}

SeriesTable parse_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || trim(line) != "step,mean,ci_lo,ci_hi")
    throw std::runtime_error(path.string() + ": unexpected header");
  SeriesTable t;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::string_view rest = line;
    std::string_view cols[4];
    for (int c = 0; c < 4; ++c) {
      const auto comma = rest.find(',');
      if ((c < 3) == (comma == std::string_view::npos))
        throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected 4 columns");
      cols[c] = rest.substr(0, comma);
      if (comma != std::string_view::npos) rest.remove_prefix(comma + 1);
    }
    t.steps.push_back(parse_uint(cols[0]));
    t.mean.push_back(parse_double(cols[1]));
    t.ci_lo.push_back(parse_double(cols[2]));
    t.ci_hi.push_back(parse_double(cols[3]));
  }
  return t;
}

void emit_svg(const std::vector<LabeledSeries>& lines, const std::string& title,
              const std::filesystem::path& path) {
  if (lines.empty()) throw std::invalid_argument("emit_svg: nothing to plot");
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  constexpr double W = 800, H = 480, L = 70, R = 150, Tm = 40, B = 50;

  double x_max = 1.0, y_min = std::numeric_limits<double>::infinity(), y_max = -y_min;
  for (const auto& ls : lines) {
    if (!ls.series || ls.series->steps.empty()) throw std::invalid_argument("emit_svg: empty series");
    const auto& s = *ls.series;
    x_max = std::max(x_max, static_cast<double>(s.steps.back()));
    for (std::size_t i = 0; i < s.mean.size(); ++i) {
      y_min = std::min(y_min, s.mean[i] - s.half_width[i]);
      y_max = std::max(y_max, s.mean[i] + s.half_width[i]);
    }
  }
  if (!(y_max > y_min)) {
    y_min -= 0.5;
    y_max += 0.5;
  }
  auto px = [&](double x) { return L + (W - L - R) * x / x_max; };
  auto py = [&](double y) { return Tm + (H - Tm - B) * (1.0 - (y - y_min) / (y_max - y_min)); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n"
      << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << L << "\" y1=\"" << Tm << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double yv = y_min + (y_max - y_min) * k / 4.0;
    const double xv = x_max * k / 4.0;
    svg << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << short_num(yv) << "</text>\n"
        << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">" << short_num(xv) << "</text>\n";
  }
  svg << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">step</text>\n";

  for (std::size_t k = 0; k < lines.size(); ++k) {
    const auto& s = *lines[k].series;
    const char* color = kColors[k % std::size(kColors)];
    svg << "<polygon fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < s.steps.size(); ++i)
      svg << short_num(px(static_cast<double>(s.steps[i]))) << ',' << short_num(py(s.mean[i] + s.half_width[i])) << ' ';
    for (std::size_t i = s.steps.size(); i-- > 0;)
      svg << short_num(px(static_cast<double>(s.steps[i]))) << ',' << short_num(py(s.mean[i] - s.half_width[i])) << ' ';
    svg << "\"/>\n<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.steps.size(); ++i)
      svg << short_num(px(static_cast<double>(s.steps[i]))) << ',' << short_num(py(s.mean[i])) << ' ';
    svg << "\"/>\n";
    const double ly = Tm + 20.0 * static_cast<double>(k);
    svg << "<line x1=\"" << W - R + 15 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 35 << "\" y2=\"" << ly
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << W - R + 40 << "\" y=\"" << ly + 4 << "\">" << lines[k].label << "</text>\n";
  }
  svg << "</svg>\n";
  write_file(path, svg.str());
}

void emit_run_csv(const RunSeries& run, const std::filesystem::path& path) {
  if (run.steps.empty()) throw std::invalid_argument("emit: refusing to write an empty run to " + path.string());
  std::string out = "step,p_star,cum_regret\n";
  for (std::size_t i = 0; i < run.steps.size(); ++i)
    out += std::to_string(run.steps[i]) + ',' + format_double(run.p_star[i]) + ',' +
           format_double(run.cum_regret[i]) + '\n';
  write_file(path, out);
}

std::string summarize(const ExperimentResult& result) {
  const ExperimentConfig& cfg = result.config;
  std::ostringstream out;
  out << "experiment " << cfg.name << ": K=" << cfg.K << " r_max=" << short_num(cfg.r_max)
      << " delta_star=" << short_num(cfg.delta_star) << " T=" << cfg.T
      << " runs=" << cfg.n_runs << " noise=" << to_string(cfg.noise) << " seed=" << cfg.base_seed << '\n';
  for (std::size_t a = 0; a < result.algorithms.size(); ++a) {
    const AlgorithmResult& ar = result.algorithms[a];
    const StepRule& rule = cfg.algorithms[a];
    out << ar.algorithm << " alpha=" << short_num(rule.alpha);
    if (rule.kind == AlgorithmKind::LBSGB) out << " eta=" << format_eta(rule.barrier);
    if (rule.kind == AlgorithmKind::ENT) out << " tau=" << short_num(rule.tau);
    out << " final_p_star=" << short_num(ar.p_star.mean.back()) << " +- "
        << short_num(ar.p_star.half_width.back()) << " final_regret=" << short_num(ar.regret.mean.back())
        << " collapsed=" << ar.n_collapsed;
    if (cfg.diagnostics.check_astar_bound && rule.kind == AlgorithmKind::LBSGB)
      out << " astar_violations=" << ar.astar_violations;
    if (cfg.diagnostics.track_inv_pi_sq) out << " max_mean_inv_pi_sq=" << short_num(ar.max_mean_inv_pi_sq);
    out << '\n';
  }
  return out.str();
}

std::filesystem::path write_outputs(const ExperimentResult& result,
                                    const std::filesystem::path& dir) {
  const std::filesystem::path root = dir / result.config.name;
  std::vector<LabeledSeries> p_lines, r_lines;
  for (const AlgorithmResult& ar : result.algorithms) {
    emit_csv(ar.p_star, root / (ar.algorithm + "_p_star.csv"));
    emit_csv(ar.regret, root / (ar.algorithm + "_regret.csv"));
    for (const RunSeries& rs : ar.runs)
      emit_run_csv(rs, root / "runs" / (ar.algorithm + "_run" + std::to_string(rs.run_id) + ".csv"));
    p_lines.push_back({ar.algorithm, &ar.p_star});
    r_lines.push_back({ar.algorithm, &ar.regret});
  }
  emit_svg(p_lines, result.config.name + ": mean pi(a*) with 95% t-interval", root / "p_star.svg");
  emit_svg(r_lines, result.config.name + ": mean pseudo-regret with 95% t-interval", root / "regret.svg");
  write_file(root / "summary.txt", summarize(result));
  return root;
}

std::filesystem::path default_output_dir() {
  if (const char* env = std::getenv("LBSGB_OUTPUT_DIR"); env && *env) return env;
  return "out";
}

}  // namespace lbsgb
