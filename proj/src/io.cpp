#include "nfdm/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace nfdm {

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

void write_signal_csv(std::ostream& os, const TimeSignal& s) {
  os << "# nfdm-signal schema " << kSchemaVersion << "\n";
  os << "t,re,im\n";
  for (int k = 0; k < s.size(); ++k) {
    os << format_double(s.grid.t(k)) << ',' << format_double(s.samples(k).real()) << ','
       << format_double(s.samples(k).imag()) << '\n';
  }
}

namespace {

double parse_number(const std::string& field, int line) {
  double v = 0;
  const char* b = field.data();
  const char* e = b + field.size();
  while (b < e && *b == ' ') ++b;
  while (e > b && (e[-1] == ' ' || e[-1] == '\r')) --e;
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e)
    throw NfdmError(ErrorCode::Parse, "line " + std::to_string(line) + ": bad number '" + field + "'");
  return v;
}

TimeSignal from_columns(const std::vector<double>& t, VectorXc q) {
  const int n = static_cast<int>(t.size());
  if (n < 2) throw NfdmError(ErrorCode::Parse, "signal needs at least 2 samples");
  const double dt = (t.back() - t.front()) / (n - 1);
  for (int k = 1; k < n; ++k)
    if (std::abs((t[k] - t[k - 1]) - dt) > 1e-6 * std::abs(dt))
      throw NfdmError(ErrorCode::Parse, "time column is not uniformly spaced near sample " + std::to_string(k));
  return TimeSignal(TimeGrid(n, t.front(), dt), std::move(q));
}

}  // namespace

TimeSignal read_signal_csv(std::istream& is) {
  std::vector<double> t;
  std::vector<cplx> q;
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen && (line[0] == 't' || line[0] == 'T')) {
      header_seen = true;
      continue;
    }
    std::stringstream ss(line);
    std::string a, b, c;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c))
      throw NfdmError(ErrorCode::Parse, "line " + std::to_string(lineno) + ": expected 3 columns");
    t.push_back(parse_number(a, lineno));
    q.emplace_back(parse_number(b, lineno), parse_number(c, lineno));
  }
  VectorXc s(static_cast<Eigen::Index>(q.size()));
  for (std::size_t k = 0; k < q.size(); ++k) s(static_cast<Eigen::Index>(k)) = q[k];
  return from_columns(t, std::move(s));
}

nlohmann::json signal_to_json(const TimeSignal& s) {
  nlohmann::json j;
  j["schema"] = kSchemaVersion;
  j["grid"] = {{"n_samples", s.grid.n_samples}, {"t_start", s.grid.t_start}, {"dt", s.grid.dt}};
  std::vector<double> re(s.size()), im(s.size());
  for (int k = 0; k < s.size(); ++k) {
    re[k] = s.samples(k).real();
    im[k] = s.samples(k).imag();
  }
  j["re"] = re;
  j["im"] = im;
  return j;
}

TimeSignal signal_from_json(const nlohmann::json& j) {
  try {
    const auto& g = j.at("grid");
    TimeGrid grid(g.at("n_samples").get<int>(), g.at("t_start").get<double>(), g.at("dt").get<double>());
    const auto re = j.at("re").get<std::vector<double>>();
    const auto im = j.at("im").get<std::vector<double>>();
    if (re.size() != im.size() || static_cast<int>(re.size()) != grid.n_samples)
      throw NfdmError(ErrorCode::Parse, "sample arrays do not match grid");
    VectorXc s(grid.n_samples);
    for (int k = 0; k < grid.n_samples; ++k) s(k) = cplx(re[k], im[k]);
    return TimeSignal(grid, std::move(s));
  } catch (const nlohmann::json::exception& e) {
    throw NfdmError(ErrorCode::Parse, e.what());
  }
}

nlohmann::json spectrum_to_json(const DiscreteSpectrum& ds, const ContinuousSpectrum* cs) {
  nlohmann::json j;
  j["schema"] = kSchemaVersion;
  j["discrete"] = nlohmann::json::array();
  for (const auto& e : ds.entries)
    j["discrete"].push_back({{"re_lambda", e.lambda.real()},
                             {"im_lambda", e.lambda.imag()},
                             {"re_amp", e.amplitude.real()},
                             {"im_amp", e.amplitude.imag()}});
  nlohmann::json c = {{"lambda", nlohmann::json::array()}, {"re", nlohmann::json::array()}, {"im", nlohmann::json::array()}};
  if (cs) {
    for (Eigen::Index k = 0; k < cs->lambda_grid.size(); ++k) {
      c["lambda"].push_back(cs->lambda_grid(k));
      c["re"].push_back(cs->values(k).real());
      c["im"].push_back(cs->values(k).imag());
    }
  }
  j["continuous"] = c;
  return j;
}

DiscreteSpectrum discrete_from_json(const nlohmann::json& j) {
  try {
    DiscreteSpectrum ds;
    for (const auto& e : j.at("discrete"))
      ds.entries.push_back({cplx(e.at("re_lambda").get<double>(), e.at("im_lambda").get<double>()),
                            cplx(e.at("re_amp").get<double>(), e.at("im_amp").get<double>())});
    return ds;
  } catch (const nlohmann::json::exception& e) {
    throw NfdmError(ErrorCode::Parse, e.what());
  }
}

ContinuousSpectrum continuous_from_json(const nlohmann::json& j) {
  try {
    ContinuousSpectrum cs;
    const auto& c = j.at("continuous");
    const auto l = c.at("lambda").get<std::vector<double>>();
    const auto re = c.at("re").get<std::vector<double>>();
    const auto im = c.at("im").get<std::vector<double>>();
    if (l.size() != re.size() || l.size() != im.size())
      throw NfdmError(ErrorCode::Parse, "continuous spectrum arrays differ in length");
    cs.lambda_grid = Eigen::Map<const VectorXr>(l.data(), static_cast<Eigen::Index>(l.size()));
    cs.values.resize(static_cast<Eigen::Index>(l.size()));
    for (std::size_t k = 0; k < l.size(); ++k) cs.values(static_cast<Eigen::Index>(k)) = cplx(re[k], im[k]);
    return cs;
  } catch (const nlohmann::json::exception& e) {
    throw NfdmError(ErrorCode::Parse, e.what());
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw NfdmError(ErrorCode::Io, "cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

static bool ends_with(const std::string& s, const std::string& suf) {
  return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

TimeSignal load_signal(const std::string& path) {
  if (ends_with(path, ".json")) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
      throw NfdmError(ErrorCode::Parse, e.what());
    }
    return signal_from_json(j);
  }
  std::ifstream f(path);
  if (!f) throw NfdmError(ErrorCode::Io, "cannot open " + path);
  return read_signal_csv(f);
}

void save_signal(const std::string& path, const TimeSignal& s) {
  std::ofstream f(path);
  if (!f) throw NfdmError(ErrorCode::Io, "cannot write " + path);
  if (ends_with(path, ".json"))
    f << signal_to_json(s).dump(1) << '\n';
  else
    write_signal_csv(f, s);
}

}  // namespace nfdm
