#include "cho/trace_io.hpp"

#include <charconv>
#include <istream>
#include <iterator>
#include <map>
#include <ostream>
#include <string_view>

#include <fmt/format.h>

#include "cho/error.hpp"

namespace cho {

namespace {

void flush(std::ostream& out, const fmt::memory_buffer& buf) {
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

std::string opt(const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string(); }

std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

std::string_view trim_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view text, std::size_t line_no, std::string_view column) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty())
    throw DataError(fmt::format("line {}: column {}: '{}' is not a number", line_no, column, text));
  return value;
}

ChoState parse_state(const StateSpace& space, std::string_view text, std::size_t line_no) {
  auto s = space.parse(text);
  if (!s) throw DataError(fmt::format("line {}: state '{}' is not part of the chain", line_no, text));
  return *s;
}

std::string matrix_header(const StateSpace& space) {
  std::string h = "from";
  for (int i = 0; i < space.size(); ++i) h += "," + space.name(i);
  return h;
}

}  // namespace

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "{} prep_states={} exec_states={} t_sample_ms={} fingerprint={:016x}\n",
                 kTraceMagic, trace.space.prep_states(), trace.space.exec_states(), trace.t_sample_ms,
                 trace.fingerprint);
  fmt::format_to(std::back_inserter(buf), "{}\n", kTraceHeader);
  for (const auto& ev : trace.events) {
    fmt::format_to(std::back_inserter(buf), "{},{},{},{},{},{},{},{},{},{}\n", ev.time_ms, ev.ue_id,
                   trace.space.name(ev.from), trace.space.name(ev.to), cause_name(ev.cause), ev.serving_gnb,
                   ev.target_gnb, ev.p1_dbm, ev.p2_dbm, ev.sinr_db);
    if (buf.size() > (1u << 20)) {
      flush(out, buf);
      buf.clear();
    }
  }
  flush(out, buf);
}

LoadedTrace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("trace: file is empty");
  std::string_view meta = trim_cr(line);
  if (!meta.starts_with(kTraceMagic))
    throw DataError(fmt::format("trace: first line must start with '{}'", kTraceMagic));

  std::optional<int> n, m;
  LoadedTrace out;
  for (auto field : split(meta.substr(kTraceMagic.size()), ' ')) {
    if (field.empty()) continue;
    const auto eq = field.find('=');
    if (eq == std::string_view::npos) throw DataError(fmt::format("trace: malformed metadata '{}'", field));
    const auto key = field.substr(0, eq);
    const auto value = field.substr(eq + 1);
    if (key == "prep_states") {
      n = parse_number<int>(value, 1, key);
    } else if (key == "exec_states") {
      m = parse_number<int>(value, 1, key);
    } else if (key == "t_sample_ms") {
      out.t_sample_ms = parse_number<std::int64_t>(value, 1, key);
    } else if (key == "fingerprint") {
      std::uint64_t fp = 0;
      const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), fp, 16);
      if (ec != std::errc() || ptr != value.data() + value.size())
        throw DataError("trace: fingerprint is not hexadecimal");
      out.fingerprint = fp;
    }
  }
  if (!n || !m || *n < 0 || *m < 0 || (*n == 0 && *m == 0))
    throw DataError("trace: metadata must give prep_states and exec_states (not both zero)");
  if (out.t_sample_ms <= 0) throw DataError("trace: t_sample_ms must be positive");
  out.space = StateSpace(*n, *m);

  if (!std::getline(in, line) || trim_cr(line) != kTraceHeader)
    throw DataError(fmt::format("trace: second line must be the header '{}'", kTraceHeader));

  struct Last {
    std::int64_t time_ms;
    ChoState to;
  };
  std::map<int, Last> last;
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim_cr(line);
    if (row.empty()) continue;
    const auto cols = split(row);
    if (cols.size() != 10)
      throw DataError(fmt::format("line {}: expected 10 columns, found {}", line_no, cols.size()));
    TraceEvent ev;
    ev.time_ms = parse_number<std::int64_t>(cols[0], line_no, "time_ms");
    ev.ue_id = parse_number<int>(cols[1], line_no, "ue_id");
    ev.from = parse_state(out.space, cols[2], line_no);
    ev.to = parse_state(out.space, cols[3], line_no);
    const auto cause = parse_cause(cols[4]);
    if (!cause) throw DataError(fmt::format("line {}: unknown cause '{}'", line_no, cols[4]));
    ev.cause = *cause;
    ev.serving_gnb = parse_number<int>(cols[5], line_no, "serving_gnb");
    ev.target_gnb = parse_number<int>(cols[6], line_no, "target_gnb");
    ev.p1_dbm = parse_number<double>(cols[7], line_no, "p1_dbm");
    ev.p2_dbm = parse_number<double>(cols[8], line_no, "p2_dbm");
    ev.sinr_db = parse_number<double>(cols[9], line_no, "sinr_db");

    if (ev.time_ms <= 0 || ev.time_ms % out.t_sample_ms != 0)
      throw DataError(fmt::format("line {}: time {} is not a positive multiple of {} ms", line_no, ev.time_ms,
                                  out.t_sample_ms));
    if (auto it = last.find(ev.ue_id); it != last.end()) {
      if (ev.time_ms != it->second.time_ms + out.t_sample_ms)
        throw DataError(fmt::format("line {}: UE {} sample at {} ms does not follow {} ms", line_no, ev.ue_id,
                                    ev.time_ms, it->second.time_ms));
      if (ev.from != it->second.to)
        throw DataError(fmt::format("line {}: UE {} starts in {} but previously moved to {}", line_no, ev.ue_id,
                                    out.space.name(ev.from), out.space.name(it->second.to)));
    }
    last[ev.ue_id] = {ev.time_ms, ev.to};
    out.events.push_back(ev);
  }
  if (out.events.empty()) throw DataError("trace: no events");
  return out;
}

void write_matrix_csv(std::ostream& out, const StateSpace& space, const Eigen::MatrixXd& p) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "{}\n", matrix_header(space));
  for (int i = 0; i < space.size(); ++i) {
    fmt::format_to(std::back_inserter(buf), "{}", space.name(i));
    for (int j = 0; j < space.size(); ++j) fmt::format_to(std::back_inserter(buf), ",{}", p(i, j));
    fmt::format_to(std::back_inserter(buf), "\n");
  }
  flush(out, buf);
}

void write_counts_csv(std::ostream& out, const TransitionMatrix& m) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "{}\n", matrix_header(m.space));
  for (int i = 0; i < m.space.size(); ++i) {
    fmt::format_to(std::back_inserter(buf), "{}", m.space.name(i));
    for (int j = 0; j < m.space.size(); ++j) fmt::format_to(std::back_inserter(buf), ",{}", m.count(i, j));
    fmt::format_to(std::back_inserter(buf), "\n");
  }
  flush(out, buf);
}

TransitionMatrix read_matrix_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("matrix: file is empty");
  const auto header = split(trim_cr(line));
  if (header.size() < 4 || header[0] != "from") throw DataError("matrix: header must be 'from,NORM,...,HOF'");
  int n = 0, m = 0;
  bool after_wait = false;
  for (std::size_t k = 1; k < header.size(); ++k) {
    const auto name = header[k];
    if (name == "WAIT") after_wait = true;
    else if (!after_wait && name.starts_with('A')) ++n;
    else if (after_wait && name.starts_with('B')) ++m;
  }
  if (static_cast<int>(header.size()) - 1 != n + m + 3 || (n == 0 && m == 0))
    throw DataError("matrix: header does not name a NORM, A1..An, WAIT, B1..Bm, HOF chain");
  TransitionMatrix out;
  out.space = StateSpace(n, m);
  for (int k = 0; k < out.space.size(); ++k)
    if (header[static_cast<std::size_t>(k) + 1] != out.space.name(k))
      throw DataError(fmt::format("matrix: column {} should be {}", k + 1, out.space.name(k)));

  const int size = out.space.size();
  out.p = Eigen::MatrixXd::Zero(size, size);
  for (int i = 0; i < size; ++i) {
    if (!std::getline(in, line)) throw DataError(fmt::format("matrix: missing row {}", out.space.name(i)));
    const auto cols = split(trim_cr(line));
    if (static_cast<int>(cols.size()) != size + 1 || cols[0] != out.space.name(i))
      throw DataError(fmt::format("matrix: row {} is malformed", i + 2));
    for (int j = 0; j < size; ++j)
      out.p(i, j) = parse_number<double>(cols[static_cast<std::size_t>(j) + 1], static_cast<std::size_t>(i) + 2,
                                         out.space.name(j));
  }
  out.counts.assign(static_cast<std::size_t>(size * size), 0);
  return out;
}

bool looks_like_trace(std::istream& in) {
  std::string prefix(kTraceMagic.size(), '\0');
  const auto pos = in.tellg();
  in.read(prefix.data(), static_cast<std::streamsize>(prefix.size()));
  const bool match = in.gcount() == static_cast<std::streamsize>(prefix.size()) && prefix == kTraceMagic;
  in.clear();
  in.seekg(pos);
  return match;
}

void write_stationary_csv(std::ostream& out, const StateSpace& space, const StationaryDistribution& s) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "state,pi\n");
  for (int i = 0; i < space.size(); ++i) fmt::format_to(std::back_inserter(buf), "{},{}\n", space.name(i), s.pi(i));
  flush(out, buf);
}

void write_closed_form_csv(std::ostream& out, const ClosedFormResult& cf, const ErgodicityReport& ergodicity,
                           const StationaryDistribution& s, const std::vector<int>& unobserved_rows,
                           const StateSpace& space) {
  fmt::memory_buffer buf;
  auto row = [&buf](std::string_view key, const std::string& value) {
    fmt::format_to(std::back_inserter(buf), "{},{}\n", key, value);
  };
  row("key", "value");
  row("ergodicity", ergodicity.describe(&space));
  row("lemma_k", ergodicity.lemma_k ? fmt::format("{}", *ergodicity.lemma_k) : std::string());
  row("residual", fmt::format("{}", s.residual));
  row("solved_pi_hof", fmt::format("{}", cf.solved_pi_hof));
  row("closed_form_pi_hof", opt(cf.pi_hof));
  row("closed_form_pi_norm", opt(cf.pi_norm));
  row("closed_form_pi_wait", opt(cf.pi_wait));
  row("discrepancy", opt(cf.discrepancy));
  row("undefined_reason", cf.undefined_reason);
  row("alpha_cf", fmt::format("{}", cf.aux.alpha_cf));
  row("beta_cf", fmt::format("{}", cf.aux.beta_cf));
  row("phi_cf", fmt::format("{}", cf.aux.phi_cf));
  row("delta_cf", fmt::format("{}", cf.aux.delta_cf));
  row("lambda_cf", fmt::format("{}", cf.aux.lambda_cf));
  for (std::size_t i = 0; i < cf.aux.a.size(); ++i) row(fmt::format("a{}", i + 1), fmt::format("{}", cf.aux.a[i]));
  for (std::size_t j = 0; j < cf.aux.b.size(); ++j) row(fmt::format("b{}", j + 1), fmt::format("{}", cf.aux.b[j]));
  std::string unobserved;
  for (int r : unobserved_rows) unobserved += (unobserved.empty() ? "" : " ") + space.name(r);
  row("unobserved_rows", unobserved);
  flush(out, buf);
}

void write_links_csv(std::ostream& out, const RunTrace& trace) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "time_ms,ue_id");
  const std::size_t gnbs = trace.links.empty() ? 0 : trace.links.front().rsrp_dbm.size();
  for (std::size_t g = 0; g < gnbs; ++g) fmt::format_to(std::back_inserter(buf), ",rsrp_dbm_{}", g);
  fmt::format_to(std::back_inserter(buf), ",sinr_db\n");
  for (const auto& l : trace.links) {
    fmt::format_to(std::back_inserter(buf), "{},{}", l.time_ms, l.ue_id);
    for (double r : l.rsrp_dbm) fmt::format_to(std::back_inserter(buf), ",{}", r);
    fmt::format_to(std::back_inserter(buf), ",{}\n", l.sinr_db);
  }
  flush(out, buf);
}

void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf),
                 "axis,value,fading,seeds,hi_rate_per_s,hi_rate_hw,p_rlf,p_rlf_hw,p_hof,p_hof_hw,"
                 "mean_latency_ms,latency_hw_ms,completed_handovers,hof_events,rlf_events,prep_entries,observed_s,"
                 "hof_occupancy,markov_pi_hof,markov_p_hof,closed_form_pi_hof,closed_form_discrepancy");
  if (!rows.empty())
    for (const auto& pl : rows.front().report.packet_loss)
      fmt::format_to(std::back_inserter(buf), ",loss_{}pps,loss_{}pps_hw", pl.packets_per_s, pl.packets_per_s);
  fmt::format_to(std::back_inserter(buf), "\n");
  for (const auto& r : rows) {
    const MetricsReport& m = r.report;
    fmt::format_to(std::back_inserter(buf), "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}", r.axis,
                   r.value, r.fading, r.seeds, m.hi_rate_per_s, m.hi_rate_halfwidth, opt(m.p_rlf), m.p_rlf_halfwidth,
                   opt(m.p_hof), m.p_hof_halfwidth, opt(m.mean_latency_ms), m.latency_halfwidth_ms, m.successes,
                   m.hof_events, m.rlf_events, m.prep_entries, m.observed_s, m.hof_occupancy, opt(r.markov_pi_hof),
                   opt(r.markov_p_hof), opt(r.closed_form_pi_hof), opt(r.closed_form_discrepancy));
    for (const auto& pl : m.packet_loss) fmt::format_to(std::back_inserter(buf), ",{},{}", opt(pl.loss), pl.halfwidth);
    fmt::format_to(std::back_inserter(buf), "\n");
  }
  flush(out, buf);
}

void write_latencies_csv(std::ostream& out, std::span<const MetricsRow> rows) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "axis,value,fading,latency_ms\n");
  for (const auto& r : rows)
    for (double l : r.report.latency_samples_ms)
      fmt::format_to(std::back_inserter(buf), "{},{},{},{}\n", r.axis, r.value, r.fading, l);
  flush(out, buf);
}

}  // namespace cho
