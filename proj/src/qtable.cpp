#include "rlbalance/qtable.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "rlbalance/metrics.hpp"

namespace rlbalance {

std::size_t DiscreteStateHash::operator()(const DiscreteState& s) const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](std::uint64_t v) {
    h ^= v;
    h *= 0x100000001b3ULL;
  };
  for (auto b : s.util_bins) mix(b);
  mix(0x10000u + s.active_tasks_bin);
  mix(0x20000u + s.load_bin);
  for (auto b : s.queue_bins) mix(0x30000u + b);
  return static_cast<std::size_t>(h);
}

QTable::Row& QTable::row(const DiscreteState& s) {
  auto [it, inserted] = rows_.try_emplace(s);
  if (inserted) {
    it->second.q.assign(num_actions_, 0.0);
    it->second.visits.assign(num_actions_, 0);
  }
  return it->second;
}

std::size_t QTable::num_entries() const {
  std::size_t n = 0;
  for (const auto& [s, r] : rows_) {
    n += static_cast<std::size_t>(std::count_if(r.visits.begin(), r.visits.end(),
                                                [](std::uint64_t v) { return v > 0; }));
  }
  return n;
}

double QTable::value(const DiscreteState& s, std::size_t action) const {
  auto it = rows_.find(s);
  return it == rows_.end() ? 0.0 : it->second.q.at(action);
}

std::uint64_t QTable::visits(const DiscreteState& s, std::size_t action) const {
  auto it = rows_.find(s);
  return it == rows_.end() ? 0 : it->second.visits.at(action);
}

double QTable::max_value(const DiscreteState& s) const {
  auto it = rows_.find(s);
  if (it == rows_.end() || num_actions_ == 0) return 0.0;
  return *std::max_element(it->second.q.begin(), it->second.q.end());
}

std::size_t QTable::best_action(const DiscreteState& s) const {
  auto it = rows_.find(s);
  if (it == rows_.end()) return 0;
  const auto& q = it->second.q;
  return static_cast<std::size_t>(std::max_element(q.begin(), q.end()) - q.begin());
}

std::size_t QTable::best_visited_action(const DiscreteState& s) const {
  auto it = rows_.find(s);
  if (it == rows_.end()) return 0;
  const auto& q = it->second.q;
  const auto& v = it->second.visits;
  std::size_t best = num_actions_;
  for (std::size_t a = 0; a < num_actions_; ++a) {
    if (v[a] == 0) continue;
    if (best == num_actions_ || q[a] > q[best]) best = a;
  }
  return best == num_actions_ ? best_action(s) : best;
}

void QTable::store(const DiscreteState& s, std::size_t action, double q) {
  if (!std::isfinite(q)) throw EngineError("refusing to store a non-finite Q-value");
  if (action >= num_actions_) throw EngineError("action " + std::to_string(action) + " out of range");
  Row& r = row(s);
  r.q[action] = q;
  ++r.visits[action];
}

void QTable::set_entry(const DiscreteState& s, std::size_t action, double q, std::uint64_t visits) {
  if (!std::isfinite(q)) throw ValidationError("non-finite Q-value");
  if (action >= num_actions_) throw ValidationError("action " + std::to_string(action) + " out of range");
  Row& r = row(s);
  r.q[action] = q;
  r.visits[action] = visits;
}

std::vector<QTable::Entry> QTable::entries() const {
  std::vector<Entry> out;
  for (const auto& [s, r] : rows_) {
    for (std::size_t a = 0; a < num_actions_; ++a) {
      if (r.visits[a] > 0) out.push_back(Entry{s, a, r.q[a], r.visits[a]});
    }
  }
  std::sort(out.begin(), out.end(), [](const Entry& x, const Entry& y) {
    if (x.state != y.state) return x.state < y.state;
    return x.action < y.action;
  });
  return out;
}

bool QTable::operator==(const QTable& other) const {
  if (num_actions_ != other.num_actions_) return false;
  const auto mine = entries();
  const auto theirs = other.entries();
  if (mine.size() != theirs.size()) return false;
  for (std::size_t i = 0; i < mine.size(); ++i) {
    const auto& a = mine[i];
    const auto& b = theirs[i];
    if (a.state != b.state || a.action != b.action || a.visit_count != b.visit_count) return false;
    if (std::memcmp(&a.q_value, &b.q_value, sizeof(double)) != 0) return false;
  }
  return true;
}

namespace {

constexpr const char* kMagic = "rl-balance-qtable 1";
constexpr const char* kColumns = "state,action,q_value,visit_count";

std::string state_text(const DiscreteState& s) {
  std::string out;
  for (std::size_t i = 0; i < s.util_bins.size(); ++i) {
    if (i > 0) out += ':';
    out += std::to_string(s.util_bins[i]);
  }
  out += '|';
  out += std::to_string(s.active_tasks_bin);
  out += '|';
  out += std::to_string(s.load_bin);
  if (!s.queue_bins.empty()) {
    out += '|';
    for (std::size_t i = 0; i < s.queue_bins.size(); ++i) {
      if (i > 0) out += ':';
      out += std::to_string(s.queue_bins[i]);
    }
  }
  return out;
}

std::uint16_t parse_bin(const std::string& text, std::size_t line) {
  std::size_t pos = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != text.size() || text.empty() || v > 0xffff) {
    throw ValidationError("qtable line " + std::to_string(line) + ": bad bin '" + text + "'");
  }
  return static_cast<std::uint16_t>(v);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string::npos) return parts;
    start = pos + 1;
  }
}

std::vector<std::uint16_t> parse_bins(const std::string& text, std::size_t line) {
  std::vector<std::uint16_t> bins;
  for (const auto& part : split(text, ':')) bins.push_back(parse_bin(part, line));
  return bins;
}

DiscreteState parse_state(const std::string& text, std::size_t line) {
  const auto parts = split(text, '|');
  if (parts.size() != 3 && parts.size() != 4) {
    throw ValidationError("qtable line " + std::to_string(line) + ": bad state '" + text + "'");
  }
  DiscreteState s;
  s.util_bins = parse_bins(parts[0], line);
  s.active_tasks_bin = parse_bin(parts[1], line);
  s.load_bin = parse_bin(parts[2], line);
  if (parts.size() == 4) s.queue_bins = parse_bins(parts[3], line);
  return s;
}

}  // namespace

std::string serialize_qtable(const QTable& table) {
  std::string out = std::string(kMagic) + "\n";
  out += "num_actions " + std::to_string(table.num_actions()) + "\n";
  out += std::string(kColumns) + "\n";
  char buf[64];
  for (const auto& e : table.entries()) {
    std::snprintf(buf, sizeof buf, "%.17g", e.q_value);
    out += state_text(e.state) + "," + std::to_string(e.action) + "," + buf + "," +
           std::to_string(e.visit_count) + "\n";
  }
  return out;
}

QTable deserialize_qtable(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kMagic) {
    throw ValidationError("not a version-1 qtable file (expected '" + std::string(kMagic) + "')");
  }
  std::size_t num_actions = 0;
  if (!std::getline(in, line) || std::sscanf(line.c_str(), "num_actions %zu", &num_actions) != 1) {
    throw ValidationError("qtable line 2: expected 'num_actions <N>'");
  }
  if (!std::getline(in, line) || line != kColumns) {
    throw ValidationError("qtable line 3: expected header '" + std::string(kColumns) + "'");
  }
  QTable table(num_actions);
  std::size_t lineno = 3;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    const auto c3 = c2 == std::string::npos ? c2 : line.find(',', c2 + 1);
    if (c3 == std::string::npos) {
      throw ValidationError("qtable line " + std::to_string(lineno) + ": expected 4 fields");
    }
    const DiscreteState s = parse_state(line.substr(0, c1), lineno);
    try {
      std::size_t pos = 0;
      const std::string action_text = line.substr(c1 + 1, c2 - c1 - 1);
      const std::size_t action = std::stoul(action_text, &pos);
      if (pos != action_text.size()) throw std::invalid_argument("action");
      const std::string q_text = line.substr(c2 + 1, c3 - c2 - 1);
      const double q = std::stod(q_text, &pos);
      if (pos != q_text.size()) throw std::invalid_argument("q");
      const std::string v_text = line.substr(c3 + 1);
      const std::uint64_t visits = std::stoull(v_text, &pos);
      if (pos != v_text.size()) throw std::invalid_argument("visits");
      table.set_entry(s, action, q, visits);
    } catch (const ValidationError&) {
      throw;
    } catch (const std::exception&) {
      throw ValidationError("qtable line " + std::to_string(lineno) + ": malformed row '" + line + "'");
    }
  }
  return table;
}

void save_qtable(const QTable& table, const std::filesystem::path& path) {
  write_text_file(path, serialize_qtable(table));
}

QTable load_qtable(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open qtable " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_qtable(buf.str());
}

}  // namespace rlbalance
