#include "rydpar/encoding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <queue>
#include <set>
#include <sstream>

#include "rydpar/errors.hpp"

namespace rydpar {

namespace {

std::string join(const std::vector<int>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

void check_config(const SpinConfiguration& config, const ParityLayout& layout) {
  if (static_cast<int>(config.size()) != layout.num_qubits())
    throw InputError("spin configuration has " + std::to_string(config.size()) +
                     " entries, layout has " +
                     std::to_string(layout.num_qubits()) + " qubits");
  for (int z : config)
    if (z != 1 && z != -1) throw InputError("spin values must be +1 or -1");
}

}  // namespace

void LogicalProblem::validate() const {
  if (num_logical < 1) throw InputError("num_logical must be at least 1");
  if (terms.empty()) throw InputError("problem has no terms");
  std::set<std::vector<int>> seen;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const auto& s = terms[t].support;
    if (s.empty()) throw InputError("term " + std::to_string(t) + " has empty support");
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] < 0 || s[i] >= num_logical)
        throw InputError("term " + std::to_string(t) + " index " +
                         std::to_string(s[i]) + " out of range");
      if (i > 0 && s[i] <= s[i - 1])
        throw InputError("term " + std::to_string(t) +
                         " support must be sorted and distinct");
    }
    if (!seen.insert(s).second)
      throw InputError("duplicate support {" + join(s) + "}");
    if (!std::isfinite(terms[t].coupling))
      throw InputError("term " + std::to_string(t) + " coupling is not finite");
  }
}

int ParityLayout::num_logical() const {
  int n = 0;
  for (const auto& q : qubits)
    for (int i : q.logical_support) n = std::max(n, i + 1);
  return n;
}

double ParityLayout::default_penalty() const {
  double s = 1.0;
  for (const auto& q : qubits) s += std::abs(q.local_field);
  return s;
}

namespace {

ParityLayout grid_layout(const std::vector<int>& side_a,
                         const std::vector<int>& side_b,
                         const std::vector<std::vector<double>>& couplings) {
  const int n_a = static_cast<int>(side_a.size());
  const int n_b = static_cast<int>(side_b.size());
  ParityLayout layout;
  layout.grid_rows = n_a;
  layout.grid_cols = n_b;
  for (int a = 0; a < n_a; ++a) {
    for (int b = 0; b < n_b; ++b) {
      ParityQubit q;
      q.id = a * n_b + b;
      q.row = a;
      q.col = b;
      q.logical_support = {std::min(side_a[a], side_b[b]),
                           std::max(side_a[a], side_b[b])};
      q.local_field = couplings[a][b];
      layout.qubits.push_back(q);
    }
  }
  for (int a = 0; a + 1 < n_a; ++a)
    for (int b = 0; b + 1 < n_b; ++b)
      layout.plaquettes.push_back({{a * n_b + b, a * n_b + b + 1,
                                    (a + 1) * n_b + b, (a + 1) * n_b + b + 1}});
  layout.penalty_strength = layout.default_penalty();
  return layout;
}

}  // namespace

ParityLayout encode_complete_bipartite(
    int n_a, int n_b, const std::vector<std::vector<double>>& couplings) {
  if (n_a < 2 || n_b < 2) throw InputError("bipartite sides must have at least 2 vertices");
  if (static_cast<int>(couplings.size()) != n_a)
    throw InputError("coupling matrix has " + std::to_string(couplings.size()) +
                     " rows, expected " + std::to_string(n_a));
  for (const auto& row : couplings)
    if (static_cast<int>(row.size()) != n_b)
      throw InputError("coupling matrix row has " + std::to_string(row.size()) +
                       " columns, expected " + std::to_string(n_b));
  std::vector<int> a(n_a), b(n_b);
  for (int i = 0; i < n_a; ++i) a[i] = i;
  for (int j = 0; j < n_b; ++j) b[j] = n_a + j;
  return grid_layout(a, b, couplings);
}

ParityLayout encode_problem(const LogicalProblem& problem) {
  problem.validate();
  const int n = problem.num_logical;
  std::vector<std::vector<int>> adj(n);
  std::map<std::pair<int, int>, double> coupling;
  for (const auto& t : problem.terms) {
    if (t.support.size() != 2)
      throw InputError("automatic encoding supports two-body terms only; supply a layout");
    adj[t.support[0]].push_back(t.support[1]);
    adj[t.support[1]].push_back(t.support[0]);
    coupling[{t.support[0], t.support[1]}] = t.coupling;
  }
  std::vector<int> color(n, -1);
  color[0] = 0;
  std::queue<int> bfs;
  bfs.push(0);
  while (!bfs.empty()) {
    int u = bfs.front();
    bfs.pop();
    for (int v : adj[u]) {
      if (color[v] < 0) {
        color[v] = 1 - color[u];
        bfs.push(v);
      } else if (color[v] == color[u]) {
        throw InputError("interaction graph is not bipartite; supply a layout");
      }
    }
  }
  std::vector<int> side_a, side_b;
  for (int i = 0; i < n; ++i) {
    if (color[i] < 0) throw InputError("interaction graph is disconnected; supply a layout");
    (color[i] == 0 ? side_a : side_b).push_back(i);
  }
  if (side_a.size() < 2 || side_b.size() < 2 ||
      problem.terms.size() != side_a.size() * side_b.size())
    throw InputError("interaction graph is not complete bipartite; supply a layout");
  std::vector<std::vector<double>> j(side_a.size(), std::vector<double>(side_b.size()));
  for (std::size_t a = 0; a < side_a.size(); ++a)
    for (std::size_t b = 0; b < side_b.size(); ++b)
      j[a][b] = coupling.at({std::min(side_a[a], side_b[b]), std::max(side_a[a], side_b[b])});
  return grid_layout(side_a, side_b, j);
}

std::vector<LayoutViolation> validate_layout(const ParityLayout& layout) {
  std::vector<LayoutViolation> out;
  const int k = layout.num_qubits();
  for (int p = 0; p < static_cast<int>(layout.plaquettes.size()); ++p) {
    const auto& members = layout.plaquettes[p].members;
    LayoutViolation v;
    v.plaquette = p;
    if (members.size() != 3 && members.size() != 4) {
      v.non_contiguous = true;
      v.message = "plaquette " + std::to_string(p) + " has " +
                  std::to_string(members.size()) + " members";
      out.push_back(v);
      continue;
    }
    bool bad_id = false;
    for (int m : members) bad_id |= (m < 0 || m >= k);
    if (bad_id) {
      v.non_contiguous = true;
      v.message = "plaquette " + std::to_string(p) + " references unknown qubit";
      out.push_back(v);
      continue;
    }
    std::map<int, int> count;
    for (int m : members)
      for (int i : layout.qubits[m].logical_support) ++count[i];
    for (auto [i, c] : count)
      if (c % 2) v.odd_indices.push_back(i);

    std::set<std::pair<int, int>> cells;
    int r0 = 1 << 30, c0 = 1 << 30;
    for (int m : members) {
      cells.insert({layout.qubits[m].row, layout.qubits[m].col});
      r0 = std::min(r0, layout.qubits[m].row);
      c0 = std::min(c0, layout.qubits[m].col);
    }
    bool contiguous = cells.size() == members.size();
    for (auto [r, c] : cells) contiguous &= (r - r0 <= 1 && c - c0 <= 1);
    v.non_contiguous = !contiguous;

    if (!v.odd_indices.empty() || v.non_contiguous) {
      std::ostringstream os;
      os << "plaquette " << p;
      if (!v.odd_indices.empty()) os << ": odd multiplicity of {" << join(v.odd_indices) << "}";
      if (v.non_contiguous) os << ": members not within one 2x2 cell";
      v.message = os.str();
      out.push_back(v);
    }
  }
  return out;
}

double parity_energy(const SpinConfiguration& config, const ParityLayout& layout) {
  check_config(config, layout);
  double e = 0.0;
  for (int q = 0; q < layout.num_qubits(); ++q) e += layout.qubits[q].local_field * config[q];
  for (const auto& p : layout.plaquettes) {
    int prod = 1;
    for (int m : p.members) prod *= config[m];
    e -= layout.penalty_strength * prod;
  }
  return e;
}

std::vector<int> violated_plaquettes(const SpinConfiguration& config,
                                     const ParityLayout& layout) {
  check_config(config, layout);
  std::vector<int> out;
  for (int p = 0; p < static_cast<int>(layout.plaquettes.size()); ++p) {
    int prod = 1;
    for (int m : layout.plaquettes[p].members) prod *= config[m];
    if (prod < 0) out.push_back(p);
  }
  return out;
}

SpinConfiguration config_from_bits(std::uint64_t bits, int num_qubits) {
  SpinConfiguration z(num_qubits);
  for (int k = 0; k < num_qubits; ++k) z[k] = (bits >> k) & 1 ? -1 : 1;
  return z;
}

std::uint64_t bits_from_config(const SpinConfiguration& config) {
  std::uint64_t bits = 0;
  for (std::size_t k = 0; k < config.size(); ++k)
    if (config[k] < 0) bits |= std::uint64_t{1} << k;
  return bits;
}

Extrema enumerate_extrema(const ParityLayout& layout) {
  const int k = layout.num_qubits();
  if (k < 1) throw InputError("layout has no qubits");
  if (k > 26) throw InputError("exhaustive enumeration limited to 26 qubits, layout has " +
                               std::to_string(k));
  std::vector<std::vector<int>> touching(k);
  for (int p = 0; p < static_cast<int>(layout.plaquettes.size()); ++p)
    for (int m : layout.plaquettes[p].members) touching[m].push_back(p);

  // Gray-code walk: one spin flip per step, energy updated incrementally.
  std::vector<int> z(k, 1);
  std::vector<int> prod(layout.plaquettes.size(), 1);
  long double field = 0.0L;
  for (const auto& q : layout.qubits) field += q.local_field;
  long double product_sum = static_cast<long double>(layout.plaquettes.size());
  const long double c = layout.penalty_strength;

  long double e = field - c * product_sum;
  long double e_min = e, e_max = e;
  std::uint64_t bits = 0, arg_min = 0, arg_max = 0;
  const std::uint64_t total = std::uint64_t{1} << k;
  for (std::uint64_t i = 1; i < total; ++i) {
    const int q = std::countr_zero(i);
    field -= 2.0L * layout.qubits[q].local_field * z[q];
    z[q] = -z[q];
    bits ^= std::uint64_t{1} << q;
    for (int p : touching[q]) {
      product_sum -= prod[p];
      prod[p] = -prod[p];
      product_sum += prod[p];
    }
    e = field - c * product_sum;
    if (e < e_min) {
      e_min = e;
      arg_min = bits;
    }
    if (e > e_max) {
      e_max = e;
      arg_max = bits;
    }
  }
  Extrema out;
  out.argmin = config_from_bits(arg_min, k);
  out.argmax = config_from_bits(arg_max, k);
  out.e_min = parity_energy(out.argmin, layout);
  out.e_max = parity_energy(out.argmax, layout);
  return out;
}

SpinConfiguration encode_logical(const std::vector<int>& logical,
                                 const ParityLayout& layout) {
  if (static_cast<int>(logical.size()) < layout.num_logical())
    throw InputError("logical assignment shorter than layout's logical index range");
  SpinConfiguration z(layout.num_qubits());
  for (int q = 0; q < layout.num_qubits(); ++q) {
    int prod = 1;
    for (int i : layout.qubits[q].logical_support) prod *= logical[i];
    z[q] = prod;
  }
  return z;
}

DecodeResult decode(const SpinConfiguration& config, const ParityLayout& layout) {
  DecodeResult out;
  out.violated_plaquettes = violated_plaquettes(config, layout);
  if (!out.violated_plaquettes.empty()) {
    out.message = "constraint violated on plaquettes {" + join(out.violated_plaquettes) + "}";
    return out;
  }
  // GF(2) system: sum of x_i over the support equals the readout bit.
  // Pivots are taken from the highest index down so the lowest index of each
  // component stays free and is fixed to +1.
  const int n = layout.num_logical();
  const int words = (n + 1 + 63) / 64;  // extra bit column n holds the rhs
  std::vector<std::vector<std::uint64_t>> rows;
  for (int q = 0; q < layout.num_qubits(); ++q) {
    std::vector<std::uint64_t> r(words, 0);
    for (int i : layout.qubits[q].logical_support) r[i / 64] ^= std::uint64_t{1} << (i % 64);
    if (config[q] < 0) r[n / 64] ^= std::uint64_t{1} << (n % 64);
    rows.push_back(std::move(r));
  }
  auto bit = [](const std::vector<std::uint64_t>& r, int i) {
    return (r[i / 64] >> (i % 64)) & 1;
  };
  std::vector<int> pivot_col;
  std::size_t rank = 0;
  for (int c = n - 1; c >= 0 && rank < rows.size(); --c) {
    std::size_t r = rank;
    while (r < rows.size() && !bit(rows[r], c)) ++r;
    if (r == rows.size()) continue;
    std::swap(rows[r], rows[rank]);
    for (std::size_t o = 0; o < rows.size(); ++o)
      if (o != rank && bit(rows[o], c))
        for (int w = 0; w < words; ++w) rows[o][w] ^= rows[rank][w];
    pivot_col.push_back(c);
    ++rank;
  }
  for (std::size_t r = rank; r < rows.size(); ++r) {
    if (bit(rows[r], n)) {
      out.message = "readout parities are inconsistent with the logical supports";
      return out;
    }
  }
  out.logical.assign(n, 1);
  for (std::size_t r = 0; r < rank; ++r)
    if (bit(rows[r], n)) out.logical[pivot_col[r]] = -1;
  out.ok = true;
  return out;
}

std::vector<std::vector<int>> schedule_illumination(const ParityLayout& layout) {
  std::vector<std::vector<int>> rounds(9);
  std::set<std::pair<int, int>> used_cells;
  for (int p = 0; p < static_cast<int>(layout.plaquettes.size()); ++p) {
    const auto& members = layout.plaquettes[p].members;
    int r0 = 1 << 30, c0 = 1 << 30;
    std::set<std::pair<int, int>> cells;
    for (int m : members) {
      if (m < 0 || m >= layout.num_qubits())
        throw InputError("plaquette " + std::to_string(p) + " references unknown qubit");
      r0 = std::min(r0, layout.qubits[m].row);
      c0 = std::min(c0, layout.qubits[m].col);
      cells.insert({layout.qubits[m].row, layout.qubits[m].col});
    }
    bool in_cell = cells.size() == members.size() && members.size() >= 3;
    for (auto [r, c] : cells) in_cell &= (r - r0 <= 1 && c - c0 <= 1);
    if (!in_cell || !used_cells.insert({r0, c0}).second)
      throw InputError("plaquette " + std::to_string(p) +
                       " does not occupy its own 2x2 grid cell");
    rounds[3 * (r0 % 3) + (c0 % 3)].push_back(p);
  }
  for (const auto& round : rounds) {
    std::set<int> atoms;
    for (int p : round)
      for (int m : layout.plaquettes[p].members)
        if (!atoms.insert(m).second)
          throw InputError("illumination round shares qubit " + std::to_string(m));
  }
  return rounds;
}

}  // namespace rydpar
