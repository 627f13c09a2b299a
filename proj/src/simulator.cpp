#include "qvs/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qvs {

namespace {

bool is_power_of_two(std::size_t v) { return v > 0 && (v & (v - 1)) == 0; }

int log2_exact(std::size_t v) {
  int b = 0;
  while ((std::size_t(1) << b) < v) ++b;
  return b;
}

// Canonical uniform double in [0, 1) from the top 53 bits; fully specified
// by the mt19937_64 stream, so runs reproduce across platforms.
double canonical(Rng& rng) { return double(rng() >> 11) * 0x1.0p-53; }

} // namespace

double Statevector::norm() const {
  double sq = 0.0;
  for (double a : amplitudes) sq += a * a;
  return std::sqrt(sq);
}

void enforce_qubit_cap(int n_qubits) {
  if (n_qubits > kMaxQubits)
    throw std::invalid_argument(std::to_string(n_qubits) + " qubits exceed the " +
                                std::to_string(kMaxQubits) + "-qubit cap");
}

Statevector state_from_vector(std::vector<double> v) {
  if (!is_power_of_two(v.size()))
    throw std::invalid_argument("state length must be a power of two");
  const int n = log2_exact(v.size());
  enforce_qubit_cap(n);
  double sq = 0.0;
  for (double a : v) sq += a * a;
  if (std::abs(std::sqrt(sq) - 1.0) > 1e-9)
    throw std::invalid_argument("state vector must have unit norm");
  Statevector s;
  s.n_qubits = n;
  s.amplitudes = std::move(v);
  return s;
}

void apply(const Operator& op, Statevector& state) {
  if (op.dim() != state.dim())
    throw std::invalid_argument("operator and state dimensions differ");
  op.apply_in_place(state.amplitudes);
}

double amplitude_at(const Statevector& state, std::size_t basis_index) {
  if (basis_index >= state.dim())
    throw std::out_of_range("basis index out of range");
  return state.amplitudes[basis_index];
}

SamplingResult sample(const Statevector& state, std::uint64_t shots,
                      std::uint64_t seed) {
  if (shots < 1) throw std::invalid_argument("need at least one shot");
  std::vector<double> cdf(state.dim());
  double acc = 0.0;
  for (std::size_t i = 0; i < state.dim(); ++i) {
    const double a = state.amplitudes[i];
    acc += a * a;
    cdf[i] = acc;
  }
  const double total = acc; // ~1 up to fp drift

  SamplingResult out;
  out.shots = shots;
  out.seed = seed;
  Rng rng(seed);
  for (std::uint64_t s = 0; s < shots; ++s) {
    const double u = canonical(rng) * total;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const std::size_t idx =
        it == cdf.end() ? state.dim() - 1 : std::size_t(it - cdf.begin());
    ++out.counts[idx];
  }
  const auto it0 = out.counts.find(0);
  out.p0_hat = it0 == out.counts.end() ? 0.0 : double(it0->second) / double(shots);
  out.stderr_p0 = std::sqrt(out.p0_hat * (1.0 - out.p0_hat) / double(shots));
  return out;
}

double SamplingResult::probability_of(std::size_t basis_index) const {
  const auto it = counts.find(basis_index);
  return it == counts.end() ? 0.0 : double(it->second) / double(shots);
}

namespace {

// Energy component of one block, amplitude path: zero every other block (and
// the offset slot for block 0), renormalize, run U_grid + summation, read
// index 0. A fully zero block contributes exactly 0.
double component_energy(const EncodedProblem& problem, const Operator& u_stage,
                        const Operator& summation, std::size_t block_index) {
  const std::size_t block = problem.block_size();
  std::vector<double> o(problem.o_grid.size(), 0.0);
  const std::size_t begin = block_index * block;
  std::copy(problem.o_grid.begin() + begin, problem.o_grid.begin() + begin + block,
            o.begin() + begin);
  if (block_index == 0 && problem.offset_slot) o[*problem.offset_slot] = 0.0;
  double sq = 0.0;
  for (double v : o) sq += v * v;
  if (sq == 0.0) return 0.0;
  const double norm = std::sqrt(sq);
  for (double& v : o) v /= norm;
  Statevector s = state_from_vector(std::move(o));
  apply(u_stage, s);
  apply(summation, s);
  return s.amplitudes[0] * std::exp2(problem.nt / 2.0) * norm;
}

} // namespace

EnergyReport run_pipeline(const EncodedProblem& problem, const PotentialMaps& maps,
                          const RunOptions& opts) {
  const UGridOp u(problem, maps, opts.backend);
  const HadamardLayer summation = make_summation_stage(problem.nt, problem.ng);

  std::vector<double> unit = problem.o_grid;
  for (double& v : unit) v /= problem.l_type;
  Statevector state = state_from_vector(std::move(unit));
  apply(u, state);
  apply(summation, state);

  EnergyReport rep;
  rep.offset_c = problem.offset_c;
  rep.norm_value = problem.l_type;
  rep.norm_kind = "L_type";

  if (opts.mode == RunMode::amplitude) {
    rep.mode = "amplitude";
    rep.e_total = decode_energy_amplitude(state.amplitudes[0], problem);
  } else {
    rep.mode = "sampled";
    const SamplingResult s = sample(state, opts.shots, opts.seed);
    rep.shots = s.shots;
    rep.seed = s.seed;
    if (decode_is_sign_ambiguous(problem))
      rep.warning = "sign-ambiguous decode: sampled mode with offset 0 "
                    "reports |E + 0| semantics";
    rep.e_total = decode_energy_probability(s.p0_hat, problem, true);
    const double scale = std::exp2(problem.nt / 2.0) * problem.l_type;
    rep.stderr_e = s.p0_hat > 0.0
                       ? scale * s.stderr_p0 / (2.0 * std::sqrt(s.p0_hat))
                       : std::numeric_limits<double>::infinity();
  }

  rep.e_ele = component_energy(problem, u, summation, 0);
  rep.e_vdw_by_type.resize(problem.n_types);
  for (std::size_t t = 0; t < problem.n_types; ++t)
    rep.e_vdw_by_type[t] = component_energy(problem, u, summation, t + 1);
  return rep;
}

std::vector<EnergyReport> run_pipeline_batch(const BatchInputs& inputs,
                                             const RunOptions& opts) {
  if (inputs.maps_by_protein_conf.empty() || inputs.lig_by_conf.empty())
    throw std::invalid_argument("batch needs at least one conformation per side");
  const std::size_t n_p = inputs.maps_by_protein_conf.size();
  const std::size_t n_l = inputs.lig_by_conf.size();

  // Per-pair problems; norms differ per protein conformation, ligand vectors
  // per ligand conformation.
  std::vector<std::vector<EncodedProblem>> problems(n_p);
  for (std::size_t i = 0; i < n_p; ++i)
    for (std::size_t j = 0; j < n_l; ++j)
      problems[i].push_back(assemble_o_grid(inputs.maps_by_protein_conf[i],
                                            inputs.lig_by_conf[j], inputs.offset_c,
                                            inputs.sizing));

  std::vector<std::shared_ptr<const UGridOp>> u_by_conf;
  for (std::size_t i = 0; i < n_p; ++i)
    u_by_conf.push_back(make_u_grid(problems[i][0], inputs.maps_by_protein_conf[i],
                                    opts.backend));

  std::vector<std::vector<const EncodedProblem*>> views(n_p);
  for (std::size_t i = 0; i < n_p; ++i)
    for (std::size_t j = 0; j < n_l; ++j) views[i].push_back(&problems[i][j]);

  BatchedProblem batch = make_batch(views, u_by_conf, inputs.poses);
  const BatchLayout& lay = batch.layout;
  enforce_qubit_cap(lay.total_qubits());

  Statevector state = state_from_vector(batch.input);
  apply(*batch.u_stage, state);
  apply(*batch.summation, state);

  std::optional<SamplingResult> sampled;
  if (opts.mode == RunMode::sampled) sampled = sample(state, opts.shots, opts.seed);

  // Component sweeps: rebuild the batch with all but one energy block zeroed
  // across every pair; the pose permutations and U stage are unchanged.
  const std::size_t n_types = problems[0][0].n_types;
  std::vector<Statevector> component_states;
  std::vector<double> component_norms;
  for (std::size_t b = 0; b <= n_types; ++b) {
    std::vector<std::vector<EncodedProblem>> zeroed(n_p);
    bool any_nonzero = false;
    for (std::size_t i = 0; i < n_p; ++i)
      for (std::size_t j = 0; j < n_l; ++j) {
        EncodedProblem p = problems[i][j];
        std::vector<double> o(p.o_grid.size(), 0.0);
        const std::size_t block = p.block_size();
        const std::size_t begin = b * block;
        std::copy(p.o_grid.begin() + begin, p.o_grid.begin() + begin + block,
                  o.begin() + begin);
        if (b == 0 && p.offset_slot) o[*p.offset_slot] = 0.0;
        p.o_grid = std::move(o);
        p.offset_c = 0.0;
        p.offset_slot.reset(); // keep layout; slot already zeroed
        for (double v : p.o_grid) any_nonzero |= (v != 0.0);
        zeroed[i].push_back(std::move(p));
      }
    if (!any_nonzero) {
      component_states.emplace_back();
      component_norms.push_back(0.0);
      continue;
    }
    std::vector<std::vector<const EncodedProblem*>> zviews(n_p);
    for (std::size_t i = 0; i < n_p; ++i)
      for (std::size_t j = 0; j < n_l; ++j) zviews[i].push_back(&zeroed[i][j]);
    // Margins were already validated on the full batch; zeroing blocks can
    // only widen them, so skip the re-scan.
    BatchedProblem zbatch =
        make_batch(zviews, u_by_conf, inputs.poses,
                   std::array<int, 3>{batch.grid.dims[0], batch.grid.dims[1],
                                      batch.grid.dims[2]});
    Statevector zstate = state_from_vector(zbatch.input);
    apply(*zbatch.u_stage, zstate);
    apply(*zbatch.summation, zstate);
    component_states.push_back(std::move(zstate));
    component_norms.push_back(zbatch.l_norm);
  }

  const auto sx = inputs.poses.shifts_x.empty() ? std::vector<int>{0} : inputs.poses.shifts_x;
  const auto sy = inputs.poses.shifts_y.empty() ? std::vector<int>{0} : inputs.poses.shifts_y;
  const auto sz = inputs.poses.shifts_z.empty() ? std::vector<int>{0} : inputs.poses.shifts_z;
  const auto rx = inputs.poses.turns_x.empty() ? std::vector<int>{0} : inputs.poses.turns_x;
  const auto ry = inputs.poses.turns_y.empty() ? std::vector<int>{0} : inputs.poses.turns_y;
  const auto rz = inputs.poses.turns_z.empty() ? std::vector<int>{0} : inputs.poses.turns_z;

  const double scale = batch.decode_scale();
  std::vector<EnergyReport> reports;
  for (std::size_t i = 0; i < (std::size_t(1) << lay.nrc); ++i)
    for (std::size_t j = 0; j < (std::size_t(1) << lay.nlc); ++j)
      for (std::size_t irz = 0; irz < (std::size_t(1) << lay.nrz); ++irz)
        for (std::size_t iry = 0; iry < (std::size_t(1) << lay.nry); ++iry)
          for (std::size_t irx = 0; irx < (std::size_t(1) << lay.nrx); ++irx)
            for (std::size_t itz = 0; itz < (std::size_t(1) << lay.ntz); ++itz)
              for (std::size_t ity = 0; ity < (std::size_t(1) << lay.nty); ++ity)
                for (std::size_t itx = 0; itx < (std::size_t(1) << lay.ntx);
                     ++itx) {
                  const std::size_t slot =
                      lay.slot_index(i, j, irz, iry, irx, itz, ity, itx);
                  const bool pair_pad = batch.pair_padded(i, j);
                  const bool pose_pad =
                      itx >= lay.n_shifts[0] || ity >= lay.n_shifts[1] ||
                      itz >= lay.n_shifts[2] || irx >= lay.n_turns[0] ||
                      iry >= lay.n_turns[1] || irz >= lay.n_turns[2];

                  EnergyReport rep;
                  rep.pose.conf_p = i;
                  rep.pose.conf_l = j;
                  rep.pose.tx = itx < sx.size() ? sx[itx] : 0;
                  rep.pose.ty = ity < sy.size() ? sy[ity] : 0;
                  rep.pose.tz = itz < sz.size() ? sz[itz] : 0;
                  rep.pose.rx = irx < rx.size() ? rx[irx] : 0;
                  rep.pose.ry = iry < ry.size() ? ry[iry] : 0;
                  rep.pose.rz = irz < rz.size() ? rz[irz] : 0;
                  rep.padded = pair_pad || pose_pad;
                  rep.offset_c = batch.offset_c;
                  rep.norm_value = batch.l_norm;
                  rep.norm_kind =
                      (lay.n_protein_confs > 1 || lay.n_ligand_confs > 1)
                          ? "L_con"
                          : "L_type";

                  if (opts.mode == RunMode::amplitude || pair_pad) {
                    rep.mode = "amplitude";
                    rep.e_total =
                        batch.decode_amplitude(state.amplitudes[slot], pair_pad);
                  } else {
                    rep.mode = "sampled";
                    rep.shots = sampled->shots;
                    rep.seed = sampled->seed;
                    if (batch.offset_c == 0.0)
                      rep.warning = "sign-ambiguous decode: sampled mode with "
                                    "offset 0 reports |E + 0| semantics";
                    const double p_hat = sampled->probability_of(slot);
                    rep.e_total = std::sqrt(p_hat) * scale - batch.offset_c;
                    rep.stderr_e =
                        p_hat > 0.0
                            ? scale * std::sqrt(p_hat * (1.0 - p_hat) /
                                                double(sampled->shots)) /
                                  (2.0 * std::sqrt(p_hat))
                            : std::numeric_limits<double>::infinity();
                  }

                  rep.e_vdw_by_type.assign(n_types, 0.0);
                  const double comp_scale_bits =
                      std::exp2((lay.nt + lay.pose_bits()) / 2.0);
                  for (std::size_t b = 0; b <= n_types; ++b) {
                    double comp = 0.0;
                    if (component_norms[b] > 0.0 && !pair_pad)
                      comp = component_states[b].amplitudes[slot] *
                             comp_scale_bits * component_norms[b];
                    if (b == 0)
                      rep.e_ele = comp;
                    else
                      rep.e_vdw_by_type[b - 1] = comp;
                  }
                  reports.push_back(std::move(rep));
                }
  return reports;
}

} // namespace qvs
