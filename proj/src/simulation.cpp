#include "dfsc/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <iostream>

namespace dfsc {

const char* to_string(Method m) {
  switch (m) {
    case Method::Dfsc: return "dfsc";
    case Method::Isc: return "isc";
    case Method::Dcdsc: return "dcdsc";
    case Method::Fixed: return "fixed";
  }
  return "unknown";
}

std::optional<Method> parse_method(const std::string& s) {
  if (s == "dfsc") return Method::Dfsc;
  if (s == "isc") return Method::Isc;
  if (s == "dcdsc") return Method::Dcdsc;
  if (s == "fixed") return Method::Fixed;
  return std::nullopt;
}

namespace {

enum Purpose : int { kTruth = 1, kPredict, kMeasure, kUpdate, kResample, kFuse, kDcd };

}  // namespace

Rng derive_rng(std::uint64_t seed, int step, int node, int purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(step + 1), static_cast<std::uint32_t>(node + 1),
                    static_cast<std::uint32_t>(purpose)};
  return Rng(seq);
}

// ---------------------------------------------------------------------------

StepContext::StepContext(const Scenario& sc, const std::map<SensorId, SensorPose>& poses,
                         const std::map<SensorId, LmbDensity>& predicted, const NetworkGraph& graph)
    : sc_(&sc), poses_(&poses), predicted_(&predicted), graph_(&graph) {
  for (const auto& s : sc.sensors) specs_[s.id] = &s;
}

SensorModel StepContext::sensor_model(SensorId s) const { return {spec(s).profile, sc_->noise_sigma}; }

const PseudoEntry& StepContext::pseudo(SensorId s, const ControlCommand& u) const {
  const auto key = std::make_pair(s, u.id);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;

  const SensorPose hyp = apply_command(pose(s), u);
  const LmbDensity& pred = predicted(s);
  const SensorModel model = sensor_model(s);
  const MeasurementSet pims = compute_pims(pred, hyp, model.profile, sc_->filter.r_estimate);
  LmbDensity post;
  try {
    post = pseudo_update(pred, pims, hyp, model);
  } catch (const NumericalDegeneracy&) {
    post = misdetection_update(pred, hyp, model);
  }
  PseudoEntry e;
  e.tracks.reserve(post.size());
  e.weights.reserve(post.size());
  for (std::size_t i = 0; i < post.size(); ++i) {
    const LabeledTrack& t = post.tracks()[i];
    if (!(t.label == pred.tracks()[i].label)) throw std::logic_error("pseudo-update reordered tracks");
    TrackSummary ts;
    ts.label = t.label;
    ts.r = t.r;
    ts.eap = position_of(eap_state(t));
    ts.observed = detection_probability(model.profile, hyp, ts.eap) > 0.0;
    e.tracks.push_back(ts);
    e.weights.push_back(t.weights);
  }
  return cache_.emplace(key, std::move(e)).first->second;
}

// ---------------------------------------------------------------------------

ControlProblem::ControlProblem(const StepContext& ctx, std::vector<SensorId> roster, DensityScope scope)
    : ctx_(&ctx), roster_(std::move(roster)), scope_(scope) {
  std::sort(roster_.begin(), roster_.end());
}

std::vector<SensorId> ControlProblem::coupled(SensorId s) const {
  if (scope_ == DensityScope::Local) return {s};
  std::vector<SensorId> out;
  for (SensorId n : ctx_->graph().closed_neighborhood(s)) {
    if (std::binary_search(roster_.begin(), roster_.end(), n)) out.push_back(n);
  }
  return out;
}

std::vector<SensorId> ControlProblem::density_contributors(SensorId s) const {
  if (scope_ == DensityScope::Global) return roster_;
  return coupled(s);
}

const ActionCatalogue& ControlProblem::actions(SensorId s) const { return ctx_->spec(s).actions; }

SummaryFusion ControlProblem::fused_pseudo(SensorId s, const MultiSensorCommand& cmd) const {
  const SensorPose hyp = apply_command(ctx_->pose(s), cmd.at(s));
  const double rho_eps = ctx_->scenario().constraints.rho_eps;
  const auto contributors = density_contributors(s);
  std::vector<std::vector<TrackSummary>> parts;
  parts.reserve(contributors.size());
  for (SensorId c : contributors) {
    const PseudoEntry& e = ctx_->pseudo(c, cmd.at(c));
    const LmbDensity& pred = ctx_->predicted(c);
    std::vector<TrackSummary> ts = e.tracks;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      ts[i].exclusion_mass = mass_within(pred.tracks()[i].particles, e.weights[i], hyp.position(), rho_eps);
    }
    parts.push_back(std::move(ts));
  }
  std::vector<std::span<const TrackSummary>> spans(parts.begin(), parts.end());
  return fuse_summaries(spans, ctx_->scenario().filter.merge_dist);
}

namespace {

ExistenceMap resolve_existence(const LmbDensity& prior, const SummaryFusion& fused) {
  ExistenceMap out;
  for (const auto& t : prior.tracks()) {
    auto a = fused.alias.find(t.label);
    const TrackLabel group = a == fused.alias.end() ? t.label : a->second;
    auto it = std::lower_bound(fused.tracks.begin(), fused.tracks.end(), group,
                               [](const TrackSummary& x, const TrackLabel& l) { return x.label < l; });
    if (it != fused.tracks.end() && it->label == group && it->observed) out.emplace(t.label, it->r);
  }
  return out;
}

}  // namespace

ExistenceMap ControlProblem::pseudo_existence(SensorId s, const MultiSensorCommand& cmd) const {
  return resolve_existence(ctx_->predicted(s), fused_pseudo(s, cmd));
}

ConstraintValues ControlProblem::constraints(SensorId s, const MultiSensorCommand& cmd) const {
  return constraint_values(s, cmd, fused_pseudo(s, cmd));
}

ConstraintValues ControlProblem::constraint_values(SensorId s, const MultiSensorCommand& cmd,
                                                   const SummaryFusion& fused) const {
  PositionMap after;
  for (const auto& spec : ctx_->scenario().sensors) {
    auto it = cmd.find(spec.id);
    const SensorPose& p = ctx_->pose(spec.id);
    after[spec.id] = (it == cmd.end() ? p : apply_command(p, it->second)).position();
  }
  ConstraintValues v;
  v.void_prob = void_probability(fused.tracks);
  v.sparsity = sparsity(after, s);
  v.connected = connectivity(after, s, ctx_->scenario().constraints.d_th);
  return v;
}

Score ControlProblem::evaluate(SensorId s, const MultiSensorCommand& cmd) const {
  const SummaryFusion fused = fused_pseudo(s, cmd);
  const LmbDensity& prior = ctx_->predicted(s);
  const double reward = objective(existence_map(prior), resolve_existence(prior, fused));
  return {reward, relaxation_level(constraint_values(s, cmd, fused), ctx_->scenario().constraints)};
}

// ---------------------------------------------------------------------------

namespace {

std::map<SensorId, Position> positions(const std::map<SensorId, SensorPose>& poses) {
  std::map<SensorId, Position> out;
  for (const auto& [id, p] : poses) out[id] = p.position();
  return out;
}

std::vector<Position> estimate_positions(const std::vector<Estimate>& est) {
  std::vector<Position> out;
  out.reserve(est.size());
  for (const auto& e : est) out.push_back(position_of(e.state));
  return out;
}

}  // namespace

RunRecord run_single(const Scenario& sc, Method method, int run_index, std::uint64_t seed,
                     const RunOptions& opts) {
  RunRecord rec;
  rec.run = run_index;
  rec.seed = seed;
  rec.method = method;

  Rng truth_rng = derive_rng(seed, -1, -1, kTruth);
  const std::vector<TruthSet> truth = simulate_truth(sc.targets, sc.duration, truth_rng);

  std::map<SensorId, SensorPose> poses;
  std::map<SensorId, LmbDensity> posterior;
  std::map<SensorId, int> stamp;
  std::map<SensorId, std::vector<Position>> pending_births;
  for (const auto& s : sc.sensors) {
    poses[s.id] = s.pose;
    posterior[s.id] = LmbDensity{};
    stamp[s.id] = -1;
  }

  const DensityScope scope = method == Method::Isc ? DensityScope::Local
                             : opts.global_density  ? DensityScope::Global
                                                    : DensityScope::Neighbourhood;
  const int cap = opts.iteration_cap.value_or(sc.optimizer.iteration_cap);
  DcdConfig dcd = sc.optimizer.dcd;
  if (opts.dcd_runs) dcd.runs = opts.dcd_runs;
  const double r_report = sc.filter.r_report.value_or(sc.filter.r_estimate);
  const FusionConfig fusion_cfg{sc.filter.r_min, sc.filter.particles};
  UpdateOptions uopts;
  uopts.gibbs_iterations = sc.filter.gibbs_iterations;
  uopts.birth_assoc_threshold = sc.filter.birth_assoc_threshold;
  uopts.max_births = sc.filter.max_births;

  std::map<TrackLabel, TrackHistory> est_hist;
  std::map<int, TrackHistory> truth_hist;

  for (int k = 0; k < sc.duration; ++k) {
    StepRecord step;
    step.step = k;
    step.truth = truth[k];

    // predict
    std::map<SensorId, LmbDensity> predicted;
    for (const auto& s : sc.sensors) {
      BirthModel birth;
      birth.step = k;
      birth.sensor = s.id;
      birth.r_birth = sc.filter.r_birth;
      birth.particles = sc.filter.particles;
      birth.position_sigma = sc.filter.birth_position_sigma;
      birth.velocity_sigma = sc.filter.birth_velocity_sigma;
      birth.omega_sigma = sc.filter.birth_omega_sigma;
      birth.positions = pending_births[s.id];
      Rng rng = derive_rng(seed, k, s.id, kPredict);
      predicted[s.id] = predict(posterior[s.id], sc.filter.motion, birth, rng);
    }
    step.stages.push_back("predict");

    // control
    const NetworkGraph graph = build_graph(positions(poses), sc.comm_range);
    const auto t0 = std::chrono::steady_clock::now();
    MultiSensorCommand commands;
    if (method == Method::Fixed) {
      for (const auto& s : sc.sensors) commands[s.id] = stay_command(s.actions);
    } else {
      const StepContext ctx(sc, poses, predicted, graph);
      for (const auto& comp : graph.components()) {
        const ControlProblem problem(ctx, comp, scope);
        ComponentControl cc;
        cc.roster = problem.roster();
        for (SensorId s : cc.roster) cc.catalogue_size[s] = static_cast<int>(problem.actions(s).size());
        switch (method) {
          case Method::Dfsc: {
            DfscResult res = dfsc_run(problem, graph, cap);
            cc.report = std::move(res.report);
            cc.firing = res.trace.firing;
            cc.staleness_ok = res.trace.staleness_ok;
            break;
          }
          case Method::Isc:
            cc.report = isc_run(problem);
            break;
          case Method::Dcdsc: {
            std::map<SensorId, Rng> rngs;
            cc.report = dcdsc_run(problem, dcd, [&](SensorId s) -> Rng& {
              return rngs.try_emplace(s, derive_rng(seed, k, s, kDcd)).first->second;
            });
            break;
          }
          case Method::Fixed:
            break;
        }
        for (const auto& [s, u] : cc.report.selected) commands[s] = u;
        step.control.push_back(std::move(cc));
      }
      step.stages.push_back("control");
    }
    step.control_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rec.control_seconds += step.control_seconds;

    for (auto& [id, pose] : poses) pose = apply_command(pose, commands.at(id));
    step.commands = commands;
    step.poses = poses;
    step.stages.push_back("apply");

    // measure and update
    const std::vector<Position> truth_pos = positions_of(truth[k]);
    std::map<SensorId, MeasurementSet> scans;
    for (const auto& s : sc.sensors) {
      Rng rng = derive_rng(seed, k, s.id, kMeasure);
      scans[s.id] = measurements_of(
          generate_detections(poses[s.id], s.profile, truth_pos, sc.noise_sigma, sc.clutter_rate, rng));
    }
    step.stages.push_back("measure");
    for (const auto& s : sc.sensors) {
      const SensorModel model{s.profile, sc.noise_sigma};
      const double kappa = sc.clutter_rate / s.profile.fov_area();
      const MeasurementSet& Z = scans[s.id];
      LmbDensity post;
      std::vector<Position> births;
      try {
        Rng rng = derive_rng(seed, k, s.id, kUpdate);
        UpdateResult ur = update_with_births(predicted[s.id], Z, poses[s.id], model, kappa, rng, uopts);
        post = std::move(ur.posterior);
        for (int c : ur.birth_candidates) births.push_back(from_sensor_frame(poses[s.id], Z[c]));
      } catch (const NumericalDegeneracy& e) {
        std::cerr << "step " << k << " sensor " << s.id << ": " << e.what()
                  << "; misdetection-only update\n";
        post = misdetection_update(predicted[s.id], poses[s.id], model);
        ++step.degeneracy_fallbacks;
      }
      Rng rr = derive_rng(seed, k, s.id, kResample);
      posterior[s.id] = prune_resample(post, sc.filter.r_min, sc.filter.particles, rr);
      step.local_estimates[s.id] = extract_estimates(posterior[s.id], r_report);
      pending_births[s.id] = std::move(births);
      stamp[s.id] = k;
    }
    step.stages.push_back("update");

    // share, fuse, merge, estimate
    const NetworkGraph after = build_graph(positions(poses), sc.comm_range);
    step.stages.push_back("share");
    step.fused_posterior_step = k;
    for (const auto& s : sc.sensors) {
      FusionInput in;
      for (SensorId n : after.closed_neighborhood(s.id)) {
        in[n] = posterior[n];
        step.fused_posterior_step = std::min(step.fused_posterior_step, stamp[n]);
      }
      Rng rng = derive_rng(seed, k, s.id, kFuse);
      const LmbDensity fused = merge_duplicates(fuse(in, fusion_cfg, rng), sc.filter.merge_dist);
      step.node_estimates[s.id] = extract_estimates(fused, r_report);
    }
    {
      Rng rng = derive_rng(seed, k, -1, kFuse);
      const LmbDensity fused = merge_duplicates(fuse(posterior, fusion_cfg, rng), sc.filter.merge_dist);
      step.estimates = extract_estimates(fused, r_report);
    }
    step.stages.push_back("fuse");
    step.stages.push_back("estimate");

    // metrics
    step.ospa = ospa(estimate_positions(step.estimates), truth_pos, sc.metrics.c, sc.metrics.p);
    for (const auto& e : step.estimates) est_hist[e.label][k] = position_of(e.state);
    for (const auto& t : truth[k]) truth_hist[t.id][k] = position_of(t.x);
    std::vector<TrackHistory> eh, th;
    for (const auto& [l, h] : est_hist) eh.push_back(h);
    for (const auto& [id, h] : truth_hist) th.push_back(h);
    step.ospa2 = ospa2(eh, th, k, sc.metrics.window, sc.metrics.c, sc.metrics.p);
    step.stages.push_back("metrics");

    rec.mean_ospa += step.ospa;
    rec.mean_ospa2 += step.ospa2;
    rec.steps.push_back(std::move(step));
  }
  rec.mean_ospa /= sc.duration;
  rec.mean_ospa2 /= sc.duration;
  return rec;
}

Campaign run_monte_carlo(const Scenario& sc, Method method, int n_runs, std::uint64_t base_seed,
                         const RunOptions& opts) {
  if (n_runs < 1) throw std::invalid_argument("n_runs must be >= 1");
  Campaign c;
  c.method = method;
  c.mean_cardinality.assign(sc.duration, 0.0);
  long long evaluations = 0;
  double seconds = 0.0;
  for (int r = 0; r < n_runs; ++r) {
    RunRecord rec = run_single(sc, method, r, base_seed + static_cast<std::uint64_t>(r), opts);
    c.mean_ospa += rec.mean_ospa;
    c.mean_ospa2 += rec.mean_ospa2;
    seconds += rec.control_seconds;
    for (const auto& st : rec.steps) {
      c.mean_cardinality[st.step] += static_cast<double>(st.estimates.size());
      for (const auto& cc : st.control) evaluations += cc.report.reward_evaluations;
    }
    if (r == 0) {
      for (const auto& st : rec.steps) c.truth_cardinality.push_back(static_cast<double>(st.truth.size()));
    }
    c.runs.push_back(std::move(rec));
  }
  c.mean_ospa /= n_runs;
  c.mean_ospa2 /= n_runs;
  for (double& v : c.mean_cardinality) v /= n_runs;
  const double sensor_steps = static_cast<double>(n_runs) * sc.duration * static_cast<double>(sc.sensors.size());
  c.mean_evaluations_per_sensor_step = static_cast<double>(evaluations) / sensor_steps;
  c.mean_control_seconds_per_sensor_step = seconds / sensor_steps;
  return c;
}

}  // namespace dfsc
