#include "bevkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "bevkit/error.hpp"
#include "bevkit/geometry.hpp"
#include "bevkit/parallel.hpp"

namespace bevkit {

double iou(const Box2& a, const Box2& b) {
  const double ix = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  const double iy = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

double centerline_distance(const Polyline3& a, const Polyline3& b, DistanceKernel kernel) {
  const Polyline3 ra = arc_length_resample(a, kMetricSamples);
  const Polyline3 rb = arc_length_resample(b, kMetricSamples);
  if (kernel == DistanceKernel::kFrechet) return discrete_frechet(ra, rb);
  return chamfer(ra, rb, kMetricSamples);
}

std::map<InstanceId, InstanceId> MatchResult::pred_to_gt() const {
  std::map<InstanceId, InstanceId> m;
  for (const auto& p : pairs) m.emplace(p.pred, p.gt);
  return m;
}

std::map<InstanceId, InstanceId> MatchResult::gt_to_pred() const {
  std::map<InstanceId, InstanceId> m;
  for (const auto& p : pairs) m.emplace(p.gt, p.pred);
  return m;
}

namespace {

// Prediction ids in matching order: descending confidence, ties by id.
template <typename T>
std::vector<InstanceId> confidence_order(const std::map<InstanceId, T>& preds) {
  std::vector<std::pair<double, InstanceId>> ranked;
  ranked.reserve(preds.size());
  for (const auto& [id, p] : preds) ranked.emplace_back(p.confidence, id);
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<InstanceId> ids;
  ids.reserve(ranked.size());
  for (const auto& r : ranked) ids.push_back(r.second);
  return ids;
}

template <typename T>
std::vector<InstanceId> keys_of(const std::map<InstanceId, T>& m) {
  std::vector<InstanceId> ids;
  ids.reserve(m.size());
  for (const auto& kv : m) ids.push_back(kv.first);
  return ids;
}

// Generic greedy assignment. cost(pi, gi) is consulted for (pred order
// index, gt index); accept() gates a candidate and better() ranks two.
template <typename Cost, typename Accept, typename Better>
MatchResult greedy_match(const std::vector<InstanceId>& pred_order, const std::vector<InstanceId>& gt_ids,
                         Cost&& cost, Accept&& accept, Better&& better) {
  MatchResult result;
  std::vector<bool> taken(gt_ids.size(), false);
  for (std::size_t pi = 0; pi < pred_order.size(); ++pi) {
    std::optional<std::size_t> best;
    double best_cost = 0.0;
    for (std::size_t gi = 0; gi < gt_ids.size(); ++gi) {
      if (taken[gi]) continue;
      const double c = cost(pi, gi);
      if (!accept(c)) continue;
      if (!best || better(c, best_cost)) {
        best = gi;
        best_cost = c;
      }
    }
    if (best) {
      taken[*best] = true;
      result.pairs.push_back({pred_order[pi], gt_ids[*best], best_cost});
    } else {
      result.unmatched_preds.push_back(pred_order[pi]);
    }
  }
  for (std::size_t gi = 0; gi < gt_ids.size(); ++gi) {
    if (!taken[gi]) result.unmatched_gts.push_back(gt_ids[gi]);
  }
  return result;
}

// Lane distances for one frame, rows in confidence order.
struct LaneFrame {
  std::vector<InstanceId> pred_order;
  std::vector<double> pred_confidence;
  std::vector<InstanceId> gt_ids;
  std::vector<double> frechet;  // pred_order.size() x gt_ids.size()
  std::vector<double> chamfer;

  const std::vector<double>& matrix(DistanceKernel k) const { return k == DistanceKernel::kFrechet ? frechet : chamfer; }
};

LaneFrame build_lane_frame(const std::map<InstanceId, Centerline>& preds, const std::map<InstanceId, Centerline>& gts,
                           bool need_chamfer) {
  LaneFrame f;
  f.pred_order = confidence_order(preds);
  f.gt_ids = keys_of(gts);
  for (auto id : f.pred_order) f.pred_confidence.push_back(preds.at(id).confidence);

  std::vector<Polyline3> pr, gr;
  pr.reserve(f.pred_order.size());
  gr.reserve(f.gt_ids.size());
  for (auto id : f.pred_order) pr.push_back(arc_length_resample(preds.at(id).polyline, kMetricSamples));
  for (auto id : f.gt_ids) gr.push_back(arc_length_resample(gts.at(id).polyline, kMetricSamples));

  f.frechet.resize(pr.size() * gr.size());
  if (need_chamfer) f.chamfer.resize(pr.size() * gr.size());
  for (std::size_t i = 0; i < pr.size(); ++i) {
    for (std::size_t j = 0; j < gr.size(); ++j) {
      f.frechet[i * gr.size() + j] = discrete_frechet(pr[i], gr[j]);
      if (need_chamfer) f.chamfer[i * gr.size() + j] = chamfer(pr[i], gr[j], kMetricSamples);
    }
  }
  return f;
}

MatchResult match_lane_frame(const LaneFrame& f, DistanceKernel kernel, double threshold) {
  const auto& m = f.matrix(kernel);
  const std::size_t cols = f.gt_ids.size();
  return greedy_match(
      f.pred_order, f.gt_ids, [&](std::size_t pi, std::size_t gi) { return m[pi * cols + gi]; },
      [&](double d) { return d < threshold; }, [](double a, double b) { return a < b; });
}

struct Detection {
  double confidence;
  bool tp;
};

double ap_of(std::vector<Detection>& dets, std::size_t n_gt) {
  std::vector<RankedDetection> ranked;
  ranked.reserve(dets.size());
  for (const auto& d : dets) ranked.push_back({d.confidence, d.tp});
  return average_precision(ranked, n_gt);
}

double lane_detection_score(std::span<const LaneFrame> frames, DistanceKernel kernel,
                            std::span<const double> thresholds) {
  std::size_t n_gt = 0;
  for (const auto& f : frames) n_gt += f.gt_ids.size();
  double sum = 0.0;
  for (double thr : thresholds) {
    std::vector<Detection> dets;
    for (const auto& f : frames) {
      const auto matched = match_lane_frame(f, kernel, thr).pred_to_gt();
      for (std::size_t i = 0; i < f.pred_order.size(); ++i) {
        dets.push_back({f.pred_confidence[i], matched.count(f.pred_order[i]) > 0});
      }
    }
    sum += ap_of(dets, n_gt);
  }
  return sum / static_cast<double>(thresholds.size());
}

double traffic_element_score(std::span<const std::map<InstanceId, TrafficElement>* const> preds,
                             std::span<const std::map<InstanceId, TrafficElement>* const> gts,
                             std::span<const MatchResult> matches) {
  std::map<int, std::size_t> gt_per_class;
  for (const auto* g : gts) {
    for (const auto& [id, te] : *g) ++gt_per_class[te.attribute];
  }
  std::size_t n_preds = 0;
  for (const auto* p : preds) n_preds += p->size();
  if (gt_per_class.empty()) return n_preds == 0 ? 1.0 : 0.0;

  std::map<int, std::vector<Detection>> dets;
  for (std::size_t f = 0; f < preds.size(); ++f) {
    const auto matched = matches[f].pred_to_gt();
    for (auto id : confidence_order(*preds[f])) {
      const auto& te = preds[f]->at(id);
      dets[te.attribute].push_back({te.confidence, matched.count(id) > 0});
    }
  }
  double sum = 0.0;
  for (const auto& [cls, n_gt] : gt_per_class) sum += ap_of(dets[cls], n_gt);
  return sum / static_cast<double>(gt_per_class.size());
}

}  // namespace

MatchResult match_instances(const std::map<InstanceId, Centerline>& preds,
                            const std::map<InstanceId, Centerline>& gts, DistanceKernel kernel, double threshold) {
  const LaneFrame f = build_lane_frame(preds, gts, kernel == DistanceKernel::kChamfer);
  return match_lane_frame(f, kernel, threshold);
}

MatchResult match_traffic_elements(const std::map<InstanceId, TrafficElement>& preds,
                                   const std::map<InstanceId, TrafficElement>& gts, double iou_threshold) {
  const auto order = confidence_order(preds);
  const auto gt_ids = keys_of(gts);
  return greedy_match(
      order, gt_ids,
      [&](std::size_t pi, std::size_t gi) {
        const auto& p = preds.at(order[pi]);
        const auto& g = gts.at(gt_ids[gi]);
        return p.attribute == g.attribute ? iou(p.bbox, g.bbox) : -1.0;
      },
      [&](double v) { return v >= iou_threshold; }, [](double a, double b) { return a > b; });
}

double average_precision(std::span<const RankedDetection> ranked, std::size_t n_gt) {
  if (n_gt == 0) return ranked.empty() ? 1.0 : 0.0;
  std::vector<RankedDetection> sorted(ranked.begin(), ranked.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const RankedDetection& a, const RankedDetection& b) { return a.confidence > b.confidence; });

  std::vector<double> precision(sorted.size());
  std::size_t tp = 0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    if (sorted[k].true_positive) ++tp;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
  }
  require(tp <= n_gt, "more true positives than ground-truth instances");
  // Monotone envelope from the right.
  for (std::size_t k = sorted.size(); k-- > 1;) precision[k - 1] = std::max(precision[k - 1], precision[k]);
  // Each TP adds 1/n_gt of recall; summing before the division keeps a
  // perfect ranking at exactly 1.
  double area = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    if (sorted[k].true_positive) area += precision[k];
  }
  return area / static_cast<double>(n_gt);
}

double det_l(const std::map<InstanceId, Centerline>& preds, const std::map<InstanceId, Centerline>& gts) {
  const LaneFrame f = build_lane_frame(preds, gts, false);
  return lane_detection_score({&f, 1}, DistanceKernel::kFrechet, kFrechetThresholds);
}

double det_l_ch(const std::map<InstanceId, Centerline>& preds, const std::map<InstanceId, Centerline>& gts) {
  const LaneFrame f = build_lane_frame(preds, gts, true);
  return lane_detection_score({&f, 1}, DistanceKernel::kChamfer, kChamferThresholds);
}

double det_t(const std::map<InstanceId, TrafficElement>& preds, const std::map<InstanceId, TrafficElement>& gts) {
  const std::array<const std::map<InstanceId, TrafficElement>*, 1> p{&preds};
  const std::array<const std::map<InstanceId, TrafficElement>*, 1> g{&gts};
  const std::array<MatchResult, 1> m{match_traffic_elements(preds, gts)};
  return traffic_element_score(p, g, m);
}

std::vector<double> topology_vertex_aps(const EdgeSet& gt_edges, const TopologyEdges& pred_edges,
                                        const std::map<InstanceId, InstanceId>& sources,
                                        const std::map<InstanceId, InstanceId>& targets) {
  std::map<InstanceId, std::set<InstanceId>> neighbours;
  for (const auto& [s, t] : gt_edges) neighbours[s].insert(t);
  std::map<InstanceId, InstanceId> gt_source_to_pred;
  for (const auto& [pred, gt] : sources) gt_source_to_pred.emplace(gt, pred);

  std::vector<double> aps;
  aps.reserve(neighbours.size());
  for (const auto& [gt_vertex, gt_targets] : neighbours) {
    const auto it = gt_source_to_pred.find(gt_vertex);
    if (it == gt_source_to_pred.end()) {
      aps.push_back(0.0);
      continue;
    }
    const InstanceId pred_vertex = it->second;
    std::vector<std::pair<double, InstanceId>> outgoing;
    for (auto e = pred_edges.lower_bound({pred_vertex, std::numeric_limits<InstanceId>::min()});
         e != pred_edges.end() && e->first.first == pred_vertex; ++e) {
      outgoing.emplace_back(e->second, e->first.second);
    }
    // Already in target-id order; the stable sort keeps that for equal scores.
    std::stable_sort(outgoing.begin(), outgoing.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<RankedDetection> ranked;
    ranked.reserve(outgoing.size());
    for (const auto& [score, target] : outgoing) {
      const auto t = targets.find(target);
      ranked.push_back({score, t != targets.end() && gt_targets.count(t->second) > 0});
    }
    aps.push_back(average_precision(ranked, gt_targets.size()));
  }
  return aps;
}

double top_score(const EdgeSet& gt_edges, const TopologyEdges& pred_edges, const MatchResult& source_match,
                 const MatchResult& target_match) {
  const auto aps = topology_vertex_aps(gt_edges, pred_edges, source_match.pred_to_gt(), target_match.pred_to_gt());
  if (aps.empty()) return 1.0;
  return std::accumulate(aps.begin(), aps.end(), 0.0) / static_cast<double>(aps.size());
}

TopologyEdges manipulate_scores(const TopologyEdges& edges) {
  TopologyEdges out;
  for (const auto& [key, score] : edges) out.emplace(key, score + (score > kManipulationCutoff ? 1.0 : 0.0));
  return out;
}

double ols(double det_l, double det_t, double top_ll, double top_lt) {
  for (double v : {det_l, det_t, top_ll, top_lt}) require(v >= 0.0 && v <= 1.0, "OLS inputs must be in [0, 1]");
  return 0.25 * (det_l + det_t + std::sqrt(top_ll) + std::sqrt(top_lt));
}

double render_score(double v) { return std::round(v * 1000.0) / 10.0; }

std::string EvalReport::to_json(int indent) const {
  nlohmann::ordered_json j;
  j["frames"] = frames;
  j["det_l"] = det_l;
  j["det_l_ch"] = det_l_ch;
  j["det_t"] = det_t;
  j["top_ll"] = top_ll;
  j["top_lt"] = top_lt;
  j["ols"] = ols;
  j["rendered"] = {{"DET_l", render_score(det_l)},   {"DET_l_ch", render_score(det_l_ch)},
                   {"DET_t", render_score(det_t)},   {"TOP_ll", render_score(top_ll)},
                   {"TOP_lt", render_score(top_lt)}, {"OLS", render_score(ols)}};
  return j.dump(indent);
}

std::string EvalReport::to_table() const {
  std::ostringstream os;
  os << std::fixed << std::setprecision(1);
  os << "| DET_l | DET_l_ch | DET_t | TOP_ll | TOP_lt |  OLS  |\n";
  os << "|-------|----------|-------|--------|--------|-------|\n";
  os << "| " << std::setw(5) << render_score(det_l) << " | " << std::setw(8) << render_score(det_l_ch) << " | "
     << std::setw(5) << render_score(det_t) << " | " << std::setw(6) << render_score(top_ll) << " | "
     << std::setw(6) << render_score(top_lt) << " | " << std::setw(5) << render_score(ols) << " |\n";
  return os.str();
}

namespace {

TopologyEdges prepare_edges(const TopologyEdges& edges, const EvalOptions& options) {
  TopologyEdges out = options.manipulate ? manipulate_scores(edges) : edges;
  if (options.score_threshold) {
    std::erase_if(out, [&](const auto& kv) { return kv.second <= *options.score_threshold; });
  }
  return out;
}

}  // namespace

EvalReport evaluate(std::span<const SceneAnnotation> scenes, const EvalOptions& options) {
  if (scenes.empty()) raise(ErrorKind::kSchemaViolation, "evaluation needs at least one scene");
  for (const auto& s : scenes) validate_scene(s);

  const std::size_t n = scenes.size();
  struct FrameWork {
    std::optional<LaneFrame> lanes;
    MatchResult te_match;
    MatchResult topo_lane_match;
    TopologyEdges ll;
    TopologyEdges lt;
  };
  std::vector<FrameWork> work(n);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& s = scenes[i];
      auto& w = work[i];
      w.lanes = build_lane_frame(s.pred_centerlines, s.gt_centerlines, true);
      w.te_match = match_traffic_elements(s.pred_traffic_elements, s.gt_traffic_elements);
      w.topo_lane_match = match_lane_frame(*w.lanes, DistanceKernel::kFrechet, kTopologyLaneThreshold);
      w.ll = prepare_edges(s.pred_topology_ll, options);
      w.lt = prepare_edges(s.pred_topology_lt, options);
    }
  });

  std::vector<LaneFrame> lanes;
  lanes.reserve(n);
  std::vector<const std::map<InstanceId, TrafficElement>*> te_preds, te_gts;
  std::vector<MatchResult> te_matches;
  std::vector<double> ll_aps, lt_aps;
  for (std::size_t i = 0; i < n; ++i) {
    auto& w = work[i];
    lanes.push_back(std::move(*w.lanes));
    te_preds.push_back(&scenes[i].pred_traffic_elements);
    te_gts.push_back(&scenes[i].gt_traffic_elements);
    te_matches.push_back(w.te_match);

    const auto lane_map = w.topo_lane_match.pred_to_gt();
    const auto te_map = w.te_match.pred_to_gt();
    const auto ll = topology_vertex_aps(scenes[i].gt_topology_ll, w.ll, lane_map, lane_map);
    const auto lt = topology_vertex_aps(scenes[i].gt_topology_lt, w.lt, lane_map, te_map);
    ll_aps.insert(ll_aps.end(), ll.begin(), ll.end());
    lt_aps.insert(lt_aps.end(), lt.begin(), lt.end());
  }

  const auto mean_or_vacuous = [](const std::vector<double>& v) {
    if (v.empty()) return 1.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };

  EvalReport r;
  r.frames = n;
  r.det_l = lane_detection_score(lanes, DistanceKernel::kFrechet, kFrechetThresholds);
  r.det_l_ch = lane_detection_score(lanes, DistanceKernel::kChamfer, kChamferThresholds);
  r.det_t = traffic_element_score(te_preds, te_gts, te_matches);
  r.top_ll = mean_or_vacuous(ll_aps);
  r.top_lt = mean_or_vacuous(lt_aps);
  r.ols = ols(r.det_l, r.det_t, r.top_ll, r.top_lt);
  return r;
}

}  // namespace bevkit
